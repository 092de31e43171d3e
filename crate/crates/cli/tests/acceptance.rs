//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use equiline::io::read_lineset;
use equiline_core::action::{
    certify_action, certify_multiplicity, induced_permutations, scalar_kernel_check, MATCH_TOL, STABILIZER_LIMIT,
};
use equiline_core::fiducial::{
    frame_potential, frame_potential_with_gradient, orbit_lineset, pauli_generators, potential_lower_bound,
    search_fiducial, PauliDisplacements, SearchConfig,
};
use equiline_core::finfield::{enumerate_hyperplanes, HyperplaneType, QuadForm2};
use equiline_core::heisenberg::{rep_indices, schroedinger_rep, HeisenbergGroup};
use equiline_core::linalg::{c, max_abs_diff, root_of_unity, CMatrix, UnitaryMatrix};
use equiline_core::lineset::{
    certify_equiangular, certify_tight, dimension_pair, gram, welch_exact, welch_residual, AngleCertificate, LineSet,
};
use equiline_core::perm::{group_order, two_transitivity};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Runs `equiline construct ...` into `dir/name` and loads the result.
fn construct(dir: &Path, name: &str, args: &[&str]) -> Result<LineSet, String> {
    let out = dir.join(name);
    let status = Command::new(env!("CARGO_BIN_EXE_equiline"))
        .arg("construct")
        .args(args)
        .arg("--out")
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!("construct {args:?} failed: {}", String::from_utf8_lossy(&status.stderr)));
    }
    read_lineset(&out)
}

fn certify(l: &LineSet, tol: f64) -> Result<AngleCertificate, String> {
    let g = gram(l);
    let cert = certify_equiangular(&g, tol).map_err(|e| e.to_string())?;
    ensure(certify_tight(&g, l.d(), tol), || format!("(n, d) = ({}, {}) is not tight at {tol:e}", l.n(), l.d()))?;
    l.check_span().map_err(|e| e.to_string())?;
    Ok(cert)
}

fn exact_case_iii(l: &LineSet, n: usize, d: usize, numer: i64) -> Outcome {
    ensure(l.n() == n && l.d() == d, || format!("got (n, d) = ({}, {})", l.n(), l.d()))?;
    let cert = certify(l, 0.0)?;
    ensure(cert.exact && cert.max_dev == 0.0, || "certificate is not exact".into())?;
    let (p, q) = cert.alpha_exact.ok_or("no exact overlap")?;
    ensure(p * d as i64 == numer * q, || format!("overlap {p}/{q}, expected {numer}/{d}"))?;
    ensure(welch_exact((p, q), n, d), || format!("{p}/{q} misses the Welch equality"))?;
    Ok(format!("d={d}: {p}/{q} exact"))
}

fn criterion_1(dir: &Path) -> Outcome {
    let minus = construct(dir, "iii-2-minus.json", &["--case", "iii", "--m", "2", "--type", "minus"])?;
    let plus = construct(dir, "iii-2-plus.json", &["--case", "iii", "--m", "2", "--type", "plus"])?;
    Ok(format!("{}; {}", exact_case_iii(&minus, 16, 6, 2)?, exact_case_iii(&plus, 16, 10, 2)?))
}

fn criterion_2(dir: &Path) -> Outcome {
    let minus = construct(dir, "iii-3-minus.json", &["--case", "iii", "--m", "3", "--type", "minus"])?;
    let plus = construct(dir, "iii-3-plus.json", &["--case", "iii", "--m", "3", "--type", "plus"])?;
    // 4/28 = 1/7 and 4/36 = 1/9
    Ok(format!("{}; {}", exact_case_iii(&minus, 64, 28, 4)?, exact_case_iii(&plus, 64, 36, 4)?))
}

fn criterion_3(dir: &Path) -> Outcome {
    let mut notes = Vec::new();
    for (p, eigen, d, alpha) in [(3, "minus", 3, 0.5), (3, "plus", 6, 0.25), (5, "minus", 10, 0.25), (5, "plus", 15, 1.0 / 6.0)] {
        let name = format!("iv-{p}-1-{eigen}.json");
        let l = construct(dir, &name, &["--case", "iv", "--p", &p.to_string(), "--m", "1", "--eigen", eigen])?;
        ensure(l.n() == p * p && l.d() == d, || format!("p={p} {eigen}: got (n, d) = ({}, {})", l.n(), l.d()))?;
        let cert = certify(&l, 1e-9)?;
        ensure((cert.alpha - alpha).abs() <= 1e-9, || format!("p={p} {eigen}: alpha = {}", cert.alpha))?;
        ensure(welch_residual(cert.alpha, l.n(), d).abs() <= 1e-9, || format!("p={p} {eigen}: Welch"))?;
        if d == 3 {
            ensure((cert.alpha.powi(2) - 0.25).abs() <= 1e-9, || "SIC alpha^2 != 1/4".into())?;
        }
        notes.push(format!("d={d} alpha={:.12}", cert.alpha));
    }
    Ok(notes.join("; "))
}

fn criterion_4(dir: &Path) -> Outcome {
    let mut notes = Vec::new();
    for (eigen, d) in [("minus", 36), ("plus", 45)] {
        let l = construct(dir, &format!("iv-3-2-{eigen}.json"), &["--case", "iv", "--p", "3", "--m", "2", "--eigen", eigen])?;
        ensure(l.n() == 81 && l.d() == d, || format!("got (n, d) = ({}, {})", l.n(), l.d()))?;
        let cert = certify(&l, 1e-8)?;
        notes.push(format!("d={d} alpha={:.12} max_dev={:.1e}", cert.alpha, cert.max_dev));
    }
    Ok(notes.join("; "))
}

fn sic_criterion(dir: &Path, d: usize, potential_tol: f64, alpha_tol: f64) -> Outcome {
    let cfg = SearchConfig::new(d, 1);
    let report = search_fiducial(&cfg).map_err(|e| e.to_string())?;
    let again = search_fiducial(&cfg).map_err(|e| e.to_string())?;
    ensure(report == again, || "search is not deterministic".into())?;
    let bound = potential_lower_bound(d);
    ensure((report.value - bound).abs() <= potential_tol, || format!("f = {}", report.value))?;
    let lines = orbit_lineset(&report.fiducial, None).map_err(|e| e.to_string())?;
    ensure(lines.n() == d * d, || "orbit size".into())?;
    let cert = certify(&lines, alpha_tol)?;
    let target = 1.0 / (d as f64 + 1.0);
    ensure((cert.alpha.powi(2) - target).abs() <= alpha_tol, || format!("alpha^2 = {}", cert.alpha.powi(2)))?;
    // the CLI path produces the same lines
    let case = if d == 2 { "i" } else { "ii" };
    let file = construct(dir, &format!("sic-{d}.json"), &["--case", case, "--seed", "1"])?;
    ensure(max_abs_diff(file.vectors(), lines.vectors()) == 0.0, || "CLI output differs from library search".into())?;
    Ok(format!(
        "f - (d-1)/(d+1) = {:.1e}, alpha^2 = {:.15}, restart {} of {}",
        report.value - bound,
        cert.alpha.powi(2),
        report.winning_restart,
        report.restarts_run
    ))
}

fn criterion_5(dir: &Path) -> Outcome {
    sic_criterion(dir, 2, 1e-10, 1e-8)
}

fn criterion_6(dir: &Path) -> Outcome {
    sic_criterion(dir, 8, 1e-8, 1e-7)
}

fn criterion_7() -> Outcome {
    let mut notes = Vec::new();
    for m in 1..=4usize {
        let q = QuadForm2::standard_form(m);
        let minus = enumerate_hyperplanes(&q, HyperplaneType::Minus).map_err(|e| e.to_string())?.len();
        let plus = enumerate_hyperplanes(&q, HyperplaneType::Plus).map_err(|e| e.to_string())?.len();
        let h = 1usize << (m - 1);
        let full = 1usize << m;
        ensure(minus == h * (full - 1) && plus == h * (full + 1), || format!("m={m}: ({minus}, {plus})"))?;
        notes.push(format!("m={m}: {minus}/{plus}"));
    }
    Ok(notes.join(", "))
}

/// Every line set built for criteria 1-6, loaded from the CLI outputs.
fn constructed_sets(dir: &Path) -> Result<Vec<(String, LineSet)>, String> {
    let mut names: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".json") && !n.ends_with(".manifest.json"))
        .collect();
    names.sort();
    names.into_iter().map(|n| read_lineset(&dir.join(&n)).map(|l| (n, l))).collect()
}

/// The regular translation subgroup: sign diagonals for case (iii),
/// `D(e) (x) I` for case (iv), Paulis for the SIC orbits.
fn translations(l: &LineSet) -> Result<Vec<UnitaryMatrix>, String> {
    let meta = l.meta().ok_or("missing meta")?;
    match meta.tag() {
        "iii" => (0..l.n())
            .map(|j| {
                let scale = (l.d() as f64).sqrt();
                let diag = CMatrix::from_diagonal(&l.column(j).map(|z| z * scale));
                UnitaryMatrix::new(diag).map_err(|e| e.to_string())
            })
            .collect(),
        "iv" => {
            let q = (l.n() as f64).sqrt().round() as usize;
            let p = (3..=q as u32).find(|p| q % *p as usize == 0).unwrap();
            let m = (q as f64).log(p as f64).round() as usize;
            let group = HeisenbergGroup::new(p, m).map_err(|e| e.to_string())?;
            let id = UnitaryMatrix::identity(l.d() / q);
            group
                .standard_generators()
                .iter()
                .map(|e| schroedinger_rep(e, 1).map(|u| u.kron(&id)).map_err(|e| e.to_string()))
                .collect()
        }
        _ => pauli_generators(l.d()).map_err(|e| e.to_string()),
    }
}

fn criterion_8(dir: &Path) -> Outcome {
    let sets = constructed_sets(dir)?;
    ensure(sets.len() == 12, || format!("expected 12 constructed sets, found {}", sets.len()))?;
    let mut notes = Vec::new();
    for (name, l) in &sets {
        let cert = certify_action(l, MATCH_TOL).map_err(|e| format!("{name}: {e}"))?;
        ensure(cert.two_transitive, || format!("{name}: not 2-transitive"))?;
        let e = induced_permutations(l, &translations(l)?, MATCH_TOL).map_err(|e| format!("{name}: {e}"))?;
        ensure(!two_transitivity(&e), || format!("{name}: translations alone are 2-transitive"))?;
        ensure(group_order(&e) == l.n() as u128, || format!("{name}: translation group is not regular"))?;
        let expected = match name.as_str() {
            "iii-2-minus.json" | "iii-2-plus.json" => Some(11520),
            "iv-3-1-minus.json" | "iv-3-1-plus.json" => Some(216),
            _ => None,
        };
        if let Some(order) = expected {
            ensure(cert.group_order == order, || format!("{name}: order {} != {order}", cert.group_order))?;
            notes.push(format!("{name} order {order}"));
        }
    }
    Ok(format!("{} sets 2-transitive; {}", sets.len(), notes.join(", ")))
}

fn criterion_9(dir: &Path) -> Outcome {
    let mut notes = Vec::new();
    for name in ["iii-2-minus.json", "iii-2-plus.json", "iv-3-1-minus.json", "iv-3-1-plus.json"] {
        let l = read_lineset(&dir.join(name))?;
        let cert = certify_multiplicity(&l, STABILIZER_LIMIT).map_err(|e| format!("{name}: {e}"))?;
        ensure(cert.rank == 1 && cert.range_is_line0, || format!("{name}: rank {}, residual {:.1e}", cert.rank, cert.range_residual))?;
        notes.push(format!("{name} |H|={} rank 1", cert.group_size));
    }
    for (name, l) in constructed_sets(dir)? {
        let mate = dimension_pair(l.n(), l.d()).map_err(|e| format!("{name}: {e}"))?;
        ensure(l.d() + mate == l.n(), || format!("{name}: d + d' != n"))?;
    }
    Ok(notes.join(", ") + "; d + d' = n for all")
}

fn criterion_10(dir: &Path) -> Outcome {
    let sets = constructed_sets(dir)?;
    for (name, l) in &sets {
        ensure(l.n() > 81 || scalar_kernel_check(l), || format!("{name}: commutant is not scalar"))?;
    }
    Ok(format!("commutant dimension 1 for {} sets", sets.len()))
}

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_hom = 0.0f64;
    let mut worst_center = 0.0f64;
    for (p, m) in [(3, 1), (5, 1), (3, 2), (2, 3)] {
        let g = HeisenbergGroup::new(p, m).map_err(|e| e.to_string())?;
        let elements = g.elements();
        for &j in &rep_indices(p) {
            for _ in 0..200 {
                let x = &elements[rng.random_range(0..elements.len())];
                let y = &elements[rng.random_range(0..elements.len())];
                let dx = schroedinger_rep(x, j).map_err(|e| e.to_string())?;
                let dy = schroedinger_rep(y, j).map_err(|e| e.to_string())?;
                let dxy = schroedinger_rep(&x.multiply(y).map_err(|e| e.to_string())?, j).map_err(|e| e.to_string())?;
                worst_hom = worst_hom.max(max_abs_diff(&(dx.matrix() * dy.matrix()), dxy.matrix()));
            }
            let dz = schroedinger_rep(&g.central_generator(), j).map_err(|e| e.to_string())?;
            let expect = CMatrix::identity(g.rep_dim(), g.rep_dim()) * root_of_unity(j as i64, g.phase_modulus());
            worst_center = worst_center.max(max_abs_diff(dz.matrix(), &expect));
        }
    }
    ensure(worst_hom < 1e-12 && worst_center < 1e-12, || format!("residuals {worst_hom:e}, {worst_center:e}"))?;
    Ok(format!("homomorphism residual {worst_hom:.1e}, centre residual {worst_center:.1e}"))
}

fn criterion_12() -> Outcome {
    let h = 1e-5;
    let mut worst = 0.0f64;
    for d in [2usize, 8] {
        let disp = PauliDisplacements::new(d);
        let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
        for _ in 0..20 {
            let v: Vec<_> = (0..d).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let v: Vec<_> = v.iter().map(|z| z / norm).collect();
            let (_, grad) = frame_potential_with_gradient(&disp, &v);
            let mut err = 0.0;
            let mut scale = 0.0;
            for i in 0..d {
                for unit in [c(1.0, 0.0), c(0.0, 1.0)] {
                    let mut plus = v.clone();
                    let mut minus = v.clone();
                    plus[i] += unit * h;
                    minus[i] -= unit * h;
                    let fd = (frame_potential(&disp, &plus) - frame_potential(&disp, &minus)) / (2.0 * h);
                    let analytic = if unit.re == 1.0 { grad[i].re } else { grad[i].im };
                    err += (fd - analytic).powi(2);
                    scale += fd * fd;
                }
            }
            worst = worst.max((err / scale).sqrt());
        }
    }
    ensure(worst < 1e-5, || format!("relative error {worst:e}"))?;
    Ok(format!("worst relative error {worst:.1e} over 40 points"))
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let dir = dir.path();
    let criteria: Vec<(&str, Duration, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("case iii m=2", Duration::from_secs(1), Box::new(|| criterion_1(dir))),
        ("case iii m=3", Duration::from_secs(5), Box::new(|| criterion_2(dir))),
        ("case iv p=3,5 m=1", Duration::from_secs(5), Box::new(|| criterion_3(dir))),
        ("case iv p=3 m=2", Duration::from_secs(60), Box::new(|| criterion_4(dir))),
        ("case i search", Duration::from_secs(1), Box::new(|| criterion_5(dir))),
        ("case ii search", Duration::from_secs(600), Box::new(|| criterion_6(dir))),
        ("hyperplane census", Duration::from_secs(10), Box::new(criterion_7)),
        ("2-transitivity and orders", Duration::MAX, Box::new(|| criterion_8(dir))),
        ("multiplicity one", Duration::MAX, Box::new(|| criterion_9(dir))),
        ("scalar commutant", Duration::MAX, Box::new(|| criterion_10(dir))),
        ("Heisenberg representation", Duration::MAX, Box::new(criterion_11)),
        ("gradient check", Duration::MAX, Box::new(criterion_12)),
    ];
    let mut failed = 0;
    for (k, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *limit => Err(format!("{detail} (took {elapsed:.2?}, limit {limit:?})")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{elapsed:.2?}]", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{elapsed:.2?}]", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
