//! Search for SIC fiducials covariant under the multi-qubit Pauli group, by
//! minimizing the fourth-power frame potential on the unit sphere.
//!
//! For `d = 2^m` the displacements `D(a, b)|x> = (-1)^{b.x} |x + a>` range
//! over `(a, b)` in F_2^{2m}. Basis indices are lexicographic indices of
//! F_2^m, so `x + a` is the XOR of indices and `b.x` is the parity of their
//! AND.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::heisenberg::{schroedinger_rep, HeisenbergGroup};
use crate::linalg::{c, CMatrix, CVector, UnitaryMatrix};
use crate::lineset::{Construction, LineSet};

/// Restarts run per batch. Fixed so that the result does not depend on the
/// number of worker threads.
const BATCH: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub d: usize,
    pub restarts: usize,
    pub max_iters: usize,
    /// First trial step of the line search.
    pub initial_step: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    pub seed: u64,
    /// Accept once `potential_excess(v) <= target_tol`.
    pub target_tol: f64,
}

impl SearchConfig {
    /// Defaults: 8 restarts for `d = 2`, 64 for `d = 8`, 5000 iterations each.
    pub fn new(d: usize, seed: u64) -> Self {
        SearchConfig {
            d,
            restarts: if d <= 2 { 8 } else { 64 },
            max_iters: 5000,
            initial_step: 0.1,
            armijo: 1e-4,
            seed,
            target_tol: 1e-24,
        }
    }

    fn validate(&self) -> Result<usize> {
        let m = match self.d {
            2 => 1,
            8 => 3,
            d if d.is_power_of_two() && d > 1 => d.trailing_zeros() as usize,
            d => return Err(Error::InvalidParameter(format!("fiducial search needs d = 2^m, got {d}"))),
        };
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be at least 1".into()));
        }
        if !(self.target_tol > 0.0) {
            return Err(Error::InvalidParameter("target_tol must be positive".into()));
        }
        Ok(m)
    }
}

/// The `d^2 - 1` nontrivial Pauli displacements of C^d, `d = 2^m`.
#[derive(Clone, Debug)]
pub struct PauliDisplacements {
    d: usize,
    /// `(a, b)` index pairs, lexicographic, identity excluded.
    pairs: Vec<(usize, usize)>,
}

impl PauliDisplacements {
    pub fn new(d: usize) -> Self {
        assert!(d.is_power_of_two() && d > 1);
        let pairs = (0..d * d).skip(1).map(|k| (k / d, k % d)).collect();
        PauliDisplacements { d, pairs }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    #[inline]
    fn sign(b: usize, x: usize) -> f64 {
        if (b & x).count_ones() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `D(a, b) v`.
    pub fn apply(a: usize, b: usize, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![c(0.0, 0.0); v.len()];
        for (x, &vx) in v.iter().enumerate() {
            out[x ^ a] = vx * Self::sign(b, x);
        }
        out
    }

    /// `<v, D(a, b) v>`.
    #[inline]
    fn overlap(a: usize, b: usize, v: &[Complex64]) -> Complex64 {
        v.iter()
            .enumerate()
            .fold(c(0.0, 0.0), |acc, (x, &vx)| acc + v[x ^ a].conj() * vx * Self::sign(b, x))
    }

    /// All nontrivial overlaps `<v, D(g) v>`.
    pub fn overlaps(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.pairs.iter().map(|&(a, b)| Self::overlap(a, b, v)).collect()
    }
}

/// `(d - 1) / (d + 1)`, the minimum of the frame potential on unit vectors.
pub fn potential_lower_bound(d: usize) -> f64 {
    (d as f64 - 1.0) / (d as f64 + 1.0)
}

/// `f(v) = sum_{g != 0} |<v, D(g) v>|^4`.
pub fn frame_potential(disp: &PauliDisplacements, v: &[Complex64]) -> f64 {
    disp.overlaps(v).iter().map(|mu| mu.norm_sqr().powi(2)).sum()
}

/// `sum_{g != 0} (|mu_g|^2 - 1/(d+1))^2`. Equal to
/// `f(v) - (d-1)/(d+1)` on unit vectors, but free of cancellation near a
/// fiducial, so it can be driven far below `f`'s rounding error.
pub fn potential_excess(disp: &PauliDisplacements, v: &[Complex64]) -> f64 {
    let shift = 1.0 / (disp.d as f64 + 1.0);
    disp.overlaps(v).iter().map(|mu| (mu.norm_sqr() - shift).powi(2)).sum()
}

/// `sum (|mu_g|^2 - shift)^2` and its real gradient.
fn shifted_with_gradient(disp: &PauliDisplacements, v: &[Complex64], shift: f64) -> (f64, Vec<Complex64>) {
    let mut f = 0.0;
    let mut grad = vec![c(0.0, 0.0); v.len()];
    for &(a, b) in &disp.pairs {
        let mu = PauliDisplacements::overlap(a, b, v);
        let w = mu.norm_sqr() - shift;
        f += w * w;
        // d|mu|^2 / dconj(v) = conj(mu) D v + mu D* v
        let coef = 4.0 * w;
        for (x, &vx) in v.iter().enumerate() {
            let s = PauliDisplacements::sign(b, x);
            grad[x ^ a] += vx * (mu.conj() * coef * s);
            grad[x] += v[x ^ a] * (mu * coef * s);
        }
    }
    (f, grad)
}

/// The potential and its real gradient, packed as `df/dRe v + i df/dIm v`
/// (that is, `2 df/dconj(v)`). Valid for any `v`, not only unit vectors.
pub fn frame_potential_with_gradient(disp: &PauliDisplacements, v: &[Complex64]) -> (f64, Vec<Complex64>) {
    shifted_with_gradient(disp, v, 0.0)
}

/// `potential_excess` and its real gradient. Off the sphere this differs
/// from the potential's gradient only in the radial direction.
pub fn potential_excess_with_gradient(disp: &PauliDisplacements, v: &[Complex64]) -> (f64, Vec<Complex64>) {
    shifted_with_gradient(disp, v, 1.0 / (disp.d as f64 + 1.0))
}

fn normalize(v: &mut [Complex64]) {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in v.iter_mut() {
        *z /= n;
    }
}

fn re_inner(u: &[Complex64], v: &[Complex64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a.conj() * b).re).sum()
}

/// Tangent projection at a unit vector `v`: removes the radial component.
fn project(v: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
    let r = re_inner(v, g);
    g.iter().zip(v).map(|(gi, vi)| gi - vi * r).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestartOutcome {
    pub restart: usize,
    pub vector: Vec<Complex64>,
    /// `potential_excess` at `vector`.
    pub excess: f64,
    pub iterations: usize,
}

/// One descent from a seeded random start: Polak–Ribière conjugate
/// gradients on the sphere with a backtracking Armijo line search.
pub fn descend(cfg: &SearchConfig, disp: &PauliDisplacements, restart: usize) -> RestartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64);
    let mut v: Vec<Complex64> = (0..cfg.d)
        .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    normalize(&mut v);

    let (mut f, g) = potential_excess_with_gradient(disp, &v);
    let mut grad = project(&v, &g);
    let mut dir: Vec<Complex64> = grad.iter().map(|z| -z).collect();
    let mut step = cfg.initial_step;
    let mut iterations = 0;
    while iterations < cfg.max_iters && f > cfg.target_tol {
        iterations += 1;
        let mut slope = re_inner(&grad, &dir);
        if slope >= 0.0 {
            dir = grad.iter().map(|z| -z).collect();
            slope = -re_inner(&grad, &grad);
        }
        if slope.abs() < 1e-30 {
            break;
        }
        let mut t = (step * 2.0).min(1.0);
        let mut accepted = None;
        while t > 1e-18 {
            let mut trial: Vec<Complex64> = v.iter().zip(&dir).map(|(a, b)| a + b * t).collect();
            normalize(&mut trial);
            let ft = potential_excess(disp, &trial);
            if ft <= f + cfg.armijo * t * slope {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((next, _)) = accepted else {
            break;
        };
        step = t;
        v = next;
        let (fv, g) = potential_excess_with_gradient(disp, &v);
        f = fv;
        let new_grad = project(&v, &g);
        let denom = re_inner(&grad, &grad);
        let diff: Vec<Complex64> = new_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let beta = if denom > 0.0 { (re_inner(&new_grad, &diff) / denom).max(0.0) } else { 0.0 };
        let moved = project(&v, &dir);
        dir = new_grad.iter().zip(&moved).map(|(gi, di)| -gi + di * beta).collect();
        grad = new_grad;
    }
    RestartOutcome { restart, vector: v, excess: f, iterations }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchReport {
    pub fiducial: Vec<Complex64>,
    /// Frame potential of the fiducial.
    pub value: f64,
    /// `potential_excess` of the fiducial.
    pub excess: f64,
    pub winning_restart: usize,
    pub restarts_run: usize,
    pub total_iterations: usize,
}

/// Multi-restart minimization of the frame potential. Restarts run in
/// batches of 8 (in parallel within a batch); the search stops after the
/// first batch containing a converged restart and returns the candidate
/// with the smallest `(excess, restart index)`.
pub fn search_fiducial(cfg: &SearchConfig) -> Result<SearchReport> {
    cfg.validate()?;
    let disp = PauliDisplacements::new(cfg.d);
    let mut best: Option<RestartOutcome> = None;
    let mut total_iterations = 0;
    let mut run = 0;
    while run < cfg.restarts {
        let end = (run + BATCH).min(cfg.restarts);
        let outcomes: Vec<RestartOutcome> = (run..end).into_par_iter().map(|k| descend(cfg, &disp, k)).collect();
        run = end;
        for o in outcomes {
            total_iterations += o.iterations;
            let better = best
                .as_ref()
                .is_none_or(|b| (o.excess, o.restart) < (b.excess, b.restart));
            if better {
                best = Some(o);
            }
        }
        if best.as_ref().is_some_and(|b| b.excess <= cfg.target_tol) {
            break;
        }
    }
    let best = best.expect("at least one restart");
    let value = frame_potential(&disp, &best.vector);
    if best.excess > cfg.target_tol {
        return Err(Error::NotConverged { best_value: value, best_excess: best.excess });
    }
    Ok(SearchReport {
        fiducial: best.vector,
        value,
        excess: best.excess,
        winning_restart: best.restart,
        restarts_run: run,
        total_iterations,
    })
}

/// The `d^2` lines `D(a, b) v`, `(a, b)` in lexicographic order.
pub fn orbit_lineset(v: &[Complex64], meta: Option<Construction>) -> Result<LineSet> {
    let d = v.len();
    if !d.is_power_of_two() || d < 2 {
        return Err(Error::InvalidParameter(format!("orbit dimension {d} is not a power of two")));
    }
    let mut unit = v.to_vec();
    normalize(&mut unit);
    let mut vectors = CMatrix::zeros(d, d * d);
    for k in 0..d * d {
        let col = PauliDisplacements::apply(k / d, k % d, &unit);
        for (i, z) in col.into_iter().enumerate() {
            vectors[(i, k)] = z;
        }
    }
    LineSet::new(vectors, meta)
}

/// Searches and returns the orbit line set tagged with case (i) or (ii).
pub fn construct_sic(cfg: &SearchConfig) -> Result<(LineSet, SearchReport)> {
    let report = search_fiducial(cfg)?;
    let meta = match cfg.d {
        2 => Some(Construction::CaseI { seed: cfg.seed, restarts: cfg.restarts, max_iters: cfg.max_iters }),
        8 => Some(Construction::CaseII { seed: cfg.seed, restarts: cfg.restarts, max_iters: cfg.max_iters }),
        _ => None,
    };
    let lines = orbit_lineset(&report.fiducial, meta)?;
    Ok((lines, report))
}

/// The displacement generators `D(e_i, 0)`, `D(0, e_i)` as unitaries.
pub fn pauli_generators(d: usize) -> Result<Vec<UnitaryMatrix>> {
    let m = d.trailing_zeros() as usize;
    let group = HeisenbergGroup::new(2, m)?;
    group.standard_generators().iter().map(|e| schroedinger_rep(e, 1)).collect()
}

#[derive(Clone, Copy, Debug)]
enum Gate {
    Hadamard(usize),
    Phase(usize),
    Cnot(usize, usize),
}

/// Applies a Clifford gate to every column of `u` (left multiplication).
/// Qubit `i` is coordinate `i` of F_2^m, i.e. index bit `m - 1 - i`.
fn apply_gate(u: &mut CMatrix, gate: Gate, m: usize) {
    let bit = |q: usize| 1usize << (m - 1 - q);
    let d = u.nrows();
    match gate {
        Gate::Hadamard(q) => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let b = bit(q);
            for col in 0..u.ncols() {
                for x in (0..d).filter(|x| x & b == 0) {
                    let (lo, hi) = (u[(x, col)], u[(x | b, col)]);
                    u[(x, col)] = (lo + hi) * h;
                    u[(x | b, col)] = (lo - hi) * h;
                }
            }
        }
        Gate::Phase(q) => {
            let b = bit(q);
            for col in 0..u.ncols() {
                for x in (0..d).filter(|x| x & b != 0) {
                    u[(x, col)] *= c(0.0, 1.0);
                }
            }
        }
        Gate::Cnot(ctl, tgt) => {
            let (bc, bt) = (bit(ctl), bit(tgt));
            for col in 0..u.ncols() {
                for x in (0..d).filter(|x| x & bc != 0 && x & bt == 0) {
                    let tmp = u[(x, col)];
                    u[(x, col)] = u[(x | bt, col)];
                    u[(x | bt, col)] = tmp;
                }
            }
        }
    }
}

/// Looks for Clifford unitaries mapping the Pauli orbit `lines` onto itself.
///
/// A seeded random walk on the Clifford group (Hadamard, phase and CNOT
/// gates) is tested at every step: a Clifford maps the orbit to itself iff
/// it sends line 0 to some line of the orbit. Returns up to `wanted`
/// unitaries with pairwise distinct actions on line 0 and line 1, or fewer
/// if `max_steps` runs out.
pub fn clifford_symmetries(lines: &LineSet, seed: u64, wanted: usize, max_steps: usize) -> Vec<UnitaryMatrix> {
    let d = lines.d();
    let m = d.trailing_zeros() as usize;
    let mut gates: Vec<Gate> = (0..m).flat_map(|q| [Gate::Hadamard(q), Gate::Phase(q)]).collect();
    for a in 0..m {
        for b in 0..m {
            if a != b {
                gates.push(Gate::Cnot(a, b));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v0 = lines.column(0);
    let vecs = lines.vectors();
    let mut walk = CMatrix::identity(d, d);
    let mut found: Vec<UnitaryMatrix> = Vec::new();
    let mut signatures: Vec<(usize, usize)> = Vec::new();
    let hit = |w: &CVector| -> Option<usize> {
        let overlaps = vecs.adjoint() * w;
        overlaps.iter().position(|z| z.norm() > 1.0 - 1e-8)
    };
    for _ in 0..max_steps {
        if found.len() >= wanted {
            break;
        }
        let gate = gates[rng.random_range(0..gates.len())];
        apply_gate(&mut walk, gate, m);
        let Some(i0) = hit(&(&walk * &v0)) else { continue };
        let Some(i1) = hit(&(&walk * lines.column(1))) else { continue };
        if signatures.contains(&(i0, i1)) {
            continue;
        }
        if let Ok(u) = UnitaryMatrix::new(walk.clone()) {
            signatures.push((i0, i1));
            found.push(u);
        }
    }
    found
}
