//! Permutation actions of symmetry unitaries on line sets, and the
//! certificates built on them: 2-transitivity, group order, the
//! multiplicity-one projector for the line stabilizer, and the commutant of
//! the line projectors.

use std::collections::{HashMap, HashSet, VecDeque};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fiducial::{clifford_symmetries, pauli_generators};
use crate::finfield::{parity, Hyperplane, QuadForm2};
use crate::heisenberg::{schroedinger_rep, HeisenbergGroup};
use crate::linalg::{c, commutant_dimension, hermitian_eigenvalues, max_abs_diff, numerical_rank, CMatrix, UnitaryMatrix};
use crate::lineset::{case_iii_basis, certify_tight, gram, Construction, GramMatrix, LineSet};
use crate::perm::{group_order, is_transitive, two_transitivity, Permutation};
use crate::weil::{parity_eigenspace, weil_generators};

/// Default overlap slack when matching image lines.
pub const MATCH_TOL: f64 = 1e-8;

/// Largest matrix group `line_stabilizer` will enumerate.
pub const STABILIZER_LIMIT: usize = 100_000;

/// Clifford symmetries requested from the random walk for cases (i)/(ii).
const CLIFFORD_WANTED: usize = 12;
const CLIFFORD_STEPS: usize = 1_000_000;

/// The permutation `i -> j` with `U <v_i> = <v_j>`.
pub fn induced_permutation(l: &LineSet, u: &UnitaryMatrix, tol: f64) -> Result<Permutation> {
    if u.dim() != l.d() {
        return Err(Error::ParameterMismatch(format!("unitary of size {} on lines in C^{}", u.dim(), l.d())));
    }
    let images = u.matrix() * l.vectors();
    let overlaps = l.vectors().adjoint() * images;
    let n = l.n();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut hits = (0..n).filter(|&j| overlaps[(j, i)].norm() >= 1.0 - tol);
        let Some(j) = hits.next() else {
            return Err(Error::NotASymmetry(format!("line {i} has no image in the set")));
        };
        if hits.next().is_some() {
            return Err(Error::NotASymmetry(format!("line {i} matches several lines")));
        }
        out.push(j);
    }
    Permutation::new(out).map_err(|_| Error::NotASymmetry("two lines share an image".into()))
}

fn check_meta_shape(l: &LineSet, n: usize, d: usize) -> Result<()> {
    if (l.n(), l.d()) != (n, d) {
        return Err(Error::ParameterMismatch(format!(
            "construction record expects (n, d) = ({n}, {d}), lines have ({}, {})",
            l.n(),
            l.d()
        )));
    }
    Ok(())
}

/// `diag(lambda_M(e))` for the basis hyperplanes `M`.
fn case_iii_translation(basis: &[Hyperplane], e: u64) -> UnitaryMatrix {
    let d = basis.len();
    let mut m = CMatrix::zeros(d, d);
    for (i, h) in basis.iter().enumerate() {
        m[(i, i)] = c(if parity(h.mask() & e) == 0 { 1.0 } else { -1.0 }, 0.0);
    }
    UnitaryMatrix::new(m).expect("sign diagonal")
}

/// Permutation matrix of the transvection `t_u` on the basis hyperplanes.
fn case_iii_transvection(q: &QuadForm2, basis: &[Hyperplane], u: u64) -> Result<UnitaryMatrix> {
    let index: HashMap<u64, usize> = basis.iter().enumerate().map(|(i, h)| (h.mask(), i)).collect();
    let shift = q.polar_functional(u);
    let d = basis.len();
    let mut m = CMatrix::zeros(d, d);
    for (i, h) in basis.iter().enumerate() {
        let phi = h.mask();
        let image = if parity(phi & u) == 1 { phi ^ shift } else { phi };
        let j = *index
            .get(&image)
            .ok_or_else(|| Error::NotASymmetry(format!("transvection {u:#b} leaves the hyperplane list")))?;
        m[(j, i)] = c(1.0, 0.0);
    }
    UnitaryMatrix::new(m)
}

fn case_iii_generators(m: usize, basis: &[Hyperplane]) -> Result<Vec<UnitaryMatrix>> {
    let q = QuadForm2::standard_form(m);
    let r = q.radical()?.to_mask();
    let dim = 2 * m + 1;
    let mut gens: Vec<UnitaryMatrix> = (0..dim).map(|i| 1u64 << i).filter(|&e| e != r).map(|e| case_iii_translation(basis, e)).collect();
    for u in 1..(1u64 << dim) {
        if u != r && q.eval(u) == 1 {
            gens.push(case_iii_transvection(&q, basis, u)?);
        }
    }
    Ok(gens)
}

/// `(D_1(e) (x) I)` for the standard generators `e`, then `U (x) conj(R)`
/// for each Weil generator `U`, with `R` the restriction of `U` to the
/// parity eigenspace. The second factor is unchanged by rescaling `U`.
fn case_iv_generators(l: &LineSet, p: u32, m: usize, eigen: crate::weil::Parity) -> Result<Vec<UnitaryMatrix>> {
    let group = HeisenbergGroup::new(p, m)?;
    let basis = parity_eigenspace(p, m, eigen)?;
    let k = basis.ncols();
    check_meta_shape(l, group.rep_dim() * group.rep_dim(), group.rep_dim() * k)?;
    let id = UnitaryMatrix::identity(k);
    let mut gens = Vec::new();
    for e in group.standard_generators() {
        gens.push(schroedinger_rep(&e, 1)?.kron(&id));
    }
    for u in weil_generators(p, m)? {
        let r = basis.adjoint() * u.matrix() * &basis;
        let r = UnitaryMatrix::new(r.map(|z| z.conj()))?;
        gens.push(u.kron(&r));
    }
    Ok(gens)
}

/// Symmetry unitaries re-derived from the construction record: Heisenberg
/// translations plus the point-stabilizer generators of each case.
pub fn symmetry_generators(l: &LineSet) -> Result<Vec<UnitaryMatrix>> {
    match l.meta().ok_or(Error::MissingMeta)? {
        Construction::CaseIII { m, hyperplane_type } => {
            let basis = case_iii_basis(*m, *hyperplane_type)?;
            check_meta_shape(l, 1 << (2 * m), basis.len())?;
            case_iii_generators(*m, &basis)
        }
        Construction::CaseIV { p, m, eigenspace } => case_iv_generators(l, *p, *m, *eigenspace),
        Construction::CaseI { seed, .. } | Construction::CaseII { seed, .. } => {
            let d = l.d();
            check_meta_shape(l, d * d, d)?;
            let mut gens = pauli_generators(d)?;
            gens.extend(clifford_symmetries(l, *seed, CLIFFORD_WANTED, CLIFFORD_STEPS));
            Ok(gens)
        }
    }
}

/// Permutations induced by each unitary, computed in parallel.
pub fn induced_permutations(l: &LineSet, unitaries: &[UnitaryMatrix], tol: f64) -> Result<Vec<Permutation>> {
    unitaries.par_iter().map(|u| induced_permutation(l, u, tol)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ActionCertificate {
    pub generators: Vec<Permutation>,
    pub transitive: bool,
    pub two_transitive: bool,
    pub group_order: u128,
    pub matched_unitaries: usize,
}

pub fn action_certificate(perms: Vec<Permutation>, matched_unitaries: usize) -> ActionCertificate {
    let transitive = is_transitive(&perms);
    let two_transitive = two_transitivity(&perms);
    let group_order = group_order(&perms);
    ActionCertificate { generators: perms, transitive, two_transitive, group_order, matched_unitaries }
}

/// Re-derives the symmetries from `l.meta()` and certifies their action.
pub fn certify_action(l: &LineSet, tol: f64) -> Result<ActionCertificate> {
    let unitaries = symmetry_generators(l)?;
    let perms = induced_permutations(l, &unitaries, tol)?;
    Ok(action_certificate(perms, unitaries.len()))
}

fn matrix_key(m: &CMatrix) -> Vec<i64> {
    m.iter().flat_map(|z| [(z.re * 1e7).round() as i64, (z.im * 1e7).round() as i64]).collect()
}

/// Elements `h` of the group generated by `unitaries` that fix line 0,
/// paired with `lambda(h) = <v_0, h v_0>`. Schreier generators of the point
/// stabilizer are lifted to matrices and closed by breadth-first search.
pub fn line_stabilizer(
    l: &LineSet,
    unitaries: &[UnitaryMatrix],
    perms: &[Permutation],
    limit: usize,
) -> Result<Vec<(UnitaryMatrix, Complex64)>> {
    assert_eq!(unitaries.len(), perms.len());
    let n = l.n();
    let d = l.d();
    // transversal: lift[x] maps line 0 to line x
    let mut lift: Vec<Option<CMatrix>> = vec![None; n];
    lift[0] = Some(CMatrix::identity(d, d));
    let mut orbit = vec![0usize];
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for (u, g) in unitaries.iter().zip(perms) {
            let y = g.apply(x);
            if lift[y].is_none() {
                lift[y] = Some(u.matrix() * lift[x].as_ref().unwrap());
                orbit.push(y);
                queue.push_back(y);
            }
        }
    }
    let mut seen = HashSet::new();
    let mut schreier = Vec::new();
    for &x in &orbit {
        let ux = lift[x].as_ref().unwrap();
        for (u, g) in unitaries.iter().zip(perms) {
            let uy = lift[g.apply(x)].as_ref().unwrap();
            let s = uy.adjoint() * u.matrix() * ux;
            if seen.insert(matrix_key(&s)) {
                schreier.push(s);
            }
        }
    }

    let v0 = l.column(0);
    let identity = CMatrix::identity(d, d);
    let mut elements = vec![identity.clone()];
    let mut keys = HashSet::from([matrix_key(&identity)]);
    let mut frontier = VecDeque::from([identity]);
    while let Some(x) = frontier.pop_front() {
        for s in &schreier {
            let y = s * &x;
            if keys.insert(matrix_key(&y)) {
                if elements.len() >= limit {
                    return Err(Error::GroupTooLarge(limit));
                }
                elements.push(y.clone());
                frontier.push_back(y);
            }
        }
    }
    elements
        .into_iter()
        .map(|h| {
            let lambda = v0.dotc(&(&h * &v0));
            if (lambda.norm() - 1.0).abs() > MATCH_TOL {
                return Err(Error::NotASymmetry("stabilizer element moves line 0".into()));
            }
            Ok((UnitaryMatrix::new(h)?, lambda))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiplicityCertificate {
    pub group_size: usize,
    pub rank: usize,
    /// `||Pi - v_0 v_0*||_max`.
    pub range_residual: f64,
    pub range_is_line0: bool,
}

/// Averages `conj(lambda(h)) U_h` over the given stabilizer elements and
/// reports the rank of the result.
pub fn multiplicity_certificate(l: &LineSet, stab: &[UnitaryMatrix], phases: &[Complex64]) -> Result<MultiplicityCertificate> {
    assert_eq!(stab.len(), phases.len());
    assert!(!stab.is_empty());
    let d = l.d();
    let mut pi = CMatrix::zeros(d, d);
    for (u, lambda) in stab.iter().zip(phases) {
        pi += u.matrix() * lambda.conj();
    }
    pi /= c(stab.len() as f64, 0.0);
    let residual = max_abs_diff(&(&pi * &pi), &pi);
    if residual > 1e-6 {
        return Err(Error::NotAProjector(residual));
    }
    let rank = numerical_rank(&pi, 1e-7);
    let range_residual = max_abs_diff(&pi, &l.projector(0));
    Ok(MultiplicityCertificate {
        group_size: stab.len(),
        rank,
        range_residual,
        range_is_line0: rank == 1 && range_residual < 1e-7,
    })
}

/// Derives the symmetries, the stabilizer of line 0, and its
/// multiplicity certificate.
pub fn certify_multiplicity(l: &LineSet, limit: usize) -> Result<MultiplicityCertificate> {
    let unitaries = symmetry_generators(l)?;
    let perms = induced_permutations(l, &unitaries, MATCH_TOL)?;
    let stab = line_stabilizer(l, &unitaries, &perms, limit)?;
    let (mats, phases): (Vec<_>, Vec<_>) = stab.into_iter().unzip();
    multiplicity_certificate(l, &mats, &phases)
}

/// Dimension of the commutant of the line projectors, for a tight frame:
/// the multiplicity of the eigenvalue `n/d` of `(|G_ij|^2)`.
pub fn tight_commutant_dimension(g: &GramMatrix, d: usize) -> usize {
    let n = g.n();
    let target = n as f64 / d as f64;
    let sq = g.entries().map(|z| c(z.norm_sqr(), 0.0));
    hermitian_eigenvalues(&sq)
        .into_iter()
        .filter(|l| (l - target).abs() <= 1e-8 * target)
        .count()
}

/// Dimension of `{X : X v_i in <v_i> for all i}`.
pub fn projector_commutant_dimension(l: &LineSet) -> usize {
    let g = gram(l);
    if certify_tight(&g, l.d(), 1e-9) {
        tight_commutant_dimension(&g, l.d())
    } else {
        let projectors: Vec<CMatrix> = (0..l.n()).map(|i| l.projector(i)).collect();
        commutant_dimension(&projectors)
    }
}

/// True iff only scalars fix every line.
pub fn scalar_kernel_check(l: &LineSet) -> bool {
    projector_commutant_dimension(l) == 1
}
