//! Unitaries normalizing the Schrödinger image of `E` (odd `p`), the
//! symplectic action they induce on `E / Z(E)`, and the parity split of the
//! Weil module.
//!
//! Generators are only fixed up to a scalar. Everything downstream works
//! with lines or with conjugation, where that scalar cancels.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finfield::FpVector;
use crate::heisenberg::{schroedinger_rep, HeisenbergElement, HeisenbergGroup};
use crate::linalg::{c, max_abs_diff, root_of_unity, CMatrix, UnitaryMatrix};

/// Matching tolerance for `U D(e) U^{-1} = phase * D(e')`.
pub const MATCH_TOL: f64 = 1e-8;

/// A `2m x 2m` matrix over F_p acting on column vectors `(a; b)`.
/// Column `k` is the image of the `k`-th standard generator of `E`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymplecticAction {
    p: u32,
    m: usize,
    entries: Vec<u32>,
}

impl SymplecticAction {
    pub fn from_columns(p: u32, m: usize, columns: &[Vec<u32>]) -> Self {
        let n = 2 * m;
        assert_eq!(columns.len(), n);
        let mut entries = vec![0; n * n];
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), n);
            for (i, &v) in col.iter().enumerate() {
                entries[i * n + j] = v % p;
            }
        }
        SymplecticAction { p, m, entries }
    }

    pub fn identity(p: u32, m: usize) -> Self {
        let n = 2 * m;
        let entries = (0..n * n).map(|k| u32::from(k / n == k % n)).collect();
        SymplecticAction { p, m, entries }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i * 2 * self.m + j]
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.entries.chunks(2 * self.m).map(|r| r.to_vec()).collect()
    }

    /// Matrix product `self * other` (apply `other` first).
    pub fn compose(&self, other: &SymplecticAction) -> SymplecticAction {
        assert_eq!((self.p, self.m), (other.p, other.m));
        let n = 2 * self.m;
        let p = self.p as u64;
        let mut entries = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                let s: u64 = (0..n).map(|k| self.get(i, k) as u64 * other.get(k, j) as u64).sum();
                entries[i * n + j] = (s % p) as u32;
            }
        }
        SymplecticAction { p: self.p, m: self.m, entries }
    }

    pub fn apply(&self, v: &[u32]) -> Vec<u32> {
        let n = 2 * self.m;
        let p = self.p as u64;
        (0..n)
            .map(|i| ((0..n).map(|k| self.get(i, k) as u64 * v[k] as u64).sum::<u64>() % p) as u32)
            .collect()
    }

    /// `b . a' - b' . a` on `(a; b)` coordinates.
    pub fn form(p: u32, m: usize, x: &[u32], y: &[u32]) -> u32 {
        let p64 = p as i64;
        let ba: i64 = (0..m).map(|i| x[m + i] as i64 * y[i] as i64).sum();
        let ab: i64 = (0..m).map(|i| y[m + i] as i64 * x[i] as i64).sum();
        (ba - ab).rem_euclid(p64) as u32
    }

    pub fn preserves_form(&self) -> bool {
        let n = 2 * self.m;
        let basis: Vec<Vec<u32>> = (0..n).map(|k| (0..n).map(|i| u32::from(i == k)).collect()).collect();
        let images: Vec<Vec<u32>> = basis.iter().map(|e| self.apply(e)).collect();
        (0..n).all(|i| {
            (0..n).all(|j| {
                Self::form(self.p, self.m, &images[i], &images[j])
                    == Self::form(self.p, self.m, &basis[i], &basis[j])
            })
        })
    }
}

impl fmt::Display for SymplecticAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| format!("{r:?}"))
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

/// `|Sp(2m, p)| = p^{m^2} prod_{i=1}^{m} (p^{2i} - 1)`.
pub fn symplectic_group_order(p: u32, m: usize) -> u128 {
    let p = p as u128;
    let mut order = p.pow((m * m) as u32);
    for i in 1..=m {
        order *= p.pow(2 * i as u32) - 1;
    }
    order
}

/// Closes a set of symplectic matrices under multiplication by BFS.
/// Returns `None` once more than `limit` elements are found.
pub fn close_symplectic(gens: &[SymplecticAction], limit: usize) -> Option<HashSet<SymplecticAction>> {
    let first = gens.first()?;
    let id = SymplecticAction::identity(first.p, first.m);
    let mut seen = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = g.compose(&x);
            if seen.insert(y.clone()) {
                if seen.len() > limit {
                    return None;
                }
                queue.push_back(y);
            }
        }
    }
    Some(seen)
}

/// Finds `e' = (a', b', 0)` and a phase with `mat = phase * D_j(e')`, if any.
pub fn match_heisenberg(
    group: &HeisenbergGroup,
    j: u32,
    mat: &CMatrix,
    tol: f64,
) -> Option<(HeisenbergElement, Complex64)> {
    let dim = group.rep_dim();
    if mat.nrows() != dim || mat.ncols() != dim {
        return None;
    }
    let p = group.p();
    let m = group.m();
    let n = group.phase_modulus();
    // column 0 is |a'> up to the phase
    let (row, phase) = (0..dim)
        .map(|r| (r, mat[(r, 0)]))
        .max_by(|x, y| x.1.norm().partial_cmp(&y.1.norm()).unwrap())?;
    if (phase.norm() - 1.0).abs() > tol {
        return None;
    }
    let a = FpVector::from_index(p, m, row);
    let kj = (group.kappa() * j) % n;
    let mut b = vec![0u32; m];
    for (i, bi) in b.iter_mut().enumerate() {
        let x = FpVector::unit(p, m, i);
        let ratio = mat[(x.add(&a).index(), x.index())] / phase;
        // ratio = zeta_n^{k j b_i}
        let k = (0..n).find(|&k| (ratio - root_of_unity(k as i64, n)).norm() < 1e-6)?;
        *bi = (0..p).find(|&t| (kj * t) % n == k)?;
    }
    let e = group.element(a, FpVector::new(p, b), 0);
    let candidate = schroedinger_rep(&e, j).ok()?.into_matrix() * phase;
    if max_abs_diff(mat, &candidate) <= tol {
        Some((e, phase))
    } else {
        None
    }
}

/// The action of a normalizing unitary `U` on `E / Z(E)` through `D_j`.
pub fn induced_symplectic(group: &HeisenbergGroup, u: &UnitaryMatrix, j: u32) -> Result<SymplecticAction> {
    let columns = group
        .standard_generators()
        .iter()
        .map(|e| {
            let image = u.conjugate(schroedinger_rep(e, j)?.matrix());
            let (e2, _) = match_heisenberg(group, j, &image, MATCH_TOL)
                .ok_or_else(|| Error::NotNormalizing(format!("no Heisenberg match for the image of {e}")))?;
            Ok(e2.a().coords().iter().chain(e2.b().coords()).copied().collect())
        })
        .collect::<Result<Vec<Vec<u32>>>>()?;
    let action = SymplecticAction::from_columns(group.p(), group.m(), &columns);
    if !action.preserves_form() {
        return Err(Error::NotSymplectic);
    }
    Ok(action)
}

/// Smallest primitive root mod an odd prime `p`.
pub fn primitive_root(p: u32) -> u32 {
    let order = |g: u32| {
        let mut x = g as u64;
        let mut k = 1;
        while x != 1 {
            x = x * g as u64 % p as u64;
            k += 1;
        }
        k
    };
    (2..p).find(|&g| order(g) == p - 1).unwrap_or(1)
}

fn fourier(p: u32, m: usize) -> CMatrix {
    let dim = (p as usize).pow(m as u32);
    let norm = 1.0 / (dim as f64).sqrt();
    CMatrix::from_fn(dim, dim, |x, y| {
        let xv = FpVector::from_index(p, m, x);
        let yv = FpVector::from_index(p, m, y);
        root_of_unity(xv.dot(&yv) as i64, p) * norm
    })
}

fn quadratic_phase(p: u32, m: usize, q: impl Fn(&FpVector) -> u32) -> CMatrix {
    let dim = (p as usize).pow(m as u32);
    let mut out = CMatrix::zeros(dim, dim);
    for x in 0..dim {
        out[(x, x)] = root_of_unity(q(&FpVector::from_index(p, m, x)) as i64, p);
    }
    out
}

/// `|x> -> |A x>` for a linear map given by its action on vectors.
fn substitution(p: u32, m: usize, a: impl Fn(&FpVector) -> FpVector) -> CMatrix {
    let dim = (p as usize).pow(m as u32);
    let mut out = CMatrix::zeros(dim, dim);
    for x in 0..dim {
        let y = a(&FpVector::from_index(p, m, x)).index();
        out[(y, x)] = c(1.0, 0.0);
    }
    out
}

/// Generators of the Weil representation of `Sp(2m, p)` for odd `p`:
/// the finite Fourier transform, quadratic-phase diagonals for `x_i^2` and
/// `x_i x_j`, and index substitutions for generators of `GL(m, p)`.
/// Each one is checked to normalize `D_1(E)`.
pub fn weil_generators(p: u32, m: usize) -> Result<Vec<UnitaryMatrix>> {
    let group = HeisenbergGroup::new(p, m)?;
    if p == 2 {
        return Err(Error::InvalidParameter("Weil generators are built for odd p only".into()));
    }
    let mut mats = vec![fourier(p, m)];
    for i in 0..m {
        mats.push(quadratic_phase(p, m, |x| x.coords()[i] * x.coords()[i] % p));
        for k in i + 1..m {
            mats.push(quadratic_phase(p, m, |x| x.coords()[i] * x.coords()[k] % p));
        }
    }
    let g = primitive_root(p);
    mats.push(substitution(p, m, |x| {
        let mut c = x.coords().to_vec();
        c[0] = c[0] * g % p;
        FpVector::new(p, c)
    }));
    if m >= 2 {
        // x_0 -> x_0 + x_1, the swap (0 1) and the cycle (0 1 ... m-1)
        mats.push(substitution(p, m, |x| {
            let mut c = x.coords().to_vec();
            c[0] = (c[0] + c[1]) % p;
            FpVector::new(p, c)
        }));
        mats.push(substitution(p, m, |x| {
            let mut c = x.coords().to_vec();
            c.swap(0, 1);
            FpVector::new(p, c)
        }));
        if m >= 3 {
            mats.push(substitution(p, m, |x| {
                let mut c = x.coords().to_vec();
                c.rotate_right(1);
                FpVector::new(p, c)
            }));
        }
    }
    let gens = mats.into_iter().map(UnitaryMatrix::new).collect::<Result<Vec<_>>>()?;
    for u in &gens {
        induced_symplectic(&group, u, 1)?;
    }
    Ok(gens)
}

/// Which eigenspace of the parity operator `|x> -> |-x>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    /// Even functions, dimension `(p^m + 1) / 2`.
    Plus,
    /// Odd functions, dimension `(p^m - 1) / 2`.
    Minus,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Plus => "plus",
            Parity::Minus => "minus",
        })
    }
}

/// The parity operator `P|x> = |-x>`.
pub fn parity_operator(p: u32, m: usize) -> CMatrix {
    substitution(p, m, |x| x.neg())
}

/// Orthonormal bases (as matrix columns) of the even and odd parts of
/// C^{p^m}. Column `k` is built from the `k`-th orbit `{x, -x}` with `x`
/// the lexicographically smaller element.
pub fn parity_split(p: u32, m: usize) -> Result<(CMatrix, CMatrix)> {
    HeisenbergGroup::new(p, m)?;
    if p == 2 {
        return Err(Error::InvalidParameter("parity split needs odd p".into()));
    }
    let dim = (p as usize).pow(m as u32);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut even = vec![{
        let mut v = vec![c(0.0, 0.0); dim];
        v[0] = c(1.0, 0.0);
        v
    }];
    let mut odd = Vec::new();
    for x in 1..dim {
        let nx = FpVector::from_index(p, m, x).neg().index();
        if nx < x {
            continue;
        }
        let mut e = vec![c(0.0, 0.0); dim];
        e[x] = c(h, 0.0);
        e[nx] = c(h, 0.0);
        let mut o = vec![c(0.0, 0.0); dim];
        o[x] = c(h, 0.0);
        o[nx] = c(-h, 0.0);
        even.push(e);
        odd.push(o);
    }
    let to_matrix = |cols: Vec<Vec<Complex64>>| CMatrix::from_fn(dim, cols.len(), |i, k| cols[k][i]);
    Ok((to_matrix(even), to_matrix(odd)))
}

/// Basis of the chosen parity eigenspace.
pub fn parity_eigenspace(p: u32, m: usize, choice: Parity) -> Result<CMatrix> {
    let (plus, minus) = parity_split(p, m)?;
    Ok(match choice {
        Parity::Plus => plus,
        Parity::Minus => minus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, unitary_residual};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fourier_conjugates_shift_to_modulation() {
        let g = HeisenbergGroup::new(3, 1).unwrap();
        let f = UnitaryMatrix::new(fourier(3, 1)).unwrap();
        let x1 = g.displacement(3); // (a, b) = (1, 0)
        assert_eq!((x1.a().coords(), x1.b().coords()), (&[1u32][..], &[0u32][..]));
        let image = f.conjugate(schroedinger_rep(&x1, 1).unwrap().matrix());
        // oracle: compare against every element of E times every candidate phase
        let hits: Vec<HeisenbergElement> = g
            .elements()
            .into_iter()
            .filter(|e| {
                let d = schroedinger_rep(e, 1).unwrap().into_matrix();
                let r = (0..3).find(|&r| d[(r, 0)].norm() > 0.5).unwrap();
                let ph = image[(r, 0)] / d[(r, 0)];
                max_abs_diff(&image, &(d * ph)) < 1e-9
            })
            .collect();
        assert!(!hits.is_empty());
        assert!(hits.iter().all(|e| e.a().is_zero() && e.b().coords()[0] != 0));
        let (found, _) = match_heisenberg(&g, 1, &image, MATCH_TOL).unwrap();
        assert!(hits.iter().any(|e| e.a() == found.a() && e.b() == found.b()));

        let action = induced_symplectic(&g, &f, 1).unwrap();
        let rows = action.rows();
        assert!(rows == vec![vec![0, 2], vec![1, 0]] || rows == vec![vec![0, 1], vec![2, 0]], "{action}");
    }

    #[test]
    fn quadratic_phase_is_transvection() {
        let g = HeisenbergGroup::new(3, 1).unwrap();
        let u = UnitaryMatrix::new(quadratic_phase(3, 1, |x| x.coords()[0] * x.coords()[0] % 3)).unwrap();
        let action = induced_symplectic(&g, &u, 1).unwrap();
        assert_eq!(action.rows(), vec![vec![1, 0], vec![2, 1]]);
    }

    #[test]
    fn inner_automorphisms_act_trivially() {
        let g = HeisenbergGroup::new(3, 2).unwrap();
        for e in g.displacements().iter().step_by(7) {
            let u = schroedinger_rep(e, 1).unwrap();
            assert_eq!(induced_symplectic(&g, &u, 1).unwrap(), SymplecticAction::identity(3, 2));
        }
    }

    #[test]
    fn generic_unitary_does_not_normalize() {
        let g = HeisenbergGroup::new(3, 1).unwrap();
        let t = 0.3f64;
        let mut m = CMatrix::identity(3, 3);
        m[(0, 0)] = c(t.cos(), 0.0);
        m[(0, 1)] = c(-t.sin(), 0.0);
        m[(1, 0)] = c(t.sin(), 0.0);
        m[(1, 1)] = c(t.cos(), 0.0);
        let u = UnitaryMatrix::new(m).unwrap();
        assert!(matches!(induced_symplectic(&g, &u, 1), Err(Error::NotNormalizing(_))));
    }

    #[test]
    fn generators_are_unitary_and_commute_with_parity() {
        for (p, m) in [(3, 1), (5, 1), (3, 2), (7, 1)] {
            let par = parity_operator(p, m);
            for u in weil_generators(p, m).unwrap() {
                assert!(unitary_residual(u.matrix()) < 1e-10);
                let comm = u.matrix() * &par - &par * u.matrix();
                assert!(max_abs(&comm) < 1e-9);
            }
        }
    }

    #[test]
    fn generated_actions_are_full_symplectic_groups() {
        for (p, m) in [(3, 1), (5, 1), (3, 2)] {
            let g = HeisenbergGroup::new(p, m).unwrap();
            let acts: Vec<_> = weil_generators(p, m)
                .unwrap()
                .iter()
                .map(|u| induced_symplectic(&g, u, 1).unwrap())
                .collect();
            let closure = close_symplectic(&acts, 100_000).unwrap();
            assert_eq!(closure.len() as u128, symplectic_group_order(p, m), "(p, m) = ({p}, {m})");
            assert!(closure.iter().all(|a| a.preserves_form()));
        }
        assert_eq!(symplectic_group_order(3, 1), 24);
        assert_eq!(symplectic_group_order(5, 1), 120);
        assert_eq!(symplectic_group_order(2, 2), 720);
    }

    #[test]
    fn short_words_reach_all_of_sp2() {
        // BFS by word length in the generators and their inverses, capped at 6
        for p in [3u32, 5] {
            let g = HeisenbergGroup::new(p, 1).unwrap();
            let acts: Vec<_> = weil_generators(p, 1)
                .unwrap()
                .iter()
                .flat_map(|u| [u.clone(), u.adjoint()])
                .map(|u| induced_symplectic(&g, &u, 1).unwrap())
                .collect();
            let mut layer = vec![SymplecticAction::identity(p, 1)];
            let mut seen: HashSet<_> = layer.iter().cloned().collect();
            for _ in 0..6 {
                let next: Vec<_> = layer
                    .iter()
                    .flat_map(|x| acts.iter().map(move |a| a.compose(x)))
                    .filter(|y| seen.insert(y.clone()))
                    .collect();
                layer = next;
            }
            assert_eq!(seen.len() as u128, symplectic_group_order(p, 1));
        }
    }

    #[test]
    fn induced_action_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (p, m) in [(3, 1), (5, 1), (3, 2)] {
            let g = HeisenbergGroup::new(p, m).unwrap();
            let gens = weil_generators(p, m).unwrap();
            let acts: Vec<_> = gens.iter().map(|u| induced_symplectic(&g, u, 1).unwrap()).collect();
            for _ in 0..50 {
                let len = rng.random_range(1..=4);
                let word: Vec<usize> = (0..len).map(|_| rng.random_range(0..gens.len())).collect();
                let mut u = UnitaryMatrix::identity(g.rep_dim());
                let mut a = SymplecticAction::identity(p, m);
                for &k in &word {
                    u = u.mul(&gens[k]);
                    a = a.compose(&acts[k]);
                }
                assert_eq!(induced_symplectic(&g, &u, 1).unwrap(), a);
            }
        }
    }

    #[test]
    fn other_rep_indices_match_too() {
        let g = HeisenbergGroup::new(5, 1).unwrap();
        for u in weil_generators(5, 1).unwrap() {
            for j in 1..5 {
                assert!(induced_symplectic(&g, &u, j).is_ok());
            }
        }
    }

    #[test]
    fn parity_dimensions() {
        for (p, m, plus, minus) in [(3, 1, 2, 1), (5, 1, 3, 2), (3, 2, 5, 4)] {
            let (wp, wm) = parity_split(p, m).unwrap();
            assert_eq!((wp.ncols(), wm.ncols()), (plus, minus));
            let par = parity_operator(p, m);
            let all = CMatrix::from_fn(wp.nrows(), plus + minus, |i, k| {
                if k < plus {
                    wp[(i, k)]
                } else {
                    wm[(i, k - plus)]
                }
            });
            assert!(max_abs_diff(&(all.adjoint() * &all), &CMatrix::identity(plus + minus, plus + minus)) < 1e-12);
            assert!(max_abs_diff(&(&par * &wp), &wp) < 1e-12);
            assert!(max_abs_diff(&(&par * &wm), &(-&wm)) < 1e-12);
        }
        assert!(parity_split(2, 1).is_err());
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_root(3), 2);
        assert_eq!(primitive_root(5), 2);
        assert_eq!(primitive_root(7), 3);
    }
}
