//! Normal-form arithmetic for the Heisenberg groups `E` and their faithful
//! irreducible representations in the Schrödinger model.
//!
//! Elements are triples `(a, b, c)` with `a, b` in F_p^m and a central phase
//! exponent `c`. For odd `p` the phase lives mod `p`; for `p = 2` it lives
//! mod 4 so that the group is the central product of an extraspecial
//! 2-group with a cyclic group of order 4. The product is
//!
//! ```text
//! (a, b, c)(a', b', c') = (a + a', b + b', c + c' + k (b . a'))
//! ```
//!
//! with `k = 1` for odd `p` and `k = 2` for `p = 2`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::finfield::FpVector;
use crate::linalg::{root_of_unity, CMatrix, UnitaryMatrix};

/// The group `E` for a fixed `(p, m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HeisenbergGroup {
    p: u32,
    m: usize,
}

impl HeisenbergGroup {
    pub fn new(p: u32, m: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidParameter(format!("{p} is not prime")));
        }
        if m == 0 {
            return Err(Error::InvalidParameter("m must be positive".into()));
        }
        Ok(HeisenbergGroup { p, m })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Modulus of the central phase exponent.
    pub fn phase_modulus(&self) -> u32 {
        if self.p == 2 {
            4
        } else {
            self.p
        }
    }

    /// Multiplier of `b . a'` in the cocycle.
    pub fn kappa(&self) -> u32 {
        if self.p == 2 {
            2
        } else {
            1
        }
    }

    /// Dimension `p^m` of the Schrödinger model.
    pub fn rep_dim(&self) -> usize {
        (self.p as usize).pow(self.m as u32)
    }

    /// `|E|`: `p^{2m+1}` for odd `p`, `2^{2m+2}` for `p = 2`.
    pub fn order(&self) -> usize {
        self.rep_dim() * self.rep_dim() * self.phase_modulus() as usize
    }

    pub fn identity(&self) -> HeisenbergElement {
        self.element(FpVector::zero(self.p, self.m), FpVector::zero(self.p, self.m), 0)
    }

    /// The central generator `z = (0, 0, 1)`.
    pub fn central_generator(&self) -> HeisenbergElement {
        self.element(FpVector::zero(self.p, self.m), FpVector::zero(self.p, self.m), 1)
    }

    pub fn element(&self, a: FpVector, b: FpVector, c: u32) -> HeisenbergElement {
        assert_eq!(a.p(), self.p);
        assert_eq!(b.p(), self.p);
        assert_eq!(a.len(), self.m);
        assert_eq!(b.len(), self.m);
        HeisenbergElement { p: self.p, m: self.m, a, b, c: c % self.phase_modulus() }
    }

    /// `(e_i, 0, 0)` for `i < m`, then `(0, e_i, 0)` for `i < m`.
    pub fn standard_generators(&self) -> Vec<HeisenbergElement> {
        let zero = FpVector::zero(self.p, self.m);
        let mut out: Vec<_> = (0..self.m)
            .map(|i| self.element(FpVector::unit(self.p, self.m, i), zero.clone(), 0))
            .collect();
        out.extend((0..self.m).map(|i| self.element(zero.clone(), FpVector::unit(self.p, self.m, i), 0)));
        out
    }

    /// The element `(a, b, 0)` whose `(a, b)` tuple has lexicographic index
    /// `k` in F_p^{2m}. These are the canonical representatives of
    /// `E / Z(E)`.
    pub fn displacement(&self, k: usize) -> HeisenbergElement {
        let q = self.rep_dim();
        let a = FpVector::from_index(self.p, self.m, k / q);
        let b = FpVector::from_index(self.p, self.m, k % q);
        self.element(a, b, 0)
    }

    /// All `p^{2m}` representatives `(a, b, 0)` in lexicographic order.
    pub fn displacements(&self) -> Vec<HeisenbergElement> {
        (0..self.rep_dim() * self.rep_dim()).map(|k| self.displacement(k)).collect()
    }

    /// Every element of `E`, ordered lexicographically by `(a, b, c)`.
    pub fn elements(&self) -> Vec<HeisenbergElement> {
        let nc = self.phase_modulus();
        self.displacements()
            .into_iter()
            .flat_map(|e| (0..nc).map(move |c| HeisenbergElement { c, ..e.clone() }))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HeisenbergElement {
    p: u32,
    m: usize,
    a: FpVector,
    b: FpVector,
    c: u32,
}

impl HeisenbergElement {
    pub fn group(&self) -> HeisenbergGroup {
        HeisenbergGroup { p: self.p, m: self.m }
    }

    pub fn a(&self) -> &FpVector {
        &self.a
    }

    pub fn b(&self) -> &FpVector {
        &self.b
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c == 0
    }

    pub fn is_central(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Lexicographic index of `(a, b)` in F_p^{2m}.
    pub fn displacement_index(&self) -> usize {
        self.a.index() * self.group().rep_dim() + self.b.index()
    }

    pub fn multiply(&self, other: &HeisenbergElement) -> Result<HeisenbergElement> {
        if self.p != other.p || self.m != other.m {
            return Err(Error::ParameterMismatch(format!(
                "(p, m) = ({}, {}) vs ({}, {})",
                self.p, self.m, other.p, other.m
            )));
        }
        let g = self.group();
        let n = g.phase_modulus();
        let c = (self.c + other.c + g.kappa() * self.b.dot(&other.a)) % n;
        Ok(HeisenbergElement {
            p: self.p,
            m: self.m,
            a: self.a.add(&other.a),
            b: self.b.add(&other.b),
            c,
        })
    }

    pub fn inverse(&self) -> HeisenbergElement {
        // (a,b,c)^{-1} = (-a, -b, -c + k b.a)
        let g = self.group();
        let n = g.phase_modulus();
        let c = (n - self.c % n + g.kappa() * self.b.dot(&self.a)) % n;
        HeisenbergElement { p: self.p, m: self.m, a: self.a.neg(), b: self.b.neg(), c }
    }

    /// Exponent `c` of the commutator `x y x^{-1} y^{-1} = z^c`.
    pub fn commutator_exponent(&self, other: &HeisenbergElement) -> u32 {
        let g = self.group();
        let n = g.phase_modulus() as i64;
        let k = g.kappa() as i64;
        let v = k * (self.b.dot(&other.a) as i64 - other.b.dot(&self.a) as i64);
        v.rem_euclid(n) as u32
    }
}

impl fmt::Display for HeisenbergElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

/// Valid representation indices: `1..p` for odd `p`, `{1, 3}` for `p = 2`.
pub fn rep_indices(p: u32) -> Vec<u32> {
    if p == 2 {
        vec![1, 3]
    } else {
        (1..p).collect()
    }
}

fn check_rep_index(p: u32, j: u32) -> Result<()> {
    if rep_indices(p).contains(&j) {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { p, j })
    }
}

/// Column permutation and phase exponents of `D_j(e)`:
/// `D_j(a, b, c)|x> = zeta_N^{j (c + k b.x)} |x + a>`.
/// Returns `(target_index, phase_exponent mod N)` for every source index `x`.
fn monomial_form(e: &HeisenbergElement, j: u32) -> Vec<(usize, u32)> {
    let g = e.group();
    let n = g.phase_modulus();
    (0..g.rep_dim())
        .map(|xi| {
            let x = FpVector::from_index(g.p, g.m, xi);
            let target = x.add(&e.a).index();
            let exp = (j * (e.c + g.kappa() * e.b.dot(&x))) % n;
            (target, exp)
        })
        .collect()
}

/// The matrix of `D_j(e)` on C^{p^m} (basis indexed by F_p^m in
/// lexicographic order), realized as `zeta^{j c} X(a) Z(j b)` with
/// `X(a)|x> = |x + a>` and `Z(b)|x> = zeta^{k b.x}|x>`.
pub fn schroedinger_rep(e: &HeisenbergElement, j: u32) -> Result<UnitaryMatrix> {
    check_rep_index(e.p, j)?;
    let g = e.group();
    let n = g.phase_modulus();
    let dim = g.rep_dim();
    let roots: Vec<Complex64> = (0..n).map(|k| root_of_unity(k as i64, n)).collect();
    let mut m = CMatrix::zeros(dim, dim);
    for (x, (target, exp)) in monomial_form(e, j).into_iter().enumerate() {
        m[(target, x)] = roots[exp as usize];
    }
    UnitaryMatrix::new(m)
}

pub fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|k| k * k <= p).all(|k| p % k != 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, commutant_dimension, max_abs_diff};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn el(g: &HeisenbergGroup, a: &[u32], b: &[u32], c: u32) -> HeisenbergElement {
        g.element(FpVector::new(g.p(), a.to_vec()), FpVector::new(g.p(), b.to_vec()), c)
    }

    fn random_element(g: &HeisenbergGroup, rng: &mut ChaCha8Rng) -> HeisenbergElement {
        let all = g.order();
        g.elements()[rng.random_range(0..all)].clone()
    }

    #[test]
    fn law_examples_p3() {
        let g = HeisenbergGroup::new(3, 1).unwrap();
        let x = el(&g, &[1], &[0], 0);
        let y = el(&g, &[0], &[1], 0);
        assert_eq!(x.multiply(&y).unwrap(), el(&g, &[1], &[1], 0));
        assert_eq!(y.multiply(&x).unwrap(), el(&g, &[1], &[1], 1));
        let id = g.identity();
        for e in g.elements() {
            assert_eq!(id.multiply(&e).unwrap(), e);
            assert_eq!(e.multiply(&e.inverse()).unwrap(), id);
        }
    }

    #[test]
    fn parameter_mismatch() {
        let g3 = HeisenbergGroup::new(3, 1).unwrap();
        let g5 = HeisenbergGroup::new(5, 1).unwrap();
        assert!(matches!(
            g3.identity().multiply(&g5.identity()),
            Err(Error::ParameterMismatch(_))
        ));
        assert!(HeisenbergGroup::new(4, 1).is_err());
        assert!(HeisenbergGroup::new(3, 0).is_err());
    }

    #[test]
    fn orders_and_exponent() {
        for (p, m) in [(3, 1), (5, 1), (3, 2)] {
            let g = HeisenbergGroup::new(p, m).unwrap();
            assert_eq!(g.elements().len(), (p as usize).pow(2 * m as u32 + 1));
            for x in g.elements() {
                let mut acc = g.identity();
                for _ in 0..p {
                    acc = acc.multiply(&x).unwrap();
                }
                assert!(acc.is_identity(), "{x}^{p} = {acc}");
            }
        }
        let g2 = HeisenbergGroup::new(2, 2).unwrap();
        assert_eq!(g2.elements().len(), 1 << 6);
    }

    #[test]
    fn associativity_and_commutator_centrality() {
        for (p, m) in [(3, 1), (2, 1), (2, 2)] {
            let g = HeisenbergGroup::new(p, m).unwrap();
            let els = g.elements();
            for x in &els {
                for y in &els {
                    let xy = x.multiply(y).unwrap();
                    let comm = xy.multiply(&x.inverse()).unwrap().multiply(&y.inverse()).unwrap();
                    assert!(comm.is_central());
                    assert_eq!(comm.c(), x.commutator_exponent(y));
                }
            }
            for x in els.iter().step_by(3) {
                for y in els.iter().step_by(2) {
                    for z in els.iter().step_by(5) {
                        let l = x.multiply(y).unwrap().multiply(z).unwrap();
                        let r = x.multiply(&y.multiply(z).unwrap()).unwrap();
                        assert_eq!(l, r);
                    }
                }
            }
        }
    }

    #[test]
    fn center_is_phase_subgroup() {
        for (p, m) in [(3, 1), (5, 1), (3, 2), (2, 1)] {
            let g = HeisenbergGroup::new(p, m).unwrap();
            let els = g.elements();
            let central: Vec<_> = els
                .iter()
                .filter(|x| els.iter().all(|y| x.multiply(y).unwrap() == y.multiply(x).unwrap()))
                .collect();
            assert_eq!(central.len(), g.phase_modulus() as usize);
            assert!(central.iter().all(|x| x.is_central()));
        }
    }

    #[test]
    fn schroedinger_examples_p3() {
        let g = HeisenbergGroup::new(3, 1).unwrap();
        let dz = schroedinger_rep(&g.central_generator(), 1).unwrap();
        let expect = CMatrix::identity(3, 3) * root_of_unity(1, 3);
        assert!(max_abs_diff(dz.matrix(), &expect) < 1e-15);
        let shift = schroedinger_rep(&el(&g, &[1], &[0], 0), 1).unwrap();
        let mut cyc = CMatrix::zeros(3, 3);
        for x in 0..3 {
            cyc[((x + 1) % 3, x)] = c(1.0, 0.0);
        }
        assert_eq!(shift.matrix(), &cyc);
        assert!(matches!(
            schroedinger_rep(&g.identity(), 0),
            Err(Error::IndexOutOfRange { p: 3, j: 0 })
        ));
        assert!(schroedinger_rep(&HeisenbergGroup::new(2, 1).unwrap().identity(), 2).is_err());
    }

    #[test]
    fn homomorphism_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (p, m) in [(3, 1), (5, 1), (3, 2), (2, 3)] {
            let g = HeisenbergGroup::new(p, m).unwrap();
            for &j in &rep_indices(p) {
                let mut worst = 0.0f64;
                for _ in 0..200 {
                    let x = random_element(&g, &mut rng);
                    let y = random_element(&g, &mut rng);
                    let lhs = schroedinger_rep(&x, j).unwrap().matrix() * schroedinger_rep(&y, j).unwrap().matrix();
                    let rhs = schroedinger_rep(&x.multiply(&y).unwrap(), j).unwrap();
                    worst = worst.max(max_abs_diff(&lhs, rhs.matrix()));
                }
                assert!(worst < 1e-12, "(p, m, j) = ({p}, {m}, {j}): {worst:e}");
                let dz = schroedinger_rep(&g.central_generator(), j).unwrap();
                let zeta = root_of_unity(j as i64, g.phase_modulus());
                let expect = CMatrix::identity(g.rep_dim(), g.rep_dim()) * zeta;
                assert!(max_abs_diff(dz.matrix(), &expect) < 1e-12);
            }
        }
    }

    #[test]
    fn representation_is_injective() {
        for (p, m) in [(3, 1), (5, 1), (2, 1), (2, 2), (3, 2)] {
            let g = HeisenbergGroup::new(p, m).unwrap();
            let mats: Vec<CMatrix> = g
                .elements()
                .iter()
                .map(|e| schroedinger_rep(e, 1).unwrap().into_matrix())
                .collect();
            for i in 0..mats.len() {
                for k in i + 1..mats.len() {
                    assert!(max_abs_diff(&mats[i], &mats[k]) > 1e-8);
                }
            }
        }
    }

    #[test]
    fn faithful_reps_are_irreducible() {
        for (p, m) in [(3, 1), (2, 1), (2, 2)] {
            let g = HeisenbergGroup::new(p, m).unwrap();
            for &j in &rep_indices(p) {
                let mats: Vec<CMatrix> = g
                    .standard_generators()
                    .iter()
                    .map(|e| schroedinger_rep(e, j).unwrap().into_matrix())
                    .collect();
                assert_eq!(commutant_dimension(&mats), 1);
            }
        }
        let g = HeisenbergGroup::new(3, 1).unwrap();
        let all: Vec<CMatrix> = g.elements().iter().map(|e| schroedinger_rep(e, 1).unwrap().into_matrix()).collect();
        assert_eq!(commutant_dimension(&all), 1);
    }

    #[test]
    fn image_sets_coincide_across_indices() {
        let g = HeisenbergGroup::new(3, 1).unwrap();
        let image = |j: u32| -> Vec<CMatrix> {
            g.elements().iter().map(|e| schroedinger_rep(e, j).unwrap().into_matrix()).collect()
        };
        let d1 = image(1);
        let d2 = image(2);
        for a in &d2 {
            assert!(d1.iter().any(|b| max_abs_diff(a, b) < 1e-8));
        }
        for b in &d1 {
            assert!(d2.iter().any(|a| max_abs_diff(a, b) < 1e-8));
        }
    }
}
