//! Dense complex matrices and the handful of numerical kernels shared by the
//! constructions: unitarity checks, numerical rank and commutant dimension.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerance used when a unitary is built.
pub const UNITARY_TOL: f64 = 1e-10;

/// Threshold below which a singular value (or eigenvalue of a Gram-type
/// operator) counts as zero.
pub const RANK_TOL: f64 = 1e-8;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `exp(2 pi i k / n)`.
pub fn root_of_unity(k: i64, n: u32) -> Complex64 {
    let k = k.rem_euclid(n as i64);
    // exact values on the axes keep monomial matrices free of rounding noise
    match (4 * k) % n as i64 {
        0 => {
            return match (4 * k) / n as i64 {
                0 => c(1.0, 0.0),
                1 => c(0.0, 1.0),
                2 => c(-1.0, 0.0),
                _ => c(0.0, -1.0),
            }
        }
        _ => {}
    }
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64)
}

/// Largest entry modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Unitary residual `max |U*U - I|`.
pub fn unitary_residual(m: &CMatrix) -> f64 {
    let prod = m.adjoint() * m;
    max_abs_diff(&prod, &CMatrix::identity(m.nrows(), m.ncols()))
}

/// A square complex matrix checked to be unitary at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    m: CMatrix,
}

impl UnitaryMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidParameter(format!(
                "unitary must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let res = unitary_residual(&m);
        if res > UNITARY_TOL {
            return Err(Error::NotUnitary(res));
        }
        Ok(UnitaryMatrix { m })
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryMatrix { m: CMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        UnitaryMatrix { m: self.m.adjoint() }
    }

    pub fn mul(&self, other: &UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix { m: &self.m * &other.m }
    }

    pub fn scale(&self, phase: Complex64) -> UnitaryMatrix {
        UnitaryMatrix { m: &self.m * phase }
    }

    /// `U A U^{-1}`.
    pub fn conjugate(&self, a: &CMatrix) -> CMatrix {
        &self.m * a * self.m.adjoint()
    }

    pub fn kron(&self, other: &UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix { m: self.m.kronecker(&other.m) }
    }
}

/// Singular values of `m`, descending.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Number of singular values above `tol`.
pub fn numerical_rank(m: &CMatrix, tol: f64) -> usize {
    singular_values(m).into_iter().filter(|&s| s > tol).count()
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Dimension of `{X : A X = X A for all A in mats}`.
///
/// The stacked system `K_A vec(X) = 0` with `K_A = I (x) A - A^T (x) I` has
/// the same null space as the Hermitian operator `sum_A K_A^* K_A`, which is
/// assembled directly from Kronecker factors and diagonalized. Eigenvalues
/// below `RANK_TOL` (relative to the operator norm when that exceeds 1)
/// count as zero.
pub fn commutant_dimension(mats: &[CMatrix]) -> usize {
    let Some(first) = mats.first() else {
        return 0;
    };
    let d = first.nrows();
    assert!(mats.iter().all(|a| a.nrows() == d && a.ncols() == d));
    let n = d * d;
    let mut op = CMatrix::zeros(n, n);
    for a in mats {
        let aha = a.adjoint() * a;
        let aat = a.conjugate() * a.transpose();
        for i1 in 0..d {
            for j1 in 0..d {
                for i2 in 0..d {
                    for j2 in 0..d {
                        let mut v = -a[(j1, i1)] * a[(j2, i2)].conj() - a[(i1, j1)].conj() * a[(i2, j2)];
                        if i1 == j1 {
                            v += aha[(i2, j2)];
                        }
                        if i2 == j2 {
                            v += aat[(i1, j1)];
                        }
                        op[(i1 * d + i2, j1 * d + j2)] += v;
                    }
                }
            }
        }
    }
    let ev = hermitian_eigenvalues(&op);
    let scale = ev.last().copied().unwrap_or(0.0).max(1.0);
    ev.iter().filter(|&&l| l.abs() <= RANK_TOL * scale).count()
}

/// Outer product `v v*`.
pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// Inner product `<u, v> = u* v`.
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}
