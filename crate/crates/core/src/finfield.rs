//! Linear algebra over prime fields and the orthogonal geometry of an odd
//! dimensional quadratic space over F_2.
//!
//! Vectors over F_2 are packed into `u64` bitsets with bit `i` holding
//! coordinate `i`. Enumeration order is always lexicographic in the
//! coordinate tuple `(x_0, x_1, ...)`, i.e. `x_0` is the most significant
//! position. Use [`f2_lex_vectors`] to walk a space in that order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vector over the prime field F_p.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FpVector {
    p: u32,
    coords: Vec<u32>,
}

impl FpVector {
    /// Builds a vector, reducing every coordinate mod `p`.
    pub fn new(p: u32, coords: Vec<u32>) -> Self {
        assert!(p >= 2, "modulus must be at least 2");
        let coords = coords.into_iter().map(|c| c % p).collect();
        FpVector { p, coords }
    }

    pub fn zero(p: u32, len: usize) -> Self {
        FpVector::new(p, vec![0; len])
    }

    pub fn unit(p: u32, len: usize, i: usize) -> Self {
        let mut v = FpVector::zero(p, len);
        v.coords[i] = 1;
        v
    }

    /// The `idx`-th vector of F_p^len in lexicographic order.
    pub fn from_index(p: u32, len: usize, mut idx: usize) -> Self {
        let mut coords = vec![0; len];
        for c in coords.iter_mut().rev() {
            *c = (idx % p as usize) as u32;
            idx /= p as usize;
        }
        FpVector { p, coords }
    }

    /// Position of this vector in the lexicographic enumeration of F_p^len.
    pub fn index(&self) -> usize {
        self.coords
            .iter()
            .fold(0usize, |acc, &c| acc * self.p as usize + c as usize)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    fn check_compatible(&self, other: &FpVector) {
        assert_eq!(self.p, other.p, "vectors over different fields");
        assert_eq!(self.len(), other.len(), "vectors of different lengths");
    }

    pub fn add(&self, other: &FpVector) -> FpVector {
        self.check_compatible(other);
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a + b) % self.p)
            .collect();
        FpVector { p: self.p, coords }
    }

    pub fn neg(&self) -> FpVector {
        let coords = self.coords.iter().map(|&a| (self.p - a) % self.p).collect();
        FpVector { p: self.p, coords }
    }

    pub fn sub(&self, other: &FpVector) -> FpVector {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: u32) -> FpVector {
        let s = (s % self.p) as u64;
        let coords = self
            .coords
            .iter()
            .map(|&a| ((a as u64 * s) % self.p as u64) as u32)
            .collect();
        FpVector { p: self.p, coords }
    }

    pub fn dot(&self, other: &FpVector) -> u32 {
        self.check_compatible(other);
        let s: u64 = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| a as u64 * b as u64)
            .sum();
        (s % self.p as u64) as u32
    }

    /// Packs an F_2 vector into a bitset (bit `i` = coordinate `i`).
    pub fn to_mask(&self) -> u64 {
        assert_eq!(self.p, 2, "bit packing is only defined over F_2");
        assert!(self.len() <= 64);
        self.coords
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &c)| acc | ((c as u64) << i))
    }

    pub fn from_mask(mask: u64, len: usize) -> FpVector {
        let coords = (0..len).map(|i| ((mask >> i) & 1) as u32).collect();
        FpVector { p: 2, coords }
    }
}

impl fmt::Display for FpVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Bitset of the `k`-th vector of F_2^dim in lexicographic order.
pub fn f2_lex_mask(k: u64, dim: usize) -> u64 {
    (0..dim).fold(0u64, |acc, i| acc | (((k >> (dim - 1 - i)) & 1) << i))
}

/// All vectors of F_2^dim as bitsets, in lexicographic order.
pub fn f2_lex_vectors(dim: usize) -> impl Iterator<Item = u64> {
    assert!(dim < 64);
    (0..1u64 << dim).map(move |k| f2_lex_mask(k, dim))
}

#[inline]
pub fn parity(x: u64) -> u32 {
    x.count_ones() & 1
}

/// Quadratic form `Q(x) = sum_{i<=j} c_ij x_i x_j` on F_2^dim.
///
/// `rows[i]` holds the coefficients `c_ij` for `j >= i` as a bitset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadForm2 {
    dim: usize,
    rows: Vec<u64>,
}

impl QuadForm2 {
    /// Builds a form from its upper-triangular coefficient rows. Bits below
    /// the diagonal are rejected.
    pub fn from_rows(rows: Vec<u64>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || dim > 63 {
            return Err(Error::InvalidParameter(format!("form dimension {dim}")));
        }
        for (i, &row) in rows.iter().enumerate() {
            let allowed = if dim == 64 { u64::MAX } else { (1u64 << dim) - 1 } & !((1u64 << i) - 1);
            if row & !allowed != 0 {
                return Err(Error::InvalidParameter(format!(
                    "row {i} has coefficients outside the upper triangle"
                )));
            }
        }
        Ok(QuadForm2 { dim, rows })
    }

    /// `x_0^2 + x_1 x_2 + x_3 x_4 + ... + x_{2m-1} x_{2m}` on F_2^{2m+1}.
    pub fn standard_form(m: usize) -> Self {
        assert!(m >= 1, "m must be positive");
        let dim = 2 * m + 1;
        let mut rows = vec![0u64; dim];
        rows[0] = 1;
        for i in 0..m {
            rows[2 * i + 1] = 1 << (2 * i + 2);
        }
        QuadForm2 { dim, rows }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Half the dimension of the nondegenerate quotient, `(dim - 1) / 2`.
    pub fn witt_m(&self) -> usize {
        (self.dim - 1) / 2
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn eval(&self, x: u64) -> u32 {
        let mut acc = 0;
        let mut bits = x;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            acc ^= parity(self.rows[i] & x);
            bits &= bits - 1;
        }
        acc
    }

    /// The polar form `B(x, y) = Q(x + y) + Q(x) + Q(y)`.
    pub fn polar(&self, x: u64, y: u64) -> u32 {
        self.eval(x ^ y) ^ self.eval(x) ^ self.eval(y)
    }

    /// The functional `x -> B(x, u)` as a bitset.
    pub fn polar_functional(&self, u: u64) -> u64 {
        (0..self.dim).fold(0u64, |acc, i| acc | ((self.polar(1 << i, u) as u64) << i))
    }

    /// Bitset basis of the radical of the polar form.
    fn radical_basis(&self) -> Vec<u64> {
        let rows: Vec<u64> = (0..self.dim).map(|i| self.polar_functional(1 << i)).collect();
        f2_nullspace(&rows, self.dim)
    }

    pub(crate) fn radical_mask(&self) -> Result<u64> {
        let basis = self.radical_basis();
        if basis.len() != 1 {
            return Err(Error::RadicalDimension(basis.len()));
        }
        let r = basis[0];
        if self.eval(r) != 1 {
            return Err(Error::SingularRadical);
        }
        Ok(r)
    }

    /// The unique nonzero vector of the radical of the polar form.
    pub fn radical(&self) -> Result<FpVector> {
        Ok(FpVector::from_mask(self.radical_mask()?, self.dim))
    }

    /// `x -> x + B(x, u) u`, an isometry of `Q` whenever `Q(u) = 1`.
    pub fn transvection(&self, u: u64, x: u64) -> u64 {
        if self.polar(x, u) == 1 {
            x ^ u
        } else {
            x
        }
    }
}

/// Nullspace over F_2 of the matrix whose rows are the given bitsets
/// (each row has `ncols` columns). Returns a bitset basis.
pub fn f2_nullspace(rows: &[u64], ncols: usize) -> Vec<u64> {
    let mut rows: Vec<u64> = rows.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(sel) = (rank..rows.len()).find(|&r| (rows[r] >> col) & 1 == 1) else {
            continue;
        };
        rows.swap(rank, sel);
        for r in 0..rows.len() {
            if r != rank && (rows[r] >> col) & 1 == 1 {
                rows[r] ^= rows[rank];
            }
        }
        pivots.push(col);
        rank += 1;
    }
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = 1u64 << free;
        for (r, &pc) in pivots.iter().enumerate() {
            if (rows[r] >> free) & 1 == 1 {
                v |= 1 << pc;
            }
        }
        basis.push(v);
    }
    basis
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HyperplaneType {
    Plus,
    Minus,
    Degenerate,
}

impl fmt::Display for HyperplaneType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            HyperplaneType::Plus => "plus",
            HyperplaneType::Minus => "minus",
            HyperplaneType::Degenerate => "degenerate",
        };
        f.write_str(s)
    }
}

/// A hyperplane `M = ker(x -> functional . x)` of F_2^{2m+1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hyperplane {
    functional: FpVector,
    kind: HyperplaneType,
}

impl Hyperplane {
    pub fn functional(&self) -> &FpVector {
        &self.functional
    }

    pub fn kind(&self) -> HyperplaneType {
        self.kind
    }

    pub fn mask(&self) -> u64 {
        self.functional.to_mask()
    }

    pub fn contains(&self, e: &FpVector) -> bool {
        parity(self.mask() & e.to_mask()) == 0
    }
}

/// Expected nonzero singular counts on hyperplanes of type O^+(2m,2) and
/// O^-(2m,2).
pub fn singular_counts(m: usize) -> (usize, usize) {
    let big = 1usize << (2 * m - 1);
    let small = 1usize << (m - 1);
    (big + small - 1, big - small - 1)
}

fn classify_mask(q: &QuadForm2, r: u64, phi: u64) -> Result<HyperplaneType> {
    if parity(phi & r) == 0 {
        return Ok(HyperplaneType::Degenerate);
    }
    let m = q.witt_m();
    let count = f2_lex_vectors(q.dim())
        .filter(|&v| v != 0 && parity(phi & v) == 0 && q.eval(v) == 0)
        .count();
    let (plus, minus) = singular_counts(m);
    if count == plus {
        Ok(HyperplaneType::Plus)
    } else if count == minus {
        Ok(HyperplaneType::Minus)
    } else {
        Err(Error::ClassifierMismatch { m, count })
    }
}

/// Type of the hyperplane `ker phi`, decided by counting nonzero singular
/// vectors in it.
pub fn classify_hyperplane(q: &QuadForm2, phi: &FpVector) -> Result<HyperplaneType> {
    if phi.p() != 2 || phi.len() != q.dim() {
        return Err(Error::ParameterMismatch(format!(
            "functional of length {} over F_{} for a form of dimension {}",
            phi.len(),
            phi.p(),
            q.dim()
        )));
    }
    if phi.is_zero() {
        return Err(Error::InvalidParameter("zero functional".into()));
    }
    let r = q.radical_mask()?;
    classify_mask(q, r, phi.to_mask())
}

/// All hyperplanes of the requested nondegenerate type, ordered
/// lexicographically by functional.
pub fn enumerate_hyperplanes(q: &QuadForm2, tag: HyperplaneType) -> Result<Vec<Hyperplane>> {
    if tag == HyperplaneType::Degenerate {
        return Err(Error::InvalidParameter(
            "only plus and minus hyperplanes are enumerated".into(),
        ));
    }
    let r = q.radical_mask()?;
    let mut out = Vec::new();
    for phi in f2_lex_vectors(q.dim()).filter(|&phi| phi != 0) {
        if classify_mask(q, r, phi)? == tag {
            out.push(Hyperplane {
                functional: FpVector::from_mask(phi, q.dim()),
                kind: tag,
            });
        }
    }
    Ok(out)
}

/// The character `lambda_M(e) = (-1)^{phi_M . e}` whose kernel is `M`.
pub fn character_value(m: &Hyperplane, e: &FpVector) -> i8 {
    if parity(m.mask() & e.to_mask()) == 0 {
        1
    } else {
        -1
    }
}
