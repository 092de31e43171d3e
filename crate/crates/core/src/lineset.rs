//! Line sets, the orthogonal and Weil constructions, and the equiangularity
//! and tightness certificates.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finfield::{enumerate_hyperplanes, f2_lex_vectors, parity, Hyperplane, HyperplaneType, QuadForm2};
use crate::heisenberg::{is_prime, schroedinger_rep, HeisenbergGroup};
use crate::linalg::{c, hermitian_eigenvalues, CMatrix, CVector, RANK_TOL};
use crate::weil::{parity_eigenspace, Parity};

/// Unit-norm tolerance for stored line representatives.
pub const CONSTRUCTION_TOL: f64 = 1e-10;

/// Default tolerance for equiangularity and tightness certificates.
pub const CERTIFY_TOL: f64 = 1e-8;

/// How a line set was produced. Enough to re-derive its symmetries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum Construction {
    /// Heisenberg orbit of a numerically found fiducial, `d = 2`.
    #[serde(rename = "i")]
    CaseI { seed: u64, restarts: usize, max_iters: usize },
    /// Heisenberg orbit of a numerically found fiducial, `d = 8`.
    #[serde(rename = "ii")]
    CaseII { seed: u64, restarts: usize, max_iters: usize },
    /// Sign vectors from the characters of O^-(2m,2) or O^+(2m,2) hyperplanes.
    #[serde(rename = "iii")]
    CaseIII { m: usize, hyperplane_type: HyperplaneType },
    /// Heisenberg orbit of the identity on a parity eigenspace inside `W (x) U*`.
    #[serde(rename = "iv")]
    CaseIV { p: u32, m: usize, eigenspace: Parity },
}

impl Construction {
    pub fn tag(&self) -> &'static str {
        match self {
            Construction::CaseI { .. } => "i",
            Construction::CaseII { .. } => "ii",
            Construction::CaseIII { .. } => "iii",
            Construction::CaseIV { .. } => "iv",
        }
    }
}

/// `d x n` matrix of `+-1` entries; the line vectors are the columns
/// divided by `sqrt(d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignMatrix {
    d: usize,
    n: usize,
    entries: Vec<i8>,
}

impl SignMatrix {
    pub fn new(d: usize, n: usize, entries: Vec<i8>) -> Self {
        assert_eq!(entries.len(), d * n);
        assert!(entries.iter().all(|&s| s == 1 || s == -1));
        SignMatrix { d, n, entries }
    }

    /// Entry in row `i`, column `j`.
    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[j * self.d + i]
    }

    pub fn column(&self, j: usize) -> &[i8] {
        &self.entries[j * self.d..(j + 1) * self.d]
    }
}

/// A finite set of lines in C^d, one unit representative per column.
#[derive(Clone, Debug, PartialEq)]
pub struct LineSet {
    vectors: CMatrix,
    signs: Option<SignMatrix>,
    meta: Option<Construction>,
}

impl LineSet {
    /// Wraps a `d x n` matrix of representatives. Every column must have
    /// unit norm within `CONSTRUCTION_TOL`.
    pub fn new(vectors: CMatrix, meta: Option<Construction>) -> Result<Self> {
        if vectors.nrows() == 0 || vectors.ncols() == 0 {
            return Err(Error::InvalidParameter("empty line set".into()));
        }
        for (j, col) in vectors.column_iter().enumerate() {
            let norm = col.norm();
            if (norm - 1.0).abs() > CONSTRUCTION_TOL {
                return Err(Error::InvalidParameter(format!("column {j} has norm {norm}")));
            }
        }
        Ok(LineSet { vectors, signs: None, meta })
    }

    pub fn from_signs(signs: SignMatrix, meta: Option<Construction>) -> Self {
        let scale = 1.0 / (signs.d as f64).sqrt();
        let vectors = CMatrix::from_fn(signs.d, signs.n, |i, j| c(signs.get(i, j) as f64 * scale, 0.0));
        LineSet { vectors, signs: Some(signs), meta }
    }

    /// Recognizes representatives that are all real `+-1/sqrt(d)` (to 1e-12)
    /// and attaches the exact sign matrix.
    pub fn with_detected_signs(mut self) -> Self {
        if self.signs.is_some() {
            return self;
        }
        let root = (self.d() as f64).sqrt();
        let mut entries = Vec::with_capacity(self.d() * self.n());
        for col in self.vectors.column_iter() {
            for z in col.iter() {
                let s = z.re * root;
                if z.im.abs() > 1e-12 || (s.abs() - 1.0).abs() > 1e-12 {
                    return self;
                }
                entries.push(if s > 0.0 { 1 } else { -1 });
            }
        }
        self.signs = Some(SignMatrix::new(self.d(), self.n(), entries));
        self
    }

    pub fn d(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn n(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn signs(&self) -> Option<&SignMatrix> {
        self.signs.as_ref()
    }

    pub fn meta(&self) -> Option<&Construction> {
        self.meta.as_ref()
    }

    pub fn column(&self, i: usize) -> CVector {
        self.vectors.column(i).into_owned()
    }

    pub fn projector(&self, i: usize) -> CMatrix {
        let v = self.column(i);
        &v * v.adjoint()
    }

    /// Numerical rank of the representatives, from the eigenvalues of the
    /// frame operator `V V*`.
    pub fn rank(&self) -> usize {
        let frame = &self.vectors * self.vectors.adjoint();
        let ev = hermitian_eigenvalues(&frame);
        let top = ev.last().copied().unwrap_or(0.0).max(1.0);
        ev.iter().filter(|&&l| l > RANK_TOL * top).count()
    }

    pub fn check_span(&self) -> Result<()> {
        let rank = self.rank();
        if rank < self.d() {
            return Err(Error::SpanDeficient { rank, expected: self.d() });
        }
        Ok(())
    }

    /// Keeps only the listed columns.
    pub fn select(&self, cols: &[usize]) -> LineSet {
        let vectors = self.vectors.select_columns(cols);
        let signs = self.signs.as_ref().map(|s| {
            let entries = cols.iter().flat_map(|&j| s.column(j).iter().copied()).collect();
            SignMatrix::new(s.d, cols.len(), entries)
        });
        LineSet { vectors, signs, meta: None }
    }
}

/// Canonical representatives of `E / <r>` for the standard form: vectors
/// with `x_0 = 0`, in lexicographic order.
pub fn case_iii_line_labels(m: usize) -> Vec<u64> {
    f2_lex_vectors(2 * m + 1).filter(|&e| e & 1 == 0).collect()
}

/// The hyperplanes indexing the basis of V for case (iii).
pub fn case_iii_basis(m: usize, kind: HyperplaneType) -> Result<Vec<Hyperplane>> {
    enumerate_hyperplanes(&QuadForm2::standard_form(m), kind)
}

/// Lines `(lambda_M(e))_M / sqrt(d)` for `e` in `E / <r>`, with `M` ranging
/// over the hyperplanes of the chosen type.
pub fn construct_case_iii(m: usize, kind: HyperplaneType) -> Result<LineSet> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("case iii needs m >= 2, got {m}")));
    }
    if m > 6 {
        return Err(Error::InvalidParameter(format!("case iii is limited to m <= 6, got {m}")));
    }
    let hyperplanes = case_iii_basis(m, kind)?;
    let labels = case_iii_line_labels(m);
    let d = hyperplanes.len();
    let masks: Vec<u64> = hyperplanes.iter().map(Hyperplane::mask).collect();
    let entries = labels
        .iter()
        .flat_map(|&e| masks.iter().map(move |&phi| if parity(phi & e) == 0 { 1 } else { -1 }))
        .collect();
    let set = LineSet::from_signs(
        SignMatrix::new(d, labels.len(), entries),
        Some(Construction::CaseIII { m, hyperplane_type: kind }),
    );
    set.check_span()?;
    Ok(set)
}

/// Columns `(D_1(e) (x) I) v_0` for `e = (a, b, 0)` in lexicographic order,
/// where `v_0` is the inclusion of the chosen parity eigenspace `U` into
/// `W`, viewed in `W (x) U*` and normalized. Coordinates are ordered
/// `(w, k) -> w * dim U + k`.
pub fn construct_case_iv(p: u32, m: usize, eigen: Parity) -> Result<LineSet> {
    if p == 2 || !is_prime(p) {
        return Err(Error::InvalidParameter(format!("case iv needs an odd prime, got {p}")));
    }
    let group = HeisenbergGroup::new(p, m)?;
    let q = group.rep_dim();
    if q < 3 || q > 64 {
        return Err(Error::InvalidParameter(format!("case iv needs 3 <= p^m <= 64, got {q}")));
    }
    let basis = parity_eigenspace(p, m, eigen)?;
    let k = basis.ncols();
    let d = q * k;
    let n = q * q;
    let norm = 1.0 / (k as f64).sqrt();
    let mut vectors = CMatrix::zeros(d, n);
    for (col, e) in group.displacements().iter().enumerate() {
        let de = schroedinger_rep(e, 1)?;
        let image = de.matrix() * &basis;
        for w in 0..q {
            for kk in 0..k {
                vectors[(w * k + kk, col)] = image[(w, kk)] * norm;
            }
        }
    }
    let set = LineSet::new(vectors, Some(Construction::CaseIV { p, m, eigenspace: eigen }))?;
    set.check_span()?;
    Ok(set)
}

/// Integer Gram matrix of a sign construction; true entries are
/// `numer / denom`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactGram {
    pub n: usize,
    pub numer: Vec<i64>,
    pub denom: i64,
}

impl ExactGram {
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.numer[i * self.n + j]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    entries: CMatrix,
    exact: Option<ExactGram>,
}

impl GramMatrix {
    pub fn from_matrix(entries: CMatrix) -> Self {
        assert!(entries.is_square());
        GramMatrix { entries, exact: None }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn exact(&self) -> Option<&ExactGram> {
        self.exact.as_ref()
    }
}

/// `G[i, j] = <v_i, v_j>`. Rows are computed in parallel; each entry is a
/// fixed-order sum so the result does not depend on the partitioning.
pub fn gram(l: &LineSet) -> GramMatrix {
    let n = l.n();
    let d = l.d();
    let cols: Vec<Vec<Complex64>> = (0..n).map(|j| l.vectors.column(j).iter().copied().collect()).collect();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| (0..d).fold(c(0.0, 0.0), |acc, k| acc + cols[i][k].conj() * cols[j][k]))
                .collect()
        })
        .collect();
    let entries = CMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let exact = l.signs.as_ref().map(|s| {
        let numer: Vec<i64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let ci = s.column(i);
                (0..n).map(move |j| ci.iter().zip(s.column(j)).map(|(&a, &b)| (a * b) as i64).sum())
            })
            .collect();
        ExactGram { n, numer, denom: d as i64 }
    });
    GramMatrix { entries, exact }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleCertificate {
    /// Common overlap `|<v_i, v_j>|`, `i != j`.
    pub alpha: f64,
    /// `alpha = alpha_numer / alpha_denom` when certified exactly.
    pub alpha_exact: Option<(i64, i64)>,
    pub max_dev: f64,
    pub worst_pair: (usize, usize),
    pub exact: bool,
}

/// Checks that all off-diagonal overlaps have the same modulus.
pub fn certify_equiangular(g: &GramMatrix, tol: f64) -> Result<AngleCertificate> {
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two lines".into()));
    }
    if let Some(ex) = &g.exact {
        let target = ex.get(0, 1).abs();
        let mut worst = (0, 1);
        let mut worst_dev = 0i64;
        for i in 0..n {
            for j in i + 1..n {
                let dev = (ex.get(i, j).abs() - target).abs();
                if dev > worst_dev {
                    worst_dev = dev;
                    worst = (i, j);
                }
            }
        }
        if worst_dev != 0 {
            return Err(Error::NotEquiangular {
                i: worst.0,
                j: worst.1,
                deviation: worst_dev as f64 / ex.denom as f64,
            });
        }
        return Ok(AngleCertificate {
            alpha: target as f64 / ex.denom as f64,
            alpha_exact: Some((target, ex.denom)),
            max_dev: 0.0,
            worst_pair: worst,
            exact: true,
        });
    }
    let pairs = (n * (n - 1) / 2) as f64;
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            sum += g.entries[(i, j)].norm();
        }
    }
    let alpha = sum / pairs;
    let mut worst = (0, 1);
    let mut max_dev = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let dev = (g.entries[(i, j)].norm() - alpha).abs();
            if dev > max_dev {
                max_dev = dev;
                worst = (i, j);
            }
        }
    }
    if max_dev > tol {
        return Err(Error::NotEquiangular { i: worst.0, j: worst.1, deviation: max_dev });
    }
    Ok(AngleCertificate { alpha, alpha_exact: None, max_dev, worst_pair: worst, exact: false })
}

/// `alpha^2 - (n - d) / (d (n - 1))`.
pub fn welch_residual(alpha: f64, n: usize, d: usize) -> f64 {
    alpha * alpha - (n - d) as f64 / (d * (n - 1)) as f64
}

/// Exact Welch equality `(a/b)^2 = (n - d) / (d (n - 1))`.
pub fn welch_exact(alpha: (i64, i64), n: usize, d: usize) -> bool {
    let (a, b) = (alpha.0 as i128, alpha.1 as i128);
    a * a * (d as i128) * (n as i128 - 1) == b * b * (n as i128 - d as i128)
}

/// Largest entry of `G^2 - (n/d) G`.
pub fn tightness_residual(g: &GramMatrix, d: usize) -> f64 {
    let n = g.n();
    if let Some(ex) = &g.exact {
        // G = N / denom: G^2 = (n/d) G  <=>  N^2 = (n denom / d) N
        let scale = n as i64 * ex.denom;
        let mut worst = 0i64;
        for i in 0..n {
            for j in 0..n {
                let sq: i64 = (0..n).map(|k| ex.get(i, k) * ex.get(k, j)).sum();
                worst = worst.max((sq * d as i64 - scale * ex.get(i, j)).abs());
            }
        }
        return worst as f64 / (d as f64 * ex.denom as f64 * ex.denom as f64);
    }
    let sq = &g.entries * &g.entries;
    let ratio = n as f64 / d as f64;
    sq.iter()
        .zip(g.entries.iter())
        .map(|(a, b)| (a - b * ratio).norm())
        .fold(0.0, f64::max)
}

/// True iff the lines form a tight frame for C^d, i.e. `G^2 = (n/d) G`
/// within `tol`. An equiangular tight frame must also meet the Welch bound
/// with equality; a tight set that is equiangular but misses it is rejected.
pub fn certify_tight(g: &GramMatrix, d: usize, tol: f64) -> bool {
    if tightness_residual(g, d) > tol {
        return false;
    }
    match certify_equiangular(g, tol) {
        Ok(cert) => match cert.alpha_exact {
            Some(a) => welch_exact(a, g.n(), d),
            None => welch_residual(cert.alpha, g.n(), d).abs() <= tol,
        },
        Err(_) => true,
    }
}

/// The parameters `(n, d)` covered by the 2-transitive classification.
pub fn is_known_case(n: usize, d: usize) -> bool {
    if n == 4 && d == 2 || n == 64 && (d == 8 || d == 56) {
        return true;
    }
    let Some((p, e)) = prime_power(n) else {
        return false;
    };
    if e % 2 != 0 {
        return false;
    }
    let q = p.pow(e / 2);
    if p == 2 {
        let m = e / 2;
        m >= 2 && (d == (q / 2) * (q - 1) || d == (q / 2) * (q + 1))
    } else {
        d == q * (q - 1) / 2 || d == q * (q + 1) / 2
    }
}

fn prime_power(n: usize) -> Option<(usize, u32)> {
    if n < 2 {
        return None;
    }
    let p = (2..=n).find(|k| n % k == 0)?;
    let mut x = n;
    let mut e = 0;
    while x % p == 0 {
        x /= p;
        e += 1;
    }
    (x == 1).then_some((p, e))
}

/// The dimension `n - d` of the companion line set.
pub fn dimension_pair(n: usize, d: usize) -> Result<usize> {
    if d >= n || !is_known_case(n, d) {
        return Err(Error::UnknownCase { n, d });
    }
    let mate = n - d;
    debug_assert!(is_known_case(n, mate));
    Ok(mate)
}
