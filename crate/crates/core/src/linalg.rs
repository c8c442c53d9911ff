//! Dense complex linear algebra on finite-dimensional Hilbert spaces.
//!
//! Everything in this module works on `DMatrix<Complex64>`. Quantum states
//! are wrapped in validated newtypes ([`DensityOperator`], [`Projector`],
//! [`PsdOperator`]); the free functions implement the entropy, tensor and
//! operator-inequality primitives the rest of the crate builds on.
//!
//! All entropies are in bits (log base 2).

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

/// Hermiticity tolerance: max |A - A^dag| entry.
pub const TOL_HERM: f64 = 1e-10;
/// Eigenvalues of PSD inputs may come out of the solver this far below zero.
pub const TOL_EIG_NEG: f64 = 1e-10;
/// Trace-one tolerance for density operators.
pub const TOL_TRACE: f64 = 1e-10;
/// Idempotency / spectrum tolerance for projectors.
pub const TOL_PROJ: f64 = 1e-8;
/// Support threshold for pseudo-inverse square roots and support projectors.
pub const SUPPORT_EPS: f64 = 1e-10;
/// Default cap on any constructed Hilbert-space dimension.
pub const DEFAULT_DIM_CAP: usize = 4096;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// log2 with the convention 0 * log 0 = 0 handled by callers.
#[inline]
pub(crate) fn log2(x: f64) -> f64 {
    x.log2()
}

// ---------------------------------------------------------------------------
// Basic matrix helpers
// ---------------------------------------------------------------------------

/// Max-entry deviation from Hermiticity.
pub fn hermiticity_violation(m: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// (M + M^dag) / 2; cleans up rounding noise on operators that are
/// Hermitian by construction.
pub fn hermitize(m: &CMat) -> CMat {
    let mut out = m.clone();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out[(i, j)] = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
        }
    }
    out
}

pub fn trace_re(m: &CMat) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending with
/// matching eigenvector columns.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let se = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.column_mut(dst).copy_from(&se.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    let se = m.clone().symmetric_eigen();
    let mut vals: Vec<f64> = se.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

/// Rebuild sum_i f(lambda_i) |e_i><e_i| from an eigendecomposition.
fn rebuild_with(vals: &[f64], vecs: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let n = vecs.nrows();
    let mut out = CMat::zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        let flam = f(lam);
        if flam == 0.0 {
            continue;
        }
        let col = vecs.column(k);
        for i in 0..n {
            let vi = col[i] * flam;
            for j in 0..n {
                out[(i, j)] += vi * col[j].conj();
            }
        }
    }
    out
}

/// Trace norm of a Hermitian matrix (sum of |eigenvalue|).
pub fn trace_norm_hermitian(m: &CMat) -> f64 {
    eigvalsh(m).iter().map(|l| l.abs()).sum()
}

/// Re Tr{A B} without forming the product.
pub fn trace_product_re(a: &CMat, b: &CMat) -> f64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    let mut t = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let prod = a[(i, j)] * b[(j, i)];
            t += prod.re;
        }
    }
    t
}

// ---------------------------------------------------------------------------
// Validated operator types
// ---------------------------------------------------------------------------

/// Complex Hermitian PSD trace-1 matrix; all quantum states.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    dim: usize,
    mat: CMat,
}

impl DensityOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    /// Trusted constructor for operators that are density matrices by
    /// construction (convex mixtures, tensor products of valid states).
    pub(crate) fn new_unchecked(mat: CMat) -> Self {
        debug_assert!(hermiticity_violation(&mat) <= 1e-8);
        debug_assert!((trace_re(&mat) - 1.0).abs() <= 1e-8);
        let dim = mat.nrows();
        DensityOperator { dim, mat }
    }

    /// Maximally mixed state I/d.
    pub fn maximally_mixed(dim: usize) -> Self {
        DensityOperator::new_unchecked(CMat::identity(dim, dim) * cr(1.0 / dim as f64))
    }

    /// Pure computational-basis state |k><k|.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        assert!(k < dim);
        let mut m = CMat::zeros(dim, dim);
        m[(k, k)] = cr(1.0);
        DensityOperator::new_unchecked(m)
    }

    /// Diagonal state from a pmf over basis labels.
    pub fn diagonal(pmf: &[f64]) -> Result<Self> {
        let sum: f64 = pmf.iter().sum();
        if (sum - 1.0).abs() > TOL_TRACE {
            return Err(Error::TraceNotOne {
                trace: sum,
                deviation: (sum - 1.0).abs(),
            });
        }
        if let Some(&bad) = pmf.iter().find(|&&p| p < -TOL_EIG_NEG) {
            return Err(Error::NotPsd {
                min_eigenvalue: bad,
            });
        }
        let mut m = CMat::zeros(pmf.len(), pmf.len());
        for (i, &p) in pmf.iter().enumerate() {
            m[(i, i)] = cr(p.max(0.0));
        }
        Ok(DensityOperator::new_unchecked(m))
    }

    /// Convex mixture sum_i w_i rho_i. Weights must be a pmf.
    pub fn mixture<'a>(terms: impl IntoIterator<Item = (f64, &'a DensityOperator)>) -> Result<Self> {
        let mut acc: Option<CMat> = None;
        let mut total = 0.0;
        for (w, rho) in terms {
            total += w;
            match &mut acc {
                None => acc = Some(rho.mat.clone() * cr(w)),
                Some(a) => {
                    if a.nrows() != rho.dim {
                        return Err(Error::DimensionMismatch(a.nrows(), rho.dim));
                    }
                    *a += rho.mat.clone() * cr(w);
                }
            }
        }
        let mat = acc.ok_or_else(|| Error::InvalidPmf("empty mixture".into()))?;
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized {
                sum: total,
                deviation: (total - 1.0).abs(),
            });
        }
        Ok(DensityOperator::new_unchecked(mat))
    }
}

/// Hermitian idempotent matrix with {0,1} spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    dim: usize,
    mat: CMat,
}

impl Projector {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn identity(dim: usize) -> Self {
        Projector {
            dim,
            mat: CMat::identity(dim, dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Projector {
            dim,
            mat: CMat::zeros(dim, dim),
        }
    }

    /// Build B * B^dag from a matrix with orthonormal columns.
    pub fn from_orthonormal_columns(basis: &CMat) -> Self {
        let mat = basis * basis.adjoint();
        Projector {
            dim: mat.nrows(),
            mat: hermitize(&mat),
        }
    }

    pub(crate) fn new_unchecked(mat: CMat) -> Self {
        let dim = mat.nrows();
        Projector { dim, mat }
    }

    /// Rank as the rounded trace.
    pub fn rank(&self) -> usize {
        trace_re(&self.mat).round() as usize
    }
}

/// Hermitian matrix with eigenvalues >= -1e-10; no trace constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdOperator {
    dim: usize,
    mat: CMat,
}

impl PsdOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn zero(dim: usize) -> Self {
        PsdOperator {
            dim,
            mat: CMat::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        PsdOperator {
            dim,
            mat: CMat::identity(dim, dim),
        }
    }

    /// Trusted constructor for operators PSD by construction (Gram forms
    /// M M^dag, projector sandwiches of PSD inputs).
    pub(crate) fn new_unchecked(mat: CMat) -> Self {
        let dim = mat.nrows();
        PsdOperator { dim, mat }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigvalsh(&self.mat)[0]
    }
}

// ---------------------------------------------------------------------------
// Validation entry points
// ---------------------------------------------------------------------------

/// Validate a density operator: Hermitian, PSD, trace 1.
pub fn validate_density(entries: CMat) -> Result<DensityOperator> {
    if entries.nrows() != entries.ncols() {
        return Err(Error::NotSquare(entries.nrows(), entries.ncols()));
    }
    let violation = hermiticity_violation(&entries);
    if violation > TOL_HERM {
        return Err(Error::NotHermitian {
            violation,
            tol: TOL_HERM,
        });
    }
    let trace = trace_re(&entries);
    if (trace - 1.0).abs() > TOL_TRACE {
        return Err(Error::TraceNotOne {
            trace,
            deviation: (trace - 1.0).abs(),
        });
    }
    let min_eig = eigvalsh(&entries)[0];
    if min_eig < -TOL_EIG_NEG {
        return Err(Error::NotPsd {
            min_eigenvalue: min_eig,
        });
    }
    let dim = entries.nrows();
    Ok(DensityOperator { dim, mat: entries })
}

/// Validate a projector: Hermitian, idempotent, {0,1} spectrum.
pub fn validate_projector(entries: CMat) -> Result<Projector> {
    if entries.nrows() != entries.ncols() {
        return Err(Error::NotSquare(entries.nrows(), entries.ncols()));
    }
    let violation = hermiticity_violation(&entries);
    if violation > TOL_PROJ {
        return Err(Error::NotHermitian {
            violation,
            tol: TOL_PROJ,
        });
    }
    let sq = &entries * &entries;
    let mut worst = 0.0f64;
    for i in 0..entries.nrows() {
        for j in 0..entries.ncols() {
            let d = (sq[(i, j)] - entries[(i, j)]).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    if worst > TOL_PROJ {
        return Err(Error::NotIdempotent { violation: worst });
    }
    for lam in eigvalsh(&entries) {
        if lam.min(1.0 - lam).abs() > TOL_PROJ && (lam - 1.0).abs() > TOL_PROJ && lam.abs() > TOL_PROJ
        {
            return Err(Error::NotPsd {
                min_eigenvalue: lam,
            });
        }
    }
    let dim = entries.nrows();
    Ok(Projector { dim, mat: entries })
}

/// Validate a PSD operator: Hermitian with eigenvalues >= -1e-10.
pub fn validate_psd(entries: CMat) -> Result<PsdOperator> {
    if entries.nrows() != entries.ncols() {
        return Err(Error::NotSquare(entries.nrows(), entries.ncols()));
    }
    let violation = hermiticity_violation(&entries);
    if violation > TOL_HERM {
        return Err(Error::NotHermitian {
            violation,
            tol: TOL_HERM,
        });
    }
    let min_eig = eigvalsh(&entries)[0];
    if min_eig < -TOL_EIG_NEG {
        return Err(Error::NotPsd {
            min_eigenvalue: min_eig,
        });
    }
    let dim = entries.nrows();
    Ok(PsdOperator { dim, mat: entries })
}

// ---------------------------------------------------------------------------
// Core operations
// ---------------------------------------------------------------------------

/// Von Neumann entropy in bits: -sum lambda_i log2 lambda_i.
///
/// Eigenvalues in [-1e-10, 0) are clamped to 0 before the log.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    let mut h = 0.0;
    for lam in eigvalsh(&rho.mat) {
        let lam = if lam < 0.0 { 0.0 } else { lam };
        if lam > 0.0 {
            h -= lam * log2(lam);
        }
    }
    h.max(0.0)
}

/// Kronecker product with the default dimension cap.
pub fn kron(a: &CMat, b: &CMat) -> Result<CMat> {
    kron_capped(a, b, DEFAULT_DIM_CAP)
}

/// Kronecker product; errors if the product dimension exceeds `cap`.
pub fn kron_capped(a: &CMat, b: &CMat, cap: usize) -> Result<CMat> {
    let dim = (a.nrows() as u128) * (b.nrows() as u128);
    if dim > cap as u128 {
        return Err(Error::DimensionOverflow { dim, cap });
    }
    Ok(a.kronecker(b))
}

/// Support-restricted inverse square root: eigenvalues above 1e-10 map to
/// lambda^{-1/2}, kernel directions map to 0.
pub fn pinv_sqrt(a: &PsdOperator) -> PsdOperator {
    let (vals, vecs) = eigh(&a.mat);
    let mat = rebuild_with(&vals, &vecs, |lam| {
        if lam > SUPPORT_EPS {
            1.0 / lam.sqrt()
        } else {
            0.0
        }
    });
    PsdOperator::new_unchecked(hermitize(&mat))
}

/// PSD square root (negative rounding noise clamped to zero).
pub fn psd_sqrt(a: &PsdOperator) -> PsdOperator {
    let (vals, vecs) = eigh(&a.mat);
    let mat = rebuild_with(&vals, &vecs, |lam| if lam > 0.0 { lam.sqrt() } else { 0.0 });
    PsdOperator::new_unchecked(hermitize(&mat))
}

/// Projector onto the support of a PSD operator (eigenvalues > 1e-10).
pub fn support_projector(a: &PsdOperator) -> Projector {
    let (vals, vecs) = eigh(&a.mat);
    let mat = rebuild_with(&vals, &vecs, |lam| if lam > SUPPORT_EPS { 1.0 } else { 0.0 });
    Projector::new_unchecked(hermitize(&mat))
}

/// Trace distance ||A - B||_1 between density operators, in [0, 2].
pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch(a.dim, b.dim));
    }
    Ok(trace_norm_hermitian(&(&a.mat - &b.mat)))
}

/// Result of an operator-inequality check: the most negative eigenvalue of
/// (rhs - lhs) and the violation amount max(0, -min_eigenvalue).
#[derive(Debug, Clone, Serialize)]
pub struct OperatorInequalityReport {
    pub min_eigenvalue: f64,
    pub violation: f64,
}

/// Check the Hayashi-Nagaoka operator inequality
/// I - (S+T)^{-1/2} S (S+T)^{-1/2} <= 2(I-S) + 4T for 0 <= S <= I, T >= 0.
pub fn check_hayashi_nagaoka(s: &PsdOperator, t: &PsdOperator) -> Result<OperatorInequalityReport> {
    if s.dim != t.dim {
        return Err(Error::DimensionMismatch(s.dim, t.dim));
    }
    let s_eigs = eigvalsh(&s.mat);
    if s_eigs[0] < -TOL_EIG_NEG || s_eigs[s.dim - 1] > 1.0 + TOL_EIG_NEG {
        return Err(Error::PreconditionViolated(format!(
            "S spectrum [{:.3e}, {:.3e}] outside [0, 1]",
            s_eigs[0],
            s_eigs[s.dim - 1]
        )));
    }
    if t.min_eigenvalue() < -TOL_EIG_NEG {
        return Err(Error::PreconditionViolated("T is not PSD".into()));
    }
    let id = CMat::identity(s.dim, s.dim);
    let sum = PsdOperator::new_unchecked(&s.mat + &t.mat);
    let k = pinv_sqrt(&sum);
    let lhs = &id - k.matrix() * &s.mat * k.matrix();
    let rhs = (&id - &s.mat) * cr(2.0) + &t.mat * cr(4.0);
    let min_eigenvalue = eigvalsh(&hermitize(&(rhs - lhs)))[0];
    Ok(OperatorInequalityReport {
        min_eigenvalue,
        violation: (-min_eigenvalue).max(0.0),
    })
}

/// Result of a gentle-operator check: measured expected disturbance and the
/// 2 sqrt(epsilon) bound it must stay under.
#[derive(Debug, Clone, Serialize)]
pub struct GentleOperatorReport {
    pub lhs: f64,
    pub bound: f64,
}

/// Measure the ensemble disturbance sum_x p(x) ||sqrt(L) rho_x sqrt(L) - rho_x||_1
/// and the gentle-operator bound 2 sqrt(1 - Tr{L rho_bar}).
pub fn gentle_operator_check(
    ensemble: &[(f64, DensityOperator)],
    lambda: &PsdOperator,
) -> Result<GentleOperatorReport> {
    let total: f64 = ensemble.iter().map(|(p, _)| p).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::PreconditionViolated(format!(
            "ensemble probabilities sum to {total}"
        )));
    }
    let eigs = eigvalsh(&lambda.mat);
    if eigs[0] < -TOL_EIG_NEG || eigs[lambda.dim - 1] > 1.0 + TOL_EIG_NEG {
        return Err(Error::PreconditionViolated(format!(
            "Lambda spectrum [{:.3e}, {:.3e}] outside [0, 1]",
            eigs[0],
            eigs[lambda.dim - 1]
        )));
    }
    let sqrt_l = psd_sqrt(lambda);
    let mut rho_bar = CMat::zeros(lambda.dim, lambda.dim);
    let mut lhs = 0.0;
    for (p, rho) in ensemble {
        if rho.dim != lambda.dim {
            return Err(Error::DimensionMismatch(rho.dim, lambda.dim));
        }
        rho_bar += rho.mat.clone() * cr(*p);
        let disturbed = sqrt_l.matrix() * &rho.mat * sqrt_l.matrix();
        lhs += p * trace_norm_hermitian(&hermitize(&(disturbed - &rho.mat)));
    }
    let success = trace_re(&(lambda.mat.clone() * rho_bar));
    let eps = (1.0 - success).max(0.0);
    Ok(GentleOperatorReport {
        lhs,
        bound: 2.0 * eps.sqrt(),
    })
}

// ---------------------------------------------------------------------------
// JSON serialization: matrices as arrays of rows, entries as [re, im]
// ---------------------------------------------------------------------------

pub(crate) fn mat_to_rows(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub(crate) fn rows_to_mat(rows: &[Vec<[f64; 2]>]) -> Result<CMat> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        let bad = rows.iter().map(|r| r.len()).find(|&l| l != n).unwrap_or(0);
        return Err(Error::NotSquare(n, bad));
    }
    let mut m = CMat::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (j, &[re, im]) in row.iter().enumerate() {
            m[(i, j)] = c(re, im);
        }
    }
    Ok(m)
}

impl Serialize for DensityOperator {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        mat_to_rows(&self.mat).serialize(ser)
    }
}

impl<'de> Deserialize<'de> for DensityOperator {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(de)?;
        let mat = rows_to_mat(&rows).map_err(D::Error::custom)?;
        validate_density(mat).map_err(D::Error::custom)
    }
}

impl Serialize for PsdOperator {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        mat_to_rows(&self.mat).serialize(ser)
    }
}

impl<'de> Deserialize<'de> for PsdOperator {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(de)?;
        let mat = rows_to_mat(&rows).map_err(D::Error::custom)?;
        validate_psd(mat).map_err(D::Error::custom)
    }
}

impl Serialize for Projector {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        mat_to_rows(&self.mat).serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Projector {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(de)?;
        let mat = rows_to_mat(&rows).map_err(D::Error::custom)?;
        validate_projector(mat).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::testutil::{random_density, random_hermitian, random_measurement};

    fn dmat(diag: &[f64]) -> CMat {
        let n = diag.len();
        let mut m = CMat::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = cr(d);
        }
        m
    }

    #[test]
    fn validate_accepts_maximally_mixed() {
        let rho = validate_density(dmat(&[0.5, 0.5])).unwrap();
        assert_eq!(rho.dim(), 2);
    }

    #[test]
    fn validate_accepts_plus_state() {
        let mut m = CMat::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = cr(0.5);
            }
        }
        assert!(validate_density(m).is_ok());
    }

    #[test]
    fn validate_rejects_bad_trace() {
        match validate_density(dmat(&[0.6, 0.5])) {
            Err(Error::TraceNotOne { trace, .. }) => assert_abs_diff_eq!(trace, 1.1, epsilon = 1e-12),
            other => panic!("expected TraceNotOne, got {other:?}"),
        }
    }

    #[test]
    fn validate_rejects_non_hermitian() {
        let mut m = dmat(&[0.5, 0.5]);
        m[(0, 1)] = c(0.0, 0.3);
        m[(1, 0)] = c(0.0, 0.3); // conj would be -0.3i
        assert!(matches!(validate_density(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn validate_rejects_negative_eigenvalue() {
        let m = dmat(&[1.5, -0.5]);
        assert!(matches!(validate_density(m), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn entropy_of_maximally_mixed_qubit_is_one() {
        let rho = DensityOperator::maximally_mixed(2);
        assert_abs_diff_eq!(von_neumann_entropy(&rho), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn entropy_of_pure_state_is_zero() {
        let rho = DensityOperator::basis_state(3, 1);
        assert_abs_diff_eq!(von_neumann_entropy(&rho), 0.0, epsilon = 1e-12);
        let mut m = CMat::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = cr(0.5);
            }
        }
        let plus = validate_density(m).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&plus), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn entropy_of_uniform_qutrit_is_log2_3() {
        let rho = DensityOperator::maximally_mixed(3);
        assert_abs_diff_eq!(von_neumann_entropy(&rho), 3.0f64.log2(), epsilon = 1e-12);
        assert_abs_diff_eq!(von_neumann_entropy(&rho), 1.5849625007211562, epsilon = 1e-12);
    }

    #[test]
    fn kron_identity() {
        let i2 = CMat::identity(2, 2);
        let k = kron(&i2, &i2).unwrap();
        assert_eq!(k, CMat::identity(4, 4));
    }

    #[test]
    fn kron_diagonal() {
        let k = kron(&dmat(&[2.0, 3.0]), &dmat(&[5.0, 7.0])).unwrap();
        assert_eq!(k, dmat(&[10.0, 14.0, 15.0, 21.0]));
    }

    #[test]
    fn kron_basis_ordering() {
        // |0><0| tensor |1><1| = |01><01|, index 1 in (00,01,10,11) order.
        let k = kron(&dmat(&[1.0, 0.0]), &dmat(&[0.0, 1.0])).unwrap();
        assert_eq!(k, dmat(&[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn kron_respects_cap() {
        let big = CMat::identity(100, 100);
        match kron_capped(&big, &big, 4096) {
            Err(Error::DimensionOverflow { dim, cap }) => {
                assert_eq!(dim, 10_000);
                assert_eq!(cap, 4096);
            }
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn pinv_sqrt_examples() {
        let id = PsdOperator::identity(3);
        assert_abs_diff_eq!(
            (pinv_sqrt(&id).matrix() - CMat::identity(3, 3)).norm(),
            0.0,
            epsilon = 1e-12
        );
        let a = validate_psd(dmat(&[4.0, 0.0])).unwrap();
        assert_abs_diff_eq!((pinv_sqrt(&a).matrix() - dmat(&[0.5, 0.0])).norm(), 0.0, epsilon = 1e-12);
        let b = validate_psd(dmat(&[1e-14, 1.0])).unwrap();
        assert_abs_diff_eq!((pinv_sqrt(&b).matrix() - dmat(&[0.0, 1.0])).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pinv_sqrt_sandwich_gives_support_projector() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let dim = rng.gen_range(2..=6);
            let rank = rng.gen_range(1..=dim);
            // PSD with an explicit kernel.
            let g = random_hermitian(&mut rng, dim);
            let mut psd = &g * &g;
            let (vals, vecs) = eigh(&psd);
            psd = rebuild_with(&vals, &vecs, |l| if l > vals[dim - rank] * 0.99 { l } else { 0.0 });
            let a = PsdOperator::new_unchecked(hermitize(&psd));
            let k = pinv_sqrt(&a);
            let sandwich = k.matrix() * a.matrix() * k.matrix();
            let supp = support_projector(&a);
            assert!((sandwich - supp.matrix()).norm() < 1e-7);
        }
    }

    #[test]
    fn trace_distance_examples() {
        let a = DensityOperator::maximally_mixed(2);
        assert_abs_diff_eq!(trace_distance(&a, &a).unwrap(), 0.0, epsilon = 1e-12);
        let zero = DensityOperator::basis_state(2, 0);
        let one = DensityOperator::basis_state(2, 1);
        assert_abs_diff_eq!(trace_distance(&zero, &one).unwrap(), 2.0, epsilon = 1e-12);
        let p = validate_density(dmat(&[0.75, 0.25])).unwrap();
        let q = validate_density(dmat(&[0.5, 0.5])).unwrap();
        assert_abs_diff_eq!(trace_distance(&p, &q).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn trace_distance_dim_mismatch() {
        let a = DensityOperator::maximally_mixed(2);
        let b = DensityOperator::maximally_mixed(3);
        assert!(matches!(
            trace_distance(&a, &b),
            Err(Error::DimensionMismatch(2, 3))
        ));
    }

    #[test]
    fn trace_distance_is_a_metric_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let dim = rng.gen_range(2..=5);
            let a = random_density(&mut rng, dim);
            let b = random_density(&mut rng, dim);
            let c = random_density(&mut rng, dim);
            let dab = trace_distance(&a, &b).unwrap();
            let dba = trace_distance(&b, &a).unwrap();
            let dac = trace_distance(&a, &c).unwrap();
            let dcb = trace_distance(&c, &b).unwrap();
            assert_abs_diff_eq!(dab, dba, epsilon = 1e-12);
            assert!(dab <= dac + dcb + 1e-9);
            assert!((0.0..=2.0 + 1e-12).contains(&dab));
        }
    }

    #[test]
    fn entropy_is_additive_under_tensor_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let (da, db) = (rng.gen_range(2..=4), rng.gen_range(2..=4));
            let a = random_density(&mut rng, da);
            let b = random_density(&mut rng, db);
            let ab = DensityOperator::new_unchecked(kron(a.matrix(), b.matrix()).unwrap());
            assert_abs_diff_eq!(
                von_neumann_entropy(&ab),
                von_neumann_entropy(&a) + von_neumann_entropy(&b),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn entropy_bounds_hold_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let dim = rng.gen_range(2..=6);
            let rho = random_density(&mut rng, dim);
            let h = von_neumann_entropy(&rho);
            assert!(h >= 0.0);
            assert!(h <= (dim as f64).log2() + 1e-9);
        }
    }

    #[test]
    fn hayashi_nagaoka_commuting_scalars() {
        let s = validate_psd(dmat(&[0.5, 0.5])).unwrap();
        let t = validate_psd(dmat(&[0.5, 0.5])).unwrap();
        let report = check_hayashi_nagaoka(&s, &t).unwrap();
        // LHS = I/2, RHS = 3I, min eigenvalue of difference = 2.5.
        assert_abs_diff_eq!(report.min_eigenvalue, 2.5, epsilon = 1e-9);
        assert_eq!(report.violation, 0.0);
    }

    #[test]
    fn hayashi_nagaoka_boundary() {
        let s = PsdOperator::identity(2);
        let t = PsdOperator::zero(2);
        let report = check_hayashi_nagaoka(&s, &t).unwrap();
        assert_abs_diff_eq!(report.min_eigenvalue, 0.0, epsilon = 1e-9);
        assert!(report.violation <= 1e-8);
    }

    #[test]
    fn hayashi_nagaoka_rejects_bad_s() {
        let s = validate_psd(dmat(&[1.5, 0.5])).unwrap();
        let t = PsdOperator::zero(2);
        assert!(matches!(
            check_hayashi_nagaoka(&s, &t),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn hayashi_nagaoka_holds_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let dim = rng.gen_range(2..=8);
            let s = random_measurement(&mut rng, dim);
            let g = random_hermitian(&mut rng, dim);
            let t = PsdOperator::new_unchecked(hermitize(&(&g * &g)) * cr(rng.gen_range(0.0..1.0)));
            let report = check_hayashi_nagaoka(&s, &t).unwrap();
            assert!(
                report.min_eigenvalue >= -1e-8,
                "violated with min eig {}",
                report.min_eigenvalue
            );
        }
    }

    #[test]
    fn gentle_operator_identity_and_null() {
        let ensemble = vec![
            (0.3, DensityOperator::basis_state(2, 0)),
            (0.7, DensityOperator::maximally_mixed(2)),
        ];
        let id = PsdOperator::identity(2);
        let r = gentle_operator_check(&ensemble, &id).unwrap();
        assert_abs_diff_eq!(r.lhs, 0.0, epsilon = 1e-10);
        // bound = 2 sqrt(eps) amplifies trace rounding of order 1e-16.
        assert_abs_diff_eq!(r.bound, 0.0, epsilon = 1e-7);

        let zero = PsdOperator::zero(2);
        let r = gentle_operator_check(&ensemble, &zero).unwrap();
        assert_abs_diff_eq!(r.lhs, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.bound, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn gentle_operator_holds_on_random_ensembles() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..100 {
            let dim = rng.gen_range(2..=8);
            let k = rng.gen_range(1..=4);
            let mut weights: Vec<f64> = (0..k).map(|_| -f64::ln(rng.gen_range(1e-9..1.0))).collect();
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            let ensemble: Vec<(f64, DensityOperator)> = weights
                .into_iter()
                .map(|w| (w, random_density(&mut rng, dim)))
                .collect();
            let lambda = random_measurement(&mut rng, dim);
            let r = gentle_operator_check(&ensemble, &lambda).unwrap();
            assert!(r.lhs <= r.bound + 1e-8, "lhs {} > bound {}", r.lhs, r.bound);
        }
    }

    #[test]
    fn matrix_json_round_trip() {
        let rho = validate_density(dmat(&[0.25, 0.75])).unwrap();
        let json = serde_json::to_string(&rho).unwrap();
        assert_eq!(json, "[[[0.25,0.0],[0.0,0.0]],[[0.0,0.0],[0.75,0.0]]]");
        let back: DensityOperator = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rho);
    }
}
