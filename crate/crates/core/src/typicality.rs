//! Weak typicality: classical typical sets, jointly typical triples, and
//! quantum (conditionally) typical projectors, with numeric verification of
//! their defining properties.
//!
//! A sequence is weakly typical when its sample entropy -(1/n) log2 p(x^n)
//! is within delta of the true entropy. Quantum projectors apply the same
//! test to eigenvalue-label sequences of tensor-power (or tensor-product)
//! states. Inclusion depends only on eigenvalues, so degenerate eigenspaces
//! enter or leave together and the projectors are basis-independent.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, DensityOperator, Projector, SUPPORT_EPS};
use crate::source::TriplePmf;

/// Cap on label-sequence enumeration per projector or set construction.
pub const ENUM_CAP: u64 = 10_000_000;

/// Eigenvalues closer than this are treated as one degenerate cluster.
const CLUSTER_TOL: f64 = 1e-9;

/// Block length and typicality width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypicalSpec {
    pub n: usize,
    pub delta: f64,
}

impl TypicalSpec {
    pub fn new(n: usize, delta: f64) -> Self {
        TypicalSpec { n, delta }
    }
}

// ---------------------------------------------------------------------------
// Classical sample entropy and jointly typical sets
// ---------------------------------------------------------------------------

/// Sample entropy -(1/n) log2 prod_i p(seq_i); +infinity if any letter has
/// zero probability.
pub fn sample_entropy(pmf: &[f64], seq: &[usize]) -> f64 {
    let n = seq.len();
    if n == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for &x in seq {
        let p = pmf[x];
        if p <= 0.0 {
            return f64::INFINITY;
        }
        log_sum += p.log2();
    }
    -log_sum / n as f64
}

/// Iterate over all `radices`-ary sequences in lexicographic order.
pub(crate) fn for_each_mixed_radix(radices: &[usize], mut f: impl FnMut(&[usize])) {
    if radices.iter().any(|&r| r == 0) {
        return;
    }
    let n = radices.len();
    let mut current = vec![0usize; n];
    loop {
        f(&current);
        let mut pos = n;
        while pos > 0 {
            pos -= 1;
            current[pos] += 1;
            if current[pos] < radices[pos] {
                break;
            }
            current[pos] = 0;
            if pos == 0 {
                return;
            }
        }
    }
}

fn count_sequences(radices: &[usize]) -> u128 {
    radices.iter().fold(1u128, |acc, &r| acc.saturating_mul(r as u128))
}

/// The weak jointly typical set of source triples: every nonempty subset of
/// {U, V, W} must have sample entropy within delta of its true entropy.
#[derive(Debug, Clone)]
pub struct JointTypicalSet {
    pub members: Vec<(Vec<usize>, Vec<usize>, Vec<usize>)>,
    pub spec: TypicalSpec,
}

impl JointTypicalSet {
    pub fn contains(&self, u: &[usize], v: &[usize], w: &[usize]) -> bool {
        self.members
            .iter()
            .any(|(mu, mv, mw)| mu == u && mv == v && mw == w)
    }

    /// Sorted text dump, one `u;v;w` triple per line, for diffing.
    pub fn to_sorted_lines(&self) -> Vec<String> {
        let fmt = |seq: &[usize]| {
            seq.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        };
        let mut lines: Vec<String> = self
            .members
            .iter()
            .map(|(u, v, w)| format!("{};{};{}", fmt(u), fmt(v), fmt(w)))
            .collect();
        lines.sort();
        lines
    }
}

/// Per-letter log-probability contributions for the seven subset tests.
struct TripleTypicality {
    /// (log2 p) per support letter, per subset; subsets indexed
    /// U, V, W, UV, UW, VW, UVW.
    letter_logs: Vec<[f64; 7]>,
    entropies: [f64; 7],
    support: Vec<(usize, usize, usize)>,
}

impl TripleTypicality {
    fn new(p: &TriplePmf) -> Self {
        let support = p.support();
        let m_u = p.marginal_u();
        let m_v = p.marginal_v();
        let m_w = p.marginal_w();
        let mut m_uv = vec![vec![0.0; p.size_v()]; p.size_u()];
        let mut m_uw = vec![vec![0.0; p.size_w()]; p.size_u()];
        let mut m_vw = vec![vec![0.0; p.size_w()]; p.size_v()];
        for &(u, v, w) in &support {
            let q = p.prob(u, v, w);
            m_uv[u][v] += q;
            m_uw[u][w] += q;
            m_vw[v][w] += q;
        }
        let ent = |probs: &mut dyn Iterator<Item = f64>| crate::source::shannon_entropy(probs);
        let entropies = [
            ent(&mut m_u.iter().copied()),
            ent(&mut m_v.iter().copied()),
            ent(&mut m_w.iter().copied()),
            ent(&mut m_uv.iter().flatten().copied()),
            ent(&mut m_uw.iter().flatten().copied()),
            ent(&mut m_vw.iter().flatten().copied()),
            ent(&mut support.iter().map(|&(u, v, w)| p.prob(u, v, w))),
        ];
        let letter_logs = support
            .iter()
            .map(|&(u, v, w)| {
                [
                    m_u[u].log2(),
                    m_v[v].log2(),
                    m_w[w].log2(),
                    m_uv[u][v].log2(),
                    m_uw[u][w].log2(),
                    m_vw[v][w].log2(),
                    p.prob(u, v, w).log2(),
                ]
            })
            .collect();
        TripleTypicality {
            letter_logs,
            entropies,
            support,
        }
    }

    /// Typicality of a sequence of support-letter indices.
    fn is_typical(&self, letters: &[usize], delta: f64) -> bool {
        let n = letters.len() as f64;
        for subset in 0..7 {
            let log_sum: f64 = letters.iter().map(|&i| self.letter_logs[i][subset]).sum();
            if (-log_sum / n - self.entropies[subset]).abs() > delta {
                return false;
            }
        }
        true
    }
}

/// Exhaustively enumerate the jointly typical set of a triple pmf. Triples
/// containing zero-probability letters are excluded (their sample entropy
/// is infinite).
pub fn jointly_typical_set(p: &TriplePmf, spec: &TypicalSpec) -> Result<JointTypicalSet> {
    let tt = TripleTypicality::new(p);
    let radices = vec![tt.support.len(); spec.n];
    let count = count_sequences(&radices);
    if count > ENUM_CAP as u128 {
        return Err(Error::EnumerationTooLarge {
            count,
            cap: ENUM_CAP,
        });
    }
    let mut members = Vec::new();
    for_each_mixed_radix(&radices, |letters| {
        if tt.is_typical(letters, spec.delta) {
            let u = letters.iter().map(|&i| tt.support[i].0).collect();
            let v = letters.iter().map(|&i| tt.support[i].1).collect();
            let w = letters.iter().map(|&i| tt.support[i].2).collect();
            members.push((u, v, w));
        }
    });
    Ok(JointTypicalSet {
        members,
        spec: *spec,
    })
}

/// Membership test for a single triple without building the whole set.
pub fn is_jointly_typical(
    p: &TriplePmf,
    spec: &TypicalSpec,
    u_seq: &[usize],
    v_seq: &[usize],
    w_seq: &[usize],
) -> bool {
    let tt = TripleTypicality::new(p);
    let mut letters = Vec::with_capacity(spec.n);
    for i in 0..u_seq.len() {
        match tt
            .support
            .iter()
            .position(|&(u, v, w)| (u, v, w) == (u_seq[i], v_seq[i], w_seq[i]))
        {
            Some(idx) => letters.push(idx),
            None => return false,
        }
    }
    tt.is_typical(&letters, spec.delta)
}

/// Result of checking the indicator bounds on every member of the set.
#[derive(Debug, Clone, Serialize)]
pub struct IndicatorCheckReport {
    pub violations: usize,
    pub checked: usize,
}

/// For every member triple, verify the indicator bound
/// 1 <= p(target^n | cond^n) 2^{n [H(target | cond) + delta']}, delta' = 2 delta,
/// for the conditional patterns u | vw, v | u, uv | w, and the
/// unconditional triple.
pub fn indicator_bound_check(p: &TriplePmf, spec: &TypicalSpec) -> Result<IndicatorCheckReport> {
    let set = jointly_typical_set(p, spec)?;
    let tt = TripleTypicality::new(p);
    let delta_prime = 2.0 * spec.delta;
    let n = spec.n as f64;

    // Subset indices into TripleTypicality: U=0 V=1 W=2 UV=3 UW=4 VW=5 UVW=6.
    // Pattern (target | cond) uses log p(t, c) - log p(c) per letter and
    // H(T | C) = H(TC) - H(C).
    let patterns: [(usize, Option<usize>); 4] = [
        (6, Some(5)), // u | v,w
        (3, Some(0)), // v | u
        (6, Some(2)), // u,v | w
        (6, None),    // u,v,w unconditional
    ];

    let mut violations = 0;
    let mut checked = 0;
    for (u, v, w) in &set.members {
        let letters: Vec<usize> = (0..u.len())
            .map(|i| {
                tt.support
                    .iter()
                    .position(|&(a, b, c)| (a, b, c) == (u[i], v[i], w[i]))
                    .expect("member letter in support")
            })
            .collect();
        for &(joint, cond) in &patterns {
            let mut log_p: f64 = letters.iter().map(|&i| tt.letter_logs[i][joint]).sum();
            let mut h = tt.entropies[joint];
            if let Some(c) = cond {
                log_p -= letters.iter().map(|&i| tt.letter_logs[i][c]).sum::<f64>();
                h -= tt.entropies[c];
            }
            // 1 <= 2^{log_p + n (H + delta')} up to rounding.
            let exponent = log_p + n * (h + delta_prime);
            checked += 1;
            if exponent < -1e-9 {
                violations += 1;
            }
        }
    }
    Ok(IndicatorCheckReport {
        violations,
        checked,
    })
}

// ---------------------------------------------------------------------------
// Quantum typical projectors
// ---------------------------------------------------------------------------

/// Sorted eigenvalues clustered to merge solver noise within degenerate
/// eigenspaces; each value is replaced by its cluster mean.
fn cluster_eigenvalues(vals: &[f64]) -> Vec<f64> {
    let mut out = vals.to_vec();
    let mut i = 0;
    while i < out.len() {
        let mut j = i + 1;
        while j < out.len() && (out[j] - out[j - 1]).abs() <= CLUSTER_TOL {
            j += 1;
        }
        let mean = out[i..j].iter().sum::<f64>() / (j - i) as f64;
        out[i..j].iter_mut().for_each(|v| *v = mean);
        i = j;
    }
    out
}

/// Per-letter spectral data of a product state, with labels ordered by
/// ascending eigenvalue.
pub(crate) struct ProductSpectrum {
    pub vals: Vec<Vec<f64>>,
    pub vecs: Vec<CMat>,
}

impl ProductSpectrum {
    pub fn from_states(states: &[&DensityOperator]) -> Self {
        let mut vals = Vec::with_capacity(states.len());
        let mut vecs = Vec::with_capacity(states.len());
        for s in states {
            let (v, q) = linalg::eigh(s.matrix());
            vals.push(cluster_eigenvalues(&v));
            vecs.push(q);
        }
        ProductSpectrum { vals, vecs }
    }

    pub fn total_dim(&self) -> u128 {
        self.vals.iter().fold(1u128, |acc, v| acc.saturating_mul(v.len() as u128))
    }

    fn radices(&self) -> Vec<usize> {
        self.vals.iter().map(Vec::len).collect()
    }

    /// Label sequences whose eigenvalue-product sample entropy is within
    /// delta of `h_ref`. Zero eigenvalues never appear in a typical label.
    pub fn included_labels(&self, h_ref: f64, delta: f64) -> Result<Vec<Vec<usize>>> {
        let radices = self.radices();
        let count = count_sequences(&radices);
        if count > ENUM_CAP as u128 {
            return Err(Error::EnumerationTooLarge {
                count,
                cap: ENUM_CAP,
            });
        }
        let n = radices.len() as f64;
        let logs: Vec<Vec<f64>> = self
            .vals
            .iter()
            .map(|v| {
                v.iter()
                    .map(|&lam| if lam > SUPPORT_EPS { lam.log2() } else { f64::NEG_INFINITY })
                    .collect()
            })
            .collect();
        let mut included = Vec::new();
        for_each_mixed_radix(&radices, |labels| {
            let mut log_sum = 0.0;
            for (pos, &lab) in labels.iter().enumerate() {
                log_sum += logs[pos][lab];
            }
            if log_sum.is_finite() && (-log_sum / n - h_ref).abs() <= delta {
                included.push(labels.to_vec());
            }
        });
        Ok(included)
    }

    /// Probability (eigenvalue product) of one label sequence.
    pub fn label_probability(&self, labels: &[usize]) -> f64 {
        labels
            .iter()
            .enumerate()
            .map(|(pos, &lab)| self.vals[pos][lab].max(0.0))
            .product()
    }

    /// Orthonormal columns spanning the given label sequences
    /// (dim^n x count).
    pub fn basis_matrix(&self, included: &[Vec<usize>]) -> CMat {
        let dim = self.total_dim() as usize;
        let mut basis = CMat::zeros(dim, included.len());
        for (col_idx, labels) in included.iter().enumerate() {
            let mut col =
                nalgebra::DVector::<num_complex::Complex64>::from_element(1, linalg::cr(1.0));
            for (pos, &lab) in labels.iter().enumerate() {
                let factor = self.vecs[pos].column(lab);
                let mut next =
                    nalgebra::DVector::<num_complex::Complex64>::zeros(col.len() * factor.len());
                for (i, &a) in col.iter().enumerate() {
                    for (j, &b) in factor.iter().enumerate() {
                        next[i * factor.len() + j] = a * b;
                    }
                }
                col = next;
            }
            basis.column_mut(col_idx).copy_from(&col);
        }
        basis
    }

    /// Materialize the projector onto the span of the given label sequences.
    ///
    /// When the label set factors as a product over positions the projector
    /// is assembled as a Kronecker product of per-letter projectors, which
    /// is both exact and much cheaper; otherwise the dense basis is built
    /// column by column.
    pub fn projector_for_labels(&self, included: &[Vec<usize>], cap: usize) -> Result<Projector> {
        let total = self.total_dim();
        if total > cap as u128 {
            return Err(Error::DimensionOverflow { dim: total, cap });
        }
        let dim = total as usize;
        if included.is_empty() {
            return Ok(Projector::zero(dim));
        }

        // Detect product structure: included == cartesian product of the
        // per-position label sets.
        let npos = self.vals.len();
        let mut used: Vec<Vec<bool>> = self.vals.iter().map(|v| vec![false; v.len()]).collect();
        for labels in included {
            for (pos, &lab) in labels.iter().enumerate() {
                used[pos][lab] = true;
            }
        }
        let product_count: u128 = used
            .iter()
            .fold(1u128, |acc, u| acc.saturating_mul(u.iter().filter(|&&b| b).count() as u128));
        if product_count == included.len() as u128 {
            let mut acc: Option<CMat> = None;
            for pos in 0..npos {
                let d = self.vals[pos].len();
                let mut p = CMat::zeros(d, d);
                let mut all = true;
                for (lab, &is_used) in used[pos].iter().enumerate() {
                    if is_used {
                        let col = self.vecs[pos].column(lab);
                        for i in 0..d {
                            for j in 0..d {
                                p[(i, j)] += col[i] * col[j].conj();
                            }
                        }
                    } else {
                        all = false;
                    }
                }
                if all {
                    p = CMat::identity(d, d);
                }
                acc = Some(match acc {
                    None => p,
                    Some(a) => linalg::kron_capped(&a, &p, cap)?,
                });
            }
            return Ok(Projector::new_unchecked(linalg::hermitize(&acc.unwrap())));
        }

        Ok(Projector::from_orthonormal_columns(&self.basis_matrix(included)))
    }
}

/// Projector onto the typical subspace of rho^{(x) n}: spans eigenvector
/// sequences whose eigenvalue-product sample entropy is within delta of
/// S(rho).
pub fn typical_projector(rho: &DensityOperator, spec: &TypicalSpec) -> Result<Projector> {
    typical_projector_capped(rho, spec, linalg::DEFAULT_DIM_CAP)
}

pub fn typical_projector_capped(
    rho: &DensityOperator,
    spec: &TypicalSpec,
    cap: usize,
) -> Result<Projector> {
    let states: Vec<&DensityOperator> = std::iter::repeat(rho).take(spec.n).collect();
    let spectrum = ProductSpectrum::from_states(&states);
    let total = spectrum.total_dim();
    if total > cap as u128 {
        return Err(Error::DimensionOverflow { dim: total, cap });
    }
    let h_ref = spectrum_entropy(&spectrum.vals[0]);
    let included = spectrum.included_labels(h_ref, spec.delta)?;
    spectrum.projector_for_labels(&included, cap)
}

/// Entropy in bits of one letter's (clustered) eigenvalue list.
fn spectrum_entropy(vals: &[f64]) -> f64 {
    crate::source::shannon_entropy(vals.iter().map(|&v| v.max(0.0)))
}

/// Projector onto the weak conditionally typical subspace of the product
/// state states[0] (x) ... (x) states[n-1], relative to the declared
/// average conditional entropy `h_ref` (bits).
pub fn cond_typical_projector(
    states: &[&DensityOperator],
    h_ref: f64,
    delta: f64,
) -> Result<Projector> {
    cond_typical_projector_capped(states, h_ref, delta, linalg::DEFAULT_DIM_CAP)
}

pub fn cond_typical_projector_capped(
    states: &[&DensityOperator],
    h_ref: f64,
    delta: f64,
    cap: usize,
) -> Result<Projector> {
    if states.is_empty() {
        return Err(Error::LengthMismatch(0, 1));
    }
    let spectrum = ProductSpectrum::from_states(states);
    let total = spectrum.total_dim();
    if total > cap as u128 {
        return Err(Error::DimensionOverflow { dim: total, cap });
    }
    let included = spectrum.included_labels(h_ref, delta)?;
    spectrum.projector_for_labels(&included, cap)
}

// ---------------------------------------------------------------------------
// Property verification (label level, no matrices materialized)
// ---------------------------------------------------------------------------

/// Numeric check of the typical-projector properties.
#[derive(Debug, Clone, Serialize)]
pub struct TypicalityReport {
    /// Tr{Pi rho^{(x) n}}.
    pub trace_capture: f64,
    /// Tr{Pi}: number of included label sequences.
    pub rank: u64,
    /// 2^{n (H + delta)}.
    pub rank_bound: f64,
    /// trace_capture >= 1 - epsilon.
    pub capture_ok: bool,
    /// min over included labels of min(p - 2^{-n(H+delta)}, 2^{-n(H-delta)} - p).
    pub sandwich_slack: f64,
    pub sandwich_ok: bool,
    /// min over included labels of 2^{n(H+delta)} p - 1 (the excluded labels
    /// satisfy the trick trivially).
    pub projector_trick_slack: f64,
    pub projector_trick_ok: bool,
}

/// Verify the three typical-projector properties and the projector trick
/// for rho^{(x) n}, working on eigenvalue labels so that block lengths far
/// beyond the dense-matrix cap stay checkable.
pub fn verify_typical_properties(
    rho: &DensityOperator,
    spec: &TypicalSpec,
    epsilon: f64,
) -> Result<TypicalityReport> {
    let states: Vec<&DensityOperator> = std::iter::repeat(rho).take(spec.n).collect();
    let spectrum = ProductSpectrum::from_states(&states);
    let h_ref = spectrum_entropy(&spectrum.vals[0]);
    verify_product_properties(&spectrum, h_ref, spec.delta, epsilon)
}

/// Same checks for an explicit product of (conditional) states against a
/// declared reference entropy.
pub fn verify_cond_typical_properties(
    states: &[&DensityOperator],
    h_ref: f64,
    delta: f64,
    epsilon: f64,
) -> Result<TypicalityReport> {
    let spectrum = ProductSpectrum::from_states(states);
    verify_product_properties(&spectrum, h_ref, delta, epsilon)
}

fn verify_product_properties(
    spectrum: &ProductSpectrum,
    h_ref: f64,
    delta: f64,
    epsilon: f64,
) -> Result<TypicalityReport> {
    let included = spectrum.included_labels(h_ref, delta)?;
    let n = spectrum.vals.len() as f64;
    let lower = (-(n) * (h_ref + delta)).exp2();
    let upper = (-(n) * (h_ref - delta)).exp2();
    let rank_bound = (n * (h_ref + delta)).exp2();

    let mut trace_capture = 0.0;
    let mut sandwich_slack = f64::INFINITY;
    let mut trick_slack = f64::INFINITY;
    for labels in &included {
        let p = spectrum.label_probability(labels);
        trace_capture += p;
        sandwich_slack = sandwich_slack.min(p - lower).min(upper - p);
        trick_slack = trick_slack.min(rank_bound * p - 1.0);
    }
    if included.is_empty() {
        sandwich_slack = 0.0;
        trick_slack = 0.0;
    }
    Ok(TypicalityReport {
        trace_capture,
        rank: included.len() as u64,
        rank_bound,
        capture_ok: trace_capture >= 1.0 - epsilon,
        sandwich_slack,
        sandwich_ok: sandwich_slack >= -1e-9,
        projector_trick_slack: trick_slack,
        projector_trick_ok: trick_slack >= -1e-8,
    })
}
