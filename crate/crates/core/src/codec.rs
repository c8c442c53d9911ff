//! End-to-end protocol simulator: random codebooks, the square-root
//! measurement decoder built from sandwiched typical projectors, and exact
//! error-probability evaluation.
//!
//! Decoding operators are formed per jointly typical source triple as
//!
//! ```text
//! G = Pi  Pi_s  Pi_x1  Pi_x1x2  Pi_x1  Pi_s  Pi
//! ```
//!
//! (zero outside the typical set), and the measurement is
//! L = (sum G)^{-1/2} G (sum G)^{-1/2} with the inverse taken on the
//! support; the completion element absorbs the kernel and counts as an
//! error when decoded.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{output_state_capped, CqMac};
use crate::error::{Error, Result};
use crate::info::{
    omega_state, rho_bar, sigma_state, tau_state, holevo_quantities, CodeDistribution,
    InfoQuantities,
};
use crate::linalg::{
    self, cr, pinv_sqrt, trace_product_re, CMat, DensityOperator, Projector, PsdOperator,
};
use crate::seeds;
use crate::source::{common_part, triple_pmf, CommonPart, JointSource, TriplePmf};
use crate::typicality::{self, ProductSpectrum, TypicalSpec, ENUM_CAP};

const ROLE_S: u64 = 1;
const ROLE_X1: u64 = 2;
const ROLE_X2: u64 = 3;
const ROLE_TRIAL: u64 = 4;

type Seq = Vec<usize>;
type TripleSeq = (Seq, Seq, Seq);

// ---------------------------------------------------------------------------
// Codebook
// ---------------------------------------------------------------------------

/// One sampled code instance: s^n per common-part sequence, x1^n per source
/// sequence of sender 1, x2^n per source sequence of sender 2.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    n: usize,
    seed: u64,
    s_of_w: BTreeMap<Seq, Seq>,
    x1_of_u: BTreeMap<Seq, Seq>,
    x2_of_v: BTreeMap<Seq, Seq>,
}

impl Codebook {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn s_codeword(&self, w_seq: &[usize]) -> &[usize] {
        &self.s_of_w[w_seq]
    }

    pub fn x1_codeword(&self, u_seq: &[usize]) -> &[usize] {
        &self.x1_of_u[u_seq]
    }

    pub fn x2_codeword(&self, v_seq: &[usize]) -> &[usize] {
        &self.x2_of_v[v_seq]
    }
}

fn draw_letter(rng: &mut impl rand::Rng, pmf: &[f64]) -> usize {
    let roll: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in pmf.iter().enumerate() {
        acc += p;
        if roll < acc {
            return i;
        }
    }
    pmf.len() - 1
}

/// Letters of positive marginal probability.
fn positive_letters(marginal: &[f64]) -> Vec<usize> {
    marginal
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(i, _)| i)
        .collect()
}

fn check_enum(count: u128) -> Result<()> {
    if count > ENUM_CAP as u128 {
        return Err(Error::EnumerationTooLarge {
            count,
            cap: ENUM_CAP,
        });
    }
    Ok(())
}

/// Sample one codebook: s^n(w^n) i.i.d. from p(s) for every w^n, then
/// x1^n(u^n) letterwise from p(x1 | u_i, s_i(w^n)) with w^n the blockwise
/// image of u^n, and symmetrically for x2^n. Fully determined by the seed.
pub fn sample_codebook(
    src: &JointSource,
    cp: &CommonPart,
    cd: &CodeDistribution,
    n: usize,
    seed: u64,
) -> Result<Codebook> {
    if n == 0 {
        return Err(Error::LengthMismatch(0, 1));
    }
    let k = cp.block_count();
    check_enum((k as u128).saturating_pow(n as u32))?;

    let mut s_of_w = BTreeMap::new();
    let mut index = 0u64;
    typicality::for_each_mixed_radix(&vec![k; n], |w_seq| {
        let mut rng = seeds::rng(seeds::child(seed, ROLE_S, index));
        let s_seq: Seq = (0..n).map(|_| draw_letter(&mut rng, cd.p_s())).collect();
        s_of_w.insert(w_seq.to_vec(), s_seq);
        index += 1;
    });

    let u_letters = positive_letters(&src.marginal_u());
    check_enum((u_letters.len() as u128).saturating_pow(n as u32))?;
    let mut x1_of_u = BTreeMap::new();
    index = 0;
    typicality::for_each_mixed_radix(&vec![u_letters.len(); n], |picks| {
        let u_seq: Seq = picks.iter().map(|&i| u_letters[i]).collect();
        let w_seq = cp.w_seq_of_u(&u_seq);
        let s_seq = &s_of_w[&w_seq];
        let mut rng = seeds::rng(seeds::child(seed, ROLE_X1, index));
        let x1_seq: Seq = (0..n)
            .map(|i| draw_letter(&mut rng, cd.row_x1(u_seq[i], s_seq[i])))
            .collect();
        x1_of_u.insert(u_seq, x1_seq);
        index += 1;
    });

    let v_letters = positive_letters(&src.marginal_v());
    check_enum((v_letters.len() as u128).saturating_pow(n as u32))?;
    let mut x2_of_v = BTreeMap::new();
    index = 0;
    typicality::for_each_mixed_radix(&vec![v_letters.len(); n], |picks| {
        let v_seq: Seq = picks.iter().map(|&i| v_letters[i]).collect();
        let w_seq = cp.w_seq_of_v(&v_seq);
        let s_seq = &s_of_w[&w_seq];
        let mut rng = seeds::rng(seeds::child(seed, ROLE_X2, index));
        let x2_seq: Seq = (0..n)
            .map(|i| draw_letter(&mut rng, cd.row_x2(v_seq[i], s_seq[i])))
            .collect();
        x2_of_v.insert(v_seq, x2_seq);
        index += 1;
    });

    Ok(Codebook {
        n,
        seed,
        s_of_w,
        x1_of_u,
        x2_of_v,
    })
}

// ---------------------------------------------------------------------------
// POVM
// ---------------------------------------------------------------------------

/// A labeled measurement: one PSD element per source-triple outcome plus a
/// completion element absorbing the rest of the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    dim: usize,
    outcomes: Vec<(TripleSeq, PsdOperator)>,
    index: BTreeMap<TripleSeq, usize>,
    completion: PsdOperator,
}

impl Povm {
    pub fn new(outcomes: Vec<(TripleSeq, PsdOperator)>, completion: PsdOperator) -> Result<Self> {
        let dim = completion.dim();
        if let Some((_, bad)) = outcomes.iter().find(|(_, op)| op.dim() != dim) {
            return Err(Error::DimensionMismatch(bad.dim(), dim));
        }
        let mut index = BTreeMap::new();
        for (i, (label, _)) in outcomes.iter().enumerate() {
            index.insert(label.clone(), i);
        }
        Ok(Povm {
            dim,
            outcomes,
            index,
            completion,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> &[(TripleSeq, PsdOperator)] {
        &self.outcomes
    }

    pub fn completion(&self) -> &PsdOperator {
        &self.completion
    }

    pub fn outcome(&self, u: &[usize], v: &[usize], w: &[usize]) -> Option<&PsdOperator> {
        self.index
            .get(&(u.to_vec(), v.to_vec(), w.to_vec()))
            .map(|&i| &self.outcomes[i].1)
    }

    /// Full invariant check: every element PSD within 1e-8 and the elements
    /// plus completion sum to the identity within 1e-8.
    pub fn validate(&self) -> Result<()> {
        let mut sum = self.completion.matrix().clone();
        let min = self.completion.min_eigenvalue();
        if min < -1e-8 {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
            });
        }
        for (_, op) in &self.outcomes {
            let min = op.min_eigenvalue();
            if min < -1e-8 {
                return Err(Error::NotPsd {
                    min_eigenvalue: min,
                });
            }
            sum += op.matrix();
        }
        let dev = (&sum - CMat::identity(self.dim, self.dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        if dev > 1e-8 {
            return Err(Error::PreconditionViolated(format!(
                "POVM elements sum to identity only within {dev:.3e}"
            )));
        }
        Ok(())
    }
}

/// Diagonal POVM for a decoder that maps each computational-basis outcome
/// to a source-triple estimate (or to the completion when `assign` returns
/// `None`).
pub fn basis_decoder_povm(
    dim: usize,
    assign: impl Fn(usize) -> Option<TripleSeq>,
) -> Result<Povm> {
    let mut groups: BTreeMap<TripleSeq, Vec<usize>> = BTreeMap::new();
    let mut unassigned = Vec::new();
    for idx in 0..dim {
        match assign(idx) {
            Some(label) => groups.entry(label).or_default().push(idx),
            None => unassigned.push(idx),
        }
    }
    let diag = |indices: &[usize]| {
        let mut m = CMat::zeros(dim, dim);
        for &i in indices {
            m[(i, i)] = cr(1.0);
        }
        PsdOperator::new_unchecked(m)
    };
    let outcomes = groups
        .iter()
        .map(|(label, indices)| (label.clone(), diag(indices)))
        .collect();
    Povm::new(outcomes, diag(&unassigned))
}

// ---------------------------------------------------------------------------
// Decoder construction
// ---------------------------------------------------------------------------

/// Shared per-codebook state for building decoding operators.
struct DecoderContext<'a> {
    ch: &'a CqMac,
    cb: &'a Codebook,
    triple: TriplePmf,
    spec: TypicalSpec,
    cap: usize,
    q: InfoQuantities,
    /// tau_{w,s} per (block, s).
    tau: HashMap<(usize, usize), DensityOperator>,
    /// omega_{u,s,x1} per (u, s, x1).
    omega: HashMap<(usize, usize, usize), DensityOperator>,
    /// Unconditional typical projector for rho_bar^{(x) n}.
    pi_avg: Projector,
    pi_s_cache: HashMap<Seq, Projector>,
    pi_x1_cache: HashMap<Seq, Projector>,
}

impl<'a> DecoderContext<'a> {
    fn new(
        cb: &'a Codebook,
        ch: &'a CqMac,
        src: &JointSource,
        cp: &CommonPart,
        cd: &'a CodeDistribution,
        delta: f64,
        cap: usize,
    ) -> Result<Self> {
        let n = cb.n();
        let total = (ch.dim_b() as u128).saturating_pow(n as u32);
        if total > cap as u128 {
            return Err(Error::DimensionOverflow { dim: total, cap });
        }
        let q = holevo_quantities(src, cp, cd, ch)?;
        let triple = triple_pmf(src, cp);

        let mut tau = HashMap::new();
        let p_w = triple.marginal_w();
        for (w, &pw) in p_w.iter().enumerate() {
            if pw <= 0.0 {
                continue;
            }
            for s in 0..cd.size_s() {
                tau.insert((w, s), tau_state(src, cp, cd, ch, w, s)?);
            }
        }

        let mut omega = HashMap::new();
        for (u, &pu) in src.marginal_u().iter().enumerate() {
            if pu <= 0.0 {
                continue;
            }
            for s in 0..cd.size_s() {
                for x1 in 0..ch.size_x1() {
                    omega.insert((u, s, x1), omega_state(src, cd, ch, u, s, x1)?);
                }
            }
        }

        let bar = rho_bar(src, cp, cd, ch);
        let avg_states: Vec<&DensityOperator> = std::iter::repeat(&bar).take(n).collect();
        let avg_spectrum = ProductSpectrum::from_states(&avg_states);
        let included = avg_spectrum.included_labels(q.h_b, delta)?;
        let pi_avg = avg_spectrum.projector_for_labels(&included, cap)?;

        Ok(DecoderContext {
            ch,
            cb,
            triple,
            spec: TypicalSpec::new(n, delta),
            cap,
            q,
            tau,
            omega,
            pi_avg,
            pi_s_cache: HashMap::new(),
            pi_x1_cache: HashMap::new(),
        })
    }

    /// Conditionally typical projector for the tau product along
    /// (w^n, s^n(w^n)).
    fn pi_s(&mut self, w_seq: &[usize]) -> Result<Projector> {
        if let Some(p) = self.pi_s_cache.get(w_seq) {
            return Ok(p.clone());
        }
        let s_seq = self.cb.s_codeword(w_seq).to_vec();
        let states: Vec<&DensityOperator> = w_seq
            .iter()
            .zip(&s_seq)
            .map(|(&w, &s)| &self.tau[&(w, s)])
            .collect();
        let spectrum = ProductSpectrum::from_states(&states);
        let included = spectrum.included_labels(self.q.h_b_given_ws, self.spec.delta)?;
        let pi = spectrum.projector_for_labels(&included, self.cap)?;
        self.pi_s_cache.insert(w_seq.to_vec(), pi.clone());
        Ok(pi)
    }

    /// Conditionally typical projector for the omega product along
    /// (u^n, s^n, x1^n(u^n)).
    fn pi_x1(&mut self, u_seq: &[usize], w_seq: &[usize]) -> Result<Projector> {
        if let Some(p) = self.pi_x1_cache.get(u_seq) {
            return Ok(p.clone());
        }
        let s_seq = self.cb.s_codeword(w_seq).to_vec();
        let x1_seq = self.cb.x1_codeword(u_seq).to_vec();
        let states: Vec<&DensityOperator> = (0..u_seq.len())
            .map(|i| &self.omega[&(u_seq[i], s_seq[i], x1_seq[i])])
            .collect();
        let spectrum = ProductSpectrum::from_states(&states);
        let included = spectrum.included_labels(self.q.h_b_given_x1us, self.spec.delta)?;
        let pi = spectrum.projector_for_labels(&included, self.cap)?;
        self.pi_x1_cache.insert(u_seq.to_vec(), pi.clone());
        Ok(pi)
    }

    /// Basis of the conditionally typical subspace of the channel outputs
    /// along (x1^n, x2^n); `None` when it spans the whole space.
    fn output_basis(&self, x1_seq: &[usize], x2_seq: &[usize]) -> Result<Option<CMat>> {
        let states: Vec<&DensityOperator> = x1_seq
            .iter()
            .zip(x2_seq)
            .map(|(&x1, &x2)| self.ch.output(x1, x2))
            .collect();
        let spectrum = ProductSpectrum::from_states(&states);
        let included = spectrum.included_labels(self.q.h_b_given_x1x2, self.spec.delta)?;
        if included.len() as u128 == spectrum.total_dim() {
            return Ok(None);
        }
        Ok(Some(spectrum.basis_matrix(&included)))
    }

    /// Factor C with Gamma = C C^dag for a typical triple, or `None` when
    /// every projector in the sandwich is the identity.
    fn gamma_factor(&mut self, u_seq: &[usize], v_seq: &[usize], w_seq: &[usize]) -> Result<Option<CMat>> {
        let x1_seq = self.cb.x1_codeword(u_seq).to_vec();
        let x2_seq = self.cb.x2_codeword(v_seq).to_vec();
        let pi_s = self.pi_s(w_seq)?;
        let pi_x1 = self.pi_x1(u_seq, w_seq)?;
        let mut m: Option<CMat> = None;
        for p in [&self.pi_avg, &pi_s, &pi_x1] {
            if p.rank() == p.dim() {
                continue; // identity factor
            }
            m = Some(match m {
                None => p.matrix().clone(),
                Some(acc) => acc * p.matrix(),
            });
        }
        match self.output_basis(&x1_seq, &x2_seq)? {
            Some(basis) => Ok(Some(match m {
                None => basis,
                Some(m) => m * basis,
            })),
            None => Ok(m), // Gamma = M M^dag, or identity when M is None
        }
    }
}

/// The detection operator for one source triple: the seven-factor sandwich
/// of typical projectors, or the zero operator when the triple is not
/// jointly typical.
pub fn gamma_operator(
    cb: &Codebook,
    ch: &CqMac,
    src: &JointSource,
    cp: &CommonPart,
    cd: &CodeDistribution,
    triple: (&[usize], &[usize], &[usize]),
    delta: f64,
) -> Result<PsdOperator> {
    gamma_operator_capped(cb, ch, src, cp, cd, triple, delta, linalg::DEFAULT_DIM_CAP)
}

#[allow(clippy::too_many_arguments)]
pub fn gamma_operator_capped(
    cb: &Codebook,
    ch: &CqMac,
    src: &JointSource,
    cp: &CommonPart,
    cd: &CodeDistribution,
    triple: (&[usize], &[usize], &[usize]),
    delta: f64,
    cap: usize,
) -> Result<PsdOperator> {
    let mut ctx = DecoderContext::new(cb, ch, src, cp, cd, delta, cap)?;
    let dim = (ch.dim_b() as usize).pow(cb.n() as u32);
    let spec = TypicalSpec::new(cb.n(), delta);
    let (u_seq, v_seq, w_seq) = triple;
    if !typicality::is_jointly_typical(&ctx.triple, &spec, u_seq, v_seq, w_seq) {
        return Ok(PsdOperator::zero(dim));
    }
    match ctx.gamma_factor(u_seq, v_seq, w_seq)? {
        None => Ok(PsdOperator::identity(dim)),
        Some(c) => Ok(PsdOperator::new_unchecked(linalg::hermitize(
            &(&c * c.adjoint()),
        ))),
    }
}

/// Build the square-root measurement: one outcome per jointly typical
/// triple, completion absorbing the kernel of the summed detectors.
pub fn build_sqrt_povm(
    cb: &Codebook,
    ch: &CqMac,
    src: &JointSource,
    cp: &CommonPart,
    cd: &CodeDistribution,
    delta: f64,
) -> Result<Povm> {
    build_sqrt_povm_capped(cb, ch, src, cp, cd, delta, linalg::DEFAULT_DIM_CAP)
}

pub fn build_sqrt_povm_capped(
    cb: &Codebook,
    ch: &CqMac,
    src: &JointSource,
    cp: &CommonPart,
    cd: &CodeDistribution,
    delta: f64,
    cap: usize,
) -> Result<Povm> {
    let mut ctx = DecoderContext::new(cb, ch, src, cp, cd, delta, cap)?;
    let spec = TypicalSpec::new(cb.n(), delta);
    let set = typicality::jointly_typical_set(&ctx.triple, &spec)?;
    let dim = (ch.dim_b() as usize).pow(cb.n() as u32);

    let mut factors: Vec<(TripleSeq, Option<CMat>)> = Vec::with_capacity(set.members.len());
    let mut gamma_sum = CMat::zeros(dim, dim);
    for (u, v, w) in &set.members {
        let c = ctx.gamma_factor(u, v, w)?;
        match &c {
            None => gamma_sum += CMat::identity(dim, dim),
            Some(c) => gamma_sum += c * c.adjoint(),
        }
        factors.push(((u.clone(), v.clone(), w.clone()), c));
    }

    let inv_sqrt = pinv_sqrt(&PsdOperator::new_unchecked(linalg::hermitize(&gamma_sum)));
    let mut outcomes = Vec::with_capacity(factors.len());
    let mut lambda_sum = CMat::zeros(dim, dim);
    for (label, c) in factors {
        let kc = match c {
            None => inv_sqrt.matrix().clone(),
            Some(c) => inv_sqrt.matrix() * c,
        };
        let lambda = linalg::hermitize(&(&kc * kc.adjoint()));
        lambda_sum += &lambda;
        outcomes.push((label, PsdOperator::new_unchecked(lambda)));
    }
    let completion = linalg::hermitize(&(CMat::identity(dim, dim) - lambda_sum));
    Povm::new(outcomes, PsdOperator::new_unchecked(completion))
}

/// Conditionally typical projector for the sigma product along
/// (v^n, s^n, x2^n(v^n)); the proof smooths the channel output with it, and
/// tests measure the trace-distance disturbance it causes.
pub fn x2_smoothing_projector(
    cb: &Codebook,
    ch: &CqMac,
    src: &JointSource,
    cp: &CommonPart,
    cd: &CodeDistribution,
    delta: f64,
    v_seq: &[usize],
) -> Result<Projector> {
    let q = holevo_quantities(src, cp, cd, ch)?;
    let w_seq = cp.w_seq_of_v(v_seq);
    let s_seq = cb.s_codeword(&w_seq).to_vec();
    let x2_seq = cb.x2_codeword(v_seq).to_vec();
    let states: Vec<DensityOperator> = (0..v_seq.len())
        .map(|i| sigma_state(src, cd, ch, v_seq[i], s_seq[i], x2_seq[i]))
        .collect::<Result<_>>()?;
    let refs: Vec<&DensityOperator> = states.iter().collect();
    typicality::cond_typical_projector(&refs, q.h_b_given_x2vs, delta)
}

// ---------------------------------------------------------------------------
// Error probability
// ---------------------------------------------------------------------------

fn support_pairs(src: &JointSource, n: usize) -> Result<Vec<(Seq, Seq, f64)>> {
    let support = src.support();
    check_enum((support.len() as u128).saturating_pow(n as u32))?;
    let mut out = Vec::new();
    typicality::for_each_mixed_radix(&vec![support.len(); n], |picks| {
        let u: Seq = picks.iter().map(|&i| support[i].0).collect();
        let v: Seq = picks.iter().map(|&i| support[i].1).collect();
        let p: f64 = picks.iter().map(|&i| src.prob(support[i].0, support[i].1)).product();
        out.push((u, v, p));
    });
    Ok(out)
}

/// Exact end-to-end error probability
/// sum p(u^n, v^n) Tr{(I - L_{u,v,w}) rho_out}.
pub fn error_probability(
    cb: &Codebook,
    ch: &CqMac,
    src: &JointSource,
    cp: &CommonPart,
    povm: &Povm,
) -> Result<f64> {
    let mut pe = 0.0;
    for (u_seq, v_seq, p) in support_pairs(src, cb.n())? {
        let w_seq = cp.w_seq_of_u(&u_seq);
        let rho = output_state_capped(
            ch,
            cb.x1_codeword(&u_seq),
            cb.x2_codeword(&v_seq),
            povm.dim(),
        )?;
        let correct = match povm.outcome(&u_seq, &v_seq, &w_seq) {
            Some(op) => trace_product_re(op.matrix(), rho.matrix()),
            None => 0.0,
        };
        pe += p * (1.0 - correct);
    }
    Ok(pe.clamp(0.0, 1.0 + 1e-12).min(1.0))
}

/// Decoded-wrong probability mass split by error pattern.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ErrorEvents {
    /// u' != u, v' = v, w' = w.
    pub alpha: f64,
    /// u' = u, v' != v, w' = w.
    pub beta: f64,
    /// u' != u, v' != v, w' = w.
    pub gamma: f64,
    /// u' != u, v' != v, w' != w.
    pub delta_event: f64,
    /// Mass decoded to the completion outcome.
    pub completion: f64,
    /// Mass on patterns ruled out by the common-part structure
    /// (w' differing while u' = u or v' = v); must be zero.
    pub impossible_mass: f64,
    /// Total error probability, summed independently.
    pub total_error: f64,
}

impl ErrorEvents {
    /// | total - (alpha + beta + gamma + delta + impossible + completion) |.
    pub fn partition_residual(&self) -> f64 {
        (self.total_error
            - (self.alpha
                + self.beta
                + self.gamma
                + self.delta_event
                + self.impossible_mass
                + self.completion))
            .abs()
    }
}

/// Split the decoding-error mass into the four possible patterns plus the
/// completion outcome.
pub fn decompose_error_events(
    cb: &Codebook,
    ch: &CqMac,
    src: &JointSource,
    cp: &CommonPart,
    povm: &Povm,
) -> Result<ErrorEvents> {
    let mut ev = ErrorEvents::default();
    for (u_seq, v_seq, p) in support_pairs(src, cb.n())? {
        let w_seq = cp.w_seq_of_u(&u_seq);
        let rho = output_state_capped(
            ch,
            cb.x1_codeword(&u_seq),
            cb.x2_codeword(&v_seq),
            povm.dim(),
        )?;
        for ((u2, v2, w2), op) in povm.outcomes() {
            if (u2, v2, w2) == (&u_seq, &v_seq, &w_seq) {
                ev.total_error += p * (1.0 - trace_product_re(op.matrix(), rho.matrix()));
                continue;
            }
            let mass = p * trace_product_re(op.matrix(), rho.matrix());
            let (du, dv, dw) = (u2 != &u_seq, v2 != &v_seq, w2 != &w_seq);
            match (du, dv, dw) {
                (true, false, false) => ev.alpha += mass,
                (false, true, false) => ev.beta += mass,
                (true, true, false) => ev.gamma += mass,
                (true, true, true) => ev.delta_event += mass,
                // w' differs while a source sequence matches: the common
                // part forbids these labels entirely.
                _ => ev.impossible_mass += mass,
            }
        }
        if povm.outcome(&u_seq, &v_seq, &w_seq).is_none() {
            ev.total_error += p;
        }
        ev.completion += p * trace_product_re(povm.completion().matrix(), rho.matrix());
    }
    Ok(ev)
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

/// Averages over independently sampled codebooks, with the full parameter
/// echo for reproducibility.
#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloReport {
    pub n: usize,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    pub mean_pe: f64,
    pub stderr_pe: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta_event: f64,
    pub completion: f64,
    pub impossible_mass_max: f64,
    pub partition_residual_max: f64,
}

impl MonteCarloReport {
    pub fn csv_header() -> &'static str {
        "n,mean_pe,stderr_pe,alpha,beta,gamma,delta_event"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.n, self.mean_pe, self.stderr_pe, self.alpha, self.beta, self.gamma, self.delta_event
        )
    }
}

/// Sample `trials` codebooks with derived seeds, build the square-root
/// decoder for each, and average the exact error probabilities. Trials run
/// concurrently; the reduction is in trial order.
pub fn monte_carlo(
    src: &JointSource,
    cp: &CommonPart,
    cd: &CodeDistribution,
    ch: &CqMac,
    n: usize,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloReport> {
    monte_carlo_capped(src, cp, cd, ch, n, delta, trials, seed, linalg::DEFAULT_DIM_CAP)
}

#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_capped(
    src: &JointSource,
    cp: &CommonPart,
    cd: &CodeDistribution,
    ch: &CqMac,
    n: usize,
    delta: f64,
    trials: usize,
    seed: u64,
    cap: usize,
) -> Result<MonteCarloReport> {
    if trials == 0 {
        return Err(Error::PreconditionViolated("trials must be >= 1".into()));
    }
    let per_trial: Vec<Result<(f64, ErrorEvents)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let cb = sample_codebook(src, cp, cd, n, seeds::child(seed, ROLE_TRIAL, t as u64))?;
            let povm = build_sqrt_povm_capped(&cb, ch, src, cp, cd, delta, cap)?;
            let pe = error_probability(&cb, ch, src, cp, &povm)?;
            let events = decompose_error_events(&cb, ch, src, cp, &povm)?;
            Ok((pe, events))
        })
        .collect();

    let mut pes = Vec::with_capacity(trials);
    let mut acc = ErrorEvents::default();
    let mut impossible_max = 0.0f64;
    let mut residual_max = 0.0f64;
    for r in per_trial {
        let (pe, ev) = r?;
        pes.push(pe);
        acc.alpha += ev.alpha;
        acc.beta += ev.beta;
        acc.gamma += ev.gamma;
        acc.delta_event += ev.delta_event;
        acc.completion += ev.completion;
        impossible_max = impossible_max.max(ev.impossible_mass);
        residual_max = residual_max.max(ev.partition_residual());
    }
    let mean_pe = pes.iter().sum::<f64>() / trials as f64;
    let stderr_pe = if trials > 1 {
        let var = pes.iter().map(|p| (p - mean_pe).powi(2)).sum::<f64>() / (trials - 1) as f64;
        (var / trials as f64).sqrt()
    } else {
        0.0
    };
    let t = trials as f64;
    Ok(MonteCarloReport {
        n,
        delta,
        trials,
        seed,
        mean_pe,
        stderr_pe,
        alpha: acc.alpha / t,
        beta: acc.beta / t,
        gamma: acc.gamma / t,
        delta_event: acc.delta_event / t,
        completion: acc.completion / t,
        impossible_mass_max: impossible_max,
        partition_residual_max: residual_max,
    })
}

/// Convenience wrapper: common part derived internally.
pub fn simulate(
    src: &JointSource,
    cd: &CodeDistribution,
    ch: &CqMac,
    n: usize,
    delta: f64,
    trials: usize,
    seed: u64,
    cap: usize,
) -> Result<MonteCarloReport> {
    let cp = common_part(src);
    monte_carlo_capped(src, &cp, cd, ch, n, delta, trials, seed, cap)
}
