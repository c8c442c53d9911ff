//! Reduced states of the code state and the Holevo information quantities.
//!
//! The code state couples the source triple (U, V, W), the time-sharing
//! variable S, the channel inputs (X1, X2) and the channel output B. Four
//! mutual informations govern the rate region; each reduces to a difference
//! of averaged von Neumann entropies, so this module builds the averaged
//! output states (sigma, omega, tau, rho-bar) and takes entropies.

use serde::{Deserialize, Serialize};

use crate::channel::CqMac;
use crate::error::{Error, Result};
use crate::linalg::{cr, von_neumann_entropy, CMat, DensityOperator};
use crate::source::{condition, triple_pmf, CommonPart, JointSource};

/// Conditioning events below this probability are skipped in entropy
/// averages (0 * S(undefined) = 0).
pub const MIN_COND_PROB: f64 = 1e-14;

/// Row-validation tolerance for conditional pmfs.
const TOL_ROW: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Code distribution
// ---------------------------------------------------------------------------

/// The auxiliary distributions p(s), p(x1 | u, s), p(x2 | v, s) defining a
/// codebook ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CodeDistributionRaw")]
pub struct CodeDistribution {
    p_s: Vec<f64>,
    #[serde(rename = "p_x1_given_us")]
    p_x1: Vec<Vec<Vec<f64>>>, // [u][s][x1]
    #[serde(rename = "p_x2_given_vs")]
    p_x2: Vec<Vec<Vec<f64>>>, // [v][s][x2]
}

#[derive(Deserialize)]
struct CodeDistributionRaw {
    p_s: Vec<f64>,
    p_x1_given_us: Vec<Vec<Vec<f64>>>,
    p_x2_given_vs: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<CodeDistributionRaw> for CodeDistribution {
    type Error = Error;

    fn try_from(raw: CodeDistributionRaw) -> Result<Self> {
        CodeDistribution::new(raw.p_s, raw.p_x1_given_us, raw.p_x2_given_vs)
    }
}

fn check_row(label: &str, row: &[f64]) -> Result<()> {
    if row.is_empty() {
        return Err(Error::InvalidPmf(format!("{label}: empty row")));
    }
    if row.iter().any(|&p| p < 0.0 || !p.is_finite()) {
        return Err(Error::InvalidPmf(format!("{label}: negative entry")));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > TOL_ROW {
        return Err(Error::NotNormalized {
            sum,
            deviation: (sum - 1.0).abs(),
        });
    }
    Ok(())
}

impl CodeDistribution {
    pub fn new(
        p_s: Vec<f64>,
        p_x1: Vec<Vec<Vec<f64>>>,
        p_x2: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        check_row("p_s", &p_s)?;
        let size_s = p_s.len();
        let size_x1 = p_x1
            .first()
            .and_then(|u| u.first())
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidPmf("p_x1_given_us is empty".into()))?;
        for (u, per_s) in p_x1.iter().enumerate() {
            if per_s.len() != size_s {
                return Err(Error::LengthMismatch(per_s.len(), size_s));
            }
            for (s, row) in per_s.iter().enumerate() {
                if row.len() != size_x1 {
                    return Err(Error::LengthMismatch(row.len(), size_x1));
                }
                check_row(&format!("p(x1 | u={u}, s={s})"), row)?;
            }
        }
        let size_x2 = p_x2
            .first()
            .and_then(|v| v.first())
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidPmf("p_x2_given_vs is empty".into()))?;
        for (v, per_s) in p_x2.iter().enumerate() {
            if per_s.len() != size_s {
                return Err(Error::LengthMismatch(per_s.len(), size_s));
            }
            for (s, row) in per_s.iter().enumerate() {
                if row.len() != size_x2 {
                    return Err(Error::LengthMismatch(row.len(), size_x2));
                }
                check_row(&format!("p(x2 | v={v}, s={s})"), row)?;
            }
        }
        Ok(CodeDistribution { p_s, p_x1, p_x2 })
    }

    /// Deterministic encoding X1 = U, X2 = V with a singleton S.
    pub fn deterministic_identity(size_u: usize, size_v: usize) -> Self {
        let point = |n: usize, k: usize| {
            let mut row = vec![0.0; n];
            row[k] = 1.0;
            row
        };
        CodeDistribution {
            p_s: vec![1.0],
            p_x1: (0..size_u).map(|u| vec![point(size_u, u)]).collect(),
            p_x2: (0..size_v).map(|v| vec![point(size_v, v)]).collect(),
        }
    }

    /// Uniform channel inputs, independent of the source, singleton S.
    pub fn uniform(size_u: usize, size_v: usize, size_x1: usize, size_x2: usize) -> Self {
        CodeDistribution {
            p_s: vec![1.0],
            p_x1: vec![vec![vec![1.0 / size_x1 as f64; size_x1]]; size_u],
            p_x2: vec![vec![vec![1.0 / size_x2 as f64; size_x2]]; size_v],
        }
    }

    pub fn size_s(&self) -> usize {
        self.p_s.len()
    }

    pub fn size_u(&self) -> usize {
        self.p_x1.len()
    }

    pub fn size_v(&self) -> usize {
        self.p_x2.len()
    }

    pub fn size_x1(&self) -> usize {
        self.p_x1[0][0].len()
    }

    pub fn size_x2(&self) -> usize {
        self.p_x2[0][0].len()
    }

    pub fn p_s(&self) -> &[f64] {
        &self.p_s
    }

    pub fn row_x1(&self, u: usize, s: usize) -> &[f64] {
        &self.p_x1[u][s]
    }

    pub fn row_x2(&self, v: usize, s: usize) -> &[f64] {
        &self.p_x2[v][s]
    }

    /// The cardinality bound min(|X1| |X2|, dim(B)^2) on |S|.
    pub fn cardinality_bound(ch: &CqMac) -> usize {
        (ch.size_x1() * ch.size_x2()).min(ch.dim_b() * ch.dim_b())
    }

    /// True if |S| exceeds the cardinality bound. Callers warn; the bound
    /// never rejects a distribution.
    pub fn exceeds_cardinality_bound(&self, ch: &CqMac) -> bool {
        self.size_s() > Self::cardinality_bound(ch)
    }
}

// ---------------------------------------------------------------------------
// Reduced states
// ---------------------------------------------------------------------------

fn mix(dim: usize, terms: impl IntoIterator<Item = (f64, CMat)>) -> CMat {
    let mut acc = CMat::zeros(dim, dim);
    for (w, m) in terms {
        if w != 0.0 {
            acc += m * cr(w);
        }
    }
    acc
}

/// sigma_{v,s,x2} = sum_{u,x1} p(u | v) p(x1 | u, s) rho_{x1,x2}.
pub fn sigma_state(
    src: &JointSource,
    cd: &CodeDistribution,
    ch: &CqMac,
    v: usize,
    s: usize,
    x2: usize,
) -> Result<DensityOperator> {
    let cond = condition(src);
    let p_u_given_v = cond.p_u_given_v[v]
        .as_ref()
        .ok_or_else(|| Error::ZeroConditioningEvent(format!("p(v={v}) = 0")))?;
    let mut acc = CMat::zeros(ch.dim_b(), ch.dim_b());
    for (u, &pu) in p_u_given_v.iter().enumerate() {
        if pu < MIN_COND_PROB {
            continue;
        }
        for (x1, &px1) in cd.row_x1(u, s).iter().enumerate() {
            let w = pu * px1;
            if w != 0.0 {
                acc += ch.output(x1, x2).matrix() * cr(w);
            }
        }
    }
    Ok(DensityOperator::new_unchecked(acc))
}

/// omega_{u,s,x1} = sum_{v,x2} p(v | u) p(x2 | v, s) rho_{x1,x2}.
pub fn omega_state(
    src: &JointSource,
    cd: &CodeDistribution,
    ch: &CqMac,
    u: usize,
    s: usize,
    x1: usize,
) -> Result<DensityOperator> {
    let cond = condition(src);
    let p_v_given_u = cond.p_v_given_u[u]
        .as_ref()
        .ok_or_else(|| Error::ZeroConditioningEvent(format!("p(u={u}) = 0")))?;
    let mut acc = CMat::zeros(ch.dim_b(), ch.dim_b());
    for (v, &pv) in p_v_given_u.iter().enumerate() {
        if pv < MIN_COND_PROB {
            continue;
        }
        for (x2, &px2) in cd.row_x2(v, s).iter().enumerate() {
            let w = pv * px2;
            if w != 0.0 {
                acc += ch.output(x1, x2).matrix() * cr(w);
            }
        }
    }
    Ok(DensityOperator::new_unchecked(acc))
}

/// tau_{w,s} = sum_{x1,x2,u,v} p(u, v | w) p(x1 | u, s) p(x2 | v, s) rho_{x1,x2}.
/// `w` is a zero-based block index.
pub fn tau_state(
    src: &JointSource,
    cp: &CommonPart,
    cd: &CodeDistribution,
    ch: &CqMac,
    w: usize,
    s: usize,
) -> Result<DensityOperator> {
    let triple = triple_pmf(src, cp);
    let uv_given_w = triple.uv_given_w(w)?;
    let mut acc = CMat::zeros(ch.dim_b(), ch.dim_b());
    for (u, row) in uv_given_w.iter().enumerate() {
        for (v, &puv) in row.iter().enumerate() {
            if puv < MIN_COND_PROB {
                continue;
            }
            for (x1, &px1) in cd.row_x1(u, s).iter().enumerate() {
                if px1 == 0.0 {
                    continue;
                }
                for (x2, &px2) in cd.row_x2(v, s).iter().enumerate() {
                    let weight = puv * px1 * px2;
                    if weight != 0.0 {
                        acc += ch.output(x1, x2).matrix() * cr(weight);
                    }
                }
            }
        }
    }
    Ok(DensityOperator::new_unchecked(acc))
}

/// The fully averaged output state.
pub fn rho_bar(
    src: &JointSource,
    cp: &CommonPart,
    cd: &CodeDistribution,
    ch: &CqMac,
) -> DensityOperator {
    let joint = induced_input_joint(src, cp, cd);
    let mut acc = CMat::zeros(ch.dim_b(), ch.dim_b());
    for (x1, row) in joint.iter().enumerate() {
        for (x2, &p) in row.iter().enumerate() {
            if p != 0.0 {
                acc += ch.output(x1, x2).matrix() * cr(p);
            }
        }
    }
    DensityOperator::new_unchecked(acc)
}

/// rho^{(u)}_{x2,s} = sum_{x1} p(x1 | u, s) rho_{x1,x2}.
pub fn rho_u(cd: &CodeDistribution, ch: &CqMac, u: usize, s: usize, x2: usize) -> DensityOperator {
    let acc = mix(
        ch.dim_b(),
        cd.row_x1(u, s)
            .iter()
            .enumerate()
            .map(|(x1, &p)| (p, ch.output(x1, x2).matrix().clone())),
    );
    DensityOperator::new_unchecked(acc)
}

/// rho^{(v)}_{x1,s} = sum_{x2} p(x2 | v, s) rho_{x1,x2}.
pub fn rho_v(cd: &CodeDistribution, ch: &CqMac, v: usize, s: usize, x1: usize) -> DensityOperator {
    let acc = mix(
        ch.dim_b(),
        cd.row_x2(v, s)
            .iter()
            .enumerate()
            .map(|(x2, &p)| (p, ch.output(x1, x2).matrix().clone())),
    );
    DensityOperator::new_unchecked(acc)
}

/// Induced joint input distribution p(x1, x2); correlated in general.
pub fn induced_input_joint(
    src: &JointSource,
    cp: &CommonPart,
    cd: &CodeDistribution,
) -> Vec<Vec<f64>> {
    let _ = cp; // the triple's w is determined by (u, v); nothing extra to weight
    let mut joint = vec![vec![0.0; cd.size_x2()]; cd.size_x1()];
    for (u, v) in src.support() {
        let puv = src.prob(u, v);
        for (s, &ps) in cd.p_s().iter().enumerate() {
            if ps == 0.0 {
                continue;
            }
            for (x1, &px1) in cd.row_x1(u, s).iter().enumerate() {
                if px1 == 0.0 {
                    continue;
                }
                for (x2, &px2) in cd.row_x2(v, s).iter().enumerate() {
                    joint[x1][x2] += puv * ps * px1 * px2;
                }
            }
        }
    }
    joint
}

// ---------------------------------------------------------------------------
// Information quantities
// ---------------------------------------------------------------------------

/// The four Holevo quantities of the rate region and the entropies they
/// decompose into, all in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoQuantities {
    pub i_x1_b_given_x2vs: f64,
    pub i_x2_b_given_x1us: f64,
    pub i_x1x2_b_given_ws: f64,
    pub i_x1x2_b: f64,
    pub h_b: f64,
    pub h_b_given_x1x2: f64,
    pub h_b_given_x2vs: f64,
    pub h_b_given_x1us: f64,
    pub h_b_given_ws: f64,
}

/// Evaluate the four Holevo quantities via their entropy decompositions,
/// e.g. I(X1; B | X2 V S) = H(B | X2 V S) - H(B | X1 X2).
pub fn holevo_quantities(
    src: &JointSource,
    cp: &CommonPart,
    cd: &CodeDistribution,
    ch: &CqMac,
) -> Result<InfoQuantities> {
    let cond = condition(src);
    let triple = triple_pmf(src, cp);
    let p_w = triple.marginal_w();

    // Per-pair output entropies, shared by every quantity below.
    let mut h_out = vec![vec![0.0; ch.size_x2()]; ch.size_x1()];
    for (x1, row) in h_out.iter_mut().enumerate() {
        for (x2, h) in row.iter_mut().enumerate() {
            *h = von_neumann_entropy(ch.output(x1, x2));
        }
    }

    let joint = induced_input_joint(src, cp, cd);
    let mut h_b_given_x1x2 = 0.0;
    for (x1, row) in joint.iter().enumerate() {
        for (x2, &p) in row.iter().enumerate() {
            if p >= MIN_COND_PROB {
                h_b_given_x1x2 += p * h_out[x1][x2];
            }
        }
    }

    let mut h_b_given_x2vs = 0.0;
    for (v, &pv) in cond.p_v.iter().enumerate() {
        if pv < MIN_COND_PROB {
            continue;
        }
        for (s, &ps) in cd.p_s().iter().enumerate() {
            if ps < MIN_COND_PROB {
                continue;
            }
            for (x2, &px2) in cd.row_x2(v, s).iter().enumerate() {
                let weight = pv * ps * px2;
                if weight < MIN_COND_PROB {
                    continue;
                }
                h_b_given_x2vs += weight * von_neumann_entropy(&sigma_state(src, cd, ch, v, s, x2)?);
            }
        }
    }

    let mut h_b_given_x1us = 0.0;
    for (u, &pu) in cond.p_u.iter().enumerate() {
        if pu < MIN_COND_PROB {
            continue;
        }
        for (s, &ps) in cd.p_s().iter().enumerate() {
            if ps < MIN_COND_PROB {
                continue;
            }
            for (x1, &px1) in cd.row_x1(u, s).iter().enumerate() {
                let weight = pu * ps * px1;
                if weight < MIN_COND_PROB {
                    continue;
                }
                h_b_given_x1us += weight * von_neumann_entropy(&omega_state(src, cd, ch, u, s, x1)?);
            }
        }
    }

    let mut h_b_given_ws = 0.0;
    for (w, &pw) in p_w.iter().enumerate() {
        if pw < MIN_COND_PROB {
            continue;
        }
        for (s, &ps) in cd.p_s().iter().enumerate() {
            if ps < MIN_COND_PROB {
                continue;
            }
            h_b_given_ws += pw * ps * von_neumann_entropy(&tau_state(src, cp, cd, ch, w, s)?);
        }
    }

    let h_b = von_neumann_entropy(&rho_bar(src, cp, cd, ch));

    Ok(InfoQuantities {
        i_x1_b_given_x2vs: h_b_given_x2vs - h_b_given_x1x2,
        i_x2_b_given_x1us: h_b_given_x1us - h_b_given_x1x2,
        i_x1x2_b_given_ws: h_b_given_ws - h_b_given_x1x2,
        i_x1x2_b: h_b - h_b_given_x1x2,
        h_b,
        h_b_given_x1x2,
        h_b_given_x2vs,
        h_b_given_x1us,
        h_b_given_ws,
    })
}

/// Holevo quantities of the separation baseline, computed for the
/// product-input state p(x1) p(x2) rho_{x1,x2}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationQuantities {
    pub i_x1_b_given_x2: f64,
    pub i_x2_b_given_x1: f64,
    pub i_x1x2_b: f64,
}

pub fn separation_quantities(
    ch: &CqMac,
    p_x1: &[f64],
    p_x2: &[f64],
) -> Result<SeparationQuantities> {
    check_row("p_x1", p_x1)?;
    check_row("p_x2", p_x2)?;
    if p_x1.len() != ch.size_x1() {
        return Err(Error::LengthMismatch(p_x1.len(), ch.size_x1()));
    }
    if p_x2.len() != ch.size_x2() {
        return Err(Error::LengthMismatch(p_x2.len(), ch.size_x2()));
    }
    let dim = ch.dim_b();

    let mut h_b_given_x1x2 = 0.0;
    for (x1, &p1) in p_x1.iter().enumerate() {
        for (x2, &p2) in p_x2.iter().enumerate() {
            let p = p1 * p2;
            if p >= MIN_COND_PROB {
                h_b_given_x1x2 += p * von_neumann_entropy(ch.output(x1, x2));
            }
        }
    }

    let mut h_b_given_x2 = 0.0;
    for (x2, &p2) in p_x2.iter().enumerate() {
        if p2 < MIN_COND_PROB {
            continue;
        }
        let avg = mix(
            dim,
            p_x1
                .iter()
                .enumerate()
                .map(|(x1, &p1)| (p1, ch.output(x1, x2).matrix().clone())),
        );
        h_b_given_x2 += p2 * von_neumann_entropy(&DensityOperator::new_unchecked(avg));
    }

    let mut h_b_given_x1 = 0.0;
    for (x1, &p1) in p_x1.iter().enumerate() {
        if p1 < MIN_COND_PROB {
            continue;
        }
        let avg = mix(
            dim,
            p_x2
                .iter()
                .enumerate()
                .map(|(x2, &p2)| (p2, ch.output(x1, x2).matrix().clone())),
        );
        h_b_given_x1 += p1 * von_neumann_entropy(&DensityOperator::new_unchecked(avg));
    }

    let mut avg_all = CMat::zeros(dim, dim);
    for (x1, &p1) in p_x1.iter().enumerate() {
        for (x2, &p2) in p_x2.iter().enumerate() {
            let p = p1 * p2;
            if p != 0.0 {
                avg_all += ch.output(x1, x2).matrix() * cr(p);
            }
        }
    }
    let h_b = von_neumann_entropy(&DensityOperator::new_unchecked(avg_all));

    Ok(SeparationQuantities {
        i_x1_b_given_x2: h_b_given_x2 - h_b_given_x1x2,
        i_x2_b_given_x1: h_b_given_x1 - h_b_given_x1x2,
        i_x1x2_b: h_b - h_b_given_x1x2,
    })
}
