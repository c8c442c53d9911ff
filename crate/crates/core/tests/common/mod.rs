//! Shared helpers for the integration suites: random instance generators
//! and an independent pmf-only reimplementation of the decoding pipeline
//! used to cross-check the quantum path on classical (diagonal) channels.

#![allow(dead_code)]

use rand::Rng;

use cqmac_core::codec::Codebook;
use cqmac_core::info::CodeDistribution;
use cqmac_core::linalg::{c, eigh, hermitize, trace_re, CMat, DensityOperator, PsdOperator};
use cqmac_core::source::{shannon_entropy, CommonPart, JointSource, TriplePmf};

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> CMat {
    let mut g = CMat::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            g[(i, j)] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    hermitize(&g)
}

pub fn random_density(rng: &mut impl Rng, dim: usize) -> DensityOperator {
    let g = random_hermitian(rng, dim);
    let psd = &g * &g;
    let tr = trace_re(&psd);
    cqmac_core::linalg::validate_density(hermitize(&(psd * c(1.0 / tr, 0.0)))).unwrap()
}

/// Random operator with spectrum in [0, 1].
pub fn random_measurement(rng: &mut impl Rng, dim: usize) -> PsdOperator {
    let g = random_hermitian(rng, dim);
    let (vals, vecs) = eigh(&g);
    let lo = vals[0];
    let hi = vals[dim - 1];
    let span = (hi - lo).max(1e-12);
    let mut m = CMat::zeros(dim, dim);
    for (k, &lam) in vals.iter().enumerate() {
        let f = (lam - lo) / span;
        let col = vecs.column(k);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] += col[i] * col[j].conj() * c(f, 0.0);
            }
        }
    }
    cqmac_core::linalg::validate_psd(hermitize(&m)).unwrap()
}

pub fn random_simplex(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..n).map(|_| -f64::ln(rng.gen_range(1e-9..1.0f64))).collect();
    let total: f64 = row.iter().sum();
    row.iter_mut().for_each(|p| *p /= total);
    let fix = 1.0 - row.iter().sum::<f64>();
    row[0] += fix;
    row
}

pub fn random_source(rng: &mut impl Rng, nu: usize, nv: usize) -> JointSource {
    loop {
        let mut pmf = vec![vec![0.0; nv]; nu];
        let mut total = 0.0;
        for row in pmf.iter_mut() {
            for p in row.iter_mut() {
                if rng.gen_bool(0.6) {
                    *p = rng.gen_range(0.05..1.0);
                    total += *p;
                }
            }
        }
        if total == 0.0 {
            continue;
        }
        for row in pmf.iter_mut() {
            for p in row.iter_mut() {
                *p /= total;
            }
        }
        let sum: f64 = pmf.iter().flatten().sum();
        pmf[0][0] += 1.0 - sum;
        if pmf[0][0] < 0.0 {
            continue;
        }
        return JointSource::new(pmf).unwrap();
    }
}

pub fn random_code_distribution(
    rng: &mut impl Rng,
    size_u: usize,
    size_v: usize,
    size_x1: usize,
    size_x2: usize,
    size_s: usize,
) -> CodeDistribution {
    let p_s = random_simplex(rng, size_s);
    let p_x1 = (0..size_u)
        .map(|_| (0..size_s).map(|_| random_simplex(rng, size_x1)).collect())
        .collect();
    let p_x2 = (0..size_v)
        .map(|_| (0..size_s).map(|_| random_simplex(rng, size_x2)).collect())
        .collect();
    CodeDistribution::new(p_s, p_x1, p_x2).unwrap()
}

// ---------------------------------------------------------------------------
// Classical (pmf-only) pipeline
// ---------------------------------------------------------------------------

/// A classical multiple access channel given extensionally by rows
/// p(y | x1, x2), x1-major.
pub struct ClassicalChannel {
    pub size_x1: usize,
    pub size_x2: usize,
    pub size_y: usize,
    pub rows: Vec<Vec<f64>>,
}

impl ClassicalChannel {
    pub fn row(&self, x1: usize, x2: usize) -> &[f64] {
        &self.rows[x1 * self.size_x2 + x2]
    }
}

pub struct ClassicalQuantities {
    pub i_x1: f64,
    pub i_x2: f64,
    pub i_x1x2_ws: f64,
    pub i_x1x2: f64,
    pub h_y: f64,
    pub h_y_given_x1x2: f64,
    pub h_y_given_x2vs: f64,
    pub h_y_given_x1us: f64,
    pub h_y_given_ws: f64,
}

fn mix_rows(weights: &[(f64, &[f64])], size_y: usize) -> Vec<f64> {
    let mut out = vec![0.0; size_y];
    for (w, row) in weights {
        for (y, &p) in row.iter().enumerate() {
            out[y] += w * p;
        }
    }
    out
}

/// Shannon-information evaluation of the four quantities, entirely on pmfs.
pub fn classical_holevo_quantities(
    src: &JointSource,
    cp: &CommonPart,
    cd: &CodeDistribution,
    ch: &ClassicalChannel,
) -> ClassicalQuantities {
    let cond = cqmac_core::source::condition(src);
    let triple = cqmac_core::source::triple_pmf(src, cp);
    let p_w = triple.marginal_w();

    // sigma rows: p(y | v, s, x2).
    let sigma_row = |v: usize, s: usize, x2: usize| -> Vec<f64> {
        let pu = cond.p_u_given_v[v].as_ref().unwrap();
        let mut weights = Vec::new();
        for (u, &w_u) in pu.iter().enumerate() {
            if w_u <= 0.0 {
                continue;
            }
            for (x1, &w_x1) in cd.row_x1(u, s).iter().enumerate() {
                if w_x1 > 0.0 {
                    weights.push((w_u * w_x1, ch.row(x1, x2)));
                }
            }
        }
        mix_rows(&weights, ch.size_y)
    };
    let omega_row = |u: usize, s: usize, x1: usize| -> Vec<f64> {
        let pv = cond.p_v_given_u[u].as_ref().unwrap();
        let mut weights = Vec::new();
        for (v, &w_v) in pv.iter().enumerate() {
            if w_v <= 0.0 {
                continue;
            }
            for (x2, &w_x2) in cd.row_x2(v, s).iter().enumerate() {
                if w_x2 > 0.0 {
                    weights.push((w_v * w_x2, ch.row(x1, x2)));
                }
            }
        }
        mix_rows(&weights, ch.size_y)
    };
    let tau_row = |w: usize, s: usize| -> Vec<f64> {
        let uv = triple.uv_given_w(w).unwrap();
        let mut weights = Vec::new();
        for (u, row) in uv.iter().enumerate() {
            for (v, &puv) in row.iter().enumerate() {
                if puv <= 0.0 {
                    continue;
                }
                for (x1, &w_x1) in cd.row_x1(u, s).iter().enumerate() {
                    if w_x1 <= 0.0 {
                        continue;
                    }
                    for (x2, &w_x2) in cd.row_x2(v, s).iter().enumerate() {
                        if w_x2 > 0.0 {
                            weights.push((puv * w_x1 * w_x2, ch.row(x1, x2)));
                        }
                    }
                }
            }
        }
        mix_rows(&weights, ch.size_y)
    };

    let mut joint_input = vec![vec![0.0; ch.size_x2]; ch.size_x1];
    for (u, v) in src.support() {
        let puv = src.prob(u, v);
        for (s, &ps) in cd.p_s().iter().enumerate() {
            for (x1, &w_x1) in cd.row_x1(u, s).iter().enumerate() {
                for (x2, &w_x2) in cd.row_x2(v, s).iter().enumerate() {
                    joint_input[x1][x2] += puv * ps * w_x1 * w_x2;
                }
            }
        }
    }

    let mut h_y_given_x1x2 = 0.0;
    let mut y_bar = vec![0.0; ch.size_y];
    for (x1, row) in joint_input.iter().enumerate() {
        for (x2, &p) in row.iter().enumerate() {
            if p > 1e-14 {
                h_y_given_x1x2 += p * shannon_entropy(ch.row(x1, x2).iter().copied());
                for (y, &py) in ch.row(x1, x2).iter().enumerate() {
                    y_bar[y] += p * py;
                }
            }
        }
    }
    let h_y = shannon_entropy(y_bar.iter().copied());

    let mut h_y_given_x2vs = 0.0;
    for (v, &pv) in cond.p_v.iter().enumerate() {
        if pv <= 1e-14 {
            continue;
        }
        for (s, &ps) in cd.p_s().iter().enumerate() {
            for (x2, &px2) in cd.row_x2(v, s).iter().enumerate() {
                let weight = pv * ps * px2;
                if weight > 1e-14 {
                    h_y_given_x2vs +=
                        weight * shannon_entropy(sigma_row(v, s, x2).iter().copied());
                }
            }
        }
    }
    let mut h_y_given_x1us = 0.0;
    for (u, &pu) in cond.p_u.iter().enumerate() {
        if pu <= 1e-14 {
            continue;
        }
        for (s, &ps) in cd.p_s().iter().enumerate() {
            for (x1, &px1) in cd.row_x1(u, s).iter().enumerate() {
                let weight = pu * ps * px1;
                if weight > 1e-14 {
                    h_y_given_x1us +=
                        weight * shannon_entropy(omega_row(u, s, x1).iter().copied());
                }
            }
        }
    }
    let mut h_y_given_ws = 0.0;
    for (w, &pw) in p_w.iter().enumerate() {
        if pw <= 1e-14 {
            continue;
        }
        for (s, &ps) in cd.p_s().iter().enumerate() {
            if ps > 1e-14 {
                h_y_given_ws += pw * ps * shannon_entropy(tau_row(w, s).iter().copied());
            }
        }
    }

    ClassicalQuantities {
        i_x1: h_y_given_x2vs - h_y_given_x1x2,
        i_x2: h_y_given_x1us - h_y_given_x1x2,
        i_x1x2_ws: h_y_given_ws - h_y_given_x1x2,
        i_x1x2: h_y - h_y_given_x1x2,
        h_y,
        h_y_given_x1x2,
        h_y_given_x2vs,
        h_y_given_x1us,
        h_y_given_ws,
    }
}

/// Classical decoder: per y-sequence indicator sets, square-root weights by
/// tie splitting, and exact error probability.
pub struct ClassicalDecoder {
    pub n: usize,
    pub size_y: usize,
    /// One indicator row (over y-sequence indices) per typical triple.
    pub gammas: Vec<(Vec<usize>, Vec<usize>, Vec<usize>, Vec<f64>)>,
}

fn y_sequences(size_y: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; n];
    loop {
        out.push(current.clone());
        let mut pos = n;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            current[pos] += 1;
            if current[pos] < size_y {
                break;
            }
            current[pos] = 0;
        }
    }
}

fn sample_entropy_product(rows: &[&[f64]], seq: &[usize]) -> f64 {
    let mut log_sum = 0.0;
    for (i, &y) in seq.iter().enumerate() {
        let p = rows[i][y];
        if p <= 1e-10 {
            return f64::INFINITY;
        }
        log_sum += p.log2();
    }
    -log_sum / seq.len() as f64
}

/// Build the classical analogue of the square-root decoder for a sampled
/// codebook on a diagonal channel.
#[allow(clippy::too_many_arguments)]
pub fn classical_decoder(
    src: &JointSource,
    cp: &CommonPart,
    cd: &CodeDistribution,
    ch: &ClassicalChannel,
    cb: &Codebook,
    triple: &TriplePmf,
    members: &[(Vec<usize>, Vec<usize>, Vec<usize>)],
    delta: f64,
) -> ClassicalDecoder {
    let n = cb.n();
    let q = classical_holevo_quantities(src, cp, cd, ch);

    // Averaged per-letter rows.
    let mut y_bar = vec![0.0; ch.size_y];
    {
        let mut joint = vec![vec![0.0; ch.size_x2]; ch.size_x1];
        for (u, v) in src.support() {
            let puv = src.prob(u, v);
            for (s, &ps) in cd.p_s().iter().enumerate() {
                for (x1, &w1) in cd.row_x1(u, s).iter().enumerate() {
                    for (x2, &w2) in cd.row_x2(v, s).iter().enumerate() {
                        joint[x1][x2] += puv * ps * w1 * w2;
                    }
                }
            }
        }
        for (x1, row) in joint.iter().enumerate() {
            for (x2, &p) in row.iter().enumerate() {
                for (y, &py) in ch.row(x1, x2).iter().enumerate() {
                    y_bar[y] += p * py;
                }
            }
        }
    }

    let tau_row = |w: usize, s: usize| -> Vec<f64> {
        let uv = triple.uv_given_w(w).unwrap();
        let mut out = vec![0.0; ch.size_y];
        for (u, row) in uv.iter().enumerate() {
            for (v, &puv) in row.iter().enumerate() {
                if puv <= 0.0 {
                    continue;
                }
                for (x1, &w1) in cd.row_x1(u, s).iter().enumerate() {
                    for (x2, &w2) in cd.row_x2(v, s).iter().enumerate() {
                        for (y, &py) in ch.row(x1, x2).iter().enumerate() {
                            out[y] += puv * w1 * w2 * py;
                        }
                    }
                }
            }
        }
        out
    };
    let omega_row = |u: usize, s: usize, x1: usize| -> Vec<f64> {
        let pv = cqmac_core::source::condition(src).p_v_given_u[u].clone().unwrap();
        let mut out = vec![0.0; ch.size_y];
        for (v, &wv) in pv.iter().enumerate() {
            if wv <= 0.0 {
                continue;
            }
            for (x2, &w2) in cd.row_x2(v, s).iter().enumerate() {
                for (y, &py) in ch.row(x1, x2).iter().enumerate() {
                    out[y] += wv * w2 * py;
                }
            }
        }
        out
    };

    let seqs = y_sequences(ch.size_y, n);
    let mut gammas = Vec::new();
    for (u_seq, v_seq, w_seq) in members {
        let s_seq = cb.s_codeword(w_seq).to_vec();
        let x1_seq = cb.x1_codeword(u_seq).to_vec();
        let x2_seq = cb.x2_codeword(v_seq).to_vec();
        let bar_rows: Vec<&[f64]> = (0..n).map(|_| y_bar.as_slice()).collect();
        let tau_rows: Vec<Vec<f64>> = (0..n).map(|i| tau_row(w_seq[i], s_seq[i])).collect();
        let omega_rows: Vec<Vec<f64>> =
            (0..n).map(|i| omega_row(u_seq[i], s_seq[i], x1_seq[i])).collect();
        let out_rows: Vec<&[f64]> = (0..n).map(|i| ch.row(x1_seq[i], x2_seq[i])).collect();
        let indicator: Vec<f64> = seqs
            .iter()
            .map(|y| {
                let ok = (sample_entropy_product(&bar_rows, y) - q.h_y).abs() <= delta
                    && (sample_entropy_product(
                        &tau_rows.iter().map(Vec::as_slice).collect::<Vec<_>>(),
                        y,
                    ) - q.h_y_given_ws)
                        .abs()
                        <= delta
                    && (sample_entropy_product(
                        &omega_rows.iter().map(Vec::as_slice).collect::<Vec<_>>(),
                        y,
                    ) - q.h_y_given_x1us)
                        .abs()
                        <= delta
                    && (sample_entropy_product(&out_rows, y) - q.h_y_given_x1x2).abs() <= delta;
                if ok {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        gammas.push((u_seq.clone(), v_seq.clone(), w_seq.clone(), indicator));
    }
    ClassicalDecoder {
        n,
        size_y: ch.size_y,
        gammas,
    }
}

impl ClassicalDecoder {
    /// Square-root weights: gamma_t(y) / sum_t' gamma_t'(y).
    pub fn lambda(&self) -> Vec<Vec<f64>> {
        let total_seqs = self.gammas.first().map(|g| g.3.len()).unwrap_or(0);
        let mut denom = vec![0.0; total_seqs];
        for (_, _, _, g) in &self.gammas {
            for (i, &v) in g.iter().enumerate() {
                denom[i] += v;
            }
        }
        self.gammas
            .iter()
            .map(|(_, _, _, g)| {
                g.iter()
                    .enumerate()
                    .map(|(i, &v)| if denom[i] > 0.0 { v / denom[i] } else { 0.0 })
                    .collect()
            })
            .collect()
    }

    /// Exact error probability against the pmf-only channel.
    pub fn error_probability(
        &self,
        src: &JointSource,
        cp: &CommonPart,
        ch: &ClassicalChannel,
        cb: &Codebook,
    ) -> f64 {
        let lambda = self.lambda();
        let seqs = y_sequences(ch.size_y, self.n);
        let support = src.support();
        let mut out: Vec<(Vec<usize>, Vec<usize>, f64)> = Vec::new();
        let radix = support.len();
        let mut current = vec![0usize; self.n];
        'outer: loop {
            let u: Vec<usize> = current.iter().map(|&i| support[i].0).collect();
            let v: Vec<usize> = current.iter().map(|&i| support[i].1).collect();
            let p: f64 = current.iter().map(|&i| src.prob(support[i].0, support[i].1)).product();
            out.push((u, v, p));
            let mut pos = self.n;
            loop {
                if pos == 0 {
                    break 'outer;
                }
                pos -= 1;
                current[pos] += 1;
                if current[pos] < radix {
                    break;
                }
                current[pos] = 0;
            }
        }

        let mut pe = 0.0;
        for (u_seq, v_seq, p) in out {
            let w_seq = cp.w_seq_of_u(&u_seq);
            let x1 = cb.x1_codeword(&u_seq);
            let x2 = cb.x2_codeword(&v_seq);
            let idx = self
                .gammas
                .iter()
                .position(|(u, v, w, _)| u == &u_seq && v == &v_seq && w == &w_seq);
            let mut correct = 0.0;
            if let Some(t) = idx {
                for (yi, y) in seqs.iter().enumerate() {
                    let py: f64 = (0..self.n).map(|i| ch.row(x1[i], x2[i])[y[i]]).product();
                    correct += py * lambda[t][yi];
                }
            }
            pe += p * (1.0 - correct);
        }
        pe
    }
}
