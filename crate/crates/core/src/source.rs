//! Correlated classical source model: joint pmf, common-part decomposition,
//! and the classical entropies entering the rate-region inequalities.

use serde::Serialize;

use crate::error::{Error, Result};

/// Normalization tolerance for source pmfs.
pub const TOL_PMF: f64 = 1e-12;

/// Shannon entropy in bits of an iterator of probabilities (zeros skipped).
pub fn shannon_entropy<I: IntoIterator<Item = f64>>(probs: I) -> f64 {
    let mut h = 0.0;
    for p in probs {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h.max(0.0)
}

/// Joint pmf p(u, v) of the two source outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSource {
    size_u: usize,
    size_v: usize,
    pmf: Vec<Vec<f64>>,
}

impl JointSource {
    /// Validate and wrap a joint pmf given as rows indexed by u.
    pub fn new(pmf: Vec<Vec<f64>>) -> Result<Self> {
        let size_u = pmf.len();
        if size_u == 0 {
            return Err(Error::InvalidPmf("empty pmf".into()));
        }
        let size_v = pmf[0].len();
        if size_v == 0 {
            return Err(Error::InvalidPmf("empty pmf row".into()));
        }
        if let Some(row) = pmf.iter().find(|r| r.len() != size_v) {
            return Err(Error::InvalidPmf(format!(
                "ragged pmf: row of length {} in a {}-column table",
                row.len(),
                size_v
            )));
        }
        if let Some(&bad) = pmf.iter().flatten().find(|&&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidPmf(format!("entry {bad} is not a probability")));
        }
        let sum: f64 = pmf.iter().flatten().sum();
        if (sum - 1.0).abs() > TOL_PMF {
            return Err(Error::NotNormalized {
                sum,
                deviation: (sum - 1.0).abs(),
            });
        }
        Ok(JointSource { size_u, size_v, pmf })
    }

    /// The three-point source with p(0,0) = p(0,1) = p(1,1) = 1/3: the
    /// classic example separating joint from separate source-channel coding.
    pub fn ces_example() -> Self {
        JointSource::new(vec![vec![1.0 / 3.0, 1.0 / 3.0], vec![0.0, 1.0 / 3.0]]).unwrap()
    }

    pub fn size_u(&self) -> usize {
        self.size_u
    }

    pub fn size_v(&self) -> usize {
        self.size_v
    }

    pub fn prob(&self, u: usize, v: usize) -> f64 {
        self.pmf[u][v]
    }

    pub fn pmf(&self) -> &[Vec<f64>] {
        &self.pmf
    }

    pub fn marginal_u(&self) -> Vec<f64> {
        self.pmf.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn marginal_v(&self) -> Vec<f64> {
        (0..self.size_v)
            .map(|v| self.pmf.iter().map(|row| row[v]).sum())
            .collect()
    }

    /// Letter pairs with positive probability.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.size_u {
            for v in 0..self.size_v {
                if self.pmf[u][v] > 0.0 {
                    out.push((u, v));
                }
            }
        }
        out
    }
}

/// The common part of (U, V): the maximal W computable from U alone and
/// from V alone. Blocks are numbered 1..=k; letters of zero marginal
/// probability map to the sentinel block 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommonPart {
    block_count: usize,
    block_of_u: Vec<usize>,
    block_of_v: Vec<usize>,
}

impl CommonPart {
    /// Number of blocks k.
    pub fn block_count(&self) -> usize {
        self.block_count
    }

    /// f(u) in {1..k}, or 0 for letters with p(u) = 0.
    pub fn f(&self, u: usize) -> usize {
        self.block_of_u[u]
    }

    /// g(v) in {1..k}, or 0 for letters with p(v) = 0.
    pub fn g(&self, v: usize) -> usize {
        self.block_of_v[v]
    }

    /// Zero-based block index of u, None for the sentinel.
    pub fn w_of_u(&self, u: usize) -> Option<usize> {
        self.block_of_u[u].checked_sub(1)
    }

    /// Zero-based block index of v, None for the sentinel.
    pub fn w_of_v(&self, v: usize) -> Option<usize> {
        self.block_of_v[v].checked_sub(1)
    }

    /// Blockwise image f^n of a u-sequence (zero-based blocks).
    pub fn w_seq_of_u(&self, u_seq: &[usize]) -> Vec<usize> {
        u_seq.iter().map(|&u| self.w_of_u(u).expect("zero-probability letter")).collect()
    }

    /// Blockwise image g^n of a v-sequence (zero-based blocks).
    pub fn w_seq_of_v(&self, v_seq: &[usize]) -> Vec<usize> {
        v_seq.iter().map(|&v| self.w_of_v(v).expect("zero-probability letter")).collect()
    }

    /// p(w) over zero-based block indices.
    pub fn w_marginal(&self, src: &JointSource) -> Vec<f64> {
        let mut p = vec![0.0; self.block_count];
        for (u, v) in src.support() {
            p[self.w_of_u(u).unwrap()] += src.prob(u, v);
        }
        p
    }
}

/// Common part via connected components of the bipartite support graph:
/// nodes are the letters of U and V, with an edge (u, v) iff p(u, v) > 0.
/// The block-diagonal arrangement of the joint pmf is exactly a relabeling
/// to connected components, and the component count is maximal by
/// construction.
pub fn common_part(src: &JointSource) -> CommonPart {
    let (nu, nv) = (src.size_u(), src.size_v());
    let mut block_of_u = vec![0usize; nu];
    let mut block_of_v = vec![0usize; nv];
    let mut next_block = 0usize;
    let mut stack: Vec<(bool, usize)> = Vec::new(); // (is_v, letter)
    for start in 0..nu {
        if block_of_u[start] != 0 || src.pmf()[start].iter().all(|&p| p == 0.0) {
            continue;
        }
        next_block += 1;
        block_of_u[start] = next_block;
        stack.push((false, start));
        while let Some((is_v, x)) = stack.pop() {
            if is_v {
                for u in 0..nu {
                    if src.prob(u, x) > 0.0 && block_of_u[u] == 0 {
                        block_of_u[u] = next_block;
                        stack.push((false, u));
                    }
                }
            } else {
                for v in 0..nv {
                    if src.prob(x, v) > 0.0 && block_of_v[v] == 0 {
                        block_of_v[v] = next_block;
                        stack.push((true, v));
                    }
                }
            }
        }
    }
    CommonPart {
        block_count: next_block,
        block_of_u,
        block_of_v,
    }
}

/// Joint pmf over (u, v, w) with w a zero-based block index:
/// p(u, v, w) = p(u, v) when w matches the block of (u, v), else 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TriplePmf {
    size_u: usize,
    size_v: usize,
    size_w: usize,
    p: Vec<f64>,
}

impl TriplePmf {
    pub fn size_u(&self) -> usize {
        self.size_u
    }

    pub fn size_v(&self) -> usize {
        self.size_v
    }

    pub fn size_w(&self) -> usize {
        self.size_w
    }

    pub fn prob(&self, u: usize, v: usize, w: usize) -> f64 {
        self.p[(u * self.size_v + v) * self.size_w + w]
    }

    /// Triples with positive probability.
    pub fn support(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.size_u {
            for v in 0..self.size_v {
                for w in 0..self.size_w {
                    if self.prob(u, v, w) > 0.0 {
                        out.push((u, v, w));
                    }
                }
            }
        }
        out
    }

    pub fn marginal_u(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.size_u];
        for (u, v, w) in self.support() {
            m[u] += self.prob(u, v, w);
        }
        m
    }

    pub fn marginal_v(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.size_v];
        for (u, v, w) in self.support() {
            m[v] += self.prob(u, v, w);
        }
        m
    }

    pub fn marginal_w(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.size_w];
        for (u, v, w) in self.support() {
            m[w] += self.prob(u, v, w);
        }
        m
    }

    /// p(u, v | w) for a zero-based block index with p(w) > 0.
    pub fn uv_given_w(&self, w: usize) -> Result<Vec<Vec<f64>>> {
        let pw = self.marginal_w()[w];
        if pw < TOL_PMF {
            return Err(Error::ZeroConditioningEvent(format!("p(w={w}) = 0")));
        }
        let mut rows = vec![vec![0.0; self.size_v]; self.size_u];
        for u in 0..self.size_u {
            for v in 0..self.size_v {
                rows[u][v] = self.prob(u, v, w) / pw;
            }
        }
        Ok(rows)
    }
}

/// p(u, v, w) = p(u, v) delta_{f(u), w} delta_{g(v), w}.
pub fn triple_pmf(src: &JointSource, cp: &CommonPart) -> TriplePmf {
    let (nu, nv, nw) = (src.size_u(), src.size_v(), cp.block_count());
    let mut p = vec![0.0; nu * nv * nw.max(1)];
    for (u, v) in src.support() {
        let w = cp.w_of_u(u).expect("support letter in sentinel block");
        debug_assert_eq!(Some(w), cp.w_of_v(v));
        p[(u * nv + v) * nw + w] = src.prob(u, v);
    }
    TriplePmf {
        size_u: nu,
        size_v: nv,
        size_w: nw,
        p,
    }
}

/// Classical entropies of the source triple, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceEntropies {
    pub h_u_given_v: f64,
    pub h_v_given_u: f64,
    pub h_uv: f64,
    pub h_uv_given_w: f64,
    pub h_uvw: f64,
}

/// Shannon entropies of the triple pmf. H(UVW) = H(UV) since W is a
/// function of (U, V).
pub fn source_entropies(src: &JointSource, cp: &CommonPart) -> SourceEntropies {
    let triple = triple_pmf(src, cp);
    let h_uv = shannon_entropy(src.pmf().iter().flatten().copied());
    let h_u = shannon_entropy(src.marginal_u());
    let h_v = shannon_entropy(src.marginal_v());
    let h_w = shannon_entropy(triple.marginal_w());
    let h_uvw = shannon_entropy(triple.support().iter().map(|&(u, v, w)| triple.prob(u, v, w)));
    SourceEntropies {
        h_u_given_v: h_uv - h_v,
        h_v_given_u: h_uv - h_u,
        h_uv,
        h_uv_given_w: h_uvw - h_w,
        h_uvw,
    }
}

/// Conditional and marginal pmfs of the source. Columns conditioned on a
/// zero-probability letter are `None` rather than fabricated.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditionals {
    pub p_u_given_v: Vec<Option<Vec<f64>>>,
    pub p_v_given_u: Vec<Option<Vec<f64>>>,
    pub p_u: Vec<f64>,
    pub p_v: Vec<f64>,
}

pub fn condition(src: &JointSource) -> Conditionals {
    let p_u = src.marginal_u();
    let p_v = src.marginal_v();
    let p_u_given_v = (0..src.size_v())
        .map(|v| {
            if p_v[v] > 0.0 {
                Some((0..src.size_u()).map(|u| src.prob(u, v) / p_v[v]).collect())
            } else {
                None
            }
        })
        .collect();
    let p_v_given_u = (0..src.size_u())
        .map(|u| {
            if p_u[u] > 0.0 {
                Some((0..src.size_v()).map(|v| src.prob(u, v) / p_u[u]).collect())
            } else {
                None
            }
        })
        .collect();
    Conditionals {
        p_u_given_v,
        p_v_given_u,
        p_u,
        p_v,
    }
}
