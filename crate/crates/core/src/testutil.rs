//! Random instance generators shared by the unit tests.

use rand::Rng;

use crate::info::CodeDistribution;
use crate::linalg::{c, cr, eigh, hermitize, trace_re, CMat, DensityOperator, PsdOperator};
use crate::source::JointSource;

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
    DensityOperator::new_unchecked(psd * cr(1.0 / tr))
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
                m[(i, j)] += col[i] * col[j].conj() * cr(f);
            }
        }
    }
    PsdOperator::new_unchecked(hermitize(&m))
}

pub fn random_simplex(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..n).map(|_| -f64::ln(rng.gen_range(1e-9..1.0f64))).collect();
    let total: f64 = row.iter().sum();
    row.iter_mut().for_each(|p| *p /= total);
    let fix = 1.0 - row.iter().sum::<f64>();
    row[0] += fix;
    row
}

/// Random support pattern with random masses, renormalized exactly.
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
