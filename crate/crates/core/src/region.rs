//! Feasibility checking of the four-inequality rate region and a
//! derivative-free search for a feasible code distribution.
//!
//! A source/channel/code-distribution triple is feasible when every source
//! entropy on the left sits below the matching Holevo quantity on the
//! right. Slacks are reported as RHS - LHS in bits; feasibility with a
//! slack of zero is flagged as `boundary` rather than hidden, since the
//! canonical three-point example sits exactly on the boundary.

use rand::Rng;
use serde::Serialize;

use crate::channel::CqMac;
use crate::error::Result;
use crate::info::{separation_quantities, holevo_quantities, CodeDistribution, InfoQuantities};
use crate::seeds;
use crate::source::{common_part, source_entropies, CommonPart, JointSource, SourceEntropies};

/// Slacks down to -1e-9 still count as feasible (eigensolver noise).
pub const FEAS_TOL: f64 = 1e-9;
/// Slacks within 1e-6 of zero flag the report as boundary.
pub const BOUNDARY_TOL: f64 = 1e-6;
/// Number of random restarts used by the searches.
const RESTARTS: usize = 50;
/// Initial coordinate step and its floor for the local search.
const STEP_INIT: f64 = 0.1;
const STEP_FLOOR: f64 = 1e-4;

/// Outcome of a feasibility check: per-inequality slacks (RHS - LHS, bits),
/// the information quantities and source entropies behind them.
#[derive(Debug, Clone, Serialize)]
pub struct RegionReport {
    pub feasible: bool,
    pub boundary: bool,
    pub slacks: Vec<f64>,
    pub quantities: InfoQuantities,
    pub entropies: SourceEntropies,
}

impl RegionReport {
    fn from_slacks(slacks: Vec<f64>, quantities: InfoQuantities, entropies: SourceEntropies) -> Self {
        let feasible = slacks.iter().all(|&s| s >= -FEAS_TOL);
        let boundary = slacks.iter().any(|&s| s.abs() <= BOUNDARY_TOL);
        RegionReport {
            feasible,
            boundary,
            slacks,
            quantities,
            entropies,
        }
    }

    pub fn min_slack(&self) -> f64 {
        self.slacks.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Check the four joint-coding inequalities for a given code distribution.
pub fn check_joint_region(
    src: &JointSource,
    cp: &CommonPart,
    cd: &CodeDistribution,
    ch: &CqMac,
) -> Result<RegionReport> {
    let q = holevo_quantities(src, cp, cd, ch)?;
    let h = source_entropies(src, cp);
    let slacks = vec![
        q.i_x1_b_given_x2vs - h.h_u_given_v,
        q.i_x2_b_given_x1us - h.h_v_given_u,
        q.i_x1x2_b_given_ws - h.h_uv_given_w,
        q.i_x1x2_b - h.h_uv,
    ];
    Ok(RegionReport::from_slacks(slacks, q, h))
}

/// Check the three separation-baseline inequalities for product inputs
/// p(x1) p(x2).
pub fn check_separation(
    src: &JointSource,
    ch: &CqMac,
    p_x1: &[f64],
    p_x2: &[f64],
) -> Result<RegionReport> {
    // Evaluate the product-input state through the same machinery with
    // U, V, W, S trivialized to singletons.
    let point = JointSource::new(vec![vec![1.0]])?;
    let point_cp = common_part(&point);
    let cd = CodeDistribution::new(
        vec![1.0],
        vec![vec![p_x1.to_vec()]],
        vec![vec![p_x2.to_vec()]],
    )?;
    let q = holevo_quantities(&point, &point_cp, &cd, ch)?;
    let cp = common_part(src);
    let h = source_entropies(src, &cp);
    let slacks = vec![
        q.i_x1_b_given_x2vs - h.h_u_given_v,
        q.i_x2_b_given_x1us - h.h_v_given_u,
        q.i_x1x2_b - h.h_uv,
    ];
    Ok(RegionReport::from_slacks(slacks, q, h))
}

// ---------------------------------------------------------------------------
// Simplex search machinery
// ---------------------------------------------------------------------------

/// Euclidean projection of a vector onto the probability simplex.
pub(crate) fn project_simplex(row: &mut [f64]) {
    let n = row.len();
    let mut sorted = row.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    let mut total = 0.0;
    for p in row.iter_mut() {
        *p = (*p - theta).max(0.0);
        total += *p;
    }
    // Exact renormalization against rounding drift.
    if total > 0.0 {
        for p in row.iter_mut() {
            *p /= total;
        }
    } else {
        row.fill(1.0 / n as f64);
    }
}

fn sample_dirichlet_rows(rng: &mut impl Rng, lens: &[usize]) -> Vec<Vec<f64>> {
    lens.iter()
        .map(|&n| {
            let mut row: Vec<f64> = (0..n).map(|_| -f64::ln(rng.gen_range(1e-12..1.0f64))).collect();
            let total: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= total);
            row
        })
        .collect()
}

/// Best-of-restarts Dirichlet(1) sampling followed by greedy coordinate
/// perturbation with step halving, rows projected back to the simplex.
/// Deterministic given the seed. Returns (best rows, best value).
fn maximize_over_simplex_rows(
    lens: &[usize],
    budget: usize,
    seed: u64,
    mut eval: impl FnMut(&[Vec<f64>]) -> f64,
) -> (Vec<Vec<f64>>, f64) {
    let mut remaining = budget.max(1);
    let mut starts: Vec<(usize, Vec<Vec<f64>>, f64)> = Vec::new();
    for i in 0..RESTARTS {
        if remaining == 0 {
            break;
        }
        let mut rng = seeds::rng(seeds::child(seed, 1, i as u64));
        let rows = sample_dirichlet_rows(&mut rng, lens);
        let val = eval(&rows);
        remaining -= 1;
        starts.push((i, rows, val));
    }
    // Ties broken by lowest restart index (stable sort preserves it).
    starts.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap());

    let (mut best_rows, mut best_val) = (starts[0].1.clone(), starts[0].2);
    for (_, start_rows, start_val) in starts {
        if remaining == 0 {
            break;
        }
        let mut rows = start_rows;
        let mut val = start_val;
        let mut step = STEP_INIT;
        'search: loop {
            let mut improved = false;
            for r in 0..rows.len() {
                if rows[r].len() < 2 {
                    continue;
                }
                for coord in 0..rows[r].len() {
                    for dir in [1.0, -1.0] {
                        let mut candidate = rows[r].clone();
                        candidate[coord] += dir * step;
                        project_simplex(&mut candidate);
                        let moved = candidate
                            .iter()
                            .zip(&rows[r])
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0f64, f64::max);
                        if moved < 1e-15 {
                            continue;
                        }
                        if remaining == 0 {
                            break 'search;
                        }
                        let old = std::mem::replace(&mut rows[r], candidate);
                        let cand_val = eval(&rows);
                        remaining -= 1;
                        if cand_val > val + 1e-15 {
                            val = cand_val;
                            improved = true;
                        } else {
                            rows[r] = old;
                        }
                    }
                }
            }
            if !improved {
                step *= 0.5;
                if step < STEP_FLOOR {
                    break;
                }
            }
        }
        if val > best_val {
            best_val = val;
            best_rows = rows;
        }
    }
    (best_rows, best_val)
}

// ---------------------------------------------------------------------------
// Searches
// ---------------------------------------------------------------------------

/// Result of [`search_feasible`].
#[derive(Debug, Clone, Serialize)]
pub struct SearchOutcome {
    pub best_cd: CodeDistribution,
    pub best_report: RegionReport,
    pub best_min_slack: f64,
}

fn rows_to_cd(
    rows: &[Vec<f64>],
    size_u: usize,
    size_v: usize,
    size_s: usize,
) -> CodeDistribution {
    let p_s = rows[0].clone();
    let mut idx = 1;
    let mut p_x1 = Vec::with_capacity(size_u);
    for _ in 0..size_u {
        let mut per_s = Vec::with_capacity(size_s);
        for _ in 0..size_s {
            per_s.push(rows[idx].clone());
            idx += 1;
        }
        p_x1.push(per_s);
    }
    let mut p_x2 = Vec::with_capacity(size_v);
    for _ in 0..size_v {
        let mut per_s = Vec::with_capacity(size_s);
        for _ in 0..size_s {
            per_s.push(rows[idx].clone());
            idx += 1;
        }
        p_x2.push(per_s);
    }
    CodeDistribution::new(p_s, p_x1, p_x2).expect("projected rows form valid pmfs")
}

/// Search for a code distribution maximizing the minimum slack of the four
/// inequalities. Random restarts plus greedy coordinate descent; the result
/// is the best found, not certified optimal.
pub fn search_feasible(
    src: &JointSource,
    ch: &CqMac,
    size_s: usize,
    budget: usize,
    seed: u64,
) -> Result<SearchOutcome> {
    let cp = common_part(src);
    let h = source_entropies(src, &cp);
    let (size_u, size_v) = (src.size_u(), src.size_v());

    let mut lens = vec![size_s];
    lens.extend(std::iter::repeat(ch.size_x1()).take(size_u * size_s));
    lens.extend(std::iter::repeat(ch.size_x2()).take(size_v * size_s));

    let eval = |rows: &[Vec<f64>]| -> f64 {
        let cd = rows_to_cd(rows, size_u, size_v, size_s);
        match holevo_quantities(src, &cp, &cd, ch) {
            Ok(q) => [
                q.i_x1_b_given_x2vs - h.h_u_given_v,
                q.i_x2_b_given_x1us - h.h_v_given_u,
                q.i_x1x2_b_given_ws - h.h_uv_given_w,
                q.i_x1x2_b - h.h_uv,
            ]
            .into_iter()
            .fold(f64::INFINITY, f64::min),
            Err(_) => f64::NEG_INFINITY,
        }
    };

    let (best_rows, _) = maximize_over_simplex_rows(&lens, budget, seed, eval);
    let best_cd = rows_to_cd(&best_rows, size_u, size_v, size_s);
    let best_report = check_joint_region(src, &cp, &best_cd, ch)?;
    let best_min_slack = best_report.min_slack();
    Ok(SearchOutcome {
        best_cd,
        best_report,
        best_min_slack,
    })
}

/// Maximize I(X1 X2; B) over product input distributions p(x1) p(x2).
pub fn max_product_input_info(ch: &CqMac, budget: usize, seed: u64) -> f64 {
    let lens = vec![ch.size_x1(), ch.size_x2()];
    let eval = |rows: &[Vec<f64>]| -> f64 {
        separation_quantities(ch, &rows[0], &rows[1])
            .map(|q| q.i_x1x2_b)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let (_, best) = maximize_over_simplex_rows(&lens, budget, seed, eval);
    best
}
