//! Benchmark fixtures: the standard instances the benches run against.

use cqmac_core::channel::{adder_channel, CqMac};
use cqmac_core::info::CodeDistribution;
use cqmac_core::source::JointSource;

/// The three-point source on the adder channel with identity encoding.
pub fn ces_instance() -> (JointSource, CodeDistribution, CqMac) {
    (
        JointSource::ces_example(),
        CodeDistribution::deterministic_identity(2, 2),
        adder_channel(),
    )
}

/// Diagonal two-block source on the four-output channel with uniform
/// encoding; the standard strictly feasible simulation instance.
pub fn strictly_feasible_instance() -> (JointSource, CodeDistribution, CqMac) {
    let src = JointSource::new(vec![vec![0.6, 0.0], vec![0.0, 0.4]]).unwrap();
    let cd = CodeDistribution::uniform(2, 2, 2, 2);
    let rows: Vec<Vec<f64>> = (0..4)
        .map(|i| {
            let mut r = vec![0.0; 4];
            r[i] = 1.0;
            r
        })
        .collect();
    let ch = cqmac_core::channel::from_classical(&rows, 2, 2, 4).unwrap();
    (src, cd, ch)
}
