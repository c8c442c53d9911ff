//! Classical-quantum multiple access channel model.
//!
//! A channel is stored extensionally: one density operator per input letter
//! pair (x1, x2). Classical channels embed as diagonal operators in the
//! computational basis. Tensor-product outputs use big-endian ordering:
//! the first letter of a sequence is the most significant Kronecker factor.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, DensityOperator};

/// Classical-quantum multiple access channel (X1 x X2, rho_{x1,x2}, H_B).
#[derive(Debug, Clone)]
pub struct CqMac {
    size_x1: usize,
    size_x2: usize,
    dim_b: usize,
    outputs: Vec<DensityOperator>, // x1-major
}

impl CqMac {
    /// Build from the full output table; `outputs[x1 * size_x2 + x2]`.
    pub fn new(size_x1: usize, size_x2: usize, outputs: Vec<DensityOperator>) -> Result<Self> {
        if outputs.len() != size_x1 * size_x2 {
            return Err(Error::LengthMismatch(outputs.len(), size_x1 * size_x2));
        }
        let dim_b = outputs
            .first()
            .map(DensityOperator::dim)
            .ok_or_else(|| Error::InvalidPmf("channel with no outputs".into()))?;
        if let Some(bad) = outputs.iter().find(|rho| rho.dim() != dim_b) {
            return Err(Error::DimensionMismatch(bad.dim(), dim_b));
        }
        Ok(CqMac {
            size_x1,
            size_x2,
            dim_b,
            outputs,
        })
    }

    pub fn size_x1(&self) -> usize {
        self.size_x1
    }

    pub fn size_x2(&self) -> usize {
        self.size_x2
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    /// Channel output for one letter pair.
    pub fn output(&self, x1: usize, x2: usize) -> &DensityOperator {
        &self.outputs[x1 * self.size_x2 + x2]
    }

    /// True if every output is diagonal in the computational basis.
    pub fn is_classical(&self) -> bool {
        self.outputs.iter().all(|rho| {
            let m = rho.matrix();
            (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)].norm() == 0.0))
        })
    }
}

/// Embed a classical channel p(y | x1, x2) as diagonal quantum outputs.
/// Rows are indexed x1-major: `rows[x1 * size_x2 + x2][y]`.
pub fn from_classical(rows: &[Vec<f64>], size_x1: usize, size_x2: usize, size_y: usize) -> Result<CqMac> {
    if rows.len() != size_x1 * size_x2 {
        return Err(Error::LengthMismatch(rows.len(), size_x1 * size_x2));
    }
    let mut outputs = Vec::with_capacity(rows.len());
    for (idx, row) in rows.iter().enumerate() {
        if row.len() != size_y {
            return Err(Error::InvalidPmf(format!(
                "row {idx} has {} entries, expected {size_y}",
                row.len()
            )));
        }
        if row.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidPmf(format!("row {idx} has a negative entry")));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized {
                sum,
                deviation: (sum - 1.0).abs(),
            });
        }
        outputs.push(DensityOperator::diagonal(row)?);
    }
    CqMac::new(size_x1, size_x2, outputs)
}

/// The binary adder channel Y = X1 + X2 with deterministic orthogonal
/// outputs |0>, |1>, |2>.
pub fn adder_channel() -> CqMac {
    let outputs = (0..2usize)
        .flat_map(|x1| (0..2usize).map(move |x2| DensityOperator::basis_state(3, x1 + x2)))
        .collect();
    CqMac::new(2, 2, outputs).unwrap()
}

/// n-fold tensor output rho_{x1_1,x2_1} (x) ... (x) rho_{x1_n,x2_n}.
pub fn output_state(ch: &CqMac, x1_seq: &[usize], x2_seq: &[usize]) -> Result<DensityOperator> {
    output_state_capped(ch, x1_seq, x2_seq, linalg::DEFAULT_DIM_CAP)
}

/// Same as [`output_state`] with an explicit dimension cap.
pub fn output_state_capped(
    ch: &CqMac,
    x1_seq: &[usize],
    x2_seq: &[usize],
    cap: usize,
) -> Result<DensityOperator> {
    if x1_seq.len() != x2_seq.len() {
        return Err(Error::LengthMismatch(x1_seq.len(), x2_seq.len()));
    }
    if x1_seq.is_empty() {
        return Err(Error::LengthMismatch(0, 1));
    }
    let total = (ch.dim_b as u128).checked_pow(x1_seq.len() as u32);
    match total {
        Some(d) if d <= cap as u128 => {}
        _ => {
            return Err(Error::DimensionOverflow {
                dim: total.unwrap_or(u128::MAX),
                cap,
            })
        }
    }
    let mut acc: CMat = ch.output(x1_seq[0], x2_seq[0]).matrix().clone();
    for i in 1..x1_seq.len() {
        acc = linalg::kron_capped(&acc, ch.output(x1_seq[i], x2_seq[i]).matrix(), cap)?;
    }
    Ok(DensityOperator::new_unchecked(acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::von_neumann_entropy;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_channel_has_orthogonal_pure_outputs() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let ch = from_classical(&rows, 2, 1, 2).unwrap();
        assert_eq!(ch.output(0, 0), &DensityOperator::basis_state(2, 0));
        assert_eq!(ch.output(1, 0), &DensityOperator::basis_state(2, 1));
    }

    #[test]
    fn binary_symmetric_rows_embed_as_diagonals() {
        let p = 0.11;
        let rows = vec![vec![1.0 - p, p], vec![p, 1.0 - p]];
        let ch = from_classical(&rows, 2, 1, 2).unwrap();
        let m = ch.output(0, 0).matrix();
        assert_abs_diff_eq!(m[(0, 0)].re, 1.0 - p, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(1, 1)].re, p, epsilon = 1e-15);
        assert!(ch.is_classical());
    }

    #[test]
    fn from_classical_rejects_bad_rows() {
        let rows = vec![vec![0.9, 0.2], vec![0.5, 0.5]];
        assert!(matches!(
            from_classical(&rows, 2, 1, 2),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn adder_channel_outputs() {
        let ch = adder_channel();
        assert_eq!(ch.dim_b(), 3);
        assert_eq!(ch.output(0, 0), &DensityOperator::basis_state(3, 0));
        assert_eq!(ch.output(0, 1), &DensityOperator::basis_state(3, 1));
        assert_eq!(ch.output(1, 0), &DensityOperator::basis_state(3, 1));
        assert_eq!(ch.output(1, 1), &DensityOperator::basis_state(3, 2));
    }

    #[test]
    fn single_letter_output_state() {
        let ch = adder_channel();
        let rho = output_state(&ch, &[1], &[0]).unwrap();
        assert_eq!(&rho, ch.output(1, 0));
    }

    #[test]
    fn two_letter_output_state_ordering() {
        let ch = adder_channel();
        let rho = output_state(&ch, &[0, 1], &[0, 1]).unwrap();
        // |0><0| tensor |2><2| -> basis index 0*3 + 2 = 2 in dim 9.
        assert_eq!(&rho, &DensityOperator::basis_state(9, 2));
    }

    #[test]
    fn output_entropy_is_additive() {
        let rows = vec![vec![0.7, 0.3], vec![0.2, 0.8]];
        let ch = from_classical(&rows, 2, 1, 2).unwrap();
        let h1 = von_neumann_entropy(&output_state(&ch, &[0], &[0]).unwrap());
        let h2 = von_neumann_entropy(&output_state(&ch, &[1], &[0]).unwrap());
        let h12 = von_neumann_entropy(&output_state(&ch, &[0, 1], &[0, 0]).unwrap());
        assert_abs_diff_eq!(h12, h1 + h2, epsilon = 1e-12);
    }

    #[test]
    fn output_state_splits_as_kron() {
        let ch = adder_channel();
        let whole = output_state(&ch, &[0, 1, 1], &[1, 0, 1]).unwrap();
        let head = output_state(&ch, &[0], &[1]).unwrap();
        let tail = output_state(&ch, &[1, 1], &[0, 1]).unwrap();
        let glued = crate::linalg::kron(head.matrix(), tail.matrix()).unwrap();
        assert!((whole.matrix() - glued).norm() < 1e-12);
    }

    #[test]
    fn output_state_overflow() {
        let ch = adder_channel();
        let seq = vec![0usize; 9]; // 3^9 = 19683 > 4096
        assert!(matches!(
            output_state(&ch, &seq, &seq),
            Err(Error::DimensionOverflow { .. })
        ));
    }

    #[test]
    fn length_mismatch_is_reported() {
        let ch = adder_channel();
        assert!(matches!(
            output_state(&ch, &[0, 1], &[0]),
            Err(Error::LengthMismatch(2, 1))
        ));
    }
}
