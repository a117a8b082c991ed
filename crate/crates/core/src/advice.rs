//! Prediction generators: corrupted optima and predictions carried over
//! from an evolving constraint matrix.

use rand::seq::index;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::harness::synthetic::{draw_entry, SyntheticMatrix};
use crate::seed::{derive_seed, rng, stream};
use crate::switching::AdviceStream;

/// Zeroes each entry independently with probability `p`; other entries are
/// copied unchanged.
pub fn corrupt_replacement(x_star: &[f64], p: f64, seed: u64) -> Result<AdviceStream> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("replacement rate must lie in [0, 1], got {p}")));
    }
    let mut r = rng(seed);
    let values = x_star.iter().map(|&v| if r.gen::<f64>() < p { 0.0 } else { v }).collect();
    AdviceStream::new(values)
}

/// Redraws exactly `count` distinct entries of `a`, chosen uniformly without
/// replacement, from the synthetic entry law. Returns the new matrix and the
/// `(row, col)` positions that were redrawn.
///
/// A column left with no positive entry has its redrawn positions drawn again
/// until it has one.
pub fn perturb_matrix(
    a: &SyntheticMatrix,
    count: usize,
    ell: f64,
    seed: u64,
) -> Result<(SyntheticMatrix, Vec<(usize, usize)>)> {
    let total = a.rows() * a.cols();
    if count > total {
        return Err(Error::Config(format!("cannot perturb {count} of {total} entries")));
    }
    let mut r = rng(seed);
    let mut out = a.clone();
    let mut positions: Vec<(usize, usize)> =
        index::sample(&mut r, total, count).into_iter().map(|k| (k % a.rows(), k / a.rows())).collect();
    positions.sort_unstable_by_key(|&(i, j)| (j, i));
    for &(i, j) in &positions {
        out.set(i, j, draw_entry(&mut r, ell));
    }
    let mut start = 0;
    while start < positions.len() {
        let j = positions[start].1;
        let end = start + positions[start..].iter().take_while(|p| p.1 == j).count();
        while out.column(j).iter().all(|&v| v == 0.0) {
            for &(i, _) in &positions[start..end] {
                out.set(i, j, draw_entry(&mut r, ell));
            }
        }
        start = end;
    }
    Ok((out, positions))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionKind {
    /// `OPT(A_0)` at every step.
    Batch,
    /// `OPT(A_{t−1})` at step `t`; step 0 uses `OPT(A_0)`.
    Online,
    /// The online prediction with each entry zeroed with probability `p`.
    PartialOnline,
}

impl PredictionKind {
    pub const ALL: [PredictionKind; 3] = [PredictionKind::Batch, PredictionKind::Online, PredictionKind::PartialOnline];
}

/// One advice vector per step from the per-step optimal solutions
/// `optima[t] = x*(A_t)`.
pub fn make_prediction_sequence(
    optima: &[Vec<f64>],
    kind: PredictionKind,
    p: f64,
    seed: u64,
) -> Result<Vec<AdviceStream>> {
    if optima.is_empty() {
        return Err(Error::Config("need at least the optimum of A_0".into()));
    }
    (0..optima.len())
        .map(|t| {
            let online = &optima[t.saturating_sub(1)];
            match kind {
                PredictionKind::Batch => AdviceStream::new(optima[0].clone()),
                PredictionKind::Online => AdviceStream::new(online.clone()),
                PredictionKind::PartialOnline => {
                    corrupt_replacement(online, p, derive_seed(seed, &[t as u64, stream::CORRUPT]))
                }
            }
        })
        .collect()
}
