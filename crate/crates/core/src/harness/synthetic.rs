//! Random instances with entries in `{0} ∪ [ℓ, 1]` and capacities in `(0, 1]`.

use rand::Rng as _;

use crate::model::{Column, ConcavePiece, PackingInstance};
use crate::seed::{rng, Rng};

/// Dense column-major constraint matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SyntheticMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Packing instance with unit-weight linear pieces.
    pub fn to_instance(&self, b: &[f64]) -> crate::Result<PackingInstance> {
        let columns = (0..self.cols).map(|j| Column::from_dense(self.column(j), ConcavePiece::linear(1.0))).collect();
        PackingInstance::new(b.to_vec(), columns)
    }
}

/// Uniform on `[0, 1)`, rounded to 0 below `ell`.
pub fn draw_entry(r: &mut Rng, ell: f64) -> f64 {
    let u: f64 = r.gen();
    if u < ell {
        0.0
    } else {
        u
    }
}

/// An `m × n` matrix and capacity vector. Columns that come out all-zero are
/// redrawn.
pub fn gen_synthetic_matrix(m: usize, n: usize, ell: f64, seed: u64) -> (SyntheticMatrix, Vec<f64>) {
    let mut r = rng(seed);
    let mut data = Vec::with_capacity(m * n);
    for _ in 0..n {
        loop {
            let col: Vec<f64> = (0..m).map(|_| draw_entry(&mut r, ell)).collect();
            if col.iter().any(|&v| v > 0.0) {
                data.extend(col);
                break;
            }
        }
    }
    let b = (0..m).map(|_| 1.0 - r.gen::<f64>()).collect();
    (SyntheticMatrix { rows: m, cols: n, data }, b)
}

/// Square `n × n` synthetic instance.
pub fn gen_synthetic(n: usize, ell: f64, seed: u64) -> crate::Result<PackingInstance> {
    let (a, b) = gen_synthetic_matrix(n, n, ell, seed);
    a.to_instance(&b)
}
