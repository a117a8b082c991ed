//! Offline optimum oracles.
//!
//! [`solve_lp`] is a dense tableau primal simplex for `max wᵀx, Ax ≤ b, x ≥ 0`.
//! Since `b > 0` the all-slack basis is feasible, so no phase one is needed.
//! [`solve_separable_concave`] runs Frank-Wolfe with that simplex as its linear
//! oracle, and [`brute_force_opt`] is a grid search used to cross-check both.

use crate::error::{Error, Result};
use crate::model::{violation_factor, ConcavePiece, PackingInstance};

pub const DEFAULT_FW_TOL: f64 = 1e-6;
pub const DEFAULT_FW_MAX_ITERS: usize = 5000;

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-12;
// Degenerate pivots in a row before switching from Dantzig's rule to Bland's.
const DEGENERATE_STREAK: usize = 25;

#[derive(Debug, Clone, PartialEq)]
pub enum SolveStatus {
    Optimal,
    /// Frank-Wolfe result; `converged` is false when `max_iters` ran out first.
    Approximate {
        tol: f64,
        converged: bool,
        iterations: usize,
        gap: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfflineResult {
    pub x_star: Vec<f64>,
    pub opt_value: f64,
    pub status: SolveStatus,
}

/// Exact optimum of an all-linear instance.
pub fn solve_lp(inst: &PackingInstance) -> Result<OfflineResult> {
    let weights = inst
        .columns
        .iter()
        .enumerate()
        .map(|(j, c)| match c.piece {
            crate::model::ConcavePiece::Linear { weight } => Ok(weight),
            _ => Err(Error::Config(format!("solve_lp needs linear pieces; column {} is {:?}", j + 1, c.piece))),
        })
        .collect::<Result<Vec<_>>>()?;
    let x = maximize_linear(inst, &weights)?;
    let opt_value = inst.objective(&x)?;
    Ok(OfflineResult { x_star: x, opt_value, status: SolveStatus::Optimal })
}

/// Vertex maximizer of `weightsᵀx` over `{Ax ≤ b, x ≥ 0}`. Weights must be
/// nonnegative so the problem stays bounded.
pub fn maximize_linear(inst: &PackingInstance, weights: &[f64]) -> Result<Vec<f64>> {
    crate::error::check_len(inst.n(), weights.len())?;
    let mut tab = Tableau::new(inst, weights);
    tab.run()?;
    let mut x = tab.solution();
    // Round-off can leave loads a hair above b; pull the point back inside.
    let v = violation_factor(&inst.loads(&x)?, &inst.b)?;
    if v > 1.0 {
        x.iter_mut().for_each(|z| *z /= v);
    }
    Ok(x)
}

struct Tableau {
    m: usize,
    n: usize,
    width: usize,
    // (m + 1) rows; the last row holds reduced costs and minus the objective.
    cells: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn new(inst: &PackingInstance, weights: &[f64]) -> Self {
        let (m, n) = (inst.m(), inst.n());
        let width = n + m + 1;
        let mut cells = vec![0.0; (m + 1) * width];
        for (j, col) in inst.columns.iter().enumerate() {
            for &(i, a) in &col.coeffs {
                cells[i * width + j] += a;
            }
        }
        for i in 0..m {
            cells[i * width + n + i] = 1.0;
            cells[i * width + width - 1] = inst.b[i];
        }
        for (j, &w) in weights.iter().enumerate() {
            cells[m * width + j] = -w;
        }
        Tableau { m, n, width, cells, basis: (n..n + m).collect() }
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.cells[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.width - 1)
    }

    fn run(&mut self) -> Result<()> {
        let limit = 50 * (self.m + self.n) + 10_000;
        let mut bland = false;
        let mut streak = 0;
        for _ in 0..limit {
            let Some(enter) = self.entering(bland) else {
                return Ok(());
            };
            let Some(leave) = self.leaving(enter) else {
                return Err(Error::Numeric(format!("column {} is an unbounded direction", enter + 1)));
            };
            if self.rhs(leave) <= PIVOT_EPS {
                streak += 1;
                if streak >= DEGENERATE_STREAK {
                    bland = true;
                }
            } else {
                streak = 0;
            }
            self.pivot(leave, enter);
        }
        Err(Error::Numeric(format!("simplex pivot limit {limit} exceeded")))
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let obj = self.m * self.width;
        let costs = &self.cells[obj..obj + self.width - 1];
        if bland {
            costs.iter().position(|&c| c < -COST_EPS)
        } else {
            let (j, &c) = costs.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1))?;
            (c < -COST_EPS).then_some(j)
        }
    }

    // Minimum ratio test; ties go to the smallest basic variable index.
    fn leaving(&self, enter: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for r in 0..self.m {
            let a = self.at(r, enter);
            if a <= PIVOT_EPS {
                continue;
            }
            let ratio = self.rhs(r).max(0.0) / a;
            best = match best {
                None => Some((r, ratio)),
                Some((br, bratio)) => {
                    if ratio < bratio - 1e-12 || (ratio <= bratio + 1e-12 && self.basis[r] < self.basis[br]) {
                        Some((r, ratio))
                    } else {
                        Some((br, bratio))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let p = self.at(row, col);
        for c in 0..w {
            self.cells[row * w + c] /= p;
        }
        self.cells[row * w + col] = 1.0;
        let (head, rest) = self.cells.split_at_mut(row * w);
        let (pivot_row, tail) = rest.split_at_mut(w);
        let eliminate = |other: &mut [f64]| {
            let f = other[col];
            if f != 0.0 {
                for (o, &pv) in other.iter_mut().zip(pivot_row.iter()) {
                    *o -= f * pv;
                }
                other[col] = 0.0;
            }
        };
        head.chunks_exact_mut(w).for_each(eliminate);
        tail.chunks_exact_mut(w).for_each(eliminate);
        self.basis[row] = col;
    }

    fn solution(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (r, &var) in self.basis.iter().enumerate() {
            if var < self.n {
                x[var] = self.rhs(r).max(0.0);
            }
        }
        x
    }
}

/// Frank-Wolfe on a separable concave objective with step `2/(k+2)`.
///
/// Each iteration maximizes the linearization `∇f(x)ᵀs` with [`maximize_linear`]
/// over the feasible set with capped pieces boxed at their caps,
/// and stops once the duality gap `∇f(x)ᵀ(s − x)` falls below `tol·f(x)`. The
/// best iterate seen is returned.
pub fn solve_separable_concave(inst: &PackingInstance, tol: f64, max_iters: usize) -> Result<OfflineResult> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tol must be positive, got {tol}")));
    }
    let n = inst.n();
    let oracle = with_cap_rows(inst)?;
    let mut x = vec![0.0f64; n];
    let mut best_x = x.clone();
    let mut best_f = 0.0;
    let mut gap = f64::INFINITY;
    let mut grad = vec![0.0; n];
    for k in 0..max_iters {
        for (g, (col, &z)) in grad.iter_mut().zip(inst.columns.iter().zip(&x)) {
            *g = match col.piece {
                ConcavePiece::CappedLinear { weight, .. } => weight,
                // Power pieces have an infinite slope at zero; evaluate just off it.
                piece => piece.derivative(z.max(1e-12)).min(1e12),
            };
        }
        let s = maximize_linear(&oracle, &grad)?;
        gap = grad.iter().zip(s.iter().zip(&x)).map(|(g, (s, x))| g * (s - x)).sum();
        let f = inst.objective(&x)?;
        if f > best_f {
            best_f = f;
            best_x.copy_from_slice(&x);
        }
        if k > 0 && gap <= tol * f.max(f64::MIN_POSITIVE) {
            return Ok(OfflineResult {
                x_star: best_x,
                opt_value: best_f,
                status: SolveStatus::Approximate { tol, converged: true, iterations: k, gap },
            });
        }
        let step = 2.0 / (k as f64 + 2.0);
        for (xj, sj) in x.iter_mut().zip(&s) {
            *xj += step * (sj - *xj);
        }
    }
    let f = inst.objective(&x)?;
    if f > best_f {
        best_f = f;
        best_x = x;
    }
    Ok(OfflineResult {
        x_star: best_x,
        opt_value: best_f,
        status: SolveStatus::Approximate { tol, converged: false, iterations: max_iters, gap },
    })
}

/// `inst` plus a row `x_j ≤ q_j` for every capped piece. No optimum is lost
/// since the objective is monotone, and on that box each capped piece is
/// linear, which keeps the linearization smooth.
fn with_cap_rows(inst: &PackingInstance) -> Result<PackingInstance> {
    let mut b = inst.b.clone();
    let mut columns = inst.columns.clone();
    for col in &mut columns {
        if let ConcavePiece::CappedLinear { cap, .. } = col.piece {
            col.coeffs.push((b.len(), 1.0));
            b.push(cap);
        }
    }
    PackingInstance::new(b, columns)
}

/// Exact LP when every piece is linear, Frank-Wolfe with default settings otherwise.
pub fn solve_offline(inst: &PackingInstance) -> Result<OfflineResult> {
    if inst.is_all_linear() {
        solve_lp(inst)
    } else {
        solve_separable_concave(inst, DEFAULT_FW_TOL, DEFAULT_FW_MAX_ITERS)
    }
}

/// Grid-search optimum for instances with at most three variables.
///
/// The first `n − 1` coordinates are scanned on a grid of spacing `grid_step`
/// over their feasible box `[0, min_i b_i/a_ij]`. Because the objective is
/// monotone, the last coordinate is then set to its largest feasible value.
/// A second pass at `grid_step/10` scans a `±grid_step` box around the
/// incumbent.
pub fn brute_force_opt(inst: &PackingInstance, grid_step: f64) -> Result<OfflineResult> {
    let n = inst.n();
    if n > 3 {
        return Err(Error::Config(format!("brute_force_opt supports n ≤ 3, got {n}")));
    }
    if !(grid_step > 0.0) {
        return Err(Error::Config(format!("grid_step must be positive, got {grid_step}")));
    }
    if n == 0 {
        return Ok(OfflineResult { x_star: vec![], opt_value: 0.0, status: SolveStatus::Optimal });
    }
    let dense = inst.dense_rows();
    let upper: Vec<f64> = inst.columns.iter().map(|c| c.max_step(&inst.b)).collect();

    let mut best = (vec![0.0; n], f64::NEG_INFINITY);
    let scan = |lo: &[f64], hi: &[f64], step: f64, best: &mut (Vec<f64>, f64)| {
        let free = n - 1;
        let counts: Vec<usize> = (0..free).map(|j| ((hi[j] - lo[j]) / step).floor() as usize + 1).collect();
        let total: usize = counts.iter().product();
        let mut point = vec![0.0; n];
        let mut room = vec![0.0; inst.m()];
        for idx in 0..total {
            let mut rem = idx;
            for j in 0..free {
                point[j] = lo[j] + (rem % counts[j]) as f64 * step;
                rem /= counts[j];
            }
            let mut feasible = true;
            for (i, r) in room.iter_mut().enumerate() {
                let used: f64 = (0..free).map(|j| dense[i][j] * point[j]).sum();
                *r = inst.b[i] - used;
                if *r < -1e-12 {
                    feasible = false;
                }
            }
            if !feasible {
                continue;
            }
            point[n - 1] = inst.columns[n - 1].max_step(&room);
            let f: f64 = inst.columns.iter().zip(&point).map(|(c, &z)| c.piece.value(z)).sum();
            if f > best.1 {
                best.0.copy_from_slice(&point);
                best.1 = f;
            }
        }
    };

    let zeros = vec![0.0; n];
    scan(&zeros, &upper, grid_step, &mut best);
    let lo: Vec<f64> = best.0.iter().map(|&z| (z - grid_step).max(0.0)).collect();
    let hi: Vec<f64> = best.0.iter().zip(&upper).map(|(&z, &u)| (z + grid_step).min(u)).collect();
    scan(&lo, &hi, grid_step / 10.0, &mut best);

    let (x_star, opt_value) = best;
    Ok(OfflineResult { x_star, opt_value, status: SolveStatus::Optimal })
}
