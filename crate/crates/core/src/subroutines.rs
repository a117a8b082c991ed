//! Classical online packing algorithms used as black boxes by the switching
//! wrapper. Each one sees a column, commits to `x_j^O` immediately, and can
//! report the feasibility factor `β_t` it currently guarantees.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{Column, KappaTracker};

/// How a subroutine bounds its own constraint violation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaGuarantee {
    Fixed(f64),
    /// `β_t` is recomputed each round and never decreases.
    Reported,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubroutineGuarantee {
    /// Claimed competitive factor, `None` when only known empirically.
    pub alpha: Option<f64>,
    pub beta: BetaGuarantee,
}

/// Bookkeeping every subroutine keeps about its own decisions.
#[derive(Debug, Clone)]
pub struct SubroutineState {
    pub b: Vec<f64>,
    pub loads: Vec<f64>,
    pub x: Vec<f64>,
    pub kappa: KappaTracker,
}

impl SubroutineState {
    pub fn new(b: &[f64]) -> Self {
        SubroutineState { b: b.to_vec(), loads: vec![0.0; b.len()], x: Vec::new(), kappa: KappaTracker::new(b.len()) }
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn round(&self) -> usize {
        self.x.len()
    }

    fn check(&self, col: &Column) -> Result<()> {
        if let Some(&(i, _)) = col.coeffs.iter().find(|&&(i, _)| i >= self.m()) {
            return Err(Error::DimensionMismatch { expected: self.m(), found: i + 1 });
        }
        if col.positive().next().is_none() {
            return Err(Error::Config(format!("column {} has no positive coefficient", self.round() + 1)));
        }
        Ok(())
    }

    fn commit(&mut self, col: &Column, z: f64) -> f64 {
        for &(i, a) in &col.coeffs {
            self.loads[i] += a * z;
        }
        self.x.push(z);
        z
    }

    fn room(&self) -> Vec<f64> {
        self.b.iter().zip(&self.loads).map(|(b, l)| b - l).collect()
    }
}

pub trait OnlineSubroutine: Send {
    fn name(&self) -> &'static str;

    fn guarantee(&self) -> SubroutineGuarantee;

    /// Processes the next column and returns `x_j^O`.
    fn observe(&mut self, col: &Column) -> Result<f64>;

    /// Current `β_t`. Only meaningful after at least one column.
    fn beta(&self) -> f64;

    fn state(&self) -> &SubroutineState;
}

/// Takes as much of each column as the remaining capacity allows.
#[derive(Debug, Clone)]
pub struct GreedySaturate {
    state: SubroutineState,
}

impl GreedySaturate {
    pub fn new(b: &[f64]) -> Self {
        GreedySaturate { state: SubroutineState::new(b) }
    }
}

impl OnlineSubroutine for GreedySaturate {
    fn name(&self) -> &'static str {
        "greedy"
    }

    fn guarantee(&self) -> SubroutineGuarantee {
        SubroutineGuarantee { alpha: None, beta: BetaGuarantee::Fixed(1.0) }
    }

    fn observe(&mut self, col: &Column) -> Result<f64> {
        self.state.check(col)?;
        self.state.kappa.update(col);
        let mut z = col.max_step(&self.state.room());
        if let crate::model::ConcavePiece::CappedLinear { cap, .. } = col.piece {
            z = z.min(cap);
        }
        Ok(self.state.commit(col, z))
    }

    fn beta(&self) -> f64 {
        1.0
    }

    fn state(&self) -> &SubroutineState {
        &self.state
    }
}

const BISECTION_TOL: f64 = 1e-9;
const BISECTION_MAX_ITERS: usize = 200;
const MAX_DOUBLINGS: usize = 2000;

/// Exponential-price admission: row `i` charges
/// `p_i(L) = (1 + m·κ_i)^(L/(B·b_i)) − 1` per unit of coefficient, and a column
/// is admitted up to the point where its marginal value meets the total price.
#[derive(Debug, Clone)]
pub struct PricePacking {
    state: SubroutineState,
    b_param: f64,
    c_beta: f64,
}

impl PricePacking {
    pub fn new(b: &[f64], b_param: f64, c_beta: f64) -> Result<Self> {
        if !(b_param > 0.0 && b_param.is_finite()) {
            return Err(Error::Config(format!("B must be positive, got {b_param}")));
        }
        if !(c_beta > 0.0 && c_beta.is_finite()) {
            return Err(Error::Config(format!("c_beta must be positive, got {c_beta}")));
        }
        Ok(PricePacking { state: SubroutineState::new(b), b_param, c_beta })
    }

    /// `p_i(load)` with the current `κ_i`.
    pub fn price(&self, row: usize, load: f64) -> f64 {
        let base = self.state.m() as f64 * self.state.kappa.row_or_one(row);
        (base.ln_1p() * load / (self.b_param * self.state.b[row])).exp_m1()
    }

    /// `Σ_i a_ij·p_i(L_i + a_ij·z) − g_j'(z)`, nondecreasing in `z`.
    pub fn excess_price(&self, col: &Column, z: f64) -> f64 {
        let total: f64 = col.positive().map(|(i, a)| a * self.price(i, self.state.loads[i] + a * z)).sum();
        total - col.piece.derivative(z)
    }

    /// Largest `z` with `excess_price(z) ≤ 0`, by doubling from 1 then bisection.
    fn crossing(&self, col: &Column) -> f64 {
        if self.excess_price(col, 0.0) > 0.0 {
            return 0.0;
        }
        let mut lo = 0.0;
        let mut hi = 1.0;
        for _ in 0..MAX_DOUBLINGS {
            if self.excess_price(col, hi) > 0.0 {
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..BISECTION_MAX_ITERS {
            if hi - lo <= BISECTION_TOL {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.excess_price(col, mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }
}

impl OnlineSubroutine for PricePacking {
    fn name(&self) -> &'static str {
        "price"
    }

    fn guarantee(&self) -> SubroutineGuarantee {
        SubroutineGuarantee { alpha: Some(self.b_param), beta: BetaGuarantee::Reported }
    }

    fn observe(&mut self, col: &Column) -> Result<f64> {
        self.state.check(col)?;
        self.state.kappa.update(col);
        let z = self.crossing(col);
        Ok(self.state.commit(col, z))
    }

    /// `max(1, c_β·log₂(1 + m·κ)/B)`.
    fn beta(&self) -> f64 {
        let m = self.state.m() as f64;
        let raw = self.c_beta * (m * self.state.kappa.kappa()).ln_1p() / std::f64::consts::LN_2 / self.b_param;
        raw.max(1.0)
    }

    fn state(&self) -> &SubroutineState {
        &self.state
    }
}

/// `ψ(z) = (U·e/L)^z · (L/e)`, the admission threshold at utilization `z`.
pub fn knapsack_psi(z: f64, lower: f64, upper: f64) -> f64 {
    let e = std::f64::consts::E;
    (upper * e / lower).powf(z) * (lower / e)
}

/// `min(1, ψ⁻¹(d))`: the utilization up to which an item of density `d` is admitted.
pub fn knapsack_target(density: f64, lower: f64, upper: f64) -> f64 {
    let e = std::f64::consts::E;
    ((density * e / lower).ln() / (upper * e / lower).ln()).min(1.0)
}

/// Threshold policy for fractional online knapsack with densities in `[L, U]`.
///
/// On a general column, each positive row `i` is treated as its own knapsack:
/// the density is `g_j'(0)/a_ij` clamped to `[L, U]`, and the column may fill
/// row `i` up to its target utilization. The admitted amount is the minimum
/// over rows, so capacities are never exceeded.
#[derive(Debug, Clone)]
pub struct KnapsackThreshold {
    state: SubroutineState,
    lower: f64,
    upper: f64,
}

impl KnapsackThreshold {
    pub fn new(b: &[f64], lower: f64, upper: f64) -> Result<Self> {
        if !(lower > 0.0 && lower <= upper && upper.is_finite()) {
            return Err(Error::Config(format!("need 0 < L ≤ U < ∞, got L = {lower}, U = {upper}")));
        }
        Ok(KnapsackThreshold { state: SubroutineState::new(b), lower, upper })
    }

    /// Single-knapsack form over row 0 (capacity `C = b_0`): offers an item of
    /// the given density and size, returns the capacity admitted.
    pub fn observe_item(&mut self, density: f64, size: f64) -> Result<f64> {
        if !(density >= self.lower && density <= self.upper) {
            return Err(Error::Config(format!("density {density} outside [{}, {}]", self.lower, self.upper)));
        }
        if !(size > 0.0) {
            return Err(Error::Config(format!("item size must be positive, got {size}")));
        }
        let capacity = self.state.b[0];
        let used = self.state.loads[0];
        let target = knapsack_target(density, self.lower, self.upper);
        let taken = (capacity * target - used).max(0.0).min(size);
        // Recorded as one unit-coefficient column on row 0.
        self.state.loads[0] += taken;
        self.state.x.push(taken);
        Ok(taken)
    }
}

impl OnlineSubroutine for KnapsackThreshold {
    fn name(&self) -> &'static str {
        "knapsack-threshold"
    }

    fn guarantee(&self) -> SubroutineGuarantee {
        let ratio = (self.upper / self.lower).ln() + 1.0;
        SubroutineGuarantee { alpha: Some(ratio), beta: BetaGuarantee::Fixed(1.0) }
    }

    fn observe(&mut self, col: &Column) -> Result<f64> {
        self.state.check(col)?;
        self.state.kappa.update(col);
        let marginal = col.piece.derivative(0.0);
        let mut z = f64::INFINITY;
        for (i, a) in col.positive() {
            let density = (marginal / a).clamp(self.lower, self.upper);
            let target = knapsack_target(density, self.lower, self.upper);
            let allowed = (self.state.b[i] * target - self.state.loads[i]).max(0.0) / a;
            z = z.min(allowed);
        }
        if let crate::model::ConcavePiece::CappedLinear { cap, .. } = col.piece {
            z = z.min(cap);
        }
        Ok(self.state.commit(col, z))
    }

    fn beta(&self) -> f64 {
        1.0
    }

    fn state(&self) -> &SubroutineState {
        &self.state
    }
}

/// Subroutine selection and knobs, as named on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubroutineConfig {
    Greedy,
    Price { b_param: f64, c_beta: f64 },
    KnapsackThreshold { lower: f64, upper: f64 },
}

impl SubroutineConfig {
    pub const DEFAULT_PRICE: SubroutineConfig = SubroutineConfig::Price { b_param: 1.0, c_beta: 1.0 };
    pub const DEFAULT_KNAPSACK: SubroutineConfig = SubroutineConfig::KnapsackThreshold { lower: 1e-2, upper: 1e2 };

    pub fn build(&self, b: &[f64]) -> Result<Box<dyn OnlineSubroutine>> {
        Ok(match *self {
            SubroutineConfig::Greedy => Box::new(GreedySaturate::new(b)),
            SubroutineConfig::Price { b_param, c_beta } => Box::new(PricePacking::new(b, b_param, c_beta)?),
            SubroutineConfig::KnapsackThreshold { lower, upper } => Box::new(KnapsackThreshold::new(b, lower, upper)?),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SubroutineConfig::Greedy => "greedy",
            SubroutineConfig::Price { .. } => "price",
            SubroutineConfig::KnapsackThreshold { .. } => "knapsack-threshold",
        }
    }
}

impl fmt::Display for SubroutineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SubroutineConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(SubroutineConfig::Greedy),
            "price" => Ok(SubroutineConfig::DEFAULT_PRICE),
            "knapsack-threshold" => Ok(SubroutineConfig::DEFAULT_KNAPSACK),
            other => Err(Error::Config(format!(
                "unknown subroutine {other:?} (expected greedy, price or knapsack-threshold)"
            ))),
        }
    }
}
