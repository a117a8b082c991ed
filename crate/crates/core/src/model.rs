//! Instance model for online packing with a separable concave objective.
//!
//! An instance is `maximize Σ_j g_j(x_j) subject to A x ≤ b, x ≥ 0`, where the
//! columns of `A` (each with its own concave piece `g_j`) arrive one at a time
//! and the capacities `b` are known up front. Rows are 0-indexed in memory and
//! 1-indexed in the on-disk format.

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{check_len, check_nonnegative, Error, Result};

/// A monotone concave function `g` on `[0, ∞)` with `g(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ConcavePiece {
    /// `w·z`
    Linear { weight: f64 },
    /// `c·ln(1 + z/s)`
    Log { scale: f64, stretch: f64 },
    /// `c·z^ρ` with `ρ ∈ (0, 1]`
    Power { scale: f64, exponent: f64 },
    /// `min(w·z, w·q)`
    #[serde(rename = "capped")]
    CappedLinear { weight: f64, cap: f64 },
}

impl ConcavePiece {
    pub fn linear(weight: f64) -> Self {
        ConcavePiece::Linear { weight }
    }

    pub fn value(&self, z: f64) -> f64 {
        match *self {
            ConcavePiece::Linear { weight } => weight * z,
            ConcavePiece::Log { scale, stretch } => scale * (z / stretch).ln_1p(),
            ConcavePiece::Power { scale, exponent } => {
                if z <= 0.0 {
                    0.0
                } else {
                    scale * z.powf(exponent)
                }
            }
            ConcavePiece::CappedLinear { weight, cap } => weight * z.min(cap),
        }
    }

    /// Right derivative at `z`. Infinite for `Power` with `ρ < 1` at zero and
    /// zero for `CappedLinear` at or beyond its cap.
    pub fn derivative(&self, z: f64) -> f64 {
        match *self {
            ConcavePiece::Linear { weight } => weight,
            ConcavePiece::Log { scale, stretch } => scale / (stretch + z),
            ConcavePiece::Power { scale, exponent } => {
                if exponent == 1.0 {
                    scale
                } else if z <= 0.0 {
                    f64::INFINITY
                } else {
                    scale * exponent * z.powf(exponent - 1.0)
                }
            }
            ConcavePiece::CappedLinear { weight, cap } => {
                if z < cap {
                    weight
                } else {
                    0.0
                }
            }
        }
    }

    /// `g'(0)` when it is finite.
    pub fn initial_slope(&self) -> Option<f64> {
        let d = self.derivative(0.0);
        d.is_finite().then_some(d)
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, ConcavePiece::Linear { .. })
    }

    fn check(&self) -> std::result::Result<(), String> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(format!("{name} must be finite and > 0, got {v}"))
            }
        };
        match *self {
            ConcavePiece::Linear { weight } => pos("weight", weight),
            ConcavePiece::Log { scale, stretch } => pos("scale", scale).and(pos("stretch", stretch)),
            ConcavePiece::Power { scale, exponent } => {
                pos("scale", scale)?;
                if exponent > 0.0 && exponent <= 1.0 {
                    Ok(())
                } else {
                    Err(format!("exponent must lie in (0, 1], got {exponent}"))
                }
            }
            ConcavePiece::CappedLinear { weight, cap } => pos("weight", weight).and(pos("cap", cap)),
        }
    }
}

/// One packing variable: its sparse column of `A` and its objective piece.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    /// `(row, a_ij)` pairs, rows 0-indexed.
    pub coeffs: Vec<(usize, f64)>,
    pub piece: ConcavePiece,
}

impl Column {
    pub fn new(coeffs: Vec<(usize, f64)>, piece: ConcavePiece) -> Self {
        Column { coeffs, piece }
    }

    /// A column from a dense coefficient vector; zero entries are dropped.
    pub fn from_dense(dense: &[f64], piece: ConcavePiece) -> Self {
        let coeffs = dense.iter().enumerate().filter(|(_, &a)| a != 0.0).map(|(i, &a)| (i, a)).collect();
        Column { coeffs, piece }
    }

    pub fn positive(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coeffs.iter().copied().filter(|&(_, a)| a > 0.0)
    }

    pub fn dense(&self, m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m];
        for &(i, a) in &self.coeffs {
            out[i] += a;
        }
        out
    }

    /// Largest `z` with `a_ij·z ≤ room_i` on every positive row, clamped at 0.
    pub fn max_step(&self, room: &[f64]) -> f64 {
        self.positive().map(|(i, a)| room[i] / a).fold(f64::INFINITY, f64::min).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PackingInstance {
    pub b: Vec<f64>,
    pub columns: Vec<Column>,
}

impl PackingInstance {
    /// Builds and validates.
    pub fn new(b: Vec<f64>, columns: Vec<Column>) -> Result<Self> {
        let inst = PackingInstance { b, columns };
        validate_instance(&inst).map_err(Error::Invalid)?;
        Ok(inst)
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn n(&self) -> usize {
        self.columns.len()
    }

    pub fn pieces(&self) -> Vec<ConcavePiece> {
        self.columns.iter().map(|c| c.piece).collect()
    }

    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        check_len(self.n(), x.len())?;
        check_nonnegative(x)?;
        Ok(self.columns.iter().zip(x).map(|(c, &z)| c.piece.value(z)).sum())
    }

    pub fn loads(&self, x: &[f64]) -> Result<Vec<f64>> {
        loads(self.m(), &self.columns, x)
    }

    pub fn violation(&self, x: &[f64]) -> Result<f64> {
        violation_factor(&self.loads(x)?, &self.b)
    }

    pub fn is_all_linear(&self) -> bool {
        self.columns.iter().all(|c| c.piece.is_linear())
    }

    /// Dense row-major copy of `A`.
    pub fn dense_rows(&self) -> Vec<Vec<f64>> {
        let mut rows = vec![vec![0.0; self.n()]; self.m()];
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, a) in &col.coeffs {
                rows[i][j] += a;
            }
        }
        rows
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let file: InstanceFile = serde_json::from_reader(reader).map_err(|e| Error::Parse(e.to_string()))?;
        file.try_into()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::read_json(s.as_bytes())
    }

    pub fn write_json<W: Write>(&self, mut writer: W) -> Result<()> {
        let file = InstanceFile::from(self);
        serde_json::to_writer_pretty(&mut writer, &file).map_err(|e| Error::Parse(e.to_string()))?;
        writeln!(writer)?;
        Ok(())
    }

    pub fn to_json_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_json(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits utf-8")
    }
}

/// Σ_j g_j(x_j).
pub fn eval_objective(pieces: &[ConcavePiece], x: &[f64]) -> Result<f64> {
    check_len(pieces.len(), x.len())?;
    check_nonnegative(x)?;
    Ok(pieces.iter().zip(x).map(|(g, &z)| g.value(z)).sum())
}

/// `A x` for a prefix of columns.
pub fn loads(m: usize, columns: &[Column], x: &[f64]) -> Result<Vec<f64>> {
    check_len(columns.len(), x.len())?;
    let mut out = vec![0.0; m];
    for (col, &z) in columns.iter().zip(x) {
        if z == 0.0 {
            continue;
        }
        for &(i, a) in &col.coeffs {
            if i >= m {
                return Err(Error::DimensionMismatch { expected: m, found: i + 1 });
            }
            out[i] += a * z;
        }
    }
    Ok(out)
}

/// `max_i load_i / b_i`; a solution is `V`-feasible iff this is at most `V`.
pub fn violation_factor(load: &[f64], b: &[f64]) -> Result<f64> {
    check_len(b.len(), load.len())?;
    Ok(load.iter().zip(b).map(|(l, b)| l / b).fold(0.0, f64::max))
}

/// Running per-row max/min of the strictly positive coefficients seen so far.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaTracker {
    max: Vec<f64>,
    min: Vec<f64>,
}

impl KappaTracker {
    pub fn new(m: usize) -> Self {
        KappaTracker { max: vec![0.0; m], min: vec![f64::INFINITY; m] }
    }

    pub fn update(&mut self, col: &Column) {
        for (i, a) in col.positive() {
            self.max[i] = self.max[i].max(a);
            self.min[i] = self.min[i].min(a);
        }
    }

    /// `a_i(max)/a_i(min)`, or `None` if row `i` has no positive entry yet.
    pub fn row(&self, i: usize) -> Option<f64> {
        (self.max[i] > 0.0).then(|| self.max[i] / self.min[i])
    }

    /// `κ_i`, with 1 for rows that have seen nothing.
    pub fn row_or_one(&self, i: usize) -> f64 {
        self.row(i).unwrap_or(1.0)
    }

    /// `max_i κ_i`, 1 when empty.
    pub fn kappa(&self) -> f64 {
        (0..self.max.len()).filter_map(|i| self.row(i)).fold(1.0, f64::max)
    }

    pub fn m(&self) -> usize {
        self.max.len()
    }
}

/// A single broken invariant found by [`validate_instance`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyCapacities,
    NonpositiveCapacity { row: usize, value: f64 },
    RowOutOfRange { column: usize, row: usize },
    DuplicateRow { column: usize, row: usize },
    NegativeCoefficient { column: usize, row: usize, value: f64 },
    UnboundedDirection { column: usize },
    InvalidPiece { column: usize, reason: String },
}

impl fmt::Display for Violation {
    // Indices are reported 1-based, matching the file format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyCapacities => write!(f, "no constraints (m = 0)"),
            Violation::NonpositiveCapacity { row, value } => {
                write!(f, "nonpositive capacity: b_{} = {}", row + 1, value)
            }
            Violation::RowOutOfRange { column, row } => {
                write!(f, "row out of range: column {} references row {}", column + 1, row + 1)
            }
            Violation::DuplicateRow { column, row } => {
                write!(f, "duplicate row: column {} lists row {} twice", column + 1, row + 1)
            }
            Violation::NegativeCoefficient { column, row, value } => {
                write!(f, "negative coefficient: a_{},{} = {}", row + 1, column + 1, value)
            }
            Violation::UnboundedDirection { column } => {
                write!(f, "unbounded-direction: column {} has no positive coefficient", column + 1)
            }
            Violation::InvalidPiece { column, reason } => {
                write!(f, "invalid piece in column {}: {}", column + 1, reason)
            }
        }
    }
}

/// Checks every instance invariant and reports all violations found.
pub fn validate_instance(inst: &PackingInstance) -> std::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let m = inst.m();
    if m == 0 {
        out.push(Violation::EmptyCapacities);
    }
    for (row, &value) in inst.b.iter().enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            out.push(Violation::NonpositiveCapacity { row, value });
        }
    }
    for (column, col) in inst.columns.iter().enumerate() {
        let mut seen = vec![false; m];
        let mut any_positive = false;
        for &(row, value) in &col.coeffs {
            if row >= m {
                out.push(Violation::RowOutOfRange { column, row });
                continue;
            }
            if std::mem::replace(&mut seen[row], true) {
                out.push(Violation::DuplicateRow { column, row });
            }
            if !(value >= 0.0 && value.is_finite()) {
                out.push(Violation::NegativeCoefficient { column, row, value });
            } else if value > 0.0 {
                any_positive = true;
            }
        }
        if !any_positive {
            out.push(Violation::UnboundedDirection { column });
        }
        if let Err(reason) = col.piece.check() {
            out.push(Violation::InvalidPiece { column, reason });
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    m: usize,
    b: Vec<f64>,
    columns: Vec<ColumnFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ColumnFile {
    coeffs: Vec<(usize, f64)>,
    piece: ConcavePiece,
}

impl From<&PackingInstance> for InstanceFile {
    fn from(inst: &PackingInstance) -> Self {
        InstanceFile {
            m: inst.m(),
            b: inst.b.clone(),
            columns: inst
                .columns
                .iter()
                .map(|c| ColumnFile { coeffs: c.coeffs.iter().map(|&(i, a)| (i + 1, a)).collect(), piece: c.piece })
                .collect(),
        }
    }
}

impl TryFrom<InstanceFile> for PackingInstance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        if file.m != file.b.len() {
            return Err(Error::Parse(format!("m = {} but b has {} entries", file.m, file.b.len())));
        }
        let mut columns = Vec::with_capacity(file.columns.len());
        for (j, c) in file.columns.into_iter().enumerate() {
            let mut coeffs = Vec::with_capacity(c.coeffs.len());
            for (row, a) in c.coeffs {
                if row == 0 {
                    return Err(Error::Parse(format!("column {}: rows are 1-indexed", j + 1)));
                }
                coeffs.push((row - 1, a));
            }
            columns.push(Column { coeffs, piece: c.piece });
        }
        PackingInstance::new(file.b, columns)
    }
}
