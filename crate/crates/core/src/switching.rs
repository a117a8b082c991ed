//! The advice/subroutine switching algorithm.
//!
//! Every round the subroutine proposes `x_j^O` and the advice proposes `x'_j`.
//! If the revealed advice prefix (including `x'_j`) fits within `β_j·b`, the
//! round commits `(x_j^O + x'_j)/2`; otherwise it commits `x_j^O` alone. The
//! check is repeated every round, so advice rejected earlier can be admitted
//! again once `β` has grown.

use std::io::Write;

use crate::error::{check_len, Error, Result};
use crate::model::{violation_factor, Column, PackingInstance};
use crate::offline::OfflineResult;
use crate::subroutines::OnlineSubroutine;

/// Advice values `x'_j`, revealed one per round.
#[derive(Debug, Clone, PartialEq)]
pub struct AdviceStream(Vec<f64>);

impl AdviceStream {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        crate::error::check_nonnegative(&values)?;
        Ok(AdviceStream(values))
    }

    pub fn zeros(n: usize) -> Self {
        AdviceStream(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// One value per line, no header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for v in &self.0 {
            writeln!(w, "{v}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let field = rec.get(0).unwrap_or("").trim();
            let v: f64 = field.parse().map_err(|_| Error::Parse(format!("bad advice value {field:?}")))?;
            values.push(v);
        }
        AdviceStream::new(values)
    }
}

/// Where `β_j` comes from each round.
#[derive(Debug, Clone, PartialEq)]
pub enum BetaPolicy {
    Fixed(f64),
    /// Ask the subroutine after it has seen round `j`.
    Reported,
    /// Explicit per-round values; the last one repeats if the run is longer.
    Schedule(Vec<f64>),
}

impl BetaPolicy {
    fn validate(&self) -> Result<()> {
        let ok = |b: f64| b >= 1.0 && b.is_finite();
        match self {
            BetaPolicy::Fixed(b) if !ok(*b) => Err(Error::Config(format!("β must be ≥ 1, got {b}"))),
            BetaPolicy::Schedule(s) if s.is_empty() || !s.iter().all(|&b| ok(b)) => {
                Err(Error::Config("β schedule must be nonempty with every entry ≥ 1".into()))
            }
            _ => Ok(()),
        }
    }

    fn at(&self, round: usize, sub: &dyn OnlineSubroutine) -> f64 {
        match self {
            BetaPolicy::Fixed(b) => *b,
            BetaPolicy::Reported => sub.beta(),
            BetaPolicy::Schedule(s) => s[round.min(s.len() - 1)],
        }
    }
}

impl std::str::FromStr for BetaPolicy {
    type Err = Error;

    /// `reported` or `fixed:<value>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "reported" {
            return Ok(BetaPolicy::Reported);
        }
        let v = s
            .strip_prefix("fixed:")
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| Error::Config(format!("bad β policy {s:?} (expected fixed:<v> or reported)")))?;
        let p = BetaPolicy::Fixed(v);
        p.validate()?;
        Ok(p)
    }
}

/// Mixing weight `λ` and gate multiplier `γ`: `x_j = λ·x_j^O + (1 − λ)·x'_j`
/// when the advice prefix fits in `γ·β_j·b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mixing {
    pub lambda: f64,
    pub gamma: f64,
}

impl Default for Mixing {
    fn default() -> Self {
        Mixing { lambda: 0.5, gamma: 1.0 }
    }
}

impl Mixing {
    fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) || !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!(
                "need λ ∈ (0,1) and γ > 0, got λ = {}, γ = {}",
                self.lambda, self.gamma
            )));
        }
        Ok(())
    }

    fn combine(&self, sub: f64, adv: f64) -> f64 {
        if *self == Mixing::default() {
            (sub + adv) / 2.0
        } else {
            self.lambda * sub + (1.0 - self.lambda) * adv
        }
    }
}

/// Running loads of the combined solution, the subroutine and the advice prefix.
#[derive(Debug, Clone)]
pub struct SwitchState {
    b: Vec<f64>,
    mixing: Mixing,
    pub loads: Vec<f64>,
    pub sub_loads: Vec<f64>,
    pub advice_loads: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    /// 1-based round index.
    pub j: usize,
    pub x_adv: f64,
    pub x_sub: f64,
    pub x_comb: f64,
    pub used: bool,
    pub beta: f64,
    /// `violation_factor` of the combined loads after this round.
    pub max_load_ratio: f64,
}

impl SwitchState {
    pub fn new(b: &[f64], mixing: Mixing) -> Result<Self> {
        mixing.validate()?;
        let m = b.len();
        Ok(SwitchState {
            b: b.to_vec(),
            mixing,
            loads: vec![0.0; m],
            sub_loads: vec![0.0; m],
            advice_loads: vec![0.0; m],
        })
    }

    /// One round of the switching rule. Returns `(x_j, used_advice)`.
    pub fn switch_round(&mut self, col: &Column, advice: f64, sub: f64, beta: f64) -> Result<(f64, bool)> {
        if !(advice >= 0.0) {
            return Err(Error::NegativeEntry { index: 0, value: advice });
        }
        if !(beta >= 1.0) {
            return Err(Error::Config(format!("β must be ≥ 1, got {beta}")));
        }
        for &(i, a) in &col.coeffs {
            self.advice_loads[i] += a * advice;
        }
        let bound = self.mixing.gamma * beta;
        let used = self.advice_loads.iter().zip(&self.b).all(|(l, b)| *l <= bound * b);
        let x = if used { self.mixing.combine(sub, advice) } else { sub };
        for &(i, a) in &col.coeffs {
            self.loads[i] += a * x;
            self.sub_loads[i] += a * sub;
        }
        Ok((x, used))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTrace {
    pub rounds: Vec<RoundRecord>,
    pub loads: Vec<f64>,
    pub sub_loads: Vec<f64>,
    pub advice_loads: Vec<f64>,
    pub f_x: f64,
    pub f_sub: f64,
    pub f_advice: f64,
}

impl SolutionTrace {
    pub fn x(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.x_comb).collect()
    }

    pub fn x_sub(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.x_sub).collect()
    }

    pub fn x_adv(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.x_adv).collect()
    }

    pub fn beta_final(&self) -> f64 {
        self.rounds.last().map_or(1.0, |r| r.beta)
    }

    pub fn all_used(&self) -> bool {
        self.rounds.iter().all(|r| r.used)
    }

    /// CSV with header `j,x_adv,x_sub,x_comb,used,beta,max_load_ratio`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["j", "x_adv", "x_sub", "x_comb", "used", "beta", "max_load_ratio"])?;
        for r in &self.rounds {
            wtr.write_record([
                r.j.to_string(),
                r.x_adv.to_string(),
                r.x_sub.to_string(),
                r.x_comb.to_string(),
                u8::from(r.used).to_string(),
                r.beta.to_string(),
                r.max_load_ratio.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Runs the switching algorithm over every column of `inst`.
pub fn run_switching(
    inst: &PackingInstance,
    advice: &AdviceStream,
    sub: &mut dyn OnlineSubroutine,
    policy: &BetaPolicy,
    mixing: Mixing,
) -> Result<SolutionTrace> {
    let n = inst.n();
    if advice.len() < n {
        return Err(Error::Config(format!("advice has {} entries but the instance has {n} columns", advice.len())));
    }
    policy.validate()?;
    check_len(inst.m(), sub.state().m())?;
    let mut state = SwitchState::new(&inst.b, mixing)?;
    let mut rounds = Vec::with_capacity(n);
    for (j, (col, &x_adv)) in inst.columns.iter().zip(advice.values()).enumerate() {
        let x_sub = sub.observe(col)?;
        let beta = policy.at(j, sub);
        let (x_comb, used) = state.switch_round(col, x_adv, x_sub, beta)?;
        rounds.push(RoundRecord {
            j: j + 1,
            x_adv,
            x_sub,
            x_comb,
            used,
            beta,
            max_load_ratio: violation_factor(&state.loads, &inst.b)?,
        });
    }
    let mut trace = SolutionTrace {
        rounds,
        loads: state.loads,
        sub_loads: state.sub_loads,
        advice_loads: state.advice_loads,
        f_x: 0.0,
        f_sub: 0.0,
        f_advice: 0.0,
    };
    trace.f_x = inst.objective(&trace.x())?;
    trace.f_sub = inst.objective(&trace.x_sub())?;
    trace.f_advice = inst.objective(&trace.x_adv())?;
    Ok(trace)
}

/// `x'_j/2` on rounds where the advice was used, 0 elsewhere.
pub fn trimmed_advice(trace: &SolutionTrace) -> Vec<f64> {
    trace.rounds.iter().map(|r| if r.used { r.x_adv / 2.0 } else { 0.0 }).collect()
}

/// A ratio that is undefined when its denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Finite(f64),
    Undefined,
}

impl Ratio {
    pub fn of(num: f64, den: f64) -> Ratio {
        if den > 0.0 {
            Ratio::Finite(num / den)
        } else {
            Ratio::Undefined
        }
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            Ratio::Finite(v) => Some(v),
            Ratio::Undefined => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    /// `f(x')/f(x)`, undefined when either side is zero.
    pub consistency: Ratio,
    /// `OPT/f(x)`
    pub robustness: Ratio,
    /// `violation_factor(Ax, b)`
    pub violation: f64,
    /// The β under which the advice was gated (last round's).
    pub beta_bound: f64,
    /// `f(x/s)/OPT` with `s = max(1, violation)`.
    pub scaled_ratio: Ratio,
}

pub fn quality(trace: &SolutionTrace, opt: &OfflineResult, inst: &PackingInstance) -> Result<QualityReport> {
    check_len(inst.n(), trace.rounds.len())?;
    let violation = violation_factor(&trace.loads, &inst.b)?;
    let scale = violation.max(1.0);
    let scaled: Vec<f64> = trace.x().iter().map(|z| z / scale).collect();
    Ok(QualityReport {
        consistency: if trace.f_advice > 0.0 { Ratio::of(trace.f_advice, trace.f_x) } else { Ratio::Undefined },
        robustness: Ratio::of(opt.opt_value, trace.f_x),
        violation,
        beta_bound: trace.beta_final(),
        scaled_ratio: Ratio::of(inst.objective(&scaled)?, opt.opt_value),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ConcavePiece;
    use crate::offline::solve_lp;
    use crate::subroutines::GreedySaturate;

    fn e1() -> PackingInstance {
        PackingInstance::new(
            vec![1.0],
            vec![
                Column::new(vec![(0, 0.5)], ConcavePiece::linear(1.0)),
                Column::new(vec![(0, 1.0)], ConcavePiece::linear(1.0)),
            ],
        )
        .unwrap()
    }

    fn run_e1(advice: &[f64]) -> SolutionTrace {
        let inst = e1();
        let mut g = GreedySaturate::new(&inst.b);
        let adv = AdviceStream::new(advice.to_vec()).unwrap();
        run_switching(&inst, &adv, &mut g, &BetaPolicy::Fixed(1.0), Mixing::default()).unwrap()
    }

    #[test]
    fn e1_good_advice() {
        let t = run_e1(&[2.0, 0.0]);
        assert_eq!(t.rounds[0].x_comb, 2.0);
        assert!(t.rounds[0].used);
        assert_eq!(t.x(), vec![2.0, 0.0]);
        assert_eq!(t.f_x, 2.0);
        let q = quality(&t, &solve_lp(&e1()).unwrap(), &e1()).unwrap();
        assert_eq!(q.robustness, Ratio::Finite(1.0));
        assert_eq!(q.violation, 1.0);
        assert_eq!(q.scaled_ratio, Ratio::Finite(1.0));
    }

    #[test]
    fn e1_oversized_advice() {
        let t = run_e1(&[4.0, 0.0]);
        assert!(!t.rounds[0].used);
        assert_eq!(t.rounds[0].x_comb, 2.0);
        assert_eq!(trimmed_advice(&t), vec![0.0, 0.0]);
    }

    #[test]
    fn e1_zero_advice() {
        let t = run_e1(&[0.0, 0.0]);
        assert!(t.all_used());
        assert_eq!(t.x(), vec![1.0, 0.0]);
        assert_eq!(t.f_x, 1.0);
        assert_eq!(t.f_x, t.f_sub / 2.0);
        let q = quality(&t, &solve_lp(&e1()).unwrap(), &e1()).unwrap();
        assert_eq!(q.consistency, Ratio::Undefined);
        assert_eq!(q.robustness, Ratio::Finite(2.0));
        assert_eq!(q.violation, 0.5);
    }

    #[test]
    fn readmission_under_growing_beta() {
        let inst = PackingInstance::new(
            vec![1.0],
            vec![
                Column::new(vec![(0, 1.0)], ConcavePiece::linear(1.0)),
                Column::new(vec![(0, 1.0)], ConcavePiece::linear(1.0)),
            ],
        )
        .unwrap();
        let mut g = GreedySaturate::new(&inst.b);
        let adv = AdviceStream::new(vec![1.2, 0.3]).unwrap();
        let t = run_switching(&inst, &adv, &mut g, &BetaPolicy::Schedule(vec![1.0, 2.0]), Mixing::default()).unwrap();
        assert!(!t.rounds[0].used);
        assert!(t.rounds[1].used);
        assert!((t.advice_loads[0] - 1.5).abs() < 1e-15);
        assert_eq!(trimmed_advice(&t), vec![0.0, 0.15]);
    }

    #[test]
    fn trimmed_advice_all_used_is_half() {
        let t = run_e1(&[1.0, 0.5]);
        assert!(t.all_used());
        assert_eq!(trimmed_advice(&t), vec![0.5, 0.25]);
    }

    #[test]
    fn rejects_short_or_negative_advice() {
        let inst = e1();
        let mut g = GreedySaturate::new(&inst.b);
        let short = AdviceStream::new(vec![1.0]).unwrap();
        assert!(run_switching(&inst, &short, &mut g, &BetaPolicy::Fixed(1.0), Mixing::default()).is_err());
        assert_eq!(g.state().round(), 0, "no round may run before the length check");
        assert!(AdviceStream::new(vec![1.0, -1.0]).is_err());
        let mut s = SwitchState::new(&[1.0], Mixing::default()).unwrap();
        assert!(s.switch_round(&inst.columns[0], -0.1, 1.0, 1.0).is_err());
        assert!(s.switch_round(&inst.columns[0], 0.1, 1.0, 0.5).is_err());
    }

    #[test]
    fn longer_advice_is_ignored_past_the_stream() {
        let t = run_e1(&[2.0, 0.0, 99.0]);
        assert_eq!(t.rounds.len(), 2);
    }

    #[test]
    fn custom_mixing() {
        let inst = e1();
        let mut g = GreedySaturate::new(&inst.b);
        let adv = AdviceStream::new(vec![2.0, 0.0]).unwrap();
        let mix = Mixing { lambda: 0.25, gamma: 2.0 };
        let t = run_switching(&inst, &adv, &mut g, &BetaPolicy::Fixed(1.0), mix).unwrap();
        assert_eq!(t.rounds[0].x_comb, 0.25 * 2.0 + 0.75 * 2.0);
        assert!(SwitchState::new(&[1.0], Mixing { lambda: 1.0, gamma: 1.0 }).is_err());
    }

    #[test]
    fn beta_policy_parsing() {
        assert_eq!("reported".parse::<BetaPolicy>().unwrap(), BetaPolicy::Reported);
        assert_eq!("fixed:2.5".parse::<BetaPolicy>().unwrap(), BetaPolicy::Fixed(2.5));
        assert!("fixed:0.5".parse::<BetaPolicy>().is_err());
        assert!("fixed".parse::<BetaPolicy>().is_err());
    }

    #[test]
    fn trace_csv_layout() {
        let t = run_e1(&[2.0, 0.0]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "j,x_adv,x_sub,x_comb,used,beta,max_load_ratio");
        assert_eq!(lines[1], "1,2,2,2,1,1,1");
        assert_eq!(lines[2], "2,0,0,0,1,1,1");
    }

    #[test]
    fn advice_csv_round_trip() {
        let a = AdviceStream::new(vec![0.0, 1.5, 1e-17, 3.25]).unwrap();
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        assert_eq!(AdviceStream::read_csv(&buf[..]).unwrap(), a);
        assert!(AdviceStream::read_csv(&b"1\nx\n"[..]).is_err());
    }
}
