//! The replacement-rate sweep and the evolving-matrix sweep.
//!
//! Trials run in parallel but each derives its own seeds from
//! `(master seed, trial, step, stream)` and results are merged in trial
//! order, so output does not depend on the thread count.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::advice::{corrupt_replacement, make_prediction_sequence, perturb_matrix, PredictionKind};
use crate::error::{Error, Result};
use crate::harness::metrics::{ratio_with, ScaleMode};
use crate::harness::synthetic::{gen_synthetic_matrix, SyntheticMatrix};
use crate::model::PackingInstance;
use crate::offline::solve_lp;
use crate::seed::{derive_seed, stream};
use crate::subroutines::SubroutineConfig;
use crate::switching::{run_switching, AdviceStream, BetaPolicy, Mixing, SolutionTrace};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    /// Row count; `None` means square.
    pub m: Option<usize>,
    pub ell: f64,
    pub trials: usize,
    pub p_grid: Vec<f64>,
    pub horizon: usize,
    /// Entries redrawn per step; `None` means `2n`.
    pub perturb_count: Option<usize>,
    /// Replacement rate behind the partial-online prediction.
    pub partial_p: f64,
    pub subroutine: SubroutineConfig,
    pub beta: BetaPolicy,
    pub seed: u64,
    /// Rescaling applied before ratios are taken.
    pub scaling: ScaleMode,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 100,
            m: None,
            ell: 0.01,
            trials: 200,
            p_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            horizon: 20,
            perturb_count: None,
            partial_p: 0.5,
            subroutine: SubroutineConfig::DEFAULT_PRICE,
            beta: BetaPolicy::Reported,
            seed: 0,
            scaling: ScaleMode::Exact,
            jobs: 0,
        }
    }
}

impl ExperimentConfig {
    /// n = 500 and 1000 trials.
    pub fn paper_scale() -> Self {
        ExperimentConfig { n: 500, trials: 1000, ..Default::default() }
    }

    pub fn rows(&self) -> usize {
        self.m.unwrap_or(self.n)
    }

    pub fn perturb_count(&self) -> usize {
        self.perturb_count.unwrap_or(2 * self.n)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n == 0 || self.rows() == 0 {
            return fail("n and m must be at least 1".into());
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if !(self.ell > 0.0 && self.ell < 1.0) {
            return fail(format!("ell must lie in (0, 1), got {}", self.ell));
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return fail(format!("p-grid value {p} outside [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.partial_p) {
            return fail(format!("partial-online rate {} outside [0, 1]", self.partial_p));
        }
        if self.perturb_count() > self.n * self.rows() {
            return fail(format!(
                "cannot perturb {} entries of a {}×{} matrix",
                self.perturb_count(),
                self.rows(),
                self.n
            ));
        }
        self.subroutine.build(&[1.0])?;
        Ok(())
    }

    fn instance(&self, trial: usize) -> (SyntheticMatrix, Vec<f64>) {
        let seed = derive_seed(self.seed, &[trial as u64, 0, stream::INSTANCE]);
        gen_synthetic_matrix(self.rows(), self.n, self.ell, seed)
    }

    fn ratio(&self, x: &[f64], inst: &PackingInstance, opt: f64) -> Result<f64> {
        ratio_with(x, inst, opt, self.scaling)
    }

    fn switch(&self, inst: &PackingInstance, advice: &AdviceStream) -> Result<SolutionTrace> {
        let mut sub = self.subroutine.build(&inst.b)?;
        run_switching(inst, advice, sub.as_mut(), &self.beta, Mixing::default())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub key: f64,
    pub arm: String,
    pub mean_ratio: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// A sweep result: one row per (key, arm), keyed by `p` or `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub key_name: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn mean(&self, key: f64, arm: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.key == key && r.arm == arm).map(|r| r.mean_ratio)
    }

    pub fn arms(&self) -> Vec<String> {
        let mut arms: Vec<String> = Vec::new();
        for r in &self.rows {
            if !arms.contains(&r.arm) {
                arms.push(r.arm.clone());
            }
        }
        arms
    }

    /// Header `<key>,arm,mean_ratio,stderr,trials`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record([self.key_name.as_str(), "arm", "mean_ratio", "stderr", "trials"])?;
        for r in &self.rows {
            wtr.write_record([
                r.key.to_string(),
                r.arm.clone(),
                r.mean_ratio.to_string(),
                r.stderr.to_string(),
                r.trials.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.len() != 5 || &headers[1] != "arm" {
            return Err(Error::Parse(format!("not a sweep table header: {headers:?}")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Parse(format!("bad number {s:?}")));
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            rows.push(SweepRow {
                key: num(&rec[0])?,
                arm: rec[1].to_string(),
                mean_ratio: num(&rec[2])?,
                stderr: num(&rec[3])?,
                trials: rec[4].parse().map_err(|_| Error::Parse(format!("bad count {:?}", &rec[4])))?,
            });
        }
        Ok(SweepTable { key_name: headers[0].to_string(), rows })
    }
}

/// Mean and standard error of the mean.
pub fn summarize(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn per_trial<T, F>(cfg: &ExperimentConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| (0..cfg.trials).into_par_iter().map(f).collect())
}

fn aggregate(key_name: &str, keys: &[f64], arms: &[&str], per_trial: &[Vec<Vec<f64>>]) -> SweepTable {
    let mut rows = Vec::new();
    for (k, &key) in keys.iter().enumerate() {
        for (a, arm) in arms.iter().enumerate() {
            let samples: Vec<f64> = per_trial.iter().map(|t| t[k][a]).collect();
            let (mean_ratio, stderr) = summarize(&samples);
            rows.push(SweepRow { key, arm: arm.to_string(), mean_ratio, stderr, trials: samples.len() });
        }
    }
    SweepTable { key_name: key_name.into(), rows }
}

pub const REPLACEMENT_ARMS: [&str; 3] = ["advice", "subroutine", "switching"];

/// Per replacement rate `p`: the raw advice ratio `f(x')/OPT` (unscaled), the
/// subroutine's scaled ratio and the switching algorithm's scaled ratio.
///
/// All rates in one trial share the same uniform draws, so a larger `p`
/// zeroes a superset of the entries a smaller one does.
pub fn run_experiment_replacement(cfg: &ExperimentConfig) -> Result<SweepTable> {
    cfg.validate()?;
    let results = per_trial(cfg, |trial| {
        let (a, b) = cfg.instance(trial);
        let inst = a.to_instance(&b)?;
        let opt = solve_lp(&inst)?;
        let corrupt_seed = derive_seed(cfg.seed, &[trial as u64, 0, stream::CORRUPT]);
        cfg.p_grid
            .iter()
            .map(|&p| {
                let advice = corrupt_replacement(&opt.x_star, p, corrupt_seed)?;
                let trace = cfg.switch(&inst, &advice)?;
                Ok(vec![
                    inst.objective(advice.values())? / opt.opt_value,
                    cfg.ratio(&trace.x_sub(), &inst, opt.opt_value)?,
                    cfg.ratio(&trace.x(), &inst, opt.opt_value)?,
                ])
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(aggregate("p", &cfg.p_grid, &REPLACEMENT_ARMS, &results))
}

pub const DYNAMIC_ARMS: [&str; 4] = ["switching-batch", "switching-online", "subroutine", "switching-partial-online"];

/// Per time step `t = 0..=T` of an evolving matrix: scaled ratios of the
/// switching algorithm under batch, online and partial-online predictions,
/// and of the subroutine alone.
pub fn run_experiment_dynamic(cfg: &ExperimentConfig) -> Result<SweepTable> {
    cfg.validate()?;
    let results = per_trial(cfg, |trial| {
        let (mut a, b) = cfg.instance(trial);
        let mut instances = Vec::with_capacity(cfg.horizon + 1);
        let mut optima = Vec::with_capacity(cfg.horizon + 1);
        for t in 0..=cfg.horizon {
            if t > 0 {
                let seed = derive_seed(cfg.seed, &[trial as u64, t as u64, stream::PERTURB]);
                a = perturb_matrix(&a, cfg.perturb_count(), cfg.ell, seed)?.0;
            }
            let inst = a.to_instance(&b)?;
            optima.push(solve_lp(&inst)?);
            instances.push(inst);
        }
        let x_stars: Vec<Vec<f64>> = optima.iter().map(|o| o.x_star.clone()).collect();
        let partial_seed = derive_seed(cfg.seed, &[trial as u64, 0, stream::CORRUPT]);
        let [batch, online, partial] =
            PredictionKind::ALL.map(|kind| make_prediction_sequence(&x_stars, kind, cfg.partial_p, partial_seed));
        let (batch, online, partial) = (batch?, online?, partial?);
        (0..=cfg.horizon)
            .map(|t| {
                let inst = &instances[t];
                let opt = optima[t].opt_value;
                let tb = cfg.switch(inst, &batch[t])?;
                let to = cfg.switch(inst, &online[t])?;
                let tp = cfg.switch(inst, &partial[t])?;
                Ok(vec![
                    cfg.ratio(&tb.x(), inst, opt)?,
                    cfg.ratio(&to.x(), inst, opt)?,
                    cfg.ratio(&tb.x_sub(), inst, opt)?,
                    cfg.ratio(&tp.x(), inst, opt)?,
                ])
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let keys: Vec<f64> = (0..=cfg.horizon).map(|t| t as f64).collect();
    Ok(aggregate("t", &keys, &DYNAMIC_ARMS, &results))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig { n: 12, trials: 6, horizon: 3, seed: 9, ..Default::default() }
    }

    #[test]
    fn replacement_shape_and_endpoints() {
        let cfg = ExperimentConfig { p_grid: vec![0.0, 0.5, 1.0], ..small() };
        let table = run_experiment_replacement(&cfg).unwrap();
        assert_eq!(table.rows.len(), 9);
        assert_eq!(table.mean(0.0, "advice"), Some(1.0));
        assert_eq!(table.mean(1.0, "advice"), Some(0.0));
        // Zero advice halves every x_j; scaling undoes it for a linear objective.
        let sub = table.mean(1.0, "subroutine").unwrap();
        let sw = table.mean(1.0, "switching").unwrap();
        assert!((sub - sw).abs() < 1e-9, "{sub} vs {sw}");
    }

    #[test]
    fn dynamic_shape_and_t0() {
        let table = run_experiment_dynamic(&small()).unwrap();
        assert_eq!(table.rows.len(), 4 * 4);
        assert_eq!(table.mean(0.0, "switching-batch"), table.mean(0.0, "switching-online"));
    }

    #[test]
    fn dynamic_without_perturbation_is_stationary() {
        let cfg = ExperimentConfig { perturb_count: Some(0), ..small() };
        let table = run_experiment_dynamic(&cfg).unwrap();
        for arm in ["switching-batch", "switching-online", "subroutine"] {
            let at0 = table.mean(0.0, arm).unwrap();
            for t in 1..=3 {
                assert_eq!(table.mean(t as f64, arm).unwrap(), at0, "{arm} at t = {t}");
            }
        }
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let serial = run_experiment_replacement(&ExperimentConfig { jobs: 1, ..small() }).unwrap();
        let parallel = run_experiment_replacement(&ExperimentConfig { jobs: 4, ..small() }).unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn table_csv_round_trip() {
        let table = run_experiment_replacement(&small()).unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"p,arm,mean_ratio,stderr,trials\n"));
        assert_eq!(SweepTable::read_csv(&buf[..]).unwrap(), table);
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig { trials: 0, ..small() }.validate().is_err());
        assert!(ExperimentConfig { ell: 1.0, ..small() }.validate().is_err());
        assert!(ExperimentConfig { p_grid: vec![1.2], ..small() }.validate().is_err());
        assert!(ExperimentConfig { perturb_count: Some(10_000), ..small() }.validate().is_err());
        assert!(small().validate().is_ok());
    }

    #[test]
    fn summary_statistics() {
        assert_eq!(summarize(&[2.0]), (2.0, 0.0));
        let (m, se) = summarize(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }
}
