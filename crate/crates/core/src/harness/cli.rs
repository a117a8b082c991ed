//! `augpack` command line. Exit status: 0 success, 2 configuration or input
//! error, 3 numeric failure.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::applications::ApplicationSpec;
use crate::error::{Error, Result};
use crate::harness::experiments::{run_experiment_dynamic, run_experiment_replacement, ExperimentConfig, SweepTable};
use crate::harness::plot::render_svg;
use crate::harness::synthetic::gen_synthetic_matrix;
use crate::model::PackingInstance;
use crate::offline::{solve_lp, solve_separable_concave, SolveStatus, DEFAULT_FW_MAX_ITERS, DEFAULT_FW_TOL};
use crate::subroutines::SubroutineConfig;
use crate::switching::{run_switching, AdviceStream, BetaPolicy, Mixing};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "augpack", version, about = "Online packing with predictions: simulator and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic instance, or build one from an application spec.
    Gen(GenArgs),
    /// Compute the offline optimum of an instance.
    Solve(SolveArgs),
    /// Run the switching algorithm once and write its per-round trace.
    Run(RunArgs),
    /// Average ratios over replacement rates.
    SweepReplacement(SweepArgs),
    /// Average ratios over time steps of an evolving matrix.
    SweepDynamic(SweepArgs),
    /// Render a sweep CSV as an SVG line chart.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Row count for rectangular instances (defaults to n).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    ell: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Build from a knapsack/throughput/ooic spec file instead.
    #[arg(long, conflicts_with_all = ["n", "m", "ell", "seed"])]
    spec: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = DEFAULT_FW_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_FW_MAX_ITERS)]
    max_iters: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SubroutineArgs {
    /// greedy, price or knapsack-threshold
    #[arg(long, default_value = "price")]
    subroutine: String,
    /// fixed:<v> or reported
    #[arg(long, default_value = "reported")]
    beta: String,
    /// Price rule parameter B.
    #[arg(long = "B", default_value_t = 1.0)]
    b_param: f64,
    #[arg(long, default_value_t = 1.0)]
    c_beta: f64,
    /// Knapsack-threshold density bounds.
    #[arg(long, default_value_t = 1e-2)]
    density_lower: f64,
    #[arg(long, default_value_t = 1e2)]
    density_upper: f64,
}

impl SubroutineArgs {
    fn subroutine(&self) -> Result<SubroutineConfig> {
        let cfg = match self.subroutine.parse::<SubroutineConfig>()? {
            SubroutineConfig::Greedy => SubroutineConfig::Greedy,
            SubroutineConfig::Price { .. } => SubroutineConfig::Price { b_param: self.b_param, c_beta: self.c_beta },
            SubroutineConfig::KnapsackThreshold { .. } => {
                SubroutineConfig::KnapsackThreshold { lower: self.density_lower, upper: self.density_upper }
            }
        };
        cfg.build(&[1.0])?;
        Ok(cfg)
    }

    fn beta(&self) -> Result<BetaPolicy> {
        self.beta.parse()
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    instance: PathBuf,
    /// One advice value per line; omitted means all-zero advice.
    #[arg(long)]
    advice: Option<PathBuf>,
    #[command(flatten)]
    sub: SubroutineArgs,
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    ell: f64,
    #[arg(long)]
    trials: Option<usize>,
    /// n = 500 and 1000 trials unless overridden.
    #[arg(long)]
    paper_scale: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    sub: SubroutineArgs,
    /// Comma-separated replacement rates.
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    p_grid: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    horizon: usize,
    /// Entries redrawn per step (defaults to 2n).
    #[arg(long)]
    perturb_count: Option<usize>,
    /// Rescaling before ratios: exact (divide by the violation factor) or shrink (by max(1, ·)).
    #[arg(long, default_value = "exact")]
    scaling: String,
    /// Worker threads, 0 for all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SweepArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let base = if self.paper_scale { ExperimentConfig::paper_scale() } else { ExperimentConfig::default() };
        let cfg = ExperimentConfig {
            n: self.n.unwrap_or(base.n),
            m: self.m,
            ell: self.ell,
            trials: self.trials.unwrap_or(base.trials),
            p_grid: self.p_grid.clone(),
            horizon: self.horizon,
            perturb_count: self.perturb_count,
            subroutine: self.sub.subroutine()?,
            beta: self.sub.beta()?,
            seed: self.seed,
            scaling: self.scaling.parse()?,
            jobs: self.jobs,
            ..base
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// A sweep CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    title: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numeric() {
                EXIT_NUMERIC
            } else {
                EXIT_CONFIG
            }
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Run(a) => run_once(a),
        Command::SweepReplacement(a) => {
            let table = run_experiment_replacement(&a.config()?)?;
            with_output(a.out.as_deref(), |w| table.write_csv(w))
        }
        Command::SweepDynamic(a) => {
            let table = run_experiment_dynamic(&a.config()?)?;
            with_output(a.out.as_deref(), |w| table.write_csv(w))
        }
        Command::Plot(a) => {
            let table = SweepTable::read_csv(open(&a.input)?)?;
            let title = a.title.unwrap_or_else(|| format!("mean ratio by {}", table.key_name));
            let svg = render_svg(&table, &title);
            with_output(a.out.as_deref(), |w| Ok(w.write_all(svg.as_bytes())?))
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn with_output(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn gen(a: GenArgs) -> Result<()> {
    let inst = match &a.spec {
        Some(path) => ApplicationSpec::from_json_str(
            &std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
        )?
        .build()?,
        None => {
            if a.n == 0 || a.m == Some(0) {
                return Err(Error::Config("n and m must be at least 1".into()));
            }
            if !(a.ell > 0.0 && a.ell < 1.0) {
                return Err(Error::Config(format!("ell must lie in (0, 1), got {}", a.ell)));
            }
            let (m, b) = gen_synthetic_matrix(a.m.unwrap_or(a.n), a.n, a.ell, a.seed);
            m.to_instance(&b)?
        }
    };
    with_output(a.out.as_deref(), |w| inst.write_json(w))
}

fn solve(a: SolveArgs) -> Result<()> {
    let inst = PackingInstance::read_json(open(&a.instance)?)?;
    let res = if inst.is_all_linear() { solve_lp(&inst)? } else { solve_separable_concave(&inst, a.tol, a.max_iters)? };
    let status = match res.status {
        SolveStatus::Optimal => serde_json::json!({"kind": "optimal"}),
        SolveStatus::Approximate { tol, converged, iterations, gap } => serde_json::json!({
            "kind": "approximate", "tol": tol, "converged": converged,
            "iterations": iterations, "gap": gap,
        }),
    };
    let doc = serde_json::json!({"opt_value": res.opt_value, "status": status, "x_star": res.x_star});
    with_output(a.out.as_deref(), |w| {
        serde_json::to_writer_pretty(&mut *w, &doc).map_err(|e| Error::Parse(e.to_string()))?;
        writeln!(w)?;
        Ok(())
    })
}

fn run_once(a: RunArgs) -> Result<()> {
    let inst = PackingInstance::read_json(open(&a.instance)?)?;
    let advice = match &a.advice {
        Some(path) => AdviceStream::read_csv(open(path)?)?,
        None => AdviceStream::zeros(inst.n()),
    };
    let mut sub = a.sub.subroutine()?.build(&inst.b)?;
    let trace =
        run_switching(&inst, &advice, sub.as_mut(), &a.sub.beta()?, Mixing { lambda: a.lambda, gamma: a.gamma })?;
    with_output(a.out.as_deref(), |w| trace.write_csv(w))
}
