use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use vopt::error::Result;
use vopt::harness::{
    run_props, run_suite, write_props, write_props_file, write_report, ExperimentConfig,
    OutputFormat, Regularizers, Task,
};
use vopt::optimize::{ShrinkSchedule, StopRule};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TaskArg {
    Lasso,
    Fused,
    Svm,
    Binary,
    Props,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Lasso => Task::Lasso,
            TaskArg::Fused => Task::Fused,
            TaskArg::Svm => Task::Svm,
            TaskArg::Binary => Task::Binary,
            TaskArg::Props => Task::Props,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// Runs variational-optimization experiments on synthetic problems and
/// compares them against reference solvers.
#[derive(Debug, Parser)]
#[command(name = "vopt", version)]
struct Cli {
    task: TaskArg,
    #[arg(long)]
    dim: Option<usize>,
    /// Training points; 10·dim for the regression tasks by default.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    repeats: Option<usize>,
    /// Initial smoothing level.
    #[arg(long)]
    sigma0: Option<f64>,
    /// Factor applied to the smoothing level at each shrink.
    #[arg(long)]
    shrink: Option<f64>,
    #[arg(long)]
    shrink_every: Option<usize>,
    #[arg(long)]
    sigma_floor: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Optimizer iterations; ascent steps per restart for `binary`.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Initial Huber half-width (svm).
    #[arg(long)]
    huber0: Option<f64>,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    lambda2: Option<f64>,
    /// SVM cost coefficient.
    #[arg(long)]
    cost: Option<f64>,
    /// Quasi-Newton memory.
    #[arg(long)]
    memory: Option<usize>,
    /// Random restarts for `binary`.
    #[arg(long)]
    restarts: Option<usize>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig> {
    let task: Task = cli.task.into();
    let mut cfg = ExperimentConfig::for_task(task);
    if let Some(d) = cli.dim {
        cfg.dim = d;
        if matches!(task, Task::Lasso | Task::Fused) {
            cfg.n_points = 10 * d;
        }
    }
    if let Some(n) = cli.n {
        cfg.n_points = n;
    }
    cfg.seed = cli.seed;
    if let Some(r) = cli.repeats {
        cfg.repeats = r;
    }
    let s = cfg.schedule;
    cfg.schedule = ShrinkSchedule::new(
        cli.sigma0.unwrap_or(s.initial),
        cli.shrink.unwrap_or(s.factor),
        cli.shrink_every.unwrap_or(s.every),
        cli.sigma_floor.unwrap_or(s.floor),
    )?;
    if let Some(h) = cli.huber0 {
        let hs = cfg.huber_schedule;
        cfg.huber_schedule = ShrinkSchedule::new(h, hs.factor, hs.every, hs.floor)?;
    }
    cfg.stop = StopRule::new(
        cli.tol.unwrap_or(cfg.stop.rel_change_tol),
        cli.max_iters.unwrap_or(cfg.stop.max_iters),
    )?;
    if cli.lambda1.is_some() || cli.lambda2.is_some() {
        cfg.regularizers = Regularizers::Lasso {
            lambda1: cli.lambda1.unwrap_or(0.0),
            lambda2: cli.lambda2.unwrap_or(0.0),
        };
    }
    if let Some(c) = cli.cost {
        if cfg.regularizers != Regularizers::Protocol {
            return Err(vopt::error::VoError::Domain(
                "--cost cannot be combined with --lambda1/--lambda2".into(),
            ));
        }
        cfg.regularizers = Regularizers::Cost(c);
    }
    if let Some(m) = cli.memory {
        cfg.memory = m;
    }
    if let Some(r) = cli.restarts {
        cfg.restarts = r;
    }
    cfg.output_path = cli.out.clone();
    cfg.format = match cli.format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Json => OutputFormat::Json,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("vopt: {e}");
            return ExitCode::from(1);
        }
    };
    match run(&cfg) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("vopt: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cfg: &ExperimentConfig) -> Result<u8> {
    if cfg.task == Task::Props {
        let outcome = run_props(cfg)?;
        match &cfg.output_path {
            Some(p) => write_props_file(&outcome, p, cfg.format)?,
            None => write_props(&outcome, cfg.format, std::io::stdout().lock())?,
        }
        eprintln!(
            "props: {} passed, {} failed",
            outcome.passed(),
            outcome.failed()
        );
        return Ok(if outcome.all_passed() { 0 } else { 3 });
    }
    let outcome = run_suite(cfg)?;
    match &cfg.output_path {
        Some(p) => write_report(&outcome.rows, p, cfg.format)?,
        None => match cfg.format {
            OutputFormat::Csv => vopt::harness::write_csv(&outcome.rows, std::io::stdout().lock())?,
            OutputFormat::Json => {
                vopt::harness::write_json(&outcome.rows, std::io::stdout().lock())?
            }
        },
    }
    for f in &outcome.failures {
        eprintln!(
            "vopt: {} failed on seed {}: {}",
            f.solver, f.seed, f.message
        );
    }
    Ok(if outcome.all_completed() { 0 } else { 2 })
}
