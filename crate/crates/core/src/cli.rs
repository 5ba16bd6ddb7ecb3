//! Command-line front end shared by the `lhac` binary and the tests.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, ValueEnum};

use crate::active_set::NormKind;
use crate::data::{load_covariance, load_libsvm, LabelMapping};
use crate::error::{Error, Result};
use crate::fista::{fista_solve, FistaConfig};
use crate::loss::{LogisticLoss, SicsLoss, SmoothLoss, SquaredLoss};
use crate::solver::{solve, SolveStatus, SolverConfig, SolverTrace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LossKind {
    Logistic,
    Lasso,
    Sics,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Lhac,
    Fista,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    L2,
    Inf,
}

impl From<NormArg> for NormKind {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::L2 => NormKind::L2,
            NormArg::Inf => NormKind::Inf,
        }
    }
}

/// Solve an l1-regularized problem and write its convergence trace.
#[derive(Clone, Debug, Parser)]
#[command(name = "lhac", version)]
pub struct Cli {
    /// Smooth loss.
    #[arg(long, value_enum)]
    pub loss: LossKind,
    /// libsvm file for logistic/lasso, square CSV covariance for sics.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub lambda: f64,
    /// Stop when the subgradient norm drops below epsilon times its initial value.
    #[arg(long, default_value_t = 1e-5)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = SolverKind::Lhac)]
    pub solver: SolverKind,
    /// Correction pairs kept by L-BFGS.
    #[arg(long, default_value_t = 10)]
    pub memory: usize,
    /// Fraction of violating zeros added to the working set per iteration.
    #[arg(long, default_value_t = 0.05)]
    pub ws_fraction: f64,
    /// Cap on inner coordinate sweeps per subproblem.
    #[arg(long, default_value_t = 10)]
    pub sweeps_max: usize,
    /// Shuffle coordinates with this seed instead of sweeping in index order.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trace CSV destination.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = NormArg::L2)]
    pub norm: NormArg,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    /// Number of features, when the file does not mention the last ones.
    #[arg(long)]
    pub features: Option<usize>,
    /// Map this label to +1 and every other label to -1 (logistic only).
    #[arg(long, allow_hyphen_values = true)]
    pub positive_label: Option<f64>,
    /// Write the solution vector here, one value per line.
    #[arg(long)]
    pub solution_out: Option<PathBuf>,
}

/// Validated run parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub loss: LossKind,
    pub data: PathBuf,
    pub lambda: f64,
    pub epsilon: f64,
    pub solver: SolverKind,
    pub memory: usize,
    pub ws_fraction: f64,
    pub sweeps_max: usize,
    pub seed: Option<u64>,
    pub trace_out: Option<PathBuf>,
    pub solution_out: Option<PathBuf>,
    pub norm: NormKind,
    pub max_iterations: usize,
    pub features: Option<usize>,
    pub positive_label: Option<f64>,
}

impl TryFrom<Cli> for RunSpec {
    type Error = Error;

    fn try_from(c: Cli) -> Result<Self> {
        let spec = RunSpec {
            loss: c.loss,
            data: c.data,
            lambda: c.lambda,
            epsilon: c.epsilon,
            solver: c.solver,
            memory: c.memory,
            ws_fraction: c.ws_fraction,
            sweeps_max: c.sweeps_max,
            seed: c.seed,
            trace_out: c.trace_out,
            solution_out: c.solution_out,
            norm: c.norm.into(),
            max_iterations: c.max_iters,
            features: c.features,
            positive_label: c.positive_label,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl RunSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument("--lambda must be positive".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidArgument(
                "--epsilon must lie in (0, 1)".into(),
            ));
        }
        if self.solver == SolverKind::Fista && self.loss == LossKind::Sics {
            return Err(Error::InvalidArgument(
                "fista does not support the sics loss".into(),
            ));
        }
        if self.positive_label.is_some() && self.loss != LossKind::Logistic {
            return Err(Error::InvalidArgument(
                "--positive-label applies to logistic data only".into(),
            ));
        }
        self.solver_config().validate()
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            lambda: self.lambda,
            epsilon: self.epsilon,
            memory: self.memory,
            max_iterations: self.max_iterations,
            ws_fraction: self.ws_fraction,
            sweeps_max: self.sweeps_max,
            norm: self.norm,
            shuffle_seed: self.seed,
            ..SolverConfig::default()
        }
    }

    fn fista_config(&self) -> FistaConfig {
        FistaConfig {
            lambda: self.lambda,
            epsilon: self.epsilon,
            max_iterations: self.max_iterations,
            norm: self.norm,
            ..FistaConfig::default()
        }
    }
}

/// What a run produced.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub status: SolveStatus,
    pub objective: f64,
    pub iterations: usize,
    pub flops: u64,
    pub seconds: f64,
    pub w: Vec<f64>,
    pub trace: SolverTrace,
}

impl RunOutcome {
    /// `status,obj,iters,flops,seconds`
    pub fn summary_line(&self) -> String {
        format!(
            "{},{:e},{},{},{:.6}",
            self.status, self.objective, self.iterations, self.flops, self.seconds
        )
    }

    /// 0 converged, 3 iteration limit, 1 line-search failure.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            SolveStatus::Converged => 0,
            SolveStatus::MaxIterations => 3,
            SolveStatus::LineSearchFailure { .. } => 1,
        }
    }
}

fn solve_with<L: SmoothLoss>(loss: L, spec: &RunSpec) -> Result<RunOutcome> {
    let started = Instant::now();
    match spec.solver {
        SolverKind::Lhac => {
            let sol = solve(loss, &spec.solver_config())?;
            Ok(RunOutcome {
                status: sol.status,
                objective: sol.objective,
                iterations: sol.iterations,
                flops: sol.flops.total,
                seconds: started.elapsed().as_secs_f64(),
                w: sol.w,
                trace: sol.trace,
            })
        }
        SolverKind::Fista => {
            let sol = fista_solve(&loss, &spec.fista_config())?;
            Ok(RunOutcome {
                status: sol.status,
                objective: sol.objective,
                iterations: sol.iterations,
                flops: 0,
                seconds: started.elapsed().as_secs_f64(),
                w: sol.w,
                trace: sol.trace,
            })
        }
    }
}

/// Loads the data, solves, and writes the trace and solution files.
pub fn run(spec: &RunSpec) -> Result<RunOutcome> {
    spec.validate()?;
    let outcome = match spec.loss {
        LossKind::Logistic => {
            let mapping = spec
                .positive_label
                .map_or(LabelMapping::PlusMinusOne, LabelMapping::Positive);
            let ds = load_libsvm(&spec.data, spec.features, mapping)?;
            solve_with(LogisticLoss::new(ds.data, ds.labels)?, spec)?
        }
        LossKind::Lasso => {
            let ds = load_libsvm(&spec.data, spec.features, LabelMapping::Real)?;
            solve_with(SquaredLoss::new(ds.data, ds.labels)?, spec)?
        }
        LossKind::Sics => solve_with(SicsLoss::new(load_covariance(&spec.data)?)?, spec)?,
    };
    if let Some(path) = &spec.trace_out {
        outcome
            .trace
            .write_csv(BufWriter::new(File::create(path)?), true)?;
    }
    if let Some(path) = &spec.solution_out {
        let mut out = BufWriter::new(File::create(path)?);
        for v in &outcome.w {
            writeln!(out, "{v}")?;
        }
        out.flush()?;
    }
    Ok(outcome)
}

/// Parses `args`, runs, prints the summary line and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let spec = match RunSpec::try_from(cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match run(&spec) {
        Ok(outcome) => {
            if let SolveStatus::LineSearchFailure {
                iteration,
                delta,
                objective,
            } = &outcome.status
            {
                eprintln!(
                    "error: line search failed at iteration {iteration} (delta = {delta:e}, objective = {objective:e})"
                );
            }
            println!("{}", outcome.summary_line());
            outcome.exit_code()
        }
        Err(e @ Error::InvalidArgument(_)) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
