use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dpcov::harness::{run_plan, write_outputs, DataSource, ExperimentPlan, MechanismKind, Sweep, SweepAxis};
use dpcov::{Error, PrivacyBudget};

#[derive(Parser)]
#[command(name = "dpcov", version, about = "Differentially private covariance estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run mechanisms on a dataset (optionally over a sweep) and write results.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// gauss, lap, separate, separate-pure, adaptive, adaptive-pure or zero
    /// (comma separated or repeated).
    #[arg(long, required = true, value_delimiter = ',')]
    mechanism: Vec<String>,
    /// CSV file with one point per row; rescaled so its radius lies in (1/2, 1].
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    input: Option<PathBuf>,
    /// Synthetic data, e.g. n=1000,d=64,N=4,s=3 (seed=K pins the data seed).
    #[arg(long)]
    synthetic: Option<String>,
    /// zCDP budget.
    #[arg(long, conflicts_with = "eps")]
    rho: Option<f64>,
    /// Pure-DP budget.
    #[arg(long)]
    eps: Option<f64>,
    /// delta used to report the (eps, delta) equivalent of a zCDP budget.
    #[arg(long, default_value_t = 1e-10)]
    delta: f64,
    #[arg(long, default_value_t = 0.05)]
    beta: f64,
    #[arg(long, default_value_t = 50)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// AXIS=v1,v2,... with AXIS one of d, n, N, rho, eps.
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    /// Replace all noise by zero (testing only; output is not private).
    #[arg(long)]
    zero_noise: bool,
    /// Constant in the Laplace concentration bounds.
    #[arg(long, default_value_t = 4.0)]
    lap_constant: f64,
    /// Thresholds are searched down to 2^-E at most.
    #[arg(long, default_value_t = 4096)]
    tau_cap_exponent: i32,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Fill the elapsed_ms column.
    #[arg(long)]
    timing: bool,
    /// Print the adaptive budget split of each run to stderr.
    #[arg(long)]
    verbose: bool,
}

fn plan_from(args: &RunArgs) -> Result<ExperimentPlan, Error> {
    let mechanisms = args.mechanism.iter().map(|m| m.parse()).collect::<Result<Vec<MechanismKind>, _>>()?;
    let source = match (&args.input, &args.synthetic) {
        (Some(p), _) => DataSource::Csv(p.clone()),
        (None, Some(s)) => DataSource::Synthetic(DataSource::parse_synthetic(s)?),
        (None, None) => unreachable!("clap requires one source"),
    };
    let sweep: Option<Sweep> = args.sweep.as_deref().map(str::parse).transpose()?;
    let budget = match (args.rho, args.eps, &sweep) {
        (Some(r), _, _) => PrivacyBudget::zcdp(r)?,
        (_, Some(e), _) => PrivacyBudget::pure(e)?,
        (None, None, Some(sw)) if sw.axis == SweepAxis::Rho => PrivacyBudget::zcdp(sw.values[0])?,
        (None, None, Some(sw)) if sw.axis == SweepAxis::Eps => PrivacyBudget::pure(sw.values[0])?,
        _ => return Err(Error::InvalidParameter("one of --rho or --eps is required".into())),
    };
    let mut plan = ExperimentPlan::new(mechanisms, source, budget);
    plan.delta = args.delta;
    plan.beta = args.beta;
    plan.reps = args.reps;
    plan.sweep = sweep;
    plan.seed = args.seed;
    plan.zero_noise = args.zero_noise;
    plan.lap_constant = args.lap_constant;
    plan.tau_cap_exponent = args.tau_cap_exponent;
    plan.workers = args.workers;
    plan.timing = args.timing;
    Ok(plan)
}

fn run(args: RunArgs) -> Result<(), Error> {
    let plan = plan_from(&args)?;
    let output = run_plan(&plan)?;
    if args.verbose {
        let mut err = std::io::stderr().lock();
        for r in output.rows.iter().filter(|r| r.details.is_some()) {
            let det = r.details.as_ref().unwrap();
            let split: Vec<String> = det.ledger.entries.iter().map(|(k, b)| format!("{k}={}", b.value)).collect();
            writeln!(
                err,
                "{} d={} n={} rep={}: radius 2^{} tau 2^{} branch {} ledger [{}]",
                r.mechanism,
                r.d,
                r.n,
                r.rep,
                det.radius_exponent,
                det.tau_exponent,
                det.branch,
                split.join(", ")
            )?;
        }
    }
    write_outputs(&plan, &output, &args.out)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{:<14} {:>6} {:>7} {:>4} {:>12} {:>14} {:>14}", "mechanism", "d", "n", "N", "budget", "mean_error", "std_error")?;
    for s in &output.summary {
        writeln!(
            out,
            "{:<14} {:>6} {:>7} {:>4} {:>12.6} {:>14.6e} {:>14.6e}",
            s.mechanism.name(),
            s.d,
            s.n,
            s.bins.map(|b| b.to_string()).unwrap_or_else(|| "-".into()),
            s.budget_value,
            s.mean_error,
            s.std_error
        )?;
    }
    writeln!(out, "wrote {}", args.out.display())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
