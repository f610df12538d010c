use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use curvelab::measures::{read_csv, write_csv};
use curvelab::{audit_dimension, SamplingPlan, DEFAULT_ATOM_BUDGET};
use curvelab_cli::config::MeasureSource;
use curvelab_cli::output::Status;
use curvelab_cli::{report, run, ExperimentConfig, RunError};

#[derive(Parser)]
#[command(name = "lab", version, about = "Fourier restriction experiments for fractal measures on curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and write its results directory.
    Run { config: PathBuf },
    /// Tabulate finished runs.
    Report { dirs: Vec<PathBuf> },
    /// Build a measure from a JSON spec and write it as CSV.
    SynthMeasure {
        spec: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ATOM_BUDGET)]
        atom_budget: usize,
    },
    /// Ball-growth audit of a measure CSV.
    AuditDim {
        measure: PathBuf,
        #[arg(long)]
        alpha: f64,
        /// Side of the grid of ball centers.
        #[arg(long, default_value_t = 64)]
        grid: usize,
    },
}

fn init_threads() -> Result<(), RunError> {
    let Ok(v) = std::env::var("LAB_THREADS") else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| RunError::config(format!("LAB_THREADS = {v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| RunError::config(e.to_string()))
}

fn read(path: &PathBuf) -> Result<String, RunError> {
    std::fs::read_to_string(path).map_err(|e| RunError::config(format!("{}: {e}", path.display())))
}

/// Accepts a tagged measure source or a bare Cantor / sharp-example spec.
fn parse_spec(text: &str) -> Result<MeasureSource, RunError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| RunError::config(format!("bad spec: {e}")))?;
    let parsed = if value.get("kind").is_some() {
        serde_json::from_value::<MeasureSource>(value)
    } else if value.get("branches_x").is_some() {
        serde_json::from_value(value).map(MeasureSource::CantorSpec)
    } else {
        serde_json::from_value(value).map(MeasureSource::Sharp)
    };
    let source = parsed.map_err(|e| RunError::config(format!("bad spec: {e}")))?;
    if let MeasureSource::Cantor { depth: None, .. } = source {
        return Err(RunError::config("a cantor spec needs an explicit depth here"));
    }
    Ok(source)
}

fn dispatch(cmd: Command) -> Result<u8, RunError> {
    match cmd {
        Command::Run { config } => {
            let cfg = ExperimentConfig::from_json(&read(&config)?)?;
            let m = run(&cfg)?;
            let v = m.verdict.as_ref().expect("finished runs carry a verdict");
            let fmt = |x: Option<f64>| x.map_or("-".to_string(), |x| format!("{x:.4}"));
            println!(
                "{} {}: measured {} predicted {} converged {} -> {}",
                if m.status == Status::Pass { "PASS" } else { "FAIL" },
                m.experiment,
                fmt(v.measured_exponent),
                fmt(v.predicted_exponent),
                m.all_converged,
                cfg.output_dir.display()
            );
            Ok(if m.status == Status::Pass { 0 } else { 1 })
        }
        Command::Report { dirs } => {
            print!("{}", curvelab_cli::report::render(&report(&dirs)?));
            Ok(0)
        }
        Command::SynthMeasure { spec, output, atom_budget } => {
            let source = parse_spec(&read(&spec)?)?;
            source.validate(1.0, atom_budget)?;
            let mu = source.build(1.0, atom_budget)?;
            if mu.atom_count() > atom_budget as u128 {
                return Err(RunError::Resource(format!(
                    "{} atoms exceed the budget {atom_budget}",
                    mu.atom_count()
                )));
            }
            let file = std::fs::File::create(&output)
                .map_err(|e| RunError::config(format!("{}: {e}", output.display())))?;
            write_csv(&mu, std::io::BufWriter::new(file))?;
            eprintln!("wrote {} atoms (alpha {}) to {}", mu.atom_count(), mu.declared_alpha(), output.display());
            Ok(0)
        }
        Command::AuditDim { measure, alpha, grid } => {
            let file = std::fs::File::open(&measure)
                .map_err(|e| RunError::config(format!("{}: {e}", measure.display())))?;
            let mu = read_csv(std::io::BufReader::new(file))?;
            let plan = SamplingPlan { grid, ..SamplingPlan::default() };
            let rep = audit_dimension(&mu, alpha, &plan)?;
            println!("{}", serde_json::to_string_pretty(&rep).map_err(|e| RunError::Io(e.into()))?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = init_threads().and_then(|_| dispatch(cli.command)).unwrap_or_else(|e| {
        eprintln!("lab: {e}");
        e.exit_code()
    });
    ExitCode::from(code)
}
