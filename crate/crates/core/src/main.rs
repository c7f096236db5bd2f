use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use qlandscape::harness::{
    emit_bounds, emit_expressivity, emit_landscape, emit_runs, landscape_grid, run_experiment, run_expressivity,
    verify_bounds, AnsatzEntry, Experiment, ExperimentConfig, Format,
};
use qlandscape::optimize::radius_grid;
use qlandscape::pqc::AnsatzFamily;
use qlandscape::samples::SampleKind;
use qlandscape::{Error, Result};

#[derive(Parser)]
#[command(name = "qlandscape", version, about = "Loss-landscape experiments for learning unitaries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the closed-form bounds against sampled operators.
    VerifyBounds {
        #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: Format,
    },
    /// Two-parameter single-qubit loss grids for both sample kinds.
    Landscape {
        #[arg(long, default_value_t = 101)]
        resolution: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: Format,
    },
    /// Distance from the start point to a global minimum.
    Distance(ExperimentArgs),
    /// Loss improvement at the separable minimum radius.
    Improvement(ExperimentArgs),
    /// Improvement across partially entangled samples.
    NmeSweep(ExperimentArgs),
    /// KL-divergence expressivity of each ansatz.
    Expressivity(ExperimentArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment config; inline flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    ansatz: Option<Vec<AnsatzFamily>>,
    #[arg(long, value_delimiter = ',')]
    layers: Option<Vec<usize>>,
    #[arg(long)]
    qubits: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    /// `start:stop:count`, inclusive.
    #[arg(long)]
    radii: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Five qubits and layers 1,4,8,12,16 as the starting point.
    #[arg(long)]
    paper_scale: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
}

fn parse_radii(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::InvalidArgument(format!("--radii expects start:stop:count, got '{s}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    radius_grid(start, stop, count)
}

fn build_config(experiment: Experiment, a: &ExperimentArgs) -> Result<ExperimentConfig> {
    let mut c = match &a.config {
        Some(p) => {
            let c = ExperimentConfig::from_path(p)?;
            if c.experiment != experiment {
                return Err(Error::InvalidArgument(format!(
                    "config is for '{}', not '{}'",
                    c.experiment.as_str(),
                    experiment.as_str()
                )));
            }
            c
        }
        None if a.paper_scale => ExperimentConfig::paper_scale(experiment, 0),
        None => ExperimentConfig::desk_scale(experiment, 0),
    };
    if let Some(q) = a.qubits {
        c.qubits = q;
    }
    if let Some(r) = a.reps {
        c.repetitions = r;
    }
    if let Some(s) = a.seed {
        c.master_seed = s;
    }
    if let Some(r) = &a.radii {
        c.radii = parse_radii(r)?;
    }
    let layers = a.layers.clone();
    if let Some(fams) = &a.ansatz {
        let default_layers = c.ansatz.first().map(|e| e.layers.clone()).unwrap_or_else(|| vec![1]);
        c.ansatz = fams
            .iter()
            .map(|&family| AnsatzEntry { family, layers: layers.clone().unwrap_or_else(|| default_layers.clone()) })
            .collect();
    } else if let Some(l) = layers {
        c.ansatz.iter_mut().for_each(|e| e.layers = l.clone());
    }
    c.validate()?;
    Ok(c)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::VerifyBounds { dims, trials, seed, out, format } => {
            let report = verify_bounds(&dims, trials, seed)?;
            emit_bounds(&report, format, out.as_deref())?;
            Ok(report.all_passed())
        }
        Command::Landscape { resolution, out, format } => {
            let grids = [SampleKind::Separable, SampleKind::MaxEntangled]
                .into_iter()
                .map(|k| landscape_grid(resolution, k))
                .collect::<Result<Vec<_>>>()?;
            emit_landscape(&grids, format, out.as_deref())?;
            Ok(true)
        }
        Command::Expressivity(a) => {
            let c = build_config(Experiment::Expressivity, &a)?;
            let recs = run_expressivity(&c)?;
            emit_expressivity(&recs, a.format, a.out.as_deref().or(c.output.as_deref()))?;
            Ok(true)
        }
        Command::Distance(a) => sweep(Experiment::Distance, a),
        Command::Improvement(a) => sweep(Experiment::Improvement, a),
        Command::NmeSweep(a) => sweep(Experiment::NmeSweep, a),
    }
}

fn sweep(experiment: Experiment, a: ExperimentArgs) -> Result<bool> {
    let c = build_config(experiment, &a)?;
    let recs = run_experiment(&c)?;
    emit_runs(&recs, a.format, a.out.as_deref().or(c.output.as_deref()))?;
    Ok(recs.iter().all(|r| r.error.is_none()))
}

fn report_error(kind: &str, message: &str) {
    eprintln!("{}", json!({ "error": { "kind": kind, "message": message } }));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report_error("usage", e.to_string().trim());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            report_error("check_failed", "one or more checks or runs failed; see the output for details");
            ExitCode::from(3)
        }
        Err(e) => {
            report_error(e.kind(), &e.to_string());
            ExitCode::FAILURE
        }
    }
}
