use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use lossfair::data::{load_csv, write_csv, CsvSchema};
use lossfair::harness::{audit, emit_results, run_experiment, ExperimentConfig, MixtureChoice, Variant};
use lossfair::model_io::read_model;
use lossfair::synthgen::{gen_eop_dataset_with, gen_sp_dataset, SynthConfig, DEFAULT_PHI};
use lossfair::{Error, Execution};

const EXIT_CONFIG: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_ALL_FAILED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "lossfair",
    version,
    about = "Fair and loss-averse updates of linear classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded sweep described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Run every job on the calling thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Write a synthetic dataset as CSV, plus a matching `.schema.toml`.
    Gen {
        #[arg(long, value_enum)]
        dataset: SynthKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Rotation angle for the SP generator, in radians.
        #[arg(long, default_value_t = DEFAULT_PHI, allow_negative_numbers = true)]
        phi: f64,
        #[arg(long, value_enum, default_value_t = Mixture::Calibrated)]
        mixture: Mixture,
    },
    /// Compare an updated model with its status quo on a dataset.
    Audit {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        sqo: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// Largest benefit-rate gap still counted as nondiscriminatory.
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    Sp,
    Eop,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mixture {
    Calibrated,
    Listed,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::InvalidParameter(_) | Error::Schema(_) => EXIT_CONFIG,
            Error::SolverFailure(_) => EXIT_ALL_FAILED,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Run {
            config,
            output_dir,
            sequential,
        } => run(&config, output_dir, sequential),
        Command::Gen {
            dataset,
            n,
            seed,
            out,
            phi,
            mixture,
        } => generate(dataset, n, seed, &out, phi, mixture),
        Command::Audit {
            model,
            sqo,
            data,
            schema,
            tolerance,
            json,
        } => audit_cmd(&model, &sqo, &data, &schema, tolerance, json),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"))
}

fn run(config: &Path, output_dir: Option<PathBuf>, sequential: bool) -> Result<(), Failure> {
    let mut cfg = ExperimentConfig::from_toml_file(config)?;
    if let Some(dir) = output_dir {
        cfg.output_dir = dir;
    }
    if sequential {
        cfg.execution = Execution::Sequential;
    }
    let result = run_experiment(&cfg)?;
    emit_results(&result, &cfg.output_dir)?;

    println!(
        "{} ({}), {} seeds, {} cells, {} optimal, {:.1}s",
        result.dataset_name,
        result.kind,
        cfg.seeds.len(),
        result.records.len(),
        result.optimal_cells(),
        result.elapsed_seconds
    );
    println!(
        "{:>6}  {:<13} {:>5}  {:>8}  {:>8}  {:>8}  {:>9}",
        "m", "variant", "seeds", "accuracy", "B(z=0)", "B(z=1)", "disparity"
    );
    for a in &result.aggregates {
        println!(
            "{:>6}  {:<13} {:>5}  {:>8}  {:>8}  {:>8}  {:>9}",
            a.m,
            a.variant.as_str(),
            a.n_seeds,
            fmt_opt(a.accuracy_mean),
            fmt_opt(a.benefit_z0_mean),
            fmt_opt(a.benefit_z1_mean),
            fmt_opt(a.disparity_mean)
        );
    }
    let la_noncompliant: usize = result
        .aggregates
        .iter()
        .filter(|a| a.variant == Variant::LossAverse)
        .map(|a| a.n_seeds - a.n_compliant.unwrap_or(0))
        .sum();
    if la_noncompliant > 0 {
        println!("{la_noncompliant} loss-averse cells had no qualifying gamma");
    }
    println!("results written to {}", cfg.output_dir.display());

    if result.all_cells_failed() {
        return Err(Failure {
            code: EXIT_ALL_FAILED,
            message: "no cell reached an optimal solution".into(),
        });
    }
    Ok(())
}

fn generate(kind: SynthKind, n: usize, seed: u64, out: &Path, phi: f64, mixture: Mixture) -> Result<(), Failure> {
    let cfg = SynthConfig { n, seed, phi };
    let ds = match kind {
        SynthKind::Sp => gen_sp_dataset(&cfg)?,
        SynthKind::Eop => {
            let mix = match mixture {
                Mixture::Calibrated => MixtureChoice::Calibrated,
                Mixture::Listed => MixtureChoice::Listed,
            };
            gen_eop_dataset_with(&cfg, &mix.mixture())?
        }
    };
    write_csv(&ds, out)?;
    let schema_path = out.with_extension("schema.toml");
    std::fs::write(&schema_path, CsvSchema::for_export(&ds).to_toml_string()).map_err(|e| Failure {
        code: EXIT_DATA,
        message: format!("{}: {e}", schema_path.display()),
    })?;
    println!(
        "wrote {} rows to {} (schema {})",
        ds.len(),
        out.display(),
        schema_path.display()
    );
    Ok(())
}

fn audit_cmd(model: &Path, sqo: &Path, data: &Path, schema: &Path, tolerance: f64, json: bool) -> Result<(), Failure> {
    let updated = read_model(model)?;
    let status_quo = read_model(sqo)?;
    let schema = CsvSchema::from_toml_file(schema)?;
    let ds = load_csv(data, &schema)?;
    let report = audit(&updated.model, &status_quo.model, &ds, tolerance)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serialises"));
        return Ok(());
    }
    println!("rows: {}", report.rows);
    println!(
        "accuracy: status quo {:.4}, updated {:.4}",
        report.status_quo_accuracy, report.updated_accuracy
    );
    for k in &report.kinds {
        let verdict = |ok: bool| if ok { "yes" } else { "no" };
        println!(
            "{}: status quo ({:.4}, {:.4}) -> updated ({:.4}, {:.4}); disparity {:.4} -> {:.4}",
            k.kind,
            k.status_quo_benefits[0],
            k.status_quo_benefits[1],
            k.updated_benefits[0],
            k.updated_benefits[1],
            k.status_quo_disparity,
            k.updated_disparity
        );
        println!(
            "  nondiscriminatory (gap <= {}): {}; loss-averse: {}",
            report.disparity_tolerance,
            verdict(k.nondiscriminatory),
            verdict(k.loss_averse)
        );
    }
    Ok(())
}
