use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qmm_core::fedosov::Fedosov;
use qmm_core::pipeline::{auto_weyl_order, run_pipeline, PipelineOptions, Target, DEFAULT_CHECK_WEYL_ORDER};
use qmm_core::scenario::{load_scenario, Overrides, Scenario, Stage};
use qmm_core::{Convention, Exec};

/// Momentum maps, star products and their anomalies on symplectic vector spaces.
#[derive(Parser)]
#[command(name = "qmm", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Series order N at which identities are checked.
    #[arg(long, global = true, value_name = "N")]
    order: Option<usize>,
    /// Weyl algebra truncation for the Fedosov construction.
    #[arg(long, global = true, value_name = "N_W")]
    weyl_order: Option<u32>,
    /// Monomial degree bound D for Hamiltonian and centrality checks.
    #[arg(long, global = true, value_name = "D")]
    degree: Option<u32>,
    #[arg(long, global = true, value_enum)]
    convention: Option<ConventionArg>,
    /// Exit with status 1 when an existence answer is negative.
    #[arg(long, global = true)]
    expect_exists: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Run every stage on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    /// Show stage timings in text output.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    RealHalf,
    MinusIHalf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    G,
    Gtilde,
    Ghat,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate a scenario.
    Validate { file: PathBuf },
    /// Validate or solve the classical momentum map.
    Momentum { file: PathBuf },
    /// Compute Sigma, its class and the classical central extension.
    Classify { file: PathBuf },
    /// Quantum momentum maps over g, its classical extension, or the quantum extension.
    Quantize {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = TargetArg::G)]
        target: TargetArg,
    },
    /// Build the Fedosov connection; with --check, verify its identities.
    Fedosov {
        file: PathBuf,
        #[arg(long)]
        check: bool,
    },
    /// Run every stage listed in the scenario.
    Report { file: PathBuf },
}

impl Command {
    fn file(&self) -> &PathBuf {
        match self {
            Command::Validate { file }
            | Command::Momentum { file }
            | Command::Classify { file }
            | Command::Quantize { file, .. }
            | Command::Fedosov { file, .. }
            | Command::Report { file } => file,
        }
    }
}

fn load(cli: &Cli) -> Result<Scenario, ExitCode> {
    let g = &cli.global;
    let overrides = Overrides {
        order: g.order,
        weyl_order: g.weyl_order,
        degree: g.degree,
        convention: g.convention.map(|c| match c {
            ConventionArg::RealHalf => Convention::RealHalf,
            ConventionArg::MinusIHalf => Convention::MinusIHalf,
        }),
    };
    load_scenario(cli.command.file()).and_then(|s| s.with_overrides(&overrides)).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(if e.is_input_error() { 2 } else { 1 })
    })
}

/// Connection form summary without the identity checks.
fn fedosov_summary(sc: &Scenario, exec: Exec, format: Format) -> ExitCode {
    let n_w = sc.requested_weyl_order().unwrap_or(if sc.needs_fedosov() {
        auto_weyl_order(sc)
    } else {
        DEFAULT_CHECK_WEYL_ORDER
    });
    let fed = match Fedosov::new(sc.fedosov_config_with(n_w, exec)) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match format {
        Format::Json => {
            let v = serde_json::json!({
                "scenario": sc.name,
                "weyl_order": n_w,
                "r_terms": fed.r().len(),
                "r": fed.r().to_string(),
            });
            println!("{}", serde_json::to_string_pretty(&v).expect("serializes"));
        }
        Format::Text => {
            println!("scenario: {}\n  weyl_order: {n_w}\n  r_terms: {}\n  r = {}", sc.name, fed.r().len(), fed.r());
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let sc = match load(&cli) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let exec = if cli.global.sequential { Exec::Sequential } else { Exec::default() };
    let mut opts = PipelineOptions { exec, expect_exists: cli.global.expect_exists, ..PipelineOptions::default() };
    opts.stages = match &cli.command {
        Command::Validate { .. } => Some(vec![Stage::Validate]),
        Command::Momentum { .. } => Some(vec![Stage::Momentum]),
        Command::Classify { .. } => Some(vec![Stage::Classify]),
        Command::Quantize { target, .. } => {
            let t = match target {
                TargetArg::G => Target::G,
                TargetArg::Gtilde => Target::GTilde,
                TargetArg::Ghat => Target::GHat,
            };
            opts.targets = BTreeSet::from([t]);
            Some(vec![t.stage()])
        }
        Command::Fedosov { check: true, .. } => Some(vec![Stage::Fedosov]),
        Command::Fedosov { check: false, .. } => return fedosov_summary(&sc, exec, cli.global.format),
        Command::Report { .. } => None,
    };
    let report = run_pipeline(&sc, &opts);
    match cli.global.format {
        Format::Json => print!("{}", report.to_json()),
        Format::Text => print!("{}", report.to_text(cli.global.timing)),
    }
    ExitCode::from(report.exit_code() as u8)
}
