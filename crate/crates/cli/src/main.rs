use clap::{Parser, Subcommand, ValueEnum};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use cavity_ps_cli::config::{parse_alpha, parse_atoms, SweepConfig};
use cavity_ps_cli::jobs::{
    fig4_pairs, run_state_dump, run_sweep, run_wigner_jobs, with_jobs, write_output,
    SweepColumns, FIG4_COUPLINGS,
};
use cavity_ps_cli::{acceptance, CliError};

/// Conditional cavity-field state engineering: sweeps, Wigner grids, state
/// dumps and acceptance checks for the ground-state post-selection protocol.
#[derive(Parser)]
#[command(name = "cavity-ps", version, about)]
struct Cli {
    /// Configuration file (flat key = value); flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Coherent amplitude RE or RE,IM.
    #[arg(long, global = true)]
    alpha: Option<String>,

    /// Comma-separated post-selected atom counts.
    #[arg(long, global = true)]
    atoms: Option<String>,

    #[arg(long, global = true, allow_negative_numbers = true)]
    r_min: Option<f64>,

    #[arg(long, global = true, allow_negative_numbers = true)]
    r_max: Option<f64>,

    #[arg(long, global = true, allow_negative_numbers = true)]
    r_step: Option<f64>,

    /// Quadrature analysis phase in radians.
    #[arg(long, global = true, allow_negative_numbers = true)]
    phi: Option<f64>,

    /// Fock cutoff override (defaults to a policy based on alpha).
    #[arg(long, global = true)]
    cutoff: Option<usize>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Reference figure preset.
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,

    /// Worker threads (0 = runtime default).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

#[derive(Subcommand)]
enum Command {
    /// Metrics table over the coupling grid: one CSV row per (r, N).
    Sweep,
    /// Success-probability curve P_N(r).
    Prob,
    /// Wigner grid CSV + JSON summary per (r, N) pair.
    Wigner {
        /// Couplings to evaluate (defaults to the fig4 set).
        #[arg(long, value_delimiter = ',')]
        r: Vec<f64>,
        /// Atom counts to evaluate (defaults to the configured atoms).
        #[arg(long, value_delimiter = ',')]
        n: Vec<u32>,
    },
    /// Dump the conditioned state as JSON.
    State {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        n: u32,
    },
    /// Run the acceptance checks and write a machine-readable report.
    Acceptance {
        /// Report file name inside the output directory.
        #[arg(long, default_value = "acceptance_report.json")]
        report: String,
    },
}

fn load_config(cli: &Cli) -> Result<SweepConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
            SweepConfig::parse(&text)?
        }
        None => SweepConfig::default(),
    };
    if let Some(alpha) = &cli.alpha {
        config.alpha = parse_alpha(alpha)?;
    }
    if let Some(atoms) = &cli.atoms {
        config.atoms = parse_atoms(atoms)?;
    }
    if let Some(v) = cli.r_min {
        config.r_min = v;
    }
    if let Some(v) = cli.r_max {
        config.r_max = v;
    }
    if let Some(v) = cli.r_step {
        config.r_step = v;
    }
    if let Some(v) = cli.phi {
        config.phi = v;
    }
    if let Some(v) = cli.cutoff {
        config.cutoff = Some(v);
    }
    if let Some(dir) = &cli.out {
        config.out_dir = dir.clone();
    }
    if let Some(v) = cli.jobs {
        config.jobs = v;
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = load_config(cli)?;
    let preset = cli.preset;
    with_jobs(config.jobs, || -> Result<(), CliError> {
        match &cli.command {
            Command::Sweep => {
                let (columns, file) = match preset {
                    None => (SweepColumns::Full, "sweep_metrics.csv"),
                    Some(Preset::Fig1) => (SweepColumns::Probability, "fig1_success_probability.csv"),
                    Some(Preset::Fig2) => (SweepColumns::Squeezing, "fig2_squeezing.csv"),
                    Some(Preset::Fig3) => (SweepColumns::Mandel, "fig3_mandel.csv"),
                    Some(Preset::Fig4) => {
                        return Err(CliError::Config(
                            "preset fig4 is a wigner batch; use the wigner subcommand".into(),
                        ))
                    }
                };
                let path = run_sweep(&config, columns, file)?;
                println!("wrote {}", path.display());
            }
            Command::Prob => {
                if matches!(preset, Some(p) if p != Preset::Fig1) {
                    return Err(CliError::Config("prob supports only preset fig1".into()));
                }
                let path =
                    run_sweep(&config, SweepColumns::Probability, "success_probability.csv")?;
                println!("wrote {}", path.display());
            }
            Command::Wigner { r, n } => {
                let (pairs, prefix): (Vec<(f64, u32)>, &str) = match preset {
                    Some(Preset::Fig4) => (fig4_pairs(), "fig4"),
                    Some(_) => {
                        return Err(CliError::Config(
                            "wigner supports only preset fig4".into(),
                        ))
                    }
                    None => {
                        let rs = if r.is_empty() { FIG4_COUPLINGS.to_vec() } else { r.clone() };
                        let ns = if n.is_empty() { config.atoms.clone() } else { n.clone() };
                        (
                            rs.iter().flat_map(|&r| ns.iter().map(move |&n| (r, n))).collect(),
                            "wigner",
                        )
                    }
                };
                let paths = run_wigner_jobs(&config, &pairs, prefix)?;
                println!("wrote {} grid files to {}", paths.len(), config.out_dir.display());
            }
            Command::State { r, n } => {
                let path = run_state_dump(&config, *r, *n)?;
                println!("wrote {}", path.display());
            }
            Command::Acceptance { report } => {
                let results = acceptance::run_all(&config);
                for check in &results {
                    println!("{}", check.line());
                }
                let json = serde_json::to_string_pretty(&results)
                    .expect("report serialization cannot fail");
                let path = write_output(&config.out_dir, report, json.as_bytes())?;
                let passed = results.iter().filter(|c| c.passed()).count();
                println!("{passed}/{} checks passed; report at {}", results.len(), path.display());
            }
        }
        Ok(())
    })?
}

fn main() -> ExitCode {
    // usage problems are configuration errors (exit 1), not clap's exit 2
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err)
            if matches!(
                err.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            err.exit()
        }
        Err(err) => {
            eprint!("{err}");
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
