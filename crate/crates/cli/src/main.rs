use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use epsim_core::scenario::{self, ChannelReport, RunReport, Scenario};

/// Simulate and characterize an on-chip polarization-entangled pair source.
#[derive(Debug, Parser)]
#[command(name = "epsim", version)]
struct Cli {
    /// Scenario file (.toml or .json), or the name of a scenario in the
    /// config directory or bundled with the tool.
    #[arg(long, global = true, value_name = "PATH|NAME")]
    config: Option<String>,

    /// Directory searched for scenario names and the default scenario.
    #[arg(long, global = true, env = "EPSIM_CONFIG_DIR", value_name = "DIR")]
    config_dir: Option<PathBuf>,

    /// Override the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory; defaults to the scenario's `output_dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Restrict to these channel labels (comma separated).
    #[arg(long, global = true, value_delimiter = ',', value_name = "LABELS")]
    channels: Vec<String>,

    /// Reconstruct from raw coincidences without removing accidentals.
    #[arg(long, global = true)]
    no_subtract_accidentals: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full pipeline: counts, tomography, spectra, MMI fit and report.
    Run,
    /// Simulate count tables for every channel.
    Simulate,
    /// Reconstruct states from existing count tables.
    Tomo,
    /// Write SPDC, SHG and GVD curves.
    Phasematch,
    /// Fit the per-splitter loss of an MMI tree.
    Mmifit {
        /// Cut-back CSV (splitter_count,output_power_dbm); defaults to the
        /// scenario's `mmi_tree_csv`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Aggregate existing outputs into report.json.
    Report,
    /// Check every file in the output directory against its schema.
    Check,
    /// List bundled scenarios.
    List,
}

const DEFAULT_SCENARIO: &str = "paper_repro";

fn find_named(name: &str, dir: Option<&Path>) -> Option<PathBuf> {
    let dir = dir?;
    [dir.join(name), dir.join(format!("{name}.toml")), dir.join(format!("{name}.json"))]
        .into_iter()
        .find(|p| p.is_file())
}

fn load_scenario(cli: &Cli) -> Result<Scenario> {
    let dir = cli.config_dir.as_deref();
    let mut s = match &cli.config {
        Some(c) if Path::new(c).is_file() => Scenario::load(Path::new(c))?,
        Some(c) => match find_named(c, dir) {
            Some(p) => Scenario::load(&p)?,
            None if Scenario::bundled_names().any(|n| n == c) => Scenario::bundled(c)?,
            None => bail!("no scenario file or bundled scenario named `{c}`"),
        },
        None => match find_named(DEFAULT_SCENARIO, dir) {
            Some(p) => Scenario::load(&p)?,
            None => Scenario::bundled(DEFAULT_SCENARIO)?,
        },
    };
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    if !cli.channels.is_empty() {
        s.select_channels(&cli.channels)?;
    }
    if cli.no_subtract_accidentals {
        s.tomography.subtract_accidentals = false;
    }
    Ok(s)
}

fn print_channels(channels: &[ChannelReport]) {
    println!(
        "{:<10} {:>8} {:>8} {:>8} {:>7} {:>12} {:>12}  converged",
        "channel", "F", "V_HV", "V_AD", "S", "B (/s/nm/mW)", "PGR (/s/mW)"
    );
    for c in channels {
        println!(
            "{:<10} {:>8.4} {:>8.4} {:>8.4} {:>7.3} {:>12.3e} {:>12.3e}  {}",
            c.label,
            c.fidelity,
            c.visibility_hv,
            c.visibility_ad,
            c.chsh_s,
            c.brightness_pairs_per_s_per_nm_per_mw,
            c.pgr_pairs_per_s_per_mw,
            c.converged
        );
    }
}

fn convergence_status(channels: &[ChannelReport]) -> ExitCode {
    let failed: Vec<&str> = channels.iter().filter(|c| !c.converged).map(|c| c.label.as_str()).collect();
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("error: reconstruction did not converge for {}", failed.join(", "));
        ExitCode::from(2)
    }
}

fn finish_report(report: &RunReport, out: &Path) -> ExitCode {
    print_channels(&report.channels);
    println!("report: {}", out.join("report.json").display());
    convergence_status(&report.channels)
}

fn execute(cli: &Cli) -> Result<ExitCode> {
    if let Command::List = cli.command {
        for name in Scenario::bundled_names() {
            println!("{name}");
        }
        return Ok(ExitCode::SUCCESS);
    }
    let s = load_scenario(cli)?;
    let out = cli.out.clone().unwrap_or_else(|| s.output_dir.clone());
    match &cli.command {
        Command::Run => {
            let report = scenario::run(&s, &out)?;
            Ok(finish_report(&report, &out))
        }
        Command::Simulate => {
            for p in scenario::simulate(&s, &out)? {
                println!("{}", p.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Tomo => {
            let channels = scenario::tomo(&s, &out)?;
            print_channels(&channels);
            Ok(convergence_status(&channels))
        }
        Command::Phasematch => {
            let r = scenario::phasematch(&s, &out)?;
            let width = |w: Option<f64>| w.map_or("unresolved".to_string(), |w| format!("{w:.2} nm"));
            println!("SPDC       FWHM {} ({})", width(r.spdc.fwhm_nm), r.spdc.path.display());
            println!("SHG upper  peak {:.2} nm, FWHM {} ({})", r.shg_upper.peak_nm, width(r.shg_upper.fwhm_nm), r.shg_upper.path.display());
            println!("SHG lower  peak {:.2} nm, FWHM {} ({})", r.shg_lower.peak_nm, width(r.shg_lower.fwhm_nm), r.shg_lower.path.display());
            println!("GVD        |β₂| smallest at {:.1} nm ({})", r.gvd_min_abs_nm, r.gvd.path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Mmifit { input } => {
            let input = match (input, &s.mmi_tree_csv) {
                (Some(p), _) => p.clone(),
                (None, Some(p)) => s.input_path(p),
                (None, None) => bail!("no --input given and the scenario names no mmi_tree_csv"),
            };
            let fit = scenario::mmifit(&input, &out)?;
            println!("per-splitter loss {:.3} dB (intercept {:.3} dBm)", fit.per_splitter_loss_db, fit.intercept_dbm);
            Ok(ExitCode::SUCCESS)
        }
        Command::Report => {
            let start = Instant::now();
            let report = scenario::report(&s, &out, start.elapsed().as_secs_f64())?;
            Ok(finish_report(&report, &out))
        }
        Command::Check => {
            let files = scenario::validate_outputs(&out).with_context(|| format!("checking {}", out.display()))?;
            println!("{} files match their schemas", files.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::List => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
