use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use maxlab::diffeo::DIFFEO_NAMES;
use maxlab::experiment::{self, ExperimentConfig, RunReport, EXPERIMENT_KINDS};
use maxlab::fields::{COEFFICIENT_NAMES, FIELD_NAMES, SCALAR_NAMES};
use maxlab::geometry::GRAPH_NAMES;
use maxlab::maxwell::SWEEP_MODES;
use maxlab::{Error, Result};

/// Numerical verification of regularity estimates for the Maxwell operator.
#[derive(Parser)]
#[command(name = "maxlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    ///
    /// Exit status: 0 when the verdict matches the expected outcome, 1 when a
    /// check fails, 2 for configuration errors, 3 when a quadrature self-test
    /// fails.
    Verify {
        config: PathBuf,
        /// Output directory; overrides the config and MAXLAB_OUT_DIR.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print every catalog name accepted in configs.
    ListCatalogs,
    /// Re-render a report.json.
    Report {
        json: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Md)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Md,
}

fn verify(config: PathBuf, out: Option<PathBuf>) -> Result<bool> {
    let cfg = ExperimentConfig::load(&config)?;
    let dir = out.unwrap_or_else(|| experiment::output_dir(&cfg));
    let run = experiment::run(&cfg)?;
    for row in &run.report.rows {
        println!(
            "{} {} = {:e} ({} {:e}) [{}]",
            if row.pass { "ok  " } else { "FAIL" },
            row.name,
            row.value,
            row.comparison.symbol(),
            row.tolerance,
            row.source
        );
    }
    for path in run.write(&dir)? {
        println!("wrote {}", path.display());
    }
    let r = &run.report;
    println!(
        "{}: {} (checks {}, expected {}) in {:.2} s",
        r.kind,
        if r.pass { "PASS" } else { "FAIL" },
        if r.checks_pass { "hold" } else { "fail" },
        serde_json::to_value(r.expect)?.as_str().unwrap_or_default(),
        r.wall_time_s
    );
    Ok(r.pass)
}

fn list_catalogs() {
    let groups: [(&str, &[&str]); 7] = [
        ("experiment kinds", EXPERIMENT_KINDS),
        ("graphs", GRAPH_NAMES),
        ("vector fields", FIELD_NAMES),
        ("scalar fields", SCALAR_NAMES),
        ("coefficients", COEFFICIENT_NAMES),
        ("diffeomorphisms", DIFFEO_NAMES),
        ("sweep modes", SWEEP_MODES),
    ];
    for (title, names) in groups {
        println!("{title}:");
        for n in names {
            println!("  {n}");
        }
    }
}

fn report(path: PathBuf, format: Format) -> Result<()> {
    let text = std::fs::read_to_string(&path)?;
    let r = RunReport::from_json(&text)?;
    match format {
        Format::Md => print!("{}", r.to_markdown()),
        Format::Csv => r.write_csv(std::io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify { config, out } => verify(config, out),
        Command::ListCatalogs => {
            list_catalogs();
            Ok(true)
        }
        Command::Report { json, format } => report(json, format).map(|()| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(exit_byte(&e))
        }
    }
}

fn exit_byte(e: &Error) -> u8 {
    u8::try_from(e.exit_status()).unwrap_or(1)
}
