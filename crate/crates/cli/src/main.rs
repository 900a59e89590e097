use clap::{Args, Parser, Subcommand};
use rank1_cli::{run_suite, Config, Report};
use rank1_core::ledger::build_ledger;
use rank1_core::quadrature::SampleSet;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "rank1lab",
    about = "Numerical laboratory for rank-one hyperbolic spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug, Default)]
struct ConfigFlags {
    /// JSON config file; explicit flags take precedence over its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// model space: CH2, CH3, HH2 or OH2
    #[arg(long)]
    space: Option<String>,
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    tol_structure: Option<f64>,
    /// output directory; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite (algebra, spaces, busemann, quadrature,
    /// operators, projection, all) and write its report
    Verify {
        suite: String,
        #[command(flatten)]
        flags: ConfigFlags,
    },
    /// Build and emit the constants ledger of a space
    Ledger {
        #[arg(id = "ledger-space", value_name = "SPACE")]
        space: String,
        #[command(flatten)]
        flags: ConfigFlags,
    },
    /// Re-emit the CSV tables of an existing report
    Emit {
        report: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn resolve_config(flags: &ConfigFlags) -> anyhow::Result<Config> {
    let mut cfg = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
            serde_json::from_str(&text)
                .map_err(|e| anyhow::anyhow!("bad config {}: {e}", path.display()))?
        }
        None => Config::default(),
    };
    if let Some(v) = &flags.space {
        cfg.space = v.clone();
    }
    if let Some(v) = flags.n_samples {
        cfg.n_samples = v;
    }
    if let Some(v) = flags.seed {
        cfg.seed = v;
    }
    if let Some(v) = flags.radius {
        cfg.radius = v;
    }
    if let Some(v) = flags.sigma {
        cfg.sigma = v;
    }
    if let Some(v) = flags.tol_structure {
        cfg.tol_structure = v;
    }
    cfg.space_id()?;
    Ok(cfg)
}

fn write_or_print(out: &Option<PathBuf>, name: &str, body: &str) -> anyhow::Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(name), body)?;
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Verify { suite, flags } => {
            let cfg = resolve_config(&flags)?;
            let report = run_suite(&suite, &cfg)?;
            write_or_print(
                &flags.out,
                &format!("report-{suite}.json"),
                &report.to_json(),
            )?;
            if flags.out.is_some() {
                write_or_print(
                    &flags.out,
                    &format!("checks-{suite}.csv"),
                    &report.checks_csv(),
                )?;
            }
            Ok(if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Ledger { space, mut flags } => {
            flags.space = Some(space);
            let cfg = resolve_config(&flags)?;
            let id = cfg.space_id()?;
            let sp = id.space();
            let set = SampleSet::antithetic(sp.dim(), cfg.n_samples, cfg.seed);
            let ledger = build_ledger(&sp, cfg.radius, cfg.sigma, 1.0, &set, cfg.seed);
            write_or_print(
                &flags.out,
                &format!("ledger-{}.csv", sp.name()),
                &ledger.to_csv(),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Emit { report, out } => {
            let text = std::fs::read_to_string(&report)
                .map_err(|e| anyhow::anyhow!("cannot read report {}: {e}", report.display()))?;
            let rep = Report::from_json(&text)?;
            write_or_print(
                &out,
                &format!("checks-{}.csv", rep.suite),
                &rep.checks_csv(),
            )?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
