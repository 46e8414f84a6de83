use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

use onofri_lab::experiments::{self, Command, RunConfig};

/// Verification suites and sweeps for the sharp Onofri-type and
/// Carleson-Chang inequalities.
#[derive(Debug, Parser)]
#[command(name = "onofri-lab", version)]
struct Cli {
    /// verify-measure, verify-bounds, verify-onofri, minimize-cc,
    /// equivalence-sandwich, counterexample, density-demo or identities
    #[arg(value_parser = parse_command)]
    command: Command,

    /// Dimension N >= 2 (default: the command's own range)
    #[arg(long)]
    n: Option<u32>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long)]
    abs_tol: Option<f64>,

    #[arg(long)]
    rel_tol: Option<f64>,

    #[arg(long)]
    max_subdivisions: Option<usize>,

    /// Comma-separated radii
    #[arg(long)]
    r_list: Option<String>,

    /// Comma-separated eta_k indices; `a..b` ranges allowed
    #[arg(long)]
    k_list: Option<String>,

    /// Comma-separated counterexample sizes K
    #[arg(long)]
    big_k_list: Option<String>,

    /// Fuzz sample count
    #[arg(long)]
    samples: Option<usize>,

    /// Projected-gradient steps for minimize-cc (0 disables)
    #[arg(long)]
    descent_steps: Option<usize>,

    /// zero, bump, or bump:<amplitude>:<radius>
    #[arg(long)]
    test_profile: Option<String>,

    /// Directory for the JSON report and CSV data
    #[arg(long)]
    out: Option<PathBuf>,

    /// key=value file; its entries override the flags
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_command(s: &str) -> Result<Command, String> {
    s.parse().map_err(|e: onofri_lab::Error| e.to_string())
}

fn build_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::new(cli.command);
    cfg.seed = cli.seed;
    cfg.out = cli.out.clone();
    let flags: [(&str, Option<String>); 10] = [
        ("n", cli.n.map(|v| v.to_string())),
        ("abs_tol", cli.abs_tol.map(|v| v.to_string())),
        ("rel_tol", cli.rel_tol.map(|v| v.to_string())),
        ("max_subdivisions", cli.max_subdivisions.map(|v| v.to_string())),
        ("r_list", cli.r_list.clone()),
        ("k_list", cli.k_list.clone()),
        ("big_k_list", cli.big_k_list.clone()),
        ("samples", cli.samples.map(|v| v.to_string())),
        ("descent_steps", cli.descent_steps.map(|v| v.to_string())),
        ("test_profile", cli.test_profile.clone()),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, &v).with_context(|| format!("--{}", key.replace('_', "-")))?;
        }
    }
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        cfg.apply_config_text(&text)
            .with_context(|| format!("in {}", path.display()))?;
    }
    cfg.quadrature.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let cfg = build_config(cli)?;
    let report = experiments::run(&cfg)?;
    for path in experiments::write_outputs(&cfg, &report)? {
        println!("wrote {}", path.display());
    }
    let failed = report.failures().count();
    for case in report.failures().take(10) {
        println!("FAIL {}", serde_json::to_string(case)?);
    }
    println!(
        "{}: {} cases, {} failed, {:.0} ms -> {}",
        report.command,
        report.cases.len(),
        failed,
        report.wall_ms,
        if report.pass { "PASS" } else { "FAIL" }
    );
    Ok(report.pass)
}
