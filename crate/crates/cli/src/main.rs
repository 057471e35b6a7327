use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use congest_lab::report::{csv_row, run_batch, ExperimentConfig, GraphSource, Mode, Report, CSV_HEADER};

/// Run a CONGEST experiment and write a JSON report.
///
/// Exit status: 0 ok, 1 usage or run error, 2 a built-in check failed.
#[derive(Debug, Parser)]
#[command(name = "congest-lab", version)]
struct Cli {
    /// decompose, nibble, triangles, count, detect, subgraphs, verify or probe.
    #[arg(long)]
    mode: Mode,
    /// Edge-list file.
    #[arg(long, conflicts_with = "gen")]
    graph: Option<PathBuf>,
    /// Generator spec, e.g. er:n=512,p=0.25 or clique:n=4.
    #[arg(long)]
    gen: Option<String>,
    #[arg(long)]
    seed: u64,
    /// Run this many consecutive seeds starting at --seed.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    /// Target conductance for nibble mode.
    #[arg(long, default_value_t = 0.02)]
    phi: f64,
    /// Routing load factor; defaults to 2^ceil(sqrt(log n)).
    #[arg(long)]
    kappa: Option<u64>,
    /// Runs charging more rounds than this fail.
    #[arg(long)]
    round_cap: Option<u64>,
    /// Test-only scale on the high-diameter threshold; recorded in the report.
    #[arg(long, default_value_t = 1.0)]
    case1_threshold_scale: f64,
    /// Skip the easy case in triangle and subgraph listing.
    #[arg(long)]
    force_partition: bool,
    /// verify: report or decomposition path. subgraphs: pattern. probe: q=..,trials=..
    #[arg(long)]
    mode_args: Option<String>,
    /// Report path. With --seeds > 1 the file holds a JSON array.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write one CSV row per run here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl Cli {
    fn config(&self) -> ExperimentConfig {
        let graph = match (&self.graph, &self.gen) {
            (Some(p), _) => Some(GraphSource::File(p.display().to_string())),
            (None, Some(s)) => Some(GraphSource::Gen(s.clone())),
            (None, None) => None,
        };
        ExperimentConfig {
            delta: self.delta,
            phi: self.phi,
            kappa: self.kappa,
            round_cap: self.round_cap,
            case1_threshold_scale: self.case1_threshold_scale,
            force_partition: self.force_partition,
            mode_args: self.mode_args.clone(),
            ..ExperimentConfig::new(self.mode, graph, self.seed)
        }
    }
}

fn write_outputs(cli: &Cli, reports: &[Report]) -> Result<()> {
    if let Some(path) = &cli.out {
        let text = match reports {
            [one] => one.to_json(),
            many => serde_json::to_string_pretty(many)?,
        };
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &cli.csv {
        let mut text = String::from(CSV_HEADER);
        text.push('\n');
        for r in reports {
            text.push_str(&csv_row(r));
            text.push('\n');
        }
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if cli.seeds == 0 {
        eprintln!("error: --seeds must be at least 1");
        return ExitCode::from(1);
    }
    let seeds: Vec<u64> = (0..cli.seeds).map(|i| cli.seed.wrapping_add(i)).collect();
    let mut reports = Vec::new();
    for r in run_batch(&cli.config(), &seeds) {
        match r {
            Ok(r) => reports.push(r),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        }
    }
    if let Err(e) = write_outputs(&cli, &reports) {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    for r in &reports {
        if reports.len() > 1 {
            println!("seed={} {}", r.config.seed, r.summary);
        } else {
            println!("{}", r.summary);
        }
    }
    if reports.iter().all(|r| r.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
