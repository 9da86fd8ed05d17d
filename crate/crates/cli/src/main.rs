use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use swampcast::geometry::{format_points, generate_placement};
use swampcast::oracle::{lemma_battery, LemmaCheck};
use swampcast::scenario::{self, instance_lemmas, run_scenario, write_trace, Audit, Outcome, Scenario};

/// Broadcast simulator and verifier for radio networks with swamping.
#[derive(Parser, Debug)]
#[command(name = "swampcast", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Emit the placement of a scenario as a point file
    Gen {
        config: PathBuf,
        /// Output file (stdout if omitted)
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run a single scenario
    Run {
        config: PathBuf,
        /// Write a JSON-lines trace to this file
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Horizon multiplier over the round bound [default: 16, or run.horizon_mult]
        #[arg(long)]
        horizon_mult: Option<u64>,
        /// Print the report as JSON
        #[arg(long)]
        json: bool,
    },
    /// Run a scenario with the full oracle audit
    Verify {
        config: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Horizon multiplier over the round bound [default: 16, or run.horizon_mult]
        #[arg(long)]
        horizon_mult: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Run the [sweep] grid of a scenario and write CSV
    Sweep {
        config: PathBuf,
        /// CSV output (stdout if omitted)
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Worker threads (defaults to available parallelism)
        #[arg(long)]
        threads: Option<usize>,
        /// Horizon multiplier over the round bound [default: 16, or run.horizon_mult]
        #[arg(long)]
        horizon_mult: Option<u64>,
    },
    /// Run the lemma battery, plus the instance audits of a scenario if given
    CheckLemmas {
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Random line networks
        #[arg(long, default_value_t = 50)]
        lines: u64,
        /// Random plane networks
        #[arg(long, default_value_t = 20)]
        planes: u64,
        /// Closer/farther samples
        #[arg(long, default_value_t = 10_000)]
        triples: u64,
    },
}

fn load(path: &Path, horizon_mult: Option<u64>) -> Result<Scenario> {
    let mut sc = Scenario::load(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(m) = horizon_mult {
        sc.run.horizon_mult = m;
    }
    Ok(sc)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_report(out: &Outcome, json: bool) -> Result<()> {
    let r = &out.report;
    if json {
        println!("{}", serde_json::to_string_pretty(r)?);
        return Ok(());
    }
    let rounds = r.rounds.map_or_else(|| "-".to_string(), |x| x.to_string());
    println!("{} algorithm={} n={} r={} s={} gamma={} D={} rounds={} bound={} ({} ms)", r.id, r.algorithm, r.n, r.r, r.s, r.gamma, r.d, rounds, r.bound, r.runtime_ms);
    for c in &r.checks {
        println!("  [{}] {:<30} {}", if c.pass { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    println!("{}", if r.pass { "PASS" } else { "FAIL" });
    Ok(())
}

fn run_one(config: &Path, trace: Option<PathBuf>, horizon_mult: Option<u64>, json: bool, audit: Audit) -> Result<bool> {
    let sc = load(config, horizon_mult)?;
    let trace = trace.or_else(|| sc.run.trace.then(|| PathBuf::from(format!("{}.trace.jsonl", sc.run.id))));
    let out = run_scenario(&sc, audit, trace.is_some())?;
    if let Some(p) = &trace {
        let mut w = output(Some(p))?;
        write_trace(&mut w, &out)?;
        w.flush()?;
    }
    print_report(&out, json)?;
    Ok(out.report.pass)
}

fn print_lemmas(checks: &[LemmaCheck]) -> bool {
    for c in checks {
        println!("[{}] {:<28} {} cases, {} failures", if c.passed() { "pass" } else { "FAIL" }, c.name, c.cases, c.failures);
        for w in &c.witnesses {
            println!("    witness: {w}");
        }
    }
    checks.iter().all(|c| c.passed())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Gen { config, out } => {
            let sc = load(&config, None)?;
            let net = generate_placement(&sc.placement, sc.params()?, sc.run.seed)?;
            let mut w = output(out.as_deref())?;
            w.write_all(format_points(&net).as_bytes())?;
            w.flush()?;
            Ok(true)
        }
        Cmd::Run { config, trace, horizon_mult, json } => run_one(&config, trace, horizon_mult, json, Audit::Basic),
        Cmd::Verify { config, trace, horizon_mult, json } => run_one(&config, trace, horizon_mult, json, Audit::Full),
        Cmd::Sweep { config, out, threads, horizon_mult } => {
            let sc = load(&config, horizon_mult)?;
            let threads = threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let sw = scenario::sweep(&sc, threads)?;
            for (id, why) in &sw.skipped {
                eprintln!("skipped {id}: {why}");
            }
            for row in &sw.rows {
                match &row.outcome {
                    Err(e) => eprintln!("{}: error: {e}", row.id),
                    Ok(r) => {
                        for c in r.failures() {
                            eprintln!("{}: {} failed: {}", row.id, c.name, c.detail);
                        }
                    }
                }
            }
            let mut w = output(out.as_deref())?;
            sw.write_csv(&mut w)?;
            w.flush()?;
            let failed = sw.rows.iter().filter(|r| !r.pass()).count();
            eprintln!("{} rows, {} failed, {} skipped", sw.rows.len(), failed, sw.skipped.len());
            Ok(failed == 0)
        }
        Cmd::CheckLemmas { config, seed, lines, planes, triples } => {
            let mut checks = lemma_battery(seed, lines, planes, triples);
            if let Some(cfg) = config {
                let sc = load(&cfg, None)?;
                let net = sc.network()?;
                checks.extend(instance_lemmas(&net, sc.run.seed)?);
            }
            Ok(print_lemmas(&checks))
        }
    }
}
