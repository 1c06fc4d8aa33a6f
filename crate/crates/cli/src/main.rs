use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use toomlab::app::experiments::{consensus_experiment, failure_experiment, init_thread_pool, rows_to_csv};
use toomlab::app::pattern::{
    parse_cutspec, parse_failures, parse_pattern, render_ascii, serialize_cutspec, serialize_pattern,
};
use toomlab::app::suites::{all_pass, records_to_csv, run_suite, RunConfig, SUITES};
use toomlab::cuts::{thickness_connected, thickness_general, SearchGuard};
use toomlab::geometry::span_d;
use toomlab::rules::{evolve, RuleId};
use toomlab::transfer::{pullback_cut_q, pullback_cut_r};
use toomlab::{SiteSet, Thirds};

/// Toom's NEC rule and its consensus variant: evolution, spans, cut
/// thickness, cut pullbacks and batch verification.
#[derive(Parser)]
#[command(name = "toomlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a rule on a pattern file.
    Evolve {
        #[arg(long, value_parser = parse_rule)]
        rule: RuleId,
        #[arg(long)]
        steps: usize,
        /// Fault file: `step x y value` per line.
        #[arg(long)]
        failures: Option<PathBuf>,
        input: PathBuf,
        /// Write the final pattern here instead of stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Draw a pattern.
    Render { input: PathBuf },
    /// Minimal deflated-triangle cover value, e.g. `--d 1/3` or `--d 2`.
    Span {
        #[arg(long, value_parser = parse_thirds)]
        d: Thirds,
        input: PathBuf,
    },
    /// Brute-force thickness of a plane set.
    Thickness {
        /// Restrict to connected cuts (needs `--beta`).
        #[arg(long, requires = "beta")]
        connected: bool,
        #[arg(long, value_parser = parse_thirds)]
        beta: Option<Thirds>,
        #[arg(long, value_parser = parse_thirds)]
        alpha: Thirds,
        #[arg(long, default_value_t = SearchGuard::default().max_sites)]
        max_sites: usize,
        #[arg(long, default_value_t = SearchGuard::default().max_k)]
        max_k: usize,
        input: PathBuf,
    },
    /// Pull a closed cut of R(S) or Q(S) back to a cut of S.
    Pullback {
        #[arg(value_enum)]
        rule: PullbackRule,
        /// Cut of the image, as `C:`, `A1:`, `A2:` site lists.
        #[arg(long)]
        cut: PathBuf,
        /// The set S.
        input: PathBuf,
    },
    /// Run a verification suite (or `all`); exits nonzero iff a record fails.
    Verify {
        suite: String,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        max_size: Option<usize>,
        /// Write records as CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Steps of R+ to reach h0 or h1 on random torus sets.
    Consensus {
        #[arg(long, value_delimiter = ',', default_value = "8,12,16,20")]
        sizes: Vec<i64>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Fixed occupation density; drawn per trial when omitted.
        #[arg(long)]
        density: Option<f64>,
        /// Step cap, as a multiple of n.
        #[arg(long, default_value_t = 10)]
        cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// R+ with sparse random single-site faults.
    Failures {
        #[arg(long, value_delimiter = ',', default_value = "8,16")]
        sizes: Vec<i64>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        density: Option<f64>,
        /// Faults per run; floor(sqrt(n)) when omitted.
        #[arg(long)]
        budget: Option<usize>,
        /// Run length, as a multiple of n².
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PullbackRule {
    R,
    Q,
}

fn parse_rule(s: &str) -> std::result::Result<RuleId, String> {
    s.parse().map_err(|e: toomlab::Error| e.to_string())
}

fn parse_thirds(s: &str) -> std::result::Result<Thirds, String> {
    s.parse().map_err(|e: toomlab::Error| e.to_string())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_pattern(path: &Path) -> Result<SiteSet> {
    parse_pattern(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Evolve { rule, steps, failures, input, out } => {
            let s = read_pattern(&input)?;
            let faults = match failures {
                Some(p) => parse_failures(&read(&p)?)?,
                None => Vec::new(),
            };
            let trace = evolve(rule, &s, steps, &faults)?;
            emit(out.as_deref(), &serialize_pattern(trace.last()))?;
        }
        Command::Render { input } => {
            print!("{}", render_ascii(&read_pattern(&input)?, None));
        }
        Command::Span { d, input } => {
            let cover = span_d(&read_pattern(&input)?, d)?;
            println!("span {}", cover.value);
            println!("triangles {}", cover.blocks.len());
            if !cover.exact {
                println!("note: not proven minimal");
            }
        }
        Command::Thickness { connected, beta, alpha, max_sites, max_k, input } => {
            let s = read_pattern(&input)?;
            let guard = SearchGuard { max_sites, max_k };
            let result = match (connected, beta) {
                (true, Some(b)) => thickness_connected(&s, alpha, b, &guard)?,
                (false, None) => thickness_general(&s, alpha, &guard)?,
                (false, Some(_)) => bail!("--beta only applies with --connected"),
                (true, None) => unreachable!("clap requires --beta with --connected"),
            };
            println!("thickness {}", result.value);
            if let Some(w) = result.witness {
                println!("m {}", w.m);
                print!("{}", serialize_cutspec(&w.cut));
            }
        }
        Command::Pullback { rule, cut, input } => {
            let s = read_pattern(&input)?;
            let cut = parse_cutspec(&read(&cut)?, s.space())?;
            match rule {
                PullbackRule::R => {
                    let pb = pullback_cut_r(&s, &cut)?;
                    print!("{}", serialize_cutspec(&pb.cut));
                    for (a, a2) in pb.mapping {
                        println!("# {a} -> {a2}");
                    }
                }
                PullbackRule::Q => {
                    let pb = pullback_cut_q(&s, &cut)?;
                    print!("{}", serialize_cutspec(&pb.cut));
                    match pb.trace.r {
                        Some(r) => println!("# corner {r}"),
                        None => println!("# first element superfluous"),
                    }
                    for step in &pb.trace.steps {
                        let image = step.a_prime.map_or("dropped".to_string(), |p| p.to_string());
                        println!("# {:?} {} -> {image}", step.kind, step.a);
                    }
                }
            }
        }
        Command::Verify { suite, trials, seed, max_size, out } => {
            let cfg = RunConfig { seed, trials, max_size, ..RunConfig::default() };
            let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite.as_str()] };
            let mut records = Vec::new();
            for name in names {
                let batch = run_suite(name, &cfg)?;
                let failed = batch.iter().filter(|r| !r.pass).count();
                eprintln!("{name}: {} cases, {failed} failed", batch.len());
                records.extend(batch);
            }
            emit(out.as_deref(), &records_to_csv(&records)?)?;
            if !all_pass(&records) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Consensus { sizes, trials, seed, density, cap, out } => {
            let cfg =
                RunConfig { seed, trials: Some(trials), sizes, density, consensus_cap: cap, ..RunConfig::default() };
            let report = consensus_experiment(&cfg)?;
            for s in &report.per_size {
                eprintln!(
                    "n={}: {} trials, {} capped, max steps {} ({:.3} n)",
                    s.n, s.trials, s.capped, s.max_steps, s.max_ratio
                );
            }
            eprintln!("empirical constant {:.3}, stable across n: {}", report.constant, report.stable);
            emit(out.as_deref(), &rows_to_csv(&report.rows)?)?;
            if !report.all_reached() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Failures { sizes, trials, seed, density, budget, steps, out } => {
            let cfg = RunConfig {
                seed,
                trials: Some(trials),
                sizes,
                density,
                failure_budget: budget,
                failure_steps: steps,
                ..RunConfig::default()
            };
            let rows = failure_experiment(&cfg)?;
            let passed = rows.iter().filter(|r| r.pass).count();
            eprintln!("{passed} of {} runs ended near consensus", rows.len());
            emit(out.as_deref(), &rows_to_csv(&rows)?)?;
            if passed < rows.len() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_thread_pool() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
