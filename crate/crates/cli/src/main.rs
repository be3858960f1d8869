//! `okounkov`: exact analyses of computable graded algebras.
//!
//! Exit codes: 0 success, 1 analysis-level failure findings (for example a
//! violated verdict under `--expect-approximable`), 2 usage or parse
//! errors.

use clap::{Args, Parser, Subcommand};
use okounkov_cli::commands::{self, finish, ReportConfig, RunOutcome};
use okounkov_cli::instance;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "okounkov",
    version,
    about = "Exact section-ring, valuation-body and limit-divisor analyses over the rationals"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Instance file to analyse.
    #[arg(long)]
    instance: PathBuf,
    /// Output directory (default: $OKOUNKOV_OUT or ./okounkov-out).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Structural validation: unit piece, multiplicative closure samples,
    /// nonemptiness of a degree range.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Number of random closure samples on top of the deterministic
        /// small-degree sweep.
        #[arg(long, default_value_t = 32)]
        samples: u32,
        /// Seed for the randomized checks; fixed seed means byte-identical
        /// output.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Normalized rank sequence and rank-ratio checks.
    Ranks {
        #[command(flatten)]
        common: Common,
        /// Largest degree to inspect.
        #[arg(long = "M", default_value_t = 64)]
        bound: u32,
        /// Ratio step r in rk B_{n+r} / rk B_n.
        #[arg(long, default_value_t = 1)]
        r: u32,
        /// Tail window length for the deviation summary.
        #[arg(long, default_value_t = 16)]
        window: usize,
    },
    /// Saturation ratios dim S^n(B_p) / dim B_{np} and the approximability
    /// verdict.
    Cond3 {
        #[command(flatten)]
        common: Common,
        /// Comma-separated p values.
        #[arg(long = "P", value_delimiter = ',')]
        p: Option<Vec<u32>>,
        /// Largest n per row.
        #[arg(long = "N", default_value_t = 16)]
        n: u32,
        /// Comma-separated epsilon values for the verdict schedule
        /// (default 1/2,1/4,1/8); thresholds round up to powers of two.
        #[arg(long, value_delimiter = ',')]
        epsilons: Option<Vec<String>>,
        /// Window override for the verdict schedule.
        #[arg(long)]
        window: Option<usize>,
        /// Exit with status 1 unless the verdict is consistent with
        /// approximability.
        #[arg(long)]
        expect_approximable: bool,
    },
    /// Valuation semigroup sample, body approximation and the volume
    /// identity check.
    Okounkov {
        #[command(flatten)]
        common: Common,
        /// Largest degree to sample.
        #[arg(long = "M", default_value_t = 16)]
        bound: u32,
    },
    /// Per-degree pole divisors, the truncated limit divisor, monotonicity,
    /// inclusion and coefficient decay.
    Divisor {
        #[command(flatten)]
        common: Common,
        /// Largest degree (and estimate truncation).
        #[arg(long = "M", default_value_t = 16)]
        bound: u32,
    },
    /// All of the above into one directory.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Degree bound shared by the ranks/okounkov/divisor sections.
        #[arg(long = "M", default_value_t = 16)]
        bound: u32,
        /// Comma-separated p values for the cond3 section.
        #[arg(long = "P", value_delimiter = ',')]
        p: Option<Vec<u32>>,
        /// Largest n for the cond3 section.
        #[arg(long = "N", default_value_t = 8)]
        n: u32,
    },
}

fn out_dir(common: &Common) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| std::env::var_os("OKOUNKOV_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("okounkov-out"))
}

fn default_p_values(truncation: u32, n: u32) -> Vec<u32> {
    [4u32, 8, 16]
        .into_iter()
        .filter(|p| p * n <= truncation)
        .collect()
}

type Runner = Box<dyn FnOnce(&Common) -> anyhow::Result<(PathBuf, RunOutcome)>>;

fn run() -> anyhow::Result<i32> {
    let cli = Cli::parse();
    let (common, runner): (&Common, Runner) = match &cli.cmd {
            Cmd::Validate {
                common,
                samples,
                seed,
            } => {
                let (samples, seed) = (*samples, *seed);
                (
                    common,
                    Box::new(move |c: &Common| {
                        let inst = load(&c.instance)?;
                        let out = out_dir(c);
                        let o = commands::run_validate(&inst, &out, samples, seed)?;
                        Ok((out, o))
                    }),
                )
            }
            Cmd::Ranks {
                common,
                bound,
                r,
                window,
            } => {
                let (bound, r, window) = (*bound, *r, *window);
                (
                    common,
                    Box::new(move |c: &Common| {
                        let inst = load(&c.instance)?;
                        let out = out_dir(c);
                        let o = commands::run_ranks(&inst, &out, bound, r, window)?;
                        Ok((out, o))
                    }),
                )
            }
            Cmd::Cond3 {
                common,
                p,
                n,
                epsilons,
                window,
                expect_approximable,
            } => {
                let (p, n, epsilons, window, expect) =
                    (p.clone(), *n, epsilons.clone(), *window, *expect_approximable);
                (
                    common,
                    Box::new(move |c: &Common| {
                        let inst = load(&c.instance)?;
                        let out = out_dir(c);
                        let p = p.unwrap_or_else(|| default_p_values(inst.model.truncation(), n));
                        let eps: Option<Vec<okounkov_core::Scalar>> = epsilons
                            .map(|list| {
                                list.iter()
                                    .map(|s| {
                                        s.parse().map_err(|e| anyhow::anyhow!("bad epsilon: {e}"))
                                    })
                                    .collect::<anyhow::Result<_>>()
                            })
                            .transpose()?;
                        let o = commands::run_cond3(
                            &inst,
                            &out,
                            &p,
                            n,
                            eps.as_deref(),
                            window,
                            expect,
                        )?;
                        Ok((out, o))
                    }),
                )
            }
            Cmd::Okounkov { common, bound } => {
                let bound = *bound;
                (
                    common,
                    Box::new(move |c: &Common| {
                        let inst = load(&c.instance)?;
                        let out = out_dir(c);
                        let o = commands::run_okounkov(&inst, &out, bound)?;
                        Ok((out, o))
                    }),
                )
            }
            Cmd::Divisor { common, bound } => {
                let bound = *bound;
                (
                    common,
                    Box::new(move |c: &Common| {
                        let inst = load(&c.instance)?;
                        let out = out_dir(c);
                        let o = commands::run_divisor(&inst, &out, bound)?;
                        Ok((out, o))
                    }),
                )
            }
            Cmd::Report {
                common,
                seed,
                bound,
                p,
                n,
            } => {
                let (seed, bound, p, n) = (*seed, *bound, p.clone(), *n);
                (
                    common,
                    Box::new(move |c: &Common| {
                        let inst = load(&c.instance)?;
                        let out = out_dir(c);
                        let cfg = ReportConfig {
                            validate_samples: 32,
                            seed,
                            ranks_bound: bound.max(8),
                            ranks_step: 1,
                            window: (n as usize / 4).max(1),
                            cond3_p: p
                                .unwrap_or_else(|| default_p_values(inst.model.truncation(), n)),
                            cond3_n: n,
                            okounkov_bound: bound,
                            divisor_bound: bound,
                        };
                        let o = commands::run_report(&inst, &out, &cfg)?;
                        Ok((out, o))
                    }),
                )
            }
        };
    let (out, outcome) = runner(common)?;
    for line in &outcome.summary {
        println!("{line}");
    }
    for f in &outcome.findings {
        println!("finding: {f}");
    }
    finish(&out, &outcome)
}

/// Parse an instance and surface its soft validation warnings on stderr.
fn load(path: &std::path::Path) -> anyhow::Result<okounkov_cli::instance::ParsedInstance> {
    let inst = instance::parse_instance(path)?;
    for w in &inst.warnings {
        eprintln!("warning: {}: {w}", inst.name);
    }
    Ok(inst)
}

fn main() -> ExitCode {
    match run() {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
