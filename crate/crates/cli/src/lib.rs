//! `alr`: reproduce the reference resonance experiments, run loss sweeps and
//! classify data compatibility.

// stdout writes that tolerate a closed pipe (`alr ... | head`)
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod grid;
pub mod io;
pub mod manifest;
pub mod render;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{Context, Status};
pub use error::{exit, CliError, Result};

use crate::commands::{Problem, RateArgs};
use crate::data::{parse_tail, DataSpec};

#[derive(Debug, Parser)]
#[command(name = "alr", version, about = "Anomalous localized resonance in core-shell and plane geometries")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Exit with code 4 when a rate fit is unreliable.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Also write PNG previews of field grids.
    #[arg(long, global = true)]
    pub render: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

impl From<ProblemArg> for Problem {
    fn from(p: ProblemArg) -> Self {
        match p {
            ProblemArg::One => Problem::CoreShell,
            ProblemArg::Two => Problem::Plane,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Core-shell fields for the inverse-square data at δ = 1e-14, 1e-18, 1e-20.
    Figure1,
    /// Plane-problem fields for the cutoff source at δ = 10^-10, 10^-10.4, 10^-10.8.
    Figure2,
    /// Solve the core-shell problem from a TOML config.
    Solve1 {
        config: PathBuf,
        /// Override a config key, e.g. `--set delta=1e-8` or `--set data.alpha=0.4`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Solve the plane problem from a TOML config.
    Solve2 {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Fit power laws in δ over a log-spaced sweep.
    Rate {
        #[arg(long)]
        problem: ProblemArg,
        /// Data spec, e.g. `designer:alpha=0.25` or `cutoff_harmonic`.
        #[arg(long)]
        data: String,
        #[arg(long)]
        delta_min: f64,
        #[arg(long)]
        delta_max: f64,
        #[arg(long, default_value_t = 13)]
        points: usize,
        /// Outer radius (problem 1).
        #[arg(long, default_value_t = 3.0)]
        radius: f64,
        /// Fixed mode order instead of sizing by the smallest δ.
        #[arg(long = "order")]
        order: Option<usize>,
    },
    /// Classify data as compatible or not.
    CheckCompat {
        #[arg(long)]
        problem: ProblemArg,
        #[arg(long)]
        data: String,
        #[arg(long, default_value_t = 3.0)]
        radius: f64,
        /// Tail descriptor: `none`, `finite` or `geometric:ratio=q,power=p`.
        #[arg(long)]
        tail: Option<String>,
        #[arg(long = "order")]
        order: Option<usize>,
    },
}

/// Runs a parsed command line, printing a short report to stdout.
pub fn run(cli: &Cli) -> Result<Status> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Other(format!("thread pool: {e}")))?;
    }
    let ctx = Context { out: cli.global.out.clone(), strict: cli.global.strict, render: cli.global.render };
    match &cli.command {
        Command::Figure1 => {
            let s = commands::figure1(&ctx)?;
            for r in &s.runs {
                say!(
                    "delta={:e} N={} E_delta={:.6e} grad_energy={:.6e} gap={:.6e} max|u| B_1/6={:.6} annulus={:.6e}",
                    r.delta, r.order, r.power, r.grad_energy, r.gap_h_half, r.max_abs_inner, r.max_abs_annulus
                );
            }
            say!(
                "inner spread {:.4} ({}), annulus growing: {}",
                s.checks.inner_relative_spread,
                if s.checks.inner_bounded { "bounded" } else { "NOT bounded" },
                s.checks.annulus_growing
            );
            say!("wrote {}", ctx.out.display());
            Ok(Status::Success)
        }
        Command::Figure2 => {
            let s = commands::figure2(&ctx)?;
            for r in &s.runs {
                say!(
                    "delta={:e} E_delta={:.6e} core grad_energy={:.6e} verdict={}",
                    r.delta, r.power, r.grad_energy, r.verdict
                );
            }
            print_fits(s.rate_fits.iter().map(|(k, v)| (k.as_str(), v)));
            say!("log10 energy ratios {:?}, match 0.8: {}", s.checks.log_ratios, s.checks.ratios_match);
            say!("wrote {}", ctx.out.display());
            Ok(Status::Success)
        }
        Command::Solve1 { config, overrides } => {
            let s = commands::solve1(&ctx, config, overrides)?;
            say!(
                "R={} delta={:e} N={} E_delta={:.6e} grad_energy={:.6e} gap={:.6e} verdict={}",
                s.radius, s.delta, s.order, s.power, s.grad_energy, s.gap_h_half, s.verdict
            );
            say!("wrote {}", ctx.out.display());
            Ok(Status::Success)
        }
        Command::Solve2 { config, overrides } => {
            let s = commands::solve2(&ctx, config, overrides)?;
            say!(
                "delta={:e} N={} E_delta={:.6e} core grad_energy={:.6e} verdict={}",
                s.delta, s.order, s.power, s.grad_energy, s.verdict
            );
            say!("wrote {}", ctx.out.display());
            Ok(Status::Success)
        }
        Command::Rate { problem, data, delta_min, delta_max, points, radius, order } => {
            let args = RateArgs {
                problem: (*problem).into(),
                data: data.parse::<DataSpec>()?,
                delta_min: *delta_min,
                delta_max: *delta_max,
                points: *points,
                radius: *radius,
                order: *order,
            };
            let s = commands::rate(&ctx, &args)?;
            print_fits(s.rate_fits.iter().map(|r| (r.quantity.as_str(), &r.fit)));
            say!("wrote {}", ctx.out.display());
            Ok(s.status)
        }
        Command::CheckCompat { problem, data, radius, tail, order } => {
            let spec: DataSpec = data.parse()?;
            let tail = tail.as_deref().map(parse_tail).transpose()?;
            let r = commands::check_compat((*problem).into(), &spec, *radius, tail, *order)?;
            say!("verdict: {}", r.verdict);
            match r.decay_rate {
                Some(rate) => say!("decay estimate: {rate:.6} (threshold {:.6})", r.threshold),
                None => say!("decay estimate: none (threshold {:e})", r.threshold),
            }
            if let Some(n) = r.dominant_mode {
                say!("dominant surviving mode: {n}");
            }
            say!("evidence: {}", r.evidence);
            say!("{:>6}  {:>14}  {:>10}", "n", "|coef|", "|coef|^1/n");
            for row in &r.table {
                let root = row.root.map_or("-".to_string(), |x| format!("{x:.6}"));
                say!("{:>6}  {:>14.6e}  {:>10}", row.n, row.magnitude, root);
            }
            commands::write_report(&ctx, &r)?;
            Ok(r.status)
        }
    }
}

fn print_fits<'a>(fits: impl Iterator<Item = (&'a str, &'a alr_core::RateFit)>) {
    say!("{:<14} {:>10} {:>12} {:>12} {:>6}", "quantity", "slope", "intercept", "residual", "ok");
    for (name, f) in fits {
        say!(
            "{:<14} {:>10.5} {:>12.5} {:>12.3e} {:>6}",
            name,
            f.slope,
            f.intercept,
            f.max_residual,
            if f.is_reliable() { "yes" } else { "NO" }
        );
    }
}
