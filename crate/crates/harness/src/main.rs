use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pointer_collapse::commands::beable::CoordRegion;
use pointer_collapse::commands::{beable, born, figure2, oracle, verify};
use pointer_collapse::config::{FoliationConfig, IntegratorConfig};
use pointer_collapse::output::Emitter;
use pointer_collapse::{HarnessError, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "pointer-collapse", version, about = "Collapse-model Monte Carlo runs and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config file or run manifest; built-in defaults if omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    paths: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    integrator: Option<IntegratorConfig>,
    #[arg(long, global = true, value_enum)]
    foliation: Option<FoliationConfig>,
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Variance decay curve, collapse times and outcome frequencies.
    Figure2,
    /// Outcome frequencies under both integrators.
    Born,
    /// Exact checks against the truncated Fock realization.
    Oracle,
    /// The full property suite; exits 1 if any check fails.
    Verify,
    /// Noise integral over a spacetime region and the energy-density beable.
    Beable {
        /// `x_lo,x_hi,t_lo,t_hi` in coordinates.
        #[arg(long, allow_hyphen_values = true)]
        region: CoordRegion,
    },
}

impl Cli {
    fn config(&self) -> Result<RunConfig, HarnessError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(o) = &self.out {
            c.output.dir = o.clone();
        }
        if let Some(i) = self.integrator {
            c.collapse.integrator = i;
        }
        if self.paths.is_some() || self.foliation.is_some() {
            let e = c.experiment.as_mut().ok_or_else(|| HarnessError::Usage("config has no experiment block".into()))?;
            if let Some(n) = self.paths {
                e.paths = n;
            }
            if let Some(f) = self.foliation {
                e.foliation = f;
            }
        }
        Ok(c)
    }
}

fn run(cli: &Cli) -> Result<bool, HarnessError> {
    let config = cli.config()?;
    let mut out = Emitter::new(&config)?;
    let passed = match &cli.command {
        Command::Figure2 => {
            let r = figure2::run(&config, cli.workers)?;
            figure2::emit(&r, &mut out)?;
            println!(
                "figure2: {} paths, final/initial variance {:.4}, collapse-time band fraction {:.3}, median {:.3e}",
                r.paths, r.final_ratio, r.collapse.in_band_fraction, r.collapse.median
            );
            r.passed()
        }
        Command::Born => {
            let r = born::run(&config, cli.workers)?;
            born::emit(&r, &mut out)?;
            for o in &r.outcomes {
                println!(
                    "branch {}: p={:.4} nonlinear={:.4} (z={:+.2}) linear={:.4}",
                    o.branch, o.probability, o.nonlinear, o.z, o.linear
                );
            }
            println!("estimator agreement p={:.4}", r.estimator_p);
            r.passed()
        }
        Command::Verify => {
            let r = verify::run(&config, verify::VerifySizes::full(&config)?, cli.workers)?;
            verify::emit(&r, &mut out)?;
            for c in &r.checks {
                println!("{}", c.line());
            }
            println!("{} checks in {:.1} s", r.checks.len(), r.seconds);
            r.passed()
        }
        Command::Beable { region } => {
            let r = beable::run(&config, *region, cli.workers)?;
            beable::emit(&r, &mut out)?;
            println!(
                "region volume {:.3e}: W = {:.4} (s.e. {:.4}), signal = {:.4}, Var(B)/vol = {:.3}",
                r.volume, r.w.mean, r.w.se, r.signal.mean, r.noise_variance_ratio.mean
            );
            for b in &r.branches {
                match &b.recovered {
                    Some(e) => println!(
                        "branch {}: mean N {:.3}, recovered {:.3} (s.e. {:.3}) over {} paths",
                        b.branch, b.mean_n, e.mean, e.se, b.paths
                    ),
                    None => println!("branch {}: mean N {:.3}, {} paths", b.branch, b.mean_n, b.paths),
                }
            }
            true
        }
        Command::Oracle => {
            let r = oracle::run(&config)?;
            oracle::emit(&r, &mut out)?;
            for c in &r.checks {
                println!("{}", c.line());
            }
            println!("time-translation residual {:.3e}", r.time_translation_residual);
            r.passed()
        }
    };
    for p in out.written() {
        println!("wrote {}", p.display());
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
