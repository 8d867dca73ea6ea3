//! Command-line harness: solve a problem once, run convergence or
//! frequency sweeps, compare methods, or print oscillatory moments.

use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use oscikg::harness::{
    self, emit_state_csv, ExperimentConfig, MethodId, Problem, RunRecord,
};
use oscikg::reference::{RefMethod, ReferenceSpec};
use oscikg::{filon, Result, SpectralGrid};

#[derive(Parser)]
#[command(name = "oscikg", about = "Klein-Gordon solver with oscillatory mass", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Problem preset: example1 | example2 | constant_mass | free
    #[arg(long, default_value = "example1")]
    problem: String,

    /// Oscillation frequency (example1 only)
    #[arg(long)]
    omega: Option<f64>,

    /// Number of spatial sub-intervals (even)
    #[arg(long, default_value_t = 200)]
    grid_m: usize,

    /// Final time
    #[arg(long, default_value_t = 1.0)]
    t_final: f64,
}

#[derive(Args, Clone)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Comma-separated step counts, strictly increasing
    #[arg(long, value_delimiter = ',', required = true)]
    steps: Vec<usize>,

    /// Comma-separated method ids
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,

    /// Step count of the fine reference (default: 100x the finest run)
    #[arg(long)]
    ref_steps: Option<usize>,

    /// Output CSV path (stdout when absent)
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one method once and dump the final state
    Solve {
        #[command(flatten)]
        common: CommonArgs,

        /// Number of time steps
        #[arg(long, default_value_t = 100)]
        steps: usize,

        /// Method id
        #[arg(long, default_value = "xi3-filon")]
        method: String,

        /// Write the final state as CSV to this path (stdout when absent)
        #[arg(long)]
        dump_state: Option<String>,
    },

    /// Error-vs-step-size sweep against a fine reference
    Convergence {
        #[command(flatten)]
        sweep: SweepArgs,
    },

    /// Cross a step ladder with a list of frequencies (example1 only)
    OmegaSweep {
        #[command(flatten)]
        sweep: SweepArgs,

        /// Comma-separated frequencies
        #[arg(long, value_delimiter = ',', required = true)]
        omegas: Vec<f64>,
    },

    /// Convergence sweep over all standard methods
    Compare {
        #[command(flatten)]
        sweep: SweepArgs,
    },

    /// Print the oscillatory moments mu_1..mu_3 for one (omega, h)
    Moments {
        #[arg(long)]
        omega: f64,

        #[arg(long)]
        h: f64,
    },
}

fn parse_methods(raw: &[String], default: &[MethodId]) -> Result<Vec<MethodId>> {
    if raw.is_empty() {
        return Ok(default.to_vec());
    }
    raw.iter().map(|s| MethodId::from_str(s)).collect()
}

fn build_config(sweep: &SweepArgs, methods: Vec<MethodId>) -> Result<ExperimentConfig> {
    let problem = Problem::from_str(&sweep.common.problem)?;
    let finest = sweep.steps.last().copied().unwrap_or(0).max(1);
    let ref_steps = sweep.ref_steps.unwrap_or(100 * finest);
    Ok(ExperimentConfig {
        problem,
        omega: sweep.common.omega,
        x0: -10.0,
        x1: 10.0,
        grid_m: sweep.common.grid_m,
        t0: 0.0,
        t_final: sweep.common.t_final,
        steps_list: sweep.steps.clone(),
        methods,
        reference: ReferenceSpec {
            method: RefMethod::Xi3Fine,
            steps: ref_steps,
            cross_check_tolerance: 1e-6,
        },
        out_path: sweep.out.clone(),
        seed: 0,
        timing_reps: 3,
    })
}

fn write_records(records: &[RunRecord], out: &Option<String>) -> Result<()> {
    match out {
        Some(path) => harness::emit_csv_path(records, path),
        None => {
            let stdout = std::io::stdout();
            harness::emit_csv(records, &mut stdout.lock()).map_err(|source| {
                oscikg::Error::Io {
                    path: "<stdout>".into(),
                    source,
                }
            })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve {
            common,
            steps,
            method,
            dump_state,
        } => {
            let problem = Problem::from_str(&common.problem)?;
            if common.omega.is_some() && problem != Problem::Example1 {
                return Err(oscikg::Error::InvalidConfig(format!(
                    "--omega only applies to example1, not {problem}"
                )));
            }
            let method = MethodId::from_str(&method)?;
            let grid = SpectralGrid::new(-10.0, 10.0, common.grid_m)?;
            let model = harness::build_model(problem, common.omega)?;
            let state0 = harness::initial_state(&grid, 0.0);
            let state = harness::solve_with_method(
                &grid,
                &model,
                method,
                steps,
                common.t_final,
                &state0,
            )?;
            match dump_state {
                Some(path) => {
                    let file = std::fs::File::create(&path).map_err(|source| {
                        oscikg::Error::Io {
                            path: path.clone(),
                            source,
                        }
                    })?;
                    let mut writer = std::io::BufWriter::new(file);
                    emit_state_csv(&grid, &state, &mut writer).map_err(|source| {
                        oscikg::Error::Io { path, source }
                    })?;
                }
                None => {
                    let stdout = std::io::stdout();
                    emit_state_csv(&grid, &state, &mut stdout.lock()).map_err(|source| {
                        oscikg::Error::Io {
                            path: "<stdout>".into(),
                            source,
                        }
                    })?;
                }
            }
            Ok(())
        }
        Command::Convergence { sweep } => {
            let methods = parse_methods(&sweep.methods, &[MethodId::Xi3Filon])?;
            let cfg = build_config(&sweep, methods)?;
            let records = harness::run_convergence(&cfg)?;
            write_records(&records, &cfg.out_path)
        }
        Command::OmegaSweep { sweep, omegas } => {
            let methods = parse_methods(&sweep.methods, &[MethodId::Xi3Filon])?;
            let cfg = build_config(&sweep, methods)?;
            let records = harness::run_omega_sweep(&cfg, &omegas)?;
            write_records(&records, &cfg.out_path)
        }
        Command::Compare { sweep } => {
            let all = [
                MethodId::Rk2,
                MethodId::Rk4,
                MethodId::Xi3Filon,
                MethodId::Xi3Gl4,
                MethodId::Xi3Gl6,
                MethodId::Xi3Gl8,
            ];
            let methods = parse_methods(&sweep.methods, &all)?;
            let cfg = build_config(&sweep, methods)?;
            let records = harness::run_convergence(&cfg)?;
            write_records(&records, &cfg.out_path)
        }
        Command::Moments { omega, h } => {
            let m = filon::moments(omega, h)?;
            for (name, mu) in [("mu1", m.mu1), ("mu2", m.mu2), ("mu3", m.mu3)] {
                println!("{name},{:.16e},{:.16e}", mu.re, mu.im);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
