use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use moldkit::driver::{solve_with, SolverConfig};
use moldkit::harness::{
    generate_instance, parse_grid, run_experiment_to, GeneratorSpec, ModelKind,
};
use moldkit::io::{parse_instance, parse_schedule, write_instance, write_schedule};
use moldkit::model::{validate_instance, validate_schedule};
use moldkit::two_shelf::KnapsackBackend;

#[derive(Parser)]
#[command(name = "moldkit", version, about = "Moldable job scheduling toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Conv,
    Dp,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Table,
    Powerlaw,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file and print the makespan and guarantee.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = Backend::Conv)]
        backend: Backend,
        /// Also print the schedule.
        #[arg(long)]
        schedule: bool,
        /// Write the schedule to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a random monotone instance.
    Gen {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: u64,
        #[arg(long, value_enum, default_value_t = Model::Powerlaw)]
        model: Model,
        #[arg(long, default_value_t = 1.0)]
        a_min: f64,
        #[arg(long, default_value_t = 100.0)]
        a_max: f64,
        #[arg(long, default_value_t = 0.0)]
        beta_min: f64,
        #[arg(long, default_value_t = 1.0)]
        beta_max: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run both knapsack backends over a grid and write a CSV.
    Bench {
        /// e.g. "n=10,20;m=30..32;seeds=1..3;model=powerlaw"
        #[arg(long)]
        grid: String,
        #[arg(long, value_delimiter = ',', default_value = "0.1")]
        eps: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check an instance and optionally a schedule for it.
    Validate {
        instance: PathBuf,
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Solve {
            instance,
            eps,
            backend,
            schedule,
            out,
        } => {
            let inst = parse_instance(&read(&instance)?)?;
            let backend = match backend {
                Backend::Conv => KnapsackBackend::Convolution,
                Backend::Dp => KnapsackBackend::BellmanDp,
            };
            let config = SolverConfig::for_instance(&inst, eps)?.with_backend(backend);
            let result = solve_with(&inst, &config)?;
            println!("makespan {}", result.makespan);
            println!("lower_bound {}", result.lower_bound);
            println!("guarantee {}", result.label);
            println!("guesses {}", result.stats.estimator_calls());
            let text = write_schedule(&result.schedule);
            if schedule {
                print!("{text}");
            }
            if let Some(path) = out {
                std::fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(true)
        }
        Command::Gen {
            seed,
            n,
            m,
            model,
            a_min,
            a_max,
            beta_min,
            beta_max,
            out,
        } => {
            let model = match model {
                Model::Table => ModelKind::Table,
                Model::Powerlaw => ModelKind::PowerLaw,
            };
            let spec = GeneratorSpec {
                a_min,
                a_max,
                beta_min,
                beta_max,
                ..GeneratorSpec::new(seed, n, m, model)
            };
            let text = write_instance(&generate_instance(&spec)?);
            match out {
                Some(path) => std::fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(true)
        }
        Command::Bench { grid, eps, out } => {
            let grid = parse_grid(&grid)?;
            let records = run_experiment_to(&grid, &eps, &out)?;
            eprintln!("wrote {} rows to {}", records.len(), out.display());
            Ok(true)
        }
        Command::Validate { instance, schedule } => {
            let inst = parse_instance(&read(&instance)?)?;
            let report = validate_instance(&inst);
            if let Some(v) = report.violation {
                println!(
                    "instance invalid: job {} at k = {} ({:?})",
                    v.job, v.k, v.kind
                );
                return Ok(false);
            }
            println!("instance valid");
            if let Some(path) = schedule {
                let sched = parse_schedule(&read(&path)?)?;
                sched.check_complete(&inst)?;
                let r = validate_schedule(&sched, &inst)?;
                if !r.feasible {
                    match r.first_violation_time {
                        Some(t) => {
                            println!("schedule infeasible at t = {t} (peak {})", r.peak_usage)
                        }
                        None => bail!("infeasible schedule without a violation time"),
                    }
                    return Ok(false);
                }
                println!(
                    "schedule feasible, makespan {}, peak {}",
                    r.makespan, r.peak_usage
                );
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
