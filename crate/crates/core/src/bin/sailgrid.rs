use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sailgrid::experiment::{run_experiment, ActorSignal, ExperimentConfig};
use sailgrid::report::{values_csv, PolicyFile};
use sailgrid::{Error, TdVariant};

#[derive(Parser)]
#[command(
    name = "sailgrid",
    version,
    about = "Supervised actor-critic on the sailing grid"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train all trials and write CSV logs and a summary.
    Run(RunArgs),
    /// Evaluate a stored deterministic policy and print its state values.
    Evaluate {
        #[arg(long)]
        policy: PathBuf,
        #[arg(long, default_value_t = 0.9)]
        gamma: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 3)]
    rows: usize,
    #[arg(long, default_value_t = 5)]
    cols: usize,
    #[arg(long, default_value_t = 500)]
    episodes: usize,
    #[arg(long, default_value_t = 8)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha_actor: f64,
    #[arg(long, default_value_t = 0.1)]
    alpha_critic: f64,
    #[arg(long, default_value_t = 0.2)]
    temperature: f64,
    #[arg(long, default_value = "standard")]
    td_variant: TdVariant,
    #[arg(long, value_enum, default_value = "on")]
    supervisor: Switch,
    #[arg(long, default_value_t = 0.5)]
    k0: f64,
    #[arg(long, default_value_t = 0.99)]
    decay: f64,
    /// Drive the actor with the TD error (td) or with Q(s,a) - V(s).
    #[arg(long, default_value = "td")]
    actor_signal: ActorSignal,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl From<RunArgs> for ExperimentConfig {
    fn from(a: RunArgs) -> Self {
        ExperimentConfig {
            rows: a.rows,
            cols: a.cols,
            episodes: a.episodes,
            trials: a.trials,
            seed: a.seed,
            gamma: a.gamma,
            alpha_actor: a.alpha_actor,
            alpha_critic: a.alpha_critic,
            temperature: a.temperature,
            td_variant: a.td_variant,
            supervisor_enabled: a.supervisor == Switch::On,
            k0: a.k0,
            decay: a.decay,
            actor_signal: a.actor_signal,
            out_dir: a.out,
        }
    }
}

fn exit_code(err: &Error) -> ExitCode {
    if err.is_io() {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    let result = match cli.command {
        Command::Run(args) => {
            let config = ExperimentConfig::from(args);
            run_experiment(&config).map(|s| {
                println!(
                    "{} of {} trials reached the optimal path; mean final reward {:.4}",
                    s.optimal_trials, s.trials, s.mean_final_reward
                );
                println!(
                    "median first-optimal episode {}; mean wall clock {:.6} s per trial",
                    s.median_first_optimal_episode, s.mean_wall_clock_secs
                );
                println!("outputs written to {}", config.out_dir.display());
            })
        }
        Command::Evaluate { policy, gamma, tol } => PolicyFile::load(&policy).and_then(|file| {
            let values = file.evaluate(gamma, tol)?;
            print!("{}", values_csv(&file.world, &values));
            Ok(())
        }),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
