//! Seeded multi-trial training of the supervised actor-critic.
//!
//! Every trial draws from its own ChaCha8 stream: the generator is seeded
//! with `seed` via `seed_from_u64` and the stream number is set to the trial
//! index. A trial's output therefore depends only on `(config, trial_index)`,
//! never on which thread ran it or in what order.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::actor::{advantage, select_action, Policy, QTable};
use crate::critic::{td_error, DopamineTrace, TdVariant, ValueTable};
use crate::env::{sailing_grid, Action, Cell, GridWorld};
use crate::error::{Error, Result};
use crate::supervisor::{composite_action, gain, supervisor_action, SupervisorSpec};

/// Half-width of the uniform interval initial action values are drawn from.
pub const INITIAL_Q_SCALE: f64 = 0.01;
/// Episodes averaged for the final-reward statistic.
pub const FINAL_WINDOW: usize = 50;

/// What the actor's preference step is driven by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActorSignal {
    /// The critic's prediction error.
    #[default]
    Td,
    /// `Q(s,a) − V(s)` taken before the critic's update.
    Advantage,
}

impl std::str::FromStr for ActorSignal {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "td" => Ok(ActorSignal::Td),
            "advantage" => Ok(ActorSignal::Advantage),
            other => Err(format!(
                "unknown actor signal `{other}` (expected td or advantage)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub rows: usize,
    pub cols: usize,
    pub episodes: usize,
    pub trials: usize,
    pub seed: u64,
    pub gamma: f64,
    pub alpha_actor: f64,
    pub alpha_critic: f64,
    pub temperature: f64,
    pub td_variant: TdVariant,
    pub supervisor_enabled: bool,
    pub k0: f64,
    pub decay: f64,
    pub actor_signal: ActorSignal,
    /// Not part of the serialized config, so summaries of identical runs
    /// written to different places stay identical.
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            rows: 3,
            cols: 5,
            episodes: 500,
            trials: 8,
            seed: 42,
            gamma: 0.9,
            alpha_actor: 0.05,
            alpha_critic: 0.1,
            temperature: 0.2,
            td_variant: TdVariant::Standard,
            supervisor_enabled: true,
            k0: 0.5,
            decay: 0.99,
            actor_signal: ActorSignal::Td,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    /// Checks every bound and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if self.rows == 0 {
            errors.push("rows must be at least 1".to_string());
        }
        if self.cols < 2 {
            errors.push(format!("cols = {} must be at least 2", self.cols));
        }
        if self.episodes == 0 {
            errors.push("episodes must be at least 1".to_string());
        }
        if self.trials == 0 {
            errors.push("trials must be at least 1".to_string());
        }
        if !(0.0..1.0).contains(&self.gamma) {
            errors.push(format!("gamma = {} must lie in [0, 1)", self.gamma));
        }
        for (name, value) in [
            ("alpha_actor", self.alpha_actor),
            ("alpha_critic", self.alpha_critic),
        ] {
            if !(value > 0.0 && value <= 1.0) {
                errors.push(format!("{name} = {value} must lie in (0, 1]"));
            }
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            errors.push(format!(
                "temperature = {} must be positive",
                self.temperature
            ));
        }
        if !(0.0..=1.0).contains(&self.k0) {
            errors.push(format!("k0 = {} must lie in [0, 1]", self.k0));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            errors.push(format!("decay = {} must lie in (0, 1]", self.decay));
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errors))
        }
    }

    pub fn world(&self) -> Result<GridWorld> {
        sailing_grid(self.rows, self.cols)
    }

    pub fn supervisor(&self) -> Result<SupervisorSpec> {
        SupervisorSpec::for_world(&self.world()?, self.k0, self.decay)
    }

    /// Random stream owned by one trial.
    pub fn trial_rng(&self, trial_index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial_index as u64);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRecord {
    pub reward: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub episode: usize,
    pub step: usize,
    pub state: Cell,
    pub action: Action,
    pub next_state: Cell,
    pub reward: f64,
    pub delta: f64,
}

/// Everything one trial produced.
#[derive(Debug, Clone)]
pub struct ExperimentLog {
    pub trial: usize,
    pub world: GridWorld,
    pub episodes: Vec<EpisodeRecord>,
    pub steps: Vec<StepRecord>,
    pub trace: DopamineTrace,
    pub final_q: QTable,
    pub final_v: ValueTable,
    pub final_path: Vec<Cell>,
    /// First episode after which the greedy path from the start was a
    /// shortest path to the goal.
    pub first_optimal_episode: Option<usize>,
    pub wall_clock: Duration,
}

impl ExperimentLog {
    pub fn path_is_optimal(&self) -> bool {
        is_optimal_path(&self.world, &self.final_path)
    }

    /// Actions along the final greedy path.
    pub fn path_actions(&self) -> Vec<Action> {
        self.final_path
            .windows(2)
            .map(|w| move_between(w[0], w[1]).expect("greedy path moves between neighbours"))
            .collect()
    }

    /// Mean episode reward over the last `FINAL_WINDOW` episodes (or all of
    /// them when the run is shorter).
    pub fn final_reward_mean(&self) -> f64 {
        let n = self.episodes.len().min(FINAL_WINDOW);
        let tail = &self.episodes[self.episodes.len() - n..];
        tail.iter().map(|e| e.reward).sum::<f64>() / n as f64
    }

    pub fn greedy_policy(&self) -> Policy {
        crate::actor::greedy_policy(&self.final_q)
    }
}

fn move_between(from: Cell, to: Cell) -> Option<Action> {
    match (
        to.row as isize - from.row as isize,
        to.col as isize - from.col as isize,
    ) {
        (-1, 0) => Some(Action::Up),
        (1, 0) => Some(Action::Down),
        (0, -1) => Some(Action::Left),
        (0, 1) => Some(Action::Right),
        _ => None,
    }
}

/// Cells visited by following argmax Q from the start. Stops at the goal, or
/// as soon as a cell would repeat.
pub fn greedy_path(world: &GridWorld, q: &QTable) -> Vec<Cell> {
    let mut path = vec![world.start()];
    let mut seen = vec![false; world.num_states()];
    let mut cell = world.start();
    seen[world.start_index()] = true;
    while !world.is_goal(cell) {
        let s = world.index(cell).expect("path stays on the grid");
        let action = q.argmax(s).expect("state in range");
        let next = world.step(cell, action).expect("valid cell").next_state;
        let j = world.index(next).expect("successor on the grid");
        if seen[j] {
            break;
        }
        seen[j] = true;
        path.push(next);
        cell = next;
    }
    path
}

pub fn is_optimal_path(world: &GridWorld, path: &[Cell]) -> bool {
    match (path.last(), world.shortest_path_len(world.start())) {
        (Some(&last), Ok(Some(len))) => world.is_goal(last) && path.len() == len + 1,
        _ => false,
    }
}

pub fn train_trial(config: &ExperimentConfig, trial_index: usize) -> Result<ExperimentLog> {
    config.validate()?;
    let started = Instant::now();
    let world = config.world()?;
    let supervisor = config.supervisor()?;
    let mut rng = config.trial_rng(trial_index);

    let mut q = QTable::random(&world, INITIAL_Q_SCALE, &mut rng);
    let mut v = ValueTable::zeros(&world);
    let behaviour = Policy::Softmax {
        temperature: config.temperature,
    };

    let mut episodes = Vec::with_capacity(config.episodes);
    let mut steps = Vec::new();
    let mut trace = DopamineTrace::new();
    let mut first_optimal_episode = None;

    for episode in 0..config.episodes {
        let k = gain(&supervisor, episode as u64);
        let mut cell = world.start();
        let mut total_reward = 0.0;
        let mut count = 0;
        while count < world.max_steps() {
            let s = world.index(cell)?;
            let proposed = select_action(&behaviour, &q, s, &mut rng)?;
            let action = if config.supervisor_enabled {
                let hint = supervisor_action(&world, cell)?;
                composite_action(proposed, hint, k, &mut rng)?
            } else {
                proposed
            };

            let t = world.step(cell, action)?;
            let s_next = world.index(t.next_state)?;
            let v_next = if t.terminal { 0.0 } else { v.get(s_next)? };
            let delta = td_error(config.td_variant, t.reward, v_next, v.get(s)?, config.gamma)?;
            let actor_signal = match config.actor_signal {
                ActorSignal::Td => delta,
                ActorSignal::Advantage => advantage(&q, &v, s, action)?,
            };
            v.update(s, delta, config.alpha_critic)?;
            q.update(s, action, actor_signal, config.alpha_actor)?;

            steps.push(StepRecord {
                episode,
                step: count,
                state: cell,
                action,
                next_state: t.next_state,
                reward: t.reward,
                delta,
            });
            trace.push(episode, count, delta);
            total_reward += t.reward;
            count += 1;
            cell = t.next_state;
            if t.terminal {
                break;
            }
        }
        episodes.push(EpisodeRecord {
            reward: total_reward,
            steps: count,
        });
        if first_optimal_episode.is_none() && is_optimal_path(&world, &greedy_path(&world, &q)) {
            first_optimal_episode = Some(episode);
        }
    }

    let final_path = greedy_path(&world, &q);
    Ok(ExperimentLog {
        trial: trial_index,
        world,
        episodes,
        steps,
        trace,
        final_q: q,
        final_v: v,
        final_path,
        first_optimal_episode,
        wall_clock: started.elapsed(),
    })
}

/// How trials are scheduled across threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// One rayon task per trial. Runs sequentially when the crate is built
    /// without the `parallel` feature.
    #[default]
    Parallel,
}

/// Runs every trial of `config`. Logs come back ordered by trial index.
pub fn run_trials(config: &ExperimentConfig, execution: Execution) -> Result<Vec<ExperimentLog>> {
    config.validate()?;
    match execution {
        Execution::Sequential => run_sequential(config),
        Execution::Parallel => run_parallel(config),
    }
}

fn run_sequential(config: &ExperimentConfig) -> Result<Vec<ExperimentLog>> {
    (0..config.trials).map(|i| train_trial(config, i)).collect()
}

#[cfg(feature = "parallel")]
fn run_parallel(config: &ExperimentConfig) -> Result<Vec<ExperimentLog>> {
    use rayon::prelude::*;
    (0..config.trials)
        .into_par_iter()
        .map(|i| train_trial(config, i))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn run_parallel(config: &ExperimentConfig) -> Result<Vec<ExperimentLog>> {
    run_sequential(config)
}

/// Aggregate statistics over all trials. Everything here except the timing
/// fields is a pure function of the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub trials: usize,
    pub optimal_trials: usize,
    pub first_optimal_episode: Vec<Option<usize>>,
    /// Median of `first_optimal_episode`, a trial that never got there
    /// counting as `episodes`.
    pub median_first_optimal_episode: f64,
    pub final_reward_means: Vec<f64>,
    pub mean_final_reward: f64,
    #[serde(skip)]
    pub mean_wall_clock_secs: f64,
    #[serde(skip)]
    pub trial_wall_clock_secs: Vec<f64>,
}

impl RunSummary {
    pub fn from_logs(config: &ExperimentConfig, logs: &[ExperimentLog]) -> Self {
        let first: Vec<_> = logs.iter().map(|l| l.first_optimal_episode).collect();
        let finals: Vec<f64> = logs.iter().map(ExperimentLog::final_reward_mean).collect();
        let secs: Vec<f64> = logs.iter().map(|l| l.wall_clock.as_secs_f64()).collect();
        let n = logs.len().max(1) as f64;
        RunSummary {
            trials: logs.len(),
            optimal_trials: logs.iter().filter(|l| l.path_is_optimal()).count(),
            median_first_optimal_episode: median_first_optimal(&first, config.episodes),
            first_optimal_episode: first,
            mean_final_reward: finals.iter().sum::<f64>() / n,
            final_reward_means: finals,
            mean_wall_clock_secs: secs.iter().sum::<f64>() / n,
            trial_wall_clock_secs: secs,
        }
    }
}

pub fn median_first_optimal(first: &[Option<usize>], episodes: usize) -> f64 {
    let mut xs: Vec<usize> = first.iter().map(|f| f.unwrap_or(episodes)).collect();
    if xs.is_empty() {
        return episodes as f64;
    }
    xs.sort_unstable();
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m] as f64
    } else {
        (xs[m - 1] + xs[m]) as f64 / 2.0
    }
}

/// Trains all trials, writes every output file under `config.out_dir` and
/// returns the aggregate summary.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary> {
    run_experiment_with(config, Execution::default())
}

pub fn run_experiment_with(config: &ExperimentConfig, execution: Execution) -> Result<RunSummary> {
    config.validate()?;
    let logs = run_trials(config, execution)?;
    let summary = RunSummary::from_logs(config, &logs);
    crate::report::write_run(config, &logs, &summary)?;
    Ok(summary)
}
