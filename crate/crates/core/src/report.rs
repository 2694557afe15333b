//! On-disk outputs: CSV series for each trial, run-level reward table,
//! JSON summary and stored greedy policies.
//!
//! CSV files are UTF-8 with `\n` line endings; floats are written with nine
//! significant digits in the style of C's `%.9g`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::actor::Policy;
use crate::critic::{bellman_evaluate, ValueTable};
use crate::env::{Action, GridWorld};
use crate::error::{Error, Result};
use crate::experiment::{ExperimentConfig, ExperimentLog, RunSummary};

const SIG_DIGITS: usize = 9;

/// Formats `x` like `printf("%.9g", x)`.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    // Round to the target precision first so the exponent reflects carries.
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIG_DIGITS as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIG_DIGITS as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    write_file(path, &text)
}

/// Writes the per-trial series for `log` into `out_dir` and returns the
/// paths written.
pub fn emit_figures_data(log: &ExperimentLog, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let world = &log.world;
    let mut written = Vec::new();
    let mut emit = |name: &str, body: String| -> Result<()> {
        let path = out_dir.join(name);
        write_file(&path, &body)?;
        written.push(path);
        Ok(())
    };

    let mut s = String::from("episode,reward\n");
    for (e, rec) in log.episodes.iter().enumerate() {
        let _ = writeln!(s, "{e},{}", format_float(rec.reward));
    }
    emit("rewards.csv", s)?;

    let mut s = String::from("step,row,col\n");
    for (i, c) in log.final_path.iter().enumerate() {
        let _ = writeln!(s, "{i},{},{}", c.row, c.col);
    }
    emit("path.csv", s)?;

    let mut s = String::from("state_row,state_col,q_up,q_down,q_left,q_right\n");
    for (cell, row) in world.enumerate_states().iter().zip(log.final_q.rows()) {
        let _ = write!(s, "{},{}", cell.row, cell.col);
        for q in row {
            let _ = write!(s, ",{}", format_float(*q));
        }
        s.push('\n');
    }
    emit("q_values.csv", s)?;

    let mut s = String::from("episode,step,action\n");
    for r in &log.steps {
        let _ = writeln!(s, "{},{},{}", r.episode, r.step, r.action);
    }
    emit("actions.csv", s)?;

    let mut s = String::from("episode,step,delta\n");
    for d in log.trace.samples() {
        let _ = writeln!(s, "{},{},{}", d.episode, d.step, format_float(d.delta));
    }
    emit("delta_trace.csv", s)?;

    let policy_path = out_dir.join("policy.json");
    PolicyFile::from_log(log).save(&policy_path)?;
    written.push(policy_path);
    Ok(written)
}

/// Episode rewards of all trials side by side: `episode,trial_0,trial_1,...`.
pub fn rewards_table(logs: &[ExperimentLog]) -> String {
    let mut s = String::from("episode");
    for log in logs {
        let _ = write!(s, ",trial_{}", log.trial);
    }
    s.push('\n');
    let episodes = logs.iter().map(|l| l.episodes.len()).max().unwrap_or(0);
    for e in 0..episodes {
        let _ = write!(s, "{e}");
        for log in logs {
            match log.episodes.get(e) {
                Some(rec) => {
                    let _ = write!(s, ",{}", format_float(rec.reward));
                }
                None => s.push(','),
            }
        }
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    config: &'a ExperimentConfig,
    world: &'a GridWorld,
    supervisor: Option<crate::supervisor::SupervisorSpec>,
    summary: &'a RunSummary,
}

#[derive(Serialize)]
struct TimingFile<'a> {
    mean_wall_clock_secs: f64,
    trial_wall_clock_secs: &'a [f64],
}

/// Writes the complete output tree of a run:
///
/// ```text
/// out_dir/rewards.csv      episode,trial_0,...
/// out_dir/summary.json     resolved config + summary statistics
/// out_dir/timing.json      wall-clock figures (not reproducible)
/// out_dir/trial_<i>/       rewards.csv path.csv q_values.csv actions.csv
///                          delta_trace.csv policy.json
/// ```
pub fn write_run(
    config: &ExperimentConfig,
    logs: &[ExperimentLog],
    summary: &RunSummary,
) -> Result<()> {
    let out = &config.out_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_file(&out.join("rewards.csv"), &rewards_table(logs))?;
    for log in logs {
        emit_figures_data(log, &out.join(format!("trial_{}", log.trial)))?;
    }
    let world = config.world()?;
    write_json(
        &out.join("summary.json"),
        &SummaryFile {
            config,
            world: &world,
            supervisor: if config.supervisor_enabled {
                Some(config.supervisor()?)
            } else {
                None
            },
            summary,
        },
    )?;
    write_json(
        &out.join("timing.json"),
        &TimingFile {
            mean_wall_clock_secs: summary.mean_wall_clock_secs,
            trial_wall_clock_secs: &summary.trial_wall_clock_secs,
        },
    )
}

/// A deterministic policy together with the world it acts in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyFile {
    pub world: GridWorld,
    /// One action per state, row-major.
    pub actions: Vec<Action>,
}

impl PolicyFile {
    pub fn from_log(log: &ExperimentLog) -> Self {
        let actions = match log.greedy_policy() {
            Policy::Deterministic(map) => map,
            _ => unreachable!("greedy policy is deterministic"),
        };
        PolicyFile {
            world: log.world.clone(),
            actions,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: PolicyFile = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        file.world.validate()?;
        if file.actions.len() != file.world.num_states() {
            return Err(Error::InvalidWorld(format!(
                "policy lists {} actions for {} states",
                file.actions.len(),
                file.world.num_states()
            )));
        }
        Ok(file)
    }

    pub fn evaluate(&self, gamma: f64, tol: f64) -> Result<ValueTable> {
        bellman_evaluate(
            &self.world,
            |s| {
                let mut p = [0.0; crate::env::NUM_ACTIONS];
                p[self.actions[s].index()] = 1.0;
                p
            },
            gamma,
            tol,
        )
    }
}

/// `state_row,state_col,value` table of a value function.
pub fn values_csv(world: &GridWorld, values: &ValueTable) -> String {
    let mut s = String::from("state_row,state_col,value\n");
    for (cell, v) in world.enumerate_states().iter().zip(values.values()) {
        let _ = writeln!(s, "{},{},{}", cell.row, cell.col, format_float(*v));
    }
    s
}
