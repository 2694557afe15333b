//! State-value estimates and temporal-difference ("dopamine") signals.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::env::{Action, GridWorld, NUM_ACTIONS};
use crate::error::{check_unit_interval, Error, Result};

/// How the prediction error is formed from a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TdVariant {
    /// `r + γV(s') − V(s)`
    #[default]
    Standard,
    /// `r² + (γV(s') − V(s))²`. Never negative, so it cannot signal a
    /// worse-than-expected outcome.
    Squared,
}

impl FromStr for TdVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "standard" => Ok(TdVariant::Standard),
            "squared" => Ok(TdVariant::Squared),
            other => Err(format!(
                "unknown TD variant `{other}` (expected standard or squared)"
            )),
        }
    }
}

impl fmt::Display for TdVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TdVariant::Standard => "standard",
            TdVariant::Squared => "squared",
        })
    }
}

pub fn td_error(variant: TdVariant, r: f64, v_next: f64, v_cur: f64, gamma: f64) -> Result<f64> {
    check_unit_interval("gamma", gamma)?;
    let bootstrap = gamma * v_next - v_cur;
    Ok(match variant {
        TdVariant::Standard => r + bootstrap,
        TdVariant::Squared => r * r + bootstrap * bootstrap,
    })
}

/// Classical-conditioning associative-strength change `αβ(λ − ΣV)`.
pub fn rescorla_wagner(alpha: f64, beta: f64, lambda_rw: f64, sum_v: f64) -> f64 {
    alpha * beta * (lambda_rw - sum_v)
}

/// Per-state value estimates. The goal entry is pinned at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    values: Vec<f64>,
    goal: usize,
}

impl ValueTable {
    pub fn zeros(world: &GridWorld) -> Self {
        ValueTable {
            values: vec![0.0; world.num_states()],
            goal: world.goal_index(),
        }
    }

    /// Builds a table from raw values; the goal entry is forced to zero.
    pub fn from_values(world: &GridWorld, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != world.num_states() {
            return Err(Error::InvalidWorld(format!(
                "value table has {} entries, world has {} states",
                values.len(),
                world.num_states()
            )));
        }
        values[world.goal_index()] = 0.0;
        Ok(ValueTable {
            values,
            goal: world.goal_index(),
        })
    }

    pub fn get(&self, state: usize) -> Result<f64> {
        self.values.get(state).copied().ok_or(Error::InvalidState {
            index: state,
            count: self.values.len(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// One TD(0) step: `V(s) += α·δ`. The goal entry never moves.
    pub fn update(&mut self, state: usize, delta: f64, alpha_critic: f64) -> Result<()> {
        if !(alpha_critic > 0.0 && alpha_critic <= 1.0) {
            return Err(Error::OutOfRange {
                name: "alpha_critic",
                value: alpha_critic,
                range: "(0, 1]",
            });
        }
        let count = self.values.len();
        let v = self.values.get_mut(state).ok_or(Error::InvalidState {
            index: state,
            count,
        })?;
        if state != self.goal {
            *v += alpha_critic * delta;
        }
        Ok(())
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &ValueTable) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn critic_update(
    mut table: ValueTable,
    state: usize,
    delta: f64,
    alpha_critic: f64,
) -> Result<ValueTable> {
    table.update(state, delta, alpha_critic)?;
    Ok(table)
}

pub(crate) fn check_discount(gamma: f64) -> Result<()> {
    if (0.0..1.0).contains(&gamma) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "gamma",
            value: gamma,
            range: "[0, 1)",
        })
    }
}

pub(crate) fn check_tolerance(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "tol",
            value: tol,
            range: "(0, inf)",
        })
    }
}

/// Iterative policy evaluation on a deterministic grid.
///
/// `policy(s)` gives the action distribution at state index `s` in canonical
/// action order. Sweeps `V(s) = Σ_a π(s,a)[r(s,a) + γV(s')]` synchronously
/// with `V(goal) = 0` until the max-norm change drops below `tol`.
pub fn bellman_evaluate<P>(world: &GridWorld, policy: P, gamma: f64, tol: f64) -> Result<ValueTable>
where
    P: Fn(usize) -> [f64; NUM_ACTIONS],
{
    check_discount(gamma)?;
    check_tolerance(tol)?;

    let n = world.num_states();
    let goal = world.goal_index();
    let mut outcomes = Vec::with_capacity(n);
    for s in 0..n {
        let mut row = [(0usize, 0.0f64); NUM_ACTIONS];
        for a in Action::ALL {
            let (next, r, _) = world.step_index(s, a)?;
            row[a.index()] = (next, r);
        }
        outcomes.push(row);
    }
    let probs: Vec<[f64; NUM_ACTIONS]> = (0..n).map(&policy).collect();

    let mut v = vec![0.0; n];
    let mut next_v = vec![0.0; n];
    loop {
        let mut change: f64 = 0.0;
        for s in 0..n {
            next_v[s] = if s == goal {
                0.0
            } else {
                probs[s]
                    .iter()
                    .zip(&outcomes[s])
                    .map(|(p, &(next, r))| p * (r + gamma * v[next]))
                    .sum()
            };
            change = change.max((next_v[s] - v[s]).abs());
        }
        std::mem::swap(&mut v, &mut next_v);
        if change < tol {
            break;
        }
    }
    ValueTable::from_values(world, v)
}

/// One recorded prediction error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopamineSample {
    pub episode: usize,
    pub step: usize,
    pub delta: f64,
}

/// Ordered record of prediction errors over a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DopamineTrace {
    samples: Vec<DopamineSample>,
}

impl DopamineTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a sample. Panics if `(episode, step)` goes backwards.
    pub fn push(&mut self, episode: usize, step: usize, delta: f64) {
        if let Some(last) = self.samples.last() {
            assert!(
                (episode, step) >= (last.episode, last.step),
                "dopamine trace indices must not decrease"
            );
        }
        self.samples.push(DopamineSample {
            episode,
            step,
            delta,
        });
    }

    pub fn samples(&self) -> &[DopamineSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}
