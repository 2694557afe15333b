//! The supervisor half of the composite actor: expected-utility weights
//! over actions, the value recursion they induce, a hint heuristic and the
//! gain-scheduled mixing of hints with the actor's own choices.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::critic::{check_discount, check_tolerance, ValueTable};
use crate::env::{Action, Cell, GridWorld, NUM_ACTIONS};
use crate::error::{check_unit_interval, Error, Result};

const NORM_TOL: f64 = 1e-12;

fn check_distribution(p: &[f64]) -> Result<()> {
    if let Some(&neg) = p.iter().find(|&&x| x < 0.0 || x.is_nan()) {
        return Err(Error::NegativeWeight(neg));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(total));
    }
    Ok(())
}

/// A finite set of choices with a probability on each.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceSet<T> {
    elements: Vec<T>,
    probs: Vec<f64>,
}

impl<T> ChoiceSet<T> {
    pub fn new(elements: Vec<T>, probs: Vec<f64>) -> Result<Self> {
        if elements.len() != probs.len() {
            return Err(Error::InvalidWorld(format!(
                "{} choices but {} probabilities",
                elements.len(),
                probs.len()
            )));
        }
        check_distribution(&probs)?;
        Ok(ChoiceSet { elements, probs })
    }

    pub fn elements(&self) -> &[T] {
        &self.elements
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }
}

/// Choices carrying strictly positive probability, in input order.
pub fn choice_support<T>(choices: &ChoiceSet<T>) -> Vec<&T> {
    choices
        .elements
        .iter()
        .zip(&choices.probs)
        .filter(|(_, &p)| p > 0.0)
        .map(|(z, _)| z)
        .collect()
}

/// Expected reward of one action: `Σ_s p(s)·r(o_a(s))`, where
/// `rewards_for_action[s]` is the reward the action earns from state `s`.
pub fn action_utility(state_probs: &[f64], rewards_for_action: &[f64]) -> Result<f64> {
    if state_probs.len() != rewards_for_action.len() {
        return Err(Error::InvalidWorld(format!(
            "{} state probabilities but {} rewards",
            state_probs.len(),
            rewards_for_action.len()
        )));
    }
    check_distribution(state_probs)?;
    Ok(state_probs
        .iter()
        .zip(rewards_for_action)
        .map(|(p, r)| p * r)
        .sum())
}

/// Utilities of all four actions on a grid, with `r(o_a(s))` the reward of
/// stepping from `s` with `a`.
pub fn grid_action_utilities(world: &GridWorld, state_probs: &[f64]) -> Result<[f64; NUM_ACTIONS]> {
    let mut out = [0.0; NUM_ACTIONS];
    for a in Action::ALL {
        let rewards = (0..world.num_states())
            .map(|s| world.step_index(s, a).map(|(_, r, _)| r))
            .collect::<Result<Vec<_>>>()?;
        out[a.index()] = action_utility(state_probs, &rewards)?;
    }
    Ok(out)
}

/// Rescales nonnegative weights to sum to one. All-zero weights become
/// uniform.
pub fn normalize_utilities(u: [f64; NUM_ACTIONS]) -> Result<[f64; NUM_ACTIONS]> {
    if let Some(&neg) = u.iter().find(|&&x| x < 0.0 || x.is_nan()) {
        return Err(Error::NegativeWeight(neg));
    }
    let total: f64 = u.iter().sum();
    if total == 0.0 {
        return Ok([1.0 / NUM_ACTIONS as f64; NUM_ACTIONS]);
    }
    Ok(u.map(|x| x / total))
}

/// Value of following the utility-weighted action mixture:
/// `V(s) = Σ_a U_a·[r(s,a) + γ·V(s')]` with `s'` the successor of `(s, a)`
/// and `V(goal) = 0`, iterated to a max-norm change below `tol`.
pub fn supervised_value(
    world: &GridWorld,
    utilities: &[f64; NUM_ACTIONS],
    gamma: f64,
    tol: f64,
) -> Result<ValueTable> {
    check_distribution(utilities)?;
    check_discount(gamma)?;
    check_tolerance(tol)?;

    let goal = world.goal_index();
    let mut v = vec![0.0; world.num_states()];
    loop {
        let prev = v.clone();
        for (s, value) in v.iter_mut().enumerate() {
            if s == goal {
                continue;
            }
            let mut acc = 0.0;
            for a in Action::ALL {
                let (next, r, _) = world.step_index(s, a)?;
                acc += utilities[a.index()] * (r + gamma * prev[next]);
            }
            *value = acc;
        }
        let change = v
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if change < tol {
            break;
        }
    }
    ValueTable::from_values(world, v)
}

/// Utility weights plus the gain schedule `k(e) = k0·decay^e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupervisorSpec {
    pub utilities: [f64; NUM_ACTIONS],
    pub k0: f64,
    pub decay: f64,
}

impl SupervisorSpec {
    pub fn new(utilities: [f64; NUM_ACTIONS], k0: f64, decay: f64) -> Result<Self> {
        check_unit_interval("k0", k0)?;
        if !(decay > 0.0 && decay <= 1.0) {
            return Err(Error::OutOfRange {
                name: "decay",
                value: decay,
                range: "(0, 1]",
            });
        }
        Ok(SupervisorSpec {
            utilities,
            k0,
            decay,
        })
    }

    /// Utilities taken as the normalized expected reward of each action
    /// under a uniform distribution over the non-terminal states.
    pub fn for_world(world: &GridWorld, k0: f64, decay: f64) -> Result<Self> {
        let n = world.num_states();
        let goal = world.goal_index();
        let p = 1.0 / (n - 1) as f64;
        let probs: Vec<f64> = (0..n).map(|s| if s == goal { 0.0 } else { p }).collect();
        let raw = grid_action_utilities(world, &probs)?;
        Self::new(normalize_utilities(raw)?, k0, decay)
    }
}

pub fn gain(spec: &SupervisorSpec, episode: u64) -> f64 {
    let exp = i32::try_from(episode).unwrap_or(i32::MAX);
    (spec.k0 * spec.decay.powi(exp)).clamp(0.0, 1.0)
}

/// One-step lookahead hint: the action maximizing
/// `reward(s, a) − manhattan(s', goal)`, ties to the lowest index.
pub fn supervisor_action(world: &GridWorld, state: Cell) -> Result<Action> {
    world.check_cell(state)?;
    if world.is_goal(state) {
        return Err(Error::TerminalState {
            row: state.row,
            col: state.col,
        });
    }
    let mut best = Action::Up;
    let mut best_score = f64::NEG_INFINITY;
    for a in Action::ALL {
        let t = world.step(state, a)?;
        let score = t.reward - t.next_state.manhattan(world.goal()) as f64;
        if score > best_score {
            best = a;
            best_score = score;
        }
    }
    Ok(best)
}

/// Mixes the two proposals: the supervisor's with probability `k`. Always
/// consumes exactly one uniform draw.
pub fn composite_action<R: Rng + ?Sized>(
    actor_choice: Action,
    supervisor_choice: Action,
    k: f64,
    rng: &mut R,
) -> Result<Action> {
    check_unit_interval("k", k)?;
    let u: f64 = rng.gen();
    Ok(if u < k {
        supervisor_choice
    } else {
        actor_choice
    })
}
