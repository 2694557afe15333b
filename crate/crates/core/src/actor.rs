//! Action values, the behavioural policy built on them, and the actor's
//! learning step.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::critic::ValueTable;
use crate::env::{Action, GridWorld, NUM_ACTIONS};
use crate::error::{Error, Result};

/// Action values `Q(s, a)`, one row per state in canonical action order.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    rows: Vec<[f64; NUM_ACTIONS]>,
}

impl QTable {
    pub fn zeros(num_states: usize) -> Self {
        QTable {
            rows: vec![[0.0; NUM_ACTIONS]; num_states],
        }
    }

    pub fn from_rows(rows: Vec<[f64; NUM_ACTIONS]>) -> Self {
        QTable { rows }
    }

    /// Entries drawn i.i.d. uniform from `[-scale, scale]`, states in
    /// row-major order and actions in canonical order.
    pub fn random<R: Rng + ?Sized>(world: &GridWorld, scale: f64, rng: &mut R) -> Self {
        let rows = (0..world.num_states())
            .map(|_| std::array::from_fn(|_| rng.gen_range(-scale..=scale)))
            .collect();
        QTable { rows }
    }

    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, state: usize) -> Result<&[f64; NUM_ACTIONS]> {
        self.rows.get(state).ok_or(Error::InvalidState {
            index: state,
            count: self.rows.len(),
        })
    }

    pub fn get(&self, state: usize, action: Action) -> Result<f64> {
        Ok(self.row(state)?[action.index()])
    }

    pub fn rows(&self) -> &[[f64; NUM_ACTIONS]] {
        &self.rows
    }

    /// `Q(s, a) += α·signal`.
    pub fn update(
        &mut self,
        state: usize,
        action: Action,
        signal: f64,
        alpha_actor: f64,
    ) -> Result<()> {
        if !(alpha_actor > 0.0 && alpha_actor <= 1.0) {
            return Err(Error::OutOfRange {
                name: "alpha_actor",
                value: alpha_actor,
                range: "(0, 1]",
            });
        }
        let count = self.rows.len();
        let row = self.rows.get_mut(state).ok_or(Error::InvalidState {
            index: state,
            count,
        })?;
        row[action.index()] += alpha_actor * signal;
        Ok(())
    }

    /// Highest-valued action at `state`, ties to the lowest index.
    pub fn argmax(&self, state: usize) -> Result<Action> {
        let row = self.row(state)?;
        let mut best = 0;
        for a in 1..NUM_ACTIONS {
            if row[a] > row[best] {
                best = a;
            }
        }
        Ok(Action::ALL[best])
    }
}

pub fn actor_update(
    mut q: QTable,
    state: usize,
    action: Action,
    delta: f64,
    alpha_actor: f64,
) -> Result<QTable> {
    q.update(state, action, delta, alpha_actor)?;
    Ok(q)
}

/// `A(s, a) = Q(s, a) − V(s)`.
pub fn advantage(q: &QTable, v: &ValueTable, state: usize, action: Action) -> Result<f64> {
    Ok(q.get(state, action)? - v.get(state)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Policy {
    /// Boltzmann distribution over the row of Q.
    Softmax {
        temperature: f64,
    },
    /// One fixed action per state index.
    Deterministic(Vec<Action>),
    UniformRandom,
}

impl Policy {
    /// Action distribution at `state` in canonical action order.
    pub fn probabilities(&self, q: &QTable, state: usize) -> Result<[f64; NUM_ACTIONS]> {
        match self {
            Policy::Softmax { temperature } => {
                if temperature.is_nan() || *temperature <= 0.0 {
                    return Err(Error::OutOfRange {
                        name: "temperature",
                        value: *temperature,
                        range: "(0, inf)",
                    });
                }
                Ok(softmax(q.row(state)?, *temperature))
            }
            Policy::Deterministic(map) => {
                let action = map.get(state).ok_or(Error::InvalidState {
                    index: state,
                    count: map.len(),
                })?;
                let mut p = [0.0; NUM_ACTIONS];
                p[action.index()] = 1.0;
                Ok(p)
            }
            Policy::UniformRandom => Ok([1.0 / NUM_ACTIONS as f64; NUM_ACTIONS]),
        }
    }
}

pub fn action_probabilities(
    policy: &Policy,
    q: &QTable,
    state: usize,
) -> Result<[f64; NUM_ACTIONS]> {
    policy.probabilities(q, state)
}

fn softmax(prefs: &[f64; NUM_ACTIONS], temperature: f64) -> [f64; NUM_ACTIONS] {
    let max = prefs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = prefs.map(|x| ((x - max) / temperature).exp());
    let total: f64 = out.iter().sum();
    for p in &mut out {
        *p /= total;
    }
    out
}

/// Inverse-CDF lookup of a uniform draw `u ∈ [0, 1)` in canonical order.
///
/// Rounding can leave the cumulative sum a hair below one; a draw past it
/// falls to the last action with positive mass.
pub fn sample_action(probs: &[f64; NUM_ACTIONS], u: f64) -> Action {
    let mut cumulative = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return Action::ALL[i];
        }
    }
    let last = probs
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(NUM_ACTIONS - 1);
    Action::ALL[last]
}

/// Samples from the policy at `state`. Deterministic policies consume no
/// randomness; the other kinds consume exactly one draw.
pub fn select_action<R: Rng + ?Sized>(
    policy: &Policy,
    q: &QTable,
    state: usize,
    rng: &mut R,
) -> Result<Action> {
    if let Policy::Deterministic(map) = policy {
        return map.get(state).copied().ok_or(Error::InvalidState {
            index: state,
            count: map.len(),
        });
    }
    let probs = policy.probabilities(q, state)?;
    Ok(sample_action(&probs, rng.gen::<f64>()))
}

pub fn greedy_policy(q: &QTable) -> Policy {
    Policy::Deterministic(
        (0..q.num_states())
            .map(|s| q.argmax(s).expect("state index in range"))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::grid_sailing_task;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(row: [f64; 4]) -> QTable {
        QTable::from_rows(vec![row])
    }

    #[test]
    fn advantage_examples() {
        let w = grid_sailing_task();
        let mut q = QTable::zeros(15);
        q.update(0, Action::Up, 0.5, 1.0).unwrap();
        let mut vals = vec![0.0; 15];
        vals[0] = 0.5;
        let v = ValueTable::from_values(&w, vals).unwrap();
        assert_eq!(advantage(&q, &v, 0, Action::Up).unwrap(), 0.0);

        let mut q = QTable::zeros(15);
        q.update(2, Action::Right, 0.9, 1.0).unwrap();
        let mut vals = vec![0.0; 15];
        vals[2] = 0.81;
        let v = ValueTable::from_values(&w, vals).unwrap();
        assert!((advantage(&q, &v, 2, Action::Right).unwrap() - 0.09).abs() < 1e-12);

        let q = QTable::from_rows(vec![[0.3; 4]; 15]);
        let v = ValueTable::from_values(&w, vec![0.3; 15]).unwrap();
        for a in Action::ALL {
            assert_eq!(advantage(&q, &v, 0, a).unwrap(), 0.0);
        }
    }

    #[test]
    fn softmax_equal_prefs_is_uniform() {
        let p = action_probabilities(&Policy::Softmax { temperature: 0.2 }, &single([0.7; 4]), 0)
            .unwrap();
        for x in p {
            assert!((x - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn deterministic_is_indicator() {
        let p = action_probabilities(
            &Policy::Deterministic(vec![Action::Right]),
            &QTable::zeros(1),
            0,
        )
        .unwrap();
        assert_eq!(p, [0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn sharp_softmax_value() {
        let p = action_probabilities(
            &Policy::Softmax { temperature: 0.1 },
            &single([0.0, 0.0, 0.0, 1.0]),
            0,
        )
        .unwrap();
        let e10 = 10f64.exp();
        assert!((p[3] - e10 / (3.0 + e10)).abs() < 1e-12);
        assert!((p[3] - 0.999864).abs() < 1e-6);
    }

    #[test]
    fn softmax_survives_large_values() {
        let p = action_probabilities(
            &Policy::Softmax { temperature: 0.01 },
            &single([1e6, 0.0, -1e6, 1e6]),
            0,
        )
        .unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[3] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bad_temperature() {
        for t in [0.0, -1.0, f64::NAN] {
            assert!(action_probabilities(
                &Policy::Softmax { temperature: t },
                &QTable::zeros(1),
                0
            )
            .is_err());
        }
    }

    #[test]
    fn inverse_cdf_boundary() {
        assert_eq!(sample_action(&[0.25; 4], 0.99), Action::Right);
        assert_eq!(sample_action(&[0.25; 4], 0.0), Action::Up);
        assert_eq!(sample_action(&[0.25; 4], 0.25), Action::Down);
        assert_eq!(
            sample_action(&[0.0, 0.5, 0.5, 0.0], 0.9999999999999999),
            Action::Left
        );
    }

    #[test]
    fn deterministic_select_leaves_rng_alone() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut reference = rng.clone();
        let policy = Policy::Deterministic(vec![Action::Left; 15]);
        for s in 0..15 {
            assert_eq!(
                select_action(&policy, &QTable::zeros(15), s, &mut rng).unwrap(),
                Action::Left
            );
        }
        assert_eq!(rng.gen::<u64>(), reference.gen::<u64>());
    }

    #[test]
    fn seeded_softmax_sequence_repeats() {
        let w = grid_sailing_task();
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let q = QTable::random(&w, 1.0, &mut rng);
            let policy = Policy::Softmax { temperature: 0.2 };
            (0..200)
                .map(|i| select_action(&policy, &q, i % 15, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn actor_update_examples() {
        let q = actor_update(QTable::zeros(2), 1, Action::Down, 1.0, 0.05).unwrap();
        assert!((q.get(1, Action::Down).unwrap() - 0.05).abs() < 1e-15);

        let q0 = QTable::from_rows(vec![[0.1, 0.2, 0.3, 0.4]]);
        assert_eq!(
            actor_update(q0.clone(), 0, Action::Up, 0.0, 0.3).unwrap(),
            q0
        );

        let q = actor_update(QTable::zeros(1), 0, Action::Up, 0.5, 0.1).unwrap();
        let q = actor_update(q, 0, Action::Up, 0.5, 0.1).unwrap();
        assert!((q.get(0, Action::Up).unwrap() - 0.1).abs() < 1e-15);

        assert!(actor_update(QTable::zeros(1), 1, Action::Up, 0.5, 0.1).is_err());
        assert!(actor_update(QTable::zeros(1), 0, Action::Up, 0.5, 0.0).is_err());
    }

    #[test]
    fn greedy_examples() {
        let q = QTable::from_rows(vec![[0.0, 0.0, 0.0, 1.0], [0.0; 4], [0.2, 0.9, 0.9, 0.1]]);
        assert_eq!(
            greedy_policy(&q),
            Policy::Deterministic(vec![Action::Right, Action::Up, Action::Down])
        );
    }
}
