//! Deterministic four-connected gridworlds.
//!
//! States are cells addressed either by [`Cell`] or by a row-major index.
//! Moving off the grid leaves the agent where it is. Entering the goal pays
//! `goal_reward` and ends the episode; every other transition pays
//! `step_reward`.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NUM_ACTIONS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }

    pub fn manhattan(self, other: Cell) -> usize {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Movement actions in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Up = 0,
    Down = 1,
    Left = 2,
    Right = 3,
}

impl Action {
    pub const ALL: [Action; NUM_ACTIONS] = [Action::Up, Action::Down, Action::Left, Action::Right];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Action> {
        Action::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Up => "Up",
            Action::Down => "Down",
            Action::Left => "Left",
            Action::Right => "Right",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub state: Cell,
    pub action: Action,
    pub next_state: Cell,
    pub reward: f64,
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridWorld {
    rows: usize,
    cols: usize,
    start: Cell,
    goal: Cell,
    step_reward: f64,
    goal_reward: f64,
    max_steps: usize,
}

impl GridWorld {
    pub fn new(
        rows: usize,
        cols: usize,
        start: Cell,
        goal: Cell,
        step_reward: f64,
        goal_reward: f64,
        max_steps: usize,
    ) -> Result<Self> {
        let world = GridWorld {
            rows,
            cols,
            start,
            goal,
            step_reward,
            goal_reward,
            max_steps,
        };
        world.validate()?;
        Ok(world)
    }

    /// Checks the construction invariants. Worlds read from disk go through
    /// this as well.
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidWorld(format!(
                "grid dimensions must be positive, got {}x{}",
                self.rows, self.cols
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidWorld("max_steps must be positive".into()));
        }
        self.check_cell(self.start)?;
        self.check_cell(self.goal)?;
        if self.start == self.goal {
            return Err(Error::InvalidWorld(format!(
                "start and goal coincide at {}",
                self.start
            )));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn start(&self) -> Cell {
        self.start
    }

    pub fn goal(&self) -> Cell {
        self.goal
    }

    pub fn step_reward(&self) -> f64 {
        self.step_reward
    }

    pub fn goal_reward(&self) -> f64 {
        self.goal_reward
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    pub fn num_states(&self) -> usize {
        self.rows * self.cols
    }

    pub fn goal_index(&self) -> usize {
        self.index_unchecked(self.goal)
    }

    pub fn start_index(&self) -> usize {
        self.index_unchecked(self.start)
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.row < self.rows && cell.col < self.cols
    }

    pub fn check_cell(&self, cell: Cell) -> Result<()> {
        if self.contains(cell) {
            Ok(())
        } else {
            Err(Error::InvalidCell {
                row: cell.row,
                col: cell.col,
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn check_state(&self, index: usize) -> Result<()> {
        if index < self.num_states() {
            Ok(())
        } else {
            Err(Error::InvalidState {
                index,
                count: self.num_states(),
            })
        }
    }

    pub fn index(&self, cell: Cell) -> Result<usize> {
        self.check_cell(cell)?;
        Ok(self.index_unchecked(cell))
    }

    fn index_unchecked(&self, cell: Cell) -> usize {
        cell.row * self.cols + cell.col
    }

    pub fn cell(&self, index: usize) -> Result<Cell> {
        self.check_state(index)?;
        Ok(Cell::new(index / self.cols, index % self.cols))
    }

    pub fn is_goal(&self, cell: Cell) -> bool {
        cell == self.goal
    }

    /// Cell reached by moving one square in `action`'s direction, staying
    /// put at the border.
    fn successor(&self, cell: Cell, action: Action) -> Cell {
        let Cell { row, col } = cell;
        match action {
            Action::Up => Cell::new(row.saturating_sub(1), col),
            Action::Down => Cell::new((row + 1).min(self.rows - 1), col),
            Action::Left => Cell::new(row, col.saturating_sub(1)),
            Action::Right => Cell::new(row, (col + 1).min(self.cols - 1)),
        }
    }

    pub fn step(&self, state: Cell, action: Action) -> Result<Transition> {
        self.check_cell(state)?;
        let next_state = self.successor(state, action);
        let terminal = next_state == self.goal;
        Ok(Transition {
            state,
            action,
            next_state,
            reward: if terminal {
                self.goal_reward
            } else {
                self.step_reward
            },
            terminal,
        })
    }

    /// Index-based variant of [`step`](Self::step) used by the table code.
    /// Returns `(next_index, reward, terminal)`.
    pub fn step_index(&self, state: usize, action: Action) -> Result<(usize, f64, bool)> {
        let t = self.step(self.cell(state)?, action)?;
        Ok((self.index_unchecked(t.next_state), t.reward, t.terminal))
    }

    /// All cells in row-major order.
    pub fn enumerate_states(&self) -> Vec<Cell> {
        (0..self.rows)
            .flat_map(|row| (0..self.cols).map(move |col| Cell::new(row, col)))
            .collect()
    }

    /// Breadth-first shortest number of moves from `from` to the goal, or
    /// `None` if it is unreachable.
    pub fn shortest_path_len(&self, from: Cell) -> Result<Option<usize>> {
        self.check_cell(from)?;
        let n = self.num_states();
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        let src = self.index_unchecked(from);
        dist[src] = 0;
        queue.push_back(from);
        while let Some(cell) = queue.pop_front() {
            if cell == self.goal {
                return Ok(Some(dist[self.index_unchecked(cell)]));
            }
            let d = dist[self.index_unchecked(cell)];
            for action in Action::ALL {
                let next = self.successor(cell, action);
                let j = self.index_unchecked(next);
                if dist[j] == usize::MAX {
                    dist[j] = d + 1;
                    queue.push_back(next);
                }
            }
        }
        Ok(None)
    }
}

/// The 3x5 sailing grid: start on the left end of the middle row, goal on
/// the right end of it.
pub fn grid_sailing_task() -> GridWorld {
    GridWorld {
        rows: 3,
        cols: 5,
        start: Cell::new(1, 0),
        goal: Cell::new(1, 4),
        step_reward: 0.0,
        goal_reward: 1.0,
        max_steps: 100,
    }
}

/// Sailing-style grid of arbitrary size: start and goal at the two ends of
/// the middle row.
pub fn sailing_grid(rows: usize, cols: usize) -> Result<GridWorld> {
    let mid = rows / 2;
    GridWorld::new(
        rows,
        cols,
        Cell::new(mid, 0),
        Cell::new(mid, cols.saturating_sub(1)),
        0.0,
        1.0,
        100,
    )
}
