//! Test-only oracles, kept independent of the library's evaluation code.

#![allow(dead_code, clippy::needless_range_loop)]

/// Deterministic successor of `(row, col)` under move `a` (0=Up, 1=Down,
/// 2=Left, 3=Right), clamped at the border.
pub fn successor(rows: usize, cols: usize, row: usize, col: usize, a: usize) -> (usize, usize) {
    let (r, c) = (row as i64, col as i64);
    let (nr, nc) = match a {
        0 => (r - 1, c),
        1 => (r + 1, c),
        2 => (r, c - 1),
        3 => (r, c + 1),
        _ => unreachable!(),
    };
    if nr < 0 || nc < 0 || nr >= rows as i64 || nc >= cols as i64 {
        (row, col)
    } else {
        (nr as usize, nc as usize)
    }
}

/// Exact policy evaluation on a `rows x cols` grid with sparse goal reward:
/// builds `(I − γP)V = r` over all states (goal row pinned to `V = 0`) and
/// solves it by Gaussian elimination with partial pivoting.
pub fn exact_values(
    rows: usize,
    cols: usize,
    goal: (usize, usize),
    goal_reward: f64,
    step_reward: f64,
    policy: &dyn Fn(usize, usize) -> [f64; 4],
    gamma: f64,
) -> Vec<f64> {
    let n = rows * cols;
    let idx = |r: usize, c: usize| r * cols + c;
    let mut a = vec![vec![0.0; n + 1]; n];
    for r in 0..rows {
        for c in 0..cols {
            let i = idx(r, c);
            a[i][i] = 1.0;
            if (r, c) == goal {
                continue;
            }
            let p = policy(r, c);
            for (act, &pa) in p.iter().enumerate() {
                let (nr, nc) = successor(rows, cols, r, c, act);
                let reward = if (nr, nc) == goal {
                    goal_reward
                } else {
                    step_reward
                };
                a[i][n] += pa * reward;
                if (nr, nc) != goal {
                    a[i][idx(nr, nc)] -= gamma * pa;
                }
            }
        }
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                if f != 0.0 {
                    for k in col..=n {
                        a[row][k] -= f * a[col][k];
                    }
                }
            }
        }
    }
    (0..n).map(|i| a[i][n] / a[i][i]).collect()
}

/// Brute-force synchronous value iteration, run for a fixed large number of
/// sweeps rather than to a tolerance.
pub fn brute_force_values(
    rows: usize,
    cols: usize,
    goal: (usize, usize),
    policy: &dyn Fn(usize, usize) -> [f64; 4],
    gamma: f64,
    sweeps: usize,
) -> Vec<f64> {
    let mut v = vec![vec![0.0; cols]; rows];
    for _ in 0..sweeps {
        let mut next = vec![vec![0.0; cols]; rows];
        for r in 0..rows {
            for c in 0..cols {
                if (r, c) == goal {
                    continue;
                }
                let p = policy(r, c);
                next[r][c] = (0..4)
                    .map(|a| {
                        let (nr, nc) = successor(rows, cols, r, c, a);
                        let reward = if (nr, nc) == goal { 1.0 } else { 0.0 };
                        let tail = if (nr, nc) == goal { 0.0 } else { v[nr][nc] };
                        p[a] * (reward + gamma * tail)
                    })
                    .sum();
            }
        }
        v = next;
    }
    v.into_iter().flatten().collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
