use std::fs;
use std::process::Command;

use sailgrid::env::Action;
use sailgrid::experiment::{
    run_experiment, run_trials, train_trial, ActorSignal, Execution, ExperimentConfig,
};
use sailgrid::report::{emit_figures_data, PolicyFile};
use sailgrid::TdVariant;

fn sailgrid() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sailgrid"))
}

#[test]
fn default_trial_finds_midline() {
    let log = train_trial(&ExperimentConfig::default(), 0).unwrap();
    assert_eq!(log.path_actions(), vec![Action::Right; 4]);
    assert!(log.final_reward_mean() >= 0.95);
    assert!(log.first_optimal_episode.is_some());
}

#[test]
fn logged_transitions_replay() {
    let config = ExperimentConfig {
        episodes: 60,
        ..Default::default()
    };
    let log = train_trial(&config, 3).unwrap();
    for rec in &log.steps {
        let t = log.world.step(rec.state, rec.action).unwrap();
        assert_eq!(t.next_state, rec.next_state);
        assert_eq!(t.reward, rec.reward);
    }
    for (e, ep) in log.episodes.iter().enumerate() {
        let deltas = log
            .trace
            .samples()
            .iter()
            .filter(|d| d.episode == e)
            .count();
        assert_eq!(deltas, ep.steps);
    }
}

#[test]
fn trial_order_does_not_matter() {
    let config = ExperimentConfig {
        episodes: 80,
        trials: 4,
        ..Default::default()
    };
    let forward = run_trials(&config, Execution::Sequential).unwrap();
    let mut backward: Vec<_> = (0..config.trials)
        .rev()
        .map(|i| train_trial(&config, i).unwrap())
        .collect();
    backward.reverse();
    for (a, b) in forward.iter().zip(&backward) {
        assert_eq!(a.steps, b.steps);
        assert_eq!(a.final_q, b.final_q);
    }
}

#[test]
fn figure_files_have_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    let log = train_trial(&ExperimentConfig::default(), 0).unwrap();
    let written = emit_figures_data(&log, dir.path()).unwrap();
    assert_eq!(written.len(), 6);

    let path = fs::read_to_string(dir.path().join("path.csv")).unwrap();
    assert_eq!(path, "step,row,col\n0,1,0\n1,1,1\n2,1,2\n3,1,3\n4,1,4\n");

    let q = fs::read_to_string(dir.path().join("q_values.csv")).unwrap();
    let lines: Vec<_> = q.lines().collect();
    assert_eq!(lines[0], "state_row,state_col,q_up,q_down,q_left,q_right");
    assert_eq!(lines.len(), 16);

    let actions = fs::read_to_string(dir.path().join("actions.csv")).unwrap();
    assert!(actions.starts_with("episode,step,action\n"));
    assert_eq!(actions.lines().count() - 1, log.steps.len());

    let deltas = fs::read_to_string(dir.path().join("delta_trace.csv")).unwrap();
    assert!(deltas.starts_with("episode,step,delta\n"));
    assert!(!deltas.contains('\r'));

    let rewards = fs::read_to_string(dir.path().join("rewards.csv")).unwrap();
    let tail: Vec<f64> = rewards
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(tail.len(), 500);
    assert!(tail[450..].iter().sum::<f64>() / 50.0 >= 0.95);

    let policy = PolicyFile::load(&dir.path().join("policy.json")).unwrap();
    let v = policy.evaluate(0.9, 1e-10).unwrap();
    assert!((v.get(policy.world.start_index()).unwrap() - 0.729).abs() < 1e-9);
}

#[test]
fn run_writes_one_column_per_trial() {
    let dir = tempfile::tempdir().unwrap();
    let config = ExperimentConfig {
        out_dir: dir.path().to_path_buf(),
        ..Default::default()
    };
    let summary = run_experiment(&config).unwrap();
    assert_eq!(summary.trials, 8);
    let rewards = fs::read_to_string(dir.path().join("rewards.csv")).unwrap();
    let header = rewards.lines().next().unwrap();
    assert_eq!(header.split(',').count(), 9);
    for i in 0..8 {
        assert!(dir.path().join(format!("trial_{i}/q_values.csv")).exists());
    }
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(json["config"]["trials"], 8);
    assert_eq!(json["summary"]["optimal_trials"], summary.optimal_trials);
    assert!(json["summary"]
        .get("median_first_optimal_episode")
        .is_some());
}

#[test]
fn minimal_run_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let config = ExperimentConfig {
        episodes: 1,
        trials: 1,
        out_dir: dir.path().to_path_buf(),
        ..Default::default()
    };
    run_experiment(&config).unwrap();
    let rewards = fs::read_to_string(dir.path().join("rewards.csv")).unwrap();
    assert_eq!(rewards.lines().count(), 2);
}

#[test]
fn squared_variant_runs_to_completion() {
    // The squared error feeds on itself and overflows; training must still
    // finish and log every episode.
    let config = ExperimentConfig {
        td_variant: TdVariant::Squared,
        trials: 2,
        ..Default::default()
    };
    let logs = run_trials(&config, Execution::Parallel).unwrap();
    for log in &logs {
        assert_eq!(log.episodes.len(), config.episodes);
        assert!(log
            .trace
            .samples()
            .iter()
            .all(|d| d.delta >= 0.0 || d.delta.is_nan()));
    }
}

#[test]
fn advantage_signal_runs() {
    let config = ExperimentConfig {
        actor_signal: ActorSignal::Advantage,
        episodes: 100,
        trials: 2,
        ..Default::default()
    };
    let logs = run_trials(&config, Execution::Parallel).unwrap();
    assert_eq!(logs.len(), 2);
}

#[test]
fn unwritable_output_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let config = ExperimentConfig {
        episodes: 2,
        trials: 1,
        out_dir: blocker.join("sub"),
        ..Default::default()
    };
    let err = run_experiment(&config).unwrap_err();
    assert!(err.is_io());
    assert!(err.to_string().contains("sub"));
}

#[test]
fn cli_run_and_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let run = sailgrid()
        .args(["run", "--episodes", "300", "--trials", "2", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0));
    assert!(out.join("summary.json").exists());

    let output = sailgrid()
        .args(["evaluate", "--policy"])
        .arg(out.join("trial_0/policy.json"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.starts_with("state_row,state_col,value\n"));
    assert!(text.contains("\n1,0,0.729\n"));
}

#[test]
fn cli_exit_codes() {
    let bad = sailgrid()
        .args(["run", "--gamma", "1.5", "--k0", "3"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&bad.stderr);
    assert!(msg.contains("gamma") && msg.contains("k0"), "{msg}");

    let bad_variant = sailgrid()
        .args(["run", "--td-variant", "cubic"])
        .output()
        .unwrap();
    assert_eq!(bad_variant.status.code(), Some(1));

    let missing = sailgrid()
        .args(["evaluate", "--policy", "/definitely/not/here.json"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));

    let help = sailgrid().arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}
