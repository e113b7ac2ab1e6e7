use gosc::channel::Radio;
use gosc::harness::{run_batch, run_episode, train_gosc, Outcome, Policy, SimConfig};
use gosc::scheduler::{Action, PolicyKind, Weights};

fn quiet() -> SimConfig {
    let mut cfg = SimConfig::default();
    cfg.task.obstacle_count = 0;
    cfg.task.process_noise_var = 0.0;
    cfg
}

fn radio(cfg: &SimConfig) -> Radio {
    Radio::new(&cfg.radio).unwrap()
}

#[test]
fn straight_flight_without_obstacles() {
    let cfg = quiet();
    let r = run_episode(&cfg, &radio(&cfg), &Policy::Baseline(PolicyKind::Trad), 1, false).unwrap();
    assert_eq!(r.outcome, Outcome::Success);
    assert!((r.path_length - 14.0).abs() <= 0.05 * 14.0, "path {}", r.path_length);
}

#[test]
fn periodic_flight_without_obstacles() {
    let cfg = quiet();
    let r = run_episode(&cfg, &radio(&cfg), &Policy::Baseline(PolicyKind::Periodic), 1, false).unwrap();
    assert_eq!(r.outcome, Outcome::Success);
    assert!((r.path_length - 14.0).abs() <= 0.05 * 14.0, "path {}", r.path_length);
}

#[test]
fn obstacle_on_start_collides_immediately() {
    let mut cfg = SimConfig::default();
    cfg.task.obstacle_count = 1;
    cfg.task.obstacle_box = [0.0, 0.0, 0.2, 0.2];
    cfg.task.obstacle_max_speed = 0.0;
    let r = run_episode(&cfg, &radio(&cfg), &Policy::Baseline(PolicyKind::Trad), 3, false).unwrap();
    assert_eq!(r.outcome, Outcome::Collision);
    assert_eq!(r.slots, 0);
    assert_eq!(r.signals(), 0);
}

#[test]
fn silence_times_out() {
    let mut cfg = quiet();
    cfg.task.max_slots = 300;
    let r = run_episode(&cfg, &radio(&cfg), &Policy::Fixed(Action::Silent), 4, false).unwrap();
    assert_eq!(r.outcome, Outcome::Timeout);
    assert_eq!(r.slots, 300);
    assert_eq!((r.n_sense, r.n_cc, r.n_tx_slots), (0, 0, 0));
    assert_eq!(r.path_length, 0.0);
}

#[test]
fn identical_inputs_give_identical_results() {
    let cfg = SimConfig::default();
    let radio = radio(&cfg);
    for kind in [PolicyKind::Trad, PolicyKind::Event] {
        let a = run_episode(&cfg, &radio, &Policy::Baseline(kind), 11, true).unwrap();
        let b = run_episode(&cfg, &radio, &Policy::Baseline(kind), 11, true).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn batch_results_do_not_depend_on_neighbours() {
    let mut cfg = SimConfig::default();
    cfg.task.max_slots = 400;
    let radio = radio(&cfg);
    let policy = Policy::Baseline(PolicyKind::Periodic);
    let alone = run_batch(&cfg, &radio, &policy, &[9], 1).unwrap();
    let mixed = run_batch(&cfg, &radio, &policy, &[4, 9, 2], 3).unwrap();
    let reversed = run_batch(&cfg, &radio, &policy, &[2, 9, 4], 2).unwrap();
    assert_eq!(alone[0], mixed[1]);
    assert_eq!(alone[0], reversed[1]);
    assert_eq!(mixed[0], reversed[2]);
}

#[test]
fn counters_match_trajectory() {
    let cfg = SimConfig::default();
    let radio = radio(&cfg);
    for kind in [PolicyKind::Trad, PolicyKind::Periodic, PolicyKind::Event] {
        let r = run_episode(&cfg, &radio, &Policy::Baseline(kind), 5, true).unwrap();
        let rows = r.trajectory.as_ref().unwrap();
        assert_eq!(rows.len(), r.slots);
        assert_eq!(r.n_sense, rows.iter().filter(|row| row.sensed).count());
        assert_eq!(r.n_cc, rows.iter().filter(|row| row.delivered).count());
        assert_eq!(r.n_tx_slots, rows.iter().filter(|row| row.sensed || row.delivered).count());
        let mut prev = cfg.task.start;
        let mut length = 0.0;
        for row in rows {
            length += ((row.x - prev[0]).powi(2) + (row.y - prev[1]).powi(2)).sqrt();
            prev = [row.x, row.y];
        }
        assert!((length - r.path_length).abs() < 1e-9, "{length} vs {}", r.path_length);
    }
}

#[test]
fn untrained_weights_round_trip() {
    let mut cfg = SimConfig::default();
    cfg.train.episodes = 0;
    let report = train_gosc(&cfg, 5, |_| {}).unwrap();
    assert!(report.log.is_empty());
    assert_eq!(report.warmup_episodes, 0);
    let text = report.weights.to_text();
    let back = Weights::from_text(&text).unwrap();
    assert_eq!(back, report.weights);
    assert_eq!(back.to_text(), text);
}

#[test]
fn short_training_logs_every_episode() {
    let mut cfg = SimConfig::default();
    cfg.task.max_slots = 60;
    cfg.train.episodes = 3;
    cfg.train.buffer_capacity = 100;
    cfg.train.batch_size = 8;
    let mut seen = Vec::new();
    let report = train_gosc(&cfg, 2, |e| seen.push(e.episode)).unwrap();
    assert_eq!(report.log.len(), 3);
    assert_eq!(seen, vec![0, 1, 2]);
    assert!(report.warmup_episodes >= 1);
    let again = train_gosc(&cfg, 2, |_| {}).unwrap();
    assert_eq!(again.weights, report.weights);
}
