use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SimConfig;
use crate::channel::Radio;
use crate::error::Result;
use crate::estimator::{differential_entropy, Estimate};
use crate::planner::{mahalanobis, select_command, select_command_inflated};
use crate::rng::{stream, Stream};
use crate::scheduler::{
    act, baseline_policy, compute_voi_c, shaped_voi_s, Action, Normalization, PolicyKind, QNetwork, SchedState,
    Snapshot, TransitionRecord, VoiC, STATE_DIM,
};
use crate::world::{
    check_termination, detect_obstacles, draw_process_noise, nearest_obstacle_distance, spawn_obstacles,
    step_obstacles, step_uav, Command, DetectedObstacle, Obstacle, Status, UavState,
};
use crate::{Mat2, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Collision,
    Timeout,
    /// A C&C message took at least one slot to decode.
    LinkFailure,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::Collision => "collision",
            Outcome::Timeout => "timeout",
            Outcome::LinkFailure => "link_failure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub slot: usize,
    pub x: f64,
    pub y: f64,
    pub est_x: f64,
    pub est_y: f64,
    pub det_cov: f64,
    pub action: Action,
    pub sensed: bool,
    pub delivered: bool,
    pub speed: f64,
    pub heading: f64,
    pub dist_dst: f64,
    pub dist_obs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub seed: u64,
    pub policy: PolicyKind,
    pub outcome: Outcome,
    pub slots: usize,
    pub n_sense: usize,
    pub n_cc: usize,
    pub n_tx_slots: usize,
    pub path_length: f64,
    pub min_obstacle_dist: f64,
    pub total_reward: f64,
    #[serde(skip)]
    pub trajectory: Option<Vec<TrajectoryRow>>,
}

impl EpisodeResult {
    pub fn signals(&self) -> usize {
        self.n_sense + self.n_cc
    }
}

/// Slot covariance used for observation distances: the belief covariance,
/// or the one-slot process noise when the belief is still exact.
pub fn observation_cov(cov: &Mat2, process_var: f64) -> Mat2 {
    if cov.determinant() > 0.0 {
        *cov
    } else if process_var > 0.0 {
        cov + Mat2::identity() * process_var
    } else {
        cov + Mat2::identity() * 1e-12
    }
}

/// What one slot produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub record: TransitionRecord,
    pub finished: Option<Outcome>,
}

/// One episode of the closed loop, advanced slot by slot.
pub struct Episode<'a> {
    cfg: &'a SimConfig,
    radio: &'a Radio,
    seed: u64,
    inflated: bool,
    /// Compute the C&C counterfactual (training only).
    pub counterfactual: bool,
    slot: usize,
    uav: UavState,
    obstacles: Vec<Obstacle>,
    est: Estimate,
    refined_prev: Mat2,
    pending: Option<Command>,
    detected: Vec<DetectedObstacle>,
    det_max: f64,
    noise_rng: ChaCha8Rng,
    meas_rng: ChaCha8Rng,
    fade_rng: ChaCha8Rng,
    detect_rng: ChaCha8Rng,
    n_sense: usize,
    n_cc: usize,
    n_tx_slots: usize,
    path_length: f64,
    min_obstacle_dist: f64,
    total_reward: f64,
    finished: Option<Outcome>,
    trajectory: Option<Vec<TrajectoryRow>>,
}

impl<'a> Episode<'a> {
    /// Fresh episode. `inflated` selects the inflation planner.
    pub fn new(cfg: &'a SimConfig, radio: &'a Radio, seed: u64, inflated: bool, log: bool) -> Self {
        let task = &cfg.task;
        let obstacles = spawn_obstacles(task, &mut stream(seed, Stream::Layout));
        let start = task.start();
        let uav = UavState::at_rest(start, task.initial_heading);
        let mut ep = Self {
            cfg,
            radio,
            seed,
            inflated,
            counterfactual: false,
            slot: 0,
            uav,
            min_obstacle_dist: nearest_obstacle_distance(&start, &obstacles),
            obstacles,
            est: Estimate::known(start),
            refined_prev: Mat2::zeros(),
            pending: None,
            detected: Vec::new(),
            det_max: 0.0,
            noise_rng: stream(seed, Stream::ProcessNoise),
            meas_rng: stream(seed, Stream::Measurement),
            fade_rng: stream(seed, Stream::Fading),
            detect_rng: stream(seed, Stream::ObstacleDetection),
            n_sense: 0,
            n_cc: 0,
            n_tx_slots: 0,
            path_length: 0.0,
            total_reward: 0.0,
            finished: None,
            trajectory: log.then(Vec::new),
        };
        ep.finished = ep.terminal_status();
        ep.detect();
        ep
    }

    fn terminal_status(&self) -> Option<Outcome> {
        match check_termination(&self.uav.position, &self.obstacles, &self.cfg.task, self.slot) {
            Status::Running => None,
            Status::Success => Some(Outcome::Success),
            Status::Collision => Some(Outcome::Collision),
            Status::Timeout => Some(Outcome::Timeout),
        }
    }

    fn detect(&mut self) {
        self.detected = detect_obstacles(&self.est.mean, &self.obstacles, &self.cfg.task, &mut self.detect_rng);
    }

    pub fn finished(&self) -> Option<Outcome> {
        self.finished
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    pub fn estimate(&self) -> &Estimate {
        &self.est
    }

    pub fn uav(&self) -> &UavState {
        &self.uav
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    pub fn detected(&self) -> &[DetectedObstacle] {
        &self.detected
    }

    pub fn signals(&self) -> usize {
        self.n_sense + self.n_cc
    }

    pub fn add_reward(&mut self, r: f64) {
        self.total_reward += r;
    }

    /// Observation at the start of the current slot.
    pub fn observe(&self) -> SchedState {
        let task = &self.cfg.task;
        let sigma = observation_cov(&self.est.cov, task.process_noise_var);
        let d_dst = mahalanobis(&self.est.mean, &task.destination(), &sigma).unwrap_or(f64::INFINITY);
        let d_obs = self
            .detected
            .iter()
            .map(|o| mahalanobis(&self.est.mean, &o.position, &(sigma + o.cov)).unwrap_or(f64::INFINITY))
            .reduce(f64::min);
        SchedState { d_dst, d_obs, det: self.est.cov.determinant(), slot: self.slot, signals: self.signals() }
    }

    /// Network input for the current observation; updates the running
    /// determinant maximum first.
    pub fn features(&mut self, norm: &Normalization) -> [f64; STATE_DIM] {
        let s = self.observe();
        self.det_max = self.det_max.max(s.det);
        s.features(norm, self.det_max)
    }

    /// Differential entropy of the current belief (−∞ while exact).
    pub fn belief_entropy(&self) -> f64 {
        differential_entropy(&self.est.cov)
    }

    /// Executes one slot with `action`.
    pub fn step(&mut self, action: Action) -> Result<StepInfo> {
        assert!(self.finished.is_none(), "episode already finished");
        let task = &self.cfg.task;
        let radio = self.radio;
        let slot = self.slot;

        let mut delivered = None;
        let mut latency = 0.0;
        if let Some(cmd) = self.pending.take() {
            let geo = radio.geometry(&self.uav.position);
            let beam = radio.beam_for_belief(&self.est.mean, &self.est.cov)?;
            let link = radio.comm_link(geo.slant_range, geo.array_angle, &beam, &mut self.fade_rng);
            self.n_cc += 1;
            if !(link.latency < task.slot_s) {
                self.n_tx_slots += 1;
                self.finished = Some(Outcome::LinkFailure);
                let record = TransitionRecord { slot, action, voi_s: 0.0, voi_c: VoiC::default(), collision: false };
                return Ok(StepInfo { record, finished: self.finished });
            }
            latency = link.latency;
            delivered = Some(cmd);
            self.est.commit(&cmd);
        }

        let mut voi_s = 0.0;
        if action.senses() {
            self.n_sense += 1;
            let beam = radio.beam_for_belief(&self.est.mean, &self.est.cov)?;
            // A beam that misses the UAV returns no detection.
            if let Ok(m) = radio.sample_measurement(&self.uav.position, &beam, &mut self.meas_rng) {
                if let Ok(fused) = self.est.fuse(&m) {
                    self.est = fused;
                }
            }
            voi_s = shaped_voi_s(&self.refined_prev, &self.est.cov, self.cfg.reward.voi_s_floor);
        }
        if action.senses() || delivered.is_some() {
            self.n_tx_slots += 1;
        }

        if action.commands() {
            let prev = delivered.unwrap_or(self.uav.command);
            let planner = if self.inflated { select_command_inflated } else { select_command };
            self.pending = Some(planner(&self.est, &self.detected, &prev, task, &self.cfg.planner));
        }

        let noise = draw_process_noise(task, &mut self.noise_rng);
        let before = self.uav.position;
        self.uav = step_uav(&self.uav, delivered, latency, noise, task)?;
        self.obstacles = step_obstacles(&self.obstacles, task.slot_s, task.obstacle_box);
        self.path_length += (self.uav.position - before).norm();
        let nearest = nearest_obstacle_distance(&self.uav.position, &self.obstacles);
        self.min_obstacle_dist = self.min_obstacle_dist.min(nearest);

        self.refined_prev = self.est.cov;
        self.est = self.est.predict(task.slot_s, task.process_noise_var);
        self.slot += 1;
        self.finished = self.terminal_status();

        let mut voi_c = VoiC::default();
        if self.counterfactual && self.finished.is_none() {
            if let Some(cmd) = self.pending {
                let snap = Snapshot { uav: self.uav, obstacles: &self.obstacles, task, slot: self.slot };
                let zeros = vec![Vec2::zeros(); self.cfg.reward.voi_c_horizon];
                voi_c = compute_voi_c(&snap, &cmd, 0.0, &zeros)?;
            }
        }

        if let Some(log) = self.trajectory.as_mut() {
            log.push(TrajectoryRow {
                slot,
                x: self.uav.position.x,
                y: self.uav.position.y,
                est_x: self.est.mean.x,
                est_y: self.est.mean.y,
                det_cov: self.est.cov.determinant(),
                action,
                sensed: action.senses(),
                delivered: delivered.is_some(),
                speed: self.uav.command.speed,
                heading: self.uav.command.heading,
                dist_dst: (self.uav.position - task.destination()).norm(),
                dist_obs: nearest,
            });
        }

        if self.finished.is_none() {
            self.detect();
        }
        let record = TransitionRecord {
            slot,
            action,
            voi_s,
            voi_c,
            collision: self.finished == Some(Outcome::Collision),
        };
        Ok(StepInfo { record, finished: self.finished })
    }

    pub fn into_result(self, policy: PolicyKind) -> EpisodeResult {
        EpisodeResult {
            seed: self.seed,
            policy,
            outcome: self.finished.unwrap_or(Outcome::Timeout),
            slots: self.slot,
            n_sense: self.n_sense,
            n_cc: self.n_cc,
            n_tx_slots: self.n_tx_slots,
            path_length: self.path_length,
            min_obstacle_dist: self.min_obstacle_dist,
            total_reward: self.total_reward,
            trajectory: self.trajectory,
        }
    }
}

/// Per-slot decision rule.
pub enum Policy<'a> {
    Baseline(PolicyKind),
    Learned { net: &'a QNetwork, norm: Normalization, epsilon: f64 },
    /// Always the same action.
    Fixed(Action),
}

impl Policy<'_> {
    pub fn kind(&self) -> PolicyKind {
        match self {
            Policy::Baseline(k) => *k,
            Policy::Learned { .. } => PolicyKind::Gosc,
            Policy::Fixed(_) => PolicyKind::Trad,
        }
    }
}

/// Runs one full episode. Rewards use `cfg.reward` and are summed into
/// the result.
pub fn run_episode(cfg: &SimConfig, radio: &Radio, policy: &Policy<'_>, seed: u64, log: bool) -> Result<EpisodeResult> {
    let inflated = matches!(policy, Policy::Baseline(PolicyKind::Trad));
    let mut ep = Episode::new(cfg, radio, seed, inflated, log);
    let mut explore = ChaCha8Rng::seed_from_u64(seed);
    explore.set_stream(Stream::Exploration as u64);
    while ep.finished().is_none() {
        let action = match policy {
            Policy::Baseline(kind) => {
                baseline_policy(*kind, &cfg.baseline, ep.slot(), ep.belief_entropy(), !ep.detected().is_empty())
            }
            Policy::Learned { net, norm, epsilon } => {
                let x = ep.features(norm);
                act(net, &x, *epsilon, &mut explore)
            }
            Policy::Fixed(a) => *a,
        };
        let info = ep.step(action)?;
        let r = crate::scheduler::compute_reward(&info.record, &cfg.reward, cfg.train.collision_penalty);
        ep.add_reward(r);
    }
    Ok(ep.into_result(policy.kind()))
}
