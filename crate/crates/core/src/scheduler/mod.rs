//! Transmission scheduling: per slot, stay silent (0), sense (1), or sense
//! and send a C&C command at the next slot (2).
//!
//! Holds the learned policy (Q-network, replay memory, rewards) and the
//! fixed-rule baselines.

mod network;
mod replay;
mod weights;

pub use network::{Dense, Gradients, OptimizerKind, Optimizer, QNetwork};
pub use replay::{Experience, ReplayBuffer};
pub use weights::{read_weights, write_weights, Weights};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::entropy;
use crate::stats::sigmoid;
use crate::world::{check_termination, step_obstacles, step_uav, Command, Obstacle, Status, TaskConfig, UavState};
use crate::{Mat2, Vec2};

pub const ACTIONS: usize = 3;
pub const STATE_DIM: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Action {
    Silent = 0,
    Sense = 1,
    SenseCommand = 2,
}

impl Action {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            0 => Some(Action::Silent),
            1 => Some(Action::Sense),
            2 => Some(Action::SenseCommand),
            _ => None,
        }
    }

    pub fn senses(self) -> bool {
        self != Action::Silent
    }

    pub fn commands(self) -> bool {
        self == Action::SenseCommand
    }
}

impl From<Action> for u8 {
    fn from(a: Action) -> u8 {
        a as u8
    }
}

impl TryFrom<u8> for Action {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        Action::from_index(v as usize).ok_or_else(|| format!("invalid action {v}"))
    }
}

/// Scales mapping raw observations to network inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub distance_scale: f64,
    pub slot_scale: f64,
    /// Input used for the obstacle distance when nothing is detected.
    pub no_obstacle: f64,
}

impl Normalization {
    pub fn for_task(task: &TaskConfig) -> Self {
        Self { distance_scale: 100.0, slot_scale: task.max_slots as f64, no_obstacle: 1.0 }
    }
}

/// Raw observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedState {
    pub d_dst: f64,
    /// `None` when no obstacle is detected.
    pub d_obs: Option<f64>,
    pub det: f64,
    pub slot: usize,
    pub signals: usize,
}

impl SchedState {
    /// Network input. `det_max` is the largest determinant seen so far in
    /// the episode (the determinant input is 0 while it is 0).
    pub fn features(&self, norm: &Normalization, det_max: f64) -> [f64; STATE_DIM] {
        let det = if det_max > 0.0 { self.det / det_max } else { 0.0 };
        [
            self.d_dst / norm.distance_scale,
            self.d_obs.map_or(norm.no_obstacle, |d| (d / norm.distance_scale).min(norm.no_obstacle)),
            det,
            self.slot as f64 / norm.slot_scale,
            self.signals as f64 / norm.slot_scale,
        ]
    }
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in q.iter().enumerate() {
        if *v > q[best] {
            best = i;
        }
    }
    best
}

/// ε-greedy: greedy when a uniform draw is at most `epsilon`, otherwise a
/// uniformly random action. One uniform is always drawn; a second one only
/// for random actions.
pub fn act<R: Rng + ?Sized>(net: &QNetwork, features: &[f64], epsilon: f64, rng: &mut R) -> Action {
    let u: f64 = rng.random();
    let i = if u <= epsilon { argmax(net.forward(features).as_slice()) } else { rng.random_range(0..ACTIONS) };
    Action::from_index(i).expect("network has three outputs")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub gamma: f64,
    /// Greedy probability ε0.
    pub epsilon: f64,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub target_update: usize,
    pub collision_penalty: f64,
    pub episodes: usize,
    pub hidden: Vec<usize>,
    pub optimizer: OptimizerKind,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            gamma: 0.9,
            epsilon: 0.8,
            buffer_capacity: 8000,
            batch_size: 32,
            learning_rate: 0.001,
            target_update: 100,
            collision_penalty: 10.0,
            episodes: 1500,
            hidden: vec![128, 128],
            optimizer: OptimizerKind::Sgd,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |key: &str, reason: &str| {
            Err(Error::Validation { key: format!("train.{key}"), reason: reason.to_string() })
        };
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return fail("gamma", "must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return fail("epsilon", "must lie in [0, 1]");
        }
        if self.batch_size == 0 {
            return fail("batch_size", "must be positive");
        }
        if self.buffer_capacity < self.batch_size {
            return fail("buffer_capacity", "must hold at least one batch");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return fail("learning_rate", "must be positive");
        }
        if self.target_update == 0 {
            return fail("target_update", "must be positive");
        }
        if !(self.collision_penalty.is_finite() && self.collision_penalty >= 0.0) {
            return fail("collision_penalty", "must be non-negative");
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return fail("hidden", "needs at least one non-empty layer");
        }
        Ok(())
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut s = vec![STATE_DIM];
        s.extend(&self.hidden);
        s.push(ACTIONS);
        s
    }
}

/// One gradient step on a uniformly sampled minibatch. Returns the loss.
pub fn train_step<R: Rng + ?Sized>(
    net: &mut QNetwork,
    target: &QNetwork,
    buffer: &ReplayBuffer,
    cfg: &TrainConfig,
    opt: &mut Optimizer,
    rng: &mut R,
) -> Result<f64> {
    if buffer.len() < cfg.batch_size {
        return Err(Error::InsufficientBuffer { have: buffer.len(), need: cfg.batch_size });
    }
    let batch = buffer.sample(cfg.batch_size, rng);
    let (loss, grads) = batch_gradients(net, target, &batch, cfg.gamma);
    opt.step(net, &grads);
    Ok(loss)
}

/// TD targets and the loss gradient for a fixed batch.
pub fn batch_gradients(net: &QNetwork, target: &QNetwork, batch: &[&Experience], gamma: f64) -> (f64, Gradients) {
    let next: Vec<Vec<f64>> = batch.iter().map(|e| e.next.to_vec()).collect();
    let q_next = target.forward_many(&next);
    let targets: Vec<f64> = batch
        .iter()
        .enumerate()
        .map(|(c, e)| {
            if e.terminal {
                e.reward
            } else {
                let best = (0..ACTIONS).map(|a| q_next[(a, c)]).fold(f64::NEG_INFINITY, f64::max);
                e.reward + gamma * best
            }
        })
        .collect();
    let inputs: Vec<Vec<f64>> = batch.iter().map(|e| e.state.to_vec()).collect();
    let actions: Vec<usize> = batch.iter().map(|e| e.action.index()).collect();
    net.loss_and_gradients(&inputs, &actions, &targets)
}

/// Hard copy of the eval network into the target when `counter % every == 0`.
pub fn sync_target(net: &QNetwork, target: &mut QNetwork, counter: usize, every: usize) -> bool {
    if every > 0 && counter % every == 0 {
        target.copy_from(net);
        true
    } else {
        false
    }
}

/// Reward shaping constants. `RewardConfig::literal()` gives the plain
/// definitions (one-slot counterfactual, unit weights, no floor).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    pub sense_cost: f64,
    pub command_cost: f64,
    pub step_rate: f64,
    /// Multiplier on the entropy reduction.
    pub voi_s_weight: f64,
    /// Isotropic floor (m²) added to both covariances before taking the
    /// entropy difference.
    pub voi_s_floor: f64,
    /// Slots simulated by the C&C counterfactual.
    pub voi_c_horizon: usize,
    /// Multiplier on the distance gain (1/m).
    pub voi_c_weight: f64,
    /// Multiplier on the avoided-collision indicator.
    pub voi_c_collision: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            sense_cost: 0.5,
            command_cost: 1.0,
            step_rate: 0.1,
            voi_s_weight: 1.0,
            voi_s_floor: 0.05,
            voi_c_horizon: 20,
            voi_c_weight: 50.0,
            voi_c_collision: 10.0,
        }
    }
}

impl RewardConfig {
    pub fn literal() -> Self {
        Self {
            voi_s_weight: 1.0,
            voi_s_floor: 0.0,
            voi_c_horizon: 1,
            voi_c_weight: 1.0,
            voi_c_collision: 1.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("sense_cost", self.sense_cost),
            ("command_cost", self.command_cost),
            ("step_rate", self.step_rate),
            ("voi_s_weight", self.voi_s_weight),
            ("voi_s_floor", self.voi_s_floor),
            ("voi_c_weight", self.voi_c_weight),
            ("voi_c_collision", self.voi_c_collision),
        ];
        for (key, v) in fields {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Validation { key: format!("reward.{key}"), reason: "must be non-negative".into() });
            }
        }
        if self.voi_c_horizon == 0 {
            return Err(Error::Validation { key: "reward.voi_c_horizon".into(), reason: "must be at least 1".into() });
        }
        Ok(())
    }
}

/// Entropy reduction ½·ln(det Γ_prev / det Γ_now).
pub fn compute_voi_s(prev: &Mat2, now: &Mat2) -> Result<f64> {
    let (hp, hn) = (entropy(prev), entropy(now));
    if !hp.is_finite() || !hn.is_finite() {
        return Err(Error::DegenerateSystem("covariance determinant is not positive".into()));
    }
    Ok(hp - hn)
}

/// Entropy reduction with an isotropic floor added to both covariances.
/// Zero when the previous covariance is degenerate.
pub fn shaped_voi_s(prev: &Mat2, now: &Mat2, floor: f64) -> f64 {
    let f = Mat2::identity() * floor;
    compute_voi_s(&(prev + f), &(now + f)).unwrap_or(0.0)
}

/// True world state used by the C&C counterfactual.
#[derive(Debug, Clone)]
pub struct Snapshot<'a> {
    pub uav: UavState,
    pub obstacles: &'a [Obstacle],
    pub task: &'a TaskConfig,
    pub slot: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VoiC {
    /// Distance to the destination without the command minus with it (m).
    pub distance_gain: f64,
    /// 1 when only the branch without the command collides.
    pub collision_avoided: f64,
}

/// Runs two copies of the world for `noise.len()` slots: one holding the
/// current command, one applying `cmd` at the first slot after `latency`.
/// Both branches see the same disturbances and obstacle motion.
pub fn compute_voi_c(snap: &Snapshot<'_>, cmd: &Command, latency: f64, noise: &[Vec2]) -> Result<VoiC> {
    let task = snap.task;
    let dst = task.destination();
    let mut held = snap.uav;
    let mut sent = snap.uav;
    let mut obstacles = snap.obstacles.to_vec();
    let (mut held_hit, mut sent_hit) = (false, false);
    for (k, n) in noise.iter().enumerate() {
        obstacles = step_obstacles(&obstacles, task.slot_s, task.obstacle_box);
        if !held_hit {
            held = step_uav(&held, None, 0.0, *n, task)?;
            held_hit = check_termination(&held.position, &obstacles, task, 0) == Status::Collision;
        }
        if !sent_hit {
            sent = if k == 0 { step_uav(&sent, Some(*cmd), latency, *n, task)? } else { step_uav(&sent, None, 0.0, *n, task)? };
            sent_hit = check_termination(&sent.position, &obstacles, task, 0) == Status::Collision;
        }
    }
    Ok(VoiC {
        distance_gain: (held.position - dst).norm() - (sent.position - dst).norm(),
        collision_avoided: if held_hit && !sent_hit { 1.0 } else { 0.0 },
    })
}

/// Everything the reward depends on for one slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub slot: usize,
    pub action: Action,
    pub voi_s: f64,
    pub voi_c: VoiC,
    pub collision: bool,
}

pub fn step_penalty(slot: usize, rate: f64) -> f64 {
    sigmoid(rate * slot as f64)
}

/// R = VoI − Cost − Ψ_step − Ψ_col.
pub fn compute_reward(rec: &TransitionRecord, reward: &RewardConfig, collision_penalty: f64) -> f64 {
    let cost = match rec.action {
        Action::Silent => 0.0,
        Action::Sense => reward.sense_cost,
        Action::SenseCommand => reward.command_cost,
    };
    let voi = reward.voi_s_weight * rec.voi_s
        + reward.voi_c_weight * rec.voi_c.distance_gain
        + reward.voi_c_collision * rec.voi_c.collision_avoided;
    let col = if rec.collision { collision_penalty } else { 0.0 };
    voi - cost - step_penalty(rec.slot, reward.step_rate) - col
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Gosc,
    Trad,
    Periodic,
    Event,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [PolicyKind::Gosc, PolicyKind::Trad, PolicyKind::Periodic, PolicyKind::Event];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Gosc => "gosc",
            PolicyKind::Trad => "trad",
            PolicyKind::Periodic => "periodic",
            PolicyKind::Event => "event",
        }
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gosc" => Ok(PolicyKind::Gosc),
            "trad" => Ok(PolicyKind::Trad),
            "periodic" => Ok(PolicyKind::Periodic),
            "event" => Ok(PolicyKind::Event),
            other => Err(Error::Parse(format!("unknown policy {other:?} (gosc, trad, periodic, event)"))),
        }
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Constants of the rule-based schedulers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub period: usize,
    /// Entropy trigger (nats) with no obstacle detected.
    pub entropy_free: f64,
    /// Entropy trigger (nats) with at least one obstacle detected.
    pub entropy_obstacles: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self { period: 10, entropy_free: 0.01, entropy_obstacles: 0.001 }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.period == 0 {
            return Err(Error::Validation { key: "baseline.period".into(), reason: "must be positive".into() });
        }
        for (key, v) in [("entropy_free", self.entropy_free), ("entropy_obstacles", self.entropy_obstacles)] {
            if !v.is_finite() {
                return Err(Error::Validation { key: format!("baseline.{key}"), reason: "must be finite".into() });
            }
        }
        Ok(())
    }
}

/// Rule-based schedulers. `entropy` is the differential entropy of the
/// current belief; `obstacles` whether anything is detected.
pub fn baseline_policy(kind: PolicyKind, cfg: &BaselineConfig, slot: usize, entropy: f64, obstacles: bool) -> Action {
    match kind {
        PolicyKind::Trad => Action::SenseCommand,
        PolicyKind::Periodic => {
            if slot % cfg.period == 0 {
                Action::SenseCommand
            } else {
                Action::Silent
            }
        }
        PolicyKind::Event => {
            let thr = if obstacles { cfg.entropy_obstacles } else { cfg.entropy_free };
            if entropy >= thr {
                Action::SenseCommand
            } else {
                Action::Silent
            }
        }
        PolicyKind::Gosc => panic!("the learned policy needs a network"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{E, PI};

    fn net_with_output(q: [f64; 3]) -> QNetwork {
        let mut net = QNetwork::zeros(&[5, 4, 3]);
        net.layers[1].b = nalgebra::DVector::from_column_slice(&q);
        net
    }

    #[test]
    fn greedy_picks_max() {
        let net = net_with_output([0.0, 5.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(act(&net, &[0.0; 5], 1.0, &mut rng), Action::Sense);
        }
    }

    #[test]
    fn greedy_ties_go_low() {
        let net = net_with_output([2.0, 2.0, 2.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(act(&net, &[0.0; 5], 1.0, &mut rng), Action::Silent);
    }

    #[test]
    fn random_actions_are_uniform() {
        let net = net_with_output([0.0, 5.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[act(&net, &[0.0; 5], 0.0, &mut rng).index()] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 1.0 / 3.0).abs() < 0.02, "{counts:?}");
        }
    }

    #[test]
    fn voi_s_examples() {
        let a = Mat2::new(2.0, 0.5, 0.5, 1.0);
        assert_eq!(compute_voi_s(&a, &a).unwrap(), 0.0);
        assert_relative_eq!(compute_voi_s(&(Mat2::identity() * E), &Mat2::identity()).unwrap(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(compute_voi_s(&(Mat2::identity() * 2.0), &Mat2::identity()).unwrap(), 2f64.ln(), epsilon = 1e-14);
        assert!(compute_voi_s(&Mat2::zeros(), &Mat2::identity()).is_err());
    }

    #[test]
    fn reward_examples() {
        let cfg = RewardConfig::literal();
        let rec = TransitionRecord { slot: 0, action: Action::Silent, voi_s: 0.0, voi_c: VoiC::default(), collision: false };
        assert_relative_eq!(compute_reward(&rec, &cfg, 10.0), -0.5);
        let rec = TransitionRecord { slot: 10, action: Action::SenseCommand, ..rec };
        assert_relative_eq!(compute_reward(&rec, &cfg, 10.0), -1.0 - 1.0 / (1.0 + (-1.0f64).exp()), epsilon = 1e-12);
        assert!((compute_reward(&rec, &cfg, 10.0) + 1.7311).abs() < 1e-4);
        let hit = TransitionRecord { collision: true, ..rec };
        assert_relative_eq!(compute_reward(&hit, &cfg, 10.0) - compute_reward(&rec, &cfg, 10.0), -10.0);
    }

    fn quiet_task() -> TaskConfig {
        TaskConfig {
            process_noise_var: 0.0,
            destination: [10.0, 0.0],
            obstacle_box: [-20.0, -20.0, 20.0, 20.0],
            ..TaskConfig::default()
        }
    }

    #[test]
    fn voi_c_same_command_is_zero() {
        let t = quiet_task();
        let mut uav = UavState::at_rest(Vec2::new(1.0, 0.0), 0.0);
        uav.command = Command::new(2.0, 0.3);
        let snap = Snapshot { uav, obstacles: &[], task: &t, slot: 0 };
        let v = compute_voi_c(&snap, &uav.command, 0.001, &[Vec2::new(0.01, -0.02)]).unwrap();
        assert_eq!(v, VoiC::default());
    }

    #[test]
    fn voi_c_two_branch_kinematics() {
        let t = quiet_task();
        let mut uav = UavState::at_rest(Vec2::new(1.0, 0.0), PI);
        uav.command = Command::new(1.0, PI);
        let snap = Snapshot { uav, obstacles: &[], task: &t, slot: 0 };
        let cmd = Command::new(1.5, PI - PI / 6.0);
        let tau = 0.002;
        let v = compute_voi_c(&snap, &cmd, tau, &[Vec2::zeros()]).unwrap();
        let without = Vec2::new(1.0 - 0.005, 0.0);
        let with = Vec2::new(1.0 - tau, 0.0) + cmd.velocity() * (0.005 - tau);
        let dst = Vec2::new(10.0, 0.0);
        let expected = (without - dst).norm() - (with - dst).norm();
        assert_relative_eq!(v.distance_gain, expected, epsilon = 1e-12);
        assert_eq!(v.collision_avoided, 0.0);
    }

    #[test]
    fn voi_c_avoided_collision() {
        let t = quiet_task();
        let mut uav = UavState::at_rest(Vec2::new(1.0, 0.0), 0.0);
        uav.command = Command::new(4.0, 0.0);
        // held course reaches the obstacle's safety disk after one slot
        let obstacles = [Obstacle { position: Vec2::new(1.0 + 0.02 + 0.4999, 0.0), velocity: Vec2::zeros() }];
        let snap = Snapshot { uav, obstacles: &obstacles, task: &t, slot: 0 };
        let v = compute_voi_c(&snap, &Command::new(3.5, PI / 6.0), 0.0, &[Vec2::zeros()]).unwrap();
        assert_eq!(v.collision_avoided, 1.0);
    }

    #[test]
    fn sync_every_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = QNetwork::random(&[5, 8, 3], &mut rng);
        let mut target = QNetwork::zeros(&[5, 8, 3]);
        assert!(!sync_target(&net, &mut target, 99, 100));
        assert_ne!(target, net);
        assert!(sync_target(&net, &mut target, 100, 100));
        assert_eq!(target.forward(&[0.3, 0.1, 0.0, 0.2, 0.9]), net.forward(&[0.3, 0.1, 0.0, 0.2, 0.9]));
    }

    #[test]
    fn baseline_examples() {
        let c = BaselineConfig::default();
        assert_eq!(baseline_policy(PolicyKind::Trad, &c, 3, -9.0, false), Action::SenseCommand);
        assert_eq!(baseline_policy(PolicyKind::Periodic, &c, 7, 0.0, false), Action::Silent);
        assert_eq!(baseline_policy(PolicyKind::Periodic, &c, 10, 0.0, false), Action::SenseCommand);
        assert_eq!(baseline_policy(PolicyKind::Event, &c, 1, 0.009, false), Action::Silent);
        assert_eq!(baseline_policy(PolicyKind::Event, &c, 1, 0.010, false), Action::SenseCommand);
        assert_eq!(baseline_policy(PolicyKind::Event, &c, 1, 0.005, true), Action::SenseCommand);
    }

    #[test]
    fn features_normalize() {
        let n = Normalization { distance_scale: 100.0, slot_scale: 2000.0, no_obstacle: 1.0 };
        let s = SchedState { d_dst: 50.0, d_obs: None, det: 2.0, slot: 100, signals: 40 };
        assert_eq!(s.features(&n, 4.0), [0.5, 1.0, 0.5, 0.05, 0.02]);
        assert_eq!(s.features(&n, 0.0)[2], 0.0);
        let s = SchedState { d_obs: Some(20.0), ..s };
        assert_eq!(s.features(&n, 4.0)[1], 0.2);
    }
}
