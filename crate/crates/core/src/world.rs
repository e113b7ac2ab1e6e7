//! Ground truth: UAV and obstacle kinematics, obstacle detection by the
//! cooperative base stations, and episode termination.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Mat2, Vec2};

const FEASIBILITY_TOL: f64 = 1e-9;

/// Commanded speed (m/s) and heading (rad).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Command {
    pub speed: f64,
    pub heading: f64,
}

impl Command {
    pub fn new(speed: f64, heading: f64) -> Self {
        Self { speed, heading }
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::new(self.speed * self.heading.cos(), self.speed * self.heading.sin())
    }
}

/// Task constants shared by the world, planner and scheduler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskConfig {
    /// Slot length Δt (s).
    pub slot_s: f64,
    pub v_max: f64,
    pub delta_v: f64,
    pub delta_phi: f64,
    /// Per-axis process noise variance per slot (m²).
    pub process_noise_var: f64,
    pub d_safe: f64,
    pub d_thr: f64,
    pub r_scan: f64,
    pub start: [f64; 2],
    pub destination: [f64; 2],
    pub initial_heading: f64,
    pub obstacle_count: usize,
    /// Obstacle arena [x_min, y_min, x_max, y_max].
    pub obstacle_box: [f64; 4],
    pub obstacle_max_speed: f64,
    pub obstacle_detection_var: f64,
    pub max_slots: usize,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self {
            slot_s: 0.005,
            v_max: 4.0,
            delta_v: 0.5,
            delta_phi: PI / 6.0,
            process_noise_var: 0.005,
            d_safe: 0.5,
            d_thr: 0.3,
            r_scan: 4.0,
            start: [0.1, 0.1],
            destination: [10.0, 10.0],
            initial_heading: FRAC_PI_4,
            obstacle_count: 10,
            obstacle_box: [2.0, 2.0, 8.0, 8.0],
            obstacle_max_speed: 1.0,
            obstacle_detection_var: 0.001,
            max_slots: 2000,
        }
    }
}

impl TaskConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |key: &str, ok: bool, reason: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Validation { key: format!("task.{key}"), reason: reason.to_string() })
            }
        };
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        check("slot_s", pos(self.slot_s), "must be positive")?;
        check("v_max", pos(self.v_max), "must be positive")?;
        check("delta_v", pos(self.delta_v), "must be positive")?;
        check("delta_phi", pos(self.delta_phi) && self.delta_phi <= PI, "must lie in (0, pi]")?;
        check("process_noise_var", nonneg(self.process_noise_var), "must be non-negative")?;
        check("d_safe", nonneg(self.d_safe), "must be non-negative")?;
        check("d_thr", pos(self.d_thr), "must be positive")?;
        check("r_scan", nonneg(self.r_scan), "must be non-negative")?;
        check("start", self.start.iter().all(|v| v.is_finite()), "must be finite")?;
        check("destination", self.destination.iter().all(|v| v.is_finite()), "must be finite")?;
        check("initial_heading", self.initial_heading.is_finite(), "must be finite")?;
        let b = self.obstacle_box;
        check("obstacle_box", b.iter().all(|v| v.is_finite()) && b[0] < b[2] && b[1] < b[3], "needs x_min < x_max and y_min < y_max")?;
        check("obstacle_max_speed", nonneg(self.obstacle_max_speed), "must be non-negative")?;
        check("obstacle_detection_var", nonneg(self.obstacle_detection_var), "must be non-negative")?;
        check("max_slots", self.max_slots >= 1, "must be at least 1")?;
        Ok(())
    }

    pub fn start(&self) -> Vec2 {
        Vec2::new(self.start[0], self.start[1])
    }

    pub fn destination(&self) -> Vec2 {
        Vec2::new(self.destination[0], self.destination[1])
    }
}

/// True UAV state. `command` is the command in force, `previous` the one
/// it replaced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavState {
    pub position: Vec2,
    pub command: Command,
    pub previous: Command,
}

impl UavState {
    pub fn at_rest(position: Vec2, heading: f64) -> Self {
        let cmd = Command::new(0.0, heading.rem_euclid(TAU));
        Self { position, command: cmd, previous: cmd }
    }
}

/// Signed heading change on the circle, in (-pi, pi].
pub fn heading_delta(from: f64, to: f64) -> f64 {
    crate::channel::wrap_pi(to - from)
}

/// Checks a new command against the speed and turn-rate limits.
pub fn check_feasible(prev: &Command, next: &Command, task: &TaskConfig) -> Result<()> {
    if !(next.speed.is_finite() && next.heading.is_finite()) {
        return Err(Error::InfeasibleCommand("non-finite command".into()));
    }
    if next.speed < -FEASIBILITY_TOL || next.speed > task.v_max + FEASIBILITY_TOL {
        return Err(Error::InfeasibleCommand(format!("speed {} outside [0, {}]", next.speed, task.v_max)));
    }
    if (next.speed - prev.speed).abs() > task.delta_v + FEASIBILITY_TOL {
        return Err(Error::InfeasibleCommand(format!("speed change {} -> {}", prev.speed, next.speed)));
    }
    if !(0.0..TAU).contains(&next.heading) {
        return Err(Error::InfeasibleCommand(format!("heading {} outside [0, 2pi)", next.heading)));
    }
    if heading_delta(prev.heading, next.heading).abs() > task.delta_phi + FEASIBILITY_TOL {
        return Err(Error::InfeasibleCommand(format!("heading change {} -> {}", prev.heading, next.heading)));
    }
    Ok(())
}

/// Advances the UAV by one slot. A delivered command takes effect after the
/// decoding latency `latency`; before that the held command applies.
/// `noise` is the per-axis disturbance for this slot.
pub fn step_uav(
    state: &UavState,
    delivered: Option<Command>,
    latency: f64,
    noise: Vec2,
    task: &TaskConfig,
) -> Result<UavState> {
    let dt = task.slot_s;
    match delivered {
        None => Ok(UavState {
            position: state.position + state.command.velocity() * dt + noise,
            command: state.command,
            previous: state.command,
        }),
        Some(cmd) => {
            check_feasible(&state.command, &cmd, task)?;
            if !(0.0..dt).contains(&latency) {
                return Err(Error::InfeasibleCommand(format!("latency {latency} outside [0, {dt})")));
            }
            let position =
                state.position + state.command.velocity() * latency + cmd.velocity() * (dt - latency) + noise;
            Ok(UavState { position, command: cmd, previous: state.command })
        }
    }
}

/// Draws the per-axis process disturbance for one slot. Two standard
/// normals are always consumed so streams stay aligned across policies.
pub fn draw_process_noise<R: Rng + ?Sized>(task: &TaskConfig, rng: &mut R) -> Vec2 {
    let sd = task.process_noise_var.sqrt();
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    Vec2::new(x * sd, y * sd)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub position: Vec2,
    pub velocity: Vec2,
}

/// An obstacle as reported by the cooperative base stations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectedObstacle {
    pub position: Vec2,
    pub cov: Mat2,
    /// Index of the true obstacle.
    pub source: usize,
}

/// Random layout: uniform positions in the arena, uniform per-axis
/// velocities in [-v, v], held for the episode.
pub fn spawn_obstacles<R: Rng + ?Sized>(task: &TaskConfig, rng: &mut R) -> Vec<Obstacle> {
    let [x0, y0, x1, y1] = task.obstacle_box;
    let v = task.obstacle_max_speed;
    (0..task.obstacle_count)
        .map(|_| {
            let position = Vec2::new(rng.random_range(x0..=x1), rng.random_range(y0..=y1));
            let velocity = if v > 0.0 {
                let u = Uniform::new_inclusive(-v, v).expect("valid range");
                Vec2::new(u.sample(rng), u.sample(rng))
            } else {
                Vec2::zeros()
            };
            Obstacle { position, velocity }
        })
        .collect()
}

/// Moves every obstacle by `velocity * dt`, reflecting off the arena walls.
pub fn step_obstacles(obstacles: &[Obstacle], dt: f64, arena: [f64; 4]) -> Vec<Obstacle> {
    obstacles
        .iter()
        .map(|o| {
            let mut position = o.position + o.velocity * dt;
            let mut velocity = o.velocity;
            for axis in 0..2 {
                let (lo, hi) = (arena[axis], arena[axis + 2]);
                if position[axis] < lo {
                    position[axis] = 2.0 * lo - position[axis];
                    velocity[axis] = velocity[axis].abs();
                } else if position[axis] > hi {
                    position[axis] = 2.0 * hi - position[axis];
                    velocity[axis] = -velocity[axis].abs();
                }
            }
            Obstacle { position, velocity }
        })
        .collect()
}

/// Reports every obstacle within `r_scan` of `center` (closed ball), each
/// perturbed by N(0, σ_o²) per axis.
pub fn detect_obstacles<R: Rng + ?Sized>(
    center: &Vec2,
    obstacles: &[Obstacle],
    task: &TaskConfig,
    rng: &mut R,
) -> Vec<DetectedObstacle> {
    let var = task.obstacle_detection_var;
    let noise = Normal::new(0.0, var.sqrt()).expect("finite variance");
    obstacles
        .iter()
        .enumerate()
        .filter(|(_, o)| (o.position - center).norm() <= task.r_scan)
        .map(|(i, o)| DetectedObstacle {
            position: o.position + Vec2::new(noise.sample(rng), noise.sample(rng)),
            cov: Mat2::identity() * var,
            source: i,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Running,
    Success,
    Collision,
    Timeout,
}

/// Collision (within D_safe of any true obstacle) beats success (within
/// D_thr of the destination); timeout applies once `slot >= max_slots`.
pub fn check_termination(position: &Vec2, obstacles: &[Obstacle], task: &TaskConfig, slot: usize) -> Status {
    if obstacles.iter().any(|o| (position - o.position).norm() <= task.d_safe) {
        Status::Collision
    } else if (position - task.destination()).norm() <= task.d_thr {
        Status::Success
    } else if slot >= task.max_slots {
        Status::Timeout
    } else {
        Status::Running
    }
}

pub fn nearest_obstacle_distance(position: &Vec2, obstacles: &[Obstacle]) -> f64 {
    obstacles.iter().map(|o| (position - o.position).norm()).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn task() -> TaskConfig {
        TaskConfig { process_noise_var: 0.0, ..Default::default() }
    }

    fn moving(speed: f64, heading: f64) -> UavState {
        let c = Command::new(speed, heading);
        UavState { position: Vec2::zeros(), command: c, previous: c }
    }

    #[test]
    fn straight_step() {
        let s = step_uav(&moving(1.0, 0.0), Some(Command::new(1.0, 0.0)), 0.0, Vec2::zeros(), &task()).unwrap();
        assert_relative_eq!(s.position, Vec2::new(0.005, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn piecewise_step_with_latency() {
        // a quarter turn needs a wider turn limit than the default
        let wide = TaskConfig { delta_phi: PI, ..task() };
        let s = step_uav(&moving(2.0, 0.0), Some(Command::new(2.0, PI / 2.0)), 0.002, Vec2::zeros(), &wide).unwrap();
        assert_relative_eq!(s.position, Vec2::new(0.004, 0.006), epsilon = 1e-15);
        assert_eq!(s.previous, Command::new(2.0, 0.0));
        assert_eq!(s.command, Command::new(2.0, PI / 2.0));
    }

    #[test]
    fn hold_matches_repeating_the_command() {
        let s0 = moving(3.0, 1.0);
        let held = step_uav(&s0, None, 0.0, Vec2::zeros(), &task()).unwrap();
        let repeated = step_uav(&s0, Some(s0.command), 0.0, Vec2::zeros(), &task()).unwrap();
        assert_eq!(held.position, repeated.position);
    }

    #[test]
    fn infeasible_commands_are_rejected() {
        let s0 = moving(1.0, 0.2);
        for cmd in [Command::new(1.6, 0.2), Command::new(1.0, 0.2 + PI / 5.0), Command::new(-0.1, 0.2)] {
            assert!(matches!(
                step_uav(&s0, Some(cmd), 0.0, Vec2::zeros(), &task()),
                Err(Error::InfeasibleCommand(_))
            ));
        }
        // turning across the 0/2pi seam is a small change
        let s0 = moving(1.0, 0.1);
        assert!(step_uav(&s0, Some(Command::new(1.0, TAU - 0.1)), 0.0, Vec2::zeros(), &task()).is_ok());
    }

    #[test]
    fn obstacles_move_linearly() {
        let obs = vec![
            Obstacle { position: Vec2::new(1.0, 1.0), velocity: Vec2::zeros() },
            Obstacle { position: Vec2::new(5.0, 5.0), velocity: Vec2::new(1.0, -1.0) },
        ];
        let next = step_obstacles(&obs, 0.005, [0.0, 0.0, 10.0, 10.0]);
        assert_eq!(next[0].position, obs[0].position);
        assert_relative_eq!(next[1].position - obs[1].position, Vec2::new(0.005, -0.005), epsilon = 1e-15);
    }

    #[test]
    fn obstacles_reflect_off_walls() {
        let obs = vec![Obstacle { position: Vec2::new(7.999, 5.0), velocity: Vec2::new(1.0, 0.0) }];
        let next = step_obstacles(&obs, 0.005, [2.0, 2.0, 8.0, 8.0]);
        assert_relative_eq!(next[0].position.x, 7.996, epsilon = 1e-12);
        assert!(next[0].velocity.x < 0.0);
    }

    #[test]
    fn detection_uses_closed_ball() {
        let t = TaskConfig { r_scan: 1.0, obstacle_detection_var: 0.0, ..Default::default() };
        let obs = vec![
            Obstacle { position: Vec2::new(1.0, 0.0), velocity: Vec2::zeros() },
            Obstacle { position: Vec2::new(0.0, 1.5), velocity: Vec2::zeros() },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let det = detect_obstacles(&Vec2::zeros(), &obs, &t, &mut rng);
        assert_eq!(det.len(), 1);
        assert_eq!(det[0].position, obs[0].position);
        assert!(detect_obstacles(&Vec2::new(-5.0, -5.0), &obs, &t, &mut rng).is_empty());
    }

    #[test]
    fn termination_boundaries() {
        let t = TaskConfig::default();
        let o = vec![Obstacle { position: Vec2::new(5.5, 5.0), velocity: Vec2::zeros() }];
        assert_eq!(check_termination(&Vec2::new(5.0, 5.0), &o, &t, 3), Status::Collision);
        let at_origin = TaskConfig { destination: [0.0, 0.0], ..t.clone() };
        assert_eq!(check_termination(&Vec2::new(0.3, 0.0), &o, &at_origin, 3), Status::Success);
        assert_eq!(check_termination(&Vec2::new(1.0, 1.0), &o, &t, 3), Status::Running);
        assert_eq!(check_termination(&Vec2::new(1.0, 1.0), &o, &t, t.max_slots), Status::Timeout);
        // collision wins over success
        let o = vec![Obstacle { position: Vec2::new(10.0, 10.4), velocity: Vec2::zeros() }];
        assert_eq!(check_termination(&Vec2::new(10.0, 10.0), &o, &t, 3), Status::Collision);
    }
}
