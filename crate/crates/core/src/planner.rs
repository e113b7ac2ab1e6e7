//! Dynamic window planners.
//!
//! [`select_command`] scores rollouts by Mahalanobis distances under the
//! belief and obstacle covariances (MD-DWA). [`select_command_inflated`] is
//! the Euclidean baseline that grows every obstacle by a confidence radius
//! (I-DWA).

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::Estimate;
use crate::stats::{chi_squared_quantile, sym_eigenvalues};
use crate::world::{Command, DetectedObstacle, TaskConfig};
use crate::{Mat2, Vec2};

/// Added to a covariance that is not positive definite before inverting it
/// inside the selection loop (noise-free configurations).
const JITTER: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerParams {
    /// Prediction horizon I_p (slots).
    pub horizon: usize,
    pub speed_samples: usize,
    pub heading_samples: usize,
    /// Confidence level of the chi-squared gate.
    pub confidence: f64,
    /// Confidence factor B of the inflation baseline.
    pub inflation_factor: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self { horizon: 20, speed_samples: 5, heading_samples: 11, confidence: 0.99, inflation_factor: 2.576 }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |key: &str, reason: &str| {
            Err(Error::Validation { key: format!("planner.{key}"), reason: reason.to_string() })
        };
        if self.horizon < 1 {
            return fail("horizon", "must be at least 1");
        }
        if self.speed_samples < 2 {
            return fail("speed_samples", "must be at least 2");
        }
        if self.heading_samples < 2 {
            return fail("heading_samples", "must be at least 2");
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return fail("confidence", "must lie in (0, 1)");
        }
        if !(self.inflation_factor.is_finite() && self.inflation_factor >= 0.0) {
            return fail("inflation_factor", "must be non-negative");
        }
        Ok(())
    }

    /// χ² quantile with two degrees of freedom at `confidence`.
    pub fn chi2_threshold(&self) -> f64 {
        chi_squared_quantile(2, self.confidence)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
}

fn wrap_heading(h: f64) -> f64 {
    let w = h.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Speed-major grid over the dynamic window of `prev`. Headings are offsets
/// from the previous heading in ascending order, wrapped onto [0, 2π).
pub fn feasible_set(prev: &Command, task: &TaskConfig, params: &PlannerParams) -> Vec<Command> {
    let v_lo = (prev.speed - task.delta_v).max(0.0);
    let v_hi = (prev.speed + task.delta_v).min(task.v_max).max(v_lo);
    let mut out = Vec::with_capacity(params.speed_samples * params.heading_samples);
    for v in linspace(v_lo, v_hi, params.speed_samples) {
        for k in 0..params.heading_samples {
            let off = task.delta_phi * (2.0 * k as f64 / (params.heading_samples - 1) as f64 - 1.0);
            out.push(Command::new(v, wrap_heading(prev.heading + off)));
        }
    }
    out
}

/// Predicted positions and UAV covariances for steps b = 1..=I_p.
pub fn rollout(origin: &Estimate, cmd: &Command, params: &PlannerParams, task: &TaskConfig) -> Vec<(Vec2, Mat2)> {
    let v = cmd.velocity();
    (1..=params.horizon)
        .map(|b| {
            let b = b as f64;
            (origin.mean + v * (b * task.slot_s), origin.cov + Mat2::identity() * (b * task.process_noise_var))
        })
        .collect()
}

pub fn mahalanobis(p: &Vec2, q: &Vec2, sigma: &Mat2) -> Result<f64> {
    let chol = sigma
        .cholesky()
        .ok_or_else(|| Error::SingularCovariance(format!("{sigma:?} is not positive definite")))?;
    let d = p - q;
    let y = chol.l().solve_lower_triangular(&d).expect("cholesky factor has a positive diagonal");
    Ok(y.norm())
}

fn mahalanobis_lenient(p: &Vec2, q: &Vec2, sigma: &Mat2) -> f64 {
    mahalanobis(p, q, sigma)
        .or_else(|_| mahalanobis(p, q, &(sigma + Mat2::identity() * JITTER)))
        .unwrap_or(f64::INFINITY)
}

/// Closest approach over a rollout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinDistance {
    pub distance: f64,
    /// Rollout step (1-based) and index into the detected list.
    pub step: Option<usize>,
    pub obstacle: Option<usize>,
}

/// Minimum over steps and obstacles of the Mahalanobis distance under
/// `Γ_b + Φ_o + bΔt·I`; obstacles are held at their detected positions.
pub fn min_mahalanobis(traj: &[(Vec2, Mat2)], detected: &[DetectedObstacle], dt: f64) -> MinDistance {
    let mut best = MinDistance { distance: f64::INFINITY, step: None, obstacle: None };
    for (k, (p, gamma)) in traj.iter().enumerate() {
        let b = (k + 1) as f64;
        for (o, obs) in detected.iter().enumerate() {
            let sigma = gamma + obs.cov + Mat2::identity() * (b * dt);
            let d = mahalanobis_lenient(p, &obs.position, &sigma);
            if d < best.distance || best.step.is_none() {
                best = MinDistance { distance: d, step: Some(k + 1), obstacle: Some(o) };
            }
        }
    }
    best
}

/// Lower bound on the minimum Mahalanobis distance that keeps the true
/// separation above `d_safe` with the chosen confidence.
pub fn collision_threshold(sigma: &Mat2, d_safe: f64, chi2: f64) -> Result<f64> {
    let (lo, _) = sym_eigenvalues(sigma);
    if !(lo > 0.0) || sigma.cholesky().is_none() {
        return Err(Error::SingularCovariance(format!("{sigma:?} is not positive definite")));
    }
    Ok(chi2.sqrt() + d_safe / lo.sqrt())
}

pub fn destination_distance(endpoint: &Vec2, gamma_end: &Mat2, destination: &Vec2) -> Result<f64> {
    mahalanobis(endpoint, destination, gamma_end)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateEvaluation {
    pub cmd: Command,
    pub d_min: f64,
    pub d_dst: f64,
    pub b_star: Option<usize>,
    pub o_star: Option<usize>,
    /// Passes the collision gate.
    pub feasible: bool,
    /// Gate value at (b★, o★); zero when nothing is detected.
    pub threshold: f64,
}

/// Scores every candidate of the dynamic window with MD-DWA distances.
pub fn evaluate_candidates(
    est: &Estimate,
    detected: &[DetectedObstacle],
    prev: &Command,
    task: &TaskConfig,
    params: &PlannerParams,
) -> Vec<CandidateEvaluation> {
    let chi2 = params.chi2_threshold();
    let dst = task.destination();
    feasible_set(prev, task, params)
        .into_iter()
        .map(|cmd| {
            let traj = rollout(est, &cmd, params, task);
            let (end, gamma_end) = traj[traj.len() - 1];
            let d_dst = mahalanobis_lenient(&end, &dst, &gamma_end);
            let m = min_mahalanobis(&traj, detected, task.slot_s);
            let (feasible, threshold) = match (m.step, m.obstacle) {
                (Some(b), Some(o)) => {
                    let sigma = detected[o].cov + traj[b - 1].1;
                    let thr = collision_threshold(&sigma, task.d_safe, chi2)
                        .or_else(|_| collision_threshold(&(sigma + Mat2::identity() * JITTER), task.d_safe, chi2))
                        .unwrap_or(f64::INFINITY);
                    (m.distance >= thr, thr)
                }
                _ => (true, 0.0),
            };
            CandidateEvaluation { cmd, d_min: m.distance, d_dst, b_star: m.step, o_star: m.obstacle, feasible, threshold }
        })
        .collect()
}

/// Normalized two-term score over the admissible candidates; returns the
/// index of the minimum, lowest index on ties.
pub fn argmin_score(cands: &[CandidateEvaluation], admissible: &[usize], use_obstacles: bool) -> Option<usize> {
    let d_dst_max = admissible.iter().map(|&i| cands[i].d_dst).fold(0.0, f64::max);
    let d_min_min = admissible.iter().map(|&i| cands[i].d_min).fold(f64::INFINITY, f64::min);
    let score = |c: &CandidateEvaluation| {
        let a = if d_dst_max > 0.0 && d_dst_max.is_finite() { c.d_dst / d_dst_max } else { 0.0 };
        let b = if use_obstacles && d_min_min.is_finite() { d_min_min / c.d_min } else { 0.0 };
        a + b
    };
    let mut best: Option<(usize, f64)> = None;
    for &i in admissible {
        let e = score(&cands[i]);
        if best.is_none_or(|(_, s)| e < s) {
            best = Some((i, e));
        }
    }
    best.map(|(i, _)| i)
}

fn fallback(cands: &[CandidateEvaluation]) -> usize {
    let mut best = 0;
    for (i, c) in cands.iter().enumerate() {
        if c.d_min > cands[best].d_min {
            best = i;
        }
    }
    best
}

/// MD-DWA command selection.
pub fn select_command(
    est: &Estimate,
    detected: &[DetectedObstacle],
    prev: &Command,
    task: &TaskConfig,
    params: &PlannerParams,
) -> Command {
    let cands = evaluate_candidates(est, detected, prev, task, params);
    choose(&cands, !detected.is_empty())
}

fn choose(cands: &[CandidateEvaluation], use_obstacles: bool) -> Command {
    let admissible: Vec<usize> = if use_obstacles {
        (0..cands.len()).filter(|&i| cands[i].feasible).collect()
    } else {
        (0..cands.len()).collect()
    };
    match argmin_score(cands, &admissible, use_obstacles) {
        Some(i) => cands[i].cmd,
        None => cands[fallback(cands)].cmd,
    }
}

/// Inflation radius B·√λmax(Γ + Φ_o) + D_safe.
pub fn inflation_radius(uav_cov: &Mat2, obstacle_cov: &Mat2, factor: f64, d_safe: f64) -> f64 {
    let (_, hi) = sym_eigenvalues(&(uav_cov + obstacle_cov));
    factor * hi.max(0.0).sqrt() + d_safe
}

/// Scores every candidate with Euclidean distances. `d_min` is the surface
/// clearance to the nearest inflated disk; a candidate is feasible when it
/// stays outside every disk.
pub fn evaluate_candidates_inflated(
    est: &Estimate,
    detected: &[DetectedObstacle],
    prev: &Command,
    task: &TaskConfig,
    params: &PlannerParams,
) -> Vec<CandidateEvaluation> {
    let dst = task.destination();
    let radii: Vec<f64> =
        detected.iter().map(|o| inflation_radius(&est.cov, &o.cov, params.inflation_factor, task.d_safe)).collect();
    feasible_set(prev, task, params)
        .into_iter()
        .map(|cmd| {
            let traj = rollout(est, &cmd, params, task);
            let d_dst = (traj[traj.len() - 1].0 - dst).norm();
            let mut d_min = f64::INFINITY;
            let (mut b_star, mut o_star) = (None, None);
            for (k, (p, _)) in traj.iter().enumerate() {
                for (o, obs) in detected.iter().enumerate() {
                    let c = (p - obs.position).norm() - radii[o];
                    if c < d_min || b_star.is_none() {
                        d_min = c;
                        b_star = Some(k + 1);
                        o_star = Some(o);
                    }
                }
            }
            let threshold = o_star.map_or(0.0, |o| radii[o]);
            CandidateEvaluation { cmd, d_min, d_dst, b_star, o_star, feasible: d_min > 0.0, threshold }
        })
        .collect()
}

/// I-DWA command selection.
pub fn select_command_inflated(
    est: &Estimate,
    detected: &[DetectedObstacle],
    prev: &Command,
    task: &TaskConfig,
    params: &PlannerParams,
) -> Command {
    let cands = evaluate_candidates_inflated(est, detected, prev, task, params);
    choose(&cands, !detected.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn obstacle(x: f64, y: f64, var: f64) -> DetectedObstacle {
        DetectedObstacle { position: Vec2::new(x, y), cov: Mat2::identity() * var, source: 0 }
    }

    fn est(x: f64, y: f64, var: f64) -> Estimate {
        Estimate { mean: Vec2::new(x, y), cov: Mat2::identity() * var, velocity: Vec2::zeros() }
    }

    #[test]
    fn chi2_default() {
        assert!((PlannerParams::default().chi2_threshold() - 9.2103).abs() < 1e-3);
    }

    #[test]
    fn speed_window_from_rest() {
        let set = feasible_set(&Command::new(0.0, 1.0), &TaskConfig::default(), &PlannerParams::default());
        let lo = set.iter().map(|c| c.speed).fold(f64::INFINITY, f64::min);
        let hi = set.iter().map(|c| c.speed).fold(0.0, f64::max);
        assert_eq!((lo, hi), (0.0, 0.5));
    }

    #[test]
    fn speed_window_at_max() {
        let set = feasible_set(&Command::new(4.0, 1.0), &TaskConfig::default(), &PlannerParams::default());
        let lo = set.iter().map(|c| c.speed).fold(f64::INFINITY, f64::min);
        let hi = set.iter().map(|c| c.speed).fold(0.0, f64::max);
        assert_eq!((lo, hi), (3.5, 4.0));
    }

    #[test]
    fn grid_cardinality() {
        let p = PlannerParams { speed_samples: 3, heading_samples: 3, ..Default::default() };
        assert_eq!(feasible_set(&Command::new(1.0, 1.0), &TaskConfig::default(), &p).len(), 9);
    }

    #[test]
    fn heading_window_wraps() {
        let t = TaskConfig::default();
        let prev = Command::new(1.0, 0.1);
        for c in feasible_set(&prev, &t, &PlannerParams::default()) {
            assert!((0.0..TAU).contains(&c.heading));
            crate::world::check_feasible(&prev, &c, &t).unwrap();
        }
    }

    #[test]
    fn rollout_examples() {
        let t = TaskConfig::default();
        let p = PlannerParams::default();
        let e = Estimate::known(Vec2::new(1.0, 2.0));
        let still = rollout(&e, &Command::new(0.0, 0.3), &p, &t);
        assert!(still.iter().all(|(q, _)| *q == e.mean));
        let moving = rollout(&e, &Command::new(1.0, 0.0), &p, &t);
        assert_eq!(moving.len(), 20);
        assert_relative_eq!(moving[19].0, Vec2::new(1.1, 2.0), epsilon = 1e-12);
        assert_relative_eq!(moving[19].1, Mat2::identity() * 0.1, epsilon = 1e-12);
    }

    #[test]
    fn mahalanobis_examples() {
        let z = Vec2::zeros();
        assert_eq!(mahalanobis(&z, &z, &Mat2::identity()).unwrap(), 0.0);
        assert_relative_eq!(mahalanobis(&Vec2::new(1.0, 0.0), &z, &(Mat2::identity() * 0.25)).unwrap(), 2.0);
        let s = Mat2::new(2.0, 1.0, 1.0, 2.0);
        assert_relative_eq!(mahalanobis(&Vec2::new(1.0, 1.0), &z, &s).unwrap(), (2.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert!(mahalanobis(&z, &z, &Mat2::zeros()).is_err());
    }

    #[test]
    fn identity_is_euclidean() {
        let p = Vec2::new(3.0, -4.0);
        assert_eq!(mahalanobis(&p, &Vec2::zeros(), &Mat2::identity()).unwrap(), 5.0);
    }

    #[test]
    fn threshold_examples() {
        let chi2 = chi_squared_quantile(2, 0.99);
        assert!((collision_threshold(&Mat2::identity(), 0.5, chi2).unwrap() - 3.5347).abs() < 1e-3);
        assert!((collision_threshold(&(Mat2::identity() * 4.0), 0.5, chi2).unwrap() - 3.2849).abs() < 1e-3);
        let s = Mat2::new(3.0, 1.0, 1.0, 0.5);
        assert_eq!(collision_threshold(&s, 0.0, chi2).unwrap(), chi2.sqrt());
        assert!(collision_threshold(&Mat2::zeros(), 0.5, chi2).is_err());
    }

    #[test]
    fn destination_examples() {
        let d = Vec2::new(10.0, 10.0);
        assert_eq!(destination_distance(&d, &Mat2::identity(), &d).unwrap(), 0.0);
        assert_relative_eq!(destination_distance(&Vec2::new(11.0, 10.0), &Mat2::identity(), &d).unwrap(), 1.0);
        let e = destination_distance(&Vec2::new(10.1, 10.1), &(Mat2::identity() * 0.1), &d).unwrap();
        assert_relative_eq!(e, 0.2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn min_distance_empty_and_coincident() {
        let t = TaskConfig::default();
        let p = PlannerParams::default();
        let e = est(5.0, 5.0, 0.01);
        let traj = rollout(&e, &Command::new(0.0, 0.0), &p, &t);
        assert_eq!(min_mahalanobis(&traj, &[], t.slot_s).distance, f64::INFINITY);
        let m = min_mahalanobis(&traj, &[obstacle(5.0, 5.0, 0.001)], t.slot_s);
        assert_eq!((m.distance, m.step, m.obstacle), (0.0, Some(1), Some(0)));
    }

    #[test]
    fn min_distance_matches_enumeration() {
        let traj = vec![
            (Vec2::new(0.0, 0.0), Mat2::from_diagonal(&Vec2::new(0.1, 0.2))),
            (Vec2::new(0.5, 0.1), Mat2::from_diagonal(&Vec2::new(0.2, 0.3))),
            (Vec2::new(1.0, 0.2), Mat2::from_diagonal(&Vec2::new(0.3, 0.4))),
        ];
        let obs = [obstacle(1.5, 0.0, 0.05), DetectedObstacle { position: Vec2::new(0.2, 1.0), cov: Mat2::from_diagonal(&Vec2::new(0.02, 0.3)), source: 1 }];
        let dt = 0.1;
        let mut best = (f64::INFINITY, 0, 0);
        for (b, (p, g)) in traj.iter().enumerate() {
            for (o, ob) in obs.iter().enumerate() {
                let s = g + ob.cov + Mat2::identity() * ((b + 1) as f64 * dt);
                let d = p - ob.position;
                let v = (d.x * d.x / s[(0, 0)] + d.y * d.y / s[(1, 1)]).sqrt();
                if v < best.0 {
                    best = (v, b + 1, o);
                }
            }
        }
        let m = min_mahalanobis(&traj, &obs, dt);
        assert_relative_eq!(m.distance, best.0, epsilon = 1e-12);
        assert_eq!((m.step, m.obstacle), (Some(best.1), Some(best.2)));
    }

    #[test]
    fn obstacle_free_heads_for_destination() {
        let t = TaskConfig { destination: [10.0, 0.0], ..TaskConfig::default() };
        let prev = Command::new(4.0, 0.0);
        let cmd = select_command(&est(0.0, 0.0, 0.01), &[], &prev, &t, &PlannerParams::default());
        assert_eq!(cmd, Command::new(4.0, 0.0));
    }

    #[test]
    fn obstacle_free_agrees_with_inflated() {
        let t = TaskConfig::default();
        let p = PlannerParams::default();
        for (x, y, h) in [(0.1, 0.1, FRAC_PI_4), (3.0, 7.0, 0.2), (9.0, 2.0, PI)] {
            let e = est(x, y, 0.02);
            let prev = Command::new(2.0, h);
            assert_eq!(select_command(&e, &[], &prev, &t, &p), select_command_inflated(&e, &[], &prev, &t, &p));
        }
    }

    #[test]
    fn distant_obstacle_is_ignored_by_inflation() {
        let t = TaskConfig::default();
        let p = PlannerParams::default();
        let e = est(1.0, 1.0, 0.02);
        let prev = Command::new(2.0, FRAC_PI_4);
        let far = [obstacle(-40.0, 30.0, 0.001)];
        assert_eq!(select_command_inflated(&e, &far, &prev, &t, &p), select_command_inflated(&e, &[], &prev, &t, &p));
    }

    #[test]
    fn zero_uncertainty_inflation_is_d_safe() {
        assert_eq!(inflation_radius(&Mat2::zeros(), &Mat2::zeros(), 2.576, 0.5), 0.5);
    }

    #[test]
    fn blocked_everywhere_falls_back_to_max_clearance() {
        let t = TaskConfig::default();
        let p = PlannerParams::default();
        let e = est(5.0, 5.0, 0.0);
        let obs = [obstacle(5.2, 5.0, 0.0)];
        let prev = Command::new(1.0, 0.0);
        let cands = evaluate_candidates_inflated(&e, &obs, &prev, &t, &p);
        assert!(cands.iter().all(|c| !c.feasible));
        let best = cands.iter().map(|c| c.d_min).fold(f64::NEG_INFINITY, f64::max);
        let cmd = select_command_inflated(&e, &obs, &prev, &t, &p);
        let chosen = cands.iter().find(|c| c.cmd == cmd).unwrap();
        assert_eq!(chosen.d_min, best);
        let md = evaluate_candidates(&e, &obs, &prev, &t, &p);
        assert!(md.iter().all(|c| !c.feasible));
        let cmd = select_command(&e, &obs, &prev, &t, &p);
        let best = md.iter().map(|c| c.d_min).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(md.iter().find(|c| c.cmd == cmd).unwrap().d_min, best);
    }

    fn eval(d_dst: f64, d_min: f64) -> CandidateEvaluation {
        CandidateEvaluation {
            cmd: Command::new(d_dst, d_min),
            d_min,
            d_dst,
            b_star: Some(1),
            o_star: Some(0),
            feasible: true,
            threshold: 0.0,
        }
    }

    #[test]
    fn single_survivor_scores_two() {
        let c = [eval(3.0, 7.0)];
        assert_eq!(argmin_score(&c, &[0], true), Some(0));
        let e = c[0].d_dst / 3.0 + 7.0 / c[0].d_min;
        assert_eq!(e, 2.0);
    }

    #[test]
    fn ties_go_to_lower_index() {
        let c = [eval(2.0, 5.0), eval(2.0, 5.0), eval(3.0, 5.0)];
        assert_eq!(argmin_score(&c, &[0, 1, 2], true), Some(0));
        assert_eq!(argmin_score(&c, &[1, 2], true), Some(1));
    }

    #[test]
    fn score_is_scale_invariant() {
        let c = [eval(2.0, 5.0), eval(1.5, 2.0), eval(3.0, 9.0), eval(1.0, 1.2)];
        let all = [0, 1, 2, 3];
        let base = argmin_score(&c, &all, true);
        let scaled: Vec<_> = c.iter().map(|e| eval(e.d_dst * 7.3, e.d_min * 0.01)).collect();
        assert_eq!(argmin_score(&scaled, &all, true), base);
    }

    #[test]
    fn returned_commands_are_feasible() {
        let t = TaskConfig::default();
        let p = PlannerParams::default();
        let obs = [obstacle(2.0, 2.0, 0.001), obstacle(2.5, 1.0, 0.001)];
        for h in [0.0, 1.0, 3.0, 6.2] {
            let prev = Command::new(1.5, h);
            for cmd in [
                select_command(&est(1.0, 1.0, 0.01), &obs, &prev, &t, &p),
                select_command_inflated(&est(1.0, 1.0, 0.01), &obs, &prev, &t, &p),
            ] {
                crate::world::check_feasible(&prev, &cmd, &t).unwrap();
            }
        }
    }
}
