use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::estimator::Estimate;
use crate::planner::{evaluate_candidates, PlannerParams};
use crate::rng::{stream, Stream};
use crate::world::{Command, DetectedObstacle, TaskConfig};
use crate::{Mat2, Vec2};

/// One random scene: the tightest candidate that passed the collision gate
/// and the empirical rate at which sampled true positions stayed apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Instance {
    pub d_min: f64,
    pub threshold: f64,
    pub clear_rate: f64,
}

fn random_spd<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> Mat2 {
    let a = rng.random_range(0.0..std::f64::consts::PI);
    let (s, c) = a.sin_cos();
    let rot = Mat2::new(c, -s, s, c);
    let d = Mat2::from_diagonal(&Vec2::new(rng.random_range(lo..hi), rng.random_range(lo..hi)));
    rot * d * rot.transpose()
}

fn sample<R: Rng + ?Sized>(rng: &mut R, mean: &Vec2, chol: &Mat2) -> Vec2 {
    let z = Vec2::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    mean + chol * z
}

/// Builds `instances` random scenes (belief covariance, obstacle position,
/// previous command), runs the planner's gate, and samples `draws` paired
/// UAV and obstacle positions around the tightest admitted candidate at its
/// closest step.
pub fn validate_lemma2(
    task: &TaskConfig,
    params: &PlannerParams,
    instances: usize,
    draws: usize,
    seed: u64,
) -> Vec<Lemma2Instance> {
    let mut rng = stream(seed, Stream::Layout);
    let mut out = Vec::with_capacity(instances);
    while out.len() < instances {
        let cov = random_spd(&mut rng, 1e-4, 0.05);
        let est = Estimate { mean: Vec2::zeros(), cov, velocity: Vec2::zeros() };
        let phi = Mat2::identity() * rng.random_range(1e-4..0.01);
        let dist = rng.random_range(0.5..3.0);
        let bearing = rng.random_range(0.0..std::f64::consts::TAU);
        let obstacle =
            DetectedObstacle { position: Vec2::new(dist * bearing.cos(), dist * bearing.sin()), cov: phi, source: 0 };
        let prev = Command::new(rng.random_range(0.0..task.v_max), rng.random_range(0.0..std::f64::consts::TAU));
        let cands = evaluate_candidates(&est, &[obstacle], &prev, task, params);
        let tightest = cands
            .iter()
            .filter(|c| c.feasible && c.b_star.is_some())
            .min_by(|a, b| (a.d_min / a.threshold).total_cmp(&(b.d_min / b.threshold)));
        let Some(c) = tightest else { continue };
        let b = c.b_star.expect("filtered");
        let p_b = est.mean + c.cmd.velocity() * (b as f64 * task.slot_s);
        let gamma_b = cov + Mat2::identity() * (b as f64 * task.process_noise_var);
        let l_uav = gamma_b.cholesky().expect("positive definite").l();
        let l_obs = phi.cholesky().expect("positive definite").l();
        let mut clear = 0usize;
        for _ in 0..draws {
            let p = sample(&mut rng, &p_b, &l_uav);
            let q = sample(&mut rng, &obstacle.position, &l_obs);
            if (p - q).norm() > task.d_safe {
                clear += 1;
            }
        }
        out.push(Lemma2Instance { d_min: c.d_min, threshold: c.threshold, clear_rate: clear as f64 / draws as f64 });
    }
    out
}
