//! Browser bindings: one simulated flight, a synthesized beam pattern and
//! the Mahalanobis collision gate for a single obstacle. Every export
//! returns a JSON string so the page needs no glue beyond `JSON.parse`.

use std::str::FromStr;

use gosc::channel::Radio;
use gosc::harness::{run_episode, Policy, SimConfig};
use gosc::planner::{collision_threshold, mahalanobis};
use gosc::rng::{stream, Stream};
use gosc::scheduler::{PolicyKind, Weights};
use gosc::world::{spawn_obstacles, step_obstacles};
use gosc::{Mat2, Vec2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Flight {
    outcome: &'static str,
    slots: usize,
    signals: usize,
    tx_slots: usize,
    path_length: f64,
    min_obstacle_dist: f64,
    start: [f64; 2],
    destination: [f64; 2],
    d_safe: f64,
    /// Per slot: true x, true y, belief x, belief y, action.
    uav: Vec<[f64; 5]>,
    /// Per obstacle, its position at every logged slot (subsampled).
    obstacles: Vec<Vec<[f64; 2]>>,
    stride: usize,
}

#[derive(Serialize)]
struct Pattern {
    grid_deg: Vec<f64>,
    gain: Vec<f64>,
    desired: Vec<f64>,
    window_deg: [f64; 2],
}

#[derive(Serialize)]
struct Gate {
    ellipse: Vec<[f64; 2]>,
    distance: f64,
    threshold: f64,
    admitted: bool,
    clear_rate: f64,
    d_safe: f64,
}

fn err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, JsError> {
    serde_json::to_string(v).map_err(err)
}

/// Runs one episode with the default configuration. `weights` is the text
/// of a trained weights file and is only read for the learned policy.
#[wasm_bindgen]
pub fn simulate(seed: u64, policy: &str, weights: Option<String>) -> Result<String, JsError> {
    let cfg = SimConfig::default();
    let radio = Radio::new(&cfg.radio).map_err(err)?;
    let kind = PolicyKind::from_str(policy).map_err(err)?;
    let parsed = match (kind, weights) {
        (PolicyKind::Gosc, Some(text)) => Some(Weights::from_text(&text).map_err(err)?),
        (PolicyKind::Gosc, None) => return Err(JsError::new("the learned policy needs a weights file")),
        _ => None,
    };
    let policy = match &parsed {
        Some(w) => Policy::Learned { net: &w.net, norm: w.norm, epsilon: 1.0 },
        None => Policy::Baseline(kind),
    };
    let result = run_episode(&cfg, &radio, &policy, seed, true).map_err(err)?;
    let rows = result.trajectory.as_deref().unwrap_or(&[]);

    let stride = (rows.len() / 400).max(1);
    let mut obs = spawn_obstacles(&cfg.task, &mut stream(seed, Stream::Layout));
    let mut tracks: Vec<Vec<[f64; 2]>> = obs.iter().map(|o| vec![[o.position.x, o.position.y]]).collect();
    for k in 1..=rows.len() {
        obs = step_obstacles(&obs, cfg.task.slot_s, cfg.task.obstacle_box);
        if k % stride == 0 || k == rows.len() {
            for (t, o) in tracks.iter_mut().zip(&obs) {
                t.push([o.position.x, o.position.y]);
            }
        }
    }

    to_json(&Flight {
        outcome: result.outcome.name(),
        slots: result.slots,
        signals: result.signals(),
        tx_slots: result.n_tx_slots,
        path_length: result.path_length,
        min_obstacle_dist: result.min_obstacle_dist,
        start: cfg.task.start,
        destination: cfg.task.destination,
        d_safe: cfg.task.d_safe,
        uav: rows.iter().map(|r| [r.x, r.y, r.est_x, r.est_y, r.action.index() as f64]).collect(),
        obstacles: tracks,
        stride,
    })
}

/// Beam fitted to an angular window `theta ± B·sigma` (degrees, array
/// frame).
#[wasm_bindgen]
pub fn beam_pattern(theta_deg: f64, sigma_deg: f64) -> Result<String, JsError> {
    let cfg = SimConfig::default();
    let radio = Radio::new(&cfg.radio).map_err(err)?;
    let beam = radio.synthesize_beamformer(theta_deg.to_radians(), sigma_deg.to_radians()).map_err(err)?;
    to_json(&Pattern {
        grid_deg: radio.grid().iter().map(|g| g.to_degrees()).collect(),
        gain: radio.beam_pattern(&beam),
        desired: radio.desired_pattern(&beam),
        window_deg: [beam.window.0.to_degrees(), beam.window.1.to_degrees()],
    })
}

/// Collision gate for a UAV at the origin with isotropic-plus-skew
/// covariance (`var_x`, `var_y`, correlation `rho`) and one obstacle at
/// `(ox, oy)` with per-axis variance `obstacle_var`. The clearance rate is
/// estimated from `draws` paired samples.
#[wasm_bindgen]
pub fn collision_gate(
    var_x: f64,
    var_y: f64,
    rho: f64,
    obstacle_var: f64,
    ox: f64,
    oy: f64,
    draws: u32,
) -> Result<String, JsError> {
    let cfg = SimConfig::default();
    let cxy = rho.clamp(-0.99, 0.99) * (var_x * var_y).sqrt();
    let uav_cov = Mat2::new(var_x, cxy, cxy, var_y);
    let obs_cov = Mat2::identity() * obstacle_var;
    let sigma = uav_cov + obs_cov;
    let obstacle = Vec2::new(ox, oy);
    let distance = mahalanobis(&Vec2::zeros(), &obstacle, &sigma).map_err(err)?;
    let chi2 = cfg.planner.chi2_threshold();
    let threshold = collision_threshold(&sigma, cfg.task.d_safe, chi2).map_err(err)?;

    let l = sigma.cholesky().ok_or_else(|| JsError::new("covariance is not positive definite"))?.l();
    let ellipse = (0..=96)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / 96.0;
            let p = l * Vec2::new(t.cos(), t.sin()) * chi2.sqrt();
            [p.x, p.y]
        })
        .collect();

    let lu = uav_cov.cholesky().map(|c| c.l()).unwrap_or_else(Mat2::zeros);
    let lo = obstacle_var.max(0.0).sqrt();
    let mut rng = stream(0, Stream::Measurement);
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let mut clear = 0u32;
    for _ in 0..draws {
        let p = lu * Vec2::new(normal(), normal());
        let q = obstacle + Vec2::new(normal(), normal()) * lo;
        if (p - q).norm() > cfg.task.d_safe {
            clear += 1;
        }
    }
    to_json(&Gate {
        ellipse,
        distance,
        threshold,
        admitted: distance >= threshold,
        clear_rate: if draws == 0 { f64::NAN } else { clear as f64 / draws as f64 },
        d_safe: cfg.task.d_safe,
    })
}
