use serde::{Deserialize, Serialize};

use super::episode::{run_episode, EpisodeResult, Outcome, Policy};
use super::SimConfig;
use crate::channel::Radio;
use crate::error::{Error, Result};
use crate::scheduler::{PolicyKind, Weights};

/// Per-policy summary. Means other than `success_rate` are over
/// successful episodes only (NaN when there are none).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub policy: PolicyKind,
    pub episodes: usize,
    pub success_rate: f64,
    pub collisions: usize,
    pub timeouts: usize,
    pub link_failures: usize,
    pub mean_signals: f64,
    pub mean_tx_slots: f64,
    pub mean_slots: f64,
    pub mean_path_length: f64,
    pub mean_min_obstacle_dist: f64,
}

pub fn aggregate(policy: PolicyKind, results: &[EpisodeResult]) -> AggregateMetrics {
    let ok: Vec<&EpisodeResult> = results.iter().filter(|r| r.outcome == Outcome::Success).collect();
    let mean = |f: &dyn Fn(&EpisodeResult) -> f64| {
        if ok.is_empty() {
            f64::NAN
        } else {
            ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
        }
    };
    let count = |o: Outcome| results.iter().filter(|r| r.outcome == o).count();
    AggregateMetrics {
        policy,
        episodes: results.len(),
        success_rate: if results.is_empty() { 0.0 } else { ok.len() as f64 / results.len() as f64 },
        collisions: count(Outcome::Collision),
        timeouts: count(Outcome::Timeout),
        link_failures: count(Outcome::LinkFailure),
        mean_signals: mean(&|r| r.signals() as f64),
        mean_tx_slots: mean(&|r| r.n_tx_slots as f64),
        mean_slots: mean(&|r| r.slots as f64),
        mean_path_length: mean(&|r| r.path_length),
        mean_min_obstacle_dist: mean(&|r| r.min_obstacle_dist),
    }
}

/// Table row with reductions relative to the every-slot baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub metrics: AggregateMetrics,
    /// 1 − signals / trad signals (NaN without a trad row).
    pub signal_reduction: f64,
    pub tx_slot_reduction: f64,
}

pub fn comparison_rows(metrics: &[AggregateMetrics]) -> Vec<ComparisonRow> {
    let trad = metrics.iter().find(|m| m.policy == PolicyKind::Trad);
    metrics
        .iter()
        .map(|m| {
            let (signal_reduction, tx_slot_reduction) = match trad {
                Some(t) => (1.0 - m.mean_signals / t.mean_signals, 1.0 - m.mean_tx_slots / t.mean_tx_slots),
                None => (f64::NAN, f64::NAN),
            };
            ComparisonRow { metrics: m.clone(), signal_reduction, tx_slot_reduction }
        })
        .collect()
}

/// Runs `policy` on every seed, fanning episodes out over `threads`
/// workers (0 = all cores). Results come back in seed order.
pub fn run_batch(
    cfg: &SimConfig,
    radio: &Radio,
    policy: &Policy<'_>,
    seeds: &[u64],
    threads: usize,
) -> Result<Vec<EpisodeResult>> {
    let workers = if threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        threads
    }
    .clamp(1, seeds.len().max(1));
    let mut slots: Vec<Option<Result<EpisodeResult>>> = (0..seeds.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunks: Vec<_> = slots.chunks_mut(seeds.len().div_ceil(workers).max(1)).collect();
        let mut start = 0;
        for chunk in chunks {
            let base = start;
            start += chunk.len();
            scope.spawn(move || {
                for (k, out) in chunk.iter_mut().enumerate() {
                    *out = Some(run_episode(cfg, radio, policy, seeds[base + k], false));
                }
            });
        }
    });
    slots.into_iter().map(|r| r.expect("every seed ran")).collect()
}

/// Runs every policy on the shared seed list. `weights` is required when
/// the learned policy is listed.
pub fn evaluate(
    cfg: &SimConfig,
    policies: &[PolicyKind],
    weights: Option<&Weights>,
    seeds: &[u64],
) -> Result<(Vec<ComparisonRow>, Vec<EpisodeResult>)> {
    cfg.validate()?;
    let radio = Radio::new(&cfg.radio)?;
    let mut metrics = Vec::new();
    let mut episodes = Vec::new();
    for &kind in policies {
        let policy = match kind {
            PolicyKind::Gosc => {
                let w = weights.ok_or(Error::MissingWeights)?;
                Policy::Learned { net: &w.net, norm: w.norm, epsilon: 1.0 }
            }
            other => Policy::Baseline(other),
        };
        let results = run_batch(cfg, &radio, &policy, seeds, cfg.run.threads)?;
        metrics.push(aggregate(kind, &results));
        episodes.extend(results);
    }
    Ok((comparison_rows(&metrics), episodes))
}
