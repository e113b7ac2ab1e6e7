use serde::{Deserialize, Serialize};

use super::episode::{Episode, Outcome};
use super::SimConfig;
use crate::channel::Radio;
use crate::error::Result;
use crate::rng::{stream, Stream};
use crate::scheduler::{
    act, compute_reward, sync_target, train_step, Experience, Normalization, Optimizer, QNetwork, ReplayBuffer,
    Weights,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: usize,
    pub seed: u64,
    pub outcome: Outcome,
    pub slots: usize,
    pub signals: usize,
    pub reward: f64,
    pub mean_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainingReport {
    pub weights: Weights,
    pub log: Vec<EpisodeLog>,
    /// Episodes spent filling the replay memory before learning.
    pub warmup_episodes: usize,
}

struct Learner {
    net: QNetwork,
    target: QNetwork,
    opt: Optimizer,
    buffer: ReplayBuffer,
    counter: usize,
}

/// Runs one episode with ε-greedy actions, storing every transition and,
/// when `learn` is set, taking one gradient step per slot.
fn play(
    cfg: &SimConfig,
    radio: &Radio,
    seed: u64,
    norm: &Normalization,
    l: &mut Learner,
    explore: &mut rand_chacha::ChaCha8Rng,
    replay: &mut rand_chacha::ChaCha8Rng,
    learn: bool,
) -> Result<(super::EpisodeResult, f64)> {
    let mut ep = Episode::new(cfg, radio, seed, false, false);
    ep.counterfactual = true;
    let mut loss_sum = 0.0;
    let mut steps = 0usize;
    let mut state = ep.features(norm);
    while ep.finished().is_none() {
        let action = act(&l.net, &state, cfg.train.epsilon, explore);
        let info = ep.step(action)?;
        let r = compute_reward(&info.record, &cfg.reward, cfg.train.collision_penalty);
        ep.add_reward(r);
        let next = ep.features(norm);
        l.buffer.push(Experience { state, action, reward: r, next, terminal: info.finished.is_some() });
        state = next;
        if learn {
            loss_sum += train_step(&mut l.net, &l.target, &l.buffer, &cfg.train, &mut l.opt, replay)?;
            steps += 1;
            sync_target(&l.net, &mut l.target, l.counter, cfg.train.target_update);
            l.counter += 1;
        }
    }
    let mean_loss = if steps > 0 { loss_sum / steps as f64 } else { 0.0 };
    Ok((ep.into_result(crate::scheduler::PolicyKind::Gosc), mean_loss))
}

/// Trains the learned scheduler: fills the replay memory with ε-greedy
/// episodes, then runs `cfg.train.episodes` learning episodes.
/// `on_episode` sees every learning episode as it finishes.
pub fn train_gosc(
    cfg: &SimConfig,
    master_seed: u64,
    mut on_episode: impl FnMut(&EpisodeLog),
) -> Result<TrainingReport> {
    cfg.validate()?;
    let radio = Radio::new(&cfg.radio)?;
    let norm = Normalization::for_task(&cfg.task);
    let sizes = cfg.train.layer_sizes();
    let net = QNetwork::random(&sizes, &mut stream(master_seed, Stream::Init));
    let mut l = Learner {
        target: net.clone(),
        opt: Optimizer::new(cfg.train.optimizer, cfg.train.learning_rate, net.param_count()),
        net,
        buffer: ReplayBuffer::new(cfg.train.buffer_capacity),
        counter: 0,
    };
    let mut explore = stream(master_seed, Stream::Exploration);
    let mut replay = stream(master_seed, Stream::Replay);
    let mut next_seed = cfg.run.train_seed_offset;

    let mut warmup_episodes = 0;
    if cfg.train.episodes > 0 {
        while !l.buffer.is_full() {
            play(cfg, &radio, next_seed, &norm, &mut l, &mut explore, &mut replay, false)?;
            next_seed += 1;
            warmup_episodes += 1;
        }
    }

    let mut log = Vec::with_capacity(cfg.train.episodes);
    for episode in 0..cfg.train.episodes {
        let seed = next_seed;
        next_seed += 1;
        let (res, mean_loss) = play(cfg, &radio, seed, &norm, &mut l, &mut explore, &mut replay, true)?;
        let entry = EpisodeLog {
            episode,
            seed,
            outcome: res.outcome,
            slots: res.slots,
            signals: res.signals(),
            reward: res.total_reward,
            mean_loss,
        };
        on_episode(&entry);
        log.push(entry);
    }
    Ok(TrainingReport { weights: Weights { net: l.net, norm }, log, warmup_episodes })
}
