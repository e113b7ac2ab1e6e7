use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use gosc::channel::Radio;
use gosc::harness::{
    episodes_jsonl, evaluate, load_config, metrics_csv, run_episode, train_gosc, trajectory_csv, validate_lemma2,
    write_text, ComparisonRow, Policy, SimConfig,
};
use gosc::scheduler::{read_weights, write_weights, PolicyKind};

#[derive(Parser)]
#[command(name = "gosc", version, about = "ISAC base-station simulator for UAV obstacle avoidance")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML config; absent keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: run.out_dir from the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train the learned scheduler and write its weights.
    Train {
        #[command(flatten)]
        common: Common,
        /// Master seed for initialization, exploration and replay sampling.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override train.episodes.
        #[arg(long)]
        episodes: Option<usize>,
        /// Weights file to write (default: <out>/weights.txt).
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Evaluate policies on a shared seed list.
    Eval {
        #[command(flatten)]
        common: Common,
        /// First seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of seeds.
        #[arg(long)]
        seeds: Option<usize>,
        /// Comma-separated policies or `all`.
        #[arg(long, default_value = "all")]
        policy: String,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Run one episode and dump its per-slot trajectory.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Policy (default: run.policy from the config).
        #[arg(long)]
        policy: Option<String>,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Monte-Carlo check of the Mahalanobis collision bound.
    ValidateLemma2 {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random scenes.
        #[arg(long, default_value_t = 50)]
        seeds: usize,
        /// Paired draws per scene.
        #[arg(long, default_value_t = 100_000)]
        draws: usize,
    },
}

type CliResult<T> = Result<T, String>;

fn config(common: &Common) -> CliResult<SimConfig> {
    match &common.config {
        Some(p) => load_config(p).map_err(|e| e.to_string()),
        None => Ok(SimConfig::default()),
    }
}

fn out_dir(common: &Common, cfg: &SimConfig) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.run.out_dir))
}

fn parse_policies(s: &str) -> CliResult<Vec<PolicyKind>> {
    if s == "all" {
        return Ok(PolicyKind::ALL.to_vec());
    }
    s.split(',').map(|p| PolicyKind::from_str(p.trim()).map_err(|e| e.to_string())).collect()
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    write_text(path, text).map_err(|e| e.to_string())
}

fn print_table(rows: &[ComparisonRow]) {
    println!(
        "{:<9} {:>8} {:>9} {:>10} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "policy", "success", "signals", "tx_slots", "slots", "path_m", "min_d_m", "sig_red", "tx_red"
    );
    for r in rows {
        let m = &r.metrics;
        println!(
            "{:<9} {:>8.3} {:>9.1} {:>10.1} {:>9.1} {:>9.2} {:>9.3} {:>9.3} {:>9.3}",
            m.policy.name(),
            m.success_rate,
            m.mean_signals,
            m.mean_tx_slots,
            m.mean_slots,
            m.mean_path_length,
            m.mean_min_obstacle_dist,
            r.signal_reduction,
            r.tx_slot_reduction
        );
    }
}

fn train(common: Common, seed: u64, episodes: Option<usize>, weights: Option<PathBuf>) -> CliResult<()> {
    let mut cfg = config(&common)?;
    if let Some(n) = episodes {
        cfg.train.episodes = n;
    }
    let out = out_dir(&common, &cfg);
    let total = cfg.train.episodes;
    let report = train_gosc(&cfg, seed, |e| {
        if (e.episode + 1) % 10 == 0 || e.episode + 1 == total {
            eprintln!(
                "episode {:>5}/{total} {:<12} slots {:>5} signals {:>5} reward {:>10.2} loss {:.4}",
                e.episode + 1,
                e.outcome.name(),
                e.slots,
                e.signals,
                e.reward,
                e.mean_loss
            );
        }
    })
    .map_err(|e| e.to_string())?;
    let path = weights.unwrap_or_else(|| out.join("weights.txt"));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    write_weights(&path, &report.weights).map_err(|e| e.to_string())?;
    let log: String =
        report.log.iter().map(|e| serde_json::to_string(e).expect("log serializes") + "\n").collect();
    write(&out.join("training.jsonl"), &log)?;
    println!("warm-up episodes: {}", report.warmup_episodes);
    println!("weights: {}", path.display());
    Ok(())
}

fn eval(common: Common, seed: Option<u64>, seeds: Option<usize>, policy: String, weights: Option<PathBuf>) -> CliResult<()> {
    let mut cfg = config(&common)?;
    if let Some(s) = seed {
        cfg.run.seed = s;
    }
    if let Some(n) = seeds {
        cfg.run.seeds = n;
    }
    let policies = parse_policies(&policy)?;
    let w = match &weights {
        Some(p) => Some(read_weights(p).map_err(|e| e.to_string())?),
        None => None,
    };
    let (rows, episodes) = evaluate(&cfg, &policies, w.as_ref(), &cfg.run.seed_list()).map_err(|e| e.to_string())?;
    let out = out_dir(&common, &cfg);
    write(&out.join("metrics.csv"), &metrics_csv(&rows))?;
    write(&out.join("episodes.jsonl"), &episodes_jsonl(&episodes))?;
    print_table(&rows);
    Ok(())
}

fn run(common: Common, seed: u64, policy: Option<String>, weights: Option<PathBuf>) -> CliResult<()> {
    let cfg = config(&common)?;
    let kind = match policy {
        Some(p) => PolicyKind::from_str(&p).map_err(|e| e.to_string())?,
        None => cfg.run.policy,
    };
    let radio = Radio::new(&cfg.radio).map_err(|e| e.to_string())?;
    let w = match (&weights, kind) {
        (Some(p), _) => Some(read_weights(p).map_err(|e| e.to_string())?),
        (None, PolicyKind::Gosc) => return Err(gosc::Error::MissingWeights.to_string()),
        (None, _) => None,
    };
    let policy = match (&w, kind) {
        (Some(w), PolicyKind::Gosc) => Policy::Learned { net: &w.net, norm: w.norm, epsilon: 1.0 },
        (_, other) => Policy::Baseline(other),
    };
    let result = run_episode(&cfg, &radio, &policy, seed, true).map_err(|e| e.to_string())?;
    let out = out_dir(&common, &cfg);
    write(&out.join("trajectory.csv"), &trajectory_csv(result.trajectory.as_deref().unwrap_or(&[])))?;
    write(&out.join("episodes.jsonl"), &episodes_jsonl(std::slice::from_ref(&result)))?;
    println!(
        "{} seed {}: {} after {} slots, {} signals ({} sensing, {} C&C), {} transmission slots, path {:.2} m, min obstacle distance {:.3} m",
        kind.name(),
        seed,
        result.outcome.name(),
        result.slots,
        result.signals(),
        result.n_sense,
        result.n_cc,
        result.n_tx_slots,
        result.path_length,
        result.min_obstacle_dist
    );
    Ok(())
}

fn lemma2(common: Common, seed: u64, instances: usize, draws: usize) -> CliResult<bool> {
    let cfg = config(&common)?;
    let results = validate_lemma2(&cfg.task, &cfg.planner, instances, draws, seed);
    let mut csv = String::from("instance,d_min,threshold,clear_rate\n");
    for (i, r) in results.iter().enumerate() {
        csv.push_str(&format!("{i},{},{},{}\n", r.d_min, r.threshold, r.clear_rate));
    }
    write(&out_dir(&common, &cfg).join("lemma2.csv"), &csv)?;
    let worst = results.iter().map(|r| r.clear_rate).fold(1.0, f64::min);
    let target = cfg.planner.confidence;
    let ok = worst >= target;
    println!(
        "{} scenes x {} draws: worst clearance rate {:.5} (target {target}) {}",
        results.len(),
        draws,
        worst,
        if ok { "PASS" } else { "FAIL" }
    );
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Cmd::Train { common, seed, episodes, weights } => train(common, seed, episodes, weights).map(|_| true),
        Cmd::Eval { common, seed, seeds, policy, weights } => eval(common, seed, seeds, policy, weights).map(|_| true),
        Cmd::Run { common, seed, policy, weights } => run(common, seed, policy, weights).map(|_| true),
        Cmd::ValidateLemma2 { common, seed, seeds, draws } => lemma2(common, seed, seeds, draws),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
