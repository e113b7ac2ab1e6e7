use std::fmt::Write as _;
use std::path::Path;

use super::episode::{EpisodeResult, TrajectoryRow};
use super::eval::ComparisonRow;
use crate::error::{Error, Result};

pub const TRAJECTORY_HEADER: &str =
    "slot,x,y,est_x,est_y,det_cov,action,sensed,delivered,speed,heading,dist_dst,dist_obs";

pub fn trajectory_csv(rows: &[TrajectoryRow]) -> String {
    let mut s = String::from(TRAJECTORY_HEADER);
    s.push('\n');
    for r in rows {
        writeln!(
            s,
            "{},{:?},{:?},{:?},{:?},{:?},{},{},{},{:?},{:?},{:?},{:?}",
            r.slot,
            r.x,
            r.y,
            r.est_x,
            r.est_y,
            r.det_cov,
            r.action.index(),
            u8::from(r.sensed),
            u8::from(r.delivered),
            r.speed,
            r.heading,
            r.dist_dst,
            r.dist_obs
        )
        .unwrap();
    }
    s
}

pub fn metrics_csv(rows: &[ComparisonRow]) -> String {
    let mut s = String::from(
        "policy,episodes,success_rate,collisions,timeouts,link_failures,mean_signals,mean_tx_slots,mean_slots,\
         mean_path_length,mean_min_obstacle_dist,signal_reduction,tx_slot_reduction\n",
    );
    for r in rows {
        let m = &r.metrics;
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            m.policy,
            m.episodes,
            m.success_rate,
            m.collisions,
            m.timeouts,
            m.link_failures,
            m.mean_signals,
            m.mean_tx_slots,
            m.mean_slots,
            m.mean_path_length,
            m.mean_min_obstacle_dist,
            r.signal_reduction,
            r.tx_slot_reduction
        )
        .unwrap();
    }
    s
}

/// One JSON object per line; non-finite numbers become `null`.
pub fn episodes_jsonl(episodes: &[EpisodeResult]) -> String {
    let mut s = String::new();
    for e in episodes {
        s.push_str(&serde_json::to_string(e).expect("episode serializes"));
        s.push('\n');
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        }
    }
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
