//! Discrete-time simulator of an ISAC base station that tracks a UAV,
//! plans its commands under Gaussian uncertainty and schedules sensing and
//! command-and-control (C&C) transmissions.
//!
//! Module map:
//! - [`channel`]: beamforming, sensing SNR, detection variances, Rician link.
//! - [`world`]: ground truth kinematics, obstacle detection, termination.
//! - [`estimator`]: Kalman filter over the UAV position.
//! - [`planner`]: Mahalanobis dynamic window (MD-DWA) and the inflation baseline.
//! - [`scheduler`]: transmission policies, Q-network, replay and rewards.
//! - [`harness`]: configuration, episode runner, training and evaluation.

pub mod channel;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod planner;
pub mod rng;
pub mod scheduler;
pub mod stats;
pub mod world;

pub use error::{Error, Result};

/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Mat2 = nalgebra::Matrix2<f64>;
