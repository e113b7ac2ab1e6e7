//! Kalman filter over the UAV's horizontal position.
//!
//! Prediction moves the mean by the last commanded velocity over one slot
//! and inflates the covariance by the process noise; a sensing measurement
//! is fused with gain `G = Γ̊ᵀ(Γ̊ + Γ̂)⁻¹`.

use crate::channel::Measurement;
use crate::error::{Error, Result};
use crate::stats::symmetrize;
use crate::world::Command;
use crate::{Mat2, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: Vec2,
    pub cov: Mat2,
    /// Velocity of the last command known to be delivered.
    pub velocity: Vec2,
}

impl Estimate {
    /// Exact initial knowledge: zero covariance, at rest.
    pub fn known(position: Vec2) -> Self {
        Self { mean: position, cov: Mat2::zeros(), velocity: Vec2::zeros() }
    }

    pub fn predict(&self, dt: f64, process_var: f64) -> Self {
        Self {
            mean: self.mean + self.velocity * dt,
            cov: symmetrize(&(self.cov + Mat2::identity() * process_var)),
            velocity: self.velocity,
        }
    }

    pub fn fuse(&self, m: &Measurement) -> Result<Self> {
        let innovation_cov = self.cov + m.cov;
        let det = innovation_cov.determinant();
        let scale = innovation_cov.abs().max().max(f64::MIN_POSITIVE);
        if !(det.abs() > 1e-300 && det.abs() / (scale * scale) > 1e-15) {
            return Err(Error::SingularInnovation);
        }
        let inv = innovation_cov.try_inverse().ok_or(Error::SingularInnovation)?;
        let gain = self.cov.transpose() * inv;
        let mean = self.mean + gain * (m.position - self.mean);
        let cov = symmetrize(&((Mat2::identity() - gain) * self.cov));
        Ok(Self { mean, cov, velocity: self.velocity })
    }

    pub fn commit(&mut self, cmd: &Command) {
        self.velocity = cmd.velocity();
    }
}

/// ½·ln det(cov), the Gaussian entropy without its additive constant.
/// Returns −∞ when the determinant is not positive.
pub fn entropy(cov: &Mat2) -> f64 {
    let det = cov.determinant();
    if det > 0.0 {
        0.5 * det.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Full differential entropy of a 2-D Gaussian, ln(2πe) + ½·ln det(cov).
pub fn differential_entropy(cov: &Mat2) -> f64 {
    (2.0 * std::f64::consts::PI * std::f64::consts::E).ln() + entropy(cov)
}
