//! Closed-form channel models: ULA steering, least-squares beam synthesis,
//! sensing SNR and detection variances, polar-to-Cartesian error conversion
//! and the Rician C&C link.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Mat2, Vec2, SPEED_OF_LIGHT};

/// Radio parameters as written in a config file (dB units allowed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    /// ULA element count K.
    pub antennas: usize,
    /// OFDM subcarrier count M.
    pub subcarriers: usize,
    pub subcarrier_spacing_hz: f64,
    pub carrier_hz: f64,
    pub tx_power_dbm: f64,
    pub noise_psd_dbm_hz: f64,
    pub rcs_m2: f64,
    pub rician_k_db: f64,
    /// Repetitions L of the C&C symbols across subcarriers.
    pub cc_repetitions: usize,
    /// C&C symbols per command (1 kbit payload, 2 bits per QPSK symbol).
    pub cc_symbols: usize,
    /// Beam synthesis grid size over [-pi/2, pi/2].
    pub beam_grid: usize,
    /// Confidence factor B of the beam window.
    pub confidence_factor: f64,
    pub altitude_m: f64,
    pub bs_position: [f64; 2],
    /// Azimuth of the array broadside (rad).
    pub boresight_rad: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            antennas: 128,
            subcarriers: 2500,
            subcarrier_spacing_hz: 120e3,
            carrier_hz: 60e9,
            tx_power_dbm: 20.0,
            noise_psd_dbm_hz: -174.0,
            rcs_m2: 0.1,
            rician_k_db: 8.0,
            cc_repetitions: 50,
            cc_symbols: 500,
            beam_grid: 500,
            confidence_factor: 2.576,
            altitude_m: 10.0,
            bs_position: [0.0, 0.0],
            boresight_rad: FRAC_PI_4,
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Validation {
                    key: format!("radio.{key}"),
                    reason: format!("must be positive and finite, got {v}"),
                })
            }
        };
        let nonzero = |key: &str, v: usize| {
            if v >= 1 {
                Ok(())
            } else {
                Err(Error::Validation { key: format!("radio.{key}"), reason: "must be at least 1".into() })
            }
        };
        nonzero("antennas", self.antennas)?;
        nonzero("subcarriers", self.subcarriers)?;
        nonzero("cc_repetitions", self.cc_repetitions)?;
        nonzero("cc_symbols", self.cc_symbols)?;
        if self.beam_grid < 2 {
            return Err(Error::Validation { key: "radio.beam_grid".into(), reason: "must be at least 2".into() });
        }
        positive("subcarrier_spacing_hz", self.subcarrier_spacing_hz)?;
        positive("carrier_hz", self.carrier_hz)?;
        positive("rcs_m2", self.rcs_m2)?;
        positive("altitude_m", self.altitude_m)?;
        for (key, v) in [
            ("tx_power_dbm", self.tx_power_dbm),
            ("noise_psd_dbm_hz", self.noise_psd_dbm_hz),
            ("confidence_factor", self.confidence_factor),
            ("boresight_rad", self.boresight_rad),
        ] {
            if !v.is_finite() {
                return Err(Error::Validation { key: format!("radio.{key}"), reason: "must be finite".into() });
            }
        }
        if self.confidence_factor < 0.0 {
            return Err(Error::Validation {
                key: "radio.confidence_factor".into(),
                reason: "must be non-negative".into(),
            });
        }
        // +inf dB is the pure line-of-sight limit
        if self.rician_k_db.is_nan() {
            return Err(Error::Validation { key: "radio.rician_k_db".into(), reason: "must not be NaN".into() });
        }
        Ok(())
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Horizontal and slant geometry of a point relative to the base station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub horizontal_range: f64,
    pub slant_range: f64,
    pub azimuth: f64,
    /// Angle seen by the array, folded into [-pi/2, pi/2].
    pub array_angle: f64,
}

/// A synthesized transmit beamformer and the window it was designed for.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    pub weights: DVector<Complex64>,
    pub window: (f64, f64),
    /// Grid indices where the desired pattern equals K.
    pub support: Vec<usize>,
}

impl Beamformer {
    pub fn zero(antennas: usize) -> Self {
        Self { weights: DVector::zeros(antennas), window: (0.0, 0.0), support: Vec::new() }
    }

    /// Array response a(θ)ᵀf.
    pub fn gain(&self, radio: &Radio, array_angle: f64) -> Complex64 {
        let a = radio.steering_vector(array_angle);
        a.iter().zip(self.weights.iter()).map(|(x, y)| x * y).sum()
    }
}

/// A sensed range/angle pair and its Cartesian conversion.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    /// Detected horizontal range (m).
    pub range: f64,
    /// Detected azimuth (rad).
    pub angle: f64,
    pub range_var: f64,
    pub angle_var: f64,
    pub position: Vec2,
    pub cov: Mat2,
}

/// Outcome of one C&C transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommLink {
    pub snr: f64,
    /// Decoding latency (s); infinite when the link has no gain.
    pub latency: f64,
}

/// Radio model in SI units with the beam synthesis system prepared.
#[derive(Debug, Clone)]
pub struct Radio {
    pub antennas: usize,
    pub subcarriers: usize,
    pub subcarrier_spacing: f64,
    pub wavelength: f64,
    pub element_spacing: f64,
    pub tx_power: f64,
    pub noise_psd: f64,
    pub rcs: f64,
    pub rician_k: f64,
    pub cc_repetitions: usize,
    pub cc_symbols: usize,
    pub confidence_factor: f64,
    pub altitude: f64,
    pub bs_position: Vec2,
    pub boresight: f64,
    grid: Vec<f64>,
    /// Column u holds conj(a(grid[u])).
    steering_conj: DMatrix<Complex64>,
    gram: Cholesky<Complex64, Dyn>,
}

impl Radio {
    pub fn new(cfg: &RadioConfig) -> Result<Self> {
        cfg.validate()?;
        let wavelength = SPEED_OF_LIGHT / cfg.carrier_hz;
        let k = cfg.antennas;
        let n = cfg.beam_grid;
        let element_spacing = wavelength / 2.0;
        let grid: Vec<f64> = (0..n).map(|u| -FRAC_PI_2 + PI * u as f64 / (n - 1) as f64).collect();
        let mut steering_conj = DMatrix::<Complex64>::zeros(k, n);
        for (u, &theta) in grid.iter().enumerate() {
            let a = steering(theta, k, element_spacing, wavelength);
            for i in 0..k {
                steering_conj[(i, u)] = a[i].conj();
            }
        }
        // Normal matrix Σ_u conj(a_u) a_uᵀ, ridge-regularized.
        let mut normal = &steering_conj * steering_conj.adjoint();
        let trace: f64 = (0..k).map(|i| normal[(i, i)].re).sum();
        let ridge = 1e-9 * trace;
        for i in 0..k {
            normal[(i, i)] += Complex64::new(ridge, 0.0);
        }
        let gram = Cholesky::new(normal)
            .ok_or_else(|| Error::DegenerateSystem("normal matrix is not positive definite".into()))?;
        Ok(Self {
            antennas: k,
            subcarriers: cfg.subcarriers,
            subcarrier_spacing: cfg.subcarrier_spacing_hz,
            wavelength,
            element_spacing,
            tx_power: dbm_to_watts(cfg.tx_power_dbm),
            noise_psd: dbm_to_watts(cfg.noise_psd_dbm_hz),
            rcs: cfg.rcs_m2,
            rician_k: db_to_linear(cfg.rician_k_db),
            cc_repetitions: cfg.cc_repetitions,
            cc_symbols: cfg.cc_symbols,
            confidence_factor: cfg.confidence_factor,
            altitude: cfg.altitude_m,
            bs_position: Vec2::new(cfg.bs_position[0], cfg.bs_position[1]),
            boresight: cfg.boresight_rad,
            grid,
            steering_conj,
            gram,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Total noise power M·Δf·σ0² (W).
    pub fn noise_power(&self) -> f64 {
        self.subcarriers as f64 * self.subcarrier_spacing * self.noise_psd
    }

    pub fn steering_vector(&self, theta: f64) -> DVector<Complex64> {
        steering(theta, self.antennas, self.element_spacing, self.wavelength)
    }

    pub fn geometry(&self, position: &Vec2) -> Geometry {
        let rel = position - self.bs_position;
        let horizontal_range = rel.norm();
        let azimuth = rel.y.atan2(rel.x);
        Geometry {
            horizontal_range,
            slant_range: (horizontal_range * horizontal_range + self.altitude * self.altitude).sqrt(),
            azimuth,
            array_angle: self.array_angle(azimuth),
        }
    }

    /// Maps an azimuth to the ULA angle in [-pi/2, pi/2]. The array only
    /// resolves sin of the angle, so directions behind the array fold onto
    /// their mirror image.
    pub fn array_angle(&self, azimuth: f64) -> f64 {
        let psi = wrap_pi(azimuth - self.boresight);
        if psi > FRAC_PI_2 {
            PI - psi
        } else if psi < -FRAC_PI_2 {
            -PI - psi
        } else {
            psi
        }
    }

    /// Least-squares beam whose pattern approximates K over
    /// `[theta_hat - B*sigma, theta_hat + B*sigma]` and zero elsewhere.
    /// Angles are array angles.
    pub fn synthesize_beamformer(&self, theta_hat: f64, sigma: f64) -> Result<Beamformer> {
        if !(sigma >= 0.0) || !theta_hat.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "beam window needs finite angle and sigma >= 0, got ({theta_hat}, {sigma})"
            )));
        }
        let half = self.confidence_factor * sigma;
        let lo = (theta_hat - half).max(-FRAC_PI_2);
        let hi = (theta_hat + half).min(FRAC_PI_2);
        let mut members: Vec<usize> = if lo <= hi {
            self.grid.iter().enumerate().filter(|(_, &g)| g >= lo && g <= hi).map(|(u, _)| u).collect()
        } else {
            Vec::new()
        };
        if members.is_empty() && (-FRAC_PI_2..=FRAC_PI_2).contains(&theta_hat) {
            members.push(self.nearest_grid_index(theta_hat));
        }
        if members.is_empty() {
            return Ok(Beamformer { weights: DVector::zeros(self.antennas), window: (lo, hi), support: members });
        }
        let scale = Complex64::new(self.antennas as f64, 0.0);
        let mut rhs = DVector::<Complex64>::zeros(self.antennas);
        for &u in &members {
            rhs += self.steering_conj.column(u) * scale;
        }
        let weights = self.gram.solve(&rhs);
        if weights.iter().any(|w| !w.re.is_finite() || !w.im.is_finite()) {
            return Err(Error::DegenerateSystem("non-finite beamforming weights".into()));
        }
        Ok(Beamformer { weights, window: (lo, hi), support: members })
    }

    /// Beam aimed at a Gaussian position belief: window centred on the
    /// belief azimuth with the angular spread of its covariance.
    pub fn beam_for_belief(&self, mean: &Vec2, cov: &Mat2) -> Result<Beamformer> {
        let geo = self.geometry(mean);
        let rho = geo.horizontal_range.max(1e-9);
        let tangent = Vec2::new(-geo.azimuth.sin(), geo.azimuth.cos());
        let angle_var = (tangent.dot(&(cov * tangent)) / (rho * rho)).max(0.0);
        self.synthesize_beamformer(geo.array_angle, angle_var.sqrt())
    }

    fn nearest_grid_index(&self, theta: f64) -> usize {
        let n = self.grid.len();
        let pos = (theta + FRAC_PI_2) / PI * (n - 1) as f64;
        (pos.round().max(0.0) as usize).min(n - 1)
    }

    /// Desired pattern b_D the beam was fitted to.
    pub fn desired_pattern(&self, beam: &Beamformer) -> Vec<f64> {
        let mut b = vec![0.0; self.grid.len()];
        for &u in &beam.support {
            b[u] = self.antennas as f64;
        }
        b
    }

    /// |a(ϑ_u)ᵀ f| over the synthesis grid.
    pub fn beam_pattern(&self, beam: &Beamformer) -> Vec<f64> {
        (0..self.grid.len())
            .map(|u| {
                let col = self.steering_conj.column(u);
                col.iter().zip(beam.weights.iter()).map(|(c, w)| c.conj() * w).sum::<Complex64>().norm()
            })
            .collect()
    }

    /// Squared residual ‖b − Aᵀf‖² against a desired pattern on the grid.
    pub fn pattern_residual(&self, desired: &[f64], beam: &Beamformer) -> f64 {
        (0..self.grid.len())
            .map(|u| {
                let col = self.steering_conj.column(u);
                let resp: Complex64 = col.iter().zip(beam.weights.iter()).map(|(c, w)| c.conj() * w).sum();
                (Complex64::new(desired[u], 0.0) - resp).norm_sqr()
            })
            .sum()
    }

    /// Sensing SNR at slant range `range` and array angle `theta`.
    pub fn sensing_snr(&self, range: f64, theta: f64, beam: &Beamformer) -> f64 {
        let xi2 = self.rcs * self.wavelength.powi(2) / ((4.0 * PI).powi(3) * range.powi(4));
        let gain = beam.gain(self, theta).norm_sqr();
        self.antennas as f64 * self.tx_power * xi2 * gain / self.noise_power()
    }

    /// Angle (rad²) and range (m²) detection variances.
    pub fn detection_variances(&self, snr: f64, theta: f64) -> Result<(f64, f64)> {
        let cos2 = theta.cos().powi(2);
        if cos2 < 1e-12 {
            return Err(Error::InvalidGeometry(format!("angle {theta} is at the array endfire")));
        }
        if !(snr > 0.0) || !snr.is_finite() {
            return Err(Error::InvalidGeometry(format!("sensing SNR must be positive, got {snr}")));
        }
        let k3 = (self.antennas as f64).powi(3);
        let angle_var = 6.0 / (snr * PI * PI * cos2 * k3);
        let resolution = SPEED_OF_LIGHT / (2.0 * self.subcarriers as f64 * self.subcarrier_spacing);
        let range_var = resolution * resolution / (16.0 * PI * PI * snr);
        Ok((angle_var, range_var))
    }

    /// Senses the UAV at `truth` with beam `beam`.
    pub fn sample_measurement<R: Rng + ?Sized>(
        &self,
        truth: &Vec2,
        beam: &Beamformer,
        rng: &mut R,
    ) -> Result<Measurement> {
        let geo = self.geometry(truth);
        let snr = self.sensing_snr(geo.slant_range, geo.array_angle, beam);
        let (angle_var, range_var) = self.detection_variances(snr, geo.array_angle)?;
        let er: f64 = rng.sample(StandardNormal);
        let et: f64 = rng.sample(StandardNormal);
        Ok(measurement_from_polar(
            &self.bs_position,
            geo.horizontal_range + range_var.sqrt() * er,
            geo.azimuth + angle_var.sqrt() * et,
            range_var,
            angle_var,
        ))
    }

    /// Rician C&C link over L repetitions with maximum ratio combining.
    pub fn comm_link<R: Rng + ?Sized>(&self, range: f64, theta: f64, beam: &Beamformer, rng: &mut R) -> CommLink {
        let beta = (self.wavelength / (4.0 * PI * range)).powi(2);
        let los = self.steering_vector(theta);
        let k = self.antennas;
        let (w_los, w_nlos) = if self.rician_k.is_infinite() {
            (1.0, 0.0)
        } else {
            ((self.rician_k / (self.rician_k + 1.0)).sqrt(), (1.0 / (self.rician_k + 1.0)).sqrt())
        };
        // CN(0, 1/K) entries: each real part has variance 1/(2K).
        let std = (0.5 / k as f64).sqrt();
        let los_gain: Complex64 = los.iter().zip(beam.weights.iter()).map(|(a, f)| a * f).sum::<Complex64>() * w_los;
        let mut combined = 0.0;
        for _ in 0..self.cc_repetitions {
            let mut g = los_gain;
            if w_nlos > 0.0 {
                let mut scatter = Complex64::new(0.0, 0.0);
                for f in beam.weights.iter() {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    scatter += Complex64::new(re * std, im * std) * f;
                }
                g += scatter * w_nlos;
            }
            combined += g.norm_sqr();
        }
        let snr = self.tx_power * beta / self.noise_power() * combined;
        CommLink { snr, latency: self.cc_latency(snr) }
    }

    /// τ_c = 2·L·N_cc / (M·Δf·log2(1 + SNR)).
    pub fn cc_latency(&self, snr: f64) -> f64 {
        let rate = (1.0 + snr).log2();
        if rate <= 0.0 {
            return f64::INFINITY;
        }
        2.0 * (self.cc_repetitions * self.cc_symbols) as f64 / (self.subcarriers as f64 * self.subcarrier_spacing * rate)
    }
}

/// Builds a measurement from detected polar values, converting the error
/// covariance with the Jacobian evaluated at the detected point.
pub fn measurement_from_polar(origin: &Vec2, range: f64, angle: f64, range_var: f64, angle_var: f64) -> Measurement {
    let (s, c) = angle.sin_cos();
    let jac = Mat2::new(c, -range * s, s, range * c);
    let cov = jac * Mat2::new(range_var, 0.0, 0.0, angle_var) * jac.transpose();
    Measurement {
        range,
        angle,
        range_var,
        angle_var,
        position: origin + Vec2::new(range * c, range * s),
        cov: crate::stats::symmetrize(&cov),
    }
}

fn steering(theta: f64, k: usize, spacing: f64, wavelength: f64) -> DVector<Complex64> {
    let phase = -2.0 * PI * spacing * theta.sin() / wavelength;
    DVector::from_iterator(k, (0..k).map(|i| Complex64::from_polar(1.0, phase * i as f64)))
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_pi(a: f64) -> f64 {
    let mut x = (a + PI).rem_euclid(2.0 * PI) - PI;
    if x <= -PI {
        x += 2.0 * PI;
    }
    x
}
