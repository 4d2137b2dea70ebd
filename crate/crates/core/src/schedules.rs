//! Learning-rate and spread schedules for both training phases, and the
//! Gaussian neighbourhood kernels built from them.
//!
//! Every schedule is evaluated lazily from `(t, cfg)`.

use serde::{Deserialize, Serialize};

use crate::error::{LamaError, Result};
use crate::grid::NodeGrid;

/// Training schedule and phase parameters.
///
/// The landmark-rate width is `rho_b`. `tau_b` is carried along because
/// published parameter tables list it, but no schedule reads it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub kx: usize,
    pub ky: usize,
    pub t_max: usize,
    pub a_max: f64,
    pub a_min: f64,
    pub tau_a: f64,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub tau_sigma: f64,
    pub b_max: f64,
    pub b_min: f64,
    pub tau_b: f64,
    pub t_center: f64,
    pub rho_b: f64,
    pub rho_max: f64,
    pub rho_min: f64,
    pub tau_rho: f64,
    pub p_th: f64,
    pub seed: u64,
}

impl TrainConfig {
    /// Plain SOM parameters: the landmark phase is disabled (`p_th = 0`) and
    /// its schedule is filled with inert values.
    #[allow(clippy::too_many_arguments)]
    pub fn som(
        kx: usize,
        ky: usize,
        t_max: usize,
        a_max: f64,
        a_min: f64,
        tau_a: f64,
        sigma_max: f64,
        sigma_min: f64,
        tau_sigma: f64,
    ) -> Self {
        TrainConfig {
            kx,
            ky,
            t_max,
            a_max,
            a_min,
            tau_a,
            sigma_max,
            sigma_min,
            tau_sigma,
            b_max: 0.0,
            b_min: 0.0,
            tau_b: 1.0,
            t_center: 0.0,
            rho_b: 1.0,
            rho_max: 1.0,
            rho_min: 1.0,
            tau_rho: 1.0,
            p_th: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(key: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(LamaError::config(key, format!("must be positive and finite, got {v}")))
            }
        }
        fn unit(key: &str, v: f64) -> Result<()> {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(LamaError::config(key, format!("must lie in [0, 1], got {v}")))
            }
        }
        fn ordered(min_key: &str, min: f64, max: f64) -> Result<()> {
            if min <= max {
                Ok(())
            } else {
                Err(LamaError::config(min_key, format!("minimum {min} exceeds maximum {max}")))
            }
        }

        if self.kx == 0 {
            return Err(LamaError::config("kx", "must be a positive integer"));
        }
        if self.ky == 0 {
            return Err(LamaError::config("ky", "must be a positive integer"));
        }
        if self.t_max == 0 {
            return Err(LamaError::config("t_max", "must be a positive integer"));
        }
        positive("a_min", self.a_min)?;
        if self.a_max.is_nan() || self.a_max >= 1.0 {
            return Err(LamaError::config("a_max", format!("must be below 1, got {}", self.a_max)));
        }
        ordered("a_min", self.a_min, self.a_max)?;
        positive("tau_a", self.tau_a)?;
        positive("sigma_min", self.sigma_min)?;
        positive("sigma_max", self.sigma_max)?;
        ordered("sigma_min", self.sigma_min, self.sigma_max)?;
        positive("tau_sigma", self.tau_sigma)?;
        unit("b_min", self.b_min)?;
        unit("b_max", self.b_max)?;
        ordered("b_min", self.b_min, self.b_max)?;
        positive("tau_b", self.tau_b)?;
        if !self.t_center.is_finite() {
            return Err(LamaError::config("t_center", "must be finite"));
        }
        positive("rho_b", self.rho_b)?;
        positive("rho_min", self.rho_min)?;
        positive("rho_max", self.rho_max)?;
        ordered("rho_min", self.rho_min, self.rho_max)?;
        positive("tau_rho", self.tau_rho)?;
        if !(0.0..1.0).contains(&self.p_th) {
            return Err(LamaError::config(
                "p_th",
                format!("must satisfy 0 <= p_th < 1, got {}", self.p_th),
            ));
        }
        Ok(())
    }
}

/// Convex blend that returns `max` exactly when `e == 1`.
fn blend(max: f64, min: f64, e: f64) -> f64 {
    max * e + min * (1.0 - e)
}

fn exp_decay(t: usize, max: f64, min: f64, tau: f64) -> f64 {
    blend(max, min, (-(t as f64) / tau).exp())
}

fn gaussian(sq_dist: f64, spread: f64) -> f64 {
    (-sq_dist / (2.0 * spread * spread)).exp()
}

/// Data-phase peak learning rate `a(t)`.
pub fn rate_a(t: usize, cfg: &TrainConfig) -> f64 {
    exp_decay(t, cfg.a_max, cfg.a_min, cfg.tau_a)
}

/// Data-phase neighbourhood spread `sigma(t)` in grid units.
pub fn spread_sigma(t: usize, cfg: &TrainConfig) -> f64 {
    exp_decay(t, cfg.sigma_max, cfg.sigma_min, cfg.tau_sigma)
}

/// Landmark-phase peak learning rate `b(t)`: a Gaussian bump over steps
/// centred on `t_center` with width `rho_b`.
pub fn rate_b(t: usize, cfg: &TrainConfig) -> f64 {
    let dt = t as f64 - cfg.t_center;
    blend(cfg.b_max, cfg.b_min, (-(dt * dt) / (2.0 * cfg.rho_b * cfg.rho_b)).exp())
}

/// Landmark-phase neighbourhood spread `rho(t)` in grid units.
pub fn spread_rho(t: usize, cfg: &TrainConfig) -> f64 {
    exp_decay(t, cfg.rho_max, cfg.rho_min, cfg.tau_rho)
}

/// Data-phase neighbourhood factor of node `k` around winner `k_d`.
pub fn neigh_a(k_d: usize, k: usize, t: usize, cfg: &TrainConfig, grid: &NodeGrid) -> f64 {
    rate_a(t, cfg) * gaussian(grid.sq_dist(k_d, k), spread_sigma(t, cfg))
}

/// Landmark-phase neighbourhood factor of node `k` around landmark node `k_l`.
pub fn neigh_b(k_l: usize, k: usize, t: usize, cfg: &TrainConfig, grid: &NodeGrid) -> f64 {
    rate_b(t, cfg) * gaussian(grid.sq_dist(k_l, k), spread_rho(t, cfg))
}
