use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    Sech,
    Gaussian,
}

impl PulseShape {
    /// ∫ shape(t/τ) dt in units of τ.
    pub fn area_factor(self) -> f64 {
        match self {
            PulseShape::Sech => PI,
            PulseShape::Gaussian => (2.0 * PI).sqrt(),
        }
    }
}

/// Boundary pulse Ω(0, t), switched on at t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub shape: PulseShape,
    /// Peak Rabi frequency Ω_s, rad/s.
    pub omega_s: f64,
    /// Duration τ, s.
    pub tau: f64,
    /// Centre t₀, s.
    pub t0: f64,
}

impl PulseSpec {
    pub fn new(shape: PulseShape, omega_s: f64, tau: f64, t0: f64) -> Result<Self> {
        let p = PulseSpec {
            shape,
            omega_s,
            tau,
            t0,
        };
        p.validate()?;
        Ok(p)
    }

    /// The pulse whose full-line area is `theta`.
    pub fn with_area(shape: PulseShape, theta: f64, tau: f64, t0: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::invalid("tau", "must be positive"));
        }
        Self::new(shape, theta / (shape.area_factor() * tau), tau, t0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid("tau", "must be positive"));
        }
        if !(self.omega_s >= 0.0 && self.omega_s.is_finite()) {
            return Err(Error::invalid("omega_s", "must be finite and ≥ 0"));
        }
        if !(self.t0 >= 0.0 && self.t0.is_finite()) {
            return Err(Error::invalid("t0", "must be finite and ≥ 0"));
        }
        Ok(())
    }

    /// Area θ = ∫Ω dt over the full line.
    pub fn area(&self) -> f64 {
        self.omega_s * self.tau * self.shape.area_factor()
    }

    /// Ω(0, t); zero before the switch-on at t = 0.
    pub fn envelope(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let x = (t - self.t0) / self.tau;
        match self.shape {
            PulseShape::Sech => self.omega_s / x.cosh(),
            PulseShape::Gaussian => self.omega_s * (-0.5 * x * x).exp(),
        }
    }
}
