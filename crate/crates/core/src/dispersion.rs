//! Relativistic dispersion of a single waveguide mode, `ω(k) = √(k² + m²)`,
//! together with the moving-frame kinematics used by the stationary-phase
//! evaluations. Natural units with `c = 1` throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dispersion relation of one mode with cutoff mass `m > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionRelation {
    mass: f64,
}

impl DispersionRelation {
    pub fn new(mass: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::domain(format!("mode mass must be positive, got {mass}")));
        }
        Ok(Self { mass })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega(&self, k: f64) -> f64 {
        k.hypot(self.mass)
    }

    /// Group velocity `dω/dk = k/ω`.
    pub fn omega_d(&self, k: f64) -> f64 {
        k / self.omega(k)
    }

    /// `d²ω/dk² = m²/ω³`, strictly positive.
    pub fn omega_dd(&self, k: f64) -> f64 {
        let w = self.omega(k);
        self.mass * self.mass / (w * w * w)
    }

    /// Momentum whose group velocity equals the frame velocity `v`,
    /// i.e. the stationary point of `kv - ω(k)`: `k₀ = m v / √(1 - v²)`.
    pub fn stationary_point(&self, v: f64) -> Result<f64> {
        check_subluminal(v)?;
        Ok(self.mass * v / (1.0 - v * v).sqrt())
    }
}

pub(crate) fn check_subluminal(v: f64) -> Result<()> {
    if v.is_finite() && v.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "frame velocity |v| = {} is not below the speed of light",
            v.abs()
        )))
    }
}

/// A detection event location: position `z` along the guide at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub z: f64,
    pub t: f64,
}

impl SpacetimePoint {
    pub fn new(z: f64, t: f64) -> Self {
        Self { z, t }
    }

    /// The point reached at time `t` by a frame moving at velocity `v`.
    pub fn on_ray(v: f64, t: f64) -> Self {
        Self { z: v * t, t }
    }

    /// `z/t`; `None` at `t = 0`.
    pub fn velocity(&self) -> Option<f64> {
        (self.t != 0.0).then(|| self.z / self.t)
    }

    pub fn outside_light_cone(&self) -> bool {
        self.z.abs() >= self.t.abs()
    }
}
