//! Detection amplitudes and probability densities for one photon and for a
//! photon pair in a single waveguide mode, by direct quadrature of the
//! momentum integrals and by leading-order stationary phase.
//!
//! Single photon:
//!
//! ```text
//! A(z,t) = ∫ dk g(k) e^{-iω_k t + ikz} / (2√(2π ω_k)),        P = |A|²
//! ```
//!
//! Photon pair (with `f` symmetric both exchange terms coincide):
//!
//! ```text
//! A(z₁,t₁,z₂,t₂) = 2 ∬ dk₁dk₂ f(k₁,k₂) Π_i e^{-iω_i t_i + ik_i z_i} / (2√(2π ω_i))
//! ```
//!
//! All outputs use unit proportionality constants.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dispersion::{check_subluminal, DispersionRelation, SpacetimePoint};
use crate::error::{Error, Result};
use crate::quadrature::{self, Axis, Grid2dResult, JointEnvelope, OscIntegralProblem, QuadMethod, QuadResult};
use crate::wavepackets::{BiphotonSpec, WavePacketSpec};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Minimum of `t ω″(k₀) σ_eff²` for a stationary-phase value to be trusted.
pub const ASYMPTOTIC_GUARD: f64 = 10.0;

/// Per-mode factor `1 / (2√(2π ω(k)))`.
fn mode_factor(d: &DispersionRelation, k: f64) -> f64 {
    0.5 / (2.0 * PI * d.omega(k)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEntry {
    pub point: SpacetimePoint,
    /// Second detector, for two-photon entries.
    pub partner: Option<SpacetimePoint>,
    pub amplitude: Complex64,
    pub probability: f64,
    pub error_estimate: f64,
    pub method: QuadMethod,
    pub converged: bool,
}

impl CorrelationEntry {
    fn from_quad(point: SpacetimePoint, partner: Option<SpacetimePoint>, r: &Result<QuadResult>) -> Self {
        let (value, err, method, converged) = match r {
            Ok(q) => (q.value, q.error_estimate, q.method, true),
            Err(Error::QuadratureNotConverged { best, achieved, .. }) => {
                (*best, *achieved, QuadMethod::AdaptivePanel, false)
            }
            Err(_) => (Complex64::new(f64::NAN, f64::NAN), f64::INFINITY, QuadMethod::AdaptivePanel, false),
        };
        Self {
            point,
            partner,
            amplitude: value,
            probability: value.norm_sqr(),
            error_estimate: probability_error(value, err),
            method,
            converged,
        }
    }
}

/// Error bound on `|A|²` given an error bound on `A`.
fn probability_error(a: Complex64, err: f64) -> f64 {
    err * (2.0 * a.norm() + err)
}

/// Evaluated probabilities with their amplitudes, error estimates and the
/// method used at each point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub entries: Vec<CorrelationEntry>,
}

impl CorrelationResult {
    pub fn probabilities(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.probability).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.entries.iter().all(|e| e.converged)
    }
}

pub fn amplitude_single(
    g: &WavePacketSpec,
    d: &DispersionRelation,
    pt: SpacetimePoint,
    tolerance: f64,
) -> Result<QuadResult> {
    let p = OscIntegralProblem {
        envelope: |k: f64| g.eval_g(k) * mode_factor(d, k),
        point: pt,
        dispersion: *d,
        domain: g.domain(),
        tolerance,
    };
    quadrature::osc_integrate_1d(&p)
}

pub fn probability_single(
    g: &WavePacketSpec,
    d: &DispersionRelation,
    pt: SpacetimePoint,
    tolerance: f64,
) -> Result<f64> {
    Ok(amplitude_single(g, d, pt, tolerance)?.value.norm_sqr())
}

/// Single-photon amplitudes at many points, all evaluated with one shared
/// quadrature rule. Points whose tolerance is not met are kept with
/// `converged = false`.
pub fn scan_single(
    g: &WavePacketSpec,
    d: &DispersionRelation,
    points: &[SpacetimePoint],
    tolerance: f64,
) -> Result<CorrelationResult> {
    let envelope = |k: f64| g.eval_g(k) * mode_factor(d, k);
    let results = quadrature::osc_integrate_1d_batch(&envelope, d, g.domain(), points, tolerance)?;
    Ok(CorrelationResult {
        entries: points
            .iter()
            .zip(&results)
            .map(|(&pt, r)| CorrelationEntry::from_quad(pt, None, r))
            .collect(),
    })
}

/// Leading stationary-phase evaluation in the frame `z = v t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSingle {
    pub stationary_momentum: f64,
    /// `g(k₀) e^{-it(ω₀ - k₀v) - iπ/4} / (2√(2πω₀)) · √(2π/(t ω″(k₀)))`
    pub amplitude: Complex64,
    /// `|g(k₀)|² / (4 t ω(k₀) ω″(k₀))`
    pub probability: f64,
    /// `t ω″(k₀) σ_eff²`
    pub guard: f64,
    pub guard_ok: bool,
}

pub fn asymptotic_single(g: &WavePacketSpec, d: &DispersionRelation, v: f64, t: f64) -> Result<AsymptoticSingle> {
    check_subluminal(v)?;
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::domain(format!("stationary phase needs t > 0, got {t}")));
    }
    let k0 = d.stationary_point(v)?;
    let (w, wdd) = (d.omega(k0), d.omega_dd(k0));
    let gk = g.eval_g(k0);
    let phase = Complex64::cis(-t * (w - k0 * v) - FRAC_PI_4);
    let amplitude = gk * phase * mode_factor(d, k0) * (2.0 * PI / (t * wdd)).sqrt();
    let guard = t * wdd * g.effective_width().powi(2);
    Ok(AsymptoticSingle {
        stationary_momentum: k0,
        amplitude,
        probability: gk.norm_sqr() / (4.0 * t * w * wdd),
        guard,
        guard_ok: guard >= ASYMPTOTIC_GUARD,
    })
}

/// Evaluates `A(z₁,t₁,z₂,t₂)`.
///
/// Both axes use the partition built from both points, so swapping the
/// detectors reproduces the same quadrature rule.
pub fn amplitude_biphoton(
    f: &BiphotonSpec,
    d: &DispersionRelation,
    pt1: SpacetimePoint,
    pt2: SpacetimePoint,
    tolerance: f64,
) -> Result<QuadResult> {
    if pt1 == pt2 {
        let grid = biphoton_grid(f, d, &[pt1], &[pt1], tolerance)?;
        return grid.result(0, 0);
    }
    let pts = [pt1, pt2];
    let grid = biphoton_grid(f, d, &pts, &pts, tolerance)?;
    grid.result(0, 1)
}

pub fn probability_biphoton(
    f: &BiphotonSpec,
    d: &DispersionRelation,
    pt1: SpacetimePoint,
    pt2: SpacetimePoint,
    tolerance: f64,
) -> Result<f64> {
    Ok(amplitude_biphoton(f, d, pt1, pt2, tolerance)?.value.norm_sqr())
}

fn biphoton_grid(
    f: &BiphotonSpec,
    d: &DispersionRelation,
    axis1: &[SpacetimePoint],
    axis2: &[SpacetimePoint],
    tolerance: f64,
) -> Result<Grid2dResult> {
    let envelope = |k: f64| Complex64::new(mode_factor(d, k), 0.0);
    let domain = f.domain();
    // the doubled integral carries twice the error of the undoubled one
    let mut grid = quadrature::osc_integrate_2d_grid(
        d,
        Axis {
            envelope: &envelope,
            domain,
            points: axis1,
        },
        Axis {
            envelope: &envelope,
            domain,
            points: axis2,
        },
        f,
        tolerance,
    )?;
    for v in &mut grid.values {
        *v *= 2.0;
    }
    for e in &mut grid.errors {
        *e *= 2.0;
    }
    Ok(grid)
}

/// Two-photon amplitudes on the product `axis1 × axis2`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiphotonScan {
    pub axis1: Vec<SpacetimePoint>,
    pub axis2: Vec<SpacetimePoint>,
    pub result: CorrelationResult,
}

impl BiphotonScan {
    pub fn entry(&self, p: usize, q: usize) -> &CorrelationEntry {
        &self.result.entries[p * self.axis2.len() + q]
    }
}

pub fn scan_biphoton(
    f: &BiphotonSpec,
    d: &DispersionRelation,
    axis1: &[SpacetimePoint],
    axis2: &[SpacetimePoint],
    tolerance: f64,
) -> Result<BiphotonScan> {
    let grid = biphoton_grid(f, d, axis1, axis2, tolerance)?;
    let mut entries = Vec::with_capacity(axis1.len() * axis2.len());
    for (p, &pt1) in axis1.iter().enumerate() {
        for (q, &pt2) in axis2.iter().enumerate() {
            entries.push(CorrelationEntry::from_quad(pt1, Some(pt2), &grid.result(p, q)));
        }
    }
    Ok(BiphotonScan {
        axis1: axis1.to_vec(),
        axis2: axis2.to_vec(),
        result: CorrelationResult { entries },
    })
}

/// Two-term stationary-phase evaluation with detector frames `v₁`, `v₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticBiphoton {
    pub stationary_momenta: (f64, f64),
    pub amplitude: Complex64,
    /// Squared modulus of `amplitude`, interference term included.
    pub probability: f64,
    /// Interference maximum: the same prefactor times
    /// `(|f(k₁₀,k₂₀)| + |f(k₂₀,k₁₀)|)²`.
    pub envelope: f64,
    pub guard: (f64, f64),
    pub guard_ok: bool,
}

pub fn asymptotic_biphoton(
    f: &BiphotonSpec,
    d: &DispersionRelation,
    v1: f64,
    v2: f64,
    t1: f64,
    t2: f64,
) -> Result<AsymptoticBiphoton> {
    check_subluminal(v1)?;
    check_subluminal(v2)?;
    if !(t1.is_finite() && t1 > 0.0 && t2.is_finite() && t2 > 0.0) {
        return Err(Error::domain(format!("stationary phase needs t₁, t₂ > 0, got {t1}, {t2}")));
    }
    let k10 = d.stationary_point(v1)?;
    let k20 = d.stationary_point(v2)?;
    let prefactor = |k: f64, t: f64| (2.0 * PI / (t * d.omega_dd(k))).sqrt() * mode_factor(d, k);
    let pre = prefactor(k10, t1) * prefactor(k20, t2);
    let phase = |k: f64, v: f64, t: f64| Complex64::cis(-t * (d.omega(k) - k * v));

    let direct = f.eval_f(k10, k20);
    let swapped = f.eval_f(k20, k10);
    let sum = direct * phase(k10, v1, t1) * phase(k20, v2, t2) + swapped * phase(k20, v1, t1) * phase(k10, v2, t2);
    let amplitude = sum * Complex64::cis(-FRAC_PI_2) * pre;

    let width = f.effective_width();
    let guard = (
        t1 * d.omega_dd(k10) * width * width,
        t2 * d.omega_dd(k20) * width * width,
    );
    Ok(AsymptoticBiphoton {
        stationary_momenta: (k10, k20),
        amplitude,
        probability: amplitude.norm_sqr(),
        envelope: pre * pre * (direct.norm() + swapped.norm()).powi(2),
        guard,
        guard_ok: guard.0 >= ASYMPTOTIC_GUARD && guard.1 >= ASYMPTOTIC_GUARD,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub v1: f64,
    pub v2: f64,
    /// `|f(k₁₀, k₂₀)|²`, or `None` when a velocity is on or outside the
    /// light cone.
    pub value: Option<f64>,
}

/// Maps velocity pairs `(z₁/t₁, z₂/t₂)` to `|f(m v₁/√(1-v₁²), m v₂/√(1-v₂²))|²`.
pub fn entangled_spacetime_profile<J: JointEnvelope + ?Sized>(
    f: &J,
    d: &DispersionRelation,
    v1s: &[f64],
    v2s: &[f64],
) -> Vec<ProfilePoint> {
    let mut out = Vec::with_capacity(v1s.len() * v2s.len());
    for &v1 in v1s {
        for &v2 in v2s {
            let value = match (d.stationary_point(v1), d.stationary_point(v2)) {
                (Ok(k1), Ok(k2)) => Some(f.eval(k1, k2).norm_sqr()),
                _ => None,
            };
            out.push(ProfilePoint { v1, v2, value });
        }
    }
    out
}
