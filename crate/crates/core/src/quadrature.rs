//! Error-controlled evaluation of the oscillatory momentum integrals
//!
//! ```text
//! I(z, t) = ∫ h(k) · exp(i (k z − ω(k) t)) dk
//! ```
//!
//! and of their two-dimensional tensor products. The integration domain is
//! cut into panels so that no panel spans more than a quarter of a local
//! oscillation, `2π / |z − ω′(k) t|`. Each panel is integrated with a fixed
//! Gauss-Legendre rule, once on the whole panel and once on its two halves;
//! the difference is the panel error estimate.
//!
//! Both the 1-D and the 2-D drivers work on batches of spacetime points that
//! share one panel partition. A shared partition means every point is
//! evaluated with the same quadrature rule, so the computed amplitudes are
//! exact superpositions of plane waves; finite-difference checks of the
//! Klein-Gordon equation rely on that.

use std::cmp::Ordering;
use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::{DispersionRelation, SpacetimePoint};
use crate::error::{Error, Result};

/// Absolute error floor used when an integral is (close to) zero.
pub const ABS_FLOOR: f64 = 1e-15;

/// Error targets are never set below this multiple of `∫|integrand|`, the
/// scale at which cancellation in double precision limits any rule.
pub const ROUNDOFF_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Maximum phase advance across one panel: a quarter oscillation.
pub const MAX_PANEL_PHASE: f64 = FRAC_PI_2;

const ORDER_1D: usize = 8;
const ORDER_2D: usize = 6;
const MIN_PANELS_1D: usize = 4;
const MIN_PANELS_2D: usize = 16;
const MAX_PANELS_1D: usize = 200_000;
const MAX_LEVEL_2D: usize = 6;
/// Panels narrower than this fraction of the domain are never split.
const MIN_RELATIVE_WIDTH: f64 = 1e-12;
const ROW_BLOCK: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && lo < hi {
            Ok(Self { lo, hi })
        } else {
            Err(Error::domain(format!("invalid interval [{lo}, {hi}]")))
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then_some(Interval { lo, hi })
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }
}

/// One oscillatory integral `∫ envelope(k) e^{i(kz − ω(k)t)} dk` over `domain`.
#[derive(Debug, Clone)]
pub struct OscIntegralProblem<E> {
    pub envelope: E,
    pub point: SpacetimePoint,
    pub dispersion: DispersionRelation,
    pub domain: Interval,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadMethod {
    AdaptivePanel,
    AsymptoticSpa,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub panels_used: usize,
    pub method: QuadMethod,
}

/// A joint momentum envelope `f(k₁, k₂)` for the 2-D driver.
///
/// `k2_support` may report the interval of `k₂` outside which `f(k₁, ·)`
/// vanishes; the driver then skips those cells entirely.
pub trait JointEnvelope: Sync {
    fn eval(&self, k1: f64, k2: f64) -> Complex64;

    fn k2_support(&self, _k1: f64) -> Option<(f64, f64)> {
        None
    }
}

impl<F> JointEnvelope for F
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    fn eval(&self, k1: f64, k2: f64) -> Complex64 {
        self(k1, k2)
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Nodes and weights mapped onto `[a, b]`, appended to `out`.
    pub(crate) fn push_mapped(&self, a: f64, b: f64, k: &mut Vec<f64>, w: &mut Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, wx) in self.nodes.iter().zip(&self.weights) {
            k.push(mid + half * x);
            w.push(half * wx);
        }
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn rule(order: usize) -> &'static GaussLegendre {
    static R1: OnceLock<GaussLegendre> = OnceLock::new();
    static R2: OnceLock<GaussLegendre> = OnceLock::new();
    match order {
        ORDER_1D => R1.get_or_init(|| GaussLegendre::new(ORDER_1D)),
        ORDER_2D => R2.get_or_init(|| GaussLegendre::new(ORDER_2D)),
        _ => unreachable!("no cached rule of order {order}"),
    }
}

fn check_tolerance(tolerance: f64) -> Result<()> {
    if tolerance > 0.0 && tolerance < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("tolerance must lie in (0, 1), got {tolerance}")))
    }
}

/// Largest phase rate `max_p |z_p − ω′(k) t_p|` over the batch at momentum `k`.
fn phase_rate(d: &DispersionRelation, points: &[SpacetimePoint], k: f64) -> f64 {
    let vg = d.omega_d(k);
    points
        .iter()
        .map(|p| (p.z - vg * p.t).abs())
        .fold(0.0, f64::max)
}

/// Panel boundaries such that every panel advances the phase of every point
/// by at most [`MAX_PANEL_PHASE`] and the domain holds at least `min_panels`.
///
/// For each point `z − ω′(k)t` is monotone in `k`, so the largest rate over
/// a panel is attained at one of its ends.
pub fn oscillation_partition(
    d: &DispersionRelation,
    domain: Interval,
    points: &[SpacetimePoint],
    min_panels: usize,
) -> Vec<f64> {
    let max_width = domain.width() / min_panels.max(1) as f64;
    let mut edges = vec![domain.lo];
    let mut k = domain.lo;
    while k < domain.hi {
        let mut w = (domain.hi - k).min(max_width);
        let rate = phase_rate(d, points, k).max(phase_rate(d, points, k + w));
        if w * rate > MAX_PANEL_PHASE {
            w = MAX_PANEL_PHASE / rate;
        }
        let next = if domain.hi - (k + w) < 1e-9 * w { domain.hi } else { k + w };
        edges.push(next);
        k = next;
    }
    edges
}

/// Integrates one oscillatory problem.
pub fn osc_integrate_1d<E>(p: &OscIntegralProblem<E>) -> Result<QuadResult>
where
    E: Fn(f64) -> Complex64 + Sync,
{
    osc_integrate_1d_batch(&p.envelope, &p.dispersion, p.domain, &[p.point], p.tolerance)?
        .pop()
        .expect("one point in, one result out")
}

struct Panel {
    lo: f64,
    hi: f64,
    fine: Vec<Complex64>,
    err: Vec<f64>,
    /// `∫|envelope|` over the panel at the fine level.
    mass: f64,
}

struct Batch1d<'a, E> {
    envelope: &'a E,
    d: &'a DispersionRelation,
    points: &'a [SpacetimePoint],
}

impl<E> Batch1d<'_, E>
where
    E: Fn(f64) -> Complex64 + Sync,
{
    fn accumulate(&self, a: f64, b: f64, acc: &mut [Complex64]) -> f64 {
        let gl = rule(ORDER_1D);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut mass = 0.0;
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            let k = mid + half * x;
            let h = (self.envelope)(k) * (half * w);
            if h == Complex64::new(0.0, 0.0) {
                continue;
            }
            mass += h.norm();
            let om = self.d.omega(k);
            for (s, p) in acc.iter_mut().zip(self.points) {
                *s += h * Complex64::cis(k * p.z - om * p.t);
            }
        }
        mass
    }

    fn panel(&self, lo: f64, hi: f64) -> Panel {
        let n = self.points.len();
        let mut coarse = vec![Complex64::new(0.0, 0.0); n];
        let mut fine = coarse.clone();
        let mid = 0.5 * (lo + hi);
        self.accumulate(lo, hi, &mut coarse);
        let mass = self.accumulate(lo, mid, &mut fine) + self.accumulate(mid, hi, &mut fine);
        let err = fine.iter().zip(&coarse).map(|(f, c)| (f - c).norm()).collect();
        Panel {
            lo,
            hi,
            fine,
            err,
            mass,
        }
    }
}

/// Integrates `envelope(k) e^{i(kz − ω(k)t)}` over `domain` for every point
/// of `points`, using one shared adaptive partition.
///
/// The outer `Result` rejects invalid arguments; the per-point results carry
/// [`Error::QuadratureNotConverged`] for points whose tolerance could not be
/// met.
pub fn osc_integrate_1d_batch<E>(
    envelope: &E,
    dispersion: &DispersionRelation,
    domain: Interval,
    points: &[SpacetimePoint],
    tolerance: f64,
) -> Result<Vec<Result<QuadResult>>>
where
    E: Fn(f64) -> Complex64 + Sync,
{
    check_tolerance(tolerance)?;
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let n = points.len();
    let ctx = Batch1d {
        envelope,
        d: dispersion,
        points,
    };
    let edges = oscillation_partition(dispersion, domain, points, MIN_PANELS_1D);
    let mut panels: Vec<Panel> = edges
        .par_windows(2)
        .map(|e| ctx.panel(e[0], e[1]))
        .collect();
    let min_width = MIN_RELATIVE_WIDTH * domain.width();
    let mut stuck = vec![false; n];

    let summarize = |panels: &[Panel]| {
        let mut value = vec![Complex64::new(0.0, 0.0); n];
        let mut error = vec![0.0; n];
        for panel in panels {
            for p in 0..n {
                value[p] += panel.fine[p];
                error[p] += panel.err[p];
            }
        }
        (value, error)
    };

    loop {
        let (value, error) = summarize(&panels);
        let floor = ABS_FLOOR.max(ROUNDOFF_FLOOR * panels.iter().map(|p| p.mass).sum::<f64>());
        let target: Vec<f64> = value.iter().map(|v| (tolerance * v.norm()).max(floor)).collect();
        let open: Vec<usize> = (0..n).filter(|&p| !stuck[p] && error[p] > target[p]).collect();

        if open.is_empty() || panels.len() >= MAX_PANELS_1D {
            let used = panels.len();
            return Ok((0..n)
                .map(|p| {
                    if error[p] <= target[p] {
                        Ok(QuadResult {
                            value: value[p],
                            error_estimate: error[p],
                            panels_used: used,
                            method: QuadMethod::AdaptivePanel,
                        })
                    } else {
                        Err(Error::QuadratureNotConverged {
                            best: value[p],
                            achieved: error[p],
                            panels: used,
                        })
                    }
                })
                .collect());
        }

        // For every open point, split the panels carrying the largest error
        // until what is left would fit in half its budget.
        let mut split = vec![false; panels.len()];
        let mut order: Vec<usize> = Vec::with_capacity(panels.len());
        for &p in &open {
            order.clear();
            order.extend((0..panels.len()).filter(|&i| panels[i].hi - panels[i].lo > min_width));
            order.sort_by(|&a, &b| {
                panels[b].err[p]
                    .partial_cmp(&panels[a].err[p])
                    .unwrap_or(Ordering::Equal)
                    .then(a.cmp(&b))
            });
            let mut remaining = error[p];
            let mut any = false;
            for &i in &order {
                if remaining <= 0.5 * target[p] {
                    break;
                }
                remaining -= panels[i].err[p];
                split[i] = true;
                any = true;
            }
            if !any {
                stuck[p] = true;
            }
        }

        let old = std::mem::take(&mut panels);
        let jobs: Vec<(f64, f64, Option<Panel>)> = old
            .into_iter()
            .zip(split)
            .flat_map(|(panel, s)| {
                if s {
                    let mid = 0.5 * (panel.lo + panel.hi);
                    vec![(panel.lo, mid, None), (mid, panel.hi, None)]
                } else {
                    vec![(panel.lo, panel.hi, Some(panel))]
                }
            })
            .collect();
        panels = jobs
            .into_par_iter()
            .map(|(lo, hi, keep)| keep.unwrap_or_else(|| ctx.panel(lo, hi)))
            .collect();
    }
}

/// One axis of a 2-D product grid: a separable envelope, its domain and the
/// spacetime points evaluated along this axis.
#[derive(Debug, Clone, Copy)]
pub struct Axis<'a, E> {
    pub envelope: &'a E,
    pub domain: Interval,
    pub points: &'a [SpacetimePoint],
}

/// Values of a 2-D integral on the product of two point lists, row-major in
/// (axis-1 point, axis-2 point).
#[derive(Debug, Clone)]
pub struct Grid2dResult {
    pub n1: usize,
    pub n2: usize,
    pub values: Vec<Complex64>,
    pub errors: Vec<f64>,
    pub converged: Vec<bool>,
    pub cells_used: usize,
}

impl Grid2dResult {
    pub fn index(&self, p: usize, q: usize) -> usize {
        p * self.n2 + q
    }

    pub fn result(&self, p: usize, q: usize) -> Result<QuadResult> {
        let i = self.index(p, q);
        if self.converged[i] {
            Ok(QuadResult {
                value: self.values[i],
                error_estimate: self.errors[i],
                panels_used: self.cells_used,
                method: QuadMethod::AdaptivePanel,
            })
        } else {
            Err(Error::QuadratureNotConverged {
                best: self.values[i],
                achieved: self.errors[i],
                panels: self.cells_used,
            })
        }
    }
}

struct AxisNodes {
    k: Vec<f64>,
    /// `|w_j h(k_j)|`
    magnitude: Vec<f64>,
    /// `factor[p][j] = w_j h(k_j) e^{i(k_j z_p − ω(k_j) t_p)}`
    factor: Vec<Vec<Complex64>>,
}

fn axis_nodes<E>(d: &DispersionRelation, edges: &[f64], level: usize, axis: &Axis<'_, E>) -> AxisNodes
where
    E: Fn(f64) -> Complex64 + Sync,
{
    let gl = rule(ORDER_2D);
    let split = 1usize << level;
    let mut k = Vec::new();
    let mut w = Vec::new();
    for e in edges.windows(2) {
        let step = (e[1] - e[0]) / split as f64;
        for s in 0..split {
            let a = e[0] + step * s as f64;
            let b = if s + 1 == split { e[1] } else { a + step };
            gl.push_mapped(a, b, &mut k, &mut w);
        }
    }
    let base: Vec<(Complex64, f64)> = k
        .iter()
        .zip(&w)
        .map(|(&kj, &wj)| ((axis.envelope)(kj) * wj, d.omega(kj)))
        .collect();
    let magnitude = base.iter().map(|(h, _)| h.norm()).collect();
    let factor = axis
        .points
        .par_iter()
        .map(|p| {
            k.iter()
                .zip(&base)
                .map(|(&kj, &(h, om))| {
                    if h == Complex64::new(0.0, 0.0) {
                        h
                    } else {
                        h * Complex64::cis(kj * p.z - om * p.t)
                    }
                })
                .collect()
        })
        .collect();
    AxisNodes { k, magnitude, factor }
}

/// Returns the integrals for every point pair and `∬|integrand|`.
fn contract<J: JointEnvelope>(a1: &AxisNodes, a2: &AxisNodes, joint: &J) -> (Vec<Complex64>, f64) {
    let n1 = a1.factor.len();
    let n2 = a2.factor.len();
    let m2 = a2.k.len();
    let zero = Complex64::new(0.0, 0.0);
    let ranges: Vec<(usize, usize)> = a1
        .k
        .iter()
        .map(|&k1| match joint.k2_support(k1) {
            None => (0, m2),
            Some((lo, hi)) => {
                let a = a2.k.partition_point(|&k| k < lo);
                let b = a2.k.partition_point(|&k| k <= hi);
                (a, b.max(a))
            }
        })
        .collect();

    let mut partial = vec![vec![zero; m2]; n1];
    let mut mass = 0.0;
    for start in (0..a1.k.len()).step_by(ROW_BLOCK) {
        let end = (start + ROW_BLOCK).min(a1.k.len());
        let block: Vec<Vec<Complex64>> = (start..end)
            .into_par_iter()
            .map(|i| {
                let (a, b) = ranges[i];
                a2.k[a..b].iter().map(|&k2| joint.eval(a1.k[i], k2)).collect()
            })
            .collect();
        for (off, frow) in block.iter().enumerate() {
            let i = start + off;
            let (a, _) = ranges[i];
            let row: f64 = frow.iter().zip(&a2.magnitude[a..]).map(|(f, m)| f.norm() * m).sum();
            mass += a1.magnitude[i] * row;
        }
        partial.par_iter_mut().enumerate().for_each(|(p, row)| {
            for (off, frow) in block.iter().enumerate() {
                let i = start + off;
                let c = a1.factor[p][i];
                if c == zero {
                    continue;
                }
                let (a, _) = ranges[i];
                for (u, f) in row[a..a + frow.len()].iter_mut().zip(frow) {
                    *u += c * f;
                }
            }
        });
    }

    let values: Vec<Complex64> = partial
        .par_iter()
        .flat_map_iter(|row| {
            a2.factor
                .iter()
                .map(move |e2| e2.iter().zip(row).fold(zero, |acc, (e, u)| acc + e * u))
        })
        .collect();
    debug_assert_eq!(values.len(), n1 * n2);
    (values, mass)
}

/// Tensor-product evaluation of
///
/// ```text
/// ∬ h₁(k₁) h₂(k₂) f(k₁,k₂) e^{i(k₁z₁ − ω(k₁)t₁)} e^{i(k₂z₂ − ω(k₂)t₂)} dk₁ dk₂
/// ```
///
/// for every pair of axis-1 and axis-2 points. Each axis gets its own
/// quarter-oscillation partition; the whole product rule is refined by
/// halving every panel until two successive levels agree to `tolerance`.
pub fn osc_integrate_2d_grid<E1, E2, J>(
    dispersion: &DispersionRelation,
    axis1: Axis<'_, E1>,
    axis2: Axis<'_, E2>,
    joint: &J,
    tolerance: f64,
) -> Result<Grid2dResult>
where
    E1: Fn(f64) -> Complex64 + Sync,
    E2: Fn(f64) -> Complex64 + Sync,
    J: JointEnvelope,
{
    check_tolerance(tolerance)?;
    let (n1, n2) = (axis1.points.len(), axis2.points.len());
    let edges1 = oscillation_partition(dispersion, axis1.domain, axis1.points, MIN_PANELS_2D);
    let edges2 = oscillation_partition(dispersion, axis2.domain, axis2.points, MIN_PANELS_2D);
    let cells = |level: usize| ((edges1.len() - 1) * (edges2.len() - 1)) << (2 * level);

    let eval_level = |level: usize| {
        let a1 = axis_nodes(dispersion, &edges1, level, &axis1);
        let a2 = axis_nodes(dispersion, &edges2, level, &axis2);
        contract(&a1, &a2, joint)
    };

    let mut previous = eval_level(0).0;
    let mut level = 1;
    loop {
        let (current, mass) = eval_level(level);
        let floor = ABS_FLOOR.max(ROUNDOFF_FLOOR * mass);
        let errors: Vec<f64> = current.iter().zip(&previous).map(|(c, p)| (c - p).norm()).collect();
        let converged: Vec<bool> = current
            .iter()
            .zip(&errors)
            .map(|(c, &e)| e <= (tolerance * c.norm()).max(floor))
            .collect();
        if level == MAX_LEVEL_2D || converged.iter().all(|&c| c) {
            return Ok(Grid2dResult {
                n1,
                n2,
                values: current,
                errors,
                converged,
                cells_used: cells(level),
            });
        }
        previous = current;
        level += 1;
    }
}

/// Single-point 2-D integral over `p1.domain × p2.domain` of
/// `p1.envelope(k₁) p2.envelope(k₂) joint(k₁,k₂)` times both phases.
/// The tighter of the two tolerances is used.
pub fn osc_integrate_2d<E1, E2, J>(
    p1: &OscIntegralProblem<E1>,
    p2: &OscIntegralProblem<E2>,
    joint: &J,
) -> Result<QuadResult>
where
    E1: Fn(f64) -> Complex64 + Sync,
    E2: Fn(f64) -> Complex64 + Sync,
    J: JointEnvelope,
{
    if p1.dispersion != p2.dispersion {
        return Err(Error::domain("both axes of a 2-D integral must share one dispersion relation"));
    }
    let pts1 = [p1.point];
    let pts2 = [p2.point];
    let grid = osc_integrate_2d_grid(
        &p1.dispersion,
        Axis {
            envelope: &p1.envelope,
            domain: p1.domain,
            points: &pts1,
        },
        Axis {
            envelope: &p2.envelope,
            domain: p2.domain,
            points: &pts2,
        },
        joint,
        p1.tolerance.min(p2.tolerance),
    )?;
    grid.result(0, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn unit_mass() -> DispersionRelation {
        DispersionRelation::new(1.0).unwrap()
    }

    fn gaussian(center: f64, width: f64) -> impl Fn(f64) -> Complex64 + Sync + Clone {
        move |k: f64| c((-(k - center).powi(2) / (2.0 * width * width)).exp())
    }

    /// Trapezoid rule with compensated summation; independent of the panel
    /// machinery above.
    fn trapezoid_oracle(
        env: impl Fn(f64) -> Complex64,
        d: &DispersionRelation,
        pt: SpacetimePoint,
        dom: Interval,
        n: usize,
    ) -> Complex64 {
        let h = dom.width() / n as f64;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut comp = Complex64::new(0.0, 0.0);
        for i in 0..=n {
            let k = dom.lo + h * i as f64;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            let term = env(k) * Complex64::cis(k * pt.z - d.omega(k) * pt.t) * w - comp;
            let next = sum + term;
            comp = (next - sum) - term;
            sum = next;
        }
        sum * h
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let gl = GaussLegendre::new(6);
        let total: f64 = gl.weights.iter().sum();
        assert_relative_eq!(total, 2.0, epsilon = 1e-14);
        let x10: f64 = gl.nodes.iter().zip(&gl.weights).map(|(x, w)| w * x.powi(10)).sum();
        assert_relative_eq!(x10, 2.0 / 11.0, epsilon = 1e-14);
        assert!(gl.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn partition_respects_quarter_oscillation() {
        let d = unit_mass();
        let dom = Interval::new(-1.0, 2.0).unwrap();
        let pts = [SpacetimePoint::new(30.0, 400.0), SpacetimePoint::new(-5.0, 10.0)];
        let edges = oscillation_partition(&d, dom, &pts, 4);
        assert_eq!(edges[0], dom.lo);
        assert_eq!(*edges.last().unwrap(), dom.hi);
        for e in edges.windows(2) {
            let w = e[1] - e[0];
            assert!(w > 0.0);
            // dense check of the rate inside the panel
            let rate = (0..=20)
                .map(|s| phase_rate(&d, &pts, e[0] + w * s as f64 / 20.0))
                .fold(0.0, f64::max);
            assert!(w * rate <= MAX_PANEL_PHASE * (1.0 + 1e-12), "panel {e:?}");
        }
    }

    #[test]
    fn static_gaussian_integral() {
        let dom = Interval::new(-12.0, 12.0).unwrap();
        let p = OscIntegralProblem {
            envelope: gaussian(0.0, 1.0),
            point: SpacetimePoint::new(0.0, 0.0),
            dispersion: unit_mass(),
            domain: dom,
            tolerance: 1e-12,
        };
        let r = osc_integrate_1d(&p).unwrap();
        assert_relative_eq!(r.value.re, 2.5066282746310002, max_relative = 1e-12);
        assert!(r.value.im.abs() < 1e-15);
        assert!(r.error_estimate <= 1e-12 * r.value.norm());
        assert!(r.panels_used >= 1);
        assert_eq!(r.method, QuadMethod::AdaptivePanel);
    }

    #[test]
    fn even_envelope_without_time_evolution_is_real() {
        // at t = 0 the integral of an even envelope is a cosine transform
        let dom = Interval::new(-3.0, 3.0).unwrap();
        let p = OscIntegralProblem {
            envelope: gaussian(0.0, 0.5),
            point: SpacetimePoint::new(3.0, 0.0),
            dispersion: DispersionRelation::new(0.7).unwrap(),
            domain: dom,
            tolerance: 1e-10,
        };
        let r = osc_integrate_1d(&p).unwrap();
        assert!(r.value.im.abs() <= 1e-12 * r.value.norm(), "{:?}", r.value);
    }

    #[test]
    fn matches_dense_riemann_oracle_at_t50() {
        let d = unit_mass();
        let sigma = 0.5;
        let cut = sigma * (2.0 * 1e12f64.ln()).sqrt();
        let dom = Interval::new(-cut, cut).unwrap();
        let pt = SpacetimePoint::new(0.0, 50.0);
        let p = OscIntegralProblem {
            envelope: gaussian(0.0, sigma),
            point: pt,
            dispersion: d,
            domain: dom,
            tolerance: 1e-10,
        };
        let r = osc_integrate_1d(&p).unwrap();
        let oracle = trapezoid_oracle(gaussian(0.0, sigma), &d, pt, dom, 10_000_000);
        assert!((r.value - oracle).norm() <= 1e-8 * oracle.norm(), "{} vs {}", r.value, oracle);
    }

    #[test]
    fn translation_covariance() {
        let d = unit_mass();
        let dom = Interval::new(-1.5, 2.5).unwrap();
        let shift = 3.7;
        let g = gaussian(0.5, 0.3);
        let shifted = {
            let g = g.clone();
            move |k: f64| g(k) * Complex64::cis(k * shift)
        };
        let at = |env: &(dyn Fn(f64) -> Complex64 + Sync), z: f64| {
            osc_integrate_1d_batch(&env, &d, dom, &[SpacetimePoint::new(z, 20.0)], 1e-11).unwrap()[0]
                .as_ref()
                .unwrap()
                .value
        };
        let a = at(&shifted, 4.0);
        let b = at(&g, 4.0 + shift);
        assert!((a - b).norm() <= 1e-9 * b.norm());
    }

    #[test]
    fn unreachable_tolerance_reports_best_value() {
        let d = unit_mass();
        let dom = Interval::new(0.0, 1.0).unwrap();
        let pole = std::f64::consts::FRAC_1_PI;
        let singular = move |k: f64| c(1.0 / (k - pole).abs().sqrt());
        let p = OscIntegralProblem {
            envelope: singular,
            point: SpacetimePoint::new(0.0, 0.0),
            dispersion: d,
            domain: dom,
            tolerance: 1e-14,
        };
        match osc_integrate_1d(&p) {
            Err(Error::QuadratureNotConverged { best, achieved, panels }) => {
                let exact = 2.0 * (pole.sqrt() + (1.0 - pole).sqrt());
                assert!((best.re - exact).abs() < 1e-3);
                assert!(achieved > 0.0);
                assert!(panels > 1);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn bad_tolerance_is_rejected() {
        let d = unit_mass();
        let dom = Interval::new(0.0, 1.0).unwrap();
        let env = |_k: f64| c(1.0);
        assert!(osc_integrate_1d_batch(&env, &d, dom, &[SpacetimePoint::new(0.0, 0.0)], 0.0).is_err());
        assert!(osc_integrate_1d_batch(&env, &d, dom, &[SpacetimePoint::new(0.0, 0.0)], 1.0).is_err());
        assert!(Interval::new(1.0, 1.0).is_err());
    }

    #[test]
    fn separable_2d_is_product_of_1d() {
        let d = unit_mass();
        let dom1 = Interval::new(-0.5, 2.0).unwrap();
        let dom2 = Interval::new(-1.0, 1.5).unwrap();
        let p1 = OscIntegralProblem {
            envelope: gaussian(0.7, 0.2),
            point: SpacetimePoint::new(5.0, 12.0),
            dispersion: d,
            domain: dom1,
            tolerance: 1e-11,
        };
        let p2 = OscIntegralProblem {
            envelope: gaussian(0.2, 0.25),
            point: SpacetimePoint::new(-3.0, 8.0),
            dispersion: d,
            domain: dom2,
            tolerance: 1e-11,
        };
        let joint = |_: f64, _: f64| c(1.0);
        let two = osc_integrate_2d(&p1, &p2, &joint).unwrap();
        let one = osc_integrate_1d(&p1).unwrap().value * osc_integrate_1d(&p2).unwrap().value;
        assert!((two.value - one).norm() <= 1e-9 * one.norm(), "{} vs {}", two.value, one);
    }

    #[test]
    fn static_2d_matches_riemann_grid() {
        let d = unit_mass();
        let dom = Interval::new(-1.0, 3.0).unwrap();
        let joint = |k1: f64, k2: f64| {
            c((-(k1 + k2 - 2.0).powi(2) / 0.08 - (k1 - k2).powi(2) / 0.5).exp())
        };
        let one = |_: f64| c(1.0);
        let p = |pt| OscIntegralProblem {
            envelope: one,
            point: pt,
            dispersion: d,
            domain: dom,
            tolerance: 1e-11,
        };
        let origin = SpacetimePoint::new(0.0, 0.0);
        let r = osc_integrate_2d(&p(origin), &p(origin), &joint).unwrap();
        let n = 4000;
        let h = dom.width() / n as f64;
        let mut sum = 0.0;
        for i in 0..n {
            let k1 = dom.lo + h * (i as f64 + 0.5);
            for j in 0..n {
                sum += joint(k1, dom.lo + h * (j as f64 + 0.5)).re;
            }
        }
        let oracle = sum * h * h;
        assert!((r.value.re - oracle).abs() <= 1e-7 * oracle, "{} vs {oracle}", r.value.re);
    }

    #[test]
    fn swapping_axes_with_symmetric_envelope() {
        let d = unit_mass();
        let dom = Interval::new(0.1, 2.5).unwrap();
        let joint = |k1: f64, k2: f64| c((-(k1 + k2 - 2.0).powi(2) / 0.02).exp() * (k1 * k2).sqrt());
        let env = |k: f64| c(1.0 / (1.0 + k * k));
        let a = SpacetimePoint::new(7.0, 11.0);
        let b = SpacetimePoint::new(-2.0, 4.0);
        let p = |pt| OscIntegralProblem {
            envelope: env,
            point: pt,
            dispersion: d,
            domain: dom,
            tolerance: 1e-10,
        };
        let ab = osc_integrate_2d(&p(a), &p(b), &joint).unwrap().value;
        let ba = osc_integrate_2d(&p(b), &p(a), &joint).unwrap().value;
        assert!((ab - ba).norm() <= 1e-12 * ab.norm(), "{ab} vs {ba}");
    }
}
