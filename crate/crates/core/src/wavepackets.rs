//! Momentum-space amplitudes: the single-photon packet `g(k)` and the
//! exchange-symmetric two-photon amplitude `f(k₁, k₂)`.
//!
//! Every family carries a truncated momentum domain: the region where the
//! envelope exceeds [`ENVELOPE_CUTOFF`] of its peak, intersected with any
//! declared support. Evaluation returns exactly zero outside that domain, so
//! quadrature, normalization and brute-force oracles all see the same function.

use std::io::Read;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dispersion::DispersionRelation;
use crate::error::{Error, Result};
use crate::quadrature::{self, Axis, Interval, JointEnvelope, OscIntegralProblem};
use crate::SpacetimePoint;

/// Envelope level, relative to the peak, at which momentum domains are cut.
pub const ENVELOPE_CUTOFF: f64 = 1e-12;

/// Lower YLS momentum cutoff as a fraction of the pump center.
pub const YLS_K_MIN_FRACTION: f64 = 0.05;

const NORM_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Distance from the center at which `exp(-x²/2σ²)` drops to the cutoff.
fn gaussian_reach(width: f64) -> f64 {
    width * (2.0 * (1.0 / ENVELOPE_CUTOFF).ln()).sqrt()
}

fn check_width(name: &str, w: f64) -> Result<()> {
    if w.is_finite() && w > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive, got {w}")))
    }
}

fn check_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite, got {x}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PacketFamily {
    /// `amplitude · exp(-(k - center)² / (2 width²))`
    Gaussian {
        center: f64,
        width: f64,
        amplitude: Complex64,
    },
    /// Linear interpolation between samples; zero outside the sampled range.
    Table { k: Vec<f64>, values: Vec<Complex64> },
}

/// Single-photon momentum amplitude `g(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavePacketSpec {
    family: PacketFamily,
    support: Option<Interval>,
    scale: Complex64,
}

impl WavePacketSpec {
    pub fn gaussian(center: f64, width: f64, amplitude: Complex64) -> Result<Self> {
        check_finite("packet center", center)?;
        check_width("packet width", width)?;
        Ok(Self {
            family: PacketFamily::Gaussian {
                center,
                width,
                amplitude,
            },
            support: None,
            scale: Complex64::new(1.0, 0.0),
        })
    }

    pub fn table(k: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if k.len() != values.len() {
            return Err(Error::domain("table k-grid and values differ in length"));
        }
        if k.len() < 2 {
            return Err(Error::domain("table needs at least two samples"));
        }
        if k.iter().any(|x| !x.is_finite()) || k.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("table k-grid must be finite and strictly increasing"));
        }
        Ok(Self {
            family: PacketFamily::Table { k, values },
            support: None,
            scale: Complex64::new(1.0, 0.0),
        })
    }

    /// Reads a table from CSV rows `k, re, im`. A non-numeric first row is
    /// taken as a header.
    pub fn table_from_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::table_from_reader(std::fs::File::open(path)?)
    }

    pub fn table_from_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut k = Vec::new();
        let mut values = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let line = record.position().map_or(i + 1, |p| p.line() as usize);
            let parsed: std::result::Result<Vec<f64>, _> =
                record.iter().map(|field| field.parse::<f64>()).collect();
            match parsed {
                Ok(cols) if cols.len() == 3 => {
                    k.push(cols[0]);
                    values.push(Complex64::new(cols[1], cols[2]));
                }
                Ok(cols) => {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected 3 columns (k, re, im), found {}", cols.len()),
                    })
                }
                Err(_) if i == 0 => continue,
                Err(e) => {
                    return Err(Error::Parse {
                        line,
                        message: e.to_string(),
                    })
                }
            }
        }
        Self::table(k, values).map_err(|e| Error::Parse {
            line: 0,
            message: e.to_string(),
        })
    }

    /// Restricts the packet to `support`; `g` vanishes outside it.
    pub fn with_support(mut self, support: Interval) -> Result<Self> {
        let natural = self.natural_domain();
        if natural.intersect(&support).is_none() {
            return Err(Error::domain("declared support does not overlap the packet"));
        }
        self.support = Some(match self.support {
            Some(s) => s.intersect(&support).ok_or_else(|| Error::domain("empty support"))?,
            None => support,
        });
        Ok(self)
    }

    pub fn family(&self) -> &PacketFamily {
        &self.family
    }

    pub fn scaled(mut self, factor: Complex64) -> Self {
        self.scale *= factor;
        self
    }

    fn natural_domain(&self) -> Interval {
        match &self.family {
            PacketFamily::Gaussian { center, width, .. } => {
                let r = gaussian_reach(*width);
                Interval {
                    lo: center - r,
                    hi: center + r,
                }
            }
            PacketFamily::Table { k, .. } => Interval {
                lo: k[0],
                hi: k[k.len() - 1],
            },
        }
    }

    /// Truncated momentum domain on which `g` may be nonzero.
    pub fn domain(&self) -> Interval {
        let natural = self.natural_domain();
        match self.support {
            Some(s) => natural.intersect(&s).unwrap_or(natural),
            None => natural,
        }
    }

    pub fn eval_g(&self, k: f64) -> Complex64 {
        if !self.domain().contains(k) {
            return ZERO;
        }
        let raw = match &self.family {
            PacketFamily::Gaussian {
                center,
                width,
                amplitude,
            } => {
                let x = (k - center) / width;
                amplitude * (-0.5 * x * x).exp()
            }
            PacketFamily::Table { k: grid, values } => {
                let j = grid.partition_point(|&x| x <= k).clamp(1, grid.len() - 1);
                let (k0, k1) = (grid[j - 1], grid[j]);
                let s = (k - k0) / (k1 - k0);
                values[j - 1] * (1.0 - s) + values[j] * s
            }
        };
        raw * self.scale
    }

    /// Momentum scale over which the packet changes appreciably: the Gaussian
    /// width, or for tables the equivalent width of the `|g|²` distribution.
    pub fn effective_width(&self) -> f64 {
        match &self.family {
            PacketFamily::Gaussian { width, .. } => *width,
            PacketFamily::Table { k, values } => {
                let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
                for i in 1..k.len() {
                    let h = k[i] - k[i - 1];
                    for (kk, v) in [(k[i - 1], values[i - 1]), (k[i], values[i])] {
                        let p = 0.5 * h * v.norm_sqr();
                        m0 += p;
                        m1 += p * kk;
                        m2 += p * kk * kk;
                    }
                }
                if m0 == 0.0 {
                    return self.domain().width();
                }
                let var = (m2 / m0 - (m1 / m0).powi(2)).max(0.0);
                (2.0 * var).sqrt().max(f64::EPSILON)
            }
        }
    }

    /// `∫ |g(k)|² dk` over the truncated domain.
    pub fn norm_squared(&self) -> Result<f64> {
        let p = OscIntegralProblem {
            envelope: |k: f64| Complex64::new(self.eval_g(k).norm_sqr(), 0.0),
            point: SpacetimePoint::new(0.0, 0.0),
            dispersion: DispersionRelation::new(1.0)?,
            domain: self.domain(),
            tolerance: NORM_TOLERANCE,
        };
        Ok(quadrature::osc_integrate_1d(&p)?.value.re)
    }

    /// Rescaled copy with `∫ |g|² dk = 1`.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_squared()?;
        if !(n > 0.0) {
            return Err(Error::ZeroNorm);
        }
        Ok(self.clone().scaled(Complex64::new(n.sqrt().recip(), 0.0)))
    }
}

/// Pump spectrum `f_P(K) = amplitude · exp(-(K - center)² / (2 width²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSpectrum {
    pub center: f64,
    pub width: f64,
    pub amplitude: Complex64,
}

impl PumpSpectrum {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        check_finite("pump center", center)?;
        check_width("pump width", width)?;
        Ok(Self {
            center,
            width,
            amplitude: Complex64::new(1.0, 0.0),
        })
    }

    pub fn eval(&self, total_k: f64) -> Complex64 {
        let x = (total_k - self.center) / self.width;
        self.amplitude * (-0.5 * x * x).exp()
    }

    fn reach(&self) -> f64 {
        gaussian_reach(self.width)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BiphotonFamily {
    /// `(g₁(k₁) g₂(k₂) + g₁(k₂) g₂(k₁)) / 2`
    SeparableSymmetrized {
        g1: WavePacketSpec,
        g2: WavePacketSpec,
    },
    /// `exp(-(k₁+k₂-K)²/(2σ_p²) - (k₁-k₂)²/(2σ_r²))`
    GaussianCorrelated {
        pump_center: f64,
        pump_width: f64,
        relative_width: f64,
    },
    /// `(i/κ_p²) f_P(k₁+k₂) √(6 k₁ k₂ (k₁+k₂))` for `k₁, k₂ > k_min`.
    Yls {
        pump: PumpSpectrum,
        pump_scale: f64,
        k_min: f64,
    },
}

/// Exchange-symmetric two-photon momentum amplitude `f(k₁, k₂)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiphotonSpec {
    family: BiphotonFamily,
    scale: Complex64,
}

impl BiphotonSpec {
    pub fn separable_symmetrized(g1: WavePacketSpec, g2: WavePacketSpec) -> Self {
        Self::from_family(BiphotonFamily::SeparableSymmetrized { g1, g2 })
    }

    pub fn gaussian_correlated(pump_center: f64, pump_width: f64, relative_width: f64) -> Result<Self> {
        check_finite("pump center", pump_center)?;
        check_width("pump width", pump_width)?;
        check_width("relative width", relative_width)?;
        Ok(Self::from_family(BiphotonFamily::GaussianCorrelated {
            pump_center,
            pump_width,
            relative_width,
        }))
    }

    /// YLS amplitude with the default lower momentum cutoff
    /// `k_min = YLS_K_MIN_FRACTION · pump.center`.
    pub fn yls(pump: PumpSpectrum, pump_scale: f64) -> Result<Self> {
        Self::yls_with_cutoff(pump, pump_scale, YLS_K_MIN_FRACTION * pump.center.abs())
    }

    pub fn yls_with_cutoff(pump: PumpSpectrum, pump_scale: f64, k_min: f64) -> Result<Self> {
        check_width("pump scale", pump_scale)?;
        if !(k_min.is_finite() && k_min >= 0.0) {
            return Err(Error::domain(format!("k_min must be nonnegative, got {k_min}")));
        }
        if pump.center + pump.reach() <= 2.0 * k_min {
            return Err(Error::domain("pump spectrum lies entirely below 2·k_min"));
        }
        Ok(Self::from_family(BiphotonFamily::Yls {
            pump,
            pump_scale,
            k_min,
        }))
    }

    fn from_family(family: BiphotonFamily) -> Self {
        Self {
            family,
            scale: Complex64::new(1.0, 0.0),
        }
    }

    pub fn family(&self) -> &BiphotonFamily {
        &self.family
    }

    pub fn scaled(mut self, factor: Complex64) -> Self {
        self.scale *= factor;
        self
    }

    /// Per-axis truncated domain; `f` vanishes outside `domain()²`.
    pub fn domain(&self) -> Interval {
        match &self.family {
            BiphotonFamily::SeparableSymmetrized { g1, g2 } => g1.domain().hull(&g2.domain()),
            BiphotonFamily::GaussianCorrelated {
                pump_center,
                pump_width,
                relative_width,
            } => {
                let r = gaussian_reach(*pump_width) + gaussian_reach(*relative_width);
                Interval {
                    lo: 0.5 * (pump_center - r),
                    hi: 0.5 * (pump_center + r),
                }
            }
            BiphotonFamily::Yls { pump, k_min, .. } => Interval {
                lo: *k_min,
                hi: pump.center + pump.reach() - k_min,
            },
        }
    }

    pub fn eval_f(&self, k1: f64, k2: f64) -> Complex64 {
        let raw = match &self.family {
            BiphotonFamily::SeparableSymmetrized { g1, g2 } => {
                (g1.eval_g(k1) * g2.eval_g(k2) + g1.eval_g(k2) * g2.eval_g(k1)) * 0.5
            }
            BiphotonFamily::GaussianCorrelated {
                pump_center,
                pump_width,
                relative_width,
            } => {
                let s = k1 + k2 - pump_center;
                let d = k1 - k2;
                if s.abs() > gaussian_reach(*pump_width) || d.abs() > gaussian_reach(*relative_width) {
                    return ZERO;
                }
                let x = s / pump_width;
                let y = d / relative_width;
                Complex64::new((-0.5 * (x * x + y * y)).exp(), 0.0)
            }
            BiphotonFamily::Yls {
                pump,
                pump_scale,
                k_min,
            } => {
                if k1 <= *k_min || k2 <= *k_min {
                    return ZERO;
                }
                let total = k1 + k2;
                if (total - pump.center).abs() > pump.reach() {
                    return ZERO;
                }
                let root = (6.0 * (k1 * k2) * total).sqrt();
                Complex64::new(0.0, 1.0 / (pump_scale * pump_scale)) * pump.eval(total) * root
            }
        };
        raw * self.scale
    }

    /// Interval of `k₂` outside which `f(k₁, ·)` vanishes.
    pub fn k2_support(&self, k1: f64) -> Option<(f64, f64)> {
        match &self.family {
            BiphotonFamily::SeparableSymmetrized { .. } => None,
            BiphotonFamily::GaussianCorrelated {
                pump_center,
                pump_width,
                relative_width,
            } => {
                let rp = gaussian_reach(*pump_width);
                let rr = gaussian_reach(*relative_width);
                Some(((pump_center - rp - k1).max(k1 - rr), (pump_center + rp - k1).min(k1 + rr)))
            }
            BiphotonFamily::Yls { pump, k_min, .. } => {
                let r = pump.reach();
                Some(((pump.center - r - k1).max(*k_min), pump.center + r - k1))
            }
        }
    }

    /// Momentum scale of `f` along one axis, used by the stationary-phase
    /// applicability guard.
    pub fn effective_width(&self) -> f64 {
        match &self.family {
            BiphotonFamily::SeparableSymmetrized { g1, g2 } => g1.effective_width().min(g2.effective_width()),
            BiphotonFamily::GaussianCorrelated {
                pump_width,
                relative_width,
                ..
            } => (pump_width.powi(-2) + relative_width.powi(-2)).powf(-0.5),
            BiphotonFamily::Yls { pump, .. } => pump.width,
        }
    }

    /// `∬ |f|² dk₁ dk₂` over `(domain() ∩ k_domain)²`.
    pub fn norm_squared_on(&self, k_domain: Interval) -> Result<f64> {
        let Some(dom) = self.domain().intersect(&k_domain) else {
            return Ok(0.0);
        };
        let d = DispersionRelation::new(1.0)?;
        let origin = [SpacetimePoint::new(0.0, 0.0)];
        let one = |_: f64| Complex64::new(1.0, 0.0);
        let axis = Axis {
            envelope: &one,
            domain: dom,
            points: &origin,
        };
        let density = Density(self);
        let grid = quadrature::osc_integrate_2d_grid(&d, axis, axis, &density, NORM_TOLERANCE)?;
        Ok(grid.result(0, 0)?.value.re)
    }

    pub fn norm_squared(&self) -> Result<f64> {
        self.norm_squared_on(self.domain())
    }

    /// Rescaled copy with `∬ |f|² = 1` over `k_domain²`.
    pub fn normalize(&self, k_domain: Interval) -> Result<Self> {
        let n = self.norm_squared_on(k_domain)?;
        if !(n > 0.0) {
            return Err(Error::ZeroNorm);
        }
        Ok(self.clone().scaled(Complex64::new(n.sqrt().recip(), 0.0)))
    }

    pub fn normalized(&self) -> Result<Self> {
        self.normalize(self.domain())
    }
}

impl JointEnvelope for BiphotonSpec {
    fn eval(&self, k1: f64, k2: f64) -> Complex64 {
        self.eval_f(k1, k2)
    }

    fn k2_support(&self, k1: f64) -> Option<(f64, f64)> {
        BiphotonSpec::k2_support(self, k1)
    }
}

/// `|f|²` as a joint envelope, keeping the support of `f`.
struct Density<'a>(&'a BiphotonSpec);

impl JointEnvelope for Density<'_> {
    fn eval(&self, k1: f64, k2: f64) -> Complex64 {
        Complex64::new(self.0.eval_f(k1, k2).norm_sqr(), 0.0)
    }

    fn k2_support(&self, k1: f64) -> Option<(f64, f64)> {
        self.0.k2_support(k1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn example_yls() -> BiphotonSpec {
        // f_P(K) = exp(-(K-2)²/0.02), κ_p = 1
        BiphotonSpec::yls(PumpSpectrum::new(2.0, 0.1).unwrap(), 1.0).unwrap()
    }

    fn families() -> Vec<BiphotonSpec> {
        let g1 = WavePacketSpec::gaussian(0.6, 0.15, Complex64::new(1.0, 0.5)).unwrap();
        let g2 = WavePacketSpec::gaussian(1.1, 0.2, re(0.7)).unwrap();
        vec![
            BiphotonSpec::separable_symmetrized(g1, g2),
            BiphotonSpec::gaussian_correlated(2.0, 0.1, 0.4).unwrap(),
            example_yls(),
        ]
    }

    #[test]
    fn gaussian_peak_and_support() {
        let g = WavePacketSpec::gaussian(0.0, 1.0, re(1.0)).unwrap();
        assert_eq!(g.eval_g(0.0), re(1.0));
        let amp = Complex64::new(0.3, -0.2);
        let g = WavePacketSpec::gaussian(0.75, 0.1, amp).unwrap();
        assert_eq!(g.eval_g(0.75), amp);
        let g = g.with_support(Interval::new(0.7, 0.9).unwrap()).unwrap();
        assert_eq!(g.eval_g(0.69), re(0.0));
        assert_eq!(g.eval_g(0.91), re(0.0));
        assert!(g.eval_g(0.8).norm() > 0.0);
        assert_eq!(g.domain(), Interval::new(0.7, 0.9).unwrap());
    }

    #[test]
    fn gaussian_domain_is_the_cutoff_region() {
        let g = WavePacketSpec::gaussian(0.75, 0.1, re(1.0)).unwrap();
        let dom = g.domain();
        assert_relative_eq!(g.eval_g(dom.hi).re, ENVELOPE_CUTOFF, max_relative = 1e-9);
        assert_eq!(g.eval_g(dom.hi + 1e-9), re(0.0));
    }

    #[test]
    fn invalid_packets_are_rejected() {
        assert!(WavePacketSpec::gaussian(0.0, 0.0, re(1.0)).is_err());
        assert!(WavePacketSpec::table(vec![0.0, 0.0], vec![re(1.0); 2]).is_err());
        assert!(WavePacketSpec::table(vec![0.0], vec![re(1.0)]).is_err());
        let g = WavePacketSpec::gaussian(0.0, 0.1, re(1.0)).unwrap();
        assert!(g.with_support(Interval::new(5.0, 6.0).unwrap()).is_err());
        assert!(BiphotonSpec::gaussian_correlated(1.0, -0.1, 0.1).is_err());
        assert!(BiphotonSpec::yls(PumpSpectrum::new(2.0, 0.1).unwrap(), 0.0).is_err());
    }

    #[test]
    fn table_interpolates_linearly() {
        let g = WavePacketSpec::table(vec![0.0, 1.0, 3.0], vec![re(0.0), Complex64::new(2.0, 1.0), re(0.0)]).unwrap();
        assert_eq!(g.eval_g(0.5), Complex64::new(1.0, 0.5));
        assert_eq!(g.eval_g(2.0), Complex64::new(1.0, 0.5));
        assert_eq!(g.eval_g(3.5), re(0.0));
        assert_eq!(g.eval_g(-0.1), re(0.0));
    }

    #[test]
    fn table_reads_csv_with_header() {
        let text = "k,re,im\n0.0,0.0,0.0\n0.5,1.0,-1.0\n1.0,0.0,0.0\n";
        let g = WavePacketSpec::table_from_reader(text.as_bytes()).unwrap();
        assert_eq!(g.eval_g(0.25), Complex64::new(0.5, -0.5));
        let bad = "0.0,1.0\n";
        assert!(matches!(
            WavePacketSpec::table_from_reader(bad.as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        let bad = "0.0,0,0\n0.5,x,1\n";
        assert!(matches!(
            WavePacketSpec::table_from_reader(bad.as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn table_effective_width_matches_gaussian() {
        let sigma = 0.2;
        let k: Vec<f64> = (0..=4000).map(|i| -2.0 + 4.0 * i as f64 / 4000.0).collect();
        let v = k.iter().map(|&x| re((-x * x / (2.0 * sigma * sigma)).exp())).collect();
        let g = WavePacketSpec::table(k, v).unwrap();
        assert_relative_eq!(g.effective_width(), sigma, max_relative = 1e-4);
    }

    #[test]
    fn yls_worked_value() {
        let f = example_yls();
        let v = f.eval_f(1.0, 1.0);
        assert_eq!(v.re, 0.0);
        assert_relative_eq!(v.im, 12f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(v.im, 3.4641, max_relative = 1e-5);
    }

    #[test]
    fn yls_vanishes_off_positive_quadrant() {
        let f = example_yls();
        for k in [-1.0, 0.0, 0.05, 1.0, 1.9, 3.0] {
            assert_eq!(f.eval_f(0.0, k), re(0.0));
            assert_eq!(f.eval_f(k, 0.0), re(0.0));
            assert_eq!(f.eval_f(-0.3, k), re(0.0));
        }
    }

    #[test]
    fn exchange_symmetry_is_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for f in families() {
            let dom = f.domain();
            for _ in 0..1000 {
                let k1 = rng.gen_range(dom.lo - 0.2..dom.hi + 0.2);
                let k2 = rng.gen_range(dom.lo - 0.2..dom.hi + 0.2);
                let (a, b) = (f.eval_f(k1, k2), f.eval_f(k2, k1));
                assert_eq!(a.re.to_bits(), b.re.to_bits());
                assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
    }

    #[test]
    fn support_hint_is_consistent_with_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for f in families() {
            let dom = f.domain();
            for _ in 0..2000 {
                let k1 = rng.gen_range(dom.lo..dom.hi);
                let k2 = rng.gen_range(dom.lo - 1.0..dom.hi + 1.0);
                let outside_box = !dom.contains(k2);
                let outside_row = f.k2_support(k1).is_some_and(|(lo, hi)| k2 < lo || k2 > hi);
                if outside_box || outside_row {
                    assert!(f.eval_f(k1, k2).norm() <= 1e-11, "{f:?} at ({k1}, {k2})");
                }
            }
        }
    }

    #[test]
    fn smooth_families_have_second_order_differences() {
        let g = WavePacketSpec::gaussian(0.75, 0.1, re(1.0)).unwrap();
        let f = BiphotonSpec::gaussian_correlated(2.0, 0.1, 0.4).unwrap();
        let d2g = |h: f64| (g.eval_g(0.8 + h) - g.eval_g(0.8 - h)) / (2.0 * h);
        let d2f = |h: f64| (f.eval_f(1.03 + h, 0.95) - f.eval_f(1.03 - h, 0.95)) / (2.0 * h);
        for d in [&d2g as &dyn Fn(f64) -> Complex64, &d2f] {
            let (e1, e2) = ((d(4e-3) - d(1e-3)).norm(), (d(2e-3) - d(1e-3)).norm());
            // differences of an O(h²) sequence: (16-1)/(4-1) = 5
            assert!((e1 / e2 - 5.0).abs() < 0.05, "ratio {}", e1 / e2);
        }
    }

    #[test]
    fn packet_normalization() {
        let g = WavePacketSpec::gaussian(0.75, 0.1, re(3.0)).unwrap().normalized().unwrap();
        assert_relative_eq!(g.norm_squared().unwrap(), 1.0, max_relative = 1e-10);
        // closed form: ∫ exp(-x²/σ²) = σ√π
        let amp = g.eval_g(0.75).re;
        assert_relative_eq!(amp, (0.1 * std::f64::consts::PI.sqrt()).powf(-0.5), max_relative = 1e-9);
        let zero = WavePacketSpec::gaussian(0.75, 0.1, re(0.0)).unwrap();
        assert!(matches!(zero.normalized(), Err(Error::ZeroNorm)));
    }

    #[test]
    fn normalization_is_idempotent_and_projective() {
        for f in families() {
            let n = f.normalized().unwrap();
            assert_relative_eq!(n.norm_squared().unwrap(), 1.0, max_relative = 1e-8);
            let nn = n.normalized().unwrap();
            let m = f.clone().scaled(re(3.0)).normalized().unwrap();
            let dom = f.domain();
            for i in 0..50 {
                let k1 = dom.lo + dom.width() * (i as f64 + 0.3) / 50.0;
                let k2 = f.k2_support(k1).map_or(k1, |(lo, hi)| 0.5 * (lo + hi));
                let v = n.eval_f(k1, k2);
                assert!((nn.eval_f(k1, k2) - v).norm() <= 1e-10 * v.norm().max(1e-300));
                assert!((m.eval_f(k1, k2) - v).norm() <= 1e-8 * v.norm().max(1e-300));
            }
        }
        let zero = BiphotonSpec::gaussian_correlated(2.0, 0.1, 0.4).unwrap().scaled(re(0.0));
        assert!(matches!(zero.normalized(), Err(Error::ZeroNorm)));
    }

    #[test]
    fn yls_unit_norm_against_riemann_sum() {
        let dom = Interval::new(0.1, 4.0).unwrap();
        let f = example_yls().normalize(dom).unwrap();
        let n = 2000;
        let h = dom.width() / n as f64;
        let mut total = 0.0;
        for i in 0..n {
            let k1 = dom.lo + h * (i as f64 + 0.5);
            let mut row = 0.0;
            for j in 0..n {
                row += f.eval_f(k1, dom.lo + h * (j as f64 + 0.5)).norm_sqr();
            }
            total += row;
        }
        let riemann = total * h * h;
        // limited by the midpoint rule itself at this grid size
        assert!((riemann - 1.0).abs() < 1e-6, "Riemann norm {riemann}");
    }
}
