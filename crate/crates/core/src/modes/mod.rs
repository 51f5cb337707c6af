//! Transverse Dirichlet (TM) spectrum of the waveguide cross-section:
//! `(∂²_x + ∂²_y + m_n²) v_n = 0` in Ω, `v_n = 0` on ∂Ω, with the
//! eigenfunctions orthonormal in L²(Ω). Each cutoff `m_n` is the mass of
//! one longitudinal Klein-Gordon field.

mod analytic;
mod bessel;
mod fd;
mod raster;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use analytic::{analytic_spectrum, analytic_spectrum_sampled, DEFAULT_SAMPLES};
pub use bessel::{bessel_j, bessel_zeros_below};
pub use fd::{fd_spectrum, rasterize, MAX_ITERATIONS, MIN_INTERIOR_POINTS, RESIDUAL_TOLERANCE};
pub use raster::RasterMask;

/// Relative eigenvalue gap below which neighbouring modes share a cluster.
pub const DEGENERACY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    Rectangle { a: f64, b: f64 },
    Disk { radius: f64 },
    Raster(RasterMask),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSection {
    shape: Shape,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {x}")))
    }
}

impl CrossSection {
    pub fn rectangle(a: f64, b: f64) -> Result<Self> {
        positive("rectangle side a", a)?;
        positive("rectangle side b", b)?;
        Ok(Self { shape: Shape::Rectangle { a, b } })
    }

    pub fn disk(radius: f64) -> Result<Self> {
        positive("disk radius", radius)?;
        Ok(Self { shape: Shape::Disk { radius } })
    }

    /// Masks are validated (connected, non-empty) when constructed.
    pub fn raster(mask: RasterMask) -> Self {
        Self { shape: Shape::Raster(mask) }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn shape_name(&self) -> &'static str {
        match self.shape {
            Shape::Rectangle { .. } => "rectangle",
            Shape::Disk { .. } => "disk",
            Shape::Raster(_) => "raster",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeClass {
    Tm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Angular {
    Cos,
    Sin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeLabel {
    Rectangle { p: u32, q: u32 },
    /// `J_order(j_{order,root} r/R)` times `cos` or `sin` of `order·θ`.
    Disk { order: u32, root: u32, angular: Angular },
    Numeric,
}

/// Points carrying eigenfunction samples. `weight` is the quadrature weight
/// of the discrete L² inner product; boundary points have weight zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub weight: Vec<f64>,
    pub on_boundary: Vec<bool>,
}

impl SampleGrid {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.x.iter().zip(&self.y).map(|(&x, &y)| f(x, y)).collect()
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.weight.iter().zip(u).zip(v).map(|((w, a), b)| w * a * b).sum()
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeEntry {
    /// 1-based position in the ascending spectrum.
    pub index: usize,
    pub class: ModeClass,
    pub label: ModeLabel,
    pub cutoff_mass: f64,
    /// Index of the first mode of this entry's degenerate cluster.
    pub cluster: usize,
    /// Eigenfunction samples on [`ModeSpectrum::grid`].
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectrum {
    pub entries: Vec<ModeEntry>,
    pub grid: SampleGrid,
    /// Grid spacing of the samples (FD lattice spacing for numerical spectra).
    pub resolution: f64,
}

impl ModeSpectrum {
    pub fn masses(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.cutoff_mass).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest deviation of the discrete Gram matrix from the identity, as
    /// `(max |⟨v_n, v_n⟩ - 1|, max_{n≠n′} |⟨v_n, v_n′⟩|)`.
    pub fn orthonormality_defect(&self) -> (f64, f64) {
        let mut diag: f64 = 0.0;
        let mut off: f64 = 0.0;
        for (a, ea) in self.entries.iter().enumerate() {
            for eb in &self.entries[a..] {
                let g = self.grid.inner(&ea.values, &eb.values);
                if ea.index == eb.index {
                    diag = diag.max((g - 1.0).abs());
                } else {
                    off = off.max(g.abs());
                }
            }
        }
        (diag, off)
    }

    /// Largest eigenfunction magnitude found on a boundary point.
    pub fn boundary_max(&self) -> f64 {
        self.entries
            .iter()
            .flat_map(|e| {
                e.values
                    .iter()
                    .zip(&self.grid.on_boundary)
                    .filter(|(_, &b)| b)
                    .map(|(v, _)| v.abs())
            })
            .fold(0.0, f64::max)
    }
}

/// L² norm of `test` minus its projection onto the spectrum's modes.
/// `test` holds samples on `ms.grid`.
pub fn check_completeness(ms: &ModeSpectrum, test: &[f64]) -> Result<f64> {
    if test.len() != ms.grid.len() {
        return Err(Error::domain(format!(
            "test function has {} samples, grid has {}",
            test.len(),
            ms.grid.len()
        )));
    }
    let mut rest = test.to_vec();
    for e in &ms.entries {
        let c = ms.grid.inner(test, &e.values);
        for (r, v) in rest.iter_mut().zip(&e.values) {
            *r -= c * v;
        }
    }
    Ok(ms.grid.norm(&rest))
}

/// Sets `cluster` from relative gaps in `m²`. Entries must be sorted.
fn assign_clusters(entries: &mut [ModeEntry]) {
    let mut start = 0;
    for n in 0..entries.len() {
        let lead = entries[start].cutoff_mass.powi(2);
        let here = entries[n].cutoff_mass.powi(2);
        if here - lead > DEGENERACY_TOLERANCE * lead {
            start = n;
        }
        entries[n].cluster = start + 1;
    }
}

/// Flips `values` so the first non-negligible interior sample is positive.
fn fix_sign(values: &mut [f64], on_boundary: &[bool]) {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let first = values
        .iter()
        .zip(on_boundary)
        .find(|(v, &b)| !b && v.abs() > 1e-10 * scale)
        .map(|(v, _)| *v);
    if first.is_some_and(|v| v < 0.0) {
        values.iter_mut().for_each(|v| *v = -*v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invalid_cross_sections() {
        assert!(CrossSection::rectangle(0.0, 1.0).is_err());
        assert!(CrossSection::rectangle(1.0, f64::INFINITY).is_err());
        assert!(CrossSection::disk(-1.0).is_err());
    }

    #[test]
    fn completeness_length_mismatch() {
        let ms = analytic_spectrum(&CrossSection::rectangle(1.0, 1.0).unwrap(), 2).unwrap();
        assert!(check_completeness(&ms, &[0.0; 3]).is_err());
    }
}
