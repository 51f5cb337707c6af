use std::f64::consts::PI;

use super::bessel::{bessel_j, bessel_zeros_below};
use super::{assign_clusters, fix_sign, Angular, CrossSection, ModeClass, ModeEntry, ModeLabel, ModeSpectrum, SampleGrid, Shape, DEGENERACY_TOLERANCE};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Default samples per side (rectangle) or radial nodes (disk).
pub const DEFAULT_SAMPLES: usize = 64;

/// Lowest `count` closed-form TM modes of a rectangle or disk.
pub fn analytic_spectrum(cs: &CrossSection, count: usize) -> Result<ModeSpectrum> {
    analytic_spectrum_sampled(cs, count, DEFAULT_SAMPLES)
}

/// As [`analytic_spectrum`] with an explicit sampling density. The grid is
/// refined further when the requested modes need it.
pub fn analytic_spectrum_sampled(cs: &CrossSection, count: usize, samples: usize) -> Result<ModeSpectrum> {
    if count == 0 {
        return Err(Error::domain("mode count must be at least 1"));
    }
    if samples < 2 {
        return Err(Error::domain("at least two samples per side are required"));
    }
    match *cs.shape() {
        Shape::Rectangle { a, b } => Ok(rectangle(a, b, count, samples)),
        Shape::Disk { radius } => Ok(disk(radius, count, samples)),
        Shape::Raster(_) => Err(Error::UnsupportedShape {
            operation: "analytic_spectrum",
            shape: "raster",
        }),
    }
}

/// Sorts by `key`, then orders each near-degenerate cluster by `tie`.
fn sort_clustered<T>(items: &mut [T], key: impl Fn(&T) -> f64, tie: impl Fn(&T, &T) -> std::cmp::Ordering) {
    items.sort_by(|x, y| key(x).total_cmp(&key(y)));
    let mut start = 0;
    while start < items.len() {
        let lead = key(&items[start]);
        let mut end = start + 1;
        while end < items.len() && key(&items[end]) - lead <= DEGENERACY_TOLERANCE * lead {
            end += 1;
        }
        items[start..end].sort_by(&tie);
        start = end;
    }
}

fn rectangle(a: f64, b: f64, count: usize, samples: usize) -> ModeSpectrum {
    let limit = count as u32;
    let m2 = |p: u32, q: u32| PI * PI * ((p * p) as f64 / (a * a) + (q * q) as f64 / (b * b));
    let mut pairs: Vec<(u32, u32)> = (1..=limit).flat_map(|p| (1..=limit).map(move |q| (p, q))).collect();
    sort_clustered(&mut pairs, |&(p, q)| m2(p, q), |x, y| x.cmp(y));
    pairs.truncate(count);

    let top = pairs.iter().map(|&(p, q)| p.max(q)).max().unwrap_or(1) as usize;
    let n = samples.max(4 * top);
    let (hx, hy) = (a / n as f64, b / n as f64);
    let mut grid = SampleGrid {
        x: Vec::new(),
        y: Vec::new(),
        weight: Vec::new(),
        on_boundary: Vec::new(),
    };
    for j in 0..=n {
        for i in 0..=n {
            let edge = i == 0 || j == 0 || i == n || j == n;
            grid.x.push(hx * i as f64);
            grid.y.push(hy * j as f64);
            grid.weight.push(if edge { 0.0 } else { hx * hy });
            grid.on_boundary.push(edge);
        }
    }

    let norm = 2.0 / (a * b).sqrt();
    let mut entries: Vec<ModeEntry> = pairs
        .iter()
        .enumerate()
        .map(|(idx, &(p, q))| {
            let sx: Vec<f64> = (0..=n).map(|i| (PI * (p as usize * i) as f64 / n as f64).sin()).collect();
            let sy: Vec<f64> = (0..=n).map(|j| (PI * (q as usize * j) as f64 / n as f64).sin()).collect();
            let mut values = Vec::with_capacity((n + 1) * (n + 1));
            for j in 0..=n {
                for i in 0..=n {
                    let edge = i == 0 || j == 0 || i == n || j == n;
                    values.push(if edge { 0.0 } else { norm * sx[i] * sy[j] });
                }
            }
            fix_sign(&mut values, &grid.on_boundary);
            ModeEntry {
                index: idx + 1,
                class: ModeClass::Tm,
                label: ModeLabel::Rectangle { p, q },
                cutoff_mass: m2(p, q).sqrt(),
                cluster: 0,
                values,
            }
        })
        .collect();
    assign_clusters(&mut entries);
    ModeSpectrum {
        entries,
        grid,
        resolution: hx.max(hy),
    }
}

struct DiskMode {
    order: u32,
    root: u32,
    angular: Angular,
    zero: f64,
}

/// The lowest `count` modes counted with their cos/sin multiplicity.
fn disk_modes(count: usize) -> Vec<DiskMode> {
    let mut limit: f64 = 8.0;
    loop {
        let mut modes = Vec::new();
        // j_{ℓ,1} > ℓ, so orders at or above the limit contribute nothing
        for order in 0..limit.ceil() as u32 {
            for (s, zero) in bessel_zeros_below(order, limit).into_iter().enumerate() {
                let root = s as u32 + 1;
                modes.push(DiskMode { order, root, angular: Angular::Cos, zero });
                if order > 0 {
                    modes.push(DiskMode { order, root, angular: Angular::Sin, zero });
                }
            }
        }
        if modes.len() >= count {
            sort_clustered(&mut modes, |m| m.zero, |x, y| {
                (x.order, x.root, x.angular).cmp(&(y.order, y.root, y.angular))
            });
            modes.truncate(count);
            return modes;
        }
        limit *= 1.5;
    }
}

fn disk(radius: f64, count: usize, samples: usize) -> ModeSpectrum {
    let modes = disk_modes(count);
    let max_zero = modes.iter().map(|m| m.zero).fold(0.0, f64::max);
    let max_order = modes.iter().map(|m| m.order).max().unwrap_or(0) as usize;
    let n_r = samples.max(max_zero.ceil() as usize + 32);
    let n_theta = (2 * samples).max(4 * max_order + 8);

    let mut radii = Vec::new();
    let mut radial_w = Vec::new();
    GaussLegendre::new(n_r).push_mapped(0.0, radius, &mut radii, &mut radial_w);
    let d_theta = 2.0 * PI / n_theta as f64;
    let thetas: Vec<f64> = (0..n_theta).map(|j| d_theta * j as f64).collect();

    let mut grid = SampleGrid {
        x: Vec::new(),
        y: Vec::new(),
        weight: Vec::new(),
        on_boundary: Vec::new(),
    };
    for (r, w) in radii.iter().chain(std::iter::once(&radius)).zip(radial_w.iter().chain(std::iter::once(&0.0))) {
        for &th in &thetas {
            grid.x.push(r * th.cos());
            grid.y.push(r * th.sin());
            grid.weight.push(w * r * d_theta);
            grid.on_boundary.push(*r == radius);
        }
    }

    let mut entries: Vec<ModeEntry> = modes
        .iter()
        .enumerate()
        .map(|(idx, m)| {
            // ∫₀^R J_ℓ(j r/R)² r dr = R² J_{ℓ+1}(j)² / 2
            let angular_norm = if m.order == 0 { 2.0 * PI } else { PI };
            let norm = (2.0 / (angular_norm * radius * radius)).sqrt() / bessel_j(m.order + 1, m.zero).abs();
            let radial: Vec<f64> = radii.iter().map(|r| norm * bessel_j(m.order, m.zero * r / radius)).collect();
            let angular: Vec<f64> = thetas
                .iter()
                .map(|th| {
                    let arg = m.order as f64 * th;
                    match m.angular {
                        Angular::Cos => arg.cos(),
                        Angular::Sin => arg.sin(),
                    }
                })
                .collect();
            let mut values = Vec::with_capacity(grid.len());
            for rv in &radial {
                values.extend(angular.iter().map(|a| rv * a));
            }
            values.extend(std::iter::repeat_n(0.0, n_theta));
            fix_sign(&mut values, &grid.on_boundary);
            ModeEntry {
                index: idx + 1,
                class: ModeClass::Tm,
                label: ModeLabel::Disk {
                    order: m.order,
                    root: m.root,
                    angular: m.angular,
                },
                cutoff_mass: m.zero / radius,
                cluster: 0,
                values,
            }
        })
        .collect();
    assign_clusters(&mut entries);
    ModeSpectrum {
        entries,
        grid,
        resolution: radius / n_r as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::check_completeness;
    use proptest::prelude::*;

    fn rect(a: f64, b: f64) -> CrossSection {
        CrossSection::rectangle(a, b).unwrap()
    }

    #[test]
    fn square_ground_state() {
        let ms = analytic_spectrum(&rect(PI, PI), 1).unwrap();
        assert!((ms.entries[0].cutoff_mass.powi(2) - 2.0).abs() < 1e-14);
        // sin x sin y solves the eigenproblem: check the 5-point residual
        // at an interior sample against m² = 2 up to O(h²)
        let h = PI / 64.0;
        let v = |x: f64, y: f64| (x.sin()) * (y.sin());
        let (x, y) = (1.1, 0.7);
        let lap = (v(x + h, y) + v(x - h, y) + v(x, y + h) + v(x, y - h) - 4.0 * v(x, y)) / (h * h);
        assert!((lap + 2.0 * v(x, y)).abs() < 1e-3);
    }

    #[test]
    fn two_by_one_rectangle() {
        let ms = analytic_spectrum(&rect(2.0 * PI, PI), 2).unwrap();
        let m2: Vec<f64> = ms.masses().iter().map(|m| m * m).collect();
        assert!((m2[0] - 1.25).abs() < 1e-14);
        assert!((m2[1] - 2.0).abs() < 1e-14);
        let mut oracle: Vec<f64> = (1..6).flat_map(|p| (1..6).map(move |q| (p * p) as f64 / 4.0 + (q * q) as f64)).collect();
        oracle.sort_by(f64::total_cmp);
        let ms = analytic_spectrum(&rect(2.0 * PI, PI), 8).unwrap();
        for (m, o) in ms.masses().iter().zip(&oracle) {
            assert!((m * m - o).abs() < 1e-13);
        }
    }

    #[test]
    fn square_degeneracy_order() {
        let ms = analytic_spectrum(&rect(1.0, 1.0), 3).unwrap();
        let labels: Vec<ModeLabel> = ms.entries.iter().map(|e| e.label).collect();
        assert_eq!(labels[1], ModeLabel::Rectangle { p: 1, q: 2 });
        assert_eq!(labels[2], ModeLabel::Rectangle { p: 2, q: 1 });
        assert_eq!(ms.entries[1].cluster, 2);
        assert_eq!(ms.entries[2].cluster, 2);
        assert_eq!(ms.entries[0].cluster, 1);
    }

    #[test]
    fn disk_ground_state_and_multiplicity() {
        let ms = analytic_spectrum(&CrossSection::disk(1.0).unwrap(), 6).unwrap();
        assert!((ms.entries[0].cutoff_mass - 2.404825557695773).abs() < 1e-12);
        assert_eq!(ms.entries[1].cluster, 2);
        assert_eq!(ms.entries[2].cluster, 2);
        assert!((ms.entries[1].cutoff_mass - 3.831705970207512).abs() < 1e-12);
        let ms2 = analytic_spectrum(&CrossSection::disk(2.0).unwrap(), 1).unwrap();
        assert!((ms2.entries[0].cutoff_mass - 2.404825557695773 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn raster_unsupported() {
        let mask = crate::modes::RasterMask::parse("spacing 1\n010\n".as_bytes()).unwrap();
        assert!(matches!(
            analytic_spectrum(&CrossSection::raster(mask), 1),
            Err(Error::UnsupportedShape { .. })
        ));
        assert!(analytic_spectrum(&rect(1.0, 1.0), 0).is_err());
    }

    #[test]
    fn orthonormal_and_zero_on_boundary() {
        for cs in [rect(2.0, 1.3), rect(PI, PI), CrossSection::disk(0.7).unwrap()] {
            let ms = analytic_spectrum(&cs, 30).unwrap();
            let (diag, off) = ms.orthonormality_defect();
            assert!(diag < 1e-8 && off < 1e-8, "{}: {diag} {off}", cs.shape_name());
            assert_eq!(ms.boundary_max(), 0.0);
            let m = ms.masses();
            assert!(m.windows(2).all(|w| w[0] <= w[1]) && m[0] > 0.0);
        }
    }

    #[test]
    fn sign_convention() {
        let ms = analytic_spectrum(&rect(1.0, 2.0), 10).unwrap();
        for e in &ms.entries {
            let first = e
                .values
                .iter()
                .zip(&ms.grid.on_boundary)
                .find(|(v, &b)| !b && v.abs() > 1e-9)
                .unwrap();
            assert!(*first.0 > 0.0);
        }
    }

    #[test]
    fn completeness() {
        let cs = rect(PI, PI);
        let ms = analytic_spectrum(&cs, 100).unwrap();
        let v1 = ms.entries[0].values.clone();
        let one = analytic_spectrum(&cs, 1).unwrap();
        assert!(check_completeness(&one, &v1).unwrap() < 1e-8);

        // smooth bump vanishing on the walls
        let bump = |x: f64, y: f64| (x * (PI - x) * y * (PI - y)).powi(2);
        let mut previous = f64::INFINITY;
        let mut residuals = Vec::new();
        for count in [25, 50, 100] {
            let ms = analytic_spectrum(&cs, count).unwrap();
            let u = ms.grid.sample(bump);
            let r = check_completeness(&ms, &u).unwrap();
            residuals.push(r / ms.grid.norm(&u));
            assert!(r < previous);
            previous = r;
        }
        assert!(residuals[0] < 0.1, "{residuals:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn enlarging_rectangle_lowers_masses(a in 0.5f64..3.0, b in 0.5f64..3.0, sa in 1.0f64..2.0, sb in 1.0f64..2.0) {
            let small = analytic_spectrum_sampled(&rect(a, b), 12, 8).unwrap().masses();
            let large = analytic_spectrum_sampled(&rect(a * sa, b * sb), 12, 8).unwrap().masses();
            for (s, l) in small.iter().zip(&large) {
                prop_assert!(l <= s);
            }
        }
    }
}
