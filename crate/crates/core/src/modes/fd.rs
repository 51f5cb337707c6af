use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::raster::RasterMask;
use super::{assign_clusters, fix_sign, CrossSection, ModeClass, ModeEntry, ModeLabel, ModeSpectrum, SampleGrid, Shape};
use crate::error::{Error, Result};

pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 10_000;
pub const MIN_INTERIOR_POINTS: usize = 16;

const START_SEED: u64 = 0x5eed_0fd5;

/// Lattice nodes strictly inside the cross-section. For rectangles the
/// lattice starts at the corner `(0, 0)`; for disks it is centred on the
/// origin. Returns the mask and the physical position of node `(0, 0)`.
pub fn rasterize(cs: &CrossSection, spacing: f64) -> Result<(RasterMask, (f64, f64))> {
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::domain(format!("spacing must be positive, got {spacing}")));
    }
    let slack = 1e-9 * spacing;
    match cs.shape() {
        Shape::Rectangle { a, b } => {
            let nx = (a / spacing - 1e-9).ceil() as usize + 1;
            let ny = (b / spacing - 1e-9).ceil() as usize + 1;
            let mut cells = Vec::with_capacity(nx * ny);
            for j in 0..ny {
                for i in 0..nx {
                    let (x, y) = (spacing * i as f64, spacing * j as f64);
                    cells.push(i > 0 && j > 0 && x < a - slack && y < b - slack);
                }
            }
            Ok((RasterMask::new(nx, ny, cells, spacing)?, (0.0, 0.0)))
        }
        Shape::Disk { radius } => {
            let half = (radius / spacing).ceil() as usize;
            let n = 2 * half + 1;
            let origin = -(half as f64) * spacing;
            let r2 = radius * radius * (1.0 - 1e-12);
            let mut cells = Vec::with_capacity(n * n);
            for j in 0..n {
                for i in 0..n {
                    let (x, y) = (origin + spacing * i as f64, origin + spacing * j as f64);
                    cells.push(x * x + y * y < r2);
                }
            }
            Ok((RasterMask::new(n, n, cells, spacing)?, (origin, origin)))
        }
        Shape::Raster(mask) => {
            if (mask.spacing() - spacing).abs() > 1e-12 * spacing {
                return Err(Error::domain(format!(
                    "raster mask spacing {} does not match requested spacing {spacing}",
                    mask.spacing()
                )));
            }
            Ok((mask.clone(), (0.0, 0.0)))
        }
    }
}

/// Cholesky factor of a symmetric positive definite band matrix, stored
/// row by row over columns `i - bw ..= i`.
struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.l[i * (self.bw + 1) + j + self.bw - i]
    }

    /// `entry(i, j)` gives the lower-band entries of the matrix, `j <= i`.
    fn factor(n: usize, bw: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut f = Self {
            n,
            bw,
            l: vec![0.0; n * (bw + 1)],
        };
        for i in 0..n {
            for j in i.saturating_sub(bw)..=i {
                let lo = i.saturating_sub(bw).max(j.saturating_sub(bw));
                let mut s = entry(i, j);
                for k in lo..j {
                    s -= f.at(i, k) * f.at(j, k);
                }
                let v = if i == j {
                    if s <= 0.0 {
                        return Err(Error::domain("discrete Laplacian is not positive definite"));
                    }
                    s.sqrt()
                } else {
                    s / f.at(j, j)
                };
                f.l[i * (bw + 1) + j + bw - i] = v;
            }
        }
        Ok(f)
    }

    fn solve(&self, b: &mut [f64]) {
        for i in 0..self.n {
            let mut s = b[i];
            for k in i.saturating_sub(self.bw)..i {
                s -= self.at(i, k) * b[k];
            }
            b[i] = s / self.at(i, i);
        }
        for i in (0..self.n).rev() {
            let mut s = b[i];
            for k in i + 1..(i + self.bw + 1).min(self.n) {
                s -= self.at(k, i) * b[k];
            }
            b[i] = s / self.at(i, i);
        }
    }
}

/// Negative 5-point Laplacian on the interior nodes of a mask.
struct Laplacian {
    /// Interior node coordinates, in unknown order.
    nodes: Vec<(isize, isize)>,
    /// Neighbour unknown indices of each unknown.
    neighbours: Vec<Vec<usize>>,
    inv_h2: f64,
}

impl Laplacian {
    fn new(mask: &RasterMask) -> Self {
        let (nx, ny) = (mask.nx(), mask.ny());
        let mut index = vec![usize::MAX; nx * ny];
        let mut nodes = Vec::new();
        for j in 0..ny as isize {
            for i in 0..nx as isize {
                if mask.get(i, j) {
                    index[j as usize * nx + i as usize] = nodes.len();
                    nodes.push((i, j));
                }
            }
        }
        let neighbours = nodes
            .iter()
            .map(|&(i, j)| {
                [(1, 0), (-1, 0), (0, 1), (0, -1)]
                    .iter()
                    .filter(|&&(di, dj)| mask.get(i + di, j + dj))
                    .map(|&(di, dj)| index[(j + dj) as usize * nx + (i + di) as usize])
                    .collect()
            })
            .collect();
        let h = mask.spacing();
        Self {
            nodes,
            neighbours,
            inv_h2: 1.0 / (h * h),
        }
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }

    fn bandwidth(&self) -> usize {
        self.neighbours
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| nb.iter().map(move |&k| i.abs_diff(k)))
            .max()
            .unwrap_or(0)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, nb) in self.neighbours.iter().enumerate() {
            let s: f64 = nb.iter().map(|&k| x[k]).sum();
            y[i] = (4.0 * x[i] - s) * self.inv_h2;
        }
    }

    fn factor(&self) -> Result<BandCholesky> {
        let bw = self.bandwidth();
        BandCholesky::factor(self.len(), bw, |i, j| {
            if i == j {
                4.0 * self.inv_h2
            } else if self.neighbours[i].contains(&j) {
                -self.inv_h2
            } else {
                0.0
            }
        })
    }
}

/// Lowest `count` eigenpairs of the 5-point Dirichlet Laplacian on the
/// lattice of the given spacing, by inverse subspace iteration with
/// Rayleigh-Ritz projection.
pub fn fd_spectrum(cs: &CrossSection, count: usize, spacing: f64) -> Result<ModeSpectrum> {
    if count == 0 {
        return Err(Error::domain("mode count must be at least 1"));
    }
    let (mask, origin) = rasterize(cs, spacing)?;
    let (cols, rows) = mask.extent();
    if cols < MIN_INTERIOR_POINTS || rows < MIN_INTERIOR_POINTS {
        return Err(Error::Resolution(format!(
            "spacing {spacing} leaves {cols}×{rows} interior points; at least \
             {MIN_INTERIOR_POINTS} per side are required"
        )));
    }
    let op = Laplacian::new(&mask);
    let n = op.len();
    if count > n {
        return Err(Error::Resolution(format!("{count} modes requested from {n} unknowns")));
    }
    let chol = op.factor()?;
    let (lambda, vectors) = subspace_iteration(&op, &chol, count)?;

    let grid = sample_grid(&mask, origin);
    let h = mask.spacing();
    let mut entries: Vec<ModeEntry> = lambda
        .iter()
        .zip(vectors)
        .enumerate()
        .map(|(idx, (&l, v))| {
            let mut values = vec![0.0; grid.len()];
            values[..n].iter_mut().zip(&v).for_each(|(s, x)| *s = x / h);
            fix_sign(&mut values, &grid.on_boundary);
            ModeEntry {
                index: idx + 1,
                class: ModeClass::Tm,
                label: ModeLabel::Numeric,
                cutoff_mass: l.sqrt(),
                cluster: 0,
                values,
            }
        })
        .collect();
    assign_clusters(&mut entries);
    Ok(ModeSpectrum {
        entries,
        grid,
        resolution: h,
    })
}

/// Interior nodes first (unknown order), then the exterior nodes adjacent
/// to them as zero-weight boundary samples.
fn sample_grid(mask: &RasterMask, origin: (f64, f64)) -> SampleGrid {
    let h = mask.spacing();
    let mut grid = SampleGrid {
        x: Vec::new(),
        y: Vec::new(),
        weight: Vec::new(),
        on_boundary: Vec::new(),
    };
    let mut push = |i: isize, j: isize, inside: bool| {
        grid.x.push(origin.0 + h * i as f64);
        grid.y.push(origin.1 + h * j as f64);
        grid.weight.push(if inside { h * h } else { 0.0 });
        grid.on_boundary.push(!inside);
    };
    let (nx, ny) = (mask.nx() as isize, mask.ny() as isize);
    for j in 0..ny {
        for i in 0..nx {
            if mask.get(i, j) {
                push(i, j, true);
            }
        }
    }
    for j in -1..=ny {
        for i in -1..=nx {
            let touches = [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .any(|&(di, dj)| mask.get(i + di, j + dj));
            if !mask.get(i, j) && touches {
                push(i, j, false);
            }
        }
    }
    grid
}

fn subspace_iteration(op: &Laplacian, chol: &BandCholesky, count: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = op.len();
    let p = (count + (count / 2).max(8)).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut x = DMatrix::from_fn(n, p, |_, _| rng.gen_range(-1.0..1.0));
    let mut worst = (0, f64::INFINITY);
    for _ in 0..MAX_ITERATIONS {
        let cols: Vec<Vec<f64>> = (0..p)
            .into_par_iter()
            .map(|c| {
                let mut v: Vec<f64> = x.column(c).iter().copied().collect();
                chol.solve(&mut v);
                v
            })
            .collect();
        let y = DMatrix::from_fn(n, p, |r, c| cols[c][r]);
        let q = y.qr().q();
        let aq_cols: Vec<Vec<f64>> = (0..p)
            .into_par_iter()
            .map(|c| {
                let v: Vec<f64> = q.column(c).iter().copied().collect();
                let mut out = vec![0.0; n];
                op.apply(&v, &mut out);
                out
            })
            .collect();
        let aq = DMatrix::from_fn(n, p, |r, c| aq_cols[c][r]);
        let h = q.transpose() * &aq;
        let h = (&h + h.transpose()) * 0.5;
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let v = DMatrix::from_fn(p, p, |r, c| eig.eigenvectors[(r, order[c])]);
        let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        x = &q * &v;
        let ax = &aq * &v;

        worst = (0, 0.0);
        for i in 0..count {
            let r: DVector<f64> = ax.column(i) - x.column(i) * theta[i];
            let res = r.norm() / theta[i].abs();
            if !(res <= worst.1) {
                worst = (i + 1, res);
            }
        }
        if worst.1 < RESIDUAL_TOLERANCE {
            let vectors = (0..count).map(|i| x.column(i).iter().copied().collect()).collect();
            return Ok((theta[..count].to_vec(), vectors));
        }
    }
    Err(Error::EigenNotConverged {
        iterations: MAX_ITERATIONS,
        pair: worst.0,
        residual: worst.1,
    })
}
