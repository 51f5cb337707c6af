use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use num_complex::Complex64;

use waveguide_photons::bounds::{
    check_lightcone_decay, fit_universal_bound, BoundFit, DecaySource, Ray, UniversalOptions, Verdict,
    VelocityTimeGrid,
};
use waveguide_photons::correlators::{
    amplitude_biphoton, amplitude_single, asymptotic_single, entangled_spacetime_profile, probability_biphoton,
    scan_biphoton, scan_single,
};
use waveguide_photons::modes::{analytic_spectrum, fd_spectrum, CrossSection, ModeLabel, ModeSpectrum, RasterMask};
use waveguide_photons::quadrature::{osc_integrate_1d, OscIntegralProblem};
use waveguide_photons::wavepackets::{BiphotonSpec, PumpSpectrum, WavePacketSpec};
use waveguide_photons::{DispersionRelation, SpacetimePoint};

use crate::config::{
    self, BiphotonFamily, Config, DecaySourceName, Loaded, Packet, PacketFamily, ShapeName, Solver, Waveguide,
};
use crate::output::{line_plot, num, write_plot, Csv, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Modes,
    Single,
    Biphoton,
    Bounds,
    Validate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Modes => "modes",
            Command::Single => "single",
            Command::Biphoton => "biphoton",
            Command::Bounds => "bounds",
            Command::Validate => "validate",
        }
    }
}

pub struct Run<'a> {
    loaded: &'a Loaded,
    cfg: Config,
    out: PathBuf,
    command: Command,
}

pub const EFFECTIVE_CONFIG: &str = "effective_config.toml";

pub fn execute(command: Command, loaded: &Loaded, cfg: Config) -> Result<()> {
    let out = cfg.output.clone().expect("output resolved");
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let echo = toml::to_string(&cfg).context("serializing effective config")?;
    fs::write(out.join(EFFECTIVE_CONFIG), echo).context("writing effective config")?;
    let run = Run {
        loaded,
        cfg,
        out,
        command,
    };
    match command {
        Command::Modes => run.modes(),
        Command::Single => run.single(),
        Command::Biphoton => run.biphoton(),
        Command::Bounds => run.bounds(),
        Command::Validate => run.validate(),
    }
}

fn cross_section(w: &Waveguide) -> Result<CrossSection> {
    Ok(match w.shape.expect("shape resolved") {
        ShapeName::Rectangle => CrossSection::rectangle(w.a.unwrap_or(0.0), w.b.unwrap_or(0.0))?,
        ShapeName::Disk => CrossSection::disk(w.radius.unwrap_or(0.0))?,
        ShapeName::Raster => {
            let path = w.raster.as_ref().expect("raster path resolved");
            let mask = RasterMask::from_file(path).with_context(|| format!("reading raster {}", path.display()))?;
            CrossSection::raster(mask)
        }
    })
}

fn spectrum(w: &Waveguide) -> Result<ModeSpectrum> {
    let cs = cross_section(w)?;
    let count = w.count.expect("count resolved");
    Ok(match w.solver.expect("solver resolved") {
        Solver::Analytic => analytic_spectrum(&cs, count)?,
        Solver::Fd => fd_spectrum(&cs, count, w.spacing.expect("spacing resolved"))?,
    })
}

fn packet(p: &Packet) -> Result<WavePacketSpec> {
    let g = match p.family {
        PacketFamily::Gaussian => {
            let [re, im] = p.amplitude.unwrap_or([1.0, 0.0]);
            WavePacketSpec::gaussian(
                p.center.unwrap_or(0.0),
                p.width.unwrap_or(0.0),
                Complex64::new(re, im),
            )?
        }
        PacketFamily::Table => {
            let path = p.table.as_ref().expect("table path resolved");
            WavePacketSpec::table_from_csv(path).with_context(|| format!("reading packet table {}", path.display()))?
        }
    };
    // an all-zero packet is kept as is rather than rejected
    if p.normalize.unwrap_or(true) && g.norm_squared()? > 0.0 {
        Ok(g.normalized()?)
    } else {
        Ok(g)
    }
}

impl Run<'_> {
    fn require<'b, T>(&self, value: Option<&'b T>, section: &str) -> Result<&'b T> {
        match value {
            Some(v) => Ok(v),
            None => Err(config::ConfigError {
                path: self.loaded.path.clone(),
                line: None,
                message: format!("section [{section}] is required by `{}`", self.command.name()),
            }
            .into()),
        }
    }

    fn tolerance(&self) -> f64 {
        self.cfg.tolerance.unwrap_or(config::DEFAULT_TOLERANCE)
    }

    fn dispersion(&self) -> Result<DispersionRelation> {
        let w = self.require(self.cfg.waveguide.as_ref(), "waveguide")?;
        if let Some(m) = w.mass {
            return Ok(DispersionRelation::new(m)?);
        }
        let ms = spectrum(w)?;
        let mode = w.mode.expect("mode resolved");
        let entry = ms.entries.get(mode - 1).context("mode index beyond computed spectrum")?;
        Ok(DispersionRelation::new(entry.cutoff_mass)?)
    }

    fn packet(&self) -> Result<WavePacketSpec> {
        packet(self.require(self.cfg.packet.as_ref(), "packet")?)
    }

    fn biphoton_spec(&self) -> Result<BiphotonSpec> {
        let b = self.require(self.cfg.biphoton.as_ref(), "biphoton")?;
        let f = match b.family {
            BiphotonFamily::Separable => {
                let g1 = self.packet()?;
                let g2 = packet(self.require(self.cfg.packet2.as_ref(), "packet2")?)?;
                BiphotonSpec::separable_symmetrized(g1, g2)
            }
            BiphotonFamily::GaussianCorrelated => BiphotonSpec::gaussian_correlated(
                b.pump_center.unwrap_or(0.0),
                b.pump_width.unwrap_or(0.0),
                b.relative_width.unwrap_or(0.0),
            )?,
            BiphotonFamily::Yls => {
                let pump = PumpSpectrum::new(b.pump_center.unwrap_or(0.0), b.pump_width.unwrap_or(0.0))?;
                let scale = b.pump_scale.unwrap_or(1.0);
                match b.k_min {
                    Some(k) => BiphotonSpec::yls_with_cutoff(pump, scale, k)?,
                    None => BiphotonSpec::yls(pump, scale)?,
                }
            }
        };
        Ok(f.scaled(Complex64::new(b.scale.unwrap_or(1.0), 0.0)))
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn modes(&self) -> Result<()> {
        let w = self.require(self.cfg.waveguide.as_ref(), "waveguide")?;
        if w.shape.is_none() {
            return Err(self.loaded.error("waveguide", "mass", "`modes` needs a cross-section `shape`, not a mass").into());
        }
        let ms = spectrum(w)?;
        let mut csv = Csv::new(&["index", "label", "cutoff_mass", "mass_squared", "cluster"]);
        for e in &ms.entries {
            let label = match e.label {
                ModeLabel::Rectangle { p, q } => format!("TM{p}{q}"),
                ModeLabel::Disk { order, root, angular } => format!("TM{order}{root}-{angular:?}").to_lowercase(),
                ModeLabel::Numeric => "fd".to_string(),
            };
            csv.row(vec![
                e.index.to_string(),
                label,
                num(e.cutoff_mass),
                num(e.cutoff_mass * e.cutoff_mass),
                e.cluster.to_string(),
            ]);
        }
        csv.write(&self.path("modes.csv"))?;
        let series = Series {
            label: "m_n".into(),
            points: ms.entries.iter().map(|e| (e.index as f64, e.cutoff_mass)).collect(),
        };
        write_plot(
            &self.path("modes.svg"),
            &line_plot("cutoff masses", "mode index n", "m_n", &[series], false),
        )
    }

    fn single(&self) -> Result<()> {
        let d = self.dispersion()?;
        let g = self.packet()?;
        let scan = self.require(self.cfg.single.as_ref(), "single")?;
        let times = scan.times.values();
        let zs = scan.z.values();
        let tol = self.tolerance();

        let mut csv = Csv::new(&["t", "z", "re", "im", "probability", "error_estimate", "converged"]);
        let mut series = Vec::new();
        let mut failed = 0;
        for &t in &times {
            let pts: Vec<SpacetimePoint> = zs.iter().map(|&z| SpacetimePoint::new(z, t)).collect();
            let res = scan_single(&g, &d, &pts, tol)?;
            for e in &res.entries {
                failed += usize::from(!e.converged);
                csv.row(vec![
                    num(t),
                    num(e.point.z),
                    num(e.amplitude.re),
                    num(e.amplitude.im),
                    num(e.probability),
                    num(e.error_estimate),
                    e.converged.to_string(),
                ]);
            }
            series.push(Series {
                label: format!("t = {t}"),
                points: res.entries.iter().map(|e| (e.point.z, e.probability)).collect(),
            });
        }
        csv.write(&self.path("single_scan.csv"))?;
        write_plot(
            &self.path("single_scan.svg"),
            &line_plot("single-photon detection probability", "z", "P(z,t)", &series, false),
        )?;

        if let (Some(v), Some(rt)) = (scan.velocity, scan.ray_times.as_ref()) {
            let ts: Vec<f64> = rt.values();
            let pts: Vec<SpacetimePoint> = ts.iter().map(|&t| SpacetimePoint::on_ray(v, t)).collect();
            let res = scan_single(&g, &d, &pts, tol)?;
            let mut csv = Csv::new(&[
                "t",
                "z",
                "p_quadrature",
                "p_asymptotic",
                "relative_difference",
                "guard",
                "guard_ok",
            ]);
            let (mut quad, mut asym) = (Vec::new(), Vec::new());
            for (e, &t) in res.entries.iter().zip(&ts) {
                failed += usize::from(!e.converged);
                let (pa, guard, ok) = if t > 0.0 {
                    let a = asymptotic_single(&g, &d, v, t)?;
                    (a.probability, a.guard, a.guard_ok)
                } else {
                    (f64::NAN, 0.0, false)
                };
                let rel = if pa > 0.0 { (e.probability - pa).abs() / pa } else { f64::NAN };
                csv.row(vec![
                    num(t),
                    num(e.point.z),
                    num(e.probability),
                    num(pa),
                    num(rel),
                    num(guard),
                    ok.to_string(),
                ]);
                quad.push((t, t * e.probability));
                asym.push((t, t * pa));
            }
            csv.write(&self.path("single_ray.csv"))?;
            let series = [
                Series {
                    label: "quadrature".into(),
                    points: quad,
                },
                Series {
                    label: "stationary phase".into(),
                    points: asym,
                },
            ];
            write_plot(
                &self.path("single_ray.svg"),
                &line_plot(&format!("t·P(vt, t) on v = {v}"), "t", "t·P", &series, false),
            )?;
        }
        if failed > 0 {
            bail!("single: {failed} points did not reach tolerance {tol:e} (see converged column)");
        }
        Ok(())
    }

    fn biphoton(&self) -> Result<()> {
        let d = self.dispersion()?;
        let f = self.biphoton_spec()?;
        let scan = self.require(self.cfg.pair.as_ref(), "pair")?;
        let tol = self.tolerance();
        let z1 = scan.z1.values();
        let z2 = scan.z2.values();
        let axis1: Vec<SpacetimePoint> = z1.iter().map(|&z| SpacetimePoint::new(z, scan.t1)).collect();
        let axis2: Vec<SpacetimePoint> = z2.iter().map(|&z| SpacetimePoint::new(z, scan.t2)).collect();
        let res = scan_biphoton(&f, &d, &axis1, &axis2, tol)?;

        let mut csv = Csv::new(&["z1", "t1", "z2", "t2", "re", "im", "probability", "error_estimate", "converged"]);
        let mut failed = 0;
        for e in &res.result.entries {
            let p2 = e.partner.expect("pair entry");
            failed += usize::from(!e.converged);
            csv.row(vec![
                num(e.point.z),
                num(e.point.t),
                num(p2.z),
                num(p2.t),
                num(e.amplitude.re),
                num(e.amplitude.im),
                num(e.probability),
                num(e.error_estimate),
                e.converged.to_string(),
            ]);
        }
        csv.write(&self.path("biphoton_scan.csv"))?;

        let picks = |n: usize| -> Vec<usize> {
            let k = n.min(4);
            (0..k).map(|i| if k == 1 { 0 } else { i * (n - 1) / (k - 1) }).collect()
        };
        let along_z1: Vec<Series> = picks(z2.len())
            .into_iter()
            .map(|q| Series {
                label: format!("z2 = {}", z2[q]),
                points: (0..z1.len()).map(|p| (z1[p], res.entry(p, q).probability)).collect(),
            })
            .collect();
        let along_z2: Vec<Series> = picks(z1.len())
            .into_iter()
            .map(|p| Series {
                label: format!("z1 = {}", z1[p]),
                points: (0..z2.len()).map(|q| (z2[q], res.entry(p, q).probability)).collect(),
            })
            .collect();
        write_plot(
            &self.path("biphoton_z1.svg"),
            &line_plot(&format!("joint probability, t1 = {}, t2 = {}", scan.t1, scan.t2), "z1", "P", &along_z1, false),
        )?;
        write_plot(
            &self.path("biphoton_z2.svg"),
            &line_plot(&format!("joint probability, t1 = {}, t2 = {}", scan.t1, scan.t2), "z2", "P", &along_z2, false),
        )?;

        if let (Some(v1), Some(v2)) = (scan.profile_v1.as_ref(), scan.profile_v2.as_ref()) {
            let (v1, v2) = (v1.values(), v2.values());
            let prof = entangled_spacetime_profile(&f, &d, &v1, &v2);
            let mut csv = Csv::new(&["v1", "v2", "profile", "inside_light_cone"]);
            for p in &prof {
                csv.row(vec![
                    num(p.v1),
                    num(p.v2),
                    p.value.map(num).unwrap_or_default(),
                    p.value.is_some().to_string(),
                ]);
            }
            csv.write(&self.path("biphoton_profile.csv"))?;
            let series: Vec<Series> = picks(v2.len())
                .into_iter()
                .map(|q| Series {
                    label: format!("v2 = {}", v2[q]),
                    points: (0..v1.len())
                        .filter_map(|p| prof[p * v2.len() + q].value.map(|x| (v1[p], x)))
                        .collect(),
                })
                .collect();
            write_plot(
                &self.path("biphoton_profile.svg"),
                &line_plot("spacetime footprint |f(k1(v1), k2(v2))|²", "v1", "|f|²", &series, false),
            )?;
        }
        if failed > 0 {
            bail!("biphoton: {failed} pairs did not reach tolerance {tol:e} (see converged column)");
        }
        Ok(())
    }

    fn bounds(&self) -> Result<()> {
        let d = self.dispersion()?;
        let b = self.require(self.cfg.bounds.as_ref(), "bounds")?;
        let mut fits: Vec<BoundFit> = Vec::new();

        if let Some(u) = &b.universal {
            let f = self.biphoton_spec()?;
            let grid = VelocityTimeGrid::new(u.velocities.values(), u.times.values())?;
            let opts = UniversalOptions {
                tolerance: u.tolerance.unwrap_or(1e-6),
                quadrature_max_time: u.quadrature_max_time.unwrap_or(1000.0),
                t0_points: u.t0_points.unwrap_or(waveguide_photons::bounds::T0_GRID_POINTS),
                ..UniversalOptions::default()
            };
            let fit = fit_universal_bound(&f, &d, &grid, &opts)?;
            let mut csv = Csv::new(&["t0", "constant"]);
            for &(t0, c) in &fit.t0_profile {
                csv.row(vec![num(t0), num(c)]);
            }
            csv.write(&self.path("t0_profile.csv"))?;
            let series = Series {
                label: "C(t0)".into(),
                points: fit.t0_profile.iter().map(|&(t, c)| (t.log10(), c)).collect(),
            };
            write_plot(
                &self.path("t0_profile.svg"),
                &line_plot("universal bound constant vs t0", "log10 t0", "C(t0)", &[series], false),
            )?;
            fits.push(fit);
        }

        if let Some(l) = &b.lightcone {
            let rays = l
                .rays
                .iter()
                .map(|r| Ray::new(r.t, r.z.values()))
                .collect::<waveguide_photons::Result<Vec<_>>>()?;
            let g;
            let f;
            let source = match l.source {
                DecaySourceName::Single => {
                    g = self.packet()?;
                    DecaySource::Single(&g)
                }
                DecaySourceName::Biphoton => {
                    f = self.biphoton_spec()?;
                    let [z, t] = l.frozen.expect("frozen resolved");
                    DecaySource::Biphoton {
                        f: &f,
                        frozen: SpacetimePoint::new(z, t),
                    }
                }
            };
            let tol = self.tolerance();
            fits.extend(check_lightcone_decay(source, &d, &rays, &l.orders, tol)?);

            let mut csv = Csv::new(&["t", "z", "probability", "converged"]);
            let mut series = Vec::new();
            for ray in &rays {
                let pts: Vec<SpacetimePoint> = ray.z.iter().map(|&z| SpacetimePoint::new(z, ray.t)).collect();
                let entries = match source {
                    DecaySource::Single(g) => scan_single(g, &d, &pts, tol)?.entries,
                    DecaySource::Biphoton { f, frozen } => scan_biphoton(f, &d, &pts, &[frozen], tol)?.result.entries,
                };
                for e in &entries {
                    csv.row(vec![num(ray.t), num(e.point.z), num(e.probability), e.converged.to_string()]);
                }
                series.push(Series {
                    label: format!("t = {}", ray.t),
                    points: entries.iter().map(|e| ((1.0 + e.point.z.abs()).log10(), e.probability)).collect(),
                });
            }
            csv.write(&self.path("lightcone_scan.csv"))?;
            write_plot(
                &self.path("lightcone_scan.svg"),
                &line_plot("decay outside the light cone", "log10(1+|z|)", "P", &series, true),
            )?;
        }
        if fits.is_empty() {
            return Err(self
                .loaded
                .error("bounds", "", "[bounds] needs a [bounds.universal] or [bounds.lightcone] table")
                .into());
        }

        let mut csv = Csv::new(&BoundFit::CSV_HEADER);
        let mut summary = String::new();
        for fit in &fits {
            csv.row(fit.csv_record());
            summary.push_str(&fit.summary());
        }
        csv.write(&self.path("bounds.csv"))?;
        fs::write(self.path("bounds_summary.txt"), &summary).context("writing bounds summary")?;
        print!("{summary}");
        let failed = fits.iter().filter(|f| f.verdict == Verdict::Fail).count();
        if failed > 0 {
            bail!("bounds: {failed} fits failed");
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let d = match self.cfg.waveguide {
            Some(_) => self.dispersion()?,
            None => DispersionRelation::new(1.0)?,
        };
        let g = match self.cfg.packet {
            Some(_) => self.packet()?,
            None => WavePacketSpec::gaussian(0.75, 0.1, Complex64::new(1.0, 0.0))?.normalized()?,
        };
        let f = match self.cfg.biphoton {
            Some(_) => self.biphoton_spec()?,
            None => BiphotonSpec::yls(PumpSpectrum::new(2.0, 0.1)?, 2.0)?,
        };
        let checks = validation_suite(&d, &g, &f)?;
        let mut csv = Csv::new(&["check", "value", "limit", "status"]);
        let mut failed = Vec::new();
        for c in &checks {
            csv.row(vec![
                c.name.to_string(),
                num(c.value),
                num(c.limit),
                if c.pass { "pass" } else { "fail" }.to_string(),
            ]);
            println!("{} {}: {:.3e} (limit {:.3e})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.limit);
            if !c.pass {
                failed.push(c.name);
            }
        }
        csv.write(&self.path("validate.csv"))?;
        if !failed.is_empty() {
            bail!("validate: failing checks: {}", failed.join(", "));
        }
        Ok(())
    }
}

struct Check {
    name: &'static str,
    value: f64,
    limit: f64,
    pass: bool,
}

fn at_most(name: &'static str, value: f64, limit: f64) -> Check {
    Check {
        name,
        value,
        limit,
        pass: value <= limit,
    }
}

/// Fixed, deterministic property checks; a fast subset of the test suite.
fn validation_suite(d: &DispersionRelation, g: &WavePacketSpec, f: &BiphotonSpec) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let tol = 1e-10;

    let round_trip = (-19..=19)
        .map(|i| {
            let v = i as f64 / 20.0;
            (d.omega_d(d.stationary_point(v).unwrap()) - v).abs()
        })
        .fold(0.0, f64::max);
    out.push(at_most("stationary_point_round_trip", round_trip, 1e-12));

    let square = CrossSection::rectangle(PI, PI)?;
    let exact = analytic_spectrum(&square, 1)?.entries[0].cutoff_mass.powi(2);
    out.push(at_most("analytic_square_ground_state", (exact - 2.0).abs(), 1e-12));
    let fd = fd_spectrum(&square, 1, PI / 64.0)?.entries[0].cutoff_mass.powi(2);
    out.push(at_most("fd_square_ground_state", (fd - 2.0).abs() / 2.0, 0.01));
    let (diag, off) = analytic_spectrum(&CrossSection::disk(1.0)?, 12)?.orthonormality_defect();
    out.push(at_most("disk_orthonormality", diag.max(off), 1e-8));

    let gauss = osc_integrate_1d(&OscIntegralProblem {
        envelope: |k: f64| Complex64::new((-k * k / 2.0).exp(), 0.0),
        point: SpacetimePoint::new(0.0, 0.0),
        dispersion: *d,
        domain: waveguide_photons::quadrature::Interval::new(-12.0, 12.0)?,
        tolerance: tol,
    })?;
    out.push(at_most(
        "static_gaussian_integral",
        (gauss.value.re - (2.0 * PI).sqrt()).abs(),
        1e-10,
    ));

    // norm conservation between t = 0 and t = 20 on a wide window
    let norm_at = |t: f64| -> Result<f64> {
        let centre = g.domain();
        let vg = d.omega_d(0.5 * (centre.lo + centre.hi));
        let step = 0.25;
        let reach = 20.0 / g.effective_width().max(0.05) + 2.0 * t;
        let n = (2.0 * reach / step) as usize;
        let pts: Vec<SpacetimePoint> = (0..=n)
            .map(|i| SpacetimePoint::new(vg * t - reach + step * i as f64, t))
            .collect();
        Ok(scan_single(g, d, &pts, tol)?.entries.iter().map(|e| e.probability).sum::<f64>() * step)
    };
    let (n0, n1) = (norm_at(0.0)?, norm_at(20.0)?);
    let drift = if n0 > 0.0 { (n0 - n1).abs() / n0 } else { (n0 - n1).abs() };
    out.push(at_most("norm_conservation", drift, 1e-6));

    let residual = |h: f64| -> Result<f64> {
        let (z, t) = (5.0, 10.0);
        let pts = [
            SpacetimePoint::new(z, t),
            SpacetimePoint::new(z + h, t),
            SpacetimePoint::new(z - h, t),
            SpacetimePoint::new(z, t + h),
            SpacetimePoint::new(z, t - h),
        ];
        let a: Vec<Complex64> = scan_single(g, d, &pts, 1e-12)?.entries.iter().map(|e| e.amplitude).collect();
        let lap = (a[3] + a[4] - a[1] - a[2]) / (h * h);
        Ok((lap + d.mass().powi(2) * a[0]).norm())
    };
    let (r1, r2) = (residual(1e-2)?, residual(5e-3)?);
    let ratio = if r2 > 0.0 { r1 / r2 } else { 4.0 };
    out.push(at_most("klein_gordon_residual_order", (ratio - 4.0).abs(), 0.5));

    let pairs = [
        (SpacetimePoint::new(3.0, 5.0), SpacetimePoint::new(8.0, 12.0)),
        (SpacetimePoint::new(-2.0, 0.0), SpacetimePoint::new(10.0, 15.0)),
        (SpacetimePoint::new(20.0, 30.0), SpacetimePoint::new(18.0, 25.0)),
    ];
    let mut asym: f64 = 0.0;
    for &(p1, p2) in &pairs {
        let a = probability_biphoton(f, d, p1, p2, tol)?;
        let b = probability_biphoton(f, d, p2, p1, tol)?;
        if a.max(b) > 0.0 {
            asym = asym.max((a - b).abs() / a.max(b));
        }
    }
    out.push(at_most("exchange_symmetry", asym, 1e-10));

    let sep = BiphotonSpec::separable_symmetrized(g.clone(), g.clone());
    let mut fact: f64 = 0.0;
    for &(p1, p2) in &pairs {
        let a = amplitude_biphoton(&sep, d, p1, p2, 1e-12)?.value;
        let s1 = amplitude_single(g, d, p1, 1e-13)?.value;
        let s2 = amplitude_single(g, d, p2, 1e-13)?.value;
        let expected = 2.0 * s1 * s2;
        if expected.norm() > 0.0 {
            fact = fact.max((a - expected).norm() / expected.norm());
        }
    }
    out.push(at_most("separable_factorization", fact, 1e-8));
    Ok(out)
}
