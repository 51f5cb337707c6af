//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero when any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use waveguide_photons::bounds::{
    check_lightcone_decay, decay_slope_fit, fit_universal_bound, DecaySource, Ray, UniversalOptions, Verdict,
    VelocityTimeGrid, PROBABILITY_FLOOR,
};
use waveguide_photons::correlators::{
    amplitude_biphoton, amplitude_single, asymptotic_single, probability_biphoton, scan_single,
};
use waveguide_photons::modes::{fd_spectrum, CrossSection};
use waveguide_photons::quadrature::{osc_integrate_1d, OscIntegralProblem};
use waveguide_photons::wavepackets::{BiphotonSpec, PumpSpectrum, WavePacketSpec};
use waveguide_photons::{DispersionRelation, SpacetimePoint};

struct Outcome {
    pass: bool,
    detail: String,
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn unit_mass() -> DispersionRelation {
    DispersionRelation::new(1.0).unwrap()
}

fn reference_packet() -> WavePacketSpec {
    WavePacketSpec::gaussian(0.75, 0.1, re(1.0)).unwrap().normalized().unwrap()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect()
}

/// Quadrature and stationary-phase probabilities along `z = 0.6 t`.
fn ray_comparison(times: &[f64]) -> Vec<(f64, f64, f64)> {
    let g = reference_packet();
    let d = unit_mass();
    let v = 0.6;
    let pts: Vec<SpacetimePoint> = times.iter().map(|&t| SpacetimePoint::on_ray(v, t)).collect();
    let scan = scan_single(&g, &d, &pts, 1e-10).unwrap();
    assert!(scan.all_converged());
    times
        .iter()
        .zip(&scan.entries)
        .map(|(&t, e)| (t, e.probability, asymptotic_single(&g, &d, v, t).unwrap().probability))
        .collect()
}

fn stationary_phase_convergence() -> Outcome {
    let start = Instant::now();
    let rows = ray_comparison(&linspace(200.0, 1000.0, 81));
    let elapsed = start.elapsed().as_secs_f64();
    let (worst_t, worst) = rows
        .iter()
        .map(|&(t, q, a)| (t, (q - a).abs() / a))
        .fold((0.0, 0.0), |m, x| if x.1 > m.1 { x } else { m });
    let at_1000 = rows.last().map(|&(_, q, a)| (q - a).abs() / a).unwrap();
    Outcome {
        pass: worst <= 0.05 && elapsed <= 60.0,
        detail: format!(
            "max relative difference {:.4} at t={worst_t} (limit 0.05), {:.4} at t=1000, runtime {elapsed:.1}s (limit 60s)",
            worst, at_1000
        ),
    }
}

fn correction_order() -> Outcome {
    let rows = ray_comparison(&logspace(100.0, 1000.0, 20));
    let samples: Vec<(f64, f64)> = rows.iter().map(|&(t, q, a)| (t, (t * q - t * a).abs())).collect();
    match decay_slope_fit(&samples) {
        Ok(fit) => Outcome {
            pass: (fit.slope + 0.5).abs() <= 0.15,
            detail: format!(
                "fitted slope {:.4} ± {:.4} over t∈[100,1000] (required -0.5 ± 0.15)",
                fit.slope, fit.half_width
            ),
        },
        Err(e) => Outcome {
            pass: false,
            detail: format!("fit failed: {e}"),
        },
    }
}

fn universal_bound() -> Outcome {
    let start = Instant::now();
    let d = unit_mass();
    let f = BiphotonSpec::yls(PumpSpectrum::new(2.0, 0.1).unwrap(), 2.0).unwrap();
    let velocities = linspace(0.55, 1.45, 10).into_iter().map(|k| k / (1.0 + k * k).sqrt()).collect();
    let grid = VelocityTimeGrid::new(velocities, vec![50.0, 100.0, 200.0, 400.0, 800.0]).unwrap();
    let fit = match fit_universal_bound(&f, &d, &grid, &UniversalOptions::default()) {
        Ok(fit) => fit,
        Err(e) => {
            return Outcome {
                pass: false,
                detail: format!("fit failed: {e}"),
            }
        }
    };
    let elapsed = start.elapsed().as_secs_f64();
    let drift = fit.refinement_drift.unwrap_or(f64::INFINITY);
    Outcome {
        pass: fit.max_violation <= 0.0 && drift < 0.10 && fit.flagged.is_empty() && elapsed <= 300.0,
        detail: format!(
            "C={:.6e} t0={:.4e} max_violation={:.3e} drift={:.4} asymptotic C={:.6e} flagged={} runtime {elapsed:.1}s (limit 300s)",
            fit.constant,
            fit.t0.unwrap_or(f64::NAN),
            fit.max_violation,
            drift,
            fit.asymptotic_estimate.unwrap_or(f64::NAN),
            fit.flagged.len()
        ),
    }
}

fn lightcone_decay() -> Outcome {
    let g = reference_packet();
    let ray = Ray::linspace(50.0, 60.0, 100.0, 41).unwrap();
    let fits = check_lightcone_decay(DecaySource::Single(&g), &unit_mass(), &[ray], &[6], 1e-10).unwrap();
    let fit = &fits[0];
    let slope = fit.slope.as_ref().map_or(f64::NAN, |s| s.slope);
    Outcome {
        pass: fit.verdict == Verdict::Pass && slope <= -6.0,
        detail: format!(
            "slope {slope:.3} (required ≤ -6), onset radius {:?}, {} of {} samples below the {PROBABILITY_FLOOR:e} floor",
            fit.onset_radius, fit.below_floor, fit.samples
        ),
    }
}

/// Central-difference Klein-Gordon residual `A_tt - A_zz + m²A` at step `h`.
fn kg_residual(g: &WavePacketSpec, d: &DispersionRelation, z: f64, t: f64, h: f64) -> f64 {
    let pts = [
        SpacetimePoint::new(z, t),
        SpacetimePoint::new(z + h, t),
        SpacetimePoint::new(z - h, t),
        SpacetimePoint::new(z, t + h),
        SpacetimePoint::new(z, t - h),
    ];
    let a: Vec<Complex64> = scan_single(g, d, &pts, 1e-12).unwrap().entries.iter().map(|e| e.amplitude).collect();
    let a_zz = (a[1] + a[2] - 2.0 * a[0]) / (h * h);
    let a_tt = (a[3] + a[4] - 2.0 * a[0]) / (h * h);
    (a_tt - a_zz + d.mass().powi(2) * a[0]).norm()
}

fn klein_gordon_residual() -> Outcome {
    let g = reference_packet();
    let d = unit_mass();
    let mut ratios = Vec::new();
    for (z, t) in [(12.0, 20.0), (30.0, 50.0), (-5.0, 10.0)] {
        let r1 = kg_residual(&g, &d, z, t, 1e-2);
        let r2 = kg_residual(&g, &d, z, t, 5e-3);
        ratios.push(r1 / r2);
    }
    Outcome {
        pass: ratios.iter().all(|r| (r - 4.0).abs() <= 0.5),
        detail: format!("residual ratios on halving {ratios:.4?} (required 4.0 ± 0.5)"),
    }
}

fn norm_conservation() -> Outcome {
    let g = reference_packet();
    let d = unit_mass();
    let envelope = |k: f64| re(g.eval_g(k).norm_sqr() / (4.0 * d.omega(k)));
    let expected = osc_integrate_1d(&OscIntegralProblem {
        envelope,
        point: SpacetimePoint::new(0.0, 0.0),
        dispersion: d,
        domain: g.domain(),
        tolerance: 1e-13,
    })
    .unwrap()
    .value
    .re;
    let step = 0.5;
    let mut worst: f64 = 0.0;
    let mut norms = Vec::new();
    for t in [0.0, 10.0, 100.0] {
        let centre = d.omega_d(0.75) * t;
        let n = (300.0 / step) as usize;
        let pts: Vec<SpacetimePoint> = (0..=n)
            .map(|i| SpacetimePoint::new(centre - 150.0 + step * i as f64, t))
            .collect();
        let scan = scan_single(&g, &d, &pts, 1e-11).unwrap();
        let norm: f64 = scan.entries.iter().map(|e| e.probability).sum::<f64>() * step;
        worst = worst.max((norm - expected).abs() / expected);
        norms.push(norm);
    }
    Outcome {
        pass: worst <= 1e-6,
        detail: format!("∫|A|²dz = {norms:.12?}, momentum-space value {expected:.12}, max relative deviation {worst:.2e} (limit 1e-6)"),
    }
}

fn random_pair(rng: &mut ChaCha8Rng) -> (SpacetimePoint, SpacetimePoint) {
    let mut pt = || {
        let t = rng.gen_range(0.0..60.0);
        let v = rng.gen_range(0.4..0.85);
        SpacetimePoint::new(v * t + rng.gen_range(-8.0..8.0), t)
    };
    (pt(), pt())
}

fn separable_factorization() -> Outcome {
    let d = unit_mass();
    let g1 = WavePacketSpec::gaussian(0.6, 0.15, Complex64::new(1.0, 0.4)).unwrap();
    let g2 = WavePacketSpec::gaussian(1.0, 0.2, re(0.8)).unwrap();
    let f = BiphotonSpec::separable_symmetrized(g1.clone(), g2.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (p1, p2) = random_pair(&mut rng);
        let a = amplitude_biphoton(&f, &d, p1, p2, 1e-12).unwrap().value;
        let s = |g: &WavePacketSpec, p| amplitude_single(g, &d, p, 1e-13).unwrap().value;
        let expected = s(&g1, p1) * s(&g2, p2) + s(&g1, p2) * s(&g2, p1);
        worst = worst.max((a - expected).norm() / expected.norm());
    }
    Outcome {
        pass: worst <= 1e-8,
        detail: format!("max relative deviation {worst:.2e} on 100 pairs (limit 1e-8)"),
    }
}

fn exchange_symmetry() -> Outcome {
    let d = unit_mass();
    let g1 = WavePacketSpec::gaussian(0.6, 0.15, Complex64::new(1.0, 0.4)).unwrap();
    let g2 = WavePacketSpec::gaussian(1.0, 0.2, re(0.8)).unwrap();
    let families = [
        ("separable", BiphotonSpec::separable_symmetrized(g1, g2)),
        ("correlated", BiphotonSpec::gaussian_correlated(1.8, 0.1, 0.4).unwrap()),
        ("yls", BiphotonSpec::yls(PumpSpectrum::new(2.0, 0.1).unwrap(), 2.0).unwrap()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut report = Vec::new();
    let mut pass = true;
    for (name, f) in &families {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let (p1, p2) = random_pair(&mut rng);
            let a = probability_biphoton(f, &d, p1, p2, 1e-10).unwrap();
            let b = probability_biphoton(f, &d, p2, p1, 1e-10).unwrap();
            if a.max(b) > 0.0 {
                worst = worst.max((a - b).abs() / a.max(b));
            }
        }
        pass &= worst <= 1e-10;
        report.push(format!("{name} {worst:.1e}"));
    }
    Outcome {
        pass,
        detail: format!("max relative asymmetry: {} (limit 1e-10)", report.join(", ")),
    }
}

fn mode_solver() -> Outcome {
    let square = CrossSection::rectangle(PI, PI).unwrap();
    let m2 = |h: f64| fd_spectrum(&square, 1, h).unwrap().entries[0].cutoff_mass.powi(2);
    let (coarse, fine) = (m2(PI / 32.0), m2(PI / 64.0));
    let rel = (fine - 2.0).abs() / 2.0;
    let ratio = (coarse - 2.0) / (fine - 2.0);
    let j01 = 2.404826;
    let disk = fd_spectrum(&CrossSection::disk(1.0).unwrap(), 1, 1.0 / 64.0).unwrap().entries[0].cutoff_mass;
    let disk_rel = (disk - j01).abs() / j01;
    Outcome {
        pass: rel <= 0.01 && (ratio - 4.0).abs() <= 1.0 && disk_rel <= 0.02,
        detail: format!(
            "square m²={fine:.8} (rel {rel:.2e}), error ratio {ratio:.4}, disk m₁={disk:.6} (rel {disk_rel:.2e})"
        ),
    }
}

/// Trapezoid rule with compensated summation over the full domain.
fn trapezoid(env: impl Fn(f64) -> Complex64, d: &DispersionRelation, pt: SpacetimePoint, lo: f64, hi: f64, n: usize) -> Complex64 {
    let h = (hi - lo) / n as f64;
    let mut sum = re(0.0);
    let mut comp = re(0.0);
    for i in 0..=n {
        let k = lo + h * i as f64;
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        let term = env(k) * Complex64::cis(k * pt.z - d.omega(k) * pt.t) * w - comp;
        let next = sum + term;
        comp = (next - sum) - term;
        sum = next;
    }
    sum * h
}

fn quadrature_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let tol = 1e-10;
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let d = DispersionRelation::new(rng.gen_range(0.5..2.0)).unwrap();
        let amp = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let g = WavePacketSpec::gaussian(rng.gen_range(-1.0..2.0), rng.gen_range(0.05..0.5), amp).unwrap();
        let pt = SpacetimePoint::new(rng.gen_range(-60.0..120.0), rng.gen_range(0.0..100.0));
        let env = |k: f64| g.eval_g(k);
        let dom = g.domain();
        let q = osc_integrate_1d(&OscIntegralProblem {
            envelope: env,
            point: pt,
            dispersion: d,
            domain: dom,
            tolerance: tol,
        })
        .unwrap()
        .value;
        let oracle = trapezoid(env, &d, pt, dom.lo, dom.hi, 1_000_000);
        let allowed = (10.0 * tol * oracle.norm()).max(1e-12);
        let dev = (q - oracle).norm();
        worst = worst.max(dev / allowed);
        if dev > allowed {
            failures += 1;
        }
    }
    Outcome {
        pass: failures == 0,
        detail: format!("{failures} of 50 cases outside max(10·tol·|I|, 1e-12); worst deviation/allowance {worst:.3}"),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 stationary-phase convergence", stationary_phase_convergence),
        ("2 correction order", correction_order),
        ("3 universal two-photon bound", universal_bound),
        ("4 outside-light-cone decay", lightcone_decay),
        ("5 Klein-Gordon residual", klein_gordon_residual),
        ("6 norm conservation", norm_conservation),
        ("7 separable factorization", separable_factorization),
        ("8 exchange symmetry", exchange_symmetry),
        ("9 mode solver", mode_solver),
        ("10 quadrature oracle", quadrature_oracle),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.starts_with(&format!("{o} "))) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {name}: {} [{:.1}s]", out.detail, start.elapsed().as_secs_f64());
        if !out.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
