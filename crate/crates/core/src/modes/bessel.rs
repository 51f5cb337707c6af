use std::f64::consts::PI;

/// Integer-order Bessel function of the first kind from
/// `J_n(x) = (1/2π) ∫₀^{2π} cos(nτ - x sin τ) dτ`.
///
/// The integrand is periodic and entire, so the trapezoid rule converges
/// geometrically once the node count exceeds `|x| + n`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let m = 2 * (x.abs().ceil() as usize + n as usize) + 64;
    let h = 2.0 * PI / m as f64;
    let nf = n as f64;
    let sum: f64 = (0..m)
        .map(|i| {
            let tau = h * i as f64;
            (nf * tau - x * tau.sin()).cos()
        })
        .sum();
    sum / m as f64
}

/// Positive zeros of `J_n` below `limit`, ascending.
pub fn bessel_zeros_below(n: u32, limit: f64) -> Vec<f64> {
    // no zero of J_n lies below n; zeros are more than 2.4 apart
    const STEP: f64 = 0.25;
    let mut zeros = Vec::new();
    let mut a = (n as f64).max(STEP);
    let mut fa = bessel_j(n, a);
    while a < limit {
        let b = (a + STEP).min(limit);
        let fb = bessel_j(n, b);
        if fa == 0.0 {
            zeros.push(a);
        } else if fa * fb < 0.0 {
            zeros.push(bisect(n, a, b, fa));
        }
        a = b;
        fa = fb;
    }
    zeros
}

fn bisect(n: u32, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    while b - a > 4.0 * f64::EPSILON * b {
        let mid = 0.5 * (a + b);
        let fm = bessel_j(n, mid);
        if fm == 0.0 {
            return mid;
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    0.5 * (a + b)
}
