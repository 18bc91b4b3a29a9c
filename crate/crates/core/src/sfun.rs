//! Special functions needed by the closed-form kernels (sine/cosine integral).

use crate::C64;

/// Sine integral Si(x) = ∫_0^x sin t / t dt, accurate to ~1e-15.
///
/// Power series below |x| = 2, Lentz continued fraction for the complex
/// exponential integral above.
pub fn si(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= 2.0 { si_series(ax) } else { cisi(ax).1 };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Cosine integral Ci(x) for x > 0.
pub fn ci(x: f64) -> f64 {
    assert!(x > 0.0, "Ci requires x > 0");
    if x <= 2.0 {
        // Ci(x) = gamma + ln x + sum (-1)^k x^{2k} / (2k (2k)!)
        const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
        let mut sum = 0.0;
        let mut term = 1.0; // will become x^{2k}/(2k)!
        let x2 = x * x;
        for k in 1..=40 {
            term *= x2 / ((2 * k - 1) as f64 * (2 * k) as f64);
            let contrib = if k % 2 == 0 { term } else { -term } / (2 * k) as f64;
            sum += contrib;
            if contrib.abs() < 1e-18 {
                break;
            }
        }
        EULER_GAMMA + x.ln() + sum
    } else {
        cisi(x).0
    }
}

fn si_series(x: f64) -> f64 {
    // term_k = (-1)^k x^{2k+1}/(2k+1)!, contribution term_k/(2k+1)
    let mut sum = x;
    let mut term = x;
    let x2 = x * x;
    for k in 1..=40 {
        let tk = (2 * k + 1) as f64;
        term *= -x2 / ((2 * k) as f64 * tk);
        let c = term / tk;
        sum += c;
        if c.abs() < 1e-18 {
            break;
        }
    }
    sum
}

/// Returns (Ci(x), Si(x)) for x > 2 via the continued fraction for
/// e^{ix} E1(ix) (modified Lentz).
fn cisi(x: f64) -> (f64, f64) {
    const EPS: f64 = 1e-16;
    const FPMIN: f64 = 1e-290;
    let i = C64::new(0.0, 1.0);
    let mut b = C64::new(1.0, x);
    let mut c = C64::new(1.0 / FPMIN, 0.0);
    let mut d = C64::new(1.0, 0.0) / b;
    let mut h = d;
    for k in 2..=200 {
        let a = -((k - 1) as f64) * ((k - 1) as f64);
        b += C64::new(2.0, 0.0);
        d = C64::new(1.0, 0.0) / (d * a + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - C64::new(1.0, 0.0)).norm() < EPS {
            break;
        }
    }
    h *= (-i * x).exp();
    (-h.re, std::f64::consts::FRAC_PI_2 + h.im)
}

/// sin(r u)/u with its removable limit at u = 0.
#[inline]
pub fn sinc_kernel(r: f64, u: f64) -> f64 {
    if u.abs() < 1e-9 {
        // series: r - r^3 u^2/6 + ...
        r - r * r * r * u * u / 6.0
    } else {
        (r * u).sin() / u
    }
}
