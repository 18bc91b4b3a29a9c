//! Adaptive Dormand-Prince 5(4) integrator for complex linear systems.

use crate::error::{Result, SpectralError};
use crate::C64;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// embedded 4th order
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrate dy/dx = rhs(x, y) from `x0` to `x1` (either direction),
/// invoking `on_step(x, y)` after every accepted step.
pub fn integrate_with<F, S>(
    mut rhs: F,
    x0: f64,
    x1: f64,
    y0: Vec<C64>,
    tol: f64,
    mut on_step: S,
) -> Result<Vec<C64>>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    S: FnMut(f64, &[C64]),
{
    let dim = y0.len();
    let dir = if x1 >= x0 { 1.0 } else { -1.0 };
    let total = (x1 - x0).abs();
    if total == 0.0 {
        return Ok(y0);
    }
    let mut x = x0;
    let mut y = y0;
    let mut h = (total / 50.0).min(0.05).max(1e-6) * dir;
    let mut k1 = vec![C64::new(0.0, 0.0); dim];
    let mut k = vec![vec![C64::new(0.0, 0.0); dim]; 7];
    let mut ytmp = vec![C64::new(0.0, 0.0); dim];
    rhs(x, &y, &mut k1);
    k[0].copy_from_slice(&k1);

    let mut steps = 0usize;
    while (x - x1) * dir < 0.0 {
        steps += 1;
        if steps > 4_000_000 {
            return Err(SpectralError::StepFailure { x });
        }
        if (x + h - x1) * dir > 0.0 {
            h = x1 - x;
        }
        // stages
        for i in 0..dim {
            ytmp[i] = y[i] + k[0][i] * (A21 * h);
        }
        rhs(x + 0.2 * h, &ytmp, &mut k1);
        k[1].copy_from_slice(&k1);
        for i in 0..dim {
            ytmp[i] = y[i] + k[0][i] * (A31 * h) + k[1][i] * (A32 * h);
        }
        rhs(x + 0.3 * h, &ytmp, &mut k1);
        k[2].copy_from_slice(&k1);
        for i in 0..dim {
            ytmp[i] = y[i] + k[0][i] * (A41 * h) + k[1][i] * (A42 * h) + k[2][i] * (A43 * h);
        }
        rhs(x + 0.8 * h, &ytmp, &mut k1);
        k[3].copy_from_slice(&k1);
        for i in 0..dim {
            ytmp[i] = y[i]
                + k[0][i] * (A51 * h)
                + k[1][i] * (A52 * h)
                + k[2][i] * (A53 * h)
                + k[3][i] * (A54 * h);
        }
        rhs(x + 8.0 / 9.0 * h, &ytmp, &mut k1);
        k[4].copy_from_slice(&k1);
        for i in 0..dim {
            ytmp[i] = y[i]
                + k[0][i] * (A61 * h)
                + k[1][i] * (A62 * h)
                + k[2][i] * (A63 * h)
                + k[3][i] * (A64 * h)
                + k[4][i] * (A65 * h);
        }
        rhs(x + h, &ytmp, &mut k1);
        k[5].copy_from_slice(&k1);
        // 5th order solution
        let mut y5 = vec![C64::new(0.0, 0.0); dim];
        for i in 0..dim {
            y5[i] = y[i]
                + (k[0][i] * B1 + k[2][i] * B3 + k[3][i] * B4 + k[4][i] * B5 + k[5][i] * B6) * h;
        }
        rhs(x + h, &y5, &mut k1);
        k[6].copy_from_slice(&k1);
        // error estimate
        let mut err: f64 = 0.0;
        for i in 0..dim {
            let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6
                + k[6][i] * E7)
                * h;
            let sc = tol * (1.0 + y[i].norm().max(y5[i].norm()));
            err = err.max(e.norm() / sc);
        }
        if err <= 1.0 {
            x += h;
            y = y5;
            let (head, tail) = k.split_at_mut(6);
            head[0].copy_from_slice(&tail[0]);
            on_step(x, &y);
        }
        let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        h *= fac;
        if h.abs() < 1e-14 * total.max(1.0) {
            return Err(SpectralError::StepFailure { x });
        }
    }
    Ok(y)
}

/// Integrate without per-step observation.
pub fn integrate<F>(rhs: F, x0: f64, x1: f64, y0: Vec<C64>, tol: f64) -> Result<Vec<C64>>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    integrate_with(rhs, x0, x1, y0, tol, |_, _| {})
}

/// Integrate and record the state at each of the given sorted output points
/// (the integration is restarted at every output point, so values are exact
/// grid snapshots).
pub fn integrate_collect<F>(
    mut rhs: F,
    xs: &[f64],
    y0: Vec<C64>,
    tol: f64,
) -> Result<Vec<Vec<C64>>>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let mut out = Vec::with_capacity(xs.len());
    let mut y = y0;
    out.push(y.clone());
    for w in xs.windows(2) {
        y = integrate(&mut rhs, w[0], w[1], y, tol)?;
        out.push(y.clone());
    }
    Ok(out)
}
