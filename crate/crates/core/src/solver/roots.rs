//! Argument-principle root location by rectangle subdivision with
//! phase-continuation winding numbers.

use crate::error::{Result, SpectralError};
use crate::C64;

/// Phase increment of `delta` along the segment z0 -> z1, by adaptive
/// bisection until each sub-increment is below pi/2.
fn edge_phase<F: Fn(C64) -> C64>(
    delta: &F,
    z0: C64,
    f0: C64,
    z1: C64,
    f1: C64,
    depth: usize,
) -> Result<f64> {
    if f0.norm() < 1e-280 || f1.norm() < 1e-280 {
        return Err(SpectralError::WindingMismatch("zero on contour".into()));
    }
    let dphi = (f1 / f0).arg();
    // a sub-arc may hide a full phase turn; also refine while increments are
    // large enough for that to be possible
    if dphi.abs() < 1.0 && depth > 0 {
        // verify with one midpoint probe before accepting
        let zm = (z0 + z1) * 0.5;
        let fm = delta(zm);
        if fm.norm() < 1e-280 {
            return Err(SpectralError::WindingMismatch("zero on contour".into()));
        }
        let d1 = (fm / f0).arg();
        let d2 = (f1 / fm).arg();
        if (d1 + d2 - dphi).abs() < 1e-9 && d1.abs() < 1.0 && d2.abs() < 1.0 {
            return Ok(dphi);
        }
        let a = edge_phase(delta, z0, f0, zm, fm, depth - 1)?;
        let b = edge_phase(delta, zm, fm, z1, f1, depth - 1)?;
        return Ok(a + b);
    }
    if depth == 0 {
        return Err(SpectralError::WindingMismatch("phase refinement exhausted".into()));
    }
    let zm = (z0 + z1) * 0.5;
    let fm = delta(zm);
    let a = edge_phase(delta, z0, f0, zm, fm, depth - 1)?;
    let b = edge_phase(delta, zm, fm, z1, f1, depth - 1)?;
    Ok(a + b)
}

/// Winding number of `delta` around the rectangle [x0,x1] x [y0,y1],
/// traversed counterclockwise. `rate` is an a-priori bound on the phase
/// speed (radians per unit length) used to seed the sampling density.
pub fn winding<F: Fn(C64) -> C64>(
    delta: &F,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    rate: f64,
) -> Result<i64> {
    let corners = [
        C64::new(x0, y0),
        C64::new(x1, y0),
        C64::new(x1, y1),
        C64::new(x0, y1),
    ];
    let mut total = 0.0;
    for e in 0..4 {
        let za = corners[e];
        let zb = corners[(e + 1) % 4];
        let len = (zb - za).norm();
        let kseg = ((len * rate / 1.2).ceil() as usize).clamp(2, 4096);
        let mut fa = delta(za);
        for s in 0..kseg {
            let t0 = s as f64 / kseg as f64;
            let t1 = (s + 1) as f64 / kseg as f64;
            let p0 = za + (zb - za) * t0;
            let p1 = za + (zb - za) * t1;
            let fb = delta(p1);
            total += edge_phase(delta, p0, fa, p1, fb, 44)?;
            fa = fb;
        }
    }
    let w = total / (2.0 * std::f64::consts::PI);
    let wi = w.round();
    if (w - wi).abs() > 0.2 {
        return Err(SpectralError::WindingMismatch(format!(
            "non-integer winding {w:.3} on [{x0},{x1}]x[{y0},{y1}]"
        )));
    }
    Ok(wi as i64)
}

/// Newton polishing with centered finite-difference derivatives
/// (step 1e-6 (1 + |rho|)).
pub fn newton_polish<F: Fn(C64) -> C64>(delta: &F, start: C64, tol: f64) -> (C64, f64) {
    let mut z = start;
    let mut best = z;
    let mut best_res = delta(z).norm();
    for _ in 0..60 {
        let h = 1e-6 * (1.0 + z.norm());
        let f = delta(z);
        let fp = (delta(z + C64::new(h, 0.0)) - delta(z - C64::new(h, 0.0))) / (2.0 * h);
        if fp.norm() < 1e-300 {
            break;
        }
        let step = f / fp;
        z -= step;
        let res = delta(z).norm();
        if res < best_res {
            best = z;
            best_res = res;
        }
        if step.norm() < tol * (1.0 + z.norm()) {
            break;
        }
    }
    (best, best_res)
}

/// A located zero with its argument-principle multiplicity.
#[derive(Debug, Clone, Copy)]
pub struct LocatedRoot {
    pub rho: C64,
    pub multiplicity: usize,
}

/// Find all zeros of `delta` inside the rectangle by quadtree subdivision;
/// every reported root carries the winding multiplicity of its final box.
pub fn find_roots<F: Fn(C64) -> C64>(
    delta: &F,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    rate: f64,
    polish_tol: f64,
) -> Result<Vec<LocatedRoot>> {
    let mut out: Vec<LocatedRoot> = Vec::new();
    // jitter retries guard against zeros sitting exactly on box edges
    let full = winding_with_retry(delta, x0, x1, y0, y1, rate, 0)?;
    let mut stack = vec![(x0, x1, y0, y1, full, 0usize)];
    while let Some((a, b, c, d, w, depth)) = stack.pop() {
        if w == 0 {
            continue;
        }
        let diag = ((b - a).powi(2) + (d - c).powi(2)).sqrt();
        if diag < 0.02 || depth >= 12 {
            let center = C64::new(0.5 * (a + b), 0.5 * (c + d));
            let (root, _res) = newton_polish(delta, center, polish_tol);
            out.push(LocatedRoot { rho: root, multiplicity: w as usize });
            continue;
        }
        // split point offset from the midline so roots at round coordinates
        // do not land on cut lines
        let mx = 0.5 * (a + b) + 0.013 * (b - a);
        let my = 0.5 * (c + d) + 0.017 * (d - c);
        let quads = [(a, mx, c, my), (mx, b, c, my), (a, mx, my, d), (mx, b, my, d)];
        let mut ws = [0i64; 4];
        let mut sum = 0i64;
        for (i, &(qa, qb, qc, qd)) in quads.iter().enumerate() {
            ws[i] = winding_with_retry(delta, qa, qb, qc, qd, rate, depth + 1)?;
            sum += ws[i];
        }
        if sum != w {
            return Err(SpectralError::WindingMismatch(format!(
                "children sum {sum} != parent {w} at depth {depth}"
            )));
        }
        for (i, &(qa, qb, qc, qd)) in quads.iter().enumerate() {
            if ws[i] != 0 {
                stack.push((qa, qb, qc, qd, ws[i], depth + 1));
            }
        }
    }
    Ok(out)
}

fn winding_with_retry<F: Fn(C64) -> C64>(
    delta: &F,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    rate: f64,
    salt: usize,
) -> Result<i64> {
    let mut eps = 0.0;
    let w = (x1 - x0).min(y1 - y0);
    for attempt in 0..4 {
        match winding(delta, x0 - eps, x1 + eps, y0 - eps, y1 + eps, rate) {
            Ok(v) => return Ok(v),
            Err(_) if attempt < 3 => {
                eps = w * 1e-3 * (attempt + 1) as f64 * (1.0 + 0.1 * salt as f64);
            }
            Err(e) => return Err(e),
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn winding_of_polynomial() {
        // (z - 1)(z - (2+i))^2 has winding 3 in a box containing both
        let f = |z: C64| (z - 1.0) * (z - C64::new(2.0, 1.0)) * (z - C64::new(2.0, 1.0));
        let w = winding(&f, 0.0, 3.0, -1.0, 2.0, 4.0).unwrap();
        assert_eq!(w, 3);
        let w = winding(&f, 1.5, 3.0, 0.5, 2.0, 4.0).unwrap();
        assert_eq!(w, 2);
    }

    #[test]
    fn find_roots_polynomial() {
        let f = |z: C64| (z - 1.0) * (z - C64::new(2.0, 1.0)) * (z + C64::new(0.5, -0.25));
        let roots = find_roots(&f, -2.0, 3.0, -2.0, 2.0, 4.0, 1e-12).unwrap();
        assert_eq!(roots.len(), 3);
        let mut found: Vec<C64> = roots.iter().map(|r| r.rho).collect();
        found.sort_by(|p, q| p.re.partial_cmp(&q.re).unwrap());
        assert!((found[0] - C64::new(-0.5, 0.25)).norm() < 1e-9);
        assert!((found[1] - C64::new(1.0, 0.0)).norm() < 1e-9);
        assert!((found[2] - C64::new(2.0, 1.0)).norm() < 1e-9);
    }

    #[test]
    fn double_root_multiplicity() {
        let f = |z: C64| (z - C64::new(1.0, 0.5)) * (z - C64::new(1.0, 0.5));
        let roots = find_roots(&f, 0.0, 2.0, 0.0, 1.0, 4.0, 1e-12).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].multiplicity, 2);
        assert!((roots[0].rho - C64::new(1.0, 0.5)).norm() < 1e-6);
    }
}
