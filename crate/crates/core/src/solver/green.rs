//! Green's function of (l - lambda): the determinant form over the bounded
//! model basis for coefficient-free operators, and the variation-of-constants
//! boundary-value solve for general coefficients.

use super::{apply_bc_row, ode, ModelBasis};
use crate::error::{Result, SpectralError};
use crate::linalg::CMat;
use crate::model::OperatorSpec;
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

/// Per-rho assembled model Green function
/// G = [g det eta - i sum_k z_k(x) sum_nu W_nu(xi) Cof_nuk] / (n rho^{n-1} det eta).
#[derive(Debug, Clone)]
pub struct ModelGreen {
    pub basis: ModelBasis,
    pub eta_det: C64,
    pub eta_cof: CMat,
    /// sigma_nu, a_nu, b_nu of the leading rows.
    rows: Vec<(usize, C64, C64)>,
    /// prefactors eps_m^{-(n-1-sigma_nu)} d_{m nu} of the W kernel.
    w_coeff: Vec<Vec<C64>>, // [nu][m]
    norm: C64, // n rho^{n-1}
}

impl ModelGreen {
    pub fn new(op: &OperatorSpec, rho: C64) -> Result<Self> {
        if !op.is_model() {
            return Err(SpectralError::NotSupported(
                "ModelGreen requires the coefficient-free expression".into(),
            ));
        }
        let n = op.n();
        if n % 2 != 0 {
            return Err(SpectralError::NotSupported(
                "the determinant form is assembled for even orders".into(),
            ));
        }
        let basis = ModelBasis::new(n, rho);
        let eta = super::eta_matrix(op, rho);
        let (eta_det, scale) = eta.det_with_scale();
        if eta_det.norm() < 1e-10 * scale {
            return Err(SpectralError::NearPole { dist: eta_det.norm() });
        }
        let eta_cof = eta.cofactor_matrix();
        let q = n / 2;
        let rows: Vec<(usize, C64, C64)> =
            op.bc.rows.iter().map(|r| (r.order, r.a, r.b)).collect();
        let mut w_coeff = vec![vec![C64::new(0.0, 0.0); n]; n];
        for (nu, &(sigma, a, b)) in rows.iter().enumerate() {
            for m in 0..n {
                let d = if m < q { b } else { -a };
                w_coeff[nu][m] = basis.eps[m].powi(-((n - 1 - sigma) as i32)) * d;
            }
        }
        let norm = C64::new(n as f64, 0.0) * rho.powu(n as u32 - 1);
        Ok(ModelGreen { basis, eta_det, eta_cof, rows, w_coeff, norm })
    }

    /// Whole-line model kernel g(x, xi, rho) of (w:1.4) (the i-carrying sum;
    /// the second branch applies for x < xi).
    pub fn g_kernel(&self, x: f64, xi: f64) -> C64 {
        let b = &self.basis;
        let n = b.n;
        let q = b.q;
        let mut s = C64::new(0.0, 0.0);
        if x > xi {
            for k in 0..q {
                s += b.eps[k].powi(-((n - 1) as i32)) * b.y(k, x - xi);
            }
            I * s
        } else {
            for k in q..n {
                s += b.eps[k].powi(-((n - 1) as i32)) * b.y(k, x - xi);
            }
            -I * s
        }
    }

    /// W_nu(xi) kernel entries of the bordered determinant.
    pub fn w_entry(&self, nu: usize, xi: f64) -> C64 {
        let b = &self.basis;
        let mut s = C64::new(0.0, 0.0);
        for m in 0..b.n {
            s += self.w_coeff[nu][m] * b.u(m, xi);
        }
        s
    }

    /// G(x, xi, rho).
    pub fn eval(&self, x: f64, xi: f64) -> C64 {
        let n = self.basis.n;
        let mut corr = C64::new(0.0, 0.0);
        for k in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for nu in 0..n {
                s += self.w_entry(nu, xi) * self.eta_cof.get(nu, k);
            }
            corr += self.basis.z(k, x) * s;
        }
        (self.g_kernel(x, xi) * self.eta_det - I * corr) / (self.norm * self.eta_det)
    }

    /// Column weights s_k = sum_nu W_nu(xi) Cof_nuk for one xi; lets callers
    /// scan x at O(n) per point.
    pub fn w_weights(&self, xi: f64) -> Vec<C64> {
        let n = self.basis.n;
        let w: Vec<C64> = (0..n).map(|nu| self.w_entry(nu, xi)).collect();
        (0..n)
            .map(|k| (0..n).map(|nu| w[nu] * self.eta_cof.get(nu, k)).sum())
            .collect()
    }

    /// G(x, xi) from precomputed [`Self::w_weights`].
    pub fn eval_from_weights(&self, x: f64, xi: f64, s: &[C64]) -> C64 {
        let n = self.basis.n;
        let mut corr = C64::new(0.0, 0.0);
        for k in 0..n {
            corr += self.basis.z(k, x) * s[k];
        }
        (self.g_kernel(x, xi) * self.eta_det - I * corr) / (self.norm * self.eta_det)
    }
}

/// Pointwise Green function. Model operators use the determinant form; any
/// nonzero coefficient switches to the variation-of-constants solve.
pub fn green(op: &OperatorSpec, x: f64, xi: f64, rho: C64, tol: f64) -> Result<C64> {
    if op.is_model() && op.n() % 2 == 0 {
        Ok(ModelGreen::new(op, rho)?.eval(x, xi))
    } else {
        general_green(op, x, xi, rho, tol)
    }
}

/// Variation-of-constants Green function for general coefficients: a
/// particular kernel with the unit D^{n-1} jump at xi, corrected by the
/// initial-value basis to satisfy the boundary rows. Guarded against the
/// ill-conditioned high-|Im rho| regime.
pub fn general_green(op: &OperatorSpec, x: f64, xi: f64, rho: C64, tol: f64) -> Result<C64> {
    let n = op.n();
    let eps = crate::regularity::unit_roots(n);
    let spread = eps
        .iter()
        .map(|e| (rho * e).im.abs())
        .fold(0.0, f64::max);
    if spread > 30.0 {
        return Err(SpectralError::CapExceeded(format!(
            "general Green solve needs |Im(rho eps_k)| <= 30, got {spread:.1}"
        )));
    }
    let lambda = rho.powu(n as u32);
    let rhs = |x_: f64, y: &[C64], dy: &mut [C64]| (super::ode_rhs(&op.expr, lambda))(x_, y, dy);

    // initial-value basis columns: values at 0, x, 1
    let mut pts = vec![0.0, 1.0];
    if x > 0.0 && x < 1.0 {
        pts.insert(1, x);
    }
    let mut d0 = Vec::with_capacity(n);
    let mut dx = Vec::with_capacity(n);
    let mut d1 = Vec::with_capacity(n);
    for k in 0..n {
        let mut y0 = vec![C64::new(0.0, 0.0); n];
        y0[k] = C64::new(1.0, 0.0);
        let states = ode::integrate_collect(rhs, &pts, y0, tol)?;
        d0.push(states[0].clone());
        dx.push(states[if pts.len() == 3 { 1 } else { usize::from(x >= 1.0) }].clone());
        d1.push(states[pts.len() - 1].clone());
    }

    // particular kernel K from xi with D^j K(xi) = delta_{j, n-1}
    let mut k0 = vec![C64::new(0.0, 0.0); n];
    k0[n - 1] = C64::new(1.0, 0.0);
    let (k_at_x, k_at_1) = if x > xi {
        let kpts = if x < 1.0 { vec![xi, x, 1.0] } else { vec![xi, 1.0] };
        let states = ode::integrate_collect(rhs, &kpts, k0, tol)?;
        if kpts.len() == 3 {
            (states[1].clone(), states[2].clone())
        } else {
            (states[1].clone(), states[1].clone())
        }
    } else {
        let states = ode::integrate_collect(rhs, &[xi, 1.0], k0, tol)?;
        (vec![C64::new(0.0, 0.0); n], states[1].clone())
    };

    // boundary solve: sum_k c_k U_j(y_k) = -U_j(g_part), g_part = i H(x-xi) K
    let a = CMat::from_fn(n, |j, k| apply_bc_row(&op.bc.rows[j], &d0[k], &d1[k]));
    let zero = vec![C64::new(0.0, 0.0); n];
    let rhs_vec: Vec<C64> = (0..n)
        .map(|j| -(apply_bc_row(&op.bc.rows[j], &zero, &k_at_1) * I))
        .collect();
    let (det, scale) = a.det_with_scale();
    if det.norm() < 1e-10 * scale {
        return Err(SpectralError::NearPole { dist: det.norm() });
    }
    let c = a.solve(&rhs_vec).ok_or(SpectralError::NearPole { dist: 0.0 })?;
    let mut val = if x > xi { I * k_at_x[0] } else { C64::new(0.0, 0.0) };
    for k in 0..n {
        val += c[k] * dx[k][0];
    }
    Ok(val)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    /// Classical Dirichlet kernel for (D^2 - rho^2): sin(rho x_<) sin(rho (1 - x_>)) / (rho sin rho).
    fn dirichlet_kernel(x: f64, xi: f64, rho: C64) -> C64 {
        let (lo, hi) = if x <= xi { (x, xi) } else { (xi, x) };
        (rho * lo).sin() * (rho * (1.0 - hi)).sin() / (rho * rho.sin())
    }

    #[test]
    fn model_green_matches_classical_dirichlet() {
        let op = OperatorSpec::dirichlet2();
        for &rho in &[C64::new(1.0, 0.3), C64::new(2.6, 0.0), C64::new(0.4, 1.1)] {
            let mg = ModelGreen::new(&op, rho).unwrap();
            for &(x, xi) in &[(0.3, 0.7), (0.7, 0.3), (0.5, 0.5), (0.1, 0.9), (0.95, 0.2)] {
                let got = mg.eval(x, xi);
                let want = dirichlet_kernel(x, xi, rho);
                assert!(
                    (got - want).norm() < 1e-10 * (1.0 + want.norm()),
                    "rho {rho}, x {x}, xi {xi}: got {got}, want {want}"
                );
            }
        }
    }

    #[test]
    fn model_and_general_paths_agree() {
        let op = OperatorSpec::dirichlet2();
        let rho = C64::new(2.3, 0.9);
        for &(x, xi) in &[(0.25, 0.6), (0.8, 0.35), (0.5, 0.5)] {
            let a = ModelGreen::new(&op, rho).unwrap().eval(x, xi);
            let b = general_green(&op, x, xi, rho, 1e-12).unwrap();
            assert!((a - b).norm() < 1e-8, "x {x}, xi {xi}: {a} vs {b}");
        }
    }

    #[test]
    fn near_pole_detected() {
        let op = OperatorSpec::dirichlet2();
        let rho = C64::new(PI + 1e-9, 0.0);
        assert!(matches!(
            ModelGreen::new(&op, rho),
            Err(SpectralError::NearPole { .. })
        ));
    }

    #[test]
    fn green_bound_along_schedule() {
        // |G| rho^{n-1} stays of one size over Gamma_{r_k} (spot check)
        let op = OperatorSpec::dirichlet2();
        let mut sups = Vec::new();
        for k in [5usize, 12, 20] {
            let r = 2.0 * PI * k as f64 + PI / 2.0;
            let mut sup: f64 = 0.0;
            for a in 0..16 {
                let phi = PI * (a as f64 + 0.5) / 16.0;
                let rho = C64::from_polar(r, phi);
                let mg = ModelGreen::new(&op, rho).unwrap();
                for x in [0.1, 0.5, 0.9] {
                    for xi in [0.2, 0.55, 0.85] {
                        sup = sup.max((mg.eval(x, xi) * rho).norm());
                    }
                }
            }
            sups.push(sup);
        }
        let lo = sups.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = sups.iter().cloned().fold(0.0, f64::max);
        assert!(hi / lo < 10.0, "spread {sups:?}");
    }
}
