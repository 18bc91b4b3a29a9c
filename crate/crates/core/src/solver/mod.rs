//! Fundamental systems of solutions, characteristic determinants and values,
//! and the Green's function in both the determinant form (model operator)
//! and the variation-of-constants form (general coefficients).

pub mod green;
pub mod ode;
pub mod roots;

use crate::error::{Result, SpectralError};
use crate::linalg::CMat;
use crate::model::{BcRow, DifferentialExpression, OperatorSpec, SpectralPoint};
use crate::regularity::{classify, unit_roots, Verdict};
use crate::{C64, Tolerances};
use serde::{Deserialize, Serialize};

const I: C64 = C64::new(0.0, 1.0);

/// Desk-scale radius cap for characteristic-value searches.
pub const RHO_CAP: f64 = 2.0 * std::f64::consts::PI * 30.0 + 2.0;

// ---------------------------------------------------------------------------
// fundamental systems
// ---------------------------------------------------------------------------

/// Model fundamental system y_k = exp(i rho eps_k x) with the bounded
/// variants z_k (shifted by 1 for k >= q) and the kernels u_m.
#[derive(Debug, Clone)]
pub struct ModelBasis {
    pub n: usize,
    pub q: usize,
    pub rho: C64,
    pub eps: Vec<C64>,
}

impl ModelBasis {
    pub fn new(n: usize, rho: C64) -> Self {
        ModelBasis { n, q: n / 2, rho, eps: unit_roots(n) }
    }

    #[inline]
    pub fn y(&self, k: usize, x: f64) -> C64 {
        (I * self.rho * self.eps[k] * x).exp()
    }

    /// z_k: y_k for k < q, y_k(x - 1) for k >= q; bounded on S_0.
    #[inline]
    pub fn z(&self, k: usize, x: f64) -> C64 {
        if k < self.q {
            self.y(k, x)
        } else {
            self.y(k, x - 1.0)
        }
    }

    /// u_m: y_m(1 - xi) for m < q, y_m(-xi) for m >= q; bounded on S_0.
    #[inline]
    pub fn u(&self, m: usize, xi: f64) -> C64 {
        if m < self.q {
            self.y(m, 1.0 - xi)
        } else {
            self.y(m, -xi)
        }
    }

    /// D^j y_k at x: (rho eps_k)^j y_k(x).
    pub fn d_y(&self, k: usize, j: usize, x: f64) -> C64 {
        (self.rho * self.eps[k]).powu(j as u32) * self.y(k, x)
    }
}

/// Fundamental system kinds exposed to callers.
#[derive(Debug, Clone)]
pub enum Fss {
    Model(ModelBasis),
    /// Initial-value basis: endpoint derivative tables d0[k][j] = D^j y_k(0),
    /// d1[k][j] = D^j y_k(1).
    InitialValue {
        n: usize,
        lambda: C64,
        d0: Vec<Vec<C64>>,
        d1: Vec<Vec<C64>>,
    },
}

/// Exact exponential fundamental system of D^n y = rho^n y.
pub fn model_fss(n: usize, rho: C64) -> Fss {
    Fss::Model(ModelBasis::new(n, rho))
}

/// Right-hand side of the first-order complex system for l(y) = lambda y in
/// the D-convention: state Y_j = D^j y, dY/dx = i (shift + coefficient row).
pub fn ode_rhs<'a>(
    expr: &'a DifferentialExpression,
    lambda: C64,
) -> impl FnMut(f64, &[C64], &mut [C64]) + 'a {
    let n = expr.n;
    move |x, y, dy| {
        for j in 0..n - 1 {
            dy[j] = I * y[j + 1];
        }
        let mut top = lambda * y[0];
        for (&k, c) in &expr.coefficients {
            top -= c.descriptor.eval(x) * y[k];
        }
        dy[n - 1] = I * top;
    }
}

/// Initial-value fundamental system by adaptive integration: column k has
/// Cauchy data D^i y_k(0) = delta_{ik}.
pub fn numeric_fss(expr: &DifferentialExpression, lambda: C64, tol: f64) -> Result<Fss> {
    let n = expr.n;
    let rho_mag = lambda.norm().powf(1.0 / n as f64);
    if rho_mag > RHO_CAP {
        return Err(SpectralError::CapExceeded(format!(
            "|rho| = {rho_mag:.1} beyond the desk-scale cap {RHO_CAP:.1}"
        )));
    }
    let mut d0 = Vec::with_capacity(n);
    let mut d1 = Vec::with_capacity(n);
    for k in 0..n {
        let mut y0 = vec![C64::new(0.0, 0.0); n];
        y0[k] = C64::new(1.0, 0.0);
        d0.push(y0.clone());
        let y1 = ode::integrate(ode_rhs(expr, lambda), 0.0, 1.0, y0, tol)?;
        d1.push(y1);
    }
    Ok(Fss::InitialValue { n, lambda, d0, d1 })
}

/// Apply the full boundary row (leading plus lower terms) to one column's
/// endpoint derivative tables.
pub fn apply_bc_row(row: &BcRow, d0: &[C64], d1: &[C64]) -> C64 {
    let mut v = row.a * d0[row.order] + row.b * d1[row.order];
    for t in &row.lower {
        v += t.a * d0[t.order] + t.b * d1[t.order];
    }
    v
}

// ---------------------------------------------------------------------------
// characteristic determinant
// ---------------------------------------------------------------------------

/// The eta matrix (leading boundary parts applied to the bounded model
/// basis): eta[nu][k] = eps_k^{sigma_nu} (b_nu z_k(1) + a_nu z_k(0)).
pub fn eta_matrix(op: &OperatorSpec, rho: C64) -> CMat {
    let n = op.n();
    let basis = ModelBasis::new(n, rho);
    let rows = &op.bc.rows;
    CMat::from_fn(n, |nu, k| {
        let r = &rows[nu];
        basis.eps[k].powu(r.order as u32) * (r.b * basis.z(k, 1.0) + r.a * basis.z(k, 0.0))
    })
}

/// Characteristic determinant. Model operators evaluate det eta (bounded on
/// S_0); general coefficients evaluate det[U_j(y_k)] over the initial-value
/// basis.
pub fn char_det(op: &OperatorSpec, rho: C64, tol: f64) -> Result<C64> {
    if op.is_model() {
        Ok(eta_matrix(op, rho).det())
    } else {
        let n = op.n();
        let lambda = rho.powu(n as u32);
        let fss = numeric_fss(&op.expr, lambda, tol)?;
        let Fss::InitialValue { d0, d1, .. } = &fss else { unreachable!() };
        let m = CMat::from_fn(n, |j, k| apply_bc_row(&op.bc.rows[j], &d0[k], &d1[k]));
        Ok(m.det())
    }
}

/// |det eta(rho) - Theta|: the decay witness of the [[.]] abbreviation along
/// the radius schedule (model operators).
pub fn eta_residual(op: &OperatorSpec, rho: C64) -> Result<f64> {
    if !op.is_model() {
        return Err(SpectralError::NotSupported(
            "eta_residual is defined for the model operator".into(),
        ));
    }
    let theta = crate::regularity::birkhoff_theta(op, false);
    Ok((eta_matrix(op, rho).det() - theta).norm())
}

// ---------------------------------------------------------------------------
// characteristic values
// ---------------------------------------------------------------------------

/// One located characteristic value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CharValue {
    pub rho: C64,
    pub multiplicity: usize,
    pub progression_id: usize,
    /// |rho - (2 pi j + c)| against the fitted progression.
    pub deviation: f64,
}

/// A fitted arithmetic progression rho_j = 2 pi j + c.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProgressionFit {
    pub c: C64,
    pub count: usize,
    pub max_deviation: f64,
}

/// All characteristic values in the canonical branch with |rho| <= radius.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CharValueSet {
    pub values: Vec<CharValue>,
    pub progressions: Vec<ProgressionFit>,
    pub radius: f64,
}

impl CharValueSet {
    /// Distance from |rho| = r circles to the set (arc metric: the circle
    /// sweeps all arguments of S_0, so the radial gap is the distance).
    pub fn separation_from_radius(&self, r: f64) -> f64 {
        self.values
            .iter()
            .map(|v| (v.rho.norm() - r).abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_distance(&self, rho: C64) -> f64 {
        self.values
            .iter()
            .map(|v| (v.rho - rho).norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn inside(&self, r: f64) -> Vec<&CharValue> {
        self.values.iter().filter(|v| v.rho.norm() < r).collect()
    }
}

/// Locate all characteristic values with |rho| <= r_max by rectangle
/// subdivision with argument-principle winding counts, Newton polishing and
/// canonical-branch deduplication, then fit the (B.10) progressions.
pub fn find_char_values(op: &OperatorSpec, r_max: f64, tols: &Tolerances) -> Result<CharValueSet> {
    if classify(op).verdict != Verdict::Regular {
        return Err(SpectralError::NotRegular(op.label.clone()));
    }
    if r_max > RHO_CAP {
        return Err(SpectralError::CapExceeded(format!(
            "r_max = {r_max} beyond cap {RHO_CAP}"
        )));
    }
    let n = op.n();
    let model = op.is_model();
    let search_tol = if model { tols.ode } else { 1e-7 };
    let delta = |rho: C64| -> C64 {
        if model {
            eta_matrix(op, rho).det()
        } else {
            char_det(op, rho, search_tol).unwrap_or(C64::new(f64::NAN, 0.0))
        }
    };

    // padded search box per parity (images outside the canonical branch are
    // filtered afterwards)
    let pad = 1.5;
    let rr = r_max + 1.0;
    let (x0, x1, y0, y1) = if n % 2 == 0 {
        if n == 2 {
            (-rr, rr, -pad, rr)
        } else {
            (-pad, rr, -pad, rr)
        }
    } else {
        let ymax = rr * (std::f64::consts::PI / (2.0 * n as f64)).sin() + 2.0;
        (-rr, rr, -pad, ymax)
    };
    let rate = n as f64 + 2.0;
    let raw = roots::find_roots(&delta, x0, x1, y0, y1, rate, tols.root)?;

    // canonical-branch filter + dedupe
    let mut kept: Vec<(C64, usize)> = Vec::new();
    for r in raw {
        if !r.rho.re.is_finite() || !r.rho.im.is_finite() {
            continue;
        }
        if r.rho.norm() > r_max {
            continue;
        }
        // re-polish at full accuracy for general operators
        let rho = if model {
            r.rho
        } else {
            let fine = |z: C64| char_det(op, z, tols.ode).unwrap_or(C64::new(f64::NAN, 0.0));
            roots::newton_polish(&fine, r.rho, tols.root).0
        };
        let canon = SpectralPoint::from_lambda(rho.powu(n as u32), n).rho;
        if (canon - rho).norm() > 0.05 * (1.0 + rho.norm()) {
            continue; // branch image of a canonical root
        }
        if let Some(e) = kept.iter_mut().find(|(z, _)| (*z - rho).norm() < 1e-6 * (1.0 + rho.norm())) {
            e.1 = e.1.max(r.multiplicity);
        } else {
            kept.push((rho, r.multiplicity));
        }
    }
    kept.sort_by(|a, b| {
        a.0.norm()
            .partial_cmp(&b.0.norm())
            .unwrap()
            .then(a.0.arg().partial_cmp(&b.0.arg()).unwrap())
    });

    let (values, progressions) = fit_progressions(&kept, n);
    Ok(CharValueSet { values, progressions, radius: r_max })
}

/// Split roots into one (odd n) or up to two (even n) arithmetic
/// progressions 2 pi j + c and estimate the constants.
fn fit_progressions(roots: &[(C64, usize)], n: usize) -> (Vec<CharValue>, Vec<ProgressionFit>) {
    use std::f64::consts::PI;
    if roots.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let two_pi = 2.0 * PI;
    // phase residue of each root (circular)
    let phases: Vec<f64> = roots
        .iter()
        .map(|(z, _)| {
            let t = z.re.rem_euclid(two_pi);
            t
        })
        .collect();

    let n_clusters = if n % 2 == 0 && roots.len() >= 2 { 2 } else { 1 };
    // gap clustering on the circle: sort phases, cut at the largest gaps
    let mut idx: Vec<usize> = (0..roots.len()).collect();
    idx.sort_by(|&a, &b| phases[a].partial_cmp(&phases[b]).unwrap());
    let mut assignment = vec![0usize; roots.len()];
    if n_clusters == 2 {
        let m = idx.len();
        let mut gaps: Vec<(f64, usize)> = Vec::with_capacity(m);
        for t in 0..m {
            let a = phases[idx[t]];
            let b = phases[idx[(t + 1) % m]] + if t + 1 == m { two_pi } else { 0.0 };
            gaps.push((b - a, t));
        }
        gaps.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let mut cuts = [gaps[0].1, gaps.get(1).map_or(gaps[0].1, |g| g.1)];
        cuts.sort_unstable();
        // members after cut0+1 .. cut1 inclusive form cluster 1
        for (pos, &i) in idx.iter().enumerate() {
            let in_second = pos > cuts[0] && pos <= cuts[1];
            assignment[i] = usize::from(in_second);
        }
        // degenerate split (all one side) -> single cluster
        if assignment.iter().all(|&a| a == 0) || assignment.iter().all(|&a| a == 1) {
            assignment.iter_mut().for_each(|a| *a = 0);
        }
    }

    let n_found = 1 + assignment.iter().copied().max().unwrap_or(0);
    let mut values = Vec::with_capacity(roots.len());
    let mut fits = Vec::with_capacity(n_found);
    for cl in 0..n_found {
        let members: Vec<usize> = (0..roots.len()).filter(|&i| assignment[i] == cl).collect();
        if members.is_empty() {
            fits.push(ProgressionFit { c: C64::new(0.0, 0.0), count: 0, max_deviation: 0.0 });
            continue;
        }
        // circular mean of the phases, then unwrapped residues
        let (mut sx, mut sy) = (0.0, 0.0);
        for &i in &members {
            sx += phases[i].cos();
            sy += phases[i].sin();
        }
        let mean_phase = sy.atan2(sx);
        let mut c_acc = C64::new(0.0, 0.0);
        for &i in &members {
            let z = roots[i].0;
            let j = ((z.re - mean_phase) / two_pi).round();
            c_acc += z - two_pi * j;
        }
        let c = c_acc / members.len() as f64;
        let mut max_dev: f64 = 0.0;
        for &i in &members {
            let z = roots[i].0;
            let j = ((z.re - c.re) / two_pi).round();
            let dev = (z - (two_pi * j + c)).norm();
            max_dev = max_dev.max(dev);
            values.push(CharValue {
                rho: z,
                multiplicity: roots[i].1,
                progression_id: cl,
                deviation: dev,
            });
        }
        fits.push(ProgressionFit { c, count: members.len(), max_deviation: max_dev });
    }
    values.sort_by(|a, b| a.rho.norm().partial_cmp(&b.rho.norm()).unwrap());
    (values, fits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CoefficientDescriptor;

    const ZERO: C64 = C64::new(0.0, 0.0);
    const ONE: C64 = C64::new(1.0, 0.0);
    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn model_fss_values() {
        let b = ModelBasis::new(2, C64::new(PI, 0.0));
        // y_0(1) = e^{i pi} = -1
        assert!((b.y(0, 1.0) + ONE).norm() < 1e-14);
        // z_q(1) = y_q(0) = 1, u_0(1) = y_0(0) = 1
        assert!((b.z(1, 1.0) - ONE).norm() < 1e-15);
        assert!((b.u(0, 1.0) - ONE).norm() < 1e-15);
    }

    #[test]
    fn model_z_bounded_on_s0() {
        for n in [2usize, 4] {
            for &(r, phi_frac) in &[(7.0, 0.25), (40.0, 0.6), (100.0, 0.95)] {
                let rho = C64::from_polar(r, 2.0 * PI / n as f64 * phi_frac);
                let b = ModelBasis::new(n, rho);
                for k in 0..n {
                    for x in [0.0, 0.3, 0.7, 1.0] {
                        assert!(b.z(k, x).norm() <= 1.0 + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn numeric_fss_initial_data_and_constant_solution() {
        // D^2, lambda = 0: y_0 = 1 everywhere
        let e = DifferentialExpression::model(2);
        let Fss::InitialValue { d0, d1, .. } = numeric_fss(&e, ZERO, 1e-12).unwrap() else {
            unreachable!()
        };
        assert!((d0[0][0] - ONE).norm() < 1e-15 && d0[0][1].norm() < 1e-15);
        assert!((d1[0][0] - ONE).norm() < 1e-11);
    }

    #[test]
    fn numeric_fss_dirichlet_eigenvalue() {
        // D^2 at lambda = pi^2: the solution with y(0) = 0 vanishes at 1
        let e = DifferentialExpression::model(2);
        let Fss::InitialValue { d1, .. } = numeric_fss(&e, C64::new(PI * PI, 0.0), 1e-12).unwrap()
        else {
            unreachable!()
        };
        // column 1 has D y(0) = 1, y(0) = 0
        assert!(d1[1][0].norm() < 1e-10);
    }

    #[test]
    fn numeric_fss_constant_shift_identity() {
        // D^2 + c at lambda agrees with D^2 at lambda - c
        let c = C64::new(0.7, -0.3);
        let e1 = DifferentialExpression::model(2).with_coefficient(
            0,
            CoefficientDescriptor::constant(c),
            false,
        );
        let e0 = DifferentialExpression::model(2);
        let lam = C64::new(11.0, 2.0);
        let Fss::InitialValue { d1: a, .. } = numeric_fss(&e1, lam, 1e-12).unwrap() else {
            unreachable!()
        };
        let Fss::InitialValue { d1: b, .. } = numeric_fss(&e0, lam - c, 1e-12).unwrap() else {
            unreachable!()
        };
        for k in 0..2 {
            for j in 0..2 {
                assert!((a[k][j] - b[k][j]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn char_det_dirichlet_zeros() {
        let op = OperatorSpec::dirichlet2();
        for j in 1..=5 {
            let v = char_det(&op, C64::new(j as f64 * PI, 0.0), 1e-12).unwrap();
            assert!(v.norm() < 1e-12, "det eta at {j} pi = {v}");
        }
        let v = char_det(&op, C64::new(2.5 * PI, 0.0), 1e-12).unwrap();
        assert!(v.norm() > 0.5);
    }

    #[test]
    fn char_values_dirichlet() {
        let op = OperatorSpec::dirichlet2();
        let set = find_char_values(&op, 20.0, &Tolerances::default()).unwrap();
        let want: Vec<f64> = (1..=6).map(|j| j as f64 * PI).collect();
        assert_eq!(set.values.len(), want.len());
        for (v, w) in set.values.iter().zip(&want) {
            assert!((v.rho - C64::new(*w, 0.0)).norm() < 1e-8, "got {}, want {w}", v.rho);
            assert_eq!(v.multiplicity, 1);
        }
        // two interlaced progressions with spacing 2 pi
        assert_eq!(set.progressions.len(), 2);
        for p in &set.progressions {
            assert!(p.max_deviation < 1e-7);
        }
    }

    #[test]
    fn char_values_periodic_double() {
        let op = OperatorSpec::periodic2();
        let set = find_char_values(&op, 14.0, &Tolerances::default()).unwrap();
        // rho = 0 is a boundary case of the branch; require 2 pi and 4 pi as
        // genuine double roots
        let mut nonzero: Vec<&CharValue> = set.values.iter().filter(|v| v.rho.norm() > 1.0).collect();
        nonzero.sort_by(|a, b| a.rho.norm().partial_cmp(&b.rho.norm()).unwrap());
        assert!(nonzero.len() >= 2);
        assert!((nonzero[0].rho - C64::new(2.0 * PI, 0.0)).norm() < 1e-6);
        assert_eq!(nonzero[0].multiplicity, 2);
        assert!((nonzero[1].rho - C64::new(4.0 * PI, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn eta_residual_decay() {
        let op = OperatorSpec::dirichlet2();
        let mut last = f64::INFINITY;
        for k in [2usize, 4, 8, 12] {
            let rho = C64::from_polar((2.0 * k as f64 + 0.5) * PI, PI / 4.0);
            let r = eta_residual(&op, rho).unwrap();
            assert!(r < last);
            last = r;
        }
        let rho = C64::from_polar(20.5 * PI, PI / 4.0);
        assert!(eta_residual(&op, rho).unwrap() < 1e-3);
    }

    #[test]
    fn eta_residual_row_swap_invariance() {
        let op = OperatorSpec::dirichlet2();
        let mut swapped = op.clone();
        swapped.bc.rows.swap(0, 1);
        let rho = C64::from_polar(8.5 * PI, PI / 4.0);
        // |det| changes only by sign under a row permutation, and Theta with it
        let a = eta_residual(&op, rho).unwrap();
        let b = eta_residual(&swapped, rho).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}
