//! Birkhoff-regularity classification: theta determinants built from the
//! boundary leading parts and the n-th roots of unity, total order, and the
//! squaring construction reducing odd orders to even ones.

use crate::error::Result;
use crate::model::{bc_matrix, normalize_bc, OperatorSpec, RawBoundaryForm};
use crate::{C64, DifferentialExpression};
use serde::{Deserialize, Serialize};

const ZERO: C64 = C64::new(0.0, 0.0);

/// eps_j = exp(2 pi i j / n).
pub fn unit_roots(n: usize) -> Vec<C64> {
    (0..n).map(|j| unit_root_frac(n, j as f64)).collect()
}

/// eps_t for fractional index t (used by the odd-order reduction).
pub fn unit_root_frac(n: usize, t: f64) -> C64 {
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI * t / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Regular,
    Irregular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    Even,
    Odd,
}

/// Outcome of the Birkhoff-regularity test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularityReport {
    pub theta_01: C64,
    /// Present for odd orders only.
    pub theta_10: Option<C64>,
    pub chi: usize,
    pub verdict: Verdict,
    pub n_parity: Parity,
    /// The determinant's sign depends on the fixed row ordering (ascending
    /// order, (1,0) before (0,1)); verdicts do not.
    pub ordering_note: String,
}

/// theta(b^0, b^1, L) (or the swapped variant): the n x n determinant with
/// columns k < q built from the endpoint-0 coefficients and columns k >= q
/// from the endpoint-1 coefficients, each scaled by eps_k^{sigma_nu}.
pub fn birkhoff_theta(op: &OperatorSpec, swap: bool) -> C64 {
    birkhoff_theta_scaled(op, swap).0
}

fn birkhoff_theta_scaled(op: &OperatorSpec, swap: bool) -> (C64, f64) {
    let n = op.n();
    let q = n / 2;
    let eps = unit_roots(n);
    let m = bc_matrix(&op.bc, |row, k| {
        let c = if (k < q) ^ swap { row.a } else { row.b };
        c * eps[k].powu(row.order as u32)
    });
    m.det_with_scale()
}

/// Classify the operator per the Birkhoff criterion; "nonzero" means
/// |theta| > 1e-10 times the largest absolute minor met during elimination.
pub fn classify(op: &OperatorSpec) -> RegularityReport {
    let n = op.n();
    let (t01, s01) = birkhoff_theta_scaled(op, false);
    let chi = op.bc.total_order();
    let nonzero = |t: C64, s: f64| t.norm() > 1e-10 * s;
    if n % 2 == 0 {
        RegularityReport {
            theta_01: t01,
            theta_10: None,
            chi,
            verdict: if nonzero(t01, s01) { Verdict::Regular } else { Verdict::Irregular },
            n_parity: Parity::Even,
            ordering_note: "rows ordered by ascending order, (1,0) before (0,1); theta defined up to that ordering's sign".into(),
        }
    } else {
        let (t10, s10) = birkhoff_theta_scaled(op, true);
        let verdict = if nonzero(t01, s01) && nonzero(t10, s10) {
            Verdict::Regular
        } else {
            Verdict::Irregular
        };
        RegularityReport {
            theta_01: t01,
            theta_10: Some(t10),
            chi,
            verdict,
            n_parity: Parity::Odd,
            ordering_note: "rows ordered by ascending order, (1,0) before (0,1); theta defined up to that ordering's sign".into(),
        }
    }
}

/// The squared operator: boundary forms {U_j(y), U_j(l(y))}. Each row of
/// order sigma contributes one row of order sigma and one of order sigma + n
/// with the same leading pair; lower-order tails are dropped (they do not
/// enter theta). The result carries the model expression D^{2n}.
pub fn square_operator(op: &OperatorSpec) -> Result<OperatorSpec> {
    let n = op.n();
    let n2 = 2 * n;
    let mut raw = Vec::with_capacity(n2);
    for row in &op.bc.rows {
        for shift in [0usize, n] {
            let mut at0 = vec![ZERO; n2];
            let mut at1 = vec![ZERO; n2];
            at0[row.order + shift] = row.a;
            at1[row.order + shift] = row.b;
            raw.push(RawBoundaryForm { at0, at1 });
        }
    }
    let bc = normalize_bc(&raw)?;
    OperatorSpec::new(
        DifferentialExpression::model(n2),
        bc,
        &format!("{}^2", op.label),
    )
}
