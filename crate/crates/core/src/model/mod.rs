//! Domain types for operators, boundary conditions and expandable functions,
//! plus the basic transforms (reflection, extension, endpoint split,
//! subleading-coefficient elimination) and the shared quadrature primitive.

pub mod quad;

use crate::error::{Result, SpectralError};
use crate::linalg::CMat;
use crate::C64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

// ---------------------------------------------------------------------------
// coefficients and differential expressions
// ---------------------------------------------------------------------------

/// Evaluable coefficient descriptor; kept serializable so operator configs
/// round-trip losslessly.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoefficientDescriptor {
    /// c_0 + c_1 x + c_2 x^2 + ...
    Polynomial { coeffs: Vec<C64> },
    /// Piecewise constant on [0,1]: values[i] on [breakpoints[i-1], breakpoints[i]).
    Step { breakpoints: Vec<f64>, values: Vec<C64> },
    /// Dense samples on the uniform grid over [0,1], linear interpolation.
    Samples { values: Vec<C64> },
}

impl CoefficientDescriptor {
    pub fn constant(c: C64) -> Self {
        CoefficientDescriptor::Polynomial { coeffs: vec![c] }
    }

    pub fn eval(&self, x: f64) -> C64 {
        match self {
            CoefficientDescriptor::Polynomial { coeffs } => {
                let mut acc = ZERO;
                for &c in coeffs.iter().rev() {
                    acc = acc * x + c;
                }
                acc
            }
            CoefficientDescriptor::Step { breakpoints, values } => {
                let mut idx = 0;
                for (i, &b) in breakpoints.iter().enumerate() {
                    if x >= b {
                        idx = i + 1;
                    }
                }
                values[idx]
            }
            CoefficientDescriptor::Samples { values } => interp_linear(values, x),
        }
    }

    /// Constant value if the descriptor is constant on [0,1].
    pub fn as_constant(&self) -> Option<C64> {
        match self {
            CoefficientDescriptor::Polynomial { coeffs } => match coeffs.len() {
                0 => Some(ZERO),
                1 => Some(coeffs[0]),
                _ if coeffs[1..].iter().all(|c| c.norm() == 0.0) => Some(coeffs[0]),
                _ => None,
            },
            CoefficientDescriptor::Step { values, .. } => {
                let v0 = values[0];
                if values.iter().all(|v| (v - v0).norm() == 0.0) {
                    Some(v0)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            CoefficientDescriptor::Step { breakpoints, .. } => breakpoints.clone(),
            _ => Vec::new(),
        }
    }
}

fn interp_linear(values: &[C64], x: f64) -> C64 {
    let n = values.len() - 1;
    let t = (x.clamp(0.0, 1.0)) * n as f64;
    let i = (t.floor() as usize).min(n - 1);
    let frac = t - i as f64;
    values[i] * (1.0 - frac) + values[i + 1] * frac
}

/// One entry of a differential expression: the coefficient of D^k together
/// with the smoothness flag needed by the elimination transform.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Coefficient {
    pub descriptor: CoefficientDescriptor,
    #[serde(default)]
    pub smooth: bool,
}

/// l(y) = D^n y + sum_k p_k(x) D^k y, with D = -i d/dx.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DifferentialExpression {
    pub n: usize,
    #[serde(default)]
    pub coefficients: BTreeMap<usize, Coefficient>,
}

impl DifferentialExpression {
    /// The model expression D^n.
    pub fn model(n: usize) -> Self {
        assert!(n >= 1);
        DifferentialExpression { n, coefficients: BTreeMap::new() }
    }

    pub fn with_coefficient(mut self, k: usize, descriptor: CoefficientDescriptor, smooth: bool) -> Self {
        assert!(k < self.n);
        self.coefficients.insert(k, Coefficient { descriptor, smooth });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(SpectralError::NotSupported("order must be >= 1".into()));
        }
        for (&k, c) in &self.coefficients {
            if k >= self.n {
                return Err(SpectralError::NotSupported(format!(
                    "coefficient index {k} out of range for order {}",
                    self.n
                )));
            }
            if k == self.n - 1 && !c.smooth {
                return Err(SpectralError::NotSmooth);
            }
        }
        Ok(())
    }

    pub fn coeff(&self, k: usize) -> Option<&CoefficientDescriptor> {
        self.coefficients.get(&k).map(|c| &c.descriptor)
    }

    /// Evaluate p_k(x), treating absent coefficients as zero.
    pub fn eval_coeff(&self, k: usize, x: f64) -> C64 {
        self.coeff(k).map_or(ZERO, |d| d.eval(x))
    }

    pub fn is_model(&self) -> bool {
        self.coefficients
            .values()
            .all(|c| c.descriptor.as_constant().map_or(false, |v| v.norm() == 0.0))
    }
}

// ---------------------------------------------------------------------------
// boundary conditions
// ---------------------------------------------------------------------------

/// Lower-order tail term of a normalized boundary row.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LowerTerm {
    pub order: usize,
    pub a: C64,
    pub b: C64,
}

/// One Salaff-normalized boundary row:
/// a D^sigma y(0) + b D^sigma y(1) + lower-order terms = 0.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BcRow {
    pub order: usize,
    pub a: C64,
    pub b: C64,
    #[serde(default)]
    pub lower: Vec<LowerTerm>,
}

impl BcRow {
    pub fn leading(order: usize, a: C64, b: C64) -> Self {
        BcRow { order, a, b, lower: Vec::new() }
    }
}

/// Salaff-normalized two-point boundary conditions.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NormalizedBoundaryConditions {
    pub rows: Vec<BcRow>,
}

impl NormalizedBoundaryConditions {
    /// Validates the Salaff invariants for an operator of order `n`.
    pub fn try_new(rows: Vec<BcRow>, n: usize) -> Result<Self> {
        if rows.len() != n {
            return Err(SpectralError::RankDeficient(format!(
                "expected {n} rows, got {}",
                rows.len()
            )));
        }
        let mut mult: BTreeMap<usize, Vec<&BcRow>> = BTreeMap::new();
        for r in &rows {
            if r.order >= n {
                return Err(SpectralError::RankDeficient(format!(
                    "row order {} out of range",
                    r.order
                )));
            }
            mult.entry(r.order).or_default().push(r);
        }
        for (j, rs) in &mult {
            match rs.len() {
                1 => {
                    if rs[0].a.norm() + rs[0].b.norm() < 1e-14 {
                        return Err(SpectralError::RankDeficient(format!(
                            "row of order {j} has zero leading part"
                        )));
                    }
                }
                2 => {
                    let ok01 = (rs[0].a - ONE).norm() < 1e-12
                        && rs[0].b.norm() < 1e-12
                        && rs[1].a.norm() < 1e-12
                        && (rs[1].b - ONE).norm() < 1e-12;
                    if !ok01 {
                        return Err(SpectralError::RankDeficient(format!(
                            "order {j} pair is not the canonical (1,0),(0,1)"
                        )));
                    }
                }
                m => {
                    return Err(SpectralError::RankDeficient(format!(
                        "order {j} has multiplicity {m} > 2"
                    )))
                }
            }
        }
        Ok(NormalizedBoundaryConditions { rows })
    }

    pub fn from_leading(leading: &[(usize, C64, C64)], n: usize) -> Result<Self> {
        let rows = leading.iter().map(|&(o, a, b)| BcRow::leading(o, a, b)).collect();
        Self::try_new(rows, n)
    }

    /// Total order chi = sum of the leading orders (B-convention: sum j r_j).
    pub fn total_order(&self) -> usize {
        self.rows.iter().map(|r| r.order).sum()
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }
}

/// A general two-point boundary form sum_j a_j D^j y(0) + b_j D^j y(1),
/// the raw input of [`normalize_bc`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RawBoundaryForm {
    /// Coefficient of D^j y(0) at index j.
    pub at0: Vec<C64>,
    /// Coefficient of D^j y(1) at index j.
    pub at1: Vec<C64>,
}

/// Salaff normalization: Gaussian elimination by descending derivative order,
/// reducing each order block to its canonical leading pairs.
pub fn normalize_bc(raw: &[RawBoundaryForm]) -> Result<NormalizedBoundaryConditions> {
    let n = raw.len();
    if n == 0 {
        return Err(SpectralError::RankDeficient("no forms given".into()));
    }
    // rows as 2n-vectors: [a_0..a_{n-1} | b_0..b_{n-1}]
    let mut v: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut scale: f64 = 0.0;
    for f in raw {
        let mut row = vec![ZERO; 2 * n];
        for (j, &c) in f.at0.iter().enumerate() {
            if j >= n {
                return Err(SpectralError::RankDeficient("form order exceeds n-1".into()));
            }
            row[j] = c;
        }
        for (j, &c) in f.at1.iter().enumerate() {
            if j >= n {
                return Err(SpectralError::RankDeficient("form order exceeds n-1".into()));
            }
            row[n + j] = c;
        }
        for c in &row {
            scale = scale.max(c.norm());
        }
        v.push(row);
    }
    if scale == 0.0 {
        return Err(SpectralError::RankDeficient("all forms are zero".into()));
    }
    let tol = 1e-10 * scale;

    let mut assigned: Vec<Option<usize>> = vec![None; n]; // row -> leading order
    for j in (0..n).rev() {
        let active: Vec<usize> = (0..n).filter(|&r| assigned[r].is_none()).collect();
        // entries of the order-j block over active rows
        let blk: Vec<(usize, C64, C64)> = active
            .iter()
            .map(|&r| (r, v[r][j], v[r][n + j]))
            .filter(|(_, a, b)| a.norm() > tol || b.norm() > tol)
            .collect();
        if blk.is_empty() {
            continue;
        }
        // rank of the k x 2 block: look for the largest 2x2 determinant
        let mut best_det = 0.0;
        let mut best_pair = (0usize, 0usize);
        for p in 0..blk.len() {
            for q in p + 1..blk.len() {
                let d = (blk[p].1 * blk[q].2 - blk[p].2 * blk[q].1).norm();
                if d > best_det {
                    best_det = d;
                    best_pair = (p, q);
                }
            }
        }
        let blk_scale: f64 = blk
            .iter()
            .map(|(_, a, b)| a.norm().max(b.norm()))
            .fold(0.0, f64::max);
        if best_det > 1e-10 * blk_scale * blk_scale && blk.len() >= 2 {
            // rank 2: transform the two pivot rows to leading (1,0) and (0,1)
            let (p, q) = best_pair;
            let (r1, a1, b1) = blk[p];
            let (r2, a2, b2) = blk[q];
            let det = a1 * b2 - b1 * a2;
            // [new1; new2] = B^{-1} [row1; row2], B = [[a1,b1],[a2,b2]]
            let mut new1 = vec![ZERO; 2 * n];
            let mut new2 = vec![ZERO; 2 * n];
            for c in 0..2 * n {
                new1[c] = (b2 * v[r1][c] - b1 * v[r2][c]) / det;
                new2[c] = (-a2 * v[r1][c] + a1 * v[r2][c]) / det;
            }
            v[r1] = new1;
            v[r2] = new2;
            // eliminate order j from every other active row
            for &(r, _, _) in &blk {
                if r == r1 || r == r2 {
                    continue;
                }
                let ca = v[r][j];
                let cb = v[r][n + j];
                for c in 0..2 * n {
                    let t1 = v[r1][c];
                    let t2 = v[r2][c];
                    v[r][c] = v[r][c] - ca * t1 - cb * t2;
                }
            }
            // exact canonical leading entries
            v[r1][j] = ONE;
            v[r1][n + j] = ZERO;
            v[r2][j] = ZERO;
            v[r2][n + j] = ONE;
            assigned[r1] = Some(j);
            assigned[r2] = Some(j);
        } else {
            // rank 1: pick the row with the largest leading part as pivot
            let &(rp, ap, bp) = blk
                .iter()
                .max_by(|x, y| {
                    let nx = x.1.norm().max(x.2.norm());
                    let ny = y.1.norm().max(y.2.norm());
                    nx.partial_cmp(&ny).unwrap()
                })
                .unwrap();
            let div = if ap.norm() >= bp.norm() { ap } else { bp };
            for c in 0..2 * n {
                v[rp][c] /= div;
            }
            let (pa, pb) = (v[rp][j], v[rp][n + j]);
            for &(r, _, _) in &blk {
                if r == rp {
                    continue;
                }
                // the row's block is proportional to the pivot block
                let lam = if pa.norm() >= pb.norm() { v[r][j] / pa } else { v[r][n + j] / pb };
                for c in 0..2 * n {
                    let t = v[rp][c];
                    v[r][c] -= lam * t;
                }
                v[r][j] = ZERO;
                v[r][n + j] = ZERO;
            }
            assigned[rp] = Some(j);
        }
        // RankDeficient check: any active row that fully vanished
        for r in 0..n {
            if assigned[r].is_none() && v[r].iter().all(|c| c.norm() <= tol) {
                return Err(SpectralError::RankDeficient(
                    "a form became zero during elimination".into(),
                ));
            }
        }
    }
    if assigned.iter().any(Option::is_none) {
        return Err(SpectralError::RankDeficient("forms are linearly dependent".into()));
    }

    let clean = |c: C64| if c.norm() <= tol { ZERO } else { c };
    let mut rows: Vec<BcRow> = Vec::with_capacity(n);
    for r in 0..n {
        let sigma = assigned[r].unwrap();
        let mut lower = Vec::new();
        for j in (0..sigma).rev() {
            let (la, lb) = (clean(v[r][j]), clean(v[r][n + j]));
            if la != ZERO || lb != ZERO {
                lower.push(LowerTerm { order: j, a: la, b: lb });
            }
        }
        rows.push(BcRow { order: sigma, a: clean(v[r][sigma]), b: clean(v[r][n + sigma]), lower });
    }
    // ascending order; within an order block, the (1,0) row precedes (0,1)
    rows.sort_by(|x, y| {
        x.order
            .cmp(&y.order)
            .then_with(|| y.a.norm().partial_cmp(&x.a.norm()).unwrap())
    });
    NormalizedBoundaryConditions::try_new(rows, n)
}

// ---------------------------------------------------------------------------
// operator spec
// ---------------------------------------------------------------------------

/// A differential expression together with normalized boundary conditions.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OperatorSpec {
    pub expr: DifferentialExpression,
    pub bc: NormalizedBoundaryConditions,
    #[serde(default)]
    pub label: String,
}

impl OperatorSpec {
    pub fn new(expr: DifferentialExpression, bc: NormalizedBoundaryConditions, label: &str) -> Result<Self> {
        expr.validate()?;
        if expr.n != bc.n() {
            return Err(SpectralError::OrderMismatch(expr.n, bc.n()));
        }
        Ok(OperatorSpec { expr, bc, label: label.to_string() })
    }

    pub fn n(&self) -> usize {
        self.expr.n
    }

    pub fn is_model(&self) -> bool {
        self.expr.is_model()
    }

    /// Model operator D^n with the given leading boundary rows.
    pub fn model(n: usize, leading: &[(usize, C64, C64)], label: &str) -> Result<Self> {
        let bc = NormalizedBoundaryConditions::from_leading(leading, n)?;
        OperatorSpec::new(DifferentialExpression::model(n), bc, label)
    }

    /// Classical second-order examples used throughout the tests.
    pub fn dirichlet2() -> Self {
        OperatorSpec::model(2, &[(0, ONE, ZERO), (0, ZERO, ONE)], "dirichlet").unwrap()
    }

    pub fn neumann2() -> Self {
        OperatorSpec::model(2, &[(1, ONE, ZERO), (1, ZERO, ONE)], "neumann").unwrap()
    }

    pub fn periodic2() -> Self {
        let m1 = C64::new(-1.0, 0.0);
        OperatorSpec::model(2, &[(0, ONE, m1), (1, ONE, m1)], "periodic").unwrap()
    }
}

// ---------------------------------------------------------------------------
// sampled functions
// ---------------------------------------------------------------------------

/// Uniform grid on [0, 1] with N+1 points.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
pub struct Grid {
    pub n: usize,
}

impl Grid {
    pub const DEFAULT_N: usize = 400;

    pub fn new(n: usize) -> Self {
        assert!(n >= 16, "grid must have at least 16 intervals");
        Grid { n }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.n;
        (0..=n).map(move |i| i as f64 / n as f64)
    }

    pub fn point(&self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }
}

impl Default for Grid {
    fn default() -> Self {
        Grid { n: Grid::DEFAULT_N }
    }
}

/// Function evaluator kinds, closed under the transforms used by the
/// expansion machinery (reflection, affine endpoint parts, linear combos).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FunctionKind {
    Polynomial { coeffs: Vec<C64> },
    Step { breakpoints: Vec<f64>, values: Vec<C64> },
    Samples { values: Vec<C64> },
    /// Named entry of the built-in expression table.
    ExprTable { name: String },
    /// exp(c_0 + c_1 x + ...)
    ExpPoly { coeffs: Vec<C64> },
    Reflected { inner: Box<FunctionKind> },
    /// c0 (1-x) + c1 x
    EndpointAffine { c0: C64, c1: C64 },
    LinComb { terms: Vec<(C64, FunctionKind)> },
}

impl FunctionKind {
    pub fn constant(c: C64) -> Self {
        FunctionKind::Polynomial { coeffs: vec![c] }
    }

    pub fn eval(&self, x: f64) -> C64 {
        match self {
            FunctionKind::Polynomial { coeffs } => {
                let mut acc = ZERO;
                for &c in coeffs.iter().rev() {
                    acc = acc * x + c;
                }
                acc
            }
            FunctionKind::Step { breakpoints, values } => {
                let mut idx = 0;
                for (i, &b) in breakpoints.iter().enumerate() {
                    if x >= b {
                        idx = i + 1;
                    }
                }
                values[idx]
            }
            FunctionKind::Samples { values } => interp_linear(values, x),
            FunctionKind::ExprTable { name } => expr_table(name, x),
            FunctionKind::ExpPoly { coeffs } => {
                let mut acc = ZERO;
                for &c in coeffs.iter().rev() {
                    acc = acc * x + c;
                }
                acc.exp()
            }
            FunctionKind::Reflected { inner } => inner.eval(1.0 - x),
            FunctionKind::EndpointAffine { c0, c1 } => *c0 * (1.0 - x) + *c1 * x,
            FunctionKind::LinComb { terms } => {
                terms.iter().map(|(c, f)| *c * f.eval(x)).sum()
            }
        }
    }

    /// Interior points where the function (or a derivative) jumps; quadrature
    /// panels are split there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            FunctionKind::Step { breakpoints, .. } => breakpoints.clone(),
            FunctionKind::ExprTable { name } => expr_table_breakpoints(name),
            FunctionKind::Reflected { inner } => {
                inner.breakpoints().iter().map(|b| 1.0 - b).collect()
            }
            FunctionKind::LinComb { terms } => {
                let mut all: Vec<f64> = terms.iter().flat_map(|(_, f)| f.breakpoints()).collect();
                all.sort_by(|a, b| a.partial_cmp(b).unwrap());
                all.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
                all
            }
            _ => Vec::new(),
        }
    }
}

fn expr_table(name: &str, x: f64) -> C64 {
    let pi = std::f64::consts::PI;
    let v = match name {
        "one" => 1.0,
        "linear" => x,
        "sin_pi" => (pi * x).sin(),
        "sin_2pi" => (2.0 * pi * x).sin(),
        "cos_pi" => (pi * x).cos(),
        // smooth cubic vanishing at both endpoints, asymmetric
        "cubic_zero_ends" => x * (1.0 - x) * (x - 0.3),
        // ramp supported on [0.2, 0.8] with a unit jump at 0.8
        "ramp" => {
            if !(0.2..=0.8).contains(&x) {
                0.0
            } else {
                (x - 0.2) / 0.6
            }
        }
        // C^1 bump supported on [0.2, 0.8]
        "bump" => {
            if !(0.2..=0.8).contains(&x) {
                0.0
            } else {
                let t = (x - 0.2) / 0.6;
                (pi * t).sin().powi(2)
            }
        }
        "one_plus_x_sq" => 1.0 + x * x,
        _ => f64::NAN,
    };
    C64::new(v, 0.0)
}

fn expr_table_breakpoints(name: &str) -> Vec<f64> {
    match name {
        "ramp" | "bump" => vec![0.2, 0.8],
        _ => Vec::new(),
    }
}

/// Names accepted by [`FunctionKind::ExprTable`].
pub const EXPR_TABLE_NAMES: &[&str] = &[
    "one",
    "linear",
    "sin_pi",
    "sin_2pi",
    "cos_pi",
    "cubic_zero_ends",
    "ramp",
    "bump",
    "one_plus_x_sq",
];

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum DomainTag {
    UnitInterval,
    RealLineExtended,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ExtensionRule {
    None,
    Zero,
    ConstantEndpoints,
}

/// A function on [0,1] (or its extension to the line): evaluator plus grid
/// samples. Sup norms are grid maxima throughout the crate.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SampledFunction {
    pub kind: FunctionKind,
    pub grid: Grid,
    pub samples: Vec<C64>,
    pub domain: DomainTag,
    pub extension: ExtensionRule,
}

impl SampledFunction {
    pub fn new(kind: FunctionKind, grid: Grid) -> Self {
        let samples = grid.points().map(|x| kind.eval(x)).collect();
        SampledFunction { kind, grid, samples, domain: DomainTag::UnitInterval, extension: ExtensionRule::None }
    }

    pub fn from_expr(name: &str, grid: Grid) -> Self {
        SampledFunction::new(FunctionKind::ExprTable { name: name.to_string() }, grid)
    }

    /// Evaluate inside [0,1].
    pub fn eval(&self, x: f64) -> C64 {
        self.kind.eval(x)
    }

    /// Evaluate with the extension rule applied outside [0,1].
    pub fn eval_extended(&self, x: f64) -> C64 {
        if (0.0..=1.0).contains(&x) {
            self.kind.eval(x)
        } else {
            match self.extension {
                ExtensionRule::None | ExtensionRule::Zero => ZERO,
                ExtensionRule::ConstantEndpoints => {
                    if x < 0.0 {
                        self.samples[0]
                    } else {
                        *self.samples.last().unwrap()
                    }
                }
            }
        }
    }

    pub fn with_extension(mut self, rule: ExtensionRule) -> Self {
        self.extension = rule;
        if rule != ExtensionRule::None {
            self.domain = DomainTag::RealLineExtended;
        }
        self
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.kind.breakpoints()
    }
}

// ---------------------------------------------------------------------------
// spectral points
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
pub enum Sector {
    S1,
    S2,
}

/// An eigenparameter pair (lambda, rho = lambda^{1/n}) on the canonical
/// branch, tagged with its sector.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct SpectralPoint {
    pub lambda: C64,
    pub rho: C64,
    pub sector: Sector,
}

impl SpectralPoint {
    /// Canonical rho-branch: arg rho = arg lambda / n with arg lambda in
    /// [0, 2pi) for even n; the split branch for odd n.
    pub fn from_lambda(lambda: C64, n: usize) -> Self {
        let r = lambda.norm().powf(1.0 / n as f64);
        let rho = if n % 2 == 0 {
            let mut arg = lambda.arg(); // (-pi, pi]
            if arg < 0.0 {
                arg += 2.0 * std::f64::consts::PI;
            }
            C64::from_polar(r, arg / n as f64)
        } else {
            let arg = lambda.arg();
            let pi = std::f64::consts::PI;
            let theta = if arg.abs() <= pi / 2.0 {
                arg / n as f64
            } else if arg > 0.0 {
                pi - (pi - arg) / n as f64
            } else {
                -pi + (pi + arg) / n as f64
            };
            C64::from_polar(r, theta)
        };
        let sector = Self::sector_of(rho, n);
        SpectralPoint { lambda, rho, sector }
    }

    pub fn sector_of(rho: C64, n: usize) -> Sector {
        let pi = std::f64::consts::PI;
        let arg = rho.arg();
        if n % 2 == 0 {
            let a = if arg < -1e-12 { arg + 2.0 * pi } else { arg };
            if a < pi / n as f64 {
                Sector::S1
            } else {
                Sector::S2
            }
        } else if arg.abs() <= pi / (2.0 * n as f64) + 1e-12 {
            Sector::S1
        } else {
            Sector::S2
        }
    }
}

// ---------------------------------------------------------------------------
// transforms
// ---------------------------------------------------------------------------

/// f^#(xi) = f(1 - xi), sample-exact on the shared grid.
pub fn reflect(f: &SampledFunction) -> SampledFunction {
    let kind = FunctionKind::Reflected { inner: Box::new(f.kind.clone()) };
    let mut samples: Vec<C64> = f.samples.clone();
    samples.reverse();
    SampledFunction { kind, grid: f.grid, samples, domain: f.domain, extension: f.extension }
}

/// Constant-endpoint extension of a continuous function to the real line.
pub fn extend_tilde(f: &SampledFunction) -> SampledFunction {
    f.clone().with_extension(ExtensionRule::ConstantEndpoints)
}

/// Split f = P + f_0 with P the affine interpolant of the endpoint values
/// (P(0) = f(0), P(1) = f(1)), so that f_0 vanishes at both endpoints.
pub fn split_endpoint(f: &SampledFunction) -> (SampledFunction, SampledFunction) {
    let c0 = f.samples[0];
    let c1 = *f.samples.last().unwrap();
    let p_kind = FunctionKind::EndpointAffine { c0, c1 };
    let p = SampledFunction::new(p_kind.clone(), f.grid);
    let f0_kind = FunctionKind::LinComb {
        terms: vec![(ONE, f.kind.clone()), (C64::new(-1.0, 0.0), p_kind)],
    };
    let mut f0 = SampledFunction::new(f0_kind, f.grid).with_extension(ExtensionRule::Zero);
    let last = f0.samples.len() - 1;
    f0.samples[0] = ZERO;
    f0.samples[last] = ZERO;
    (p, f0)
}

/// Substitution y = V z eliminating a smooth p_{n-1}: returns V and the
/// transformed expression in standard form. Boundary conditions of a
/// transformed operator must be conjugated by V by the caller.
pub fn eliminate_subleading(
    expr: &DifferentialExpression,
) -> Result<(DifferentialExpression, SampledFunction)> {
    let n = expr.n;
    let grid = Grid::default();
    let one_fn = SampledFunction::new(FunctionKind::constant(ONE), grid);
    let sub = match expr.coefficients.get(&(n - 1)) {
        None => return Ok((expr.clone(), one_fn)),
        Some(c) => {
            if !c.smooth {
                return Err(SpectralError::NotSmooth);
            }
            c.descriptor.clone()
        }
    };
    if let Some(v) = sub.as_constant() {
        if v.norm() == 0.0 {
            let mut out = expr.clone();
            out.coefficients.remove(&(n - 1));
            return Ok((out, one_fn));
        }
    }

    let i = C64::new(0.0, 1.0);
    let poly_of = |d: &CoefficientDescriptor| -> Option<Vec<C64>> {
        match d {
            CoefficientDescriptor::Polynomial { coeffs } => Some(coeffs.clone()),
            _ => d.as_constant().map(|c| vec![c]),
        }
    };
    let p_sub = poly_of(&sub).ok_or_else(|| {
        SpectralError::NotSupported(
            "eliminate_subleading needs a polynomial (or constant) p_{n-1}".into(),
        )
    })?;

    // V(x) = exp(-(i/n) \int_0^x p_{n-1})
    let mut vexp = vec![ZERO; p_sub.len() + 1];
    for (k, &c) in p_sub.iter().enumerate() {
        vexp[k + 1] = -i / (n as f64) * c / (k as f64 + 1.0);
    }
    let v_fn = SampledFunction::new(FunctionKind::ExpPoly { coeffs: vexp }, grid);

    if n == 2 {
        // p_0' = p_0 - p_1^2/4 + (i/2) p_1'
        let p0 = expr
            .coeff(0)
            .map(|d| {
                poly_of(d).ok_or_else(|| {
                    SpectralError::NotSupported("n=2 elimination needs polynomial p_0".into())
                })
            })
            .transpose()?
            .unwrap_or_default();
        let sq = poly_mul(&p_sub, &p_sub);
        let dp = poly_diff(&p_sub);
        let mut out = poly_add(&p0, &poly_scale(&sq, C64::new(-0.25, 0.0)));
        out = poly_add(&out, &poly_scale(&dp, i * 0.5));
        let mut coeffs = BTreeMap::new();
        if !poly_is_zero(&out) {
            coeffs.insert(
                0,
                Coefficient { descriptor: CoefficientDescriptor::Polynomial { coeffs: out }, smooth: false },
            );
        }
        return Ok((DifferentialExpression { n, coefficients: coeffs }, v_fn));
    }

    // constant p_{n-1} = c for general n: conjugation shifts D by -c/n
    if let Some(c) = sub.as_constant() {
        let shift = -c / (n as f64);
        // operator sum_k p_k (D + 0)^k with p_n = 1 becomes sum over powers of (D + shift)
        let mut newp: Vec<Vec<C64>> = vec![Vec::new(); n + 1];
        let mut all_poly: Vec<(usize, Vec<C64>)> = vec![(n, vec![ONE])];
        for (&k, coef) in &expr.coefficients {
            let p = poly_of(&coef.descriptor).ok_or_else(|| {
                SpectralError::NotSupported(
                    "constant-shift elimination needs polynomial coefficients".into(),
                )
            })?;
            all_poly.push((k, p));
        }
        for (k, p) in all_poly {
            // p * (D + shift)^k = p * sum_j C(k,j) shift^{k-j} D^j
            let mut pow = ONE;
            let mut binom = 1.0;
            for j in (0..=k).rev() {
                // C(k, j) shift^{k-j}
                let term = poly_scale(&p, pow * binom);
                newp[j] = poly_add(&newp[j], &term);
                let jj = j as f64;
                binom = binom * jj / (k as f64 - jj + 1.0);
                pow *= shift;
            }
        }
        let lead = newp.pop().unwrap();
        debug_assert!((lead[0] - ONE).norm() < 1e-12);
        let sublead = newp.pop().unwrap();
        if !poly_is_zero(&sublead) {
            return Err(SpectralError::NotSupported(
                "subleading term did not cancel in constant shift".into(),
            ));
        }
        let mut coeffs = BTreeMap::new();
        for (k, p) in newp.into_iter().enumerate() {
            if !poly_is_zero(&p) {
                coeffs.insert(
                    k,
                    Coefficient { descriptor: CoefficientDescriptor::Polynomial { coeffs: p }, smooth: false },
                );
            }
        }
        return Ok((DifferentialExpression { n, coefficients: coeffs }, v_fn));
    }

    Err(SpectralError::NotSupported(
        "non-constant p_{n-1} elimination implemented for n = 2 only".into(),
    ))
}

fn poly_is_zero(p: &[C64]) -> bool {
    p.iter().all(|c| c.norm() < 1e-14)
}

fn poly_add(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![ZERO; a.len().max(b.len())];
    for (i, &c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, &c) in b.iter().enumerate() {
        out[i] += c;
    }
    out
}

fn poly_scale(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|&c| c * s).collect()
}

fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_diff(a: &[C64]) -> Vec<C64> {
    // d/dx
    if a.len() <= 1 {
        return Vec::new();
    }
    a.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect()
}

/// Boundary-form residual of the zero-order rows of `bc` on `f`; the
/// admissibility check of the whole-interval machinery uses this.
pub fn zero_order_violation(bc: &NormalizedBoundaryConditions, f: &SampledFunction) -> f64 {
    let f0 = f.samples[0];
    let f1 = *f.samples.last().unwrap();
    bc.rows
        .iter()
        .filter(|r| r.order == 0)
        .map(|r| (r.a * f0 + r.b * f1).norm())
        .fold(0.0, f64::max)
}

/// Build the eta-style leading boundary matrix used by determinants:
/// rows nu, columns from `col`: M[nu][k] = col(nu, k).
pub fn bc_matrix(bc: &NormalizedBoundaryConditions, mut col: impl FnMut(&BcRow, usize) -> C64) -> CMat {
    let n = bc.n();
    let rows = &bc.rows;
    CMat::from_fn(n, |nu, k| col(&rows[nu], k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn normalize_already_normalized() {
        // {y(0), y(1)} for n = 2
        let raw = vec![
            RawBoundaryForm { at0: vec![ONE], at1: vec![ZERO] },
            RawBoundaryForm { at0: vec![ZERO], at1: vec![ONE] },
        ];
        let bc = normalize_bc(&raw).unwrap();
        assert_eq!(bc.rows[0], BcRow::leading(0, ONE, ZERO));
        assert_eq!(bc.rows[1], BcRow::leading(0, ZERO, ONE));
    }

    #[test]
    fn normalize_mixed_pair() {
        // {y(0)+y(1), y(0)-y(1)} -> canonical pair
        let raw = vec![
            RawBoundaryForm { at0: vec![ONE], at1: vec![ONE] },
            RawBoundaryForm { at0: vec![ONE], at1: vec![c(-1.0, 0.0)] },
        ];
        let bc = normalize_bc(&raw).unwrap();
        assert_eq!(bc.rows[0], BcRow::leading(0, ONE, ZERO));
        assert_eq!(bc.rows[1], BcRow::leading(0, ZERO, ONE));
    }

    #[test]
    fn normalize_dependent_rows_fail() {
        let raw = vec![
            RawBoundaryForm { at0: vec![ONE], at1: vec![ZERO] },
            RawBoundaryForm { at0: vec![ONE], at1: vec![ZERO] },
        ];
        assert!(matches!(normalize_bc(&raw), Err(SpectralError::RankDeficient(_))));
    }

    #[test]
    fn normalize_idempotent() {
        // periodic-like rows with lower-order mixing
        let raw = vec![
            RawBoundaryForm { at0: vec![ONE, c(0.5, 0.0)], at1: vec![c(-1.0, 0.0), ZERO] },
            RawBoundaryForm { at0: vec![ZERO, ONE], at1: vec![c(0.25, 0.0), c(-1.0, 0.0)] },
        ];
        let bc = normalize_bc(&raw).unwrap();
        let back: Vec<RawBoundaryForm> = bc
            .rows
            .iter()
            .map(|r| {
                let mut at0 = vec![ZERO; 2];
                let mut at1 = vec![ZERO; 2];
                at0[r.order] = r.a;
                at1[r.order] = r.b;
                for t in &r.lower {
                    at0[t.order] = t.a;
                    at1[t.order] = t.b;
                }
                RawBoundaryForm { at0, at1 }
            })
            .collect();
        let bc2 = normalize_bc(&back).unwrap();
        assert_eq!(bc.rows, bc2.rows);
    }

    #[test]
    fn reflect_involution_and_values() {
        let g = Grid::new(64);
        let f = SampledFunction::from_expr("linear", g);
        let r = reflect(&f);
        for (i, x) in g.points().enumerate() {
            assert!((r.samples[i].re - (1.0 - x)).abs() < 1e-15);
        }
        let rr = reflect(&r);
        for i in 0..=g.n {
            assert_eq!(rr.samples[i], f.samples[i]);
        }
        let one = SampledFunction::from_expr("one", g);
        assert_eq!(reflect(&one).samples, one.samples);
    }

    #[test]
    fn extension_rules() {
        let g = Grid::new(32);
        let f = SampledFunction::from_expr("linear", g);
        let t = extend_tilde(&f);
        assert_eq!(t.eval_extended(-1.0), c(0.0, 0.0));
        assert_eq!(t.eval_extended(2.0), c(1.0, 0.0));
        assert_eq!(t.eval_extended(0.5), c(0.5, 0.0));
        let constf = extend_tilde(&SampledFunction::from_expr("one", g));
        assert_eq!(constf.eval_extended(-7.0), ONE);
        assert_eq!(constf.eval_extended(9.0), ONE);
    }

    #[test]
    fn split_endpoint_cases() {
        let g = Grid::new(100);
        // f(x) = x: P = x, f0 = 0
        let f = SampledFunction::from_expr("linear", g);
        let (p, f0) = split_endpoint(&f);
        assert!(f0.sup_norm() < 1e-14);
        assert!((p.eval(0.25).re - 0.25).abs() < 1e-14);
        // f = sin(pi x): P = 0, f0 = f
        let f = SampledFunction::from_expr("sin_pi", g);
        let (p, f0) = split_endpoint(&f);
        assert!(p.sup_norm() < 1e-12);
        for i in 0..=g.n {
            assert!((f0.samples[i] - f.samples[i]).norm() < 1e-12);
        }
        // f = 1 + x^2: P = 1 + x, f0 = x^2 - x
        let f = SampledFunction::from_expr("one_plus_x_sq", g);
        let (p, f0) = split_endpoint(&f);
        for x in [0.0, 0.3, 1.0] {
            assert!((p.eval(x).re - (1.0 + x)).abs() < 1e-13);
            assert!((f0.eval(x).re - (x * x - x)).abs() < 1e-13);
        }
        assert!(f0.samples[0].norm() + f0.samples[g.n].norm() < 1e-12);
        // f0 + P = f at all nodes
        for i in 0..=g.n {
            assert!((f0.samples[i] + p.samples[i] - f.samples[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn eliminate_zero_coefficient_is_identity() {
        let e = DifferentialExpression::model(3)
            .with_coefficient(2, CoefficientDescriptor::constant(ZERO), true);
        let (out, v) = eliminate_subleading(&e).unwrap();
        assert!(out.coefficients.is_empty());
        assert!((v.eval(0.7) - ONE).norm() < 1e-15);
    }

    #[test]
    fn eliminate_constant_n2() {
        let cconst = c(3.0, 0.0);
        let e = DifferentialExpression::model(2)
            .with_coefficient(1, CoefficientDescriptor::constant(cconst), true);
        let (out, v) = eliminate_subleading(&e).unwrap();
        // V(x) = exp(-i c x / 2)
        let want = (c(0.0, -1.0) * cconst * 0.35 / 2.0).exp();
        assert!((v.eval(0.35) - want).norm() < 1e-14);
        assert!((v.eval(0.0) - ONE).norm() < 1e-15);
        // p_0' = -c^2/4
        let p0 = out.eval_coeff(0, 0.5);
        assert!((p0 - c(-9.0 / 4.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn eliminate_n2_conjugation_identity() {
        // check l(V z) = V l'(z) for analytic test data, p_1 = 2 + x
        let e = DifferentialExpression::model(2).with_coefficient(
            1,
            CoefficientDescriptor::Polynomial { coeffs: vec![c(2.0, 0.0), ONE] },
            true,
        );
        let (out, v) = eliminate_subleading(&e).unwrap();
        let i = c(0.0, 1.0);
        // z = exp(m x)
        let m = c(0.3, 0.2);
        let zf = |x: f64| (m * x).exp();
        // y = V z; derivatives via product rule with V'/V = -(i/2) p_1
        let p1 = |x: f64| c(2.0, 0.0) + c(x, 0.0);
        let p1d = ONE; // d/dx p_1
        for x in [0.1, 0.45, 0.9] {
            let vv = v.eval(x);
            let z = zf(x);
            let zp = m * z;
            let zpp = m * m * z;
            let w = -i * 0.5 * p1(x); // V'/V
            let yp = vv * (zp + w * z);
            let ypp = vv * (zpp + 2.0 * w * zp + (w * w + (-i * 0.5 * p1d)) * z);
            // l(y) = -y'' - i p_1 y' (+ no p_0)
            let ly = -ypp - i * p1(x) * yp;
            // l'(z) = -z'' + p_0' z
            let lz = -zpp + out.eval_coeff(0, x) * z;
            assert!((ly - vv * lz).norm() < 1e-12, "mismatch at {x}: {:?}", ly - vv * lz);
        }
    }

    #[test]
    fn spectral_point_branches() {
        // even n: arg lambda in [0, 2pi)
        let p = SpectralPoint::from_lambda(c(0.0, -1.0), 2); // arg = 3pi/2
        assert!((p.rho.powu(2) - p.lambda).norm() < 1e-12);
        assert!(p.rho.arg() > 0.0 && matches!(p.sector, Sector::S2));
        // odd n, negative half-plane branch lands near pi
        let p = SpectralPoint::from_lambda(c(-8.0, -1e-6), 3);
        assert!((p.rho.powu(3) - p.lambda).norm() < 1e-9);
        assert!(matches!(p.sector, Sector::S2));
        let p = SpectralPoint::from_lambda(c(8.0, 0.0), 3);
        assert!((p.rho.re - 2.0).abs() < 1e-12 && matches!(p.sector, Sector::S1));
    }

    #[test]
    fn serde_roundtrip_operator() {
        let op = OperatorSpec::dirichlet2();
        let s = serde_json::to_string(&op).unwrap();
        let back: OperatorSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(op, back);
        // complex numbers serialize as [re, im]
        assert!(s.contains("[1.0,0.0]") || s.contains("[1.0,-0.0]"));
    }
}
