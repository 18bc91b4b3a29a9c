//! Pseudofunctions on the circle at finite truncation: coefficient
//! sequences, partial sums of distributions, the commutator lemma and the
//! localization bound. Everything is exact finite arithmetic.

use crate::C64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceKind {
    Pseudofunction,
    SmoothMultiplier,
}

/// Finitely supported Fourier coefficient sequence c(l), |l| <= m.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientSequence {
    /// Support half-width M; coefficients run l = -m ..= m.
    pub m: i64,
    /// Index l maps to coefficients[(l + m) as usize].
    pub coefficients: Vec<C64>,
    pub kind: SequenceKind,
}

impl CoefficientSequence {
    pub fn zeros(m: i64, kind: SequenceKind) -> Self {
        CoefficientSequence { m, coefficients: vec![C64::new(0.0, 0.0); (2 * m + 1) as usize], kind }
    }

    pub fn from_fn(m: i64, kind: SequenceKind, mut f: impl FnMut(i64) -> C64) -> Self {
        let coefficients = (-m..=m).map(&mut f).collect();
        CoefficientSequence { m, coefficients, kind }
    }

    #[inline]
    pub fn get(&self, l: i64) -> C64 {
        if l.abs() > self.m {
            C64::new(0.0, 0.0)
        } else {
            self.coefficients[(l + self.m) as usize]
        }
    }

    #[inline]
    pub fn set(&mut self, l: i64, v: C64) {
        assert!(l.abs() <= self.m);
        self.coefficients[(l + self.m) as usize] = v;
    }

    /// Pointwise product of the underlying functions: finite convolution of
    /// the coefficients.
    pub fn convolve(&self, other: &CoefficientSequence) -> CoefficientSequence {
        let m = self.m + other.m;
        let mut out = CoefficientSequence::zeros(m, SequenceKind::Pseudofunction);
        for l1 in -self.m..=self.m {
            let a = self.get(l1);
            if a.norm() == 0.0 {
                continue;
            }
            for l2 in -other.m..=other.m {
                let v = out.get(l1 + l2) + a * other.get(l2);
                out.set(l1 + l2, v);
            }
        }
        out
    }

    pub fn scaled(&self, c: C64) -> CoefficientSequence {
        CoefficientSequence {
            m: self.m,
            coefficients: self.coefficients.iter().map(|&v| v * c).collect(),
            kind: self.kind,
        }
    }

    pub fn sub(&self, other: &CoefficientSequence) -> CoefficientSequence {
        let m = self.m.max(other.m);
        CoefficientSequence::from_fn(m, SequenceKind::Pseudofunction, |l| self.get(l) - other.get(l))
    }
}

/// Norm triple of a sequence.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Norms {
    /// A-norm: sum of |c(l)|.
    pub a_norm: f64,
    /// PF-norm: sup of |c(l)|.
    pub pf_norm: f64,
    /// Sum of |l| |c(l)| (the A-norm of the derivative up to the frequency
    /// normalization).
    pub derivative_a_norm: f64,
}

pub fn norms(seq: &CoefficientSequence) -> Norms {
    let mut a = 0.0;
    let mut pf: f64 = 0.0;
    let mut da = 0.0;
    for l in -seq.m..=seq.m {
        let v = seq.get(l).norm();
        a += v;
        pf = pf.max(v);
        da += l.abs() as f64 * v;
    }
    Norms { a_norm: a, pf_norm: pf, derivative_a_norm: da }
}

/// Partial sum of a distribution: truncation to |l| <= r / 2 pi.
pub fn pf_partial_sum(f: &CoefficientSequence, r: f64) -> CoefficientSequence {
    let cut = (r / (2.0 * std::f64::consts::PI)).floor() as i64;
    CoefficientSequence::from_fn(f.m, f.kind, |l| {
        if l.abs() <= cut {
            f.get(l)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Commutator [S_r, gamma](F) = S_r(gamma F) - gamma S_r(F), by exact finite
/// convolutions.
pub fn commutator(f: &CoefficientSequence, gamma: &CoefficientSequence, r: f64) -> CoefficientSequence {
    let lhs = pf_partial_sum(&gamma.convolve(f), r);
    let rhs = gamma.convolve(&pf_partial_sum(f, r));
    lhs.sub(&rhs)
}

/// Upper bound for the A(K)-seminorm of S_r(F): the A-norm of
/// gamma_K . S_r(F) for a cutoff identically 1 on K.
pub fn localization_bound(f: &CoefficientSequence, gamma_k: &CoefficientSequence, r: f64) -> f64 {
    norms(&gamma_k.convolve(&pf_partial_sum(f, r))).a_norm
}

/// Truncated point mass at x0: c(l) = exp(-2 pi i l x0), |l| <= m.
pub fn point_mass(x0: f64, m: i64) -> CoefficientSequence {
    let tau = 2.0 * std::f64::consts::PI;
    CoefficientSequence::from_fn(m, SequenceKind::Pseudofunction, |l| {
        (-C64::new(0.0, 1.0) * tau * l as f64 * x0).exp()
    })
}

/// Fourier coefficients of a raised-cosine plateau cutoff on the circle
/// (identically 1 within distance w of `center`, cosine rolloff of width s),
/// truncated at |l| <= m; computed by quadrature.
pub fn raised_cosine_cutoff(center: f64, w: f64, s: f64, m: i64) -> CoefficientSequence {
    let tau = 2.0 * std::f64::consts::PI;
    let bump = move |x: f64| -> f64 {
        let mut d = (x - center).abs();
        d = d.min(1.0 - d);
        if d <= w {
            1.0
        } else if d <= w + s {
            0.5 * (1.0 + (std::f64::consts::PI * (d - w) / s).cos())
        } else {
            0.0
        }
    };
    CoefficientSequence::from_fn(m, SequenceKind::SmoothMultiplier, |l| {
        crate::model::quad::quad(
            |x| C64::new(bump(x), 0.0) * (-C64::new(0.0, 1.0) * tau * l as f64 * x).exp(),
            0.0,
            1.0,
            tau * l.abs() as f64,
            1e-12,
        )
        .expect("cutoff coefficient quadrature")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TAU: f64 = 2.0 * std::f64::consts::PI;

    fn single_mode(l0: i64, v: C64, m: i64) -> CoefficientSequence {
        let mut s = CoefficientSequence::zeros(m, SequenceKind::Pseudofunction);
        s.set(l0, v);
        s
    }

    #[test]
    fn partial_sum_cases() {
        // r < 2 pi keeps only l = 0
        let f = CoefficientSequence::from_fn(4, SequenceKind::Pseudofunction, |l| {
            if l == 0 { C64::new(0.0, 0.0) } else { C64::new(1.0, 0.0) }
        });
        let s = pf_partial_sum(&f, 5.0);
        assert!(norms(&s).a_norm == 0.0);
        // full retention when r/2pi >= M
        let s = pf_partial_sum(&f, TAU * 5.0);
        assert_eq!(s.coefficients, f.coefficients);
        // idempotence
        let s1 = pf_partial_sum(&f, TAU * 2.0);
        let s2 = pf_partial_sum(&s1, TAU * 2.0);
        assert_eq!(s1.coefficients, s2.coefficients);
    }

    #[test]
    fn norm_values() {
        let m = 6;
        let delta = CoefficientSequence::from_fn(m, SequenceKind::Pseudofunction, |_| C64::new(1.0, 0.0));
        let n = norms(&delta);
        assert_eq!(n.pf_norm, 1.0);
        assert_eq!(n.a_norm, (2 * m + 1) as f64);
        let one_mode = single_mode(3, C64::new(2.0, 0.0), 6);
        let n = norms(&one_mode);
        assert_eq!(n.a_norm, 2.0);
        assert_eq!(n.derivative_a_norm, 6.0);
        let z = CoefficientSequence::zeros(4, SequenceKind::Pseudofunction);
        let n = norms(&z);
        assert_eq!((n.a_norm, n.pf_norm, n.derivative_a_norm), (0.0, 0.0, 0.0));
    }

    #[test]
    fn commutator_with_constant_vanishes() {
        let f = CoefficientSequence::from_fn(8, SequenceKind::Pseudofunction, |l| {
            C64::new(1.0 / (1.0 + l.abs() as f64), 0.3)
        });
        let gamma = single_mode(0, C64::new(2.5, 0.0), 2);
        let c = commutator(&f, &gamma, TAU * 3.0);
        assert!(norms(&c).a_norm < 1e-15);
    }

    #[test]
    fn commutator_single_modes() {
        // F at l0 inside the cutoff, gamma at p: nonzero iff |l0+p| > r/2pi
        let r = TAU * 3.0;
        let f = single_mode(2, C64::new(1.0, 0.0), 4);
        let inside = commutator(&f, &single_mode(1, C64::new(1.0, 0.0), 2), r);
        assert!(norms(&inside).a_norm < 1e-15);
        let outside = commutator(&f, &single_mode(2, C64::new(1.0, 0.0), 3), r);
        assert!((norms(&outside).a_norm - 1.0).abs() < 1e-15);
    }

    #[test]
    fn commutator_bilinear() {
        let f1 = CoefficientSequence::from_fn(5, SequenceKind::Pseudofunction, |l| C64::new(0.2 * l as f64, 1.0));
        let f2 = CoefficientSequence::from_fn(5, SequenceKind::Pseudofunction, |l| C64::new(1.0, -0.1 * l as f64));
        let g = CoefficientSequence::from_fn(3, SequenceKind::SmoothMultiplier, |l| C64::new(0.5, 0.25 * l as f64));
        let r = TAU * 2.0;
        let a = C64::new(1.5, -0.5);
        let lhs = commutator(
            &CoefficientSequence::from_fn(5, SequenceKind::Pseudofunction, |l| a * f1.get(l) + f2.get(l)),
            &g,
            r,
        );
        let rhs_a = commutator(&f1, &g, r);
        let rhs_b = commutator(&f2, &g, r);
        for l in -lhs.m..=lhs.m {
            assert!((lhs.get(l) - (a * rhs_a.get(l) + rhs_b.get(l))).norm() < 1e-13);
        }
    }

    #[test]
    fn localization_homogeneity_and_trivial_cases() {
        let f = single_mode(1, C64::new(1.0, 0.0), 8);
        let g = CoefficientSequence::from_fn(4, SequenceKind::SmoothMultiplier, |l| {
            C64::new(1.0 / (1.0 + (l * l) as f64), 0.0)
        });
        let b = localization_bound(&f, &g, TAU * 2.0);
        let c = C64::new(-3.0, 4.0); // |c| = 5
        let b_scaled = localization_bound(&f, &g.scaled(c), TAU * 2.0);
        assert!((b_scaled - 5.0 * b).abs() < 1e-12 * (1.0 + b));
        // zero distribution
        let z = CoefficientSequence::zeros(8, SequenceKind::Pseudofunction);
        assert_eq!(localization_bound(&z, &g, TAU * 2.0), 0.0);
    }

    #[test]
    fn localization_with_unit_cutoff_is_a_norm() {
        let f = CoefficientSequence::from_fn(6, SequenceKind::Pseudofunction, |l| C64::new(1.0 / (1 + l.abs()) as f64, 0.0));
        let one = single_mode(0, C64::new(1.0, 0.0), 0);
        let r = TAU * 3.0;
        let b = localization_bound(&f, &one, r);
        assert!((b - norms(&pf_partial_sum(&f, r)).a_norm).abs() < 1e-14);
    }

    #[test]
    fn localization_trend_for_point_mass() {
        // truncated point mass at x0, cutoff plateau at distance >= 0.2
        let f = point_mass(0.3, 96);
        let gamma = raised_cosine_cutoff(0.75, 0.1, 0.08, 32);
        let mut last = f64::INFINITY;
        for mult in [4.0, 8.0, 16.0, 32.0] {
            let b = localization_bound(&f, &gamma, TAU * mult);
            assert!(b < last, "bound not decreasing at r = 2 pi {mult}: {b} vs {last}");
            last = b;
        }
    }
}
