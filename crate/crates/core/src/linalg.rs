//! Small dense complex linear algebra: LU determinants, cofactors, solves.
//!
//! Matrix orders here never exceed ~8 (boundary-condition counts), so plain
//! partial-pivot LU with O(n^5) cofactor tables is both adequate and exact
//! enough.

use crate::C64;

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub n: usize,
    pub data: Vec<C64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        CMat { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] = v;
    }

    /// Determinant via partial-pivot LU together with the largest absolute
    /// leading principal minor met along the elimination (used as the scale
    /// reference for "nonzero" verdicts).
    pub fn det_with_scale(&self) -> (C64, f64) {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = C64::new(1.0, 0.0);
        let mut scale: f64 = 0.0;
        for col in 0..n {
            let mut piv = col;
            let mut best = a[col * n + col].norm();
            for r in col + 1..n {
                let v = a[r * n + col].norm();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                return (C64::new(0.0, 0.0), scale.max(1.0));
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            scale = scale.max(det.norm());
            for r in col + 1..n {
                let factor = a[r * n + col] / p;
                for j in col..n {
                    let v = a[col * n + j];
                    a[r * n + j] -= factor * v;
                }
            }
        }
        (det, scale.max(1e-300))
    }

    pub fn det(&self) -> C64 {
        self.det_with_scale().0
    }

    /// Minor determinant with row `i` and column `j` removed.
    pub fn minor(&self, i: usize, j: usize) -> C64 {
        let n = self.n;
        let mut sub = CMat::zeros(n - 1);
        let mut r = 0;
        for ii in 0..n {
            if ii == i {
                continue;
            }
            let mut c = 0;
            for jj in 0..n {
                if jj == j {
                    continue;
                }
                sub.set(r, c, self.get(ii, jj));
                c += 1;
            }
            r += 1;
        }
        sub.det()
    }

    /// Cofactor of the (i, j) entry: (-1)^{i+j} times the minor.
    pub fn cofactor(&self, i: usize, j: usize) -> C64 {
        let sgn = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        self.minor(i, j) * sgn
    }

    /// Full cofactor table.
    pub fn cofactor_matrix(&self) -> CMat {
        CMat::from_fn(self.n, |i, j| self.cofactor(i, j))
    }

    /// Solve A x = b by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[C64]) -> Option<Vec<C64>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut a = self.data.clone();
        let mut x: Vec<C64> = b.to_vec();
        for col in 0..n {
            let mut piv = col;
            let mut best = a[col * n + col].norm();
            for r in col + 1..n {
                let v = a[r * n + col].norm();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                x.swap(col, piv);
            }
            let p = a[col * n + col];
            for r in col + 1..n {
                let factor = a[r * n + col] / p;
                for j in col..n {
                    let v = a[col * n + j];
                    a[r * n + j] -= factor * v;
                }
                let xv = x[col];
                x[r] -= factor * xv;
            }
        }
        for col in (0..n).rev() {
            let mut s = x[col];
            for j in col + 1..n {
                s -= a[col * n + j] * x[j];
            }
            x[col] = s / a[col * n + col];
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn det_2x2() {
        let m = CMat::from_fn(2, |i, j| match (i, j) {
            (0, 0) => c(1.0, 0.0),
            (0, 1) => c(2.0, 1.0),
            (1, 0) => c(0.0, -1.0),
            _ => c(3.0, 0.0),
        });
        let d = m.det();
        // 1*3 - (2+i)(-i) = 3 - (-2i + 1) = 2 + 2i
        assert!((d - c(2.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn laplace_expansion_consistency() {
        let m = CMat::from_fn(4, |i, j| c((i * j) as f64 + 1.0, (i as f64) - (j as f64) * 0.5));
        let det = m.det();
        for k in 0..4 {
            let mut s = C64::new(0.0, 0.0);
            for nu in 0..4 {
                s += m.get(nu, k) * m.cofactor(nu, k);
            }
            assert!((s - det).norm() < 1e-10 * det.norm().max(1.0));
        }
    }

    #[test]
    fn solve_roundtrip() {
        let m = CMat::from_fn(3, |i, j| c(1.0 + (i + 2 * j) as f64, (i as f64) * 0.3 + 0.1));
        let xs = vec![c(1.0, -1.0), c(0.5, 2.0), c(-3.0, 0.25)];
        let mut b = vec![C64::new(0.0, 0.0); 3];
        for i in 0..3 {
            for j in 0..3 {
                b[i] += m.get(i, j) * xs[j];
            }
        }
        let sol = m.solve(&b).unwrap();
        for (a, e) in sol.iter().zip(&xs) {
            assert!((a - e).norm() < 1e-12);
        }
    }
}
