//! Small dense LU with partial pivoting, used for the per-point moment systems.

use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct DenseLu<T> {
    n: usize,
    lu: Vec<T>,
    piv: Vec<usize>,
}

impl<T: Real> DenseLu<T> {
    /// Factors the row-major `n x n` matrix `a`. Returns `None` when a pivot
    /// falls below `100 eps` times the largest entry.
    pub fn factor(mut a: Vec<T>, n: usize) -> Option<Self> {
        assert_eq!(a.len(), n * n);
        let scale = a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if !(scale > T::zero()) || !scale.is_finite() {
            return None;
        }
        let tiny = scale * T::epsilon() * T::lit(100.0);
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pv) = (k..n)
                .map(|r| (r, a[r * n + k].abs()))
                .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pv <= tiny {
                return None;
            }
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                piv.swap(k, p);
            }
            let d = a[k * n + k];
            for r in (k + 1)..n {
                let f = a[r * n + k] / d;
                a[r * n + k] = f;
                if f != T::zero() {
                    for c in (k + 1)..n {
                        let v = a[k * n + c];
                        a[r * n + c] -= f * v;
                    }
                }
            }
        }
        Some(Self { n, lu: a, piv })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.piv.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let mut s = x[r];
            for c in 0..r {
                s -= self.lu[r * n + c] * x[c];
            }
            x[r] = s;
        }
        for r in (0..n).rev() {
            let mut s = x[r];
            for c in (r + 1)..n {
                s -= self.lu[r * n + c] * x[c];
            }
            x[r] = s / self.lu[r * n + r];
        }
        x
    }
}
