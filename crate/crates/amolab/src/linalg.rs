//! Tridiagonal LU with partial pivoting, for matrices with unit
//! off-diagonals. Row swaps introduce one extra superdiagonal of fill-in.

use crate::error::{Error, Result};
use rug::Float;

/// Factored form of `diag(d_i)` plus unit sub/super diagonals.
pub struct TridiagLu {
    prec: u32,
    /// Pivoted diagonal of U.
    dd: Vec<Float>,
    /// First superdiagonal of U.
    du: Vec<Float>,
    /// Second superdiagonal of U (fill-in from swaps).
    du2: Vec<Float>,
    /// Multipliers.
    dl: Vec<Float>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    /// Factors the matrix with diagonal `diag` and off-diagonal entries 1.
    ///
    /// `pivot_floor` rejects pivots below `floor * max(1, row scale)`; the
    /// row index of the failure is reported so callers can name the
    /// offending interval.
    pub fn factor(prec: u32, diag: &[Float], pivot_floor: &Float) -> std::result::Result<Self, usize> {
        let n = diag.len();
        assert!(n >= 1);
        let mut dd: Vec<Float> = diag.to_vec();
        let mut du: Vec<Float> = vec![Float::with_val(prec, 1); n.saturating_sub(1)];
        let mut du2: Vec<Float> = vec![Float::with_val(prec, 0); n.saturating_sub(2)];
        let mut dl: Vec<Float> = vec![Float::with_val(prec, 0); n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let one = Float::with_val(prec, 1);

        for i in 0..n.saturating_sub(1) {
            // Sub-diagonal entry of the current column is 1 before
            // elimination (possibly updated by an earlier swap in dd[i]).
            let below = one.clone();
            if dd[i].clone().abs() >= 1 {
                // |pivot| >= |below| = 1: no swap.
                let fact = Float::with_val(prec, &below / &dd[i]);
                dd[i + 1] -= Float::with_val(prec, &fact * &du[i]);
                dl[i] = fact;
            } else {
                // Swap rows i and i+1.
                let fact = Float::with_val(prec, &dd[i] / &below);
                dd[i] = below;
                let tmp = dd[i + 1].clone();
                dd[i + 1] = Float::with_val(prec, &du[i] - &(Float::with_val(prec, &fact * &tmp)));
                du[i] = tmp;
                if i + 2 < n {
                    du2[i] = du[i + 1].clone();
                    du[i + 1] = -Float::with_val(prec, &fact * &du2[i]);
                }
                dl[i] = fact;
                swapped[i] = true;
            }
            let scale = Float::with_val(prec, dd[i].clone().abs()).max(&one);
            if dd[i].clone().abs() < Float::with_val(prec, pivot_floor * &scale) {
                return Err(i);
            }
        }
        let scale = Float::with_val(prec, dd[n - 1].clone().abs()).max(&one);
        if dd[n - 1].clone().abs() < Float::with_val(prec, pivot_floor * &scale) {
            return Err(n - 1);
        }
        Ok(TridiagLu { prec, dd, du, du2, dl, swapped })
    }

    /// Factors and converts pivot failure into [`Error::ResonantInterval`].
    pub fn factor_interval(
        prec: u32,
        diag: &[Float],
        pivot_floor: &Float,
        x1: i64,
        x2: i64,
    ) -> Result<Self> {
        Self::factor(prec, diag, pivot_floor)
            .map_err(|row| Error::ResonantInterval { x1, x2, row })
    }

    pub fn solve(&self, rhs: &[Float]) -> Vec<Float> {
        let prec = self.prec;
        let n = self.dd.len();
        assert_eq!(rhs.len(), n);
        let mut b: Vec<Float> = rhs.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let tmp = b[i].clone();
                b[i] = b[i + 1].clone();
                b[i + 1] = tmp - Float::with_val(prec, &self.dl[i] * &b[i]);
            } else {
                let upd = Float::with_val(prec, &self.dl[i] * &b[i]);
                b[i + 1] -= upd;
            }
        }
        let mut x = b;
        x[n - 1] = Float::with_val(prec, &x[n - 1] / &self.dd[n - 1]);
        if n >= 2 {
            let upd = Float::with_val(prec, &self.du[n - 2] * &x[n - 1]);
            x[n - 2] = (x[n - 2].clone() - upd) / &self.dd[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            let mut acc = x[i].clone();
            acc -= Float::with_val(prec, &self.du[i] * &x[i + 1]);
            acc -= Float::with_val(prec, &self.du2[i] * &x[i + 2]);
            x[i] = acc / &self.dd[i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(diag: &[f64], x: &[Float], rhs: &[f64]) -> f64 {
        let n = diag.len();
        let mut worst = 0f64;
        for i in 0..n {
            let mut acc = diag[i] * x[i].to_f64();
            if i > 0 {
                acc += x[i - 1].to_f64();
            }
            if i + 1 < n {
                acc += x[i + 1].to_f64();
            }
            worst = worst.max((acc - rhs[i]).abs());
        }
        worst
    }

    #[test]
    fn solves_small_indefinite_systems() {
        let prec = 128;
        let floor = Float::with_val(prec, -40f64).exp();
        // Diagonals near zero force pivoting.
        let cases: Vec<Vec<f64>> = vec![
            vec![0.001, -2.0, 0.5, 3.0, -0.002],
            vec![-1.0, 1e-30, 2.0],
            vec![5.0],
            vec![0.1, 0.1],
        ];
        for diag in cases {
            let n = diag.len();
            let dm: Vec<Float> = diag.iter().map(|&d| Float::with_val(prec, d)).collect();
            let lu = TridiagLu::factor(prec, &dm, &floor).unwrap();
            let rhs: Vec<f64> = (0..n).map(|i| (i as f64) - 0.7).collect();
            let rm: Vec<Float> = rhs.iter().map(|&r| Float::with_val(prec, r)).collect();
            let x = lu.solve(&rm);
            assert!(residual(&diag, &x, &rhs) < 1e-12, "diag {diag:?}");
        }
    }

    #[test]
    fn rejects_singular_matrix() {
        let prec = 128;
        let floor = Float::with_val(prec, -40f64).exp();
        // [[0, 1], [1, 0]] is fine (pivoting), but [[0]] is singular.
        let dm = vec![Float::with_val(prec, 0)];
        assert!(TridiagLu::factor(prec, &dm, &floor).is_err());
        let dm = vec![Float::with_val(prec, 0), Float::with_val(prec, 0)];
        assert!(TridiagLu::factor(prec, &dm, &floor).is_ok());
    }
}
