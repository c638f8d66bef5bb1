use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative singular-value floor below which a design is treated as collinear.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Output of a least-squares fit.
#[derive(Debug, Clone)]
pub struct RegressionResult {
    pub coefficients: DVector<f64>,
    pub residuals: DVector<f64>,
    pub xtx_inverse: DMatrix<f64>,
    pub n: usize,
    pub k: usize,
}

impl RegressionResult {
    /// Classical (homoskedastic) covariance `s^2 (X'X)^-1` with `n - k` denominator.
    pub fn classical_covariance(&self) -> DMatrix<f64> {
        let s2 = self.residuals.norm_squared() / (self.n - self.k) as f64;
        &self.xtx_inverse * s2
    }

    pub fn rss(&self) -> f64 {
        self.residuals.norm_squared()
    }
}

/// Least squares via Householder QR of `x`.
///
/// Rank is checked on the singular values of the triangular factor, which
/// equal those of `x`.
pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<RegressionResult> {
    let (n, k) = x.shape();
    if y.len() != n {
        return Err(Error::Domain(format!(
            "design has {n} rows but response has {}",
            y.len()
        )));
    }
    if n <= k {
        return Err(Error::SampleSize {
            context: "least squares".into(),
            needed: k,
            got: n,
        });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    check_rank(&r)?;

    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let qty = qty.rows(0, k).into_owned();
    let coefficients = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::Collinear { ratio: 0.0 })?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(Error::Collinear { ratio: 0.0 })?;
    let xtx_inverse = &r_inv * r_inv.transpose();
    let residuals = y - x * &coefficients;
    Ok(RegressionResult {
        coefficients,
        residuals,
        xtx_inverse,
        n,
        k,
    })
}

/// `(X'X)^-1` through the same QR route as [`ols`].
pub fn xtx_inverse(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = x.ncols();
    if x.nrows() < k {
        return Err(Error::SampleSize {
            context: "cross-product inverse".into(),
            needed: k,
            got: x.nrows(),
        });
    }
    let r = x.clone().qr().r();
    check_rank(&r)?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(Error::Collinear { ratio: 0.0 })?;
    Ok(&r_inv * r_inv.transpose())
}

fn check_rank(r: &DMatrix<f64>) -> Result<()> {
    let sv = r.singular_values();
    let max = sv.max();
    let min = sv.min();
    if !(max > 0.0) || min < RANK_TOLERANCE * max {
        return Err(Error::Collinear {
            ratio: if max > 0.0 { min / max } else { 0.0 },
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn intercept_only_gives_mean() {
        let y = DVector::from_vec(vec![1.0, 4.0, -2.0, 7.5]);
        let x = DMatrix::from_element(4, 1, 1.0);
        let fit = ols(&x, &y).unwrap();
        assert!((fit.coefficients[0] - y.mean()).abs() < 1e-14);
    }

    #[test]
    fn exact_line() {
        let n = 50;
        let x = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { i as f64 * 0.3 });
        let y = DVector::from_fn(n, |i, _| 2.0 + 3.0 * (i as f64 * 0.3));
        let fit = ols(&x, &y).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-10);
        assert!((fit.coefficients[1] - 3.0).abs() < 1e-10);
        assert!(fit.rss() < 1e-20);
    }

    #[test]
    fn matches_normal_equations_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (n, k) = (200, 4);
        let x = DMatrix::from_fn(n, k, |_, j| if j == 0 { 1.0 } else { rng.random_range(-2.0..2.0) });
        let y = DVector::from_fn(n, |_, _| rng.random_range(-5.0..5.0));
        let fit = ols(&x, &y).unwrap();

        // explicit (X'X)^-1 X'y
        let xtx = x.transpose() * &x;
        let inv = xtx.try_inverse().unwrap();
        let beta = &inv * x.transpose() * &y;
        for j in 0..k {
            assert!((fit.coefficients[j] - beta[j]).abs() < 1e-8);
            for l in 0..k {
                assert!((fit.xtx_inverse[(j, l)] - inv[(j, l)]).abs() < 1e-8);
            }
        }
        // residuals orthogonal to regressors
        let ortho = x.transpose() * &fit.residuals;
        assert!(ortho.amax() < 1e-8 * y.norm());
    }

    #[test]
    fn collinear_design_rejected() {
        let x = DMatrix::from_fn(10, 3, |i, j| match j {
            0 => 1.0,
            1 => i as f64,
            _ => 2.0 * i as f64 + 1.0,
        });
        let y = DVector::from_fn(10, |i, _| i as f64);
        assert!(matches!(ols(&x, &y), Err(Error::Collinear { .. })));
    }

    #[test]
    fn too_few_rows() {
        let x = DMatrix::from_element(2, 2, 1.0);
        let y = DVector::from_element(2, 1.0);
        assert!(matches!(ols(&x, &y), Err(Error::SampleSize { .. })));
    }
}
