use nalgebra::DMatrix;

use crate::linalg::binomial;
use crate::{Error, Result};

/// Coefficients of `(s x + t y)^m` by ascending power of `y`.
fn binomial_power(s: f64, t: f64, m: usize) -> Vec<f64> {
    (0..=m).map(|i| binomial(m, i) as f64 * s.powi((m - i) as i32) * t.powi(i as i32)).collect()
}

/// `Sym^{d-1} A` in the basis `x^{d-1-k} y^k`, where `A` sends `x ↦ a x + c y`
/// and `y ↦ b x + d y`.
pub fn symmetric_power_lift(a: &DMatrix<f64>, d: usize) -> Result<DMatrix<f64>> {
    if a.nrows() != 2 || a.ncols() != 2 {
        return Err(Error::InvalidInput(format!("expected a 2x2 matrix, got {}x{}", a.nrows(), a.ncols())));
    }
    if d < 2 {
        return Err(Error::InvalidDimension(format!("d = {d}, need d >= 2")));
    }
    let n = d - 1;
    let (p, q, r, s) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let mut out = DMatrix::zeros(d, d);
    for k in 0..d {
        let left = binomial_power(p, r, n - k);
        let right = binomial_power(q, s, k);
        for (i, &u) in left.iter().enumerate() {
            for (j, &v) in right.iter().enumerate() {
                out[(i + j, k)] += u * v;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_weights() {
        let t: f64 = 0.7;
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![t.exp(), (-t).exp()]));
        let l = symmetric_power_lift(&a, 3).unwrap();
        let want = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![(2.0 * t).exp(), 1.0, (-2.0 * t).exp()]));
        assert!((l - want).norm() < 1e-12);
        assert_eq!(symmetric_power_lift(&DMatrix::identity(2, 2), 5).unwrap(), DMatrix::identity(5, 5));
    }

    #[test]
    fn multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 2..6 {
            let a = crate::linalg::random_sl(2, &mut rng);
            let b = crate::linalg::random_sl(2, &mut rng);
            let lhs = symmetric_power_lift(&(&a * &b), d).unwrap();
            let rhs = symmetric_power_lift(&a, d).unwrap() * symmetric_power_lift(&b, d).unwrap();
            assert!((&lhs - &rhs).norm() <= 1e-10 * lhs.norm());
            assert!((lhs.determinant() - 1.0).abs() < 1e-8);
        }
    }
}
