use nalgebra::{DMatrix, DVector};

use crate::linalg;
use crate::spaces::{Config, Family, Motion, PartialFlag, SpacePoint};
use crate::{Error, Result};

/// `(ξ, x)` moved so that `x` is the base point `o`; `k` is the orthonormal
/// frame of the moved flag, so `pos(ξ, x) = pos(k · F_std, o)`.
#[derive(Debug, Clone)]
pub struct Normalized {
    pub config: Config,
    pub k: DMatrix<f64>,
    pub k_r: Option<DMatrix<f64>>,
}

fn motion_to_base(family: &Family, config: &Config) -> Result<Motion> {
    if !family.accepts(&config.point) {
        return Err(Error::InvalidPoint(format!("{} is not a point of {family}", config.point.kind())));
    }
    Ok(match &config.point {
        SpacePoint::Flag(eta) => Motion::Linear(eta.frame().transpose()),
        SpacePoint::ComplementaryPair(x) => {
            let t = linalg::hstack(x.plus(), x.minus());
            Motion::Linear(t.try_inverse().ok_or_else(|| Error::InvalidPoint("U+ and U- are not transverse".into()))?)
        }
        SpacePoint::QuadraticForm(x) => {
            let eig = x.matrix().clone().symmetric_eigen();
            let d = x.d();
            let mut order: Vec<usize> = (0..d).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
            let mut m = DMatrix::zeros(d, d);
            for (col, &k) in order.iter().enumerate() {
                let lam = eig.eigenvalues[k];
                if lam.abs() < 1e-14 {
                    return Err(Error::InvalidPoint("form is degenerate".into()));
                }
                m.set_column(col, &(eig.eigenvectors.column(k) * lam.abs().sqrt()));
            }
            Motion::Linear(m.transpose())
        }
        SpacePoint::GroupManifold(g) => {
            let inv = g.matrix().clone().try_inverse().ok_or_else(|| Error::InvalidPoint("singular matrix".into()))?;
            Motion::Pair(inv, DMatrix::identity(g.m(), g.m()))
        }
        SpacePoint::NegativeLine(x) => Motion::Linear(boost_to_axis(x.vector(), x.p())),
    })
}

/// An isometry of `Q = diag(1^p, -1^q)` sending the negative vector `w` to a
/// positive multiple of the last coordinate axis.
fn boost_to_axis(w: &DVector<f64>, p: usize) -> DMatrix<f64> {
    let n = w.len();
    let q = n - p;
    let mut h = DMatrix::identity(n, n);
    let a = w.rows(0, p).into_owned();
    let b = w.rows(p, q).into_owned();
    let mut rot_p = DMatrix::identity(p, p);
    if a.norm() > 0.0 {
        rot_p = householder_to(&a, 0);
    }
    let rot_q = householder_to(&b, q - 1);
    h.view_mut((0, 0), (p, p)).copy_from(&rot_p);
    h.view_mut((p, p), (q, q)).copy_from(&rot_q);
    let v = &h * w;
    let (alpha, beta) = (v[0], v[n - 1]);
    let scale = (beta * beta - alpha * alpha).sqrt();
    let (ch, sh) = (beta / scale, alpha / scale);
    let mut boost = DMatrix::identity(n, n);
    boost[(0, 0)] = ch;
    boost[(0, n - 1)] = -sh;
    boost[(n - 1, 0)] = -sh;
    boost[(n - 1, n - 1)] = ch;
    boost * h
}

/// Orthogonal reflection mapping `v` to `|v| e_target`.
fn householder_to(v: &DVector<f64>, target: usize) -> DMatrix<f64> {
    let n = v.len();
    let mut e = DVector::zeros(n);
    e[target] = v.norm();
    let u = v - &e;
    let un = u.norm();
    if un < 1e-15 * v.norm().max(1e-300) {
        return DMatrix::identity(n, n);
    }
    let u = u / un;
    DMatrix::identity(n, n) - (&u * u.transpose()) * 2.0
}

/// Move `x` to the family's base point.
pub fn normalize_pair(family: &Family, config: &Config) -> Result<Normalized> {
    let motion = motion_to_base(family, config)?;
    let moved = config.act(&motion)?;
    let k = moved.flag.frame().clone();
    let k_r = moved.flag_r.as_ref().map(|f| f.frame().clone());
    Ok(Normalized { config: Config { point: family.base_point()?, ..moved }, k, k_r })
}

/// A representative of `w0 · pos(ξ, x)`.
///
/// For flag manifolds this is the classical left action on double cosets;
/// otherwise the flag of a normalized pair is replaced by its orthogonal flag
/// (or `ℓ ↦ Jℓ` for isotropic lines).
pub fn orthogonal_config(family: &Family, config: &Config) -> Result<Config> {
    if let (Family::FlagFlag { d, theta, .. }, SpacePoint::Flag(eta)) = (family, &config.point) {
        let g = config.flag.frame().transpose();
        return Ok(Config::new(PartialFlag::opposite_standard(*d, theta)?, SpacePoint::Flag(eta.act(&g)?)));
    }
    let n = normalize_pair(family, config)?;
    let c = n.config;
    match family {
        Family::PseudoHyperbolic { p, q } => {
            let j = crate::spaces::q_matrix(*p, *q);
            Ok(Config::new(c.flag.act(&j)?, c.point))
        }
        _ => Ok(Config { flag: c.flag.orthogonal(), flag_r: c.flag_r.map(|f| f.orthogonal()), point: c.point }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{classify, q_form, ComplementaryPair, NegativeLine, QuadraticForm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn boost_is_isometry() {
        let mut v = DVector::from_vec(vec![0.3, -0.2, 0.5, 1.4]);
        v /= v.norm();
        let h = boost_to_axis(&v, 2);
        let hv = &h * &v;
        assert!(hv[0].abs() + hv[1].abs() + hv[2].abs() < 1e-12 && hv[3] > 0.0);
        let e = DVector::from_vec(vec![1.0, 0.5, -0.7, 0.2]);
        let f = DVector::from_vec(vec![0.1, 0.9, 0.3, -2.0]);
        assert!((q_form(&(&h * &e), &(&h * &f), 2) - q_form(&e, &f, 2)).abs() < 1e-12);
    }

    #[test]
    fn normalization_preserves_position() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let fam = Family::complementary(4, 1, &[1, 2, 3]).unwrap();
        let mut plus = DMatrix::zeros(4, 1);
        plus[(1, 0)] = 1.0;
        let minus = DMatrix::from_row_slice(4, 3, &[1., 0., 0., 0., 0., 0., 0., 1., 0., 0., 0., 1.]);
        let x = ComplementaryPair::new(&plus, &minus).unwrap();
        for _ in 0..10 {
            let xi = PartialFlag::new(&[1, 2, 3], &linalg::random_gaussian(4, 4, &mut rng)).unwrap();
            let c = Config::new(xi, SpacePoint::ComplementaryPair(x.clone()));
            let n = normalize_pair(&fam, &c).unwrap();
            assert_eq!(classify(&fam, &c).unwrap(), classify(&fam, &n.config).unwrap());
        }
        let fam = Family::quadratic_form(1, 2, &[1, 2]).unwrap();
        for _ in 0..10 {
            let g = linalg::random_sl(3, &mut rng);
            let x = QuadraticForm::base(1, 2).unwrap().act(&g).unwrap();
            let xi = PartialFlag::new(&[1, 2], &linalg::random_gaussian(3, 3, &mut rng)).unwrap();
            let c = Config::new(xi, SpacePoint::QuadraticForm(x));
            let n = normalize_pair(&fam, &c).unwrap();
            assert_eq!(classify(&fam, &c).unwrap(), classify(&fam, &n.config).unwrap());
        }
        let fam = Family::pseudo_hyperbolic(2, 2).unwrap();
        let x = NegativeLine::new(&DVector::from_vec(vec![0.2, 0.1, 1.0, 0.3]), 2, 2).unwrap();
        let ell = DMatrix::from_row_slice(4, 4, &[1., 0., 0., 0., 0., 1., 0., 0., 1., 0., 1., 0., 0., 0., 0., 1.]);
        let c = Config::new(PartialFlag::new(&[1], &ell).unwrap(), SpacePoint::NegativeLine(x));
        let n = normalize_pair(&fam, &c).unwrap();
        assert_eq!(classify(&fam, &c).unwrap(), classify(&fam, &n.config).unwrap());
    }

    #[test]
    fn base_point_normalizes_to_identity() {
        let fam = Family::complementary(3, 1, &[1, 2]).unwrap();
        let c = Config::new(PartialFlag::standard(3, &[1, 2]).unwrap(), fam.base_point().unwrap());
        let n = normalize_pair(&fam, &c).unwrap();
        assert!((n.k - DMatrix::<f64>::identity(3, 3)).norm() < 1e-12);
    }
}
