use nalgebra::DVector;

use crate::linalg::{self, NOISE_FLOOR, RANK_TOL};
use crate::spaces::{
    q_form, ComplementaryPair, Config, Family, FamilyTag, GroupManifoldPoint, NegativeLine, PartialFlag,
    PositionFingerprint, QuadraticForm, SpacePoint,
};
use crate::weyl::{self, Permutation};
use crate::{Error, Result};

fn same_d(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::InvalidDimension(format!("objects in R^{a} and R^{b}")));
    }
    Ok(())
}

/// `r(i, j) = dim(ξ^i ∩ η^j)` for `i ∈ θ`, `j ∈ θ'`, row-major.
pub fn classify_flag_flag(xi: &PartialFlag, eta: &PartialFlag) -> Result<PositionFingerprint> {
    same_d(xi.d(), eta.d())?;
    let mut values = Vec::with_capacity(xi.dims().len() * eta.dims().len());
    let mut margin = f64::INFINITY;
    for &i in xi.dims() {
        for &j in eta.dims() {
            let m = linalg::hstack(&xi.subspace(i), &eta.subspace(j));
            let (rank, mg) = linalg::rank_with_margin(&m, RANK_TOL);
            margin = margin.min(mg);
            values.push((i + j - rank) as i64);
        }
    }
    Ok(PositionFingerprint { tag: FamilyTag::FlagFlag, values, margin })
}

/// The minimal double-coset representative whose standard configuration
/// `(F, wF)` has the given intersection dimensions.
pub fn flag_flag_coset(values: &[i64], d: usize, theta: &[usize], theta_prime: &[usize]) -> Result<Permutation> {
    if values.len() != theta.len() * theta_prime.len() {
        return Err(Error::InvalidInput("fingerprint length does not match the dimension sets".into()));
    }
    let mut ib = vec![0];
    ib.extend_from_slice(theta);
    ib.push(d);
    let mut jb = vec![0];
    jb.extend_from_slice(theta_prime);
    jb.push(d);
    let r = |a: usize, b: usize| -> i64 {
        let (i, j) = (ib[a], jb[b]);
        if i == 0 || j == 0 {
            0
        } else if i == d {
            j as i64
        } else if j == d {
            i as i64
        } else {
            values[(a - 1) * theta_prime.len() + (b - 1)]
        }
    };
    let mut next: Vec<usize> = ib[..ib.len() - 1].iter().map(|&i| i + 1).collect();
    let mut images = vec![0; d];
    for b in 1..jb.len() {
        let mut pos = jb[b - 1];
        for a in 1..ib.len() {
            let n = r(a, b) - r(a - 1, b) - r(a, b - 1) + r(a - 1, b - 1);
            if n < 0 {
                return Err(Error::Consistency(format!("negative block count in {values:?}")));
            }
            for _ in 0..n {
                if pos >= jb[b] || next[a - 1] > ib[a] {
                    return Err(Error::Consistency(format!("block counts of {values:?} do not fit")));
                }
                images[pos] = next[a - 1];
                next[a - 1] += 1;
                pos += 1;
            }
        }
        if pos != jb[b] {
            return Err(Error::Consistency(format!("block counts of {values:?} do not fill a block")));
        }
    }
    let w = Permutation::new(images)?;
    Ok(weyl::double_coset_rep(&w, theta, theta_prime)?.rep)
}

/// `(a_i, b_i, c_ij)` with `a_i = dim(ξ^i ∩ U⁺)`, `b_i = dim(ξ^i ∩ U⁻)` and
/// `c_ij = dim(ξ^i + π₊ ξ^j)`.
pub fn classify_flag_pair(xi: &PartialFlag, x: &ComplementaryPair) -> Result<PositionFingerprint> {
    same_d(xi.d(), x.d())?;
    let dims = xi.dims();
    let n = dims.len();
    let mut values = vec![0_i64; 2 * n + n * n];
    let mut margin = f64::INFINITY;
    for (a, &i) in dims.iter().enumerate() {
        let s = xi.subspace(i);
        let (r, m) = linalg::rank_with_margin(&linalg::hstack(&s, x.plus()), RANK_TOL);
        margin = margin.min(m);
        values[a] = (i + x.p() - r) as i64;
        let (r, m) = linalg::rank_with_margin(&linalg::hstack(&s, x.minus()), RANK_TOL);
        margin = margin.min(m);
        values[n + a] = (i + x.q() - r) as i64;
    }
    for (a, &i) in dims.iter().enumerate() {
        let s = xi.subspace(i);
        for (b, &j) in dims.iter().enumerate() {
            let pj = x.projection_plus() * xi.subspace(j);
            let (r, m) = linalg::rank_with_margin(&linalg::hstack(&s, &pj), RANK_TOL);
            margin = margin.min(m);
            values[2 * n + a * n + b] = r as i64;
        }
    }
    Ok(PositionFingerprint { tag: FamilyTag::Complementary, values, margin })
}

fn sign_count(vals: &[f64], tol: f64, margin: &mut f64) -> (i64, i64, i64) {
    let (mut pos, mut neg, mut zero) = (0, 0, 0);
    for &v in vals {
        if v.abs() > NOISE_FLOOR {
            *margin = margin.min(v.abs());
        }
        if v.abs() <= tol {
            zero += 1;
        } else {
            if v > 0.0 {
                pos += 1;
            } else {
                neg += 1;
            }
        }
    }
    (pos, neg, zero)
}

/// For `θ = {1, d-1}`: signs of `x` on `ξ¹`, the signature `(n₊, n₋, n₀)` of
/// `x` restricted to `ξ^{d-1}`, and the rank of the pairing `ξ¹ × ξ^{d-1}`.
pub fn classify_flag_form(xi: &PartialFlag, x: &QuadraticForm) -> Result<PositionFingerprint> {
    let d = x.d();
    same_d(xi.d(), d)?;
    let want = if d == 2 { vec![1] } else { vec![1, d - 1] };
    if xi.dims() != &want[..] {
        return Err(Error::Unsupported(format!(
            "flag-form positions are classified for theta = {want:?} only, got {:?}",
            xi.dims()
        )));
    }
    let s = x.matrix() / x.norm();
    let mut margin = f64::INFINITY;
    let v = xi.subspace(1);
    let w = xi.subspace(d - 1);
    let qv = (v.transpose() * &s * &v)[(0, 0)];
    let (lp, ln, _) = sign_count(&[qv], RANK_TOL, &mut margin);
    let restricted = w.transpose() * &s * &w;
    let eig = restricted.symmetric_eigenvalues();
    let (wp, wn, wz) = sign_count(eig.as_slice(), RANK_TOL, &mut margin);
    let pairing = (v.transpose() * &s * &w).norm();
    if pairing > NOISE_FLOOR {
        margin = margin.min(pairing);
    }
    let pr = i64::from(pairing > RANK_TOL);
    Ok(PositionFingerprint { tag: FamilyTag::QuadraticForm, values: vec![lp, ln, wp, wn, wz, pr], margin })
}

/// `pos(ξ_L, g · ξ_R)` as a flag-flag position.
pub fn classify_group_manifold(
    xi_l: &PartialFlag,
    xi_r: &PartialFlag,
    g: &GroupManifoldPoint,
) -> Result<PositionFingerprint> {
    same_d(xi_r.d(), g.m())?;
    let moved = xi_r.act(g.matrix())?;
    let mut fp = classify_flag_flag(xi_l, &moved)?;
    fp.tag = FamilyTag::GroupManifold;
    Ok(fp)
}

/// `[0]` when `x ⊂ ℓ^⊥` (incident), `[1]` otherwise.
pub fn classify_line_hpq(ell: &DVector<f64>, x: &NegativeLine) -> Result<PositionFingerprint> {
    let (p, q) = (x.p(), x.q());
    if ell.len() != p + q {
        return Err(Error::InvalidDimension(format!("line in R^{} for signature ({p},{q})", ell.len())));
    }
    let n2 = ell.norm_squared();
    if n2 == 0.0 || q_form(ell, ell, p).abs() > 1e-6 * n2 {
        return Err(Error::InvalidInput("line is not isotropic".into()));
    }
    let val = q_form(ell, x.vector(), p).abs() / (n2.sqrt() * x.vector().norm());
    let margin = if val > NOISE_FLOOR { val } else { f64::INFINITY };
    let values = vec![i64::from(val > RANK_TOL)];
    Ok(PositionFingerprint { tag: FamilyTag::PseudoHyperbolic, values, margin })
}

/// Dispatch on the family, checking that `config` belongs to it.
pub fn classify(family: &Family, config: &Config) -> Result<PositionFingerprint> {
    if !family.accepts(&config.point) {
        return Err(Error::InvalidPoint(format!("{} is not a point of {family}", config.point.kind())));
    }
    let theta = family.theta();
    if config.flag.d() != family.d() || config.flag.dims() != &theta[..] {
        return Err(Error::InvalidInput(format!(
            "flag with dims {:?} in R^{} does not match {family}",
            config.flag.dims(),
            config.flag.d()
        )));
    }
    match (family, &config.point) {
        (Family::FlagFlag { .. }, SpacePoint::Flag(eta)) => classify_flag_flag(&config.flag, eta),
        (Family::Complementary { .. }, SpacePoint::ComplementaryPair(x)) => classify_flag_pair(&config.flag, x),
        (Family::QuadraticForm { .. }, SpacePoint::QuadraticForm(x)) => classify_flag_form(&config.flag, x),
        (Family::GroupManifold { theta_r, .. }, SpacePoint::GroupManifold(g)) => {
            let xi_r = config.flag_r.as_ref().ok_or_else(|| Error::InvalidInput("missing right flag".into()))?;
            if xi_r.dims() != &theta_r[..] {
                return Err(Error::InvalidInput(format!("right flag dims {:?}, expected {theta_r:?}", xi_r.dims())));
            }
            classify_group_manifold(&config.flag, xi_r, g)
        }
        (Family::PseudoHyperbolic { .. }, SpacePoint::NegativeLine(x)) => {
            let ell: DVector<f64> = config.flag.frame().column(0).into_owned();
            classify_line_hpq(&ell, x)
        }
        _ => unreachable!("accepts() checked the pairing"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn perm(v: &[usize]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    #[test]
    fn flag_flag_examples() {
        let full = [1, 2];
        let f = PartialFlag::standard(3, &full).unwrap();
        let fp = classify_flag_flag(&f, &f).unwrap();
        assert_eq!(flag_flag_coset(&fp.values, 3, &full, &full).unwrap(), Permutation::identity(3));
        let g = PartialFlag::opposite_standard(3, &full).unwrap();
        let fp = classify_flag_flag(&f, &g).unwrap();
        assert_eq!(flag_flag_coset(&fp.values, 3, &full, &full).unwrap(), weyl::longest_element(3).unwrap());
        let s1 = PartialFlag::new(&full, &perm(&[2, 1, 3]).matrix()).unwrap();
        let fp = classify_flag_flag(&f, &s1).unwrap();
        assert_eq!(flag_flag_coset(&fp.values, 3, &full, &full).unwrap(), perm(&[2, 1, 3]));
        assert!(!fp.is_uncertain());
    }

    #[test]
    fn coset_recovery_roundtrip() {
        for theta in [vec![1, 2, 3], vec![1, 3], vec![2], vec![1]] {
            for tp in [vec![1, 2, 3], vec![2], vec![1, 3]] {
                for w in weyl::all_permutations(4) {
                    let f = PartialFlag::standard(4, &theta).unwrap();
                    let g = PartialFlag::new(&tp, &w.matrix()).unwrap();
                    let fp = classify_flag_flag(&f, &g).unwrap();
                    let rep = flag_flag_coset(&fp.values, 4, &theta, &tp).unwrap();
                    assert_eq!(rep, weyl::double_coset_rep(&w, &theta, &tp).unwrap().rep);
                }
            }
        }
    }

    #[test]
    fn pair_examples() {
        let x = ComplementaryPair::base(2, 1).unwrap();
        let plus = PartialFlag::standard(2, &[1]).unwrap();
        assert_eq!(classify_flag_pair(&plus, &x).unwrap().values[..2], [1, 0]);
        let generic = PartialFlag::new(&[1], &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0])).unwrap();
        assert_eq!(classify_flag_pair(&generic, &x).unwrap().values, vec![0, 0, 2]);
    }

    #[test]
    fn hpq_examples() {
        let mut ell = DVector::zeros(4);
        ell[0] = 1.0;
        ell[2] = 1.0;
        let mut v = DVector::zeros(4);
        v[2] = 1.0;
        let x = NegativeLine::new(&v, 2, 2).unwrap();
        assert_eq!(classify_line_hpq(&ell, &x).unwrap().values, vec![1]);
        let x = NegativeLine::base(2, 2).unwrap();
        assert_eq!(classify_line_hpq(&ell, &x).unwrap().values, vec![0]);
        let mut bad = DVector::zeros(4);
        bad[0] = 1.0;
        assert!(classify_line_hpq(&bad, &x).is_err());
    }
}
