use dod_core::anosov::random_point;
use dod_core::linalg;
use dod_core::spaces::{
    classify, flag_flag_coset, q_matrix, representatives, symmetric_power_lift, transverse, Config, Family, Motion,
    PartialFlag, PositionFingerprint, SpacePoint,
};
use dod_core::weyl;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn families() -> Vec<Family> {
    vec![
        Family::flag_flag(3, &[1, 2], &[1, 2]).unwrap(),
        Family::flag_flag(4, &[1, 3], &[2]).unwrap(),
        Family::flag_flag(5, &[2], &[1, 4]).unwrap(),
        Family::complementary(4, 1, &[1, 2, 3]).unwrap(),
        Family::complementary(4, 2, &[1, 3]).unwrap(),
        Family::complementary(5, 2, &[1, 2, 3, 4]).unwrap(),
        Family::quadratic_form(1, 2, &[1, 2]).unwrap(),
        Family::quadratic_form(2, 2, &[1, 3]).unwrap(),
        Family::quadratic_form(2, 3, &[1, 4]).unwrap(),
        Family::group_manifold(3, &[1, 2], &[1, 2]).unwrap(),
        Family::pseudo_hyperbolic(2, 2).unwrap(),
        Family::pseudo_hyperbolic(1, 3).unwrap(),
    ]
}

/// `k exp(a) k'` with `a` diagonal, traceless, entries of size at most 1.
fn tame_sl(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut a: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mean = a.iter().sum::<f64>() / d as f64;
    a.iter_mut().for_each(|x| *x -= mean);
    let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d, a.iter().map(|x| x.exp())));
    linalg::random_orthogonal(d, rng) * diag * linalg::random_orthogonal(d, rng)
}

/// Random element of the group acting on `family`: `SO(p, q)` for
/// pseudo-hyperbolic spaces, `SL × SL` for group manifolds, `SL` otherwise.
fn random_motion(family: &Family, rng: &mut ChaCha8Rng) -> Motion {
    match family {
        Family::GroupManifold { m, .. } => Motion::Pair(tame_sl(*m, rng), tame_sl(*m, rng)),
        Family::PseudoHyperbolic { p, q } => {
            let d = p + q;
            let a = linalg::random_gaussian(d, d, rng);
            let skew = (&a - a.transpose()) * 0.25;
            Motion::Linear(linalg::expm(&(q_matrix(*p, *q) * skew)))
        }
        _ => Motion::Linear(tame_sl(family.d(), rng)),
    }
}

fn random_isotropic(p: usize, q: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let d = p + q;
    loop {
        let mut frame = linalg::random_gaussian(d, d, rng);
        let (a, b) = (frame.rows(0, p).column(0).norm(), frame.rows(p, q).column(0).norm());
        for i in 0..d {
            frame[(i, 0)] /= if i < p { a } else { b };
        }
        if frame.determinant().abs() > 1e-3 {
            return frame;
        }
    }
}

/// A configuration in a random position: either fully random or a
/// representative moved by a random group element.
fn random_config(family: &Family, reps: &[Config], rng: &mut ChaCha8Rng) -> Config {
    if rng.random_bool(0.5) {
        let r = &reps[rng.random_range(0..reps.len())];
        return r.act(&random_motion(family, rng)).unwrap();
    }
    let point = random_point(family, rng).unwrap();
    let d = family.d();
    match family {
        Family::GroupManifold { theta_l, theta_r, .. } => {
            let SpacePoint::GroupManifold(g) = point else { unreachable!() };
            Config::group_manifold(
                PartialFlag::new(theta_l, &linalg::random_orthogonal(d, rng)).unwrap(),
                PartialFlag::new(theta_r, &linalg::random_orthogonal(d, rng)).unwrap(),
                g,
            )
        }
        Family::PseudoHyperbolic { p, q } => Config::new(PartialFlag::new(&[1], &random_isotropic(*p, *q, rng)).unwrap(), point),
        _ => Config::new(PartialFlag::new(&family.theta(), &linalg::random_orthogonal(d, rng)).unwrap(), point),
    }
}

#[test]
fn positions_are_group_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for family in families() {
        let reps: Vec<Config> = representatives(&family).unwrap().into_iter().map(|r| r.config).collect();
        let mut certain = 0;
        for _ in 0..1000 {
            let c = random_config(&family, &reps, &mut rng);
            let before = classify(&family, &c).unwrap();
            let after = classify(&family, &c.act(&random_motion(&family, &mut rng)).unwrap()).unwrap();
            if !before.is_uncertain() && !after.is_uncertain() {
                certain += 1;
                assert_eq!(before, after, "{family}: {before} vs {after}");
            }
        }
        assert!(certain >= 900, "{family}: only {certain} certain trials");
    }
}

#[test]
fn samples_land_on_representatives() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for family in families() {
        let reps: Vec<Config> = representatives(&family).unwrap().into_iter().map(|r| r.config).collect();
        let known: Vec<PositionFingerprint> = reps.iter().map(|c| classify(&family, c).unwrap()).collect();
        assert!(known.iter().all(|fp| !fp.is_uncertain()), "{family}");
        for _ in 0..300 {
            let fp = classify(&family, &random_config(&family, &reps, &mut rng)).unwrap();
            if !fp.is_uncertain() {
                assert!(known.contains(&fp), "{family}: {fp} is not a known position");
            }
        }
    }
}

#[test]
fn clan_representatives_are_distinct() {
    for d in 2..=5 {
        for p in 1..d {
            let family = Family::complementary(d, p, &weyl::full_dims(d)).unwrap();
            let fps: Vec<PositionFingerprint> =
                representatives(&family).unwrap().iter().map(|r| classify(&family, &r.config).unwrap()).collect();
            for i in 0..fps.len() {
                for j in 0..i {
                    assert_ne!(fps[i], fps[j], "d={d} p={p}");
                }
            }
        }
    }
}

#[test]
fn swapping_flags_inverts_the_coset() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for d in 2..=4 {
        let sets: Vec<Vec<usize>> =
            (1u32..(1 << (d - 1))).map(|m| (1..d).filter(|i| m & (1 << (i - 1)) != 0).collect()).collect();
        for theta in &sets {
            for theta_prime in &sets {
                for w in weyl::all_permutations(d) {
                    let g = linalg::random_sl(d, &mut rng);
                    let xi = PartialFlag::standard(d, theta).unwrap().act(&g).unwrap();
                    let eta = PartialFlag::new(theta_prime, &w.matrix()).unwrap().act(&g).unwrap();
                    let fwd = classify(&Family::flag_flag(d, theta, theta_prime).unwrap(), &Config::new(xi.clone(), SpacePoint::Flag(eta.clone()))).unwrap();
                    let back = classify(&Family::flag_flag(d, theta_prime, theta).unwrap(), &Config::new(eta, SpacePoint::Flag(xi))).unwrap();
                    let u = flag_flag_coset(&fwd.values, d, theta, theta_prime).unwrap();
                    let v = flag_flag_coset(&back.values, d, theta_prime, theta).unwrap();
                    assert_eq!(v, weyl::double_coset_rep(&u.inverse(), theta_prime, theta).unwrap().rep);
                    assert_eq!(u, weyl::double_coset_rep(&w, theta, theta_prime).unwrap().rep);
                }
            }
        }
    }
}

#[test]
fn classification_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for family in families() {
        let reps: Vec<Config> = representatives(&family).unwrap().into_iter().map(|r| r.config).collect();
        for _ in 0..50 {
            let c = random_config(&family, &reps, &mut rng);
            let a = classify(&family, &c).unwrap();
            let b = classify(&family, &c.clone()).unwrap();
            assert_eq!(a.values, b.values);
            assert_eq!(a.margin.to_bits(), b.margin.to_bits());
        }
    }
}

#[test]
fn standard_and_opposite_flags_are_transverse() {
    for d in 2..=6 {
        let full = weyl::full_dims(d);
        let f = PartialFlag::standard(d, &full).unwrap();
        let g = PartialFlag::opposite_standard(d, &full).unwrap();
        assert!(transverse(&f, &g).unwrap().0);
        assert!(!transverse(&f, &f).unwrap().0);
    }
}

fn sl2() -> impl Strategy<Value = DMatrix<f64>> {
    (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b, c)| {
        // exp of a traceless matrix
        linalg::expm(&DMatrix::from_row_slice(2, 2, &[a, b, c, -a]))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symmetric_power_is_multiplicative(a in sl2(), b in sl2(), d in 2usize..=6) {
        let la = symmetric_power_lift(&a, d).unwrap();
        let lb = symmetric_power_lift(&b, d).unwrap();
        let lab = symmetric_power_lift(&(&a * &b), d).unwrap();
        let prod = &la * &lb;
        prop_assert!((&lab - &prod).norm() <= 1e-10 * prod.norm());
        prop_assert!((la.determinant() - 1.0).abs() < 1e-8 * la.norm().powi(d as i32));
    }
}
