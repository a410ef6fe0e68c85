use std::sync::OnceLock;

use dod_core::anosov::random_point;
use dod_core::ideals::{all_ideals, canonical_ideals, is_fat, is_w0_fat, Ideal};
use dod_core::linalg;
use dod_core::poset::{Certification, Poset, PosetOptions};
use dod_core::spaces::{classify, Config, Family, PartialFlag, SpacePoint};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn posets() -> &'static [Poset] {
    static CELL: OnceLock<Vec<Poset>> = OnceLock::new();
    CELL.get_or_init(|| {
        let opts = PosetOptions { curves: 16, samples: 64, ..Default::default() };
        [
            Family::complementary(3, 1, &[1, 2]),
            Family::complementary(4, 1, &[1, 2, 3]),
            Family::complementary(4, 2, &[1, 3]),
            Family::complementary(5, 2, &[1, 4]),
            Family::quadratic_form(1, 2, &[1, 2]),
            Family::quadratic_form(2, 2, &[1, 3]),
            Family::flag_flag(3, &[1, 2], &[1, 2]),
            Family::flag_flag(4, &[1, 3], &[2]),
            Family::group_manifold(2, &[1], &[1]),
            Family::group_manifold(3, &[1, 2], &[1, 2]),
            Family::pseudo_hyperbolic(2, 2),
        ]
        .into_iter()
        .map(|f| Poset::build(&f.unwrap(), &opts).unwrap())
        .collect()
    })
}

#[test]
fn w0_preserves_the_order_on_symmetric_spaces() {
    for p in posets() {
        let n = p.len();
        // Flag varieties are not tau-invariant; there w0 reverses the order.
        let preserving = p.family.tau_invariant();
        for a in 0..n {
            assert_eq!(p.w0_map[p.w0_map[a]], a, "{}", p.family);
            for b in 0..n {
                if p.leq[a][b] {
                    let (x, y) = if preserving { (p.w0_map[a], p.w0_map[b]) } else { (p.w0_map[b], p.w0_map[a]) };
                    assert!(p.leq[x][y], "{}: {a} <= {b}", p.family);
                }
            }
        }
    }
}

#[test]
fn transverse_relation_is_symmetric_and_upward_closed() {
    for p in posets() {
        let n = p.len();
        for a in 0..n {
            assert!(p.trans_rel[a][p.w0_map[a]], "{}: {a} not related to its w0 image", p.family);
            for b in 0..n {
                assert_eq!(p.trans_rel[a][b], p.trans_rel[b][a], "{}", p.family);
                if p.trans_rel[a][b] {
                    for c in 0..n {
                        if p.leq[b][c] {
                            assert!(p.trans_rel[a][c], "{}: {a}<->{b}, {b}<={c}", p.family);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn unique_minimum_relates_everything() {
    for p in posets().iter().filter(|p| p.minimal.len() == 1) {
        assert_eq!(p.trans_certification, Certification::Exact, "{}", p.family);
        assert!(p.trans_rel.iter().all(|row| row.iter().all(|&x| x)), "{}", p.family);
    }
}

#[test]
fn generic_samples_hit_exactly_the_maximal_positions() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for p in posets() {
        let family = &p.family;
        let d = family.d();
        let mut hit = vec![false; p.len()];
        for _ in 0..2000 {
            let point = random_point(family, &mut rng).unwrap();
            let config = match (family, point) {
                (Family::GroupManifold { theta_l, theta_r, .. }, SpacePoint::GroupManifold(g)) => Config::group_manifold(
                    PartialFlag::new(theta_l, &linalg::random_orthogonal(d, &mut rng)).unwrap(),
                    PartialFlag::new(theta_r, &linalg::random_orthogonal(d, &mut rng)).unwrap(),
                    g,
                ),
                (Family::PseudoHyperbolic { p: pp, .. }, point) => {
                    let mut frame = linalg::random_gaussian(d, d, &mut rng);
                    let (a, b) = (frame.rows(0, *pp).column(0).norm(), frame.rows(*pp, d - pp).column(0).norm());
                    for i in 0..d {
                        frame[(i, 0)] /= if i < *pp { a } else { b };
                    }
                    Config::new(PartialFlag::new(&[1], &frame).unwrap(), point)
                }
                (_, point) => Config::new(PartialFlag::new(&family.theta(), &linalg::random_orthogonal(d, &mut rng)).unwrap(), point),
            };
            let fp = classify(family, &config).unwrap();
            assert!(!fp.is_uncertain(), "{family}: generic sample with margin {}", fp.margin);
            let node = p.node_of(&fp).unwrap();
            assert!(p.maximal.contains(&node), "{family}: generic sample in non-maximal node {node}");
            hit[node] = true;
        }
        for &m in &p.maximal {
            assert!(hit[m], "{family}: maximal node {m} never sampled");
        }
    }
}

#[test]
fn canonical_ideals_pass_their_predicates() {
    for p in posets() {
        let c = canonical_ideals(p).unwrap();
        if p.len() >= 2 {
            assert!(is_fat(p, &c.nonmax), "{}", p.family);
        }
        assert!(is_w0_fat(p, &c.min), "{}", p.family);
        assert!(!is_fat(p, &Ideal::empty()) && !is_w0_fat(p, &Ideal::empty()), "{}", p.family);
    }
}

#[test]
fn unique_minimum_makes_every_ideal_fat() {
    for p in posets().iter().filter(|p| p.minimal.len() == 1 && p.order_certification == Certification::Exact) {
        for ideal in all_ideals(p).unwrap().iter().filter(|i| !i.is_empty()) {
            assert!(is_fat(p, ideal) && is_w0_fat(p, ideal), "{}: {ideal}", p.family);
        }
    }
}

#[test]
fn fat_implies_w0_fat_for_complementary_pairs() {
    for p in posets().iter().filter(|p| matches!(p.family, Family::Complementary { .. })) {
        for ideal in all_ideals(p).unwrap() {
            if is_fat(p, &ideal) {
                assert!(is_w0_fat(p, &ideal), "{}: {ideal}", p.family);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn fatness_is_monotone(which in 0usize..11, a in proptest::collection::vec(any::<bool>(), 40), b in proptest::collection::vec(any::<bool>(), 40)) {
        let p = &posets()[which];
        let n = p.len();
        let ga: Vec<usize> = (0..n).filter(|&i| a[i % 40]).collect();
        let gb: Vec<usize> = (0..n).filter(|&i| b[i % 40]).collect();
        let small = Ideal::generated(p, &ga).unwrap();
        let both: Vec<usize> = ga.iter().chain(&gb).copied().collect();
        let large = Ideal::generated(p, &both).unwrap();
        prop_assert!(small.is_subset(&large));
        if is_fat(p, &small) {
            prop_assert!(is_fat(p, &large));
        }
        if is_w0_fat(p, &small) {
            prop_assert!(is_w0_fat(p, &large));
        }
        for m in large.members() {
            for q in 0..n {
                if p.leq[q][m] {
                    prop_assert!(large.contains(q));
                }
            }
        }
    }
}

#[test]
fn minimal_positions_relate_only_through_w0() {
    let full = posets().iter().filter(|p| match &p.family {
        Family::Complementary { d, theta, .. } => theta.len() == d - 1,
        _ => false,
    });
    for p in full {
        for &a in &p.minimal {
            for &b in &p.minimal {
                assert_eq!(p.trans_rel[a][b], b == p.w0_map[a], "{}: {a}, {b}", p.family);
            }
        }
    }
}
