//! `dod check`: desk-scale invariant suite plus fixture comparisons.

use std::collections::{BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use dod_core::anosov::{
    anosov_fit, cartan, domain_membership, domain_sample, limit_set_sample, properness_statistic, random_point,
    schottky_sl2, sym_lift, word_ball, ball_size, DomainOptions, PointVerdict, RepSpec,
};
use dod_core::ideals::{all_ideals, canonical_ideals, is_fat, is_w0_fat, minimal_fat_ideals, Ideal, Mode};
use dod_core::linalg::{self, RANK_TOL};
use dod_core::poset::{Certification, Poset, PosetOptions};
use dod_core::spaces::{
    classify, symmetric_power_lift, ComplementaryPair, Config, Family, Motion, PartialFlag, SpacePoint,
};
use dod_core::weyl::{self, Permutation};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::commands::{IdealMode, DEFAULT_SEED};
use crate::error::{io_err, CliError, Result};
use crate::files::{bundled, parse_rep, SpaceSpec};
use crate::output::{budget, emit, sha256_hex, to_json, VERSION};
use crate::poset_file::{dot, PosetBody, PosetFile};

pub const EMBEDDED_FIXTURES: &str = include_str!("fixtures.json");

type Outcome = std::result::Result<String, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum Fixture {
    Poset {
        space: SpaceSpec,
        nodes: usize,
        levels_from_top: Vec<usize>,
        minimal: usize,
        maximal: usize,
        certification: String,
        #[serde(default)]
        hasse: Option<Vec<[usize; 2]>>,
        #[serde(default)]
        w0_fixes_minimal: Option<bool>,
    },
    Matsuki {
        /// `[d, p, minimal positions, w0-fixed minimal positions]`.
        cases: Vec<[usize; 4]>,
    },
    LabelledIdeals {
        d: usize,
        p: usize,
        ideals: Vec<Vec<usize>>,
        relation: Vec<[usize; 2]>,
    },
    MinimalIdeals {
        space: SpaceSpec,
        mode: IdealMode,
        sizes: Vec<usize>,
    },
    PairIdeal {
        d: usize,
        lines: Vec<usize>,
        w0_fat: bool,
        fat: bool,
    },
    Anosov {
        rep: String,
        radius: usize,
        c_positive: bool,
        #[serde(default)]
        monotone_tol: Option<f64>,
    },
    Properness {
        rep: String,
        space: SpaceSpec,
        radius: usize,
    },
    Domain {
        rep: String,
        space: SpaceSpec,
        ideal: String,
        samples: usize,
        #[serde(default)]
        in_above: Option<f64>,
        #[serde(default)]
        in_at_most: Option<f64>,
    },
}

/// A bundled name, or representation-file text.
fn fixture_rep(s: &str) -> std::result::Result<RepSpec, String> {
    if s.contains('=') {
        parse_rep(s, "fixture").map(|(r, _)| r).map_err(err)
    } else {
        bundled(s).map_err(err)
    }
}

/// Backtracking search for a bijection carrying one edge set onto the other.
fn isomorphic(n: usize, a: &[(usize, usize)], b: &[(usize, usize)]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let ea: BTreeSet<(usize, usize)> = a.iter().copied().collect();
    let eb: BTreeSet<(usize, usize)> = b.iter().copied().collect();
    let degree = |e: &BTreeSet<(usize, usize)>, v: usize| {
        (e.iter().filter(|(x, _)| *x == v).count(), e.iter().filter(|(_, y)| *y == v).count())
    };
    fn extend(
        v: usize,
        n: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        ea: &BTreeSet<(usize, usize)>,
        eb: &BTreeSet<(usize, usize)>,
        ok: &dyn Fn(usize, usize) -> bool,
    ) -> bool {
        if v == n {
            return ea.iter().all(|&(x, y)| eb.contains(&(map[x], map[y])));
        }
        for t in 0..n {
            if used[t] || !ok(v, t) {
                continue;
            }
            let consistent = (0..v).all(|u| ea.contains(&(u, v)) == eb.contains(&(map[u], t)) && ea.contains(&(v, u)) == eb.contains(&(t, map[u])));
            if !consistent {
                continue;
            }
            map[v] = t;
            used[t] = true;
            if extend(v + 1, n, map, used, ea, eb, ok) {
                return true;
            }
            used[t] = false;
        }
        false
    }
    let ok = |v: usize, t: usize| degree(&ea, v) == degree(&eb, t);
    extend(0, n, &mut vec![0; n], &mut vec![false; n], &ea, &eb, &ok)
}

fn inside(a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    let (rb, _) = linalg::rank_with_margin(b, RANK_TOL);
    let (rab, _) = linalg::rank_with_margin(&linalg::hstack(b, a), RANK_TOL);
    rab == rb
}

fn basis(d: usize, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(d, cols.len(), |r, c| if r == cols[c] { 1.0 } else { 0.0 })
}

/// Minimal positions of pairs against `(ξ¹, ξ^{d-1})`, numbered 1 to 4 by
/// which of `U±` contains the line and which lies in the hyperplane.
fn minimal_labels(poset: &Poset) -> std::result::Result<HashMap<usize, usize>, String> {
    let mut out = HashMap::new();
    for &m in &poset.minimal {
        let config = &poset.nodes[m].representative;
        let SpacePoint::ComplementaryPair(x) = &config.point else {
            return Err("not a complementary-pairs poset".into());
        };
        let d = config.flag.d();
        let line = config.flag.subspace(1);
        let hyper = config.flag.subspace(d - 1);
        let label = match (inside(&line, x.plus()), inside(&line, x.minus()), inside(x.plus(), &hyper), inside(x.minus(), &hyper)) {
            (true, false, true, false) => 1,
            (true, false, false, true) => 2,
            (false, true, true, false) => 3,
            (false, true, false, true) => 4,
            _ => return Err(format!("minimal node {m} matches no pattern")),
        };
        if out.values().any(|&l| l == label) {
            return Err(format!("two minimal nodes labelled p{label}"));
        }
        out.insert(m, label);
    }
    Ok(out)
}

fn run_fixture(fx: &Fixture, seed: u64) -> Outcome {
    match fx {
        Fixture::Poset { space, nodes, levels_from_top, minimal, maximal, certification, hasse, w0_fixes_minimal } => {
            let poset = Poset::build(&space.family().map_err(err)?, &PosetOptions::default()).map_err(err)?;
            let mut levels: Vec<usize> = poset.levels().iter().map(|l| l.len()).collect();
            levels.reverse();
            ensure(poset.len() == *nodes, || format!("{} nodes, expected {nodes}", poset.len()))?;
            ensure(levels == *levels_from_top, || format!("levels {levels:?}, expected {levels_from_top:?}"))?;
            ensure(poset.minimal.len() == *minimal, || format!("{} minimal, expected {minimal}", poset.minimal.len()))?;
            ensure(poset.maximal.len() == *maximal, || format!("{} maximal, expected {maximal}", poset.maximal.len()))?;
            ensure(poset.order_certification.to_string() == *certification, || {
                format!("certification {}, expected {certification}", poset.order_certification)
            })?;
            if let Some(edges) = hasse {
                let want: Vec<(usize, usize)> = edges.iter().map(|&[a, b]| (a, b)).collect();
                let have: Vec<(usize, usize)> = poset.covers.iter().map(|&(lo, hi)| (hi, lo)).collect();
                ensure(isomorphic(poset.len(), &have, &want), || "Hasse diagram is not isomorphic to the fixture".into())?;
            }
            if let Some(w) = w0_fixes_minimal {
                let fixes = poset.minimal.iter().all(|&m| poset.w0_map[m] == m);
                ensure(fixes == *w, || format!("w0 fixes the minimal nodes: {fixes}"))?;
            }
            Ok(format!("{} nodes, levels {levels:?}", poset.len()))
        }
        Fixture::Matsuki { cases } => {
            let opts = PosetOptions { max_nodes: 256, curves: 8, samples: 8, seed };
            for &[d, p, want_min, want_fixed] in cases {
                let poset = Poset::build(&Family::complementary(d, p, &weyl::full_dims(d)).map_err(err)?, &opts).map_err(err)?;
                let fixed = poset.minimal.iter().filter(|&&m| poset.w0_map[m] == m).count();
                ensure(poset.minimal.len() == want_min && fixed == want_fixed, || {
                    format!("(d={d},p={p}): {} minimal and {fixed} fixed, expected {want_min} and {want_fixed}", poset.minimal.len())
                })?;
            }
            Ok(format!("{} cases", cases.len()))
        }
        Fixture::LabelledIdeals { d, p, ideals, relation } => {
            let poset = Poset::build(&Family::complementary(*d, *p, &[1, d - 1]).map_err(err)?, &PosetOptions::default()).map_err(err)?;
            let labels = minimal_labels(&poset)?;
            let found: BTreeSet<BTreeSet<usize>> = minimal_fat_ideals(&poset, Mode::W0Fat)
                .map_err(err)?
                .iter()
                .map(|i| i.restricted(&poset.minimal).iter().map(|m| labels[m]).collect())
                .collect();
            let want: BTreeSet<BTreeSet<usize>> = ideals.iter().map(|s| s.iter().copied().collect()).collect();
            ensure(found == want, || format!("minimal w0-fat ideals {found:?}, expected {want:?}"))?;
            let mut rel = BTreeSet::new();
            for &a in &poset.minimal {
                for &b in &poset.minimal {
                    if poset.trans_rel[a][b] {
                        rel.insert([labels[&a], labels[&b]]);
                    }
                }
            }
            let want_rel: BTreeSet<[usize; 2]> = relation.iter().copied().collect();
            ensure(rel == want_rel, || format!("relation on minimal nodes {rel:?}, expected {want_rel:?}"))?;
            Ok(format!("{} ideals", found.len()))
        }
        Fixture::MinimalIdeals { space, mode, sizes } => {
            let poset = Poset::build(&space.family().map_err(err)?, &PosetOptions::default()).map_err(err)?;
            let m = match mode {
                IdealMode::Fat => Mode::Fat,
                IdealMode::W0fat => Mode::W0Fat,
            };
            let mut found: Vec<usize> = minimal_fat_ideals(&poset, m).map_err(err)?.iter().map(|i| i.len()).collect();
            found.sort_unstable();
            ensure(found == *sizes, || format!("ideal sizes {found:?}, expected {sizes:?}"))?;
            Ok(format!("sizes {found:?}"))
        }
        Fixture::PairIdeal { d, lines, w0_fat, fat } => {
            let full = weyl::full_dims(*d);
            let poset = Poset::build(&Family::complementary(*d, 1, &full).map_err(err)?, &PosetOptions::default()).map_err(err)?;
            let flag = PartialFlag::standard(*d, &full).map_err(err)?;
            let mut nodes = Vec::new();
            for &i in lines {
                let rest: Vec<usize> = (0..*d).filter(|&j| j != i).collect();
                let x = ComplementaryPair::new(&basis(*d, &[i]), &basis(*d, &rest)).map_err(err)?;
                nodes.push(poset.locate(&Config::new(flag.clone(), SpacePoint::ComplementaryPair(x))).map_err(err)?.0);
            }
            let ideal = Ideal::new(&poset, &nodes).map_err(err)?;
            let (w, f) = (is_w0_fat(&poset, &ideal), is_fat(&poset, &ideal));
            ensure(w == *w0_fat && f == *fat, || format!("ideal {ideal}: w0-fat {w}, fat {f}"))?;
            Ok(format!("ideal {ideal}"))
        }
        Fixture::Anosov { rep, radius, c_positive, monotone_tol } => {
            let rep = fixture_rep(rep)?;
            let fit = anosov_fit(&rep, *radius, budget().map_err(err)?).map_err(err)?;
            ensure((fit.c > 0.0) == *c_positive, || format!("c = {:.6}", fit.c))?;
            if let Some(tol) = monotone_tol {
                ensure(fit.monotone_within(*tol), || "margin table is not monotone".into())?;
            }
            Ok(format!("c = {:.4}", fit.c))
        }
        Fixture::Properness { rep, space, radius } => {
            let rep = fixture_rep(rep)?;
            let t = properness_statistic(&rep, &space.family().map_err(err)?, *radius, budget().map_err(err)?).map_err(err)?;
            ensure(t.rows.iter().all(|&(_, n)| n == t.ball_size), || format!("counts {:?} against ball {}", t.rows, t.ball_size))?;
            Ok(format!("N(t) = {} for every t", t.ball_size))
        }
        Fixture::Domain { rep, space, ideal, samples, in_above, in_at_most } => {
            let rep = fixture_rep(rep)?;
            let poset = Poset::build(&space.family().map_err(err)?, &PosetOptions::default()).map_err(err)?;
            let ideal = match ideal.as_str() {
                "min" => canonical_ideals(&poset).map_err(err)?.min,
                "nonmax" => canonical_ideals(&poset).map_err(err)?.nonmax,
                "full" => Ideal::full(&poset).map_err(err)?,
                other => return Err(format!("unknown ideal {other:?}")),
            };
            let opts = DomainOptions { n_points: *samples, seed, budget: budget().map_err(err)?, ..Default::default() };
            let s = domain_sample(&rep, &ideal, &poset, &opts).map_err(err)?;
            if let Some(lo) = in_above {
                ensure(s.in_fraction > *lo, || format!("in fraction {:.4} is not above {lo}", s.in_fraction))?;
            }
            if let Some(hi) = in_at_most {
                ensure(s.in_fraction <= *hi, || format!("in fraction {:.4} exceeds {hi}", s.in_fraction))?;
            }
            Ok(format!("in fraction {:.4}", s.in_fraction))
        }
    }
}

/// `k exp(a) k'`, with `a` traceless diagonal of entries at most 1.
fn tame_sl(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut a: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mean = a.iter().sum::<f64>() / d as f64;
    a.iter_mut().for_each(|x| *x -= mean);
    let diag = DMatrix::from_diagonal(&DVector::from_iterator(d, a.iter().map(|x| x.exp())));
    linalg::random_orthogonal(d, rng) * diag * linalg::random_orthogonal(d, rng)
}

fn subword_products(w: &Permutation) -> BTreeSet<Vec<usize>> {
    let word = w.reduced_word();
    (0u32..(1 << word.len()))
        .map(|mask| {
            let mut p = Permutation::identity(w.d());
            for (k, &i) in word.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    p = p.right_mul_simple(i);
                }
            }
            p.images().to_vec()
        })
        .collect()
}

fn inv_bruhat(_seed: u64) -> Outcome {
    let mut pairs = 0;
    for d in 2..=4 {
        let perms = weyl::all_permutations(d);
        for w in &perms {
            let below = subword_products(w);
            for u in &perms {
                let leq = weyl::bruhat_leq(u, w).map_err(err)?;
                ensure(leq == below.contains(u.images()), || format!("d={d}: {u} <= {w} disagrees with subwords"))?;
                pairs += 1;
            }
        }
    }
    Ok(format!("{pairs} pairs"))
}

fn inv_double_cosets(_seed: u64) -> Outcome {
    let mut n = 0;
    for d in 2..=4usize {
        let sets: Vec<Vec<usize>> = (0u32..(1 << (d - 1))).map(|m| (1..d).filter(|i| m & (1 << (i - 1)) != 0).collect()).collect();
        for theta in &sets {
            for theta_p in &sets {
                let left: Vec<usize> = (1..d).filter(|i| !theta.contains(i)).collect();
                for w in weyl::all_permutations(d) {
                    let rep = weyl::double_coset_rep(&w, theta, theta_p).map_err(err)?.rep;
                    ensure(weyl::double_coset_rep(&rep, theta, theta_p).map_err(err)?.rep == rep, || format!("{w}: not idempotent"))?;
                    for &i in &left {
                        let moved = weyl::double_coset_rep(&w.left_mul_simple(i), theta, theta_p).map_err(err)?.rep;
                        ensure(moved == rep, || format!("{w}: left multiplication by s{i} changes the representative"))?;
                    }
                    n += 1;
                }
            }
        }
    }
    Ok(format!("{n} cosets"))
}

fn inv_classification(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc1a55);
    let families = [
        Family::complementary(4, 1, &[1, 2, 3]),
        Family::complementary(4, 2, &[1, 3]),
        Family::quadratic_form(1, 2, &[1, 2]),
        Family::flag_flag(3, &[1, 2], &[1, 2]),
    ];
    let mut certain = 0;
    let mut first = String::new();
    for fam in families {
        let fam = fam.map_err(err)?;
        let d = fam.d();
        for _ in 0..200 {
            let x = random_point(&fam, &mut rng).map_err(err)?;
            let c = Config::new(PartialFlag::new(&fam.theta(), &linalg::random_orthogonal(d, &mut rng)).map_err(err)?, x);
            let g = tame_sl(d, &mut rng);
            let before = classify(&fam, &c).map_err(err)?;
            let after = classify(&fam, &c.act(&Motion::Linear(g)).map_err(err)?).map_err(err)?;
            if !before.is_uncertain() && !after.is_uncertain() {
                ensure(before == after, || format!("{fam}: {before} moved to {after}"))?;
                certain += 1;
                if first.is_empty() {
                    first = before.to_string();
                }
            }
        }
    }
    ensure(certain >= 700, || format!("only {certain} of 800 trials were certain"))?;
    Ok(format!("{certain} certain trials, first {first}"))
}

fn inv_posets(seed: u64) -> Outcome {
    let opts = PosetOptions { curves: 16, samples: 32, seed, ..Default::default() };
    let families = [
        Family::complementary(3, 1, &[1, 2]),
        Family::complementary(4, 2, &[1, 3]),
        Family::quadratic_form(2, 2, &[1, 3]),
        Family::flag_flag(4, &[1, 3], &[2]),
        Family::group_manifold(2, &[1], &[1]),
        Family::pseudo_hyperbolic(2, 2),
    ];
    let mut total = 0;
    for fam in families {
        let poset = Poset::build(&fam.map_err(err)?, &opts).map_err(err)?;
        let bad = poset.check_invariants();
        ensure(bad.is_empty(), || format!("{}: {}", poset.family, bad.join("; ")))?;
        if !poset.family.tau_invariant() {
            for a in 0..poset.len() {
                for b in 0..poset.len() {
                    if poset.leq[a][b] {
                        ensure(poset.leq[poset.w0_map[b]][poset.w0_map[a]], || format!("{}: w0 does not reverse {a} <= {b}", poset.family))?;
                    }
                }
            }
        }
        let canon = canonical_ideals(&poset).map_err(err)?;
        ensure(is_w0_fat(&poset, &canon.min), || format!("{}: minimal ideal not w0-fat", poset.family))?;
        let ideals = all_ideals(&poset).map_err(err)?;
        for i in &ideals {
            for j in &ideals {
                if i.is_subset(j) {
                    ensure(!is_fat(&poset, i) || is_fat(&poset, j), || format!("{}: fatness not monotone", poset.family))?;
                    ensure(!is_w0_fat(&poset, i) || is_w0_fat(&poset, j), || format!("{}: w0-fatness not monotone", poset.family))?;
                }
            }
        }
        total += poset.len();
    }
    Ok(format!("6 posets, {total} nodes"))
}

fn inv_flag_bruhat(_seed: u64) -> Outcome {
    for d in 2..=4usize {
        let full = weyl::full_dims(d);
        let poset = Poset::build(&Family::flag_flag(d, &full, &full).map_err(err)?, &PosetOptions::default()).map_err(err)?;
        let std = PartialFlag::standard(d, &full).map_err(err)?;
        let perms = weyl::all_permutations(d);
        let nodes = perms
            .iter()
            .map(|w| Ok(poset.locate(&Config::new(std.clone(), SpacePoint::Flag(PartialFlag::new(&full, &w.matrix()).map_err(err)?))).map_err(err)?.0))
            .collect::<std::result::Result<Vec<usize>, String>>()?;
        ensure(nodes.iter().collect::<BTreeSet<_>>().len() == perms.len() && poset.len() == perms.len(), || format!("d={d}: not a bijection"))?;
        for (i, u) in perms.iter().enumerate() {
            for (j, w) in perms.iter().enumerate() {
                ensure(poset.leq[nodes[i]][nodes[j]] == weyl::bruhat_leq(u, w).map_err(err)?, || format!("d={d}: {u} vs {w}"))?;
            }
        }
        ensure(poset.order_certification == Certification::Exact, || format!("d={d}: order not exact"))?;
    }
    Ok("d <= 4".into())
}

fn inv_cartan(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xca27a);
    let mut worst = 0f64;
    for _ in 0..200 {
        let d = rng.random_range(2..=5);
        let g = linalg::random_sl(d, &mut rng);
        let full = weyl::full_dims(d);
        let mu = cartan(&g, &full).map_err(err)?.mu;
        let moved = linalg::random_orthogonal(d, &mut rng) * &g * linalg::random_orthogonal(d, &mut rng);
        let mu2 = cartan(&moved, &full).map_err(err)?.mu;
        let inv = g.clone().try_inverse().ok_or("singular sample")?;
        let mu3 = cartan(&inv, &full).map_err(err)?.mu;
        for i in 0..d {
            worst = worst.max((mu[i] - mu2[i]).abs()).max((mu3[i] + mu[d - 1 - i]).abs());
        }
        ensure(mu.iter().sum::<f64>().abs() < 1e-8, || "Cartan projection not traceless".into())?;
    }
    ensure(worst < 1e-8, || format!("deviation {worst:.2e}"))?;
    let a = linalg::expm(&DMatrix::from_row_slice(2, 2, &[0.3, rng.random_range(-1.0..1.0), 0.2, -0.3]));
    let b = linalg::expm(&DMatrix::from_row_slice(2, 2, &[-0.1, 0.4, rng.random_range(-1.0..1.0), 0.1]));
    for d in 2..=5 {
        let lhs = symmetric_power_lift(&(&a * &b), d).map_err(err)?;
        let rhs = symmetric_power_lift(&a, d).map_err(err)? * symmetric_power_lift(&b, d).map_err(err)?;
        ensure((&lhs - &rhs).norm() <= 1e-10 * rhs.norm(), || format!("symmetric power {d} is not multiplicative"))?;
    }
    Ok(format!("worst deviation {worst:.1e}"))
}

fn inv_words(_seed: u64) -> Outcome {
    let rep = schottky_sl2();
    for r in 0..=6 {
        let ball = word_ball(&rep, r, budget().map_err(err)?).map_err(err)?;
        ensure(ball.len() as u64 == ball_size(4, r), || format!("radius {r}: {} words", ball.len()))?;
    }
    ensure(ball_size(4, 8) - ball_size(4, 7) == 8748, || "sphere of radius 8".into())?;
    Ok("balls up to radius 6".into())
}

fn inv_limit_set(seed: u64) -> Outcome {
    let rep = schottky_sl2();
    let sample = limit_set_sample(&rep, 100, 6, 500, seed, budget().map_err(err)?).map_err(err)?;
    let attractor = |c: char| match c {
        'a' => 0.0,
        'A' => std::f64::consts::FRAC_PI_2,
        'b' => std::f64::consts::FRAC_PI_4,
        _ => 3.0 * std::f64::consts::FRAC_PI_4,
    };
    for lf in &sample.flags {
        let v = lf.flags[0].frame().column(0);
        let angle = v[1].atan2(v[0]).rem_euclid(std::f64::consts::PI);
        let t = attractor(lf.word.chars().next().unwrap_or('a'));
        let dist = (angle - t).abs().min(std::f64::consts::PI - (angle - t).abs());
        ensure(dist < 0.1, || format!("{} sits {dist:.3} rad from its ping-pong disk", lf.word))?;
    }
    ensure(sample.min_pairwise_transversality_margin > 0.0, || "a sampled pair is not transverse".into())?;
    Ok(format!("{} flags, first word {}", sample.len(), sample.flags[0].word))
}

fn inv_domain_witnesses(seed: u64) -> Outcome {
    let rep = sym_lift(4).map_err(err)?;
    let poset = Poset::build(&Family::complementary(4, 1, &[1, 3]).map_err(err)?, &PosetOptions::default()).map_err(err)?;
    let ideal = canonical_ideals(&poset).map_err(err)?.nonmax;
    let flags = limit_set_sample(&rep, 64, 6, 0, seed, budget().map_err(err)?).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0d07);
    let mut out = 0;
    let mut first = None;
    for _ in 0..100 {
        // U+ on the line of a sampled limit flag, so that flag alone puts x out.
        let k = rng.random_range(0..flags.len());
        let line = flags.flags[k].flags[0].subspace(1);
        let x = loop {
            if let Ok(x) = ComplementaryPair::new(&line, &linalg::random_gaussian(4, 3, &mut rng)) {
                break SpacePoint::ComplementaryPair(x);
            }
        };
        let m = domain_membership(&x, &flags, &ideal, &poset).map_err(err)?;
        let PointVerdict::Out { flag, node } = m.verdict else { continue };
        ensure(ideal.contains(node), || format!("witness node {node} is outside the ideal"))?;
        ensure(m.witness_word.as_deref() == Some(flags.flags[flag].word.as_str()), || "witness word mismatch".into())?;
        let config = Config::new(flags.flags[flag].flags[0].restrict(&[1, 3]).map_err(err)?, x.clone());
        ensure(poset.locate(&config).map_err(err)?.0 == node, || "witness does not reclassify to its node".into())?;
        out += 1;
        first.get_or_insert(flags.flags[flag].word.clone());
    }
    ensure(out >= 90, || format!("only {out} of 100 incident points were excluded"))?;
    Ok(format!("{out} of 100 incident points out, first witness {}", first.unwrap_or_default()))
}

fn inv_output(seed: u64) -> Outcome {
    let spec = SpaceSpec::Complementary { d: 3, p: 1, theta: Some(vec![1, 2]) };
    let opts = crate::poset_file::BuildOptions::with_seed(seed);
    let poset = Poset::build(&spec.family().map_err(err)?, &opts.core()).map_err(err)?;
    let file = PosetFile::new(&spec, "input", &poset, opts).map_err(err)?;
    let text = to_json(&file).map_err(err)?;
    let back: PosetFile = serde_json::from_str(&text).map_err(err)?;
    ensure(to_json(&back).map_err(err)? == text, || "poset JSON does not round-trip".into())?;
    ensure(back.poset.hash().map_err(err)? == file.content_hash, || "content hash does not round-trip".into())?;
    let again = PosetBody::from_poset(&Poset::build(&spec.family().map_err(err)?, &opts.core()).map_err(err)?, opts);
    ensure(again.hash().map_err(err)? == file.content_hash, || "rebuilding gives a different hash".into())?;
    let g = dot(&file.poset, &file.content_hash);
    let dashed = g.lines().filter(|l| l.contains("style=dashed")).count();
    let pairs = file.poset.w0_map.iter().enumerate().filter(|(a, b)| a < *b).count();
    ensure(dashed == pairs, || format!("{dashed} dashed edges for {pairs} w0 pairs"))?;
    Ok(format!("hash {}", &file.content_hash[..12]))
}

type Invariant = fn(u64) -> Outcome;

const INVARIANTS: [(&str, Invariant); 11] = [
    ("bruhat_order_matches_subwords", inv_bruhat),
    ("double_coset_representatives", inv_double_cosets),
    ("positions_are_group_invariant", inv_classification),
    ("poset_structure_and_ideal_monotonicity", inv_posets),
    ("flag_positions_follow_bruhat_order", inv_flag_bruhat),
    ("cartan_projection_and_symmetric_powers", inv_cartan),
    ("word_ball_sizes", inv_words),
    ("schottky_limit_set_in_ping_pong_disks", inv_limit_set),
    ("domain_out_verdicts_carry_witnesses", inv_domain_witnesses),
    ("poset_files_round_trip", inv_output),
    ("flag_flag_transversality", |_| {
        for d in 2..=6 {
            let full = weyl::full_dims(d);
            let f = PartialFlag::standard(d, &full).map_err(err)?;
            let g = PartialFlag::opposite_standard(d, &full).map_err(err)?;
            ensure(dod_core::spaces::transverse(&f, &g).map_err(err)?.0, || format!("d={d}: opposite flags not transverse"))?;
        }
        Ok("d <= 6".into())
    }),
];

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub kind: String,
    pub passed: bool,
    pub detail: String,
    #[serde(skip)]
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub format: String,
    pub version: String,
    pub seed: u64,
    pub fixtures_hash: String,
    pub results: Vec<CheckResult>,
}

impl CheckReport {
    pub fn failures(&self) -> Vec<String> {
        self.results.iter().filter(|r| !r.passed).map(|r| r.name.clone()).collect()
    }
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(p) => Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into())),
    }
}

fn record(name: &str, kind: &str, f: impl FnOnce() -> Outcome) -> CheckResult {
    let start = Instant::now();
    let out = guarded(f);
    let seconds = start.elapsed().as_secs_f64();
    let (passed, detail) = match out {
        Ok(s) => (true, s),
        Err(s) => (false, s),
    };
    let line = if passed { format!("ok    {name}: {detail}") } else { format!("FAIL  {name}: {detail}") };
    eprintln!("{line} ({seconds:.1}s)");
    CheckResult { name: name.into(), kind: kind.into(), passed, detail, seconds }
}

/// Parse every fixture on its own so a damaged entry is reported by name.
fn fixtures(text: &str, origin: &str) -> Result<Vec<(String, std::result::Result<Fixture, String>)>> {
    let root: Value = serde_json::from_str(text).map_err(|e| CliError::Parse { path: origin.into(), message: e.to_string() })?;
    let list = root
        .get("fixtures")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::Parse { path: origin.into(), message: "missing `fixtures` array".into() })?;
    Ok(list
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let name = v.get("name").and_then(Value::as_str).map(str::to_string).unwrap_or_else(|| format!("fixture #{i}"));
            let mut body = v.clone();
            if let Some(obj) = body.as_object_mut() {
                obj.remove("name");
            }
            let parsed = serde_json::from_value::<Fixture>(body).map_err(|e| format!("unreadable fixture: {e}"));
            (name, parsed)
        })
        .collect())
}

pub struct CheckArgs<'a> {
    pub fixtures: Option<&'a Path>,
    pub seed: Option<u64>,
    pub out: Option<&'a Path>,
}

pub fn cmd_check(args: &CheckArgs) -> Result<CheckReport> {
    let seed = args.seed.unwrap_or(DEFAULT_SEED);
    let (text, origin) = match args.fixtures {
        Some(p) => (std::fs::read_to_string(p).map_err(io_err(p))?, p.display().to_string()),
        None => (EMBEDDED_FIXTURES.to_string(), "embedded fixtures".to_string()),
    };
    let mut results = Vec::new();
    for (name, fx) in fixtures(&text, &origin)? {
        results.push(record(&name, "fixture", || fx.and_then(|f| run_fixture(&f, seed))));
    }
    for (name, f) in INVARIANTS {
        results.push(record(name, "invariant", || f(seed)));
    }
    let report = CheckReport {
        format: "dod-check".into(),
        version: VERSION.into(),
        seed,
        fixtures_hash: sha256_hex(text.as_bytes()),
        results,
    };
    if args.out.is_some() {
        emit(args.out, &to_json(&report)?)?;
    }
    let failed = report.failures();
    if !failed.is_empty() {
        return Err(CliError::CheckFailed(failed));
    }
    Ok(report)
}
