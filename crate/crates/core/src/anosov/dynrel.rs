use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::anosov::{word_ball, RepSpec, Tracked};
use crate::linalg;
use crate::poset::Poset;
use crate::spaces::{classify, ComplementaryPair, Config, GroupManifoldPoint, NegativeLine, PartialFlag, QuadraticForm, SpacePoint};
use crate::{Error, Result};

/// Candidates kept from the coarse scan.
const KEEP: usize = 8;
/// Projected-gradient iterations per candidate.
const STEPS: usize = 100;

fn proj_dist(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    linalg::singular_values(&(linalg::projector(a) - linalg::projector(b)))[0]
}

/// Distance between two points of the same space: largest principal-angle
/// sine for subspaces, normalized Frobenius distance for matrices.
pub fn point_distance(x: &SpacePoint, y: &SpacePoint) -> Result<f64> {
    Ok(match (x, y) {
        (SpacePoint::ComplementaryPair(a), SpacePoint::ComplementaryPair(b)) if a.d() == b.d() && a.p() == b.p() => {
            proj_dist(a.plus(), b.plus()).max(proj_dist(a.minus(), b.minus()))
        }
        (SpacePoint::NegativeLine(a), SpacePoint::NegativeLine(b)) if a.vector().len() == b.vector().len() => {
            linalg::line_distance(a.vector(), b.vector())
        }
        (SpacePoint::Flag(a), SpacePoint::Flag(b)) if a.d() == b.d() && a.dims() == b.dims() => {
            a.dims().iter().map(|&k| proj_dist(&a.subspace(k), &b.subspace(k))).fold(0.0, f64::max)
        }
        (SpacePoint::QuadraticForm(a), SpacePoint::QuadraticForm(b)) if a.d() == b.d() => {
            let (sa, sb) = (a.matrix(), b.matrix());
            (sa / sa.norm() - sb / sb.norm()).norm()
        }
        (SpacePoint::GroupManifold(a), SpacePoint::GroupManifold(b)) if a.m() == b.m() => {
            let (ga, gb) = (a.matrix(), b.matrix());
            (ga - gb).norm() / ga.norm().max(gb.norm())
        }
        _ => return Err(Error::InvalidInput(format!("cannot compare a {} with a {}", x.kind(), y.kind()))),
    })
}

/// `d(g x, target)`. Pairs are moved without the transversality check: an
/// image too degenerate to be a point is still far from `target`.
fn image_distance(g: &Tracked, x: &SpacePoint, target: &SpacePoint) -> Result<f64> {
    match (x, target) {
        (SpacePoint::ComplementaryPair(c), SpacePoint::ComplementaryPair(t)) if c.d() == t.d() && c.p() == t.p() => {
            let plus = g.act_subspace(0, c.plus());
            let minus = g.act_subspace(0, c.minus());
            Ok(proj_dist(&plus, t.plus()).max(proj_dist(&minus, t.minus())))
        }
        _ => point_distance(&g.act_point(x)?, target),
    }
}

fn chart_dim(x: &SpacePoint) -> usize {
    match x {
        SpacePoint::ComplementaryPair(c) => 2 * c.p() * c.q(),
        SpacePoint::NegativeLine(v) => v.vector().len() - 1,
        SpacePoint::Flag(f) => f.d() * (f.d() - 1) / 2,
        SpacePoint::QuadraticForm(s) => s.d() * (s.d() + 1) / 2,
        SpacePoint::GroupManifold(g) => g.m() * g.m() - 1,
    }
}

/// A point near `x` in local coordinates `t` (`t = 0` gives `x`).
pub fn perturb(x: &SpacePoint, t: &[f64]) -> Result<SpacePoint> {
    if t.len() != chart_dim(x) {
        return Err(Error::InvalidInput(format!("chart of dimension {} got {} coordinates", chart_dim(x), t.len())));
    }
    Ok(match x {
        SpacePoint::ComplementaryPair(c) => {
            let (p, q) = (c.p(), c.q());
            let cp = linalg::complement_basis(c.plus());
            let cm = linalg::complement_basis(c.minus());
            let t1 = DMatrix::from_column_slice(q, p, &t[..p * q]);
            let t2 = DMatrix::from_column_slice(p, q, &t[p * q..]);
            SpacePoint::ComplementaryPair(ComplementaryPair::new(&(c.plus() + cp * t1), &(c.minus() + cm * t2))?)
        }
        SpacePoint::NegativeLine(v) => {
            let col = DMatrix::from_column_slice(v.vector().len(), 1, v.vector().as_slice());
            let moved = v.vector() + linalg::complement_basis(&col) * DVector::from_column_slice(t);
            SpacePoint::NegativeLine(NegativeLine::new(&moved, v.p(), v.q())?)
        }
        SpacePoint::Flag(f) => {
            let d = f.d();
            let mut y = DMatrix::zeros(d, d);
            let mut k = 0;
            for i in 0..d {
                for j in 0..i {
                    y[(i, j)] = t[k];
                    y[(j, i)] = -t[k];
                    k += 1;
                }
            }
            SpacePoint::Flag(PartialFlag::new(f.dims(), &(f.frame() * linalg::expm(&y)))?)
        }
        SpacePoint::QuadraticForm(s) => {
            let d = s.d();
            let mut m = s.matrix().clone();
            let mut k = 0;
            for i in 0..d {
                for j in 0..=i {
                    let v = if i == j { t[k] } else { t[k] / 2f64.sqrt() };
                    m[(i, j)] += v;
                    if i != j {
                        m[(j, i)] += v;
                    }
                    k += 1;
                }
            }
            SpacePoint::QuadraticForm(QuadraticForm::new(&m)?)
        }
        SpacePoint::GroupManifold(g) => {
            let m = g.m();
            let mut y = DMatrix::zeros(m, m);
            let mut k = 0;
            for i in 0..m {
                for j in 0..m {
                    if i != j {
                        y[(i, j)] = t[k];
                        k += 1;
                    }
                }
            }
            for i in 0..m - 1 {
                y[(i, i)] += t[k];
                y[(i + 1, i + 1)] -= t[k];
                k += 1;
            }
            SpacePoint::GroupManifold(GroupManifoldPoint::new(&(g.matrix() * linalg::expm(&y)))?)
        }
    })
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub word: String,
    pub length: usize,
    /// `d(γ x, x′)` before refinement.
    pub coarse_distance: f64,
    /// `d(x_p, x)` for the refined perturbation.
    pub start_offset: f64,
    /// `d(γ x_p, x′)` after refinement.
    pub end_distance: f64,
}

/// Positions seen along a witnessing word, to compare with the lemma
/// bounding `pos(ξ₊, x′)` by a partner of `pos(ξ₋, x)`.
#[derive(Debug, Clone)]
pub struct PositionEvidence {
    /// Node of `pos(ξ₊, x′)`.
    pub pos_plus: usize,
    /// Node of `pos(ξ₋, x)`.
    pub pos_minus: usize,
    /// Nodes `p` with `p ↔ pos(ξ₋, x)`.
    pub partners: Vec<usize>,
    /// Some partner lies above `pos(ξ₊, x′)`.
    pub consistent: bool,
}

#[derive(Debug, Clone)]
pub struct DynRelReport {
    pub found: bool,
    pub best: Vec<Candidate>,
    pub words_searched: usize,
    pub radius: usize,
    pub tol: f64,
    pub evidence: Option<PositionEvidence>,
    pub note: String,
}

struct Objective<'a> {
    g: &'a Tracked,
    x: &'a SpacePoint,
    target: &'a SpacePoint,
}

impl Objective<'_> {
    fn offset(&self, t: &[f64]) -> f64 {
        perturb(self.x, t).and_then(|p| point_distance(&p, self.x)).unwrap_or(f64::INFINITY)
    }

    fn value(&self, t: &[f64]) -> f64 {
        perturb(self.x, t).and_then(|p| image_distance(self.g, &p, self.target)).unwrap_or(f64::INFINITY)
    }

    /// Shrink `t` radially until the perturbation is within `tol`.
    fn project(&self, t: Vec<f64>, tol: f64) -> Vec<f64> {
        if self.offset(&t) <= tol {
            return t;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            let s: Vec<f64> = t.iter().map(|v| v * mid).collect();
            if self.offset(&s) <= tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        t.iter().map(|v| v * lo).collect()
    }

    /// Projected gradient descent from `t = 0` with backtracking.
    fn refine(&self, tol: f64) -> (Vec<f64>, f64) {
        let n = chart_dim(self.x);
        let mut t = vec![0.0; n];
        let mut f = self.value(&t);
        let h = tol * 1e-3;
        for _ in 0..STEPS {
            if f <= tol || !f.is_finite() {
                break;
            }
            let grad: Vec<f64> = (0..n)
                .map(|i| {
                    let mut a = t.clone();
                    let mut b = t.clone();
                    a[i] += h;
                    b[i] -= h;
                    (self.value(&a) - self.value(&b)) / (2.0 * h)
                })
                .collect();
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                break;
            }
            let mut step = tol / norm;
            let mut improved = false;
            for _ in 0..30 {
                let cand: Vec<f64> = t.iter().zip(&grad).map(|(a, g)| a - step * g).collect();
                let cand = self.project(cand, tol);
                let fc = self.value(&cand);
                if fc < f {
                    t = cand;
                    f = fc;
                    improved = true;
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (t, f)
    }
}

fn evidence(poset: &Poset, g: &Tracked, x: &SpacePoint, target: &SpacePoint) -> Option<PositionEvidence> {
    let family = &poset.family;
    let data = g.cartan(&family.theta()).ok()?;
    let (plus, minus) = match data.as_slice() {
        [one] => (
            Config::new(one.kflag.clone()?, target.clone()),
            Config::new(one.lflag.clone()?, x.clone()),
        ),
        [l, r] => {
            let (SpacePoint::GroupManifold(gt), SpacePoint::GroupManifold(gx)) = (target, x) else { return None };
            (
                Config::group_manifold(l.kflag.clone()?, r.kflag.clone()?, gt.clone()),
                Config::group_manifold(l.lflag.clone()?, r.lflag.clone()?, gx.clone()),
            )
        }
        _ => return None,
    };
    let fp_plus = classify(family, &plus).ok().filter(|f| !f.is_uncertain())?;
    let fp_minus = classify(family, &minus).ok().filter(|f| !f.is_uncertain())?;
    let (pos_plus, pos_minus) = (poset.node_of(&fp_plus)?, poset.node_of(&fp_minus)?);
    let partners: Vec<usize> = (0..poset.len()).filter(|&p| poset.trans_rel[p][pos_minus]).collect();
    let consistent = partners.iter().any(|&p| poset.leq[pos_plus][p]);
    Some(PositionEvidence { pos_plus, pos_minus, partners, consistent })
}

/// Search the word ball for `γ` and `x_p` within `tol` of `x` with
/// `ρ(γ) x_p` within `tol` of `x′`: a coarse scan of all words, then
/// projected-gradient refinement of the best few.
pub fn dynrel_probe(
    rep: &RepSpec,
    x: &SpacePoint,
    x_prime: &SpacePoint,
    radius: usize,
    tol: f64,
    budget: u64,
    poset: Option<&Poset>,
) -> Result<DynRelReport> {
    point_distance(x, x_prime)?;
    let ball = word_ball(rep, radius, budget)?;
    let coarse: Vec<f64> = ball
        .entries
        .par_iter()
        .map(|e| image_distance(&e.element, x, x_prime).unwrap_or(f64::INFINITY))
        .collect();
    let mut order: Vec<usize> = (0..coarse.len()).filter(|&i| coarse[i].is_finite()).collect();
    order.sort_by(|&a, &b| coarse[a].total_cmp(&coarse[b]).then(a.cmp(&b)));
    order.truncate(KEEP);
    let refined: Vec<(usize, Vec<f64>, f64)> = order
        .par_iter()
        .map(|&i| {
            let obj = Objective { g: &ball.entries[i].element, x, target: x_prime };
            let (t, f) = obj.refine(tol);
            (i, t, f)
        })
        .collect();
    let mut best: Vec<Candidate> = Vec::new();
    let mut winner = None;
    for (i, t, f) in &refined {
        let e = &ball.entries[*i];
        let start_offset = perturb(x, t).and_then(|p| point_distance(&p, x)).unwrap_or(f64::INFINITY);
        if *f <= tol && winner.is_none() {
            winner = Some(*i);
        }
        best.push(Candidate {
            word: rep.word_label(&e.word),
            length: e.word.len(),
            coarse_distance: coarse[*i],
            start_offset,
            end_distance: *f,
        });
    }
    best.sort_by(|a, b| a.end_distance.total_cmp(&b.end_distance));
    let found = winner.is_some();
    let evidence = match (winner, poset) {
        (Some(i), Some(p)) => evidence(p, &ball.entries[i].element, x, x_prime),
        _ => None,
    };
    let note = if found {
        "a word and a perturbation within tolerance were found".to_string()
    } else {
        format!("no relation found within radius {radius} at tolerance {tol:e}; absence of evidence, not a proof")
    };
    Ok(DynRelReport { found, best, words_searched: ball.len(), radius, tol, evidence, note })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anosov::{diagonal_pair, random_point, sym_lift, DEFAULT_BUDGET};
    use crate::spaces::Family;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn families() -> Vec<Family> {
        vec![
            Family::complementary(4, 2, &[1, 2, 3]).unwrap(),
            Family::flag_flag(3, &[1, 2], &[1, 2]).unwrap(),
            Family::quadratic_form(1, 2, &[1, 2]).unwrap(),
            Family::group_manifold(3, &[1, 2], &[1, 2]).unwrap(),
            Family::pseudo_hyperbolic(2, 2).unwrap(),
        ]
    }

    #[test]
    fn charts_are_centred() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for fam in families() {
            let x = random_point(&fam, &mut rng).unwrap();
            let n = chart_dim(&x);
            let same = perturb(&x, &vec![0.0; n]).unwrap();
            assert!(point_distance(&x, &same).unwrap() < 1e-12, "{fam}");
            let mut t = vec![0.0; n];
            t[n - 1] = 1e-4;
            let near = perturb(&x, &t).unwrap();
            let dist = point_distance(&x, &near).unwrap();
            assert!(dist > 0.0 && dist < 1e-3, "{fam}: {dist}");
            assert!((dist - point_distance(&near, &x).unwrap()).abs() < 1e-12);
            assert!(perturb(&x, &vec![0.0; n + 1]).is_err());
        }
    }

    #[test]
    fn mismatched_points_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = families();
        let a = random_point(&f[0], &mut rng).unwrap();
        let b = random_point(&f[2], &mut rng).unwrap();
        assert!(point_distance(&a, &b).is_err());
    }

    #[test]
    fn fixed_pair_of_a_generator_is_related_to_itself() {
        let rep = sym_lift(4).unwrap();
        let g = &rep.letter(0)[0];
        // The generator is diagonal, so coordinate lines are its eigenlines.
        assert!((g - DMatrix::from_diagonal(&g.diagonal())).norm() < 1e-12);
        let e = |cols: &[usize]| DMatrix::from_fn(4, cols.len(), |r, c| if r == cols[c] { 1.0 } else { 0.0 });
        let x = SpacePoint::ComplementaryPair(ComplementaryPair::new(&e(&[0]), &e(&[1, 2, 3])).unwrap());
        let report = dynrel_probe(&rep, &x, &x, 3, 1e-3, DEFAULT_BUDGET, None).unwrap();
        assert!(report.found);
        assert!(report.best[0].end_distance < 1e-12);
    }

    #[test]
    fn opposite_signs_are_not_related() {
        let rep = diagonal_pair();
        let id = DMatrix::<f64>::identity(2, 2);
        let x = SpacePoint::GroupManifold(GroupManifoldPoint::new(&id).unwrap());
        let y = SpacePoint::GroupManifold(GroupManifoldPoint::new(&(-&id)).unwrap());
        let report = dynrel_probe(&rep, &x, &y, 6, 1e-3, DEFAULT_BUDGET, None).unwrap();
        assert!(!report.found);
        assert!(report.note.contains("not a proof"));
        assert_eq!(report.words_searched, 12);
    }
}
