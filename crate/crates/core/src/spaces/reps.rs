use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::linalg;
use crate::spaces::{
    ComplementaryPair, Config, Family, GroupManifoldPoint, NegativeLine, PartialFlag, QuadraticForm, SpacePoint,
};
use crate::weyl;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClanSymbol {
    Plus,
    Minus,
    /// Both ends of a matched pair carry the same label, numbered by opening.
    Pair(u8),
}

/// A clan: a word in `+`, `-` and matched pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clan(pub Vec<ClanSymbol>);

impl fmt::Display for Clan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            match s {
                ClanSymbol::Plus => write!(f, "+")?,
                ClanSymbol::Minus => write!(f, "-")?,
                ClanSymbol::Pair(k) => write!(f, "{}", k + 1)?,
            }
        }
        Ok(())
    }
}

/// All clans with signature `(p, q)`.
pub fn clans(p: usize, q: usize) -> Vec<Clan> {
    fn go(n: usize, p: usize, q: usize, cur: &mut Vec<ClanSymbol>, open: &mut Vec<u8>, used: (usize, usize, u8), out: &mut Vec<Clan>) {
        let (plus, minus, pairs) = used;
        if cur.len() == n {
            if open.is_empty() && plus + pairs as usize == p && minus + pairs as usize == q {
                out.push(Clan(cur.clone()));
            }
            return;
        }
        let remaining = n - cur.len();
        if open.len() > remaining {
            return;
        }
        if plus + (pairs as usize) < p {
            cur.push(ClanSymbol::Plus);
            go(n, p, q, cur, open, (plus + 1, minus, pairs), out);
            cur.pop();
        }
        if minus + (pairs as usize) < q {
            cur.push(ClanSymbol::Minus);
            go(n, p, q, cur, open, (plus, minus + 1, pairs), out);
            cur.pop();
        }
        if plus + (pairs as usize) < p && minus + (pairs as usize) < q {
            cur.push(ClanSymbol::Pair(pairs));
            open.push(pairs);
            go(n, p, q, cur, open, (plus, minus, pairs + 1), out);
            open.pop();
            cur.pop();
        }
        for k in 0..open.len() {
            let label = open.remove(k);
            cur.push(ClanSymbol::Pair(label));
            go(n, p, q, cur, open, used, out);
            cur.pop();
            open.insert(k, label);
        }
    }
    let mut out = Vec::new();
    go(p + q, p, q, &mut Vec::new(), &mut Vec::new(), (0, 0, 0), &mut out);
    out
}

/// `Σ_k C(n, 2k) (2k-1)!! C(n-2k, p-k)`, the number of clans of signature `(p, q)`.
pub fn clan_count(p: usize, q: usize) -> usize {
    let n = p + q;
    let mut total = 0;
    for k in 0..=p.min(q) {
        let double_fact: usize = (1..=k).map(|i| 2 * i - 1).product();
        total += linalg::binomial(n, 2 * k) * double_fact * linalg::binomial(n - 2 * k, p - k);
    }
    total
}

/// Frame whose columns follow the clan: `e` for `+`, `f` for `-`, `e + f` at
/// the opening and `e - f` at the closing of a pair. `e_i` are the first `p`
/// coordinate vectors, `f_j` the rest.
pub fn clan_frame(clan: &Clan, p: usize) -> DMatrix<f64> {
    let d = clan.0.len();
    let mut frame = DMatrix::zeros(d, d);
    let (mut next_e, mut next_f) = (0, p);
    let mut pair_vectors: Vec<Option<(usize, usize)>> = vec![None; d];
    for (col, s) in clan.0.iter().enumerate() {
        match *s {
            ClanSymbol::Plus => {
                frame[(next_e, col)] = 1.0;
                next_e += 1;
            }
            ClanSymbol::Minus => {
                frame[(next_f, col)] = 1.0;
                next_f += 1;
            }
            ClanSymbol::Pair(k) => match pair_vectors[k as usize] {
                None => {
                    pair_vectors[k as usize] = Some((next_e, next_f));
                    frame[(next_e, col)] = 1.0;
                    frame[(next_f, col)] = 1.0;
                    next_e += 1;
                    next_f += 1;
                }
                Some((e, f)) => {
                    frame[(e, col)] = 1.0;
                    frame[(f, col)] = -1.0;
                }
            },
        }
    }
    frame
}

/// A configuration in a known position, with a human-readable label.
#[derive(Debug, Clone)]
pub struct Representative {
    pub config: Config,
    pub label: String,
}

fn sgn(x: f64) -> i64 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

fn sign_char(x: i64) -> char {
    match x.signum() {
        1 => '+',
        -1 => '-',
        _ => '0',
    }
}

/// Configurations covering every position of `family`. Several entries may
/// share a position; callers deduplicate by fingerprint.
pub fn representatives(family: &Family) -> Result<Vec<Representative>> {
    let mut out = Vec::new();
    match family {
        Family::FlagFlag { d, theta, theta_prime } => {
            let mut seen = BTreeSet::new();
            for w in weyl::all_permutations(*d) {
                let rep = weyl::double_coset_rep(&w, theta, theta_prime)?.rep;
                if seen.insert(rep.clone()) {
                    let config = Config::new(
                        PartialFlag::standard(*d, theta)?,
                        SpacePoint::Flag(PartialFlag::new(theta_prime, &rep.matrix())?),
                    );
                    out.push(Representative { config, label: rep.to_string() });
                }
            }
        }
        Family::GroupManifold { m, theta_l, theta_r } => {
            let mut seen = BTreeSet::new();
            for w in weyl::all_permutations(*m) {
                let rep = weyl::double_coset_rep(&w, theta_l, theta_r)?.rep;
                if seen.insert(rep.clone()) {
                    let g = GroupManifoldPoint::new(&rep.signed_lift())?;
                    let config =
                        Config::group_manifold(PartialFlag::standard(*m, theta_l)?, PartialFlag::standard(*m, theta_r)?, g);
                    out.push(Representative { config, label: rep.to_string() });
                }
            }
        }
        Family::Complementary { d, p, theta } => {
            let x = ComplementaryPair::base(*d, *p)?;
            for clan in clans(*p, d - p) {
                let flag = PartialFlag::new(theta, &clan_frame(&clan, *p))?;
                out.push(Representative {
                    config: Config::new(flag, SpacePoint::ComplementaryPair(x.clone())),
                    label: clan.to_string(),
                });
            }
        }
        Family::QuadraticForm { p, q, theta } => {
            let d = p + q;
            let x = QuadraticForm::base(*p, *q)?;
            let j = crate::spaces::q_matrix(*p, *q);
            let pool = integer_pool(d);
            let qf = |u: &DVector<f64>, v: &DVector<f64>| (u.transpose() * &j * v)[(0, 0)];
            let mut seen = BTreeSet::new();
            for u in &pool {
                for v in &pool {
                    if qf(u, v) != 0.0 {
                        continue;
                    }
                    let parallel = (u - v).norm() == 0.0;
                    let key = (sgn(qf(v, v)), sgn(qf(u, u)), parallel);
                    if !seen.insert(key) {
                        continue;
                    }
                    let line = DMatrix::from_column_slice(d, 1, v.as_slice());
                    let ju = &j * u;
                    let hyper = linalg::complement_basis(&DMatrix::from_column_slice(d, 1, ju.as_slice()));
                    let frame = linalg::nested_frame(d, &[line, hyper]);
                    let label = format!(
                        "Q(l){} Q(n){}{}",
                        sign_char(key.0),
                        sign_char(key.1),
                        if parallel { " radical" } else { "" }
                    );
                    out.push(Representative {
                        config: Config::new(PartialFlag::new(theta, &frame)?, SpacePoint::QuadraticForm(x.clone())),
                        label,
                    });
                }
            }
        }
        Family::PseudoHyperbolic { p, q } => {
            let d = p + q;
            let x = NegativeLine::base(*p, *q)?;
            let mut incident = DVector::zeros(d);
            incident[0] = 1.0;
            incident[*p] = 1.0;
            let mut generic = DVector::zeros(d);
            generic[0] = 1.0;
            generic[d - 1] = 1.0;
            for (v, label) in [(incident, "incident"), (generic, "generic")] {
                let frame = linalg::nested_frame(d, &[DMatrix::from_column_slice(d, 1, v.as_slice())]);
                out.push(Representative {
                    config: Config::new(PartialFlag::new(&[1], &frame)?, SpacePoint::NegativeLine(x.clone())),
                    label: label.to_string(),
                });
            }
        }
    }
    Ok(out)
}

/// Vectors with entries in `{-1, 0, 1}`, at most three nonzero, first nonzero
/// entry positive.
fn integer_pool(d: usize) -> Vec<DVector<f64>> {
    let mut out = Vec::new();
    for k in 1..=3.min(d) {
        for support in linalg::subsets(d, k) {
            for signs in 0..(1usize << (k - 1)) {
                let mut v = DVector::zeros(d);
                for (t, &i) in support.iter().enumerate() {
                    v[i] = if t > 0 && signs >> (t - 1) & 1 == 1 { -1.0 } else { 1.0 };
                }
                out.push(v);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clan_counts() {
        for (p, q, n) in [(1, 1, 3), (1, 2, 6), (1, 3, 10), (2, 2, 21), (2, 3, 55), (3, 3, 215)] {
            assert_eq!(clans(p, q).len(), n, "({p},{q})");
            assert_eq!(clan_count(p, q), n);
        }
    }

    #[test]
    fn clan_fingerprints_are_distinct() {
        use std::collections::HashSet;
        for d in 2..=5 {
            for p in 1..d {
                let fam = Family::complementary(d, p, &weyl::full_dims(d)).unwrap();
                let reps = representatives(&fam).unwrap();
                let fps: HashSet<_> = reps.iter().map(|r| crate::spaces::classify(&fam, &r.config).unwrap()).collect();
                assert_eq!(fps.len(), reps.len(), "d={d} p={p}");
            }
        }
    }

    #[test]
    fn clan_frames_are_invertible() {
        for clan in clans(2, 3) {
            assert!(clan_frame(&clan, 2).determinant().abs() > 0.5);
        }
    }
}
