use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::anosov::{limit_set_sample, LimitFlag, LimitSample, RepSpec, Tracked};
use crate::ideals::Ideal;
use crate::linalg;
use crate::poset::Poset;
use crate::spaces::{
    classify, q_form, q_matrix, ComplementaryPair, Config, Family, GroupManifoldPoint, NegativeLine, PartialFlag,
    QuadraticForm, SpacePoint,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum PointVerdict {
    /// No sampled flag sees the point in a position of the ideal.
    In,
    /// `pos(ξ, x) ∈ I` for the sampled flag `flag`, in position `node`.
    Out { flag: usize, node: usize },
    /// Some classification was too close to a threshold to decide.
    Boundary,
}

impl PointVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            PointVerdict::In => "in",
            PointVerdict::Out { .. } => "out",
            PointVerdict::Boundary => "boundary",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Membership {
    pub verdict: PointVerdict,
    /// Least classification margin over the flags examined.
    pub margin: f64,
    /// The word of the witnessing flag, for `Out`.
    pub witness_word: Option<String>,
}

fn config_for(family: &Family, flag: &LimitFlag, x: &SpacePoint) -> Result<Config> {
    match family {
        Family::GroupManifold { theta_l, theta_r, .. } => {
            let (SpacePoint::GroupManifold(g), [l, r]) = (x, flag.flags.as_slice()) else {
                return Err(Error::InvalidInput("group manifolds need pairs of flags and a group manifold point".into()));
            };
            Ok(Config::group_manifold(l.restrict(theta_l)?, r.restrict(theta_r)?, g.clone()))
        }
        _ => {
            let [f] = flag.flags.as_slice() else {
                return Err(Error::InvalidInput(format!("{family} needs single flags")));
            };
            Ok(Config::new(f.restrict(&family.theta())?, x.clone()))
        }
    }
}

/// Membership of `x` in `Ω^I` relative to the sampled flags. `In` certifies
/// only against this sample.
pub fn domain_membership(x: &SpacePoint, flags: &LimitSample, ideal: &Ideal, poset: &Poset) -> Result<Membership> {
    let family = &poset.family;
    if !family.accepts(x) {
        return Err(Error::InvalidPoint(format!("{} is not a point of {family}", x.kind())));
    }
    let mut margin = f64::INFINITY;
    let mut uncertain = false;
    for (i, lf) in flags.flags.iter().enumerate() {
        let fp = classify(family, &config_for(family, lf, x)?)?;
        margin = margin.min(fp.margin);
        if fp.is_uncertain() {
            uncertain = true;
            continue;
        }
        let node = poset
            .node_of(&fp)
            .ok_or_else(|| Error::Consistency(format!("fingerprint {fp} is not a node of the poset")))?;
        if ideal.contains(node) {
            return Ok(Membership { verdict: PointVerdict::Out { flag: i, node }, margin, witness_word: Some(lf.word.clone()) });
        }
    }
    let verdict = if uncertain { PointVerdict::Boundary } else { PointVerdict::In };
    Ok(Membership { verdict, margin, witness_word: None })
}

/// Random point of the family's space: Gaussian frames for pairs and
/// flags, Gaussian congruences of the base form, Gaussian `SL(m)` elements,
/// and Gaussian vectors conditioned to be negative.
pub fn random_point<R: Rng + ?Sized>(family: &Family, rng: &mut R) -> Result<SpacePoint> {
    Ok(match family {
        Family::Complementary { d, p, .. } => loop {
            let plus = linalg::random_gaussian(*d, *p, rng);
            let minus = linalg::random_gaussian(*d, d - p, rng);
            if let Ok(x) = ComplementaryPair::new(&plus, &minus) {
                break SpacePoint::ComplementaryPair(x);
            }
        },
        Family::FlagFlag { d, theta_prime, .. } => {
            SpacePoint::Flag(PartialFlag::new(theta_prime, &linalg::random_orthogonal(*d, rng))?)
        }
        Family::QuadraticForm { p, q, .. } => loop {
            let g = linalg::random_gaussian(p + q, p + q, rng);
            if let Ok(x) = QuadraticForm::new(&(g.transpose() * q_matrix(*p, *q) * &g)) {
                break SpacePoint::QuadraticForm(x);
            }
        },
        Family::GroupManifold { m, .. } => SpacePoint::GroupManifold(GroupManifoldPoint::new(&linalg::random_sl(*m, rng))?),
        Family::PseudoHyperbolic { p, q } => loop {
            let v = DVector::from_fn(p + q, |_, _| rng.sample::<f64, _>(StandardNormal));
            if q_form(&v, &v, *p) < -1e-3 * v.norm_squared() {
                break SpacePoint::NegativeLine(NegativeLine::new(&v, *p, *q)?);
            }
        },
    })
}

#[derive(Debug, Clone)]
pub struct DomainOptions {
    pub n_points: usize,
    pub seed: u64,
    pub flag_count: usize,
    pub min_length: usize,
    pub budget: u64,
}

impl Default for DomainOptions {
    fn default() -> Self {
        DomainOptions { n_points: 1000, seed: 0x5eed, flag_count: 128, min_length: 6, budget: crate::anosov::DEFAULT_BUDGET }
    }
}

#[derive(Debug, Clone)]
pub struct DomainSample {
    pub points: Vec<(SpacePoint, Membership)>,
    pub in_fraction: f64,
    pub out_fraction: f64,
    pub boundary_fraction: f64,
    pub flag_count: usize,
    pub min_length: usize,
    pub seed: u64,
    pub warnings: Vec<String>,
}

/// Classify `n_points` random points against a given flag sample.
pub fn domain_sample_with(flags: &LimitSample, ideal: &Ideal, poset: &Poset, n_points: usize, seed: u64) -> Result<DomainSample> {
    let family = &poset.family;
    let results: Vec<Result<(SpacePoint, Membership)>> = (0..n_points)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd0_4a17 ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let x = random_point(family, &mut rng)?;
            let m = domain_membership(&x, flags, ideal, poset)?;
            Ok((x, m))
        })
        .collect();
    let points = results.into_iter().collect::<Result<Vec<_>>>()?;
    let n = points.len().max(1) as f64;
    let count = |name: &str| points.iter().filter(|(_, m)| m.verdict.name() == name).count() as f64 / n;
    Ok(DomainSample {
        in_fraction: count("in"),
        out_fraction: count("out"),
        boundary_fraction: count("boundary"),
        flag_count: flags.len(),
        min_length: flags.min_length,
        seed,
        warnings: flags.warnings.clone(),
        points,
    })
}

/// Sample the limit set of `rep`, then classify random points of the
/// poset's family.
pub fn domain_sample(rep: &RepSpec, ideal: &Ideal, poset: &Poset, opts: &DomainOptions) -> Result<DomainSample> {
    let family = &poset.family;
    let want = if matches!(family, Family::GroupManifold { .. }) { 2 } else { 1 };
    if rep.factors() != want || rep.d != family.d() {
        return Err(Error::InvalidInput(format!("{rep} does not act on {family}")));
    }
    if family.theta().iter().any(|k| !rep.theta.contains(k)) {
        return Err(Error::InvalidInput(format!("representation theta {:?} does not contain {:?}", rep.theta, family.theta())));
    }
    let flags = limit_set_sample(rep, opts.flag_count, opts.min_length, 0, opts.seed, opts.budget)?;
    domain_sample_with(&flags, ideal, poset, opts.n_points, opts.seed)
}

/// The flag sample moved by a group element.
pub fn translate_sample(flags: &LimitSample, g: &Tracked) -> Result<LimitSample> {
    let moved = flags
        .flags
        .iter()
        .map(|lf| {
            Ok(LimitFlag {
                flags: lf.flags.iter().enumerate().map(|(i, f)| g.act_flag(i, f)).collect::<Result<_>>()?,
                word: lf.word.clone(),
                length: lf.length,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LimitSample { flags: moved, ..flags.clone() })
}
