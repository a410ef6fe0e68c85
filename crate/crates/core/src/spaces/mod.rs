//! Flags, the supported homogeneous spaces `X = G/H`, and classifiers for the
//! relative position `pos(ξ, x)`.

mod classify;
mod flag;
mod normalize;
mod point;
mod reps;
mod sympow;

use std::fmt;
use std::hash::{Hash, Hasher};

use nalgebra::DMatrix;

pub use classify::{
    classify, classify_flag_flag, classify_flag_form, classify_flag_pair, classify_group_manifold, classify_line_hpq,
    flag_flag_coset,
};
pub use flag::{transverse, PartialFlag};
pub use normalize::{normalize_pair, orthogonal_config, Normalized};
pub use point::{
    q_form, q_matrix, ComplementaryPair, GroupManifoldPoint, NegativeLine, QuadraticForm, SpacePoint,
};
pub use reps::{clan_count, clan_frame, clans, representatives, Clan, ClanSymbol, Representative};
pub use sympow::symmetric_power_lift;

use crate::linalg::BOUNDARY_MARGIN;
use crate::weyl;
use crate::{Error, Result};

/// Which way an invariant can jump when a configuration degenerates to a
/// smaller position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Semi {
    /// Never decreases in a limit (intersection dimensions, null counts).
    Up,
    /// Never increases in a limit (sum dimensions, ranks, sign counts).
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyTag {
    FlagFlag,
    Complementary,
    QuadraticForm,
    GroupManifold,
    PseudoHyperbolic,
}

impl FamilyTag {
    pub fn name(self) -> &'static str {
        match self {
            FamilyTag::FlagFlag => "flag",
            FamilyTag::Complementary => "complementary",
            FamilyTag::QuadraticForm => "quadform",
            FamilyTag::GroupManifold => "groupmanifold",
            FamilyTag::PseudoHyperbolic => "pseudohyp",
        }
    }
}

/// A supported pair `(F_θ, X)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    /// `X = F_{θ'}`.
    FlagFlag { d: usize, theta: Vec<usize>, theta_prime: Vec<usize> },
    /// Pairs `(U⁺, U⁻)` with `dim U⁺ = p`.
    Complementary { d: usize, p: usize, theta: Vec<usize> },
    /// Forms of signature `(p, q)` up to scaling; `θ = {1, d-1}` only.
    QuadraticForm { p: usize, q: usize, theta: Vec<usize> },
    /// `G₀ = SL(m)` acted on by `G₀ × G₀`, with flags `(ξ_L, ξ_R)`.
    GroupManifold { m: usize, theta_l: Vec<usize>, theta_r: Vec<usize> },
    /// Isotropic lines against points of `H^{p,q-1}`.
    PseudoHyperbolic { p: usize, q: usize },
}

impl Family {
    pub fn flag_flag(d: usize, theta: &[usize], theta_prime: &[usize]) -> Result<Self> {
        check_d(d)?;
        Ok(Family::FlagFlag { d, theta: weyl::check_dims(d, theta)?, theta_prime: weyl::check_dims(d, theta_prime)? })
    }

    pub fn complementary(d: usize, p: usize, theta: &[usize]) -> Result<Self> {
        check_d(d)?;
        if p == 0 || p >= d {
            return Err(Error::InvalidDimension(format!("p = {p} in dimension {d}")));
        }
        Ok(Family::Complementary { d, p, theta: self_opposite(d, theta)? })
    }

    /// Signature is normalized to `p <= q`.
    pub fn quadratic_form(p: usize, q: usize, theta: &[usize]) -> Result<Self> {
        let (p, q) = (p.min(q), p.max(q));
        if p == 0 {
            return Err(Error::InvalidDimension("quadratic forms need p, q >= 1".into()));
        }
        let d = p + q;
        let theta = self_opposite(d, theta)?;
        let supported = if d == 2 { vec![1] } else { vec![1, d - 1] };
        if theta != supported {
            return Err(Error::Unsupported(format!(
                "quadratic forms are classified for theta = {{1, d-1}} only, got {theta:?} with d = {d}"
            )));
        }
        Ok(Family::QuadraticForm { p, q, theta })
    }

    pub fn group_manifold(m: usize, theta_l: &[usize], theta_r: &[usize]) -> Result<Self> {
        check_d(m)?;
        Ok(Family::GroupManifold { m, theta_l: self_opposite(m, theta_l)?, theta_r: self_opposite(m, theta_r)? })
    }

    pub fn pseudo_hyperbolic(p: usize, q: usize) -> Result<Self> {
        if p == 0 || q < 2 {
            return Err(Error::InvalidDimension(format!(
                "H^{{p,q-1}} needs p >= 1 and q >= 2, got ({p},{q})"
            )));
        }
        Ok(Family::PseudoHyperbolic { p, q })
    }

    pub fn tag(&self) -> FamilyTag {
        match self {
            Family::FlagFlag { .. } => FamilyTag::FlagFlag,
            Family::Complementary { .. } => FamilyTag::Complementary,
            Family::QuadraticForm { .. } => FamilyTag::QuadraticForm,
            Family::GroupManifold { .. } => FamilyTag::GroupManifold,
            Family::PseudoHyperbolic { .. } => FamilyTag::PseudoHyperbolic,
        }
    }

    /// Dimension of the vector space the flags live in.
    pub fn d(&self) -> usize {
        match self {
            Family::FlagFlag { d, .. } | Family::Complementary { d, .. } => *d,
            Family::QuadraticForm { p, q, .. } | Family::PseudoHyperbolic { p, q } => p + q,
            Family::GroupManifold { m, .. } => *m,
        }
    }

    /// The dimension set of the (left) flag.
    pub fn theta(&self) -> Vec<usize> {
        match self {
            Family::FlagFlag { theta, .. } | Family::Complementary { theta, .. } | Family::QuadraticForm { theta, .. } => {
                theta.clone()
            }
            Family::GroupManifold { theta_l, .. } => theta_l.clone(),
            Family::PseudoHyperbolic { .. } => vec![1],
        }
    }

    /// Whether the Cartan involution preserves `H`, so that `w0` acts on
    /// positions by an order-preserving involution.
    pub fn tau_invariant(&self) -> bool {
        !matches!(self, Family::FlagFlag { .. })
    }

    /// Semicontinuity direction of each fingerprint entry.
    pub fn directions(&self) -> Vec<Semi> {
        match self {
            Family::FlagFlag { theta, theta_prime, .. } => vec![Semi::Up; theta.len() * theta_prime.len()],
            Family::GroupManifold { theta_l, theta_r, .. } => vec![Semi::Up; theta_l.len() * theta_r.len()],
            Family::Complementary { theta, .. } => {
                let n = theta.len();
                let mut v = vec![Semi::Up; 2 * n];
                v.extend(std::iter::repeat_n(Semi::Down, n * n));
                v
            }
            Family::QuadraticForm { .. } => {
                vec![Semi::Down, Semi::Down, Semi::Down, Semi::Down, Semi::Up, Semi::Down]
            }
            Family::PseudoHyperbolic { .. } => vec![Semi::Down],
        }
    }

    /// The base point `o = eH`.
    pub fn base_point(&self) -> Result<SpacePoint> {
        Ok(match self {
            Family::FlagFlag { d, theta_prime, .. } => SpacePoint::Flag(PartialFlag::standard(*d, theta_prime)?),
            Family::Complementary { d, p, .. } => SpacePoint::ComplementaryPair(ComplementaryPair::base(*d, *p)?),
            Family::QuadraticForm { p, q, .. } => SpacePoint::QuadraticForm(QuadraticForm::base(*p, *q)?),
            Family::GroupManifold { m, .. } => SpacePoint::GroupManifold(GroupManifoldPoint::identity(*m)),
            Family::PseudoHyperbolic { p, q } => SpacePoint::NegativeLine(NegativeLine::base(*p, *q)?),
        })
    }

    /// Whether `point` is a point of this family's `X`.
    pub fn accepts(&self, point: &SpacePoint) -> bool {
        match (self, point) {
            (Family::FlagFlag { d, theta_prime, .. }, SpacePoint::Flag(f)) => f.d() == *d && f.dims() == &theta_prime[..],
            (Family::Complementary { d, p, .. }, SpacePoint::ComplementaryPair(x)) => x.d() == *d && x.p() == *p,
            (Family::QuadraticForm { p, q, .. }, SpacePoint::QuadraticForm(x)) => x.p() == *p && x.q() == *q,
            (Family::GroupManifold { m, .. }, SpacePoint::GroupManifold(x)) => x.m() == *m,
            (Family::PseudoHyperbolic { p, q }, SpacePoint::NegativeLine(x)) => x.p() == *p && x.q() == *q,
            _ => false,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::FlagFlag { d, theta, theta_prime } => write!(f, "flag d={d} theta={theta:?} theta'={theta_prime:?}"),
            Family::Complementary { d, p, theta } => write!(f, "complementary d={d} p={p} theta={theta:?}"),
            Family::QuadraticForm { p, q, theta } => write!(f, "quadform p={p} q={q} theta={theta:?}"),
            Family::GroupManifold { m, theta_l, theta_r } => {
                write!(f, "groupmanifold m={m} theta_l={theta_l:?} theta_r={theta_r:?}")
            }
            Family::PseudoHyperbolic { p, q } => write!(f, "pseudohyp p={p} q={q}"),
        }
    }
}

fn check_d(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("d = {d}, need d >= 2")));
    }
    Ok(())
}

fn self_opposite(d: usize, theta: &[usize]) -> Result<Vec<usize>> {
    let theta = weyl::check_dims(d, theta)?;
    if theta.is_empty() || !weyl::is_self_opposite(d, &theta) {
        return Err(Error::InvalidInput(format!("{theta:?} is not a non-empty self-opposite set for d = {d}")));
    }
    Ok(theta)
}

/// A pair `(ξ, x)`; group manifolds carry a second flag `ξ_R`.
#[derive(Debug, Clone)]
pub struct Config {
    pub flag: PartialFlag,
    pub flag_r: Option<PartialFlag>,
    pub point: SpacePoint,
}

impl Config {
    pub fn new(flag: PartialFlag, point: SpacePoint) -> Self {
        Config { flag, flag_r: None, point }
    }

    pub fn group_manifold(xi_l: PartialFlag, xi_r: PartialFlag, g: GroupManifoldPoint) -> Self {
        Config { flag: xi_l, flag_r: Some(xi_r), point: SpacePoint::GroupManifold(g) }
    }

    /// `g · (ξ, x)`.
    pub fn act(&self, motion: &Motion) -> Result<Config> {
        match (motion, &self.point) {
            (Motion::Pair(gl, gr), SpacePoint::GroupManifold(x)) => {
                let xi_r = self.flag_r.as_ref().ok_or_else(|| Error::InvalidInput("missing right flag".into()))?;
                Ok(Config { flag: self.flag.act(gl)?, flag_r: Some(xi_r.act(gr)?), point: SpacePoint::GroupManifold(x.act(gl, gr)?) })
            }
            (Motion::Linear(g), point) => {
                let point = match point {
                    SpacePoint::ComplementaryPair(x) => SpacePoint::ComplementaryPair(x.act(g)?),
                    SpacePoint::QuadraticForm(x) => SpacePoint::QuadraticForm(x.act(g)?),
                    SpacePoint::NegativeLine(x) => SpacePoint::NegativeLine(x.act(g)?),
                    SpacePoint::Flag(x) => SpacePoint::Flag(x.act(g)?),
                    SpacePoint::GroupManifold(_) => {
                        return Err(Error::InvalidInput("group manifolds need a pair of elements".into()))
                    }
                };
                Ok(Config { flag: self.flag.act(g)?, flag_r: None, point })
            }
            (Motion::Pair(..), _) => Err(Error::InvalidInput("a pair of elements acts only on group manifolds".into())),
        }
    }
}

/// A group element acting on configurations.
#[derive(Debug, Clone)]
pub enum Motion {
    Linear(DMatrix<f64>),
    Pair(DMatrix<f64>, DMatrix<f64>),
}

/// Integer invariants of `pos(ξ, x)` plus the margin that certified them.
/// Equality and hashing ignore the margin.
#[derive(Debug, Clone)]
pub struct PositionFingerprint {
    pub tag: FamilyTag,
    pub values: Vec<i64>,
    pub margin: f64,
}

impl PositionFingerprint {
    /// Some rank or sign decision sat closer to its threshold than
    /// [`BOUNDARY_MARGIN`].
    pub fn is_uncertain(&self) -> bool {
        self.margin < BOUNDARY_MARGIN
    }
}

impl PartialEq for PositionFingerprint {
    fn eq(&self, other: &Self) -> bool {
        self.tag == other.tag && self.values == other.values
    }
}

impl Eq for PositionFingerprint {}

impl Hash for PositionFingerprint {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.tag.hash(state);
        self.values.hash(state);
    }
}

impl fmt::Display for PositionFingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.values.iter().map(|x| x.to_string()).collect();
        write!(f, "{}[{}]", self.tag.name(), v.join(","))
    }
}
