use rayon::prelude::*;

use crate::anosov::{word_ball, RepSpec};
use crate::spaces::Family;
use crate::{Error, Result};

/// Thresholds `t` at which [`properness_statistic`] counts words.
pub const PROPERNESS_GRID: [f64; 6] = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0];

/// Closed-form `μ(H) ⊂ a⁺` of a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuH {
    /// `μ(H) = a⁺`.
    FullChamber,
    /// `{(A, A)}` in `a⁺ × a⁺`.
    DiagonalPairs,
    /// `(t_1, …, t_m, 0, …, 0, −t_m, …, −t_1)`.
    PairedSpectrum(usize),
}

impl MuH {
    /// Euclidean distance from a Cartan projection (factors listed
    /// separately) to `μ(H)`.
    pub fn distance(&self, mu: &[Vec<f64>]) -> f64 {
        match self {
            MuH::FullChamber => 0.0,
            MuH::DiagonalPairs => {
                let s: f64 = mu[0].iter().zip(&mu[1]).map(|(a, b)| (a - b) * (a - b)).sum();
                (s / 2.0).sqrt()
            }
            MuH::PairedSpectrum(m) => {
                let v = &mu[0];
                let d = v.len();
                let mut s = 0.0;
                for i in 0..d {
                    let j = d - 1 - i;
                    if i < *m {
                        s += (v[i] + v[j]) * (v[i] + v[j]) / 2.0;
                    } else if i < d - m {
                        s += v[i] * v[i];
                    }
                }
                s.sqrt()
            }
        }
    }
}

impl std::fmt::Display for MuH {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MuH::FullChamber => write!(f, "full_chamber"),
            MuH::DiagonalPairs => write!(f, "diagonal_pairs"),
            MuH::PairedSpectrum(m) => write!(f, "paired_spectrum({m})"),
        }
    }
}

pub fn mu_of_h(family: &Family) -> Result<MuH> {
    match family {
        Family::FlagFlag { .. } | Family::Complementary { .. } => Ok(MuH::FullChamber),
        Family::GroupManifold { .. } => Ok(MuH::DiagonalPairs),
        Family::QuadraticForm { p, q, .. } => Ok(MuH::PairedSpectrum((*p).min(*q))),
        Family::PseudoHyperbolic { .. } => {
            Err(Error::Unsupported("the acting group of a pseudo-hyperbolic space is the ambient of H".into()))
        }
    }
}

#[derive(Debug, Clone)]
pub struct PropernessTable {
    pub mu_h: MuH,
    pub radius: usize,
    pub ball_size: usize,
    /// `(t, N(t))`.
    pub rows: Vec<(f64, usize)>,
    pub note: &'static str,
}

/// `N(t) = #{γ in the ball : d(μ(ρ(γ)), μ(H)) ≤ t}` on [`PROPERNESS_GRID`].
pub fn properness_statistic(rep: &RepSpec, family: &Family, radius: usize, budget: u64) -> Result<PropernessTable> {
    let mu_h = mu_of_h(family)?;
    let want = if mu_h == MuH::DiagonalPairs { 2 } else { 1 };
    if rep.factors() != want || rep.d != family.d() {
        return Err(Error::InvalidInput(format!("{rep} does not act on {family}")));
    }
    let ball = word_ball(rep, radius, budget)?;
    let dist: Vec<f64> = ball.entries.par_iter().map(|e| mu_h.distance(&e.element.mu())).collect();
    let rows = PROPERNESS_GRID
        .iter()
        .map(|&t| (t, dist.iter().filter(|&&x| x <= t + 1e-9).count()))
        .collect();
    Ok(PropernessTable {
        mu_h,
        radius,
        ball_size: ball.len(),
        rows,
        note: "counts that stay bounded for each t as the radius grows suggest a proper action; growth with the ball suggests the opposite",
    })
}
