//! Dynamics of finitely generated free matrix groups: Cartan and Jordan
//! projections, word balls, Anosov growth fits, limit sets and cones,
//! proximality, properness statistics and sampled domains.

mod bundled;
mod domain;
mod dynrel;
mod fit;
mod proper;
mod prox;
mod tracked;
mod words;

use std::fmt;

use nalgebra::DMatrix;

pub use bundled::{diagonal_pair, schottky_sl2, schottky_so22, sym_lift};
pub use domain::{
    domain_membership, domain_sample, domain_sample_with, random_point, translate_sample, DomainOptions, DomainSample, Membership,
    PointVerdict,
};
pub use dynrel::{dynrel_probe, perturb, point_distance, Candidate, DynRelReport, PositionEvidence};
pub use fit::{
    anosov_fit, limit_cone_sample, limit_set_sample, AnosovFit, ConeRay, ConeSample, LimitFlag, LimitSample, MarginRow,
};
pub use proper::{mu_of_h, properness_statistic, MuH, PropernessTable, PROPERNESS_GRID};
pub use prox::{proximality_check, ProximalityReport};
pub use tracked::{cartan, jordan, CartanData, Tracked};
pub use words::{ball_size, word_ball, BallEntry, WordBall, DEFAULT_BUDGET};

use crate::linalg;
use crate::spaces::symmetric_power_lift;
use crate::weyl;
use crate::{Error, Result};

/// A generator of a free group together with its image. Linear
/// representations carry one matrix, representations into `G × G` (acting
/// on group manifolds) carry two.
#[derive(Debug, Clone)]
pub struct Generator {
    pub label: String,
    pub factors: Vec<DMatrix<f64>>,
}

impl Generator {
    pub fn new(label: &str, g: DMatrix<f64>) -> Self {
        Generator { label: label.to_string(), factors: vec![g] }
    }

    pub fn pair(label: &str, gl: DMatrix<f64>, gr: DMatrix<f64>) -> Self {
        Generator { label: label.to_string(), factors: vec![gl, gr] }
    }
}

/// A representation of a free group: generator images, with formal inverses
/// computed once.
#[derive(Debug, Clone)]
pub struct RepSpec {
    pub name: String,
    /// Size of each factor.
    pub d: usize,
    pub theta: Vec<usize>,
    pub generators: Vec<Generator>,
    /// Target dimension when the generators are symmetric powers of `2 × 2`
    /// matrices.
    pub lift: Option<usize>,
    letters: Vec<Vec<DMatrix<f64>>>,
}

fn inverse_label(label: &str) -> String {
    let mut chars = label.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if c.is_ascii_lowercase() => c.to_ascii_uppercase().to_string(),
        _ => format!("{label}^-1"),
    }
}

impl RepSpec {
    /// Validates sizes, `det = 1` and the formal inverses.
    pub fn new(name: &str, d: usize, theta: &[usize], generators: Vec<Generator>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(format!("d = {d}, need d >= 2")));
        }
        let theta = weyl::check_dims(d, theta)?;
        if theta.is_empty() {
            return Err(Error::InvalidInput("theta must be non-empty".into()));
        }
        if generators.is_empty() {
            return Err(Error::InvalidInput("at least one generator is needed".into()));
        }
        let nf = generators[0].factors.len();
        if nf == 0 || nf > 2 {
            return Err(Error::InvalidInput(format!("generators need one or two factors, got {nf}")));
        }
        let mut labels = std::collections::HashSet::new();
        let mut letters = Vec::with_capacity(2 * generators.len());
        for gen in &generators {
            if gen.label.is_empty() || !labels.insert(gen.label.clone()) {
                return Err(Error::InvalidInput(format!("generator label {:?} is empty or repeated", gen.label)));
            }
            if gen.factors.len() != nf {
                return Err(Error::InvalidInput(format!("generator {} has {} factors, expected {nf}", gen.label, gen.factors.len())));
            }
            let mut fwd = Vec::new();
            let mut inv = Vec::new();
            for g in &gen.factors {
                if g.nrows() != d || g.ncols() != d {
                    return Err(Error::InvalidDimension(format!("generator {} is {}x{}, expected {d}x{d}", gen.label, g.nrows(), g.ncols())));
                }
                let scale = linalg::max_abs(g).max(1.0);
                let det = g.determinant();
                if (det - 1.0).abs() > 1e-8 * scale.powi(d as i32) {
                    return Err(Error::InvalidInput(format!("generator {} has determinant {det}", gen.label)));
                }
                let gi = g.clone().try_inverse().ok_or_else(|| Error::InvalidInput(format!("generator {} is singular", gen.label)))?;
                let id = DMatrix::<f64>::identity(d, d);
                let gi = &gi + &gi * (&id - g * &gi);
                if (g * &gi - &id).norm() > 1e-9 * g.norm() * gi.norm() {
                    return Err(Error::InvalidInput(format!("inverse of {} is inaccurate", gen.label)));
                }
                fwd.push(g.clone());
                inv.push(gi);
            }
            letters.push(fwd);
            letters.push(inv);
        }
        for gen in &generators {
            if labels.contains(&inverse_label(&gen.label)) {
                return Err(Error::InvalidInput(format!("label {} clashes with the inverse of {}", inverse_label(&gen.label), gen.label)));
            }
        }
        Ok(RepSpec { name: name.to_string(), d, theta, generators, lift: None, letters })
    }

    /// `Sym^{d-1}` of a list of `SL(2, R)` generators.
    pub fn symmetric_power(name: &str, sl2: &[(String, DMatrix<f64>)], d: usize, theta: &[usize]) -> Result<Self> {
        let gens = sl2
            .iter()
            .map(|(label, a)| Ok(Generator::new(label, symmetric_power_lift(a, d)?)))
            .collect::<Result<Vec<_>>>()?;
        let mut rep = Self::new(name, d, theta, gens)?;
        rep.lift = Some(d);
        Ok(rep)
    }

    /// 1 for linear representations, 2 for pairs.
    pub fn factors(&self) -> usize {
        self.generators[0].factors.len()
    }

    pub fn is_pair(&self) -> bool {
        self.factors() == 2
    }

    /// Number of letters: generators and their inverses.
    pub fn letters(&self) -> usize {
        self.letters.len()
    }

    /// Images of a letter; letter `2i` is generator `i`, `2i + 1` its inverse.
    pub fn letter(&self, l: usize) -> &[DMatrix<f64>] {
        &self.letters[l]
    }

    pub fn letter_label(&self, l: usize) -> String {
        let label = &self.generators[l / 2].label;
        if l.is_multiple_of(2) {
            label.clone()
        } else {
            inverse_label(label)
        }
    }

    /// Printable word; single-character labels are concatenated, longer ones
    /// separated by dots.
    pub fn word_label(&self, word: &[u16]) -> String {
        if word.is_empty() {
            return "e".into();
        }
        let parts: Vec<String> = word.iter().map(|&l| self.letter_label(l as usize)).collect();
        if parts.iter().all(|p| p.chars().count() == 1) {
            parts.concat()
        } else {
            parts.join(".")
        }
    }

    /// Exact product of the letter images, factor by factor.
    pub fn evaluate(&self, word: &[u16]) -> Vec<DMatrix<f64>> {
        let mut out = vec![DMatrix::identity(self.d, self.d); self.factors()];
        for &l in word {
            for (acc, g) in out.iter_mut().zip(self.letter(l as usize)) {
                *acc = &*acc * g;
            }
        }
        out
    }
}

impl fmt::Display for RepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<&str> = self.generators.iter().map(|g| g.label.as_str()).collect();
        write!(f, "{} (d={}, theta={:?}, generators {})", self.name, self.d, self.theta, labels.join(","))
    }
}
