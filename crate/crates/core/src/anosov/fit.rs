use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::anosov::tracked::GAP_TOL;
use crate::anosov::{word_ball, RepSpec, WordBall};
use crate::spaces::{transverse, PartialFlag};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct MarginRow {
    pub n: usize,
    /// `m(n)`: least `α(μ(ρ(γ)))` over words of length `n` and `α ∈ θ`.
    pub m: f64,
    /// A word attaining `m(n)`.
    pub argmin: String,
    /// `m(n)` is at or below the gap tolerance.
    pub collapsed: bool,
}

#[derive(Debug, Clone)]
pub struct AnosovFit {
    /// Slope of the linear lower envelope `c n − C`.
    pub c: f64,
    pub big_c: f64,
    pub table: Vec<MarginRow>,
    pub radius: usize,
    pub ball_size: usize,
    pub warnings: Vec<String>,
}

impl AnosovFit {
    /// Every `m(n+1) ≥ m(n) − tol`.
    pub fn monotone_within(&self, tol: f64) -> bool {
        self.table.windows(2).all(|w| w[1].m >= w[0].m - tol)
    }
}

fn min_gap(rep: &RepSpec, mu: &[Vec<f64>]) -> f64 {
    mu.iter()
        .flat_map(|m| rep.theta.iter().map(move |&k| m[k - 1] - m[k]))
        .fold(f64::INFINITY, f64::min)
}

/// Lower convex hull of points sorted by abscissa.
fn lower_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

pub(crate) fn fit_from_ball(rep: &RepSpec, ball: &WordBall) -> AnosovFit {
    let mut table = Vec::new();
    let mut warnings = Vec::new();
    for n in 1..=ball.radius {
        let sphere = ball.sphere(n);
        let gaps: Vec<f64> = sphere.par_iter().map(|e| min_gap(rep, &e.element.mu())).collect();
        let (mut best, mut at) = (f64::INFINITY, 0);
        for (i, &g) in gaps.iter().enumerate() {
            if g < best {
                best = g;
                at = i;
            }
        }
        let collapsed = best <= GAP_TOL;
        if collapsed {
            warnings.push(format!("gap collapse at length {n} (word {})", rep.word_label(&sphere[at].word)));
        }
        table.push(MarginRow { n, m: best, argmin: rep.word_label(&sphere[at].word), collapsed });
    }
    let mut points = vec![(0.0, 0.0)];
    points.extend(table.iter().map(|r| (r.n as f64, r.m)));
    let hull = lower_hull(&points);
    let (c, big_c) = if hull.len() >= 2 {
        let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
        let c = (b.1 - a.1) / (b.0 - a.0);
        (c, c * b.0 - b.1)
    } else {
        (0.0, 0.0)
    };
    if c <= 0.0 {
        warnings.push(format!("no linear growth of the gaps up to radius {}: c = {c:.6}", ball.radius));
    }
    AnosovFit { c, big_c, table, radius: ball.radius, ball_size: ball.len(), warnings }
}

/// Empirical Anosov certificate: the table `m(n)` and the steepest line
/// `c n − C` lying below it, touching the last row.
pub fn anosov_fit(rep: &RepSpec, radius: usize, budget: u64) -> Result<AnosovFit> {
    let ball = word_ball(rep, radius, budget)?;
    Ok(fit_from_ball(rep, &ball))
}

#[derive(Debug, Clone)]
pub struct LimitFlag {
    /// Cartan attractor of each factor.
    pub flags: Vec<PartialFlag>,
    pub word: String,
    pub length: usize,
}

#[derive(Debug, Clone)]
pub struct LimitSample {
    pub flags: Vec<LimitFlag>,
    pub min_length: usize,
    pub seed: u64,
    /// Least transversality margin over the checked pairs.
    pub min_pairwise_transversality_margin: f64,
    pub pairs_checked: usize,
    /// Checked pairs that were not transverse.
    pub non_transverse_pairs: usize,
    pub warnings: Vec<String>,
}

impl LimitSample {
    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    /// Every flag restricted to the dimensions `theta`.
    pub fn restricted(&self, theta: &[usize]) -> Result<LimitSample> {
        let flags = self
            .flags
            .iter()
            .map(|f| {
                Ok(LimitFlag {
                    flags: f.flags.iter().map(|x| x.restrict(theta)).collect::<Result<_>>()?,
                    word: f.word.clone(),
                    length: f.length,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LimitSample { flags, ..self.clone() })
    }

    /// Transversality of random pairs of distinct flags.
    pub fn check_pairs(&mut self, pairs: usize, seed: u64) -> Result<()> {
        let n = self.flags.len();
        self.pairs_checked = 0;
        self.non_transverse_pairs = 0;
        self.min_pairwise_transversality_margin = f64::INFINITY;
        if n < 2 {
            return Ok(());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7a11);
        let picks: Vec<(usize, usize)> = (0..pairs)
            .map(|_| {
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                (i, j)
            })
            .collect();
        let results: Vec<Result<(bool, f64)>> = picks
            .par_iter()
            .map(|&(i, j)| {
                let mut ok = true;
                let mut margin = f64::INFINITY;
                for (a, b) in self.flags[i].flags.iter().zip(&self.flags[j].flags) {
                    let (t, m) = transverse(a, b)?;
                    ok &= t;
                    margin = margin.min(m);
                }
                Ok((ok, margin))
            })
            .collect();
        for r in results {
            let (ok, m) = r?;
            self.pairs_checked += 1;
            if !ok {
                self.non_transverse_pairs += 1;
            }
            self.min_pairwise_transversality_margin = self.min_pairwise_transversality_margin.min(m);
        }
        Ok(())
    }
}

fn cyclically_reduced(word: &[u16]) -> bool {
    word.len() < 2 || word[0] != word[word.len() - 1] ^ 1
}

/// Cartan attractors of `count` distinct words of length at least
/// `min_length`, longest first and cyclically reduced words preferred, then
/// transversality of `pairs` random pairs.
pub fn limit_set_sample(
    rep: &RepSpec,
    count: usize,
    min_length: usize,
    pairs: usize,
    seed: u64,
    budget: u64,
) -> Result<LimitSample> {
    let min_length = min_length.max(1);
    let mut radius = min_length;
    loop {
        let available = crate::anosov::ball_size(rep.letters(), radius) - crate::anosov::ball_size(rep.letters(), min_length - 1);
        if available >= count as u64 || crate::anosov::ball_size(rep.letters(), radius + 1) > budget || radius >= min_length + 64 {
            break;
        }
        radius += 1;
    }
    let ball = word_ball(rep, radius, budget)?;
    let fit = fit_from_ball(rep, &ball);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = Vec::new();
    for n in (min_length..=radius).rev() {
        let sphere = ball.sphere(n);
        let (mut cyc, mut rest): (Vec<usize>, Vec<usize>) = (0..sphere.len()).partition(|&i| cyclically_reduced(&sphere[i].word));
        cyc.shuffle(&mut rng);
        rest.shuffle(&mut rng);
        order.extend(cyc.into_iter().map(|i| (n, i)));
        order.extend(rest.into_iter().map(|i| (n, i)));
    }
    let mut warnings = Vec::new();
    if fit.c <= 0.0 {
        warnings.push(format!("anosov fit at radius {radius} gave c = {:.6}; the sample may not approximate a limit set", fit.c));
    }
    let mut flags = Vec::with_capacity(count);
    let mut gapless = 0;
    for (n, i) in order {
        if flags.len() == count {
            break;
        }
        let entry = &ball.sphere(n)[i];
        let data = entry.element.cartan(&rep.theta)?;
        if data.iter().any(|c| c.kflag.is_none()) {
            gapless += 1;
            continue;
        }
        flags.push(LimitFlag {
            flags: data.into_iter().map(|c| c.kflag.expect("gap checked")).collect(),
            word: rep.word_label(&entry.word),
            length: n,
        });
    }
    if gapless > 0 {
        warnings.push(format!("{gapless} words without a gap were skipped"));
    }
    if flags.len() < count {
        return Err(Error::InsufficientWords(format!(
            "{} flags of length >= {min_length} available within the budget, {count} requested",
            flags.len()
        )));
    }
    let mut sample = LimitSample {
        flags,
        min_length,
        seed,
        min_pairwise_transversality_margin: f64::INFINITY,
        pairs_checked: 0,
        non_transverse_pairs: 0,
        warnings,
    };
    sample.check_pairs(pairs, seed)?;
    Ok(sample)
}

#[derive(Debug, Clone)]
pub struct ConeRay {
    /// `μ(ρ(γ)) / ‖μ(ρ(γ))‖`, factors concatenated.
    pub direction: Vec<f64>,
    pub word: String,
    pub length: usize,
}

#[derive(Debug, Clone)]
pub struct ConeSample {
    pub rays: Vec<ConeRay>,
    /// Indices of rays extremal for some normalized simple root.
    pub extremes: Vec<usize>,
    pub floor: f64,
}

impl ConeSample {
    pub fn extreme_directions(&self) -> Vec<&[f64]> {
        self.extremes.iter().map(|&i| self.rays[i].direction.as_slice()).collect()
    }
}

/// Normalized Cartan projections of all words with `‖μ‖` above `floor`,
/// summarized by the rays minimizing and maximizing each simple root.
pub fn limit_cone_sample(rep: &RepSpec, radius: usize, floor: f64, budget: u64) -> Result<ConeSample> {
    let ball = word_ball(rep, radius, budget)?;
    let d = rep.d;
    let rays: Vec<Option<ConeRay>> = ball
        .entries
        .par_iter()
        .map(|e| {
            let mu: Vec<f64> = e.element.mu().concat();
            let norm = mu.iter().map(|x| x * x).sum::<f64>().sqrt();
            (norm > floor).then(|| ConeRay {
                direction: mu.iter().map(|x| x / norm).collect(),
                word: rep.word_label(&e.word),
                length: e.word.len(),
            })
        })
        .collect();
    let rays: Vec<ConeRay> = rays.into_iter().flatten().collect();
    let mut extremes: Vec<usize> = Vec::new();
    let roots: Vec<usize> = (0..rep.factors()).flat_map(|f| (0..d - 1).map(move |k| f * d + k)).collect();
    for &k in &roots {
        let value = |i: usize| rays[i].direction[k] - rays[i].direction[k + 1];
        let lo = (0..rays.len()).min_by(|&a, &b| value(a).total_cmp(&value(b)));
        let hi = (0..rays.len()).max_by(|&a, &b| value(a).total_cmp(&value(b)));
        for i in [lo, hi].into_iter().flatten() {
            let dup = extremes.iter().any(|&j| {
                rays[j].direction.iter().zip(&rays[i].direction).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) < 1e-9
            });
            if !dup {
                extremes.push(i);
            }
        }
    }
    Ok(ConeSample { rays, extremes, floor })
}
