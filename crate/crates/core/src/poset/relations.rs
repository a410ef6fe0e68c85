use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::poset::closure::node_rng;
use crate::poset::{Certification, Node, PosetOptions};
use crate::spaces::{classify, orthogonal_config, Config, Family, Motion, PartialFlag};
use crate::{Error, Result};

fn find(nodes: &[Node], fp: &crate::spaces::PositionFingerprint) -> Option<usize> {
    nodes.iter().position(|nd| nd.fingerprint == *fp)
}

/// The involution induced by `w0` on positions.
///
/// For families with `τ(H) = H` the image of `pos(k F, o)` is
/// `pos(k w0 F, o)`, realized by the orthogonal flag; for flag manifolds it is
/// the classical `[w] ↦ [w0 w]`.
pub fn w0_action(family: &Family, nodes: &[Node], leq: &[Vec<bool>]) -> Result<Vec<usize>> {
    let n = nodes.len();
    let mut map = Vec::with_capacity(n);
    for node in nodes {
        let image = orthogonal_config(family, &node.representative)?;
        let fp = classify(family, &image)?;
        if fp.is_uncertain() {
            return Err(Error::Consistency(format!("w0 image of {} is uncertain", node.label)));
        }
        map.push(find(nodes, &fp).ok_or_else(|| Error::Consistency(format!("w0 image {fp} of {} is not a node", node.label)))?);
    }
    for a in 0..n {
        if map[map[a]] != a {
            return Err(Error::Consistency(format!("w0 action is not an involution at {}", nodes[a].label)));
        }
    }
    if family.tau_invariant() {
        for a in 0..n {
            for b in 0..n {
                if leq[a][b] && !leq[map[a]][map[b]] {
                    return Err(Error::Consistency(format!(
                        "w0 action does not preserve {} <= {}",
                        nodes[a].label, nodes[b].label
                    )));
                }
            }
        }
    }
    Ok(map)
}

#[derive(Debug, Clone)]
pub struct TransverseRelation {
    pub relation: Vec<Vec<bool>>,
    pub certification: Certification,
    /// Pairs observed directly, before closing.
    pub witnessed: Vec<(usize, usize)>,
}

/// Random element of the parabolic `P_θ`: block upper triangular with
/// Gaussian entries, rescaled to `|det| = 1`, times a sign pattern of
/// determinant one.
pub fn random_parabolic(d: usize, theta: &[usize], rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let block = |i: usize| theta.iter().filter(|&&t| t <= i).count();
    loop {
        let mut b = DMatrix::from_fn(d, d, |i, j| if block(i) <= block(j) { rng.sample::<f64, _>(StandardNormal) } else { 0.0 });
        let det = b.determinant();
        if det.abs() < 1e-3 {
            continue;
        }
        if det < 0.0 {
            b.row_mut(0).neg_mut();
        }
        b /= det.abs().powf(1.0 / d as f64);
        let flips = rng.random_range(0..=d / 2);
        for k in rand::seq::index::sample(rng, d, 2 * flips) {
            b.row_mut(k).neg_mut();
        }
        return b;
    }
}

fn to_standard(config: &Config) -> Result<Config> {
    let gl = config.flag.frame().transpose();
    match &config.flag_r {
        Some(r) => config.act(&Motion::Pair(gl, r.frame().transpose())),
        None => config.act(&Motion::Linear(gl)),
    }
}

fn opposite(config: &Config) -> Result<Config> {
    let f = &config.flag;
    Ok(Config {
        flag: PartialFlag::opposite_standard(f.d(), f.dims())?,
        flag_r: match &config.flag_r {
            Some(r) => Some(PartialFlag::opposite_standard(r.d(), r.dims())?),
            None => None,
        },
        point: config.point.clone(),
    })
}

fn sample_node(family: &Family, nodes: &[Node], node: usize, opts: &PosetOptions) -> Result<Vec<usize>> {
    let base = to_standard(&nodes[node].representative)?;
    let mut rng = node_rng(opts.seed, 2, node);
    let d = family.d();
    let mut found = vec![false; nodes.len()];
    for _ in 0..opts.samples {
        let motion = match &base.flag_r {
            Some(r) => Motion::Pair(random_parabolic(d, base.flag.dims(), &mut rng), random_parabolic(d, r.dims(), &mut rng)),
            None => Motion::Linear(random_parabolic(d, base.flag.dims(), &mut rng)),
        };
        let Ok(moved) = base.act(&motion) else { continue };
        let x = Config { flag: base.flag.clone(), flag_r: base.flag_r.clone(), point: moved.point };
        let here = classify(family, &x)?;
        if !here.is_uncertain() && here != nodes[node].fingerprint {
            return Err(Error::Consistency(format!("parabolic sample left position {}", nodes[node].label)));
        }
        let there = classify(family, &opposite(&x)?)?;
        if there.is_uncertain() {
            continue;
        }
        let id = find(nodes, &there).ok_or_else(|| Error::Consistency(format!("sampled fingerprint {there} is not a node")))?;
        found[id] = true;
    }
    Ok((0..nodes.len()).filter(|&a| found[a]).collect())
}

/// The relation `↔`: witnessed pairs from parabolic samples, closed upward,
/// with `p ↔ w0 p` added and symmetrized. It is total, and exact, when there
/// is a unique minimal position.
pub fn transverse_relation(
    family: &Family,
    nodes: &[Node],
    leq: &[Vec<bool>],
    w0_map: &[usize],
    minimal: &[usize],
    opts: &PosetOptions,
) -> Result<TransverseRelation> {
    let n = nodes.len();
    let mut witnessed = Vec::new();
    if !matches!(family, Family::PseudoHyperbolic { .. }) {
        let per_node: Vec<Result<Vec<usize>>> = (0..n).into_par_iter().map(|a| sample_node(family, nodes, a, opts)).collect();
        for (a, r) in per_node.into_iter().enumerate() {
            for b in r? {
                witnessed.push((a, b));
            }
        }
    }
    let mut base = vec![vec![false; n]; n];
    for &(a, b) in &witnessed {
        base[a][b] = true;
        base[b][a] = true;
    }
    if family.tau_invariant() {
        for a in 0..n {
            base[a][w0_map[a]] = true;
            base[w0_map[a]][a] = true;
        }
    }
    let mut relation = vec![vec![false; n]; n];
    for a0 in 0..n {
        for b0 in 0..n {
            if !base[a0][b0] {
                continue;
            }
            for a in 0..n {
                if !leq[a0][a] {
                    continue;
                }
                for b in 0..n {
                    if leq[b0][b] {
                        relation[a][b] = true;
                    }
                }
            }
        }
    }
    let certification = if minimal.len() == 1 {
        relation = vec![vec![true; n]; n];
        Certification::Exact
    } else {
        Certification::Sampled
    };
    Ok(TransverseRelation { relation, certification, witnessed })
}
