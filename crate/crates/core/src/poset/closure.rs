use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::linalg;
use crate::poset::{transitive_closure, transitive_reduction, Certification, Node, PosetOptions};
use crate::spaces::{classify, q_matrix, Config, Family, Semi};
use crate::Result;

/// Curve parameters, half a decade apart, approaching 0.
pub const LADDER: [f64; 7] = [1e-1, 3.1622776601683794e-2, 1e-2, 3.1622776601683794e-3, 1e-3, 3.1622776601683794e-4, 1e-4];

#[derive(Debug, Clone)]
pub struct Closure {
    pub leq: Vec<Vec<bool>>,
    pub covers: Vec<(usize, usize)>,
    pub certification: Certification,
    /// Pairs `(a, b)` with `a ≤ b` allowed by the invariants but not witnessed.
    pub discrepancies: Vec<(usize, usize)>,
    pub issues: Vec<String>,
}

/// Order allowed by the semicontinuity of each fingerprint entry.
pub fn upper_bound(family: &Family, nodes: &[Node]) -> Vec<Vec<bool>> {
    let dirs = family.directions();
    let n = nodes.len();
    let mut ub = vec![vec![false; n]; n];
    for a in 0..n {
        for b in 0..n {
            let (va, vb) = (&nodes[a].fingerprint.values, &nodes[b].fingerprint.values);
            ub[a][b] = dirs.iter().enumerate().all(|(k, dir)| match dir {
                Semi::Up => va[k] >= vb[k],
                Semi::Down => va[k] <= vb[k],
            });
        }
    }
    ub
}

pub(crate) fn node_rng(seed: u64, salt: u64, id: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (id as u64).wrapping_mul(0xD1B5_4A32_D192_ED03))
}

fn unit(d: usize, a: usize, b: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, d);
    m[(a, b)] = 1.0;
    m
}

/// Infinitesimal motions of the flag used to build degeneration curves.
fn moves(family: &Family, frame: &DMatrix<f64>, extra: usize, rng: &mut ChaCha8Rng) -> Vec<DMatrix<f64>> {
    let d = family.d();
    let mut basic = Vec::new();
    if let Family::PseudoHyperbolic { p, q } = family {
        let qm = q_matrix(*p, *q);
        for a in 0..d {
            for b in a + 1..d {
                basic.push((unit(d, a, b) - unit(d, b, a)) * &qm);
            }
        }
    } else {
        for a in 0..d {
            for b in a + 1..d {
                basic.push(frame * unit(d, b, a) * frame.transpose());
            }
        }
        for a in 0..d {
            for b in 0..d {
                if a != b {
                    basic.push(unit(d, a, b));
                }
            }
        }
        for a in 0..d - 1 {
            basic.push(unit(d, a, a) - unit(d, a + 1, a + 1));
        }
    }
    let mut out = basic.clone();
    for _ in 0..extra {
        let k = rng.random_range(2..=3).min(basic.len());
        let mut y = DMatrix::zeros(d, d);
        for i in sample(rng, basic.len(), k) {
            let c: f64 = rng.sample(StandardNormal);
            y += &basic[i] * c;
        }
        out.push(y);
    }
    out
}

fn moved(config: &Config, g: &DMatrix<f64>) -> Result<Config> {
    Ok(Config { flag: config.flag.act(g)?, flag_r: config.flag_r.clone(), point: config.point.clone() })
}

/// Positions `a` witnessed above `node`: some curve through the node's
/// representative stays in position `a` at two consecutive ladder steps
/// nearest 0, both certified.
fn witnesses(family: &Family, nodes: &[Node], node: usize, opts: &PosetOptions) -> (Vec<usize>, Vec<String>) {
    let rep = &nodes[node].representative;
    let mut rng = node_rng(opts.seed, 1, node);
    let mut found = vec![false; nodes.len()];
    let mut issues = Vec::new();
    for y in moves(family, rep.flag.frame(), opts.curves, &mut rng) {
        let mut labels: Vec<Option<usize>> = Vec::with_capacity(LADDER.len());
        for &t in &LADDER {
            let label = moved(rep, &linalg::expm(&(&y * t)))
                .and_then(|c| classify(family, &c))
                .ok()
                .filter(|fp| !fp.is_uncertain())
                .and_then(|fp| nodes.iter().position(|nd| nd.fingerprint == fp).or_else(|| {
                    issues.push(format!("unknown fingerprint {fp} near node {node}"));
                    None
                }));
            labels.push(label);
        }
        if let Some(a) = labels.windows(2).rev().find_map(|w| match (w[0], w[1]) {
            (Some(x), Some(y)) if x == y => Some(x),
            _ => None,
        }) {
            found[a] = true;
        }
    }
    ((0..nodes.len()).filter(|&a| found[a]).collect(), issues)
}

/// Closure order from two bounds: the upper bound from invariant
/// semicontinuity and the lower bound from witnessed degenerations.
pub fn closure_order(family: &Family, nodes: &[Node], opts: &PosetOptions) -> Result<Closure> {
    let n = nodes.len();
    let ub = upper_bound(family, nodes);
    let per_node: Vec<(Vec<usize>, Vec<String>)> =
        (0..n).into_par_iter().map(|b| witnesses(family, nodes, b, opts)).collect();
    let mut pairs = Vec::new();
    let mut issues = Vec::new();
    for (b, (above, msgs)) in per_node.into_iter().enumerate() {
        issues.extend(msgs);
        for a in above {
            if a == b {
                continue;
            }
            if ub[b][a] {
                pairs.push((b, a));
            } else {
                issues.push(format!(
                    "witnessed {} <= {} against the invariant bound",
                    nodes[b].fingerprint, nodes[a].fingerprint
                ));
            }
        }
    }
    issues.sort();
    issues.dedup();
    let leq = transitive_closure(n, &pairs);
    let mut discrepancies = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if ub[a][b] && !leq[a][b] {
                discrepancies.push((a, b));
            }
        }
    }
    let certification = if discrepancies.is_empty() && issues.is_empty() { Certification::Exact } else { Certification::Sampled };
    let covers = transitive_reduction(&leq);
    Ok(Closure { leq, covers, certification, discrepancies, issues })
}
