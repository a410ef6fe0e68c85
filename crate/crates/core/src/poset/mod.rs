//! Finite posets of relative positions: node enumeration, closure order,
//! the `w0` involution and the transverse relation `↔`.

mod closure;
mod relations;

use std::collections::HashMap;
use std::fmt;

pub use closure::{closure_order, Closure, LADDER};
pub use relations::{transverse_relation, w0_action, TransverseRelation};

use crate::spaces::{classify, representatives, Config, Family, PositionFingerprint};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Certification {
    /// Both bounds agree, or the answer follows from a theorem.
    Exact,
    /// Only witnessed relations are recorded; some may be missing.
    Sampled,
}

impl fmt::Display for Certification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Certification::Exact => "exact",
            Certification::Sampled => "sampled",
        })
    }
}

#[derive(Debug, Clone)]
pub struct PosetOptions {
    /// Larger posets are rejected.
    pub max_nodes: usize,
    /// Random degeneration curves per node, on top of the structured ones.
    pub curves: usize,
    /// Parabolic samples per node for the transverse relation.
    pub samples: usize,
    pub seed: u64,
}

impl Default for PosetOptions {
    fn default() -> Self {
        PosetOptions { max_nodes: 64, curves: 64, samples: 128, seed: 0x5eed }
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub id: usize,
    pub fingerprint: PositionFingerprint,
    pub label: String,
    pub representative: Config,
}

/// Enumerate positions from closed-form representatives, one node per
/// distinct fingerprint, in order of first appearance.
pub fn enumerate_positions(family: &Family, max_nodes: usize) -> Result<Vec<Node>> {
    let mut nodes: Vec<Node> = Vec::new();
    let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
    for rep in representatives(family)? {
        let fp = classify(family, &rep.config)?;
        if fp.is_uncertain() {
            return Err(Error::Consistency(format!("representative {} classified with margin {:.3e}", rep.label, fp.margin)));
        }
        if seen.contains_key(&fp.values) {
            continue;
        }
        if nodes.len() == max_nodes {
            return Err(Error::TooLarge(format!("{family} has more than {max_nodes} positions")));
        }
        seen.insert(fp.values.clone(), nodes.len());
        nodes.push(Node { id: nodes.len(), fingerprint: fp, label: rep.label, representative: rep.config });
    }
    Ok(nodes)
}

/// The poset of relative positions of a family.
#[derive(Debug, Clone)]
pub struct Poset {
    pub family: Family,
    pub nodes: Vec<Node>,
    /// `leq[a][b]` iff `a ≤ b`.
    pub leq: Vec<Vec<bool>>,
    /// `(lower, upper)` cover pairs.
    pub covers: Vec<(usize, usize)>,
    pub w0_map: Vec<usize>,
    pub trans_rel: Vec<Vec<bool>>,
    pub minimal: Vec<usize>,
    pub maximal: Vec<usize>,
    /// Length of the longest chain from the node down to a minimal node.
    pub heights: Vec<usize>,
    pub order_certification: Certification,
    /// Relations allowed by the invariants but never witnessed.
    pub order_discrepancies: Vec<(usize, usize)>,
    pub trans_certification: Certification,
    pub seed: u64,
    /// Witnessed relations that contradicted the invariant bound.
    pub consistency_issues: Vec<String>,
    index: HashMap<Vec<i64>, usize>,
}

impl Poset {
    /// Enumerate, order, and compute the `w0` map and `↔`.
    pub fn build(family: &Family, opts: &PosetOptions) -> Result<Poset> {
        let nodes = enumerate_positions(family, opts.max_nodes)?;
        let closure = closure_order(family, &nodes, opts)?;
        let w0_map = w0_action(family, &nodes, &closure.leq)?;
        let n = nodes.len();
        let minimal: Vec<usize> = (0..n).filter(|&a| (0..n).all(|b| b == a || !closure.leq[b][a])).collect();
        let maximal: Vec<usize> = (0..n).filter(|&a| (0..n).all(|b| b == a || !closure.leq[a][b])).collect();
        let trans = transverse_relation(family, &nodes, &closure.leq, &w0_map, &minimal, opts)?;
        let heights = heights(n, &closure.covers);
        let index = nodes.iter().map(|nd| (nd.fingerprint.values.clone(), nd.id)).collect();
        Ok(Poset {
            family: family.clone(),
            nodes,
            leq: closure.leq,
            covers: closure.covers,
            w0_map,
            trans_rel: trans.relation,
            minimal,
            maximal,
            heights,
            order_certification: closure.certification,
            order_discrepancies: closure.discrepancies,
            trans_certification: trans.certification,
            seed: opts.seed,
            consistency_issues: closure.issues,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node carrying this fingerprint.
    pub fn node_of(&self, fp: &PositionFingerprint) -> Option<usize> {
        if fp.tag != self.family.tag() {
            return None;
        }
        self.index.get(&fp.values).copied()
    }

    /// Classify a configuration and look up its node.
    pub fn locate(&self, config: &Config) -> Result<(usize, PositionFingerprint)> {
        let fp = classify(&self.family, config)?;
        let id = self
            .node_of(&fp)
            .ok_or_else(|| Error::Consistency(format!("fingerprint {fp} is not a node of the poset")))?;
        Ok((id, fp))
    }

    /// Whether `a < b`.
    pub fn less(&self, a: usize, b: usize) -> bool {
        a != b && self.leq[a][b]
    }

    /// Nodes grouped by height, lowest first.
    pub fn levels(&self) -> Vec<Vec<usize>> {
        let top = self.heights.iter().copied().max().unwrap_or(0);
        (0..=top).map(|h| (0..self.len()).filter(|&a| self.heights[a] == h).collect()).collect()
    }

    /// Structural checks on the stored relations; returns a description of
    /// every violated invariant.
    pub fn check_invariants(&self) -> Vec<String> {
        let n = self.len();
        let mut bad = Vec::new();
        for a in 0..n {
            if !self.leq[a][a] {
                bad.push(format!("leq not reflexive at {a}"));
            }
            for b in 0..n {
                if a != b && self.leq[a][b] && self.leq[b][a] {
                    bad.push(format!("leq not antisymmetric at ({a},{b})"));
                }
                for c in 0..n {
                    if self.leq[a][b] && self.leq[b][c] && !self.leq[a][c] {
                        bad.push(format!("leq not transitive at ({a},{b},{c})"));
                    }
                }
                if self.trans_rel[a][b] != self.trans_rel[b][a] {
                    bad.push(format!("trans_rel not symmetric at ({a},{b})"));
                }
                if self.trans_rel[a][b] {
                    for c in 0..n {
                        if self.leq[b][c] && !self.trans_rel[a][c] {
                            bad.push(format!("trans_rel not upward closed at ({a},{b},{c})"));
                        }
                    }
                }
            }
            if self.w0_map[self.w0_map[a]] != a {
                bad.push(format!("w0 map not an involution at {a}"));
            }
        }
        if transitive_closure(n, &self.covers) != self.leq {
            bad.push("covers do not generate leq".into());
        }
        if self.family.tau_invariant() {
            for a in 0..n {
                for b in 0..n {
                    if self.leq[a][b] && !self.leq[self.w0_map[a]][self.w0_map[b]] {
                        bad.push(format!("w0 map not order preserving at ({a},{b})"));
                    }
                }
            }
        }
        bad
    }
}

/// Reflexive-transitive closure of a relation given as pairs.
pub fn transitive_closure(n: usize, pairs: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut m = vec![vec![false; n]; n];
    for (a, row) in m.iter_mut().enumerate() {
        row[a] = true;
    }
    for &(a, b) in pairs {
        m[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if m[i][k] {
                for j in 0..n {
                    if m[k][j] {
                        m[i][j] = true;
                    }
                }
            }
        }
    }
    m
}

/// Covers of a partial order given by its matrix.
pub fn transitive_reduction(leq: &[Vec<bool>]) -> Vec<(usize, usize)> {
    let n = leq.len();
    let mut covers = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a == b || !leq[a][b] {
                continue;
            }
            if !(0..n).any(|c| c != a && c != b && leq[a][c] && leq[c][b]) {
                covers.push((a, b));
            }
        }
    }
    covers
}

fn heights(n: usize, covers: &[(usize, usize)]) -> Vec<usize> {
    let mut h = vec![0; n];
    loop {
        let mut changed = false;
        for &(lo, hi) in covers {
            if h[hi] < h[lo] + 1 {
                h[hi] = h[lo] + 1;
                changed = true;
            }
        }
        if !changed {
            return h;
        }
    }
}
