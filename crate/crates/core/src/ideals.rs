//! Ideals of a position poset, fatness predicates and minimal fat ideals.

use std::collections::HashSet;
use std::fmt;

use crate::poset::{Certification, Poset};
use crate::{Error, Result};

/// Cap on the number of ideals visited by an enumeration.
pub const MAX_IDEALS: usize = 1 << 20;

/// A downward-closed set of node ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ideal {
    bits: u64,
}

fn check_size(poset: &Poset) -> Result<()> {
    if poset.len() > 64 {
        return Err(Error::TooLarge(format!("ideals are supported on posets of at most 64 nodes, got {}", poset.len())));
    }
    Ok(())
}

fn below_mask(poset: &Poset, a: usize) -> u64 {
    (0..poset.len()).filter(|&b| poset.leq[b][a]).fold(0, |m, b| m | 1 << b)
}

impl Ideal {
    pub fn empty() -> Self {
        Ideal { bits: 0 }
    }

    /// Validates downward closure.
    pub fn new(poset: &Poset, members: &[usize]) -> Result<Self> {
        check_size(poset)?;
        let mut bits = 0u64;
        for &a in members {
            if a >= poset.len() {
                return Err(Error::InvalidInput(format!("node {a} is not in the poset")));
            }
            bits |= 1 << a;
        }
        for &a in members {
            let below = below_mask(poset, a);
            if below & !bits != 0 {
                return Err(Error::InvalidInput(format!("{members:?} is not downward closed at node {a}")));
            }
        }
        Ok(Ideal { bits })
    }

    /// Smallest ideal containing the generators.
    pub fn generated(poset: &Poset, generators: &[usize]) -> Result<Self> {
        check_size(poset)?;
        let mut bits = 0;
        for &a in generators {
            if a >= poset.len() {
                return Err(Error::InvalidInput(format!("node {a} is not in the poset")));
            }
            bits |= below_mask(poset, a);
        }
        Ok(Ideal { bits })
    }

    /// Every node.
    pub fn full(poset: &Poset) -> Result<Self> {
        check_size(poset)?;
        let n = poset.len();
        Ok(Ideal { bits: if n == 64 { u64::MAX } else { (1u64 << n) - 1 } })
    }

    pub fn contains(&self, a: usize) -> bool {
        a < 64 && self.bits >> a & 1 == 1
    }

    pub fn members(&self) -> Vec<usize> {
        (0..64).filter(|&a| self.contains(a)).collect()
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn is_subset(&self, other: &Ideal) -> bool {
        self.bits & !other.bits == 0
    }

    /// Members restricted to a node list.
    pub fn restricted(&self, nodes: &[usize]) -> Vec<usize> {
        nodes.iter().copied().filter(|&a| self.contains(a)).collect()
    }
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.members())
    }
}

/// Every `p ∉ I` is transversely related to some `p' ∈ I`.
pub fn is_fat(poset: &Poset, ideal: &Ideal) -> bool {
    (0..poset.len()).filter(|&p| !ideal.contains(p)).all(|p| (0..poset.len()).any(|q| ideal.contains(q) && poset.trans_rel[p][q]))
}

/// Every minimal `p ∉ I` has `w0 · p ∈ I`.
pub fn is_w0_fat(poset: &Poset, ideal: &Ideal) -> bool {
    poset.minimal.iter().filter(|&&p| !ideal.contains(p)).all(|&p| ideal.contains(poset.w0_map[p]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Fat,
    W0Fat,
}

impl Mode {
    pub fn holds(self, poset: &Poset, ideal: &Ideal) -> bool {
        match self {
            Mode::Fat => is_fat(poset, ideal),
            Mode::W0Fat => is_w0_fat(poset, ideal),
        }
    }
}

/// A predicate value with the certification it inherits from `↔`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub value: bool,
    pub certification: Certification,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.value { "fat" } else { "not fat" })?;
        if self.certification == Certification::Sampled {
            f.write_str(" (witnessed)")?;
        }
        Ok(())
    }
}

/// [`is_fat`] labelled with the certification of the transverse relation.
pub fn fat_verdict(poset: &Poset, ideal: &Ideal) -> Verdict {
    Verdict { value: is_fat(poset, ideal), certification: poset.trans_certification }
}

/// Ideals obtained from `ideal` by adding one node whose lower covers are present.
fn extensions(poset: &Poset, ideal: &Ideal) -> Vec<Ideal> {
    (0..poset.len())
        .filter(|&a| !ideal.contains(a))
        .filter(|&a| below_mask(poset, a) & !(ideal.bits | 1 << a) == 0)
        .map(|a| Ideal { bits: ideal.bits | 1 << a })
        .collect()
}

/// Ideals obtained by removing one maximal element.
fn reductions(poset: &Poset, ideal: &Ideal) -> Vec<Ideal> {
    ideal
        .members()
        .into_iter()
        .filter(|&a| (0..poset.len()).all(|b| b == a || !poset.leq[a][b] || !ideal.contains(b)))
        .map(|a| Ideal { bits: ideal.bits & !(1 << a) })
        .collect()
}

/// All ideals, the empty one included, by increasing size.
pub fn all_ideals(poset: &Poset) -> Result<Vec<Ideal>> {
    check_size(poset)?;
    let mut out = vec![Ideal::empty()];
    let mut frontier = vec![Ideal::empty()];
    while !frontier.is_empty() {
        let mut next: HashSet<Ideal> = HashSet::new();
        for i in &frontier {
            next.extend(extensions(poset, i));
        }
        let mut next: Vec<Ideal> = next.into_iter().collect();
        next.sort();
        out.extend(next.iter().copied());
        if out.len() > MAX_IDEALS {
            return Err(Error::TooLarge(format!("more than {MAX_IDEALS} ideals")));
        }
        frontier = next;
    }
    Ok(out)
}

/// Inclusion-minimal non-empty ideals satisfying the predicate. Both
/// predicates are monotone, so the search never extends an ideal that
/// already satisfies it.
pub fn minimal_fat_ideals(poset: &Poset, mode: Mode) -> Result<Vec<Ideal>> {
    check_size(poset)?;
    let mut found = Vec::new();
    let mut frontier = vec![Ideal::empty()];
    let mut visited = 1usize;
    while !frontier.is_empty() {
        let mut next: HashSet<Ideal> = HashSet::new();
        for i in &frontier {
            for j in extensions(poset, i) {
                if next.contains(&j) {
                    continue;
                }
                visited += 1;
                if visited > MAX_IDEALS {
                    return Err(Error::TooLarge(format!("more than {MAX_IDEALS} ideals visited")));
                }
                next.insert(j);
            }
        }
        let mut keep = Vec::new();
        let mut layer: Vec<Ideal> = next.into_iter().collect();
        layer.sort();
        for j in layer {
            if mode.holds(poset, &j) {
                if reductions(poset, &j).iter().all(|r| r.is_empty() || !mode.holds(poset, r)) {
                    found.push(j);
                }
            } else {
                keep.push(j);
            }
        }
        frontier = keep;
    }
    Ok(found)
}

#[derive(Debug, Clone)]
pub struct CanonicalIdeals {
    /// Every non-maximal position.
    pub nonmax: Ideal,
    /// Every minimal position.
    pub min: Ideal,
}

/// `I_nonmax` and `I_min`, checking that the first is fat and the second
/// `w0`-fat.
pub fn canonical_ideals(poset: &Poset) -> Result<CanonicalIdeals> {
    check_size(poset)?;
    let nonmax: Vec<usize> = (0..poset.len()).filter(|a| !poset.maximal.contains(a)).collect();
    let nonmax = Ideal::new(poset, &nonmax)?;
    let min = Ideal::new(poset, &poset.minimal)?;
    if poset.len() >= 2 && !is_fat(poset, &nonmax) {
        return Err(Error::Consistency("the ideal of non-maximal positions is not fat".into()));
    }
    if !is_w0_fat(poset, &min) {
        return Err(Error::Consistency("the ideal of minimal positions is not w0-fat".into()));
    }
    Ok(CanonicalIdeals { nonmax, min })
}
