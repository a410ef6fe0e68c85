//! Poset files: JSON with a content hash, and DOT Hasse diagrams.

use std::fmt::Write;
use std::path::Path;

use dod_core::poset::{Poset, PosetOptions};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, CliError, Result};
use crate::files::SpaceSpec;
use crate::output::{canonical_hash, round12, sha256_hex, VERSION};

pub const POSET_FORMAT: &str = "dod-poset";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub max_nodes: usize,
    pub curves: usize,
    pub samples: usize,
    pub seed: u64,
}

impl BuildOptions {
    pub fn with_seed(seed: u64) -> Self {
        let d = PosetOptions::default();
        BuildOptions { max_nodes: d.max_nodes, curves: d.curves, samples: d.samples, seed }
    }

    pub fn core(&self) -> PosetOptions {
        PosetOptions { max_nodes: self.max_nodes, curves: self.curves, samples: self.samples, seed: self.seed }
    }
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions::with_seed(PosetOptions::default().seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: usize,
    pub label: String,
    pub fingerprint: String,
    pub values: Vec<i64>,
    pub margin: f64,
    pub height: usize,
    pub minimal: bool,
    pub maximal: bool,
}

/// Everything the content hash covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosetBody {
    pub family: String,
    pub options: BuildOptions,
    pub order_certification: String,
    pub trans_certification: String,
    pub nodes: Vec<NodeRecord>,
    /// `[lower, upper]`.
    pub covers: Vec<[usize; 2]>,
    pub w0_map: Vec<usize>,
    /// Unordered pairs `[a, b]` with `a <= b` and `a ↔ b`.
    pub trans_rel: Vec<[usize; 2]>,
    pub order_discrepancies: Vec<[usize; 2]>,
    pub consistency_issues: Vec<String>,
}

impl PosetBody {
    pub fn from_poset(poset: &Poset, options: BuildOptions) -> Self {
        let n = poset.len();
        let nodes = poset
            .nodes
            .iter()
            .map(|nd| NodeRecord {
                id: nd.id,
                label: nd.label.clone(),
                fingerprint: nd.fingerprint.to_string(),
                values: nd.fingerprint.values.clone(),
                margin: round12(nd.fingerprint.margin),
                height: poset.heights[nd.id],
                minimal: poset.minimal.contains(&nd.id),
                maximal: poset.maximal.contains(&nd.id),
            })
            .collect();
        let mut covers: Vec<[usize; 2]> = poset.covers.iter().map(|&(a, b)| [a, b]).collect();
        covers.sort_unstable();
        let trans_rel = (0..n).flat_map(|a| (a..n).map(move |b| [a, b])).filter(|&[a, b]| poset.trans_rel[a][b]).collect();
        let mut order_discrepancies: Vec<[usize; 2]> = poset.order_discrepancies.iter().map(|&(a, b)| [a, b]).collect();
        order_discrepancies.sort_unstable();
        PosetBody {
            family: poset.family.to_string(),
            options,
            order_certification: poset.order_certification.to_string(),
            trans_certification: poset.trans_certification.to_string(),
            nodes,
            covers,
            w0_map: poset.w0_map.clone(),
            trans_rel,
            order_discrepancies,
            consistency_issues: poset.consistency_issues.clone(),
        }
    }

    pub fn hash(&self) -> Result<String> {
        canonical_hash(self)
    }

    pub fn minimal(&self) -> Vec<usize> {
        self.nodes.iter().filter(|n| n.minimal).map(|n| n.id).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PosetFile {
    pub format: String,
    pub version: String,
    pub input_hash: String,
    pub space: SpaceSpec,
    pub seed: u64,
    pub content_hash: String,
    pub poset: PosetBody,
}

impl PosetFile {
    pub fn new(space: &SpaceSpec, input_hash: &str, poset: &Poset, options: BuildOptions) -> Result<Self> {
        let body = PosetBody::from_poset(poset, options);
        Ok(PosetFile {
            format: POSET_FORMAT.into(),
            version: VERSION.into(),
            input_hash: input_hash.into(),
            space: space.clone(),
            seed: options.seed,
            content_hash: body.hash()?,
            poset: body,
        })
    }
}

/// A poset file whose hash matches its content, with the hash of its bytes.
pub fn read_poset_file(path: &Path) -> Result<(PosetFile, String)> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let file: PosetFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse { path: path.display().to_string(), message: e.to_string() })?;
    if file.format != POSET_FORMAT {
        return Err(CliError::Parse { path: path.display().to_string(), message: format!("format {:?} is not {POSET_FORMAT:?}", file.format) });
    }
    let actual = file.poset.hash()?;
    if actual != file.content_hash {
        return Err(CliError::StaleHash(format!(
            "{}: recorded {} but the content hashes to {actual}",
            path.display(),
            file.content_hash
        )));
    }
    Ok((file, sha256_hex(text.as_bytes())))
}

/// Rebuild the poset a file describes and make sure it is the same one.
pub fn rebuild(file: &PosetFile) -> Result<Poset> {
    let family = file.space.family()?;
    let poset = Poset::build(&family, &file.poset.options.core())?;
    let fresh = PosetBody::from_poset(&poset, file.poset.options).hash()?;
    if fresh != file.content_hash {
        return Err(CliError::StaleHash(format!(
            "file records {} but {family} rebuilds to {fresh}",
            file.content_hash
        )));
    }
    Ok(poset)
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Hasse diagram, minimal nodes at the bottom. Solid edges are covers,
/// dashed gray edges pair each node with its `w0` image.
pub fn dot(body: &PosetBody, content_hash: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "digraph poset {{");
    let _ = writeln!(s, "  // {} | hash {content_hash} | version {VERSION}", body.family);
    let _ = writeln!(s, "  // order {}, transverse relation {}", body.order_certification, body.trans_certification);
    let _ = writeln!(s, "  rankdir=BT;");
    let _ = writeln!(s, "  node [shape=box, fontname=\"Helvetica\"];");
    for nd in &body.nodes {
        let style = match (nd.minimal, nd.maximal) {
            (true, true) => ", style=\"filled,bold\", fillcolor=lightgray, peripheries=2",
            (true, false) => ", peripheries=2",
            (false, true) => ", style=filled, fillcolor=lightgray",
            _ => "",
        };
        let _ = writeln!(s, "  n{} [label=\"{}: {}\"{style}];", nd.id, nd.id, dot_escape(&nd.fingerprint));
    }
    let top = body.nodes.iter().map(|n| n.height).max().unwrap_or(0);
    for h in 0..=top {
        let ids: Vec<String> = body.nodes.iter().filter(|n| n.height == h).map(|n| format!("n{}", n.id)).collect();
        if !ids.is_empty() {
            let _ = writeln!(s, "  {{ rank=same; {}; }}", ids.join("; "));
        }
    }
    for &[lo, hi] in &body.covers {
        let _ = writeln!(s, "  n{lo} -> n{hi};");
    }
    for (a, &b) in body.w0_map.iter().enumerate() {
        if a < b {
            let _ = writeln!(s, "  n{a} -> n{b} [style=dashed, color=gray, dir=both, constraint=false];");
        }
    }
    s.push_str("}\n");
    s
}
