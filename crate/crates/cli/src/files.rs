//! Space and representation input files (TOML).

use std::path::Path;

use dod_core::anosov::{self, Generator, RepSpec};
use dod_core::spaces::Family;
use dod_core::weyl;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, CliError, Result};
use crate::output::sha256_hex;

/// A homogeneous space, as written in a space file.
///
/// ```toml
/// family = "complementary"
/// d = 4
/// p = 1
/// theta = [1, 2, 3]
/// ```
///
/// Omitted `theta` lists default to all of `1..d`; quadratic forms default
/// to `{1, d-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpaceSpec {
    Flag {
        d: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta_prime: Option<Vec<usize>>,
    },
    Complementary {
        d: usize,
        p: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<Vec<usize>>,
    },
    Quadform {
        p: usize,
        q: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<Vec<usize>>,
    },
    Groupmanifold {
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta_l: Option<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta_r: Option<Vec<usize>>,
    },
    Pseudohyp {
        p: usize,
        q: usize,
    },
}

fn or_full(theta: &Option<Vec<usize>>, d: usize) -> Vec<usize> {
    let mut t = theta.clone().unwrap_or_else(|| weyl::full_dims(d));
    t.sort_unstable();
    t.dedup();
    t
}

impl SpaceSpec {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Parse { path: origin.to_string(), message: e.to_string() })
    }

    /// Every optional field filled in and every list sorted.
    pub fn normalized(&self) -> Result<SpaceSpec> {
        Ok(match self {
            SpaceSpec::Flag { d, theta, theta_prime } => {
                SpaceSpec::Flag { d: *d, theta: Some(or_full(theta, *d)), theta_prime: Some(or_full(theta_prime, *d)) }
            }
            SpaceSpec::Complementary { d, p, theta } => SpaceSpec::Complementary { d: *d, p: *p, theta: Some(or_full(theta, *d)) },
            SpaceSpec::Quadform { p, q, d, theta } => {
                let n = p + q;
                if d.is_some_and(|d| d != n) {
                    return Err(CliError::Usage(format!("quadform with p + q = {n} but d = {}", d.unwrap())));
                }
                let default = if n == 2 { vec![1] } else { vec![1, n - 1] };
                let mut t = theta.clone().unwrap_or(default);
                t.sort_unstable();
                t.dedup();
                SpaceSpec::Quadform { p: *p, q: *q, d: Some(n), theta: Some(t) }
            }
            SpaceSpec::Groupmanifold { m, theta_l, theta_r } => {
                SpaceSpec::Groupmanifold { m: *m, theta_l: Some(or_full(theta_l, *m)), theta_r: Some(or_full(theta_r, *m)) }
            }
            SpaceSpec::Pseudohyp { p, q } => SpaceSpec::Pseudohyp { p: *p, q: *q },
        })
    }

    /// Replace the flag-variety index set. Group manifolds get it on both
    /// sides.
    pub fn with_theta(&self, theta: &[usize]) -> Result<SpaceSpec> {
        let t = Some(theta.to_vec());
        Ok(match self.clone() {
            SpaceSpec::Flag { d, theta_prime, .. } => SpaceSpec::Flag { d, theta: t, theta_prime },
            SpaceSpec::Complementary { d, p, .. } => SpaceSpec::Complementary { d, p, theta: t },
            SpaceSpec::Quadform { p, q, d, .. } => SpaceSpec::Quadform { p, q, d, theta: t },
            SpaceSpec::Groupmanifold { m, .. } => SpaceSpec::Groupmanifold { m, theta_l: t.clone(), theta_r: t },
            SpaceSpec::Pseudohyp { .. } => {
                return Err(CliError::Usage("pseudohyp spaces only carry isotropic lines; --theta does not apply".into()))
            }
        }
        .normalized()?)
    }

    pub fn family(&self) -> Result<Family> {
        let n = self.normalized()?;
        let get = |t: &Option<Vec<usize>>| t.clone().unwrap_or_default();
        Ok(match &n {
            SpaceSpec::Flag { d, theta, theta_prime } => Family::flag_flag(*d, &get(theta), &get(theta_prime))?,
            SpaceSpec::Complementary { d, p, theta } => Family::complementary(*d, *p, &get(theta))?,
            SpaceSpec::Quadform { p, q, theta, .. } => Family::quadratic_form(*p, *q, &get(theta))?,
            SpaceSpec::Groupmanifold { m, theta_l, theta_r } => Family::group_manifold(*m, &get(theta_l), &get(theta_r))?,
            SpaceSpec::Pseudohyp { p, q } => Family::pseudo_hyperbolic(*p, *q)?,
        })
    }
}

/// A space file together with the hash of its bytes.
#[derive(Debug, Clone)]
pub struct LoadedSpace {
    pub spec: SpaceSpec,
    pub family: Family,
    pub hash: String,
}

pub fn load_space(path: &Path, theta: Option<&[usize]>) -> Result<LoadedSpace> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut spec = SpaceSpec::parse(&text, &path.display().to_string())?.normalized()?;
    if let Some(t) = theta {
        spec = spec.with_theta(t)?;
    }
    let family = spec.family()?;
    Ok(LoadedSpace { spec, family, hash: sha256_hex(text.as_bytes()) })
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum MatrixEntries {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl MatrixEntries {
    fn to_matrix(&self, n: usize, what: &str) -> Result<DMatrix<f64>> {
        let flat: Vec<f64> = match self {
            MatrixEntries::Rows(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(CliError::Usage(format!("{what}: expected {n} rows of {n} entries")));
                }
                rows.concat()
            }
            MatrixEntries::Flat(v) => v.clone(),
        };
        if flat.len() != n * n {
            return Err(CliError::Usage(format!("{what}: expected {} entries, got {}", n * n, flat.len())));
        }
        Ok(DMatrix::from_row_slice(n, n, &flat))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorEntry {
    label: String,
    #[serde(default)]
    matrix: Option<MatrixEntries>,
    #[serde(default)]
    left: Option<MatrixEntries>,
    #[serde(default)]
    right: Option<MatrixEntries>,
}

/// A representation file.
///
/// Matrices are given row by row, either nested or flat:
///
/// ```toml
/// name = "example"
/// d = 2
/// theta = [1]
/// seed = 7
///
/// [[generators]]
/// label = "a"
/// matrix = [[2.0, 0.0], [0.0, 0.5]]
/// ```
///
/// With `symmetric_power = n` the generators are `2 × 2` and are lifted to
/// `SL(n)`. Generators with `left` and `right` instead of `matrix` act on
/// group manifolds. `bundled = "<name>"` loads a shipped representation.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RepFile {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    d: Option<usize>,
    #[serde(default)]
    theta: Option<Vec<usize>>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    symmetric_power: Option<usize>,
    #[serde(default)]
    bundled: Option<String>,
    #[serde(default)]
    generators: Vec<GeneratorEntry>,
}

pub const BUNDLED: [&str; 6] = ["schottky_sl2", "sym2", "sym3", "sym4", "diagonal_pair", "schottky_so22"];

/// A shipped representation by name; `symN` is the `N`-th symmetric power
/// of the Schottky pair.
pub fn bundled(name: &str) -> Result<RepSpec> {
    match name {
        "schottky_sl2" => Ok(anosov::schottky_sl2()),
        "diagonal_pair" => Ok(anosov::diagonal_pair()),
        "schottky_so22" => Ok(anosov::schottky_so22()),
        _ => match name.strip_prefix("sym").and_then(|n| n.parse::<usize>().ok()) {
            Some(n) if (1..=8).contains(&n) => Ok(anosov::sym_lift(n + 1)?),
            _ => Err(CliError::Usage(format!("unknown bundled representation {name:?}; known: {}", BUNDLED.join(", ")))),
        },
    }
}

#[derive(Debug, Clone)]
pub struct LoadedRep {
    pub rep: RepSpec,
    pub seed: Option<u64>,
    pub hash: String,
    pub source: String,
}

fn rep_from_file(file: &RepFile, origin: &str) -> Result<RepSpec> {
    let name = file.name.clone().unwrap_or_else(|| "rep".into());
    if let Some(b) = &file.bundled {
        if !file.generators.is_empty() || file.symmetric_power.is_some() {
            return Err(CliError::Usage(format!("{origin}: `bundled` excludes explicit generators")));
        }
        let rep = bundled(b)?;
        return match &file.theta {
            Some(t) => Ok(RepSpec::new(&rep.name, rep.d, t, rep.generators.clone())?),
            None => Ok(rep),
        };
    }
    if file.generators.is_empty() {
        return Err(CliError::Usage(format!("{origin}: no generators")));
    }
    if let Some(n) = file.symmetric_power {
        if file.d.is_some_and(|d| d != n) {
            return Err(CliError::Usage(format!("{origin}: d = {} but symmetric_power = {n}", file.d.unwrap())));
        }
        let sl2 = file
            .generators
            .iter()
            .map(|g| match (&g.matrix, &g.left, &g.right) {
                (Some(m), None, None) => Ok((g.label.clone(), m.to_matrix(2, &g.label)?)),
                _ => Err(CliError::Usage(format!("{origin}: generator {} needs a single 2x2 `matrix`", g.label))),
            })
            .collect::<Result<Vec<_>>>()?;
        let theta = file.theta.clone().unwrap_or_else(|| weyl::full_dims(n));
        return Ok(RepSpec::symmetric_power(&name, &sl2, n, &theta)?);
    }
    let d = file.d.ok_or_else(|| CliError::Usage(format!("{origin}: missing `d`")))?;
    let gens = file
        .generators
        .iter()
        .map(|g| match (&g.matrix, &g.left, &g.right) {
            (Some(m), None, None) => Ok(Generator::new(&g.label, m.to_matrix(d, &g.label)?)),
            (None, Some(l), Some(r)) => Ok(Generator::pair(&g.label, l.to_matrix(d, &g.label)?, r.to_matrix(d, &g.label)?)),
            _ => Err(CliError::Usage(format!("{origin}: generator {} needs `matrix` or both `left` and `right`", g.label))),
        })
        .collect::<Result<Vec<_>>>()?;
    let theta = file.theta.clone().unwrap_or_else(|| weyl::full_dims(d));
    Ok(RepSpec::new(&name, d, &theta, gens)?)
}

pub fn parse_rep(text: &str, origin: &str) -> Result<(RepSpec, Option<u64>)> {
    let file: RepFile = toml::from_str(text).map_err(|e| CliError::Parse { path: origin.to_string(), message: e.to_string() })?;
    Ok((rep_from_file(&file, origin)?, file.seed))
}

/// A representation file, or the name of a bundled representation when no
/// such file exists.
pub fn load_rep(arg: &str, theta: Option<&[usize]>) -> Result<LoadedRep> {
    let path = Path::new(arg);
    let (rep, seed, hash) = if path.exists() {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let (rep, seed) = parse_rep(&text, arg)?;
        (rep, seed, sha256_hex(text.as_bytes()))
    } else if BUNDLED.contains(&arg) || arg.starts_with("sym") {
        (bundled(arg)?, None, sha256_hex(format!("bundled:{arg}").as_bytes()))
    } else {
        return Err(CliError::Usage(format!("{arg}: no such file and not a bundled representation ({})", BUNDLED.join(", "))));
    };
    let rep = match theta {
        Some(t) => {
            let mut r = RepSpec::new(&rep.name, rep.d, t, rep.generators.clone())?;
            r.lift = rep.lift;
            r
        }
        None => rep,
    };
    Ok(LoadedRep { rep, seed, hash, source: arg.to_string() })
}

/// Comma-separated list of positive integers.
pub fn parse_theta(s: &str) -> std::result::Result<Vec<usize>, String> {
    let mut v = s
        .split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    v.sort_unstable();
    v.dedup();
    Ok(v)
}
