//! The `poset`, `ideals`, `rep` and `domain` subcommands.

use std::fmt::Write;
use std::path::{Path, PathBuf};

use dod_core::anosov::{
    anosov_fit, domain_sample, limit_cone_sample, properness_statistic, DomainOptions, PointVerdict, RepSpec,
};
use dod_core::ideals::{all_ideals, canonical_ideals, fat_verdict, is_w0_fat, minimal_fat_ideals, Ideal, Mode};
use dod_core::poset::{Certification, Poset};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, CliError, Result};
use crate::files::{load_rep, load_space, SpaceSpec};
use crate::output::{budget, emit, round12, sha256_hex, sig12, to_json, write_atomic, VERSION};
use crate::poset_file::{dot, read_poset_file, rebuild, BuildOptions, PosetBody, PosetFile};

pub const DEFAULT_SEED: u64 = 0x5eed;

pub struct PosetArgs {
    pub space: PathBuf,
    pub theta: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub dot: Option<PathBuf>,
}

pub fn cmd_poset(args: &PosetArgs) -> Result<PosetFile> {
    let space = load_space(&args.space, args.theta.as_deref())?;
    let options = BuildOptions::with_seed(args.seed.unwrap_or(DEFAULT_SEED));
    let poset = Poset::build(&space.family, &options.core())?;
    let file = PosetFile::new(&space.spec, &space.hash, &poset, options)?;
    emit(args.out.as_deref(), &to_json(&file)?)?;
    if let Some(p) = &args.dot {
        write_atomic(p, &dot(&file.poset, &file.content_hash))?;
    }
    Ok(file)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum IdealMode {
    Fat,
    W0fat,
}

impl IdealMode {
    fn core(self) -> Mode {
        match self {
            IdealMode::Fat => Mode::Fat,
            IdealMode::W0fat => Mode::W0Fat,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdealRecord {
    pub nodes: Vec<usize>,
    pub minimal_nodes: Vec<usize>,
    pub fat: String,
    pub w0_fat: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdealsFile {
    pub format: String,
    pub version: String,
    pub input_hash: String,
    pub poset_hash: String,
    pub space: SpaceSpec,
    pub poset_options: BuildOptions,
    pub mode: IdealMode,
    pub minimal_only: bool,
    pub certification: String,
    pub ideals: Vec<IdealRecord>,
}

fn witnessed(label: &str, cert: Certification) -> String {
    match cert {
        Certification::Exact => label.to_string(),
        Certification::Sampled => format!("{label} (witnessed)"),
    }
}

pub fn ideal_record(poset: &Poset, ideal: &Ideal) -> IdealRecord {
    let w0 = if is_w0_fat(poset, ideal) { "w0-fat" } else { "not w0-fat" };
    IdealRecord {
        nodes: ideal.members(),
        minimal_nodes: ideal.restricted(&poset.minimal),
        fat: fat_verdict(poset, ideal).to_string(),
        w0_fat: witnessed(w0, poset.order_certification),
    }
}

pub struct IdealsArgs {
    pub poset: PathBuf,
    pub mode: IdealMode,
    pub minimal_only: bool,
    pub out: Option<PathBuf>,
}

pub fn cmd_ideals(args: &IdealsArgs) -> Result<IdealsFile> {
    let (file, input_hash) = read_poset_file(&args.poset)?;
    let poset = rebuild(&file)?;
    let mode = args.mode.core();
    let ideals = if args.minimal_only {
        minimal_fat_ideals(&poset, mode)?
    } else {
        all_ideals(&poset)?.into_iter().filter(|i| !i.is_empty() && mode.holds(&poset, i)).collect()
    };
    let certification = match args.mode {
        IdealMode::Fat => poset.trans_certification,
        IdealMode::W0fat => poset.order_certification,
    };
    let out = IdealsFile {
        format: "dod-ideals".into(),
        version: VERSION.into(),
        input_hash,
        poset_hash: file.content_hash.clone(),
        space: file.space.clone(),
        poset_options: file.poset.options,
        mode: args.mode,
        minimal_only: args.minimal_only,
        certification: certification.to_string(),
        ideals: ideals.iter().map(|i| ideal_record(&poset, i)).collect(),
    };
    emit(args.out.as_deref(), &to_json(&out)?)?;
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneratorRecord {
    pub label: String,
    /// One row-major matrix per factor.
    pub factors: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RepRecord {
    pub name: String,
    pub d: usize,
    pub theta: Vec<usize>,
    pub lift: Option<usize>,
    pub generators: Vec<GeneratorRecord>,
}

impl RepRecord {
    pub fn new(rep: &RepSpec) -> Self {
        let generators = rep
            .generators
            .iter()
            .map(|g| GeneratorRecord {
                label: g.label.clone(),
                factors: g.factors.iter().map(|m| m.row_iter().map(|r| r.iter().copied().collect()).collect()).collect(),
            })
            .collect();
        RepRecord { name: rep.name.clone(), d: rep.d, theta: rep.theta.clone(), lift: rep.lift, generators }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MarginRecord {
    pub n: usize,
    pub m: f64,
    pub argmin: String,
    pub collapsed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitRecord {
    pub c: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
    pub ball_size: usize,
    pub monotone_within_0_1: bool,
    pub table: Vec<MarginRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RayRecord {
    pub direction: Vec<f64>,
    pub word: String,
    pub length: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConeRecord {
    pub floor: f64,
    pub rays_sampled: usize,
    pub extremes: Vec<RayRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropernessRecord {
    pub space: SpaceSpec,
    pub space_hash: String,
    pub mu_h: String,
    pub radius: usize,
    pub ball_size: usize,
    /// `[t, N(t)]`.
    pub rows: Vec<(f64, usize)>,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RepReport {
    pub format: String,
    pub version: String,
    pub input_hash: String,
    pub source: String,
    pub seed: u64,
    pub rep: RepRecord,
    pub radius: usize,
    pub budget: u64,
    pub certification: String,
    pub fit: FitRecord,
    pub cone: ConeRecord,
    pub properness: Option<PropernessRecord>,
    pub warnings: Vec<String>,
}

pub struct RepArgs {
    pub rep: String,
    pub radius: usize,
    pub space: Option<PathBuf>,
    pub theta: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

const CONE_FLOOR: f64 = 1e-6;

pub fn cmd_rep(args: &RepArgs) -> Result<RepReport> {
    let loaded = load_rep(&args.rep, args.theta.as_deref())?;
    let rep = &loaded.rep;
    let budget = budget()?;
    let fit = anosov_fit(rep, args.radius, budget)?;
    let mut warnings = fit.warnings.clone();
    if fit.c <= 0.0 {
        warnings.push(format!(
            "no positive growth rate at radius {}: c = {:.6}; the margins give no evidence for the Anosov property",
            args.radius, fit.c
        ));
    }
    let cone = limit_cone_sample(rep, args.radius, CONE_FLOOR, budget)?;
    let properness = match &args.space {
        Some(p) => {
            let space = load_space(p, None)?;
            let t = properness_statistic(rep, &space.family, args.radius, budget)?;
            Some(PropernessRecord {
                space: space.spec,
                space_hash: space.hash,
                mu_h: t.mu_h.to_string(),
                radius: t.radius,
                ball_size: t.ball_size,
                rows: t.rows,
                note: t.note.to_string(),
            })
        }
        None => None,
    };
    let report = RepReport {
        format: "dod-rep".into(),
        version: VERSION.into(),
        input_hash: loaded.hash.clone(),
        source: loaded.source.clone(),
        seed: args.seed.or(loaded.seed).unwrap_or(DEFAULT_SEED),
        rep: RepRecord::new(rep),
        radius: args.radius,
        budget,
        certification: "finite radius: margins and envelope over the word ball only".into(),
        fit: FitRecord {
            c: round12(fit.c),
            big_c: round12(fit.big_c),
            ball_size: fit.ball_size,
            monotone_within_0_1: fit.monotone_within(0.1),
            table: fit
                .table
                .iter()
                .map(|r| MarginRecord { n: r.n, m: round12(r.m), argmin: r.argmin.clone(), collapsed: r.collapsed })
                .collect(),
        },
        cone: ConeRecord {
            floor: cone.floor,
            rays_sampled: cone.rays.len(),
            extremes: cone
                .extremes
                .iter()
                .map(|&i| {
                    let r = &cone.rays[i];
                    RayRecord { direction: r.direction.iter().map(|&x| round12(x)).collect(), word: r.word.clone(), length: r.length }
                })
                .collect(),
        },
        properness,
        warnings,
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    emit(args.out.as_deref(), &to_json(&report)?)?;
    Ok(report)
}

/// Where the ideal for a domain run comes from.
#[derive(Debug, Clone)]
pub enum IdealSource {
    /// `min`, `nonmax`, `full` or `empty`, computed on the space's poset.
    Named(String),
    /// An ideals file and the index of the ideal in it.
    File(PathBuf, usize),
}

pub struct DomainArgs {
    pub rep: String,
    pub space: PathBuf,
    pub ideal: IdealSource,
    pub theta: Option<Vec<usize>>,
    pub samples: usize,
    pub flags: usize,
    pub min_length: usize,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct DomainSummary {
    pub in_fraction: f64,
    pub out_fraction: f64,
    pub boundary_fraction: f64,
    pub seed: u64,
    pub poset_hash: String,
}

fn ideal_for(source: &IdealSource, space: &SpaceSpec, poset_cache: &mut Option<(Poset, String)>) -> Result<(Ideal, String, String)> {
    match source {
        IdealSource::Named(name) => {
            let options = BuildOptions::default();
            let family = space.family()?;
            let poset = Poset::build(&family, &options.core())?;
            let hash = PosetBody::from_poset(&poset, options).hash()?;
            let ideal = match name.as_str() {
                "min" => canonical_ideals(&poset)?.min,
                "nonmax" => canonical_ideals(&poset)?.nonmax,
                "full" => Ideal::full(&poset)?,
                "empty" => Ideal::empty(),
                other => return Err(CliError::Usage(format!("unknown ideal {other:?}; use min, nonmax, full, empty or a file"))),
            };
            *poset_cache = Some((poset, hash.clone()));
            Ok((ideal, hash, sha256_hex(format!("ideal:{name}").as_bytes())))
        }
        IdealSource::File(path, index) => {
            let text = std::fs::read_to_string(path).map_err(io_err(path))?;
            let file: IdealsFile = serde_json::from_str(&text)
                .map_err(|e| CliError::Parse { path: path.display().to_string(), message: e.to_string() })?;
            if file.space != *space {
                return Err(CliError::Inconsistent(format!(
                    "the ideal was computed for {:?} but the space file describes {:?}",
                    file.space, space
                )));
            }
            let family = space.family()?;
            let poset = Poset::build(&family, &file.poset_options.core())?;
            let hash = PosetBody::from_poset(&poset, file.poset_options).hash()?;
            if hash != file.poset_hash {
                return Err(CliError::StaleHash(format!("ideal file refers to poset {} but the space gives {hash}", file.poset_hash)));
            }
            let record = file.ideals.get(*index).ok_or_else(|| {
                CliError::Usage(format!("{} holds {} ideals, index {index} requested", path.display(), file.ideals.len()))
            })?;
            let ideal = Ideal::new(&poset, &record.nodes)?;
            *poset_cache = Some((poset, hash.clone()));
            Ok((ideal, hash, sha256_hex(text.as_bytes())))
        }
    }
}

pub fn cmd_domain(args: &DomainArgs) -> Result<DomainSummary> {
    let loaded = load_rep(&args.rep, args.theta.as_deref())?;
    let space = load_space(&args.space, None)?;
    let mut cache = None;
    let (ideal, poset_hash, ideal_hash) = ideal_for(&args.ideal, &space.spec, &mut cache)?;
    let (poset, _) = cache.expect("poset built with the ideal");
    let rep = &loaded.rep;
    let fam_theta = space.family.theta();
    if fam_theta.iter().any(|k| !rep.theta.contains(k)) {
        return Err(CliError::Inconsistent(format!(
            "representation theta {:?} does not contain the space's theta {fam_theta:?}",
            rep.theta
        )));
    }
    let seed = args.seed.or(loaded.seed).unwrap_or(DEFAULT_SEED);
    let opts = DomainOptions { n_points: args.samples, seed, flag_count: args.flags, min_length: args.min_length, budget: budget()? };
    let sample = domain_sample(rep, &ideal, &poset, &opts)?;

    let width = sample.points.first().map_or(0, |(x, _)| x.coordinates().len());
    let mut csv = String::new();
    let coords: Vec<String> = (0..width).map(|i| format!("x{i}")).collect();
    let _ = writeln!(csv, "index,verdict,margin,node,witness,{}", coords.join(","));
    for (i, (x, m)) in sample.points.iter().enumerate() {
        let node = match m.verdict {
            PointVerdict::Out { node, .. } => node.to_string(),
            _ => String::new(),
        };
        let witness = m.witness_word.clone().unwrap_or_default();
        let xs: Vec<String> = x.coordinates().into_iter().map(sig12).collect();
        let _ = writeln!(csv, "{i},{},{},{node},{witness},{}", m.verdict.name(), sig12(m.margin), xs.join(","));
    }
    let _ = writeln!(csv, "# version={VERSION}");
    let _ = writeln!(csv, "# rep={} rep_hash={} space_hash={} ideal_hash={} poset_hash={poset_hash}", loaded.source, loaded.hash, space.hash, ideal_hash);
    let _ = writeln!(csv, "# family={} ideal={:?}", poset.family, ideal.members());
    let _ = writeln!(
        csv,
        "# in_fraction={} out_fraction={} boundary_fraction={}",
        sig12(sample.in_fraction),
        sig12(sample.out_fraction),
        sig12(sample.boundary_fraction)
    );
    let _ = writeln!(csv, "# flag_count={} min_length={} samples={} seed={seed}", sample.flag_count, sample.min_length, args.samples);
    let _ = writeln!(
        csv,
        "# certification=sampled: in means no sampled limit flag excludes the point; order={} transverse={}",
        poset.order_certification, poset.trans_certification
    );
    for w in &sample.warnings {
        let _ = writeln!(csv, "# warning={}", w.replace('\n', " "));
    }
    emit(args.out.as_deref(), &csv)?;
    Ok(DomainSummary {
        in_fraction: sample.in_fraction,
        out_fraction: sample.out_fraction,
        boundary_fraction: sample.boundary_fraction,
        seed,
        poset_hash,
    })
}

/// An ideals file, or one of the bare names `min`, `nonmax`, `full`, `empty`
/// when no such file exists.
pub fn parse_ideal_source(arg: &str, index: usize) -> IdealSource {
    let path = Path::new(arg);
    if !path.exists() && ["min", "nonmax", "full", "empty"].contains(&arg) {
        IdealSource::Named(arg.to_string())
    } else {
        IdealSource::File(path.to_path_buf(), index)
    }
}
