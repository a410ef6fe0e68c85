use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dod_core::anosov::{domain_membership, limit_set_sample, schottky_so22, PointVerdict, DEFAULT_BUDGET};
use dod_core::ideals::canonical_ideals;
use dod_core::poset::{Poset, PosetOptions};
use dod_core::spaces::{q_form, Family, NegativeLine, SpacePoint};
use nalgebra::DVector;
use serde_json::Value;
use tempfile::TempDir;

fn dod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dod")).args(args).output().expect("binary runs")
}

fn dod_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dod")).args(args).env(key, value).output().expect("binary runs")
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

const LINES_R4: &str = "family = \"complementary\"\nd = 4\np = 1\ntheta = [1, 2, 3]\n";
const LINES_R4_ENDS: &str = "family = \"complementary\"\nd = 4\np = 1\ntheta = [1, 3]\n";

#[test]
fn poset_of_lines_and_hyperplanes() {
    let dir = TempDir::new().unwrap();
    let space = write(dir.path(), "space.toml", LINES_R4);
    let (js, gv) = (dir.path().join("p.json"), dir.path().join("p.dot"));
    ok(&dod(&["poset", "--space", s(&space), "--out", s(&js), "--dot", s(&gv)]));
    let f = json(&js);
    let nodes = f["poset"]["nodes"].as_array().unwrap();
    assert_eq!(nodes.len(), 10);
    assert_eq!(nodes.iter().filter(|n| n["minimal"] == true).count(), 4);
    assert_eq!(f["poset"]["order_certification"], "exact");
    assert_eq!(f["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(f["seed"], 0x5eed);
    assert_eq!(f["input_hash"].as_str().unwrap().len(), 64);

    let dot = std::fs::read_to_string(&gv).unwrap();
    assert_eq!(dot.matches("rank=same").count(), 4);
    let heights: Vec<u64> = nodes.iter().map(|n| n["height"].as_u64().unwrap()).collect();
    let w0: Vec<usize> = f["poset"]["w0_map"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap() as usize).collect();
    let mut dashed = vec![None; w0.len()];
    let mut solid = 0;
    for line in dot.lines().filter(|l| l.contains("->")) {
        let ends: Vec<usize> = line
            .split("->")
            .map(|t| t.trim().trim_start_matches('n').split(|c: char| !c.is_ascii_digit()).next().unwrap().parse().unwrap())
            .collect();
        let (a, b) = (ends[0], ends[1]);
        if line.contains("dashed") {
            dashed[a] = Some(b);
            dashed[b] = Some(a);
        } else {
            assert!(heights[a] < heights[b], "solid edge {a} -> {b} does not climb");
            solid += 1;
        }
    }
    assert_eq!(solid, f["poset"]["covers"].as_array().unwrap().len());
    for (a, &b) in w0.iter().enumerate() {
        assert_eq!(dashed[a].unwrap_or(a), b, "dashed edges disagree with w0 at {a}");
    }
}

#[test]
fn small_figures() {
    let dir = TempDir::new().unwrap();
    for (text, n) in [("family = \"quadform\"\np = 1\nq = 2\n", 6), ("family = \"flag\"\nd = 3\n", 6)] {
        let space = write(dir.path(), "s.toml", text);
        let js = dir.path().join("p.json");
        ok(&dod(&["poset", "--space", s(&space), "--out", s(&js)]));
        assert_eq!(json(&js)["poset"]["nodes"].as_array().unwrap().len(), n, "{text}");
    }
}

#[test]
fn outputs_are_byte_identical_on_rerun() {
    let dir = TempDir::new().unwrap();
    let space = write(dir.path(), "space.toml", LINES_R4_ENDS);
    let run = |tag: &str| {
        let (js, gv, id, csv) = (
            dir.path().join(format!("{tag}.json")),
            dir.path().join(format!("{tag}.dot")),
            dir.path().join(format!("{tag}.ideals.json")),
            dir.path().join(format!("{tag}.csv")),
        );
        ok(&dod(&["poset", "--space", s(&space), "--out", s(&js), "--dot", s(&gv)]));
        ok(&dod(&["ideals", "--poset", s(&js), "--mode", "w0fat", "--minimal-only", "--out", s(&id)]));
        ok(&dod(&["domain", "--rep", "sym3", "--space", s(&space), "--ideal", s(&id), "--samples", "50", "--flags", "32", "--seed", "9", "--out", s(&csv)]));
        [js, gv, id, csv].map(|p| std::fs::read(p).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn ideals_of_lines_against_line_hyperplane_flags() {
    let dir = TempDir::new().unwrap();
    let space = write(dir.path(), "space.toml", LINES_R4_ENDS);
    let js = dir.path().join("p.json");
    ok(&dod(&["poset", "--space", s(&space), "--out", s(&js)]));
    let out = dir.path().join("i.json");
    ok(&dod(&["ideals", "--poset", s(&js), "--mode", "w0fat", "--minimal-only", "--out", s(&out)]));
    let f = json(&out);
    assert_eq!(f["ideals"].as_array().unwrap().len(), 2);
    assert_eq!(f["poset_hash"], json(&js)["content_hash"]);

    // The transverse relation of this poset is sampled, so fatness is only witnessed.
    ok(&dod(&["ideals", "--poset", s(&js), "--mode", "fat", "--out", s(&out)]));
    let f = json(&out);
    assert_eq!(f["certification"], "sampled");
    assert!(f["ideals"].as_array().unwrap().iter().all(|i| i["fat"].as_str().unwrap().ends_with("(witnessed)")));
}

#[test]
fn forms_have_a_single_minimal_ideal() {
    let dir = TempDir::new().unwrap();
    let space = write(dir.path(), "space.toml", "family = \"quadform\"\np = 1\nq = 2\n");
    let js = dir.path().join("p.json");
    ok(&dod(&["poset", "--space", s(&space), "--out", s(&js)]));
    let out = dir.path().join("i.json");
    ok(&dod(&["ideals", "--poset", s(&js), "--mode", "w0fat", "--minimal-only", "--out", s(&out)]));
    let ideals = json(&out)["ideals"].as_array().unwrap().clone();
    assert_eq!(ideals.len(), 1);
    assert_eq!(ideals[0]["nodes"].as_array().unwrap().len(), 1);
}

#[test]
fn edited_poset_files_are_refused() {
    let dir = TempDir::new().unwrap();
    let space = write(dir.path(), "space.toml", LINES_R4);
    let js = dir.path().join("p.json");
    ok(&dod(&["poset", "--space", s(&space), "--out", s(&js)]));
    let mut f = json(&js);
    f["poset"]["w0_map"][0] = Value::from(1);
    std::fs::write(&js, serde_json::to_string_pretty(&f).unwrap()).unwrap();
    let out = dod(&["ideals", "--poset", s(&js), "--mode", "fat"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("stale poset hash"), "{}", stderr(&out));
}

#[test]
fn unsupported_family_exits_with_a_message() {
    let dir = TempDir::new().unwrap();
    let space = write(dir.path(), "space.toml", "family = \"quadform\"\np = 2\nq = 2\ntheta = [2]\n");
    let out = dod(&["poset", "--space", s(&space)]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("unsupported"), "{}", stderr(&out));
}

#[test]
fn rep_diagnostics() {
    let dir = TempDir::new().unwrap();
    for name in ["schottky_sl2", "sym3"] {
        let out = dir.path().join(format!("{name}.json"));
        ok(&dod(&["rep", "--rep", name, "--radius", "6", "--out", s(&out)]));
        let f = json(&out);
        assert!(f["fit"]["c"].as_f64().unwrap() > 0.0, "{name}");
        assert_eq!(f["fit"]["table"].as_array().unwrap().len(), 6);
        assert!(!f["cone"]["extremes"].as_array().unwrap().is_empty());
    }
    let degenerate = write(
        dir.path(),
        "deg.toml",
        "d = 2\nseed = 4\n[[generators]]\nlabel = \"a\"\nmatrix = [[1.0, 0.0], [0.0, 1.0]]\n[[generators]]\nlabel = \"b\"\nmatrix = [2.0, 0.0, 0.0, 0.5]\n",
    );
    let out = dir.path().join("deg.json");
    let run = dod(&["rep", "--rep", s(&degenerate), "--radius", "4", "--out", s(&out)]);
    ok(&run);
    let f = json(&out);
    assert!(f["fit"]["c"].as_f64().unwrap() <= 0.0);
    assert_eq!(f["seed"], 4);
    assert!(!f["warnings"].as_array().unwrap().is_empty());
    assert!(stderr(&run).contains("warning"));
}

#[test]
fn rep_properness_table() {
    let dir = TempDir::new().unwrap();
    let space = write(dir.path(), "space.toml", LINES_R4);
    let out = dir.path().join("r.json");
    ok(&dod(&["rep", "--rep", "sym3", "--radius", "4", "--space", s(&space), "--out", s(&out)]));
    let p = &json(&out)["properness"];
    let ball = p["ball_size"].as_u64().unwrap();
    assert!(p["rows"].as_array().unwrap().iter().all(|r| r[1].as_u64() == Some(ball)));
}

#[test]
fn budget_cap_from_environment() {
    let out = dod_env(&["rep", "--rep", "schottky_sl2", "--radius", "6"], "ANOSOV_MAX_BUDGET", "100");
    assert!(!out.status.success());
    assert!(stderr(&out).contains("budget"), "{}", stderr(&out));
}

fn footer(csv: &str, key: &str) -> f64 {
    csv.lines()
        .filter(|l| l.starts_with("# "))
        .flat_map(|l| l[2..].split(' '))
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn domain_point_clouds() {
    let dir = TempDir::new().unwrap();
    let space = write(dir.path(), "space.toml", LINES_R4_ENDS);
    let csv_path = dir.path().join("d.csv");
    ok(&dod(&["domain", "--rep", "sym3", "--space", s(&space), "--ideal", "min", "--samples", "200", "--out", s(&csv_path)]));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("index,verdict,margin,node,witness,x0"));
    let rows: Vec<&str> = csv.lines().skip(1).filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 200);
    let width = header.split(',').count();
    for r in &rows {
        let cells: Vec<&str> = r.split(',').collect();
        assert_eq!(cells.len(), width);
        let mantissa = cells[5].trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.replace('.', "").len(), 12, "{}", cells[5]);
    }
    assert!(footer(&csv, "in_fraction") > 0.0);
    assert_eq!(footer(&csv, "flag_count"), 128.0);
    assert_eq!(footer(&csv, "seed"), 0x5eed as f64);
    assert!(csv.contains("# certification="));

    ok(&dod(&["domain", "--rep", "sym3", "--space", s(&space), "--ideal", "full", "--samples", "50", "--out", s(&csv_path)]));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(footer(&csv, "in_fraction"), 0.0);
    assert!(csv.lines().filter(|l| l.contains(",out,")).all(|l| !l.split(',').nth(4).unwrap().is_empty()));
}

#[test]
fn domain_refuses_ideals_of_another_poset() {
    let dir = TempDir::new().unwrap();
    let space = write(dir.path(), "space.toml", LINES_R4_ENDS);
    let other = write(dir.path(), "other.toml", LINES_R4);
    let js = dir.path().join("p.json");
    let id = dir.path().join("i.json");
    ok(&dod(&["poset", "--space", s(&other), "--out", s(&js)]));
    ok(&dod(&["ideals", "--poset", s(&js), "--mode", "w0fat", "--minimal-only", "--out", s(&id)]));
    let out = dod(&["domain", "--rep", "sym3", "--space", s(&space), "--ideal", s(&id), "--samples", "10"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("inconsistent"), "{}", stderr(&out));

    let mut f = json(&id);
    f["space"] = json_space(LINES_R4_ENDS);
    std::fs::write(&id, serde_json::to_string(&f).unwrap()).unwrap();
    let out = dod(&["domain", "--rep", "sym3", "--space", s(&space), "--ideal", s(&id), "--samples", "10"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("stale poset hash"), "{}", stderr(&out));
}

fn json_space(toml_text: &str) -> Value {
    let spec = dod_cli::files::SpaceSpec::parse(toml_text, "t").unwrap().normalized().unwrap();
    serde_json::to_value(spec).unwrap()
}

#[test]
fn pseudo_hyperbolic_domain_excludes_orthogonal_points() {
    let dir = TempDir::new().unwrap();
    let space = write(dir.path(), "space.toml", "family = \"pseudohyp\"\np = 2\nq = 2\n");
    let csv_path = dir.path().join("d.csv");
    ok(&dod(&["domain", "--rep", "schottky_so22", "--space", s(&space), "--ideal", "min", "--samples", "100", "--flags", "32", "--out", s(&csv_path)]));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(footer(&csv, "in_fraction") > 0.9);

    // The minimal position is incidence: x lies in the orthogonal of the limit line.
    let fam = Family::pseudo_hyperbolic(2, 2).unwrap();
    let poset = Poset::build(&fam, &PosetOptions::default()).unwrap();
    let ideal = canonical_ideals(&poset).unwrap().min;
    let flags = limit_set_sample(&schottky_so22(), 32, 6, 0, 1, DEFAULT_BUDGET).unwrap();
    let mut out = 0;
    for lf in flags.flags.iter().take(8) {
        let l: DVector<f64> = lf.flags[0].frame().column(0).into();
        let mut v = DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0]);
        let u = DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0]);
        let (a, b) = (q_form(&v, &l, 2), q_form(&u, &l, 2));
        let w = if b.abs() > a.abs() { -a / b } else { 0.0 };
        v += &u * w;
        if q_form(&v, &l, 2).abs() > 1e-12 || q_form(&v, &v, 2) >= -1e-6 {
            continue;
        }
        let x = SpacePoint::NegativeLine(NegativeLine::new(&v, 2, 2).unwrap());
        let m = domain_membership(&x, &flags, &ideal, &poset).unwrap();
        assert!(matches!(m.verdict, PointVerdict::Out { .. } | PointVerdict::Boundary), "{:?}", m.verdict);
        out += matches!(m.verdict, PointVerdict::Out { .. }) as usize;
    }
    assert!(out >= 4, "only {out} orthogonal points were excluded");
}

#[test]
fn check_passes_and_names_corrupted_fixtures() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    ok(&dod(&["check", "--out", s(&a)]));
    ok(&dod(&["check", "--seed", "7", "--out", s(&b)]));
    let (ra, rb) = (json(&a), json(&b));
    let (la, lb) = (ra["results"].as_array().unwrap(), rb["results"].as_array().unwrap());
    assert_eq!(la.len(), lb.len());
    assert!(la.iter().zip(lb).all(|(x, y)| x["name"] == y["name"] && x["passed"] == y["passed"]));
    assert!(la.iter().zip(lb).any(|(x, y)| x["detail"] != y["detail"]), "seed did not change any sampled witness");

    let mut fx: Value = serde_json::from_str(dod_cli::check::EMBEDDED_FIXTURES).unwrap();
    let list = fx["fixtures"].as_array_mut().unwrap();
    let target = list.iter_mut().find(|f| f["name"] == "forms_of_signature_1_2").unwrap();
    target["nodes"] = Value::from(7);
    let broken = write(dir.path(), "fx.json", &serde_json::to_string(&fx).unwrap());
    let out = dod(&["check", "--fixtures", s(&broken)]);
    assert!(!out.status.success());
    let last = stderr(&out).lines().last().unwrap().to_string();
    assert!(last.contains("forms_of_signature_1_2"), "{last}");
    assert!(!last.contains("lines_and_hyperplanes_r4"), "{last}");
}
