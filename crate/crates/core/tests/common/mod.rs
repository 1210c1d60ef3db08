//! Helpers shared by the golden and acceptance targets.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use repomood::report::{run_pipeline, AnalysisConfig, ReportBundle};

/// Files compared byte-for-byte against `golden/`.
pub const GOLDEN_FILES: [&str; 8] = [
    "aggregates.csv",
    "hml_tables.csv",
    "developers.csv",
    "sentence_scores.csv",
    "heatmap_grains.svg",
    "heatmap_paths.svg",
    "yearly_bars.svg",
    "path_commits.svg",
];

/// Set to rewrite the SVG snapshots from the current output.
pub const BLESS_ENV: &str = "REPOMOOD_BLESS";

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic")
}

pub fn golden_dir() -> PathBuf {
    fixture_dir().join("golden")
}

pub fn fixture_config(out: &Path) -> AnalysisConfig {
    let mut config = AnalysisConfig::load(&fixture_dir().join("repomood.toml")).expect("fixture config");
    config.output.dir = out.to_path_buf();
    config
}

pub fn run_fixture(out: &Path) -> ReportBundle {
    run_pipeline(&fixture_config(out)).expect("fixture pipeline")
}

/// Names of golden files whose content differs from `out`.
pub fn golden_mismatches(out: &Path) -> Vec<String> {
    let bless = std::env::var_os(BLESS_ENV).is_some();
    let mut bad = Vec::new();
    for name in GOLDEN_FILES {
        let got = std::fs::read(out.join(name)).unwrap_or_default();
        let path = golden_dir().join(name);
        if bless && name.ends_with(".svg") {
            std::fs::write(&path, &got).expect("bless snapshot");
            continue;
        }
        let want = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        if got != want {
            bad.push(name.to_string());
        }
    }
    bad
}

/// `(email, max_yearly_neg, max_yearly_pos, dwn, dwp)` rows of a developers.csv.
pub fn developer_rows(text: &str) -> Vec<(String, u64, u64, bool, bool)> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().expect("header").clone();
    let col = |name: &str| headers.iter().position(|h| h == name).expect(name);
    let (email, neg, pos, dwn, dwp) = (
        col("email"),
        col("max_yearly_neg_sentences"),
        col("max_yearly_pos_sentences"),
        col("dwn"),
        col("dwp"),
    );
    rdr.records()
        .map(|r| {
            let r = r.expect("row");
            (
                r[email].to_string(),
                r[neg].parse().unwrap(),
                r[pos].parse().unwrap(),
                &r[dwn] == "true",
                &r[dwp] == "true",
            )
        })
        .collect()
}

/// Members whose yearly maximum reaches `threshold`, from golden developer rows.
pub fn expected_members(rows: &[(String, u64, u64, bool, bool)], negative: bool, threshold: f64) -> BTreeSet<String> {
    rows.iter()
        .filter(|r| (if negative { r.1 } else { r.2 }) as f64 >= threshold)
        .map(|r| r.0.clone())
        .collect()
}

/// `(key, year) -> fill` of every heatmap cell.
pub fn heatmap_fills(svg: &str) -> BTreeMap<(String, i32), String> {
    let doc = roxmltree::Document::parse(svg).expect("well-formed svg");
    let mut out = BTreeMap::new();
    for node in doc.descendants().filter(|n| n.has_tag_name("rect") && n.attribute("class") == Some("cell")) {
        let title = node
            .children()
            .find(|c| c.has_tag_name("title"))
            .and_then(|t| t.text())
            .expect("cell title");
        let (label, _) = title.split_once(':').expect("title has a value");
        let (key, year) = label.rsplit_once(' ').expect("key and year");
        out.insert((key.to_string(), year.parse().unwrap()), node.attribute("fill").unwrap().to_string());
    }
    out
}

/// `kind -> (key, year) -> fill` from the oracle's heatmap_fills.csv.
pub fn oracle_fills() -> BTreeMap<String, BTreeMap<(String, i32), String>> {
    let text = std::fs::read_to_string(golden_dir().join("heatmap_fills.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut out: BTreeMap<String, BTreeMap<(String, i32), String>> = BTreeMap::new();
    for r in rdr.records() {
        let r = r.unwrap();
        out.entry(r[0].to_string())
            .or_default()
            .insert((r[1].to_string(), r[2].parse().unwrap()), r[3].to_string());
    }
    out
}
