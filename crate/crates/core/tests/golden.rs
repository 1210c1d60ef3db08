//! End-to-end run of the synthetic fixture against golden outputs.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use repomood::report::run_pipeline;

use common::*;

#[test]
fn fixture_matches_golden_files() {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let bundle = run_fixture(tmp.path());
    assert_eq!(golden_mismatches(tmp.path()), Vec::<String>::new());
    assert!(bundle.manifest.warnings.is_empty(), "{:?}", bundle.manifest.warnings);
    assert!(start.elapsed().as_secs() < 10);
}

#[test]
fn manifest_counts_and_writer_sets() {
    let tmp = tempfile::tempdir().unwrap();
    let bundle = run_fixture(tmp.path());
    let c = &bundle.manifest.counts;
    assert_eq!(c.mail_entries, 40);
    assert_eq!(c.messages_parsed, 40);
    assert_eq!(c.messages_quarantined, 0);
    assert_eq!(c.commits_parsed, 200);
    assert_eq!(c.commit_lines_quarantined, 0);
    assert_eq!(c.identities, 3);
    assert_eq!((c.grains, c.paths), (2, 4));
    assert_eq!(bundle.manifest.dwn.threshold, Some(4.0));
    assert_eq!(bundle.manifest.dwp.threshold, Some(4.0));

    let rows = developer_rows(&std::fs::read_to_string(golden_dir().join("developers.csv")).unwrap());
    let got = developer_rows(&std::fs::read_to_string(tmp.path().join("developers.csv")).unwrap());
    let flagged = |rows: &[(String, u64, u64, bool, bool)], neg: bool| -> BTreeSet<String> {
        rows.iter().filter(|r| if neg { r.3 } else { r.4 }).map(|r| r.0.clone()).collect()
    };
    let dwn: BTreeSet<String> = ["alice@gentoo.org", "bob@gentoo.org"].map(String::from).into();
    let dwp: BTreeSet<String> = ["bob@gentoo.org", "carol@gentoo.org"].map(String::from).into();
    assert_eq!(flagged(&got, true), dwn);
    assert_eq!(flagged(&got, false), dwp);
    assert_eq!(expected_members(&rows, true, 4.0), dwn);
    assert_eq!(expected_members(&rows, false, 4.0), dwp);
    assert_eq!(bundle.manifest.dwn.members, 2);
    assert_eq!(bundle.manifest.dwp.members, 2);

    let names: Vec<String> = {
        let mut v: Vec<String> = std::fs::read_dir(tmp.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        v.sort();
        v
    };
    assert_eq!(names, bundle.files);
    assert_eq!(bundle.manifest.outputs, bundle.files);
}

#[test]
fn writer_sets_follow_threshold_preset() {
    let rows = developer_rows(&std::fs::read_to_string(golden_dir().join("developers.csv")).unwrap());
    let tmp = tempfile::tempdir().unwrap();
    let mut config = fixture_config(tmp.path());
    config.apply_preset("gentoo-paper").unwrap();
    // keep the fixture's years; the preset only contributes thresholds here
    config.report.windows = vec!["2005".into(), "2006".into()];
    let bundle = run_pipeline(&config).unwrap();
    assert_eq!(bundle.manifest.dwn.threshold, Some(17.0));
    assert_eq!(bundle.manifest.dwp.threshold, Some(11.0));
    let got = developer_rows(&std::fs::read_to_string(tmp.path().join("developers.csv")).unwrap());
    let flagged_neg: BTreeSet<String> = got.iter().filter(|r| r.3).map(|r| r.0.clone()).collect();
    let flagged_pos: BTreeSet<String> = got.iter().filter(|r| r.4).map(|r| r.0.clone()).collect();
    assert_eq!(flagged_neg, expected_members(&rows, true, 17.0));
    assert_eq!(flagged_pos, expected_members(&rows, false, 11.0));
    assert!(flagged_neg.is_empty());
    assert_eq!(flagged_pos, BTreeSet::from(["carol@gentoo.org".to_string()]));
}

#[test]
fn heatmap_cells_match_oracle_fills() {
    let tmp = tempfile::tempdir().unwrap();
    run_fixture(tmp.path());
    let oracle = oracle_fills();
    for (kind, file) in [("grain", "heatmap_grains.svg"), ("path", "heatmap_paths.svg")] {
        let svg = std::fs::read_to_string(tmp.path().join(file)).unwrap();
        let fills = heatmap_fills(&svg);
        let want = &oracle[kind];
        let keys: BTreeSet<_> = want.keys().map(|(k, _)| k.clone()).collect();
        let years: BTreeSet<_> = want.keys().map(|(_, y)| *y).collect();
        assert_eq!(fills.len(), keys.len() * years.len(), "{file}");
        assert_eq!(&fills, want, "{file}");
    }
}

#[test]
fn yearly_bars_match_message_tallies() {
    let tmp = tempfile::tempdir().unwrap();
    run_fixture(tmp.path());
    // message msgNN was sent in year 2005 + NN / 20
    let scores = std::fs::read_to_string(golden_dir().join("sentence_scores.csv")).unwrap();
    let mut strong: BTreeMap<String, (bool, bool)> = BTreeMap::new();
    for r in csv::Reader::from_reader(scores.as_bytes()).records() {
        let r = r.unwrap();
        let (pos, neg): (i32, i32) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        let e = strong.entry(r[0].to_string()).or_default();
        e.0 |= pos >= 3 && neg >= -2;
        e.1 |= neg <= -3 && pos <= 2;
    }
    let mut want: BTreeMap<String, usize> = BTreeMap::new();
    for (id, (p, n)) in &strong {
        let year = 2005 + id[3..5].parse::<i32>().unwrap() / 20;
        *want.entry(format!("{year} positive")).or_default() += usize::from(*p);
        *want.entry(format!("{year} negative")).or_default() += usize::from(*n);
    }

    let svg = std::fs::read_to_string(tmp.path().join("yearly_bars.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let mut got = BTreeMap::new();
    for bar in doc.descendants().filter(|n| n.attribute("class") == Some("bar")) {
        let title = bar.children().find(|c| c.has_tag_name("title")).and_then(|t| t.text()).unwrap();
        let (label, value) = title.split_once(": ").unwrap();
        got.insert(label.to_string(), value.parse::<usize>().unwrap());
    }
    assert_eq!(got, want);
    assert_eq!(doc.descendants().filter(|n| n.attribute("class") == Some("legend")).count(), 2);
}

#[test]
fn runs_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run_fixture(a.path());
    run_fixture(b.path());
    for name in &first.files {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn empty_mail_input_completes_with_warnings() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty.mbox");
    std::fs::write(&empty, "").unwrap();
    let mut config = fixture_config(&tmp.path().join("out"));
    config.input.mail = vec![empty];
    let bundle = run_pipeline(&config).unwrap();
    assert_eq!(bundle.manifest.counts.messages_parsed, 0);
    assert!(!bundle.manifest.warnings.is_empty());
    for name in ["heatmap_grains.svg", "heatmap_paths.svg", "yearly_bars.svg"] {
        let svg = std::fs::read_to_string(tmp.path().join("out").join(name)).unwrap();
        roxmltree::Document::parse(&svg).unwrap();
    }
}

#[test]
fn missing_lexicon_names_the_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let mut config = fixture_config(tmp.path());
    config.input.lexicon = Some(tmp.path().join("nope.tsv"));
    let err = run_pipeline(&config).unwrap_err();
    assert_eq!(err.stage, "sentiment");
    assert!(err.to_string().starts_with("sentiment: lexicon"), "{err}");
}
