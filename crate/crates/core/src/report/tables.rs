//! CSV/JSON renderings of the analysis results.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::analysis::{Bands, Hml, KeyKind, Period, SentimentCell, WindowClassification};
use crate::ingest_mail::{CleanMessage, IdentityMap};
use crate::ingest_vcs::{CommitRecord, PathKey};

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row {row}: {reason}")]
    Invalid { row: usize, reason: String },
}

pub const AGGREGATE_HEADER: [&str; 13] = [
    "key",
    "kind",
    "period",
    "n_pos_messages",
    "n_neg_messages",
    "n_commits",
    "n_dwp",
    "n_dwn",
    "diff_messages_z",
    "diff_devs_z",
    "dev_axis",
    "msg_axis",
    "negative_communication",
];

/// Fixed six-decimal rendering with negative zero folded to zero.
pub fn fmt_real(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

fn finish(writer: csv::Writer<Vec<u8>>) -> String {
    let bytes = writer.into_inner().expect("writing to memory");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

/// `aggregates.csv`; each cell's axes are classified against its kind's bands.
pub fn aggregates_csv(cells: &[SentimentCell], bands: &BTreeMap<KeyKind, Bands>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(AGGREGATE_HEADER).expect("writing to memory");
    for c in cells {
        let class = bands.get(&c.kind).map(|b| b.classify(c.diff_devs_z, c.diff_messages_z));
        let (dev, msg, neg) = match class {
            Some(k) => (k.dev_axis.to_string(), k.msg_axis.to_string(), k.negative_communication.to_string()),
            None => (String::new(), String::new(), String::new()),
        };
        w.write_record([
            c.key.clone(),
            c.kind.to_string(),
            c.period.to_string(),
            c.n_pos_messages.to_string(),
            c.n_neg_messages.to_string(),
            c.n_commits.to_string(),
            c.n_dwp_active.to_string(),
            c.n_dwn_active.to_string(),
            fmt_real(c.diff_messages_z),
            fmt_real(c.diff_devs_z),
            dev,
            msg,
            neg,
        ])
        .expect("writing to memory");
    }
    finish(w)
}

/// Reads cells back from `aggregates.csv`. The total message count is not
/// part of the file and comes back as 0.
pub fn read_aggregates(text: &str) -> Result<Vec<SentimentCell>, TableError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let cols: Vec<usize> = AGGREGATE_HEADER[..10]
        .iter()
        .map(|name| {
            col(name).ok_or_else(|| TableError::Invalid {
                row: 1,
                reason: format!("missing column {name}"),
            })
        })
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for (idx, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = idx + 2;
        let get = |i: usize| rec.get(cols[i]).unwrap_or("");
        let bad = |what: &str| TableError::Invalid {
            row,
            reason: format!("bad {what} {:?}", get(AGGREGATE_HEADER.iter().position(|h| *h == what).unwrap())),
        };
        let count = |i: usize| get(i).parse::<u64>().map_err(|_| bad(AGGREGATE_HEADER[i]));
        let real = |i: usize| {
            get(i)
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| bad(AGGREGATE_HEADER[i]))
        };
        let kind = match get(1) {
            "grain" => KeyKind::Grain,
            "path" => KeyKind::Path,
            _ => return Err(bad("kind")),
        };
        out.push(SentimentCell {
            key: get(0).to_string(),
            kind,
            period: get(2).parse::<Period>().map_err(|_| bad("period"))?,
            n_pos_messages: count(3)?,
            n_neg_messages: count(4)?,
            n_total_messages: 0,
            n_commits: count(5)?,
            n_dwp_active: count(6)?,
            n_dwn_active: count(7)?,
            diff_messages_z: real(8)?,
            diff_devs_z: real(9)?,
        });
    }
    Ok(out)
}

/// One 3×3 (dev axis × message axis) table per (kind, window) with a total row.
pub fn hml_tables_csv(classifications: &[WindowClassification]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["kind", "period", "dev_axis", "msg_H", "msg_M", "msg_L", "total"])
        .expect("writing to memory");
    for wc in classifications {
        for window in &wc.windows {
            let table = wc.table(&window.label);
            for dev in Hml::ALL {
                let row = table[dev.index()];
                let mut rec = vec![wc.kind.to_string(), window.label.clone(), dev.to_string()];
                rec.extend(row.iter().map(u64::to_string));
                rec.push(row.iter().sum::<u64>().to_string());
                w.write_record(rec).expect("writing to memory");
            }
            let mut rec = vec![wc.kind.to_string(), window.label.clone(), "total".to_string()];
            let cols: Vec<u64> = (0..3).map(|m| table.iter().map(|r| r[m]).sum()).collect();
            rec.extend(cols.iter().map(u64::to_string));
            rec.push(cols.iter().sum::<u64>().to_string());
            w.write_record(rec).expect("writing to memory");
        }
    }
    finish(w)
}

#[derive(Serialize)]
struct JsonTable<'a> {
    kind: KeyKind,
    period: &'a str,
    /// `cells[dev][msg]` in H, M, L order.
    cells: [[u64; 3]; 3],
    total: u64,
}

#[derive(Serialize)]
struct JsonBands {
    kind: KeyKind,
    bands: Option<Bands>,
}

#[derive(Serialize)]
struct JsonTables<'a> {
    axes: [&'static str; 3],
    bands: Vec<JsonBands>,
    tables: Vec<JsonTable<'a>>,
}

pub fn hml_tables_json(classifications: &[WindowClassification]) -> String {
    let mut doc = JsonTables {
        axes: ["H", "M", "L"],
        bands: Vec::new(),
        tables: Vec::new(),
    };
    for wc in classifications {
        doc.bands.push(JsonBands {
            kind: wc.kind,
            bands: wc.bands,
        });
        for window in &wc.windows {
            let cells = wc.table(&window.label);
            doc.tables.push(JsonTable {
                kind: wc.kind,
                period: &window.label,
                cells,
                total: cells.iter().flatten().sum(),
            });
        }
    }
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

/// One row per scored sentence.
pub fn sentence_scores_csv(messages: &[CleanMessage]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["message_id", "sentence_index", "pos", "neg"]).expect("writing to memory");
    for m in messages {
        for (i, s) in m.sentence_scores.iter().enumerate() {
            w.write_record([m.message_id.clone(), i.to_string(), s.pos.to_string(), s.neg.to_string()])
                .expect("writing to memory");
        }
    }
    finish(w)
}

/// Per-file commit records with their derived keys.
pub fn commits_csv(records: &[CommitRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["hash", "author_email", "author_date", "filename", "head_path", "grain"])
        .expect("writing to memory");
    for r in records {
        let (head, grain) = match PathKey::from_file(&r.filename) {
            Ok(k) => (k.head_path, k.grain),
            Err(_) => (String::new(), String::new()),
        };
        w.write_record([
            r.hash.clone(),
            r.author_email.clone(),
            r.author_date.to_rfc3339(),
            r.filename.clone(),
            head,
            grain,
        ])
        .expect("writing to memory");
    }
    finish(w)
}

/// Identity table: `id,name,email,aliases` with aliases as `name <email>` joined by `;`.
pub fn identities_csv(identities: &IdentityMap) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "name", "email", "first_seen", "aliases"]).expect("writing to memory");
    for ident in identities.iter() {
        let aliases: Vec<String> = ident.aliases.iter().map(|(n, e)| format!("{n} <{e}>")).collect();
        w.write_record([
            ident.id.to_string(),
            ident.canonical_name.clone(),
            ident.canonical_email.clone(),
            ident.first_seen.to_rfc3339(),
            aliases.join(";"),
        ])
        .expect("writing to memory");
    }
    finish(w)
}

/// Rows for `developers.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeveloperRow {
    pub id: u32,
    pub name: String,
    pub email: String,
    pub n_messages: u64,
    pub n_strong_neg_sentences: u64,
    pub n_strong_pos_sentences: u64,
    pub max_yearly_neg_sentences: u64,
    pub max_yearly_pos_sentences: u64,
    pub neg_message_ratio: f64,
    pub pos_message_ratio: f64,
    pub n_commits: u64,
    pub commits_per_active_month: Option<f64>,
    pub dwn: bool,
    pub dwp: bool,
}

pub fn developers_csv(rows: &[DeveloperRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "id",
        "name",
        "email",
        "n_messages",
        "n_strong_neg_sentences",
        "n_strong_pos_sentences",
        "max_yearly_neg_sentences",
        "max_yearly_pos_sentences",
        "neg_message_ratio",
        "pos_message_ratio",
        "n_commits",
        "commits_per_active_month",
        "dwn",
        "dwp",
    ])
    .expect("writing to memory");
    for r in rows {
        w.write_record([
            r.id.to_string(),
            r.name.clone(),
            r.email.clone(),
            r.n_messages.to_string(),
            r.n_strong_neg_sentences.to_string(),
            r.n_strong_pos_sentences.to_string(),
            r.max_yearly_neg_sentences.to_string(),
            r.max_yearly_pos_sentences.to_string(),
            fmt_real(r.neg_message_ratio),
            fmt_real(r.pos_message_ratio),
            r.n_commits.to_string(),
            r.commits_per_active_month.map(fmt_real).unwrap_or_default(),
            r.dwn.to_string(),
            r.dwp.to_string(),
        ])
        .expect("writing to memory");
    }
    finish(w)
}

/// Reads a single-column numeric CSV, skipping a non-numeric header line.
pub fn read_sample(text: &str) -> Result<Vec<f64>, TableError> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (idx, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = rec.get(0).unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(x) if x.is_finite() => out.push(x),
            _ if idx == 0 => continue,
            _ => {
                return Err(TableError::Invalid {
                    row: idx + 1,
                    reason: format!("not a finite number: {field:?}"),
                })
            }
        }
    }
    Ok(out)
}
