//! Aggregation over time and components, DWN/DWP identification,
//! z-scored differentials and H/M/L classification.
//!
//! DWN/DWP: developers writing negative/positive sentences, i.e. developers whose
//! yearly count of strong sentences of that polarity reaches a threshold.

mod cells;
mod hml;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

pub use cells::{
    attribute_messages, build_cells, commit_days, link_by_date, mention_tokens, rollup, CellInputs,
    DayCell, PeriodCounts, SentimentCell,
};
pub use hml::{
    classify_windows, hml_classify, joint_communication_class, Bands, Hml, HmlClass, KeyWindowClass,
    Window, WindowClassification,
};

use crate::ingest_mail::{CleanMessage, IdentityId, IdentityMap};
use crate::ingest_vcs::{CommitRecord, PathKey};
use crate::sentiment::MessageSentiment;
use crate::stats;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("z-score of an empty series")]
    EmptySeries,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grouping {
    #[default]
    Year,
    Month,
    Day,
}

impl Grouping {
    pub fn period(self, day: NaiveDate) -> Period {
        match self {
            Grouping::Year => Period::Year(day.year()),
            Grouping::Month => Period::Month(day.year(), day.month()),
            Grouping::Day => Period::Day(day),
        }
    }
}

impl FromStr for Grouping {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "year" => Ok(Grouping::Year),
            "month" => Ok(Grouping::Month),
            "day" => Ok(Grouping::Day),
            other => Err(format!("unknown grouping {other:?} (year|month|day)")),
        }
    }
}

/// Calendar bucket; ordering is chronological within one granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Period {
    Year(i32),
    Month(i32, u32),
    Day(NaiveDate),
}

impl Period {
    pub fn year(&self) -> i32 {
        match *self {
            Period::Year(y) | Period::Month(y, _) => y,
            Period::Day(d) => d.year(),
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Period::Year(y) => write!(f, "{y}"),
            Period::Month(y, m) => write!(f, "{y}-{m:02}"),
            Period::Day(d) => write!(f, "{}", d.format("%Y-%m-%d")),
        }
    }
}

impl FromStr for Period {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("bad period {s:?}");
        let parts: Vec<&str> = s.split('-').collect();
        match parts.as_slice() {
            [y] => Ok(Period::Year(y.parse().map_err(|_| bad())?)),
            [y, m] => {
                let m: u32 = m.parse().map_err(|_| bad())?;
                if !(1..=12).contains(&m) {
                    return Err(bad());
                }
                Ok(Period::Month(y.parse().map_err(|_| bad())?, m))
            }
            [_, _, _] => NaiveDate::parse_from_str(s, "%Y-%m-%d").map(Period::Day).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeyKind {
    Grain,
    Path,
}

impl KeyKind {
    pub fn key_of<'a>(&self, key: &'a PathKey) -> &'a str {
        match self {
            KeyKind::Grain => &key.grain,
            KeyKind::Path => &key.head_path,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            KeyKind::Grain => "grain",
            KeyKind::Path => "path",
        }
    }
}

impl fmt::Display for KeyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How messages are attached to components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JoinMode {
    /// A message counts for every component with commits on the same UTC day.
    #[default]
    Date,
    /// A message counts for the head paths it names in subject or body.
    Keyword,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Negative,
    Positive,
}

/// A cleaned, scored message together with its classification.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedMessage {
    pub message: CleanMessage,
    pub sentiment: MessageSentiment,
}

impl ClassifiedMessage {
    pub fn day(&self) -> NaiveDate {
        self.message.date.date_naive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MessageTally {
    pub n_pos: u64,
    pub n_neg: u64,
    pub n_total: u64,
}

impl MessageTally {
    pub fn add_message(&mut self, sentiment: &MessageSentiment) {
        self.n_total += 1;
        self.n_pos += u64::from(sentiment.has_strong_positive);
        self.n_neg += u64::from(sentiment.has_strong_negative);
    }

    pub fn add(&mut self, other: &MessageTally) {
        self.n_pos += other.n_pos;
        self.n_neg += other.n_neg;
        self.n_total += other.n_total;
    }
}

/// Positive/negative/total message counts per period.
pub fn aggregate_messages(messages: &[ClassifiedMessage], grouping: Grouping) -> BTreeMap<Period, MessageTally> {
    let mut out: BTreeMap<Period, MessageTally> = BTreeMap::new();
    for msg in messages {
        out.entry(grouping.period(msg.day())).or_default().add_message(&msg.sentiment);
    }
    out
}

/// One commit record attributed to an identity and a component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Activity {
    pub identity: IdentityId,
    pub day: NaiveDate,
    pub key: PathKey,
}

/// Maps commit records onto identities and path keys; records whose author is
/// unknown to the map or whose path is empty are skipped.
pub fn commit_activity(records: &[CommitRecord], identities: &IdentityMap) -> Vec<Activity> {
    records
        .iter()
        .filter_map(|rec| {
            let identity = identities.lookup(&rec.author_name, &rec.author_email)?;
            let key = PathKey::from_file(&rec.filename).ok()?;
            Some(Activity {
                identity,
                day: rec.author_date.date_naive(),
                key,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeveloperYearStats {
    pub identity: IdentityId,
    pub year: i32,
    pub n_strong_neg_sentences: u64,
    pub n_strong_pos_sentences: u64,
    pub n_messages: u64,
    pub n_neg_messages: u64,
    pub n_pos_messages: u64,
    pub n_commits: u64,
    /// Distinct months of the year with at least one commit.
    pub active_months: u32,
}

impl DeveloperYearStats {
    fn empty(identity: IdentityId, year: i32) -> Self {
        Self {
            identity,
            year,
            n_strong_neg_sentences: 0,
            n_strong_pos_sentences: 0,
            n_messages: 0,
            n_neg_messages: 0,
            n_pos_messages: 0,
            n_commits: 0,
            active_months: 0,
        }
    }

    fn strong_count(&self, polarity: Polarity) -> u64 {
        match polarity {
            Polarity::Negative => self.n_strong_neg_sentences,
            Polarity::Positive => self.n_strong_pos_sentences,
        }
    }
}

/// Strong-sentence and message counts per (identity, calendar year).
pub fn sentence_counts_per_developer_year(messages: &[ClassifiedMessage]) -> Vec<DeveloperYearStats> {
    developer_year_stats(messages, &[])
}

/// Message and commit counts per (identity, calendar year), sorted by identity then year.
pub fn developer_year_stats(messages: &[ClassifiedMessage], activity: &[Activity]) -> Vec<DeveloperYearStats> {
    let mut table: BTreeMap<(IdentityId, i32), DeveloperYearStats> = BTreeMap::new();
    for msg in messages {
        let year = msg.day().year();
        let row = table
            .entry((msg.message.identity, year))
            .or_insert_with(|| DeveloperYearStats::empty(msg.message.identity, year));
        row.n_messages += 1;
        row.n_neg_messages += u64::from(msg.sentiment.has_strong_negative);
        row.n_pos_messages += u64::from(msg.sentiment.has_strong_positive);
        for s in &msg.message.sentence_scores {
            row.n_strong_neg_sentences += u64::from(s.is_strong_negative());
            row.n_strong_pos_sentences += u64::from(s.is_strong_positive());
        }
    }
    let mut months: BTreeSet<(IdentityId, i32, u32)> = BTreeSet::new();
    for act in activity {
        let year = act.day.year();
        table
            .entry((act.identity, year))
            .or_insert_with(|| DeveloperYearStats::empty(act.identity, year))
            .n_commits += 1;
        months.insert((act.identity, year, act.day.month()));
    }
    for (identity, year, _) in months {
        if let Some(row) = table.get_mut(&(identity, year)) {
            row.active_months += 1;
        }
    }
    table.into_values().collect()
}

/// Developers reaching a yearly strong-sentence threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeWriters {
    pub polarity: Polarity,
    pub threshold: f64,
    pub members: BTreeSet<IdentityId>,
}

/// A developer qualifies when some year's strong-sentence count of the given
/// polarity reaches `threshold`. Without an explicit threshold, the cut-off is
/// the `percentile` quantile of the per-developer yearly maxima over all
/// developers who wrote at least one message.
pub fn identify_extreme_writers(
    stats: &[DeveloperYearStats],
    polarity: Polarity,
    threshold: Option<f64>,
    percentile: f64,
) -> ExtremeWriters {
    let mut maxima: BTreeMap<IdentityId, u64> = BTreeMap::new();
    for row in stats.iter().filter(|r| r.n_messages > 0) {
        let entry = maxima.entry(row.identity).or_default();
        *entry = (*entry).max(row.strong_count(polarity));
    }
    if maxima.is_empty() {
        return ExtremeWriters {
            polarity,
            threshold: threshold.unwrap_or(f64::NAN),
            members: BTreeSet::new(),
        };
    }
    let threshold = threshold.unwrap_or_else(|| {
        let values: Vec<f64> = maxima.values().map(|&v| v as f64).collect();
        stats::quantile(&values, percentile).expect("non-empty finite series")
    });
    let members = maxima
        .into_iter()
        .filter(|&(_, max)| max as f64 >= threshold)
        .map(|(id, _)| id)
        .collect();
    ExtremeWriters {
        polarity,
        threshold,
        members,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeveloperMetrics {
    /// Absent when the developer never committed.
    pub commits_per_active_month: Option<f64>,
    pub neg_message_ratio: f64,
    pub pos_message_ratio: f64,
    pub n_commits: u64,
    pub n_messages: u64,
    pub n_strong_neg_sentences: u64,
    pub n_strong_pos_sentences: u64,
}

/// Relative activity of one developer from all of their yearly rows.
pub fn relative_developer_metrics(stats: &[DeveloperYearStats]) -> DeveloperMetrics {
    let sum = |f: fn(&DeveloperYearStats) -> u64| stats.iter().map(f).sum::<u64>();
    let commits = sum(|r| r.n_commits);
    let months = sum(|r| u64::from(r.active_months));
    let messages = sum(|r| r.n_messages);
    let ratio = |count: u64| if messages == 0 { 0.0 } else { count as f64 / messages as f64 };
    DeveloperMetrics {
        commits_per_active_month: (months > 0).then(|| commits as f64 / months as f64),
        neg_message_ratio: ratio(sum(|r| r.n_neg_messages)),
        pos_message_ratio: ratio(sum(|r| r.n_pos_messages)),
        n_commits: commits,
        n_messages: messages,
        n_strong_neg_sentences: sum(|r| r.n_strong_neg_sentences),
        n_strong_pos_sentences: sum(|r| r.n_strong_pos_sentences),
    }
}

pub fn metrics_by_developer(stats: &[DeveloperYearStats]) -> BTreeMap<IdentityId, DeveloperMetrics> {
    let mut grouped: BTreeMap<IdentityId, Vec<DeveloperYearStats>> = BTreeMap::new();
    for row in stats {
        grouped.entry(row.identity).or_default().push(row.clone());
    }
    grouped
        .into_iter()
        .map(|(id, rows)| (id, relative_developer_metrics(&rows)))
        .collect()
}

/// The `n` developers with the largest `score`; ties broken by identity id.
pub fn top_developers<F>(metrics: &BTreeMap<IdentityId, DeveloperMetrics>, candidates: Option<&BTreeSet<IdentityId>>, n: usize, score: F) -> Vec<IdentityId>
where
    F: Fn(&DeveloperMetrics) -> u64,
{
    let mut ranked: Vec<(u64, IdentityId)> = metrics
        .iter()
        .filter(|(id, _)| candidates.is_none_or(|c| c.contains(id)))
        .map(|(id, m)| (score(m), *id))
        .filter(|(s, _)| *s > 0)
        .collect();
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    ranked.into_iter().take(n).map(|(_, id)| id).collect()
}

/// Standard score with the sample (n−1) standard deviation; constant or
/// single-element series map to zeros.
pub fn zscore(series: &[f64]) -> Result<Vec<f64>, AnalysisError> {
    if series.is_empty() {
        return Err(AnalysisError::EmptySeries);
    }
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    if series.len() < 2 {
        return Ok(vec![0.0; series.len()]);
    }
    let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    if sd == 0.0 || !sd.is_finite() {
        return Ok(vec![0.0; series.len()]);
    }
    Ok(series.iter().map(|x| (x - mean) / sd).collect())
}
