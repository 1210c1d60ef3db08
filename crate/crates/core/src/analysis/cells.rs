use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{zscore, Activity, ClassifiedMessage, Grouping, JoinMode, KeyKind, MessageTally, Period};
use crate::ingest_mail::IdentityId;

/// Joined message and commit counts for one component on one UTC day.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DayCell {
    pub key: String,
    pub day: NaiveDate,
    pub tally: MessageTally,
    pub n_commits: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PeriodCounts {
    pub tally: MessageTally,
    pub n_commits: u64,
}

/// Per-(component, period) tallies and z-scored differentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentCell {
    pub key: String,
    pub kind: KeyKind,
    #[serde(with = "period_serde")]
    pub period: Period,
    pub n_pos_messages: u64,
    pub n_neg_messages: u64,
    pub n_total_messages: u64,
    pub n_commits: u64,
    pub n_dwp_active: u64,
    pub n_dwn_active: u64,
    /// z-score of `n_pos_messages - n_neg_messages` across the period's components.
    pub diff_messages_z: f64,
    /// z-score of `n_dwp_active - n_dwn_active` across the period's components.
    pub diff_devs_z: f64,
}

mod period_serde {
    use super::Period;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &Period, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(p)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Period, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Commit counts per (component, day).
pub fn commit_days(activity: &[Activity], kind: KeyKind) -> BTreeMap<(String, NaiveDate), u64> {
    let mut out: BTreeMap<(String, NaiveDate), u64> = BTreeMap::new();
    for act in activity {
        *out.entry((kind.key_of(&act.key).to_string(), act.day)).or_default() += 1;
    }
    out
}

/// Lowercased word tokens keeping `-`, `_` and `+`, as used in head-path names.
pub fn mention_tokens(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !(c.is_alphanumeric() || matches!(c, '-' | '_' | '+')))
        .map(|t| t.trim_matches('-'))
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Message tallies per (component, day) under the given join mode.
///
/// In date mode a day's messages are counted for every component with commits
/// that day. In keyword mode a message is counted for each known head path it
/// mentions (or for the grains of those paths) on its own day.
pub fn attribute_messages(
    messages: &[ClassifiedMessage],
    commits: &BTreeMap<(String, NaiveDate), u64>,
    activity: &[Activity],
    kind: KeyKind,
    mode: JoinMode,
) -> BTreeMap<(String, NaiveDate), MessageTally> {
    let mut out: BTreeMap<(String, NaiveDate), MessageTally> = BTreeMap::new();
    match mode {
        JoinMode::Date => {
            let mut per_day: HashMap<NaiveDate, MessageTally> = HashMap::new();
            for msg in messages {
                per_day.entry(msg.day()).or_default().add_message(&msg.sentiment);
            }
            for (key, day) in commits.keys() {
                if let Some(tally) = per_day.get(day) {
                    out.insert((key.clone(), *day), *tally);
                }
            }
        }
        JoinMode::Keyword => {
            let paths: HashMap<String, String> = activity
                .iter()
                .map(|a| (a.key.head_path.to_lowercase(), kind.key_of(&a.key).to_string()))
                .collect();
            for msg in messages {
                let mut text = msg.message.subject.clone();
                text.push('\n');
                text.push_str(&msg.message.body);
                let keys: BTreeSet<&String> = mention_tokens(&text)
                    .iter()
                    .filter_map(|tok| paths.get(tok))
                    .collect();
                for key in keys {
                    out.entry((key.clone(), msg.day())).or_default().add_message(&msg.sentiment);
                }
            }
        }
    }
    out
}

/// Full outer join of message and commit tallies on (component, day).
pub fn link_by_date(
    messages: &BTreeMap<(String, NaiveDate), MessageTally>,
    commits: &BTreeMap<(String, NaiveDate), u64>,
) -> Vec<DayCell> {
    let keys: BTreeSet<&(String, NaiveDate)> = messages.keys().chain(commits.keys()).collect();
    keys.into_iter()
        .map(|k| DayCell {
            key: k.0.clone(),
            day: k.1,
            tally: messages.get(k).copied().unwrap_or_default(),
            n_commits: commits.get(k).copied().unwrap_or(0),
        })
        .collect()
}

/// Sums day cells into coarser periods.
pub fn rollup(cells: &[DayCell], grouping: Grouping) -> BTreeMap<(String, Period), PeriodCounts> {
    let mut out: BTreeMap<(String, Period), PeriodCounts> = BTreeMap::new();
    for cell in cells {
        let entry = out.entry((cell.key.clone(), grouping.period(cell.day))).or_default();
        entry.tally.add(&cell.tally);
        entry.n_commits += cell.n_commits;
    }
    out
}

pub struct CellInputs<'a> {
    pub messages: &'a [ClassifiedMessage],
    pub activity: &'a [Activity],
    pub dwn: &'a BTreeSet<IdentityId>,
    pub dwp: &'a BTreeSet<IdentityId>,
    pub join: JoinMode,
}

/// Builds the component × period grid for one key kind.
///
/// DWN/DWP counts are distinct flagged developers committing to the component
/// within the period. Both differentials are z-scored across all components of
/// the same period. Cells are ordered by key, then period.
pub fn build_cells(inputs: &CellInputs<'_>, kind: KeyKind, grouping: Grouping) -> Vec<SentimentCell> {
    let commits = commit_days(inputs.activity, kind);
    let tallies = attribute_messages(inputs.messages, &commits, inputs.activity, kind, inputs.join);
    let rolled = rollup(&link_by_date(&tallies, &commits), grouping);

    let mut devs: HashMap<(String, Period), (BTreeSet<IdentityId>, BTreeSet<IdentityId>)> = HashMap::new();
    for act in inputs.activity {
        let is_dwn = inputs.dwn.contains(&act.identity);
        let is_dwp = inputs.dwp.contains(&act.identity);
        if !is_dwn && !is_dwp {
            continue;
        }
        let entry = devs
            .entry((kind.key_of(&act.key).to_string(), grouping.period(act.day)))
            .or_default();
        if is_dwn {
            entry.0.insert(act.identity);
        }
        if is_dwp {
            entry.1.insert(act.identity);
        }
    }

    let mut cells: Vec<SentimentCell> = rolled
        .into_iter()
        .map(|((key, period), counts)| {
            let (n_dwn, n_dwp) = devs
                .get(&(key.clone(), period))
                .map(|(n, p)| (n.len() as u64, p.len() as u64))
                .unwrap_or((0, 0));
            SentimentCell {
                key,
                kind,
                period,
                n_pos_messages: counts.tally.n_pos,
                n_neg_messages: counts.tally.n_neg,
                n_total_messages: counts.tally.n_total,
                n_commits: counts.n_commits,
                n_dwp_active: n_dwp,
                n_dwn_active: n_dwn,
                diff_messages_z: 0.0,
                diff_devs_z: 0.0,
            }
        })
        .collect();

    let mut groups: BTreeMap<Period, Vec<usize>> = BTreeMap::new();
    for (idx, cell) in cells.iter().enumerate() {
        groups.entry(cell.period).or_default().push(idx);
    }
    for members in groups.values() {
        let msg_diff: Vec<f64> = members
            .iter()
            .map(|&i| cells[i].n_pos_messages as f64 - cells[i].n_neg_messages as f64)
            .collect();
        let dev_diff: Vec<f64> = members
            .iter()
            .map(|&i| cells[i].n_dwp_active as f64 - cells[i].n_dwn_active as f64)
            .collect();
        let msg_z = zscore(&msg_diff).expect("groups are non-empty");
        let dev_z = zscore(&dev_diff).expect("groups are non-empty");
        for (pos, &i) in members.iter().enumerate() {
            cells[i].diff_messages_z = msg_z[pos];
            cells[i].diff_devs_z = dev_z[pos];
        }
    }
    cells
}
