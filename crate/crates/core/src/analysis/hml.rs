use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{KeyKind, SentimentCell};
use crate::stats;

/// High/Medium/Low band of a z-scored differential. H is the most negative band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Hml {
    H,
    M,
    L,
}

impl Hml {
    pub const ALL: [Hml; 3] = [Hml::H, Hml::M, Hml::L];

    pub fn as_str(&self) -> &'static str {
        match self {
            Hml::H => "H",
            Hml::M => "M",
            Hml::L => "L",
        }
    }

    pub fn index(&self) -> usize {
        *self as usize
    }
}

impl fmt::Display for Hml {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Hml {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "H" => Ok(Hml::H),
            "M" => Ok(Hml::M),
            "L" => Ok(Hml::L),
            other => Err(format!("bad H/M/L label {other:?}")),
        }
    }
}

/// `H` below `q1`, `M` within `[q1, q3]`, `L` above `q3`.
pub fn hml_classify(value: f64, q1: f64, q3: f64) -> Hml {
    if value < q1 {
        Hml::H
    } else if value <= q3 {
        Hml::M
    } else {
        Hml::L
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HmlClass {
    pub dev_axis: Hml,
    pub msg_axis: Hml,
    pub negative_communication: bool,
}

pub fn joint_communication_class(dev_axis: Hml, msg_axis: Hml) -> HmlClass {
    let negative_communication = matches!(
        (dev_axis, msg_axis),
        (Hml::H, Hml::H) | (Hml::H, Hml::M) | (Hml::M, Hml::H)
    );
    HmlClass {
        dev_axis,
        msg_axis,
        negative_communication,
    }
}

/// An inclusive range of calendar years.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub label: String,
    pub start: i32,
    pub end: i32,
}

impl Window {
    pub fn new(start: i32, end: i32) -> Self {
        let label = if start == end {
            start.to_string()
        } else {
            format!("{start}-{end}")
        };
        Self { label, start, end }
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start..=self.end).contains(&year)
    }
}

impl FromStr for Window {
    type Err = String;

    /// Accepts `YYYY` or `YYYY-YYYY`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("bad year window {s:?} (expected YYYY or YYYY-YYYY)");
        let (a, b) = s.trim().split_once('-').unwrap_or((s.trim(), s.trim()));
        let start: i32 = a.trim().parse().map_err(|_| bad())?;
        let end: i32 = b.trim().parse().map_err(|_| bad())?;
        if start > end {
            return Err(bad());
        }
        Ok(Window::new(start, end))
    }
}

/// Quartile bands for both axes of one key kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bands {
    pub dev_q1: f64,
    pub dev_q3: f64,
    pub msg_q1: f64,
    pub msg_q3: f64,
}

impl Bands {
    pub fn classify(&self, diff_devs_z: f64, diff_messages_z: f64) -> HmlClass {
        joint_communication_class(
            hml_classify(diff_devs_z, self.dev_q1, self.dev_q3),
            hml_classify(diff_messages_z, self.msg_q1, self.msg_q3),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyWindowClass {
    pub key: String,
    pub window: String,
    pub dev_median: f64,
    pub msg_median: f64,
    pub class: HmlClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowClassification {
    pub kind: KeyKind,
    /// Absent when no cell of this kind falls in any window.
    pub bands: Option<Bands>,
    pub windows: Vec<Window>,
    /// Ordered by window, then key.
    pub classes: Vec<KeyWindowClass>,
}

impl WindowClassification {
    /// Counts of keys per (dev_axis, msg_axis) for one window.
    pub fn table(&self, window: &str) -> [[u64; 3]; 3] {
        let mut cells = [[0u64; 3]; 3];
        for c in self.classes.iter().filter(|c| c.window == window) {
            cells[c.class.dev_axis.index()][c.class.msg_axis.index()] += 1;
        }
        cells
    }
}

/// Classifies each key within each window.
///
/// A key's value in a window is the median of its yearly z-scores over the
/// window's years. Bands are the quartiles of those medians pooled over every
/// (key, window) pair of the kind.
pub fn classify_windows(cells: &[SentimentCell], kind: KeyKind, windows: &[Window]) -> WindowClassification {
    let mut medians: Vec<(usize, String, f64, f64)> = Vec::new();
    for (w, window) in windows.iter().enumerate() {
        let mut per_key: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
        for cell in cells.iter().filter(|c| c.kind == kind && window.contains(c.period.year())) {
            let entry = per_key.entry(&cell.key).or_default();
            entry.0.push(cell.diff_devs_z);
            entry.1.push(cell.diff_messages_z);
        }
        for (key, (dev, msg)) in per_key {
            let dev = stats::median(&dev).expect("non-empty finite series");
            let msg = stats::median(&msg).expect("non-empty finite series");
            medians.push((w, key.to_string(), dev, msg));
        }
    }
    let bands = (!medians.is_empty()).then(|| {
        let dev: Vec<f64> = medians.iter().map(|m| m.2).collect();
        let msg: Vec<f64> = medians.iter().map(|m| m.3).collect();
        let (dev_q1, _, dev_q3) = stats::quartiles(&dev).expect("non-empty finite series");
        let (msg_q1, _, msg_q3) = stats::quartiles(&msg).expect("non-empty finite series");
        Bands {
            dev_q1,
            dev_q3,
            msg_q1,
            msg_q3,
        }
    });
    let classes = match bands {
        Some(b) => medians
            .into_iter()
            .map(|(w, key, dev_median, msg_median)| KeyWindowClass {
                key,
                window: windows[w].label.clone(),
                dev_median,
                msg_median,
                class: b.classify(dev_median, msg_median),
            })
            .collect(),
        None => Vec::new(),
    };
    WindowClassification {
        kind,
        bands,
        windows: windows.to_vec(),
        classes,
    }
}
