use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{Grouping, JoinMode, Window};
use crate::ingest_mail::CleaningConfig;

/// Environment variable consulted when no config path is given.
pub const CONFIG_ENV: &str = "REPOMOOD_CONFIG";

/// Named presets accepted by [`AnalysisConfig::apply_preset`].
pub const PRESETS: &[&str] = &["gentoo-paper"];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: Box<toml::de::Error>,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    /// mbox files or directories of mbox files.
    pub mail: Vec<PathBuf>,
    /// Tagged change-log files.
    pub vcs: Vec<PathBuf>,
    /// Lexicon TSV; the built-in lexicon when absent.
    pub lexicon: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("repomood-out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisParams {
    /// Fixed yearly strong-negative-sentence cut-off; derived from `percentile` when absent.
    pub dwn_threshold: Option<f64>,
    pub dwp_threshold: Option<f64>,
    pub percentile: f64,
    pub join_mode: JoinMode,
    /// Period of the rows in `aggregates.csv`.
    pub grouping: Grouping,
    pub no_merges: bool,
    /// Group size for the developer and path comparisons in `stats.json`.
    pub top_n: usize,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        Self {
            dwn_threshold: None,
            dwp_threshold: None,
            percentile: 0.95,
            join_mode: JoinMode::Date,
            grouping: Grouping::Year,
            no_merges: false,
            top_n: 10,
        }
    }
}

/// Diverging colour ramp, `#rrggbb` strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Palette {
    pub negative: String,
    pub neutral: String,
    pub positive: String,
}

impl Default for Palette {
    fn default() -> Self {
        Self {
            negative: "#b2182b".into(),
            neutral: "#f7f7f7".into(),
            positive: "#2166ac".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub palette: Palette,
    /// Heatmap colour scale `[low, high]`; z values beyond are clamped.
    pub clamp: [f64; 2],
    /// Year windows (`YYYY` or `YYYY-YYYY`) for the H/M/L tables; the whole
    /// observed span when empty.
    pub windows: Vec<String>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            palette: Palette::default(),
            clamp: [-3.0, 2.0],
            windows: Vec::new(),
        }
    }
}

/// Everything a pipeline run needs.
///
/// ```toml
/// [input]
/// mail = ["archives/"]
/// vcs = ["gentoo.log"]
/// lexicon = "lexicon.tsv"
///
/// [output]
/// dir = "out"
///
/// [clean]
/// greetings = ["kind regards", "best regards"]
///
/// [analysis]
/// dwn_threshold = 17
/// join_mode = "date"
///
/// [report]
/// windows = ["2001-2003", "2005-2007"]
/// ```
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub input: InputConfig,
    pub output: OutputConfig,
    pub clean: CleaningConfig,
    pub analysis: AnalysisParams,
    pub report: ReportConfig,
}

impl AnalysisConfig {
    /// Reads a TOML config; relative paths are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config: Self = toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source: Box::new(source),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.resolve_paths(base);
        config.validate()?;
        Ok(config)
    }

    /// The explicit path, else `$REPOMOOD_CONFIG` when set and non-empty.
    pub fn locate(explicit: Option<&Path>) -> Option<PathBuf> {
        explicit.map(Path::to_path_buf).or_else(|| {
            std::env::var_os(CONFIG_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
        })
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.input.mail.iter_mut().for_each(fix);
        self.input.vcs.iter_mut().for_each(fix);
        if let Some(lex) = self.input.lexicon.as_mut() {
            fix(lex);
        }
        fix(&mut self.output.dir);
    }

    pub fn apply_preset(&mut self, name: &str) -> Result<(), ConfigError> {
        match name {
            "gentoo-paper" => {
                self.analysis.dwn_threshold = Some(17.0);
                self.analysis.dwp_threshold = Some(11.0);
                self.report.windows = ["2001-2003", "2005-2007", "2011-2013", "2019-2023"]
                    .map(String::from)
                    .to_vec();
                Ok(())
            }
            other => Err(ConfigError::Invalid(format!(
                "unknown preset {other:?} (available: {})",
                PRESETS.join(", ")
            ))),
        }
    }

    pub fn windows(&self) -> Result<Vec<Window>, ConfigError> {
        self.report
            .windows
            .iter()
            .map(|w| w.parse().map_err(ConfigError::Invalid))
            .collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if !(0.0..=1.0).contains(&self.analysis.percentile) {
            return invalid(format!("analysis.percentile {} outside [0, 1]", self.analysis.percentile));
        }
        for t in [self.analysis.dwn_threshold, self.analysis.dwp_threshold].into_iter().flatten() {
            if !t.is_finite() || t < 0.0 {
                return invalid(format!("threshold {t} must be a non-negative number"));
            }
        }
        if !(0.0..=1.0).contains(&self.clean.code_ratio) {
            return invalid(format!("clean.code_ratio {} outside [0, 1]", self.clean.code_ratio));
        }
        let [lo, hi] = self.report.clamp;
        if !(lo.is_finite() && hi.is_finite() && lo < 0.0 && hi > 0.0) {
            return invalid(format!("report.clamp [{lo}, {hi}] must satisfy low < 0 < high"));
        }
        let p = &self.report.palette;
        for color in [&p.negative, &p.neutral, &p.positive] {
            if parse_hex_color(color).is_none() {
                return invalid(format!("palette colour {color:?} is not #rrggbb"));
            }
        }
        self.windows()?;
        Ok(())
    }
}

pub(crate) fn parse_hex_color(text: &str) -> Option<[u8; 3]> {
    let digits = text.strip_prefix('#')?;
    if digits.len() != 6 {
        return None;
    }
    let bytes = hex::decode(digits).ok()?;
    Some([bytes[0], bytes[1], bytes[2]])
}
