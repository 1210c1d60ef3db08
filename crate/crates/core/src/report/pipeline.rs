use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{AnalysisConfig, AnalysisParams, ReportConfig};
use super::svg::{emit_bars, emit_grouped_bars, emit_heatmap, escape};
use super::tables::{self, DeveloperRow};
use crate::analysis::{
    self, build_cells, classify_windows, commit_activity, developer_year_stats, identify_extreme_writers,
    metrics_by_developer, top_developers, Activity, Bands, CellInputs, ClassifiedMessage, DeveloperYearStats,
    ExtremeWriters, Grouping, KeyKind, Polarity, SentimentCell, Window, WindowClassification,
};
use crate::ingest_mail::{
    self, prepare_message, CleaningConfig, IdentityMap, IdentityResolver, MailLoad, Quarantined,
};
use crate::ingest_vcs::{self, ChangeLog, CommitRecord};
use crate::sentiment::{score_message, Lexicon, BUILTIN_LEXICON};
use crate::stats::{self, WilcoxonResult};

/// A failed stage; displays as `<stage>: <cause>`.
#[derive(Debug, thiserror::Error)]
#[error("{stage}: {source}")]
pub struct PipelineError {
    pub stage: &'static str,
    #[source]
    pub source: Box<dyn std::error::Error + Send + Sync>,
}

impl PipelineError {
    pub fn new(stage: &'static str, source: impl Into<Box<dyn std::error::Error + Send + Sync>>) -> Self {
        Self {
            stage,
            source: source.into(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("lexicon: {0}")]
struct LexiconStageError(#[source] crate::sentiment::LexiconError);

/// The configured lexicon, or the built-in one.
pub fn load_lexicon(path: Option<&Path>) -> Result<Lexicon, PipelineError> {
    match path {
        Some(p) => Lexicon::load(p).map_err(|e| PipelineError::new("sentiment", LexiconStageError(e))),
        None => Ok(Lexicon::builtin()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub metric: String,
    pub group_a: String,
    pub group_b: String,
    pub n_a: usize,
    pub n_b: usize,
    /// Absent when either group is empty.
    pub result: Option<WilcoxonResult>,
}

impl Comparison {
    fn new(metric: &str, group_a: &str, a: &[f64], group_b: &str, b: &[f64]) -> Self {
        Self {
            metric: metric.into(),
            group_a: group_a.into(),
            group_b: group_b.into(),
            n_a: a.len(),
            n_b: b.len(),
            result: stats::wilcoxon_rank_sum(a, b).ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsSummary {
    /// Message negativity of the most active committers vs the most prolific DWNs.
    pub active_vs_dwn: Comparison,
    /// Message positivity of the most active committers vs the most prolific DWPs.
    pub active_vs_dwp: Comparison,
    /// Per-(developer, path) commit counts on the most negative vs most positive paths.
    pub negative_vs_positive_paths: Comparison,
    pub top_active: Vec<String>,
    pub top_dwn: Vec<String>,
    pub top_dwp: Vec<String>,
    pub negative_paths: Vec<String>,
    pub positive_paths: Vec<String>,
}

/// Everything computed from the corpora, before rendering.
#[derive(Debug, Clone)]
pub struct AnalysisRun {
    pub identities: IdentityMap,
    pub quarantined: Vec<Quarantined>,
    pub vcs_quarantined: Vec<ingest_vcs::LogQuarantine>,
    pub messages: Vec<ClassifiedMessage>,
    pub records: Vec<CommitRecord>,
    pub merges_skipped: usize,
    pub activity: Vec<Activity>,
    pub year_stats: Vec<DeveloperYearStats>,
    pub dwn: ExtremeWriters,
    pub dwp: ExtremeWriters,
    /// Yearly cells of both kinds; the basis of heatmaps and H/M/L tables.
    pub yearly_cells: Vec<SentimentCell>,
    /// Cells at the configured grouping.
    pub cells: Vec<SentimentCell>,
    pub windows: Vec<Window>,
    pub classifications: Vec<WindowClassification>,
    pub stats: StatsSummary,
    pub mail_counts: MailCounts,
    pub vcs_counts: VcsCounts,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct MailCounts {
    pub entries: usize,
    pub parsed: usize,
    pub quarantined: usize,
    pub duplicates: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct VcsCounts {
    pub file_lines: usize,
    pub records: usize,
    pub quarantined_lines: usize,
    pub commits: usize,
}

/// A single window spanning every observed year.
pub fn default_windows(cells: &[SentimentCell]) -> Vec<Window> {
    let years: BTreeSet<i32> = cells.iter().map(|c| c.period.year()).collect();
    match (years.first(), years.last()) {
        (Some(&a), Some(&b)) => vec![Window::new(a, b)],
        _ => Vec::new(),
    }
}

fn identity_label(identities: &IdentityMap, id: crate::ingest_mail::IdentityId) -> String {
    let ident = identities.get(id);
    if ident.canonical_email.is_empty() {
        ident.canonical_name.clone()
    } else {
        ident.canonical_email.clone()
    }
}

/// Runs identity resolution, cleaning, scoring and analysis.
pub fn analyze(
    params: &AnalysisParams,
    rules: &CleaningConfig,
    windows: &[Window],
    mail: MailLoad,
    log: ChangeLog,
    lexicon: &Lexicon,
) -> Result<AnalysisRun, PipelineError> {
    let mut warnings = Vec::new();
    let mut quarantined = mail.quarantined.clone();
    let mail_counts_base = (mail.total_entries, mail.messages.len(), mail.duplicates);

    let merges_skipped = if params.no_merges {
        log.records.iter().filter(|r| r.merge).count()
    } else {
        0
    };
    let vcs_counts = VcsCounts {
        file_lines: log.total_file_lines,
        records: log.records.len(),
        quarantined_lines: log.quarantined_lines,
        commits: log.records.iter().map(|r| r.hash.as_str()).collect::<BTreeSet<_>>().len(),
    };
    let records: Vec<CommitRecord> = log
        .records
        .into_iter()
        .filter(|r| !(params.no_merges && r.merge))
        .collect();

    let mut resolver = IdentityResolver::new();
    for msg in &mail.messages {
        if !resolver.observe(&msg.from_name, &msg.from_email, msg.date) {
            quarantined.push(Quarantined {
                message_id: msg.message_id.clone(),
                reason: "sender has neither name nor email".to_string(),
            });
        }
    }
    for rec in &records {
        resolver.observe(&rec.author_name, &rec.author_email, rec.author_date);
    }
    let identities = resolver.resolve();

    let messages: Vec<ClassifiedMessage> = mail
        .messages
        .iter()
        .filter_map(|raw| prepare_message(raw, &identities, rules))
        .map(|mut message| {
            let sentiment = score_message(&mut message, lexicon);
            ClassifiedMessage { message, sentiment }
        })
        .collect();
    if messages.is_empty() {
        warnings.push("no messages admitted from the mail inputs; message tallies are empty".to_string());
    }
    let activity = commit_activity(&records, &identities);
    if activity.is_empty() {
        warnings.push("no commit activity admitted from the vcs inputs".to_string());
    }

    let year_stats = developer_year_stats(&messages, &activity);
    let dwn = identify_extreme_writers(&year_stats, Polarity::Negative, params.dwn_threshold, params.percentile);
    let dwp = identify_extreme_writers(&year_stats, Polarity::Positive, params.dwp_threshold, params.percentile);

    let inputs = CellInputs {
        messages: &messages,
        activity: &activity,
        dwn: &dwn.members,
        dwp: &dwp.members,
        join: params.join_mode,
    };
    let mut yearly_cells = Vec::new();
    let mut cells = Vec::new();
    for kind in [KeyKind::Grain, KeyKind::Path] {
        let yearly = build_cells(&inputs, kind, Grouping::Year);
        if params.grouping == Grouping::Year {
            cells.extend(yearly.iter().cloned());
        } else {
            cells.extend(build_cells(&inputs, kind, params.grouping));
        }
        yearly_cells.extend(yearly);
    }

    let windows = if windows.is_empty() {
        default_windows(&yearly_cells)
    } else {
        windows.to_vec()
    };
    let classifications: Vec<WindowClassification> = [KeyKind::Grain, KeyKind::Path]
        .into_iter()
        .map(|kind| classify_windows(&yearly_cells, kind, &windows))
        .collect();

    let stats_summary = summarize_stats(params.top_n, &identities, &year_stats, &dwn, &dwp, &yearly_cells, &activity);

    Ok(AnalysisRun {
        mail_counts: MailCounts {
            entries: mail_counts_base.0,
            parsed: mail_counts_base.1,
            quarantined: quarantined.len(),
            duplicates: mail_counts_base.2,
        },
        vcs_counts,
        identities,
        quarantined,
        vcs_quarantined: log.quarantined,
        messages,
        records,
        merges_skipped,
        activity,
        year_stats,
        dwn,
        dwp,
        yearly_cells,
        cells,
        windows,
        classifications,
        stats: stats_summary,
        warnings,
    })
}

fn summarize_stats(
    top_n: usize,
    identities: &IdentityMap,
    year_stats: &[DeveloperYearStats],
    dwn: &ExtremeWriters,
    dwp: &ExtremeWriters,
    yearly_cells: &[SentimentCell],
    activity: &[Activity],
) -> StatsSummary {
    let metrics = metrics_by_developer(year_stats);
    let active = top_developers(&metrics, None, top_n, |m| m.n_commits);
    let top_dwn = top_developers(&metrics, Some(&dwn.members), top_n, |m| m.n_strong_neg_sentences);
    let top_dwp = top_developers(&metrics, Some(&dwp.members), top_n, |m| m.n_strong_pos_sentences);
    let ratios = |ids: &[crate::ingest_mail::IdentityId], f: fn(&analysis::DeveloperMetrics) -> f64| -> Vec<f64> {
        ids.iter().map(|id| f(&metrics[id])).collect()
    };

    let mut path_medians: Vec<(f64, &str)> = {
        let mut per_path: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for c in yearly_cells.iter().filter(|c| c.kind == KeyKind::Path) {
            per_path.entry(&c.key).or_default().push(c.diff_messages_z);
        }
        per_path
            .into_iter()
            .map(|(k, v)| (stats::median(&v).unwrap_or(0.0), k))
            .collect()
    };
    path_medians.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
    let negative_paths: Vec<String> = path_medians.iter().take(top_n).map(|(_, k)| k.to_string()).collect();
    let positive_paths: Vec<String> = path_medians
        .iter()
        .rev()
        .filter(|(_, k)| !negative_paths.iter().any(|n| n == k))
        .take(top_n)
        .map(|(_, k)| k.to_string())
        .collect();
    let mut per_dev_path: BTreeMap<(&str, crate::ingest_mail::IdentityId), u64> = BTreeMap::new();
    for act in activity {
        *per_dev_path.entry((&act.key.head_path, act.identity)).or_default() += 1;
    }
    let counts_on = |paths: &[String]| -> Vec<f64> {
        per_dev_path
            .iter()
            .filter(|((p, _), _)| paths.iter().any(|q| q == p))
            .map(|(_, &n)| n as f64)
            .collect()
    };
    let labels = |ids: &[crate::ingest_mail::IdentityId]| ids.iter().map(|&id| identity_label(identities, id)).collect();

    StatsSummary {
        active_vs_dwn: Comparison::new(
            "neg_message_ratio",
            "top_active",
            &ratios(&active, |m| m.neg_message_ratio),
            "top_dwn",
            &ratios(&top_dwn, |m| m.neg_message_ratio),
        ),
        active_vs_dwp: Comparison::new(
            "pos_message_ratio",
            "top_active",
            &ratios(&active, |m| m.pos_message_ratio),
            "top_dwp",
            &ratios(&top_dwp, |m| m.pos_message_ratio),
        ),
        negative_vs_positive_paths: Comparison::new(
            "commits_per_developer_path",
            "negative_paths",
            &counts_on(&negative_paths),
            "positive_paths",
            &counts_on(&positive_paths),
        ),
        top_active: labels(&active),
        top_dwn: labels(&top_dwn),
        top_dwp: labels(&top_dwp),
        negative_paths,
        positive_paths,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WriterSummary {
    pub threshold: Option<f64>,
    pub members: usize,
}

impl From<&ExtremeWriters> for WriterSummary {
    fn from(w: &ExtremeWriters) -> Self {
        Self {
            threshold: w.threshold.is_finite().then_some(w.threshold),
            members: w.members.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestCounts {
    pub mail_entries: usize,
    pub messages_parsed: usize,
    pub messages_quarantined: usize,
    pub messages_duplicate: usize,
    pub messages_analyzed: usize,
    pub identities: usize,
    pub commit_file_lines: usize,
    pub commits_parsed: usize,
    pub commit_lines_quarantined: usize,
    pub distinct_commits: usize,
    pub merges_skipped: usize,
    pub activity_records: usize,
    pub grains: usize,
    pub paths: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestConfig {
    pub clean: CleaningConfig,
    pub analysis: AnalysisParams,
    pub report: ReportConfig,
    pub windows: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub inputs: BTreeMap<String, Vec<InputDigest>>,
    pub config: ManifestConfig,
    pub counts: ManifestCounts,
    pub dwn: WriterSummary,
    pub dwp: WriterSummary,
    pub warnings: Vec<String>,
    pub outputs: Vec<String>,
}

/// Files written by a run plus its manifest.
#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub output_dir: PathBuf,
    /// File names relative to `output_dir`, sorted; includes `manifest.json`.
    pub files: Vec<String>,
    pub manifest: Manifest,
}

fn digest_files(paths: &[PathBuf]) -> Result<Vec<InputDigest>, std::io::Error> {
    paths
        .iter()
        .map(|p| {
            let bytes = std::fs::read(p)?;
            Ok(InputDigest {
                file: p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
                sha256: hex::encode(Sha256::digest(&bytes)),
            })
        })
        .collect()
}

fn placeholder_svg(message: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"320\" height=\"40\" font-family=\"sans-serif\" font-size=\"11\">\n<text x=\"4\" y=\"24\">{}</text>\n</svg>\n",
        escape(message)
    )
}

/// Heatmap file per key kind.
pub const HEATMAPS: [(KeyKind, &str); 2] = [(KeyKind::Grain, "heatmap_grains.svg"), (KeyKind::Path, "heatmap_paths.svg")];

pub fn heatmap_title(kind: KeyKind) -> &'static str {
    match kind {
        KeyKind::Grain => "Message sentiment differential per grain (yearly z-score)",
        KeyKind::Path => "Message sentiment differential per head path (yearly z-score)",
    }
}

/// Renders every output file of a run (except the manifest) by name.
pub fn render(run: &AnalysisRun, report: &ReportConfig) -> (BTreeMap<String, String>, Vec<String>) {
    let mut files = BTreeMap::new();
    let mut warnings = Vec::new();
    let bands: BTreeMap<KeyKind, Bands> = run
        .classifications
        .iter()
        .filter_map(|wc| wc.bands.map(|b| (wc.kind, b)))
        .collect();
    files.insert("aggregates.csv".into(), tables::aggregates_csv(&run.cells, &bands));
    files.insert("hml_tables.csv".into(), tables::hml_tables_csv(&run.classifications));
    files.insert("hml_tables.json".into(), tables::hml_tables_json(&run.classifications));
    let scored: Vec<_> = run.messages.iter().map(|m| m.message.clone()).collect();
    files.insert("sentence_scores.csv".into(), tables::sentence_scores_csv(&scored));
    files.insert("identities.csv".into(), tables::identities_csv(&run.identities));
    files.insert("developers.csv".into(), tables::developers_csv(&developer_rows(run)));

    for (kind, name) in HEATMAPS {
        let cells: Vec<SentimentCell> = run.yearly_cells.iter().filter(|c| c.kind == kind).cloned().collect();
        let svg = match emit_heatmap(&cells, |c| c.diff_messages_z, heatmap_title(kind), &report.palette, report.clamp) {
            Ok(svg) => svg,
            Err(e) => {
                warnings.push(format!("{name}: {e}; wrote a placeholder"));
                placeholder_svg("no data")
            }
        };
        files.insert(name.into(), svg);
    }

    let yearly: BTreeMap<i32, analysis::MessageTally> = analysis::aggregate_messages(&run.messages, Grouping::Year)
        .into_iter()
        .map(|(p, t)| (p.year(), t))
        .collect();
    files.insert("yearly_bars.svg".into(), emit_bars(&yearly, &report.palette));

    let mut path_commits: BTreeMap<&str, [f64; 2]> = BTreeMap::new();
    let chosen: Vec<&String> = run.stats.negative_paths.iter().chain(&run.stats.positive_paths).collect();
    for p in &chosen {
        path_commits.insert(p.as_str(), [0.0, 0.0]);
    }
    for act in &run.activity {
        if let Some(v) = path_commits.get_mut(act.key.head_path.as_str()) {
            if run.dwn.members.contains(&act.identity) {
                v[0] += 1.0;
            }
            if run.dwp.members.contains(&act.identity) {
                v[1] += 1.0;
            }
        }
    }
    let categories: Vec<(String, [f64; 2])> = chosen.iter().map(|p| (p.to_string(), path_commits[p.as_str()])).collect();
    files.insert(
        "path_commits.svg".into(),
        emit_grouped_bars(
            "Commits by DWNs and DWPs on the most negative and most positive paths",
            &categories,
            ["DWN commits", "DWP commits"],
            [&report.palette.negative, &report.palette.positive],
        ),
    );

    let mut stats_json = serde_json::to_string_pretty(&run.stats).expect("serializable");
    stats_json.push('\n');
    files.insert("stats.json".into(), stats_json);

    let mut quarantine = String::new();
    for q in &run.quarantined {
        let line = serde_json::json!({"source": "mail", "message_id": q.message_id, "reason": q.reason});
        quarantine.push_str(&line.to_string());
        quarantine.push('\n');
    }
    for q in &run.vcs_quarantined {
        let line = serde_json::json!({"source": "vcs", "hash": q.hash, "line": q.line, "reason": q.reason, "file_lines": q.file_lines});
        quarantine.push_str(&line.to_string());
        quarantine.push('\n');
    }
    files.insert("quarantine.jsonl".into(), quarantine);
    (files, warnings)
}

fn developer_rows(run: &AnalysisRun) -> Vec<DeveloperRow> {
    let metrics = metrics_by_developer(&run.year_stats);
    let mut maxima: BTreeMap<crate::ingest_mail::IdentityId, (u64, u64)> = BTreeMap::new();
    for row in &run.year_stats {
        let e = maxima.entry(row.identity).or_default();
        e.0 = e.0.max(row.n_strong_neg_sentences);
        e.1 = e.1.max(row.n_strong_pos_sentences);
    }
    run.identities
        .iter()
        .map(|ident| {
            let m = metrics.get(&ident.id);
            let (max_neg, max_pos) = maxima.get(&ident.id).copied().unwrap_or((0, 0));
            DeveloperRow {
                id: ident.id.0,
                name: ident.canonical_name.clone(),
                email: ident.canonical_email.clone(),
                n_messages: m.map_or(0, |m| m.n_messages),
                n_strong_neg_sentences: m.map_or(0, |m| m.n_strong_neg_sentences),
                n_strong_pos_sentences: m.map_or(0, |m| m.n_strong_pos_sentences),
                max_yearly_neg_sentences: max_neg,
                max_yearly_pos_sentences: max_pos,
                neg_message_ratio: m.map_or(0.0, |m| m.neg_message_ratio),
                pos_message_ratio: m.map_or(0.0, |m| m.pos_message_ratio),
                n_commits: m.map_or(0, |m| m.n_commits),
                commits_per_active_month: m.and_then(|m| m.commits_per_active_month),
                dwn: run.dwn.members.contains(&ident.id),
                dwp: run.dwp.members.contains(&ident.id),
            }
        })
        .collect()
}

/// ingest → sentiment → ingest-vcs → analysis → stats → emit.
pub fn run_pipeline(config: &AnalysisConfig) -> Result<ReportBundle, PipelineError> {
    config.validate().map_err(|e| PipelineError::new("config", e))?;
    let windows = config.windows().map_err(|e| PipelineError::new("config", e))?;

    let mail_files = ingest_mail::expand_inputs(&config.input.mail).map_err(|e| PipelineError::new("ingest-mail", e))?;
    let mail = ingest_mail::load_archives(&mail_files).map_err(|e| PipelineError::new("ingest-mail", e))?;
    let lexicon = load_lexicon(config.input.lexicon.as_deref())?;
    let log = ingest_vcs::load_change_logs(&config.input.vcs).map_err(|e| PipelineError::new("ingest-vcs", e))?;

    let mut inputs = BTreeMap::new();
    inputs.insert("mail".to_string(), digest_files(&mail_files).map_err(|e| PipelineError::new("ingest-mail", e))?);
    inputs.insert(
        "vcs".to_string(),
        digest_files(&config.input.vcs).map_err(|e| PipelineError::new("ingest-vcs", e))?,
    );
    let lexicon_digest = match &config.input.lexicon {
        Some(p) => digest_files(std::slice::from_ref(p)).map_err(|e| PipelineError::new("sentiment", e))?,
        None => vec![InputDigest {
            file: "builtin".into(),
            sha256: hex::encode(Sha256::digest(BUILTIN_LEXICON.as_bytes())),
        }],
    };
    inputs.insert("lexicon".to_string(), lexicon_digest);

    let run = analyze(&config.analysis, &config.clean, &windows, mail, log, &lexicon)?;
    let (files, render_warnings) = render(&run, &config.report);

    let out = &config.output.dir;
    std::fs::create_dir_all(out).map_err(|e| PipelineError::new("emit", e))?;
    let mut names: Vec<String> = files.keys().cloned().collect();
    names.push("manifest.json".into());
    names.sort();
    let mut warnings = run.warnings.clone();
    warnings.extend(render_warnings);
    for w in &warnings {
        log::warn!("{w}");
    }

    let key_count = |kind| run.yearly_cells.iter().filter(|c| c.kind == kind).map(|c| &c.key).collect::<BTreeSet<_>>().len();
    let manifest = Manifest {
        inputs,
        config: ManifestConfig {
            clean: config.clean.clone(),
            analysis: config.analysis.clone(),
            report: config.report.clone(),
            windows: run.windows.iter().map(|w| w.label.clone()).collect(),
        },
        counts: ManifestCounts {
            mail_entries: run.mail_counts.entries,
            messages_parsed: run.mail_counts.parsed,
            messages_quarantined: run.mail_counts.quarantined,
            messages_duplicate: run.mail_counts.duplicates,
            messages_analyzed: run.messages.len(),
            identities: run.identities.len(),
            commit_file_lines: run.vcs_counts.file_lines,
            commits_parsed: run.vcs_counts.records,
            commit_lines_quarantined: run.vcs_counts.quarantined_lines,
            distinct_commits: run.vcs_counts.commits,
            merges_skipped: run.merges_skipped,
            activity_records: run.activity.len(),
            grains: key_count(KeyKind::Grain),
            paths: key_count(KeyKind::Path),
        },
        dwn: (&run.dwn).into(),
        dwp: (&run.dwp).into(),
        warnings,
        outputs: names.clone(),
    };

    for (name, body) in &files {
        std::fs::write(out.join(name), body).map_err(|e| PipelineError::new("emit", e))?;
    }
    let mut manifest_json = serde_json::to_string_pretty(&manifest).expect("serializable");
    manifest_json.push('\n');
    std::fs::write(out.join("manifest.json"), manifest_json).map_err(|e| PipelineError::new("emit", e))?;

    Ok(ReportBundle {
        output_dir: out.clone(),
        files: names,
        manifest,
    })
}
