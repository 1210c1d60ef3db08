use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use repomood::analysis::{classify_windows, KeyKind};
use repomood::ingest_mail::{self, resolve_identities};
use repomood::ingest_vcs;
use repomood::report::{self, svg, tables, AnalysisConfig};
use repomood::sentiment::{score_text, trinary_label};
use repomood::stats::wilcoxon_rank_sum;

/// Developer sentiment per software component from mailing lists and change logs.
#[derive(Parser)]
#[command(name = "repomood", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML config file (falls back to $REPOMOOD_CONFIG).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Named parameter preset, applied after the config file.
    #[arg(long, global = true, value_parser = clap::builder::PossibleValuesParser::new(report::PRESETS))]
    preset: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse mbox archives; writes messages.jsonl, identities.csv and quarantine.jsonl.
    IngestMail {
        /// mbox files or directories (default: config input.mail).
        inputs: Vec<PathBuf>,
    },
    /// Parse tagged change logs; writes commits.csv and quarantine.jsonl.
    IngestVcs {
        /// Log files (default: config input.vcs).
        inputs: Vec<PathBuf>,
        /// Drop records of merge commits.
        #[arg(long)]
        no_merges: bool,
    },
    /// Score sentences; writes sentence_scores.csv, or prints scores for --text.
    Score {
        /// mbox files or directories (default: config input.mail).
        inputs: Vec<PathBuf>,
        /// Lexicon TSV (default: config input.lexicon, else built-in).
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Score this text instead of archives.
        #[arg(long)]
        text: Option<String>,
    },
    /// Aggregate and classify; writes aggregates.csv, developers.csv and identities.csv.
    Analyze,
    /// Two-sided Wilcoxon rank-sum test on two single-column CSV files.
    Stats { a: PathBuf, b: PathBuf },
    /// Render heatmaps and H/M/L tables from an aggregates.csv.
    Report {
        /// Aggregates file (default: <out>/aggregates.csv).
        #[arg(long)]
        aggregates: Option<PathBuf>,
    },
    /// Full pipeline with manifest.
    Run,
}

fn load_config(global: &Global) -> Result<AnalysisConfig> {
    let mut config = match AnalysisConfig::locate(global.config.as_deref()) {
        Some(path) => AnalysisConfig::load(&path).with_context(|| format!("config: {}", path.display()))?,
        None => AnalysisConfig::default(),
    };
    if let Some(preset) = &global.preset {
        config.apply_preset(preset)?;
    }
    if let Some(out) = &global.out {
        config.output.dir = out.clone();
    }
    config.validate()?;
    Ok(config)
}

fn write_out(dir: &Path, name: &str, body: &str) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn inputs_or(given: Vec<PathBuf>, configured: &[PathBuf], what: &str) -> Result<Vec<PathBuf>> {
    let inputs = if given.is_empty() { configured.to_vec() } else { given };
    if inputs.is_empty() {
        bail!("no {what} inputs given on the command line or in the config");
    }
    Ok(inputs)
}

fn jsonl<T: serde::Serialize>(items: impl IntoIterator<Item = T>) -> Result<String> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(&item)?);
        out.push('\n');
    }
    Ok(out)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let mut config = load_config(&cli.global)?;
    let out = config.output.dir.clone();
    let stdout = std::io::stdout();
    let mut stdout = stdout.lock();

    match cli.command {
        Command::IngestMail { inputs } => {
            let inputs = inputs_or(inputs, &config.input.mail, "mail")?;
            let load = ingest_mail::load_archives(&inputs).context("ingest-mail")?;
            let (identities, unresolved) = resolve_identities(&load.messages);
            write_out(&out, "messages.jsonl", &jsonl(&load.messages)?)?;
            write_out(&out, "identities.csv", &tables::identities_csv(&identities))?;
            write_out(&out, "quarantine.jsonl", &jsonl(load.quarantined.iter().chain(&unresolved))?)?;
            writeln!(
                stdout,
                "entries {}  parsed {}  quarantined {}  duplicates {}  identities {}",
                load.total_entries,
                load.messages.len(),
                load.quarantined.len() + unresolved.len(),
                load.duplicates,
                identities.len()
            )?;
        }
        Command::IngestVcs { inputs, no_merges } => {
            let inputs = inputs_or(inputs, &config.input.vcs, "vcs")?;
            let mut log = ingest_vcs::load_change_logs(&inputs).context("ingest-vcs")?;
            let before = log.records.len();
            if no_merges || config.analysis.no_merges {
                log.records.retain(|r| !r.merge);
            }
            write_out(&out, "commits.csv", &tables::commits_csv(&log.records))?;
            write_out(&out, "quarantine.jsonl", &jsonl(&log.quarantined)?)?;
            writeln!(
                stdout,
                "file lines {}  records {}  quarantined lines {}  merges dropped {}",
                log.total_file_lines,
                log.records.len(),
                log.quarantined_lines,
                before - log.records.len()
            )?;
        }
        Command::Score { inputs, lexicon, text } => {
            let lexicon_path = lexicon.or(config.input.lexicon.clone());
            let lexicon = report::load_lexicon(lexicon_path.as_deref())?;
            if let Some(text) = text {
                for s in score_text(&text, &lexicon) {
                    writeln!(stdout, "{}\t{}\t{:?}\t{}", s.pos, s.neg, trinary_label(&s), s.text)?;
                }
                return Ok(());
            }
            let inputs = inputs_or(inputs, &config.input.mail, "mail")?;
            let load = ingest_mail::load_archives(&inputs).context("ingest-mail")?;
            let (identities, _) = resolve_identities(&load.messages);
            let mut scored = Vec::new();
            for raw in &load.messages {
                if let Some(mut msg) = ingest_mail::prepare_message(raw, &identities, &config.clean) {
                    repomood::sentiment::score_message(&mut msg, &lexicon);
                    scored.push(msg);
                }
            }
            write_out(&out, "sentence_scores.csv", &tables::sentence_scores_csv(&scored))?;
            let sentences: usize = scored.iter().map(|m| m.sentence_scores.len()).sum();
            writeln!(stdout, "messages {}  sentences {}", scored.len(), sentences)?;
        }
        Command::Analyze | Command::Run => {
            if matches!(cli.command, Command::Run) {
                let bundle = report::run_pipeline(&config)?;
                for w in &bundle.manifest.warnings {
                    writeln!(stdout, "warning: {w}")?;
                }
                let c = &bundle.manifest.counts;
                writeln!(
                    stdout,
                    "messages parsed {}  quarantined {}  commits parsed {}  DWN {}  DWP {}",
                    c.messages_parsed,
                    c.messages_quarantined,
                    c.commits_parsed,
                    bundle.manifest.dwn.members,
                    bundle.manifest.dwp.members
                )?;
                writeln!(stdout, "wrote {} files to {}", bundle.files.len(), bundle.output_dir.display())?;
                return Ok(());
            }
            let windows = config.windows()?;
            let mail = ingest_mail::load_archives(&config.input.mail).context("ingest-mail")?;
            let lexicon = report::load_lexicon(config.input.lexicon.as_deref())?;
            let log = ingest_vcs::load_change_logs(&config.input.vcs).context("ingest-vcs")?;
            let run = report::analyze(&config.analysis, &config.clean, &windows, mail, log, &lexicon)?;
            let (files, _) = report::render(&run, &config.report);
            for name in ["aggregates.csv", "developers.csv", "identities.csv"] {
                write_out(&out, name, &files[name])?;
            }
            for w in &run.warnings {
                writeln!(stdout, "warning: {w}")?;
            }
            writeln!(stdout, "cells {}  DWN {}  DWP {}", run.cells.len(), run.dwn.members.len(), run.dwp.members.len())?;
        }
        Command::Stats { a, b } => {
            let read = |p: &Path| -> Result<Vec<f64>> {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                tables::read_sample(&text).with_context(|| format!("parsing {}", p.display()))
            };
            let r = wilcoxon_rank_sum(&read(&a)?, &read(&b)?).context("stats")?;
            writeln!(stdout, "U = {}\np = {:e}\nmethod = {}", r.u_statistic, r.p_value, r.method)?;
        }
        Command::Report { aggregates } => {
            let path = aggregates.unwrap_or_else(|| out.join("aggregates.csv"));
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let cells = tables::read_aggregates(&text).with_context(|| format!("parsing {}", path.display()))?;
            if cells.iter().any(|c| !matches!(c.period, repomood::Period::Year(_))) {
                bail!("report needs yearly aggregates (analysis.grouping = \"year\")");
            }
            let mut windows = config.windows()?;
            if windows.is_empty() {
                windows = report::default_windows(&cells);
            }
            config.report.windows = windows.iter().map(|w| w.label.clone()).collect();
            let classes: Vec<_> = [KeyKind::Grain, KeyKind::Path]
                .into_iter()
                .map(|k| classify_windows(&cells, k, &windows))
                .collect();
            write_out(&out, "hml_tables.csv", &tables::hml_tables_csv(&classes))?;
            write_out(&out, "hml_tables.json", &tables::hml_tables_json(&classes))?;
            for (kind, name) in report::HEATMAPS {
                let subset: Vec<_> = cells.iter().filter(|c| c.kind == kind).cloned().collect();
                let title = report::heatmap_title(kind);
                match svg::emit_heatmap(&subset, |c| c.diff_messages_z, title, &config.report.palette, config.report.clamp) {
                    Ok(doc) => write_out(&out, name, &doc)?,
                    Err(e) => writeln!(stdout, "warning: {name}: {e}")?,
                }
            }
        }
    }
    Ok(())
}
