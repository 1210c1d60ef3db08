//! Pipeline orchestration and output rendering.

mod config;
mod pipeline;
pub mod svg;
pub mod tables;

pub use config::{
    AnalysisConfig, AnalysisParams, ConfigError, InputConfig, OutputConfig, Palette, ReportConfig, CONFIG_ENV,
    PRESETS,
};
pub use pipeline::{
    analyze, default_windows, heatmap_title, load_lexicon, render, run_pipeline, AnalysisRun, Comparison, InputDigest,
    HEATMAPS, MailCounts, Manifest, ManifestConfig, ManifestCounts, PipelineError, ReportBundle, StatsSummary, VcsCounts, WriterSummary,
};
