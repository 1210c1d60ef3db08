//! Developer sentiment per software component.
//!
//! The crate turns two local corpora into component-level sentiment reports:
//!
//! * mailing-list archives (mbox) are parsed, cleaned, split into sentences and
//!   scored with a dual-polarity lexicon scorer ([`ingest_mail`], [`sentiment`]);
//! * change logs are parsed into per-file commit records keyed by head path and
//!   path grain ([`ingest_vcs`]).
//!
//! [`analysis`] joins both sides by calendar day, identifies developers writing
//! strongly negative/positive sentences, z-scores the per-component differentials
//! and classifies components into High/Medium/Low bands. [`stats`] holds the
//! nonparametric tests and [`report`] drives the whole pipeline and renders the
//! CSV/JSON/SVG outputs.

pub mod analysis;
pub mod ingest_mail;
pub mod ingest_vcs;
pub mod report;
pub mod sentiment;
pub mod stats;

pub use analysis::{Grouping, Hml, HmlClass, JoinMode, KeyKind, Period, SentimentCell};
pub use ingest_mail::{CleanMessage, CleaningConfig, DeveloperIdentity, IdentityId, IdentityMap, RawMessage};
pub use ingest_vcs::{CommitRecord, PathKey};
pub use report::{AnalysisConfig, PipelineError, ReportBundle};
pub use sentiment::{Lexicon, MessageSentiment, SentenceScore, Trinary};
pub use stats::{WilcoxonMethod, WilcoxonResult};
