//! Mailing-list ingestion: mbox parsing, body cleaning and identity unification.

mod clean;
mod identity;
mod mbox;

use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use clean::{clean_body, decode_entities, CleaningConfig};
pub use identity::{
    normalize_email, normalize_name, resolve_identities, DeveloperIdentity, IdentityId,
    IdentityMap, IdentityResolver,
};
pub use mbox::parse_mail_archive;

use crate::sentiment::SentenceScore;

#[derive(Debug, thiserror::Error)]
pub enum MailError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// One archive entry with the metadata fields kept for analysis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawMessage {
    pub from_name: String,
    pub from_email: String,
    pub to: String,
    pub cc: String,
    pub subject: String,
    pub date: DateTime<Utc>,
    pub message_id: String,
    pub in_reply_to: Option<String>,
    pub body: String,
}

/// A message that could not be admitted to the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quarantined {
    pub message_id: String,
    pub reason: String,
}

/// Result of loading one or more archives.
///
/// `messages.len() + quarantined.len() + duplicates == total_entries` always holds.
#[derive(Debug, Clone, Default)]
pub struct MailLoad {
    pub messages: Vec<RawMessage>,
    pub quarantined: Vec<Quarantined>,
    pub duplicates: usize,
    pub total_entries: usize,
}

impl MailLoad {
    /// Appends another load, dropping messages whose id was already admitted.
    pub fn extend(&mut self, other: MailLoad) {
        let mut seen: std::collections::HashSet<String> =
            self.messages.iter().map(|m| m.message_id.clone()).collect();
        self.total_entries += other.total_entries;
        self.duplicates += other.duplicates;
        self.quarantined.extend(other.quarantined);
        for msg in other.messages {
            if seen.insert(msg.message_id.clone()) {
                self.messages.push(msg);
            } else {
                self.duplicates += 1;
            }
        }
    }
}

/// A cleaned message attributed to a unified developer identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanMessage {
    pub identity: IdentityId,
    pub date: DateTime<Utc>,
    pub message_id: String,
    pub subject: String,
    pub body: String,
    pub sentence_scores: Vec<SentenceScore>,
}

/// Expands the given inputs into a sorted list of files; directories contribute
/// their regular files (non-recursive).
pub fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, MailError> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let entries = std::fs::read_dir(input).map_err(|source| MailError::Io {
                path: input.clone(),
                source,
            })?;
            let mut inner = Vec::new();
            for entry in entries {
                let entry = entry.map_err(|source| MailError::Io {
                    path: input.clone(),
                    source,
                })?;
                let path = entry.path();
                if path.is_file() {
                    inner.push(path);
                }
            }
            inner.sort();
            files.extend(inner);
        } else {
            files.push(input.clone());
        }
    }
    Ok(files)
}

/// Reads and parses every archive file, merging them in input order.
pub fn load_archives(inputs: &[PathBuf]) -> Result<MailLoad, MailError> {
    let mut load = MailLoad::default();
    for file in expand_inputs(inputs)? {
        load.extend(load_archive(&file)?);
    }
    Ok(load)
}

pub fn load_archive(path: &Path) -> Result<MailLoad, MailError> {
    let bytes = std::fs::read(path).map_err(|source| MailError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_mail_archive(&bytes))
}

/// Decodes entities, cleans the body and attaches the sender identity.
///
/// Returns `None` when the sender is not in the identity map (it was quarantined
/// during resolution).
pub fn prepare_message(
    raw: &RawMessage,
    identities: &IdentityMap,
    rules: &CleaningConfig,
) -> Option<CleanMessage> {
    let identity = identities.lookup(&raw.from_name, &raw.from_email)?;
    let body = clean_body(&decode_entities(&raw.body), rules);
    Some(CleanMessage {
        identity,
        date: raw.date,
        message_id: raw.message_id.clone(),
        subject: raw.subject.clone(),
        body,
        sentence_scores: Vec::new(),
    })
}
