//! Change-log ingestion: per-file commit records, head paths and path grains.
//!
//! The log is a tagged text export, one block per commit:
//!
//! ```text
//! hash: 3f2a...
//! parents: 91bc...
//! author_name: Jane Dev
//! author_email: jane@gentoo.org
//! author_date: 2005-03-01T10:00:00+00:00
//! committer: Jane Dev
//! committer_date: 2005-03-01T10:00:00+00:00
//!
//! M	media-libs/id3lib/id3lib-3.8.3.ebuild
//! R100	app-misc/foo/foo.ebuild	app-misc/bar/bar.ebuild
//! ```
//!
//! `git log --name-status --format='hash: %H%nparents: %P%nauthor_name: %an%nauthor_email: %ae%nauthor_date: %aI%ncommitter: %cn%ncommitter_date: %cI%n'`
//! produces it directly. `parents` is optional and only used to detect merges.

use std::io::BufRead;
use std::path::{Path, PathBuf};

use chrono::{DateTime, FixedOffset, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum VcsError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("empty file path")]
    EmptyPath,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub hash: String,
    pub author_email: String,
    pub author_name: String,
    pub author_date: DateTime<Utc>,
    pub committer: String,
    pub committer_date: DateTime<Utc>,
    pub filename: String,
    pub old_path: Option<String>,
    pub new_path: Option<String>,
    /// More than one parent was listed.
    pub merge: bool,
}

/// Component keys derived from a file path.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PathKey {
    pub head_path: String,
    pub grain: String,
}

impl PathKey {
    pub fn from_file(filepath: &str) -> Result<Self, VcsError> {
        let head = head_path(filepath)?;
        Ok(Self {
            grain: path_grain(head).to_string(),
            head_path: head.to_string(),
        })
    }
}

/// First non-empty `/`-separated segment of the path.
pub fn head_path(filepath: &str) -> Result<&str, VcsError> {
    filepath
        .split('/')
        .find(|seg| !seg.is_empty() && *seg != ".")
        .ok_or(VcsError::EmptyPath)
}

/// Prefix of the head path before its first `-`.
pub fn path_grain(head: &str) -> &str {
    head.split('-').next().unwrap_or(head)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogQuarantine {
    pub hash: String,
    /// 1-based line number in the log where the problem was detected.
    pub line: usize,
    pub reason: String,
    /// File lines lost with this entry.
    pub file_lines: usize,
}

/// Parsed change log.
///
/// `records.len() + quarantined_lines == total_file_lines` always holds;
/// repeated `(hash, filename)` pairs count as quarantined.
#[derive(Debug, Clone, Default)]
pub struct ChangeLog {
    pub records: Vec<CommitRecord>,
    pub quarantined: Vec<LogQuarantine>,
    pub quarantined_lines: usize,
    pub total_file_lines: usize,
}

impl ChangeLog {
    pub fn extend(&mut self, other: ChangeLog) {
        let mut seen: std::collections::HashSet<(String, String)> = self
            .records
            .iter()
            .map(|r| (r.hash.clone(), r.filename.clone()))
            .collect();
        self.total_file_lines += other.total_file_lines;
        self.quarantined_lines += other.quarantined_lines;
        self.quarantined.extend(other.quarantined);
        for rec in other.records {
            if seen.insert((rec.hash.clone(), rec.filename.clone())) {
                self.records.push(rec);
            } else {
                self.quarantined_lines += 1;
                self.quarantined.push(LogQuarantine {
                    hash: rec.hash,
                    line: 0,
                    reason: format!("duplicate file {}", rec.filename),
                    file_lines: 1,
                });
            }
        }
    }
}

#[derive(Default)]
struct PendingCommit {
    start_line: usize,
    hash: String,
    parents: usize,
    author_name: String,
    author_email: String,
    author_date: Option<String>,
    committer: String,
    committer_date: Option<String>,
    files: Vec<(usize, String)>,
}

/// Accepts RFC 3339, `git --date=iso` (`2005-03-01 10:00:00 +0100`) and bare
/// `YYYY-MM-DD HH:MM:SS` (taken as UTC).
pub fn parse_timestamp(text: &str) -> Option<DateTime<Utc>> {
    let text = text.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(text) {
        return Some(dt.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%d %H:%M:%S %z", "%Y-%m-%dT%H:%M:%S%z"] {
        if let Ok(dt) = DateTime::<FixedOffset>::parse_from_str(text, fmt) {
            return Some(dt.with_timezone(&Utc));
        }
    }
    for fmt in ["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(text, fmt) {
            return Some(dt.and_utc());
        }
    }
    None
}

struct LogParser {
    log: ChangeLog,
    seen: std::collections::HashSet<(String, String)>,
    pending: Option<PendingCommit>,
}

impl LogParser {
    fn quarantine(&mut self, hash: &str, line: usize, reason: String, file_lines: usize) {
        self.log.quarantined_lines += file_lines;
        self.log.quarantined.push(LogQuarantine {
            hash: hash.to_string(),
            line,
            reason,
            file_lines,
        });
    }

    fn flush(&mut self) {
        let Some(commit) = self.pending.take() else {
            return;
        };
        let n_files = commit.files.len();
        if commit.hash.is_empty() {
            self.quarantine("", commit.start_line, "commit without hash".into(), n_files);
            return;
        }
        let author_date = commit.author_date.as_deref().and_then(parse_timestamp);
        let committer_date = match commit.committer_date.as_deref() {
            Some(text) => parse_timestamp(text),
            None => author_date,
        };
        let (Some(author_date), Some(committer_date)) = (author_date, committer_date) else {
            let reason = match commit.author_date {
                None => "commit without author_date".to_string(),
                Some(_) => "unparseable commit date".to_string(),
            };
            self.quarantine(&commit.hash, commit.start_line, reason, n_files);
            return;
        };
        for (line, file) in commit.files {
            let fields: Vec<&str> = file.split('\t').collect();
            let status = fields[0].trim();
            let letter = status.chars().next().unwrap_or(' ');
            let paths = match (letter, fields.len()) {
                ('A', 2) => Some((fields[1].to_string(), None, Some(fields[1].to_string()))),
                ('D', 2) => Some((fields[1].to_string(), Some(fields[1].to_string()), None)),
                ('M' | 'T', 2) => Some((
                    fields[1].to_string(),
                    Some(fields[1].to_string()),
                    Some(fields[1].to_string()),
                )),
                ('R' | 'C', 3) => Some((
                    fields[2].to_string(),
                    Some(fields[1].to_string()),
                    Some(fields[2].to_string()),
                )),
                _ => None,
            };
            let Some((filename, old_path, new_path)) = paths.filter(|(f, _, _)| !f.is_empty()) else {
                self.quarantine(&commit.hash, line, format!("unrecognized file line {file:?}"), 1);
                continue;
            };
            if !self.seen.insert((commit.hash.clone(), filename.clone())) {
                self.quarantine(&commit.hash, line, format!("duplicate file {filename}"), 1);
                continue;
            }
            self.log.records.push(CommitRecord {
                hash: commit.hash.clone(),
                author_email: commit.author_email.clone(),
                author_name: commit.author_name.clone(),
                author_date,
                committer: commit.committer.clone(),
                committer_date,
                filename,
                old_path,
                new_path,
                merge: commit.parents > 1,
            });
        }
    }

    fn line(&mut self, line_no: usize, line: &str) {
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            if self.pending.as_ref().is_some_and(|c| !c.files.is_empty()) {
                self.flush();
            }
            return;
        }
        if let Some((tag, value)) = header_field(line) {
            if tag == "hash" || self.pending.as_ref().is_some_and(|c| !c.files.is_empty()) {
                self.flush();
            }
            let commit = self.pending.get_or_insert_with(|| PendingCommit {
                start_line: line_no,
                ..PendingCommit::default()
            });
            let value = value.trim().to_string();
            match tag {
                "hash" => commit.hash = value,
                "parents" => commit.parents = value.split_whitespace().count(),
                "author_name" => commit.author_name = value,
                "author_email" => commit.author_email = value,
                "author_date" => commit.author_date = Some(value),
                "committer" => commit.committer = value,
                "committer_date" => commit.committer_date = Some(value),
                _ => unreachable!(),
            }
            return;
        }
        self.log.total_file_lines += 1;
        match self.pending.as_mut() {
            Some(commit) => commit.files.push((line_no, line.to_string())),
            None => self.quarantine("", line_no, "file line outside a commit".into(), 1),
        }
    }
}

const TAGS: [&str; 7] = [
    "hash",
    "parents",
    "author_name",
    "author_email",
    "author_date",
    "committer",
    "committer_date",
];

fn header_field(line: &str) -> Option<(&'static str, &str)> {
    let (tag, value) = line.split_once(':')?;
    let tag = TAGS.iter().find(|t| **t == tag)?;
    Some((tag, value))
}

/// Parses a tagged change log. Commits without hash or date are quarantined
/// together with their file lines; unknown status letters quarantine one line.
pub fn parse_change_log<R: BufRead>(reader: R) -> std::io::Result<ChangeLog> {
    let mut parser = LogParser {
        log: ChangeLog::default(),
        seen: std::collections::HashSet::new(),
        pending: None,
    };
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        parser.line(idx + 1, &line);
    }
    parser.flush();
    Ok(parser.log)
}

pub fn parse_change_log_str(text: &str) -> ChangeLog {
    parse_change_log(text.as_bytes()).expect("reading from memory cannot fail")
}

pub fn load_change_logs(inputs: &[PathBuf]) -> Result<ChangeLog, VcsError> {
    let files = crate::ingest_mail::expand_inputs(inputs).map_err(|e| match e {
        crate::ingest_mail::MailError::Io { path, source } => VcsError::Io { path, source },
    })?;
    let mut log = ChangeLog::default();
    for file in files {
        log.extend(load_change_log(&file)?);
    }
    Ok(log)
}

pub fn load_change_log(path: &Path) -> Result<ChangeLog, VcsError> {
    let io_err = |source| VcsError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::open(path).map_err(io_err)?;
    parse_change_log(std::io::BufReader::new(file)).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LOG: &str = "hash: abc123\n\
author_name: Jane Dev\n\
author_email: jane@gentoo.org\n\
author_date: 2005-03-01T10:00:00+01:00\n\
committer: Jane Dev\n\
committer_date: 2005-03-01T10:05:00+01:00\n\
\n\
M\tmedia-libs/id3lib/id3lib-3.8.3.ebuild\n\
A\tmedia-libs/id3lib/files/digest-id3lib-3.8.0_pre2\n\
D\teclass/foo.eclass\n\
\n\
hash: def456\n\
parents: 1 2\n\
author_name: Bob\n\
author_email: bob@gentoo.org\n\
author_date: 2005-03-02 11:00:00 +0000\n\
committer: Bob\n\
committer_date: 2005-03-02 11:00:00 +0000\n\
R100\ta/x\tb/x\n\
X\tweird/line\n";

    #[test]
    fn fan_out_and_rename() {
        let log = parse_change_log_str(LOG);
        assert_eq!(log.total_file_lines, 5);
        assert_eq!(log.records.len(), 4);
        assert_eq!(log.quarantined_lines, 1);
        assert!(log.records[..3].iter().all(|r| r.hash == "abc123"));
        assert_eq!(log.records[0].author_date.to_rfc3339(), "2005-03-01T09:00:00+00:00");
        assert_eq!(log.records[2].old_path.as_deref(), Some("eclass/foo.eclass"));
        assert_eq!(log.records[2].new_path, None);
        let rename = &log.records[3];
        assert_eq!(rename.old_path.as_deref(), Some("a/x"));
        assert_eq!(rename.new_path.as_deref(), Some("b/x"));
        assert_eq!(rename.filename, "b/x");
        assert!(rename.merge);
        assert!(!log.records[0].merge);
    }

    #[test]
    fn missing_hash_or_date() {
        let log = parse_change_log_str(
            "author_name: x\nauthor_date: 2005-01-01T00:00:00Z\nM\tp/a\nM\tp/b\n\n\
hash: h2\nauthor_name: y\nM\tp/c\n\nhash: h3\nauthor_date: junk\nM\tp/d\n",
        );
        assert_eq!(log.records.len(), 0);
        assert_eq!(log.total_file_lines, 4);
        assert_eq!(log.quarantined_lines, 4);
        let reasons: Vec<&str> = log.quarantined.iter().map(|q| q.reason.as_str()).collect();
        assert_eq!(reasons, ["commit without hash", "commit without author_date", "unparseable commit date"]);
    }

    #[test]
    fn duplicate_file_lines() {
        let log = parse_change_log_str("hash: h\nauthor_date: 2005-01-01T00:00:00Z\nM\tp/a\nM\tp/a\n");
        assert_eq!(log.records.len(), 1);
        assert_eq!(log.quarantined_lines, 1);
    }

    #[test]
    fn head_paths_and_grains() {
        assert_eq!(head_path("media-libs/id3lib/files/digest-id3lib-3.8.0_pre2").unwrap(), "media-libs");
        assert_eq!(head_path("eclass/foo.eclass").unwrap(), "eclass");
        assert_eq!(head_path("profiles").unwrap(), "profiles");
        assert!(head_path("").is_err());
        assert!(head_path("/").is_err());
        assert_eq!(path_grain("media-libs"), "media");
        assert_eq!(path_grain("media-sound"), "media");
        assert_eq!(path_grain("eclass"), "eclass");
        assert_eq!(path_grain("x11-libs"), "x11");
    }
}
