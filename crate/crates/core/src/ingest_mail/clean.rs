use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// Rules applied by [`clean_body`]; the `clean` config section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleaningConfig {
    /// Closing phrases removed from the tail of a message, matched case-insensitively.
    pub greetings: Vec<String>,
    /// Lines whose share of symbol characters reaches this ratio are treated as code.
    pub code_ratio: f64,
    pub strip_signatures: bool,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        Self {
            greetings: vec!["kind regards".to_string(), "best regards".to_string()],
            code_ratio: 0.30,
            strip_signatures: true,
        }
    }
}

const URL_PREFIXES: [&str; 4] = ["http://", "https://", "ftp://", "www."];

/// Lines after a closing phrase that still count as its name block.
const GREETING_TAIL: usize = 2;

fn tag_pattern() -> &'static Regex {
    static TAG: OnceLock<Regex> = OnceLock::new();
    TAG.get_or_init(|| Regex::new(r"</?[A-Za-z][A-Za-z0-9:_-]*(\s[^<>]*)?/?>").unwrap())
}

/// Removes quoted lines, URLs, signatures, closing greetings and code/markup lines.
///
/// Cleaning only deletes text, so the result is never longer than the input, and
/// `clean_body(clean_body(x)) == clean_body(x)`.
pub fn clean_body(body: &str, rules: &CleaningConfig) -> String {
    let mut lines: Vec<&str> = body.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();

    if rules.strip_signatures {
        if let Some(cut) = lines.iter().position(|l| *l == "--" || *l == "-- ") {
            lines.truncate(cut);
        }
    }

    let mut kept: Vec<String> = Vec::with_capacity(lines.len());
    for line in lines {
        if line.trim_start().starts_with('>') {
            continue;
        }
        let (text, removed_url) = strip_urls(line);
        if removed_url && text.trim().is_empty() {
            continue;
        }
        if is_code_line(&text, rules.code_ratio) {
            continue;
        }
        kept.push(text);
    }

    while let Some(cut) = trailing_greeting(&kept, &rules.greetings) {
        kept.truncate(cut);
    }
    while kept.last().is_some_and(|l| l.trim().is_empty()) {
        kept.pop();
    }
    kept.join("\n")
}

fn is_url_token(token: &str) -> bool {
    let core = token.trim_start_matches(['(', '<', '[', '"', '\'']);
    URL_PREFIXES.iter().any(|p| {
        core.len() >= p.len() && core.as_bytes()[..p.len()].eq_ignore_ascii_case(p.as_bytes())
    })
}

fn strip_urls(line: &str) -> (String, bool) {
    if !URL_PREFIXES.iter().any(|p| line.to_ascii_lowercase().contains(p)) {
        return (line.to_string(), false);
    }
    let leading_len = line.len() - line.trim_start().len();
    let mut out = String::with_capacity(line.len());
    let mut removed = false;
    let mut rest = line;
    let mut first_kept = true;
    while !rest.is_empty() {
        let ws_len = rest.len() - rest.trim_start().len();
        let (ws, after) = rest.split_at(ws_len);
        if after.is_empty() {
            if !removed {
                out.push_str(ws);
            }
            break;
        }
        let tok_len = after.find(char::is_whitespace).unwrap_or(after.len());
        let (token, tail) = after.split_at(tok_len);
        if is_url_token(token) {
            removed = true;
        } else {
            if first_kept {
                out.push_str(&line[..leading_len]);
                first_kept = false;
            } else {
                out.push_str(ws);
            }
            out.push_str(token);
        }
        rest = tail;
    }
    (out, removed)
}

fn is_code_line(line: &str, ratio: f64) -> bool {
    if tag_pattern().is_match(line) {
        return true;
    }
    let total = line.chars().count();
    if total == 0 {
        return false;
    }
    let symbols = line
        .chars()
        .filter(|c| !c.is_alphanumeric() && !c.is_whitespace())
        .count();
    symbols as f64 / total as f64 >= ratio
}

fn is_greeting(line: &str, greetings: &[String]) -> bool {
    let norm = line.trim().to_lowercase();
    greetings.iter().any(|g| {
        let g = g.trim().to_lowercase();
        !g.is_empty()
            && norm.starts_with(&g)
            && !norm[g.len()..].chars().next().is_some_and(char::is_alphanumeric)
    })
}

fn trailing_greeting(lines: &[String], greetings: &[String]) -> Option<usize> {
    let mut non_blank_after = 0;
    for (idx, line) in lines.iter().enumerate().rev() {
        if line.trim().is_empty() {
            continue;
        }
        if is_greeting(line, greetings) {
            return Some(idx);
        }
        non_blank_after += 1;
        if non_blank_after > GREETING_TAIL {
            return None;
        }
    }
    None
}

/// Decodes the five predefined XML entities in a single left-to-right pass.
pub fn decode_entities(text: &str) -> String {
    if !text.contains('&') {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = rest.find('&') {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos..];
        let decoded = [("&amp;", '&'), ("&lt;", '<'), ("&gt;", '>'), ("&quot;", '"'), ("&apos;", '\'')]
            .iter()
            .find(|(ent, _)| tail.starts_with(ent));
        match decoded {
            Some((ent, ch)) => {
                out.push(*ch);
                rest = &tail[ent.len()..];
            }
            None => {
                out.push('&');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}
