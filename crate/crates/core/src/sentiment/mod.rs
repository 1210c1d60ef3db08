//! Sentence segmentation, dual-polarity scoring and message classification.

mod lexicon;
mod score;

use serde::{Deserialize, Serialize};

pub use lexicon::{tokenize, Lexicon, LexiconError, BUILTIN_LEXICON};
pub use score::{score_sentence, BOOSTER_DISTANCE, NEGATION_WINDOW};

use crate::ingest_mail::CleanMessage;

/// Positive strength in `[1, 5]` and negative strength in `[-5, -1]` for one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceScore {
    pub text: String,
    pub pos: i8,
    pub neg: i8,
}

impl SentenceScore {
    pub fn new(text: impl Into<String>, pos: i8, neg: i8) -> Self {
        Self {
            text: text.into(),
            pos,
            neg,
        }
    }

    /// `neg <= -3` while `pos <= 2`.
    pub fn is_strong_negative(&self) -> bool {
        self.neg <= -3 && self.pos <= 2
    }

    /// `pos >= 3` while `neg >= -2`.
    pub fn is_strong_positive(&self) -> bool {
        self.pos >= 3 && self.neg >= -2
    }
}

/// Message-level view of its sentence scores.
///
/// A sentence that is strong on both sides (e.g. `(4, -4)`) counts towards
/// neither flag: each polarity requires the other side to stay mild.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MessageSentiment {
    pub has_strong_negative: bool,
    pub has_strong_positive: bool,
    pub avg_pos: Option<f64>,
    pub avg_neg_magnitude: Option<f64>,
}

/// Splits text at `.`, `?` and `!` runs that are followed by whitespace or the end.
pub fn segment_sentences(body: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = body.char_indices().peekable();
    while let Some((_, c)) = chars.next() {
        if !matches!(c, '.' | '?' | '!') {
            continue;
        }
        let mut end = body.len();
        while let Some(&(idx, next)) = chars.peek() {
            if matches!(next, '.' | '?' | '!') {
                chars.next();
            } else {
                end = idx;
                break;
            }
        }
        let at_boundary = end == body.len() || body[end..].starts_with(char::is_whitespace);
        if at_boundary {
            push_trimmed(&mut out, &body[start..end]);
            start = end;
        }
    }
    push_trimmed(&mut out, &body[start..]);
    out
}

fn push_trimmed(out: &mut Vec<String>, piece: &str) {
    let piece = piece.trim();
    if !piece.is_empty() {
        out.push(piece.to_string());
    }
}

pub fn classify_message(scores: &[SentenceScore]) -> MessageSentiment {
    if scores.is_empty() {
        return MessageSentiment {
            has_strong_negative: false,
            has_strong_positive: false,
            avg_pos: None,
            avg_neg_magnitude: None,
        };
    }
    let n = scores.len() as f64;
    let pos_sum: i64 = scores.iter().map(|s| i64::from(s.pos)).sum();
    let neg_sum: i64 = scores.iter().map(|s| i64::from(s.neg).abs()).sum();
    MessageSentiment {
        has_strong_negative: scores.iter().any(SentenceScore::is_strong_negative),
        has_strong_positive: scores.iter().any(SentenceScore::is_strong_positive),
        avg_pos: Some(pos_sum as f64 / n),
        avg_neg_magnitude: Some(neg_sum as f64 / n),
    }
}

/// Three-way label for annotation agreement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trinary {
    Positive,
    Negative,
    Neutral,
}

impl std::str::FromStr for Trinary {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" | "pos" | "p" | "1" => Ok(Trinary::Positive),
            "negative" | "neg" | "n" | "-1" => Ok(Trinary::Negative),
            "neutral" | "neu" | "0" => Ok(Trinary::Neutral),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// Sign of `pos - |neg|`.
pub fn trinary_label(score: &SentenceScore) -> Trinary {
    let magnitude = score.neg.abs();
    match score.pos.cmp(&magnitude) {
        std::cmp::Ordering::Greater => Trinary::Positive,
        std::cmp::Ordering::Less => Trinary::Negative,
        std::cmp::Ordering::Equal => Trinary::Neutral,
    }
}

/// Scores every sentence of the body and classifies the message.
pub fn score_text(body: &str, lexicon: &Lexicon) -> Vec<SentenceScore> {
    segment_sentences(body)
        .into_iter()
        .map(|s| score_sentence(&s, lexicon))
        .collect()
}

/// Fills `sentence_scores` of a cleaned message and returns its classification.
pub fn score_message(message: &mut CleanMessage, lexicon: &Lexicon) -> MessageSentiment {
    message.sentence_scores = score_text(&message.body, lexicon);
    classify_message(&message.sentence_scores)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scores(pos: &[i8], neg: &[i8]) -> Vec<SentenceScore> {
        pos.iter().zip(neg).map(|(&p, &n)| SentenceScore::new("", p, n)).collect()
    }

    #[test]
    fn segments() {
        assert_eq!(segment_sentences("It broke. Why? Fix it!"), ["It broke.", "Why?", "Fix it!"]);
        assert_eq!(segment_sentences("Wait... what"), ["Wait...", "what"]);
        assert!(segment_sentences("").is_empty());
        assert!(segment_sentences(" \n ").is_empty());
        assert_eq!(segment_sentences("v1.2 is out.Really?!\nYes"), ["v1.2 is out.Really?!", "Yes"]);
        assert_eq!(segment_sentences("e.g. this"), ["e.g.", "this"]);
    }

    #[test]
    fn worked_message() {
        let s = scores(
            &[4, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1],
            &[-1, -2, -1, -1, -4, -4, -1, -1, -1, -1, -5, -5],
        );
        let m = classify_message(&s);
        assert!(m.has_strong_negative && m.has_strong_positive);
        assert_eq!(m.avg_neg_magnitude, Some(2.25));
        assert_eq!(m.avg_pos, Some(1.25));
    }

    #[test]
    fn baseline_and_single() {
        let m = classify_message(&scores(&[1; 12], &[-1; 12]));
        assert!(!m.has_strong_negative && !m.has_strong_positive);
        let m = classify_message(&scores(&[2], &[-3]));
        assert!(m.has_strong_negative && !m.has_strong_positive);
        let m = classify_message(&[]);
        assert_eq!(m.avg_pos, None);
        assert!(!m.has_strong_negative);
        // strong on both sides counts for neither
        let m = classify_message(&scores(&[4], &[-4]));
        assert!(!m.has_strong_negative && !m.has_strong_positive);
    }

    #[test]
    fn trinary() {
        assert_eq!(trinary_label(&SentenceScore::new("", 4, -1)), Trinary::Positive);
        assert_eq!(trinary_label(&SentenceScore::new("", 1, -1)), Trinary::Neutral);
        assert_eq!(trinary_label(&SentenceScore::new("", 2, -5)), Trinary::Negative);
    }

    #[test]
    fn trinary_partitions_grid() {
        let mut counts = std::collections::HashMap::new();
        for pos in 1..=5 {
            for neg in -5..=-1 {
                *counts.entry(trinary_label(&SentenceScore::new("", pos, neg))).or_insert(0) += 1;
            }
        }
        // 25 score pairs: 5 ties on the diagonal, 10 on each side
        assert_eq!(counts[&Trinary::Neutral], 5);
        assert_eq!(counts[&Trinary::Positive], 10);
        assert_eq!(counts[&Trinary::Negative], 10);
    }
}
