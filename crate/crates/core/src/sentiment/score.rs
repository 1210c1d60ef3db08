use super::lexicon::{tokenize, Lexicon};
use super::SentenceScore;

/// Tokens before a term inspected for negators.
pub const NEGATION_WINDOW: usize = 2;
/// A booster must immediately precede the term it modifies.
pub const BOOSTER_DISTANCE: usize = 1;

/// Scores one sentence: the strongest positive and strongest negative hit.
///
/// Terms are matched greedily, longest phrase first. A booster right before a
/// term shifts its magnitude (clamped to `[1, 5]`). A negator within the two
/// preceding tokens turns a positive term into `-max(2, magnitude - 1)` and
/// cancels a negative one.
pub fn score_sentence(sentence: &str, lexicon: &Lexicon) -> SentenceScore {
    let tokens = tokenize(sentence);
    let mut pos: i8 = 1;
    let mut neg: i8 = -1;
    let mut at = 0;
    while at < tokens.len() {
        let Some((len, strength)) = lexicon.longest_match(&tokens, at) else {
            at += 1;
            continue;
        };
        let mut magnitude = strength.abs();
        let sign = strength.signum();
        if at >= BOOSTER_DISTANCE {
            if let Some(delta) = lexicon.booster(&tokens[at - BOOSTER_DISTANCE]) {
                magnitude = (magnitude + delta).clamp(1, 5);
            }
        }
        let negated = tokens[at.saturating_sub(NEGATION_WINDOW)..at]
            .iter()
            .any(|t| lexicon.is_negator(t));
        let contribution = match (sign > 0, negated) {
            (true, false) => Some(magnitude),
            (true, true) => Some(-(magnitude - 1).max(2)),
            (false, false) => Some(-magnitude),
            (false, true) => None,
        };
        match contribution {
            Some(c) if c > 0 => pos = pos.max(c),
            Some(c) => neg = neg.min(c),
            None => {}
        }
        at += len;
    }
    SentenceScore {
        text: sentence.to_string(),
        pos,
        neg,
    }
}
