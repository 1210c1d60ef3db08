use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

/// Bundled lexicon: strong phrases seen in developer mail plus common
/// SentiStrength-style boosters and negators.
pub const BUILTIN_LEXICON: &str = include_str!("../../data/lexicon.tsv");

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Invalid { line: usize, reason: String },
}

/// Splits on non-alphanumeric boundaries and lowercases.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Sentiment terms, boosters and negators.
///
/// Term strengths lie in `[-5, -2] ∪ [2, 5]`; `±1` is the neutral baseline and
/// never stored. A phrase belongs to at most one of the three tables.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    /// First token -> (phrase tokens, strength), longest phrase first.
    terms: HashMap<String, Vec<(Vec<String>, i8)>>,
    boosters: HashMap<String, i8>,
    negators: HashSet<String>,
    len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Term,
    Booster,
    Negator,
}

impl Lexicon {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn builtin() -> Self {
        Self::parse(BUILTIN_LEXICON).expect("bundled lexicon is valid")
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Parses the tab-separated format: `kind<TAB>phrase[<TAB>value]`.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut lex = Lexicon::default();
        let mut seen: HashMap<String, usize> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let invalid = |reason: String| LexiconError::Invalid { line: line_no, reason };
            let fields: Vec<&str> = line.split('\t').collect();
            let kind = match fields[0].trim() {
                "term" => Kind::Term,
                "booster" => Kind::Booster,
                "negator" => Kind::Negator,
                other => return Err(invalid(format!("unknown kind {other:?}"))),
            };
            let expected = if kind == Kind::Negator { 2 } else { 3 };
            if fields.len() != expected {
                return Err(invalid(format!("expected {expected} tab-separated fields, found {}", fields.len())));
            }
            let tokens = tokenize(fields[1]);
            if tokens.is_empty() {
                return Err(invalid("empty phrase".to_string()));
            }
            if kind != Kind::Term && tokens.len() > 1 {
                return Err(invalid("boosters and negators are single tokens".to_string()));
            }
            let phrase = tokens.join(" ");
            if let Some(first) = seen.insert(phrase.clone(), line_no) {
                return Err(invalid(format!("phrase {phrase:?} already defined on line {first}")));
            }
            let value = || -> Result<i8, LexiconError> {
                fields[2]
                    .trim()
                    .parse::<i8>()
                    .map_err(|_| invalid(format!("bad value {:?}", fields[2])))
            };
            match kind {
                Kind::Term => {
                    let strength = value()?;
                    if !(2..=5).contains(&strength.abs()) {
                        return Err(invalid(format!(
                            "strength {strength} outside [-5,-2] and [2,5]"
                        )));
                    }
                    lex.terms.entry(tokens[0].clone()).or_default().push((tokens, strength));
                }
                Kind::Booster => {
                    let delta = value()?;
                    if delta == 0 || delta.abs() > 4 {
                        return Err(invalid(format!("booster delta {delta} outside [-4,4] without 0")));
                    }
                    lex.boosters.insert(phrase, delta);
                }
                Kind::Negator => {
                    lex.negators.insert(phrase);
                }
            }
            lex.len += 1;
        }
        for phrases in lex.terms.values_mut() {
            phrases.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        }
        Ok(lex)
    }

    /// Adds a term; used by tests and programmatic lexicons.
    pub fn with_term(mut self, phrase: &str, strength: i8) -> Self {
        assert!((2..=5).contains(&strength.abs()), "strength {strength} out of band");
        let tokens = tokenize(phrase);
        let list = self.terms.entry(tokens[0].clone()).or_default();
        list.push((tokens, strength));
        list.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        self.len += 1;
        self
    }

    pub fn with_booster(mut self, token: &str, delta: i8) -> Self {
        self.boosters.insert(token.to_lowercase(), delta);
        self.len += 1;
        self
    }

    pub fn with_negator(mut self, token: &str) -> Self {
        self.negators.insert(token.to_lowercase());
        self.len += 1;
        self
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Longest term starting at `tokens[at]`: (token count, strength).
    pub(crate) fn longest_match(&self, tokens: &[String], at: usize) -> Option<(usize, i8)> {
        let candidates = self.terms.get(&tokens[at])?;
        candidates.iter().find_map(|(phrase, strength)| {
            let end = at + phrase.len();
            (end <= tokens.len() && tokens[at..end] == phrase[..]).then_some((phrase.len(), *strength))
        })
    }

    pub(crate) fn booster(&self, token: &str) -> Option<i8> {
        self.boosters.get(token).copied()
    }

    pub(crate) fn is_negator(&self, token: &str) -> bool {
        self.negators.contains(token)
    }

    /// All terms as (phrase, strength), sorted by phrase.
    pub fn terms(&self) -> Vec<(String, i8)> {
        let mut out: Vec<(String, i8)> = self
            .terms
            .values()
            .flatten()
            .map(|(p, s)| (p.join(" "), *s))
            .collect();
        out.sort();
        out
    }
}
