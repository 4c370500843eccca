use std::collections::{HashMap, HashSet};
use std::path::Path;

/// Sentiment term tables.
///
/// File format, one entry per line: `term<TAB>value[<TAB>kind]`, where kind
/// is `term` (default), `booster`, `negator` or `emoticon`. Term values are
/// signed strengths in `-4..=4` (magnitude = polarity strength minus one),
/// booster values are magnitude deltas, negator values are ignored. A term
/// ending in `*` matches any word with that prefix; exact entries win, then
/// the longest prefix. Blank lines and lines starting with `;` are skipped.
#[derive(Debug, Clone, Default)]
pub struct SentimentLexicon {
    terms: HashMap<String, i8>,
    prefixes: Vec<(String, i8)>,
    boosters: HashMap<String, i8>,
    negators: HashSet<String>,
    emoticons: HashMap<String, i8>,
}

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
    #[error("lexicon line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

const DEFAULT_LEXICON: &str = include_str!("../../data/lexicon.tsv");

impl SentimentLexicon {
    pub fn from_tsv(src: &str) -> Result<Self, LexiconError> {
        let mut lex = SentimentLexicon::default();
        for (i, raw) in src.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with(';') {
                continue;
            }
            let err = |msg: &str| LexiconError::Parse { line: i + 1, msg: msg.to_string() };
            let mut cols = line.split('\t');
            let term = cols.next().map(str::trim).filter(|t| !t.is_empty()).ok_or_else(|| err("empty term"))?;
            let value: i8 = cols
                .next()
                .ok_or_else(|| err("missing value column"))?
                .trim()
                .parse()
                .map_err(|_| err("value is not an integer"))?;
            let kind = cols.next().map(str::trim).unwrap_or("term");
            match kind {
                "term" | "" => {
                    if value == 0 || !(-4..=4).contains(&value) {
                        return Err(err("term value must be a non-zero integer in [-4, 4]"));
                    }
                    let term = term.to_lowercase();
                    match term.strip_suffix('*') {
                        Some(prefix) => lex.prefixes.push((prefix.to_string(), value)),
                        None => {
                            lex.terms.insert(term, value);
                        }
                    }
                }
                "booster" => {
                    if !(-3..=3).contains(&value) {
                        return Err(err("booster delta must be in [-3, 3]"));
                    }
                    lex.boosters.insert(term.to_lowercase(), value);
                }
                "negator" => {
                    lex.negators.insert(term.to_lowercase());
                }
                "emoticon" => {
                    if value == 0 || !(-4..=4).contains(&value) {
                        return Err(err("emoticon value must be a non-zero integer in [-4, 4]"));
                    }
                    lex.emoticons.insert(term.to_string(), value);
                }
                other => return Err(err(&format!("unknown entry kind `{other}`"))),
            }
        }
        lex.prefixes.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        let src = std::fs::read_to_string(path).map_err(|e| LexiconError::Io(path.display().to_string(), e))?;
        Self::from_tsv(&src)
    }

    /// The small general-purpose English lexicon bundled with the crate.
    pub fn default_lexicon() -> Self {
        Self::from_tsv(DEFAULT_LEXICON).expect("bundled lexicon is valid")
    }

    pub fn term(&self, word: &str) -> Option<i8> {
        if let Some(v) = self.terms.get(word) {
            return Some(*v);
        }
        self.prefixes.iter().find(|(p, _)| word.starts_with(p.as_str())).map(|(_, v)| *v)
    }

    pub fn booster(&self, word: &str) -> Option<i8> {
        self.boosters.get(word).copied()
    }

    pub fn is_negator(&self, word: &str) -> bool {
        self.negators.contains(word)
    }

    pub fn emoticon(&self, chunk: &str) -> Option<i8> {
        self.emoticons.get(chunk).copied()
    }

    pub fn len(&self) -> usize {
        self.terms.len() + self.prefixes.len() + self.boosters.len() + self.negators.len() + self.emoticons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
