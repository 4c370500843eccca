use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

/// Spam flags per annotator. CSV header: `stem,annotator_id,is_spam`.
///
/// A stem counts as spam only when every annotator that appears in the
/// loaded files flagged it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnotationSet {
    /// annotator -> stem -> is_spam
    flags: BTreeMap<String, BTreeMap<String, bool>>,
}

#[derive(Debug, thiserror::Error)]
pub enum AnnotationError {
    #[error("{path}: {msg}")]
    File { path: String, msg: String },
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "spam" => Some(true),
        "0" | "false" | "no" | "ham" => Some(false),
        _ => None,
    }
}

impl AnnotationSet {
    pub fn insert(&mut self, stem: &str, annotator: &str, is_spam: bool) {
        self.flags.entry(annotator.to_string()).or_default().insert(stem.trim().to_lowercase(), is_spam);
    }

    pub fn from_csv_reader<R: std::io::Read>(rdr: R, origin: &str) -> Result<Self, AnnotationError> {
        let mut set = AnnotationSet::default();
        set.extend_from_reader(rdr, origin)?;
        Ok(set)
    }

    fn extend_from_reader<R: std::io::Read>(&mut self, rdr: R, origin: &str) -> Result<(), AnnotationError> {
        let err = |msg: String| AnnotationError::File { path: origin.to_string(), msg };
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(rdr);
        for (i, row) in rdr.records().enumerate() {
            let row = row.map_err(|e| err(e.to_string()))?;
            if row.len() < 3 {
                return Err(err(format!("row {}: expected stem,annotator_id,is_spam", i + 2)));
            }
            let flag = parse_bool(&row[2]).ok_or_else(|| err(format!("row {}: bad is_spam `{}`", i + 2, &row[2])))?;
            self.insert(&row[0], &row[1], flag);
        }
        Ok(())
    }

    pub fn load<P: AsRef<Path>>(paths: &[P]) -> Result<Self, AnnotationError> {
        let mut set = AnnotationSet::default();
        for p in paths {
            let p = p.as_ref();
            let f = std::fs::File::open(p)
                .map_err(|e| AnnotationError::File { path: p.display().to_string(), msg: e.to_string() })?;
            set.extend_from_reader(f, &p.display().to_string())?;
        }
        Ok(set)
    }

    pub fn annotators(&self) -> usize {
        self.flags.len()
    }

    /// Stems flagged by all annotators.
    pub fn spam_stems(&self) -> BTreeSet<String> {
        let mut iter = self.flags.values();
        let Some(first) = iter.next() else {
            return BTreeSet::new();
        };
        let mut agreed: BTreeSet<String> = first.iter().filter(|(_, &f)| f).map(|(s, _)| s.clone()).collect();
        for other in iter {
            agreed.retain(|s| other.get(s).copied().unwrap_or(false));
        }
        agreed
    }
}
