use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ErrorKind, PipelineError};
use crate::botmeter::{ClassifyParams, TrainParams, DEFAULT_BAND, DEFAULT_THRESHOLD};
use crate::dacmap::LogAxis;
use crate::diffusion::{CandidateTerms, FactionTags, StrataScheme, DEFAULT_STRATA};
use crate::ingest::{RetweetSource, DEFAULT_MIN_PERIOD_DAYS};
use crate::spamfilter::{FilterParams, FrequencyMode, DEFAULT_TOP_N};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BotSection {
    pub threshold: f64,
    pub band: f64,
    /// Number of most active users to score.
    pub top_k: usize,
    pub min_period_days: f64,
}

impl Default for BotSection {
    fn default() -> Self {
        BotSection {
            threshold: DEFAULT_THRESHOLD,
            band: DEFAULT_BAND,
            top_k: 50_000,
            min_period_days: DEFAULT_MIN_PERIOD_DAYS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let p = TrainParams::default();
        TrainSection { learning_rate: p.learning_rate, epochs: p.epochs, l2: p.l2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpamSection {
    pub top_n: usize,
    pub mode: FrequencyMode,
}

impl Default for SpamSection {
    fn default() -> Self {
        SpamSection { top_n: DEFAULT_TOP_N, mode: FrequencyMode::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DacSection {
    pub retweet_source: RetweetSource,
    pub x_axis: LogAxis,
    pub y_axis: LogAxis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtrapolationSection {
    pub strata: usize,
    pub scheme: StrataScheme,
}

impl Default for ExtrapolationSection {
    fn default() -> Self {
        ExtrapolationSection { strata: DEFAULT_STRATA, scheme: StrataScheme::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TagLists {
    pub clinton: Vec<String>,
    pub trump: Vec<String>,
}

impl Default for TagLists {
    fn default() -> Self {
        let d = FactionTags::default();
        TagLists { clinton: d.clinton.into_iter().collect(), trump: d.trump.into_iter().collect() }
    }
}

/// Everything a pipeline run reads. Relative paths are resolved against the
/// directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    /// Field mapping; the flat layout when absent.
    pub schema: Option<PathBuf>,
    /// Built-in lexicon when absent.
    pub lexicon: Option<PathBuf>,
    /// Built-in stopword list when absent.
    pub stopwords: Option<PathBuf>,
    /// Pretrained bot model. When absent a model is trained from `labels`.
    pub model: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub annotations: Vec<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    /// 0 uses every core.
    pub workers: usize,
    pub bot: BotSection,
    pub train: TrainSection,
    pub spam: SpamSection,
    pub dac: DacSection,
    pub factions: TagLists,
    pub candidates: CandidateTerms,
    pub extrapolation: ExtrapolationSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: Vec::new(),
            schema: None,
            lexicon: None,
            stopwords: None,
            model: None,
            labels: None,
            annotations: Vec::new(),
            out: PathBuf::from("out"),
            seed: 0,
            workers: 0,
            bot: BotSection::default(),
            train: TrainSection::default(),
            spam: SpamSection::default(),
            dac: DacSection::default(),
            factions: TagLists::default(),
            candidates: CandidateTerms::default(),
            extrapolation: ExtrapolationSection::default(),
        }
    }
}

fn config_error(msg: impl Into<String>) -> PipelineError {
    PipelineError::new("config", ErrorKind::Config, msg)
}

impl RunConfig {
    pub fn from_toml_str(src: &str, base: &Path) -> Result<Self, PipelineError> {
        let mut cfg: RunConfig = toml::from_str(src).map_err(|e| config_error(e.to_string()))?;
        cfg.resolve(base);
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let src = std::fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::from_toml_str(&src, base)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.inputs.iter_mut().for_each(fix);
        self.annotations.iter_mut().for_each(fix);
        for p in [&mut self.schema, &mut self.lexicon, &mut self.stopwords, &mut self.model, &mut self.labels]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        fix(&mut self.out);
    }

    /// Checks referenced files and parameter ranges; nothing is read beyond
    /// file metadata.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let must_exist = |what: &str, p: &Path| {
            if p.is_file() {
                Ok(())
            } else {
                Err(config_error(format!("{what} `{}` does not exist", p.display())))
            }
        };
        for p in &self.inputs {
            must_exist("input", p)?;
        }
        for (what, p) in [
            ("schema", &self.schema),
            ("lexicon", &self.lexicon),
            ("stopwords", &self.stopwords),
            ("model", &self.model),
            ("labels", &self.labels),
        ] {
            if let Some(p) = p {
                must_exist(what, p)?;
            }
        }
        for p in &self.annotations {
            must_exist("annotations", p)?;
        }
        if self.model.is_none() && self.labels.is_none() {
            return Err(config_error("either `model` or `labels` is required"));
        }
        let b = &self.bot;
        if !(0.0..=1.0).contains(&b.threshold) || !(b.band >= 0.0) {
            return Err(config_error("bot.threshold must be in [0, 1] and bot.band non-negative"));
        }
        if !(b.min_period_days > 0.0) {
            return Err(config_error("bot.min_period_days must be positive"));
        }
        if self.spam.top_n == 0 {
            return Err(config_error("spam.top_n must be positive"));
        }
        if self.extrapolation.strata == 0 {
            return Err(config_error("extrapolation.strata must be positive"));
        }
        if self.dac.x_axis.bins() == 0 || self.dac.y_axis.bins() == 0 {
            return Err(config_error("dac axes need at least one bin"));
        }
        if !(self.train.learning_rate > 0.0) || !(self.train.l2 >= 0.0) {
            return Err(config_error("train.learning_rate must be positive and train.l2 non-negative"));
        }
        self.faction_tags()?;
        Ok(())
    }

    pub fn faction_tags(&self) -> Result<FactionTags, PipelineError> {
        FactionTags::new(&self.factions.clinton, &self.factions.trump).map_err(|e| config_error(e.to_string()))
    }

    pub fn classify_params(&self) -> ClassifyParams {
        ClassifyParams { threshold: self.bot.threshold, band: self.bot.band, min_period_days: self.bot.min_period_days }
    }

    pub fn train_params(&self) -> TrainParams {
        TrainParams {
            learning_rate: self.train.learning_rate,
            epochs: self.train.epochs,
            l2: self.train.l2,
            seed: self.seed,
            ..TrainParams::default()
        }
    }

    pub fn filter_params(&self) -> FilterParams {
        FilterParams { top_n: self.spam.top_n, mode: self.spam.mode }
    }
}
