//! Config-driven end-to-end runs: normalize, pairs, train, eval.
//!
//! A run is described by a versioned TOML file. Relative paths resolve
//! against the directory holding the config. One root seed feeds every
//! seeded stage; each stage draws from its own named sub-stream.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, ErrorKind, Result};
use crate::eval::{self, DatasetLayout, EvaluationReport};
use crate::normalize::{self, InputLayout, NormalizationRules};
use crate::pairgen::{self, ConceptMap, PairFile, PairGenConfig, PairManifest};
use crate::sgns::{self, TrainConfig};
use crate::vectors;

pub const CONFIG_VERSION: u32 = 1;

pub const CORPUS_FILE: &str = "corpus.txt";
pub const PAIRS_FILE: &str = "pairs.tsv";
pub const VECTORS_FILE: &str = "vectors.txt";
pub const REPORT_FILE: &str = "report.toml";

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Raw notes; when present the normalize stage runs first.
    #[serde(default)]
    pub raw_corpus: Option<PathBuf>,
    /// Already-normalized corpus, used when `raw_corpus` is absent.
    #[serde(default)]
    pub corpus: Option<PathBuf>,
    #[serde(default)]
    pub concepts: Option<PathBuf>,
    #[serde(default)]
    pub normalize: NormalizeSection,
    #[serde(default)]
    pub pairs: PairGenConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub eval: EvalSection,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizeSection {
    /// `id<delimiter>text` records instead of one note per line.
    pub delimiter: Option<char>,
    pub rules: NormalizationRules,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub datasets: Vec<DatasetSpec>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub name: String,
    pub path: PathBuf,
    #[serde(default = "generic_layout")]
    pub layout: String,
    #[serde(default)]
    pub score_column: Option<String>,
}

fn generic_layout() -> String {
    "generic".into()
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: RunConfig =
            toml::from_str(&text).map_err(|e| Error::format(path.display().to_string(), e.to_string()))?;
        if config.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                config.version
            )));
        }
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut self.output_dir);
        self.raw_corpus.as_mut().map(resolve);
        self.corpus.as_mut().map(resolve);
        self.concepts.as_mut().map(resolve);
        for d in &mut self.eval.datasets {
            resolve(&mut d.path);
        }
    }

    /// Checks every setting and input path before any work starts, and
    /// pushes the root seed into the stage configs.
    pub fn prepare(&mut self) -> Result<()> {
        self.pairs.seed = self.seed;
        self.train.seed = self.seed;
        self.pairs.validate()?;
        self.train.validate()?;

        let must_exist = |key: &str, p: &Path| {
            if p.is_file() {
                Ok(())
            } else {
                Err(Error::Config(format!("{key}: no such file {}", p.display())))
            }
        };
        match (&self.raw_corpus, &self.corpus) {
            (Some(raw), _) => must_exist("raw_corpus", raw)?,
            (None, Some(corpus)) => must_exist("corpus", corpus)?,
            (None, None) => return Err(Error::Config("one of raw_corpus or corpus is required".into())),
        }
        if let Some(c) = &self.concepts {
            must_exist("concepts", c)?;
        }
        if self.pairs.inject_ontology && self.concepts.is_none() {
            return Err(Error::Config("pairs.inject_ontology needs a concepts file".into()));
        }
        for d in &self.eval.datasets {
            must_exist(&format!("eval.datasets[{}]", d.name), &d.path)?;
            d.layout.parse::<DatasetLayout>()?;
        }
        std::fs::create_dir_all(&self.output_dir).map_err(|e| Error::io(&self.output_dir, e))?;
        Ok(())
    }
}

/// Pipeline stage names, used to prefix diagnostics.
#[derive(Clone, Copy, Debug, Eq, PartialEq)]
pub enum Stage {
    Config,
    Normalize,
    Pairs,
    Train,
    Eval,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Normalize => "normalize",
            Stage::Pairs => "pairs",
            Stage::Train => "train",
            Stage::Eval => "eval",
        })
    }
}

#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub source: Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage, self.source)
    }
}

impl std::error::Error for StageError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

impl StageError {
    pub fn kind(&self) -> ErrorKind {
        self.source.kind()
    }
}

trait InStage<T> {
    fn stage(self, stage: Stage) -> std::result::Result<T, StageError>;
}

impl<T> InStage<T> for Result<T> {
    fn stage(self, stage: Stage) -> std::result::Result<T, StageError> {
        self.map_err(|source| StageError { stage, source })
    }
}

/// Artifacts of a finished run.
#[derive(Clone, Debug)]
pub struct RunOutputs {
    pub corpus: PathBuf,
    pub pairs: PathBuf,
    pub manifest: PairManifest,
    pub vectors: PathBuf,
    pub report: Option<PathBuf>,
    pub reports: Vec<EvaluationReport>,
}

pub fn run_pipeline(mut config: RunConfig) -> std::result::Result<RunOutputs, StageError> {
    config.prepare().stage(Stage::Config)?;
    let out = config.output_dir.clone();

    let corpus = match &config.raw_corpus {
        Some(raw) => {
            let target = out.join(CORPUS_FILE);
            let layout = config
                .normalize
                .delimiter
                .map_or(InputLayout::Lines, InputLayout::Delimited);
            let (docs, tokens) =
                normalize::normalize_file(raw, &target, layout, &config.normalize.rules).stage(Stage::Normalize)?;
            log::info!("normalize: {docs} documents, {tokens} tokens");
            target
        }
        None => config.corpus.clone().expect("checked in prepare"),
    };

    let pairs_path = out.join(PAIRS_FILE);
    let concepts = match &config.concepts {
        Some(path) => Some(ConceptMap::from_file(path, '\t').stage(Stage::Pairs)?),
        None => None,
    };
    let manifest =
        pairgen::write_pair_file(&corpus, concepts.as_ref(), &config.pairs, &pairs_path).stage(Stage::Pairs)?;
    log::info!(
        "pairs: {} word pairs, {} ontology pairs",
        manifest.word_pairs,
        manifest.ontology_pairs
    );

    let vectors_path = out.join(VECTORS_FILE);
    let mut pair_file = PairFile::open(&pairs_path).stage(Stage::Train)?;
    let (words, contexts) = (pair_file.words.clone(), pair_file.contexts.clone());
    let (model, _) = sgns::train(&mut pair_file, &words, &contexts, &config.train).stage(Stage::Train)?;
    vectors::write_text(&model.words, &vectors_path).stage(Stage::Train)?;

    let mut reports = Vec::new();
    let mut report = None;
    if !config.eval.datasets.is_empty() {
        for d in &config.eval.datasets {
            let layout: DatasetLayout = d.layout.parse().stage(Stage::Eval)?;
            let data = eval::read_dataset(&d.path, &layout, d.score_column.as_deref()).stage(Stage::Eval)?;
            reports.push(eval::evaluate(&d.name, &model.words, &data, &config.normalize.rules).stage(Stage::Eval)?);
        }
        let path = out.join(REPORT_FILE);
        eval::write_report(&path, "pipeline", &reports).stage(Stage::Eval)?;
        report = Some(path);
    }

    Ok(RunOutputs {
        corpus,
        pairs: pairs_path,
        manifest,
        vectors: vectors_path,
        report,
        reports,
    })
}
