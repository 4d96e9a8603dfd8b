//! Training pair generation.
//!
//! A tokenized corpus becomes a stream of (word, context) pairs. Rare
//! words are dropped and frequent words subsampled *before* windows are
//! drawn, so windows span the removed positions. Each surviving position
//! emits its positional pairs under a dynamic window, followed by one
//! pair per concept the word maps to when ontology injection is on.
//!
//! Words and contexts live in separate vocabularies. Concept contexts
//! carry the `CUI:` prefix so they can never collide with word contexts.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsutil;
use crate::seed;
use crate::vocab::{Counter, Vocabulary};

pub const CONCEPT_PREFIX: &str = "CUI:";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PairGenConfig {
    pub min_count: u64,
    pub subsample_t: f64,
    pub max_window: usize,
    pub seed: u64,
    pub inject_ontology: bool,
}

impl Default for PairGenConfig {
    fn default() -> Self {
        PairGenConfig {
            min_count: 5,
            subsample_t: 1e-4,
            max_window: 8,
            seed: 1,
            inject_ontology: false,
        }
    }
}

impl PairGenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_count < 1 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        if !(self.subsample_t > 0.0 && self.subsample_t <= 1.0) {
            return Err(Error::Config(format!(
                "subsample threshold must be in (0, 1], got {}",
                self.subsample_t
            )));
        }
        if self.max_window < 1 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        Ok(())
    }
}

/// One training example.
#[derive(Clone, Copy, Debug, Eq, PartialEq, Hash)]
pub struct ContextPair {
    pub word: u32,
    pub context: u32,
}

/// Context of a generated pair before context ids are assigned.
#[derive(Clone, Copy, Debug, Eq, PartialEq, Hash)]
pub enum Context {
    /// A word of the filtering vocabulary.
    Word(u32),
    /// An interned concept of a [`ConceptMap`].
    Concept(u32),
}

/// A generated pair; `word` indexes the filtering vocabulary.
#[derive(Clone, Copy, Debug, Eq, PartialEq, Hash)]
pub struct RawPair {
    pub word: u32,
    pub context: Context,
}

/// Word to concept identifiers, many-to-many.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConceptMap {
    concepts: Vec<String>,
    concept_ids: HashMap<String, u32>,
    words: HashMap<String, BTreeSet<u32>>,
}

impl ConceptMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Words are lowercased to match normalized corpus tokens.
    pub fn insert(&mut self, word: &str, concept: &str) -> Result<()> {
        if word.is_empty() || concept.is_empty() {
            return Err(Error::Config("concept map entries must be nonempty".into()));
        }
        let next = self.concepts.len() as u32;
        let id = *self.concept_ids.entry(concept.to_owned()).or_insert(next);
        if id == next {
            self.concepts.push(concept.to_owned());
        }
        self.words.entry(word.to_lowercase()).or_default().insert(id);
        Ok(())
    }

    /// Reads `word<delimiter>concept` rows. Blank lines and lines starting
    /// with `#` are skipped.
    pub fn read<R: BufRead>(reader: R, delimiter: char) -> Result<Self> {
        let mut map = ConceptMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, concept) = line
                .split_once(delimiter)
                .ok_or_else(|| Error::format(format!("line {}", idx + 1), "expected word and concept columns"))?;
            let (word, concept) = (word.trim(), concept.trim());
            if word.is_empty() || concept.is_empty() || concept.contains(delimiter) {
                return Err(Error::format(
                    format!("line {}", idx + 1),
                    "expected exactly two nonempty columns",
                ));
            }
            map.insert(word, concept)?;
        }
        Ok(map)
    }

    pub fn from_file(path: &Path, delimiter: char) -> Result<Self> {
        Self::read(fsutil::open(path)?, delimiter).map_err(|e| match e {
            Error::Format { location, message } => {
                Error::format(format!("{}: {location}", path.display()), message)
            }
            other => other,
        })
    }

    /// Concept identifiers associated with `word`, sorted.
    pub fn concepts_of(&self, word: &str) -> Vec<&str> {
        let mut concepts: Vec<&str> = self
            .words
            .get(word)
            .map(|ids| ids.iter().map(|&id| self.concept(id)).collect())
            .unwrap_or_default();
        concepts.sort_unstable();
        concepts
    }

    pub fn concept(&self, id: u32) -> &str {
        &self.concepts[id as usize]
    }

    pub fn n_words(&self) -> usize {
        self.words.len()
    }

    pub fn n_concepts(&self) -> usize {
        self.concepts.len()
    }

    /// Concept ids of every vocabulary word, indexed by word id.
    fn table_for(&self, vocab: &Vocabulary) -> Vec<Vec<u32>> {
        vocab
            .symbols()
            .iter()
            .map(|s| {
                self.words
                    .get(s)
                    .map(|ids| ids.iter().copied().collect())
                    .unwrap_or_default()
            })
            .collect()
    }
}

/// Context-vocabulary symbol of a concept.
pub fn concept_symbol(concept: &str) -> String {
    format!("{CONCEPT_PREFIX}{concept}")
}

/// Probability of keeping an occurrence of a word with relative frequency
/// `word_frequency` under subsampling threshold `t`.
pub fn subsample_keep_probability(word_frequency: f64, t: f64) -> f64 {
    (t / word_frequency).sqrt().min(1.0)
}

/// Drops out-of-vocabulary tokens, then keeps each remaining token with
/// its subsampling probability. Returns the surviving word ids.
pub fn filter_tokens<'a, I, R>(tokens: I, vocab: &Vocabulary, t: f64, rng: &mut R) -> Vec<u32>
where
    I: IntoIterator<Item = &'a str>,
    R: Rng + ?Sized,
{
    let mut kept = Vec::new();
    for token in tokens {
        let Some(id) = vocab.id(token) else { continue };
        let p = subsample_keep_probability(vocab.frequency(id), t);
        if p >= 1.0 || rng.gen::<f64>() < p {
            kept.push(id);
        }
    }
    kept
}

/// Source of effective window widths.
pub trait WindowSampler {
    /// A width in `1..=max_window`.
    fn draw(&mut self, max_window: usize) -> usize;
}

/// Width drawn uniformly from `1..=max_window`.
pub struct DynamicWindow<R>(pub R);

impl<R: Rng> WindowSampler for DynamicWindow<R> {
    fn draw(&mut self, max_window: usize) -> usize {
        self.0.gen_range(1..=max_window)
    }
}

/// Always the same width, regardless of the configured maximum.
pub struct FixedWindow(pub usize);

impl WindowSampler for FixedWindow {
    fn draw(&mut self, _max_window: usize) -> usize {
        self.0
    }
}

fn positional_pairs_at<F>(doc: &[u32], pos: usize, width: usize, emit: &mut F)
where
    F: FnMut(RawPair),
{
    let start = pos.saturating_sub(width);
    let end = (pos + width + 1).min(doc.len());
    for j in (start..end).filter(|&j| j != pos) {
        emit(RawPair {
            word: doc[pos],
            context: Context::Word(doc[j]),
        });
    }
}

fn concept_pairs_at<F>(word: u32, table: &[Vec<u32>], emit: &mut F)
where
    F: FnMut(RawPair),
{
    for &concept in &table[word as usize] {
        emit(RawPair {
            word,
            context: Context::Concept(concept),
        });
    }
}

/// Positional pairs of one document of surviving word ids.
pub fn gen_positional_pairs<W>(doc: &[u32], max_window: usize, sampler: &mut W) -> Vec<RawPair>
where
    W: WindowSampler + ?Sized,
{
    let mut pairs = Vec::new();
    for pos in 0..doc.len() {
        let width = sampler.draw(max_window);
        positional_pairs_at(doc, pos, width, &mut |p| pairs.push(p));
    }
    pairs
}

/// One (word, concept) pair per concept of every occurrence in `doc`.
pub fn inject_ontology_pairs(doc: &[u32], vocab: &Vocabulary, concepts: &ConceptMap) -> Vec<RawPair> {
    let table = concepts.table_for(vocab);
    let mut pairs = Vec::new();
    for &word in doc {
        concept_pairs_at(word, &table, &mut |p| pairs.push(p));
    }
    pairs
}

/// Streaming pair generator over documents.
pub struct PairGenerator<'a, R, W> {
    vocab: &'a Vocabulary,
    concepts: Option<(&'a ConceptMap, Vec<Vec<u32>>)>,
    config: PairGenConfig,
    subsample_rng: R,
    windows: W,
    stats: PairStats,
}

/// Running counts of a generation pass.
#[derive(Clone, Debug, Default)]
pub struct PairStats {
    pub documents: u64,
    pub tokens: u64,
    pub retained_tokens: u64,
    pub word_pairs: u64,
    pub ontology_pairs: u64,
    /// Pair occurrences per filtering-vocabulary word.
    pub word_counts: Vec<u64>,
    /// Occurrences of each word context.
    pub word_context_counts: Vec<u64>,
    /// Occurrences of each concept context.
    pub concept_context_counts: Vec<u64>,
}

impl<'a> PairGenerator<'a, rand_chacha::ChaCha8Rng, DynamicWindow<rand_chacha::ChaCha8Rng>> {
    /// Generator with randomness drawn from the named sub-streams of
    /// `config.seed`.
    pub fn new(
        vocab: &'a Vocabulary,
        concepts: Option<&'a ConceptMap>,
        config: &PairGenConfig,
    ) -> Result<Self> {
        Self::with_sources(
            vocab,
            concepts,
            config,
            seed::stream(config.seed, seed::SUBSAMPLE_STREAM),
            DynamicWindow(seed::stream(config.seed, seed::WINDOW_STREAM)),
        )
    }
}

impl<'a, R: Rng, W: WindowSampler> PairGenerator<'a, R, W> {
    pub fn with_sources(
        vocab: &'a Vocabulary,
        concepts: Option<&'a ConceptMap>,
        config: &PairGenConfig,
        subsample_rng: R,
        windows: W,
    ) -> Result<Self> {
        config.validate()?;
        let concepts = match concepts {
            Some(map) if config.inject_ontology => Some((map, map.table_for(vocab))),
            _ => None,
        };
        let n_concepts = concepts.as_ref().map_or(0, |(m, _)| m.n_concepts());
        Ok(PairGenerator {
            vocab,
            concepts,
            config: config.clone(),
            subsample_rng,
            windows,
            stats: PairStats {
                word_counts: vec![0; vocab.len()],
                word_context_counts: vec![0; vocab.len()],
                concept_context_counts: vec![0; n_concepts],
                ..Default::default()
            },
        })
    }

    /// Emits the pairs of one document. Ontology pairs of a position
    /// directly follow its positional pairs.
    pub fn process<'t, I, F>(&mut self, tokens: I, mut emit: F)
    where
        I: IntoIterator<Item = &'t str>,
        F: FnMut(RawPair),
    {
        let mut n_tokens = 0u64;
        let doc = filter_tokens(
            tokens.into_iter().inspect(|_| n_tokens += 1),
            self.vocab,
            self.config.subsample_t,
            &mut self.subsample_rng,
        );

        let stats = &mut self.stats;
        stats.documents += 1;
        stats.tokens += n_tokens;
        stats.retained_tokens += doc.len() as u64;

        let mut record = |p: RawPair| {
            stats.word_counts[p.word as usize] += 1;
            match p.context {
                Context::Word(w) => {
                    stats.word_pairs += 1;
                    stats.word_context_counts[w as usize] += 1;
                }
                Context::Concept(c) => {
                    stats.ontology_pairs += 1;
                    stats.concept_context_counts[c as usize] += 1;
                }
            }
            emit(p);
        };

        for pos in 0..doc.len() {
            let width = self.windows.draw(self.config.max_window);
            positional_pairs_at(&doc, pos, width, &mut record);
            if let Some((_, table)) = &self.concepts {
                concept_pairs_at(doc[pos], table, &mut record);
            }
        }
    }

    pub fn stats(&self) -> &PairStats {
        &self.stats
    }

    pub fn context_symbol(&self, context: Context) -> String {
        match context {
            Context::Word(w) => self.vocab.symbol(w).to_owned(),
            Context::Concept(c) => {
                let (map, _) = self.concepts.as_ref().expect("concept pair without concept map");
                concept_symbol(map.concept(c))
            }
        }
    }

    /// Word and context vocabularies of everything emitted so far, with
    /// pair-occurrence counts.
    pub fn pair_vocabularies(&self) -> Result<(Vocabulary, Vocabulary)> {
        let stats = &self.stats;
        let words = Vocabulary::from_counts(
            self.vocab
                .symbols()
                .iter()
                .zip(&stats.word_counts)
                .map(|(s, &c)| (s.clone(), c)),
            1,
        )
        .map_err(|_| Error::EmptyPairStream)?;

        let mut contexts: Vec<(String, u64)> = self
            .vocab
            .symbols()
            .iter()
            .zip(&stats.word_context_counts)
            .map(|(s, &c)| (s.clone(), c))
            .collect();
        if let Some((map, _)) = &self.concepts {
            contexts.extend(
                stats
                    .concept_context_counts
                    .iter()
                    .enumerate()
                    .map(|(id, &c)| (concept_symbol(map.concept(id as u32)), c)),
            );
        }
        let contexts = Vocabulary::from_counts(contexts, 1).map_err(|_| Error::EmptyPairStream)?;
        Ok((words, contexts))
    }

    pub fn manifest(&self) -> Result<PairManifest> {
        let (words, contexts) = self.pair_vocabularies()?;
        let s = &self.stats;
        Ok(PairManifest {
            version: MANIFEST_VERSION,
            documents: s.documents,
            corpus_tokens: s.tokens,
            retained_tokens: s.retained_tokens,
            filter_vocab_size: self.vocab.len() as u64,
            word_vocab_size: words.len() as u64,
            context_vocab_size: contexts.len() as u64,
            word_pairs: s.word_pairs,
            ontology_pairs: s.ontology_pairs,
            total_pairs: s.word_pairs + s.ontology_pairs,
            config: self.config.clone(),
        })
    }
}

/// Summary written next to every pair file.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PairManifest {
    pub version: u32,
    pub documents: u64,
    pub corpus_tokens: u64,
    pub retained_tokens: u64,
    pub filter_vocab_size: u64,
    pub word_vocab_size: u64,
    pub context_vocab_size: u64,
    pub word_pairs: u64,
    pub ontology_pairs: u64,
    pub total_pairs: u64,
    pub config: PairGenConfig,
}

impl PairManifest {
    pub fn path_for(pairs: &Path) -> PathBuf {
        let mut name = pairs.as_os_str().to_owned();
        name.push(".manifest.toml");
        PathBuf::from(name)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self).map_err(|e| Error::Config(e.to_string()))?;
        fsutil::write_atomic(path, |w| Ok(w.write_all(text.as_bytes())?))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::format(path.display().to_string(), e.to_string()))
    }
}

/// Training pairs with their vocabularies, held in memory.
#[derive(Clone, Debug)]
pub struct PairSet {
    pub words: Vocabulary,
    pub contexts: Vocabulary,
    pub pairs: Vec<ContextPair>,
    pub manifest: PairManifest,
}

/// Tokenized corpus: one document per line, tokens separated by
/// whitespace.
pub fn read_corpus(path: &Path) -> Result<Vec<Vec<String>>> {
    let mut docs = Vec::new();
    for line in fsutil::open(path)?.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        docs.push(line.split_whitespace().map(str::to_owned).collect());
    }
    Ok(docs)
}

fn count_corpus<D, T>(corpus: D) -> Counter
where
    D: IntoIterator<Item = T>,
    T: AsRef<[String]>,
{
    let mut counter = Counter::default();
    for doc in corpus {
        counter.add_all(doc.as_ref().iter().map(String::as_str));
    }
    counter
}

/// Full in-memory pipeline: vocabulary, filtering, positional pairs and
/// (when enabled) interleaved ontology pairs.
pub fn pair_stream(
    corpus: &[Vec<String>],
    concepts: Option<&ConceptMap>,
    config: &PairGenConfig,
) -> Result<PairSet> {
    config.validate()?;
    let vocab = count_corpus(corpus).into_vocabulary(config.min_count)?;
    let generator = PairGenerator::new(&vocab, concepts, config)?;
    collect_pairs(corpus, generator)
}

/// [`pair_stream`] with caller-supplied randomness, e.g. fixed windows.
pub fn pair_stream_with<R: Rng, W: WindowSampler>(
    corpus: &[Vec<String>],
    concepts: Option<&ConceptMap>,
    config: &PairGenConfig,
    subsample_rng: R,
    windows: W,
) -> Result<PairSet> {
    config.validate()?;
    let vocab = count_corpus(corpus).into_vocabulary(config.min_count)?;
    let generator = PairGenerator::with_sources(&vocab, concepts, config, subsample_rng, windows)?;
    collect_pairs(corpus, generator)
}

fn collect_pairs<R: Rng, W: WindowSampler>(
    corpus: &[Vec<String>],
    mut generator: PairGenerator<'_, R, W>,
) -> Result<PairSet> {
    let mut raw = Vec::new();
    for doc in corpus {
        generator.process(doc.iter().map(String::as_str), |p| raw.push(p));
    }
    let (words, contexts) = generator.pair_vocabularies()?;
    let filter_vocab = generator.vocab;

    let word_ids: Vec<u32> = filter_vocab
        .symbols()
        .iter()
        .map(|s| words.id(s).unwrap_or(u32::MAX))
        .collect();
    let word_ctx_ids: Vec<u32> = filter_vocab
        .symbols()
        .iter()
        .map(|s| contexts.id(s).unwrap_or(u32::MAX))
        .collect();
    let concept_ctx_ids: Vec<u32> = match &generator.concepts {
        Some((map, _)) => (0..map.n_concepts() as u32)
            .map(|c| contexts.id(&concept_symbol(map.concept(c))).unwrap_or(u32::MAX))
            .collect(),
        None => Vec::new(),
    };

    let pairs = raw
        .into_iter()
        .map(|p| ContextPair {
            word: word_ids[p.word as usize],
            context: match p.context {
                Context::Word(w) => word_ctx_ids[w as usize],
                Context::Concept(c) => concept_ctx_ids[c as usize],
            },
        })
        .collect();

    Ok(PairSet {
        manifest: generator.manifest()?,
        words,
        contexts,
        pairs,
    })
}

/// Streams the pairs of the corpus file at `corpus` into a
/// `word<TAB>context` file at `output`, with its manifest alongside.
pub fn write_pair_file(
    corpus: &Path,
    concepts: Option<&ConceptMap>,
    config: &PairGenConfig,
    output: &Path,
) -> Result<PairManifest> {
    config.validate()?;

    let mut counter = Counter::default();
    for line in fsutil::open(corpus)?.lines() {
        let line = line.map_err(|e| Error::io(corpus, e))?;
        counter.add_all(line.split_whitespace());
    }
    let vocab = counter.into_vocabulary(config.min_count)?;
    let mut generator = PairGenerator::new(&vocab, concepts, config)?;

    let word_symbols: Vec<&str> = vocab.symbols().iter().map(String::as_str).collect();
    let concept_symbols: Vec<String> = match concepts {
        Some(map) => (0..map.n_concepts() as u32)
            .map(|c| concept_symbol(map.concept(c)))
            .collect(),
        None => Vec::new(),
    };

    fsutil::write_atomic(output, |w| {
        let mut io_err = None;
        for line in fsutil::open(corpus)?.lines() {
            let line = line.map_err(|e| Error::io(corpus, e))?;
            generator.process(line.split_whitespace(), |p| {
                if io_err.is_some() {
                    return;
                }
                let context = match p.context {
                    Context::Word(c) => word_symbols[c as usize],
                    Context::Concept(c) => concept_symbols[c as usize].as_str(),
                };
                if let Err(e) = writeln!(w, "{}\t{}", word_symbols[p.word as usize], context) {
                    io_err = Some(e);
                }
            });
            if let Some(e) = io_err.take() {
                return Err(Error::io(output, e));
            }
        }
        if generator.stats().word_pairs + generator.stats().ontology_pairs == 0 {
            return Err(Error::EmptyPairStream);
        }
        Ok(())
    })?;

    let manifest = generator.manifest()?;
    manifest.write(&PairManifest::path_for(output))?;
    Ok(manifest)
}

/// A `word<TAB>context` pair file, re-read from disk on every pass.
///
/// Both vocabularies are counted from the file itself, so a pair file is
/// self-describing.
#[derive(Clone, Debug)]
pub struct PairFile {
    path: PathBuf,
    pub words: Vocabulary,
    pub contexts: Vocabulary,
    n_pairs: u64,
}

fn split_pair<'l>(line: &'l str, path: &Path, lineno: usize) -> Result<(&'l str, &'l str)> {
    match line.split_once('\t') {
        Some((w, c)) if !w.is_empty() && !c.is_empty() && !c.contains('\t') => Ok((w, c)),
        _ => Err(Error::format(
            format!("{}: line {lineno}", path.display()),
            "expected word<TAB>context",
        )),
    }
}

impl PairFile {
    pub fn open(path: &Path) -> Result<Self> {
        let mut words = Counter::default();
        let mut contexts = Counter::default();
        let mut n_pairs = 0u64;
        for (idx, line) in fsutil::open(path)?.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() {
                continue;
            }
            let (w, c) = split_pair(&line, path, idx + 1)?;
            words.add(w);
            contexts.add(c);
            n_pairs += 1;
        }
        if n_pairs == 0 {
            return Err(Error::EmptyPairStream);
        }

        let manifest_path = PairManifest::path_for(path);
        if manifest_path.exists() {
            let manifest = PairManifest::read(&manifest_path)?;
            if manifest.total_pairs != n_pairs {
                return Err(Error::format(
                    manifest_path.display().to_string(),
                    format!("manifest lists {} pairs, file holds {n_pairs}", manifest.total_pairs),
                ));
            }
        }

        Ok(PairFile {
            path: path.to_owned(),
            words: words.into_vocabulary(1)?,
            contexts: contexts.into_vocabulary(1)?,
            n_pairs,
        })
    }
}

impl crate::sgns::PairSource for PairFile {
    fn pair_count(&self) -> u64 {
        self.n_pairs
    }

    fn for_each_pair(&mut self, f: &mut dyn FnMut(ContextPair)) -> Result<()> {
        let mut line = String::new();
        let mut reader = fsutil::open(&self.path)?;
        let mut lineno = 0;
        loop {
            line.clear();
            lineno += 1;
            if reader.read_line(&mut line).map_err(|e| Error::io(&self.path, e))? == 0 {
                break;
            }
            let trimmed = line.trim_end_matches(['\n', '\r']);
            if trimmed.is_empty() {
                continue;
            }
            let (w, c) = split_pair(trimmed, &self.path, lineno)?;
            let missing = || {
                Error::format(
                    format!("{}: line {lineno}", self.path.display()),
                    "pair file changed since it was opened",
                )
            };
            f(ContextPair {
                word: self.words.id(w).ok_or_else(missing)?,
                context: self.contexts.id(c).ok_or_else(missing)?,
            });
        }
        Ok(())
    }
}
