//! Skip-gram with negative sampling over arbitrary (word, context) pairs.
//!
//! Each observed pair is a positive example for a logistic classifier on
//! the dot product of a word row and a context row; `k` contexts drawn
//! from a smoothed unigram noise distribution are negative examples. One
//! SGD step per pair updates the word row and every touched context row.
//!
//! With `workers > 1` the matrices are shared between threads without
//! locking (Hogwild). Components are stored as relaxed atomics there, so
//! concurrent updates may interleave and lose increments but never tear a
//! value. Only `workers == 1` is reproducible.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{dot, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::pairgen::ContextPair;
use crate::seed;
use crate::vocab::Vocabulary;

const SIGMOID_CLAMP: f64 = 30.0;

/// Pairs between progress log lines.
const LOG_INTERVAL: u64 = 1 << 20;

/// Pairs a Hogwild worker processes between learning-rate refreshes.
const WORKER_BATCH: u64 = 1024;

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub dim: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub alpha: f64,
    pub noise_exponent: f64,
    /// The learning rate never decays below `alpha * min_alpha_fraction`.
    pub min_alpha_fraction: f64,
    pub seed: u64,
    pub workers: usize,
    /// Shuffle pair order every epoch.
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 300,
            negatives: 8,
            epochs: 5,
            alpha: 0.025,
            noise_exponent: 0.75,
            min_alpha_fraction: 1e-4,
            seed: 1,
            workers: 1,
            shuffle: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.into()));
        if self.dim < 1 {
            return fail("dimension must be at least 1");
        }
        if self.epochs < 1 {
            return fail("epochs must be at least 1");
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return fail("alpha must be positive");
        }
        if !self.noise_exponent.is_finite() {
            return fail("noise exponent must be finite");
        }
        if !(self.min_alpha_fraction > 0.0 && self.min_alpha_fraction <= 1.0) {
            return fail("min_alpha_fraction must be in (0, 1]");
        }
        if self.workers < 1 {
            return fail("workers must be at least 1");
        }
        Ok(())
    }
}

/// Logistic function, with the argument clamped to ±30.
pub fn sigmoid(x: f64) -> f64 {
    let x = x.clamp(-SIGMOID_CLAMP, SIGMOID_CLAMP);
    1.0 / (1.0 + (-x).exp())
}

/// `ln σ(x)`, computed without overflow.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Negative-sampling loss of one observed pair:
/// `-ln σ(w·c) - Σ ln σ(-w·n)` over the negatives `n`.
pub fn pair_loss(word: &[f64], context: &[f64], negatives: &[&[f64]]) -> f64 {
    -log_sigmoid(dot(word, context)) - negatives.iter().map(|n| log_sigmoid(-dot(word, n))).sum::<f64>()
}

/// Sampling distribution over context ids, proportional to
/// `count^exponent`.
#[derive(Clone, Debug)]
pub struct NoiseTable {
    probabilities: Vec<f64>,
    cumulative: Vec<f64>,
}

impl NoiseTable {
    pub fn new(contexts: &Vocabulary, exponent: f64) -> Result<Self> {
        if contexts.is_empty() {
            return Err(Error::EmptyVocabulary { min_count: 0 });
        }
        let weights: Vec<f64> = contexts
            .counts()
            .iter()
            .map(|&c| (c as f64).powf(exponent))
            .collect();
        let total: f64 = weights.iter().sum();
        let probabilities: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut acc = 0.0;
        let cumulative = probabilities
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(NoiseTable {
            probabilities,
            cumulative,
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.gen();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.cumulative.len() - 1) as u32
    }
}

/// A re-readable sequence of training pairs.
pub trait PairSource {
    fn pair_count(&self) -> u64;

    /// Visits every pair once, in order.
    fn for_each_pair(&mut self, f: &mut dyn FnMut(ContextPair)) -> Result<()>;
}

impl PairSource for [ContextPair] {
    fn pair_count(&self) -> u64 {
        self.len() as u64
    }

    fn for_each_pair(&mut self, f: &mut dyn FnMut(ContextPair)) -> Result<()> {
        self.iter().copied().for_each(f);
        Ok(())
    }
}

impl PairSource for Vec<ContextPair> {
    fn pair_count(&self) -> u64 {
        self.len() as u64
    }

    fn for_each_pair(&mut self, f: &mut dyn FnMut(ContextPair)) -> Result<()> {
        self.as_mut_slice().for_each_pair(f)
    }
}

/// Row access used by the SGD kernel.
trait Params {
    fn load_word(&self, id: u32, out: &mut [f64]);
    fn load_context(&self, id: u32, out: &mut [f64]);
    fn add_word(&mut self, id: u32, delta: &[f64], scale: f64);
    fn add_context(&mut self, id: u32, delta: &[f64], scale: f64);
}

struct DenseParams {
    dim: usize,
    words: Vec<f64>,
    contexts: Vec<f64>,
}

impl DenseParams {
    fn view(&mut self) -> SliceParams<'_> {
        SliceParams {
            dim: self.dim,
            words: &mut self.words,
            contexts: &mut self.contexts,
        }
    }
}

struct SliceParams<'a> {
    dim: usize,
    words: &'a mut [f64],
    contexts: &'a mut [f64],
}

impl Params for SliceParams<'_> {
    fn load_word(&self, id: u32, out: &mut [f64]) {
        let s = id as usize * self.dim;
        out.copy_from_slice(&self.words[s..s + self.dim]);
    }

    fn load_context(&self, id: u32, out: &mut [f64]) {
        let s = id as usize * self.dim;
        out.copy_from_slice(&self.contexts[s..s + self.dim]);
    }

    fn add_word(&mut self, id: u32, delta: &[f64], scale: f64) {
        let s = id as usize * self.dim;
        for (p, d) in self.words[s..s + self.dim].iter_mut().zip(delta) {
            *p += scale * d;
        }
    }

    fn add_context(&mut self, id: u32, delta: &[f64], scale: f64) {
        let s = id as usize * self.dim;
        for (p, d) in self.contexts[s..s + self.dim].iter_mut().zip(delta) {
            *p += scale * d;
        }
    }
}

/// Lock-free view shared by Hogwild workers.
struct SharedParams<'a> {
    dim: usize,
    words: &'a [AtomicU64],
    contexts: &'a [AtomicU64],
}

fn load_atomic(src: &[AtomicU64], out: &mut [f64]) {
    for (o, a) in out.iter_mut().zip(src) {
        *o = f64::from_bits(a.load(Ordering::Relaxed));
    }
}

fn add_atomic(dst: &[AtomicU64], delta: &[f64], scale: f64) {
    for (a, d) in dst.iter().zip(delta) {
        let v = f64::from_bits(a.load(Ordering::Relaxed)) + scale * d;
        a.store(v.to_bits(), Ordering::Relaxed);
    }
}

impl Params for SharedParams<'_> {
    fn load_word(&self, id: u32, out: &mut [f64]) {
        let s = id as usize * self.dim;
        load_atomic(&self.words[s..s + self.dim], out);
    }

    fn load_context(&self, id: u32, out: &mut [f64]) {
        let s = id as usize * self.dim;
        load_atomic(&self.contexts[s..s + self.dim], out);
    }

    fn add_word(&mut self, id: u32, delta: &[f64], scale: f64) {
        let s = id as usize * self.dim;
        add_atomic(&self.words[s..s + self.dim], delta, scale);
    }

    fn add_context(&mut self, id: u32, delta: &[f64], scale: f64) {
        let s = id as usize * self.dim;
        add_atomic(&self.contexts[s..s + self.dim], delta, scale);
    }
}

/// Scratch buffers for one worker.
struct Scratch {
    word: Vec<f64>,
    context: Vec<f64>,
    word_delta: Vec<f64>,
}

impl Scratch {
    fn new(dim: usize) -> Self {
        Scratch {
            word: vec![0.0; dim],
            context: vec![0.0; dim],
            word_delta: vec![0.0; dim],
        }
    }
}

/// One SGD step on `pair` with the given negatives. Context rows are
/// updated as they are visited; the word row is updated last from the
/// accumulated gradient. Returns the loss before the update.
fn sgd_step<P: Params>(
    params: &mut P,
    scratch: &mut Scratch,
    pair: ContextPair,
    negatives: &[u32],
    lr: f64,
) -> f64 {
    params.load_word(pair.word, &mut scratch.word);
    scratch.word_delta.iter_mut().for_each(|v| *v = 0.0);

    let mut loss = 0.0;
    let targets = std::iter::once((pair.context, 1.0)).chain(negatives.iter().map(|&n| (n, 0.0)));
    for (target, label) in targets {
        params.load_context(target, &mut scratch.context);
        let score = dot(&scratch.word, &scratch.context);
        loss -= log_sigmoid(if label > 0.0 { score } else { -score });

        // Negative loss gradient w.r.t. the score, times the step size.
        let g = lr * (label - sigmoid(score));
        for (d, c) in scratch.word_delta.iter_mut().zip(&scratch.context) {
            *d += g * c;
        }
        params.add_context(target, &scratch.word, g);
    }
    params.add_word(pair.word, &scratch.word_delta, 1.0);
    loss
}

/// Word and context matrices under training.
pub struct Trainer {
    config: TrainConfig,
    noise: NoiseTable,
    params: DenseParams,
    n_words: usize,
    n_contexts: usize,
    processed: u64,
    planned: u64,
    negative_rng: rand_chacha::ChaCha8Rng,
    shuffle_rng: rand_chacha::ChaCha8Rng,
    epoch: usize,
}

/// Per-epoch progress.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpochStats {
    pub pairs: u64,
    pub mean_loss: f64,
    pub final_alpha: f64,
}

impl Trainer {
    /// Word rows start uniform in `±0.5/dim`, context rows at zero.
    pub fn new(words: &Vocabulary, contexts: &Vocabulary, config: &TrainConfig) -> Result<Self> {
        config.validate()?;
        let dim = config.dim;
        let mut init = seed::stream(config.seed, seed::INIT_STREAM);
        let bound = 0.5 / dim as f64;
        let word_rows = (0..words.len() * dim)
            .map(|_| init.gen_range(-bound..=bound))
            .collect();
        Ok(Trainer {
            noise: NoiseTable::new(contexts, config.noise_exponent)?,
            params: DenseParams {
                dim,
                words: word_rows,
                contexts: vec![0.0; contexts.len() * dim],
            },
            n_words: words.len(),
            n_contexts: contexts.len(),
            processed: 0,
            planned: 0,
            negative_rng: seed::stream(config.seed, seed::NEGATIVE_STREAM),
            shuffle_rng: seed::stream(config.seed, seed::SHUFFLE_STREAM),
            config: config.clone(),
            epoch: 0,
        })
    }

    pub fn noise(&self) -> &NoiseTable {
        &self.noise
    }

    pub fn word_row(&self, id: u32) -> &[f64] {
        let s = id as usize * self.config.dim;
        &self.params.words[s..s + self.config.dim]
    }

    pub fn context_row(&self, id: u32) -> &[f64] {
        let s = id as usize * self.config.dim;
        &self.params.contexts[s..s + self.config.dim]
    }

    /// Current learning rate: linear decay over `epochs * pairs` steps,
    /// floored at `alpha * min_alpha_fraction`.
    pub fn alpha(&self) -> f64 {
        learning_rate(&self.config, self.processed, self.planned)
    }

    fn check_pair(&self, pair: ContextPair) -> Result<()> {
        if pair.word as usize >= self.n_words {
            return Err(Error::DimensionMismatch {
                expected: self.n_words,
                actual: pair.word as usize + 1,
            });
        }
        if pair.context as usize >= self.n_contexts {
            return Err(Error::DimensionMismatch {
                expected: self.n_contexts,
                actual: pair.context as usize + 1,
            });
        }
        Ok(())
    }

    /// One pass over `source`.
    pub fn run_epoch<S: PairSource + ?Sized>(&mut self, source: &mut S) -> Result<EpochStats> {
        let total = source.pair_count();
        if total == 0 {
            return Err(Error::EmptyPairStream);
        }
        if self.planned == 0 {
            self.planned = total * self.config.epochs as u64;
        }
        self.epoch += 1;

        if self.config.workers > 1 || self.config.shuffle {
            let mut pairs = Vec::with_capacity(total as usize);
            source.for_each_pair(&mut |p| pairs.push(p))?;
            for &p in &pairs {
                self.check_pair(p)?;
            }
            if self.config.shuffle {
                pairs.shuffle(&mut self.shuffle_rng);
            }
            return if self.config.workers > 1 {
                Ok(self.run_hogwild(&pairs))
            } else {
                self.run_sequential(&mut pairs)
            };
        }
        self.run_sequential(source)
    }

    fn run_sequential<S: PairSource + ?Sized>(&mut self, source: &mut S) -> Result<EpochStats> {
        let started = Instant::now();
        let mut scratch = Scratch::new(self.config.dim);
        let mut negatives = vec![0u32; self.config.negatives];
        let mut loss_sum = 0.0;
        let mut n = 0u64;
        let mut bad = None;

        let config = &self.config;
        let noise = &self.noise;
        let mut params = self.params.view();
        let rng = &mut self.negative_rng;
        let (n_words, n_contexts) = (self.n_words, self.n_contexts);
        let planned = self.planned;
        let processed = &mut self.processed;
        let epoch = self.epoch;

        source.for_each_pair(&mut |pair| {
            if bad.is_some() {
                return;
            }
            if pair.word as usize >= n_words || pair.context as usize >= n_contexts {
                bad = Some(pair);
                return;
            }
            for neg in negatives.iter_mut() {
                *neg = noise.sample(rng);
            }
            let lr = learning_rate(config, *processed, planned);
            loss_sum += sgd_step(&mut params, &mut scratch, pair, &negatives, lr);
            *processed += 1;
            n += 1;
            if n.is_multiple_of(LOG_INTERVAL) {
                log_progress(epoch, n, started, lr, loss_sum / n as f64);
            }
        })?;
        if let Some(pair) = bad {
            self.check_pair(pair)?;
        }
        if n == 0 {
            return Err(Error::EmptyPairStream);
        }
        let stats = EpochStats {
            pairs: n,
            mean_loss: loss_sum / n as f64,
            final_alpha: self.alpha(),
        };
        log_progress(self.epoch, n, started, stats.final_alpha, stats.mean_loss);
        Ok(stats)
    }

    fn run_hogwild(&mut self, pairs: &[ContextPair]) -> EpochStats {
        let started = Instant::now();
        let to_atomic = |v: &[f64]| -> Vec<AtomicU64> { v.iter().map(|x| AtomicU64::new(x.to_bits())).collect() };
        let words = to_atomic(&self.params.words);
        let contexts = to_atomic(&self.params.contexts);
        let workers = self.config.workers;
        let chunk = pairs.len().div_ceil(workers).max(1);

        let results: Vec<(f64, u64)> = std::thread::scope(|scope| {
            let handles: Vec<_> = pairs
                .chunks(chunk)
                .enumerate()
                .map(|(worker, part)| {
                    let mut params = SharedParams {
                        dim: self.config.dim,
                        words: &words,
                        contexts: &contexts,
                    };
                    let base = self.processed;
                    let config = &self.config;
                    let noise = &self.noise;
                    let planned = self.planned;
                    let epoch = self.epoch;
                    scope.spawn(move || {
                        let mut rng = seed::worker_stream(
                            config.seed,
                            seed::NEGATIVE_STREAM,
                            epoch * workers + worker,
                        );
                        let mut scratch = Scratch::new(config.dim);
                        let mut negatives = vec![0u32; config.negatives];
                        let mut loss = 0.0;
                        let mut lr = learning_rate(config, base, planned);
                        for (i, &pair) in part.iter().enumerate() {
                            // Workers advance at about the same rate.
                            if (i as u64).is_multiple_of(WORKER_BATCH) {
                                lr = learning_rate(config, base + (i * workers) as u64, planned);
                            }
                            for neg in negatives.iter_mut() {
                                *neg = noise.sample(&mut rng);
                            }
                            loss += sgd_step(&mut params, &mut scratch, pair, &negatives, lr);
                        }
                        (loss, part.len() as u64)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("training worker panicked")).collect()
        });

        let from_atomic = |v: Vec<AtomicU64>| -> Vec<f64> { v.into_iter().map(|a| f64::from_bits(a.into_inner())).collect() };
        self.params.words = from_atomic(words);
        self.params.contexts = from_atomic(contexts);
        self.processed += pairs.len() as u64;

        let loss: f64 = results.iter().map(|r| r.0).sum();
        let n = pairs.len() as u64;
        let stats = EpochStats {
            pairs: n,
            mean_loss: loss / n as f64,
            final_alpha: self.alpha(),
        };
        log_progress(self.epoch, n, started, stats.final_alpha, stats.mean_loss);
        stats
    }

    pub fn into_model(self, words: &Vocabulary, contexts: &Vocabulary) -> Result<TrainedModel> {
        let dim = self.config.dim;
        Ok(TrainedModel {
            words: EmbeddingMatrix::new(words.symbols().to_vec(), dim, self.params.words)?,
            contexts: EmbeddingMatrix::new(contexts.symbols().to_vec(), dim, self.params.contexts)?,
        })
    }
}

fn learning_rate(config: &TrainConfig, processed: u64, planned: u64) -> f64 {
    if planned == 0 {
        return config.alpha;
    }
    let progress = processed as f64 / planned as f64;
    config.alpha * (1.0 - progress).max(config.min_alpha_fraction)
}

fn log_progress(epoch: usize, pairs: u64, started: Instant, alpha: f64, loss: f64) {
    let secs = started.elapsed().as_secs_f64().max(1e-9);
    log::info!(
        "epoch {epoch}: {pairs} pairs, {:.0} pairs/s, alpha {alpha:.6}, loss {loss:.4}",
        pairs as f64 / secs
    );
}

/// Trained word matrix (the exported embeddings) and context matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub words: EmbeddingMatrix,
    pub contexts: EmbeddingMatrix,
}

/// Trains for `config.epochs` passes over `source`.
pub fn train<S: PairSource + ?Sized>(
    source: &mut S,
    words: &Vocabulary,
    contexts: &Vocabulary,
    config: &TrainConfig,
) -> Result<(TrainedModel, Vec<EpochStats>)> {
    let mut trainer = Trainer::new(words, contexts, config)?;
    let mut stats = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        stats.push(trainer.run_epoch(source)?);
    }
    Ok((trainer.into_model(words, contexts)?, stats))
}

/// One SGD step on matrices given as flat row-major slices. Negatives are
/// supplied by the caller; [`train_pair`] samples them.
pub fn train_pair_with_negatives(
    words: &mut [f64],
    contexts: &mut [f64],
    dim: usize,
    pair: ContextPair,
    negatives: &[u32],
    lr: f64,
) -> f64 {
    let mut params = SliceParams {
        dim,
        words,
        contexts,
    };
    sgd_step(&mut params, &mut Scratch::new(dim), pair, negatives, lr)
}

/// One SGD step with `k` negatives sampled from `noise`. Negatives equal to
/// the observed context are kept.
#[allow(clippy::too_many_arguments)]
pub fn train_pair<R: Rng + ?Sized>(
    words: &mut [f64],
    contexts: &mut [f64],
    dim: usize,
    pair: ContextPair,
    noise: &NoiseTable,
    lr: f64,
    k: usize,
    rng: &mut R,
) -> f64 {
    let negatives: Vec<u32> = (0..k).map(|_| noise.sample(rng)).collect();
    train_pair_with_negatives(words, contexts, dim, pair, &negatives, lr)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::LN_2;

    use super::*;

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((1.0 - sigmoid(1e6)).abs() < 1e-9);
        for x in [0.1, 1.0, 3.7, 29.0, 45.0] {
            assert!((sigmoid(x) + sigmoid(-x) - 1.0).abs() < 1e-12);
        }
        assert!((log_sigmoid(-800.0) + 800.0).abs() < 1e-9);
    }

    #[test]
    fn loss_values() {
        assert!((pair_loss(&[0.0, 0.0], &[1.0, 0.0], &[]) - LN_2).abs() < 1e-15);

        // Saturated positive score, negatives orthogonal to the word.
        let w = [1e3, 0.0];
        let c = [1e3, 0.0];
        let negs: [&[f64]; 3] = [&[0.0, 1.0], &[0.0, -2.0], &[0.0, 5.0]];
        assert!((pair_loss(&w, &c, &negs) - 3.0 * LN_2).abs() < 1e-12);

        let zero = [0.0; 4];
        let negs: Vec<&[f64]> = vec![&[1.0, 2.0, 3.0, 4.0]; 5];
        assert!((pair_loss(&zero, &[1.0, 1.0, 1.0, 1.0], &negs) - 6.0 * LN_2).abs() < 1e-12);
    }

    #[test]
    fn forced_single_step() {
        let mut w = vec![0.0, 0.0];
        let mut c = vec![1.0, 0.0];
        let pair = ContextPair { word: 0, context: 0 };
        train_pair_with_negatives(&mut w, &mut c, 2, pair, &[], 0.025);
        assert!((w[0] - 0.0125).abs() < 1e-15 && w[1] == 0.0);
        assert_eq!(c, [1.0, 0.0]);

        let mut w = vec![0.0, 0.0];
        let mut c = vec![0.0, 0.0];
        train_pair_with_negatives(&mut w, &mut c, 2, pair, &[], 0.025);
        assert_eq!((w, c), (vec![0.0, 0.0], vec![0.0, 0.0]));
    }

    #[test]
    fn noise_table_probabilities() {
        let v = Vocabulary::from_counts([("a", 4), ("b", 1)], 1).unwrap();
        let t = NoiseTable::new(&v, 0.75).unwrap();
        let expect = 4f64.powf(0.75) / (4f64.powf(0.75) + 1.0);
        assert!((t.probabilities()[0] - expect).abs() < 1e-15);
        assert!((t.probabilities()[0] - 0.7388).abs() < 1e-4);

        let uniform = NoiseTable::new(&v, 0.0).unwrap();
        assert_eq!(uniform.probabilities(), [0.5, 0.5]);

        let single = Vocabulary::from_counts([("a", 9)], 1).unwrap();
        let t = NoiseTable::new(&single, 0.75).unwrap();
        assert_eq!(t.probabilities(), [1.0]);
        assert_eq!(t.sample(&mut seed::stream(0, "t")), 0);
    }

    #[test]
    fn config_invariants() {
        let bad = [
            TrainConfig { epochs: 0, ..Default::default() },
            TrainConfig { dim: 0, ..Default::default() },
            TrainConfig { alpha: 0.0, ..Default::default() },
            TrainConfig { workers: 0, ..Default::default() },
            TrainConfig { min_alpha_fraction: 0.0, ..Default::default() },
        ];
        for config in bad {
            assert!(matches!(config.validate(), Err(Error::Config(_))), "{config:?}");
        }
    }

    #[test]
    fn learning_rate_decays_linearly_to_floor() {
        let config = TrainConfig::default();
        assert_eq!(learning_rate(&config, 0, 100), 0.025);
        assert!((learning_rate(&config, 50, 100) - 0.0125).abs() < 1e-15);
        assert!((learning_rate(&config, 100, 100) - 0.025 * 1e-4).abs() < 1e-18);
    }

    #[test]
    fn empty_and_out_of_range_pairs() {
        let v = Vocabulary::from_counts([("a", 1)], 1).unwrap();
        let config = TrainConfig { dim: 4, epochs: 1, ..Default::default() };
        let mut empty: Vec<ContextPair> = Vec::new();
        assert!(matches!(train(&mut empty, &v, &v, &config), Err(Error::EmptyPairStream)));
        let mut bad = vec![ContextPair { word: 0, context: 3 }];
        assert!(matches!(
            train(&mut bad, &v, &v, &config),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
