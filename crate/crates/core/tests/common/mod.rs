//! Oracles, fixtures and end-to-end checks shared by the integration tests
//! and the acceptance harness.
#![allow(dead_code)]

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use conceptvec::embedding::dot;
use conceptvec::eval::{self, DatasetLayout};
use conceptvec::normalize::NormalizationRules;
use conceptvec::pairgen::{self, ConceptMap, ContextPair, DynamicWindow, PairGenConfig, WindowSampler};
use conceptvec::pipeline::{self, DatasetSpec, EvalSection, NormalizeSection, RunConfig};
use conceptvec::sgns::{self, pair_loss, NoiseTable, TrainConfig};
use conceptvec::vectors::{self, VectorFormat};
use conceptvec::{seed, EmbeddingMatrix, Vocabulary};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Check = Result<String, String>;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

// ---------------------------------------------------------------------------
// Gradient oracle

/// Largest relative error between the analytic SGD update and central
/// finite differences of the pair loss, over `instances` random cases.
pub fn gradient_oracle(instances: usize, root_seed: u64) -> f64 {
    let mut rng = seed::stream(root_seed, "test.gradient");
    (0..instances).map(|_| gradient_case(&mut rng)).fold(0.0, f64::max)
}

fn gradient_case(rng: &mut ChaCha8Rng) -> f64 {
    let dim = rng.gen_range(1..=16);
    let k = rng.gen_range(0..=8);
    // Row 0 is the word; context rows 0 (positive) and 1..=k (negatives)
    // are distinct so every row is touched once.
    let scale = rng.gen_range(0.05..1.5);
    let words: Vec<f64> = (0..dim).map(|_| rng.gen_range(-scale..scale)).collect();
    let contexts: Vec<f64> = (0..(k + 1) * dim).map(|_| rng.gen_range(-scale..scale)).collect();
    let negatives: Vec<u32> = (1..=k as u32).collect();

    let lr = 1.0;
    let mut w_after = words.clone();
    let mut c_after = contexts.clone();
    sgns::train_pair_with_negatives(
        &mut w_after,
        &mut c_after,
        dim,
        ContextPair { word: 0, context: 0 },
        &negatives,
        lr,
    );
    // The update is `-lr * gradient`.
    let analytic: Vec<f64> = w_after
        .iter()
        .zip(&words)
        .chain(c_after.iter().zip(&contexts))
        .map(|(after, before)| -(after - before) / lr)
        .collect();

    let loss = |params: &[f64]| {
        let (w, c) = params.split_at(dim);
        let negs: Vec<&[f64]> = c.chunks(dim).skip(1).collect();
        pair_loss(w, &c[..dim], &negs)
    };
    let mut params: Vec<f64> = words.iter().chain(&contexts).copied().collect();
    let h = 1e-6;
    let numeric: Vec<f64> = (0..params.len())
        .map(|i| {
            let orig = params[i];
            params[i] = orig + h;
            let up = loss(&params);
            params[i] = orig - h;
            let down = loss(&params);
            params[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect();

    let diff: f64 = analytic.iter().zip(&numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
    let size = analytic.iter().map(|a| a * a).sum::<f64>().sqrt() + numeric.iter().map(|n| n * n).sum::<f64>().sqrt();
    if size < 1e-12 {
        diff
    } else {
        diff / size
    }
}

// ---------------------------------------------------------------------------
// Spearman oracle

/// Quadratic-time mid-ranks: one plus the number of smaller values plus
/// half the number of other equal values.
pub fn brute_ranks(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&v| {
            let less = values.iter().filter(|&&u| u < v).count() as f64;
            let equal = values.iter().filter(|&&u| u == v).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

pub fn brute_spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (brute_ranks(x), brute_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Random samples with many ties: values drawn from a small grid.
pub fn tied_sample(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let levels = rng.gen_range(2..=8);
    (0..n).map(|_| f64::from(rng.gen_range(0..levels)) * 0.5).collect()
}

/// Largest |main − reference| over `instances` random tied samples whose
/// correlation is defined.
pub fn spearman_oracle(instances: usize, root_seed: u64) -> (f64, usize) {
    let mut rng = seed::stream(root_seed, "test.spearman");
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < instances {
        let n = rng.gen_range(2..=60);
        let x = tied_sample(&mut rng, n);
        let y = if rng.gen_bool(0.5) {
            tied_sample(&mut rng, n)
        } else {
            (0..n).map(|_| rng.gen::<f64>()).collect()
        };
        let Ok(main) = eval::spearman(&x, &y) else {
            continue;
        };
        worst = worst.max((main - brute_spearman(&x, &y)).abs());
        checked += 1;
    }
    (worst, checked)
}

// ---------------------------------------------------------------------------
// Sampling laws

/// `|observed - expected|` in units of the binomial standard deviation.
pub fn z_score(hits: u64, draws: u64, p: f64) -> f64 {
    let n = draws as f64;
    let sd = (n * p * (1.0 - p)).sqrt();
    if sd == 0.0 {
        if hits as f64 == n * p {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (hits as f64 - n * p).abs() / sd
    }
}

/// Pearson's χ² of a histogram against cell probabilities, with its
/// 3σ multinomial bound `(K-1) + 3·sqrt(2(K-1))`.
pub fn chi_square(hist: &[u64], probabilities: &[f64]) -> (f64, f64) {
    let draws: u64 = hist.iter().sum();
    let stat = hist
        .iter()
        .zip(probabilities)
        .map(|(&h, &p)| {
            let expected = draws as f64 * p;
            (h as f64 - expected).powi(2) / expected
        })
        .sum();
    let dof = (hist.len() - 1) as f64;
    (stat, dof + 3.0 * (2.0 * dof).sqrt())
}

fn multinomial_verdict(hist: &[u64], probabilities: &[f64], what: &str) -> Check {
    let draws: u64 = hist.iter().sum();
    let (stat, bound) = chi_square(hist, probabilities);
    let worst_cell = hist
        .iter()
        .zip(probabilities)
        .map(|(&h, &p)| z_score(h, draws, p))
        .fold(0.0, f64::max);
    let detail = format!("{what}: chi2 {stat:.1} (3-sigma bound {bound:.1}), max cell |z| {worst_cell:.2}, {draws} draws");
    if stat <= bound {
        Ok(detail)
    } else {
        Err(detail)
    }
}

pub fn window_uniformity(draws: u64, max_window: usize, root_seed: u64) -> Check {
    let mut sampler = DynamicWindow(seed::stream(root_seed, seed::WINDOW_STREAM));
    let mut hist = vec![0u64; max_window + 1];
    for _ in 0..draws {
        let w = sampler.draw(max_window);
        if !(1..=max_window).contains(&w) {
            return Err(format!("width {w} outside 1..={max_window}"));
        }
        hist[w] += 1;
    }
    let probabilities = vec![1.0 / max_window as f64; max_window];
    multinomial_verdict(&hist[1..], &probabilities, &format!("{max_window} widths"))
}

pub fn keep_rate(draws_per_word: u64, root_seed: u64) -> Check {
    // (vocabulary counts, t): relative frequencies from kept-always to
    // heavily subsampled; the second setting has f = 0.01 at t = 1e-4.
    let settings: [(&[(&str, u64)], f64); 2] = [
        (
            &[("w0", 400_000), ("w1", 100_000), ("w2", 20_000), ("w3", 2_000), ("w4", 500), ("w5", 50)],
            1e-2,
        ),
        (&[("common", 1), ("rest", 99)], 1e-4),
    ];
    let mut rng = seed::stream(root_seed, seed::SUBSAMPLE_STREAM);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for (counts, t) in settings {
        let vocab = Vocabulary::from_counts(counts.iter().copied(), 1).map_err(|e| e.to_string())?;
        for &(symbol, _) in counts {
            let id = vocab.id(symbol).unwrap();
            let f = vocab.frequency(id);
            let p = pairgen::subsample_keep_probability(f, t);
            let law = (t / f).sqrt().min(1.0);
            if (p - law).abs() > 1e-15 {
                return Err(format!("{symbol}: keep probability {p}, law gives {law}"));
            }
            let tokens = std::iter::repeat_n(symbol, draws_per_word as usize);
            let kept = pairgen::filter_tokens(tokens, &vocab, t, &mut rng).len() as u64;
            let z = z_score(kept, draws_per_word, p);
            if z > 3.0 {
                return Err(format!("{symbol} (f {f:.4}, t {t}): kept {kept}/{draws_per_word}, p {p:.4}, |z| {z:.2}"));
            }
            worst = worst.max(z);
            cases += 1;
        }
    }
    Ok(format!("max |z| {worst:.2} over {cases} (f, t) cases x {draws_per_word} draws"))
}

pub fn noise_frequencies(draws: u64, root_seed: u64) -> Check {
    let counts: Vec<(String, u64)> = (0..50u64).map(|i| (format!("c{i}"), 1 + i * i * 7 + (i % 3) * 100)).collect();
    let vocab = Vocabulary::from_counts(counts.iter().map(|(s, c)| (s.as_str(), *c)), 1).map_err(|e| e.to_string())?;
    let table = NoiseTable::new(&vocab, 0.75).map_err(|e| e.to_string())?;

    let norm: f64 = vocab.counts().iter().map(|&c| (c as f64).powf(0.75)).sum();
    for (id, &c) in vocab.counts().iter().enumerate() {
        let law = (c as f64).powf(0.75) / norm;
        if (table.probabilities()[id] - law).abs() > 1e-12 {
            return Err(format!("table probability of {} differs from the law", vocab.symbol(id as u32)));
        }
    }

    let mut rng = seed::stream(root_seed, seed::NEGATIVE_STREAM);
    let mut hist = vec![0u64; vocab.len()];
    for _ in 0..draws {
        hist[table.sample(&mut rng) as usize] += 1;
    }
    multinomial_verdict(&hist, table.probabilities(), &format!("{} contexts", vocab.len()))
}

// ---------------------------------------------------------------------------
// Synthetic-corpus experiments

/// Shared hyperparameters of the desk-scale experiments.
pub fn experiment_configs(seed: u64, inject: bool) -> (PairGenConfig, TrainConfig) {
    (
        PairGenConfig {
            min_count: 5,
            subsample_t: 1e-3,
            max_window: 5,
            seed,
            inject_ontology: inject,
        },
        TrainConfig {
            dim: 50,
            negatives: 5,
            epochs: 5,
            seed,
            ..TrainConfig::default()
        },
    )
}

pub fn train_on(
    corpus: &[Vec<String>],
    concepts: Option<&ConceptMap>,
    pairs: &PairGenConfig,
    train: &TrainConfig,
) -> (pairgen::PairSet, sgns::TrainedModel) {
    let mut set = pairgen::pair_stream(corpus, concepts, pairs).expect("pair generation");
    let (model, _) = sgns::train(&mut set.pairs, &set.words, &set.contexts, train).expect("training");
    (set, model)
}

/// Text-only vs injected Spearman on the knowledge fixture, per seed.
pub fn knowledge_injection(seeds: impl IntoIterator<Item = u64>) -> Vec<(u64, f64, f64)> {
    let corpus = pairgen::read_corpus(&fixture("knowledge_corpus.txt")).unwrap();
    let concepts = ConceptMap::from_file(&fixture("knowledge_concepts.tsv"), '\t').unwrap();
    let truth = eval::read_dataset(&fixture("knowledge_similarity.csv"), &DatasetLayout::Generic, None).unwrap();
    let rules = NormalizationRules::plain();

    seeds
        .into_iter()
        .map(|seed| {
            let score = |inject: bool| {
                let (pc, tc) = experiment_configs(seed, inject);
                let (_, model) = train_on(&corpus, Some(&concepts), &pc, &tc);
                let report = eval::evaluate("knowledge", &model.words, &truth, &rules).unwrap();
                report.spearman.unwrap_or(f64::NEG_INFINITY)
            };
            (seed, score(false), score(true))
        })
        .collect()
}

pub fn planted_triples() -> Vec<[String; 3]> {
    std::fs::read_to_string(fixture("distributional_triples.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            [f[0].to_owned(), f[1].to_owned(), f[2].to_owned()]
        })
        .collect()
}

/// Cosines of the planted triples and the rank correlation between
/// trained `w·c` and corpus PMI over observed pairs.
pub struct Distributional {
    pub triples: Vec<([String; 3], f64, f64)>,
    pub pmi_rho: f64,
    pub observed: usize,
}

pub fn distributional(seed: u64) -> Distributional {
    let corpus = pairgen::read_corpus(&fixture("distributional_corpus.txt")).unwrap();
    let (pc, mut tc) = experiment_configs(seed, false);
    tc.epochs = 10;
    let (set, model) = train_on(&corpus, None, &pc, &tc);

    let cos = |a: &str, b: &str| eval::cosine(model.words.get(a).unwrap(), model.words.get(b).unwrap()).unwrap();
    let triples = planted_triples()
        .into_iter()
        .map(|t| {
            let (shared, unrelated) = (cos(&t[0], &t[1]), cos(&t[0], &t[2]));
            (t, shared, unrelated)
        })
        .collect();

    let mut joint: HashMap<(u32, u32), u64> = HashMap::new();
    let mut word_marg = vec![0u64; set.words.len()];
    let mut ctx_marg = vec![0u64; set.contexts.len()];
    for p in &set.pairs {
        *joint.entry((p.word, p.context)).or_default() += 1;
        word_marg[p.word as usize] += 1;
        ctx_marg[p.context as usize] += 1;
    }
    let n = set.pairs.len() as f64;
    let mut keys: Vec<_> = joint.into_iter().collect();
    keys.sort_unstable();
    let (pmi, score): (Vec<f64>, Vec<f64>) = keys
        .iter()
        .map(|&((w, c), k)| {
            let pmi = (k as f64 * n / (word_marg[w as usize] as f64 * ctx_marg[c as usize] as f64)).ln();
            let wv = model.words.get(set.words.symbol(w)).unwrap();
            let cv = model.contexts.get(set.contexts.symbol(c)).unwrap();
            (pmi, dot(wv, cv))
        })
        .unzip();
    Distributional {
        triples,
        pmi_rho: eval::spearman(&pmi, &score).unwrap(),
        observed: keys.len(),
    }
}

// ---------------------------------------------------------------------------
// Pipeline

pub fn pipeline_config(output_dir: &Path, seed: u64) -> RunConfig {
    RunConfig {
        version: pipeline::CONFIG_VERSION,
        seed,
        output_dir: output_dir.to_owned(),
        raw_corpus: Some(fixture("notes.tsv")),
        corpus: None,
        concepts: Some(fixture("notes_concepts.tsv")),
        normalize: NormalizeSection {
            delimiter: Some('\t'),
            rules: NormalizationRules::default(),
        },
        pairs: PairGenConfig {
            min_count: 2,
            subsample_t: 1e-3,
            max_window: 5,
            seed,
            inject_ontology: true,
        },
        train: TrainConfig {
            dim: 32,
            negatives: 5,
            epochs: 3,
            seed,
            ..TrainConfig::default()
        },
        eval: EvalSection {
            datasets: vec![DatasetSpec {
                name: "notes".into(),
                path: fixture("notes_judgments.csv"),
                layout: "generic".into(),
                score_column: None,
            }],
        },
    }
}

/// Runs the pipeline twice into fresh directories and compares the
/// vector and report bytes.
pub fn pipeline_determinism(seed: u64) -> Check {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut outputs = Vec::new();
    for dir in &dirs {
        let out = pipeline::run_pipeline(pipeline_config(dir.path(), seed)).map_err(|e| e.to_string())?;
        let vectors = std::fs::read(&out.vectors).unwrap();
        let report = std::fs::read(out.report.as_ref().unwrap()).unwrap();
        outputs.push((vectors, report, out.reports[0].spearman));
    }
    if outputs[0].0 != outputs[1].0 {
        return Err("vector files differ".into());
    }
    if outputs[0].1 != outputs[1].1 {
        return Err("reports differ".into());
    }
    Ok(format!(
        "{} vector bytes and {} report bytes identical (spearman {:?})",
        outputs[0].0.len(),
        outputs[0].1.len(),
        outputs[0].2
    ))
}

// ---------------------------------------------------------------------------
// Formats

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, dim: usize) -> EmbeddingMatrix {
    let rows: Vec<(String, Vec<f64>)> = (0..rows)
        .map(|i| {
            // Nine significant digits keep the absolute error under 1e-6
            // while |v| < 2000, well past any trained embedding.
            let scale = 10f64.powi(rng.gen_range(-6..=2));
            (format!("w{i}"), (0..dim).map(|_| rng.gen_range(-1.0..1.0) * scale).collect())
        })
        .collect();
    EmbeddingMatrix::from_rows(rows).unwrap()
}

pub fn text_roundtrip(instances: usize, root_seed: u64) -> Check {
    let mut rng = seed::stream(root_seed, "test.roundtrip");
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let (rows, dim) = (rng.gen_range(1..20), rng.gen_range(1..40));
        let m = random_matrix(&mut rng, rows, dim);
        let mut buf = Vec::new();
        vectors::write_text_to(&m, &mut buf).map_err(|e| e.to_string())?;
        let back = vectors::read_text_from(&buf[..], "roundtrip").map_err(|e| e.to_string())?;
        if back.symbols() != m.symbols() || back.dim() != m.dim() {
            return Err("symbols or dimension changed".into());
        }
        for (a, b) in m.as_slice().iter().zip(back.as_slice()) {
            worst = worst.max((a - b).abs());
        }
    }
    if worst <= 1e-6 {
        Ok(format!("max component error {worst:.1e}"))
    } else {
        Err(format!("max component error {worst:.1e}"))
    }
}

pub fn hand_built_expected() -> Vec<(&'static str, Vec<f64>)> {
    vec![
        ("alpha", vec![1.0, -0.5, 0.25, 2.0]),
        ("CUI:C0027051", vec![0.0, -0.0, 1024.0, -3.75]),
        ("beta", vec![0.125, f64::from(1e-3f32), -65536.0, 7.5]),
    ]
}

pub fn hand_built_binary() -> Check {
    let m = vectors::read(&fixture("hand_built.bin"), VectorFormat::Binary).map_err(|e| e.to_string())?;
    let expected = hand_built_expected();
    if m.len() != expected.len() || m.dim() != 4 {
        return Err(format!("shape {}x{}", m.len(), m.dim()));
    }
    for (symbol, values) in &expected {
        let row = m.get(symbol).ok_or_else(|| format!("missing {symbol}"))?;
        if row != values.as_slice() {
            return Err(format!("{symbol}: {row:?} != {values:?}"));
        }
    }
    Ok("3 rows parsed exactly".into())
}

/// Malformed files with their format and a fragment of the diagnostic.
pub const MALFORMED: &[(&str, VectorFormat, &str)] = &[
    ("text_empty.txt", VectorFormat::Text, "empty file"),
    ("text_bad_header.txt", VectorFormat::Text, "malformed header"),
    ("text_short_row.txt", VectorFormat::Text, "line 3: row \"b\" has 2 values, header declares 3"),
    ("text_bad_number.txt", VectorFormat::Text, "line 2: invalid number \"x1\""),
    ("text_missing_rows.txt", VectorFormat::Text, "header declares 3 rows, found 2"),
    ("text_extra_rows.txt", VectorFormat::Text, "more rows than the 1 declared"),
    ("text_duplicate.txt", VectorFormat::Text, "line 3: duplicate symbol \"a\""),
    ("text_nan.txt", VectorFormat::Text, "non-finite value"),
    ("bin_bad_header.bin", VectorFormat::Binary, "malformed header"),
    ("bin_truncated.bin", VectorFormat::Binary, "truncated file"),
    ("bin_trailing.bin", VectorFormat::Binary, "trailing data"),
    ("bin_is_text.bin", VectorFormat::Binary, "looks like text"),
    ("bin_nan.bin", VectorFormat::Binary, "non-finite value in row 1"),
];

pub fn malformed_rejected() -> Check {
    for &(name, format, fragment) in MALFORMED {
        let path = fixture(&format!("malformed/{name}"));
        match vectors::read(&path, format) {
            Ok(_) => return Err(format!("{name} was accepted")),
            Err(e) => {
                let msg = e.to_string();
                if !msg.contains(fragment) || !msg.contains(name) {
                    return Err(format!("{name}: diagnostic {msg:?} lacks {fragment:?} or the file name"));
                }
            }
        }
    }
    Ok(format!("{} malformed files rejected with diagnostics", MALFORMED.len()))
}
