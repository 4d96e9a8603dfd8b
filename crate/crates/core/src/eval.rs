//! Intrinsic evaluation against expert similarity judgments.
//!
//! Each judgment pairs two phrases with an expert score. A phrase is
//! embedded as the mean of its in-vocabulary token vectors, the two sides
//! are compared by cosine similarity, and the model is scored by the
//! Spearman rank correlation between cosines and expert scores. Pairs
//! that cannot be embedded are skipped and reported.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::embedding::{dot, norm, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::fsutil;
use crate::normalize::{NormalizationRules, Normalizer};

/// Mean of the rows of the in-vocabulary tokens of `phrase`.
pub fn phrase_embedding<S: AsRef<str>>(phrase: &[S], matrix: &EmbeddingMatrix) -> Result<Vec<f64>> {
    let mut sum = vec![0.0; matrix.dim()];
    let mut n = 0usize;
    for token in phrase {
        if let Some(row) = matrix.get(token.as_ref()) {
            for (s, v) in sum.iter_mut().zip(row) {
                *s += v;
            }
            n += 1;
        }
    }
    if n == 0 {
        let joined: Vec<&str> = phrase.iter().map(AsRef::as_ref).collect();
        return Err(Error::NoEmbedding(joined.join(" ")));
    }
    sum.iter_mut().for_each(|s| *s /= n as f64);
    Ok(sum)
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    let nu = norm(u);
    let nv = norm(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::UndefinedSimilarity);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));

    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // Positions i..j hold ranks i+1..=j.
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero rank variance".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::UndefinedCorrelation("fewer than 2 observations".into()));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::UndefinedCorrelation("NaN observation".into()));
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// One expert judgment.
#[derive(Clone, Debug, PartialEq)]
pub struct JudgmentPair {
    pub phrase_a: String,
    pub phrase_b: String,
    pub score: f64,
}

/// Column layout of a judgment file.
#[derive(Clone, Debug, PartialEq)]
pub enum DatasetLayout {
    /// Header `phrase_a,phrase_b,score`.
    Generic,
    /// MayoSRS: terms in `Term1`/`Term2`, score in `Mean`.
    MayoSrs,
    /// MiniMayoSRS: terms in `Term1`/`Term2`, score in the physician or
    /// coder column.
    MiniMayoSrs(Judges),
}

#[derive(Clone, Copy, Debug, Eq, PartialEq)]
pub enum Judges {
    Physicians,
    Coders,
}

impl FromStr for DatasetLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generic" => Ok(DatasetLayout::Generic),
            "mayosrs" => Ok(DatasetLayout::MayoSrs),
            "minimayosrs" | "minimayosrs-physicians" | "minimayosrs-doctors" => {
                Ok(DatasetLayout::MiniMayoSrs(Judges::Physicians))
            }
            "minimayosrs-coders" => Ok(DatasetLayout::MiniMayoSrs(Judges::Coders)),
            other => Err(Error::Config(format!("unknown dataset layout {other:?}"))),
        }
    }
}

impl DatasetLayout {
    fn columns(&self) -> (&'static [&'static str], &'static [&'static str], &'static [&'static str]) {
        const TERM1: &[&str] = &["term1", "term 1", "concept1", "concept 1"];
        const TERM2: &[&str] = &["term2", "term 2", "concept2", "concept 2"];
        match self {
            DatasetLayout::Generic => (&["phrase_a"], &["phrase_b"], &["score"]),
            DatasetLayout::MayoSrs => (TERM1, TERM2, &["mean", "score"]),
            DatasetLayout::MiniMayoSrs(Judges::Physicians) => {
                (TERM1, TERM2, &["physician", "physicians", "doctors", "physician mean"])
            }
            DatasetLayout::MiniMayoSrs(Judges::Coders) => {
                (TERM1, TERM2, &["coder", "coders", "coder mean"])
            }
        }
    }
}

fn find_column(headers: &csv::StringRecord, names: &[&str], score_override: Option<&str>) -> Option<usize> {
    let wanted: Vec<String> = match score_override {
        Some(name) => vec![name.trim().to_lowercase()],
        None => names.iter().map(|s| s.to_string()).collect(),
    };
    headers
        .iter()
        .position(|h| wanted.iter().any(|w| h.trim().to_lowercase() == *w))
}

/// Reads a comma-separated judgment file with a header row.
/// `score_column` overrides the layout's score column by header name.
pub fn read_dataset(path: &Path, layout: &DatasetLayout, score_column: Option<&str>) -> Result<Vec<JudgmentPair>> {
    let name = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(fsutil::open(path)?);
    let csv_err = |e: csv::Error| {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        Error::format(format!("{name}: line {line}"), e.to_string())
    };
    let headers = reader.headers().map_err(csv_err)?.clone();
    let (a_names, b_names, score_names) = layout.columns();
    let missing = |what: &str| {
        Error::format(
            format!("{name}: line 1"),
            format!("no {what} column in header {:?}", headers.iter().collect::<Vec<_>>()),
        )
    };
    let a_col = find_column(&headers, a_names, None).ok_or_else(|| missing("first phrase"))?;
    let b_col = find_column(&headers, b_names, None).ok_or_else(|| missing("second phrase"))?;
    let s_col = find_column(&headers, score_names, score_column).ok_or_else(|| missing("score"))?;

    let mut pairs = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let score_text = &record[s_col];
        let score: f64 = score_text.parse().map_err(|_| {
            Error::format(format!("{name}: line {line}"), format!("invalid score {score_text:?}"))
        })?;
        pairs.push(JudgmentPair {
            phrase_a: record[a_col].to_owned(),
            phrase_b: record[b_col].to_owned(),
            score,
        });
    }
    Ok(pairs)
}

/// A pair that could not be scored.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkippedPair {
    pub phrase_a: String,
    pub phrase_b: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub dataset: String,
    /// Absent when fewer than two pairs could be scored or a side of the
    /// correlation is constant.
    pub spearman: Option<f64>,
    pub pairs_total: usize,
    pub pairs_scored: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub undefined_reason: Option<String>,
    pub skipped: Vec<SkippedPair>,
}

/// Cosines are ranked at 12 decimal places so that rounding noise in the
/// last bits (e.g. after rescaling the vectors) cannot break or create ties.
fn quantize(cos: f64) -> f64 {
    (cos * 1e12).round() / 1e12
}

/// Scores `matrix` against `dataset`; phrases are normalized with `rules`
/// first.
pub fn evaluate(
    name: &str,
    matrix: &EmbeddingMatrix,
    dataset: &[JudgmentPair],
    rules: &NormalizationRules,
) -> Result<EvaluationReport> {
    let normalizer = Normalizer::new(rules)?;
    let mut cosines = Vec::with_capacity(dataset.len());
    let mut scores = Vec::with_capacity(dataset.len());
    let mut skipped = Vec::new();

    for pair in dataset {
        let similarity = phrase_embedding(&normalizer.normalize(&pair.phrase_a), matrix)
            .and_then(|a| Ok((a, phrase_embedding(&normalizer.normalize(&pair.phrase_b), matrix)?)))
            .and_then(|(a, b)| cosine(&a, &b));
        match similarity {
            Ok(cos) => {
                cosines.push(quantize(cos));
                scores.push(pair.score);
            }
            Err(e) => skipped.push(SkippedPair {
                phrase_a: pair.phrase_a.clone(),
                phrase_b: pair.phrase_b.clone(),
                reason: e.to_string(),
            }),
        }
    }
    if !skipped.is_empty() {
        log::warn!("{name}: skipped {} of {} pairs", skipped.len(), dataset.len());
    }

    let (spearman, undefined_reason) = match spearman(&cosines, &scores) {
        Ok(r) => (Some(r), None),
        Err(Error::UndefinedCorrelation(reason)) => (
            None,
            Some(format!("{reason} ({} scorable pairs)", cosines.len())),
        ),
        Err(e) => return Err(e),
    };
    Ok(EvaluationReport {
        dataset: name.to_owned(),
        spearman,
        pairs_total: dataset.len(),
        pairs_scored: cosines.len(),
        undefined_reason,
        skipped,
    })
}

#[derive(Serialize)]
struct ReportFile<'a> {
    model: &'a str,
    datasets: &'a [EvaluationReport],
}

/// Machine-readable report (TOML).
pub fn write_report(path: &Path, model: &str, reports: &[EvaluationReport]) -> Result<()> {
    let text = toml::to_string(&ReportFile {
        model,
        datasets: reports,
    })
    .map_err(|e| Error::Config(e.to_string()))?;
    fsutil::write_atomic(path, |w| Ok(w.write_all(text.as_bytes())?))
}

/// One-row table: the model name, then one coefficient per dataset.
pub fn format_table(model: &str, reports: &[EvaluationReport]) -> String {
    let mut header = format!("| {:<20} |", "");
    let mut row = format!("| {model:<20} |");
    let mut coverage = format!("| {:<20} |", "scored / total");
    for r in reports {
        let width = r.dataset.len().max(14);
        let value = r.spearman.map_or("undefined".to_owned(), |s| format!("{s:.3}"));
        let _ = write!(header, " {:<width$} |", r.dataset);
        let _ = write!(row, " {value:<width$} |");
        let _ = write!(coverage, " {:<width$} |", format!("{}/{}", r.pairs_scored, r.pairs_total));
    }
    format!("{header}\n{row}\n{coverage}\n")
}
