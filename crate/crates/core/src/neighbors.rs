use std::cmp::Ordering;

use crate::embedding::{dot, norm, EmbeddingMatrix};
use crate::error::{Error, Result};

/// The `k` rows most cosine-similar to `query`, excluding the query
/// itself. Ties keep matrix order; zero rows are never returned. A `k`
/// beyond the number of candidates returns them all.
pub fn neighbors(matrix: &EmbeddingMatrix, query: &str, k: usize) -> Result<Vec<(String, f64)>> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let qid = matrix
        .id(query)
        .ok_or_else(|| Error::OutOfVocabulary(query.to_owned()))?;
    let q = matrix.row(qid);
    let qn = norm(q);
    if qn == 0.0 {
        return Err(Error::UndefinedSimilarity);
    }

    let mut scored: Vec<(u32, f64)> = (0..matrix.len() as u32)
        .filter(|&id| id != qid)
        .filter_map(|id| {
            let row = matrix.row(id);
            let n = norm(row);
            (n > 0.0).then(|| (id, dot(q, row) / (qn * n)))
        })
        .collect();
    // Stable sort keeps matrix order among equal scores.
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal));
    scored.truncate(k);
    Ok(scored
        .into_iter()
        .map(|(id, s)| (matrix.symbols()[id as usize].clone(), s))
        .collect())
}
