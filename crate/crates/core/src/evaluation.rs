//! Pairwise cosine scoring and rank-based ROC AUC.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;

/// Norms below this make cosine similarity 0.
pub const COSINE_ZERO_NORM: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EvalPair {
    pub doc_a: String,
    pub doc_b: String,
    pub label: bool,
}

impl EvalPair {
    pub fn new(doc_a: impl Into<String>, doc_b: impl Into<String>, label: bool) -> Self {
        EvalPair { doc_a: doc_a.into(), doc_b: doc_b.into(), label }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub auc: f64,
    pub positives: usize,
    pub negatives: usize,
    /// Pairs that referenced a missing or skipped document.
    pub skipped_pairs: usize,
}

pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: u.len(), found: v.len() });
    }
    let (nu, nv) = (linalg::norm(u), linalg::norm(v));
    if nu < COSINE_ZERO_NORM || nv < COSINE_ZERO_NORM {
        return Ok(0.0);
    }
    Ok((linalg::dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// Something that resolves a document id to its embedding vector.
pub trait EmbeddingLookup: Sync {
    fn vector(&self, id: &str) -> Option<&[f64]>;
}

impl EmbeddingLookup for HashMap<String, Vec<f64>> {
    fn vector(&self, id: &str) -> Option<&[f64]> {
        self.get(id).map(Vec::as_slice)
    }
}

impl EmbeddingLookup for BTreeMap<String, Vec<f64>> {
    fn vector(&self, id: &str) -> Option<&[f64]> {
        self.get(id).map(Vec::as_slice)
    }
}

impl EmbeddingLookup for HashMap<&str, &[f64]> {
    fn vector(&self, id: &str) -> Option<&[f64]> {
        self.get(id).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPair {
    pub doc_a: String,
    pub doc_b: String,
    pub label: bool,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoredPairs {
    pub rows: Vec<ScoredPair>,
    pub skipped: usize,
}

impl ScoredPairs {
    pub fn score_labels(&self) -> Vec<(f64, bool)> {
        self.rows.iter().map(|r| (r.score, r.label)).collect()
    }
}

/// Cosine similarity of every pair whose documents both resolve; the others
/// are counted in `skipped`. Output keeps pair order.
pub fn score_pairs<E: EmbeddingLookup + ?Sized>(embeddings: &E, pairs: &[EvalPair]) -> Result<ScoredPairs> {
    let scored: Vec<Option<Result<ScoredPair>>> = pairs
        .par_iter()
        .map(|p| {
            let (a, b) = (embeddings.vector(&p.doc_a)?, embeddings.vector(&p.doc_b)?);
            Some(cosine_similarity(a, b).map(|score| ScoredPair {
                doc_a: p.doc_a.clone(),
                doc_b: p.doc_b.clone(),
                label: p.label,
                score,
            }))
        })
        .collect();
    let mut out = ScoredPairs::default();
    for s in scored {
        match s {
            Some(r) => out.rows.push(r?),
            None => out.skipped += 1,
        }
    }
    Ok(out)
}

/// Mann–Whitney ROC AUC with average ranks for tied scores:
/// `(Σ positive ranks − P(P+1)/2) / (P·N)`.
///
/// Rank sums are kept as exact doubled integers so the result equals the
/// pair-counting definition bit for bit.
pub fn roc_auc(scored: &[(f64, bool)]) -> Result<EvalResult> {
    let positives = scored.iter().filter(|(_, l)| *l).count();
    let negatives = scored.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::UndefinedAuc { positives, negatives });
    }
    if scored.iter().any(|(s, _)| s.is_nan()) {
        return Err(Error::InvalidParameter("NaN score".into()));
    }
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&i, &j| scored[i].0.total_cmp(&scored[j].0).then(i.cmp(&j)));

    // Twice the rank sum of positives; ranks are 1-based.
    let mut twice_rank_sum: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        let score = scored[order[start]].0;
        let mut end = start;
        while end + 1 < order.len() && scored[order[end + 1]].0 == score {
            end += 1;
        }
        // Average rank of positions start..=end is (start + end + 2) / 2.
        let pos_in_tie = order[start..=end].iter().filter(|&&i| scored[i].1).count() as u128;
        twice_rank_sum += pos_in_tie * (start + end + 2) as u128;
        start = end + 1;
    }
    let (p, n) = (positives as u128, negatives as u128);
    let numerator = twice_rank_sum - p * (p + 1);
    let auc = numerator as f64 / (2 * p * n) as f64;
    Ok(EvalResult { auc, positives, negatives, skipped_pairs: 0 })
}

/// Scores `pairs` and computes their AUC, reporting unresolvable pairs.
pub fn evaluate<E: EmbeddingLookup + ?Sized>(embeddings: &E, pairs: &[EvalPair]) -> Result<(EvalResult, ScoredPairs)> {
    let scored = score_pairs(embeddings, pairs)?;
    let mut result = roc_auc(&scored.score_labels())?;
    result.skipped_pairs = scored.skipped;
    Ok((result, scored))
}

/// Unordered distinct pairs of `(id, group)` items labeled by group equality.
///
/// When `count` is below the number of distinct pairs, `count` of them are
/// drawn uniformly without replacement using `seed`; otherwise every pair is
/// returned. Pairs come out in enumeration order `(0,1), (0,2), …, (1,2), …`.
pub fn sample_pairs<I: AsRef<str>, G: PartialEq>(
    ids_with_groups: &[(I, G)],
    count: usize,
    seed: u64,
) -> Result<Vec<EvalPair>> {
    let n = ids_with_groups.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 ids, got {n}")));
    }
    if count == 0 {
        return Err(Error::InvalidParameter("pair count must be at least 1".into()));
    }
    let total = n * (n - 1) / 2;
    let make = |i: usize, j: usize| {
        let (a, b) = (&ids_with_groups[i], &ids_with_groups[j]);
        EvalPair::new(a.0.as_ref(), b.0.as_ref(), a.1 == b.1)
    };
    if count >= total {
        let mut out = Vec::with_capacity(total);
        for i in 0..n {
            for j in i + 1..n {
                out.push(make(i, j));
            }
        }
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = rand::seq::index::sample(&mut rng, total, count).into_vec();
    picks.sort_unstable();

    // Walk rows i, where row i holds pairs (i, i+1..n) starting at linear
    // offset i*n - i*(i+1)/2.
    let mut out = Vec::with_capacity(count);
    let mut row = 0usize;
    let mut row_start = 0usize;
    for k in picks {
        while k >= row_start + (n - row - 1) {
            row_start += n - row - 1;
            row += 1;
        }
        out.push(make(row, row + 1 + (k - row_start)));
    }
    Ok(out)
}

/// Reads a `doc_a,doc_b,label` CSV with header.
pub fn read_pairs<R: Read>(r: R) -> Result<Vec<EvalPair>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["doc_a", "doc_b", "label"] {
        return Err(Error::Format { line: 1, message: format!("expected header doc_a,doc_b,label, got {:?}", headers) });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let label = match &rec[2] {
            "1" => true,
            "0" => false,
            other => return Err(Error::Format { line, message: format!("label must be 0 or 1, got {other:?}") }),
        };
        if rec[0] == rec[1] {
            return Err(Error::Format { line, message: format!("pair repeats document {:?}", &rec[0]) });
        }
        out.push(EvalPair::new(&rec[0], &rec[1], label));
    }
    Ok(out)
}

pub fn write_pairs<W: Write>(pairs: &[EvalPair], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["doc_a", "doc_b", "label"])?;
    for p in pairs {
        out.write_record([p.doc_a.as_str(), p.doc_b.as_str(), if p.label { "1" } else { "0" }])?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `doc_a,doc_b,label,score`.
pub fn write_scored<W: Write>(rows: &[ScoredPair], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["doc_a", "doc_b", "label", "score"])?;
    for r in rows {
        out.write_record([
            r.doc_a.as_str(),
            r.doc_b.as_str(),
            if r.label { "1" } else { "0" },
            &format!("{}", r.score),
        ])?;
    }
    out.flush()?;
    Ok(())
}
