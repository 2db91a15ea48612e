//! Document embeddings in the sum, center and delta forms.
//!
//! All three build an unnormalized coefficient vector `c` from the document's
//! term statistics and return `u = c / ‖c‖`, the unit vector that maximizes
//! `c · u`:
//!
//! | form   | `c`                                                     |
//! |--------|---------------------------------------------------------|
//! | sum    | `Σ_{i∈V_d} wᵢ tfᵢ vᵢ`                                    |
//! | center | `Σ_{i∈V_d} wᵢ tfᵢ vᵢ − Σ_{i∈V} wᵢ tf_ic vᵢ`               |
//! | delta  | `Σ_{i∈V_d} wᵢ (tfᵢ − tf_ic) vᵢ`                          |
//!
//! Sums over a document run in token order; the corpus center runs over the
//! corpus vocabulary in token order. Both orders are fixed, so results are
//! reproducible bit-for-bit regardless of batch parallelism.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus_stats::{CorpusStats, DocTermStats};
use crate::error::{Error, Result};
use crate::linalg;
use crate::vector_store::VectorStore;
use crate::weighting::WeightScheme;

/// Below this coefficient norm an embedding is refused.
pub const ZERO_NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormKind {
    Sum,
    Center,
    Delta,
}

impl FormKind {
    pub fn name(self) -> &'static str {
        match self {
            FormKind::Sum => "sum",
            FormKind::Center => "center",
            FormKind::Delta => "delta",
        }
    }
}

impl FromStr for FormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(FormKind::Sum),
            "center" => Ok(FormKind::Center),
            "delta" => Ok(FormKind::Delta),
            other => Err(Error::InvalidParameter(format!("unknown embedding form {other:?}"))),
        }
    }
}

impl fmt::Display for FormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingForm {
    pub kind: FormKind,
    /// Center form only: restrict the corpus center to words with
    /// `tf_ic ≥ threshold`.
    pub center_threshold: Option<f64>,
}

impl EmbeddingForm {
    pub fn new(kind: FormKind) -> Self {
        EmbeddingForm {
            kind,
            center_threshold: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.center_threshold {
            if self.kind != FormKind::Center {
                return Err(Error::InvalidParameter(
                    "center_threshold applies to the center form only".into(),
                ));
            }
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "center_threshold must lie in (0, 1), got {t}"
                )));
            }
        }
        Ok(())
    }
}

impl From<FormKind> for EmbeddingForm {
    fn from(kind: FormKind) -> Self {
        EmbeddingForm::new(kind)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocEmbedding {
    pub doc_id: String,
    /// Unnormalized `c`.
    pub coefficients: Vec<f64>,
    /// `c / ‖c‖`, or its projection after common-component removal.
    pub vector: Vec<f64>,
    /// Set once the first principal component has been projected out; the
    /// vector is then no longer unit norm nor parallel to `coefficients`.
    pub common_component_removed: bool,
}

impl DocEmbedding {
    fn from_coefficients(doc_id: &str, coefficients: Vec<f64>) -> Result<Self> {
        let vector = renormalize(&coefficients)?;
        Ok(DocEmbedding {
            doc_id: doc_id.to_string(),
            coefficients,
            vector,
            common_component_removed: false,
        })
    }
}

/// `c / ‖c‖`
pub fn renormalize(c: &[f64]) -> Result<Vec<f64>> {
    let norm = linalg::norm(c);
    if norm.is_nan() || norm < ZERO_NORM_TOLERANCE {
        return Err(Error::ZeroNormEmbedding { norm });
    }
    Ok(c.iter().map(|x| x / norm).collect())
}

/// The document-independent term `Σ wᵢ tf_ic vᵢ`, computed once per
/// (store, corpus, scheme) and reused.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusCenter {
    center: Vec<f64>,
    fingerprint: String,
    threshold: Option<f64>,
}

impl CorpusCenter {
    pub fn build(store: &VectorStore, corpus: &CorpusStats, scheme: &WeightScheme) -> Result<Self> {
        Self::build_with_threshold(store, corpus, scheme, None)
    }

    /// Sums only words whose corpus frequency is at least `threshold`.
    pub fn build_with_threshold(
        store: &VectorStore,
        corpus: &CorpusStats,
        scheme: &WeightScheme,
        threshold: Option<f64>,
    ) -> Result<Self> {
        scheme.validate()?;
        let mut center = vec![0.0; store.dimension()];
        let mut shared = 0usize;
        for (word, _) in corpus.iter() {
            let Some(v) = store.lookup(word) else { continue };
            shared += 1;
            let tf = corpus.corpus_tf(word).expect("iterating counted words");
            if threshold.is_some_and(|t| tf < t) {
                continue;
            }
            let w = scheme.weight(word, corpus)?;
            linalg::axpy(&mut center, w * tf, v);
        }
        if shared == 0 {
            return Err(Error::NoSharedTokens);
        }
        Ok(CorpusCenter {
            center,
            fingerprint: scheme.fingerprint(),
            threshold,
        })
    }

    pub fn vector(&self) -> &[f64] {
        &self.center
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn threshold(&self) -> Option<f64> {
        self.threshold
    }
}

fn weighted_sum(
    doc: &DocTermStats,
    store: &VectorStore,
    corpus: &CorpusStats,
    scheme: &WeightScheme,
    coefficient: impl Fn(f64, f64) -> f64,
) -> Result<Vec<f64>> {
    if doc.is_empty() {
        return Err(Error::EmptyDocument);
    }
    scheme.validate()?;
    let mut c = vec![0.0; store.dimension()];
    for e in doc.entries() {
        let v = store
            .lookup(&e.token)
            .ok_or_else(|| Error::UnknownWord(e.token.clone()))?;
        let w = scheme.weight(&e.token, corpus)?;
        linalg::axpy(&mut c, w * coefficient(e.tf, e.corpus_tf), v);
    }
    Ok(c)
}

/// Weighted sum `c = Σ wᵢ tfᵢ vᵢ`.
pub fn embed_sum(
    doc: &DocTermStats,
    store: &VectorStore,
    corpus: &CorpusStats,
    scheme: &WeightScheme,
) -> Result<DocEmbedding> {
    let c = weighted_sum(doc, store, corpus, scheme, |tf, _| tf)?;
    DocEmbedding::from_coefficients(&doc.doc_id, c)
}

/// Weighted sum minus the corpus center.
pub fn embed_center(
    doc: &DocTermStats,
    store: &VectorStore,
    corpus: &CorpusStats,
    scheme: &WeightScheme,
    center: &CorpusCenter,
) -> Result<DocEmbedding> {
    let requested = scheme.fingerprint();
    if center.fingerprint != requested {
        return Err(Error::SchemeMismatch {
            built: center.fingerprint.clone(),
            requested,
        });
    }
    if center.center.len() != store.dimension() {
        return Err(Error::DimensionMismatch {
            expected: store.dimension(),
            found: center.center.len(),
        });
    }
    let mut c = weighted_sum(doc, store, corpus, scheme, |tf, _| tf)?;
    linalg::axpy(&mut c, -1.0, &center.center);
    DocEmbedding::from_coefficients(&doc.doc_id, c)
}

/// `c = Σ_{i∈V_d} wᵢ (tfᵢ − tf_ic) vᵢ`.
pub fn embed_delta(
    doc: &DocTermStats,
    store: &VectorStore,
    corpus: &CorpusStats,
    scheme: &WeightScheme,
) -> Result<DocEmbedding> {
    let c = weighted_sum(doc, store, corpus, scheme, |tf, tf_c| tf - tf_c)?;
    DocEmbedding::from_coefficients(&doc.doc_id, c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipCause {
    EmptyDocument,
    ZeroNormEmbedding,
}

impl SkipCause {
    pub fn name(self) -> &'static str {
        match self {
            SkipCause::EmptyDocument => "empty_document",
            SkipCause::ZeroNormEmbedding => "zero_norm_embedding",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedDoc {
    pub doc_id: String,
    pub cause: SkipCause,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BatchOutput {
    pub embeddings: Vec<DocEmbedding>,
    pub skipped: Vec<SkippedDoc>,
}

/// Embeds every document, keeping input order. Documents that are empty or
/// whose coefficients cancel are listed in `skipped` instead of failing the
/// batch.
///
/// Each document is computed independently on the current rayon pool, so the
/// result does not depend on the number of threads.
pub fn embed_batch(
    docs: &[DocTermStats],
    form: &EmbeddingForm,
    scheme: &WeightScheme,
    store: &VectorStore,
    corpus: &CorpusStats,
) -> Result<BatchOutput> {
    form.validate()?;
    scheme.validate()?;
    let center = match form.kind {
        FormKind::Center => {
            match CorpusCenter::build_with_threshold(store, corpus, scheme, form.center_threshold) {
                Ok(c) => Some(c),
                // Then no document has an embeddable word either.
                Err(Error::NoSharedTokens) => None,
                Err(e) => return Err(e),
            }
        }
        _ => None,
    };

    let results: Vec<Result<DocEmbedding>> = docs
        .par_iter()
        .map(|doc| match (form.kind, &center) {
            (FormKind::Sum, _) => embed_sum(doc, store, corpus, scheme),
            (FormKind::Delta, _) => embed_delta(doc, store, corpus, scheme),
            (FormKind::Center, Some(center)) => embed_center(doc, store, corpus, scheme, center),
            (FormKind::Center, None) => Err(Error::EmptyDocument),
        })
        .collect();

    let mut out = BatchOutput::default();
    for (doc, r) in docs.iter().zip(results) {
        match r {
            Ok(e) => out.embeddings.push(e),
            Err(Error::EmptyDocument) => out.skipped.push(SkippedDoc {
                doc_id: doc.doc_id.clone(),
                cause: SkipCause::EmptyDocument,
            }),
            Err(Error::ZeroNormEmbedding { .. }) => out.skipped.push(SkippedDoc {
                doc_id: doc.doc_id.clone(),
                cause: SkipCause::ZeroNormEmbedding,
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Writes `doc_id dim f1 ... f_dim` per embedding.
pub fn write_embeddings<W: Write>(embeddings: &[DocEmbedding], mut w: W) -> Result<()> {
    for e in embeddings {
        write!(w, "{} {}", e.doc_id, e.vector.len())?;
        for x in &e.vector {
            write!(w, " {x}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses the format written by [`write_embeddings`] into `(doc_id, vector)`.
pub fn read_embeddings<R: std::io::BufRead>(r: R) -> Result<Vec<(String, Vec<f64>)>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fmt = |message: String| Error::Format { line: lineno, message };
        let mut fields = line.split_ascii_whitespace();
        let id = fields.next().ok_or_else(|| fmt("missing doc id".into()))?;
        let dim: usize = fields
            .next()
            .ok_or_else(|| fmt("missing dimension".into()))?
            .parse()
            .map_err(|_| fmt("bad dimension".into()))?;
        let v = fields
            .map(|f| f.parse::<f64>().map_err(|_| fmt(format!("bad component {f:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if v.len() != dim {
            return Err(fmt(format!("declared {dim} components, found {}", v.len())));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(fmt("non-finite component".into()));
        }
        out.push((id.to_string(), v));
    }
    Ok(out)
}

pub fn write_skip_report<W: Write>(skipped: &[SkippedDoc], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["doc_id", "cause"])?;
    for s in skipped {
        out.write_record([s.doc_id.as_str(), s.cause.name()])?;
    }
    out.flush()?;
    Ok(())
}
