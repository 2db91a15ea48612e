//! Python bindings for `docembed`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};

use docembed::{
    CorpusStats, DocTermStats, EmbeddingForm, Error, FormKind, TokenizerConfig, VectorFormat, WeightKind,
};
use pyo3::exceptions::{PyIOError, PyKeyError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } | Error::Stream(_) => PyIOError::new_err(e.to_string()),
        Error::UnknownWord(_) => PyKeyError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

/// Unit-normalized word vectors.
#[pyclass(name = "VectorStore", module = "docembed_py")]
pub struct PyVectorStore {
    inner: docembed::VectorStore,
}

#[pymethods]
impl PyVectorStore {
    /// Load a `word2vec-text` or `glove-text` file and normalize every vector.
    #[staticmethod]
    #[pyo3(signature = (path, format = "word2vec-text"))]
    fn load(path: &str, format: &str) -> PyResult<Self> {
        let format: VectorFormat = parse(format)?;
        let inner = docembed::load_vectors(path, format, None).and_then(|s| s.normalize()).map_err(to_py)?;
        Ok(PyVectorStore { inner })
    }

    #[staticmethod]
    fn from_dict(vectors: HashMap<String, Vec<f64>>) -> PyResult<Self> {
        let dim = vectors.values().next().map_or(0, Vec::len);
        let mut entries: Vec<(String, Vec<f64>)> = vectors.into_iter().collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let inner = docembed::VectorStore::from_entries(dim, entries).and_then(|s| s.normalize()).map_err(to_py)?;
        Ok(PyVectorStore { inner })
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn lookup(&self, word: &str) -> Option<Vec<f64>> {
        self.inner.lookup(word).map(<[f64]>::to_vec)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __contains__(&self, word: &str) -> bool {
        self.inner.contains(word)
    }
}

/// Term and document frequencies of a tokenized corpus.
#[pyclass(name = "CorpusStats", module = "docembed_py")]
pub struct PyCorpusStats {
    inner: CorpusStats,
}

#[pymethods]
impl PyCorpusStats {
    /// Tokenize each text with the default tokenizer and count.
    #[staticmethod]
    fn from_texts(texts: Vec<String>) -> Self {
        let cfg = TokenizerConfig::default();
        let inner = CorpusStats::from_documents(texts.iter().map(|t| docembed::tokenize(t, &cfg)));
        PyCorpusStats { inner }
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let f = File::open(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        let inner = CorpusStats::read_from(BufReader::new(f)).map_err(to_py)?;
        Ok(PyCorpusStats { inner })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        let f = File::create(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        self.inner.write_to(BufWriter::new(f)).map_err(to_py)
    }

    #[getter]
    fn doc_count(&self) -> u64 {
        self.inner.doc_count()
    }

    #[getter]
    fn total_tokens(&self) -> u64 {
        self.inner.total_tokens()
    }

    #[getter]
    fn vocabulary_size(&self) -> usize {
        self.inner.vocabulary_size()
    }

    fn corpus_tf(&self, word: &str) -> Option<f64> {
        self.inner.corpus_tf(word)
    }

    fn idf(&self, word: &str) -> PyResult<f64> {
        self.inner.idf(word).map_err(to_py)
    }
}

/// Per-word weighting: `idf`, `sif`, `subsample` or `unit`.
#[pyclass(name = "WeightScheme", module = "docembed_py", from_py_object)]
#[derive(Clone)]
pub struct PyWeightScheme {
    inner: docembed::WeightScheme,
}

#[pymethods]
impl PyWeightScheme {
    #[new]
    #[pyo3(signature = (kind = "idf", a = 1e-4, t = 1e-5, scaled_idf = false))]
    fn new(kind: &str, a: f64, t: f64, scaled_idf: bool) -> PyResult<Self> {
        let kind: WeightKind = parse(kind)?;
        let inner = docembed::WeightScheme { kind, a, t, scaled_idf };
        inner.validate().map_err(to_py)?;
        Ok(PyWeightScheme { inner })
    }

    fn weight(&self, word: &str, corpus: &PyCorpusStats) -> PyResult<f64> {
        self.inner.weight(word, &corpus.inner).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("WeightScheme({})", self.inner.fingerprint())
    }
}

/// Embed `(doc_id, text)` documents. Returns `(embeddings, skipped)` where
/// `embeddings` maps ids to vectors and `skipped` lists `(doc_id, cause)`.
#[pyfunction]
#[pyo3(signature = (docs, store, corpus, form = "sum", scheme = None, pca = false))]
#[allow(clippy::type_complexity)]
fn embed(
    docs: Vec<(String, String)>,
    store: &PyVectorStore,
    corpus: &PyCorpusStats,
    form: &str,
    scheme: Option<PyWeightScheme>,
    pca: bool,
) -> PyResult<(Vec<(String, Vec<f64>)>, Vec<(String, String)>)> {
    let kind: FormKind = parse(form)?;
    let scheme = scheme.map_or_else(docembed::WeightScheme::idf, |s| s.inner);
    let cfg = TokenizerConfig::default();
    let stats: Vec<DocTermStats> = docs
        .iter()
        .map(|(id, text)| DocTermStats::new(id.clone(), &docembed::tokenize(text, &cfg), &corpus.inner, &store.inner))
        .collect();
    let batch =
        docembed::embed_batch(&stats, &EmbeddingForm::new(kind), &scheme, &store.inner, &corpus.inner).map_err(to_py)?;
    let mut embeddings = batch.embeddings;
    if pca {
        let rows: Vec<&[f64]> = embeddings.iter().map(|e| e.vector.as_slice()).collect();
        let pc = docembed::first_principal_component(&rows).map_err(to_py)?;
        embeddings = docembed::remove_common_component(embeddings, &pc).map_err(to_py)?;
    }
    Ok((
        embeddings.into_iter().map(|e| (e.doc_id, e.vector)).collect(),
        batch.skipped.into_iter().map(|s| (s.doc_id, s.cause.name().to_string())).collect(),
    ))
}

#[pyfunction]
fn tokenize(text: &str) -> Vec<String> {
    docembed::tokenize(text, &TokenizerConfig::default())
}

#[pyfunction]
fn cosine_similarity(u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    docembed::cosine_similarity(&u, &v).map_err(to_py)
}

/// ROC AUC of `scores` against boolean `labels`, ties counting one half.
#[pyfunction]
fn roc_auc(scores: Vec<f64>, labels: Vec<bool>) -> PyResult<f64> {
    if scores.len() != labels.len() {
        return Err(PyValueError::new_err("scores and labels differ in length"));
    }
    let scored: Vec<(f64, bool)> = scores.into_iter().zip(labels).collect();
    docembed::roc_auc(&scored).map(|r| r.auc).map_err(to_py)
}

#[pyfunction]
fn first_principal_component(rows: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    docembed::first_principal_component(&rows).map(|p| p.vector).map_err(to_py)
}

/// Project `p` (assumed unit norm) out of every row.
#[pyfunction]
fn remove_component(rows: Vec<Vec<f64>>, p: Vec<f64>) -> Vec<Vec<f64>> {
    rows.iter().map(|r| docembed::common_component::project_out(r, &p)).collect()
}

#[pymodule]
pub fn docembed_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyVectorStore>()?;
    m.add_class::<PyCorpusStats>()?;
    m.add_class::<PyWeightScheme>()?;
    m.add_function(wrap_pyfunction!(embed, m)?)?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(cosine_similarity, m)?)?;
    m.add_function(wrap_pyfunction!(roc_auc, m)?)?;
    m.add_function(wrap_pyfunction!(first_principal_component, m)?)?;
    m.add_function(wrap_pyfunction!(remove_component, m)?)?;
    Ok(())
}
