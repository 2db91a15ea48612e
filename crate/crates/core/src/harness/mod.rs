//! Grouped-corpus benchmarks: documents built by concatenating `k` sampled
//! source documents per group, every document pair labeled by whether both
//! come from the same group, and each embedding variation scored by ROC AUC.

mod corpus;
pub mod synthetic;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use corpus::{GroupedCorpus, SourceDoc};

use crate::common_component::{first_principal_component_with, remove_common_component, PcaOptions};
use crate::corpus_stats::{tokenize, CorpusStats, DocTermStats, TermStatsOptions, TokenizerConfig};
use crate::embedder::{embed_batch, EmbeddingForm, FormKind};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate, sample_pairs, EvalPair, EvalResult};
use crate::vector_store::VectorStore;
use crate::weighting::{WeightKind, WeightScheme, DEFAULT_SIF_A, DEFAULT_SUBSAMPLE_T};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchmarkSpec {
    /// Source documents concatenated into each benchmark document.
    pub k: usize,
    pub docs_per_group: usize,
    pub seed: u64,
    /// Sample this many pairs instead of enumerating all of them.
    pub pair_budget: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchDocument {
    pub id: String,
    pub group: String,
    pub text: String,
    /// Source document ids in concatenation order.
    pub sources: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    pub documents: Vec<BenchDocument>,
    pub pairs: Vec<EvalPair>,
}

/// Samples `k · docs_per_group` sources per group without replacement and
/// joins them `k` at a time with a single space.
///
/// Sampling for a given `(seed, k)` is deterministic and independent of other
/// `k` values.
pub fn build_benchmark(corpus: &GroupedCorpus, spec: &BenchmarkSpec) -> Result<Benchmark> {
    if spec.k == 0 || spec.docs_per_group == 0 {
        return Err(Error::InvalidParameter("k and docs_per_group must be positive".into()));
    }
    let needed = spec.k * spec.docs_per_group;
    if let Some((group, docs)) = corpus.groups().find(|(_, d)| d.len() < needed) {
        return Err(Error::InsufficientDocuments {
            group: group.to_string(),
            needed,
            available: docs.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(spec.k as u64);
    let mut documents = Vec::with_capacity(corpus.group_count() * spec.docs_per_group);
    for (group, docs) in corpus.groups() {
        let picks = rand::seq::index::sample(&mut rng, docs.len(), needed).into_vec();
        for (j, chunk) in picks.chunks(spec.k).enumerate() {
            let sources: Vec<&SourceDoc> = chunk.iter().map(|&i| &docs[i]).collect();
            documents.push(BenchDocument {
                id: format!("{group}#{j}"),
                group: group.to_string(),
                text: sources.iter().map(|d| d.text.as_str()).collect::<Vec<_>>().join(" "),
                sources: sources.iter().map(|d| d.id.clone()).collect(),
            });
        }
    }

    let keyed: Vec<(&str, &str)> = documents.iter().map(|d| (d.id.as_str(), d.group.as_str())).collect();
    let total = keyed.len() * keyed.len().saturating_sub(1) / 2;
    let pairs = if keyed.len() < 2 {
        Vec::new()
    } else {
        sample_pairs(&keyed, spec.pair_budget.unwrap_or(total).max(1), spec.seed)?
    };
    Ok(Benchmark { documents, pairs })
}

/// One cell of the variation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VariationSpec {
    pub form: FormKind,
    pub scheme: WeightKind,
    pub pca: bool,
}

impl VariationSpec {
    pub fn new(scheme: WeightKind, form: FormKind, pca: bool) -> Self {
        VariationSpec { form, scheme, pca }
    }

    /// `<scheme>-<form>[-pca]`, e.g. `idf-delta-pca`.
    pub fn name(&self) -> String {
        format!(
            "{}-{}{}",
            self.scheme.name(),
            self.form.name(),
            if self.pca { "-pca" } else { "" }
        )
    }

    /// {idf, sif, subsample} × {sum, center, delta} × {plain, pca}, scheme-major.
    pub fn all() -> Vec<VariationSpec> {
        let mut out = Vec::with_capacity(18);
        for scheme in [WeightKind::Idf, WeightKind::Sif, WeightKind::Subsample] {
            for form in [FormKind::Sum, FormKind::Center, FormKind::Delta] {
                for pca in [false, true] {
                    out.push(VariationSpec::new(scheme, form, pca));
                }
            }
        }
        out
    }

    /// The six idf variations followed by the unweighted `unit-sum` baseline.
    pub fn idf_table() -> Vec<VariationSpec> {
        let mut out: Vec<VariationSpec> = Self::all().into_iter().filter(|v| v.scheme == WeightKind::Idf).collect();
        out.push(VariationSpec::new(WeightKind::Unit, FormKind::Sum, false));
        out
    }

    /// `all`, `idf-table`, or a comma-separated list of variation names.
    pub fn parse_list(s: &str) -> Result<Vec<VariationSpec>> {
        match s {
            "all" => Ok(Self::all()),
            "idf-table" => Ok(Self::idf_table()),
            _ => s.split(',').map(|v| v.trim().parse()).collect(),
        }
    }
}

impl FromStr for VariationSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("bad variation name {s:?}"));
        let mut parts = s.split('-');
        let scheme: WeightKind = parts.next().ok_or_else(bad)?.parse()?;
        let form: FormKind = parts.next().ok_or_else(bad)?.parse()?;
        let pca = match parts.next() {
            None => false,
            Some("pca") => true,
            Some(_) => return Err(bad()),
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(VariationSpec { form, scheme, pca })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixOptions {
    pub tokenizer: TokenizerConfig,
    pub term_options: TermStatsOptions,
    pub a: f64,
    pub t: f64,
    pub idf_scaled: bool,
    pub pca_center: bool,
}

impl Default for MatrixOptions {
    fn default() -> Self {
        MatrixOptions {
            tokenizer: TokenizerConfig::default(),
            term_options: TermStatsOptions::default(),
            a: DEFAULT_SIF_A,
            t: DEFAULT_SUBSAMPLE_T,
            idf_scaled: false,
            pca_center: false,
        }
    }
}

impl MatrixOptions {
    pub fn scheme(&self, kind: WeightKind) -> WeightScheme {
        WeightScheme {
            kind,
            a: self.a,
            t: self.t,
            scaled_idf: self.idf_scaled,
        }
    }
}

/// AUC for one variation, or why it could not be computed.
pub type Cell = std::result::Result<EvalResult, String>;

/// Tokenizes documents once, then for each variation embeds, optionally
/// removes the common component over the whole embedding matrix, scores the
/// pairs and computes the AUC. Failures are recorded per cell.
pub fn run_variation_matrix(
    documents: &[BenchDocument],
    pairs: &[EvalPair],
    store: &VectorStore,
    corpus: &CorpusStats,
    variations: &[VariationSpec],
    options: &MatrixOptions,
) -> Vec<Cell> {
    let stats: Vec<DocTermStats> = documents
        .par_iter()
        .map(|d| {
            let tokens = tokenize(&d.text, &options.tokenizer);
            DocTermStats::with_options(d.id.clone(), &tokens, corpus, store, options.term_options)
        })
        .collect();
    variations
        .par_iter()
        .map(|v| run_variation(&stats, pairs, store, corpus, v, options).map_err(|e| e.to_string()))
        .collect()
}

fn run_variation(
    stats: &[DocTermStats],
    pairs: &[EvalPair],
    store: &VectorStore,
    corpus: &CorpusStats,
    variation: &VariationSpec,
    options: &MatrixOptions,
) -> Result<EvalResult> {
    let scheme = options.scheme(variation.scheme);
    let batch = embed_batch(stats, &EmbeddingForm::new(variation.form), &scheme, store, corpus)?;
    let mut embeddings = batch.embeddings;
    if variation.pca {
        let rows: Vec<&[f64]> = embeddings.iter().map(|e| e.vector.as_slice()).collect();
        let pca = PcaOptions {
            center: options.pca_center,
            ..PcaOptions::default()
        };
        let pc = first_principal_component_with(&rows, &pca)?;
        embeddings = remove_common_component(embeddings, &pc)?;
    }
    let lookup: HashMap<&str, &[f64]> = embeddings
        .iter()
        .map(|e| (e.doc_id.as_str(), e.vector.as_slice()))
        .collect();
    Ok(evaluate(&lookup, pairs)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LengthStats {
    pub min: usize,
    pub mean: f64,
    pub max: usize,
    pub docs: usize,
}

/// Min / mean / max of document lengths in words; `None` for no documents.
pub fn length_report(lengths: &[usize]) -> Option<LengthStats> {
    let min = *lengths.iter().min()?;
    let max = *lengths.iter().max()?;
    let mean = lengths.iter().sum::<usize>() as f64 / lengths.len() as f64;
    Some(LengthStats { min, mean, max, docs: lengths.len() })
}

pub fn document_lengths(documents: &[BenchDocument], tokenizer: &TokenizerConfig) -> Vec<usize> {
    documents.iter().map(|d| tokenize(&d.text, tokenizer).len()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub key: String,
    pub cells: Vec<Cell>,
    pub lengths: Option<LengthStats>,
}

/// AUC per (row key, variation) plus document-length stats per row.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub key_name: String,
    pub columns: Vec<String>,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn new(key_name: impl Into<String>, variations: &[VariationSpec]) -> Self {
        ResultTable {
            key_name: key_name.into(),
            columns: variations.iter().map(VariationSpec::name).collect(),
            rows: Vec::new(),
        }
    }

    fn auc_grid(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let mut header = vec![self.key_name.clone()];
        header.extend(self.columns.iter().cloned());
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut line = vec![r.key.clone()];
                line.extend(r.cells.iter().map(|c| match c {
                    Ok(e) => format!("{:.4}", e.auc),
                    Err(_) => "NA".to_string(),
                }));
                line
            })
            .collect();
        (header, rows)
    }

    fn length_grid(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let header = [self.key_name.as_str(), "min words", "mean words", "max words"]
            .map(String::from)
            .to_vec();
        let rows = self
            .rows
            .iter()
            .filter_map(|r| {
                let l = r.lengths?;
                Some(vec![r.key.clone(), l.min.to_string(), format!("{:.1}", l.mean), l.max.to_string()])
            })
            .collect();
        (header, rows)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let (header, rows) = self.auc_grid();
        write_csv(w, &header, &rows)
    }

    pub fn write_markdown<W: Write>(&self, w: W) -> Result<()> {
        let (header, rows) = self.auc_grid();
        write_markdown(w, &header, &rows)
    }

    pub fn write_lengths_csv<W: Write>(&self, w: W) -> Result<()> {
        let (mut header, rows) = self.length_grid();
        for h in header.iter_mut().skip(1) {
            *h = h.replace(' ', "_");
        }
        write_csv(w, &header, &rows)
    }

    pub fn write_lengths_markdown<W: Write>(&self, w: W) -> Result<()> {
        let (header, rows) = self.length_grid();
        write_markdown(w, &header, &rows)
    }

    /// `(row key, column, message)` for every failed cell.
    pub fn errors(&self) -> Vec<(String, String, String)> {
        let mut out = Vec::new();
        for r in &self.rows {
            for (c, cell) in self.columns.iter().zip(&r.cells) {
                if let Err(e) = cell {
                    out.push((r.key.clone(), c.clone(), e.clone()));
                }
            }
        }
        out
    }
}

fn write_csv<W: Write>(w: W, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for r in rows {
        out.write_record(r)?;
    }
    out.flush()?;
    Ok(())
}

fn write_markdown<W: Write>(mut w: W, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let widths: Vec<usize> = (0..header.len())
        .map(|i| {
            rows.iter()
                .map(|r| r[i].len())
                .chain([header[i].len(), 3])
                .max()
                .unwrap()
        })
        .collect();
    let line = |cells: &[String]| {
        let mut s = String::from("|");
        for (c, w) in cells.iter().zip(&widths) {
            let _ = write!(s, " {c:>w$} |");
        }
        s
    };
    writeln!(w, "{}", line(header))?;
    let mut sep = String::from("|");
    for wd in &widths {
        let _ = write!(sep, " {}: |", "-".repeat(wd - 1));
    }
    writeln!(w, "{sep}")?;
    for r in rows {
        writeln!(w, "{}", line(r))?;
    }
    w.flush()?;
    Ok(())
}

/// Builds and scores one benchmark per `k`, reusing a single document
/// partition for every variation at that `k`.
#[allow(clippy::too_many_arguments)]
pub fn run_k_sweep(
    corpus: &GroupedCorpus,
    ks: &[usize],
    docs_per_group: usize,
    seed: u64,
    pair_budget: Option<usize>,
    store: &VectorStore,
    stats: &CorpusStats,
    variations: &[VariationSpec],
    options: &MatrixOptions,
) -> Result<ResultTable> {
    let mut table = ResultTable::new("k", variations);
    for &k in ks {
        let spec = BenchmarkSpec { k, docs_per_group, seed, pair_budget };
        let bench = build_benchmark(corpus, &spec)?;
        let cells = run_variation_matrix(&bench.documents, &bench.pairs, store, stats, variations, options);
        let lengths = length_report(&document_lengths(&bench.documents, &options.tokenizer));
        table.rows.push(ResultRow { key: k.to_string(), cells, lengths });
    }
    Ok(table)
}

/// Corpus statistics over every source document of a grouped corpus.
pub fn corpus_stats_for(corpus: &GroupedCorpus, tokenizer: &TokenizerConfig) -> CorpusStats {
    let tokenized: Vec<Vec<String>> = corpus
        .documents()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|d| tokenize(&d.text, tokenizer))
        .collect();
    CorpusStats::from_documents(tokenized)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeMap, HashSet};

    fn grouped(spec: &[(&str, usize)]) -> GroupedCorpus {
        let mut groups = BTreeMap::new();
        for (g, n) in spec {
            groups.insert(
                g.to_string(),
                (0..*n)
                    .map(|i| SourceDoc { id: format!("{g}-s{i}"), text: format!("{g} word{i}") })
                    .collect(),
            );
        }
        GroupedCorpus::new(groups, "test").unwrap()
    }

    #[test]
    fn one_group_exhaustive() {
        let c = grouped(&[("g", 4)]);
        let b = build_benchmark(&c, &BenchmarkSpec { k: 2, docs_per_group: 2, seed: 1, pair_budget: None }).unwrap();
        assert_eq!(b.documents.len(), 2);
        let used: HashSet<&String> = b.documents.iter().flat_map(|d| &d.sources).collect();
        assert_eq!(used.len(), 4);
        assert_eq!(b.pairs, vec![EvalPair::new("g#0", "g#1", true)]);
        let d = &b.documents[0];
        let expected: Vec<String> = d.sources.iter().map(|s| format!("g word{}", &s[3..])).collect();
        assert_eq!(d.text, expected.join(" "));
    }

    #[test]
    fn two_singleton_groups() {
        let c = grouped(&[("a", 1), ("b", 1)]);
        let b = build_benchmark(&c, &BenchmarkSpec { k: 1, docs_per_group: 1, seed: 0, pair_budget: None }).unwrap();
        assert_eq!(b.documents.len(), 2);
        assert_eq!(b.pairs, vec![EvalPair::new("a#0", "b#0", false)]);
    }

    #[test]
    fn insufficient_documents_names_group() {
        let c = grouped(&[("a", 5), ("b", 3)]);
        match build_benchmark(&c, &BenchmarkSpec { k: 2, docs_per_group: 2, seed: 0, pair_budget: None }) {
            Err(Error::InsufficientDocuments { group, needed: 4, available: 3 }) => assert_eq!(group, "b"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sixty_groups_of_250_at_k1() {
        let names: Vec<String> = (0..60).map(|i| format!("loc{i:02}")).collect();
        let spec: Vec<(&str, usize)> = names.iter().map(|n| (n.as_str(), 250)).collect();
        let c = grouped(&spec);
        let b = build_benchmark(&c, &BenchmarkSpec { k: 1, docs_per_group: 250, seed: 3, pair_budget: Some(1000) }).unwrap();
        assert_eq!(b.documents.len(), 15_000);
        assert_eq!(b.pairs.len(), 1000);
    }

    #[test]
    fn deterministic_exclusive_and_consistent_labels() {
        let c = grouped(&[("a", 30), ("b", 30), ("c", 30)]);
        for k in 1..=3 {
            let spec = BenchmarkSpec { k, docs_per_group: 8, seed: 9, pair_budget: None };
            let b1 = build_benchmark(&c, &spec).unwrap();
            let b2 = build_benchmark(&c, &spec).unwrap();
            assert_eq!(b1, b2);
            let mut seen = HashSet::new();
            for d in &b1.documents {
                assert_eq!(d.sources.len(), k);
                for s in &d.sources {
                    assert!(seen.insert(s.clone()), "source reused");
                    assert!(s.starts_with(&d.group));
                }
            }
            assert_eq!(b1.pairs.len(), 24 * 23 / 2);
            let group_of: HashMap<&str, &str> = b1.documents.iter().map(|d| (d.id.as_str(), d.group.as_str())).collect();
            for p in &b1.pairs {
                assert_eq!(p.label, group_of[p.doc_a.as_str()] == group_of[p.doc_b.as_str()]);
            }
        }
        let k1 = build_benchmark(&c, &BenchmarkSpec { k: 1, docs_per_group: 8, seed: 9, pair_budget: None }).unwrap();
        let k2 = build_benchmark(&c, &BenchmarkSpec { k: 2, docs_per_group: 8, seed: 9, pair_budget: None }).unwrap();
        assert_ne!(k1.documents[0].sources[0], k2.documents[0].sources[0]);
    }

    #[test]
    fn variation_enumeration() {
        let all = VariationSpec::all();
        assert_eq!(all.len(), 18);
        assert_eq!(all.iter().collect::<HashSet<_>>().len(), 18);
        let names: Vec<String> = VariationSpec::idf_table().iter().map(VariationSpec::name).collect();
        assert_eq!(
            names,
            ["idf-sum", "idf-sum-pca", "idf-center", "idf-center-pca", "idf-delta", "idf-delta-pca", "unit-sum"]
        );
        for v in all {
            assert_eq!(v.name().parse::<VariationSpec>().unwrap(), v);
        }
        assert!("idf-sum-pca-x".parse::<VariationSpec>().is_err());
        assert!("idf".parse::<VariationSpec>().is_err());
        assert_eq!(VariationSpec::parse_list("idf-sum, unit-sum").unwrap().len(), 2);
    }

    #[test]
    fn length_report_examples() {
        let r = length_report(&[9, 100, 4771]).unwrap();
        assert_eq!((r.min, r.max), (9, 4771));
        assert!((r.mean - 1626.6667).abs() < 1e-3);
        let r = length_report(&[5]).unwrap();
        assert_eq!((r.min, r.mean, r.max), (5, 5.0, 5));
        assert!(length_report(&[]).is_none());
    }

    #[test]
    fn trivial_matrix_and_error_cells() {
        let store = VectorStore::from_entries(
            2,
            [("a".to_string(), vec![1.0, 0.0]), ("b".to_string(), vec![0.0, 1.0]), ("x".to_string(), vec![1.0, 1.0])],
        )
        .unwrap()
        .normalize()
        .unwrap();
        let mut groups = BTreeMap::new();
        groups.insert("g1".to_string(), vec![SourceDoc { id: "1".into(), text: "a a x".into() }]);
        groups.insert("g2".to_string(), vec![SourceDoc { id: "2".into(), text: "b b x".into() }]);
        let c = GroupedCorpus::new(groups, "t").unwrap();
        let stats = corpus_stats_for(&c, &TokenizerConfig::default());
        let b = build_benchmark(&c, &BenchmarkSpec { k: 1, docs_per_group: 1, seed: 0, pair_budget: None }).unwrap();
        // A single negative pair: AUC undefined, recorded as an error cell.
        let cells = run_variation_matrix(
            &b.documents, &b.pairs, &store, &stats,
            &[VariationSpec::new(WeightKind::Idf, FormKind::Sum, false)],
            &MatrixOptions::default(),
        );
        assert_eq!(cells.len(), 1);
        assert!(cells[0].as_ref().unwrap_err().contains("AUC undefined"));

        let mut table = ResultTable::new("k", &[VariationSpec::new(WeightKind::Idf, FormKind::Sum, false)]);
        table.rows.push(ResultRow { key: "1".into(), cells, lengths: length_report(&[3, 3]) });
        let mut csv = Vec::new();
        table.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "k,idf-sum\n1,NA\n");
        assert_eq!(table.errors().len(), 1);
    }

    #[test]
    fn markdown_layout() {
        let mut table = ResultTable::new("k", &[VariationSpec::new(WeightKind::Idf, FormKind::Delta, true)]);
        let r = EvalResult { auc: 0.91234, positives: 1, negatives: 1, skipped_pairs: 0 };
        table.rows.push(ResultRow { key: "1".into(), cells: vec![Ok(r)], lengths: length_report(&[9, 10]) });
        let mut md = Vec::new();
        table.write_markdown(&mut md).unwrap();
        assert_eq!(
            String::from_utf8(md).unwrap(),
            "|   k | idf-delta-pca |\n| --: | ------------: |\n|   1 |        0.9123 |\n"
        );
        let mut lengths = Vec::new();
        table.write_lengths_csv(&mut lengths).unwrap();
        assert_eq!(String::from_utf8(lengths).unwrap(), "k,min_words,mean_words,max_words\n1,9,9.5,10\n");
    }
}
