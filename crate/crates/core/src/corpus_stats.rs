//! Tokenization and corpus-wide counts: corpus term frequency `tf_ic`,
//! document frequency `D_i`, and idf.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::vector_store::VectorStore;

const STATS_MAGIC: &str = "# docembed-corpus-stats v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitPolicy {
    /// Tokens are maximal runs of alphanumeric characters.
    #[default]
    NonAlphanumeric,
    Whitespace,
}

impl FromStr for SplitPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "non-alphanumeric" => Ok(SplitPolicy::NonAlphanumeric),
            "whitespace" => Ok(SplitPolicy::Whitespace),
            other => Err(Error::InvalidParameter(format!("unknown split policy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub split_policy: SplitPolicy,
    /// Minimum token length in characters.
    pub min_token_len: usize,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            lowercase: true,
            split_policy: SplitPolicy::NonAlphanumeric,
            min_token_len: 1,
        }
    }
}

pub fn tokenize(text: &str, config: &TokenizerConfig) -> Vec<String> {
    let pieces: Box<dyn Iterator<Item = &str>> = match config.split_policy {
        SplitPolicy::NonAlphanumeric => Box::new(text.split(|c: char| !c.is_alphanumeric())),
        SplitPolicy::Whitespace => Box::new(text.split_whitespace()),
    };
    pieces
        .filter(|t| !t.is_empty() && t.chars().count() >= config.min_token_len)
        .map(|t| {
            if config.lowercase {
                t.to_lowercase()
            } else {
                t.to_string()
            }
        })
        .collect()
}

/// Raw counts for one word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TermCounts {
    /// `n_ic`: occurrences across the corpus.
    pub count: u64,
    /// `D_i`: documents containing the word.
    pub doc_freq: u64,
}

/// Streaming accumulator for [`CorpusStats`].
#[derive(Debug, Clone, Default)]
pub struct CorpusStatsBuilder {
    doc_count: u64,
    total_tokens: u64,
    terms: BTreeMap<String, TermCounts>,
}

impl CorpusStatsBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_document<T: AsRef<str>>(&mut self, tokens: impl IntoIterator<Item = T>) {
        let mut local: HashMap<String, u64> = HashMap::new();
        for t in tokens {
            *local.entry(t.as_ref().to_string()).or_default() += 1;
        }
        self.doc_count += 1;
        for (token, n) in local {
            self.total_tokens += n;
            let e = self.terms.entry(token).or_default();
            e.count += n;
            e.doc_freq += 1;
        }
    }

    /// Combines counts from another shard. Integer counts make the result
    /// independent of shard boundaries.
    pub fn merge(&mut self, other: CorpusStatsBuilder) {
        self.doc_count += other.doc_count;
        self.total_tokens += other.total_tokens;
        for (token, c) in other.terms {
            let e = self.terms.entry(token).or_default();
            e.count += c.count;
            e.doc_freq += c.doc_freq;
        }
    }

    pub fn build(self) -> CorpusStats {
        CorpusStats::from_parts(self.doc_count, self.total_tokens, self.terms)
    }
}

/// Immutable corpus-wide statistics.
///
/// Words are kept in token order, which fixes the summation order of anything
/// that iterates the vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    doc_count: u64,
    total_tokens: u64,
    terms: BTreeMap<String, TermCounts>,
    idf_range: Option<(f64, f64)>,
}

impl CorpusStats {
    pub fn from_documents<D, T>(docs: impl IntoIterator<Item = D>) -> Self
    where
        D: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let mut b = CorpusStatsBuilder::new();
        for d in docs {
            b.add_document(d);
        }
        b.build()
    }

    fn from_parts(doc_count: u64, total_tokens: u64, terms: BTreeMap<String, TermCounts>) -> Self {
        let idf_range = if doc_count == 0 {
            None
        } else {
            terms.values().fold(None, |acc: Option<(f64, f64)>, c| {
                let v = idf_value(doc_count, c.doc_freq);
                Some(match acc {
                    None => (v, v),
                    Some((lo, hi)) => (lo.min(v), hi.max(v)),
                })
            })
        };
        CorpusStats {
            doc_count,
            total_tokens,
            terms,
            idf_range,
        }
    }

    /// `D`
    pub fn doc_count(&self) -> u64 {
        self.doc_count
    }

    /// `N_c`
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn vocabulary_size(&self) -> usize {
        self.terms.len()
    }

    pub fn counts(&self, word: &str) -> Option<TermCounts> {
        self.terms.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.terms.contains_key(word)
    }

    /// Words with their counts, in token order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, TermCounts)> + '_ {
        self.terms.iter().map(|(w, c)| (w.as_str(), *c))
    }

    /// `tf_ic = n_ic / N_c`
    pub fn corpus_tf(&self, word: &str) -> Option<f64> {
        self.terms
            .get(word)
            .map(|c| c.count as f64 / self.total_tokens as f64)
    }

    /// Natural-log inverse document frequency `ln(D / D_i)`.
    pub fn idf(&self, word: &str) -> Result<f64> {
        if self.doc_count == 0 {
            return Err(Error::EmptyCorpus);
        }
        let c = self
            .terms
            .get(word)
            .ok_or_else(|| Error::UnknownWord(word.to_string()))?;
        Ok(idf_value(self.doc_count, c.doc_freq))
    }

    /// idf min-max rescaled to `[0, 1]` over all counted words.
    pub fn scaled_idf(&self, word: &str) -> Result<f64> {
        let idf = self.idf(word)?;
        let (lo, hi) = self.idf_range.ok_or(Error::EmptyCorpus)?;
        if hi <= lo {
            return Err(Error::DegenerateScale);
        }
        Ok((idf - lo) / (hi - lo))
    }

    pub fn idf_range(&self) -> Option<(f64, f64)> {
        self.idf_range
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{STATS_MAGIC}")?;
        writeln!(w, "{} {}", self.doc_count, self.total_tokens)?;
        for (token, c) in &self.terms {
            writeln!(w, "{token} {} {}", c.count, c.doc_freq)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parses the format written by [`CorpusStats::write_to`] and checks its
    /// internal consistency.
    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let fmt = |line: usize, message: String| Error::Format { line, message };
        let mut lines = r.lines();
        match lines.next().transpose()? {
            Some(l) if l.trim_end() == STATS_MAGIC => {}
            _ => return Err(fmt(1, format!("expected {STATS_MAGIC:?}"))),
        }
        let header = lines
            .next()
            .transpose()?
            .ok_or_else(|| fmt(2, "missing `D N_c` header".into()))?;
        let (doc_count, total_tokens) = match header.split_ascii_whitespace().collect::<Vec<_>>()[..]
        {
            [d, n] => (
                d.parse::<u64>().map_err(|_| fmt(2, format!("bad D {d:?}")))?,
                n.parse::<u64>().map_err(|_| fmt(2, format!("bad N_c {n:?}")))?,
            ),
            _ => return Err(fmt(2, format!("malformed header {header:?}"))),
        };

        let mut terms = BTreeMap::new();
        let mut sum = 0u64;
        let mut prev: Option<String> = None;
        for (i, line) in lines.enumerate() {
            let line = line?;
            let lineno = i + 3;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(' ').collect();
            let [token, n, d] = fields[..] else {
                return Err(fmt(lineno, format!("expected `token n_ic D_i`, got {line:?}")));
            };
            let count: u64 = n.parse().map_err(|_| fmt(lineno, format!("bad n_ic {n:?}")))?;
            let doc_freq: u64 = d.parse().map_err(|_| fmt(lineno, format!("bad D_i {d:?}")))?;
            if doc_freq == 0 || doc_freq > doc_count || count < doc_freq {
                return Err(fmt(
                    lineno,
                    format!("inconsistent counts for {token:?}: n_ic={count} D_i={doc_freq} D={doc_count}"),
                ));
            }
            if prev.as_deref().is_some_and(|p| p >= token) {
                return Err(fmt(lineno, format!("tokens not strictly sorted at {token:?}")));
            }
            prev = Some(token.to_string());
            sum += count;
            terms.insert(token.to_string(), TermCounts { count, doc_freq });
        }
        if sum != total_tokens {
            return Err(fmt(2, format!("N_c={total_tokens} but rows sum to {sum}")));
        }
        Ok(CorpusStats::from_parts(doc_count, total_tokens, terms))
    }
}

fn idf_value(doc_count: u64, doc_freq: u64) -> f64 {
    (doc_count as f64 / doc_freq as f64).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TermStatsOptions {
    /// Count out-of-vocabulary tokens in the document length `N`.
    pub oov_in_denominator: bool,
}

/// One word of a document.
#[derive(Debug, Clone, PartialEq)]
pub struct TermEntry {
    pub token: String,
    /// `n_i`
    pub count: u64,
    /// `tf_i`
    pub tf: f64,
    /// `tf_ic`
    pub corpus_tf: f64,
}

impl TermEntry {
    /// `δ_i = tf_i − tf_ic`
    pub fn delta(&self) -> f64 {
        self.tf - self.corpus_tf
    }
}

/// Per-document counts restricted to words present in both the vector store
/// and the corpus statistics, sorted by token.
#[derive(Debug, Clone, PartialEq)]
pub struct DocTermStats {
    pub doc_id: String,
    entries: Vec<TermEntry>,
    length: u64,
    dropped: u64,
}

impl DocTermStats {
    pub fn new<T: AsRef<str>>(
        doc_id: impl Into<String>,
        tokens: &[T],
        corpus: &CorpusStats,
        store: &VectorStore,
    ) -> Self {
        Self::with_options(doc_id, tokens, corpus, store, TermStatsOptions::default())
    }

    pub fn with_options<T: AsRef<str>>(
        doc_id: impl Into<String>,
        tokens: &[T],
        corpus: &CorpusStats,
        store: &VectorStore,
        options: TermStatsOptions,
    ) -> Self {
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        let mut dropped = 0u64;
        for t in tokens {
            let t = t.as_ref();
            if corpus.contains(t) && store.contains(t) {
                *counts.entry(t).or_default() += 1;
            } else {
                dropped += 1;
            }
        }
        let kept: u64 = counts.values().sum();
        let length = if options.oov_in_denominator {
            kept + dropped
        } else {
            kept
        };
        let entries = if kept == 0 {
            Vec::new()
        } else {
            counts
                .into_iter()
                .map(|(token, count)| TermEntry {
                    token: token.to_string(),
                    count,
                    tf: count as f64 / length as f64,
                    corpus_tf: corpus.corpus_tf(token).expect("filtered to counted words"),
                })
                .collect()
        };
        DocTermStats {
            doc_id: doc_id.into(),
            entries,
            length,
            dropped,
        }
    }

    /// Sorted by token.
    pub fn entries(&self) -> &[TermEntry] {
        &self.entries
    }

    /// `N`
    pub fn length(&self) -> u64 {
        self.length
    }

    /// Tokens removed because the store or the corpus does not know them.
    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    /// True when no embeddable word remains.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&TermEntry> {
        self.entries
            .binary_search_by(|e| e.token.as_str().cmp(token))
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn words(&self) -> HashSet<&str> {
        self.entries.iter().map(|e| e.token.as_str()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &[&str]) -> Vec<String> {
        s.iter().map(|t| t.to_string()).collect()
    }

    fn store_of(words: &[&str]) -> VectorStore {
        VectorStore::from_entries(1, words.iter().map(|w| (w.to_string(), vec![1.0]))).unwrap()
    }

    #[test]
    fn tokenizer_examples() {
        let cfg = TokenizerConfig::default();
        assert_eq!(tokenize("Great hotel, great pool!", &cfg), toks(&["great", "hotel", "great", "pool"]));
        assert!(tokenize("", &cfg).is_empty());
        let ws = TokenizerConfig {
            lowercase: true,
            split_policy: SplitPolicy::Whitespace,
            min_token_len: 2,
        };
        assert!(tokenize("a  b", &ws).is_empty());
        let keep_case = TokenizerConfig {
            lowercase: false,
            split_policy: SplitPolicy::Whitespace,
            min_token_len: 1,
        };
        assert_eq!(tokenize("Great, pool!", &keep_case), toks(&["Great,", "pool!"]));
    }

    #[test]
    fn corpus_counts_by_hand() {
        let c = CorpusStats::from_documents(vec![toks(&["a", "b"]), toks(&["a"])]);
        assert_eq!(c.counts("a"), Some(TermCounts { count: 2, doc_freq: 2 }));
        assert_eq!(c.counts("b"), Some(TermCounts { count: 1, doc_freq: 1 }));
        assert_eq!((c.total_tokens(), c.doc_count()), (3, 2));
        assert!((c.corpus_tf("a").unwrap() - 2.0 / 3.0).abs() < 1e-15);

        let c = CorpusStats::from_documents(vec![toks(&["a", "a", "a"])]);
        assert_eq!(c.corpus_tf("a"), Some(1.0));
        assert_eq!(c.counts("a").unwrap().doc_freq, 1);
    }

    #[test]
    fn empty_corpus() {
        let c = CorpusStats::from_documents(Vec::<Vec<String>>::new());
        assert_eq!((c.doc_count(), c.total_tokens()), (0, 0));
        assert!(matches!(c.idf("a"), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn idf_values() {
        // D=100: word "all" in every doc, "one" in a single doc.
        let mut docs: Vec<Vec<String>> = (0..100).map(|_| toks(&["all"])).collect();
        docs[0].push("one".into());
        let c = CorpusStats::from_documents(docs);
        assert_eq!(c.idf("all").unwrap(), 0.0);
        assert!((c.idf("one").unwrap() - 4.60517).abs() < 1e-5);
        assert!(matches!(c.idf("zzz"), Err(Error::UnknownWord(_))));

        let c = CorpusStats::from_documents(vec![toks(&["x", "y"]), toks(&["x"])]);
        assert!((c.idf("y").unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn scaled_idf_examples() {
        // D=4: idf{w0}=ln 1=0, idf{w2}=ln 2, idf{w1}=ln 4.
        let c = CorpusStats::from_documents(vec![
            toks(&["w0", "w1", "w2"]),
            toks(&["w0", "w2"]),
            toks(&["w0"]),
            toks(&["w0"]),
        ]);
        assert_eq!(c.scaled_idf("w0").unwrap(), 0.0);
        assert_eq!(c.scaled_idf("w1").unwrap(), 1.0);
        assert!((c.scaled_idf("w2").unwrap() - 0.5).abs() < 1e-15);

        let flat = CorpusStats::from_documents(vec![toks(&["a", "b"])]);
        assert!(matches!(flat.scaled_idf("a"), Err(Error::DegenerateScale)));
    }

    #[test]
    fn doc_term_stats_examples() {
        let corpus = CorpusStats::from_documents(vec![toks(&["a", "b"]), toks(&["a"])]);
        let store = store_of(&["a", "b"]);
        let d = DocTermStats::new("d", &toks(&["a", "b", "a"]), &corpus, &store);
        assert_eq!(d.length(), 3);
        let a = d.get("a").unwrap();
        assert!((a.tf - 2.0 / 3.0).abs() < 1e-15);
        assert!(a.delta().abs() < 1e-15);
        assert!((d.get("b").unwrap().tf - 1.0 / 3.0).abs() < 1e-15);

        let oov = DocTermStats::new("d", &toks(&["zzz"]), &corpus, &store);
        assert!(oov.is_empty());
        assert_eq!((oov.length(), oov.dropped()), (0, 1));
        assert!(DocTermStats::new("d", &Vec::<String>::new(), &corpus, &store).is_empty());
    }

    #[test]
    fn oov_filtering_requires_both_store_and_corpus() {
        let corpus = CorpusStats::from_documents(vec![toks(&["a", "b", "c"])]);
        let store = store_of(&["a", "b", "x"]);
        let d = DocTermStats::new("d", &toks(&["a", "c", "x", "b"]), &corpus, &store);
        assert_eq!(d.length(), 2);
        assert_eq!(d.dropped(), 2);
        let with = DocTermStats::with_options(
            "d",
            &toks(&["a", "c", "x", "b"]),
            &corpus,
            &store,
            TermStatsOptions { oov_in_denominator: true },
        );
        assert_eq!(with.length(), 4);
        assert_eq!(with.get("a").unwrap().tf, 0.25);
    }

    #[test]
    fn persistence_round_trip_and_validation() {
        let c = CorpusStats::from_documents(vec![toks(&["b", "a", "b"]), toks(&["a"])]);
        let mut buf = Vec::new();
        c.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, format!("{STATS_MAGIC}\n2 4\na 2 2\nb 2 1\n"));
        let back = CorpusStats::read_from(&buf[..]).unwrap();
        assert_eq!(back, c);

        let bad = format!("{STATS_MAGIC}\n2 4\nb 2 1\na 2 2\n");
        assert!(matches!(CorpusStats::read_from(bad.as_bytes()), Err(Error::Format { line: 4, .. })));
        let bad = format!("{STATS_MAGIC}\n1 4\na 2 2\nb 2 1\n");
        assert!(matches!(CorpusStats::read_from(bad.as_bytes()), Err(Error::Format { line: 3, .. })));
        assert!(CorpusStats::read_from("2 4\n".as_bytes()).is_err());
    }

    fn naive_recount(docs: &[Vec<String>]) -> (u64, u64, BTreeMap<String, TermCounts>) {
        let mut terms: BTreeMap<String, TermCounts> = BTreeMap::new();
        let mut total = 0;
        for d in docs {
            for t in d {
                terms.entry(t.clone()).or_default().count += 1;
                total += 1;
            }
        }
        for (w, c) in terms.iter_mut() {
            c.doc_freq = docs.iter().filter(|d| d.contains(w)).count() as u64;
        }
        (docs.len() as u64, total, terms)
    }

    #[test]
    fn thousand_docs_match_recount() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let docs: Vec<Vec<String>> = (0..1000)
            .map(|_| {
                let len = rng.random_range(0..40);
                (0..len).map(|_| format!("w{}", rng.random_range(0..300))).collect()
            })
            .collect();
        let stats = CorpusStats::from_documents(docs.iter());
        let (d, n, terms) = naive_recount(&docs);
        assert_eq!((stats.doc_count(), stats.total_tokens()), (d, n));
        let got: BTreeMap<String, TermCounts> =
            stats.iter().map(|(w, c)| (w.to_string(), c)).collect();
        assert_eq!(got, terms);
    }

    fn corpus_strategy() -> impl Strategy<Value = Vec<Vec<String>>> {
        prop::collection::vec(
            prop::collection::vec((0u8..12).prop_map(|i| format!("t{i}")), 0..15),
            0..25,
        )
    }

    proptest! {
        #[test]
        fn streaming_equals_recount_and_sharding(docs in corpus_strategy(), split in 0usize..25) {
            let stats = CorpusStats::from_documents(docs.iter());
            let (d, n, terms) = naive_recount(&docs);
            prop_assert_eq!(stats.doc_count(), d);
            prop_assert_eq!(stats.total_tokens(), n);
            for (w, c) in stats.iter() {
                prop_assert_eq!(Some(&c), terms.get(w));
                prop_assert!(c.doc_freq >= 1 && c.doc_freq <= d);
                prop_assert!(c.count >= c.doc_freq);
            }
            prop_assert_eq!(stats.vocabulary_size(), terms.len());
            if n > 0 {
                let s: f64 = stats.iter().map(|(w, _)| stats.corpus_tf(w).unwrap()).sum();
                prop_assert!((s - 1.0).abs() < 1e-9);
            }

            let split = split.min(docs.len());
            let mut left = CorpusStatsBuilder::new();
            docs[..split].iter().for_each(|doc| left.add_document(doc));
            let mut right = CorpusStatsBuilder::new();
            docs[split..].iter().for_each(|doc| right.add_document(doc));
            left.merge(right);
            prop_assert_eq!(left.build(), stats);
        }

        #[test]
        fn delta_sum_identity(docs in corpus_strategy(), doc in prop::collection::vec((0u8..14).prop_map(|i| format!("t{i}")), 0..30)) {
            let stats = CorpusStats::from_documents(docs.iter());
            let words: Vec<String> = (0..14).map(|i| format!("t{i}")).collect();
            let store = VectorStore::from_entries(1, words.into_iter().map(|w| (w, vec![1.0]))).unwrap();
            let d = DocTermStats::new("d", &doc, &stats, &store);
            if !d.is_empty() {
                let tf_sum: f64 = d.entries().iter().map(|e| e.tf).sum();
                prop_assert!((tf_sum - 1.0).abs() < 1e-9);
                let delta_sum: f64 = d.entries().iter().map(|e| e.delta()).sum();
                let corpus_sum: f64 = d.entries().iter().map(|e| e.corpus_tf).sum();
                prop_assert!((delta_sum - (1.0 - corpus_sum)).abs() < 1e-9);
                for e in d.entries() {
                    prop_assert!(e.delta() > -e.corpus_tf && e.delta() < 1.0 && e.delta() > -1.0);
                }
            }
        }

        #[test]
        fn idf_non_increasing_in_doc_freq(d in 1u64..1000, a in 1u64..1000, b in 1u64..1000) {
            let (lo, hi) = (a.min(b).min(d), a.max(b).min(d));
            prop_assert!(idf_value(d, lo) >= idf_value(d, hi));
        }
    }
}
