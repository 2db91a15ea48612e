//! Planted-topic grouped corpora with random word vectors.
//!
//! Each group owns a set of exclusive words; all groups share a background
//! vocabulary. A document draws each token from the background with
//! probability `background_fraction`, otherwise from its group's words.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Zipf};

use super::corpus::{GroupedCorpus, SourceDoc};
use crate::error::{Error, Result};
use crate::vector_store::VectorStore;

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedTopicConfig {
    pub groups: usize,
    pub background_words: usize,
    pub exclusive_per_group: usize,
    pub doc_len: usize,
    pub background_fraction: f64,
    pub docs_per_group: usize,
    pub dim: usize,
    /// Zipf exponent for background word frequencies; 0 (default) means uniform.
    pub background_zipf: f64,
    pub seed: u64,
}

impl Default for PlantedTopicConfig {
    fn default() -> Self {
        PlantedTopicConfig {
            groups: 10,
            background_words: 300,
            exclusive_per_group: 20,
            doc_len: 100,
            background_fraction: 0.8,
            docs_per_group: 50,
            dim: 32,
            background_zipf: 0.0,
            seed: 0,
        }
    }
}

pub fn background_word(i: usize) -> String {
    format!("bg{i:04}")
}

pub fn group_word(group: usize, j: usize) -> String {
    format!("g{group:03}w{j:03}")
}

pub fn group_id(group: usize) -> String {
    format!("group{group:03}")
}

/// Returns the corpus and an un-normalized store holding one Gaussian vector
/// per vocabulary word.
pub fn planted_topic_corpus(cfg: &PlantedTopicConfig) -> Result<(GroupedCorpus, VectorStore)> {
    if cfg.groups == 0 || cfg.background_words == 0 || cfg.exclusive_per_group == 0 || cfg.dim == 0 {
        return Err(Error::InvalidParameter("planted-topic sizes must be positive".into()));
    }
    if !(0.0..=1.0).contains(&cfg.background_fraction) {
        return Err(Error::InvalidParameter("background_fraction must lie in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut vocab: Vec<String> = (0..cfg.background_words).map(background_word).collect();
    for g in 0..cfg.groups {
        vocab.extend((0..cfg.exclusive_per_group).map(|j| group_word(g, j)));
    }
    let vectors: Vec<(String, Vec<f64>)> = vocab
        .into_iter()
        .map(|w| {
            let v: Vec<f64> = (0..cfg.dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            (w, v)
        })
        .collect();
    let store = VectorStore::from_entries(cfg.dim, vectors)?;

    let zipf = if cfg.background_zipf > 0.0 {
        Some(
            Zipf::new(cfg.background_words as f64, cfg.background_zipf)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?,
        )
    } else {
        None
    };
    let mut groups = BTreeMap::new();
    for g in 0..cfg.groups {
        let gid = group_id(g);
        let docs = (0..cfg.docs_per_group)
            .map(|d| {
                let tokens: Vec<String> = (0..cfg.doc_len)
                    .map(|_| {
                        if rng.random_bool(cfg.background_fraction) {
                            let i = match &zipf {
                                Some(z) => z.sample(&mut rng) as usize - 1,
                                None => rng.random_range(0..cfg.background_words),
                            };
                            background_word(i)
                        } else {
                            group_word(g, rng.random_range(0..cfg.exclusive_per_group))
                        }
                    })
                    .collect();
                SourceDoc { id: format!("{gid}/r{d:04}"), text: tokens.join(" ") }
            })
            .collect();
        groups.insert(gid, docs);
    }
    let corpus = GroupedCorpus::new(groups, format!("planted-topic seed={}", cfg.seed))?;
    Ok((corpus, store))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_determinism() {
        let cfg = PlantedTopicConfig { groups: 3, docs_per_group: 4, doc_len: 20, ..Default::default() };
        let (c, s) = planted_topic_corpus(&cfg).unwrap();
        assert_eq!((c.group_count(), c.doc_count()), (3, 12));
        assert_eq!(s.len(), 300 + 3 * 20);
        assert_eq!(s.dimension(), 32);
        for d in c.documents() {
            assert_eq!(d.text.split(' ').count(), 20);
        }
        let (c2, s2) = planted_topic_corpus(&cfg).unwrap();
        assert_eq!((c, s), (c2, s2));
    }

    #[test]
    fn exclusive_words_stay_in_their_group() {
        let cfg = PlantedTopicConfig { groups: 4, docs_per_group: 5, background_zipf: 1.2, ..Default::default() };
        let (c, _) = planted_topic_corpus(&cfg).unwrap();
        for (g, docs) in c.groups() {
            let n: usize = g["group".len()..].parse().unwrap();
            let prefix = format!("g{n:03}w");
            for d in docs {
                for t in d.text.split(' ') {
                    assert!(t.starts_with("bg") || t.starts_with(&prefix), "{t} in {g}");
                }
            }
        }
    }
}
