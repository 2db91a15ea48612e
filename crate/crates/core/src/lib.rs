//! Corpus-aware document embeddings built from pre-trained word vectors.
//!
//! A document is embedded as a weighted combination of the unit-normalized
//! vectors of its words. Three forms are provided:
//!
//! - **sum**: `c = Σ wᵢ tfᵢ vᵢ` over the document's words,
//! - **center**: the sum minus a corpus-wide weighted center `Σ wᵢ tf_ic vᵢ`,
//! - **delta**: `c = Σ wᵢ (tfᵢ − tf_ic) vᵢ` restricted to the document's words,
//!
//! each renormalized to unit length, which is the unit vector maximizing
//! `Σ wᵢ δᵢ (vᵢ · u)`. Word weights come from idf, smooth inverse frequency
//! or the word2vec subsampling function. An optional post-process removes
//! the first principal component of the document-embedding matrix.
//!
//! The [`evaluation`] and [`harness`] modules score labeled document pairs by
//! cosine similarity and summarize them with a tie-aware ROC AUC.

pub mod cli;
pub mod common_component;
pub mod corpus_stats;
pub mod embedder;
mod error;
pub mod evaluation;
pub mod harness;
pub mod linalg;
pub mod vector_store;
pub mod weighting;

pub use common_component::{
    first_principal_component, remove_common_component, PcaOptions, PrincipalComponent,
};
pub use corpus_stats::{
    tokenize, CorpusStats, CorpusStatsBuilder, DocTermStats, SplitPolicy, TermStatsOptions,
    TokenizerConfig,
};
pub use embedder::{
    embed_batch, embed_center, embed_delta, embed_sum, renormalize, BatchOutput, CorpusCenter,
    DocEmbedding, EmbeddingForm, FormKind, SkipCause,
};
pub use error::{Error, Result, VectorParseError};
pub use evaluation::{cosine_similarity, roc_auc, sample_pairs, score_pairs, EvalPair, EvalResult};
pub use vector_store::{load_vectors, VectorFormat, VectorStore};
pub use weighting::{WeightKind, WeightScheme};
