//! Pre-trained word vectors: loading, validation and unit normalization.
//!
//! The primary input is the word2vec text format:
//!
//! ```text
//! <count> <dim>
//! <token> <f1> ... <f_dim>
//! ```
//!
//! The header-less GloVe text layout is also accepted; its dimension is taken
//! from the first row. Tokens are kept byte-for-byte as they appear in the
//! file (no case folding or Unicode normalization).

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result, VectorParseError};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VectorFormat {
    #[default]
    Word2VecText,
    GloveText,
}

impl FromStr for VectorFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word2vec-text" => Ok(VectorFormat::Word2VecText),
            "glove-text" => Ok(VectorFormat::GloveText),
            other => Err(Error::InvalidParameter(format!(
                "unknown vector format {other:?} (expected word2vec-text or glove-text)"
            ))),
        }
    }
}

/// Immutable vocabulary → K-dimensional vector map.
///
/// Vectors are stored row-major in one contiguous buffer; rows keep file order.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorStore {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    normalized: bool,
}

impl VectorStore {
    /// Builds a store from `(token, components)` pairs, validating dimension,
    /// finiteness and uniqueness. Line numbers in errors count entries from 1.
    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        if dim == 0 {
            return Err(Error::InvalidParameter("vector dimension must be positive".into()));
        }
        let mut store = VectorStore::empty(dim);
        for (i, (word, components)) in entries.into_iter().enumerate() {
            store
                .push(word, &components)
                .map_err(|kind| Error::VectorParse { line: i + 1, kind })?;
        }
        Ok(store)
    }

    fn empty(dim: usize) -> Self {
        VectorStore {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            normalized: false,
        }
    }

    fn push(&mut self, word: String, components: &[f64]) -> Result<(), VectorParseError> {
        if components.len() != self.dim {
            return Err(VectorParseError::DimensionMismatch {
                expected: self.dim,
                found: components.len(),
            });
        }
        if components.iter().any(|x| !x.is_finite()) {
            return Err(VectorParseError::NonFinite(word));
        }
        if self.index.contains_key(&word) {
            return Err(VectorParseError::DuplicateToken(word));
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(components);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Vector for `word`, or `None` when the word is out of vocabulary.
    pub fn lookup(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.row(i))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Entries in file order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> + '_ {
        self.words
            .iter()
            .enumerate()
            .map(move |(i, w)| (w.as_str(), self.row(i)))
    }

    /// Scales every vector to unit Euclidean norm. A zero vector is an error
    /// naming its token.
    pub fn normalize(mut self) -> Result<Self> {
        let dim = self.dim;
        for (i, chunk) in self.data.chunks_mut(dim).enumerate() {
            let n = linalg::norm(chunk);
            if n == 0.0 {
                return Err(Error::ZeroNormVector(self.words[i].clone()));
            }
            for x in chunk.iter_mut() {
                *x /= n;
            }
        }
        self.normalized = true;
        Ok(self)
    }

    pub fn read<R: BufRead>(
        reader: R,
        format: VectorFormat,
        expect_dim: Option<usize>,
    ) -> Result<Self> {
        let mut lines = reader.split(b'\n').enumerate().map(|(i, l)| (i + 1, l));
        let parse_err = |line, kind| Error::VectorParse { line, kind };

        let mut declared_count = None;
        let mut store: Option<VectorStore> = None;
        let mut pending: Option<(usize, String, Vec<f64>)> = None;

        if format == VectorFormat::Word2VecText {
            let (lineno, header) = match lines.next() {
                Some((n, l)) => (n, l?),
                None => {
                    return Err(parse_err(
                        1,
                        VectorParseError::MalformedHeader("missing header".into()),
                    ))
                }
            };
            let header = decode_line(&header).map_err(|k| parse_err(lineno, k))?;
            let (count, dim) = parse_header(header).map_err(|k| parse_err(lineno, k))?;
            check_expected_dim(dim, expect_dim).map_err(|k| parse_err(lineno, k))?;
            declared_count = Some(count);
            store = Some(VectorStore::empty(dim));
        }

        for (lineno, raw) in lines {
            let raw = raw?;
            let line = decode_line(&raw).map_err(|k| parse_err(lineno, k))?;
            if line.trim().is_empty() {
                // A trailing newline at end of file yields one empty split.
                pending = Some((lineno, String::new(), Vec::new()));
                continue;
            }
            if let Some((n, _, _)) = pending.take() {
                return Err(parse_err(n, VectorParseError::EmptyLine));
            }
            let (word, components) = parse_row(line).map_err(|k| parse_err(lineno, k))?;
            let store = match store.as_mut() {
                Some(s) => s,
                None => {
                    let dim = components.len();
                    if dim == 0 {
                        return Err(parse_err(
                            lineno,
                            VectorParseError::DimensionMismatch {
                                expected: expect_dim.unwrap_or(1),
                                found: 0,
                            },
                        ));
                    }
                    check_expected_dim(dim, expect_dim).map_err(|k| parse_err(lineno, k))?;
                    store.insert(VectorStore::empty(dim))
                }
            };
            store
                .push(word, &components)
                .map_err(|k| parse_err(lineno, k))?;
        }

        let store = match store {
            Some(s) => s,
            None => {
                return Err(parse_err(
                    1,
                    VectorParseError::MalformedHeader("file contains no vectors".into()),
                ))
            }
        };
        if let Some(expected) = declared_count {
            if expected != store.len() {
                return Err(parse_err(
                    store.len() + 2,
                    VectorParseError::CountMismatch {
                        expected,
                        found: store.len(),
                    },
                ));
            }
        }
        Ok(store)
    }
}

fn decode_line(raw: &[u8]) -> Result<&str, VectorParseError> {
    let line = std::str::from_utf8(raw).map_err(|_| VectorParseError::InvalidUtf8)?;
    Ok(line.strip_suffix('\r').unwrap_or(line))
}

fn parse_header(line: &str) -> Result<(usize, usize), VectorParseError> {
    let fields: Vec<&str> = line.split_ascii_whitespace().collect();
    let bad = || VectorParseError::MalformedHeader(line.to_string());
    if fields.len() != 2 {
        return Err(bad());
    }
    let count = fields[0].parse::<usize>().map_err(|_| bad())?;
    let dim = fields[1].parse::<usize>().map_err(|_| bad())?;
    if dim == 0 {
        return Err(bad());
    }
    Ok((count, dim))
}

fn parse_row(line: &str) -> Result<(String, Vec<f64>), VectorParseError> {
    let mut fields = line.split_ascii_whitespace();
    let word = fields.next().ok_or(VectorParseError::EmptyLine)?.to_string();
    let components = fields
        .map(|f| {
            f.parse::<f64>().map_err(|_| VectorParseError::BadNumber {
                token: word.clone(),
                value: f.to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((word, components))
}

fn check_expected_dim(dim: usize, expect: Option<usize>) -> Result<(), VectorParseError> {
    match expect {
        Some(e) if e != dim => Err(VectorParseError::DimensionMismatch {
            expected: e,
            found: dim,
        }),
        _ => Ok(()),
    }
}

/// Loads an un-normalized store from disk. Call [`VectorStore::normalize`]
/// before embedding.
pub fn load_vectors(
    path: impl AsRef<Path>,
    format: VectorFormat,
    expect_dim: Option<usize>,
) -> Result<VectorStore> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    VectorStore::read(BufReader::new(file), format, expect_dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn read(text: &str) -> Result<VectorStore> {
        VectorStore::read(text.as_bytes(), VectorFormat::Word2VecText, None)
    }

    #[test]
    fn minimal_file() {
        let s = read("2 3\na 1 0 0\nb 0 1 0").unwrap();
        assert_eq!(s.dimension(), 3);
        assert_eq!(s.len(), 2);
        assert!(!s.is_normalized());
        assert_eq!(s.lookup("b"), Some(&[0.0, 1.0, 0.0][..]));
    }

    #[test]
    fn trailing_newline_and_trailing_space_are_accepted() {
        let s = read("2 2\na 1 0 \nb 0 1\n").unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn dimension_mismatch_names_line() {
        match read("1 2\na 1 0 0") {
            Err(Error::VectorParse {
                line: 2,
                kind: VectorParseError::DimensionMismatch { expected: 2, found: 3 },
            }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_token() {
        match read("2 2\na 1 0\na 0 1") {
            Err(Error::VectorParse {
                line: 3,
                kind: VectorParseError::DuplicateToken(t),
            }) => assert_eq!(t, "a"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_header_and_non_finite() {
        assert!(matches!(
            read("two 2\na 1 0"),
            Err(Error::VectorParse { line: 1, kind: VectorParseError::MalformedHeader(_) })
        ));
        assert!(matches!(
            read("1 2\na inf 0"),
            Err(Error::VectorParse { line: 2, kind: VectorParseError::NonFinite(_) })
        ));
        assert!(matches!(
            read("1 2\na NaN 0"),
            Err(Error::VectorParse { line: 2, kind: VectorParseError::NonFinite(_) })
        ));
        assert!(matches!(
            read("1 2\na x 0"),
            Err(Error::VectorParse { line: 2, kind: VectorParseError::BadNumber { .. } })
        ));
    }

    #[test]
    fn count_mismatch_and_expected_dim() {
        assert!(matches!(
            read("3 2\na 1 0\nb 0 1\n"),
            Err(Error::VectorParse { kind: VectorParseError::CountMismatch { expected: 3, found: 2 }, .. })
        ));
        let r = VectorStore::read("1 2\na 1 0".as_bytes(), VectorFormat::Word2VecText, Some(3));
        assert!(matches!(
            r,
            Err(Error::VectorParse { line: 1, kind: VectorParseError::DimensionMismatch { .. } })
        ));
    }

    #[test]
    fn glove_infers_dimension_from_first_row() {
        let s = VectorStore::read("a 1 2\nb 3 4\n".as_bytes(), VectorFormat::GloveText, None)
            .unwrap();
        assert_eq!((s.dimension(), s.len()), (2, 2));
        let bad = VectorStore::read("a 1 2\nb 3\n".as_bytes(), VectorFormat::GloveText, None);
        assert!(matches!(bad, Err(Error::VectorParse { line: 2, .. })));
    }

    #[test]
    fn normalize_examples() {
        let s = VectorStore::from_entries(
            2,
            [("x".to_string(), vec![3.0, 4.0]), ("y".to_string(), vec![1.0, 0.0])],
        )
        .unwrap()
        .normalize()
        .unwrap();
        let x = s.lookup("x").unwrap();
        assert!((x[0] - 0.6).abs() < 1e-15 && (x[1] - 0.8).abs() < 1e-15);
        assert_eq!(s.lookup("y").unwrap(), &[1.0, 0.0]);

        let z = VectorStore::from_entries(2, [("z".to_string(), vec![0.0, 0.0])])
            .unwrap()
            .normalize();
        assert!(matches!(z, Err(Error::ZeroNormVector(t)) if t == "z"));
    }

    #[test]
    fn lookup_absent() {
        let s = read("2 3\na 1 0 0\nb 0 1 0").unwrap();
        assert!(s.lookup("zzz").is_none());
        let empty = VectorStore::from_entries(3, Vec::new()).unwrap();
        assert!(empty.lookup("a").is_none());
        assert!(empty.is_empty());
    }

    #[test]
    fn tokens_are_not_case_folded() {
        let s = read("2 1\nHotel 1\nhotel 2").unwrap();
        assert_eq!(s.lookup("Hotel"), Some(&[1.0][..]));
        assert_eq!(s.lookup("hotel"), Some(&[2.0][..]));
    }

    fn store_strategy() -> impl Strategy<Value = VectorStore> {
        (1usize..6).prop_flat_map(|dim| {
            prop::collection::vec(
                prop::collection::vec(-10.0f64..10.0, dim)
                    .prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3)),
                1..12,
            )
            .prop_map(move |rows| {
                VectorStore::from_entries(
                    dim,
                    rows.into_iter().enumerate().map(|(i, r)| (format!("w{i}"), r)),
                )
                .unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn normalization_is_unit_idempotent_and_direction_preserving(store in store_strategy()) {
            let once = store.clone().normalize().unwrap();
            let twice = once.clone().normalize().unwrap();
            prop_assert_eq!(once.len(), store.len());
            prop_assert_eq!(once.dimension(), store.dimension());
            for ((w, raw), (_, u)) in store.iter().zip(once.iter()) {
                prop_assert!((linalg::norm(u) - 1.0).abs() < 1e-9);
                let cos = linalg::dot(raw, u) / linalg::norm(raw);
                prop_assert!((cos - 1.0).abs() < 1e-12);
                let u2 = twice.lookup(w).unwrap();
                for (a, b) in u.iter().zip(u2) {
                    prop_assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }
}
