//! Word weight functions of corpus frequency.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::corpus_stats::CorpusStats;
use crate::error::{Error, Result};

pub const DEFAULT_SIF_A: f64 = 1e-4;
pub const DEFAULT_SUBSAMPLE_T: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightKind {
    Idf,
    Sif,
    Subsample,
    Unit,
}

impl WeightKind {
    pub fn name(self) -> &'static str {
        match self {
            WeightKind::Idf => "idf",
            WeightKind::Sif => "sif",
            WeightKind::Subsample => "subsample",
            WeightKind::Unit => "unit",
        }
    }
}

impl FromStr for WeightKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "idf" => Ok(WeightKind::Idf),
            "sif" => Ok(WeightKind::Sif),
            "subsample" => Ok(WeightKind::Subsample),
            "unit" => Ok(WeightKind::Unit),
            other => Err(Error::InvalidParameter(format!("unknown weight scheme {other:?}"))),
        }
    }
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightScheme {
    pub kind: WeightKind,
    /// SIF smoothing parameter.
    pub a: f64,
    /// Subsampling threshold.
    pub t: f64,
    /// Use min-max rescaled idf instead of raw idf.
    pub scaled_idf: bool,
}

impl WeightScheme {
    pub fn new(kind: WeightKind) -> Self {
        WeightScheme {
            kind,
            a: DEFAULT_SIF_A,
            t: DEFAULT_SUBSAMPLE_T,
            scaled_idf: false,
        }
    }

    pub fn idf() -> Self {
        Self::new(WeightKind::Idf)
    }

    pub fn sif(a: f64) -> Self {
        WeightScheme { a, ..Self::new(WeightKind::Sif) }
    }

    pub fn subsample(t: f64) -> Self {
        WeightScheme { t, ..Self::new(WeightKind::Subsample) }
    }

    pub fn unit() -> Self {
        Self::new(WeightKind::Unit)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidParameter(format!("SIF parameter a must be positive, got {}", self.a)));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidParameter(format!("subsample threshold t must be positive, got {}", self.t)));
        }
        Ok(())
    }

    /// Identifies the weight function, including only the parameters it reads.
    pub fn fingerprint(&self) -> String {
        match self.kind {
            WeightKind::Idf if self.scaled_idf => "idf(scaled)".to_string(),
            WeightKind::Idf => "idf".to_string(),
            WeightKind::Sif => format!("sif(a={:e})", self.a),
            WeightKind::Subsample => format!("subsample(t={:e})", self.t),
            WeightKind::Unit => "unit".to_string(),
        }
    }

    /// `wᵢ` for a counted word.
    pub fn weight(&self, word: &str, corpus: &CorpusStats) -> Result<f64> {
        match self.kind {
            WeightKind::Idf if self.scaled_idf => corpus.scaled_idf(word),
            WeightKind::Idf => corpus.idf(word),
            WeightKind::Sif => corpus_tf(word, corpus).map(|tf| sif_weight(self.a, tf)),
            WeightKind::Subsample => corpus_tf(word, corpus).map(|tf| subsample_weight(self.t, tf)),
            WeightKind::Unit => corpus_tf(word, corpus).map(|_| 1.0),
        }
    }

    /// Weight as a function of corpus frequency alone; `None` for idf, which
    /// depends on document frequency instead.
    pub fn weight_at(&self, corpus_tf: f64) -> Option<f64> {
        match self.kind {
            WeightKind::Idf => None,
            WeightKind::Sif => Some(sif_weight(self.a, corpus_tf)),
            WeightKind::Subsample => Some(subsample_weight(self.t, corpus_tf)),
            WeightKind::Unit => Some(1.0),
        }
    }
}

fn corpus_tf(word: &str, corpus: &CorpusStats) -> Result<f64> {
    corpus
        .corpus_tf(word)
        .ok_or_else(|| Error::UnknownWord(word.to_string()))
}

/// Smooth inverse frequency `a / (a + tf_ic)`.
pub fn sif_weight(a: f64, corpus_tf: f64) -> f64 {
    a / (a + corpus_tf)
}

/// word2vec subsampling keep-weight: `sqrt(t / tf_ic)` at or above `t`, else 1.
pub fn subsample_weight(t: f64, corpus_tf: f64) -> f64 {
    if corpus_tf >= t {
        (t / corpus_tf).sqrt()
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub corpus_tf: f64,
    pub scheme: String,
    pub weight: f64,
}

/// Weight curves sampled on a grid of corpus frequencies.
///
/// Idf has no closed form in `tf_ic`, so each idf row reports the rescaled idf
/// of the counted word whose `tf_ic` is nearest the grid point on a log scale
/// (ties go to the smaller token).
pub fn emit_weight_curves(
    corpus: &CorpusStats,
    schemes: &[WeightScheme],
    grid: &[f64],
) -> Result<Vec<CurveRow>> {
    if let Some(bad) = grid.iter().find(|&&g| !(g > 0.0 && g <= 1.0)) {
        return Err(Error::InvalidParameter(format!("grid value {bad} outside (0, 1]")));
    }
    for s in schemes {
        s.validate()?;
    }
    let mut rows = Vec::with_capacity(grid.len() * schemes.len());
    let needs_idf = !grid.is_empty() && schemes.iter().any(|s| s.kind == WeightKind::Idf);
    let by_tf: Vec<(f64, &str)> = if needs_idf {
        corpus.iter().map(|(w, _)| (corpus.corpus_tf(w).unwrap().ln(), w)).collect()
    } else {
        Vec::new()
    };
    for &g in grid {
        for s in schemes {
            let weight = match s.weight_at(g) {
                Some(w) => w,
                None => {
                    let target = g.ln();
                    let (_, word) = by_tf
                        .iter()
                        .min_by(|a, b| (a.0 - target).abs().total_cmp(&(b.0 - target).abs()))
                        .ok_or(Error::EmptyCorpus)?;
                    corpus.scaled_idf(word)?
                }
            };
            rows.push(CurveRow {
                corpus_tf: g,
                scheme: s.kind.name().to_string(),
                weight,
            });
        }
    }
    Ok(rows)
}

pub fn write_curves_csv<W: Write>(rows: &[CurveRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["tf_corpus", "scheme", "weight"])?;
    for r in rows {
        out.write_record([format!("{:e}", r.corpus_tf), r.scheme.clone(), format!("{}", r.weight)])?;
    }
    out.flush()?;
    Ok(())
}

/// `n` points spaced evenly in log10 between `lo` and `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..n)
                .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
                .collect()
        }
    }
}
