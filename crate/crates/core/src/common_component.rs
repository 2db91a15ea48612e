//! First principal component of a document-embedding matrix and its removal,
//! `u ← u − p (p · u)`.
//!
//! `p` is the dominant eigenvector of the Gram matrix `XᵀX` (rows of `X` are
//! documents), found by power iteration. By default `X` is not mean-centered.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::embedder::DocEmbedding;
use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalComponent {
    /// Unit vector; its first component with magnitude above 1e-12 is positive.
    pub vector: Vec<f64>,
    pub iterations: usize,
    /// `‖Gp − λp‖ / λ` at the returned `p`, with `λ = pᵀGp`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcaOptions {
    /// Subtract the column mean before forming the Gram matrix.
    pub center: bool,
    /// Stop once successive iterates differ by less than this angle (radians).
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Non-convergence is an error only if the residual exceeds this.
    pub residual_limit: f64,
}

impl Default for PcaOptions {
    fn default() -> Self {
        PcaOptions {
            center: false,
            tolerance: 1e-9,
            max_iterations: 1000,
            residual_limit: 1e-6,
        }
    }
}

/// Weight of the fixed pseudo-random direction mixed into the start vector.
const START_JITTER: f64 = 1e-2;
const START_SEED: u64 = 0x5eed;

pub fn first_principal_component<R: AsRef<[f64]>>(rows: &[R]) -> Result<PrincipalComponent> {
    first_principal_component_with(rows, &PcaOptions::default())
}

pub fn first_principal_component_with<R: AsRef<[f64]>>(
    rows: &[R],
    options: &PcaOptions,
) -> Result<PrincipalComponent> {
    if rows.len() < 2 {
        return Err(Error::TooFewRows(rows.len()));
    }
    let dim = rows[0].as_ref().len();
    if dim == 0 {
        return Err(Error::InvalidParameter("rows must have at least one column".into()));
    }
    for r in rows {
        let r = r.as_ref();
        if r.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: r.len() });
        }
        if r.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
    }

    let mean = if options.center {
        let mut m = vec![0.0; dim];
        for r in rows {
            linalg::axpy(&mut m, 1.0, r.as_ref());
        }
        m.iter_mut().for_each(|x| *x /= rows.len() as f64);
        Some(m)
    } else {
        None
    };

    // Gram matrix, accumulated row by row in input order.
    let mut gram = vec![0.0; dim * dim];
    let mut col_sum = vec![0.0; dim];
    let mut centered = vec![0.0; dim];
    for r in rows {
        let r = r.as_ref();
        let x: &[f64] = match &mean {
            Some(m) => {
                for ((c, v), mu) in centered.iter_mut().zip(r).zip(m) {
                    *c = v - mu;
                }
                &centered
            }
            None => r,
        };
        linalg::axpy(&mut col_sum, 1.0, x);
        for (i, xi) in x.iter().enumerate() {
            if *xi != 0.0 {
                linalg::axpy(&mut gram[i * dim..(i + 1) * dim], *xi, x);
            }
        }
    }
    if gram.iter().all(|&g| g == 0.0) {
        return Err(Error::ZeroMatrix);
    }

    let mut p = start_vector(&col_sum);
    let mut next = vec![0.0; dim];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_iterations {
        iterations += 1;
        gram_times(&gram, &p, &mut next);
        let n = linalg::norm(&next);
        if n == 0.0 {
            // Start fell in the null space; unreachable with the jittered start
            // unless the spectrum is degenerate.
            return Err(Error::ZeroMatrix);
        }
        next.iter_mut().for_each(|x| *x /= n);
        let change = linalg::unit_sin_angle(&next, &p);
        std::mem::swap(&mut p, &mut next);
        if change < options.tolerance {
            converged = true;
            break;
        }
    }

    gram_times(&gram, &p, &mut next);
    let lambda = linalg::dot(&p, &next);
    let residual = next
        .iter()
        .zip(&p)
        .map(|(g, x)| (g - lambda * x).powi(2))
        .sum::<f64>()
        .sqrt()
        / lambda;
    if !converged && (residual.is_nan() || residual > options.residual_limit) {
        return Err(Error::NoConvergence { iterations, residual });
    }

    sign_normalize(&mut p);
    Ok(PrincipalComponent { vector: p, iterations, residual })
}

/// Normalized column sum plus a small fixed pseudo-random direction, so the
/// start is not orthogonal to the dominant eigenvector when the column sum
/// happens to be (e.g. rows that cancel symmetrically).
fn start_vector(col_sum: &[f64]) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let jitter: Vec<f64> = (0..col_sum.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let jitter = linalg::scaled(&jitter, 1.0 / linalg::norm(&jitter));
    let n = linalg::norm(col_sum);
    let mut start = if n < 1e-12 {
        let mut e1 = vec![0.0; col_sum.len()];
        e1[0] = 1.0;
        e1
    } else {
        linalg::scaled(col_sum, 1.0 / n)
    };
    linalg::axpy(&mut start, START_JITTER, &jitter);
    let n = linalg::norm(&start);
    start.iter_mut().for_each(|x| *x /= n);
    start
}

fn gram_times(gram: &[f64], x: &[f64], out: &mut [f64]) {
    let dim = x.len();
    for (i, o) in out.iter_mut().enumerate() {
        *o = linalg::dot(&gram[i * dim..(i + 1) * dim], x);
    }
}

fn sign_normalize(p: &mut [f64]) {
    if let Some(first) = p.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            p.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// `u − p (p · u)`
pub fn project_out(u: &[f64], p: &[f64]) -> Vec<f64> {
    let s = linalg::dot(p, u);
    u.iter().zip(p).map(|(x, q)| x - q * s).collect()
}

/// Projects `p` out of every embedding vector. The results are not
/// renormalized; a vector equal to `p` becomes zero.
pub fn remove_common_component(
    mut embeddings: Vec<DocEmbedding>,
    pc: &PrincipalComponent,
) -> Result<Vec<DocEmbedding>> {
    for e in &mut embeddings {
        if e.vector.len() != pc.vector.len() {
            return Err(Error::DimensionMismatch {
                expected: pc.vector.len(),
                found: e.vector.len(),
            });
        }
        e.vector = project_out(&e.vector, &pc.vector);
        e.common_component_removed = true;
    }
    Ok(embeddings)
}

/// `PC <dim> f1 ... f_dim`
pub fn format_component(pc: &PrincipalComponent) -> String {
    let mut s = format!("PC {}", pc.vector.len());
    for x in &pc.vector {
        s.push_str(&format!(" {x}"));
    }
    s
}

pub fn parse_component(line: &str) -> Result<Vec<f64>> {
    let fmt = |message: String| Error::Format { line: 1, message };
    let mut fields = line.split_ascii_whitespace();
    if fields.next() != Some("PC") {
        return Err(fmt("expected `PC` prefix".into()));
    }
    let dim: usize = fields
        .next()
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| fmt("bad dimension".into()))?;
    let v = fields
        .map(|f| f.parse::<f64>().map_err(|_| fmt(format!("bad component {f:?}"))))
        .collect::<Result<Vec<_>>>()?;
    if v.len() != dim {
        return Err(fmt(format!("declared {dim} components, found {}", v.len())));
    }
    Ok(v)
}
