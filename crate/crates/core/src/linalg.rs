//! Small dense-vector helpers shared by the embedding and PCA code.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `acc += scale * x`
pub fn axpy(acc: &mut [f64], scale: f64, x: &[f64]) {
    debug_assert_eq!(acc.len(), x.len());
    for (a, v) in acc.iter_mut().zip(x) {
        *a += scale * v;
    }
}

pub fn scaled(a: &[f64], scale: f64) -> Vec<f64> {
    a.iter().map(|x| x * scale).collect()
}

/// Sine of the angle between two unit vectors, accurate for small angles.
pub fn unit_sin_angle(a: &[f64], b: &[f64]) -> f64 {
    let cos = dot(a, b);
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let r = x - cos * y;
            r * r
        })
        .sum::<f64>()
        .sqrt()
}
