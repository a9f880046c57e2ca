//! RBF kernels over fixed-dimensional embedding vectors.
//!
//! The kernel is `exp(-||x - y|| / (2 sigma^2))` with the plain (not
//! squared) Euclidean distance in the exponent. `squared_distance = true`
//! switches to the conventional Gaussian `exp(-||x - y||^2 / (2 sigma^2))`.

use alloc::vec::Vec;

use crate::algebra::{ids_of, KernelMatrix, Provenance};
use crate::error::{data_err, invalid, Result};
use crate::exec::{self, Executor};
use crate::linalg::Matrix;
use crate::lrd::{check_sigma, rbf};
use crate::recipe::Component;
use crate::text::Sample;

fn squared_euclidean(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).fold(0.0, |acc, (a, b)| {
        let d = a - b;
        acc + d * d
    })
}

pub fn euclidean_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(invalid!("embedding dimensions differ ({} vs {})", x.len(), y.len()));
    }
    if !x.iter().chain(y).all(|v| v.is_finite()) {
        return Err(data_err!("embedding contains a non-finite entry"));
    }
    Ok(libm::sqrt(squared_euclidean(x, y)))
}

/// Vectors of one embedding channel, checked for a common dimension and
/// finite entries.
pub fn channel_vectors<'a>(samples: &'a [Sample], channel: &str) -> Result<Vec<&'a [f64]>> {
    let mut dim = None;
    samples
        .iter()
        .map(|s| {
            let v = s.embedding(channel).ok_or_else(|| data_err!("sample {} has no embedding {}", s.id, channel))?;
            match dim {
                None => dim = Some(v.len()),
                Some(d) if d != v.len() => {
                    return Err(data_err!("sample {} embedding {} has dimension {}, expected {}", s.id, channel, v.len(), d))
                }
                Some(_) => {}
            }
            if v.is_empty() {
                return Err(data_err!("sample {} embedding {} is empty", s.id, channel));
            }
            if !v.iter().all(|x| x.is_finite()) {
                return Err(data_err!("sample {} embedding {} has a non-finite entry", s.id, channel));
            }
            Ok(v)
        })
        .collect()
}

fn exponent_distance(x: &[f64], y: &[f64], squared_distance: bool) -> f64 {
    let sq = squared_euclidean(x, y);
    if squared_distance {
        sq
    } else {
        libm::sqrt(sq)
    }
}

/// Pairwise distance matrix (plain or squared, per the flag) over vectors.
pub fn distance_matrix<E: Executor + ?Sized>(exec: &E, vectors: &[&[f64]], squared_distance: bool) -> Matrix {
    exec::fill_symmetric(exec, vectors.len(), |i, j| exponent_distance(vectors[i], vectors[j], squared_distance))
}

/// Elementwise RBF transform of a distance matrix.
pub fn rbf_from_distances(distances: &Matrix, sigma: f64) -> Result<Matrix> {
    check_sigma(sigma)?;
    let data = distances.as_slice().iter().map(|d| rbf(*d, sigma)).collect();
    Matrix::from_vec(distances.rows(), distances.cols(), data)
}

pub fn rbf_embedding_matrix<E: Executor + ?Sized>(
    exec: &E,
    rows: &[Sample],
    cols: &[Sample],
    channel: &str,
    sigma: f64,
    squared_distance: bool,
) -> Result<KernelMatrix> {
    check_sigma(sigma)?;
    let mut all = channel_vectors(rows, channel)?;
    all.extend(channel_vectors(cols, channel)?);
    if let (Some(a), Some(b)) = (all.first(), all.last()) {
        if a.len() != b.len() {
            return Err(data_err!("embedding {} dimensions differ between row and column samples", channel));
        }
    }
    let n = rows.len();
    let values = exec::fill(exec, n, cols.len(), |i, j| rbf(exponent_distance(all[i], all[n + j], squared_distance), sigma));
    let component = Component::embedding(channel, sigma).squared_distance(squared_distance);
    KernelMatrix::new(values, ids_of(rows), ids_of(cols), Provenance::single(component, false))
}

/// RBF self-similarity matrix; exactly symmetric with unit diagonal.
pub fn rbf_embedding_self_matrix<E: Executor + ?Sized>(
    exec: &E,
    samples: &[Sample],
    channel: &str,
    sigma: f64,
    squared_distance: bool,
) -> Result<KernelMatrix> {
    check_sigma(sigma)?;
    let vectors = channel_vectors(samples, channel)?;
    let values = rbf_from_distances(&distance_matrix(exec, &vectors, squared_distance), sigma)?;
    let ids = ids_of(samples);
    let component = Component::embedding(channel, sigma).squared_distance(squared_distance);
    KernelMatrix::new(values, ids.clone(), ids, Provenance::single(component, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use alloc::vec;

    #[test]
    fn distance_examples() {
        assert_eq!(euclidean_distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(euclidean_distance(&[1.5, -2.0], &[1.5, -2.0]).unwrap(), 0.0);
        assert_eq!(euclidean_distance(&[1.0], &[-1.0]).unwrap(), 2.0);
    }

    #[test]
    fn distance_errors() {
        assert!(matches!(euclidean_distance(&[1.0], &[1.0, 2.0]), Err(crate::Error::InvalidParameter(_))));
        assert!(matches!(euclidean_distance(&[f64::NAN], &[1.0]), Err(crate::Error::Data(_))));
    }

    #[test]
    fn kernel_examples() {
        let s = [
            Sample::new("a", None).with_embedding("e", vec![0.0, 0.0]),
            Sample::new("b", None).with_embedding("e", vec![3.0, 4.0]),
            Sample::new("c", None).with_embedding("e", vec![2.0, 0.0]),
        ];
        let k = rbf_embedding_self_matrix(&Sequential, &s, "e", 1.0, false).unwrap();
        assert_eq!(k.values[(0, 0)], 1.0);
        assert!((k.values[(0, 1)] - libm::exp(-2.5)).abs() < 1e-15);
        assert!((k.values[(0, 1)] - 0.0821).abs() < 1e-4);
        assert!((k.values[(0, 2)] - 0.3679).abs() < 1e-4);
        let sq = rbf_embedding_self_matrix(&Sequential, &s, "e", 1.0, true).unwrap();
        assert!((sq.values[(0, 2)] - libm::exp(-2.0)).abs() < 1e-15);
        let cross = rbf_embedding_matrix(&Sequential, &s, &s, "e", 1.0, false).unwrap();
        assert_eq!(cross.values, k.values);
    }

    #[test]
    fn missing_embedding_names_sample() {
        let s = [Sample::new("ghost", None)];
        let err = rbf_embedding_self_matrix(&Sequential, &s, "e", 1.0, false).unwrap_err();
        assert!(alloc::format!("{err}").contains("ghost"));
    }
}
