//! Kernel-matrix algebra: normalization, sums, squaring, the joint
//! train∪test protocol and a PSD diagnostic.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{data_err, invalid, Result};
use crate::exec::{self, Executor};
use crate::linalg::{dot, Matrix, SymmetricEigen};
use crate::recipe::{build_component, Component};
use crate::text::Sample;

/// Which recipe components a matrix was built from, and whether it is a
/// self-similarity matrix (rows and columns index the same samples).
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub components: Vec<Component>,
    pub self_similarity: bool,
}

impl Provenance {
    pub fn single(component: Component, self_similarity: bool) -> Self {
        Self { components: alloc::vec![component], self_similarity }
    }
}

/// Dense kernel matrix with the sample ids of its rows and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub values: Matrix,
    pub row_ids: Vec<String>,
    pub col_ids: Vec<String>,
    pub provenance: Provenance,
}

impl KernelMatrix {
    pub fn new(values: Matrix, row_ids: Vec<String>, col_ids: Vec<String>, provenance: Provenance) -> Result<Self> {
        if values.rows() != row_ids.len() || values.cols() != col_ids.len() {
            return Err(invalid!(
                "{}x{} matrix does not match {} row ids and {} column ids",
                values.rows(),
                values.cols(),
                row_ids.len(),
                col_ids.len()
            ));
        }
        if !values.all_finite() {
            return Err(invalid!("kernel matrix has non-finite entries"));
        }
        if provenance.self_similarity && row_ids != col_ids {
            return Err(invalid!("self-similarity matrix with different row and column ids"));
        }
        Ok(Self { values, row_ids, col_ids, provenance })
    }

    pub fn is_self_similarity(&self) -> bool {
        self.provenance.self_similarity
    }

    fn with_values(&self, values: Matrix, provenance: Provenance) -> KernelMatrix {
        KernelMatrix { values, row_ids: self.row_ids.clone(), col_ids: self.col_ids.clone(), provenance }
    }

    fn flag_components(&self, f: impl Fn(&mut Component)) -> Provenance {
        let mut p = self.provenance.clone();
        p.components.iter_mut().for_each(f);
        p
    }
}

pub(crate) fn ids_of(samples: &[Sample]) -> Vec<String> {
    samples.iter().map(|s| s.id.clone()).collect()
}

fn require_self(k: &KernelMatrix, op: &str) -> Result<()> {
    if !k.values.is_square() || !k.is_self_similarity() {
        return Err(invalid!("{op} needs a square self-similarity matrix"));
    }
    Ok(())
}

#[inline]
fn normalized_cell(kij: f64, kii: f64, kjj: f64) -> f64 {
    if kii == 0.0 || kjj == 0.0 {
        0.0
    } else {
        kij / libm::sqrt(kii * kjj)
    }
}

/// `K_ij / sqrt(K_ii K_jj)` with an exactly-unit diagonal. A row whose
/// diagonal entry is zero becomes zero off the diagonal.
pub fn normalize(k: &KernelMatrix) -> Result<KernelMatrix> {
    require_self(k, "normalize")?;
    let diag = k.values.diagonal();
    let values = normalize_values(&k.values, &diag, &diag, true);
    Ok(k.with_values(values, k.flag_components(|c| c.normalized = true)))
}

/// Normalizes a cross block given the self-similarities of its row and
/// column samples.
pub fn normalize_cross(k: &KernelMatrix, row_diag: &[f64], col_diag: &[f64]) -> Result<KernelMatrix> {
    if row_diag.len() != k.values.rows() || col_diag.len() != k.values.cols() {
        return Err(invalid!("diagonal lengths do not match the cross matrix"));
    }
    let values = normalize_values(&k.values, row_diag, col_diag, false);
    Ok(k.with_values(values, k.flag_components(|c| c.normalized = true)))
}

pub(crate) fn normalize_values(k: &Matrix, row_diag: &[f64], col_diag: &[f64], unit_diagonal: bool) -> Matrix {
    let mut out = Matrix::zeros(k.rows(), k.cols());
    for i in 0..k.rows() {
        for j in 0..k.cols() {
            out[(i, j)] = if unit_diagonal && i == j { 1.0 } else { normalized_cell(k[(i, j)], row_diag[i], col_diag[j]) };
        }
    }
    out
}

/// Entrywise sum, accumulated left to right in the order given.
pub fn sum_kernels(parts: &[KernelMatrix]) -> Result<KernelMatrix> {
    let first = parts.first().ok_or_else(|| invalid!("cannot sum an empty list of kernels"))?;
    let mut values = first.values.clone();
    let mut provenance = first.provenance.clone();
    for part in &parts[1..] {
        if part.row_ids != first.row_ids || part.col_ids != first.col_ids {
            return Err(invalid!("kernel matrices index different samples"));
        }
        for (a, b) in values.as_mut_slice().iter_mut().zip(part.values.as_slice()) {
            *a += b;
        }
        provenance.components.extend(part.provenance.components.iter().cloned());
        provenance.self_similarity &= part.provenance.self_similarity;
    }
    Ok(first.with_values(values, provenance))
}

/// `K K^T`, positive semidefinite by construction and exactly symmetric.
pub fn square_kernel<E: Executor + ?Sized>(exec: &E, k: &KernelMatrix) -> Result<KernelMatrix> {
    if !k.values.is_square() {
        return Err(invalid!("square_kernel needs a square matrix, got {}x{}", k.values.rows(), k.values.cols()));
    }
    let values = square_values(exec, &k.values);
    Ok(k.with_values(values, k.flag_components(|c| c.squared = true)))
}

pub(crate) fn square_values<E: Executor + ?Sized>(exec: &E, k: &Matrix) -> Matrix {
    exec::fill_symmetric(exec, k.rows(), |i, j| dot(k.row(i), k.row(j)))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(k: &KernelMatrix) -> Result<f64> {
    let v = &k.values;
    if !v.is_square() {
        return Err(invalid!("min_eigenvalue needs a square matrix"));
    }
    let tol = 1e-9 * v.max_abs().max(1.0);
    if v.max_asymmetry() > tol {
        return Err(invalid!("matrix is not symmetric (asymmetry {:e})", v.max_asymmetry()));
    }
    let eig = SymmetricEigen::new(v)?;
    Ok(eig.values.first().copied().unwrap_or(f64::INFINITY))
}

/// Splits a joint matrix whose first `n_train` ids are the training samples
/// into its train×train and test×train blocks.
pub fn split_joint(joint: &KernelMatrix, n_train: usize) -> Result<(KernelMatrix, KernelMatrix)> {
    require_self(joint, "split_joint")?;
    let n = joint.values.rows();
    if n_train > n {
        return Err(invalid!("n_train {n_train} exceeds joint size {n}"));
    }
    let train_ids = joint.row_ids[..n_train].to_vec();
    let test_ids = joint.row_ids[n_train..].to_vec();
    let tt = KernelMatrix {
        values: joint.values.block(0, n_train, 0, n_train),
        row_ids: train_ids.clone(),
        col_ids: train_ids.clone(),
        provenance: joint.provenance.clone(),
    };
    let mut cross_prov = joint.provenance.clone();
    cross_prov.self_similarity = false;
    let xt =
        KernelMatrix { values: joint.values.block(n_train, n, 0, n_train), row_ids: test_ids, col_ids: train_ids, provenance: cross_prov };
    Ok((tt, xt))
}

/// Concatenates train and test after checking their ids are disjoint.
pub fn joint_samples(train: &[Sample], test: &[Sample]) -> Result<Vec<Sample>> {
    let train_ids: BTreeSet<&str> = train.iter().map(|s| s.id.as_str()).collect();
    if let Some(s) = test.iter().find(|s| train_ids.contains(s.id.as_str())) {
        return Err(data_err!("sample id {} appears in both train and test", s.id));
    }
    let mut all = train.to_vec();
    all.extend_from_slice(test);
    Ok(all)
}

/// Builds one recipe component over train∪test (including normalization
/// and squaring on the joint matrix) and returns the train×train and
/// test×train blocks.
pub fn joint_matrix_protocol<E: Executor + ?Sized>(
    exec: &E,
    train: &[Sample],
    test: &[Sample],
    component: &Component,
) -> Result<(KernelMatrix, KernelMatrix)> {
    let all = joint_samples(train, test)?;
    let joint = build_component(exec, &all, component)?;
    split_joint(&joint, train.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::recipe::Component;
    use crate::string_kernels::{PgramRange, StringKernelKind};
    use alloc::string::ToString;
    use alloc::vec;

    fn self_matrix(rows: &[&[f64]]) -> KernelMatrix {
        let values = Matrix::from_rows(rows).unwrap();
        let ids: Vec<String> = (0..rows.len()).map(|i| i.to_string()).collect();
        let c = Component::string(StringKernelKind::Presence, "t", PgramRange::single(1).unwrap()).normalized(false);
        KernelMatrix::new(values, ids.clone(), ids, Provenance::single(c, true)).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let k = normalize(&self_matrix(&[&[4.0, 2.0], &[2.0, 1.0]])).unwrap();
        assert_eq!(k.values.as_slice(), &[1.0, 1.0, 1.0, 1.0]);
        assert!(k.provenance.components[0].normalized);
        let i = normalize(&self_matrix(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert_eq!(i.values, Matrix::identity(2));
        let z = normalize(&self_matrix(&[&[4.0, 0.0], &[0.0, 0.0]])).unwrap();
        assert_eq!(z.values, Matrix::identity(2));
    }

    #[test]
    fn sum_examples() {
        let a = self_matrix(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let b = self_matrix(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(sum_kernels(core::slice::from_ref(&a)).unwrap().values, a.values);
        let s = sum_kernels(&[a.clone(), b]).unwrap();
        assert_eq!(s.values.as_slice(), &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(s.provenance.components.len(), 2);
        let three = sum_kernels(&[a.clone(), a.clone(), a]).unwrap();
        assert_eq!(three.values.diagonal(), vec![3.0, 3.0]);
        assert!(sum_kernels(&[]).is_err());
    }

    #[test]
    fn sum_rejects_mismatched_ids() {
        let a = self_matrix(&[&[1.0]]);
        let mut b = a.clone();
        b.row_ids = vec!["other".to_string()];
        b.col_ids = b.row_ids.clone();
        assert!(sum_kernels(&[a, b]).is_err());
    }

    #[test]
    fn square_examples() {
        let sq = |rows: &[&[f64]]| square_kernel(&Sequential, &self_matrix(rows)).unwrap().values;
        assert_eq!(sq(&[&[1.0, 0.0], &[0.0, 1.0]]), Matrix::identity(2));
        assert_eq!(sq(&[&[0.0, 1.0], &[1.0, 0.0]]), Matrix::identity(2));
        assert_eq!(sq(&[&[1.0, 1.0], &[1.0, 1.0]]).as_slice(), &[2.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn square_rejects_rectangular() {
        let c = Component::string(StringKernelKind::Presence, "t", PgramRange::single(1).unwrap());
        let k =
            KernelMatrix::new(Matrix::zeros(1, 2), vec!["a".into()], vec!["b".into(), "c".into()], Provenance::single(c, false)).unwrap();
        assert!(square_kernel(&Sequential, &k).is_err());
    }

    #[test]
    fn min_eigenvalue_examples() {
        assert_eq!(min_eigenvalue(&self_matrix(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap(), 1.0);
        assert_eq!(min_eigenvalue(&self_matrix(&[&[2.0, 0.0], &[0.0, 3.0]])).unwrap(), 2.0);
        assert!((min_eigenvalue(&self_matrix(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap() + 1.0).abs() < 1e-15);
        let mut k = self_matrix(&[&[1.0, 0.0], &[0.5, 1.0]]);
        k.values[(0, 1)] = 0.0;
        assert!(min_eigenvalue(&k).is_err());
    }

    #[test]
    fn joint_rejects_id_collision() {
        let a = [Sample::new("dup", None).with_text("t", "abc")];
        let c = Component::string(StringKernelKind::Presence, "t", PgramRange::single(1).unwrap());
        assert!(matches!(joint_matrix_protocol(&Sequential, &a, &a, &c), Err(crate::Error::Data(_))));
    }

    #[test]
    fn joint_with_empty_test() {
        let train = [Sample::new("a", None).with_text("t", "abc"), Sample::new("b", None).with_text("t", "abd")];
        let c = Component::string(StringKernelKind::Presence, "t", PgramRange::new(1, 2).unwrap());
        let (tt, xt) = joint_matrix_protocol(&Sequential, &train, &[], &c).unwrap();
        assert_eq!(xt.values.rows(), 0);
        assert_eq!(xt.values.cols(), 2);
        let direct = build_component(&Sequential, &train, &c).unwrap();
        assert_eq!(tt.values, direct.values);
    }
}
