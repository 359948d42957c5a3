//! Classical (Torgerson) multidimensional scaling.
//!
//! Squared distances are double-centered into a Gram matrix
//! `B = -1/2 J D² J` with `J = I - 11ᵀ/n`. The top eigenpairs of `B` give
//! coordinates `v * sqrt(max(λ, 0))`. Each eigenvector's sign is fixed so
//! its first non-negligible entry is positive, which makes layouts
//! reproducible.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::DistanceMatrix;

const SIGN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MdsEmbedding {
    pub dims: usize,
    /// One row of `dims` coordinates per item.
    pub coords: Vec<Vec<f64>>,
    /// Eigenvalues of the kept axes, descending, negatives clamped to 0.
    pub eigenvalues: Vec<f64>,
}

impl MdsEmbedding {
    /// CSV with header `id,x0,...` using the given item ids.
    pub fn to_csv(&self, ids: &[String]) -> Result<String> {
        if ids.len() != self.coords.len() {
            return Err(Error::validation(format!(
                "{} ids for {} MDS rows",
                ids.len(),
                self.coords.len()
            )));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["id".to_owned()];
        header.extend((0..self.dims).map(|i| format!("x{i}")));
        let err = |e: csv::Error| Error::validation(e.to_string());
        w.write_record(&header).map_err(err)?;
        for (id, row) in ids.iter().zip(&self.coords) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::validation(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
    }
}

pub fn classical_mds(m: &DistanceMatrix, dims: usize) -> Result<MdsEmbedding> {
    let n = m.size();
    if dims == 0 || n < dims + 1 {
        return Err(Error::validation(format!(
            "MDS into {dims} dimensions needs dims >= 1 and at least {} items, got {n}",
            dims + 1
        )));
    }

    let sq = DMatrix::from_fn(n, n, |i, j| {
        let d = m.get(i, j);
        d * d
    });
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let gram = DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand)
    });

    let eigen = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[b]
            .total_cmp(&eigen.eigenvalues[a])
            .then(a.cmp(&b))
    });

    let mut coords = vec![vec![0.0; dims]; n];
    let mut eigenvalues = Vec::with_capacity(dims);
    for (axis, &col) in order.iter().take(dims).enumerate() {
        let lambda = eigen.eigenvalues[col].max(0.0);
        eigenvalues.push(lambda);
        let v = eigen.eigenvectors.column(col);
        let sign = v
            .iter()
            .find(|x| x.abs() > SIGN_EPS)
            .map_or(1.0, |&x| x.signum());
        let scale = lambda.sqrt() * sign;
        for i in 0..n {
            coords[i][axis] = v[i] * scale;
        }
    }
    for axis in 0..dims {
        let mean = coords.iter().map(|r| r[axis]).sum::<f64>() / n as f64;
        for row in &mut coords {
            row[axis] -= mean;
        }
    }
    Ok(MdsEmbedding {
        dims,
        coords,
        eigenvalues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DistanceKind;

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn equilateral_triangle() {
        let m = DistanceMatrix::new(3, vec![1.0; 3], DistanceKind::Raw).unwrap();
        let e = classical_mds(&m, 2).unwrap();
        for i in 0..3 {
            for j in i + 1..3 {
                assert!((dist(&e.coords[i], &e.coords[j]) - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn two_points_on_a_line() {
        let m = DistanceMatrix::new(2, vec![3.5], DistanceKind::Raw).unwrap();
        let e = classical_mds(&m, 1).unwrap();
        assert!((e.coords[0][0] - e.coords[1][0]).abs() - 3.5 < 1e-12);
        assert!((e.coords[0][0] + e.coords[1][0]).abs() < 1e-12);
        assert!(e.coords[0][0] > 0.0);
    }

    #[test]
    fn recovers_planar_points() {
        let pts = [[0.0, 0.0], [3.0, 1.0], [-1.0, 2.5], [0.5, -4.0], [2.0, 2.0]];
        let m =
            DistanceMatrix::from_fn(5, DistanceKind::Raw, |i, j| dist(&pts[i], &pts[j])).unwrap();
        let e = classical_mds(&m, 2).unwrap();
        for i in 0..5 {
            for j in i + 1..5 {
                let want = dist(&pts[i], &pts[j]);
                assert!(((dist(&e.coords[i], &e.coords[j]) - want) / want).abs() < 1e-9);
            }
        }
        for axis in 0..2 {
            assert!(e.coords.iter().map(|r| r[axis]).sum::<f64>().abs() < 1e-9);
        }
    }

    #[test]
    fn too_many_dims() {
        let m = DistanceMatrix::new(3, vec![1.0; 3], DistanceKind::Raw).unwrap();
        assert!(classical_mds(&m, 3).is_err());
        assert!(classical_mds(&m, 0).is_err());
    }

    #[test]
    fn csv_output() {
        let m = DistanceMatrix::new(2, vec![2.0], DistanceKind::Raw).unwrap();
        let e = classical_mds(&m, 1).unwrap();
        let csv = e.to_csv(&["p".into(), "q".into()]).unwrap();
        assert_eq!(csv, "id,x0\np,1\nq,-1\n");
    }
}
