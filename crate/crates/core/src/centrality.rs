//! Blind centrality detection: positivity scoring of covariance
//! eigenvectors, selection of the Perron direction, factor centrality
//! extraction, and the top-k detection metric.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::spectral::nkd;

/// Distance of a vector to the nearest one-signed vector: the smaller of the
/// norms of its negative and positive parts. Zero exactly when the vector is
/// entrywise nonnegative or entrywise nonpositive (entries equal to zero are
/// admissible in either orientation).
pub fn positivity_score(x: &DVector<f64>) -> Result<f64> {
    if x.norm() == 0.0 {
        return Err(Error::Degenerate(
            "positivity score of the zero vector".into(),
        ));
    }
    let mut pos = 0.0;
    let mut neg = 0.0;
    for &v in x.iter() {
        if v > 0.0 {
            pos += v * v;
        } else {
            neg += v * v;
        }
    }
    Ok(pos.sqrt().min(neg.sqrt()))
}

/// Index and score of the most one-signed column; ties resolved to the
/// lowest index.
pub fn select_positive_column(vectors: &DMatrix<f64>) -> Result<(usize, f64)> {
    if vectors.ncols() == 0 {
        return Err(Error::Invalid("no columns to select from".into()));
    }
    let mut best = 0;
    let mut best_score = f64::INFINITY;
    for k in 0..vectors.ncols() {
        let s = positivity_score(&vectors.column(k).into_owned())?;
        if s < best_score {
            best_score = s;
            best = k;
        }
    }
    Ok((best, best_score))
}

/// Flips the vector into its nonnegative dominant orientation (entry sum
/// nonnegative).
pub fn sign_normalize(v: &DVector<f64>) -> DVector<f64> {
    if v.sum() < 0.0 {
        -v
    } else {
        v.clone()
    }
}

/// Centrality estimates for both factors.
#[derive(Debug, Clone)]
pub struct CentralityResult {
    /// Unit physical centrality vector, nonnegative orientation.
    pub cg: DVector<f64>,
    /// Unit coupling centrality vector, nonnegative orientation.
    pub cc: DVector<f64>,
    /// Index of the covariance eigenvector selected as the Perron direction.
    pub selected_index: usize,
    pub pos_score: f64,
}

/// Picks the most one-signed covariance eigenvector and splits it into its
/// Kronecker factors. The columns must be orthonormal, in descending
/// covariance-eigenvalue order.
pub fn detect_centrality(
    cov_eigvecs: &DMatrix<f64>,
    n: usize,
    m: usize,
) -> Result<CentralityResult> {
    let nm = n * m;
    if cov_eigvecs.nrows() != nm {
        return Err(Error::Shape {
            expected: format!("{nm} rows"),
            found: format!("{} rows", cov_eigvecs.nrows()),
        });
    }
    let (selected_index, pos_score) = select_positive_column(cov_eigvecs)?;
    let pair = nkd(&cov_eigvecs.column(selected_index).into_owned(), n, m)?;
    Ok(CentralityResult {
        cg: sign_normalize(&pair.factor_g),
        cc: sign_normalize(&pair.factor_c),
        selected_index,
        pos_score,
    })
}

/// Indices of the `k` largest entries of the sign-normalized centrality
/// vector, ties resolved to lower indices; returned sorted ascending.
pub fn topk(c: &DVector<f64>, k: usize) -> Result<Vec<usize>> {
    if k > c.len() {
        return Err(Error::Invalid(format!(
            "k = {k} exceeds vector length {}",
            c.len()
        )));
    }
    let cn = sign_normalize(c);
    let mut idx: Vec<usize> = (0..cn.len()).collect();
    idx.sort_by(|&a, &b| cn[b].partial_cmp(&cn[a]).unwrap().then(a.cmp(&b)));
    let mut out: Vec<usize> = idx[..k].to_vec();
    out.sort_unstable();
    Ok(out)
}

/// Fraction of the detected set that is not in the truth; the sets must have
/// equal size, so this equals the miss fraction.
pub fn detection_error_rate(detected: &[usize], truth: &[usize]) -> Result<f64> {
    if detected.len() != truth.len() {
        return Err(Error::Shape {
            expected: format!("{} detected indices", truth.len()),
            found: format!("{}", detected.len()),
        });
    }
    if truth.is_empty() {
        return Err(Error::Invalid("empty truth set".into()));
    }
    let truth_set: std::collections::HashSet<usize> = truth.iter().cloned().collect();
    let wrong = detected.iter().filter(|i| !truth_set.contains(i)).count();
    Ok(wrong as f64 / truth.len() as f64)
}
