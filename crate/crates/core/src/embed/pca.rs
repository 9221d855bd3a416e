use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{EmbedError, ReductionMeta, ReductionMethod, ReductionResult};

/// Slack on the cumulative-variance comparison, absorbing eigen-solver rounding.
const THRESHOLD_SLACK: f64 = 1e-12;

/// Eigen-decomposition of the (population) covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaFit {
    pub mean: DVector<f64>,
    /// Descending, clipped at zero.
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the unit eigenvector of `eigenvalues[i]`, with its
    /// largest-magnitude entry positive.
    pub components: DMatrix<f64>,
}

impl PcaFit {
    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        let total: f64 = self.eigenvalues.iter().sum();
        if total <= 0.0 {
            return vec![0.0; self.eigenvalues.len()];
        }
        self.eigenvalues.iter().map(|v| v / total).collect()
    }

    /// Smallest component count whose cumulative ratio reaches `threshold`.
    pub fn components_for(&self, threshold: f64) -> usize {
        let mut cum = 0.0;
        for (i, r) in self.explained_variance_ratio().iter().enumerate() {
            cum += r;
            if cum >= threshold - THRESHOLD_SLACK {
                return i + 1;
            }
        }
        self.eigenvalues.len().max(1)
    }

    pub fn project(&self, x: &DMatrix<f64>, m: usize) -> DMatrix<f64> {
        let centered = DMatrix::from_fn(x.nrows(), x.ncols(), |r, c| x[(r, c)] - self.mean[c]);
        centered * self.components.columns(0, m)
    }

    pub fn reconstruct(&self, projected: &DMatrix<f64>) -> DMatrix<f64> {
        let m = projected.ncols();
        let back = projected * self.components.columns(0, m).transpose();
        DMatrix::from_fn(back.nrows(), back.ncols(), |r, c| back[(r, c)] + self.mean[c])
    }
}

pub fn pca_fit(x: &DMatrix<f64>) -> Result<PcaFit, EmbedError> {
    let (n, d) = x.shape();
    if n < 2 {
        return Err(EmbedError::TooFewRows {
            minimum: 2,
            actual: n,
        });
    }
    let mean = DVector::from_fn(d, |c, _| x.column(c).sum() / n as f64);
    let centered = DMatrix::from_fn(n, d, |r, c| x[(r, c)] - mean[c]);
    let cov = centered.transpose() * &centered / n as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut components = DMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).into_owned();
        let pivot = (0..d)
            .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(b.cmp(&a)))
            .unwrap_or(0);
        if v[pivot] < 0.0 {
            v.neg_mut();
        }
        components.set_column(dst, &v);
    }
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    Ok(PcaFit {
        mean,
        eigenvalues,
        components,
    })
}

/// Projects onto the fewest principal components that explain at least
/// `variance_threshold` of the total variance.
pub fn pca_reduce(x: &DMatrix<f64>, variance_threshold: f64) -> Result<ReductionResult, EmbedError> {
    if !(variance_threshold > 0.0 && variance_threshold <= 1.0) {
        return Err(EmbedError::Threshold(variance_threshold));
    }
    let fit = pca_fit(x)?;
    let m = fit.components_for(variance_threshold);
    Ok(ReductionResult {
        method: ReductionMethod::Pca,
        matrix: fit.project(x, m),
        meta: ReductionMeta::Pca {
            explained_variance_ratio: fit.explained_variance_ratio(),
            components: m,
        },
    })
}
