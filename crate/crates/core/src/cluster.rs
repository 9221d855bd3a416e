//! k-means, k-medoids (PAM), silhouette scoring and highest-silhouette
//! selection over a grid of reductions, methods and cluster counts.

use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embed::{ReductionMethod, ReductionResult};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClusterError {
    #[error("k = {k} invalid for {n} points; need 2 <= k <= n")]
    InvalidK { k: usize, n: usize },
    #[error("silhouette needs at least 2 non-empty clusters")]
    TooFewClusters,
    #[error("{labels} labels for {points} points")]
    LabelCount { labels: usize, points: usize },
    #[error("empty k range")]
    EmptyGrid,
    #[error("no reductions to evaluate")]
    NoReductions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterMethod {
    Kmeans,
    Kmedoids,
}

impl ClusterMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ClusterMethod::Kmeans => "kmeans",
            ClusterMethod::Kmedoids => "kmedoids",
        }
    }
}

impl fmt::Display for ClusterMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Centers {
    /// k-means centroids, one row per cluster.
    Means(Vec<Vec<f64>>),
    /// Row indices of the medoids.
    Medoids(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub method: ClusterMethod,
    pub k: usize,
    pub labels: Vec<usize>,
    pub centers: Centers,
    /// Sum of squared distances (k-means) or of distances (PAM).
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KMeansOptions {
    pub n_init: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            n_init: 10,
            max_iter: 300,
            tol: 1e-6,
        }
    }
}

pub const PAM_MAX_ITER: usize = 100;

fn rows_of(points: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..points.nrows())
        .map(|i| points.row(i).iter().copied().collect())
        .collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_k(k: usize, n: usize) -> Result<(), ClusterError> {
    if k < 2 || k > n {
        Err(ClusterError::InvalidK { k, n })
    } else {
        Ok(())
    }
}

/// One Lloyd run from a k-means++ start, with its inertia after every
/// assignment step.
#[derive(Debug, Clone)]
pub struct LloydRun {
    pub labels: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub inertia: f64,
    pub trace: Vec<f64>,
}

fn kmeans_pp(rows: &[Vec<f64>], k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut centers = vec![rows[rng.gen_range(0..n)].clone()];
    let mut d2: Vec<f64> = rows.iter().map(|r| sq_dist(r, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.gen::<f64>() * total;
            let mut idx = n - 1;
            for (i, d) in d2.iter().enumerate() {
                if u < *d {
                    idx = i;
                    break;
                }
                u -= d;
            }
            idx
        } else {
            rng.gen_range(0..n)
        };
        centers.push(rows[pick].clone());
        for (d, r) in d2.iter_mut().zip(rows) {
            *d = d.min(sq_dist(r, &centers[centers.len() - 1]));
        }
    }
    centers
}

/// Nearest center per row, ties to the lowest center index.
fn assign(rows: &[Vec<f64>], centers: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>) {
    rows.iter()
        .map(|r| {
            let mut best = (0, f64::INFINITY);
            for (c, center) in centers.iter().enumerate() {
                let d = sq_dist(r, center);
                if d < best.1 {
                    best = (c, d);
                }
            }
            best
        })
        .unzip()
}

fn means(rows: &[Vec<f64>], labels: &[usize], old: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dim = rows[0].len();
    let mut sums = vec![vec![0.0; dim]; old.len()];
    let mut counts = vec![0usize; old.len()];
    for (r, &l) in rows.iter().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(r) {
            *s += v;
        }
    }
    sums.into_iter()
        .zip(counts)
        .zip(old)
        .map(|((s, c), o)| {
            if c == 0 {
                o.clone()
            } else {
                s.into_iter().map(|v| v / c as f64).collect()
            }
        })
        .collect()
}

/// Moves the point farthest from its center into each empty cluster.
fn repair_empty(labels: &mut [usize], dists: &mut [f64], centers: &mut [Vec<f64>], rows: &[Vec<f64>]) {
    let k = centers.len();
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let donor = (0..rows.len())
            .filter(|&i| counts[labels[i]] > 1)
            .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
            .expect("k <= n guarantees a cluster with more than one point");
        labels[donor] = empty;
        dists[donor] = 0.0;
        centers[empty] = rows[donor].clone();
    }
}

pub fn lloyd_run(rows: &[Vec<f64>], k: usize, rng: &mut impl Rng, opts: &KMeansOptions) -> LloydRun {
    let mut centers = kmeans_pp(rows, k, rng);
    let mut trace = Vec::new();
    let mut prev_labels: Option<Vec<usize>> = None;
    let mut labels;
    loop {
        let (mut l, mut d) = assign(rows, &centers);
        repair_empty(&mut l, &mut d, &mut centers, rows);
        let inertia: f64 = d.iter().sum();
        labels = l;
        let converged = prev_labels.as_ref() == Some(&labels)
            || trace
                .last()
                .is_some_and(|&p: &f64| p - inertia <= opts.tol * p.max(f64::MIN_POSITIVE));
        trace.push(inertia);
        if converged || trace.len() >= opts.max_iter {
            break;
        }
        centers = means(rows, &labels, &centers);
        prev_labels = Some(labels.clone());
    }
    // Final centroids of the final partition.
    centers = means(rows, &labels, &centers);
    let inertia: f64 = rows.iter().zip(&labels).map(|(r, &l)| sq_dist(r, &centers[l])).sum();
    if inertia <= *trace.last().unwrap() {
        trace.push(inertia);
    }
    LloydRun {
        labels,
        centers,
        inertia: *trace.last().unwrap(),
        trace,
    }
}

/// Best-inertia result of `n_init` k-means++ / Lloyd runs.
pub fn kmeans(
    points: &DMatrix<f64>,
    k: usize,
    seed: u64,
    opts: &KMeansOptions,
) -> Result<ClusterAssignment, ClusterError> {
    check_k(k, points.nrows())?;
    let rows = rows_of(points);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<LloydRun> = None;
    for _ in 0..opts.n_init.max(1) {
        let run = lloyd_run(&rows, k, &mut rng, opts);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one run");
    Ok(ClusterAssignment {
        method: ClusterMethod::Kmeans,
        k,
        labels: best.labels,
        centers: Centers::Means(best.centers),
        cost: best.inertia,
    })
}

fn distance_matrix(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = sq_dist(&rows[i], &rows[j]).sqrt();
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}

/// Total distance of every point to its nearest medoid.
pub fn medoid_cost(dist: &[Vec<f64>], medoids: &[usize]) -> f64 {
    (0..dist.len())
        .map(|i| medoids.iter().map(|&m| dist[i][m]).fold(f64::INFINITY, f64::min))
        .sum()
}

/// Pairwise Euclidean distances between rows.
pub fn euclidean_distances(points: &DMatrix<f64>) -> Vec<Vec<f64>> {
    distance_matrix(&rows_of(points))
}

/// Partitioning Around Medoids: greedy BUILD, then best-improvement SWAP
/// until no single swap lowers the total distance.
///
/// BUILD is deterministic, so no seed is needed.
pub fn kmedoids(points: &DMatrix<f64>, k: usize, max_iter: usize) -> Result<ClusterAssignment, ClusterError> {
    let n = points.nrows();
    check_k(k, n)?;
    let dist = distance_matrix(&rows_of(points));

    let first = (0..n)
        .min_by(|&a, &b| {
            let (sa, sb): (f64, f64) = (dist[a].iter().sum(), dist[b].iter().sum());
            sa.total_cmp(&sb).then(a.cmp(&b))
        })
        .unwrap();
    let mut medoids = vec![first];
    let mut nearest: Vec<f64> = (0..n).map(|i| dist[i][first]).collect();
    while medoids.len() < k {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for c in (0..n).filter(|c| !medoids.contains(c)) {
            let gain: f64 = (0..n).map(|j| (nearest[j] - dist[j][c]).max(0.0)).sum();
            if gain > best.1 {
                best = (c, gain);
            }
        }
        medoids.push(best.0);
        for j in 0..n {
            nearest[j] = nearest[j].min(dist[j][best.0]);
        }
    }

    let mut cost = medoid_cost(&dist, &medoids);
    for _ in 0..max_iter {
        let mut best: Option<(usize, usize, f64)> = None;
        for slot in 0..k {
            for cand in (0..n).filter(|c| !medoids.contains(c)) {
                let mut trial = medoids.clone();
                trial[slot] = cand;
                let c = medoid_cost(&dist, &trial);
                if c < best.map_or(cost, |b| b.2) - 1e-12 * (1.0 + cost) {
                    best = Some((slot, cand, c));
                }
            }
        }
        match best {
            Some((slot, cand, c)) => {
                medoids[slot] = cand;
                cost = c;
            }
            None => break,
        }
    }

    let labels = (0..n)
        .map(|i| {
            let mut best = (0, f64::INFINITY);
            for (slot, &m) in medoids.iter().enumerate() {
                if dist[i][m] < best.1 {
                    best = (slot, dist[i][m]);
                }
            }
            best.0
        })
        .collect();
    Ok(ClusterAssignment {
        method: ClusterMethod::Kmedoids,
        k,
        labels,
        centers: Centers::Medoids(medoids),
        cost,
    })
}

/// Mean silhouette over all points, Euclidean distance.
///
/// Points in singleton clusters score 0.
pub fn silhouette(points: &DMatrix<f64>, labels: &[usize]) -> Result<f64, ClusterError> {
    let n = points.nrows();
    if labels.len() != n {
        return Err(ClusterError::LabelCount {
            labels: labels.len(),
            points: n,
        });
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(ClusterError::TooFewClusters);
    }
    let dist = distance_matrix(&rows_of(points));
    let mut total = 0.0;
    let mut sums = vec![0.0; k];
    for i in 0..n {
        if sizes[labels[i]] < 2 {
            continue;
        }
        sums.fill(0.0);
        for j in 0..n {
            sums[labels[j]] += dist[i][j];
        }
        let a = sums[labels[i]] / (sizes[labels[i]] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != labels[i] && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / n as f64)
}

/// One clustering of one reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterOutcome {
    pub reduction: ReductionMethod,
    pub method: ClusterMethod,
    pub k: usize,
    pub assignment: ClusterAssignment,
    pub silhouette: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub reduction: ReductionMethod,
    pub method: ClusterMethod,
    pub silhouettes: Vec<f64>,
}

/// Silhouette for every `(reduction, method)` row and `k` column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionGrid {
    pub k_values: Vec<usize>,
    pub rows: Vec<GridRow>,
    /// `(row, column)` of the selected cell.
    pub best: (usize, usize),
}

impl SelectionGrid {
    /// `reduction,method,<k>...` with one row per experiment.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("reduction,method");
        for k in &self.k_values {
            out.push_str(&format!(",{k}"));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("{},{}", row.reduction, row.method));
            for s in &row.silhouettes {
                out.push_str(&format!(",{s}"));
            }
            out.push('\n');
        }
        out
    }
}

fn fnv1a(bytes: impl IntoIterator<Item = u8>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Seed for one grid cell, independent of evaluation order.
pub fn cell_seed(seed: u64, reduction: ReductionMethod, method: ClusterMethod, k: usize) -> u64 {
    let key = format!("{seed}/{reduction}/{method}/{k}");
    fnv1a(key.into_bytes())
}

pub fn cluster_cell(
    points: &DMatrix<f64>,
    reduction: ReductionMethod,
    method: ClusterMethod,
    k: usize,
    seed: u64,
    opts: &KMeansOptions,
) -> Result<ClusterOutcome, ClusterError> {
    let assignment = match method {
        ClusterMethod::Kmeans => kmeans(points, k, cell_seed(seed, reduction, method, k), opts)?,
        ClusterMethod::Kmedoids => kmedoids(points, k, PAM_MAX_ITER)?,
    };
    let silhouette = silhouette(points, &assignment.labels)?;
    Ok(ClusterOutcome {
        reduction,
        method,
        k,
        assignment,
        silhouette,
    })
}

/// Evaluates every `(reduction, method, k)` cell and returns the grid with
/// the highest-silhouette clustering.
///
/// Ties go to the smaller `k`, then k-means, then the earlier reduction.
pub fn select_best(
    reductions: &[ReductionResult],
    k_values: &[usize],
    seed: u64,
    opts: &KMeansOptions,
) -> Result<(SelectionGrid, ClusterOutcome), ClusterError> {
    if reductions.is_empty() {
        return Err(ClusterError::NoReductions);
    }
    if k_values.is_empty() {
        return Err(ClusterError::EmptyGrid);
    }
    let methods = [ClusterMethod::Kmeans, ClusterMethod::Kmedoids];
    let mut rows = Vec::with_capacity(reductions.len() * 2);
    let mut best: Option<(ClusterOutcome, (usize, usize), (usize, usize, usize))> = None;
    for (ri, red) in reductions.iter().enumerate() {
        for (mi, &method) in methods.iter().enumerate() {
            let mut silhouettes = Vec::with_capacity(k_values.len());
            for (ki, &k) in k_values.iter().enumerate() {
                let outcome = cluster_cell(&red.matrix, red.method, method, k, seed, opts)?;
                silhouettes.push(outcome.silhouette);
                let rank = (k, mi, ri);
                let better = match &best {
                    None => true,
                    Some((b, _, brank)) => {
                        outcome.silhouette > b.silhouette
                            || (outcome.silhouette == b.silhouette && rank < *brank)
                    }
                };
                if better {
                    best = Some((outcome, (rows.len(), ki), rank));
                }
            }
            rows.push(GridRow {
                reduction: red.method,
                method,
                silhouettes,
            });
        }
    }
    let (outcome, cell, _) = best.expect("non-empty grid");
    Ok((
        SelectionGrid {
            k_values: k_values.to_vec(),
            rows,
            best: cell,
        },
        outcome,
    ))
}

/// `region_id,cluster`
pub fn clusters_to_csv(regions: &[String], labels: &[usize]) -> String {
    let mut out = String::from("region_id,cluster\n");
    for (r, l) in regions.iter().zip(labels) {
        out.push_str(&format!("{r},{l}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(values: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(values.len(), 1, values)
    }

    fn same_partition(a: &[usize], b: &[usize]) -> bool {
        a.len() == b.len()
            && (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
    }

    #[test]
    fn kmeans_two_pairs() {
        let p = line(&[0.0, 1.0, 10.0, 11.0]);
        let a = kmeans(&p, 2, 0, &KMeansOptions::default()).unwrap();
        assert!(same_partition(&a.labels, &[0, 0, 1, 1]));
        assert!((a.cost - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kmeans_k_equals_n_and_invalid_k() {
        let p = line(&[0.0, 3.0, 7.0]);
        let a = kmeans(&p, 3, 1, &KMeansOptions::default()).unwrap();
        assert_eq!(a.cost, 0.0);
        assert!(matches!(kmeans(&p, 1, 0, &KMeansOptions::default()), Err(ClusterError::InvalidK { .. })));
        assert!(matches!(kmeans(&p, 4, 0, &KMeansOptions::default()), Err(ClusterError::InvalidK { .. })));
    }

    #[test]
    fn kmeans_handles_duplicate_points() {
        let p = line(&[1.0, 1.0, 1.0, 5.0]);
        let a = kmeans(&p, 3, 4, &KMeansOptions::default()).unwrap();
        let mut counts = [0; 3];
        for &l in &a.labels {
            counts[l] += 1;
        }
        assert!(counts.iter().all(|&c| c > 0));
    }

    #[test]
    fn kmedoids_two_pairs() {
        let p = line(&[0.0, 1.0, 10.0, 11.0]);
        let a = kmedoids(&p, 2, PAM_MAX_ITER).unwrap();
        assert!((a.cost - 2.0).abs() < 1e-12);
        let Centers::Medoids(m) = &a.centers else { panic!() };
        assert!(m.iter().any(|&i| i < 2) && m.iter().any(|&i| i >= 2));
        let b = kmedoids(&p, 4, PAM_MAX_ITER).unwrap();
        assert_eq!(b.cost, 0.0);
    }

    #[test]
    fn silhouette_examples() {
        let p = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 0.0, 0.0, 5.0, 5.0, 5.0, 5.0]);
        assert_eq!(silhouette(&p, &[0, 0, 1, 1]).unwrap(), 1.0);
        // a = 1 for every point, b = 9.5 / 10.5 / 10.5 / 9.5
        let p = line(&[0.0, 1.0, 10.0, 11.0]);
        let expected = 0.5 * (8.5 / 9.5) + 0.5 * (9.5 / 10.5);
        let s = silhouette(&p, &[0, 0, 1, 1]).unwrap();
        assert!((s - expected).abs() < 1e-12);
        assert!((s - 0.8997).abs() < 1e-4);
        assert!(matches!(silhouette(&p, &[0, 0, 0, 0]), Err(ClusterError::TooFewClusters)));
    }

    #[test]
    fn singleton_scores_zero() {
        let p = line(&[0.0, 0.5, 9.0]);
        let s = silhouette(&p, &[0, 0, 1]).unwrap();
        // two non-singletons each have a = 0.5, b = 9 / 8.5
        let expected = ((9.0 - 0.5) / 9.0 + (8.5 - 0.5) / 8.5) / 3.0;
        assert!((s - expected).abs() < 1e-12);
    }

    #[test]
    fn grid_csv_layout() {
        let grid = SelectionGrid {
            k_values: vec![3, 4],
            rows: vec![GridRow {
                reduction: ReductionMethod::Pca,
                method: ClusterMethod::Kmeans,
                silhouettes: vec![0.25, 0.5],
            }],
            best: (0, 1),
        };
        assert_eq!(grid.to_csv(), "reduction,method,3,4\npca,kmeans,0.25,0.5\n");
    }

    proptest! {
        #[test]
        fn lloyd_inertia_never_increases(
            data in prop::collection::vec(-10.0f64..10.0, 20..60),
            k in 2usize..5,
            seed in 0u64..1000,
        ) {
            let rows: Vec<Vec<f64>> = data.chunks_exact(2).map(|c| c.to_vec()).collect();
            prop_assume!(rows.len() >= k);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let run = lloyd_run(&rows, k, &mut rng, &KMeansOptions::default());
            for w in run.trace.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12);
            }
        }

        #[test]
        fn silhouette_is_bounded(
            data in prop::collection::vec(-5.0f64..5.0, 12..40),
            labels_seed in 0u64..1000,
        ) {
            let n = data.len() / 2;
            let p = DMatrix::from_row_slice(n, 2, &data[..n * 2]);
            let mut rng = ChaCha8Rng::seed_from_u64(labels_seed);
            let mut labels: Vec<usize> = (0..n).map(|_| rand::Rng::gen_range(&mut rng, 0..3)).collect();
            labels[0] = 0;
            labels[1] = 1;
            let s = silhouette(&p, &labels).unwrap();
            prop_assert!((-1.0..=1.0).contains(&s));
        }
    }
}
