#![allow(dead_code)]

use std::collections::BTreeMap;

use epiclust::cluster::{euclidean_distances, kmeans, kmedoids, medoid_cost, silhouette, Centers, KMeansOptions};
use epiclust::forecast::{batch_loss_and_grad, build_model, Batch, NetConfig};
use epiclust::nn::grad_check::{check_gradient, numeric_gradient, relative_error, FD_STEP};
use epiclust::nn::*;
use epiclust::series::{make_windows, prepare};
use epiclust::synth::{generate, SynthConfig};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Uniform values at least `gap` away from zero.
pub fn off_zero(rng: &mut impl Rng, n: usize, gap: f64) -> Vec<f64> {
    (0..n)
        .map(|_| loop {
            let v: f64 = rng.gen_range(-1.0..1.0);
            if v.abs() > gap {
                break v;
            }
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn concat(parts: &[&[f64]]) -> Vec<f64> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

/// Max relative error of `dense` over random points, loss = w . y.
pub fn dense_error(points: usize, seed: u64) -> f64 {
    let (rows, din, dout) = (3, 4, 5);
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..points {
        let x = uniform(&mut r, rows * din);
        let w = uniform(&mut r, din * dout);
        let b = uniform(&mut r, dout);
        let proj = uniform(&mut r, rows * dout);
        let unpack = |p: &[f64]| {
            let x = Tensor::matrix(rows, din, p[..rows * din].to_vec()).unwrap();
            let params = DenseParams::new(
                Tensor::matrix(din, dout, p[rows * din..rows * din + din * dout].to_vec()).unwrap(),
                Tensor::vector(p[rows * din + din * dout..].to_vec()),
            )
            .unwrap();
            (x, params)
        };
        let point = concat(&[&x, &w, &b]);
        let (xt, params) = unpack(&point);
        let g = dense_backward(&xt, &params, &Tensor::matrix(rows, dout, proj.clone()).unwrap()).unwrap();
        let analytic = concat(&[g.input.data(), g.weight.data(), g.bias.data()]);
        let loss = |p: &[f64]| {
            let (x, params) = unpack(p);
            dot(dense(&x, &params).unwrap().data(), &proj)
        };
        worst = worst.max(check_gradient(loss, &point, &analytic));
    }
    worst
}

/// Max relative error of the batched causal convolution at one dilation.
pub fn conv_error(dilation: usize, points: usize, seed: u64) -> f64 {
    let (seq, seqs, cin, cout, k) = (10, 2, 2, 3, 2);
    let rows = seq * seqs;
    let nk = k * cin * cout;
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..points {
        let point = uniform(&mut r, rows * cin + nk + cout);
        let proj = uniform(&mut r, rows * cout);
        let unpack = |p: &[f64]| {
            let x = Tensor::matrix(rows, cin, p[..rows * cin].to_vec()).unwrap();
            let params = ConvParams::new(
                Tensor::new(vec![k, cin, cout], p[rows * cin..rows * cin + nk].to_vec()).unwrap(),
                Tensor::vector(p[rows * cin + nk..].to_vec()),
                dilation,
            )
            .unwrap();
            (x, params)
        };
        let (xt, params) = unpack(&point);
        let g = conv1d_causal_backward(&xt, seq, &params, &Tensor::matrix(rows, cout, proj.clone()).unwrap()).unwrap();
        let analytic = concat(&[g.input.data(), g.kernel.data(), g.bias.data()]);
        let loss = |p: &[f64]| {
            let (x, params) = unpack(p);
            dot(conv1d_causal_batched(&x, seq, &params).unwrap().data(), &proj)
        };
        worst = worst.max(check_gradient(loss, &point, &analytic));
    }
    worst
}

/// Max relative error of train-mode batch norm w.r.t. input, gamma and beta.
pub fn batch_norm_error(points: usize, seed: u64) -> f64 {
    let (b, c) = (6, 3);
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..points {
        let point = concat(&[&uniform(&mut r, b * c), &off_zero(&mut r, c, 0.1), &uniform(&mut r, c)]);
        let proj = uniform(&mut r, b * c);
        let unpack = |p: &[f64]| {
            let x = Tensor::matrix(b, c, p[..b * c].to_vec()).unwrap();
            let mut state = BatchNormState::new(c);
            state.gamma = Tensor::vector(p[b * c..b * c + c].to_vec());
            state.beta = Tensor::vector(p[b * c + c..].to_vec());
            (x, state)
        };
        let (xt, mut state) = unpack(&point);
        let (_, cache) = batch_norm(&xt, &mut state, Mode::Train).unwrap();
        let g = batch_norm_backward(&state, &cache, &Tensor::matrix(b, c, proj.clone()).unwrap()).unwrap();
        let analytic = concat(&[g.input.data(), g.gamma.data(), g.beta.data()]);
        let loss = |p: &[f64]| {
            let (x, mut state) = unpack(p);
            dot(batch_norm(&x, &mut state, Mode::Train).unwrap().0.data(), &proj)
        };
        worst = worst.max(check_gradient(loss, &point, &analytic));
    }
    worst
}

pub fn relu_error(points: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..points {
        let x = off_zero(&mut r, 12, 1e-3);
        let proj = uniform(&mut r, 12);
        let g = relu_backward(&Tensor::vector(x.clone()), &Tensor::vector(proj.clone()));
        let loss = |p: &[f64]| dot(relu(&Tensor::vector(p.to_vec())).data(), &proj);
        worst = worst.max(check_gradient(loss, &x, g.data()));
    }
    worst
}

pub fn pinball_error(points: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..points {
        let q = r.gen_range(0.05..0.95);
        let target = uniform(&mut r, 7);
        let pred: Vec<f64> = target
            .iter()
            .zip(off_zero(&mut r, 7, 1e-3))
            .map(|(t, d)| t + d)
            .collect();
        let (_, g) = pinball_loss(&pred, &target, q).unwrap();
        let loss = |p: &[f64]| pinball_loss(p, &target, q).unwrap().0;
        worst = worst.max(check_gradient(loss, &pred, &g));
    }
    worst
}

/// Several lookups, repeats allowed, loss = sum of projected rows.
pub fn embedding_error(points: usize, seed: u64) -> f64 {
    let dim = 2;
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..points {
        let table = uniform(&mut r, 7 * dim);
        let days: Vec<usize> = (0..7).map(|_| r.gen_range(0..7)).collect();
        let projs: Vec<Vec<f64>> = days.iter().map(|_| uniform(&mut r, dim)).collect();
        let mut grad = Tensor::zeros(&[7, dim]);
        for (&d, p) in days.iter().zip(&projs) {
            embed_backward(d, p, &mut grad).unwrap();
        }
        let loss = |p: &[f64]| {
            let t = EmbeddingTable::new(Tensor::matrix(7, dim, p.to_vec()).unwrap()).unwrap();
            days.iter()
                .zip(&projs)
                .map(|(&d, w)| dot(&embed_lookup(d, &t).unwrap(), w))
                .sum()
        };
        worst = worst.max(check_gradient(loss, &table, grad.data()));
    }
    worst
}

pub struct NetGradReport {
    /// Max relative error over the sampled coordinates.
    pub max_rel_error: f64,
    /// Largest finite-difference slope of a bias that feeds batch norm;
    /// batch norm cancels these exactly, so they should be ~0.
    pub max_pre_norm_bias_slope: f64,
    pub coordinates: usize,
    /// Coordinates redrawn because a ReLU or pinball kink lay within one step.
    pub kinks_skipped: usize,
}

/// One-sided slopes that disagree by more than 0.1% mean a kink sits
/// inside `[x - h, x + h]` and the central difference is meaningless there.
fn straddles_kink(f_minus: f64, f0: f64, f_plus: f64) -> bool {
    let fwd = (f_plus - f0) / FD_STEP;
    let bwd = (f0 - f_minus) / FD_STEP;
    (fwd - bwd).abs() > 1e-3 * (fwd.abs() + bwd.abs()) + 1e-9
}

/// Full training-loss gradient of the default net on batches of synthetic
/// windows, at `points` random initialisations.
pub fn net_gradient(points: usize, coords_per_point: usize, seed: u64) -> NetGradReport {
    let data = generate(&SynthConfig::default()).unwrap();
    let config = NetConfig::default();
    let prep = prepare(&data.cases, config.alpha).unwrap();
    let windows = make_windows(&prep, config.input_len, config.horizon).unwrap();
    let mut r = rng(seed);
    let mut report = NetGradReport {
        max_rel_error: 0.0,
        max_pre_norm_bias_slope: 0.0,
        coordinates: 0,
        kinks_skipped: 0,
    };
    for p in 0..points {
        let mut model = build_model(&config, seed.wrapping_add(p as u64)).unwrap();
        let batch = Batch::new(windows.choose_multiple(&mut r, 4).collect());
        let (f0, grads) = batch_loss_and_grad(&mut model, &batch).unwrap();
        let analytic: Vec<f64> = grads.iter().flat_map(|g| g.data().iter().copied()).collect();

        // Per block: conv kernel, conv bias, dense weight, dense bias, gamma, beta.
        let lens: Vec<usize> = model.parameters().iter().map(|t| t.len()).collect();
        let mut offsets = vec![0];
        for l in &lens {
            offsets.push(offsets.last().unwrap() + l);
        }
        let mut pre_norm = Vec::new();
        for b in 0..config.dilations.len() {
            for j in [1, 3] {
                pre_norm.extend(offsets[6 * b + j]..offsets[6 * b + j + 1]);
            }
        }

        let mut x = model.flat_parameters();
        let mut probe = model.clone();
        let mut eval_at = |x: &[f64]| {
            probe.set_flat_parameters(x);
            batch_loss_and_grad(&mut probe, &batch).unwrap().0
        };
        let mut checked = 0;
        while checked < coords_per_point {
            let i = r.gen_range(0..analytic.len());
            if pre_norm.binary_search(&i).is_ok() {
                continue;
            }
            let orig = x[i];
            x[i] = orig + FD_STEP;
            let plus = eval_at(&x);
            x[i] = orig - FD_STEP;
            let minus = eval_at(&x);
            x[i] = orig;
            if straddles_kink(minus, f0, plus) {
                report.kinks_skipped += 1;
                continue;
            }
            let numeric = (plus - minus) / (2.0 * FD_STEP);
            report.max_rel_error = report.max_rel_error.max(relative_error(analytic[i], numeric));
            checked += 1;
        }
        report.coordinates += checked;

        let bias_coords: Vec<usize> = pre_norm.choose_multiple(&mut r, 2).copied().collect();
        let slopes = numeric_gradient(&mut eval_at, &x, &bias_coords);
        for (&i, s) in bias_coords.iter().zip(slopes) {
            report.max_pre_norm_bias_slope = report.max_pre_norm_bias_slope.max(s.abs()).max(analytic[i].abs());
        }
    }
    report
}

/// Random points in `[0, 10)^dim`.
pub fn random_points(r: &mut impl Rng, n: usize, dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, dim, |_, _| r.gen_range(0.0..10.0))
}

/// Lowest within-cluster sum of squares over every labelling that uses all
/// `k` labels.
pub fn exhaustive_inertia(points: &DMatrix<f64>, k: usize) -> f64 {
    let (n, dim) = points.shape();
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let mut counts = vec![0usize; k];
        for &l in &labels {
            counts[l] += 1;
        }
        if counts.iter().all(|&c| c > 0) {
            let mut sums = vec![vec![0.0; dim]; k];
            for (i, &l) in labels.iter().enumerate() {
                for d in 0..dim {
                    sums[l][d] += points[(i, d)];
                }
            }
            let mut cost = 0.0;
            for (i, &l) in labels.iter().enumerate() {
                for d in 0..dim {
                    let m = sums[l][d] / counts[l] as f64;
                    cost += (points[(i, d)] - m).powi(2);
                }
            }
            best = best.min(cost);
        }
        // next labelling in base k
        let mut i = 0;
        while i < n && labels[i] == k - 1 {
            labels[i] = 0;
            i += 1;
        }
        if i == n {
            return best;
        }
        labels[i] += 1;
    }
}

/// Number of instances (of 50) where k-means reaches the exhaustive optimum.
pub fn kmeans_vs_exhaustive(seed: u64) -> (usize, usize) {
    let mut r = rng(seed);
    let mut hits = 0;
    let total = 50;
    for i in 0..total {
        let n = r.gen_range(4..=8);
        let k = r.gen_range(2..=3);
        let dim = r.gen_range(1..=3);
        let pts = random_points(&mut r, n, dim);
        let got = kmeans(&pts, k, i as u64, &KMeansOptions::default()).unwrap().cost;
        let best = exhaustive_inertia(&pts, k);
        if (got - best).abs() <= 1e-9 * (1.0 + best) {
            hits += 1;
        }
    }
    (hits, total)
}

/// True when no single medoid/non-medoid swap lowers the PAM cost.
pub fn swap_locally_optimal(points: &DMatrix<f64>, medoids: &[usize], cost: f64) -> bool {
    let dist = euclidean_distances(points);
    for slot in 0..medoids.len() {
        for cand in 0..points.nrows() {
            if medoids.contains(&cand) {
                continue;
            }
            let mut trial = medoids.to_vec();
            trial[slot] = cand;
            if medoid_cost(&dist, &trial) < cost - 1e-9 * (1.0 + cost) {
                return false;
            }
        }
    }
    true
}

/// Instances (of `total`) whose PAM output passes the swap check.
pub fn pam_local_optimality(total: usize, seed: u64) -> usize {
    let mut r = rng(seed);
    (0..total)
        .filter(|_| {
            let n = r.gen_range(5..=30);
            let k = r.gen_range(2..=n.min(6));
            let pts = random_points(&mut r, n, 2);
            let a = kmedoids(&pts, k, 100).unwrap();
            let Centers::Medoids(m) = &a.centers else { return false };
            swap_locally_optimal(&pts, m, a.cost)
        })
        .count()
}

/// Independent double-loop silhouette; singletons score 0.
pub fn brute_silhouette(points: &DMatrix<f64>, labels: &[usize]) -> f64 {
    let n = points.nrows();
    let d = |i: usize, j: usize| (points.row(i) - points.row(j)).norm();
    let k = labels.iter().max().unwrap() + 1;
    let mut total = 0.0;
    for i in 0..n {
        let own = labels.iter().filter(|&&l| l == labels[i]).count();
        if own == 1 {
            continue;
        }
        let mut a = 0.0;
        for j in 0..n {
            if j != i && labels[j] == labels[i] {
                a += d(i, j);
            }
        }
        a /= (own - 1) as f64;
        let mut b = f64::INFINITY;
        for c in 0..k {
            if c == labels[i] {
                continue;
            }
            let members: Vec<usize> = (0..n).filter(|&j| labels[j] == c).collect();
            if members.is_empty() {
                continue;
            }
            let mean = members.iter().map(|&j| d(i, j)).sum::<f64>() / members.len() as f64;
            b = b.min(mean);
        }
        total += (b - a) / a.max(b);
    }
    total / n as f64
}

/// Largest |library - brute force| silhouette gap over random instances.
pub fn silhouette_gap(instances: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let n = r.gen_range(3..=30);
        let k = r.gen_range(2..=n.min(5));
        let dim = r.gen_range(1..=4);
        let pts = random_points(&mut r, n, dim);
        let mut labels: Vec<usize> = (0..n).map(|_| r.gen_range(0..k)).collect();
        labels[0] = 0;
        labels[1] = 1;
        let lib = silhouette(&pts, &labels).unwrap();
        worst = worst.max((lib - brute_silhouette(&pts, &labels)).abs());
    }
    worst
}

/// Adjusted Rand index between two labellings.
pub fn adjusted_rand(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let mut table: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut ra: BTreeMap<usize, f64> = BTreeMap::new();
    let mut rb: BTreeMap<usize, f64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1.0;
        *ra.entry(x).or_default() += 1.0;
        *rb.entry(y).or_default() += 1.0;
    }
    let c2 = |v: f64| v * (v - 1.0) / 2.0;
    let index: f64 = table.values().map(|&v| c2(v)).sum();
    let sa: f64 = ra.values().map(|&v| c2(v)).sum();
    let sb: f64 = rb.values().map(|&v| c2(v)).sum();
    let expected = sa * sb / c2(n);
    let max = (sa + sb) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

/// Same partition up to renaming of labels.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    let mut fwd = BTreeMap::new();
    let mut back = BTreeMap::new();
    a.iter().zip(b).all(|(&x, &y)| *fwd.entry(x).or_insert(y) == y && *back.entry(y).or_insert(x) == x)
}

pub struct PcaCheck {
    /// Chosen m reaches the threshold and m - 1 does not, on every matrix.
    pub minimal: bool,
    pub max_off_diagonal: f64,
}

/// PCA at 90% on random correlated matrices of varying shape.
pub fn pca_checks(instances: usize, seed: u64) -> PcaCheck {
    use epiclust::embed::{pca_fit, pca_reduce, zscore};
    let mut r = rng(seed);
    let mut out = PcaCheck {
        minimal: true,
        max_off_diagonal: 0.0,
    };
    for _ in 0..instances {
        let n = r.gen_range(10..40);
        let d = r.gen_range(2..12);
        let latent = r.gen_range(1..=d);
        let z = DMatrix::from_fn(n, latent, |_, _| r.gen_range(-1.0..1.0));
        let mix = DMatrix::from_fn(latent, d, |_, _| r.gen_range(-2.0..2.0));
        let noise = DMatrix::from_fn(n, d, |_, _| r.gen_range(-0.1..0.1));
        let x = zscore(&(z * mix + noise)).matrix;
        let fit = pca_fit(&x).unwrap();
        let reduced = pca_reduce(&x, 0.9).unwrap();
        let m = reduced.matrix.ncols();
        let ratios = fit.explained_variance_ratio();
        let cum = |k: usize| ratios[..k].iter().sum::<f64>();
        if cum(m) < 0.9 - 1e-12 || (m > 1 && cum(m - 1) >= 0.9) {
            out.minimal = false;
        }
        let p = &reduced.matrix;
        let centered = DMatrix::from_fn(p.nrows(), p.ncols(), |i, j| p[(i, j)] - p.column(j).mean());
        let cov = centered.transpose() * &centered / n as f64;
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    out.max_off_diagonal = out.max_off_diagonal.max(cov[(i, j)].abs());
                }
            }
        }
    }
    out
}

/// Eight columns: three carry a three-group structure, five are noise.
pub fn ga_toy(seed: u64) -> DMatrix<f64> {
    let mut r = rng(seed);
    DMatrix::from_fn(21, 8, |row, c| {
        let g = (row % 3) as f64;
        if c < 3 {
            g * 3.0 * (c as f64 + 1.0) + r.gen_range(-0.5..0.5)
        } else {
            r.gen_range(-3.0..3.0)
        }
    })
}

pub struct GaCheck {
    pub exhaustive_hits: usize,
    pub runs: usize,
    pub monotone: bool,
}

/// GA best fitness against the best of all 255 non-empty masks.
pub fn ga_vs_exhaustive(runs: usize, seed: u64) -> GaCheck {
    use epiclust::embed::{ga_fitness, ga_search, GaParams};
    let ks = [3, 4, 5];
    let mut out = GaCheck {
        exhaustive_hits: 0,
        runs,
        monotone: true,
    };
    for run in 0..runs as u64 {
        let x = ga_toy(seed + run);
        let params = GaParams {
            seed: run,
            ..GaParams::default()
        };
        let mut best = f64::NEG_INFINITY;
        for bits in 1u32..256 {
            let mask: Vec<bool> = (0..8).map(|i| bits & (1 << i) != 0).collect();
            best = best.max(ga_fitness(&x, &mask, &ks, &params).unwrap());
        }
        let found = ga_search(&x, &ks, &params).unwrap();
        if found.fitness == best {
            out.exhaustive_hits += 1;
        }
        out.monotone &= found.trace.windows(2).all(|w| w[1] >= w[0]);
    }
    out
}

pub struct TiedCheck {
    pub transposes_hold: bool,
    pub gradient_error: f64,
    pub tied_params: usize,
    pub stacked_params: usize,
}

pub fn tied_autoencoder_checks(seed: u64) -> TiedCheck {
    use epiclust::embed::{AeConfig, AeVariant, Autoencoder};
    let mut r = rng(seed);
    let cfg = AeConfig::default();
    let x = Tensor::matrix(33, 26, uniform(&mut r, 33 * 26)).unwrap();
    let mut ae = Autoencoder::new(26, &cfg, AeVariant::Tied).unwrap();
    let depth = ae.encoder.len();
    let mut transposes_hold = true;
    for _ in 0..10 {
        ae.fit(&x, 1, cfg.lr).unwrap();
        for j in 0..depth {
            transposes_hold &= ae.decoder[j].weight == ae.encoder[depth - 1 - j].weight.transpose();
        }
    }
    // nonzero biases keep pre-activations off the ReLU kink
    let point: Vec<f64> = ae.flat_parameters().iter().map(|v| v + r.gen_range(-0.3..0.3)).collect();
    ae.set_flat_parameters(&point);
    let analytic: Vec<f64> = ae
        .loss_and_grad(&x)
        .unwrap()
        .1
        .iter()
        .flat_map(|g| g.data().iter().copied())
        .collect();
    let gradient_error = check_gradient(
        |p| {
            let mut m = ae.clone();
            m.set_flat_parameters(p);
            m.loss_and_grad(&x).unwrap().0
        },
        &point,
        &analytic,
    );
    TiedCheck {
        transposes_hold,
        gradient_error,
        tied_params: ae.param_count(),
        stacked_params: Autoencoder::new(26, &cfg, AeVariant::Stacked).unwrap().param_count(),
    }
}

/// Randomised SMAPE property failures over `trials` inputs.
pub fn smape_property_failures(trials: usize, seed: u64) -> usize {
    use epiclust::eval::smape;
    let mut r = rng(seed);
    let mut failures = 0;
    for _ in 0..trials {
        let h = r.gen_range(1..15);
        let y: Vec<f64> = (0..h).map(|_| if r.gen_bool(0.2) { 0.0 } else { r.gen_range(0.0..1e3) }).collect();
        let f: Vec<f64> = (0..h).map(|_| if r.gen_bool(0.2) { 0.0 } else { r.gen_range(0.0..1e3) }).collect();
        let c = r.gen_range(1e-3..1e3);
        let s = smape(&y, &f).unwrap();
        let scaled = smape(
            &y.iter().map(|v| v * c).collect::<Vec<_>>(),
            &f.iter().map(|v| v * c).collect::<Vec<_>>(),
        )
        .unwrap();
        let zeros = vec![0.0; h];
        let ok = s == smape(&f, &y).unwrap()
            && (scaled - s).abs() < 1e-12
            && smape(&y, &y).unwrap() == 0.0
            && smape(&zeros, &zeros).unwrap() == 0.0
            && (0.0..=2.0).contains(&s);
        if !ok {
            failures += 1;
        }
    }
    failures
}
