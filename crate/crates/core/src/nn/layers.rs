use rand::Rng;

use super::tensor::gemm;
use super::{NnError, Tensor};

fn check(op: &'static str, dim: &'static str, expected: usize, actual: usize) -> Result<(), NnError> {
    if expected == actual {
        Ok(())
    } else {
        Err(NnError::ShapeMismatch {
            op,
            dim,
            expected,
            actual,
        })
    }
}

fn uniform(rng: &mut impl Rng, len: usize, limit: f64) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-limit..=limit)).collect()
}

fn column_sums(t: &Tensor) -> Vec<f64> {
    let cols = t.cols();
    let mut out = vec![0.0; cols];
    for row in t.data().chunks_exact(cols.max(1)) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
    out
}

/// Causal dilated 1-D convolution weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams {
    /// `[kernel_size x in_channels x out_channels]`
    pub kernel: Tensor,
    /// `[out_channels]`
    pub bias: Tensor,
    pub dilation: usize,
}

impl ConvParams {
    pub fn new(kernel: Tensor, bias: Tensor, dilation: usize) -> Result<Self, NnError> {
        if kernel.shape().len() != 3 {
            return Err(NnError::InvalidArgument(format!(
                "conv kernel must be rank 3, got shape {:?}",
                kernel.shape()
            )));
        }
        if dilation == 0 {
            return Err(NnError::InvalidArgument("conv dilation must be >= 1".into()));
        }
        check("conv1d_causal", "bias", kernel.shape()[2], bias.len())?;
        Ok(Self {
            kernel,
            bias,
            dilation,
        })
    }

    /// Fan-in scaled uniform initialisation, zero bias.
    pub fn init(
        kernel_size: usize,
        in_channels: usize,
        out_channels: usize,
        dilation: usize,
        rng: &mut impl Rng,
    ) -> Self {
        let limit = 1.0 / ((kernel_size * in_channels) as f64).sqrt();
        let kernel = Tensor::new(
            vec![kernel_size, in_channels, out_channels],
            uniform(rng, kernel_size * in_channels * out_channels, limit),
        )
        .expect("shape matches data");
        Self {
            kernel,
            bias: Tensor::zeros(&[out_channels]),
            dilation: dilation.max(1),
        }
    }

    pub fn kernel_size(&self) -> usize {
        self.kernel.shape()[0]
    }

    pub fn in_channels(&self) -> usize {
        self.kernel.shape()[1]
    }

    pub fn out_channels(&self) -> usize {
        self.kernel.shape()[2]
    }

    fn shift(&self, tap: usize) -> usize {
        (self.kernel_size() - 1 - tap) * self.dilation
    }
}

#[derive(Debug, Clone)]
pub struct ConvGrads {
    pub input: Tensor,
    pub kernel: Tensor,
    pub bias: Tensor,
}

/// Copy of `input` delayed by `shift` steps within each sequence, zero-filled.
fn delayed(input: &Tensor, seq_len: usize, shift: usize) -> Tensor {
    let cols = input.cols();
    let mut out = Tensor::zeros(&[input.rows(), cols]);
    if shift >= seq_len {
        return out;
    }
    let seqs = input.rows() / seq_len;
    for s in 0..seqs {
        let base = s * seq_len;
        let src = &input.data()[base * cols..(base + seq_len - shift) * cols];
        out.data_mut()[(base + shift) * cols..(base + seq_len) * cols].copy_from_slice(src);
    }
    out
}

/// Causal convolution over a single sequence `[T x C_in]`.
///
/// Output row `t` is `bias + sum_k kernel[k] . x[t - (K-1-k) * dilation]`,
/// with out-of-range times reading zeros.
pub fn conv1d_causal(input: &Tensor, params: &ConvParams) -> Result<Tensor, NnError> {
    conv1d_causal_batched(input, input.rows(), params)
}

/// Causal convolution over `rows / seq_len` stacked sequences of length `seq_len`.
pub fn conv1d_causal_batched(
    input: &Tensor,
    seq_len: usize,
    params: &ConvParams,
) -> Result<Tensor, NnError> {
    check("conv1d_causal", "in_channels", params.in_channels(), input.cols())?;
    if seq_len == 0 || input.rows() % seq_len != 0 {
        return Err(NnError::ShapeMismatch {
            op: "conv1d_causal",
            dim: "time",
            expected: seq_len,
            actual: input.rows(),
        });
    }
    let (rows, cin, cout) = (input.rows(), params.in_channels(), params.out_channels());
    let mut out = Tensor::zeros(&[rows, cout]);
    for row in out.data_mut().chunks_exact_mut(cout) {
        row.copy_from_slice(params.bias.data());
    }
    for tap in 0..params.kernel_size() {
        let shift = params.shift(tap);
        let w = &params.kernel.data()[tap * cin * cout..(tap + 1) * cin * cout];
        if shift == 0 {
            gemm(rows, cin, cout, input.data(), false, w, false, 1.0, out.data_mut());
        } else {
            let x = delayed(input, seq_len, shift);
            gemm(rows, cin, cout, x.data(), false, w, false, 1.0, out.data_mut());
        }
    }
    Ok(out)
}

pub fn conv1d_causal_backward(
    input: &Tensor,
    seq_len: usize,
    params: &ConvParams,
    grad_out: &Tensor,
) -> Result<ConvGrads, NnError> {
    let (rows, cin, cout) = (input.rows(), params.in_channels(), params.out_channels());
    check("conv1d_causal_backward", "rows", rows, grad_out.rows())?;
    check("conv1d_causal_backward", "out_channels", cout, grad_out.cols())?;
    let mut g_kernel = Tensor::zeros(params.kernel.shape());
    let mut g_input = Tensor::zeros(&[rows, cin]);
    let mut g_shifted = Tensor::zeros(&[rows, cin]);
    for tap in 0..params.kernel_size() {
        let shift = params.shift(tap);
        let w = &params.kernel.data()[tap * cin * cout..(tap + 1) * cin * cout];
        let gw = &mut g_kernel.data_mut()[tap * cin * cout..(tap + 1) * cin * cout];
        if shift == 0 {
            gemm(cin, rows, cout, input.data(), true, grad_out.data(), false, 0.0, gw);
            gemm(rows, cout, cin, grad_out.data(), false, w, true, 1.0, g_input.data_mut());
            continue;
        }
        let x = delayed(input, seq_len, shift);
        gemm(cin, rows, cout, x.data(), true, grad_out.data(), false, 0.0, gw);
        gemm(rows, cout, cin, grad_out.data(), false, w, true, 0.0, g_shifted.data_mut());
        // Undo the delay: gradient at row t+shift flows back to row t.
        if shift < seq_len {
            for s in 0..rows / seq_len {
                let base = s * seq_len;
                for t in 0..seq_len - shift {
                    let src = (base + t + shift) * cin;
                    let dst = (base + t) * cin;
                    for c in 0..cin {
                        g_input.data_mut()[dst + c] += g_shifted.data()[src + c];
                    }
                }
            }
        }
    }
    Ok(ConvGrads {
        input: g_input,
        kernel: g_kernel,
        bias: Tensor::vector(column_sums(grad_out)),
    })
}

/// Fully connected layer, `y = x W + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams {
    /// `[in_dim x out_dim]`
    pub weight: Tensor,
    /// `[out_dim]`
    pub bias: Tensor,
}

impl DenseParams {
    pub fn new(weight: Tensor, bias: Tensor) -> Result<Self, NnError> {
        if weight.shape().len() != 2 {
            return Err(NnError::InvalidArgument(format!(
                "dense weight must be rank 2, got shape {:?}",
                weight.shape()
            )));
        }
        check("dense", "bias", weight.shape()[1], bias.len())?;
        Ok(Self { weight, bias })
    }

    pub fn init(in_dim: usize, out_dim: usize, rng: &mut impl Rng) -> Self {
        let limit = 1.0 / (in_dim as f64).sqrt();
        Self {
            weight: Tensor::matrix(in_dim, out_dim, uniform(rng, in_dim * out_dim, limit))
                .expect("shape matches data"),
            bias: Tensor::zeros(&[out_dim]),
        }
    }

    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            weight: Tensor::zeros(&[in_dim, out_dim]),
            bias: Tensor::zeros(&[out_dim]),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn out_dim(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn param_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }
}

#[derive(Debug, Clone)]
pub struct DenseGrads {
    pub input: Tensor,
    pub weight: Tensor,
    pub bias: Tensor,
}

pub fn dense(input: &Tensor, params: &DenseParams) -> Result<Tensor, NnError> {
    let (in_dim, out_dim) = (params.in_dim(), params.out_dim());
    let cols = if input.shape().len() == 1 { input.len() } else { input.cols() };
    check("dense", "in_dim", in_dim, cols)?;
    let rows = if input.shape().len() == 1 { 1 } else { input.rows() };
    let mut out = Tensor::zeros(&[rows, out_dim]);
    for row in out.data_mut().chunks_exact_mut(out_dim.max(1)) {
        row.copy_from_slice(params.bias.data());
    }
    gemm(rows, in_dim, out_dim, input.data(), false, params.weight.data(), false, 1.0, out.data_mut());
    Ok(out)
}

pub fn dense_backward(
    input: &Tensor,
    params: &DenseParams,
    grad_out: &Tensor,
) -> Result<DenseGrads, NnError> {
    let (in_dim, out_dim) = (params.in_dim(), params.out_dim());
    let rows = grad_out.rows();
    check("dense_backward", "out_dim", out_dim, grad_out.cols())?;
    check("dense_backward", "rows", rows * in_dim, input.len())?;
    let mut g_weight = Tensor::zeros(&[in_dim, out_dim]);
    gemm(in_dim, rows, out_dim, input.data(), true, grad_out.data(), false, 0.0, g_weight.data_mut());
    let mut g_input = Tensor::zeros(&[rows, in_dim]);
    gemm(rows, out_dim, in_dim, grad_out.data(), false, params.weight.data(), true, 0.0, g_input.data_mut());
    Ok(DenseGrads {
        input: g_input,
        weight: g_weight,
        bias: Tensor::vector(column_sums(grad_out)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Per-channel batch normalisation parameters and running statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNormState {
    pub gamma: Tensor,
    pub beta: Tensor,
    pub running_mean: Tensor,
    pub running_var: Tensor,
    pub momentum: f64,
    pub epsilon: f64,
}

impl BatchNormState {
    pub fn new(channels: usize) -> Self {
        Self {
            gamma: Tensor::vector(vec![1.0; channels]),
            beta: Tensor::zeros(&[channels]),
            running_mean: Tensor::zeros(&[channels]),
            running_var: Tensor::vector(vec![1.0; channels]),
            momentum: 0.9,
            epsilon: 1e-5,
        }
    }

    pub fn channels(&self) -> usize {
        self.gamma.len()
    }
}

/// Values kept from the forward pass for [`batch_norm_backward`].
#[derive(Debug, Clone)]
pub struct BatchNormCache {
    normalized: Tensor,
    inv_std: Vec<f64>,
    mode: Mode,
}

/// Normalises each column of `[B x C]` input.
///
/// Training mode uses biased batch statistics and folds them into the
/// running averages; inference mode uses the running averages only.
pub fn batch_norm(
    input: &Tensor,
    state: &mut BatchNormState,
    mode: Mode,
) -> Result<(Tensor, BatchNormCache), NnError> {
    let channels = state.channels();
    check("batch_norm", "channels", channels, input.cols())?;
    let rows = input.rows();
    let (mean, var) = match mode {
        Mode::Train => {
            if rows < 2 {
                return Err(NnError::BatchTooSmall(rows));
            }
            let mut mean = column_sums(input);
            mean.iter_mut().for_each(|m| *m /= rows as f64);
            let mut var = vec![0.0; channels];
            for row in input.data().chunks_exact(channels) {
                for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
                    *v += (x - m) * (x - m);
                }
            }
            var.iter_mut().for_each(|v| *v /= rows as f64);
            let mom = state.momentum;
            for (r, m) in state.running_mean.data_mut().iter_mut().zip(&mean) {
                *r = mom * *r + (1.0 - mom) * m;
            }
            for (r, v) in state.running_var.data_mut().iter_mut().zip(&var) {
                *r = mom * *r + (1.0 - mom) * v;
            }
            (mean, var)
        }
        Mode::Infer => (
            state.running_mean.data().to_vec(),
            state.running_var.data().to_vec(),
        ),
    };
    let inv_std: Vec<f64> = var
        .iter()
        .map(|v| {
            let denom = (v + state.epsilon).sqrt();
            if denom > 0.0 {
                1.0 / denom
            } else {
                0.0
            }
        })
        .collect();
    let mut normalized = Tensor::zeros(&[rows, channels]);
    let mut out = Tensor::zeros(&[rows, channels]);
    for ((xr, nr), or) in input
        .data()
        .chunks_exact(channels)
        .zip(normalized.data_mut().chunks_exact_mut(channels))
        .zip(out.data_mut().chunks_exact_mut(channels))
    {
        for c in 0..channels {
            let xhat = (xr[c] - mean[c]) * inv_std[c];
            nr[c] = xhat;
            or[c] = state.gamma.data()[c] * xhat + state.beta.data()[c];
        }
    }
    Ok((
        out,
        BatchNormCache {
            normalized,
            inv_std,
            mode,
        },
    ))
}

#[derive(Debug, Clone)]
pub struct BatchNormGrads {
    pub input: Tensor,
    pub gamma: Tensor,
    pub beta: Tensor,
}

pub fn batch_norm_backward(
    state: &BatchNormState,
    cache: &BatchNormCache,
    grad_out: &Tensor,
) -> Result<BatchNormGrads, NnError> {
    let channels = state.channels();
    check("batch_norm_backward", "channels", channels, grad_out.cols())?;
    check("batch_norm_backward", "rows", cache.normalized.rows(), grad_out.rows())?;
    let rows = grad_out.rows();
    let mut g_gamma = vec![0.0; channels];
    let mut g_beta = vec![0.0; channels];
    for (gr, nr) in grad_out
        .data()
        .chunks_exact(channels)
        .zip(cache.normalized.data().chunks_exact(channels))
    {
        for c in 0..channels {
            g_gamma[c] += gr[c] * nr[c];
            g_beta[c] += gr[c];
        }
    }
    let gamma = state.gamma.data();
    let mut g_input = Tensor::zeros(&[rows, channels]);
    match cache.mode {
        Mode::Infer => {
            for (gi, gr) in g_input
                .data_mut()
                .chunks_exact_mut(channels)
                .zip(grad_out.data().chunks_exact(channels))
            {
                for c in 0..channels {
                    gi[c] = gr[c] * gamma[c] * cache.inv_std[c];
                }
            }
        }
        Mode::Train => {
            // dx = inv_std / B * (B * dxhat - sum(dxhat) - xhat * sum(dxhat * xhat))
            let n = rows as f64;
            for ((gi, gr), nr) in g_input
                .data_mut()
                .chunks_exact_mut(channels)
                .zip(grad_out.data().chunks_exact(channels))
                .zip(cache.normalized.data().chunks_exact(channels))
            {
                for c in 0..channels {
                    let dxhat = gr[c] * gamma[c];
                    let sum_dxhat = g_beta[c] * gamma[c];
                    let sum_dxhat_xhat = g_gamma[c] * gamma[c];
                    gi[c] = cache.inv_std[c] / n * (n * dxhat - sum_dxhat - nr[c] * sum_dxhat_xhat);
                }
            }
        }
    }
    Ok(BatchNormGrads {
        input: g_input,
        gamma: Tensor::vector(g_gamma),
        beta: Tensor::vector(g_beta),
    })
}

pub fn relu(input: &Tensor) -> Tensor {
    let mut out = input.clone();
    out.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
    out
}

/// Gradient mask is `x > 0`; the subgradient at zero is zero.
pub fn relu_backward(input: &Tensor, grad_out: &Tensor) -> Tensor {
    let mut out = grad_out.clone();
    for (g, x) in out.data_mut().iter_mut().zip(input.data()) {
        if *x <= 0.0 {
            *g = 0.0;
        }
    }
    out
}

pub const DAYS_PER_WEEK: usize = 7;

/// One learned vector per day of the week (Monday = 0).
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    /// `[7 x dim]`
    pub table: Tensor,
}

impl EmbeddingTable {
    pub fn new(table: Tensor) -> Result<Self, NnError> {
        check("embedding", "rows", DAYS_PER_WEEK, table.rows())?;
        Ok(Self { table })
    }

    pub fn init(dim: usize, rng: &mut impl Rng) -> Self {
        Self {
            table: Tensor::matrix(DAYS_PER_WEEK, dim, uniform(rng, DAYS_PER_WEEK * dim, 0.05))
                .expect("shape matches data"),
        }
    }

    pub fn dim(&self) -> usize {
        self.table.cols()
    }
}

pub fn embed_lookup(day: usize, table: &EmbeddingTable) -> Result<Vec<f64>, NnError> {
    if day >= DAYS_PER_WEEK {
        return Err(NnError::DayOutOfRange(day));
    }
    Ok(table.table.row(day).to_vec())
}

/// Scatter-add `grad_row` into the row selected by `day`.
pub fn embed_backward(
    day: usize,
    grad_row: &[f64],
    grad_table: &mut Tensor,
) -> Result<(), NnError> {
    if day >= DAYS_PER_WEEK {
        return Err(NnError::DayOutOfRange(day));
    }
    check("embed_backward", "dim", grad_table.cols(), grad_row.len())?;
    for (g, d) in grad_table.row_mut(day).iter_mut().zip(grad_row) {
        *g += d;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::grad_check::{check_gradient, relative_error};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single_channel_conv(taps: [f64; 2], dilation: usize) -> ConvParams {
        ConvParams::new(
            Tensor::new(vec![2, 1, 1], taps.to_vec()).unwrap(),
            Tensor::zeros(&[1]),
            dilation,
        )
        .unwrap()
    }

    fn column(values: &[f64]) -> Tensor {
        Tensor::matrix(values.len(), 1, values.to_vec()).unwrap()
    }

    #[test]
    fn conv_identity_kernel() {
        let p = single_channel_conv([0.0, 1.0], 3);
        let x = column(&[4.0, -1.0, 2.5, 7.0]);
        assert_eq!(conv1d_causal(&x, &p).unwrap(), x);
    }

    #[test]
    fn conv_hand_examples() {
        let x = column(&[1.0, 2.0, 3.0]);
        let y = conv1d_causal(&x, &single_channel_conv([1.0, 1.0], 1)).unwrap();
        assert_eq!(y.data(), &[1.0, 3.0, 5.0]);
        let y = conv1d_causal(&x, &single_channel_conv([1.0, 1.0], 2)).unwrap();
        assert_eq!(y.data(), &[1.0, 2.0, 4.0]);
    }

    #[test]
    fn conv_shape_error_names_dimension() {
        let p = single_channel_conv([1.0, 1.0], 1);
        let x = Tensor::zeros(&[3, 2]);
        match conv1d_causal(&x, &p) {
            Err(NnError::ShapeMismatch { dim, .. }) => assert_eq!(dim, "in_channels"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dense_examples() {
        let p = DenseParams::new(
            Tensor::matrix(2, 1, vec![1.0, 2.0]).unwrap(),
            Tensor::vector(vec![1.0]),
        )
        .unwrap();
        let y = dense(&Tensor::matrix(1, 2, vec![3.0, 4.0]).unwrap(), &p).unwrap();
        assert_eq!(y.data(), &[12.0]);
        let y = dense(&Tensor::zeros(&[1, 2]), &p).unwrap();
        assert_eq!(y.data(), &[1.0]);

        let eye = DenseParams::new(
            Tensor::matrix(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap(),
            Tensor::zeros(&[2]),
        )
        .unwrap();
        let x = Tensor::matrix(2, 2, vec![1.5, -2.0, 0.25, 9.0]).unwrap();
        assert_eq!(dense(&x, &eye).unwrap(), x);

        assert!(dense(&Tensor::zeros(&[1, 3]), &p).is_err());
    }

    #[test]
    fn batch_norm_examples() {
        let mut st = BatchNormState::new(1);
        st.epsilon = 0.0;
        let (y, _) = batch_norm(&column(&[1.0, 3.0]), &mut st, Mode::Train).unwrap();
        assert_eq!(y.data(), &[-1.0, 1.0]);
        // running stats: 0.9 * 0 + 0.1 * 2, 0.9 * 1 + 0.1 * 1
        assert!((st.running_mean.data()[0] - 0.2).abs() < 1e-15);
        assert!((st.running_var.data()[0] - 1.0).abs() < 1e-15);

        let mut st = BatchNormState::new(1);
        st.gamma = Tensor::vector(vec![3.0]);
        st.beta = Tensor::vector(vec![-0.5]);
        let (y, _) = batch_norm(&column(&[2.0, 2.0, 2.0]), &mut st, Mode::Train).unwrap();
        assert!(y.data().iter().all(|v| *v == -0.5));

        let mut st = BatchNormState::new(1);
        st.epsilon = 0.0;
        let x = column(&[0.3, -4.0, 8.0]);
        let (y, _) = batch_norm(&x, &mut st, Mode::Infer).unwrap();
        assert_eq!(y, x);

        let mut st = BatchNormState::new(1);
        assert!(matches!(
            batch_norm(&column(&[1.0]), &mut st, Mode::Train),
            Err(NnError::BatchTooSmall(1))
        ));
    }

    #[test]
    fn relu_examples() {
        let y = relu(&Tensor::vector(vec![-1.0, 0.0, 2.0]));
        assert_eq!(y.data(), &[0.0, 0.0, 2.0]);
        let x = Tensor::vector(vec![0.5, 1.0, 3.0]);
        assert_eq!(relu(&x), x);
        let g = relu_backward(
            &Tensor::vector(vec![-1.0, 0.0, 2.0]),
            &Tensor::vector(vec![5.0, 5.0, 5.0]),
        );
        assert_eq!(g.data(), &[0.0, 0.0, 5.0]);
    }

    #[test]
    fn embedding_lookup_and_scatter() {
        let mut eye = vec![0.0; 49];
        for i in 0..7 {
            eye[i * 7 + i] = 1.0;
        }
        let table = EmbeddingTable::new(Tensor::matrix(7, 7, eye).unwrap()).unwrap();
        for k in 0..7 {
            let row = embed_lookup(k, &table).unwrap();
            assert_eq!(row[k], 1.0);
            assert_eq!(row.iter().sum::<f64>(), 1.0);
        }
        assert!(matches!(embed_lookup(7, &table), Err(NnError::DayOutOfRange(7))));

        let mut grad = Tensor::zeros(&[7, 2]);
        embed_backward(3, &[1.0, 2.0], &mut grad).unwrap();
        let touched: Vec<usize> = (0..7).filter(|&r| grad.row(r) != [0.0, 0.0]).collect();
        assert_eq!(touched, vec![3]);
    }

    #[test]
    fn repeated_lookups_sum_gradients() {
        // loss = w1 . e[d] + w2 . e[d], both lookups of the same day.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let table = EmbeddingTable::init(2, &mut rng);
        let (w1, w2) = ([0.7, -1.3], [2.0, 0.4]);
        let day = 4;
        let loss = |flat: &[f64]| {
            let t = EmbeddingTable::new(Tensor::matrix(7, 2, flat.to_vec()).unwrap()).unwrap();
            let a = embed_lookup(day, &t).unwrap();
            let b = embed_lookup(day, &t).unwrap();
            w1[0] * a[0] + w1[1] * a[1] + w2[0] * b[0] + w2[1] * b[1]
        };
        let mut grad = Tensor::zeros(&[7, 2]);
        embed_backward(day, &w1, &mut grad).unwrap();
        embed_backward(day, &w2, &mut grad).unwrap();
        let err = check_gradient(loss, table.table.data(), grad.data());
        assert!(err < 1e-8, "{err}");
        assert!(relative_error(grad.row(day)[0], 2.7) < 1e-15);
    }
}
