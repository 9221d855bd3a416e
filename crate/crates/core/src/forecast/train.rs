use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::nn::{pinball_loss, AdamState, Mode, Tensor};
use crate::series::{make_windows, PreparedPanel, TrainingWindow};

use super::{ForecastError, ForecastModel, Gradients, NetConfig};

/// Net outputs are clamped to `[-EXP_CLAMP, EXP_CLAMP]` before `exp`.
pub const EXP_CLAMP: f64 = 10.0;

/// `exp(clamp(z)) * level - 1`, floored at zero.
pub fn rescale(z: &[f64], anchor_level: f64) -> Vec<f64> {
    z.iter()
        .map(|v| (v.clamp(-EXP_CLAMP, EXP_CLAMP).exp() * anchor_level - 1.0).max(0.0))
        .collect()
}

/// A borrowed mini-batch of windows.
pub struct Batch<'a> {
    pub windows: Vec<&'a TrainingWindow>,
}

impl<'a> Batch<'a> {
    pub fn new(windows: Vec<&'a TrainingWindow>) -> Self {
        Self { windows }
    }
}

/// Summed pinball loss over the quantile heads and its gradient for one
/// batch, with batch norm in training mode.
///
/// Predictions are mapped to the count scale before scoring. The zero
/// floor of [`rescale`] is not applied here so the loss stays
/// differentiable for small levels.
pub fn batch_loss_and_grad(
    model: &mut ForecastModel,
    batch: &Batch<'_>,
) -> Result<(f64, Gradients), ForecastError> {
    let inputs: Vec<&[f64]> = batch.windows.iter().map(|w| w.input.as_slice()).collect();
    let dows: Vec<&[usize]> = batch.windows.iter().map(|w| w.dow_future.as_slice()).collect();
    let (outputs, cache) = model.forward_batch(&inputs, &dows, Mode::Train)?;
    let horizon = model.config.horizon;
    let log_space = model.config.log_space_loss;

    let mut targets = Vec::with_capacity(batch.windows.len() * horizon);
    for w in &batch.windows {
        if log_space {
            let shift = w.anchor_level.ln();
            targets.extend(w.target.iter().map(|y| (y + 1.0).ln() - shift));
        } else {
            targets.extend_from_slice(&w.target);
        }
    }

    let mut total = 0.0;
    let mut grad_outputs = Vec::with_capacity(outputs.len());
    for (out, &q) in outputs.iter().zip(&model.config.quantiles) {
        let z = out.data();
        if log_space {
            let (loss, g) = pinball_loss(z, &targets, q)?;
            total += loss;
            grad_outputs.push(Tensor::matrix(out.rows(), horizon, g)?);
            continue;
        }
        // yhat = exp(clamp(z)) * level - 1, d yhat / dz = exp(z) * level inside the clamp
        let mut pred = Vec::with_capacity(z.len());
        let mut dpred = Vec::with_capacity(z.len());
        for (i, v) in z.iter().enumerate() {
            let level = batch.windows[i / horizon].anchor_level;
            let e = v.clamp(-EXP_CLAMP, EXP_CLAMP).exp() * level;
            pred.push(e - 1.0);
            dpred.push(if v.abs() < EXP_CLAMP { e } else { 0.0 });
        }
        let (loss, g) = pinball_loss(&pred, &targets, q)?;
        total += loss;
        let gz = g.iter().zip(&dpred).map(|(a, b)| a * b).collect();
        grad_outputs.push(Tensor::matrix(out.rows(), horizon, gz)?);
    }
    let grads = model.backward(&cache, &grad_outputs)?;
    Ok((total, grads))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean batch loss per epoch, weighted by batch size.
    pub epoch_losses: Vec<f64>,
    pub windows: usize,
    pub steps: u64,
}

/// Trains one net over every window of every region with Adam.
///
/// Windows are shuffled globally each epoch by a generator seeded from
/// `config.seed`, so repeated runs are bit-identical.
pub fn train(
    model: &mut ForecastModel,
    prep: &PreparedPanel,
    config: &NetConfig,
) -> Result<TrainReport, ForecastError> {
    config.validate()?;
    let windows = make_windows(prep, config.input_len, config.horizon)?;
    if windows.is_empty() {
        return Err(ForecastError::NoWindows);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut adam = AdamState::new(config.lr);
    let mut order: Vec<usize> = (0..windows.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch = Batch::new(chunk.iter().map(|&i| &windows[i]).collect());
            let (loss, grads) = batch_loss_and_grad(model, &batch)?;
            sum += loss * chunk.len() as f64;
            let grad_refs: Vec<&[f64]> = grads.iter().map(|g| g.data()).collect();
            let mut params: Vec<&mut [f64]> =
                model.parameters_mut().into_iter().map(|t| t.data_mut()).collect();
            adam.step(&mut params, &grad_refs)?;
        }
        epoch_losses.push(sum / windows.len() as f64);
    }
    Ok(TrainReport {
        epoch_losses,
        windows: windows.len(),
        steps: adam.t,
    })
}
