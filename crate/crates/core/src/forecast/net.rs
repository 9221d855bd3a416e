use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::nn::{
    batch_norm, batch_norm_backward, conv1d_causal_backward, conv1d_causal_batched, dense,
    dense_backward, embed_backward, embed_lookup, relu, relu_backward, BatchNormCache,
    BatchNormState, ConvParams, DenseParams, EmbeddingTable, Mode, Tensor,
};

use super::{ForecastError, NetConfig};

/// Dilated causal conv, per-timestep dense, batch norm, ReLU.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderBlock {
    pub conv: ConvParams,
    pub dense: DenseParams,
    pub bn: BatchNormState,
}

/// Encoder-decoder quantile forecaster.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastModel {
    pub config: NetConfig,
    pub blocks: Vec<EncoderBlock>,
    pub embedding: EmbeddingTable,
    pub decoder: Vec<DenseParams>,
    /// One head per quantile, each `horizon` wide.
    pub heads: Vec<DenseParams>,
}

/// Gradients in [`ForecastModel::parameters`] order.
pub type Gradients = Vec<Tensor>;

struct BlockCache {
    input: Tensor,
    conv_out: Tensor,
    bn: BatchNormCache,
    bn_out: Tensor,
}

pub(crate) struct ForwardCache {
    batch: usize,
    blocks: Vec<BlockCache>,
    dows: Vec<Vec<usize>>,
    decoder_inputs: Vec<Tensor>,
    decoder_pre: Vec<Tensor>,
    head_input: Tensor,
}

pub fn build_model(config: &NetConfig, seed: u64) -> Result<ForecastModel, ForecastError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut blocks = Vec::with_capacity(config.dilations.len());
    let mut channels = 1;
    for &dilation in &config.dilations {
        blocks.push(EncoderBlock {
            conv: ConvParams::init(config.kernel, channels, config.filters, dilation, &mut rng),
            dense: DenseParams::init(config.filters, config.filters, &mut rng),
            bn: BatchNormState::new(config.filters),
        });
        channels = config.filters;
    }
    let embedding = EmbeddingTable::init(config.day_embed_dim, &mut rng);
    let mut decoder = Vec::with_capacity(config.decoder_dims.len());
    let mut width = config.decoder_input_dim();
    for &d in &config.decoder_dims {
        decoder.push(DenseParams::init(width, d, &mut rng));
        width = d;
    }
    let heads = config
        .quantiles
        .iter()
        .map(|_| DenseParams::init(width, config.horizon, &mut rng))
        .collect();
    Ok(ForecastModel {
        config: config.clone(),
        blocks,
        embedding,
        decoder,
        heads,
    })
}

impl ForecastModel {
    /// Learnable tensors in a fixed order: per block conv kernel/bias, dense
    /// weight/bias, bn gamma/beta; the day table; decoder layers; heads.
    pub fn parameters(&self) -> Vec<&Tensor> {
        let mut out = Vec::new();
        for b in &self.blocks {
            out.extend([
                &b.conv.kernel,
                &b.conv.bias,
                &b.dense.weight,
                &b.dense.bias,
                &b.bn.gamma,
                &b.bn.beta,
            ]);
        }
        out.push(&self.embedding.table);
        for d in self.decoder.iter().chain(&self.heads) {
            out.extend([&d.weight, &d.bias]);
        }
        out
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::new();
        for b in &mut self.blocks {
            out.push(&mut b.conv.kernel);
            out.push(&mut b.conv.bias);
            out.push(&mut b.dense.weight);
            out.push(&mut b.dense.bias);
            out.push(&mut b.bn.gamma);
            out.push(&mut b.bn.beta);
        }
        out.push(&mut self.embedding.table);
        for d in self.decoder.iter_mut().chain(self.heads.iter_mut()) {
            out.push(&mut d.weight);
            out.push(&mut d.bias);
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.parameters().iter().map(|t| t.len()).sum()
    }

    pub fn flat_parameters(&self) -> Vec<f64> {
        self.parameters().iter().flat_map(|t| t.data().iter().copied()).collect()
    }

    pub fn set_flat_parameters(&mut self, flat: &[f64]) {
        let mut offset = 0;
        for t in self.parameters_mut() {
            let n = t.len();
            t.data_mut().copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        assert_eq!(offset, flat.len(), "flat parameter length mismatch");
    }

    fn day_slots(&self, dows: &[Vec<usize>]) -> Result<Tensor, ForecastError> {
        let dim = self.config.day_embed_dim;
        let width = self.config.horizon * dim;
        let mut out = Tensor::zeros(&[dows.len(), width]);
        if !self.config.use_day_embeddings {
            return Ok(out);
        }
        for (b, days) in dows.iter().enumerate() {
            for (i, &day) in days.iter().enumerate() {
                let row = embed_lookup(day, &self.embedding)?;
                out.row_mut(b)[i * dim..(i + 1) * dim].copy_from_slice(&row);
            }
        }
        Ok(out)
    }

    /// Runs a batch of windows; returns one `[B x horizon]` tensor per
    /// quantile, in normalised log space.
    ///
    /// Training mode uses batch statistics and updates the running averages.
    pub(crate) fn forward_batch(
        &mut self,
        inputs: &[&[f64]],
        dows: &[&[usize]],
        mode: Mode,
    ) -> Result<(Vec<Tensor>, ForwardCache), ForecastError> {
        let cfg = &self.config;
        let (len, horizon) = (cfg.input_len, cfg.horizon);
        if inputs.len() != dows.len() || inputs.is_empty() {
            return Err(ForecastError::Shape(format!(
                "{} inputs but {} day-of-week rows",
                inputs.len(),
                dows.len()
            )));
        }
        for x in inputs {
            if x.len() != len {
                return Err(ForecastError::WindowLength {
                    expected: len,
                    actual: x.len(),
                });
            }
        }
        for d in dows {
            if d.len() != horizon {
                return Err(ForecastError::Shape(format!(
                    "expected {horizon} future days, got {}",
                    d.len()
                )));
            }
        }
        let batch = inputs.len();
        let mut h = Tensor::matrix(batch * len, 1, inputs.iter().flat_map(|x| x.iter().copied()).collect())?;
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for block in &mut self.blocks {
            let conv_out = conv1d_causal_batched(&h, len, &block.conv)?;
            let dense_out = dense(&conv_out, &block.dense)?;
            let (bn_out, bn_cache) = batch_norm(&dense_out, &mut block.bn, mode)?;
            let next = relu(&bn_out);
            blocks.push(BlockCache {
                input: h,
                conv_out,
                bn: bn_cache,
                bn_out,
            });
            h = next;
        }
        let filters = h.cols();
        let dows: Vec<Vec<usize>> = dows.iter().map(|d| d.to_vec()).collect();
        let slots = self.day_slots(&dows)?;
        let width = filters + slots.cols();
        let mut z = Tensor::zeros(&[batch, width]);
        for b in 0..batch {
            let row = z.row_mut(b);
            row[..filters].copy_from_slice(h.row(b * len + len - 1));
            row[filters..].copy_from_slice(slots.row(b));
        }
        let mut decoder_inputs = Vec::with_capacity(self.decoder.len());
        let mut decoder_pre = Vec::with_capacity(self.decoder.len());
        for layer in &self.decoder {
            let pre = dense(&z, layer)?;
            let post = relu(&pre);
            decoder_inputs.push(z);
            decoder_pre.push(pre);
            z = post;
        }
        let outputs = self
            .heads
            .iter()
            .map(|head| dense(&z, head))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((
            outputs,
            ForwardCache {
                batch,
                blocks,
                dows,
                decoder_inputs,
                decoder_pre,
                head_input: z,
            },
        ))
    }

    /// Backpropagates per-quantile output gradients through the whole net.
    pub(crate) fn backward(
        &self,
        cache: &ForwardCache,
        grad_outputs: &[Tensor],
    ) -> Result<Gradients, ForecastError> {
        let len = self.config.input_len;
        let mut head_grads = Vec::with_capacity(self.heads.len());
        let mut g = Tensor::zeros(&[cache.batch, cache.head_input.cols()]);
        for (head, go) in self.heads.iter().zip(grad_outputs) {
            let hg = dense_backward(&cache.head_input, head, go)?;
            g.add_assign(&hg.input);
            head_grads.push(hg);
        }
        let mut decoder_grads = Vec::with_capacity(self.decoder.len());
        for (i, layer) in self.decoder.iter().enumerate().rev() {
            let g_pre = relu_backward(&cache.decoder_pre[i], &g);
            let dg = dense_backward(&cache.decoder_inputs[i], layer, &g_pre)?;
            g = dg.input.clone();
            decoder_grads.push(dg);
        }
        decoder_grads.reverse();

        let filters = self.config.filters;
        let dim = self.config.day_embed_dim;
        let mut g_table = Tensor::zeros(self.embedding.table.shape());
        if self.config.use_day_embeddings {
            for (b, days) in cache.dows.iter().enumerate() {
                let row = g.row(b);
                for (i, &day) in days.iter().enumerate() {
                    let start = filters + i * dim;
                    embed_backward(day, &row[start..start + dim], &mut g_table)?;
                }
            }
        }
        // Only the last timestep of each window feeds the decoder.
        let mut g_h = Tensor::zeros(&[cache.batch * len, filters]);
        for b in 0..cache.batch {
            g_h.row_mut(b * len + len - 1).copy_from_slice(&g.row(b)[..filters]);
        }

        let mut block_grads = Vec::with_capacity(self.blocks.len());
        for (block, bc) in self.blocks.iter().zip(&cache.blocks).rev() {
            let g_bn_out = relu_backward(&bc.bn_out, &g_h);
            let bg = batch_norm_backward(&block.bn, &bc.bn, &g_bn_out)?;
            let dg = dense_backward(&bc.conv_out, &block.dense, &bg.input)?;
            let cg = conv1d_causal_backward(&bc.input, len, &block.conv, &dg.input)?;
            g_h = cg.input;
            block_grads.push([cg.kernel, cg.bias, dg.weight, dg.bias, bg.gamma, bg.beta]);
        }
        block_grads.reverse();

        let mut out = Vec::new();
        for grads in block_grads {
            out.extend(grads);
        }
        out.push(g_table);
        for dg in decoder_grads.into_iter().chain(head_grads) {
            out.push(dg.weight);
            out.push(dg.bias);
        }
        Ok(out)
    }

    /// Single-window forward pass; rows are quantiles, columns horizon steps.
    pub fn forward(
        &mut self,
        window_input: &[f64],
        dow_future: &[usize],
        mode: Mode,
    ) -> Result<Tensor, ForecastError> {
        let (outs, _) = self.forward_batch(&[window_input], &[dow_future], mode)?;
        let horizon = self.config.horizon;
        let data = outs.into_iter().flat_map(|t| t.into_data()).collect();
        Ok(Tensor::matrix(self.heads.len(), horizon, data)?)
    }

    /// Inference-mode forward pass that leaves the model untouched.
    pub fn infer(&self, window_input: &[f64], dow_future: &[usize]) -> Result<Tensor, ForecastError> {
        self.clone().forward(window_input, dow_future, Mode::Infer)
    }
}
