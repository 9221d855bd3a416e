use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::nn::{dense, dense_backward, relu, relu_backward, AdamState, DenseParams, Tensor};

use super::{from_tensor, to_tensor, EmbedError, ReductionMeta, ReductionMethod, ReductionResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AeVariant {
    /// Independent decoder weights.
    Stacked,
    /// Decoder weights are the transposes of the encoder weights.
    Tied,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AeConfig {
    /// Encoder widths after the input, ending at the bottleneck.
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for AeConfig {
    fn default() -> Self {
        Self {
            hidden: vec![16, 8],
            epochs: 1,
            lr: 0.01,
            seed: 0,
        }
    }
}

/// Symmetric dense autoencoder with ReLU hidden layers and a linear output.
///
/// Full-batch training on mean squared reconstruction error. Decoder layer
/// `j` mirrors encoder layer `L - 1 - j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Autoencoder {
    pub variant: AeVariant,
    pub encoder: Vec<DenseParams>,
    /// For the tied variant the weights are kept equal to the mirrored
    /// encoder transposes; only the biases are free.
    pub decoder: Vec<DenseParams>,
}

struct Cache {
    /// Input to every layer, encoder then decoder.
    inputs: Vec<Tensor>,
    /// Pre-activation of every layer.
    pre: Vec<Tensor>,
}

impl Autoencoder {
    pub fn new(input_dim: usize, config: &AeConfig, variant: AeVariant) -> Result<Self, EmbedError> {
        if config.hidden.is_empty() || config.hidden.contains(&0) || input_dim == 0 {
            return Err(EmbedError::Invalid(format!(
                "autoencoder widths must be positive, got {input_dim} -> {:?}",
                config.hidden
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut dims = vec![input_dim];
        dims.extend(&config.hidden);
        let encoder: Vec<DenseParams> = dims.windows(2).map(|w| DenseParams::init(w[0], w[1], &mut rng)).collect();
        let decoder = dims
            .windows(2)
            .rev()
            .map(|w| match variant {
                AeVariant::Stacked => DenseParams::init(w[1], w[0], &mut rng),
                AeVariant::Tied => DenseParams::zeros(w[1], w[0]),
            })
            .collect();
        let mut ae = Self {
            variant,
            encoder,
            decoder,
        };
        ae.sync_tied();
        Ok(ae)
    }

    fn sync_tied(&mut self) {
        if self.variant != AeVariant::Tied {
            return;
        }
        let layers = self.encoder.len();
        for j in 0..layers {
            self.decoder[j].weight = self.encoder[layers - 1 - j].weight.transpose();
        }
    }

    /// Free parameters: encoder weights and biases, then decoder weights
    /// (stacked only) and biases.
    pub fn parameters(&self) -> Vec<&Tensor> {
        let mut out = Vec::new();
        for l in &self.encoder {
            out.push(&l.weight);
            out.push(&l.bias);
        }
        for l in &self.decoder {
            if self.variant == AeVariant::Stacked {
                out.push(&l.weight);
            }
            out.push(&l.bias);
        }
        out
    }

    fn parameters_mut(&mut self) -> Vec<&mut Tensor> {
        let stacked = self.variant == AeVariant::Stacked;
        let mut out = Vec::new();
        for l in &mut self.encoder {
            out.push(&mut l.weight);
            out.push(&mut l.bias);
        }
        for l in &mut self.decoder {
            if stacked {
                out.push(&mut l.weight);
            }
            out.push(&mut l.bias);
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
        self.sync_tied();
    }

    fn layers(&self) -> impl Iterator<Item = &DenseParams> {
        self.encoder.iter().chain(&self.decoder)
    }

    fn forward(&self, x: &Tensor) -> Result<(Tensor, Cache), EmbedError> {
        let total = self.encoder.len() * 2;
        let mut h = x.clone();
        let mut cache = Cache {
            inputs: Vec::with_capacity(total),
            pre: Vec::with_capacity(total),
        };
        for (i, layer) in self.layers().enumerate() {
            let pre = dense(&h, layer)?;
            let out = if i + 1 == total { pre.clone() } else { relu(&pre) };
            cache.inputs.push(h);
            cache.pre.push(pre);
            h = out;
        }
        Ok((h, cache))
    }

    /// Bottleneck activations.
    pub fn encode(&self, x: &Tensor) -> Result<Tensor, EmbedError> {
        let mut h = x.clone();
        for layer in &self.encoder {
            h = relu(&dense(&h, layer)?);
        }
        Ok(h)
    }

    /// Mean squared reconstruction error and gradients in
    /// [`Autoencoder::parameters`] order.
    pub fn loss_and_grad(&self, x: &Tensor) -> Result<(f64, Vec<Tensor>), EmbedError> {
        let (out, cache) = self.forward(x)?;
        let count = x.len() as f64;
        let mut loss = 0.0;
        let mut g = out.clone();
        for (gi, xi) in g.data_mut().iter_mut().zip(x.data()) {
            let e = *gi - xi;
            loss += e * e;
            *gi = 2.0 * e / count;
        }
        loss /= count;

        let layers: Vec<&DenseParams> = self.layers().collect();
        let total = layers.len();
        let mut weight_grads = vec![None; total];
        let mut bias_grads = vec![None; total];
        for i in (0..total).rev() {
            let g_pre = if i + 1 == total { g } else { relu_backward(&cache.pre[i], &g) };
            let dg = dense_backward(&cache.inputs[i], layers[i], &g_pre)?;
            g = dg.input;
            weight_grads[i] = Some(dg.weight);
            bias_grads[i] = Some(dg.bias);
        }
        let depth = self.encoder.len();
        let mut grads = Vec::new();
        for i in 0..depth {
            let mut w = weight_grads[i].take().unwrap();
            if self.variant == AeVariant::Tied {
                // the mirrored decoder layer uses this weight transposed
                let mirror = weight_grads[total - 1 - i].as_ref().unwrap();
                w.add_assign(&mirror.transpose());
            }
            grads.push(w);
            grads.push(bias_grads[i].take().unwrap());
        }
        for i in depth..total {
            if self.variant == AeVariant::Stacked {
                grads.push(weight_grads[i].take().unwrap());
            }
            grads.push(bias_grads[i].take().unwrap());
        }
        Ok((loss, grads))
    }

    /// One full-batch Adam step per epoch; returns the loss before each step.
    pub fn fit(&mut self, x: &Tensor, epochs: usize, lr: f64) -> Result<Vec<f64>, EmbedError> {
        let mut adam = AdamState::new(lr);
        let mut losses = Vec::with_capacity(epochs);
        for _ in 0..epochs {
            let (loss, grads) = self.loss_and_grad(x)?;
            losses.push(loss);
            let grad_refs: Vec<&[f64]> = grads.iter().map(|g| g.data()).collect();
            let mut params: Vec<&mut [f64]> = self.parameters_mut().into_iter().map(|t| t.data_mut()).collect();
            adam.step(&mut params, &grad_refs)?;
            self.sync_tied();
        }
        Ok(losses)
    }

    pub fn reconstruction_loss(&self, x: &Tensor) -> Result<f64, EmbedError> {
        let (out, _) = self.forward(x)?;
        Ok(out.data().iter().zip(x.data()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / x.len() as f64)
    }
}

/// Trains an autoencoder on the rows of `x` and returns the bottleneck codes.
pub fn ae_reduce(x: &DMatrix<f64>, variant: AeVariant, config: &AeConfig) -> Result<ReductionResult, EmbedError> {
    let mut ae = Autoencoder::new(x.ncols(), config, variant)?;
    let input = to_tensor(x);
    ae.fit(&input, config.epochs, config.lr)?;
    let codes = ae.encode(&input)?;
    Ok(ReductionResult {
        method: match variant {
            AeVariant::Stacked => ReductionMethod::AeStacked,
            AeVariant::Tied => ReductionMethod::AeTied,
        },
        matrix: from_tensor(&codes),
        meta: ReductionMeta::Autoencoder {
            reconstruction_loss: ae.reconstruction_loss(&input)?,
        },
    })
}
