//! The reranker: an MLP over interaction features with a linear scalar head.
//!
//! Parameters live in one flat vector so the optimizer, checkpointing, and
//! the exact parameter count stay trivial. Architecture: `depth` hidden
//! layers of width `width` with tanh, then a linear head.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::math;
use crate::rng;
use crate::Result;

/// Scorer capacity configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScorerConfig {
    /// Hidden layer width.
    pub width: usize,
    /// Number of hidden layers.
    pub depth: usize,
    /// Input feature dimension.
    pub feature_dim: usize,
    /// Weight initialization seed.
    pub seed: u64,
}

impl ScorerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 {
            return Err(CoreError::Config {
                field: "width",
                message: "must be >= 1".into(),
            });
        }
        if self.depth == 0 {
            return Err(CoreError::Config {
                field: "depth",
                message: "must be >= 1".into(),
            });
        }
        if self.feature_dim == 0 {
            return Err(CoreError::Config {
                field: "feature_dim",
                message: "must be >= 1".into(),
            });
        }
        Ok(())
    }

    /// Exact number of scalar parameters:
    /// `F*w + w` for the first layer, `(depth-1) * (w^2 + w)` for the rest,
    /// `w + 1` for the head.
    pub fn param_count(&self) -> u64 {
        let (f, w, d) = (
            self.feature_dim as u64,
            self.width as u64,
            self.depth as u64,
        );
        f * w + w + (d - 1) * (w * w + w) + w + 1
    }
}

/// Flat-parameter MLP scorer.
#[derive(Debug, Clone, PartialEq)]
pub struct Scorer {
    config: ScorerConfig,
    params: Vec<f64>,
}

/// Scratch buffers for forward/backward passes.
pub(crate) struct Workspace {
    /// Hidden activations, `depth * width`, layer-major.
    acts: Vec<f64>,
    delta: Vec<f64>,
    delta_next: Vec<f64>,
}

impl Workspace {
    pub(crate) fn new(config: &ScorerConfig) -> Self {
        Workspace {
            acts: vec![0.0; config.depth * config.width],
            delta: vec![0.0; config.width],
            delta_next: vec![0.0; config.width],
        }
    }
}

impl Scorer {
    /// Seeded scaled-Gaussian initialization: weights `N(0, 1/fan_in)`,
    /// biases zero.
    pub fn new(config: ScorerConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = rng::stream(config.seed, "scorer-init");
        let mut params = Vec::with_capacity(config.param_count() as usize);
        for layer in 0..config.depth {
            let in_dim = if layer == 0 { config.feature_dim } else { config.width };
            let scale = 1.0 / math::sqrt(in_dim as f64);
            for _ in 0..config.width * in_dim {
                params.push(rng::gaussian(&mut rng) * scale);
            }
            params.extend(core::iter::repeat(0.0).take(config.width));
        }
        let scale = 1.0 / math::sqrt(config.width as f64);
        for _ in 0..config.width {
            params.push(rng::gaussian(&mut rng) * scale);
        }
        params.push(0.0);
        debug_assert_eq!(params.len() as u64, config.param_count());
        Ok(Scorer { config, params })
    }

    pub fn config(&self) -> &ScorerConfig {
        &self.config
    }

    /// Number of scalar parameters actually allocated.
    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub(crate) fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Flat parameter vector in layer order (weights then bias per layer,
    /// then head weights, then head bias).
    pub fn to_flat(&self) -> Vec<f64> {
        self.params.clone()
    }

    /// Rebuild from a flat vector; the length must match the config.
    pub fn from_flat(config: ScorerConfig, params: Vec<f64>) -> Result<Self> {
        config.validate()?;
        if params.len() as u64 != config.param_count() {
            return Err(CoreError::Shape {
                expected: config.param_count() as usize,
                got: params.len(),
            });
        }
        Ok(Scorer { config, params })
    }

    fn layer_w_offset(&self, layer: usize) -> usize {
        let (f, w) = (self.config.feature_dim, self.config.width);
        if layer == 0 {
            0
        } else {
            (f * w + w) + (layer - 1) * (w * w + w)
        }
    }

    fn layer_b_offset(&self, layer: usize) -> usize {
        let in_dim = if layer == 0 { self.config.feature_dim } else { self.config.width };
        self.layer_w_offset(layer) + self.config.width * in_dim
    }

    fn head_w_offset(&self) -> usize {
        self.layer_w_offset(self.config.depth)
    }

    /// Deterministic forward pass. Errors if the feature dimension is wrong.
    pub fn score(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.config.feature_dim {
            return Err(CoreError::Shape {
                expected: self.config.feature_dim,
                got: features.len(),
            });
        }
        let mut ws = Workspace::new(&self.config);
        Ok(self.forward(features, &mut ws))
    }

    /// Forward pass caching hidden activations in the workspace.
    pub(crate) fn forward(&self, features: &[f64], ws: &mut Workspace) -> f64 {
        let w = self.config.width;
        for layer in 0..self.config.depth {
            let w_off = self.layer_w_offset(layer);
            let b_off = self.layer_b_offset(layer);
            let (in_dim, prev_off) = if layer == 0 {
                (self.config.feature_dim, 0)
            } else {
                (w, (layer - 1) * w)
            };
            for i in 0..w {
                let row = &self.params[w_off + i * in_dim..w_off + (i + 1) * in_dim];
                let mut pre = self.params[b_off + i];
                if layer == 0 {
                    for (a, b) in row.iter().zip(features) {
                        pre += a * b;
                    }
                } else {
                    for (a, b) in row.iter().zip(&ws.acts[prev_off..prev_off + in_dim]) {
                        pre += a * b;
                    }
                }
                ws.acts[layer * w + i] = math::tanh(pre);
            }
        }
        let h_off = self.head_w_offset();
        let last = (self.config.depth - 1) * w;
        let mut out = self.params[h_off + w];
        for i in 0..w {
            out += self.params[h_off + i] * ws.acts[last + i];
        }
        out
    }

    /// Accumulate `d loss / d params` into `grad` for a forward pass whose
    /// activations are still in `ws`. `dscore` is `d loss / d score`.
    pub(crate) fn backward(&self, features: &[f64], ws: &mut Workspace, dscore: f64, grad: &mut [f64]) {
        debug_assert_eq!(grad.len(), self.params.len());
        let w = self.config.width;
        let depth = self.config.depth;
        let h_off = self.head_w_offset();
        let last = (depth - 1) * w;
        for i in 0..w {
            grad[h_off + i] += dscore * ws.acts[last + i];
            // delta through the head, including tanh'.
            ws.delta[i] = dscore * self.params[h_off + i] * (1.0 - ws.acts[last + i] * ws.acts[last + i]);
        }
        grad[h_off + w] += dscore;

        for layer in (0..depth).rev() {
            let w_off = self.layer_w_offset(layer);
            let b_off = self.layer_b_offset(layer);
            let in_dim = if layer == 0 { self.config.feature_dim } else { w };
            let prev_off = if layer == 0 { 0 } else { (layer - 1) * w };
            for i in 0..w {
                let d = ws.delta[i];
                let row = w_off + i * in_dim;
                if layer == 0 {
                    for (j, &x) in features.iter().enumerate() {
                        grad[row + j] += d * x;
                    }
                } else {
                    for j in 0..in_dim {
                        grad[row + j] += d * ws.acts[prev_off + j];
                    }
                }
                grad[b_off + i] += d;
            }
            if layer > 0 {
                for j in 0..in_dim {
                    let mut acc = 0.0;
                    for i in 0..w {
                        acc += ws.delta[i] * self.params[w_off + i * in_dim + j];
                    }
                    let a = ws.acts[prev_off + j];
                    ws.delta_next[j] = acc * (1.0 - a * a);
                }
                core::mem::swap(&mut ws.delta, &mut ws.delta_next);
            }
        }
    }
}
