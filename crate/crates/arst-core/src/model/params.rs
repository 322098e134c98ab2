//! Trainable parameters of the encoder–decoder.

use crate::error::{ArstError, Result};
use crate::model::ModelConfig;
use crate::numerics::{Matrix, Parameter, Parameterized, Scalar, SeededRng};

/// Weight and bias of one linear map `x · weight + bias`.
///
/// `weight` is stored `in x out`; `bias` is a `1 x out` row.
#[derive(Debug, Clone)]
pub struct LinearParams<T> {
    pub weight: Parameter<T>,
    pub bias: Parameter<T>,
}

impl<T: Scalar> LinearParams<T> {
    /// Glorot-uniform weight, zero bias. Draw order is row-major.
    fn init(name: &str, d_in: usize, d_out: usize, rng: &mut SeededRng) -> Self {
        let limit = (6.0 / (d_in + d_out) as f64).sqrt();
        let data = (0..d_in * d_out)
            .map(|_| T::from_f64(rng.uniform(-limit, limit)))
            .collect();
        let weight = Matrix::from_vec(d_in, d_out, data).expect("sized by construction");
        LinearParams {
            weight: Parameter::new(format!("{name}.weight"), weight),
            bias: Parameter::new(format!("{name}.bias"), Matrix::zeros(1, d_out)),
        }
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a Parameter<T>>) {
        out.push(&self.weight);
        out.push(&self.bias);
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut Parameter<T>>) {
        out.push(&mut self.weight);
        out.push(&mut self.bias);
    }
}

/// Projections of one multi-head attention sublayer.
#[derive(Debug, Clone)]
pub struct AttentionParams<T> {
    pub query: LinearParams<T>,
    pub key: LinearParams<T>,
    pub value: LinearParams<T>,
    pub output: LinearParams<T>,
}

impl<T: Scalar> AttentionParams<T> {
    fn init(name: &str, d: usize, rng: &mut SeededRng) -> Self {
        AttentionParams {
            query: LinearParams::init(&format!("{name}.query"), d, d, rng),
            key: LinearParams::init(&format!("{name}.key"), d, d, rng),
            value: LinearParams::init(&format!("{name}.value"), d, d, rng),
            output: LinearParams::init(&format!("{name}.output"), d, d, rng),
        }
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a Parameter<T>>) {
        self.query.collect(out);
        self.key.collect(out);
        self.value.collect(out);
        self.output.collect(out);
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut Parameter<T>>) {
        self.query.collect_mut(out);
        self.key.collect_mut(out);
        self.value.collect_mut(out);
        self.output.collect_mut(out);
    }
}

/// Gain and bias of one layer norm, each a `1 x d_model` row.
#[derive(Debug, Clone)]
pub struct LayerNormParams<T> {
    pub gain: Parameter<T>,
    pub bias: Parameter<T>,
}

impl<T: Scalar> LayerNormParams<T> {
    fn init(name: &str, d: usize) -> Self {
        let ones = Matrix::from_vec(1, d, vec![T::one(); d]).expect("sized by construction");
        LayerNormParams {
            gain: Parameter::new(format!("{name}.gain"), ones),
            bias: Parameter::new(format!("{name}.bias"), Matrix::zeros(1, d)),
        }
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a Parameter<T>>) {
        out.push(&self.gain);
        out.push(&self.bias);
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut Parameter<T>>) {
        out.push(&mut self.gain);
        out.push(&mut self.bias);
    }
}

/// Two-layer position-wise feed-forward block with ReLU in between.
#[derive(Debug, Clone)]
pub struct FeedForwardParams<T> {
    pub hidden: LinearParams<T>,
    pub output: LinearParams<T>,
}

impl<T: Scalar> FeedForwardParams<T> {
    fn init(name: &str, d: usize, f: usize, rng: &mut SeededRng) -> Self {
        FeedForwardParams {
            hidden: LinearParams::init(&format!("{name}.hidden"), d, f, rng),
            output: LinearParams::init(&format!("{name}.output"), f, d, rng),
        }
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a Parameter<T>>) {
        self.hidden.collect(out);
        self.output.collect(out);
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut Parameter<T>>) {
        self.hidden.collect_mut(out);
        self.output.collect_mut(out);
    }
}

/// Encoder layer: banded self-attention and a feed-forward block, each
/// followed by a residual layer norm.
#[derive(Debug, Clone)]
pub struct EncoderParams<T> {
    pub self_attn: AttentionParams<T>,
    pub norm1: LayerNormParams<T>,
    pub ffn: FeedForwardParams<T>,
    pub norm2: LayerNormParams<T>,
}

/// Decoder layer: banded self-attention, banded cross-attention over the
/// encoder outputs, and a feed-forward block, each followed by a residual
/// layer norm.
#[derive(Debug, Clone)]
pub struct DecoderParams<T> {
    pub self_attn: AttentionParams<T>,
    pub norm1: LayerNormParams<T>,
    pub cross_attn: AttentionParams<T>,
    pub norm2: LayerNormParams<T>,
    pub ffn: FeedForwardParams<T>,
    pub norm3: LayerNormParams<T>,
}

/// All trainable tensors of the model.
///
/// Tensor enumeration order (input projection, encoder, decoder,
/// classifier head, with each block's tensors in declaration order) is
/// stable: checkpoints, optimizer state, and gradient checks all index
/// parameters by this order.
#[derive(Debug, Clone)]
pub struct ModelParams<T> {
    pub input_proj: LinearParams<T>,
    pub encoder: EncoderParams<T>,
    pub decoder: DecoderParams<T>,
    pub head: LinearParams<T>,
}

impl<T: Scalar> ModelParams<T> {
    /// Initializes all tensors: Glorot-uniform weights drawn from `rng`
    /// in enumeration order, zero biases, unit layer-norm gains.
    pub fn init(cfg: &ModelConfig, rng: &mut SeededRng) -> Result<Self> {
        cfg.validate()?;
        let d = cfg.d_model;
        let f = cfg.d_ffn();
        let params = ModelParams {
            input_proj: LinearParams::init("input_proj", cfg.d_feat, d, rng),
            encoder: EncoderParams {
                self_attn: AttentionParams::init("encoder.self_attn", d, rng),
                norm1: LayerNormParams::init("encoder.norm1", d),
                ffn: FeedForwardParams::init("encoder.ffn", d, f, rng),
                norm2: LayerNormParams::init("encoder.norm2", d),
            },
            decoder: DecoderParams {
                self_attn: AttentionParams::init("decoder.self_attn", d, rng),
                norm1: LayerNormParams::init("decoder.norm1", d),
                cross_attn: AttentionParams::init("decoder.cross_attn", d, rng),
                norm2: LayerNormParams::init("decoder.norm2", d),
                ffn: FeedForwardParams::init("decoder.ffn", d, f, rng),
                norm3: LayerNormParams::init("decoder.norm3", d),
            },
            head: LinearParams::init("head", d, cfg.classes, rng),
        };
        Ok(params)
    }

    /// Zeroes every parameter's gradient.
    pub fn zero_grads(&mut self) {
        for p in self.parameters_mut() {
            p.zero_grad();
        }
    }

    /// Checks that tensor shapes are consistent with `cfg`.
    pub fn validate_shapes(&self, cfg: &ModelConfig) -> Result<()> {
        let d = cfg.d_model;
        let checks = [
            (&self.input_proj.weight, (cfg.d_feat, d)),
            (&self.head.weight, (d, cfg.classes)),
            (&self.encoder.ffn.hidden.weight, (d, cfg.d_ffn())),
            (&self.decoder.cross_attn.query.weight, (d, d)),
        ];
        for (param, expect) in checks {
            if param.value.shape() != expect {
                return Err(ArstError::Shape {
                    op: "validate_shapes",
                    lhs: format!("{} is {}x{}", param.name, param.value.rows(), param.value.cols()),
                    rhs: format!("{}x{}", expect.0, expect.1),
                });
            }
        }
        if self.parameter_count() != cfg.expected_parameter_count() {
            return Err(ArstError::Invariant(format!(
                "parameter count {} does not match configuration ({} expected)",
                self.parameter_count(),
                cfg.expected_parameter_count()
            )));
        }
        Ok(())
    }

    /// Casts every tensor to another precision (gradients reset to zero).
    pub fn cast<U: Scalar>(&self) -> ModelParams<U> {
        let lin = |l: &LinearParams<T>| LinearParams {
            weight: Parameter::new(l.weight.name.clone(), l.weight.value.cast::<U>()),
            bias: Parameter::new(l.bias.name.clone(), l.bias.value.cast::<U>()),
        };
        let attn = |a: &AttentionParams<T>| AttentionParams {
            query: lin(&a.query),
            key: lin(&a.key),
            value: lin(&a.value),
            output: lin(&a.output),
        };
        let ln = |n: &LayerNormParams<T>| LayerNormParams {
            gain: Parameter::new(n.gain.name.clone(), n.gain.value.cast::<U>()),
            bias: Parameter::new(n.bias.name.clone(), n.bias.value.cast::<U>()),
        };
        let ffn = |f: &FeedForwardParams<T>| FeedForwardParams {
            hidden: lin(&f.hidden),
            output: lin(&f.output),
        };
        ModelParams {
            input_proj: lin(&self.input_proj),
            encoder: EncoderParams {
                self_attn: attn(&self.encoder.self_attn),
                norm1: ln(&self.encoder.norm1),
                ffn: ffn(&self.encoder.ffn),
                norm2: ln(&self.encoder.norm2),
            },
            decoder: DecoderParams {
                self_attn: attn(&self.decoder.self_attn),
                norm1: ln(&self.decoder.norm1),
                cross_attn: attn(&self.decoder.cross_attn),
                norm2: ln(&self.decoder.norm2),
                ffn: ffn(&self.decoder.ffn),
                norm3: ln(&self.decoder.norm3),
            },
            head: lin(&self.head),
        }
    }
}

impl<T: Scalar> Parameterized<T> for ModelParams<T> {
    fn parameters(&self) -> Vec<&Parameter<T>> {
        let mut out = Vec::with_capacity(46);
        self.input_proj.collect(&mut out);
        self.encoder.self_attn.collect(&mut out);
        self.encoder.norm1.collect(&mut out);
        self.encoder.ffn.collect(&mut out);
        self.encoder.norm2.collect(&mut out);
        self.decoder.self_attn.collect(&mut out);
        self.decoder.norm1.collect(&mut out);
        self.decoder.cross_attn.collect(&mut out);
        self.decoder.norm2.collect(&mut out);
        self.decoder.ffn.collect(&mut out);
        self.decoder.norm3.collect(&mut out);
        self.head.collect(&mut out);
        out
    }

    fn parameters_mut(&mut self) -> Vec<&mut Parameter<T>> {
        let mut out = Vec::with_capacity(46);
        self.input_proj.collect_mut(&mut out);
        self.encoder.self_attn.collect_mut(&mut out);
        self.encoder.norm1.collect_mut(&mut out);
        self.encoder.ffn.collect_mut(&mut out);
        self.encoder.norm2.collect_mut(&mut out);
        self.decoder.self_attn.collect_mut(&mut out);
        self.decoder.norm1.collect_mut(&mut out);
        self.decoder.cross_attn.collect_mut(&mut out);
        self.decoder.norm2.collect_mut(&mut out);
        self.decoder.ffn.collect_mut(&mut out);
        self.decoder.norm3.collect_mut(&mut out);
        self.head.collect_mut(&mut out);
        out
    }
}
