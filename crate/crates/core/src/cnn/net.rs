//! Layers, shape chaining and the forward/backward passes.
//!
//! Activations are channel-major (`[c, h, w]`) or flat (`[n]`). Convolutions
//! and pooling are valid (no padding). Weights are row-major:
//! conv `[filters, in_channels, k, k]`, dense `[units, inputs]`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Scalar, Tensor};
use crate::error::{Error, Result};

/// A layer descriptor without parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv { filters: usize, k: usize, stride: usize },
    Relu,
    Maxpool { k: usize },
    Flatten,
    Dense { units: usize },
    Softmax,
}

impl LayerSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            LayerSpec::Conv { .. } => "conv",
            LayerSpec::Relu => "relu",
            LayerSpec::Maxpool { .. } => "maxpool",
            LayerSpec::Flatten => "flatten",
            LayerSpec::Dense { .. } => "dense",
            LayerSpec::Softmax => "softmax",
        }
    }

    /// Output shape for `input`, or why the layer cannot follow it.
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        let bad = |why: String| Err(Error::Model(format!("{} layer: {why}", self.kind())));
        match *self {
            LayerSpec::Conv { filters, k, stride } => {
                let &[_, h, w] = input else {
                    return bad(format!("expects [c, h, w] input, got {input:?}"));
                };
                if filters == 0 || k == 0 || stride == 0 {
                    return bad("filters, k and stride must be positive".into());
                }
                if h < k || w < k {
                    return bad(format!("kernel {k} larger than input {h}x{w}"));
                }
                Ok(vec![filters, (h - k) / stride + 1, (w - k) / stride + 1])
            }
            LayerSpec::Maxpool { k } => {
                let &[c, h, w] = input else {
                    return bad(format!("expects [c, h, w] input, got {input:?}"));
                };
                if k == 0 || h < k || w < k {
                    return bad(format!("window {k} does not fit input {h}x{w}"));
                }
                Ok(vec![c, h / k, w / k])
            }
            LayerSpec::Flatten => Ok(vec![input.iter().product()]),
            LayerSpec::Dense { units } => {
                if input.len() != 1 {
                    return bad(format!("expects flat input, got {input:?}"));
                }
                if units == 0 {
                    return bad("units must be positive".into());
                }
                Ok(vec![units])
            }
            LayerSpec::Relu => Ok(input.to_vec()),
            LayerSpec::Softmax => {
                if input.len() != 1 {
                    return bad(format!("expects flat input, got {input:?}"));
                }
                Ok(input.to_vec())
            }
        }
    }

    /// (weight count, bias count) given the layer input shape.
    pub fn param_counts(&self, input: &[usize]) -> (usize, usize) {
        match *self {
            LayerSpec::Conv { filters, k, .. } => (filters * input[0] * k * k, filters),
            LayerSpec::Dense { units } => (units * input[0], units),
            _ => (0, 0),
        }
    }

    pub fn fan_in(&self, input: &[usize]) -> usize {
        match *self {
            LayerSpec::Conv { k, .. } => input[0] * k * k,
            LayerSpec::Dense { .. } => input[0],
            _ => 0,
        }
    }
}

/// The default classifier: two conv/pool stages and two dense layers.
pub fn default_architecture(n_classes: usize) -> Vec<LayerSpec> {
    vec![
        LayerSpec::Conv { filters: 8, k: 3, stride: 1 },
        LayerSpec::Relu,
        LayerSpec::Maxpool { k: 2 },
        LayerSpec::Conv { filters: 16, k: 3, stride: 1 },
        LayerSpec::Relu,
        LayerSpec::Maxpool { k: 2 },
        LayerSpec::Flatten,
        LayerSpec::Dense { units: 64 },
        LayerSpec::Relu,
        LayerSpec::Dense { units: n_classes },
        LayerSpec::Softmax,
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T> {
    pub spec: LayerSpec,
    pub input_shape: Vec<usize>,
    pub output_shape: Vec<usize>,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

/// Per-layer (weights, bias) gradients, mirroring the network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads<T> {
    pub layers: Vec<(Vec<T>, Vec<T>)>,
}

impl<T: Scalar> Grads<T> {
    pub fn scale(&mut self, f: T) {
        for (w, b) in &mut self.layers {
            w.iter_mut().chain(b.iter_mut()).for_each(|v| *v = *v * f);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    pub input_shape: Vec<usize>,
    pub layers: Vec<Layer<T>>,
}

/// What the backward pass needs from the forward pass.
struct Trace<T> {
    inputs: Vec<Vec<T>>,
    argmax: Vec<Vec<usize>>,
}

impl<T: Scalar> Network<T> {
    /// Chains shapes and allocates zeroed parameters.
    pub fn zeros(input_shape: &[usize], arch: &[LayerSpec]) -> Result<Self> {
        let mut shape = input_shape.to_vec();
        if shape.len() != 3 || shape.contains(&0) {
            return Err(Error::Model(format!("input shape must be [c, h, w], got {shape:?}")));
        }
        let mut layers = Vec::with_capacity(arch.len());
        for (i, spec) in arch.iter().enumerate() {
            if *spec == LayerSpec::Softmax && i + 1 != arch.len() {
                return Err(Error::Model("softmax must be the last layer".into()));
            }
            let out = spec.output_shape(&shape)?;
            let (nw, nb) = spec.param_counts(&shape);
            layers.push(Layer {
                spec: *spec,
                input_shape: shape.clone(),
                output_shape: out.clone(),
                weights: vec![T::zero(); nw],
                bias: vec![T::zero(); nb],
            });
            shape = out;
        }
        if shape.len() != 1 {
            return Err(Error::Model(format!("network must end flat, ends with {shape:?}")));
        }
        Ok(Network {
            input_shape: input_shape.to_vec(),
            layers,
        })
    }

    /// He-uniform weights, zero biases.
    pub fn init<R: Rng>(input_shape: &[usize], arch: &[LayerSpec], rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(input_shape, arch)?;
        for layer in &mut net.layers {
            let fan_in = layer.spec.fan_in(&layer.input_shape);
            if fan_in == 0 {
                continue;
            }
            let limit = (6.0 / fan_in as f64).sqrt();
            for w in &mut layer.weights {
                *w = T::from(rng.gen_range(-limit..limit)).unwrap();
            }
        }
        Ok(net)
    }

    pub fn output_len(&self) -> usize {
        self.layers.last().map_or(0, |l| l.output_shape[0])
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn zero_grads(&self) -> Grads<T> {
        Grads {
            layers: self
                .layers
                .iter()
                .map(|l| (vec![T::zero(); l.weights.len()], vec![T::zero(); l.bias.len()]))
                .collect(),
        }
    }

    fn check_input(&self, input: &Tensor<T>) -> Result<()> {
        if input.shape() != self.input_shape.as_slice() {
            return Err(Error::InvalidInput(format!(
                "input shape {:?} does not match model input {:?}",
                input.shape(),
                self.input_shape
            )));
        }
        Ok(())
    }

    fn ends_with_softmax(&self) -> bool {
        self.layers.last().is_some_and(|l| l.spec == LayerSpec::Softmax)
    }

    /// Output before a trailing softmax.
    pub fn logits(&self, input: &Tensor<T>) -> Result<Vec<T>> {
        self.check_input(input)?;
        let n = self.layers.len() - usize::from(self.ends_with_softmax());
        let mut x = input.data().to_vec();
        for layer in &self.layers[..n] {
            x = layer_forward(layer, &x, None);
        }
        ensure_finite(&x, "logits")?;
        Ok(x)
    }

    /// Full output, probabilities when the network ends with softmax.
    pub fn forward(&self, input: &Tensor<T>) -> Result<Vec<T>> {
        let z = self.logits(input)?;
        Ok(if self.ends_with_softmax() { softmax(&z) } else { z })
    }

    fn trace(&self, input: &[T], n: usize) -> (Vec<T>, Trace<T>) {
        let mut tr = Trace {
            inputs: Vec::with_capacity(n),
            argmax: Vec::with_capacity(n),
        };
        let mut x = input.to_vec();
        for layer in &self.layers[..n] {
            let mut am = Vec::new();
            let y = layer_forward(layer, &x, Some(&mut am));
            tr.inputs.push(std::mem::replace(&mut x, y));
            tr.argmax.push(am);
        }
        (x, tr)
    }

    /// Cross-entropy of one sample; adds its gradient into `grads`.
    /// Returns (loss, predicted index).
    pub fn accumulate(&self, input: &Tensor<T>, label: usize, grads: &mut Grads<T>) -> Result<(T, usize)> {
        self.check_input(input)?;
        if label >= self.output_len() {
            return Err(Error::InvalidInput(format!(
                "label {label} out of range for {} outputs",
                self.output_len()
            )));
        }
        let n = self.layers.len() - usize::from(self.ends_with_softmax());
        let (z, tr) = self.trace(input.data(), n);
        ensure_finite(&z, "logits")?;
        let p = softmax(&z);
        let loss = log_sum_exp(&z) - z[label];
        let pred = argmax(&p);
        let mut d: Vec<T> = p;
        d[label] = d[label] - T::one();
        for i in (0..n).rev() {
            let (gw, gb) = &mut grads.layers[i];
            d = layer_backward(&self.layers[i], &tr.inputs[i], &tr.argmax[i], &d, gw, gb, i > 0);
        }
        Ok((loss, pred))
    }

    /// Mean cross-entropy and mean gradients over a batch.
    pub fn loss_and_grad(&self, batch: &[(&Tensor<T>, usize)]) -> Result<(T, Grads<T>)> {
        if batch.is_empty() {
            return Err(Error::InvalidInput("empty batch".into()));
        }
        let mut grads = self.zero_grads();
        let mut total = T::zero();
        for &(x, y) in batch {
            total = total + self.accumulate(x, y, &mut grads)?.0;
        }
        let inv = T::one() / T::from(batch.len()).unwrap();
        grads.scale(inv);
        let loss = total * inv;
        if !loss.is_finite() {
            return Err(Error::NonFinite("loss"));
        }
        Ok((loss, grads))
    }

    /// ReLU masks and pooling winners for an input; two inputs or weight
    /// settings with equal signatures lie on the same linear piece.
    pub fn activation_signature(&self, input: &Tensor<T>) -> Vec<usize> {
        let (_, tr) = self.trace(input.data(), self.layers.len());
        let mut sig = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            match layer.spec {
                LayerSpec::Relu => sig.extend(tr.inputs[i].iter().map(|&v| usize::from(v > T::zero()))),
                LayerSpec::Maxpool { .. } => sig.extend(&tr.argmax[i]),
                _ => {}
            }
        }
        sig
    }
}

pub(crate) fn ensure_finite<T: Scalar>(v: &[T], what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub fn argmax<T: Scalar>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn log_sum_exp<T: Scalar>(z: &[T]) -> T {
    let m = z.iter().copied().fold(T::neg_infinity(), T::max);
    let s = z.iter().fold(T::zero(), |acc, &v| acc + (v - m).exp());
    m + s.ln()
}

pub fn softmax<T: Scalar>(z: &[T]) -> Vec<T> {
    let m = z.iter().copied().fold(T::neg_infinity(), T::max);
    let e: Vec<T> = z.iter().map(|&v| (v - m).exp()).collect();
    let s = e.iter().fold(T::zero(), |acc, &v| acc + v);
    e.into_iter().map(|v| v / s).collect()
}

fn layer_forward<T: Scalar>(layer: &Layer<T>, x: &[T], argmax_out: Option<&mut Vec<usize>>) -> Vec<T> {
    match layer.spec {
        LayerSpec::Conv { filters, k, stride } => {
            let (c, h, w) = (layer.input_shape[0], layer.input_shape[1], layer.input_shape[2]);
            let (oh, ow) = (layer.output_shape[1], layer.output_shape[2]);
            let mut out = vec![T::zero(); filters * oh * ow];
            for f in 0..filters {
                let of = &mut out[f * oh * ow..(f + 1) * oh * ow];
                of.iter_mut().for_each(|v| *v = layer.bias[f]);
                for ci in 0..c {
                    let plane = &x[ci * h * w..(ci + 1) * h * w];
                    for ky in 0..k {
                        for kx in 0..k {
                            let wv = layer.weights[((f * c + ci) * k + ky) * k + kx];
                            for oy in 0..oh {
                                let row = &plane[(oy * stride + ky) * w + kx..];
                                let orow = &mut of[oy * ow..(oy + 1) * ow];
                                if stride == 1 {
                                    for (o, &i) in orow.iter_mut().zip(row) {
                                        *o = *o + wv * i;
                                    }
                                } else {
                                    for (ox, o) in orow.iter_mut().enumerate() {
                                        *o = *o + wv * row[ox * stride];
                                    }
                                }
                            }
                        }
                    }
                }
            }
            out
        }
        LayerSpec::Relu => x.iter().map(|&v| if v > T::zero() { v } else { T::zero() }).collect(),
        LayerSpec::Maxpool { k } => {
            let (c, h, w) = (layer.input_shape[0], layer.input_shape[1], layer.input_shape[2]);
            let (oh, ow) = (h / k, w / k);
            let mut out = Vec::with_capacity(c * oh * ow);
            let mut am = Vec::with_capacity(if argmax_out.is_some() { c * oh * ow } else { 0 });
            for ci in 0..c {
                for oy in 0..oh {
                    for ox in 0..ow {
                        let mut bi = ci * h * w + oy * k * w + ox * k;
                        for dy in 0..k {
                            for dx in 0..k {
                                let i = ci * h * w + (oy * k + dy) * w + ox * k + dx;
                                if x[i] > x[bi] {
                                    bi = i;
                                }
                            }
                        }
                        out.push(x[bi]);
                        if argmax_out.is_some() {
                            am.push(bi);
                        }
                    }
                }
            }
            if let Some(a) = argmax_out {
                *a = am;
            }
            out
        }
        LayerSpec::Flatten => x.to_vec(),
        LayerSpec::Dense { units } => {
            let n = layer.input_shape[0];
            (0..units)
                .map(|u| {
                    let row = &layer.weights[u * n..(u + 1) * n];
                    row.iter().zip(x).fold(layer.bias[u], |acc, (&wv, &xv)| acc + wv * xv)
                })
                .collect()
        }
        LayerSpec::Softmax => softmax(x),
    }
}

/// Gradient with respect to the layer input; parameter gradients are added
/// into `gw`/`gb`. With `need_input` false the returned vector is empty.
fn layer_backward<T: Scalar>(
    layer: &Layer<T>,
    x: &[T],
    argmax: &[usize],
    d: &[T],
    gw: &mut [T],
    gb: &mut [T],
    need_input: bool,
) -> Vec<T> {
    match layer.spec {
        LayerSpec::Conv { filters, k, stride } => {
            let (c, h, w) = (layer.input_shape[0], layer.input_shape[1], layer.input_shape[2]);
            let (oh, ow) = (layer.output_shape[1], layer.output_shape[2]);
            let mut dx = if need_input { vec![T::zero(); x.len()] } else { Vec::new() };
            for f in 0..filters {
                let df = &d[f * oh * ow..(f + 1) * oh * ow];
                gb[f] = df.iter().fold(gb[f], |acc, &v| acc + v);
                for ci in 0..c {
                    let plane = &x[ci * h * w..(ci + 1) * h * w];
                    for ky in 0..k {
                        for kx in 0..k {
                            let wi = ((f * c + ci) * k + ky) * k + kx;
                            let wv = layer.weights[wi];
                            let mut acc = T::zero();
                            for oy in 0..oh {
                                let base = (oy * stride + ky) * w + kx;
                                let drow = &df[oy * ow..(oy + 1) * ow];
                                for (ox, &dv) in drow.iter().enumerate() {
                                    acc = acc + dv * plane[base + ox * stride];
                                }
                                if need_input {
                                    let dplane = &mut dx[ci * h * w..(ci + 1) * h * w];
                                    for (ox, &dv) in drow.iter().enumerate() {
                                        let j = base + ox * stride;
                                        dplane[j] = dplane[j] + wv * dv;
                                    }
                                }
                            }
                            gw[wi] = gw[wi] + acc;
                        }
                    }
                }
            }
            dx
        }
        LayerSpec::Relu => x
            .iter()
            .zip(d)
            .map(|(&xv, &dv)| if xv > T::zero() { dv } else { T::zero() })
            .collect(),
        LayerSpec::Maxpool { .. } => {
            let mut dx = vec![T::zero(); x.len()];
            for (&i, &dv) in argmax.iter().zip(d) {
                dx[i] = dx[i] + dv;
            }
            dx
        }
        LayerSpec::Flatten => d.to_vec(),
        LayerSpec::Dense { units } => {
            let n = layer.input_shape[0];
            let mut dx = if need_input { vec![T::zero(); n] } else { Vec::new() };
            for u in 0..units {
                let du = d[u];
                gb[u] = gb[u] + du;
                let row = &layer.weights[u * n..(u + 1) * n];
                let grow = &mut gw[u * n..(u + 1) * n];
                for (g, &xv) in grow.iter_mut().zip(x) {
                    *g = *g + du * xv;
                }
                if need_input {
                    for (o, &wv) in dx.iter_mut().zip(row) {
                        *o = *o + wv * du;
                    }
                }
            }
            dx
        }
        // A trailing softmax is folded into the loss and never reached here.
        LayerSpec::Softmax => unreachable!("softmax backward is fused with cross-entropy"),
    }
}
