use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Seed};
use crate::error::{invalid, LabError, Result};
use crate::learners::Classifier;

/// Dense layer, weights stored `out x in` row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { inputs, outputs, w: vec![0.0; inputs * outputs], b: vec![0.0; outputs] }
    }
}

/// Fully connected ReLU network producing raw logits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    widths: Vec<usize>,
    layers: Vec<Layer>,
    /// Fixed input standardization `(x - shift) * scale`; empty means identity.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    shift: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    scale: Vec<f64>,
}

/// Parameter gradients, shaped like the network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn flat(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.w.iter().chain(&l.b).copied()).collect()
    }
}

/// `c (m x n) = alpha * a (m x k) * b (k x n) + beta * c`, strides in elements.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
) {
    debug_assert!(c.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    // SAFETY: slice lengths cover every strided access for the given shapes;
    // each caller passes contiguous row-major buffers of exactly those sizes.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Activations of one batch forward pass: `acts[0]` is the input, the last
/// entry the logits, everything in between post-ReLU.
pub(crate) struct Cache {
    pub n: usize,
    pub acts: Vec<Vec<f64>>,
}

impl Cache {
    pub fn logits(&self) -> &[f64] {
        self.acts.last().expect("non-empty cache")
    }
}

/// Mean-free softmax cross-entropy of one row; writes `softmax - onehot`
/// into `dlogits` scaled by `scale`.
pub(crate) fn xent_row(logits: &[f64], y: usize, scale: f64, dlogits: &mut [f64]) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (d, &z) in dlogits.iter_mut().zip(logits) {
        *d = (z - max).exp();
        sum += *d;
    }
    for d in dlogits.iter_mut() {
        *d = *d / sum * scale;
    }
    dlogits[y] -= scale;
    sum.ln() + max - logits[y]
}

pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

impl Mlp {
    /// Glorot-uniform weights, zero biases.
    pub fn new(widths: &[usize], seed: Seed) -> Result<Self> {
        let mut net = Self::zeros(widths)?;
        let mut rng = seed.rng();
        for l in &mut net.layers {
            let a = (6.0 / (l.inputs + l.outputs) as f64).sqrt();
            for w in &mut l.w {
                *w = rng.random_range(-a..=a);
            }
        }
        Ok(net)
    }

    pub fn zeros(widths: &[usize]) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(invalid("network needs at least input and output widths, all positive"));
        }
        let layers = widths.windows(2).map(|p| Layer::zeros(p[0], p[1])).collect();
        Ok(Self { widths: widths.to_vec(), layers, shift: Vec::new(), scale: Vec::new() })
    }

    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        let first = layers.first().ok_or_else(|| invalid("network needs a layer"))?;
        let mut widths = vec![first.inputs];
        for l in &layers {
            if l.inputs != *widths.last().unwrap() {
                return Err(LabError::DimensionMismatch { expected: *widths.last().unwrap(), got: l.inputs });
            }
            if l.w.len() != l.inputs * l.outputs || l.b.len() != l.outputs {
                return Err(invalid("layer buffers do not match its shape"));
            }
            if l.w.iter().chain(&l.b).any(|v| !v.is_finite()) {
                return Err(invalid("non-finite parameter"));
            }
            widths.push(l.outputs);
        }
        Ok(Self { widths, layers, shift: Vec::new(), scale: Vec::new() })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn num_classes(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn params_flat(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.w.iter().chain(&l.b).copied()).collect()
    }

    pub fn set_params_flat(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.num_params() {
            return Err(LabError::DimensionMismatch { expected: self.num_params(), got: p.len() });
        }
        let mut it = p.iter().copied();
        for l in &mut self.layers {
            for v in l.w.iter_mut().chain(l.b.iter_mut()) {
                *v = it.next().unwrap();
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: Mlp = serde_json::from_str(s)?;
        let mut net = Self::from_layers(raw.layers)?;
        if net.widths != raw.widths {
            return Err(LabError::Format("stored widths disagree with layer shapes".into()));
        }
        if !raw.shift.is_empty() || !raw.scale.is_empty() {
            net.set_input_standardization(raw.shift, raw.scale)?;
        }
        Ok(net)
    }

    /// Inputs are mapped through `(x - shift) * scale` before the first layer.
    pub fn set_input_standardization(&mut self, shift: Vec<f64>, scale: Vec<f64>) -> Result<()> {
        let d = self.input_dim();
        if shift.len() != d || scale.len() != d {
            return Err(LabError::DimensionMismatch { expected: d, got: shift.len().min(scale.len()) });
        }
        if shift.iter().chain(&scale).any(|v| !v.is_finite()) || scale.iter().any(|&s| s <= 0.0) {
            return Err(invalid("standardization needs finite shifts and positive scales"));
        }
        self.shift = shift;
        self.scale = scale;
        Ok(())
    }

    pub fn input_standardization(&self) -> Option<(&[f64], &[f64])> {
        (!self.shift.is_empty()).then_some((&self.shift[..], &self.scale[..]))
    }

    pub(crate) fn forward_cache(&self, xs: &[f64], n: usize) -> Cache {
        debug_assert_eq!(xs.len(), n * self.input_dim());
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        if self.shift.is_empty() {
            acts.push(xs.to_vec());
        } else {
            let d = self.input_dim();
            acts.push(xs.iter().enumerate().map(|(i, &x)| (x - self.shift[i % d]) * self.scale[i % d]).collect());
        }
        let last = self.layers.len() - 1;
        for (li, l) in self.layers.iter().enumerate() {
            let mut z = Vec::with_capacity(n * l.outputs);
            for _ in 0..n {
                z.extend_from_slice(&l.b);
            }
            gemm(n, l.inputs, l.outputs, acts.last().unwrap(), (l.inputs, 1), &l.w, (1, l.inputs), 1.0, &mut z);
            if li != last {
                for v in &mut z {
                    *v = v.max(0.0);
                }
            }
            acts.push(z);
        }
        Cache { n, acts }
    }

    /// Back-propagates `dlogits`; fills parameter gradients when given and
    /// returns the input gradient when asked.
    pub(crate) fn backward(
        &self,
        cache: &Cache,
        dlogits: Vec<f64>,
        mut grads: Option<&mut Gradients>,
        want_input: bool,
    ) -> Option<Vec<f64>> {
        let n = cache.n;
        let mut delta = dlogits;
        for li in (0..self.layers.len()).rev() {
            let l = &self.layers[li];
            let a_in = &cache.acts[li];
            if let Some(g) = grads.as_deref_mut() {
                let gl = &mut g.layers[li];
                // dW = delta^T a_in
                gemm(l.outputs, n, l.inputs, &delta, (1, l.outputs), a_in, (l.inputs, 1), 1.0, &mut gl.w);
                for row in delta.chunks_exact(l.outputs) {
                    for (gb, d) in gl.b.iter_mut().zip(row) {
                        *gb += d;
                    }
                }
            }
            if li == 0 && !want_input {
                return None;
            }
            let mut prev = vec![0.0; n * l.inputs];
            gemm(n, l.outputs, l.inputs, &delta, (l.outputs, 1), &l.w, (l.inputs, 1), 0.0, &mut prev);
            if li > 0 {
                for (d, &a) in prev.iter_mut().zip(a_in) {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            delta = prev;
        }
        if !self.scale.is_empty() {
            let d = self.input_dim();
            for (i, v) in delta.iter_mut().enumerate() {
                *v *= self.scale[i % d];
            }
        }
        Some(delta)
    }

    pub fn zero_grads(&self) -> Gradients {
        Gradients { layers: self.layers.iter().map(|l| Layer::zeros(l.inputs, l.outputs)).collect() }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(LabError::DimensionMismatch { expected: self.input_dim(), got: x.len() });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.forward_cache(x, 1).acts.pop().unwrap())
    }

    /// Logits for `n` row-major inputs.
    pub fn forward_batch(&self, xs: &[f64]) -> Result<Vec<f64>> {
        let d = self.input_dim();
        if xs.len() % d != 0 {
            return Err(LabError::DimensionMismatch { expected: d, got: xs.len() % d });
        }
        Ok(self.forward_cache(xs, xs.len() / d).acts.pop().unwrap())
    }

    pub fn predict_batch(&self, xs: &[f64]) -> Result<Vec<usize>> {
        let logits = self.forward_batch(xs)?;
        Ok(logits.chunks_exact(self.num_classes()).map(argmax).collect())
    }

    fn check_labels(&self, ys: &[usize]) -> Result<()> {
        if let Some(&y) = ys.iter().find(|&&y| y >= self.num_classes()) {
            return Err(invalid(format!("label {y} outside the {} output classes", self.num_classes())));
        }
        Ok(())
    }

    /// Mean cross-entropy over the batch and its exact parameter gradient.
    pub fn loss_and_grad(&self, xs: &[f64], ys: &[usize]) -> Result<(f64, Gradients)> {
        self.check_batch(xs, ys)?;
        let cache = self.forward_cache(xs, ys.len());
        let (loss, dlogits) = batch_xent(cache.logits(), ys, self.num_classes(), 1.0 / ys.len() as f64);
        let mut g = self.zero_grads();
        self.backward(&cache, dlogits, Some(&mut g), false);
        Ok((loss, g))
    }

    pub fn loss(&self, xs: &[f64], ys: &[usize]) -> Result<f64> {
        self.check_batch(xs, ys)?;
        let cache = self.forward_cache(xs, ys.len());
        Ok(batch_xent(cache.logits(), ys, self.num_classes(), 1.0 / ys.len() as f64).0)
    }

    /// Gradient of the single-sample loss with respect to the input.
    pub fn input_grad(&self, x: &[f64], y: usize) -> Result<Vec<f64>> {
        self.check_input(x)?;
        self.check_labels(&[y])?;
        Ok(self.loss_input_grad_batch(x, &[y]).1)
    }

    fn check_batch(&self, xs: &[f64], ys: &[usize]) -> Result<()> {
        if ys.is_empty() {
            return Err(invalid("empty batch"));
        }
        if xs.len() != ys.len() * self.input_dim() {
            return Err(LabError::DimensionMismatch { expected: ys.len() * self.input_dim(), got: xs.len() });
        }
        self.check_labels(ys)
    }

    pub fn error_rate(&self, ds: &Dataset) -> Result<f64> {
        if ds.is_empty() {
            return Err(invalid("empty dataset"));
        }
        let view = ds.view();
        Ok(count_errors(self, view.iter().map(|(x, y)| (x, y)), ds.dim()) as f64 / ds.len() as f64)
    }
}

/// Softmax cross-entropy over a batch: `(mean loss, scaled dlogits)`.
pub(crate) fn batch_xent(logits: &[f64], ys: &[usize], c: usize, scale: f64) -> (f64, Vec<f64>) {
    let mut d = vec![0.0; logits.len()];
    let mut total = 0.0;
    for ((row, dr), &y) in logits.chunks_exact(c).zip(d.chunks_exact_mut(c)).zip(ys) {
        total += xent_row(row, y, scale, dr);
    }
    (total / ys.len() as f64, d)
}

pub(crate) fn count_errors<'a, N: Differentiable + ?Sized>(
    net: &N,
    samples: impl Iterator<Item = (&'a [f64], usize)>,
    dim: usize,
) -> usize {
    const CHUNK: usize = 1024;
    let mut xs = Vec::with_capacity(CHUNK * dim);
    let mut ys = Vec::with_capacity(CHUNK);
    let mut wrong = 0;
    let mut flush = |xs: &mut Vec<f64>, ys: &mut Vec<usize>| {
        if !ys.is_empty() {
            let logits = net.logits_batch(xs);
            let c = net.output_dim();
            wrong += logits.chunks_exact(c).zip(ys.iter()).filter(|(r, &y)| argmax(r) != y).count();
            xs.clear();
            ys.clear();
        }
    };
    for (x, y) in samples {
        xs.extend_from_slice(x);
        ys.push(y);
        if ys.len() == CHUNK {
            flush(&mut xs, &mut ys);
        }
    }
    flush(&mut xs, &mut ys);
    wrong
}

impl Classifier for Mlp {
    fn input_dim(&self) -> usize {
        self.widths[0]
    }

    fn label_of(&self, x: &[f64]) -> usize {
        argmax(self.forward_cache(x, 1).logits())
    }

    fn label_batch(&self, xs: &[f64]) -> Vec<usize> {
        self.logits_batch(xs).chunks_exact(self.num_classes()).map(argmax).collect()
    }
}

/// Models the attack can differentiate through: batched logits and per-sample
/// input gradients of the cross-entropy at the given labels.
pub trait Differentiable: Classifier {
    fn output_dim(&self) -> usize;

    /// Row-major logits for row-major inputs.
    fn logits_batch(&self, xs: &[f64]) -> Vec<f64>;

    /// Per-sample losses, row-major input gradients and logits.
    fn loss_input_grad_full(&self, xs: &[f64], ys: &[usize]) -> (Vec<f64>, Vec<f64>, Vec<f64>);

    fn loss_input_grad_batch(&self, xs: &[f64], ys: &[usize]) -> (Vec<f64>, Vec<f64>) {
        let (l, g, _) = self.loss_input_grad_full(xs, ys);
        (l, g)
    }
}

impl Differentiable for Mlp {
    fn output_dim(&self) -> usize {
        self.num_classes()
    }

    fn logits_batch(&self, xs: &[f64]) -> Vec<f64> {
        self.forward_cache(xs, xs.len() / self.input_dim()).acts.pop().unwrap()
    }

    fn loss_input_grad_full(&self, xs: &[f64], ys: &[usize]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let c = self.num_classes();
        let cache = self.forward_cache(xs, ys.len());
        let logits = cache.logits().to_vec();
        let mut d = vec![0.0; logits.len()];
        let losses = logits
            .chunks_exact(c)
            .zip(d.chunks_exact_mut(c))
            .zip(ys)
            .map(|((row, dr), &y)| xent_row(row, y, 1.0, dr))
            .collect();
        let g = self.backward(&cache, d, None, true).unwrap();
        (losses, g, logits)
    }
}

impl<T: Differentiable + ?Sized> Differentiable for &T {
    fn output_dim(&self) -> usize {
        (**self).output_dim()
    }

    fn logits_batch(&self, xs: &[f64]) -> Vec<f64> {
        (**self).logits_batch(xs)
    }

    fn loss_input_grad_full(&self, xs: &[f64], ys: &[usize]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        (**self).loss_input_grad_full(xs, ys)
    }
}

/// Fine class -> coarse class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoarseMap {
    assign: Vec<usize>,
    num_coarse: usize,
}

impl CoarseMap {
    /// Every coarse id in `0..max+1` must receive at least one fine class.
    pub fn new(assign: Vec<usize>) -> Result<Self> {
        let num_coarse = assign.iter().max().map(|m| m + 1).ok_or_else(|| invalid("empty class map"))?;
        let mut hit = vec![false; num_coarse];
        for &c in &assign {
            hit[c] = true;
        }
        if let Some(c) = hit.iter().position(|h| !h) {
            return Err(invalid(format!("coarse class {c} has no fine classes")));
        }
        Ok(Self { assign, num_coarse })
    }

    pub fn identity(n: usize) -> Self {
        Self { assign: (0..n).collect(), num_coarse: n }
    }

    pub fn num_fine(&self) -> usize {
        self.assign.len()
    }

    pub fn num_coarse(&self) -> usize {
        self.num_coarse
    }

    pub fn coarse_of(&self, fine: usize) -> usize {
        self.assign[fine]
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assign
    }
}

/// Sum of the fine logits assigned to each coarse class.
pub fn aggregate_fine_to_coarse(logits: &[f64], map: &CoarseMap) -> Result<Vec<f64>> {
    if logits.len() != map.num_fine() {
        return Err(invalid(format!(
            "class map covers {} fine classes but got {} logits",
            map.num_fine(),
            logits.len()
        )));
    }
    let mut out = vec![0.0; map.num_coarse];
    for (i, &z) in logits.iter().enumerate() {
        out[map.assign[i]] += z;
    }
    Ok(out)
}

/// How fine logits become coarse logits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// Coarse logit = sum of its fine logits.
    #[default]
    SumLogits,
    /// Coarse logit = largest of its fine logits, so the coarse prediction
    /// is the coarse class of the fine argmax.
    MaxLogit,
}

/// A fine-label network evaluated through aggregated coarse logits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseNet {
    pub net: Mlp,
    pub map: CoarseMap,
    #[serde(default)]
    pub aggregation: Aggregation,
}

impl CoarseNet {
    pub fn new(net: Mlp, map: CoarseMap) -> Result<Self> {
        Self::with_aggregation(net, map, Aggregation::SumLogits)
    }

    pub fn with_aggregation(net: Mlp, map: CoarseMap, aggregation: Aggregation) -> Result<Self> {
        if net.num_classes() != map.num_fine() {
            return Err(LabError::DimensionMismatch { expected: map.num_fine(), got: net.num_classes() });
        }
        Ok(Self { net, map, aggregation })
    }

    /// Coarse rows plus, per coarse entry, the fine index that produced it
    /// (only meaningful for `MaxLogit`).
    fn coarse_rows_with_source(&self, fine: &[f64]) -> (Vec<f64>, Vec<usize>) {
        let (f, c) = (self.map.num_fine(), self.map.num_coarse);
        let rows = fine.len() / f;
        let init = match self.aggregation {
            Aggregation::SumLogits => 0.0,
            Aggregation::MaxLogit => f64::NEG_INFINITY,
        };
        let mut out = vec![init; rows * c];
        let mut src = vec![0; rows * c];
        for r in 0..rows {
            for (i, &z) in fine[r * f..(r + 1) * f].iter().enumerate() {
                let k = r * c + self.map.assign[i];
                match self.aggregation {
                    Aggregation::SumLogits => out[k] += z,
                    Aggregation::MaxLogit => {
                        if z > out[k] {
                            out[k] = z;
                            src[k] = i;
                        }
                    }
                }
            }
        }
        (out, src)
    }

    fn coarse_rows(&self, fine: &[f64]) -> Vec<f64> {
        self.coarse_rows_with_source(fine).0
    }
}

impl Classifier for CoarseNet {
    fn input_dim(&self) -> usize {
        self.net.input_dim()
    }

    fn label_of(&self, x: &[f64]) -> usize {
        argmax(&self.coarse_rows(self.net.forward_cache(x, 1).logits()))
    }

    fn label_batch(&self, xs: &[f64]) -> Vec<usize> {
        self.logits_batch(xs).chunks_exact(self.map.num_coarse).map(argmax).collect()
    }
}

impl Differentiable for CoarseNet {
    fn output_dim(&self) -> usize {
        self.map.num_coarse
    }

    fn logits_batch(&self, xs: &[f64]) -> Vec<f64> {
        self.coarse_rows(&self.net.logits_batch(xs))
    }

    fn loss_input_grad_full(&self, xs: &[f64], ys: &[usize]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (f, c) = (self.map.num_fine(), self.map.num_coarse);
        let cache = self.net.forward_cache(xs, ys.len());
        let (coarse, src) = self.coarse_rows_with_source(cache.logits());
        let mut dc = vec![0.0; coarse.len()];
        let losses = coarse
            .chunks_exact(c)
            .zip(dc.chunks_exact_mut(c))
            .zip(ys)
            .map(|((row, dr), &y)| xent_row(row, y, 1.0, dr))
            .collect();
        let mut df = vec![0.0; ys.len() * f];
        for (r, frow) in df.chunks_exact_mut(f).enumerate() {
            match self.aggregation {
                Aggregation::SumLogits => {
                    for (i, v) in frow.iter_mut().enumerate() {
                        *v = dc[r * c + self.map.assign[i]];
                    }
                }
                Aggregation::MaxLogit => {
                    for k in 0..c {
                        frow[src[r * c + k]] = dc[r * c + k];
                    }
                }
            }
        }
        let g = self.net.backward(&cache, df, None, true).unwrap();
        (losses, g, coarse)
    }
}
