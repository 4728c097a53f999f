//! Dense feed-forward regressor: two ReLU hidden layers, optional further
//! linear hidden layers, and a tanh output. Trained on mean squared error with
//! an L2 penalty on the weights (biases are not penalized).

mod checkpoint;

use ndarray::{s, Array1, Array2, ArrayView2, Axis, Zip};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};

pub use checkpoint::{deserialize, serialize, CHECKPOINT_MAGIC};

use crate::channel::stream::{tag, StreamKey};
use crate::error::{domain, shape, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
    Tanh,
}

impl Activation {
    /// Activation of affine layer `layer` out of `count`.
    pub fn for_layer(layer: usize, count: usize) -> Self {
        if layer + 1 == count {
            Activation::Tanh
        } else if layer < 2 {
            Activation::Relu
        } else {
            Activation::Identity
        }
    }

    fn apply(self, z: &mut Array2<f64>) {
        match self {
            Activation::Relu => z.mapv_inplace(|v| v.max(0.0)),
            Activation::Identity => {}
            Activation::Tanh => z.mapv_inplace(f64::tanh),
        }
    }

    /// Multiplies `delta` by the derivative, expressed through the activation output.
    fn backprop(self, delta: &mut Array2<f64>, out: &Array2<f64>) {
        match self {
            Activation::Relu => Zip::from(delta).and(out).for_each(|d, &a| {
                if a <= 0.0 {
                    *d = 0.0;
                }
            }),
            Activation::Identity => {}
            Activation::Tanh => Zip::from(delta).and(out).for_each(|d, &a| *d *= 1.0 - a * a),
        }
    }
}

/// Weights are stored `(out, in)`, so each row feeds one output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    dims: Vec<usize>,
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
}

/// Gradient of the loss, shaped like the model.
pub type Gradients = MlpModel;

impl MlpModel {
    /// Zero-filled model with the given layer widths.
    pub fn zeros(dims: &[usize]) -> Result<Self> {
        if dims.len() < 2 {
            return Err(domain("an MLP needs at least an input and an output layer"));
        }
        if dims.contains(&0) {
            return Err(domain(format!("zero-width layer in {dims:?}")));
        }
        let weights = dims.windows(2).map(|w| Array2::zeros((w[1], w[0]))).collect();
        let biases = dims[1..].iter().map(|&n| Array1::zeros(n)).collect();
        Ok(Self { dims: dims.to_vec(), weights, biases })
    }

    /// He-style initialization: variance `2 / fan_in` for layers feeding a
    /// ReLU, `1 / fan_in` otherwise; zero biases.
    pub fn init(dims: &[usize], seed: u64) -> Result<Self> {
        let mut model = Self::zeros(dims)?;
        let count = model.num_layers();
        for (l, w) in model.weights.iter_mut().enumerate() {
            let fan_in = w.ncols() as f64;
            let gain = if Activation::for_layer(l, count) == Activation::Relu { 2.0 } else { 1.0 };
            let std = (gain / fan_in).sqrt();
            let mut rng = StreamKey::new(seed, l as u64).rng(tag::INIT);
            w.mapv_inplace(|_| std * Distribution::<f64>::sample(&StandardNormal, &mut rng));
        }
        Ok(model)
    }

    pub fn from_parts(dims: Vec<usize>, weights: Vec<Array2<f64>>, biases: Vec<Array1<f64>>) -> Result<Self> {
        let model = Self { dims, weights, biases };
        model.check_shapes()?;
        Ok(model)
    }

    fn check_shapes(&self) -> Result<()> {
        if self.dims.len() < 2 || self.weights.len() + 1 != self.dims.len() || self.biases.len() + 1 != self.dims.len() {
            return Err(shape("layer count does not match the dimension list"));
        }
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            if w.dim() != (self.dims[l + 1], self.dims[l]) || b.len() != self.dims[l + 1] {
                return Err(shape(format!("layer {l} has weights {:?} and bias {}", w.dim(), b.len())));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().expect("at least two layers")
    }

    /// Number of affine layers.
    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Array1<f64>] {
        &self.biases
    }

    pub fn weights_mut(&mut self) -> &mut [Array2<f64>] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [Array1<f64>] {
        &mut self.biases
    }

    pub fn activation(&self, layer: usize) -> Activation {
        Activation::for_layer(layer, self.num_layers())
    }

    pub fn is_finite(&self) -> bool {
        self.params().all(f64::is_finite)
    }

    /// Every parameter, layer by layer: weights row-major, then bias.
    pub fn params(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().zip(&self.biases).flat_map(|(w, b)| w.iter().chain(b.iter()).copied())
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.weights.iter_mut().zip(self.biases.iter_mut()).flat_map(|(w, b)| w.iter_mut().chain(b.iter_mut()))
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>() + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// Sum of squared weights (biases excluded).
    pub fn weight_norm_sqr(&self) -> f64 {
        self.weights.iter().map(|w| w.iter().map(|v| v * v).sum::<f64>()).sum()
    }

    /// Activations of every layer for a batch (row per sample); entry 0 is the input.
    fn forward_trace(&self, x: ArrayView2<f64>) -> Vec<Array2<f64>> {
        let mut trace = Vec::with_capacity(self.num_layers() + 1);
        trace.push(x.to_owned());
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = trace[l].dot(&w.t());
            z += b;
            self.activation(l).apply(&mut z);
            trace.push(z);
        }
        trace
    }

    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.input_dim() {
            return Err(shape(format!("input has {} features, model expects {}", x.ncols(), self.input_dim())));
        }
        Ok(self.forward_trace(x).pop().expect("non-empty trace"))
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let view = ArrayView2::from_shape((1, x.len()), x).map_err(|e| shape(e.to_string()))?;
        Ok(self.forward_batch(view)?.into_iter().collect())
    }

    /// Batch loss `mean_b ||f(x_b) - t_b||^2 + lambda ||W||^2` and its exact gradient.
    /// Also returns the data term alone.
    pub fn loss_and_grad_batch(&self, x: ArrayView2<f64>, t: ArrayView2<f64>, lambda: f64) -> Result<(f64, f64, Gradients)> {
        let n = x.nrows();
        if n == 0 {
            return Err(Error::EmptyBatch);
        }
        if x.ncols() != self.input_dim() || t.ncols() != self.output_dim() || t.nrows() != n {
            return Err(shape(format!(
                "batch {:?} -> {:?} does not fit model {:?}",
                x.dim(),
                t.dim(),
                self.dims
            )));
        }
        let trace = self.forward_trace(x);
        let out = trace.last().expect("non-empty trace");
        let residual = out - &t;
        let mse = residual.iter().map(|r| r * r).sum::<f64>() / n as f64;
        let loss = mse + lambda * self.weight_norm_sqr();

        let mut grads = Self::zeros(&self.dims)?;
        let mut delta = residual * (2.0 / n as f64);
        for l in (0..self.num_layers()).rev() {
            self.activation(l).backprop(&mut delta, &trace[l + 1]);
            let gw = delta.t().dot(&trace[l]);
            grads.weights[l] = gw + &(&self.weights[l] * (2.0 * lambda));
            grads.biases[l] = delta.sum_axis(Axis(0));
            if l > 0 {
                delta = delta.dot(&self.weights[l]);
            }
        }
        Ok((loss, mse, grads))
    }

    /// Convenience form over `(input, target)` pairs.
    pub fn loss_and_grad(&self, batch: &[(Vec<f64>, Vec<f64>)], lambda: f64) -> Result<(f64, Gradients)> {
        if batch.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let (x, t) = stack_pairs(batch, self.input_dim(), self.output_dim())?;
        let (loss, _, grads) = self.loss_and_grad_batch(x.view(), t.view(), lambda)?;
        Ok((loss, grads))
    }
}

fn stack_pairs(batch: &[(Vec<f64>, Vec<f64>)], din: usize, dout: usize) -> Result<(Array2<f64>, Array2<f64>)> {
    let mut x = Array2::zeros((batch.len(), din));
    let mut t = Array2::zeros((batch.len(), dout));
    for (i, (xi, ti)) in batch.iter().enumerate() {
        if xi.len() != din || ti.len() != dout {
            return Err(shape(format!("sample {i} has widths ({}, {}), expected ({din}, {dout})", xi.len(), ti.len())));
        }
        x.row_mut(i).assign(&Array1::from(xi.clone()));
        t.row_mut(i).assign(&Array1::from(ti.clone()));
    }
    Ok((x, t))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    Sgd,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::Adam { beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainHyper {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// L2 coefficient on the weights.
    pub lambda: f64,
    pub optimizer: Optimizer,
    pub seed: u64,
}

impl Default for TrainHyper {
    fn default() -> Self {
        Self { learning_rate: 1e-3, epochs: 200, batch_size: 64, lambda: 1e-4, optimizer: Optimizer::default(), seed: 0 }
    }
}

impl TrainHyper {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !(self.lambda >= 0.0) || self.epochs == 0 || self.batch_size == 0 {
            return Err(domain("need learning_rate > 0, lambda >= 0, epochs >= 1 and batch_size >= 1"));
        }
        Ok(())
    }
}

/// Optimizer memory: step counter and Adam moment estimates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OptimizerState {
    pub steps: u64,
    moments: Option<(Gradients, Gradients)>,
}

/// Applies one optimizer update in place.
pub fn step(model: &mut MlpModel, grads: &Gradients, hyper: &TrainHyper, state: &mut OptimizerState) -> Result<()> {
    if grads.dims != model.dims {
        return Err(shape("gradient shape does not match the model"));
    }
    state.steps += 1;
    let lr = hyper.learning_rate;
    match hyper.optimizer {
        Optimizer::Sgd => {
            for (p, g) in model.params_mut().zip(grads.params()) {
                *p -= lr * g;
            }
        }
        Optimizer::Adam { beta1, beta2, epsilon } => {
            let (m, v) = match &mut state.moments {
                Some(mv) => mv,
                slot => slot.insert((MlpModel::zeros(&model.dims)?, MlpModel::zeros(&model.dims)?)),
            };
            let t = state.steps as i32;
            let c1 = 1.0 - beta1.powi(t);
            let c2 = 1.0 - beta2.powi(t);
            for (((p, g), m), v) in model.params_mut().zip(grads.params()).zip(m.params_mut()).zip(v.params_mut()) {
                *m = beta1 * *m + (1.0 - beta1) * g;
                *v = beta2 * *v + (1.0 - beta2) * g * g;
                *p -= lr * (*m / c1) / ((*v / c2).sqrt() + epsilon);
            }
        }
    }
    Ok(())
}

/// Parameter-wise mean. Each parameter's values are sorted before reduction
/// and averaged as `min + mean(x - min)`, which makes the result independent
/// of model order and exact for identical inputs.
pub fn average(models: &[MlpModel]) -> Result<MlpModel> {
    let first = models.first().ok_or_else(|| domain("cannot average an empty model list"))?;
    if models.iter().any(|m| m.dims != first.dims) {
        return Err(shape("models to average must share layer dimensions"));
    }
    let n = models.len() as f64;
    let mut out = first.clone();
    let mut iters: Vec<_> = models.iter().map(|m| m.params()).collect();
    let mut column = vec![0.0; models.len()];
    for slot in out.params_mut() {
        for (c, it) in column.iter_mut().zip(iters.iter_mut()) {
            *c = it.next().expect("equal parameter counts");
        }
        column.sort_by(f64::total_cmp);
        let base = column[0];
        *slot = base + column.iter().map(|v| v - base).sum::<f64>() / n;
    }
    Ok(out)
}

/// Runs one epoch of minibatch training over `(x, t)` and returns the mean
/// per-sample squared error seen during the epoch. The sample order is drawn
/// from the `(seed, epoch)` shuffle stream.
pub fn train_epoch(
    model: &mut MlpModel,
    state: &mut OptimizerState,
    x: ArrayView2<f64>,
    t: ArrayView2<f64>,
    hyper: &TrainHyper,
    epoch: u64,
) -> Result<f64> {
    hyper.validate()?;
    let n = x.nrows();
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut StreamKey::new(hyper.seed, epoch).rng(tag::SHUFFLE));
    let mut sse = 0.0;
    for chunk in order.chunks(hyper.batch_size) {
        let xb = x.select(Axis(0), chunk);
        let tb = t.select(Axis(0), chunk);
        let (_, mse, grads) = model.loss_and_grad_batch(xb.view(), tb.view(), hyper.lambda)?;
        sse += mse * chunk.len() as f64;
        step(model, &grads, hyper, state)?;
    }
    Ok(sse / n as f64)
}

/// Mean per-sample squared error of `model` on `(x, t)` without training.
pub fn evaluate_mse(model: &MlpModel, x: ArrayView2<f64>, t: ArrayView2<f64>) -> Result<f64> {
    let y = model.forward_batch(x)?;
    if y.dim() != t.dim() {
        return Err(shape("target shape does not match model output"));
    }
    Ok((&y - &t).iter().map(|r| r * r).sum::<f64>() / x.nrows().max(1) as f64)
}

/// Copies rows of a row-major feature list into a matrix.
pub fn to_matrix(rows: &[Vec<f64>], width: usize) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((rows.len(), width));
    for (i, r) in rows.iter().enumerate() {
        if r.len() != width {
            return Err(shape(format!("row {i} has {} entries, expected {width}", r.len())));
        }
        out.slice_mut(s![i, ..]).assign(&ndarray::aview1(r));
    }
    Ok(out)
}
