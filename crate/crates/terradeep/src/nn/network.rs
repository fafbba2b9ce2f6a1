use crate::error::{Error, Result};
use crate::math::activations::{sigmoid_scalar, softmax_row};
use crate::math::conv::{col2im_1d, col2im_2d, im2col_1d, im2col_2d};
use crate::math::linalg::{gemm, Trans};
use crate::math::pool::{pool1d_slice, pool2d_slice, unpool_scatter};
use crate::math::rng::streams;
use crate::math::{SeededRng, Tensor};
use crate::nn::optim::{adadelta_element, OptimizerSpec};
use crate::nn::spec::{Activation, LayerSpec, NetworkSpec};

/// Whether a forward pass is part of training (dropout active) or inference
/// (dropout is the identity).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Cap on retained activation values per forward pass; batches whose
/// activations would exceed it are processed in deterministic fixed-size
/// chunks (roughly 192 MB of f64 at this setting).
pub(crate) const ACTIVATION_BUDGET_VALUES: usize = 24_000_000;

/// A network's concrete parameters plus per-parameter optimizer accumulators.
///
/// Parameter tensors live in layer order: weights then bias for every dense
/// or convolution layer. The accumulators (adadelta's running squared
/// gradient and squared update) share those shapes and start at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    spec: NetworkSpec,
    /// Per-layer output shapes from spec validation.
    shapes: Vec<Vec<usize>>,
    /// Index into `params` of each layer's weight tensor (bias follows it).
    param_index: Vec<Option<usize>>,
    params: Vec<Tensor>,
    grad_sq: Vec<Tensor>,
    delta_sq: Vec<Tensor>,
}

/// Everything a backward pass needs from a forward pass: the input and every
/// layer output, plus the dropout scale masks and pooling argmax maps that
/// were sampled on the way up.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    mode: Mode,
    acts: Vec<Tensor>,
    dropout: Vec<Option<Vec<f64>>>,
    argmax: Vec<Option<Vec<u32>>>,
}

impl ForwardPass {
    /// Input followed by each layer's output, so `activations()[i + 1]` is
    /// the output of layer `i`.
    pub fn activations(&self) -> &[Tensor] {
        &self.acts
    }

    /// Final softmax probabilities, one row per sample.
    pub fn output(&self) -> &Tensor {
        self.acts.last().expect("forward pass retains the input")
    }

    pub fn rows(&self) -> usize {
        self.acts[0].dim(0)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }
}

/// Weight and bias shapes implied by a validated spec, in parameter order.
fn parameter_shapes(spec: &NetworkSpec, chain: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut shapes = Vec::new();
    for (i, layer) in spec.layers.iter().enumerate() {
        let input = if i == 0 {
            &spec.input_shape
        } else {
            &chain[i - 1]
        };
        match layer {
            LayerSpec::Dense { units } => {
                shapes.push(vec![input[0], *units]);
                shapes.push(vec![*units]);
            }
            LayerSpec::Conv1d { filters, width } => {
                shapes.push(vec![*filters, input[0], *width]);
                shapes.push(vec![*filters]);
            }
            LayerSpec::Conv2d { filters, kh, kw } => {
                shapes.push(vec![*filters, input[0], *kh, *kw]);
                shapes.push(vec![*filters]);
            }
            _ => {}
        }
    }
    shapes
}

impl NetworkState {
    /// Fresh state for a validated spec: weights drawn uniformly from
    /// `(-b, b)` with `b = sqrt(6 / (fan_in + fan_out))`, biases zero,
    /// optimizer accumulators zero. `seed` feeds the init stream of the
    /// toolkit-wide fan-out.
    pub fn init(spec: &NetworkSpec, seed: u64) -> Result<Self> {
        let chain = spec.validate()?;
        let pshapes = parameter_shapes(spec, &chain);
        let mut rng = SeededRng::new(seed, streams::INIT);
        let mut params = Vec::new();
        let mut param_index = Vec::with_capacity(spec.layers.len());
        for (i, layer) in spec.layers.iter().enumerate() {
            let input = if i == 0 {
                &spec.input_shape
            } else {
                &chain[i - 1]
            };
            let fans = match layer {
                LayerSpec::Dense { units } => Some((input[0], *units)),
                LayerSpec::Conv1d { filters, width } => Some((input[0] * width, filters * width)),
                LayerSpec::Conv2d { filters, kh, kw } => {
                    Some((input[0] * kh * kw, filters * kh * kw))
                }
                _ => None,
            };
            match fans {
                Some((fan_in, fan_out)) => {
                    param_index.push(Some(params.len()));
                    let w_shape = pshapes[params.len()].clone();
                    let b_shape = pshapes[params.len() + 1].clone();
                    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                    let n: usize = w_shape.iter().product();
                    let w = Tensor::new(
                        w_shape,
                        (0..n).map(|_| rng.uniform_range(-bound, bound)).collect(),
                    )?;
                    params.push(w);
                    params.push(Tensor::zeros(b_shape));
                }
                None => param_index.push(None),
            }
        }
        let grad_sq: Vec<Tensor> = params
            .iter()
            .map(|p| Tensor::zeros(p.shape().to_vec()))
            .collect();
        let delta_sq = grad_sq.clone();
        Ok(NetworkState {
            spec: spec.clone(),
            shapes: chain,
            param_index,
            params,
            grad_sq,
            delta_sq,
        })
    }

    /// Rebuild a state from a spec plus parameter tensors (the deserialization
    /// path). Accumulators restart at zero.
    pub fn from_parts(spec: NetworkSpec, params: Vec<Tensor>) -> Result<Self> {
        let chain = spec.validate()?;
        let expected = parameter_shapes(&spec, &chain);
        if expected.len() != params.len() {
            return Err(Error::State(format!(
                "network needs {} parameter tensors, got {}",
                expected.len(),
                params.len()
            )));
        }
        for (want, got) in expected.iter().zip(&params) {
            if want.as_slice() != got.shape() {
                return Err(Error::shape_mismatch("network parameter", want, got.shape()));
            }
        }
        let mut param_index = Vec::with_capacity(spec.layers.len());
        let mut next = 0usize;
        for layer in &spec.layers {
            if layer_has_params(layer) {
                param_index.push(Some(next));
                next += 2;
            } else {
                param_index.push(None);
            }
        }
        let grad_sq: Vec<Tensor> = params
            .iter()
            .map(|p| Tensor::zeros(p.shape().to_vec()))
            .collect();
        let delta_sq = grad_sq.clone();
        Ok(NetworkState {
            spec,
            shapes: chain,
            param_index,
            params,
            grad_sq,
            delta_sq,
        })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn params(&self) -> &[Tensor] {
        &self.params
    }

    pub(crate) fn params_mut(&mut self) -> &mut [Tensor] {
        &mut self.params
    }

    /// Shape of each layer's output for one sample.
    pub fn layer_shapes(&self) -> &[Vec<usize>] {
        &self.shapes
    }

    pub fn class_count(&self) -> usize {
        self.shapes.last().expect("validated spec has layers")[0]
    }

    /// Retained activation values per sample across the whole stack.
    fn per_sample_activation_values(&self) -> usize {
        let input: usize = self.spec.input_shape.iter().product();
        input
            + self
                .shapes
                .iter()
                .map(|s| s.iter().product::<usize>())
                .sum::<usize>()
    }

    /// Largest batch slice whose retained activations stay inside the
    /// memory budget. Depends only on the architecture, so chunked runs are
    /// reproducible everywhere.
    pub(crate) fn chunk_rows(&self) -> usize {
        (ACTIVATION_BUDGET_VALUES / self.per_sample_activation_values().max(1)).max(1)
    }

    fn layer_input_shape(&self, i: usize) -> &[usize] {
        if i == 0 {
            &self.spec.input_shape
        } else {
            &self.shapes[i - 1]
        }
    }

    fn weight_bias(&self, i: usize) -> (&Tensor, &Tensor) {
        let pi = self.param_index[i].expect("layer has parameters");
        (&self.params[pi], &self.params[pi + 1])
    }

    /// Run the stack over a `[n, ...input_shape]` batch, retaining every
    /// layer's output. In train mode dropout layers sample their masks from
    /// `rng`; in eval mode they pass values through untouched.
    pub fn forward(
        &self,
        batch: &Tensor,
        mode: Mode,
        mut rng: Option<&mut SeededRng>,
    ) -> Result<ForwardPass> {
        if batch.rank() != self.spec.input_shape.len() + 1
            || batch.shape()[1..] != self.spec.input_shape[..]
        {
            return Err(Error::shape_mismatch(
                "network input",
                batch.shape(),
                &self.spec.input_shape,
            ));
        }
        let n = batch.dim(0);
        let mut acts = Vec::with_capacity(self.spec.layers.len() + 1);
        acts.push(batch.clone());
        let mut dropout = vec![None; self.spec.layers.len()];
        let mut argmax = vec![None; self.spec.layers.len()];
        for (i, layer) in self.spec.layers.iter().enumerate() {
            let x = acts.last().expect("input pushed before loop");
            let y = match layer {
                LayerSpec::Dense { units } => {
                    let (w, b) = self.weight_bias(i);
                    let d = x.dim(1);
                    let mut y = Tensor::zeros(vec![n, *units]);
                    gemm(
                        Trans::No,
                        Trans::No,
                        n,
                        d,
                        *units,
                        x.values(),
                        w.values(),
                        y.values_mut(),
                        0.0,
                    );
                    for row in y.values_mut().chunks_exact_mut(*units) {
                        for (v, bv) in row.iter_mut().zip(b.values()) {
                            *v += bv;
                        }
                    }
                    y
                }
                LayerSpec::Conv1d { filters, width } => {
                    let (k, b) = self.weight_bias(i);
                    let (c, l) = (x.dim(1), x.dim(2));
                    let p = l - width + 1;
                    let kk = c * width;
                    let mut y = Tensor::zeros(vec![n, *filters, p]);
                    let mut col = vec![0.0; kk * p];
                    for s in 0..n {
                        im2col_1d(&x.values()[s * c * l..(s + 1) * c * l], c, l, *width, &mut col);
                        let ys = &mut y.values_mut()[s * filters * p..(s + 1) * filters * p];
                        gemm(
                            Trans::No,
                            Trans::No,
                            *filters,
                            kk,
                            p,
                            k.values(),
                            &col,
                            ys,
                            0.0,
                        );
                        add_filter_bias(ys, b.values(), p);
                    }
                    y
                }
                LayerSpec::Conv2d { filters, kh, kw } => {
                    let (k, b) = self.weight_bias(i);
                    let (c, h, w) = (x.dim(1), x.dim(2), x.dim(3));
                    let p = (h - kh + 1) * (w - kw + 1);
                    let kk = c * kh * kw;
                    let mut y = Tensor::zeros(vec![n, *filters, h - kh + 1, w - kw + 1]);
                    let mut col = vec![0.0; kk * p];
                    for s in 0..n {
                        im2col_2d(
                            &x.values()[s * c * h * w..(s + 1) * c * h * w],
                            c,
                            h,
                            w,
                            *kh,
                            *kw,
                            &mut col,
                        );
                        let ys = &mut y.values_mut()[s * filters * p..(s + 1) * filters * p];
                        gemm(
                            Trans::No,
                            Trans::No,
                            *filters,
                            kk,
                            p,
                            k.values(),
                            &col,
                            ys,
                            0.0,
                        );
                        add_filter_bias(ys, b.values(), p);
                    }
                    y
                }
                LayerSpec::Maxpool1d => {
                    let (c, l) = (x.dim(1), x.dim(2));
                    let ol = l / 2;
                    let mut y = Tensor::zeros(vec![n, c, ol]);
                    let mut arg = vec![0u32; n * c * ol];
                    for s in 0..n {
                        pool1d_slice(
                            &x.values()[s * c * l..(s + 1) * c * l],
                            c,
                            l,
                            &mut y.values_mut()[s * c * ol..(s + 1) * c * ol],
                            &mut arg[s * c * ol..(s + 1) * c * ol],
                        );
                    }
                    argmax[i] = Some(arg);
                    y
                }
                LayerSpec::Maxpool2d => {
                    let (c, h, w) = (x.dim(1), x.dim(2), x.dim(3));
                    let (oh, ow) = (h / 2, w / 2);
                    let out_n = c * oh * ow;
                    let mut y = Tensor::zeros(vec![n, c, oh, ow]);
                    let mut arg = vec![0u32; n * out_n];
                    for s in 0..n {
                        pool2d_slice(
                            &x.values()[s * c * h * w..(s + 1) * c * h * w],
                            c,
                            h,
                            w,
                            &mut y.values_mut()[s * out_n..(s + 1) * out_n],
                            &mut arg[s * out_n..(s + 1) * out_n],
                        );
                    }
                    argmax[i] = Some(arg);
                    y
                }
                LayerSpec::Dropout { rate } => match mode {
                    Mode::Eval => x.clone(),
                    Mode::Train => {
                        let r = rng.as_deref_mut().ok_or_else(|| {
                            Error::Parameter(
                                "train-mode forward through dropout needs a random stream".into(),
                            )
                        })?;
                        let mask = dropout_mask(r, x.len(), *rate);
                        let mut y = x.clone();
                        for (v, m) in y.values_mut().iter_mut().zip(&mask) {
                            *v *= m;
                        }
                        dropout[i] = Some(mask);
                        y
                    }
                },
                LayerSpec::Flatten => {
                    let flat: usize = x.shape()[1..].iter().product();
                    x.clone().reshape(vec![n, flat])?
                }
                LayerSpec::Activation { function } => match function {
                    Activation::Relu => x.map(|v| if v > 0.0 { v } else { 0.0 }),
                    Activation::Sigmoid => x.map(sigmoid_scalar),
                    Activation::Softmax => {
                        let mut y = x.clone();
                        let k = y.dim(1);
                        for row in y.values_mut().chunks_exact_mut(k) {
                            softmax_row(row);
                        }
                        y
                    }
                },
            };
            acts.push(y);
        }
        Ok(ForwardPass {
            mode,
            acts,
            dropout,
            argmax,
        })
    }

    /// Gradients of `cross_entropy(forward(batch), targets)` with respect to
    /// every parameter, in parameter order.
    pub fn backward(&self, pass: &ForwardPass, targets: &Tensor) -> Result<Vec<Tensor>> {
        let mut grads = self.zero_grads();
        self.backward_into(pass, targets, pass.rows(), &mut grads)?;
        Ok(grads)
    }

    pub fn zero_grads(&self) -> Vec<Tensor> {
        self.params
            .iter()
            .map(|p| Tensor::zeros(p.shape().to_vec()))
            .collect()
    }

    /// Accumulate gradients into `grads`, dividing the loss by `divisor`
    /// rows. Chunked training calls this once per chunk with the full batch
    /// size as divisor, so the summed result equals the whole-batch gradient.
    pub(crate) fn backward_into(
        &self,
        pass: &ForwardPass,
        targets: &Tensor,
        divisor: usize,
        grads: &mut [Tensor],
    ) -> Result<()> {
        self.check_pass(pass)?;
        let probs = pass.output();
        if targets.shape() != probs.shape() {
            return Err(Error::shape_mismatch(
                "backward targets",
                targets.shape(),
                probs.shape(),
            ));
        }
        if grads.len() != self.params.len() {
            return Err(Error::State(format!(
                "gradient buffer holds {} tensors, network has {}",
                grads.len(),
                self.params.len()
            )));
        }
        let n = pass.rows();
        let scale = 1.0 / divisor as f64;
        // The loss gradient lands directly on the softmax input:
        // d(cross_entropy o softmax)/dz = (probs - targets) / divisor.
        let k = probs.dim(1);
        let mut dcur = Tensor::zeros(vec![n, k]);
        for (d, (p, t)) in dcur
            .values_mut()
            .iter_mut()
            .zip(probs.values().iter().zip(targets.values()))
        {
            *d = (p - t) * scale;
        }
        let last = self.spec.layers.len() - 1;
        for i in (0..last).rev() {
            dcur = self.layer_backward(i, pass, dcur, grads, i > 0)?;
        }
        Ok(())
    }

    /// Verify a forward pass was produced by a network of this architecture.
    fn check_pass(&self, pass: &ForwardPass) -> Result<()> {
        let stale = || Error::State("forward pass does not match this network".into());
        if pass.acts.len() != self.spec.layers.len() + 1 {
            return Err(stale());
        }
        let n = pass.rows();
        if pass.acts[0].shape()[1..] != self.spec.input_shape[..] {
            return Err(stale());
        }
        for (i, shape) in self.shapes.iter().enumerate() {
            let act = &pass.acts[i + 1];
            if act.dim(0) != n || act.shape()[1..] != shape[..] {
                return Err(stale());
            }
        }
        Ok(())
    }

    /// Push the output gradient of layer `i` back to its input (returned)
    /// while accumulating its parameter gradients. `need_dx` skips the input
    /// gradient for the first layer, which nothing consumes.
    fn layer_backward(
        &self,
        i: usize,
        pass: &ForwardPass,
        dy: Tensor,
        grads: &mut [Tensor],
        need_dx: bool,
    ) -> Result<Tensor> {
        let x = &pass.acts[i];
        let y = &pass.acts[i + 1];
        let n = x.dim(0);
        let out = match &self.spec.layers[i] {
            LayerSpec::Dense { units } => {
                let pi = self.param_index[i].expect("dense has parameters");
                let d = x.dim(1);
                let (gw, gb) = {
                    let (head, tail) = grads.split_at_mut(pi + 1);
                    (&mut head[pi], &mut tail[0])
                };
                gemm(
                    Trans::Yes,
                    Trans::No,
                    d,
                    n,
                    *units,
                    x.values(),
                    dy.values(),
                    gw.values_mut(),
                    1.0,
                );
                for row in dy.values().chunks_exact(*units) {
                    for (g, v) in gb.values_mut().iter_mut().zip(row) {
                        *g += v;
                    }
                }
                if !need_dx {
                    return Ok(empty());
                }
                let w = &self.params[pi];
                let mut dx = Tensor::zeros(vec![n, d]);
                gemm(
                    Trans::No,
                    Trans::Yes,
                    n,
                    *units,
                    d,
                    dy.values(),
                    w.values(),
                    dx.values_mut(),
                    0.0,
                );
                dx
            }
            LayerSpec::Conv1d { filters, width } => {
                let pi = self.param_index[i].expect("conv1d has parameters");
                let (c, l) = (x.dim(1), x.dim(2));
                let p = l - width + 1;
                let kk = c * width;
                let kern = &self.params[pi];
                let mut dx = Tensor::zeros(if need_dx { vec![n, c, l] } else { vec![1] });
                let mut col = vec![0.0; kk * p];
                let mut dcol = vec![0.0; kk * p];
                for s in 0..n {
                    let xs = &x.values()[s * c * l..(s + 1) * c * l];
                    let dys = &dy.values()[s * filters * p..(s + 1) * filters * p];
                    im2col_1d(xs, c, l, *width, &mut col);
                    let (gk, gb) = {
                        let (head, tail) = grads.split_at_mut(pi + 1);
                        (&mut head[pi], &mut tail[0])
                    };
                    gemm(
                        Trans::No,
                        Trans::Yes,
                        *filters,
                        p,
                        kk,
                        dys,
                        &col,
                        gk.values_mut(),
                        1.0,
                    );
                    accumulate_filter_bias(gb.values_mut(), dys, p);
                    if need_dx {
                        gemm(
                            Trans::Yes,
                            Trans::No,
                            kk,
                            *filters,
                            p,
                            kern.values(),
                            dys,
                            &mut dcol,
                            0.0,
                        );
                        col2im_1d(&dcol, c, l, *width, &mut dx.values_mut()[s * c * l..(s + 1) * c * l]);
                    }
                }
                if !need_dx {
                    return Ok(empty());
                }
                dx
            }
            LayerSpec::Conv2d { filters, kh, kw } => {
                let pi = self.param_index[i].expect("conv2d has parameters");
                let (c, h, w) = (x.dim(1), x.dim(2), x.dim(3));
                let p = (h - kh + 1) * (w - kw + 1);
                let kk = c * kh * kw;
                let kern = &self.params[pi];
                let mut dx = Tensor::zeros(if need_dx { vec![n, c, h, w] } else { vec![1] });
                let mut col = vec![0.0; kk * p];
                let mut dcol = vec![0.0; kk * p];
                for s in 0..n {
                    let xs = &x.values()[s * c * h * w..(s + 1) * c * h * w];
                    let dys = &dy.values()[s * filters * p..(s + 1) * filters * p];
                    im2col_2d(xs, c, h, w, *kh, *kw, &mut col);
                    let (gk, gb) = {
                        let (head, tail) = grads.split_at_mut(pi + 1);
                        (&mut head[pi], &mut tail[0])
                    };
                    gemm(
                        Trans::No,
                        Trans::Yes,
                        *filters,
                        p,
                        kk,
                        dys,
                        &col,
                        gk.values_mut(),
                        1.0,
                    );
                    accumulate_filter_bias(gb.values_mut(), dys, p);
                    if need_dx {
                        gemm(
                            Trans::Yes,
                            Trans::No,
                            kk,
                            *filters,
                            p,
                            kern.values(),
                            dys,
                            &mut dcol,
                            0.0,
                        );
                        col2im_2d(
                            &dcol,
                            c,
                            h,
                            w,
                            *kh,
                            *kw,
                            &mut dx.values_mut()[s * c * h * w..(s + 1) * c * h * w],
                        );
                    }
                }
                if !need_dx {
                    return Ok(empty());
                }
                dx
            }
            LayerSpec::Maxpool1d | LayerSpec::Maxpool2d => {
                if !need_dx {
                    return Ok(empty());
                }
                let arg = pass.argmax[i]
                    .as_ref()
                    .ok_or_else(|| Error::State("pooling argmax missing from forward pass".into()))?;
                let in_elems: usize = self.layer_input_shape(i).iter().product();
                let out_elems: usize = self.shapes[i].iter().product();
                let mut dx = Tensor::zeros(
                    std::iter::once(n)
                        .chain(self.layer_input_shape(i).iter().copied())
                        .collect(),
                );
                for s in 0..n {
                    unpool_scatter(
                        &dy.values()[s * out_elems..(s + 1) * out_elems],
                        &arg[s * out_elems..(s + 1) * out_elems],
                        &mut dx.values_mut()[s * in_elems..(s + 1) * in_elems],
                    );
                }
                dx
            }
            LayerSpec::Dropout { .. } => {
                if !need_dx {
                    return Ok(empty());
                }
                match (pass.mode, &pass.dropout[i]) {
                    (Mode::Eval, _) => dy,
                    (Mode::Train, Some(mask)) => {
                        let mut dx = dy;
                        for (v, m) in dx.values_mut().iter_mut().zip(mask) {
                            *v *= m;
                        }
                        dx
                    }
                    (Mode::Train, None) => {
                        return Err(Error::State(
                            "dropout mask missing from train-mode forward pass".into(),
                        ))
                    }
                }
            }
            LayerSpec::Flatten => {
                if !need_dx {
                    return Ok(empty());
                }
                let shape: Vec<usize> = std::iter::once(n)
                    .chain(self.layer_input_shape(i).iter().copied())
                    .collect();
                dy.reshape(shape)?
            }
            LayerSpec::Activation { function } => {
                if !need_dx {
                    return Ok(empty());
                }
                let mut dx = dy;
                match function {
                    Activation::Relu => {
                        for (g, v) in dx.values_mut().iter_mut().zip(y.values()) {
                            if *v <= 0.0 {
                                *g = 0.0;
                            }
                        }
                    }
                    Activation::Sigmoid => {
                        for (g, v) in dx.values_mut().iter_mut().zip(y.values()) {
                            *g *= v * (1.0 - v);
                        }
                    }
                    // Validation pins softmax to the final layer, whose
                    // gradient is fused with the loss in backward_into.
                    Activation::Softmax => unreachable!("softmax cannot appear mid-stack"),
                }
                dx
            }
        };
        Ok(out)
    }

    /// Apply one optimizer step. Rejects non-finite gradients and any update
    /// that would leave a parameter non-finite.
    pub fn step(&mut self, grads: &[Tensor], opt: &OptimizerSpec) -> Result<()> {
        opt.validate()?;
        if grads.len() != self.params.len() {
            return Err(Error::State(format!(
                "optimizer got {} gradient tensors for {} parameters",
                grads.len(),
                self.params.len()
            )));
        }
        for (pi, g) in grads.iter().enumerate() {
            if g.shape() != self.params[pi].shape() {
                return Err(Error::shape_mismatch(
                    "optimizer step",
                    g.shape(),
                    self.params[pi].shape(),
                ));
            }
            let w = self.params[pi].values_mut();
            let gv = g.values();
            match *opt {
                OptimizerSpec::Adadelta { rho, epsilon, lr } => {
                    let eg = self.grad_sq[pi].values_mut();
                    let ed = self.delta_sq[pi].values_mut();
                    for j in 0..w.len() {
                        if !gv[j].is_finite() {
                            return Err(Error::Invariant(
                                "non-finite gradient reached the optimizer".into(),
                            ));
                        }
                        w[j] = adadelta_element(w[j], gv[j], &mut eg[j], &mut ed[j], rho, epsilon, lr);
                        if !w[j].is_finite() {
                            return Err(Error::Invariant(
                                "parameter became non-finite during update".into(),
                            ));
                        }
                    }
                }
                OptimizerSpec::Sgd { eta } => {
                    for j in 0..w.len() {
                        if !gv[j].is_finite() {
                            return Err(Error::Invariant(
                                "non-finite gradient reached the optimizer".into(),
                            ));
                        }
                        w[j] -= eta * gv[j];
                        if !w[j].is_finite() {
                            return Err(Error::Invariant(
                                "parameter became non-finite during update".into(),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn layer_has_params(layer: &LayerSpec) -> bool {
    matches!(
        layer,
        LayerSpec::Dense { .. } | LayerSpec::Conv1d { .. } | LayerSpec::Conv2d { .. }
    )
}

/// Placeholder returned when a layer's input gradient is not needed.
fn empty() -> Tensor {
    Tensor::vector(Vec::new())
}

/// `y[s]` is `[filters, positions]`; add one bias value per filter row.
fn add_filter_bias(ys: &mut [f64], bias: &[f64], positions: usize) {
    for (f, row) in ys.chunks_exact_mut(positions).enumerate() {
        let b = bias[f];
        for v in row {
            *v += b;
        }
    }
}

/// Bias gradient: sum each filter's row of output gradients.
fn accumulate_filter_bias(gb: &mut [f64], dys: &[f64], positions: usize) {
    for (f, row) in dys.chunks_exact(positions).enumerate() {
        gb[f] += row.iter().sum::<f64>();
    }
}

/// Inverted-scaling dropout mask: each element is `1/(1-rate)` with
/// probability `1-rate`, else `0`, so the expected output matches eval mode.
pub(crate) fn dropout_mask(rng: &mut SeededRng, len: usize, rate: f64) -> Vec<f64> {
    let keep = 1.0 - rate;
    let scale = 1.0 / keep;
    (0..len)
        .map(|_| if rng.uniform() < keep { scale } else { 0.0 })
        .collect()
}

/// Index of the row maximum; ties go to the lowest index.
pub(crate) fn argmax_row(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = j;
        }
    }
    best
}
