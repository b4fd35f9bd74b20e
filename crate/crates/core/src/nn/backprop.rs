//! Batched forward and backward passes.
//!
//! Rows are processed in fixed-size chunks through GEMM calls, so memory stays
//! bounded for large training sets and the summation order is fixed for a given
//! batch, which keeps training bit-reproducible.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, ArrayView2, ArrayViewMut2, Axis};

use super::activation::ActivationKind;
use super::mlp::{Gradient, Mlp, Params};
use crate::error::{Error, Result};

const CHUNK_ROWS: usize = 128;

/// Row-aligned inputs and targets. Row `i` of `inputs` is paired with row `i` of
/// `targets`.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    inputs: Array2<f64>,
    targets: Array2<f64>,
}

impl Batch {
    pub fn new(inputs: Array2<f64>, targets: Array2<f64>) -> Result<Self> {
        if inputs.nrows() != targets.nrows() {
            return Err(Error::DimensionMismatch {
                expected: inputs.nrows(),
                actual: targets.nrows(),
                context: "target rows vs input rows",
            });
        }
        Ok(Batch { inputs, targets })
    }

    /// Builds a batch from `(input, target)` pairs. All inputs must share one
    /// length, as must all targets.
    pub fn from_pairs<I, T>(pairs: &[(I, T)]) -> Result<Self>
    where
        I: AsRef<[f64]>,
        T: AsRef<[f64]>,
    {
        let Some((first_in, first_t)) = pairs.first() else {
            return Err(Error::EmptySet("batch has no samples"));
        };
        let (n_in, n_t) = (first_in.as_ref().len(), first_t.as_ref().len());
        let mut inputs = Vec::with_capacity(pairs.len() * n_in);
        let mut targets = Vec::with_capacity(pairs.len() * n_t);
        for (x, t) in pairs {
            let (x, t) = (x.as_ref(), t.as_ref());
            if x.len() != n_in {
                return Err(Error::DimensionMismatch {
                    expected: n_in,
                    actual: x.len(),
                    context: "batch input length",
                });
            }
            if t.len() != n_t {
                return Err(Error::DimensionMismatch {
                    expected: n_t,
                    actual: t.len(),
                    context: "batch target length",
                });
            }
            inputs.extend_from_slice(x);
            targets.extend_from_slice(t);
        }
        let n = pairs.len();
        Batch::new(
            Array2::from_shape_vec((n, n_in), inputs).expect("input buffer sized above"),
            Array2::from_shape_vec((n, n_t), targets).expect("target buffer sized above"),
        )
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn input_len(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn target_len(&self) -> usize {
        self.targets.ncols()
    }

    pub fn inputs(&self) -> &Array2<f64> {
        &self.inputs
    }

    pub fn targets(&self) -> &Array2<f64> {
        &self.targets
    }

    fn check(&self, net: &Mlp) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptySet("batch has no samples"));
        }
        if self.input_len() != net.input_size() {
            return Err(Error::DimensionMismatch {
                expected: net.input_size(),
                actual: self.input_len(),
                context: "batch input length vs network input",
            });
        }
        if self.target_len() != net.output_size() {
            return Err(Error::DimensionMismatch {
                expected: net.output_size(),
                actual: self.target_len(),
                context: "batch target length vs network output",
            });
        }
        Ok(())
    }
}

/// Scratch buffers reused across chunks.
struct Scratch {
    hidden: Array2<f64>,
    output: Array2<f64>,
    d_hidden: Array2<f64>,
}

impl Scratch {
    fn new(net: &Mlp) -> Self {
        Scratch {
            hidden: Array2::zeros((CHUNK_ROWS, net.hidden_size())),
            output: Array2::zeros((CHUNK_ROWS, net.output_size())),
            d_hidden: Array2::zeros((CHUNK_ROWS, net.hidden_size())),
        }
    }
}

/// `out = act(x · wᵀ + b)`, with the bias seeded into `out` before the product.
fn layer(x: &ArrayView2<f64>, w: &Array2<f64>, b: &Array1<f64>, act: ActivationKind, out: &mut ArrayViewMut2<f64>) {
    let dim = out.raw_dim();
    out.assign(&b.broadcast(dim).expect("bias matches layer width"));
    general_mat_mul(1.0, x, &w.t(), 1.0, out);
    act.apply_slice(out.as_slice_mut().expect("scratch blocks are contiguous"));
}

/// Forward pass for a chunk, leaving hidden and output activations in `scratch`.
fn forward_chunk(net: &Mlp, x: ArrayView2<f64>, scratch: &mut Scratch) {
    let rows = x.nrows();
    let mut hidden = scratch.hidden.slice_mut(s![..rows, ..]);
    layer(&x, &net.weights_ih, &net.bias_h, net.hidden_activation, &mut hidden);
    let mut output = scratch.output.slice_mut(s![..rows, ..]);
    layer(&hidden.view(), &net.weights_ho, &net.bias_o, net.output_activation, &mut output);
}

fn contiguous<'a>(a: &'a ArrayView2<f64>) -> &'a [f64] {
    a.as_slice().expect("row blocks of standard-layout arrays are contiguous")
}

fn contiguous_mut<'a>(a: &'a mut ArrayViewMut2<f64>) -> &'a mut [f64] {
    a.as_slice_mut().expect("row blocks of standard-layout arrays are contiguous")
}

/// Mean over samples and output components of the squared error.
pub fn mse(net: &Mlp, batch: &Batch) -> Result<f64> {
    batch.check(net)?;
    let mut scratch = Scratch::new(net);
    let mut sum = 0.0;
    for start in (0..batch.len()).step_by(CHUNK_ROWS) {
        let end = (start + CHUNK_ROWS).min(batch.len());
        forward_chunk(net, batch.inputs.slice(s![start..end, ..]), &mut scratch);
        let out = scratch.output.slice(s![..end - start, ..]);
        let tgt = batch.targets.slice(s![start..end, ..]);
        sum += contiguous(&out).iter().zip(contiguous(&tgt)).map(|(y, t)| (y - t) * (y - t)).sum::<f64>();
    }
    Ok(sum / (batch.len() * net.output_size()) as f64)
}

/// Exact gradient of the batch MSE with respect to every weight and bias.
pub fn gradient(net: &Mlp, batch: &Batch) -> Result<Gradient> {
    Ok(loss_and_gradient(net, batch)?.1)
}

/// Batch MSE together with its gradient, from a single pass.
pub fn loss_and_gradient(net: &Mlp, batch: &Batch) -> Result<(f64, Gradient)> {
    batch.check(net)?;
    let n = batch.len();
    let scale = 2.0 / (n * net.output_size()) as f64;
    let mut grad = Params::zeros_like(net);
    let mut scratch = Scratch::new(net);
    let mut sum_sq = 0.0;

    for start in (0..n).step_by(CHUNK_ROWS) {
        let end = (start + CHUNK_ROWS).min(n);
        let rows = end - start;
        let x = batch.inputs.slice(s![start..end, ..]);
        forward_chunk(net, x, &mut scratch);

        // Output deltas, overwriting the activations in place.
        let tgt = batch.targets.slice(s![start..end, ..]);
        let mut d_out = scratch.output.slice_mut(s![..rows, ..]);
        let out_act = net.output_activation;
        for (y, &t) in contiguous_mut(&mut d_out).iter_mut().zip(contiguous(&tgt)) {
            let err = *y - t;
            sum_sq += err * err;
            *y = scale * err * out_act.derivative_from_output(*y);
        }

        let hidden = scratch.hidden.slice(s![..rows, ..]);
        general_mat_mul(1.0, &d_out.t(), &hidden, 1.0, &mut grad.weights_ho);
        grad.bias_o += &d_out.sum_axis(Axis(0));

        let mut d_hidden = scratch.d_hidden.slice_mut(s![..rows, ..]);
        general_mat_mul(1.0, &d_out, &net.weights_ho, 0.0, &mut d_hidden);
        let hid_act = net.hidden_activation;
        for (d, &h) in contiguous_mut(&mut d_hidden).iter_mut().zip(contiguous(&hidden)) {
            *d *= hid_act.derivative_from_output(h);
        }
        general_mat_mul(1.0, &d_hidden.t(), &x, 1.0, &mut grad.weights_ih);
        grad.bias_h += &d_hidden.sum_axis(Axis(0));
    }

    Ok((sum_sq / (n * net.output_size()) as f64, grad))
}
