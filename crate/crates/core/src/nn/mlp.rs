use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::activation::ActivationKind;
use crate::error::{Error, Result};

/// One value per network parameter, laid out like an [`Mlp`]'s weights.
///
/// Used for gradients, RPROP step sizes and weight deltas. The flat parameter
/// order (see [`Params::get`]) is `weights_ih`, `weights_ho`, `bias_h`, `bias_o`,
/// each row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub weights_ih: Array2<f64>,
    pub weights_ho: Array2<f64>,
    pub bias_h: Array1<f64>,
    pub bias_o: Array1<f64>,
}

pub type Gradient = Params;

impl Params {
    pub fn filled_like(net: &Mlp, value: f64) -> Self {
        Params {
            weights_ih: Array2::from_elem(net.weights_ih.raw_dim(), value),
            weights_ho: Array2::from_elem(net.weights_ho.raw_dim(), value),
            bias_h: Array1::from_elem(net.bias_h.raw_dim(), value),
            bias_o: Array1::from_elem(net.bias_o.raw_dim(), value),
        }
    }

    pub fn zeros_like(net: &Mlp) -> Self {
        Self::filled_like(net, 0.0)
    }

    pub fn len(&self) -> usize {
        self.weights_ih.len() + self.weights_ho.len() + self.bias_h.len() + self.bias_o.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn same_shape(&self, other: &Params) -> bool {
        self.weights_ih.dim() == other.weights_ih.dim()
            && self.weights_ho.dim() == other.weights_ho.dim()
            && self.bias_h.len() == other.bias_h.len()
            && self.bias_o.len() == other.bias_o.len()
    }

    pub fn matches(&self, net: &Mlp) -> bool {
        self.weights_ih.dim() == net.weights_ih.dim()
            && self.weights_ho.dim() == net.weights_ho.dim()
            && self.bias_h.len() == net.bias_h.len()
            && self.bias_o.len() == net.bias_o.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.weights_ih.iter().chain(self.weights_ho.iter()).chain(self.bias_h.iter()).chain(self.bias_o.iter())
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights_ih
            .iter_mut()
            .chain(self.weights_ho.iter_mut())
            .chain(self.bias_h.iter_mut())
            .chain(self.bias_o.iter_mut())
    }

    /// Value of the `k`-th parameter in flat order.
    pub fn get(&self, k: usize) -> f64 {
        *self.iter().nth(k).expect("parameter index out of range")
    }
}

/// Three-layer perceptron: input, one fully connected hidden layer, output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub(crate) weights_ih: Array2<f64>,
    pub(crate) weights_ho: Array2<f64>,
    pub(crate) bias_h: Array1<f64>,
    pub(crate) bias_o: Array1<f64>,
    pub(crate) hidden_activation: ActivationKind,
    pub(crate) output_activation: ActivationKind,
}

impl Mlp {
    /// Builds a network with weights drawn uniformly from `±1/sqrt(fan_in)` and zero
    /// biases. The same sizes and seed always give a bit-identical network.
    pub fn init(
        input_size: usize,
        hidden_size: usize,
        output_size: usize,
        activations: (ActivationKind, ActivationKind),
        seed: u64,
    ) -> Result<Self> {
        check_sizes(input_size, hidden_size, output_size)?;
        activations.0.validate()?;
        activations.1.validate()?;

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound_ih = 1.0 / (input_size as f64).sqrt();
        let bound_ho = 1.0 / (hidden_size as f64).sqrt();
        let weights_ih =
            Array2::from_shape_simple_fn((hidden_size, input_size), || rng.random_range(-bound_ih..=bound_ih));
        let weights_ho =
            Array2::from_shape_simple_fn((output_size, hidden_size), || rng.random_range(-bound_ho..=bound_ho));

        Ok(Mlp {
            weights_ih,
            weights_ho,
            bias_h: Array1::zeros(hidden_size),
            bias_o: Array1::zeros(output_size),
            hidden_activation: activations.0,
            output_activation: activations.1,
        })
    }

    /// Assembles a network from explicit weights.
    ///
    /// `weights_ih` is `hidden × input` and `weights_ho` is `output × hidden`.
    pub fn from_parts(
        weights_ih: Array2<f64>,
        weights_ho: Array2<f64>,
        bias_h: Array1<f64>,
        bias_o: Array1<f64>,
        hidden_activation: ActivationKind,
        output_activation: ActivationKind,
    ) -> Result<Self> {
        let (hidden, input) = weights_ih.dim();
        let (output, hidden2) = weights_ho.dim();
        check_sizes(input, hidden, output)?;
        if hidden2 != hidden {
            return Err(Error::DimensionMismatch {
                expected: hidden,
                actual: hidden2,
                context: "weights_ho columns vs hidden size",
            });
        }
        if bias_h.len() != hidden {
            return Err(Error::DimensionMismatch { expected: hidden, actual: bias_h.len(), context: "bias_h length" });
        }
        if bias_o.len() != output {
            return Err(Error::DimensionMismatch { expected: output, actual: bias_o.len(), context: "bias_o length" });
        }
        hidden_activation.validate()?;
        output_activation.validate()?;
        let net = Mlp { weights_ih, weights_ho, bias_h, bias_o, hidden_activation, output_activation };
        if !net.params_finite() {
            return Err(Error::InvalidConfig("network weights must be finite".to_owned()));
        }
        Ok(net)
    }

    pub fn input_size(&self) -> usize {
        self.weights_ih.ncols()
    }

    pub fn hidden_size(&self) -> usize {
        self.weights_ih.nrows()
    }

    pub fn output_size(&self) -> usize {
        self.weights_ho.nrows()
    }

    pub fn weights_ih(&self) -> &Array2<f64> {
        &self.weights_ih
    }

    pub fn weights_ho(&self) -> &Array2<f64> {
        &self.weights_ho
    }

    pub fn bias_h(&self) -> &Array1<f64> {
        &self.bias_h
    }

    pub fn bias_o(&self) -> &Array1<f64> {
        &self.bias_o
    }

    pub fn hidden_activation(&self) -> ActivationKind {
        self.hidden_activation
    }

    pub fn output_activation(&self) -> ActivationKind {
        self.output_activation
    }

    pub fn param_count(&self) -> usize {
        self.weights_ih.len() + self.weights_ho.len() + self.bias_h.len() + self.bias_o.len()
    }

    /// Copies the parameters into a [`Params`] value.
    pub fn params(&self) -> Params {
        Params {
            weights_ih: self.weights_ih.clone(),
            weights_ho: self.weights_ho.clone(),
            bias_h: self.bias_h.clone(),
            bias_o: self.bias_o.clone(),
        }
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights_ih
            .iter_mut()
            .chain(self.weights_ho.iter_mut())
            .chain(self.bias_h.iter_mut())
            .chain(self.bias_o.iter_mut())
    }

    /// Sets the `k`-th parameter in [`Params`] flat order.
    pub fn set_param(&mut self, k: usize, value: f64) {
        *self.params_mut().nth(k).expect("parameter index out of range") = value;
    }

    pub fn param(&self, k: usize) -> f64 {
        self.params().get(k)
    }

    fn params_finite(&self) -> bool {
        self.weights_ih
            .iter()
            .chain(self.weights_ho.iter())
            .chain(self.bias_h.iter())
            .chain(self.bias_o.iter())
            .all(|w| w.is_finite())
    }

    /// Adds `delta` to every parameter.
    pub fn apply_delta(&mut self, delta: &Params) -> Result<()> {
        if !delta.matches(self) {
            return Err(Error::InvalidDimension("weight delta does not match network shape".to_owned()));
        }
        self.weights_ih += &delta.weights_ih;
        self.weights_ho += &delta.weights_ho;
        self.bias_h += &delta.bias_h;
        self.bias_o += &delta.bias_o;
        Ok(())
    }

    /// Output activations for a single input vector.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_size() {
            return Err(Error::DimensionMismatch {
                expected: self.input_size(),
                actual: input.len(),
                context: "network input",
            });
        }
        let hidden: Vec<f64> = self
            .weights_ih
            .rows()
            .into_iter()
            .zip(self.bias_h.iter())
            .map(|(row, &b)| self.hidden_activation.apply(dot(row.as_slice().unwrap(), input) + b))
            .collect();
        Ok(self
            .weights_ho
            .rows()
            .into_iter()
            .zip(self.bias_o.iter())
            .map(|(row, &b)| self.output_activation.apply(dot(row.as_slice().unwrap(), &hidden) + b))
            .collect())
    }
}

fn check_sizes(input: usize, hidden: usize, output: usize) -> Result<()> {
    if input == 0 || hidden == 0 || output == 0 {
        return Err(Error::InvalidDimension(format!("layer sizes must be positive, got {input}-{hidden}-{output}")));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Index of the largest score; ties resolve to the lowest index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}
