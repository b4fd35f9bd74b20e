use super::mlp::{Gradient, Mlp, Params};
use crate::error::{Error, Result};

/// RPROP hyperparameters. Defaults follow the usual FANN values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpropConfig {
    pub eta_plus: f64,
    pub eta_minus: f64,
    pub delta_init: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub max_epochs: usize,
}

impl Default for RpropConfig {
    fn default() -> Self {
        RpropConfig {
            eta_plus: 1.2,
            eta_minus: 0.5,
            delta_init: 0.1,
            delta_min: 1e-6,
            delta_max: 50.0,
            max_epochs: 300,
        }
    }
}

impl RpropConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.eta_plus > 1.0 && self.eta_plus.is_finite()) {
            return bad(format!("eta_plus must exceed 1, got {}", self.eta_plus));
        }
        if !(self.eta_minus > 0.0 && self.eta_minus < 1.0) {
            return bad(format!("eta_minus must lie in (0, 1), got {}", self.eta_minus));
        }
        if !(self.delta_min > 0.0 && self.delta_init > 0.0 && self.delta_max > 0.0) {
            return bad("step sizes must be positive".to_owned());
        }
        if !(self.delta_min <= self.delta_init && self.delta_init <= self.delta_max) || !self.delta_max.is_finite() {
            return bad(format!(
                "need delta_min <= delta_init <= delta_max, got {} / {} / {}",
                self.delta_min, self.delta_init, self.delta_max
            ));
        }
        Ok(())
    }
}

/// Per-parameter step sizes and the gradient remembered from the previous epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct RpropState {
    steps: Params,
    prev_grad: Params,
}

impl RpropState {
    pub fn new(net: &Mlp, config: &RpropConfig) -> Self {
        RpropState { steps: Params::filled_like(net, config.delta_init), prev_grad: Params::zeros_like(net) }
    }

    /// Builds a state from explicit step sizes and previous gradients.
    pub fn from_parts(steps: Params, prev_grad: Params) -> Result<Self> {
        if !steps.same_shape(&prev_grad) {
            return Err(Error::InvalidDimension("step and gradient shapes differ".to_owned()));
        }
        Ok(RpropState { steps, prev_grad })
    }

    pub fn steps(&self) -> &Params {
        &self.steps
    }

    pub fn prev_grad(&self) -> &Params {
        &self.prev_grad
    }

    /// One iRPROP- update.
    ///
    /// Returns the weight change to apply. Where the gradient changed sign, the
    /// step shrinks, no move is made and the stored gradient is reset to zero so
    /// the next epoch takes the neutral branch.
    pub fn step(&mut self, grad: &Gradient, config: &RpropConfig) -> Result<Params> {
        if !grad.same_shape(&self.steps) {
            return Err(Error::InvalidDimension("gradient shape does not match optimizer state".to_owned()));
        }
        let mut delta = grad.clone();
        for ((d, step), prev) in delta.iter_mut().zip(self.steps.iter_mut()).zip(self.prev_grad.iter_mut()) {
            let g = *d;
            let product = g * *prev;
            if product > 0.0 {
                *step = (*step * config.eta_plus).min(config.delta_max);
            } else if product < 0.0 {
                *step = (*step * config.eta_minus).max(config.delta_min);
                *prev = 0.0;
                *d = 0.0;
                continue;
            }
            *d = -sign(g) * *step;
            *prev = g;
        }
        Ok(delta)
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
