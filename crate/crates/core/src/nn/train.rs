use super::backprop::{loss_and_gradient, mse, Batch};
use super::mlp::Mlp;
use super::rprop::{RpropConfig, RpropState};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// MSE on the training set of the network as it stands after this epoch.
    pub train_mse: f64,
    pub monitor_mse: f64,
}

/// Outcome of [`train`]: the checkpoint with the lowest monitor MSE.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub net: Mlp,
    pub best_epoch: usize,
    pub best_monitor_mse: f64,
    pub history: Vec<EpochRecord>,
}

/// Full-batch iRPROP- training for exactly `config.max_epochs` epochs.
///
/// After every epoch the monitor MSE is measured and the network with the lowest
/// value is kept (earliest epoch on ties). With `max_epochs == 0` the initial
/// network is returned as epoch 0 and the history is empty.
pub fn train(net: Mlp, train_set: &Batch, monitor_set: &Batch, config: &RpropConfig) -> Result<TrainedModel> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::EmptySet("training set"));
    }
    if monitor_set.is_empty() {
        return Err(Error::EmptySet("monitor set"));
    }

    let mut net = net;
    let mut state = RpropState::new(&net, config);
    let mut history: Vec<EpochRecord> = Vec::with_capacity(config.max_epochs);
    let mut best = TrainedModel {
        best_monitor_mse: mse(&net, monitor_set)?,
        net: net.clone(),
        best_epoch: 0,
        history: Vec::new(),
    };
    if config.max_epochs == 0 {
        // Still reject a training set that does not fit the network.
        mse(&net, train_set)?;
    }

    for epoch in 1..=config.max_epochs {
        let (train_mse, grad) = loss_and_gradient(&net, train_set)?;
        // That pass evaluated the weights left by the previous epoch.
        if let Some(prev) = history.last_mut() {
            prev.train_mse = train_mse;
        }
        let delta = state.step(&grad, config)?;
        net.apply_delta(&delta)?;

        let monitor_mse = mse(&net, monitor_set)?;
        history.push(EpochRecord { epoch, train_mse: f64::NAN, monitor_mse });
        if epoch == 1 || monitor_mse < best.best_monitor_mse {
            best.net = net.clone();
            best.best_epoch = epoch;
            best.best_monitor_mse = monitor_mse;
        }
    }
    if let Some(last) = history.last_mut() {
        last.train_mse = mse(&net, train_set)?;
    }

    best.history = history;
    Ok(best)
}
