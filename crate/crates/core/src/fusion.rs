//! Two-stage classifier with early fusion of class scores.
//!
//! Stage 1 is a one-against-all MLP trained on D1. Every D2 sample is then
//! extended with stage 1's output activations (`[features ‖ scores]`, length
//! `n + C`) and stage 2 is trained on those vectors. D3 is never touched.

use std::fmt::Write as _;
use std::path::Path;

use crate::dataset::{Dataset, SplitPlan};
use crate::error::{Error, Result};
use crate::nn::{argmax, load_mlp, save_mlp, train, ActivationKind, EpochRecord, Mlp, RpropConfig, TrainedModel};
use crate::textfmt::fmt_f64;

pub const MANIFEST_HEADER: &str = "stackfuse-fusion v1";
pub const MANIFEST_FILE: &str = "model.manifest";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionConfig {
    pub hidden1: usize,
    pub hidden2: usize,
    /// Used for hidden and output layers of both networks.
    pub activation: ActivationKind,
    pub rprop: RpropConfig,
    /// Stage 1 is initialized from `seed`, stage 2 from `seed + 1`.
    pub seed: u64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            hidden1: 40,
            hidden2: 40,
            activation: ActivationKind::default(),
            rprop: RpropConfig::default(),
            seed: 0,
        }
    }
}

impl FusionConfig {
    /// The smaller 25/20 hidden-neuron setup.
    pub fn small() -> Self {
        FusionConfig { hidden1: 25, hidden2: 20, ..Self::default() }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        FusionConfig { seed, ..self }
    }

    pub fn stage_seeds(&self) -> (u64, u64) {
        (self.seed, self.seed.wrapping_add(1))
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden1 == 0 || self.hidden2 == 0 {
            return Err(Error::InvalidConfig(format!(
                "hidden sizes must be positive, got {}/{}",
                self.hidden1, self.hidden2
            )));
        }
        self.activation.validate()?;
        self.rprop.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionModel {
    pub net1: TrainedModel,
    pub net2: TrainedModel,
    pub descriptor_len: usize,
    pub num_classes: usize,
    /// Root seed the stages were initialized from.
    pub seed: u64,
}

/// Writes `[features ‖ net1(features)]` into `out`.
fn augment_into(net1: &Mlp, features: &[f64], out: &mut [f64]) -> Result<()> {
    let scores = net1.forward(features)?;
    out[..features.len()].copy_from_slice(features);
    out[features.len()..].copy_from_slice(&scores);
    Ok(())
}

/// The stage-2 input for one descriptor: the descriptor followed by all of
/// stage 1's output activations.
pub fn augment(net1: &Mlp, features: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; features.len() + net1.output_size()];
    augment_into(net1, features, &mut out)?;
    Ok(out)
}

pub fn train_two_stage(plan: &SplitPlan, ds: &Dataset, config: &FusionConfig) -> Result<FusionModel> {
    config.validate()?;
    plan.validate(ds)?;
    for (name, set) in [
        ("d1_train", &plan.d1_train),
        ("d1_test", &plan.d1_test),
        ("d2_train", &plan.d2_train),
        ("d2_test", &plan.d2_test),
        ("d3", &plan.d3),
    ] {
        if set.is_empty() {
            return Err(Error::InsufficientData(format!("split set {name} is empty")));
        }
    }

    let n = ds.feature_len();
    let c = ds.num_classes();
    let act = (config.activation, config.activation);
    let (seed1, seed2) = config.stage_seeds();

    let net1 = {
        let init = Mlp::init(n, config.hidden1, c, act, seed1)?;
        train(init, &ds.batch(&plan.d1_train)?, &ds.batch(&plan.d1_test)?, &config.rprop)?
    };

    let widened = |indices: &[usize]| {
        let mut failure = None;
        let batch = ds.batch_with(indices, n + c, |s, row| {
            if let Err(e) = augment_into(&net1.net, &s.features, row) {
                failure.get_or_insert(e);
            }
        })?;
        failure.map_or(Ok(batch), Err)
    };
    let net2 = {
        let init = Mlp::init(n + c, config.hidden2, c, act, seed2)?;
        train(init, &widened(&plan.d2_train)?, &widened(&plan.d2_test)?, &config.rprop)?
    };

    Ok(FusionModel { net1, net2, descriptor_len: n, num_classes: c, seed: config.seed })
}

impl FusionModel {
    fn check_features(&self, features: &[f64]) -> Result<()> {
        if features.len() != self.descriptor_len {
            return Err(Error::DimensionMismatch {
                expected: self.descriptor_len,
                actual: features.len(),
                context: "descriptor length",
            });
        }
        Ok(())
    }

    /// Stage-1 class (argmax, lowest index on ties) and its score vector.
    pub fn predict_stage1(&self, features: &[f64]) -> Result<(usize, Vec<f64>)> {
        self.check_features(features)?;
        let scores = self.net1.net.forward(features)?;
        Ok((argmax(&scores), scores))
    }

    /// Stage-2 class and scores, computed on the fused input.
    pub fn predict_stage2(&self, features: &[f64]) -> Result<(usize, Vec<f64>)> {
        self.check_features(features)?;
        let scores = self.net2.net.forward(&augment(&self.net1.net, features)?)?;
        Ok((argmax(&scores), scores))
    }

    /// Both stages' classes for one descriptor, sharing the stage-1 pass.
    pub fn predict_both(&self, features: &[f64]) -> Result<(usize, usize)> {
        self.check_features(features)?;
        let fused = augment(&self.net1.net, features)?;
        let stage1 = argmax(&fused[self.descriptor_len..]);
        let stage2 = argmax(&self.net2.net.forward(&fused)?);
        Ok((stage1, stage2))
    }

    pub fn validate(&self) -> Result<()> {
        let (n, c) = (self.descriptor_len, self.num_classes);
        let ok = self.net1.net.input_size() == n
            && self.net1.net.output_size() == c
            && self.net2.net.input_size() == n + c
            && self.net2.net.output_size() == c;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidDimension(format!(
                "network sizes {}->{} / {}->{} do not fit n={n}, C={c}",
                self.net1.net.input_size(),
                self.net1.net.output_size(),
                self.net2.net.input_size(),
                self.net2.net.output_size()
            )))
        }
    }

    /// Writes `net1.mlp`, `net2.mlp`, their training histories and a manifest
    /// into `dir`. `split_ref` names the split plan file the model was trained on.
    pub fn save(&self, dir: &Path, split_ref: Option<&str>) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        save_mlp(&self.net1.net, &dir.join("net1.mlp"))?;
        save_mlp(&self.net2.net, &dir.join("net2.mlp"))?;
        write_history(&self.net1.history, &dir.join("net1.history.csv"))?;
        write_history(&self.net2.history, &dir.join("net2.history.csv"))?;

        let (s1, s2) = (self.seed, self.seed.wrapping_add(1));
        let mut m = String::new();
        writeln!(m, "{MANIFEST_HEADER}").unwrap();
        writeln!(m, "descriptor_len {}", self.descriptor_len).unwrap();
        writeln!(m, "num_classes {}", self.num_classes).unwrap();
        writeln!(m, "hidden1 {}", self.net1.net.hidden_size()).unwrap();
        writeln!(m, "hidden2 {}", self.net2.net.hidden_size()).unwrap();
        writeln!(m, "seed {}", self.seed).unwrap();
        writeln!(m, "stage_seeds {s1} {s2}").unwrap();
        for (name, t) in [("net1", &self.net1), ("net2", &self.net2)] {
            writeln!(m, "{name}_best_epoch {}", t.best_epoch).unwrap();
            writeln!(m, "{name}_best_monitor_mse {}", fmt_f64(t.best_monitor_mse)).unwrap();
        }
        writeln!(m, "split_plan {}", split_ref.unwrap_or("none")).unwrap();
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, m).map_err(|e| Error::io(&path, e))
    }

    /// Loads a model directory written by [`FusionModel::save`]. Returns the
    /// model and the recorded split plan reference, if any.
    pub fn load(dir: &Path) -> Result<(Self, Option<String>)> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut lines = text.lines();
        if lines.next() != Some(MANIFEST_HEADER) {
            return Err(Error::format(&path, format!("missing `{MANIFEST_HEADER}` header")));
        }
        let mut fields = std::collections::HashMap::new();
        for (i, line) in lines.enumerate() {
            let (k, v) = line.split_once(' ').ok_or_else(|| Error::Parse {
                path: path.clone(),
                row: i + 2,
                message: format!("expected `key value`, found `{line}`"),
            })?;
            fields.insert(k.to_owned(), v.to_owned());
        }
        let get = |k: &str| -> Result<&String> {
            fields.get(k).ok_or_else(|| Error::format(&path, format!("missing key `{k}`")))
        };
        fn num<T: std::str::FromStr>(path: &Path, k: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::format(path, format!("bad value `{v}` for `{k}`")))
        }

        let stage = |name: &str| -> Result<TrainedModel> {
            Ok(TrainedModel {
                net: load_mlp(&dir.join(format!("{name}.mlp")))?,
                best_epoch: num(&path, name, get(&format!("{name}_best_epoch"))?)?,
                best_monitor_mse: num(&path, name, get(&format!("{name}_best_monitor_mse"))?)?,
                history: read_history(&dir.join(format!("{name}.history.csv")))?,
            })
        };
        let net1 = stage("net1")?;
        let net2 = stage("net2")?;
        let model = FusionModel {
            net1,
            net2,
            descriptor_len: num(&path, "descriptor_len", get("descriptor_len")?)?,
            num_classes: num(&path, "num_classes", get("num_classes")?)?,
            seed: num(&path, "seed", get("seed")?)?,
        };
        model.validate().map_err(|e| Error::format(&path, e.to_string()))?;
        let split = fields.get("split_plan").filter(|s| s.as_str() != "none").cloned();
        Ok((model, split))
    }
}

fn write_history(history: &[EpochRecord], path: &Path) -> Result<()> {
    let mut s = String::from("epoch,train_mse,monitor_mse\n");
    for r in history {
        writeln!(s, "{},{},{}", r.epoch, fmt_f64(r.train_mse), fmt_f64(r.monitor_mse)).unwrap();
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

fn read_history(path: &Path) -> Result<Vec<EpochRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, line)| {
            let bad =
                || Error::Parse { path: path.to_path_buf(), row: i + 1, message: format!("bad history row `{line}`") };
            let mut parts = line.split(',');
            let mut next = || parts.next().ok_or_else(bad);
            let epoch = next()?.parse().map_err(|_| bad())?;
            let train_mse = next()?.parse().map_err(|_| bad())?;
            let monitor_mse = next()?.parse().map_err(|_| bad())?;
            Ok(EpochRecord { epoch, train_mse, monitor_mse })
        })
        .collect()
}
