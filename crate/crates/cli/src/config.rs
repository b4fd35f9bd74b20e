//! Flat `key = value` experiment configs.
//!
//! Lines starting with `#` and blank lines are ignored. Keys are either
//! top-level (`seed`, `runs`, `workers`) or carry one of the section prefixes
//! `dataset.`, `split.`, `net.`, `rprop.`. Relative paths resolve against the
//! config file's directory. [`ExperimentConfig::to_text`] echoes every
//! resolved value in the same format, so a run manifest is itself a config.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use stackfuse::dataset::CsvSchema;
use stackfuse::synth::{ConfusablePair, SynthSpec};
use stackfuse::{ActivationKind, FusionConfig, RpropConfig};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub classes: usize,
    pub features: usize,
    pub persons: usize,
    pub samples_per_class: usize,
    pub center_scale: f64,
    pub within_sigma: f64,
    pub person_sigma: f64,
    pub pairs: Vec<ConfusablePair>,
}

impl SynthParams {
    /// Parameters of [`SynthSpec::hard`].
    pub fn hard() -> Self {
        let spec = SynthSpec::hard(0);
        SynthParams {
            classes: spec.num_classes,
            features: spec.feature_len,
            persons: spec.persons,
            samples_per_class: spec.samples_per_class_per_person,
            center_scale: SynthSpec::HARD_CENTER_SCALE,
            within_sigma: spec.within_class_sigma,
            person_sigma: spec.person_shift_sigma,
            pairs: spec.confusable_pairs,
        }
    }

    pub fn spec(&self, seed: u64) -> SynthSpec {
        SynthSpec {
            num_classes: self.classes,
            feature_len: self.features,
            persons: self.persons,
            samples_per_class_per_person: self.samples_per_class,
            class_centers: SynthSpec::random_centers(self.classes, self.features, self.center_scale, seed),
            within_class_sigma: self.within_sigma,
            person_shift_sigma: self.person_sigma,
            confusable_pairs: self.pairs.clone(),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Csv { path: PathBuf, schema: CsvSchema },
    Idx { images: Vec<PathBuf>, labels: Vec<PathBuf> },
    Synth(SynthParams),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitMode {
    Person(u32),
    Lopo,
    Fractions(f64, f64, f64),
}

pub const DEFAULT_RUNS: usize = 15;
pub const DEFAULT_FRACTIONS: (f64, f64, f64) = (0.4, 0.4, 0.2);

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    /// `None` when the config leaves the protocol to the command.
    pub split: Option<SplitMode>,
    /// Holds the root seed.
    pub fusion: FusionConfig,
    /// Repetitions of the fraction protocol in `mnist`.
    pub runs: usize,
    /// LOPO worker threads; `None` picks one per person up to the core count.
    pub workers: Option<usize>,
}

/// Raw entries with the line each came from.
struct Entries {
    map: BTreeMap<String, (usize, String)>,
    base: PathBuf,
}

impl Entries {
    fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::config(format!("line {}: expected `key = value`, found `{line}`", i + 1)));
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(CliError::config(format!("line {}: empty key", i + 1)));
            }
            if map.insert(key.to_owned(), (i + 1, value.trim().to_owned())).is_some() {
                return Err(CliError::config(format!("key `{key}` set twice (line {})", i + 1)));
            }
        }
        Ok(Entries { map, base: base.to_path_buf() })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::config(format!("key `{key}` (line {line}): invalid value `{v}`"))),
        }
    }

    fn or<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    fn required<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, CliError> {
        self.parsed(key)?.ok_or_else(|| CliError::config(format!("missing required key `{key}`")))
    }

    fn path(&self, value: &str) -> PathBuf {
        let p = Path::new(value);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn paths(&mut self, key: &str) -> Result<Vec<PathBuf>, CliError> {
        let (_, v) = self.take(key).ok_or_else(|| CliError::config(format!("missing required key `{key}`")))?;
        Ok(v.split(',').map(|s| self.path(s.trim())).collect())
    }

    fn finish(self) -> Result<(), CliError> {
        match self.map.into_iter().next() {
            None => Ok(()),
            Some((key, (line, _))) => {
                Err(CliError::config(format!("unknown or inapplicable key `{key}` (line {line})")))
            }
        }
    }
}

fn invalid(key: &str, message: impl std::fmt::Display) -> CliError {
    CliError::config(format!("key `{key}`: {message}"))
}

/// `auto` or a value.
fn auto<T: std::str::FromStr>(e: &mut Entries, key: &str) -> Result<Option<T>, CliError> {
    match e.take(key) {
        None => Ok(None),
        Some((_, v)) if v == "auto" => Ok(None),
        Some((line, v)) => {
            v.parse().map(Some).map_err(|_| CliError::config(format!("key `{key}` (line {line}): invalid value `{v}`")))
        }
    }
}

fn parse_fractions(key: &str, v: &str) -> Result<(f64, f64, f64), CliError> {
    let parts: Vec<f64> = v
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| invalid(key, format!("`{v}` is not a list of numbers")))?;
    match parts[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => Err(invalid(key, "expected three comma-separated fractions")),
    }
}

fn parse_pairs(key: &str, v: &str) -> Result<Vec<ConfusablePair>, CliError> {
    if v == "none" {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|item| {
            let f: Vec<&str> = item.trim().split(':').collect();
            let bad = || invalid(key, format!("`{item}` is not `a:b:multiplier`"));
            match f[..] {
                [a, b, m] => Ok(ConfusablePair {
                    a: a.parse().map_err(|_| bad())?,
                    b: b.parse().map_err(|_| bad())?,
                    multiplier: m.parse().map_err(|_| bad())?,
                }),
                _ => Err(bad()),
            }
        })
        .collect()
}

impl ExperimentConfig {
    pub fn load(path: &Path, seed_override: Option<u64>) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, seed_override)
    }

    /// Parses config text. `seed_override` replaces (or supplies) `seed`.
    pub fn parse(text: &str, base: &Path, seed_override: Option<u64>) -> Result<Self, CliError> {
        let mut e = Entries::parse(text, base)?;
        let seed: Option<u64> = e.parsed("seed")?;
        let seed = seed_override
            .or(seed)
            .ok_or_else(|| CliError::config("missing required key `seed` (no implicit random seed)"))?;
        let runs = e.or("runs", DEFAULT_RUNS)?;
        if runs == 0 {
            return Err(invalid("runs", "must be at least 1"));
        }
        let workers: Option<usize> = auto(&mut e, "workers")?;
        if workers == Some(0) {
            return Err(invalid("workers", "must be at least 1 or `auto`"));
        }

        let dataset = Self::parse_dataset(&mut e)?;
        let split = match e.take("split.mode") {
            None => None,
            Some((_, m)) => Some(match m.as_str() {
                "person" => SplitMode::Person(e.required("split.person")?),
                "lopo" => SplitMode::Lopo,
                "fractions" => match e.take("split.fractions") {
                    None => SplitMode::Fractions(DEFAULT_FRACTIONS.0, DEFAULT_FRACTIONS.1, DEFAULT_FRACTIONS.2),
                    Some((_, v)) => {
                        let (a, b, c) = parse_fractions("split.fractions", &v)?;
                        SplitMode::Fractions(a, b, c)
                    }
                },
                other => return Err(invalid("split.mode", format!("`{other}` is not person, lopo or fractions"))),
            }),
        };
        if let Some(SplitMode::Fractions(a, b, c)) = split {
            let ok = [a, b, c].iter().all(|f| f.is_finite() && *f > 0.0) && (a + b + c - 1.0).abs() <= 1e-9;
            if !ok {
                return Err(invalid("split.fractions", "need three positive fractions summing to 1"));
            }
        }

        let defaults = FusionConfig::default();
        let activation = match e.take("net.activation") {
            None => "symmetric_sigmoid".to_owned(),
            Some((_, v)) => v,
        };
        let steepness = e.or("net.steepness", defaults.activation.steepness())?;
        let activation = ActivationKind::from_name(&activation, steepness)
            .ok_or_else(|| invalid("net.activation", format!("unknown activation `{activation}`")))?;
        activation.validate().map_err(|err| invalid("net.steepness", err))?;
        let d = RpropConfig::default();
        let rprop = RpropConfig {
            eta_plus: e.or("rprop.eta_plus", d.eta_plus)?,
            eta_minus: e.or("rprop.eta_minus", d.eta_minus)?,
            delta_init: e.or("rprop.delta_init", d.delta_init)?,
            delta_min: e.or("rprop.delta_min", d.delta_min)?,
            delta_max: e.or("rprop.delta_max", d.delta_max)?,
            max_epochs: e.or("rprop.max_epochs", d.max_epochs)?,
        };
        rprop.validate().map_err(|err| invalid("rprop", err))?;
        if rprop.max_epochs == 0 {
            return Err(invalid("rprop.max_epochs", "must be at least 1"));
        }
        let fusion = FusionConfig {
            hidden1: e.or("net.hidden1", defaults.hidden1)?,
            hidden2: e.or("net.hidden2", defaults.hidden2)?,
            activation,
            rprop,
            seed,
        };
        fusion.validate().map_err(|err| invalid("net", err))?;
        e.finish()?;
        Ok(ExperimentConfig { dataset, split, fusion, runs, workers })
    }

    fn parse_dataset(e: &mut Entries) -> Result<DatasetSource, CliError> {
        let (_, source) =
            e.take("dataset.source").ok_or_else(|| CliError::config("missing required key `dataset.source`"))?;
        match source.as_str() {
            "csv" => {
                let (_, path) =
                    e.take("dataset.path").ok_or_else(|| CliError::config("missing required key `dataset.path`"))?;
                let path = e.path(&path);
                let features: usize = e.required("dataset.features")?;
                let label_col = e.or("dataset.label_column", features)?;
                let person_col = match e.take("dataset.person_column") {
                    None => None,
                    Some((_, v)) if v == "none" => None,
                    Some((_, v)) => {
                        Some(v.parse().map_err(|_| invalid("dataset.person_column", format!("invalid value `{v}`")))?)
                    }
                };
                let has_header = match e.take("dataset.header") {
                    None => None,
                    Some((_, v)) => match v.as_str() {
                        "auto" => None,
                        "yes" | "true" => Some(true),
                        "no" | "false" => Some(false),
                        _ => return Err(invalid("dataset.header", format!("`{v}` is not auto, yes or no"))),
                    },
                };
                let num_classes = auto(e, "dataset.classes")?;
                Ok(DatasetSource::Csv {
                    path,
                    schema: CsvSchema { feature_count: features, label_col, person_col, num_classes, has_header },
                })
            }
            "idx" => {
                let images = e.paths("dataset.images")?;
                let labels = e.paths("dataset.labels")?;
                if images.len() != labels.len() {
                    return Err(invalid("dataset.labels", "needs one label file per image file"));
                }
                Ok(DatasetSource::Idx { images, labels })
            }
            "synth" => {
                let preset = match e.take("dataset.synth.preset") {
                    None => "hard".to_owned(),
                    Some((_, v)) => v,
                };
                if preset != "hard" {
                    return Err(invalid("dataset.synth.preset", format!("unknown preset `{preset}`")));
                }
                let h = SynthParams::hard();
                let pairs = match e.take("dataset.synth.pairs") {
                    None => h.pairs.clone(),
                    Some((_, v)) => parse_pairs("dataset.synth.pairs", &v)?,
                };
                let p = SynthParams {
                    classes: e.or("dataset.synth.classes", h.classes)?,
                    features: e.or("dataset.synth.features", h.features)?,
                    persons: e.or("dataset.synth.persons", h.persons)?,
                    samples_per_class: e.or("dataset.synth.samples_per_class", h.samples_per_class)?,
                    center_scale: e.or("dataset.synth.center_scale", h.center_scale)?,
                    within_sigma: e.or("dataset.synth.within_sigma", h.within_sigma)?,
                    person_sigma: e.or("dataset.synth.person_sigma", h.person_sigma)?,
                    pairs,
                };
                if !(p.center_scale.is_finite() && p.center_scale >= 0.0) {
                    return Err(invalid("dataset.synth.center_scale", "must be a nonnegative real"));
                }
                p.spec(0).validate().map_err(|err| invalid("dataset.synth", err))?;
                Ok(DatasetSource::Synth(p))
            }
            other => Err(invalid("dataset.source", format!("`{other}` is not csv, idx or synth"))),
        }
    }

    pub fn seed(&self) -> u64 {
        self.fusion.seed
    }

    /// Every resolved value, in config syntax.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("seed", self.seed().to_string());
        kv("runs", self.runs.to_string());
        kv("workers", self.workers.map_or("auto".to_owned(), |w| w.to_string()));
        match &self.dataset {
            DatasetSource::Csv { path, schema } => {
                kv("dataset.source", "csv".to_owned());
                kv("dataset.path", path.display().to_string());
                kv("dataset.features", schema.feature_count.to_string());
                kv("dataset.label_column", schema.label_col.to_string());
                kv("dataset.person_column", schema.person_col.map_or("none".to_owned(), |p| p.to_string()));
                kv(
                    "dataset.header",
                    match schema.has_header {
                        None => "auto",
                        Some(true) => "yes",
                        Some(false) => "no",
                    }
                    .to_owned(),
                );
                kv("dataset.classes", schema.num_classes.map_or("auto".to_owned(), |c| c.to_string()));
            }
            DatasetSource::Idx { images, labels } => {
                let join = |v: &[PathBuf]| v.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(",");
                kv("dataset.source", "idx".to_owned());
                kv("dataset.images", join(images));
                kv("dataset.labels", join(labels));
            }
            DatasetSource::Synth(p) => {
                kv("dataset.source", "synth".to_owned());
                kv("dataset.synth.preset", "hard".to_owned());
                kv("dataset.synth.classes", p.classes.to_string());
                kv("dataset.synth.features", p.features.to_string());
                kv("dataset.synth.persons", p.persons.to_string());
                kv("dataset.synth.samples_per_class", p.samples_per_class.to_string());
                kv("dataset.synth.center_scale", p.center_scale.to_string());
                kv("dataset.synth.within_sigma", p.within_sigma.to_string());
                kv("dataset.synth.person_sigma", p.person_sigma.to_string());
                let pairs = if p.pairs.is_empty() {
                    "none".to_owned()
                } else {
                    p.pairs.iter().map(|q| format!("{}:{}:{}", q.a, q.b, q.multiplier)).collect::<Vec<_>>().join(",")
                };
                kv("dataset.synth.pairs", pairs);
            }
        }
        match self.split {
            None => {}
            Some(SplitMode::Person(p)) => {
                kv("split.mode", "person".to_owned());
                kv("split.person", p.to_string());
            }
            Some(SplitMode::Lopo) => kv("split.mode", "lopo".to_owned()),
            Some(SplitMode::Fractions(a, b, c)) => {
                kv("split.mode", "fractions".to_owned());
                kv("split.fractions", format!("{a},{b},{c}"));
            }
        }
        let f = &self.fusion;
        kv("net.hidden1", f.hidden1.to_string());
        kv("net.hidden2", f.hidden2.to_string());
        kv("net.activation", f.activation.name().to_owned());
        kv("net.steepness", f.activation.steepness().to_string());
        let r = &f.rprop;
        kv("rprop.eta_plus", r.eta_plus.to_string());
        kv("rprop.eta_minus", r.eta_minus.to_string());
        kv("rprop.delta_init", r.delta_init.to_string());
        kv("rprop.delta_min", r.delta_min.to_string());
        kv("rprop.delta_max", r.delta_max.to_string());
        kv("rprop.max_epochs", r.max_epochs.to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SYNTH: &str = "seed = 7\ndataset.source = synth\nsplit.mode = lopo\n";

    fn parse(text: &str) -> Result<ExperimentConfig, CliError> {
        ExperimentConfig::parse(text, Path::new("/cfg"), None)
    }

    #[test]
    fn defaults_fill_in() {
        let c = parse(SYNTH).unwrap();
        assert_eq!(c.seed(), 7);
        assert_eq!(c.runs, 15);
        assert_eq!(c.fusion.hidden1, 40);
        assert_eq!(c.fusion.rprop, RpropConfig::default());
        assert_eq!(c.split, Some(SplitMode::Lopo));
        let c = parse("seed=1\ndataset.source=synth\nsplit.mode=fractions\n").unwrap();
        assert_eq!(c.split, Some(SplitMode::Fractions(0.4, 0.4, 0.2)));
        assert_eq!(parse("seed=1\ndataset.source=synth\n").unwrap().split, None);
        assert_eq!(c.dataset, DatasetSource::Synth(SynthParams::hard()));
    }

    #[test]
    fn echo_round_trips() {
        let texts = [
            SYNTH.to_owned(),
            "seed=1\ndataset.source=csv\ndataset.path=data/x.csv\ndataset.features=3\ndataset.person_column=4\n\
             split.mode=person\nsplit.person=2\nnet.hidden1=5\nrprop.max_epochs=12\nrprop.eta_plus=1.25\n"
                .to_owned(),
            "seed=1\ndataset.source=idx\ndataset.images=a,b\ndataset.labels=c,d\nsplit.mode=fractions\n\
             split.fractions=0.5,0.3,0.2\nworkers=3\n"
                .to_owned(),
            format!("{SYNTH}dataset.synth.pairs=none\ndataset.synth.persons=3\nnet.steepness=0.25\n"),
            format!("{SYNTH}dataset.synth.pairs=1:2:0.5,3:4:1\n"),
        ];
        for t in texts {
            let c = parse(&t).unwrap();
            let echoed = c.to_text();
            assert_eq!(parse(&echoed).unwrap(), c, "{echoed}");
        }
    }

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let c = parse("seed=1\ndataset.source=csv\ndataset.path=d/x.csv\ndataset.features=2\n").unwrap();
        let DatasetSource::Csv { path, .. } = c.dataset else { panic!() };
        assert_eq!(path, Path::new("/cfg/d/x.csv"));
    }

    #[test]
    fn seed_is_required_unless_overridden() {
        let text = "dataset.source = synth\n";
        let err = parse(text).unwrap_err();
        assert!(err.to_string().contains("`seed`"));
        let c = ExperimentConfig::parse(text, Path::new("."), Some(99)).unwrap();
        assert_eq!(c.seed(), 99);
        let c = ExperimentConfig::parse(SYNTH, Path::new("."), Some(99)).unwrap();
        assert_eq!(c.seed(), 99);
    }

    #[test]
    fn diagnostics_name_the_key() {
        for (text, key) in [
            (format!("{SYNTH}net.hidden1 = lots\n"), "net.hidden1"),
            (format!("{SYNTH}rprop.max_epoch = 3\n"), "rprop.max_epoch"),
            ("seed = x\n".to_owned(), "seed"),
            (format!("{SYNTH}dataset.synth.pairs = 1-8\n"), "dataset.synth.pairs"),
            (
                "seed=1\ndataset.source=synth\nsplit.mode=fractions\nsplit.fractions=0.5,0.5,0.5\n".to_owned(),
                "split.fractions",
            ),
            (format!("{SYNTH}net.steepness = -1\n"), "net.steepness"),
            ("seed=1\ndataset.source=tape\n".to_owned(), "dataset.source"),
        ] {
            let err = parse(&text).unwrap_err();
            assert_eq!(err.exit_code(), 2);
            assert!(err.to_string().contains(key), "`{err}` should name {key}");
        }
    }

    #[test]
    fn malformed_lines() {
        assert!(parse("seed 1\n").unwrap_err().to_string().contains("line 1"));
        assert!(parse("seed=1\nseed=2\n").unwrap_err().to_string().contains("set twice"));
    }

    #[test]
    fn split_person_requires_id() {
        let err = parse("seed=1\ndataset.source=synth\nsplit.mode=person\n").unwrap_err();
        assert!(err.to_string().contains("split.person"));
    }
}
