use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use stackfuse::dataset::{load_csv, load_idx_pairs, write_csv};
use stackfuse::eval::{default_workers, evaluate_both, fold_seed, run_lopo_folds, ComparisonReport, ConfusionMatrix};
use stackfuse::fusion::train_two_stage;
use stackfuse::synth::generate;
use stackfuse::textfmt::fmt_f64;
use stackfuse::{mix_seed, Dataset, FusionModel, SplitPlan};

use crate::config::{DatasetSource, ExperimentConfig, SplitMode, DEFAULT_FRACTIONS};
use crate::error::{output_error, CliError};

pub const MANIFEST_FILE: &str = "run.manifest";
pub const SPLIT_FILE: &str = "split.plan";
pub const MODEL_DIR: &str = "model";
pub const TRAIN_RESULTS: &str = "train.txt";
pub const REPORT_TEXT: &str = "report.txt";
pub const PERSONS_CSV: &str = "persons.csv";
pub const CLASSES_CSV: &str = "classes.csv";
pub const MNIST_RUNS_CSV: &str = "mnist_runs.csv";
pub const MNIST_SUMMARY: &str = "mnist_summary.txt";
pub const CORPUS_CSV: &str = "corpus.csv";

/// Where results go and whether to print them.
pub struct Output {
    pub dir: PathBuf,
    pub quiet: bool,
}

impl Output {
    fn say(&self, text: &str) {
        if !self.quiet {
            print!("{text}");
        }
    }

    fn progress(&self, text: &str) {
        if !self.quiet {
            eprintln!("{text}");
        }
    }

    fn path(&self, rel: impl AsRef<Path>) -> PathBuf {
        self.dir.join(rel)
    }

    fn mkdir(&self, rel: impl AsRef<Path>) -> Result<PathBuf, CliError> {
        let p = self.path(rel);
        fs::create_dir_all(&p).map_err(|e| output_error(format!("{}: {e}", p.display())))?;
        Ok(p)
    }

    fn write(&self, rel: impl AsRef<Path>, contents: &str) -> Result<(), CliError> {
        let p = self.path(rel);
        fs::write(&p, contents).map_err(|e| output_error(format!("{}: {e}", p.display())))
    }

    fn manifest(&self, command: &str, cfg: &ExperimentConfig, seeds: &str) -> Result<(), CliError> {
        let text = format!(
            "# stackfuse run manifest\n# command: {command}\n# version: {}\n# derived seeds: {seeds}\n{}",
            env!("CARGO_PKG_VERSION"),
            cfg.to_text()
        );
        self.write(MANIFEST_FILE, &text)
    }
}

pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset, CliError> {
    let ds = match &cfg.dataset {
        DatasetSource::Csv { path, schema } => load_csv(path, schema)?,
        DatasetSource::Idx { images, labels } => {
            let pairs: Vec<(&PathBuf, &PathBuf)> = images.iter().zip(labels).collect();
            load_idx_pairs(&pairs)?
        }
        DatasetSource::Synth(p) => generate(&p.spec(cfg.seed()))?,
    };
    Ok(ds)
}

fn plan_for(ds: &Dataset, split: SplitMode, seed: u64) -> Result<SplitPlan, CliError> {
    Ok(match split {
        SplitMode::Person(p) => SplitPlan::leave_one_person(ds, p, seed)?,
        SplitMode::Fractions(a, b, c) => SplitPlan::fractions(ds, (a, b, c), seed)?,
        SplitMode::Lopo => unreachable!("LOPO plans are built per fold"),
    })
}

fn plan_summary(plan: &SplitPlan) -> String {
    format!(
        "D1 {} + {}, D2 {} + {}, D3 {}",
        plan.d1_train.len(),
        plan.d1_test.len(),
        plan.d2_train.len(),
        plan.d2_test.len(),
        plan.d3.len()
    )
}

/// Writes the split plan(s) the config describes.
pub fn cmd_split(mut cfg: ExperimentConfig, out: &Output) -> Result<(), CliError> {
    let ds = load_dataset(&cfg)?;
    let split = cfg.split.ok_or_else(|| CliError::config("missing required key `split.mode`"))?;
    cfg.split = Some(split);
    out.mkdir("")?;
    if split == SplitMode::Lopo {
        out.mkdir("splits")?;
        let mut seeds = Vec::new();
        for p in ds.persons() {
            let seed = fold_seed(cfg.seed(), p);
            let plan = SplitPlan::leave_one_person(&ds, p, seed)?;
            out.write(format!("splits/person-{p}.plan"), &plan.to_text())?;
            out.say(&format!("person {p}: {}\n", plan_summary(&plan)));
            seeds.push(format!("{p}:{seed}"));
        }
        return out.manifest("split", &cfg, &seeds.join(","));
    }
    let plan = plan_for(&ds, split, cfg.seed())?;
    out.write(SPLIT_FILE, &plan.to_text())?;
    out.say(&format!("{}\n", plan_summary(&plan)));
    out.manifest("split", &cfg, &cfg.seed().to_string())
}

fn results_text(d3: usize, cm1: &ConfusionMatrix, cm2: &ConfusionMatrix) -> String {
    format!(
        "d3_samples = {d3}\nstage1_accuracy = {}\nstage2_accuracy = {}\n",
        fmt_f64(cm1.accuracy()),
        fmt_f64(cm2.accuracy())
    )
}

/// Trains both stages on one split and saves model, plan and manifest.
pub fn cmd_train(mut cfg: ExperimentConfig, out: &Output) -> Result<(), CliError> {
    let split =
        cfg.split.unwrap_or(SplitMode::Fractions(DEFAULT_FRACTIONS.0, DEFAULT_FRACTIONS.1, DEFAULT_FRACTIONS.2));
    if split == SplitMode::Lopo {
        return Err(CliError::config(
            "key `split.mode`: `train` needs `person` or `fractions`; use the `lopo` command for all persons",
        ));
    }
    cfg.split = Some(split);
    let ds = load_dataset(&cfg)?;
    let plan = plan_for(&ds, split, cfg.seed())?;
    out.progress(&format!("training on {}", plan_summary(&plan)));
    let model = train_two_stage(&plan, &ds, &cfg.fusion)?;
    let (cm1, cm2) = evaluate_both(&model, &ds, &plan.d3)?;

    out.mkdir("")?;
    out.write(SPLIT_FILE, &plan.to_text())?;
    model.save(&out.path(MODEL_DIR), Some(&format!("../{SPLIT_FILE}"))).map_err(output_error)?;
    let mut results = results_text(plan.d3.len(), &cm1, &cm2);
    let _ = writeln!(results, "net1_best_epoch = {}", model.net1.best_epoch);
    let _ = writeln!(results, "net2_best_epoch = {}", model.net2.best_epoch);
    out.write(TRAIN_RESULTS, &results)?;
    let (s1, s2) = cfg.fusion.stage_seeds();
    out.manifest("train", &cfg, &format!("split {}, stage1 {s1}, stage2 {s2}", cfg.seed()))?;
    out.say(&results);
    Ok(())
}

/// Evaluates a saved model on its recorded D3, or on every sample with `all`.
pub fn cmd_eval(cfg: ExperimentConfig, model_dir: &Path, all: bool, out: &Output) -> Result<(), CliError> {
    let (model, split_ref) = FusionModel::load(model_dir)?;
    let ds = load_dataset(&cfg)?;
    if ds.feature_len() != model.descriptor_len || ds.num_classes() != model.num_classes {
        return Err(CliError::data(format!(
            "model expects {} features and {} classes, dataset has {} and {}",
            model.descriptor_len,
            model.num_classes,
            ds.feature_len(),
            ds.num_classes()
        )));
    }
    let indices: Vec<usize> = match (&split_ref, all) {
        (Some(r), false) => {
            let plan = SplitPlan::load(&model_dir.join(r))?;
            plan.validate(&ds)?;
            plan.d3
        }
        _ => (0..ds.len()).collect(),
    };
    let (cm1, cm2) = evaluate_both(&model, &ds, &indices)?;
    let mut text = results_text(indices.len(), &cm1, &cm2);
    let _ = write!(
        text,
        "\nstage 1 confusion (rows true, columns predicted)\n{}\nstage 2 confusion\n{}",
        cm1.render(),
        cm2.render()
    );
    out.say(&text);
    Ok(())
}

/// Leave-one-person-out over every person; writes the comparison report.
pub fn cmd_lopo(mut cfg: ExperimentConfig, out: &Output) -> Result<(), CliError> {
    match cfg.split {
        None | Some(SplitMode::Lopo) => cfg.split = Some(SplitMode::Lopo),
        Some(_) => {
            return Err(CliError::config("key `split.mode`: the `lopo` command needs `lopo` (or no split.mode)"))
        }
    }
    let ds = load_dataset(&cfg)?;
    let persons = ds.persons();
    if persons.len() < 2 {
        return Err(CliError::data(format!(
            "leave-one-person-out needs person labels for at least 2 persons, found {}",
            persons.len()
        )));
    }
    let workers = cfg.workers.unwrap_or_else(|| default_workers(persons.len()));
    out.progress(&format!("{} folds on {workers} worker(s)", persons.len()));
    let folds = run_lopo_folds(&ds, &cfg.fusion, workers)?;
    let report = ComparisonReport::from_folds(&folds)?;

    out.mkdir("")?;
    let mut seeds = Vec::new();
    for f in &folds {
        let dir = format!("folds/person-{}", f.person);
        out.mkdir(&dir)?;
        out.write(format!("{dir}/{SPLIT_FILE}"), &f.plan.to_text())?;
        f.model
            .save(&out.path(format!("{dir}/{MODEL_DIR}")), Some(&format!("../{SPLIT_FILE}")))
            .map_err(output_error)?;
        seeds.push(format!("{}:{}", f.person, f.seed));
    }
    let text = report.to_text();
    out.write(REPORT_TEXT, &text)?;
    out.write(PERSONS_CSV, &report.persons_csv())?;
    out.write(CLASSES_CSV, &report.classes_csv())?;
    out.manifest("lopo", &cfg, &seeds.join(","))?;
    out.say(&text);
    Ok(())
}

/// Mean and sample variance (n - 1 denominator; 0 for a single value).
pub fn mean_variance(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() < 2 { 0.0 } else { v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0) };
    (mean, var)
}

/// Repeats the fraction protocol `runs` times with derived seeds.
pub fn cmd_mnist(mut cfg: ExperimentConfig, out: &Output) -> Result<(), CliError> {
    let (f1, f2, f3) = match cfg.split {
        None => DEFAULT_FRACTIONS,
        Some(SplitMode::Fractions(a, b, c)) => (a, b, c),
        Some(_) => {
            return Err(CliError::config("key `split.mode`: the `mnist` command needs `fractions`"));
        }
    };
    cfg.split = Some(SplitMode::Fractions(f1, f2, f3));
    let ds = load_dataset(&cfg)?;
    out.mkdir("runs")?;

    let mut csv = String::from("run,seed,stage1_error,stage2_error\n");
    let mut table = String::from("run                 seed  stage1_err  stage2_err\n");
    let (mut e1, mut e2, mut seeds) = (Vec::new(), Vec::new(), Vec::new());
    for run in 1..=cfg.runs {
        let seed = mix_seed(cfg.seed(), run as u64);
        let plan = SplitPlan::fractions(&ds, (f1, f2, f3), seed)?;
        let model = train_two_stage(&plan, &ds, &cfg.fusion.with_seed(seed))?;
        let (cm1, cm2) = evaluate_both(&model, &ds, &plan.d3)?;
        let (err1, err2) = (1.0 - cm1.accuracy(), 1.0 - cm2.accuracy());

        let dir = format!("runs/run-{run:02}");
        out.mkdir(&dir)?;
        out.write(format!("{dir}/{SPLIT_FILE}"), &plan.to_text())?;
        model.save(&out.path(format!("{dir}/{MODEL_DIR}")), Some(&format!("../{SPLIT_FILE}"))).map_err(output_error)?;

        let _ = writeln!(csv, "{run},{seed},{},{}", fmt_f64(err1), fmt_f64(err2));
        let row = format!("{run:>3}  {seed:>20}  {:>9.2}%  {:>9.2}%\n", 100.0 * err1, 100.0 * err2);
        out.progress(row.trim_end());
        table.push_str(&row);
        e1.push(err1);
        e2.push(err2);
        seeds.push(seed.to_string());
    }
    let (m1, v1) = mean_variance(&e1);
    let (m2, v2) = mean_variance(&e2);
    let summary = format!(
        "runs = {}\nstage1_error_mean = {}\nstage1_error_variance = {}\nstage2_error_mean = {}\n\
         stage2_error_variance = {}\n",
        cfg.runs,
        fmt_f64(m1),
        fmt_f64(v1),
        fmt_f64(m2),
        fmt_f64(v2)
    );
    let _ = write!(
        table,
        "mean                        {:>9.2}%  {:>9.2}%\nstd dev                     {:>9.2}%  {:>9.2}%\n",
        100.0 * m1,
        100.0 * m2,
        100.0 * v1.sqrt(),
        100.0 * v2.sqrt()
    );
    out.write(MNIST_RUNS_CSV, &csv)?;
    out.write(MNIST_SUMMARY, &summary)?;
    out.manifest("mnist", &cfg, &seeds.join(","))?;
    out.say(&table);
    Ok(())
}

/// Writes the configured synthetic corpus as CSV.
pub fn cmd_synth(cfg: ExperimentConfig, out: &Output) -> Result<(), CliError> {
    let DatasetSource::Synth(params) = &cfg.dataset else {
        return Err(CliError::config("key `dataset.source`: the `synth` command needs `synth`"));
    };
    let ds = generate(&params.spec(cfg.seed()))?;
    out.mkdir("")?;
    let path = out.path(CORPUS_CSV);
    write_csv(&ds, &path).map_err(output_error)?;
    out.manifest("synth", &cfg, &cfg.seed().to_string())?;
    out.say(&format!(
        "{} samples, {} features, {} classes, {} persons -> {}\n",
        ds.len(),
        ds.feature_len(),
        ds.num_classes(),
        ds.persons().len(),
        path.display()
    ));
    Ok(())
}
