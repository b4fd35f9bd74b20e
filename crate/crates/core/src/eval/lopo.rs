use rayon::prelude::*;

use super::confusion::ConfusionMatrix;
use crate::dataset::{Dataset, SplitPlan};
use crate::error::{Error, Result};
use crate::fusion::{train_two_stage, FusionConfig, FusionModel};

/// Stage-1 and stage-2 confusion matrices of a model on a set of samples.
pub fn evaluate_both(
    model: &FusionModel,
    ds: &Dataset,
    indices: &[usize],
) -> Result<(ConfusionMatrix, ConfusionMatrix)> {
    if indices.is_empty() {
        return Err(Error::EmptySet("no samples to evaluate"));
    }
    let c = ds.num_classes();
    let (mut cm1, mut cm2) = (ConfusionMatrix::new(c), ConfusionMatrix::new(c));
    for &i in indices {
        let s = &ds.samples()[i];
        let (p1, p2) = model.predict_both(&s.features)?;
        cm1.record(s.label, p1)?;
        cm2.record(s.label, p2)?;
    }
    Ok((cm1, cm2))
}

/// Result of holding out one person.
#[derive(Debug, Clone)]
pub struct FoldResult {
    pub person: u32,
    pub seed: u64,
    pub plan: SplitPlan,
    pub model: FusionModel,
    pub stage1: ConfusionMatrix,
    pub stage2: ConfusionMatrix,
}

/// Seed of the fold that holds out `person`.
pub fn fold_seed(root: u64, person: u32) -> u64 {
    crate::mix_seed(root, u64::from(person))
}

/// Trains and evaluates the two-stage model with `person` held out.
pub fn run_fold(ds: &Dataset, person: u32, config: &FusionConfig) -> Result<FoldResult> {
    let seed = fold_seed(config.seed, person);
    let plan = SplitPlan::leave_one_person(ds, person, seed)?;
    let model = train_two_stage(&plan, ds, &config.with_seed(seed))?;
    let (stage1, stage2) = evaluate_both(&model, ds, &plan.d3)?;
    Ok(FoldResult { person, seed, plan, model, stage1, stage2 })
}

/// Leave-one-person-out over every person in `ds`, with up to `workers` folds
/// in flight. Folds come back ordered by person.
pub fn run_lopo_folds(ds: &Dataset, config: &FusionConfig, workers: usize) -> Result<Vec<FoldResult>> {
    let persons = ds.persons();
    if persons.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "leave-one-person-out needs at least 2 persons, found {}",
            persons.len()
        )));
    }
    let workers = workers.clamp(1, persons.len());
    if workers == 1 {
        return persons.iter().map(|&p| run_fold(ds, p, config)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    pool.install(|| persons.par_iter().map(|&p| run_fold(ds, p, config)).collect())
}

pub fn run_lopo(ds: &Dataset, config: &FusionConfig, workers: usize) -> Result<super::ComparisonReport> {
    super::ComparisonReport::from_folds(&run_lopo_folds(ds, config, workers)?)
}

/// Default worker count: one per person, capped at the available parallelism.
pub fn default_workers(persons: usize) -> usize {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    persons.min(cores).max(1)
}
