//! Seeded generator for a gesture-like corpus with deliberately confusable
//! classes and per-person variation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{Dataset, Sample};
use crate::error::{Error, Result};

/// Two classes whose centers are pulled toward their midpoint so that their
/// distance shrinks by `multiplier`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusablePair {
    pub a: usize,
    pub b: usize,
    pub multiplier: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub num_classes: usize,
    pub feature_len: usize,
    pub persons: usize,
    pub samples_per_class_per_person: usize,
    pub class_centers: Vec<Vec<f64>>,
    pub within_class_sigma: f64,
    pub person_shift_sigma: f64,
    pub confusable_pairs: Vec<ConfusablePair>,
    pub seed: u64,
}

impl SynthSpec {
    pub const HARD_CENTER_SCALE: f64 = 0.6;
    pub const HARD_WITHIN_SIGMA: f64 = 1.0;
    pub const HARD_PERSON_SIGMA: f64 = 0.3;

    /// Class centers with i.i.d. `N(0, scale²)` coordinates, drawn from `seed`.
    pub fn random_centers(num_classes: usize, feature_len: usize, scale: f64, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(crate::mix_seed(seed, 0xC3));
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        (0..num_classes).map(|_| (0..feature_len).map(|_| scale * normal.sample(&mut rng)).collect()).collect()
    }

    /// Ten classes, 32 features, 15 persons with 200 samples per class each.
    /// Classes 1/8 and 4/6 are confusable at multiplier 0.25.
    pub fn hard(seed: u64) -> Self {
        let (c, m) = (10, 32);
        SynthSpec {
            num_classes: c,
            feature_len: m,
            persons: 15,
            samples_per_class_per_person: 200,
            class_centers: Self::random_centers(c, m, Self::HARD_CENTER_SCALE, seed),
            within_class_sigma: Self::HARD_WITHIN_SIGMA,
            person_shift_sigma: Self::HARD_PERSON_SIGMA,
            confusable_pairs: vec![
                ConfusablePair { a: 1, b: 8, multiplier: 0.25 },
                ConfusablePair { a: 4, b: 6, multiplier: 0.25 },
            ],
            seed,
        }
    }

    /// Classes that belong to at least one confusable pair, ascending.
    pub fn confusable_classes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.confusable_pairs.iter().flat_map(|p| [p.a, p.b]).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(format!("synth spec: {m}")));
        if self.num_classes == 0 || self.feature_len == 0 || self.persons == 0 || self.samples_per_class_per_person == 0
        {
            return bad("all counts must be at least 1".to_owned());
        }
        if self.persons > u32::MAX as usize {
            return bad("too many persons".to_owned());
        }
        if self.class_centers.len() != self.num_classes
            || self.class_centers.iter().any(|c| c.len() != self.feature_len)
        {
            return bad(format!("need {} centers of length {}", self.num_classes, self.feature_len));
        }
        if self.class_centers.iter().flatten().any(|v| !v.is_finite()) {
            return bad("centers must be finite".to_owned());
        }
        for (name, s) in
            [("within_class_sigma", self.within_class_sigma), ("person_shift_sigma", self.person_shift_sigma)]
        {
            if !(s.is_finite() && s >= 0.0) {
                return bad(format!("{name} must be a nonnegative real, got {s}"));
            }
        }
        for p in &self.confusable_pairs {
            if p.a == p.b || p.a >= self.num_classes || p.b >= self.num_classes {
                return bad(format!("pair ({}, {}) must name two distinct classes", p.a, p.b));
            }
            if !(p.multiplier > 0.0 && p.multiplier <= 1.0) {
                return bad(format!("pair multiplier {} must lie in (0, 1]", p.multiplier));
            }
        }
        Ok(())
    }

    /// Centers after applying the confusable-pair pulls, in pair order.
    pub fn effective_centers(&self) -> Vec<Vec<f64>> {
        let mut centers = self.class_centers.clone();
        for p in &self.confusable_pairs {
            let (ca, cb) = (centers[p.a].clone(), centers[p.b].clone());
            for j in 0..self.feature_len {
                let mid = 0.5 * (ca[j] + cb[j]);
                centers[p.a][j] = mid + p.multiplier * (ca[j] - mid);
                centers[p.b][j] = mid + p.multiplier * (cb[j] - mid);
            }
        }
        centers
    }
}

/// Draws the corpus. Samples are ordered by person, then class; persons are
/// numbered from 1.
pub fn generate(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let centers = spec.effective_centers();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let m = spec.feature_len;

    let mut samples = Vec::with_capacity(spec.persons * spec.num_classes * spec.samples_per_class_per_person);
    for person in 1..=spec.persons as u32 {
        let offset: Vec<f64> = (0..m).map(|_| spec.person_shift_sigma * normal.sample(&mut rng)).collect();
        for (label, center) in centers.iter().enumerate() {
            for _ in 0..spec.samples_per_class_per_person {
                let features =
                    (0..m).map(|j| center[j] + offset[j] + spec.within_class_sigma * normal.sample(&mut rng)).collect();
                samples.push(Sample { features, label, person: Some(person) });
            }
        }
    }
    Dataset::new(format!("synth-{}", spec.seed), samples, Some(spec.num_classes))
}
