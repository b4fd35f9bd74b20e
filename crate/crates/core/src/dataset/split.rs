use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Dataset;
use crate::error::{Error, Result};

pub const SPLIT_HEADER: &str = "stackfuse-split v1";

/// Minimum number of samples outside the held-out person.
const MIN_REMAINING: usize = 20;

/// Partition of a dataset into the two training sets D1 and D2, each with a 9:1
/// train/monitor split, and the generalization set D3.
///
/// Index sets are stored in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub d1_train: Vec<usize>,
    pub d1_test: Vec<usize>,
    pub d2_train: Vec<usize>,
    pub d2_test: Vec<usize>,
    pub d3: Vec<usize>,
    pub held_out_person: Option<u32>,
    pub seed: u64,
}

impl SplitPlan {
    /// D3 is every sample of `person`. The rest is shuffled and halved into D1 and
    /// D2 (D1 takes the odd sample), then each half is split 9:1.
    pub fn leave_one_person(ds: &Dataset, person: u32, seed: u64) -> Result<Self> {
        let (d3, rest): (Vec<usize>, Vec<usize>) = (0..ds.len()).partition(|&i| ds.samples()[i].person == Some(person));
        if d3.is_empty() {
            return Err(Error::MissingSubject(person));
        }
        if rest.len() < MIN_REMAINING {
            return Err(Error::InsufficientData(format!(
                "{} samples remain after holding out person {person}, need at least {MIN_REMAINING}",
                rest.len()
            )));
        }
        let mut rest = rest;
        rest.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let d2 = rest.split_off(rest.len().div_ceil(2));
        Ok(Self::assemble(rest, d2, d3, Some(person), seed))
    }

    /// Shuffles all samples and cuts them into D1, D2 and D3 by the given
    /// fractions (rounded to the nearest count; D3 takes the remainder).
    pub fn fractions(ds: &Dataset, fractions: (f64, f64, f64), seed: u64) -> Result<Self> {
        let (f1, f2, f3) = fractions;
        if [f1, f2, f3].iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::InvalidFraction(format!("each fraction must be positive, got ({f1}, {f2}, {f3})")));
        }
        if (f1 + f2 + f3 - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidFraction(format!("fractions must sum to 1, got {}", f1 + f2 + f3)));
        }
        let n = ds.len();
        let n1 = (f1 * n as f64).round() as usize;
        let n2 = (f2 * n as f64).round() as usize;
        if n1 == 0 || n2 == 0 || n1 + n2 >= n {
            return Err(Error::InsufficientData(format!(
                "{n} samples cannot be split into three nonempty sets by ({f1}, {f2}, {f3})"
            )));
        }
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let d3 = all.split_off(n1 + n2);
        let d2 = all.split_off(n1);
        Ok(Self::assemble(all, d2, d3, None, seed))
    }

    fn assemble(d1: Vec<usize>, d2: Vec<usize>, d3: Vec<usize>, held_out_person: Option<u32>, seed: u64) -> Self {
        // Sets arrive shuffled, so taking the leading tenth is a random 9:1 split.
        let nested = |mut set: Vec<usize>| {
            let test_len = (set.len() + 5) / 10;
            let mut train = set.split_off(test_len);
            set.sort_unstable();
            train.sort_unstable();
            (train, set)
        };
        let (d1_train, d1_test) = nested(d1);
        let (d2_train, d2_test) = nested(d2);
        let mut d3 = d3;
        d3.sort_unstable();
        SplitPlan { d1_train, d1_test, d2_train, d2_test, d3, held_out_person, seed }
    }

    pub fn d1_len(&self) -> usize {
        self.d1_train.len() + self.d1_test.len()
    }

    pub fn d2_len(&self) -> usize {
        self.d2_train.len() + self.d2_test.len()
    }

    /// Indices used for training either stage (everything except D3).
    pub fn trainable(&self) -> impl Iterator<Item = &usize> {
        self.d1_train.iter().chain(&self.d1_test).chain(&self.d2_train).chain(&self.d2_test)
    }

    fn sets(&self) -> [(&'static str, &Vec<usize>); 5] {
        [
            ("d1_train", &self.d1_train),
            ("d1_test", &self.d1_test),
            ("d2_train", &self.d2_train),
            ("d2_test", &self.d2_test),
            ("d3", &self.d3),
        ]
    }

    /// Checks every structural invariant of the plan against `ds`.
    pub fn validate(&self, ds: &Dataset) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(format!("split plan: {m}")));
        let mut seen = HashSet::with_capacity(ds.len());
        for (name, set) in self.sets() {
            for &i in set {
                if i >= ds.len() {
                    return bad(format!("{name} index {i} out of range"));
                }
                if !seen.insert(i) {
                    return bad(format!("index {i} appears twice"));
                }
            }
        }
        if seen.len() != ds.len() {
            return bad(format!("covers {} of {} samples", seen.len(), ds.len()));
        }
        if let Some(p) = self.held_out_person {
            if self.d3.iter().any(|&i| ds.samples()[i].person != Some(p)) {
                return bad(format!("d3 contains samples not from person {p}"));
            }
            if self.trainable().any(|&i| ds.samples()[i].person == Some(p)) {
                return bad(format!("person {p} appears outside d3"));
            }
            if self.d1_len().abs_diff(self.d2_len()) > 1 {
                return bad(format!("unequal halves {} / {}", self.d1_len(), self.d2_len()));
            }
        }
        for (name, len, test) in [("d1", self.d1_len(), self.d1_test.len()), ("d2", self.d2_len(), self.d2_test.len())]
        {
            if test != (len + 5) / 10 {
                return bad(format!("{name} monitor split {test} of {len} is not 9:1"));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{SPLIT_HEADER}").unwrap();
        writeln!(s, "seed {}", self.seed).unwrap();
        match self.held_out_person {
            Some(p) => writeln!(s, "held_out_person {p}").unwrap(),
            None => writeln!(s, "held_out_person none").unwrap(),
        }
        for (name, set) in self.sets() {
            write!(s, "{name} {}", set.len()).unwrap();
            for i in set {
                write!(s, " {i}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    /// Parses the output of [`SplitPlan::to_text`]. `path` only labels errors.
    pub fn from_text(text: &str, path: &Path) -> Result<Self> {
        let err = |row: usize, message: String| Error::Parse { path: path.to_path_buf(), row, message };
        let lines: Vec<&str> = text.lines().collect();
        if lines.len() != 8 {
            return Err(Error::format(path, format!("expected 8 lines, found {}", lines.len())));
        }
        if lines[0] != SPLIT_HEADER {
            return Err(err(1, format!("expected `{SPLIT_HEADER}`")));
        }
        let seed = lines[1]
            .strip_prefix("seed ")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| err(2, "bad seed line".to_owned()))?;
        let held_out_person = match lines[2].strip_prefix("held_out_person ") {
            Some("none") => None,
            Some(v) => Some(v.parse().map_err(|_| err(3, format!("bad person `{v}`")))?),
            None => return Err(err(3, "expected held_out_person".to_owned())),
        };
        let names = ["d1_train", "d1_test", "d2_train", "d2_test", "d3"];
        let mut sets = Vec::with_capacity(5);
        for (k, name) in names.iter().enumerate() {
            let row = k + 4;
            let mut tokens = lines[row - 1].split_whitespace();
            if tokens.next() != Some(name) {
                return Err(err(row, format!("expected `{name}`")));
            }
            let count: usize =
                tokens.next().and_then(|t| t.parse().ok()).ok_or_else(|| err(row, "missing count".to_owned()))?;
            let set: Vec<usize> =
                tokens.map(|t| t.parse().map_err(|_| err(row, format!("bad index `{t}`")))).collect::<Result<_>>()?;
            if set.len() != count {
                return Err(err(row, format!("declared {count} indices, found {}", set.len())));
            }
            sets.push(set);
        }
        let mut sets = sets.into_iter();
        Ok(SplitPlan {
            d1_train: sets.next().unwrap(),
            d1_test: sets.next().unwrap(),
            d2_train: sets.next().unwrap(),
            d2_test: sets.next().unwrap(),
            d3: sets.next().unwrap(),
            held_out_person,
            seed,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, path)
    }
}
