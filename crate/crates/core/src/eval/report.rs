use std::fmt::Write as _;

use super::confusion::ConfusionMatrix;
use super::lopo::FoldResult;
use crate::error::{Error, Result};
use crate::textfmt::fmt_f64;

pub const PERSON_CSV_HEADER: &str = "person,stage1_acc,stage2_acc";
pub const CLASS_CSV_HEADER: &str = "class,delta_pp";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersonAccuracy {
    pub person: u32,
    pub stage1: f64,
    pub stage2: f64,
}

/// Stage-1 versus stage-2 outcome of a leave-one-person-out run.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// Ascending by person.
    pub per_person: Vec<PersonAccuracy>,
    /// Stage-2 minus stage-1 recognition rate per class, as a fraction.
    pub per_class_delta: Vec<f64>,
    /// Mean over persons of stage-2 minus stage-1 accuracy.
    pub overall_delta: f64,
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl ComparisonReport {
    /// Aggregates folds. A class's delta is averaged over the folds whose
    /// held-out person has samples of it; a class absent from every fold gets 0.
    pub fn from_folds(folds: &[FoldResult]) -> Result<Self> {
        let pairs: Vec<(u32, &ConfusionMatrix, &ConfusionMatrix)> =
            folds.iter().map(|f| (f.person, &f.stage1, &f.stage2)).collect();
        Self::from_matrices(&pairs)
    }

    pub fn from_matrices(folds: &[(u32, &ConfusionMatrix, &ConfusionMatrix)]) -> Result<Self> {
        let Some(&(_, first, _)) = folds.first() else {
            return Err(Error::EmptySet("no folds to report"));
        };
        let c = first.num_classes();
        if folds.iter().any(|(_, a, b)| a.num_classes() != c || b.num_classes() != c) {
            return Err(Error::InvalidDimension("folds disagree on the number of classes".to_owned()));
        }
        let mut per_person: Vec<PersonAccuracy> = folds
            .iter()
            .map(|(p, a, b)| PersonAccuracy { person: *p, stage1: a.accuracy(), stage2: b.accuracy() })
            .collect();
        per_person.sort_by_key(|p| p.person);
        if per_person.windows(2).any(|w| w[0].person == w[1].person) {
            return Err(Error::InvalidConfig("duplicate person in folds".to_owned()));
        }
        let per_class_delta = (0..c)
            .map(|k| {
                mean(
                    folds
                        .iter()
                        .filter(|(_, a, _)| a.row_sum(k) > 0)
                        .map(|(_, a, b)| b.recall(k).unwrap_or(0.0) - a.recall(k).unwrap_or(0.0)),
                )
                .unwrap_or(0.0)
            })
            .collect();
        Ok(Self::assemble(per_person, per_class_delta))
    }

    fn assemble(per_person: Vec<PersonAccuracy>, per_class_delta: Vec<f64>) -> Self {
        let overall_delta = mean(per_person.iter().map(|p| p.stage2 - p.stage1)).unwrap_or(0.0);
        ComparisonReport { per_person, per_class_delta, overall_delta }
    }

    pub fn persons(&self) -> Vec<u32> {
        self.per_person.iter().map(|p| p.person).collect()
    }

    pub fn median_stage1(&self) -> f64 {
        median(self.per_person.iter().map(|p| p.stage1).collect())
    }

    pub fn median_stage2(&self) -> f64 {
        median(self.per_person.iter().map(|p| p.stage2).collect())
    }

    /// Mean per-class delta over `classes`.
    pub fn mean_delta_over(&self, classes: &[usize]) -> f64 {
        mean(classes.iter().map(|&k| self.per_class_delta[k])).unwrap_or(0.0)
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Text => self.to_text(),
            ReportFormat::Csv => format!("{}\n{}", self.persons_csv(), self.classes_csv()),
        }
    }

    /// Persons as columns, stage 1 above stage 2, then the signed class deltas.
    pub fn to_text(&self) -> String {
        let mut header = vec!["person".to_owned()];
        let mut row1 = vec!["stage 1".to_owned()];
        let mut row2 = vec!["stage 2".to_owned()];
        for p in &self.per_person {
            header.push(p.person.to_string());
            row1.push(fmt_rate(p.stage1));
            row2.push(fmt_rate(p.stage2));
        }
        let mut out = String::from("Accuracy on the held-out person\n");
        push_table(&mut out, &[header, row1, row2]);

        let mut classes = vec!["class".to_owned()];
        let mut deltas = vec!["delta pp".to_owned()];
        for (k, &d) in self.per_class_delta.iter().enumerate() {
            classes.push(k.to_string());
            deltas.push(fmt_pp(d));
        }
        out.push_str("\nRecognition-rate change per class, stage 2 minus stage 1\n");
        push_table(&mut out, &[classes, deltas]);
        let _ = writeln!(out, "\nmean accuracy change: {} pp", fmt_pp(self.overall_delta));
        out
    }

    pub fn persons_csv(&self) -> String {
        let mut s = format!("{PERSON_CSV_HEADER}\n");
        for p in &self.per_person {
            let _ = writeln!(s, "{},{},{}", p.person, fmt_f64(p.stage1), fmt_f64(p.stage2));
        }
        s
    }

    pub fn classes_csv(&self) -> String {
        let mut s = format!("{CLASS_CSV_HEADER}\n");
        for (k, d) in self.per_class_delta.iter().enumerate() {
            let _ = writeln!(s, "{k},{}", fmt_f64(d * 100.0));
        }
        s
    }

    /// Inverse of [`persons_csv`](Self::persons_csv) plus [`classes_csv`](Self::classes_csv).
    pub fn from_csv(persons: &str, classes: &str) -> Result<Self> {
        let mut per_person = Vec::new();
        for fields in csv_rows(persons, PERSON_CSV_HEADER)? {
            let (row, f) = fields;
            if f.len() != 3 {
                return Err(csv_err(row, "expected person,stage1_acc,stage2_acc"));
            }
            per_person.push(PersonAccuracy {
                person: f[0].parse().map_err(|_| csv_err(row, "bad person id"))?,
                stage1: parse_rate(&f[1], row)?,
                stage2: parse_rate(&f[2], row)?,
            });
        }
        let mut per_class_delta = Vec::new();
        for (row, f) in csv_rows(classes, CLASS_CSV_HEADER)? {
            if f.len() != 2 {
                return Err(csv_err(row, "expected class,delta_pp"));
            }
            let k: usize = f[0].parse().map_err(|_| csv_err(row, "bad class index"))?;
            if k != per_class_delta.len() {
                return Err(csv_err(row, "classes must be listed in order from 0"));
            }
            let pp: f64 = f[1].parse().map_err(|_| csv_err(row, "bad delta"))?;
            per_class_delta.push(pp / 100.0);
        }
        if per_person.windows(2).any(|w| w[0].person >= w[1].person) {
            return Err(Error::InvalidConfig("persons must be strictly ascending".to_owned()));
        }
        Ok(Self::assemble(per_person, per_class_delta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Two decimals without the leading zero: `.81`, `1.00`.
pub fn fmt_rate(x: f64) -> String {
    let s = format!("{x:.2}");
    match s.strip_prefix("0.") {
        Some(rest) => format!(".{rest}"),
        None => s,
    }
}

/// Fraction as signed percentage points with one decimal: `+4.8`, `-2.0`.
pub fn fmt_pp(delta: f64) -> String {
    let s = format!("{:+.1}", delta * 100.0);
    if s == "-0.0" {
        "+0.0".to_owned()
    } else {
        s
    }
}

fn push_table(out: &mut String, rows: &[Vec<String>]) {
    let label_w = rows.iter().map(|r| r[0].len()).max().unwrap_or(0);
    let cell_w = rows.iter().flat_map(|r| r[1..].iter().map(String::len)).max().unwrap_or(0);
    for r in rows {
        let _ = write!(out, "{:<label_w$}", r[0]);
        for cell in &r[1..] {
            let _ = write!(out, "  {cell:>cell_w$}");
        }
        out.push('\n');
    }
}

fn csv_err(row: usize, message: &str) -> Error {
    Error::Parse { path: "<report csv>".into(), row, message: message.to_owned() }
}

fn csv_rows(text: &str, header: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let found = reader.headers().map_err(|e| csv_err(1, &e.to_string()))?.iter().collect::<Vec<_>>().join(",");
    if found != header {
        return Err(csv_err(1, &format!("expected header `{header}`, found `{found}`")));
    }
    reader
        .records()
        .enumerate()
        .map(|(i, r)| {
            let r = r.map_err(|e| csv_err(i + 2, &e.to_string()))?;
            Ok((i + 2, r.iter().map(str::to_owned).collect()))
        })
        .collect()
}

fn parse_rate(s: &str, row: usize) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(v) if (0.0..=1.0).contains(&v) => Ok(v),
        _ => Err(csv_err(row, &format!("`{s}` is not a rate in [0, 1]"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn report(rates: &[(u32, f64, f64)], deltas: &[f64]) -> ComparisonReport {
        ComparisonReport::assemble(
            rates.iter().map(|&(person, stage1, stage2)| PersonAccuracy { person, stage1, stage2 }).collect(),
            deltas.to_vec(),
        )
    }

    #[test]
    fn rate_and_pp_formatting() {
        assert_eq!(fmt_rate(0.81), ".81");
        assert_eq!(fmt_rate(0.4304), ".43");
        assert_eq!(fmt_rate(0.275), ".28");
        assert_eq!(fmt_rate(0.996), "1.00");
        assert_eq!(fmt_rate(1.0), "1.00");
        assert_eq!(fmt_rate(0.0), ".00");
        assert_eq!(fmt_pp(0.048), "+4.8");
        assert_eq!(fmt_pp(-0.021), "-2.1");
        assert_eq!(fmt_pp(-0.0001), "+0.0");
    }

    #[test]
    fn single_person_table() {
        let text = report(&[(4, 0.81, 0.83)], &[]).to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1..4], ["person     4", "stage 1  .81", "stage 2  .83"]);
    }

    #[test]
    fn text_layout() {
        let r = report(&[(1, 0.81, 0.83), (2, 0.43, 0.44), (3, 0.68, 0.67)], &[0.01, -0.02]);
        let text = r.to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "person     1    2    3");
        assert_eq!(lines[2], "stage 1  .81  .43  .68");
        assert_eq!(lines[3], "stage 2  .83  .44  .67");
        assert_eq!(lines[6], "class        0     1");
        assert_eq!(lines[7], "delta pp  +1.0  -2.0");
        assert!(lines[9].contains("+0.7"));
    }

    #[test]
    fn aggregation_from_matrices() {
        // Person 1 has every class, person 2 lacks class 2.
        let a1 = ConfusionMatrix::from_rows(&[vec![2, 0, 0], vec![1, 1, 0], vec![0, 0, 4]]).unwrap();
        let b1 = ConfusionMatrix::from_rows(&[vec![2, 0, 0], vec![0, 2, 0], vec![0, 1, 3]]).unwrap();
        let a2 = ConfusionMatrix::from_rows(&[vec![1, 1, 0], vec![0, 2, 0], vec![0, 0, 0]]).unwrap();
        let b2 = ConfusionMatrix::from_rows(&[vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 0]]).unwrap();
        let r = ComparisonReport::from_matrices(&[(2, &a2, &b2), (1, &a1, &b1)]).unwrap();
        assert_eq!(r.persons(), vec![1, 2]);
        assert_eq!(r.per_person[0].stage1, 7.0 / 8.0);
        assert_eq!(r.per_person[1].stage2, 1.0);
        assert_eq!(r.per_class_delta, vec![0.25, 0.25, -0.25]);
        assert_eq!(r.overall_delta, 0.5 * ((7.0 / 8.0 - 7.0 / 8.0) + (1.0 - 0.75)));
    }

    #[test]
    fn medians() {
        let r = report(&[(1, 0.1, 0.5), (2, 0.3, 0.2), (3, 0.2, 0.9), (4, 0.4, 0.1)], &[]);
        assert!((r.median_stage1() - 0.25).abs() < 1e-15);
        assert!((r.median_stage2() - 0.35).abs() < 1e-15);
    }

    #[test]
    fn csv_rejects_wrong_header() {
        assert!(ComparisonReport::from_csv("who,a,b\n", "class,delta_pp\n").is_err());
        assert!(ComparisonReport::from_csv("person,stage1_acc,stage2_acc\n1,2.0,0.5\n", "class,delta_pp\n").is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip(
            rates in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..16),
            deltas in prop::collection::vec(-1.0f64..=1.0, 1..12),
        ) {
            let rows: Vec<(u32, f64, f64)> = rates
                .iter()
                .enumerate()
                .map(|(i, &(a, b))| (i as u32 + 1, a, b))
                .collect();
            let r = report(&rows, &deltas);
            let back = ComparisonReport::from_csv(&r.persons_csv(), &r.classes_csv()).unwrap();
            prop_assert_eq!(&back.per_person, &r.per_person);
            prop_assert_eq!(back.overall_delta, r.overall_delta);
            prop_assert_eq!(back.per_class_delta.len(), deltas.len());
            for (x, y) in back.per_class_delta.iter().zip(&deltas) {
                prop_assert!((x - y).abs() <= 1e-15);
            }
        }
    }
}
