//! Robustness arithmetic: accuracy, corruption error (CE), mean corruption
//! error (mCE) and AUROC.
//!
//! CE for corruption `c` is `Σ_s E[c,s] / Σ_s E_ref[c,s]` over severities 1–5,
//! with the reference errors coming from a fixed baseline model. mCE is the
//! unweighted mean of the 15 CE values. Both are fractions here; displays
//! multiply by 100.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

pub const SEVERITIES: std::ops::RangeInclusive<u8> = 1..=5;

/// The 15 benchmark corruptions with their category.
pub const CORRUPTIONS: [(&str, &str); 15] = [
    ("gaussian_noise", "noise"),
    ("shot_noise", "noise"),
    ("impulse_noise", "noise"),
    ("defocus_blur", "blur"),
    ("glass_blur", "blur"),
    ("motion_blur", "blur"),
    ("zoom_blur", "blur"),
    ("snow", "weather"),
    ("frost", "weather"),
    ("fog", "weather"),
    ("brightness", "weather"),
    ("contrast", "digital"),
    ("elastic_transform", "digital"),
    ("pixelate", "digital"),
    ("jpeg_compression", "digital"),
];

pub fn corruption_category(name: &str) -> Option<&'static str> {
    CORRUPTIONS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, cat)| *cat)
}

/// Error rates keyed by `(corruption, severity)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CorruptionErrorTable {
    entries: BTreeMap<(String, u8), f64>,
}

impl CorruptionErrorTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one entry. Duplicates, severities outside 1–5 and rates outside
    /// `[0, 1]` are format errors.
    pub fn insert(&mut self, corruption: &str, severity: u8, error: f64) -> Result<()> {
        if !SEVERITIES.contains(&severity) {
            return Err(Error::Format(format!(
                "{corruption}: severity {severity} outside 1-5"
            )));
        }
        if !(0.0..=1.0).contains(&error) {
            return Err(Error::Format(format!(
                "{corruption}/{severity}: error rate {error} outside [0, 1]"
            )));
        }
        match self.entries.entry((corruption.to_owned(), severity)) {
            std::collections::btree_map::Entry::Occupied(_) => Err(Error::Format(format!(
                "duplicate entry for {corruption}/{severity}"
            ))),
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(error);
                Ok(())
            }
        }
    }

    /// Fills all five severities of one corruption.
    pub fn insert_all(&mut self, corruption: &str, errors: [f64; 5]) -> Result<()> {
        for (s, e) in SEVERITIES.zip(errors) {
            self.insert(corruption, s, e)?;
        }
        Ok(())
    }

    pub fn get(&self, corruption: &str, severity: u8) -> Option<f64> {
        self.entries.get(&(corruption.to_owned(), severity)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct corruption names, sorted.
    pub fn corruptions(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.entries.keys().map(|(n, _)| n.as_str()).collect();
        names.dedup();
        names
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u8, f64)> {
        self.entries.iter().map(|((n, s), e)| (n.as_str(), *s, *e))
    }

    /// Sum of the error over severities 1–5; every severity must be present.
    pub fn severity_sum(&self, corruption: &str) -> Result<f64> {
        let mut missing = Vec::new();
        let mut total = 0.0;
        for s in SEVERITIES {
            match self.get(corruption, s) {
                Some(e) => total += e,
                None => missing.push(s),
            }
        }
        if missing.is_empty() {
            Ok(total)
        } else {
            Err(Error::MissingData(format!(
                "{corruption}: severities {missing:?} missing"
            )))
        }
    }
}

pub fn corruption_error(
    model: &CorruptionErrorTable,
    reference: &CorruptionErrorTable,
    corruption: &str,
) -> Result<f64> {
    let num = model.severity_sum(corruption)?;
    let den = reference.severity_sum(corruption)?;
    if den == 0.0 {
        return Err(Error::DegenerateReference(format!(
            "{corruption}: reference errors sum to zero"
        )));
    }
    Ok(num / den)
}

/// Mean CE over an explicit list of corruptions.
pub fn mce_over(
    model: &CorruptionErrorTable,
    reference: &CorruptionErrorTable,
    corruptions: &[&str],
) -> Result<f64> {
    if corruptions.is_empty() {
        return Err(Error::invalid("no corruptions to average"));
    }
    let total = corruptions
        .iter()
        .map(|c| corruption_error(model, reference, c))
        .sum::<Result<f64>>()?;
    Ok(total / corruptions.len() as f64)
}

/// Mean CE over the 15 benchmark corruptions.
pub fn mce(model: &CorruptionErrorTable, reference: &CorruptionErrorTable) -> Result<f64> {
    let names: Vec<&str> = CORRUPTIONS.iter().map(|(n, _)| *n).collect();
    for table in [model, reference] {
        let missing: Vec<&str> = names
            .iter()
            .copied()
            .filter(|n| table.severity_sum(n).is_err())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingData(format!(
                "corruptions missing: {}",
                missing.join(", ")
            )));
        }
    }
    mce_over(model, reference, &names)
}

/// Fraction of positions where prediction equals truth.
pub fn accuracy(predicted: &[i64], truth: &[i64]) -> Result<f64> {
    if predicted.is_empty() || predicted.len() != truth.len() {
        return Err(Error::invalid(format!(
            "accuracy needs equal nonempty lists, got {} and {}",
            predicted.len(),
            truth.len()
        )));
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / predicted.len() as f64)
}

/// In-distribution and out-of-distribution detector scores. Higher means
/// more in-distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    in_distribution: Vec<f64>,
    ood: Vec<f64>,
}

impl ScoreSet {
    pub fn new(in_distribution: Vec<f64>, ood: Vec<f64>) -> Result<Self> {
        if in_distribution.is_empty() || ood.is_empty() {
            return Err(Error::invalid("score lists must be nonempty"));
        }
        if in_distribution.iter().chain(&ood).any(|s| !s.is_finite()) {
            return Err(Error::invalid("scores must be finite"));
        }
        Ok(Self {
            in_distribution,
            ood,
        })
    }

    pub fn in_distribution(&self) -> &[f64] {
        &self.in_distribution
    }

    pub fn ood(&self) -> &[f64] {
        &self.ood
    }

    /// Swaps the roles of the two lists.
    pub fn swapped(&self) -> ScoreSet {
        ScoreSet {
            in_distribution: self.ood.clone(),
            ood: self.in_distribution.clone(),
        }
    }
}

/// `(score, is_in_distribution)` sorted ascending by score.
fn pooled(scores: &ScoreSet) -> Vec<(f64, bool)> {
    let mut all: Vec<(f64, bool)> = scores
        .in_distribution
        .iter()
        .map(|&s| (s, true))
        .chain(scores.ood.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    all
}

/// Runs of equal scores in a sorted pool, as `(start, end)` index ranges.
fn tie_groups(sorted: &[(f64, bool)]) -> Vec<(usize, usize)> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i].0 != sorted[start].0 {
            groups.push((start, i));
            start = i;
        }
    }
    groups
}

/// AUROC as the Mann–Whitney statistic: the chance that a random
/// in-distribution score beats a random OOD score, ties counting one half.
pub fn auroc(scores: &ScoreSet) -> f64 {
    let sorted = pooled(scores);
    let n_id = scores.in_distribution.len() as f64;
    let n_ood = scores.ood.len() as f64;
    let mut twice_rank_sum = 0u128;
    for (start, end) in tie_groups(&sorted) {
        let twice_midrank = (start + 1 + end) as u128;
        let positives = sorted[start..end].iter().filter(|(_, id)| *id).count() as u128;
        twice_rank_sum += twice_midrank * positives;
    }
    let n1 = scores.in_distribution.len() as u128;
    let twice_u = twice_rank_sum - n1 * (n1 + 1);
    twice_u as f64 / (2.0 * n_id * n_ood)
}

/// ROC curve points `(fpr, tpr)` from the strictest threshold down, starting
/// at `(0, 0)` and ending at `(1, 1)`.
pub fn roc_curve(scores: &ScoreSet) -> Vec<(f64, f64)> {
    roc_counts(scores)
        .into_iter()
        .map(|(fp, tp)| {
            (
                fp as f64 / scores.ood.len() as f64,
                tp as f64 / scores.in_distribution.len() as f64,
            )
        })
        .collect()
}

fn roc_counts(scores: &ScoreSet) -> Vec<(u64, u64)> {
    let sorted = pooled(scores);
    let mut points = vec![(0u64, 0u64)];
    let (mut fp, mut tp) = (0u64, 0u64);
    for (start, end) in tie_groups(&sorted).into_iter().rev() {
        for (_, id) in &sorted[start..end] {
            if *id {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        points.push((fp, tp));
    }
    points
}

/// AUROC by trapezoidal integration of the ROC curve. Agrees with [`auroc`].
pub fn auroc_trapezoid(scores: &ScoreSet) -> f64 {
    let points = roc_counts(scores);
    let twice_area: u128 = points
        .windows(2)
        .map(|w| u128::from(w[1].0 - w[0].0) * u128::from(w[1].1 + w[0].1))
        .sum();
    twice_area as f64
        / (2.0 * scores.in_distribution.len() as f64 * scores.ood.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[(&str, [f64; 5])]) -> CorruptionErrorTable {
        let mut t = CorruptionErrorTable::new();
        for (n, e) in rows {
            t.insert_all(n, *e).unwrap();
        }
        t
    }

    #[test]
    fn ce_examples() {
        let r = table(&[("fog", [0.2, 0.2, 0.4, 0.4, 0.8])]);
        let same = r.clone();
        assert_eq!(corruption_error(&same, &r, "fog").unwrap(), 1.0);
        let half = table(&[("fog", [0.1, 0.1, 0.2, 0.2, 0.4])]);
        assert_eq!(corruption_error(&half, &r, "fog").unwrap(), 0.5);
        let m = table(&[("fog", [0.1, 0.2, 0.3, 0.4, 0.5])]);
        let ce = corruption_error(&m, &r, "fog").unwrap();
        assert_eq!(ce, 0.75);
    }

    #[test]
    fn ce_errors() {
        let r = table(&[("fog", [0.0; 5])]);
        let m = table(&[("fog", [0.1; 5])]);
        assert!(matches!(corruption_error(&m, &r, "fog"), Err(Error::DegenerateReference(_))));
        assert!(matches!(corruption_error(&m, &r, "snow"), Err(Error::MissingData(_))));
        let mut partial = CorruptionErrorTable::new();
        partial.insert("fog", 1, 0.1).unwrap();
        assert!(matches!(corruption_error(&partial, &m, "fog"), Err(Error::MissingData(_))));
    }

    #[test]
    fn table_rejects_bad_entries() {
        let mut t = CorruptionErrorTable::new();
        t.insert("fog", 1, 0.5).unwrap();
        assert!(matches!(t.insert("fog", 1, 0.4), Err(Error::Format(_))));
        assert!(t.insert("fog", 6, 0.4).is_err());
        assert!(t.insert("fog", 2, 1.4).is_err());
    }

    #[test]
    fn mce_requires_all_corruptions() {
        let r = table(&[("fog", [0.5; 5])]);
        assert!(matches!(mce(&r, &r), Err(Error::MissingData(_))));
    }

    #[test]
    fn mce_of_arithmetic_sequence() {
        let mut reference = CorruptionErrorTable::new();
        let mut model = CorruptionErrorTable::new();
        for (k, (name, _)) in CORRUPTIONS.iter().enumerate() {
            reference.insert_all(name, [0.5; 5]).unwrap();
            // CE = 0.1 * (k + 1), so the 15 values run 0.1..=1.5.
            model.insert_all(name, [0.05 * (k + 1) as f64; 5]).unwrap();
        }
        let v = mce(&model, &reference).unwrap();
        assert!((v - 0.8).abs() < 1e-12);
        assert_eq!(mce(&reference, &reference).unwrap(), 1.0);
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, 2], &[3, 4]).unwrap(), 0.0);
        assert_eq!(accuracy(&[1, 2, 3, 4], &[1, 2, 0, 0]).unwrap(), 0.5);
        assert!(accuracy(&[], &[]).is_err());
        assert!(accuracy(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn auroc_examples() {
        let s = ScoreSet::new(vec![0.9, 0.8], vec![0.85, 0.1]).unwrap();
        assert_eq!(auroc(&s), 0.75);
        assert_eq!(auroc_trapezoid(&s), 0.75);
        let sep = ScoreSet::new(vec![3.0, 4.0], vec![1.0, 2.0]).unwrap();
        assert_eq!(auroc(&sep), 1.0);
        let tie = ScoreSet::new(vec![1.0, 2.0, 2.0], vec![1.0, 2.0, 2.0]).unwrap();
        assert_eq!(auroc(&tie), 0.5);
        assert_eq!(auroc_trapezoid(&tie), 0.5);
        assert!(ScoreSet::new(vec![], vec![1.0]).is_err());
        assert!(ScoreSet::new(vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn roc_curve_endpoints() {
        let s = ScoreSet::new(vec![0.9, 0.8], vec![0.85, 0.1]).unwrap();
        let c = roc_curve(&s);
        assert_eq!(c.first(), Some(&(0.0, 0.0)));
        assert_eq!(c.last(), Some(&(1.0, 1.0)));
    }

    #[test]
    fn categories() {
        assert_eq!(corruption_category("fog"), Some("weather"));
        assert_eq!(corruption_category("nope"), None);
        let cats: std::collections::BTreeSet<_> = CORRUPTIONS.iter().map(|c| c.1).collect();
        assert_eq!(cats.len(), 4);
    }
}
