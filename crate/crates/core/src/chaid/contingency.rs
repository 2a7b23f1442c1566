//! Predictor × class cross-tabulations and their independence statistics.

use serde::{Deserialize, Serialize};

use super::stats::chi_square_p_value;
use crate::error::{Error, Result};
use crate::record::{Attribute, Label, SiteRecord};

/// Target class columns, in table order.
pub const CLASSES: [Label; 2] = [Label::NonSpam, Label::Spam];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Statistic {
    #[default]
    #[serde(rename = "pearson")]
    Pearson,
    #[serde(rename = "likelihood-ratio")]
    LikelihoodRatio,
}

/// Result of one independence test. Degenerate tables report `df = 0`, a zero
/// statistic and `p_value = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

impl TestResult {
    pub const NO_ASSOCIATION: TestResult = TestResult {
        statistic: 0.0,
        df: 0,
        p_value: 1.0,
    };
}

/// Observed counts `n_ij` with expected counts `m_ij` under independence.
/// Rows whose total is zero are dropped at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    /// Category code of each retained row.
    row_categories: Vec<usize>,
    observed: Vec<Vec<u64>>,
    expected: Vec<Vec<f64>>,
    row_totals: Vec<u64>,
    col_totals: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    /// `rows[i]` holds the class counts of category `i`. All rows must have
    /// the same width.
    pub fn from_counts(rows: &[Vec<u64>]) -> Self {
        let width = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == width), "ragged contingency rows");
        let mut row_categories = Vec::new();
        let mut observed = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.iter().sum::<u64>() > 0 {
                row_categories.push(i);
                observed.push(row.clone());
            }
        }
        let row_totals: Vec<u64> = observed.iter().map(|r| r.iter().sum()).collect();
        let col_totals: Vec<u64> = (0..width)
            .map(|j| observed.iter().map(|r| r[j]).sum())
            .collect();
        let total: u64 = row_totals.iter().sum();
        let expected = row_totals
            .iter()
            .map(|&ri| {
                col_totals
                    .iter()
                    .map(|&cj| ri as f64 * cj as f64 / total as f64)
                    .collect()
            })
            .collect();
        ContingencyTable {
            row_categories,
            observed,
            expected,
            row_totals,
            col_totals,
            total,
        }
    }

    pub fn observed(&self) -> &[Vec<u64>] {
        &self.observed
    }

    pub fn expected(&self) -> &[Vec<f64>] {
        &self.expected
    }

    pub fn row_totals(&self) -> &[u64] {
        &self.row_totals
    }

    pub fn col_totals(&self) -> &[u64] {
        &self.col_totals
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn row_categories(&self) -> &[usize] {
        &self.row_categories
    }

    /// `(I − 1)(J − 1)` over retained rows and non-empty columns.
    pub fn df(&self) -> usize {
        let cols = self.col_totals.iter().filter(|&&c| c > 0).count();
        self.observed.len().saturating_sub(1) * cols.saturating_sub(1)
    }

    /// Fewer than two non-empty rows or columns: nothing to test.
    pub fn is_degenerate(&self) -> bool {
        self.df() == 0
    }

    fn cells(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.observed
            .iter()
            .zip(&self.expected)
            .flat_map(|(o, e)| o.iter().copied().zip(e.iter().copied()))
            .filter(|&(_, m)| m > 0.0)
    }

    /// Σ (n − m)² / m over cells with m > 0.
    pub fn pearson_chi_square(&self) -> f64 {
        self.cells()
            .map(|(n, m)| {
                let d = n as f64 - m;
                d * d / m
            })
            .sum()
    }

    /// G² = 2 Σ n ln(n / m), with 0 · ln 0 = 0.
    pub fn likelihood_ratio_stat(&self) -> f64 {
        let g2: f64 = self
            .cells()
            .filter(|&(n, _)| n > 0)
            .map(|(n, m)| n as f64 * (n as f64 / m).ln())
            .sum();
        (2.0 * g2).max(0.0)
    }

    pub fn statistic(&self, kind: Statistic) -> f64 {
        match kind {
            Statistic::Pearson => self.pearson_chi_square(),
            Statistic::LikelihoodRatio => self.likelihood_ratio_stat(),
        }
    }

    pub fn test(&self, kind: Statistic) -> TestResult {
        if self.is_degenerate() {
            return TestResult::NO_ASSOCIATION;
        }
        let statistic = self.statistic(kind);
        let df = self.df();
        let p_value = chi_square_p_value(statistic, df).unwrap_or(1.0);
        TestResult {
            statistic,
            df,
            p_value,
        }
    }
}

/// Class counts per category code of `attr`, `[non-spam, spam]` per row.
/// Unlabeled records are ignored.
pub(crate) fn category_counts<'a, I>(records: I, attr: Attribute) -> Vec<[u64; 2]>
where
    I: IntoIterator<Item = &'a SiteRecord>,
{
    let mut counts = vec![[0u64; 2]; attr.cardinality()];
    for r in records {
        match r.label {
            Label::NonSpam => counts[r.code(attr)][0] += 1,
            Label::Spam => counts[r.code(attr)][1] += 1,
            Label::Unlabeled => {}
        }
    }
    counts
}

/// Cross-tabulates `predictor` against `target` (which must be `label`).
pub fn build_contingency(
    records: &[SiteRecord],
    predictor: &str,
    target: &str,
) -> Result<ContingencyTable> {
    if target != "label" {
        return Err(Error::Schema(target.to_string()));
    }
    if records.is_empty() {
        return Err(Error::Validation("no records to cross-tabulate".into()));
    }
    let attr: Attribute = predictor.parse()?;
    let rows: Vec<Vec<u64>> = category_counts(records, attr)
        .into_iter()
        .map(|c| c.to_vec())
        .collect();
    Ok(ContingencyTable::from_counts(&rows))
}

pub fn pearson_chi_square(table: &ContingencyTable) -> TestResult {
    table.test(Statistic::Pearson)
}

pub fn likelihood_ratio_stat(table: &ContingencyTable) -> TestResult {
    table.test(Statistic::LikelihoodRatio)
}
