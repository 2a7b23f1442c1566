//! Spam-positive confusion matrices, precision/recall/F and k-fold evaluation.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::chaid::{grow_tree, predict, ChaidConfig, ChaidTree};
use crate::dataset::{Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::record::Label;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

/// A ratio whose denominator may be zero; then `value` is 0 and
/// `degenerate` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ratio {
    pub value: f64,
    pub degenerate: bool,
}

impl Ratio {
    fn of(num: f64, den: f64) -> Ratio {
        if den == 0.0 {
            Ratio {
                value: 0.0,
                degenerate: true,
            }
        } else {
            Ratio {
                value: num / den,
                degenerate: false,
            }
        }
    }
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        ConfusionMatrix { tp, fp, tn, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn record(&mut self, actual: Label, predicted: Label) {
        match (actual == Label::Spam, predicted == Label::Spam) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (false, false) => self.tn += 1,
            (true, false) => self.fn_ += 1,
        }
    }

    pub fn precision(&self) -> Ratio {
        Ratio::of(self.tp as f64, (self.tp + self.fp) as f64)
    }

    pub fn recall(&self) -> Ratio {
        Ratio::of(self.tp as f64, (self.tp + self.fn_) as f64)
    }

    pub fn f_measure(&self) -> Ratio {
        let (p, r) = (self.precision().value, self.recall().value);
        Ratio::of(2.0 * p * r, p + r)
    }

    pub fn accuracy(&self) -> Ratio {
        Ratio::of((self.tp + self.tn) as f64, self.total() as f64)
    }
}

impl std::ops::Add for ConfusionMatrix {
    type Output = ConfusionMatrix;

    fn add(self, o: ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix::new(self.tp + o.tp, self.fp + o.fp, self.tn + o.tn, self.fn_ + o.fn_)
    }
}

pub fn precision(cm: &ConfusionMatrix) -> Ratio {
    cm.precision()
}

pub fn recall(cm: &ConfusionMatrix) -> Ratio {
    cm.recall()
}

pub fn f_measure(cm: &ConfusionMatrix) -> Ratio {
    cm.f_measure()
}

/// Confusion matrix of `tree` over every record of `test`.
pub fn evaluate(tree: &ChaidTree, test: &Dataset) -> Result<ConfusionMatrix> {
    let mut cm = ConfusionMatrix::default();
    for r in test.records() {
        if !r.label.is_labeled() {
            return Err(Error::Validation(format!(
                "cannot evaluate unlabeled record {}",
                r.url
            )));
        }
        cm.record(r.label, predict(tree, r).label);
    }
    Ok(cm)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult {
    pub fold: usize,
    pub matrix: ConfusionMatrix,
    pub precision: Ratio,
    pub recall: Ratio,
    pub f_measure: Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub stdev: f64,
}

impl MeanStd {
    /// Sample standard deviation (n − 1); 0 for a single value.
    fn of(values: &[f64]) -> MeanStd {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        MeanStd {
            mean,
            stdev: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossValidation {
    pub folds: Vec<FoldResult>,
    /// Sum of the per-fold matrices.
    pub pooled: ConfusionMatrix,
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub f_measure: MeanStd,
}

impl CrossValidation {
    /// `fold,precision,recall,f_measure,tp,fp,tn,fn` per fold, then a `mean`
    /// row with averaged ratios and pooled counts.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fold,precision,recall,f_measure,tp,fp,tn,fn\n");
        for f in &self.folds {
            let m = f.matrix;
            let _ = writeln!(
                out,
                "{},{:.6},{:.6},{:.6},{},{},{},{}",
                f.fold, f.precision.value, f.recall.value, f.f_measure.value, m.tp, m.fp, m.tn, m.fn_
            );
        }
        let m = self.pooled;
        let _ = writeln!(
            out,
            "mean,{:.6},{:.6},{:.6},{},{},{},{}",
            self.precision.mean, self.recall.mean, self.f_measure.mean, m.tp, m.fp, m.tn, m.fn_
        );
        out
    }
}

/// Per-fold growth and evaluation. Folds run in parallel; results are in fold
/// order and independent of scheduling.
pub fn cross_validate(
    dataset: &Dataset,
    config: &ChaidConfig,
    k: usize,
    seed: u64,
) -> Result<CrossValidation> {
    let plan = FoldPlan::new(dataset.len(), k, seed)?;
    cross_validate_with(dataset, config, &plan)
}

pub fn cross_validate_with(
    dataset: &Dataset,
    config: &ChaidConfig,
    plan: &FoldPlan,
) -> Result<CrossValidation> {
    let folds = (0..plan.k())
        .into_par_iter()
        .map(|fold| {
            let train = dataset.subset(&plan.train_indices(fold));
            let test = dataset.subset(&plan.test_indices(fold));
            let tree = grow_tree(&train, config)?;
            let matrix = evaluate(&tree, &test)?;
            Ok(FoldResult {
                fold,
                matrix,
                precision: matrix.precision(),
                recall: matrix.recall(),
                f_measure: matrix.f_measure(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pooled = folds
        .iter()
        .fold(ConfusionMatrix::default(), |acc, f| acc + f.matrix);
    let stat = |get: fn(&FoldResult) -> f64| {
        MeanStd::of(&folds.iter().map(get).collect::<Vec<_>>())
    };
    Ok(CrossValidation {
        precision: stat(|f| f.precision.value),
        recall: stat(|f| f.recall.value),
        f_measure: stat(|f| f.f_measure.value),
        pooled,
        folds,
    })
}
