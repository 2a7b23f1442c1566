//! CHAID decision trees over categorical site records.
//!
//! Growth at each node: group each predictor's categories (either the grouping
//! with the smallest Bonferroni-adjusted p-value, or greedy pairwise merging),
//! split on the most significant predictor, recurse.

mod contingency;
mod merge;
mod model;
pub mod stats;
mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use contingency::{
    build_contingency, likelihood_ratio_stat, pearson_chi_square, ContingencyTable, Statistic,
    TestResult, CLASSES,
};
pub use merge::{
    adjusted_p, admissible_groupings, bonferroni_multiplier, group_categories, merge_categories,
    select_split, AdjustedTest, CategoryGrouping, GroupingSearch, SplitCandidate,
};
pub use model::MODEL_VERSION;
pub use stats::chi_square_p_value;
pub use tree::{
    extract_rules, grow_tree, predict, ChaidNode, ChaidTree, ClassCounts, PatternRule,
    Prediction, RuleCondition, Split, StopReason,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChaidConfig {
    pub alpha_merge: f64,
    pub alpha_split: f64,
    pub statistic: Statistic,
    pub grouping: GroupingSearch,
    pub max_depth: usize,
    pub min_parent_size: usize,
    pub min_child_size: usize,
}

impl Default for ChaidConfig {
    fn default() -> Self {
        ChaidConfig {
            alpha_merge: 0.05,
            alpha_split: 0.05,
            statistic: Statistic::Pearson,
            grouping: GroupingSearch::Exhaustive,
            max_depth: 3,
            min_parent_size: 30,
            min_child_size: 10,
        }
    }
}

impl ChaidConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("alpha_merge", self.alpha_merge), ("alpha_split", self.alpha_split)] {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {a}")));
            }
        }
        if self.max_depth < 1 {
            return Err(Error::Config("max_depth must be at least 1".into()));
        }
        if self.min_child_size < 1 || self.min_child_size > self.min_parent_size {
            return Err(Error::Config(format!(
                "need 1 <= min_child_size ({}) <= min_parent_size ({})",
                self.min_child_size, self.min_parent_size
            )));
        }
        Ok(())
    }
}
