//! Category merging, Bonferroni adjustment and split selection for one node.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::contingency::{category_counts, ContingencyTable, Statistic, TestResult};
use super::ChaidConfig;
use crate::error::{Error, Result};
use crate::record::{Attribute, AttributeKind, SiteRecord};

/// How a predictor's categories are grouped before its split is scored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupingSearch {
    /// The admissible grouping (two or more groups) with the smallest
    /// Bonferroni-adjusted p-value.
    #[default]
    Exhaustive,
    /// Greedy pairwise merging at `alpha_merge`.
    Merge,
}

/// A partition of a predictor's observed category codes. Each group is sorted
/// and groups are ordered by their smallest code.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CategoryGrouping {
    groups: Vec<Vec<usize>>,
}

impl CategoryGrouping {
    pub fn new(mut groups: Vec<Vec<usize>>) -> Self {
        groups.retain(|g| !g.is_empty());
        for g in &mut groups {
            g.sort_unstable();
            g.dedup();
        }
        groups.sort_unstable_by_key(|g| g[0]);
        CategoryGrouping { groups }
    }

    pub fn singletons(codes: impl IntoIterator<Item = usize>) -> Self {
        CategoryGrouping::new(codes.into_iter().map(|c| vec![c]).collect())
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn category_count(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    /// Index of the group holding `code`.
    pub fn group_of(&self, code: usize) -> Option<usize> {
        self.groups.iter().position(|g| g.contains(&code))
    }

    fn merge(&mut self, a: usize, b: usize) {
        let (lo, hi) = (a.min(b), a.max(b));
        let moved = self.groups.remove(hi);
        self.groups[lo].extend(moved);
        self.groups[lo].sort_unstable();
        self.groups.sort_unstable_by_key(|g| g[0]);
    }

    /// Level names of each group, e.g. `{min, mid}`.
    pub fn describe(&self, attr: Attribute) -> Vec<String> {
        self.groups
            .iter()
            .map(|g| format_group(attr, g))
            .collect()
    }

    /// Summed class counts per group.
    fn grouped_counts(&self, counts: &[[u64; 2]]) -> Vec<Vec<u64>> {
        self.groups
            .iter()
            .map(|g| {
                let mut row = vec![0u64; 2];
                for &c in g {
                    row[0] += counts[c][0];
                    row[1] += counts[c][1];
                }
                row
            })
            .collect()
    }
}

pub(crate) fn format_group(attr: Attribute, codes: &[usize]) -> String {
    let names: Vec<&str> = codes.iter().map(|&c| attr.level_name(c)).collect();
    format!("{{{}}}", names.join(", "))
}

impl fmt::Display for CategoryGrouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .groups
            .iter()
            .map(|g| format!("{g:?}"))
            .collect();
        f.write_str(&parts.join(" | "))
    }
}

/// Number of ways `c` categories can be reduced to `g` groups: C(c−1, g−1)
/// for ordinal predictors (contiguous runs), the Stirling number S(c, g) for
/// nominal ones.
pub fn bonferroni_multiplier(c: usize, g: usize, kind: AttributeKind) -> Result<f64> {
    if g == 0 || g > c {
        return Err(Error::Domain(format!(
            "cannot form {g} groups from {c} categories"
        )));
    }
    Ok(match kind {
        AttributeKind::Ordinal => binomial(c - 1, g - 1),
        AttributeKind::Nominal => stirling2(c, g),
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

/// S(n, k) = k·S(n−1, k) + S(n−1, k−1).
fn stirling2(n: usize, k: usize) -> f64 {
    let mut row = vec![0.0f64; k + 1];
    row[0] = 1.0; // S(0, 0)
    for _ in 1..=n {
        for j in (1..=k).rev() {
            row[j] = j as f64 * row[j] + row[j - 1];
        }
        row[0] = 0.0;
    }
    row[k]
}

fn pair_test(counts: &[[u64; 2]], a: &[usize], b: &[usize], stat: Statistic) -> TestResult {
    let sum = |g: &[usize]| {
        g.iter()
            .fold(vec![0u64; 2], |acc, &c| vec![acc[0] + counts[c][0], acc[1] + counts[c][1]])
    };
    ContingencyTable::from_counts(&[sum(a), sum(b)]).test(stat)
}

/// Repeatedly merges the most similar eligible pair of groups (adjacent pairs
/// only for ordinal predictors) while that pair's p-value exceeds
/// `alpha_merge`, starting from `start`.
pub(crate) fn merge_from(
    counts: &[[u64; 2]],
    kind: AttributeKind,
    start: CategoryGrouping,
    config: &ChaidConfig,
) -> CategoryGrouping {
    let mut grouping = start;
    while grouping.len() > 1 {
        let gs = grouping.groups();
        let pairs: Vec<(usize, usize)> = match kind {
            AttributeKind::Ordinal => (0..gs.len() - 1).map(|i| (i, i + 1)).collect(),
            AttributeKind::Nominal => (0..gs.len())
                .flat_map(|i| (i + 1..gs.len()).map(move |j| (i, j)))
                .collect(),
        };
        let mut best: Option<((usize, usize), f64)> = None;
        for (i, j) in pairs {
            let p = pair_test(counts, &gs[i], &gs[j], config.statistic).p_value;
            if best.is_none_or(|(_, bp)| p > bp) {
                best = Some(((i, j), p));
            }
        }
        match best {
            Some(((i, j), p)) if p > config.alpha_merge => grouping.merge(i, j),
            _ => break,
        }
    }
    grouping
}

fn observed_codes(counts: &[[u64; 2]]) -> impl Iterator<Item = usize> + '_ {
    (0..counts.len()).filter(|&c| counts[c][0] + counts[c][1] > 0)
}

pub(crate) fn merge_counts(
    counts: &[[u64; 2]],
    kind: AttributeKind,
    config: &ChaidConfig,
) -> CategoryGrouping {
    merge_from(counts, kind, CategoryGrouping::singletons(observed_codes(counts)), config)
}

/// Every grouping of `codes` into at least two groups that respects the
/// predictor kind (contiguous runs for ordinal ones), fewest groups first.
pub fn admissible_groupings(codes: &[usize], kind: AttributeKind) -> Vec<CategoryGrouping> {
    let mut out: Vec<Vec<Vec<usize>>> = Vec::new();
    match kind {
        AttributeKind::Ordinal => {
            if codes.len() >= 2 {
                for mask in 1u32..1 << (codes.len() - 1) {
                    let mut groups = vec![vec![codes[0]]];
                    for (k, &c) in codes.iter().enumerate().skip(1) {
                        if mask & (1 << (k - 1)) != 0 {
                            groups.push(Vec::new());
                        }
                        groups.last_mut().expect("non-empty").push(c);
                    }
                    out.push(groups);
                }
            }
        }
        AttributeKind::Nominal => {
            fn assign(codes: &[usize], i: usize, groups: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
                if i == codes.len() {
                    if groups.len() >= 2 {
                        out.push(groups.clone());
                    }
                    return;
                }
                for g in 0..groups.len() {
                    groups[g].push(codes[i]);
                    assign(codes, i + 1, groups, out);
                    groups[g].pop();
                }
                groups.push(vec![codes[i]]);
                assign(codes, i + 1, groups, out);
                groups.pop();
            }
            assign(codes, 0, &mut Vec::new(), &mut out);
        }
    }
    out.sort_by_key(|g| g.len());
    out.into_iter().map(CategoryGrouping::new).collect()
}

pub(crate) fn exhaustive_counts(
    counts: &[[u64; 2]],
    kind: AttributeKind,
    config: &ChaidConfig,
) -> CategoryGrouping {
    let codes: Vec<usize> = observed_codes(counts).collect();
    let mut best: Option<(CategoryGrouping, f64)> = None;
    for grouping in admissible_groupings(&codes, kind) {
        let p = adjusted_from_counts(counts, kind, &grouping, config).adjusted_p;
        if best.as_ref().is_none_or(|(_, bp)| p < *bp) {
            best = Some((grouping, p));
        }
    }
    best.map_or_else(|| CategoryGrouping::singletons(codes), |(g, _)| g)
}

pub(crate) fn group_counts(
    counts: &[[u64; 2]],
    kind: AttributeKind,
    config: &ChaidConfig,
) -> CategoryGrouping {
    match config.grouping {
        GroupingSearch::Exhaustive => exhaustive_counts(counts, kind, config),
        GroupingSearch::Merge => merge_counts(counts, kind, config),
    }
}

/// Grouping of `predictor`'s observed levels among `records` under the
/// configured search.
pub fn group_categories(
    records: &[SiteRecord],
    predictor: Attribute,
    config: &ChaidConfig,
) -> CategoryGrouping {
    group_counts(&category_counts(records, predictor), predictor.kind(), config)
}

/// Merged grouping of `predictor`'s observed levels among `records`.
pub fn merge_categories(
    records: &[SiteRecord],
    predictor: Attribute,
    config: &ChaidConfig,
) -> CategoryGrouping {
    merge_counts(&category_counts(records, predictor), predictor.kind(), config)
}

/// Raw and Bonferroni-adjusted significance of one grouping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjustedTest {
    pub test: TestResult,
    pub multiplier: f64,
    pub adjusted_p: f64,
}

pub(crate) fn adjusted_from_counts(
    counts: &[[u64; 2]],
    kind: AttributeKind,
    grouping: &CategoryGrouping,
    config: &ChaidConfig,
) -> AdjustedTest {
    let c = observed_codes(counts).count();
    let g = grouping.len();
    if g < 2 {
        return AdjustedTest {
            test: TestResult::NO_ASSOCIATION,
            multiplier: 1.0,
            adjusted_p: 1.0,
        };
    }
    let test = ContingencyTable::from_counts(&grouping.grouped_counts(counts)).test(config.statistic);
    let multiplier = bonferroni_multiplier(c.max(g), g, kind).unwrap_or(1.0);
    AdjustedTest {
        test,
        multiplier,
        adjusted_p: (multiplier * test.p_value).min(1.0),
    }
}

pub fn adjusted_p(
    records: &[SiteRecord],
    predictor: Attribute,
    grouping: &CategoryGrouping,
    config: &ChaidConfig,
) -> AdjustedTest {
    adjusted_from_counts(
        &category_counts(records, predictor),
        predictor.kind(),
        grouping,
        config,
    )
}

/// The winning predictor of a node.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitCandidate {
    pub predictor: Attribute,
    pub grouping: CategoryGrouping,
    pub significance: AdjustedTest,
    /// Record count per group.
    pub child_sizes: Vec<u64>,
}

/// Best predictor by adjusted p (ties go to the earlier predictor), provided
/// it is significant at `alpha_split`, has at least two groups and every
/// child would hold at least `min_child_size` records.
pub fn select_split(
    records: &[SiteRecord],
    predictors: &[Attribute],
    config: &ChaidConfig,
) -> Option<SplitCandidate> {
    select_split_refs(&records.iter().collect::<Vec<_>>(), predictors, config)
}

pub(crate) fn select_split_refs(
    records: &[&SiteRecord],
    predictors: &[Attribute],
    config: &ChaidConfig,
) -> Option<SplitCandidate> {
    let mut best: Option<SplitCandidate> = None;
    for &attr in predictors {
        let counts = category_counts(records.iter().copied(), attr);
        let grouping = group_counts(&counts, attr.kind(), config);
        let significance = adjusted_from_counts(&counts, attr.kind(), &grouping, config);
        if best
            .as_ref()
            .is_none_or(|b| significance.adjusted_p < b.significance.adjusted_p)
        {
            let child_sizes = grouping
                .grouped_counts(&counts)
                .iter()
                .map(|r| r.iter().sum())
                .collect();
            best = Some(SplitCandidate {
                predictor: attr,
                grouping,
                significance,
                child_sizes,
            });
        }
    }
    best.filter(|b| {
        b.significance.adjusted_p < config.alpha_split
            && b.grouping.len() >= 2
            && b.child_sizes.iter().all(|&n| n >= config.min_child_size as u64)
    })
}
