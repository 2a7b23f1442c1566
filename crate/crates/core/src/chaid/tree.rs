use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use super::merge::{format_group, select_split_refs};
use super::{CategoryGrouping, ChaidConfig};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::record::{Attribute, Label, SiteRecord};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub non_spam: u64,
    pub spam: u64,
}

impl ClassCounts {
    pub fn of<'a>(records: impl IntoIterator<Item = &'a SiteRecord>) -> Self {
        let mut c = ClassCounts::default();
        for r in records {
            match r.label {
                Label::Spam => c.spam += 1,
                Label::NonSpam => c.non_spam += 1,
                Label::Unlabeled => {}
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.spam + self.non_spam
    }

    pub fn spam_proportion(&self) -> f64 {
        if self.total() == 0 {
            0.0
        } else {
            self.spam as f64 / self.total() as f64
        }
    }

    /// Majority class; a tie goes to non-spam.
    pub fn majority(&self) -> Label {
        if self.spam > self.non_spam {
            Label::Spam
        } else {
            Label::NonSpam
        }
    }

    pub fn is_pure(&self) -> bool {
        self.spam == 0 || self.non_spam == 0
    }
}

impl std::ops::Add for ClassCounts {
    type Output = ClassCounts;

    fn add(self, o: ClassCounts) -> ClassCounts {
        ClassCounts {
            non_spam: self.non_spam + o.non_spam,
            spam: self.spam + o.spam,
        }
    }
}

/// Why growth stopped at a leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Pure,
    MaxDepth,
    MinParentSize,
    NoQualifyingSplit,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Pure => "pure",
            StopReason::MaxDepth => "max_depth",
            StopReason::MinParentSize => "min_parent_size",
            StopReason::NoQualifyingSplit => "no_qualifying_split",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub predictor: Attribute,
    /// One group per child, in child order.
    pub grouping: CategoryGrouping,
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub adjusted_p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChaidNode {
    pub id: usize,
    pub depth: usize,
    pub class_counts: ClassCounts,
    pub split: Option<Split>,
    pub children: Vec<usize>,
    /// Set on leaves only.
    pub stop_reason: Option<StopReason>,
}

impl ChaidNode {
    pub fn is_leaf(&self) -> bool {
        self.split.is_none()
    }
}

/// A grown tree. Nodes are stored in depth-first preorder; `nodes[0]` is the root
/// and every node's id equals its index.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaidTree {
    pub(crate) config: ChaidConfig,
    pub(crate) nodes: Vec<ChaidNode>,
}

impl ChaidTree {
    pub fn config(&self) -> &ChaidConfig {
        &self.config
    }

    pub fn nodes(&self) -> &[ChaidNode] {
        &self.nodes
    }

    pub fn root(&self) -> &ChaidNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: usize) -> &ChaidNode {
        &self.nodes[id]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &ChaidNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// Leaf reached by `record`, with a flag set when some split had never
    /// seen the record's level and the largest child was taken instead.
    pub fn route(&self, record: &SiteRecord) -> (usize, bool) {
        let mut id = 0;
        let mut fallback = false;
        while let Some(split) = &self.nodes[id].split {
            let children = &self.nodes[id].children;
            id = match split.grouping.group_of(record.code(split.predictor)) {
                Some(g) => children[g],
                None => {
                    fallback = true;
                    // first of the largest children
                    *children
                        .iter()
                        .rev()
                        .max_by_key(|&&c| self.nodes[c].class_counts.total())
                        .expect("split node has children")
                }
            };
        }
        (id, fallback)
    }

    /// Graphviz rendering; leaves are shaded by spam proportion.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph chaid {\n  node [shape=box, fontname=\"Helvetica\"];\n");
        for n in &self.nodes {
            let c = n.class_counts;
            let mut label = format!(
                "Node {}\\nn = {}\\nspam = {:.1}%\\nnon-spam = {:.1}%",
                n.id,
                c.total(),
                100.0 * c.spam_proportion(),
                100.0 * (1.0 - c.spam_proportion())
            );
            if let Some(s) = &n.split {
                let _ = write!(label, "\\nsplit: {} (adj. p = {:.3e})", s.predictor, s.adjusted_p);
            }
            let style = if n.is_leaf() {
                format!(", style=filled, fillcolor=\"0.0 {:.3} 1.0\"", c.spam_proportion())
            } else {
                String::new()
            };
            let _ = writeln!(out, "  n{} [label=\"{}\"{}];", n.id, label, style);
        }
        for n in &self.nodes {
            if let Some(s) = &n.split {
                for (g, &child) in s.grouping.groups().iter().zip(&n.children) {
                    let _ = writeln!(
                        out,
                        "  n{} -> n{} [label=\"{}\"];",
                        n.id,
                        child,
                        format_group(s.predictor, g)
                    );
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Grows a tree on a dataset of labeled records.
pub fn grow_tree(dataset: &Dataset, config: &ChaidConfig) -> Result<ChaidTree> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::Validation("cannot grow a tree on an empty dataset".into()));
    }
    if let Some(r) = dataset.records().iter().find(|r| !r.label.is_labeled()) {
        return Err(Error::Validation(format!(
            "record {} is unlabeled; strip unlabeled records before training",
            r.url
        )));
    }
    let mut tree = ChaidTree {
        config: config.clone(),
        nodes: Vec::new(),
    };
    let all: Vec<&SiteRecord> = dataset.records().iter().collect();
    grow_node(&mut tree, &all, 0);
    Ok(tree)
}

fn grow_node(tree: &mut ChaidTree, records: &[&SiteRecord], depth: usize) -> usize {
    let id = tree.nodes.len();
    let class_counts = ClassCounts::of(records.iter().copied());
    tree.nodes.push(ChaidNode {
        id,
        depth,
        class_counts,
        split: None,
        children: Vec::new(),
        stop_reason: None,
    });
    let config = &tree.config;
    let stop = if class_counts.is_pure() {
        Some(StopReason::Pure)
    } else if depth >= config.max_depth {
        Some(StopReason::MaxDepth)
    } else if records.len() < config.min_parent_size {
        Some(StopReason::MinParentSize)
    } else {
        None
    };
    if let Some(reason) = stop {
        tree.nodes[id].stop_reason = Some(reason);
        return id;
    }
    let Some(candidate) = select_split_refs(records, &Attribute::ALL, config) else {
        tree.nodes[id].stop_reason = Some(StopReason::NoQualifyingSplit);
        return id;
    };

    let attr = candidate.predictor;
    let mut parts: Vec<Vec<&SiteRecord>> = vec![Vec::new(); candidate.grouping.len()];
    for &r in records {
        let g = candidate
            .grouping
            .group_of(r.code(attr))
            .expect("grouping covers every observed level");
        parts[g].push(r);
    }
    let sig = candidate.significance;
    tree.nodes[id].split = Some(Split {
        predictor: attr,
        grouping: candidate.grouping,
        statistic: sig.test.statistic,
        df: sig.test.df,
        p_value: sig.test.p_value,
        adjusted_p: sig.adjusted_p,
    });
    for part in parts {
        let child = grow_node(tree, &part, depth + 1);
        tree.nodes[id].children.push(child);
    }
    id
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Label,
    /// Spam share of the reached leaf.
    pub spam_probability: f64,
    pub leaf: usize,
    /// A split along the way had never seen the record's level.
    pub fallback: bool,
}

pub fn predict(tree: &ChaidTree, record: &SiteRecord) -> Prediction {
    let (leaf, fallback) = tree.route(record);
    let counts = tree.nodes[leaf].class_counts;
    Prediction {
        label: counts.majority(),
        spam_probability: counts.spam_proportion(),
        leaf,
        fallback,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleCondition {
    pub predictor: Attribute,
    /// Category codes admitted by this branch.
    pub codes: Vec<usize>,
}

impl fmt::Display for RuleCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {}", self.predictor, format_group(self.predictor, &self.codes))
    }
}

/// Root-to-leaf condition chain with the leaf's spam statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternRule {
    pub conditions: Vec<RuleCondition>,
    pub leaf: usize,
    pub spam_count: u64,
    pub total_count: u64,
    pub spam_proportion: f64,
}

impl PatternRule {
    pub fn matches(&self, record: &SiteRecord) -> bool {
        self.conditions
            .iter()
            .all(|c| c.codes.contains(&record.code(c.predictor)))
    }
}

impl fmt::Display for PatternRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conditions.is_empty() {
            f.write_str("IF (always)")?;
        } else {
            let conds: Vec<String> = self.conditions.iter().map(ToString::to_string).collect();
            write!(f, "IF {}", conds.join(" AND "))?;
        }
        write!(
            f,
            " THEN spam = {:.1}% ({}/{}) [node {}]",
            100.0 * self.spam_proportion,
            self.spam_count,
            self.total_count,
            self.leaf
        )
    }
}

/// One rule per leaf, most spam-dense first (ties keep preorder).
pub fn extract_rules(tree: &ChaidTree) -> Vec<PatternRule> {
    let mut rules = Vec::new();
    let mut path = Vec::new();
    collect_rules(tree, 0, &mut path, &mut rules);
    rules.sort_by(|a, b| b.spam_proportion.total_cmp(&a.spam_proportion));
    rules
}

fn collect_rules(
    tree: &ChaidTree,
    id: usize,
    path: &mut Vec<RuleCondition>,
    out: &mut Vec<PatternRule>,
) {
    let node = &tree.nodes[id];
    match &node.split {
        None => {
            let c = node.class_counts;
            out.push(PatternRule {
                conditions: path.clone(),
                leaf: id,
                spam_count: c.spam,
                total_count: c.total(),
                spam_proportion: c.spam_proportion(),
            });
        }
        Some(split) => {
            for (group, &child) in split.grouping.groups().iter().zip(&node.children) {
                path.push(RuleCondition {
                    predictor: split.predictor,
                    codes: group.clone(),
                });
                collect_rules(tree, child, path, out);
                path.pop();
            }
        }
    }
}
