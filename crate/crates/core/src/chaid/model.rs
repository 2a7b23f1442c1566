//! JSON model files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tree::{ChaidNode, ChaidTree, ClassCounts, Split, StopReason};
use super::{CategoryGrouping, ChaidConfig};
use crate::error::{Error, Result};
use crate::record::{Attribute, AttributeKind};

pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    version: u32,
    config: ChaidConfig,
    attribute_schema: Vec<AttributeDoc>,
    nodes: Vec<NodeDoc>,
}

#[derive(Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct AttributeDoc {
    name: String,
    kind: AttributeKind,
    levels: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: usize,
    depth: usize,
    class_counts: ClassCounts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    split: Option<SplitDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stop_reason: Option<StopReason>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SplitDoc {
    predictor: Attribute,
    groups: Vec<Vec<String>>,
    statistic: f64,
    df: usize,
    p_value: f64,
    adjusted_p: f64,
}

fn schema() -> Vec<AttributeDoc> {
    Attribute::ALL
        .iter()
        .map(|&a| AttributeDoc {
            name: a.name().to_string(),
            kind: a.kind(),
            levels: (0..a.cardinality())
                .map(|c| a.level_name(c).to_string())
                .collect(),
        })
        .collect()
}

fn bad(msg: impl Into<String>) -> Error {
    Error::ModelFormat(msg.into())
}

impl ChaidTree {
    pub fn to_json(&self) -> String {
        let doc = ModelDoc {
            version: MODEL_VERSION,
            config: self.config.clone(),
            attribute_schema: schema(),
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDoc {
                    id: n.id,
                    depth: n.depth,
                    class_counts: n.class_counts,
                    split: n.split.as_ref().map(|s| SplitDoc {
                        predictor: s.predictor,
                        groups: s
                            .grouping
                            .groups()
                            .iter()
                            .map(|g| {
                                g.iter()
                                    .map(|&c| s.predictor.level_name(c).to_string())
                                    .collect()
                            })
                            .collect(),
                        statistic: s.statistic,
                        df: s.df,
                        p_value: s.p_value,
                        adjusted_p: s.adjusted_p,
                    }),
                    children: n.children.clone(),
                    stop_reason: n.stop_reason,
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(src: &str) -> Result<Self> {
        // peek at the version first so a future format reports a version error
        let value: serde_json::Value =
            serde_json::from_str(src).map_err(|e| bad(format!("malformed model: {e}")))?;
        match value.get("version").and_then(serde_json::Value::as_u64) {
            Some(v) if v == u64::from(MODEL_VERSION) => {}
            Some(v) => return Err(bad(format!("unsupported model version {v}"))),
            None => return Err(bad("missing model version")),
        }
        let doc: ModelDoc =
            serde_json::from_value(value).map_err(|e| bad(format!("malformed model: {e}")))?;
        if doc.attribute_schema != schema() {
            return Err(bad("attribute schema does not match this build"));
        }
        doc.config
            .validate()
            .map_err(|e| bad(format!("model config: {e}")))?;
        if doc.nodes.is_empty() {
            return Err(bad("model has no nodes"));
        }

        let mut nodes = Vec::with_capacity(doc.nodes.len());
        for (i, n) in doc.nodes.into_iter().enumerate() {
            if n.id != i {
                return Err(bad(format!("node at position {i} has id {}", n.id)));
            }
            let split = match n.split {
                None => None,
                Some(s) => {
                    let mut groups = Vec::with_capacity(s.groups.len());
                    for g in &s.groups {
                        let codes = g
                            .iter()
                            .map(|name| s.predictor.parse_level(name))
                            .collect::<Result<Vec<_>>>()
                            .map_err(|e| bad(e.to_string()))?;
                        groups.push(codes);
                    }
                    Some(Split {
                        predictor: s.predictor,
                        grouping: CategoryGrouping::new(groups),
                        statistic: s.statistic,
                        df: s.df,
                        p_value: s.p_value,
                        adjusted_p: s.adjusted_p,
                    })
                }
            };
            nodes.push(ChaidNode {
                id: n.id,
                depth: n.depth,
                class_counts: n.class_counts,
                split,
                children: n.children,
                stop_reason: n.stop_reason,
            });
        }
        check_structure(&nodes)?;
        Ok(ChaidTree {
            config: doc.config,
            nodes,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ChaidTree::from_json(&src)
    }
}

fn check_structure(nodes: &[ChaidNode]) -> Result<()> {
    let mut parent_seen = vec![false; nodes.len()];
    for n in nodes {
        match &n.split {
            None => {
                if !n.children.is_empty() || n.stop_reason.is_none() {
                    return Err(bad(format!("leaf {} needs a stop reason and no children", n.id)));
                }
            }
            Some(s) => {
                if n.children.len() != s.grouping.len() || n.children.len() < 2 {
                    return Err(bad(format!("node {} has mismatched children", n.id)));
                }
                let mut sum = ClassCounts::default();
                for &c in &n.children {
                    if c <= n.id || c >= nodes.len() || parent_seen[c] {
                        return Err(bad(format!("node {} has invalid child {c}", n.id)));
                    }
                    parent_seen[c] = true;
                    if nodes[c].depth != n.depth + 1 {
                        return Err(bad(format!("child {c} has wrong depth")));
                    }
                    sum = sum + nodes[c].class_counts;
                }
                if sum != n.class_counts {
                    return Err(bad(format!("node {} class counts do not add up", n.id)));
                }
            }
        }
    }
    if parent_seen.iter().skip(1).any(|&seen| !seen) {
        return Err(bad("model contains unreachable nodes"));
    }
    Ok(())
}
