//! Synthetic datasets with planted attribute→spam-rate rules.
//!
//! Each rule claims `round(weight * n)` records whose listed attributes are
//! fixed and whose remaining attributes are drawn uniformly, rejecting draws
//! that an earlier rule would claim. Exactly `round(p_spam * size)` of a
//! rule's records are spam. Records claimed by no rule form the background,
//! which absorbs whatever spam count is left so the total equals `n_spam`.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{rng, Dataset};
use crate::error::{Error, Result};
use crate::record::{Attribute, Label, SiteRecord};

const MAX_DRAWS_PER_RECORD: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSpec {
    /// Attribute name → level name (`yes`/`no` for `black_list`).
    pub conditions: BTreeMap<String, String>,
    pub p_spam: f64,
    /// Share of all records generated under this rule.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub n: usize,
    pub n_spam: usize,
    #[serde(default)]
    pub rules: Vec<RuleSpec>,
    #[serde(default)]
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn from_json(src: &str) -> Result<Self> {
        serde_json::from_str(src).map_err(|e| Error::Config(format!("generator spec: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        GeneratorSpec::from_json(&src)
    }
}

struct CompiledRule {
    conditions: Vec<(Attribute, usize)>,
    size: usize,
    spam: usize,
}

impl CompiledRule {
    fn matches(&self, r: &SiteRecord) -> bool {
        self.conditions.iter().all(|&(a, c)| r.code(a) == c)
    }
}

fn compile(spec: &GeneratorSpec) -> Result<(Vec<CompiledRule>, usize, usize)> {
    if spec.n_spam > spec.n {
        return Err(Error::Config(format!(
            "n_spam = {} exceeds n = {}",
            spec.n_spam, spec.n
        )));
    }
    let mut rules = Vec::with_capacity(spec.rules.len());
    for (i, r) in spec.rules.iter().enumerate() {
        if !(0.0..=1.0).contains(&r.p_spam) || !(0.0..=1.0).contains(&r.weight) {
            return Err(Error::Config(format!(
                "rule {i}: p_spam and weight must lie in [0, 1]"
            )));
        }
        let mut conditions = Vec::new();
        for (name, level) in &r.conditions {
            let attr: Attribute = name.parse()?;
            let code = attr
                .parse_level(level)
                .map_err(|e| Error::Config(format!("rule {i}: {e}")))?;
            conditions.push((attr, code));
        }
        let size = (r.weight * spec.n as f64).round() as usize;
        let spam = (r.p_spam * size as f64).round() as usize;
        rules.push(CompiledRule {
            conditions,
            size,
            spam,
        });
    }
    let claimed: usize = rules.iter().map(|r| r.size).sum();
    let background = spec.n.checked_sub(claimed).ok_or_else(|| {
        Error::Config(format!("rule weights claim {claimed} of {} records", spec.n))
    })?;
    let rule_spam: usize = rules.iter().map(|r| r.spam).sum();
    let background_spam = spec
        .n_spam
        .checked_sub(rule_spam)
        .filter(|&s| s <= background)
        .ok_or_else(|| {
            Error::Config(format!(
                "infeasible: rules need {rule_spam} spam records, {} requested overall with {background} unclaimed records",
                spec.n_spam
            ))
        })?;
    Ok((rules, background, background_spam))
}

/// Generates `spec.n` records; identical `(spec, seed)` give identical output.
pub fn generate_synthetic(spec: &GeneratorSpec, seed: u64) -> Result<Dataset> {
    let (rules, background, background_spam) = compile(spec)?;
    let mut rng = rng(seed);
    let mut records = Vec::with_capacity(spec.n);

    // owner: Some(rule index) for rule records, None for background
    let groups = rules
        .iter()
        .enumerate()
        .map(|(i, r)| (Some(i), r.size, r.spam))
        .chain(std::iter::once((None, background, background_spam)));
    for (owner, size, spam) in groups {
        let mut labels: Vec<Label> = (0..size)
            .map(|k| if k < spam { Label::Spam } else { Label::NonSpam })
            .collect();
        labels.shuffle(&mut rng);
        for label in labels {
            let mut rec = draw(&rules, owner, &mut rng)?;
            rec.label = label;
            records.push(rec);
        }
    }
    records.shuffle(&mut rng);
    for (i, r) in records.iter_mut().enumerate() {
        r.url = format!("http://site-{i:05}.synthetic.test/");
    }
    Ok(Dataset::new(records))
}

fn draw(rules: &[CompiledRule], owner: Option<usize>, rng: &mut impl Rng) -> Result<SiteRecord> {
    let mut rec = SiteRecord::blank("");
    for _ in 0..MAX_DRAWS_PER_RECORD {
        for attr in Attribute::ALL {
            rec.set_code(attr, rng.random_range(0..attr.cardinality()));
        }
        if let Some(i) = owner {
            for &(a, c) in &rules[i].conditions {
                rec.set_code(a, c);
            }
        }
        if rules.iter().position(|r| r.matches(&rec)) == owner {
            return Ok(rec);
        }
    }
    Err(Error::Config(match owner {
        Some(i) => format!("rule {i} is shadowed by an earlier rule"),
        None => "rules leave no room for background records".into(),
    }))
}
