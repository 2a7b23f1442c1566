//! Independent reference implementations shared by the integration suites.
#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spamsift_core::chaid::{extract_rules, ChaidTree};
use spamsift_core::dataset::Dataset;
use spamsift_core::record::{Attribute, Label, SiteRecord};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// O(n·m) sliding-window search with ASCII case folding.
pub fn naive_find_all(text: &[u8], pattern: &[u8]) -> Vec<usize> {
    if pattern.is_empty() || pattern.len() > text.len() {
        return Vec::new();
    }
    (0..=text.len() - pattern.len())
        .filter(|&i| {
            text[i..i + pattern.len()]
                .iter()
                .zip(pattern)
                .all(|(a, b)| a.eq_ignore_ascii_case(b))
        })
        .collect()
}

/// Every partition of `items` into non-empty blocks (restricted growth strings).
pub fn set_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    fn go(items: &[usize], i: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == items.len() {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(items[i]);
            go(items, i + 1, blocks, out);
            blocks[b].pop();
        }
        blocks.push(vec![items[i]]);
        go(items, i + 1, blocks, out);
        blocks.pop();
    }
    let mut out = Vec::new();
    go(items, 0, &mut Vec::new(), &mut out);
    out
}

/// Every partition of `items` into runs of consecutive elements.
pub fn contiguous_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let gaps = items.len() - 1;
    (0u32..1 << gaps)
        .map(|mask| {
            let mut blocks = vec![vec![items[0]]];
            for (k, &it) in items.iter().enumerate().skip(1) {
                if mask & (1 << (k - 1)) != 0 {
                    blocks.push(Vec::new());
                }
                blocks.last_mut().unwrap().push(it);
            }
            blocks
        })
        .collect()
}

/// Pearson X² and df over the non-empty rows/columns of `table`.
pub fn pearson_oracle(table: &[Vec<u64>]) -> (f64, usize) {
    let rows: Vec<&Vec<u64>> = table.iter().filter(|r| r.iter().sum::<u64>() > 0).collect();
    if rows.is_empty() {
        return (0.0, 0);
    }
    let ncol = rows[0].len();
    let cols: Vec<usize> = (0..ncol)
        .filter(|&j| rows.iter().map(|r| r[j]).sum::<u64>() > 0)
        .collect();
    let n: f64 = rows.iter().flat_map(|r| r.iter()).sum::<u64>() as f64;
    let mut x2 = 0.0;
    for r in &rows {
        let rt: u64 = r.iter().sum();
        for &j in &cols {
            let ct: u64 = rows.iter().map(|r| r[j]).sum();
            let m = rt as f64 * ct as f64 / n;
            x2 += (r[j] as f64 - m).powi(2) / m;
        }
    }
    let df = (rows.len().saturating_sub(1)) * (cols.len().saturating_sub(1));
    (x2, df)
}

/// ln Γ(k/2) from Γ(1)=1, Γ(1/2)=√π and Γ(x+1)=xΓ(x).
pub fn ln_gamma_half(k: usize) -> f64 {
    let (mut x, mut acc) = if k.is_multiple_of(2) {
        (1.0, 0.0)
    } else {
        (0.5, 0.5 * std::f64::consts::PI.ln())
    };
    while x < k as f64 / 2.0 - 1e-9 {
        acc += x.ln();
        x += 1.0;
    }
    acc
}

/// Upper tail of the χ² distribution by composite Simpson integration of the
/// density after the substitution t = s², which removes the singularity at 0.
pub fn chi_square_tail_numeric(x: f64, df: usize) -> f64 {
    let k = df as f64;
    let norm = std::f64::consts::LN_2 * (1.0 - k / 2.0) - ln_gamma_half(df);
    let f = |s: f64| {
        let pow = if df == 1 { 0.0 } else { (k - 1.0) * s.ln() };
        if s == 0.0 && df > 1 {
            0.0
        } else {
            (norm + pow - s * s / 2.0).exp()
        }
    };
    let a = x.max(0.0).sqrt();
    let b = a.max(k.sqrt()) + 40.0;
    let n = 40_000;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Structural checks every grown tree must satisfy.
pub fn check_tree_invariants(tree: &ChaidTree, data: &Dataset) -> Result<(), String> {
    let alpha = tree.config().alpha_split;
    for node in tree.nodes() {
        match &node.split {
            Some(split) => {
                let sum = node
                    .children
                    .iter()
                    .map(|&c| tree.node(c).class_counts)
                    .fold((0, 0), |(a, b), c| (a + c.non_spam, b + c.spam));
                if sum != (node.class_counts.non_spam, node.class_counts.spam) {
                    return Err(format!("node {} children do not conserve counts", node.id));
                }
                if split.adjusted_p.is_nan() || split.adjusted_p >= alpha {
                    return Err(format!("node {} split adjusted p {}", node.id, split.adjusted_p));
                }
                if node.stop_reason.is_some() {
                    return Err(format!("internal node {} has a stop reason", node.id));
                }
            }
            None => {
                if node.stop_reason.is_none() {
                    return Err(format!("leaf {} lacks a stop reason", node.id));
                }
            }
        }
    }
    let rules = extract_rules(tree);
    let leaves: Vec<usize> = tree.leaves().map(|n| n.id).collect();
    let mut rule_leaves: Vec<usize> = rules.iter().map(|r| r.leaf).collect();
    rule_leaves.sort_unstable();
    if rule_leaves != leaves {
        return Err(format!("rules cover leaves {rule_leaves:?}, tree has {leaves:?}"));
    }
    for r in data.records() {
        let (leaf, fallback) = tree.route(r);
        if fallback {
            return Err(format!("training record {} needed a fallback", r.url));
        }
        let matched: Vec<usize> = rules.iter().filter(|rule| rule.matches(r)).map(|rule| rule.leaf).collect();
        if matched != [leaf] {
            return Err(format!("record {} routes to {leaf} but matches rules {matched:?}", r.url));
        }
    }
    Ok(())
}

/// Random labeled records: each attribute uses at most `max_levels` levels and
/// one driver attribute shifts the spam rate per level.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, max_levels: usize) -> Dataset {
    let levels: Vec<usize> = Attribute::ALL
        .iter()
        .map(|a| rng.random_range(1..=max_levels.min(a.cardinality())))
        .collect();
    let offsets: Vec<usize> = Attribute::ALL
        .iter()
        .zip(&levels)
        .map(|(a, &l)| rng.random_range(0..=a.cardinality() - l))
        .collect();
    let driver = rng.random_range(0..Attribute::ALL.len());
    let rates: Vec<f64> = (0..5).map(|_| rng.random_range(0.05..0.95)).collect();
    let records = (0..n)
        .map(|i| {
            let mut r = SiteRecord::blank(format!("http://r{i}.test/"));
            for (k, &attr) in Attribute::ALL.iter().enumerate() {
                r.set_code(attr, offsets[k] + rng.random_range(0..levels[k]));
            }
            let rate = rates[r.code(Attribute::ALL[driver])];
            r.label = if rng.random_bool(rate) { Label::Spam } else { Label::NonSpam };
            r
        })
        .collect();
    Dataset::new(records)
}
