mod common;

use proptest::prelude::*;
use rand::Rng;
use spamsift_core::chaid::{
    adjusted_p, admissible_groupings, build_contingency, chi_square_p_value, extract_rules,
    group_categories, grow_tree, merge_categories, predict, select_split, CategoryGrouping,
    ChaidConfig, ChaidTree, ContingencyTable, GroupingSearch, StopReason,
};
use spamsift_core::dataset::Dataset;
use spamsift_core::record::{Attribute, AttributeKind, Label, Level, SiteRecord};
use spamsift_core::synth::{generate_synthetic, GeneratorSpec};

use common::*;

fn record(i: usize, attr: Attribute, code: usize, label: Label) -> SiteRecord {
    let mut r = SiteRecord::blank(format!("http://n{i}.test/"));
    r.set_code(attr, code);
    r.label = label;
    r
}

#[test]
fn contingency_counts_match_a_tally() {
    let data = random_dataset(&mut rng(21), 200, 5);
    for attr in Attribute::ALL {
        let table = build_contingency(data.records(), attr.name(), "label").unwrap();
        let mut tally = vec![vec![0u64; 2]; attr.cardinality()];
        for r in data.records() {
            tally[r.code(attr)][(r.label == Label::Spam) as usize] += 1;
        }
        let rows: Vec<Vec<u64>> = tally.into_iter().filter(|r| r.iter().sum::<u64>() > 0).collect();
        assert_eq!(table.observed(), rows.as_slice(), "{attr}");
        let total: f64 = table.expected().iter().flatten().sum();
        assert!((total - 200.0).abs() < 1e-9);
    }
    assert!(build_contingency(data.records(), "no_such_attribute", "label").is_err());
    assert!(build_contingency(data.records(), "meta_tag", "meta_tag").is_err());
}

#[test]
fn statistics_examples() {
    let t = ContingencyTable::from_counts(&[vec![10, 20], vec![20, 10]]);
    assert!((t.pearson_chi_square() - 6.6667).abs() < 1e-4);
    let g2 = 2.0 * (2.0 * 10.0 * (10.0f64 / 15.0).ln() + 2.0 * 20.0 * (20.0f64 / 15.0).ln());
    assert!((t.likelihood_ratio_stat() - g2).abs() < 1e-12);
    assert!((g2 - 6.79596).abs() < 1e-5);
    let with_zero = ContingencyTable::from_counts(&[vec![0, 12], vec![9, 3]]);
    assert!(with_zero.likelihood_ratio_stat().is_finite());
    assert_eq!(chi_square_p_value(0.0, 3).unwrap(), 1.0);
    assert!((chi_square_p_value(3.841, 1).unwrap() - 0.05).abs() < 5e-4);
    assert!((chi_square_p_value(6.6667, 1).unwrap() - 0.00982).abs() < 5e-4);
    assert!(chi_square_p_value(-1.0, 1).is_err());
}

#[test]
fn p_values_against_numeric_integration() {
    let mut rng = rng(31);
    for _ in 0..40 {
        let df = rng.random_range(1..=50);
        let x = rng.random_range(0.0..200.0);
        let p = chi_square_p_value(x, df).unwrap();
        assert!((p - chi_square_tail_numeric(x, df)).abs() < 1e-5, "({x}, {df})");
    }
}

#[test]
fn adjusted_p_examples() {
    // ordinal, five observed levels; the planted split is {vm, min} vs the rest
    let mut recs = Vec::new();
    for code in 0..5 {
        for k in 0..40 {
            let spam = if code < 2 { k < 4 } else { k < 20 };
            recs.push(record(recs.len(), Attribute::MetaTag, code, if spam { Label::Spam } else { Label::NonSpam }));
        }
    }
    let cfg = ChaidConfig::default();
    let singletons = CategoryGrouping::singletons(0..5);
    let raw = adjusted_p(&recs, Attribute::MetaTag, &singletons, &cfg);
    assert_eq!(raw.multiplier, 1.0);
    assert_eq!(raw.adjusted_p, raw.test.p_value);

    let two = CategoryGrouping::new(vec![vec![0, 1], vec![2, 3, 4]]);
    let adj = adjusted_p(&recs, Attribute::MetaTag, &two, &cfg);
    assert_eq!(adj.multiplier, 4.0);
    assert!((adj.adjusted_p - (4.0 * adj.test.p_value).min(1.0)).abs() < 1e-15);
}

#[test]
fn planted_blocks_group_like_the_exhaustive_search() {
    // 4 observed levels, two blocks of two with different spam rates
    let mut r = rng(41);
    let recs: Vec<SiteRecord> = (0..500)
        .map(|i| {
            let code = r.random_range(0..4);
            let rate = if code < 2 { 0.15 } else { 0.6 };
            record(i, Attribute::KeyWordPublic, code, if r.random_bool(rate) { Label::Spam } else { Label::NonSpam })
        })
        .collect();
    let cfg = ChaidConfig::default();
    let best = admissible_groupings(&[0, 1, 2, 3], AttributeKind::Ordinal)
        .into_iter()
        .min_by(|a, b| {
            adjusted_p(&recs, Attribute::KeyWordPublic, a, &cfg)
                .adjusted_p
                .total_cmp(&adjusted_p(&recs, Attribute::KeyWordPublic, b, &cfg).adjusted_p)
        })
        .unwrap();
    assert_eq!(best.groups(), &[vec![0, 1], vec![2, 3]]);
    assert_eq!(group_categories(&recs, Attribute::KeyWordPublic, &cfg), best);
    assert_eq!(merge_categories(&recs, Attribute::KeyWordPublic, &cfg), best);
}

#[test]
fn select_split_examples() {
    let cfg = ChaidConfig::default();
    let pure: Vec<SiteRecord> = (0..50).map(|i| record(i, Attribute::MetaTag, i % 5, Label::Spam)).collect();
    assert!(select_split(&pure, &Attribute::ALL, &cfg).is_none());

    let mut r = rng(51);
    let planted: Vec<SiteRecord> = (0..200)
        .map(|i| {
            let mut rec = SiteRecord::blank(format!("http://p{i}.test/"));
            for attr in Attribute::ALL {
                rec.set_code(attr, r.random_range(0..attr.cardinality()));
            }
            rec.label = if rec.black_list { Label::Spam } else { Label::NonSpam };
            rec
        })
        .collect();
    let chosen = select_split(&planted, &Attribute::ALL, &cfg).unwrap();
    assert_eq!(chosen.predictor, Attribute::BlackList);
    assert_eq!(chosen.grouping.groups(), &[vec![0], vec![1]]);

    let noise: Vec<SiteRecord> = (0..100)
        .map(|i| record(i, Attribute::CountOfPost, i % 5, if i % 2 == 0 { Label::Spam } else { Label::NonSpam }))
        .collect();
    assert!(select_split(&noise, &Attribute::ALL, &cfg).is_none());
}

#[test]
fn independent_target_gives_a_single_node() {
    let recs: Vec<SiteRecord> = (0..400)
        .map(|i| {
            let mut rec = SiteRecord::blank(format!("http://i{i}.test/"));
            rec.set_code(Attribute::MetaTag, i % 5);
            rec.set_code(Attribute::CountOfPost, (i / 5) % 5);
            rec.label = if (i / 25) % 2 == 0 { Label::Spam } else { Label::NonSpam };
            rec
        })
        .collect();
    let tree = grow_tree(&Dataset::new(recs), &ChaidConfig::default()).unwrap();
    assert_eq!(tree.nodes().len(), 1);
    assert_eq!(tree.root().stop_reason, Some(StopReason::NoQualifyingSplit));
    let rules = extract_rules(&tree);
    assert_eq!(rules.len(), 1);
    assert!(rules[0].conditions.is_empty());
}

#[test]
fn single_node_prediction_uses_class_totals() {
    let spec = GeneratorSpec { n: 4272, n_spam: 1073, rules: vec![], seed: 0 };
    let data = generate_synthetic(&spec, 0).unwrap();
    let cfg = ChaidConfig { max_depth: 1, min_parent_size: 5000, min_child_size: 10, ..ChaidConfig::default() };
    let tree = grow_tree(&data, &cfg).unwrap();
    let p = predict(&tree, &data.records()[0]);
    assert_eq!(p.label, Label::NonSpam);
    assert!((p.spam_probability - 1073.0 / 4272.0).abs() < 1e-12);
    assert!((p.spam_probability - 0.2512).abs() < 1e-4);
}

fn pattern_config(grouping: GroupingSearch) -> ChaidConfig {
    ChaidConfig { max_depth: 2, grouping, ..ChaidConfig::default() }
}

#[test]
fn pattern_a_tree_and_rules() {
    let spec = GeneratorSpec::load(&fixture("pattern_a.json")).unwrap();
    let data = generate_synthetic(&spec, 2).unwrap();
    for grouping in [GroupingSearch::Exhaustive, GroupingSearch::Merge] {
        let tree = grow_tree(&data, &pattern_config(grouping)).unwrap();
        let root = tree.root().split.as_ref().unwrap();
        assert_eq!(root.predictor, Attribute::KeyWordSpecial);
        let max_branch = root.grouping.group_of(Level::Max.index()).unwrap();
        let branch = tree.node(tree.root().children[max_branch]);
        assert!((branch.class_counts.spam_proportion() - 0.789).abs() < 0.05);
        let rules = extract_rules(&tree);
        let top = rules
            .iter()
            .find(|r| {
                r.conditions.iter().any(|c| c.predictor == Attribute::KeyWordPublic && c.codes == [Level::VeryMax.index()])
            })
            .expect("rule for public = very-max");
        assert_eq!(top.conditions[0].predictor, Attribute::KeyWordSpecial);
        assert_eq!(top.conditions[0].codes, [Level::Max.index()]);
        assert!((top.spam_proportion - 0.871).abs() < 0.05);
        check_tree_invariants(&tree, &data).unwrap();
    }
}

#[test]
fn pattern_b_branch_proportions() {
    let spec = GeneratorSpec::load(&fixture("pattern_b.json")).unwrap();
    let data = generate_synthetic(&spec, 5).unwrap();
    for grouping in [GroupingSearch::Exhaustive, GroupingSearch::Merge] {
        let tree = grow_tree(&data, &pattern_config(grouping)).unwrap();
        let root = tree.root().split.as_ref().unwrap();
        assert_eq!(root.predictor, Attribute::CountOfInternalLink);
        let branch = tree.node(tree.root().children[root.grouping.group_of(Level::Max.index()).unwrap()]);
        assert!((branch.class_counts.spam_proportion() - 0.67).abs() < 0.05);
        let split = branch.split.as_ref().unwrap();
        assert_eq!(split.predictor, Attribute::CountExternalLink);
        let leaf = tree.node(branch.children[split.grouping.group_of(Level::Max.index()).unwrap()]);
        assert!((leaf.class_counts.spam_proportion() - 0.759).abs() < 0.05);
    }
}

#[test]
fn model_serialization_is_deterministic() {
    let spec = GeneratorSpec::load(&fixture("pattern_b.json")).unwrap();
    let data = generate_synthetic(&spec, 8).unwrap();
    let a = grow_tree(&data, &ChaidConfig::default()).unwrap().to_json();
    let b = grow_tree(&data, &ChaidConfig::default()).unwrap().to_json();
    assert_eq!(a, b);
    assert_eq!(ChaidTree::from_json(&a).unwrap().to_json(), a);
}

#[test]
fn unseen_level_falls_back_to_largest_child() {
    let recs: Vec<SiteRecord> = (0..120)
        .map(|i| {
            let code = [0, 0, 4][i % 3];
            record(i, Attribute::MetaTag, code, if code == 4 { Label::Spam } else { Label::NonSpam })
        })
        .collect();
    let tree = grow_tree(&Dataset::new(recs), &ChaidConfig::default()).unwrap();
    let probe = record(999, Attribute::MetaTag, 2, Label::Unlabeled);
    let p = predict(&tree, &probe);
    assert!(p.fallback);
    assert_eq!(p.label, Label::NonSpam);
    assert_eq!(tree.node(p.leaf).class_counts.total(), 80);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn statistics_ignore_class_order(rows in proptest::collection::vec((0u64..60, 0u64..60), 2..6)) {
        let a: Vec<Vec<u64>> = rows.iter().map(|&(x, y)| vec![x, y]).collect();
        let b: Vec<Vec<u64>> = rows.iter().map(|&(x, y)| vec![y, x]).collect();
        let (ta, tb) = (ContingencyTable::from_counts(&a), ContingencyTable::from_counts(&b));
        prop_assert!((ta.pearson_chi_square() - tb.pearson_chi_square()).abs() <= 1e-9 * (1.0 + ta.pearson_chi_square()));
        prop_assert!((ta.likelihood_ratio_stat() - tb.likelihood_ratio_stat()).abs() <= 1e-9 * (1.0 + ta.likelihood_ratio_stat()));
        let (x2, _) = pearson_oracle(&a);
        prop_assert!((ta.pearson_chi_square() - x2).abs() <= 1e-9 * (1.0 + x2));
    }

    #[test]
    fn pearson_scales_with_counts(rows in proptest::collection::vec((1u64..40, 1u64..40), 2..5), k in 2u64..9) {
        let a: Vec<Vec<u64>> = rows.iter().map(|&(x, y)| vec![x, y]).collect();
        let scaled: Vec<Vec<u64>> = a.iter().map(|r| r.iter().map(|v| v * k).collect()).collect();
        let x = ContingencyTable::from_counts(&a).pearson_chi_square();
        let y = ContingencyTable::from_counts(&scaled).pearson_chi_square();
        prop_assert!((y - k as f64 * x).abs() <= 1e-9 * (1.0 + y));
    }

    #[test]
    fn near_independence_statistics_agree(base in proptest::collection::vec(20u64..60, 3), tilt in 0u64..3) {
        let rows: Vec<Vec<u64>> = base.iter().enumerate().map(|(i, &b)| vec![b * 10, b * 10 + tilt * i as u64]).collect();
        let t = ContingencyTable::from_counts(&rows);
        let (x2, g2) = (t.pearson_chi_square(), t.likelihood_ratio_stat());
        prop_assert!((x2 - g2).abs() <= 0.15 * x2.max(g2) + 1e-9);
    }

    #[test]
    fn merging_is_a_fixed_point(seed in any::<u64>()) {
        let data = random_dataset(&mut rng(seed), 150, 5);
        let cfg = ChaidConfig { grouping: GroupingSearch::Merge, ..ChaidConfig::default() };
        for attr in Attribute::ALL {
            let g = merge_categories(data.records(), attr, &cfg);
            // recode every record to its group's first code and merge again
            let recoded: Vec<SiteRecord> = data.records().iter().map(|r| {
                let mut r = r.clone();
                let grp = &g.groups()[g.group_of(r.code(attr)).unwrap()];
                r.set_code(attr, grp[0]);
                r
            }).collect();
            let again = merge_categories(&recoded, attr, &cfg);
            prop_assert_eq!(again.len(), g.len());
        }
    }

    #[test]
    fn grown_trees_satisfy_invariants(seed in any::<u64>(), n in 30usize..300, merge in any::<bool>()) {
        let data = random_dataset(&mut rng(seed), n, 5);
        let grouping = if merge { GroupingSearch::Merge } else { GroupingSearch::Exhaustive };
        let cfg = ChaidConfig { min_parent_size: 20, min_child_size: 5, grouping, ..ChaidConfig::default() };
        let tree = grow_tree(&data, &cfg).unwrap();
        prop_assert!(check_tree_invariants(&tree, &data).is_ok());
        prop_assert_eq!(extract_rules(&tree).len(), tree.leaves().count());
    }
}
