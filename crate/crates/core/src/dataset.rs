//! Record collections: CSV persistence, seeded train/test splits and k-fold plans.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::record::{Attribute, Label, SiteRecord};

pub const CSV_HEADER: [&str; 10] = [
    "url",
    "black_list",
    "feature_of_url",
    "meta_tag",
    "key_word_special",
    "key_word_public",
    "count_of_internal_link",
    "count_external_link",
    "count_of_post",
    "label",
];

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    records: Vec<SiteRecord>,
}

impl Dataset {
    pub fn new(records: Vec<SiteRecord>) -> Self {
        Dataset { records }
    }

    pub fn records(&self) -> &[SiteRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<SiteRecord> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn attribute_names() -> [&'static str; 8] {
        Attribute::ALL.map(Attribute::name)
    }

    /// `(spam, non-spam, unlabeled)` counts.
    pub fn label_counts(&self) -> (usize, usize, usize) {
        self.records.iter().fold((0, 0, 0), |(s, n, u), r| match r.label {
            Label::Spam => (s + 1, n, u),
            Label::NonSpam => (s, n + 1, u),
            Label::Unlabeled => (s, n, u + 1),
        })
    }

    /// Copy without unlabeled records.
    pub fn labeled(&self) -> Dataset {
        Dataset::new(
            self.records
                .iter()
                .filter(|r| r.label.is_labeled())
                .cloned()
                .collect(),
        )
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset::new(indices.iter().map(|&i| self.records[i].clone()).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Validation(format!("csv write failed: {e}"));
        w.write_record(CSV_HEADER).map_err(io)?;
        for r in &self.records {
            let mut row = Vec::with_capacity(CSV_HEADER.len());
            row.push(r.url.as_str());
            for attr in Attribute::ALL {
                row.push(attr.level_name(r.code(attr)));
            }
            row.push(r.label.as_str());
            w.write_record(&row).map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::Validation(format!("csv write failed: {e}")))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(input);
        let mut records = Vec::new();
        let mut saw_header = false;
        for (i, row) in reader.records().enumerate() {
            let row = row.map_err(|e| Error::Parse {
                line: e.position().map_or(i as u64 + 1, |p| p.line()),
                message: e.to_string(),
            })?;
            let line = row.position().map_or(i as u64 + 1, |p| p.line());
            if i == 0 {
                if row.iter().ne(CSV_HEADER) {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected header {}", CSV_HEADER.join(",")),
                    });
                }
                saw_header = true;
                continue;
            }
            if row.len() != CSV_HEADER.len() {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} columns, found {}", CSV_HEADER.len(), row.len()),
                });
            }
            let parse_err = |e: Error| Error::Parse {
                line,
                message: e.to_string(),
            };
            let mut rec = SiteRecord::blank(&row[0]);
            for (col, attr) in Attribute::ALL.into_iter().enumerate() {
                let code = attr.parse_level(&row[col + 1]).map_err(parse_err)?;
                rec.set_code(attr, code);
            }
            rec.label = row[9].parse().map_err(parse_err)?;
            records.push(rec);
        }
        if !saw_header {
            return Err(Error::Parse {
                line: 1,
                message: "missing header".into(),
            });
        }
        Ok(Dataset { records })
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Dataset::read_csv(std::io::BufReader::new(file))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    /// Keep each label's share equal in both parts.
    pub stratify: bool,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train fraction must lie in (0, 1), got {train_fraction}"
            )));
        }
        Ok(SplitSpec {
            train_fraction,
            seed,
            stratify: false,
        })
    }

    pub fn stratified(mut self) -> Self {
        self.stratify = true;
        self
    }
}

/// Seeded shuffle-and-cut split with `round(train_fraction * N)` training
/// records. Both parts keep the input's relative record order.
pub fn split_train_test(dataset: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    SplitSpec::new(spec.train_fraction, spec.seed)?;
    if dataset.is_empty() {
        return Err(Error::Validation("cannot split an empty dataset".into()));
    }
    let n = dataset.len();
    let n_train = (spec.train_fraction * n as f64).round() as usize;
    let mut rng = rng(spec.seed);
    let mut train = Vec::with_capacity(n_train);
    let mut test = Vec::with_capacity(n - n_train);

    if spec.stratify {
        let mut strata: Vec<Vec<usize>> = [Label::Spam, Label::NonSpam, Label::Unlabeled]
            .iter()
            .map(|&l| (0..n).filter(|&i| dataset.records[i].label == l).collect())
            .collect();
        // per-stratum quotas, with the rounding remainder settled on the largest stratum
        let mut quotas: Vec<usize> = strata
            .iter()
            .map(|s| (spec.train_fraction * s.len() as f64).round() as usize)
            .collect();
        let largest = (0..strata.len()).max_by_key(|&i| strata[i].len()).unwrap_or(0);
        let assigned: usize = quotas.iter().sum();
        quotas[largest] = (quotas[largest] + n_train)
            .saturating_sub(assigned)
            .min(strata[largest].len());
        for (stratum, quota) in strata.iter_mut().zip(quotas) {
            stratum.shuffle(&mut rng);
            train.extend_from_slice(&stratum[..quota]);
            test.extend_from_slice(&stratum[quota..]);
        }
    } else {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((dataset.subset(&train), dataset.subset(&test)))
}

/// Assignment of record indices to `k` folds whose sizes differ by at most one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    assignment: Vec<usize>,
}

impl FoldPlan {
    pub fn new(n: usize, k: usize, seed: u64) -> Result<Self> {
        if k < 2 {
            return Err(Error::Config(format!("k must be at least 2, got {k}")));
        }
        if k > n {
            return Err(Error::Config(format!("k = {k} exceeds the {n} records")));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng(seed));
        let mut assignment = vec![0; n];
        for (pos, &idx) in order.iter().enumerate() {
            assignment[idx] = pos % k;
        }
        Ok(FoldPlan { k, assignment })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Fold index of every record.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] != fold)
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }
}

pub fn k_fold(dataset: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    FoldPlan::new(dataset.len(), k, seed)
}
