//! Python bindings: `import spamsift`.
//!
//! Records cross the boundary as dicts mapping `url`, `label` and the eight
//! attribute names to their level strings (`"very-min"` .. `"very-max"`,
//! `"yes"`/`"no"` for `black_list`).

use std::path::PathBuf;

use pyo3::exceptions::{PyKeyError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use spamsift_core::chaid::{self, ChaidConfig};
use spamsift_core::config::{AppConfig, Extractor as CoreExtractor};
use spamsift_core::dataset::Dataset as CoreDataset;
use spamsift_core::features::PageDocument;
use spamsift_core::metrics::{self, MeanStd};
use spamsift_core::pattern_match::{self, KeywordSet as CoreKeywordSet, KmpPattern as CoreKmp};
use spamsift_core::record::{Attribute, Label, SiteRecord};
use spamsift_core::synth::{self, GeneratorSpec};
use spamsift_core::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn record_to_dict<'py>(py: Python<'py>, r: &SiteRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("url", &r.url)?;
    for attr in Attribute::ALL {
        d.set_item(attr.name(), attr.level_name(r.code(attr)))?;
    }
    d.set_item("label", r.label.as_str())?;
    Ok(d)
}

fn record_from_dict(d: &Bound<'_, PyDict>) -> PyResult<SiteRecord> {
    let get = |key: &str| -> PyResult<String> {
        d.get_item(key)?
            .ok_or_else(|| PyKeyError::new_err(key.to_string()))?
            .extract()
    };
    let mut r = SiteRecord::blank(get("url")?);
    for attr in Attribute::ALL {
        let code = attr.parse_level(&get(attr.name())?).map_err(err)?;
        r.set_code(attr, code);
    }
    r.label = match d.get_item("label")? {
        Some(v) => v.extract::<String>()?.parse::<Label>().map_err(err)?,
        None => Label::Unlabeled,
    };
    Ok(r)
}

/// ChaidConfig from keyword arguments, with the same keys as the JSON config.
fn chaid_config(py: Python<'_>, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<ChaidConfig> {
    let Some(kwargs) = kwargs else {
        return Ok(ChaidConfig::default());
    };
    let json: String = py.import("json")?.call_method1("dumps", (kwargs,))?.extract()?;
    let config: ChaidConfig =
        serde_json::from_str(&json).map_err(|e| PyValueError::new_err(format!("chaid config: {e}")))?;
    config.validate().map_err(err)?;
    Ok(config)
}

fn mean_std<'py>(py: Python<'py>, m: &MeanStd) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("mean", m.mean)?;
    d.set_item("stdev", m.stdev)?;
    Ok(d)
}

/// Case-insensitive (ASCII) Knuth-Morris-Pratt pattern.
#[pyclass(frozen)]
struct KmpPattern(CoreKmp);

#[pymethods]
impl KmpPattern {
    #[new]
    fn new(pattern: &str) -> PyResult<Self> {
        CoreKmp::new(pattern).map(KmpPattern).map_err(err)
    }

    /// Byte offsets of every (possibly overlapping) match.
    fn find_all(&self, text: &str) -> Vec<usize> {
        self.0.find_all(text)
    }

    fn is_match(&self, text: &str) -> bool {
        self.0.is_match(text)
    }

    #[getter]
    fn failure(&self) -> Vec<usize> {
        self.0.failure().to_vec()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("KmpPattern({:?})", self.0.as_str())
    }
}

#[pyfunction]
fn kmp_search(text: &str, pattern: &str) -> PyResult<Vec<usize>> {
    Ok(pattern_match::kmp_search(text, &CoreKmp::new(pattern).map_err(err)?))
}

#[pyclass(frozen)]
struct KeywordSet(CoreKeywordSet);

#[pymethods]
impl KeywordSet {
    #[new]
    #[pyo3(signature = (special, public, special_score = 10, public_score = 5))]
    fn new(special: Vec<String>, public: Vec<String>, special_score: u32, public_score: u32) -> PyResult<Self> {
        CoreKeywordSet::new(&special, &public, special_score, public_score)
            .map(KeywordSet)
            .map_err(err)
    }

    /// Keyword score of `text`: each distinct keyword found counts once.
    fn score(&self, text: &str) -> u32 {
        pattern_match::score_keywords(text, &self.0)
    }
}

/// Page to record extraction with a fixed blacklist, keyword lists and thresholds.
#[pyclass(frozen)]
struct Extractor(CoreExtractor);

#[pymethods]
impl Extractor {
    /// Built-in defaults, or the lists and thresholds named by a JSON config file.
    #[new]
    #[pyo3(signature = (config = None))]
    fn new(config: Option<PathBuf>) -> PyResult<Self> {
        let app = match config {
            Some(p) => AppConfig::load(&p).map_err(err)?,
            None => AppConfig::default(),
        };
        app.extractor().map(Extractor).map_err(err)
    }

    fn extract<'py>(&self, py: Python<'py>, url: &str, html: &str) -> PyResult<Bound<'py, PyDict>> {
        let page = PageDocument {
            url: url.to_string(),
            html: html.to_string(),
            fetched_from: PathBuf::new(),
        };
        record_to_dict(py, &self.0.extract(&page).map_err(err)?)
    }

    /// Extracts every page listed in `<corpus>/manifest.csv`; returns the
    /// dataset and the list of warnings.
    fn extract_corpus(&self, corpus: PathBuf) -> PyResult<(Dataset, Vec<String>)> {
        let out = spamsift_core::corpus::extract_corpus(&corpus, &self.0).map_err(err)?;
        Ok((Dataset(out.dataset), out.warnings))
    }
}

#[pyclass(frozen)]
struct Dataset(CoreDataset);

#[pymethods]
impl Dataset {
    #[new]
    #[pyo3(signature = (records = None))]
    fn new(records: Option<&Bound<'_, PyList>>) -> PyResult<Self> {
        let mut out = Vec::new();
        if let Some(list) = records {
            for item in list.iter() {
                out.push(record_from_dict(item.cast::<PyDict>()?)?);
            }
        }
        Ok(Dataset(CoreDataset::new(out)))
    }

    #[staticmethod]
    fn load_csv(path: PathBuf) -> PyResult<Self> {
        CoreDataset::load_csv(&path).map(Dataset).map_err(err)
    }

    fn save_csv(&self, path: PathBuf) -> PyResult<()> {
        self.0.save_csv(&path).map_err(err)
    }

    fn records<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.0.records().iter().map(|r| record_to_dict(py, r)).collect()
    }

    /// `(spam, nonspam, unknown)`.
    fn label_counts(&self) -> (usize, usize, usize) {
        self.0.label_counts()
    }

    fn labeled(&self) -> Dataset {
        Dataset(self.0.labeled())
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        let (s, n, u) = self.0.label_counts();
        format!("Dataset({} records: spam {s}, nonspam {n}, unknown {u})", self.0.len())
    }
}

/// Seeded synthetic dataset from a generator spec given as a JSON string.
#[pyfunction]
#[pyo3(signature = (spec_json, seed = None))]
fn generate_synthetic(spec_json: &str, seed: Option<u64>) -> PyResult<Dataset> {
    let spec = GeneratorSpec::from_json(spec_json).map_err(err)?;
    synth::generate_synthetic(&spec, seed.unwrap_or(spec.seed))
        .map(Dataset)
        .map_err(err)
}

#[pyclass(frozen)]
struct ChaidTree(chaid::ChaidTree);

#[pymethods]
impl ChaidTree {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        chaid::ChaidTree::load(&path).map(ChaidTree).map_err(err)
    }

    #[staticmethod]
    fn from_json(src: &str) -> PyResult<Self> {
        chaid::ChaidTree::from_json(src).map(ChaidTree).map_err(err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.0.save(&path).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn to_dot(&self) -> String {
        self.0.to_dot()
    }

    #[getter]
    fn depth(&self) -> usize {
        self.0.depth()
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.0.nodes().len()
    }

    fn predict<'py>(&self, py: Python<'py>, record: &Bound<'py, PyDict>) -> PyResult<Bound<'py, PyDict>> {
        let p = chaid::predict(&self.0, &record_from_dict(record)?);
        let d = PyDict::new(py);
        d.set_item("label", p.label.as_str())?;
        d.set_item("spam_probability", p.spam_probability)?;
        d.set_item("leaf", p.leaf)?;
        d.set_item("fallback", p.fallback)?;
        Ok(d)
    }

    /// One dict per leaf, most spam-dense first. `text` is the printable rule.
    fn rules<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        chaid::extract_rules(&self.0)
            .iter()
            .map(|r| {
                let d = PyDict::new(py);
                let conds: Vec<(&str, Vec<&str>)> = r
                    .conditions
                    .iter()
                    .map(|c| (c.predictor.name(), c.codes.iter().map(|&k| c.predictor.level_name(k)).collect()))
                    .collect();
                d.set_item("conditions", conds)?;
                d.set_item("leaf", r.leaf)?;
                d.set_item("spam_count", r.spam_count)?;
                d.set_item("total_count", r.total_count)?;
                d.set_item("spam_proportion", r.spam_proportion)?;
                d.set_item("text", r.to_string())?;
                Ok(d)
            })
            .collect()
    }
}

/// Grows a tree on the labeled rows of `dataset`. Keyword arguments override
/// the defaults: alpha_merge, alpha_split, statistic, grouping, max_depth,
/// min_parent_size, min_child_size.
#[pyfunction]
#[pyo3(signature = (dataset, **config))]
fn grow_tree(py: Python<'_>, dataset: &Dataset, config: Option<&Bound<'_, PyDict>>) -> PyResult<ChaidTree> {
    let config = chaid_config(py, config)?;
    chaid::grow_tree(&dataset.0.labeled(), &config)
        .map(ChaidTree)
        .map_err(err)
}

/// k-fold cross-validation; returns precision, recall and F (mean and
/// stdev), the pooled confusion matrix and the per-fold CSV report.
#[pyfunction]
#[pyo3(signature = (dataset, k = 10, seed = 42, **config))]
fn cross_validate<'py>(
    py: Python<'py>,
    dataset: &Dataset,
    k: usize,
    seed: u64,
    config: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyDict>> {
    let config = chaid_config(py, config)?;
    let cv = metrics::cross_validate(&dataset.0.labeled(), &config, k, seed).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("precision", mean_std(py, &cv.precision)?)?;
    d.set_item("recall", mean_std(py, &cv.recall)?)?;
    d.set_item("f_measure", mean_std(py, &cv.f_measure)?)?;
    let pooled = PyDict::new(py);
    pooled.set_item("tp", cv.pooled.tp)?;
    pooled.set_item("fp", cv.pooled.fp)?;
    pooled.set_item("tn", cv.pooled.tn)?;
    pooled.set_item("fn", cv.pooled.fn_)?;
    d.set_item("pooled", pooled)?;
    d.set_item("report", cv.to_csv())?;
    Ok(d)
}

#[pymodule]
fn spamsift(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<KmpPattern>()?;
    m.add_class::<KeywordSet>()?;
    m.add_class::<Extractor>()?;
    m.add_class::<Dataset>()?;
    m.add_class::<ChaidTree>()?;
    m.add_function(wrap_pyfunction!(kmp_search, m)?)?;
    m.add_function(wrap_pyfunction!(generate_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(grow_tree, m)?)?;
    m.add_function(wrap_pyfunction!(cross_validate, m)?)?;
    Ok(())
}
