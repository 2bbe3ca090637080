//! Writing datasets to disk and rendering test-suite sources from templates.

mod dataset;
mod template;

pub use dataset::{
    format_f64, parse_arff, parse_csv, partition_to_arff, partition_to_csv, read_csv_partition,
    write_arff, write_csv, write_dataset, ArffAttribute, ArffFile, CsvTable, EmittedDataset,
    ManifestFiles, SuiteManifest, MANIFEST_FILE, MANIFEST_VERSION,
};
pub use template::{render_template, Binding, Bindings, Template, TemplateError};

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::catalog::{generate_dataset, CatalogError, Mode, SmokeTestSpec};
use crate::combinatorics::{expand, is_applicable};
use crate::descriptor::AlgorithmDescriptor;

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed data: {0}")]
    Format(String),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// Directory of generated datasets laid out as `<root>/<mode>/<ID>/`.
///
/// Datasets are generated the first time they are requested. A directory
/// whose manifest disagrees on seed or size is regenerated.
#[derive(Debug, Clone)]
pub struct DatasetStore {
    root: PathBuf,
    seed: u64,
    n: usize,
    m: usize,
}

impl DatasetStore {
    pub fn new(root: impl Into<PathBuf>, seed: u64, n: usize, m: usize) -> Self {
        Self {
            root: root.into(),
            seed,
            n,
            m,
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn dir_for(&self, spec: &SmokeTestSpec) -> PathBuf {
        self.root.join(spec.mode.as_str()).join(spec.id.as_str())
    }

    pub fn ensure(&self, spec: &SmokeTestSpec) -> Result<EmittedDataset, EmitError> {
        let dir = self.dir_for(spec);
        if let Ok(existing) = EmittedDataset::load(&dir) {
            let m = &existing.manifest;
            if m.seed == self.seed && m.n == self.n && m.m == self.m && m.mode == spec.mode {
                return Ok(existing);
            }
        }
        let dataset = generate_dataset(spec, self.seed, self.n, self.m)?;
        write_dataset(&dataset, &dir)
    }
}

fn identifier(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect()
}

/// Rendered suite file and the number of test stanzas it contains.
#[derive(Debug, Clone, PartialEq)]
pub struct EmittedSuite {
    pub path: PathBuf,
    pub stanzas: usize,
}

/// Bindings for one descriptor's suite.
///
/// Top level: `name`, `framework`, `package`, `class`, `mode`, `seed`, `n`,
/// `m`, `stanza_count` and the list `tests`. Each entry of `tests` binds
/// `test_name`, `smoketest`, `combination_index`, `varied`, `params_json`,
/// `params_text`, `feature_kind`, `manifest`, `train_csv`, `train_arff`, and
/// for classification also `test_csv` and `test_arff`.
pub fn suite_bindings(
    descriptor: &AlgorithmDescriptor,
    tests: &[SmokeTestSpec],
    store: &DatasetStore,
) -> Result<Bindings, EmitError> {
    let combos = expand(descriptor);
    let mut stanzas = Vec::new();
    for spec in tests.iter().filter(|s| is_applicable(descriptor, s)) {
        let data = store.ensure(spec)?;
        for combo in &combos {
            let params_json = serde_json::to_string(&combo.assignment)
                .map_err(|e| EmitError::Format(e.to_string()))?;
            let params_text = combo
                .assignment
                .0
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(" ");
            let mut b = Bindings::new()
                .text(
                    "test_name",
                    format!(
                        "test_{}_{}_{}",
                        identifier(&descriptor.name),
                        identifier(spec.id.as_str()),
                        combo.index
                    ),
                )
                .text("smoketest", spec.id.as_str())
                .text("combination_index", combo.index.to_string())
                .text(
                    "varied",
                    combo.varied.clone().unwrap_or_else(|| "defaults".into()),
                )
                .text("params_json", params_json)
                .text("params_text", params_text)
                .text("feature_kind", spec.feature_kind.as_str())
                .text("manifest", data.manifest_path.display().to_string())
                .text("train_csv", data.train_csv().display().to_string())
                .text("train_arff", data.train_arff().display().to_string());
            if descriptor.mode == Mode::Classification {
                b = b
                    .text("test_csv", data.test_csv().display().to_string())
                    .text("test_arff", data.test_arff().display().to_string());
            }
            stanzas.push(b);
        }
    }
    Ok(Bindings::new()
        .text("name", &descriptor.name)
        .text("framework", &descriptor.framework)
        .text("package", &descriptor.package)
        .text("class", &descriptor.class)
        .text("mode", descriptor.mode.as_str())
        .text("seed", store.seed.to_string())
        .text("n", store.n.to_string())
        .text("m", store.m.to_string())
        .text("stanza_count", stanzas.len().to_string())
        .list("tests", stanzas))
}

/// Renders one suite file, `<out_dir>/<descriptor name><extension>`, with a
/// stanza per applicable (smoke test, combination) pair.
pub fn emit_test_suite(
    descriptor: &AlgorithmDescriptor,
    tests: &[SmokeTestSpec],
    template: &Template,
    store: &DatasetStore,
    out_dir: &Path,
    extension: &str,
) -> Result<EmittedSuite, EmitError> {
    let bindings = suite_bindings(descriptor, tests, store)?;
    let stanzas = match bindings.get("tests") {
        Some(Binding::List(items)) => items.len(),
        _ => 0,
    };
    let body = template.render(&bindings)?;
    fs::create_dir_all(out_dir).map_err(|e| EmitError::Io {
        path: out_dir.to_path_buf(),
        source: e,
    })?;
    let path = out_dir.join(format!("{}{extension}", descriptor.name));
    fs::write(&path, body).map_err(|e| EmitError::Io {
        path: path.clone(),
        source: e,
    })?;
    Ok(EmittedSuite { path, stanzas })
}
