//! CSV, ARFF and JSON manifest files for generated datasets.
//!
//! CSV files carry no category metadata; the manifest is authoritative for
//! declared categories, and ARFF repeats them in its attribute declarations.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::EmitError;
use crate::catalog::{
    Dataset, DatasetMeta, LabelStrategy, Mode, Partition, PartitionRule, SmokeTestId,
};
use crate::datagen::{FeatureColumn, FeatureKind, Label, LabelVector};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

/// Shortest decimal string that parses back to exactly `x`.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        ryu::Buffer::new().format_finite(x).to_string()
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn header(m: usize, with_class: bool) -> Vec<String> {
    let mut h: Vec<String> = (1..=m).map(|j| format!("feature_{j}")).collect();
    if with_class {
        h.push("class".into());
    }
    h
}

fn cell(column: &FeatureColumn, row: usize) -> String {
    match column {
        FeatureColumn::Numeric(v) => format_f64(v[row]),
        FeatureColumn::Categorical { values, .. } => values[row].to_string(),
    }
}

fn row_cells(p: &Partition, row: usize) -> Vec<String> {
    let mut cells: Vec<String> = p.features.iter().map(|c| cell(c, row)).collect();
    if let Some(labels) = &p.labels {
        cells.push(labels.0[row].as_str().to_string());
    }
    cells
}

fn io_err(path: &Path, source: std::io::Error) -> EmitError {
    EmitError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn partition_to_csv(p: &Partition) -> Result<Vec<u8>, EmitError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| EmitError::Format(e.to_string());
    w.write_record(header(p.features.len(), p.labels.is_some()))
        .map_err(csv_err)?;
    for row in 0..p.n_instances() {
        w.write_record(row_cells(p, row)).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| EmitError::Format(e.to_string()))
}

pub fn partition_to_arff(p: &Partition, relation: &str) -> String {
    let mut out = format!("@relation {}\n\n", arff_quote(relation));
    for (j, column) in p.features.iter().enumerate() {
        match column.declared_categories() {
            None => out.push_str(&format!("@attribute feature_{} numeric\n", j + 1)),
            Some(declared) => {
                let cats: Vec<String> = declared.iter().map(u32::to_string).collect();
                out.push_str(&format!(
                    "@attribute feature_{} {{{}}}\n",
                    j + 1,
                    cats.join(",")
                ));
            }
        }
    }
    if p.labels.is_some() {
        out.push_str("@attribute class {class_0,class_1}\n");
    }
    out.push_str("\n@data\n");
    for row in 0..p.n_instances() {
        out.push_str(&row_cells(p, row).join(","));
        out.push('\n');
    }
    out
}

fn arff_quote(s: &str) -> String {
    if !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
    {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'"))
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), EmitError> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn ensure_dir(dir: &Path) -> Result<(), EmitError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

/// Test partition to write, if it differs from the training partition.
fn distinct_test(dataset: &Dataset) -> Option<&Partition> {
    match (&dataset.test, dataset.meta.test_partition_rule) {
        (Some(t), Some(PartitionRule::Distinct)) => Some(t),
        _ => None,
    }
}

/// Writes `train.csv` and, for a distinct test partition, `test.csv`.
pub fn write_csv(dataset: &Dataset, dir: &Path) -> Result<Vec<PathBuf>, EmitError> {
    ensure_dir(dir)?;
    let mut paths = vec![dir.join("train.csv")];
    write_file(&paths[0], &partition_to_csv(&dataset.train)?)?;
    if let Some(test) = distinct_test(dataset) {
        let path = dir.join("test.csv");
        write_file(&path, &partition_to_csv(test)?)?;
        paths.push(path);
    }
    Ok(paths)
}

pub fn write_arff(
    dataset: &Dataset,
    relation: &str,
    dir: &Path,
) -> Result<Vec<PathBuf>, EmitError> {
    ensure_dir(dir)?;
    let mut paths = vec![dir.join("train.arff")];
    write_file(
        &paths[0],
        partition_to_arff(&dataset.train, relation).as_bytes(),
    )?;
    if let Some(test) = distinct_test(dataset) {
        let path = dir.join("test.arff");
        write_file(
            &path,
            partition_to_arff(test, &format!("{relation}_test")).as_bytes(),
        )?;
        paths.push(path);
    }
    Ok(paths)
}

/// File names relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestFiles {
    pub train_csv: String,
    pub train_arff: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_arff: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteManifest {
    pub version: u32,
    pub smoketest: SmokeTestId,
    pub mode: Mode,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub feature_kinds: Vec<FeatureKind>,
    pub declared_categories: Vec<Option<Vec<u32>>>,
    pub label_strategy: Option<LabelStrategy>,
    pub test_partition_rule: Option<PartitionRule>,
    pub files: ManifestFiles,
}

impl SuiteManifest {
    pub fn from_meta(meta: &DatasetMeta, files: ManifestFiles) -> Self {
        SuiteManifest {
            version: MANIFEST_VERSION,
            smoketest: meta.smoketest,
            mode: meta.mode,
            seed: meta.seed,
            n: meta.n,
            m: meta.m,
            feature_kinds: vec![meta.feature_kind; meta.m],
            declared_categories: meta.declared_categories.clone(),
            label_strategy: meta.label_strategy,
            test_partition_rule: meta.test_partition_rule,
            files,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).unwrap_or_default();
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self, EmitError> {
        serde_json::from_str(text).map_err(|e| EmitError::Format(format!("manifest: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, EmitError> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        Self::parse(&text)
    }

    /// Every file the manifest references, relative to its directory.
    pub fn referenced_files(&self) -> Vec<&str> {
        let f = &self.files;
        let mut v = vec![f.train_csv.as_str(), f.train_arff.as_str()];
        v.extend(f.test_csv.as_deref());
        v.extend(f.test_arff.as_deref());
        v
    }
}

/// Paths of one dataset on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct EmittedDataset {
    pub dir: PathBuf,
    pub manifest_path: PathBuf,
    pub manifest: SuiteManifest,
}

impl EmittedDataset {
    pub fn load(dir: &Path) -> Result<Self, EmitError> {
        let manifest_path = dir.join(MANIFEST_FILE);
        let manifest = SuiteManifest::load(&manifest_path)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest_path,
            manifest,
        })
    }

    pub fn train_csv(&self) -> PathBuf {
        self.dir.join(&self.manifest.files.train_csv)
    }

    pub fn train_arff(&self) -> PathBuf {
        self.dir.join(&self.manifest.files.train_arff)
    }

    /// Test CSV; the training file when the partitions coincide.
    pub fn test_csv(&self) -> PathBuf {
        self.dir.join(
            self.manifest
                .files
                .test_csv
                .as_ref()
                .unwrap_or(&self.manifest.files.train_csv),
        )
    }

    pub fn test_arff(&self) -> PathBuf {
        self.dir.join(
            self.manifest
                .files
                .test_arff
                .as_ref()
                .unwrap_or(&self.manifest.files.train_arff),
        )
    }
}

/// Writes CSV, ARFF and the manifest for `dataset` into `dir`.
pub fn write_dataset(dataset: &Dataset, dir: &Path) -> Result<EmittedDataset, EmitError> {
    let csv_paths = write_csv(dataset, dir)?;
    let arff_paths = write_arff(dataset, dataset.meta.smoketest.as_str(), dir)?;
    let name = |p: &PathBuf| {
        p.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default()
    };
    let files = ManifestFiles {
        train_csv: name(&csv_paths[0]),
        train_arff: name(&arff_paths[0]),
        test_csv: csv_paths.get(1).map(name),
        test_arff: arff_paths.get(1).map(name),
    };
    let manifest = SuiteManifest::from_meta(&dataset.meta, files);
    let manifest_path = dir.join(MANIFEST_FILE);
    write_file(&manifest_path, manifest.to_json().as_bytes())?;
    Ok(EmittedDataset {
        dir: dir.to_path_buf(),
        manifest_path,
        manifest,
    })
}

fn parse_label(s: &str) -> Result<Label, EmitError> {
    match s.trim() {
        "class_0" => Ok(Label::Class0),
        "class_1" => Ok(Label::Class1),
        other => Err(EmitError::Format(format!("unknown class label `{other}`"))),
    }
}

fn parse_number(s: &str) -> Result<f64, EmitError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| EmitError::Format(format!("not a number: `{s}`")))
}

fn parse_category(s: &str) -> Result<u32, EmitError> {
    s.trim()
        .parse::<u32>()
        .map_err(|_| EmitError::Format(format!("not a category id: `{s}`")))
}

/// Builds a partition from string rows, one kind and category set per feature.
fn columns_from_rows(
    rows: &[Vec<String>],
    kinds: &[FeatureKind],
    declared: &[Option<Vec<u32>>],
    with_class: bool,
) -> Result<Partition, EmitError> {
    let m = kinds.len();
    let width = m + usize::from(with_class);
    let mut numeric: Vec<Vec<f64>> = vec![Vec::new(); m];
    let mut categorical: Vec<Vec<u32>> = vec![Vec::new(); m];
    let mut labels = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(EmitError::Format(format!(
                "row {} has {} fields, expected {width}",
                i + 1,
                row.len()
            )));
        }
        for j in 0..m {
            match kinds[j] {
                FeatureKind::Numeric => numeric[j].push(parse_number(&row[j])?),
                FeatureKind::Categorical => categorical[j].push(parse_category(&row[j])?),
            }
        }
        if with_class {
            labels.push(parse_label(&row[m])?);
        }
    }
    let features = (0..m)
        .map(|j| match kinds[j] {
            FeatureKind::Numeric => FeatureColumn::Numeric(std::mem::take(&mut numeric[j])),
            FeatureKind::Categorical => FeatureColumn::Categorical {
                values: std::mem::take(&mut categorical[j]),
                declared: declared.get(j).cloned().flatten().unwrap_or_default(),
            },
        })
        .collect();
    Ok(Partition {
        features,
        labels: with_class.then_some(LabelVector(labels)),
    })
}

/// Raw CSV contents: header and string rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn has_class(&self) -> bool {
        self.header.last().is_some_and(|h| h == "class")
    }

    pub fn feature_count(&self) -> usize {
        self.header.len() - usize::from(self.has_class())
    }

    /// All feature cells parsed as floats (category ids included).
    pub fn feature_values(&self) -> Result<Vec<f64>, EmitError> {
        let m = self.feature_count();
        let mut out = Vec::with_capacity(self.rows.len() * m);
        for row in &self.rows {
            for v in row.iter().take(m) {
                out.push(parse_number(v)?);
            }
        }
        Ok(out)
    }
}

pub fn parse_csv(bytes: &[u8]) -> Result<CsvTable, EmitError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(bytes);
    let header = reader
        .headers()
        .map_err(|e| EmitError::Format(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| EmitError::Format(e.to_string()))?;
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok(CsvTable { header, rows })
}

/// Reads a CSV partition, taking kinds and categories from the manifest.
pub fn read_csv_partition(bytes: &[u8], manifest: &SuiteManifest) -> Result<Partition, EmitError> {
    let table = parse_csv(bytes)?;
    let expected = header(manifest.m, table.has_class());
    if table.header != expected {
        return Err(EmitError::Format(format!(
            "unexpected header {:?}, expected {:?}",
            table.header, expected
        )));
    }
    columns_from_rows(
        &table.rows,
        &manifest.feature_kinds,
        &manifest.declared_categories,
        table.has_class(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArffAttribute {
    pub name: String,
    /// `None` for numeric attributes, otherwise the declared nominal values.
    pub nominal: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArffFile {
    pub relation: String,
    pub attributes: Vec<ArffAttribute>,
    pub rows: Vec<Vec<String>>,
}

/// Parses the ARFF subset written by [`partition_to_arff`]: numeric and
/// nominal attributes, dense comma-separated data, `%` comments.
pub fn parse_arff(text: &str) -> Result<ArffFile, EmitError> {
    let mut relation = None;
    let mut attributes = Vec::new();
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut in_data = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let err = |msg: &str| EmitError::Format(format!("arff line {}: {msg}", lineno + 1));
        if in_data {
            rows.push(line.split(',').map(|s| s.trim().to_string()).collect());
            continue;
        }
        let lower = line.to_ascii_lowercase();
        if lower.starts_with("@relation") {
            relation = Some(unquote(line["@relation".len()..].trim()));
        } else if lower.starts_with("@attribute") {
            let rest = line["@attribute".len()..].trim();
            let (name, ty) = split_attribute(rest).ok_or_else(|| err("malformed attribute"))?;
            let ty_trim = ty.trim();
            let nominal = if ty_trim.starts_with('{') {
                let inner = ty_trim
                    .strip_prefix('{')
                    .and_then(|s| s.strip_suffix('}'))
                    .ok_or_else(|| err("unterminated nominal set"))?;
                Some(
                    inner
                        .split(',')
                        .map(|s| unquote(s.trim()))
                        .filter(|s| !s.is_empty())
                        .collect(),
                )
            } else if matches!(
                ty_trim.to_ascii_lowercase().as_str(),
                "numeric" | "real" | "integer"
            ) {
                None
            } else {
                return Err(err("unsupported attribute type"));
            };
            attributes.push(ArffAttribute { name, nominal });
        } else if lower.starts_with("@data") {
            in_data = true;
        } else {
            return Err(err("unexpected header line"));
        }
    }
    let relation = relation.ok_or_else(|| EmitError::Format("arff: missing @relation".into()))?;
    if !in_data {
        return Err(EmitError::Format("arff: missing @data".into()));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != attributes.len() {
            return Err(EmitError::Format(format!(
                "arff data row {} has {} fields, expected {}",
                i + 1,
                row.len(),
                attributes.len()
            )));
        }
    }
    Ok(ArffFile {
        relation,
        attributes,
        rows,
    })
}

fn split_attribute(rest: &str) -> Option<(String, &str)> {
    if let Some(stripped) = rest.strip_prefix('\'') {
        let end = stripped.find('\'')?;
        Some((stripped[..end].to_string(), &stripped[end + 1..]))
    } else {
        let end = rest.find(char::is_whitespace)?;
        Some((rest[..end].to_string(), &rest[end..]))
    }
}

fn unquote(s: &str) -> String {
    s.strip_prefix('\'')
        .and_then(|s| s.strip_suffix('\''))
        .map(|s| s.replace("\\'", "'").replace("\\\\", "\\"))
        .unwrap_or_else(|| s.to_string())
}

impl ArffFile {
    /// Converts to a partition. Nominal feature attributes must hold integer ids.
    pub fn to_partition(&self) -> Result<Partition, EmitError> {
        let with_class = self.attributes.last().is_some_and(|a| a.name == "class");
        let m = self.attributes.len() - usize::from(with_class);
        let mut kinds = Vec::with_capacity(m);
        let mut declared = Vec::with_capacity(m);
        for a in &self.attributes[..m] {
            match &a.nominal {
                None => {
                    kinds.push(FeatureKind::Numeric);
                    declared.push(None);
                }
                Some(values) => {
                    kinds.push(FeatureKind::Categorical);
                    declared.push(Some(
                        values
                            .iter()
                            .map(|v| parse_category(v))
                            .collect::<Result<Vec<_>, _>>()?,
                    ));
                }
            }
        }
        columns_from_rows(&self.rows, &kinds, &declared, with_class)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{find_test, generate_dataset};

    fn dataset(mode: Mode, id: SmokeTestId, n: usize, m: usize) -> Dataset {
        generate_dataset(&find_test(mode, id).unwrap(), 42, n, m).unwrap()
    }

    #[test]
    fn csv_header_and_rows() {
        let d = dataset(Mode::Classification, SmokeTestId::UNIFORM, 1, 2);
        let text = String::from_utf8(partition_to_csv(&d.train).unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("feature_1,feature_2,class"));
        assert_eq!(lines.count(), 1);

        let c = dataset(Mode::Clustering, SmokeTestId::UNIFORM, 3, 2);
        let text = String::from_utf8(partition_to_csv(&c.train).unwrap()).unwrap();
        assert_eq!(text.lines().next(), Some("feature_1,feature_2"));
    }

    #[test]
    fn max_double_survives_csv() {
        let d = dataset(Mode::Classification, SmokeTestId::MAXDOUBLE, 20, 3);
        let bytes = partition_to_csv(&d.train).unwrap();
        let table = parse_csv(&bytes).unwrap();
        for (i, row) in table.rows.iter().enumerate() {
            for (j, col) in d.train.features.iter().enumerate() {
                assert_eq!(row[j].parse::<f64>().unwrap(), col.value_f64(i));
            }
        }
    }

    #[test]
    fn format_is_shortest_round_trip() {
        assert_eq!(format_f64(0.0), "0.0");
        assert_eq!(format_f64(1.7e308), "1.7e308");
        assert_eq!(format_f64(1e10), "10000000000.0");
        for x in [1e-15, 3.4e38, 0.1 + 0.2, f64::MIN_POSITIVE] {
            assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn arff_declares_unobserved_categories() {
        let d = dataset(Mode::Classification, SmokeTestId::STARVEDBINARY, 5, 2);
        let text = partition_to_arff(&d.train, "STARVEDBINARY");
        assert!(text.contains("@attribute feature_1 {0,1}"));
        assert!(text.contains("@attribute feature_2 {0,1}"));
        assert!(text.contains("@attribute class {class_0,class_1}"));
        let parsed = parse_arff(&text).unwrap();
        assert_eq!(parsed.relation, "STARVEDBINARY");
        assert_eq!(parsed.to_partition().unwrap(), d.train);
    }

    #[test]
    fn arff_numeric_attributes() {
        let d = dataset(Mode::Classification, SmokeTestId::UNIFORM, 4, 3);
        let parsed = parse_arff(&partition_to_arff(&d.train, "u")).unwrap();
        assert!(parsed.attributes[..3].iter().all(|a| a.nominal.is_none()));
        assert_eq!(parsed.to_partition().unwrap(), d.train);
    }

    #[test]
    fn arff_declared_order_matches_meta() {
        let d = dataset(Mode::Classification, SmokeTestId::DISJCAT, 10, 2);
        let parsed = parse_arff(&partition_to_arff(&d.train, "d")).unwrap();
        let expected: Vec<String> = d.meta.declared_categories[0]
            .as_ref()
            .unwrap()
            .iter()
            .map(u32::to_string)
            .collect();
        assert_eq!(parsed.attributes[0].nominal.as_ref().unwrap(), &expected);
    }

    #[test]
    fn malformed_arff_rejected() {
        assert!(parse_arff("@relation x\n@attribute a string\n@data\n").is_err());
        assert!(parse_arff("@attribute a numeric\n@data\n").is_err());
        assert!(parse_arff("@relation x\n@attribute a numeric\n@data\n1,2\n").is_err());
    }

    #[test]
    fn write_dataset_layout_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let d = dataset(Mode::Classification, SmokeTestId::DISJNUM, 10, 2);
        let emitted = write_dataset(&d, dir.path()).unwrap();
        for f in emitted.manifest.referenced_files() {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let mut on_disk: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .filter(|n| n != MANIFEST_FILE)
            .collect();
        on_disk.sort();
        let mut referenced: Vec<_> = emitted
            .manifest
            .referenced_files()
            .into_iter()
            .map(str::to_string)
            .collect();
        referenced.sort();
        assert_eq!(on_disk, referenced);

        let reloaded = EmittedDataset::load(dir.path()).unwrap();
        assert_eq!(reloaded.manifest, emitted.manifest);
        let test = read_csv_partition(&fs::read(reloaded.test_csv()).unwrap(), &reloaded.manifest)
            .unwrap();
        assert_eq!(&test, d.test.as_ref().unwrap());
    }

    #[test]
    fn write_fails_with_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, b"x").unwrap();
        let d = dataset(Mode::Classification, SmokeTestId::UNIFORM, 2, 1);
        let err = write_csv(&d, &blocker.join("sub")).unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }
}
