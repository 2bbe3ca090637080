//! The fixed library of smoke-test datasets.
//!
//! Each entry pairs a feature recipe with a labeling strategy. The clustering
//! catalog is derived from the classification one by dropping labels and test
//! partitions and merging entries whose training features become identical.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datagen::{
    self, DatagenError, FeatureColumn, FeatureKind, GammaSpec, Label, LabelVector, RandomStream,
};

pub const LABEL_NOISE: f64 = 0.1;
pub const DEFAULT_INSTANCES: usize = 100;
pub const DEFAULT_FEATURES: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Datagen(#[from] DatagenError),
    #[error("unknown smoke test id `{0}`")]
    UnknownId(String),
}

macro_rules! smoke_ids {
    ($($id:ident),+ $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[allow(clippy::upper_case_acronyms)]
        pub enum SmokeTestId { $($id),+ }

        impl SmokeTestId {
            /// All ids in catalog order.
            pub const ALL: &'static [SmokeTestId] = &[$(SmokeTestId::$id),+];

            pub fn as_str(self) -> &'static str {
                match self { $(SmokeTestId::$id => stringify!($id)),+ }
            }
        }

        impl FromStr for SmokeTestId {
            type Err = CatalogError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.trim().to_ascii_uppercase().as_str() {
                    $(stringify!($id) => Ok(SmokeTestId::$id),)+
                    _ => Err(CatalogError::UnknownId(s.to_string())),
                }
            }
        }
    };
}

smoke_ids!(
    UNIFORM,
    CATEGORICAL,
    MINFLOAT,
    VERYSMALL,
    MINDOUBLE,
    MAXFLOAT,
    VERYLARGE,
    MAXDOUBLE,
    SPLIT,
    LEFTSKEW,
    RIGHTSKEW,
    ONECLASS,
    BIAS,
    OUTLIER,
    ZEROS,
    RANDNUM,
    RANDCAT,
    DISJNUM,
    DISJCAT,
    MANYCATS,
    STARVEDMANY,
    STARVEDBINARY,
);

impl fmt::Display for SmokeTestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Classification,
    Clustering,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Classification => "classification",
            Mode::Clustering => "clustering",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "classification" => Ok(Mode::Classification),
            "clustering" => Ok(Mode::Clustering),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelStrategy {
    Rectangle,
    Random,
    OneClass,
    Bias,
}

impl LabelStrategy {
    pub fn is_noisy(self) -> bool {
        self == LabelStrategy::Rectangle
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionRule {
    SameAsTrain,
    Distinct,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmokeTestSpec {
    pub id: SmokeTestId,
    pub mode: Mode,
    pub feature_kind: FeatureKind,
    /// `None` for clustering entries.
    pub label_strategy: Option<LabelStrategy>,
    /// `None` for clustering entries, which have no test partition.
    pub test_partition_rule: Option<PartitionRule>,
    pub description: &'static str,
}

fn classification_entry(id: SmokeTestId) -> SmokeTestSpec {
    use FeatureKind::*;
    use LabelStrategy::*;
    use SmokeTestId::*;
    let (kind, labels, description) = match id {
        UNIFORM => (Numeric, Rectangle, "uniform features in [0, 1]"),
        CATEGORICAL => (
            Categorical,
            Rectangle,
            "ten equally likely categories per feature",
        ),
        MINFLOAT => (
            Numeric,
            Rectangle,
            "uniform in [0, 1e-6], around single precision epsilon",
        ),
        VERYSMALL => (Numeric, Rectangle, "uniform in [0, 1e-10]"),
        MINDOUBLE => (
            Numeric,
            Rectangle,
            "uniform in [0, 1e-15], around double precision epsilon",
        ),
        MAXFLOAT => (
            Numeric,
            Rectangle,
            "uniform in [0, 3.4e38], near the single precision maximum",
        ),
        VERYLARGE => (Numeric, Rectangle, "uniform in [0, 1e100]"),
        MAXDOUBLE => (
            Numeric,
            Rectangle,
            "uniform in [0, 1.7e308], near the double precision maximum",
        ),
        SPLIT => (
            Numeric,
            Random,
            "each value from [0, 1e-5] or [1e10, 1e11] with equal odds",
        ),
        LEFTSKEW => (
            Numeric,
            Rectangle,
            "negated gamma(0.1, 4.0), long left tail",
        ),
        RIGHTSKEW => (Numeric, Rectangle, "gamma(0.1, 4.0), long right tail"),
        ONECLASS => (Numeric, OneClass, "uniform in [0, 1], a single class"),
        BIAS => (Numeric, Bias, "uniform in [0, 1], one minority instance"),
        OUTLIER => (
            Numeric,
            Rectangle,
            "uniform in [0, 1e-5] plus one instance at 1e10",
        ),
        ZEROS => (Numeric, Rectangle, "every value is 0.0"),
        RANDNUM => (
            Numeric,
            Random,
            "uniform in [0, 1] with uninformative labels",
        ),
        RANDCAT => (
            Categorical,
            Random,
            "two categories with uninformative labels",
        ),
        DISJNUM => (Numeric, Rectangle, "train in [0, 1], test in [100, 101]"),
        DISJCAT => (
            Categorical,
            Rectangle,
            "train categories 0-9, test categories 10-19",
        ),
        MANYCATS => (
            Categorical,
            Rectangle,
            "10000 declared categories per feature",
        ),
        STARVEDMANY => (Categorical, Random, "every instance has its own category"),
        STARVEDBINARY => (
            Categorical,
            Rectangle,
            "two declared categories, one observed per feature",
        ),
    };
    let partition = match id {
        DISJNUM | DISJCAT => PartitionRule::Distinct,
        _ => PartitionRule::SameAsTrain,
    };
    SmokeTestSpec {
        id,
        mode: Mode::Classification,
        feature_kind: kind,
        label_strategy: Some(labels),
        test_partition_rule: Some(partition),
        description,
    }
}

pub fn list_classification_tests() -> Vec<SmokeTestSpec> {
    SmokeTestId::ALL
        .iter()
        .map(|id| classification_entry(*id))
        .collect()
}

/// The id whose clustering dataset `id` would duplicate, if any.
pub fn clustering_duplicate_of(id: SmokeTestId) -> Option<SmokeTestId> {
    use SmokeTestId::*;
    match id {
        RANDNUM | ONECLASS | BIAS | DISJNUM => Some(UNIFORM),
        RANDCAT | DISJCAT => Some(CATEGORICAL),
        _ => None,
    }
}

pub fn list_clustering_tests() -> Vec<SmokeTestSpec> {
    list_classification_tests()
        .into_iter()
        .filter(|s| clustering_duplicate_of(s.id).is_none())
        .map(|s| SmokeTestSpec {
            mode: Mode::Clustering,
            label_strategy: None,
            test_partition_rule: None,
            ..s
        })
        .collect()
}

pub fn list_tests(mode: Mode) -> Vec<SmokeTestSpec> {
    match mode {
        Mode::Classification => list_classification_tests(),
        Mode::Clustering => list_clustering_tests(),
    }
}

pub fn find_test(mode: Mode, id: SmokeTestId) -> Option<SmokeTestSpec> {
    list_tests(mode).into_iter().find(|s| s.id == id)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub smoketest: SmokeTestId,
    pub mode: Mode,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub feature_kind: FeatureKind,
    /// One entry per feature; `None` for numeric features.
    pub declared_categories: Vec<Option<Vec<u32>>>,
    pub label_strategy: Option<LabelStrategy>,
    pub test_partition_rule: Option<PartitionRule>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub features: Vec<FeatureColumn>,
    pub labels: Option<LabelVector>,
}

impl Partition {
    pub fn n_instances(&self) -> usize {
        self.features.first().map_or(0, FeatureColumn::len)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub train: Partition,
    /// Always present for classification, absent for clustering.
    pub test: Option<Partition>,
    /// Training labels before noise was applied (classification only).
    pub train_clean_labels: Option<LabelVector>,
}

struct Labeled {
    features: Vec<FeatureColumn>,
    clean: LabelVector,
    noisy: LabelVector,
}

pub fn generate_dataset(
    spec: &SmokeTestSpec,
    seed: u64,
    n: usize,
    m: usize,
) -> Result<Dataset, CatalogError> {
    if n == 0 {
        return Err(CatalogError::Argument(
            "instance count n must be at least 1".into(),
        ));
    }
    if m == 0 {
        return Err(CatalogError::Argument(
            "feature count m must be at least 1".into(),
        ));
    }
    if spec.id == SmokeTestId::STARVEDBINARY && m < 2 {
        return Err(CatalogError::Argument(format!(
            "STARVEDBINARY needs at least m >= 2 features, got m = {m}"
        )));
    }
    let root = RandomStream::new(seed).substream(spec.id.as_str());
    let (train, test) = generate_partitions(spec.id, &root, n, m)?;

    let declared_categories = train
        .features
        .iter()
        .map(|c| c.declared_categories().map(<[u32]>::to_vec))
        .collect();
    let meta = DatasetMeta {
        smoketest: spec.id,
        mode: spec.mode,
        seed,
        n,
        m,
        feature_kind: spec.feature_kind,
        declared_categories,
        label_strategy: spec.label_strategy,
        test_partition_rule: spec.test_partition_rule,
    };

    Ok(match spec.mode {
        Mode::Classification => {
            let train_part = Partition {
                features: train.features,
                labels: Some(train.noisy),
            };
            let test_part = match test {
                Some(t) => Partition {
                    features: t.features,
                    labels: Some(t.noisy),
                },
                None => train_part.clone(),
            };
            Dataset {
                meta,
                train: train_part,
                test: Some(test_part),
                train_clean_labels: Some(train.clean),
            }
        }
        Mode::Clustering => Dataset {
            meta,
            train: Partition {
                features: train.features,
                labels: None,
            },
            test: None,
            train_clean_labels: None,
        },
    })
}

fn numeric_columns(
    stream: &RandomStream,
    prefix: &str,
    m: usize,
    mut sample: impl FnMut(&mut RandomStream) -> Result<Vec<f64>, CatalogError>,
) -> Result<Vec<Vec<f64>>, CatalogError> {
    (0..m)
        .map(|j| sample(&mut stream.substream(&format!("{prefix}/feature/{j}"))))
        .collect()
}

fn uniform_columns(
    stream: &RandomStream,
    prefix: &str,
    n: usize,
    m: usize,
    lo: f64,
    hi: f64,
) -> Result<Vec<Vec<f64>>, CatalogError> {
    numeric_columns(stream, prefix, m, |s| {
        Ok(datagen::sample_uniform(s, n, lo, hi)?
            .as_numeric()
            .unwrap_or_default()
            .to_vec())
    })
}

fn into_numeric(cols: Vec<Vec<f64>>) -> Vec<FeatureColumn> {
    cols.into_iter().map(FeatureColumn::Numeric).collect()
}

fn noisy(
    stream: &RandomStream,
    prefix: &str,
    clean: LabelVector,
) -> Result<(LabelVector, LabelVector), CatalogError> {
    let noisy = datagen::apply_label_noise(
        &mut stream.substream(&format!("{prefix}/noise")),
        &clean,
        LABEL_NOISE,
    )?;
    Ok((clean, noisy))
}

fn rectangle<C: AsRef<[f64]>>(
    stream: &RandomStream,
    prefix: &str,
    basis: &[C],
) -> Result<(LabelVector, LabelVector), CatalogError> {
    noisy(stream, prefix, datagen::rectangle_labels(basis)?)
}

fn random(stream: &RandomStream, prefix: &str, n: usize) -> (LabelVector, LabelVector) {
    let labels = datagen::random_labels(&mut stream.substream(&format!("{prefix}/labels")), n);
    (labels.clone(), labels)
}

fn fixed(labels: LabelVector) -> (LabelVector, LabelVector) {
    (labels.clone(), labels)
}

fn numeric_rectangle(
    stream: &RandomStream,
    prefix: &str,
    cols: Vec<Vec<f64>>,
) -> Result<Labeled, CatalogError> {
    let (clean, noisy) = rectangle(stream, prefix, &cols)?;
    Ok(Labeled {
        features: into_numeric(cols),
        clean,
        noisy,
    })
}

/// Categorical columns from uniforms with ids offset by `offset`, labeled by
/// the rectangle rule on the underlying uniforms.
fn categorical_rectangle(
    stream: &RandomStream,
    prefix: &str,
    n: usize,
    m: usize,
    k: u32,
    offset: u32,
    declared: &[u32],
) -> Result<Labeled, CatalogError> {
    let mut features = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for j in 0..m {
        let mut s = stream.substream(&format!("{prefix}/feature/{j}"));
        let draw = datagen::sample_categorical_uniform(&mut s, n, k)?;
        let values = draw
            .column
            .as_categorical()
            .unwrap_or_default()
            .iter()
            .map(|id| id + offset)
            .collect();
        features.push(FeatureColumn::Categorical {
            values,
            declared: declared.to_vec(),
        });
        basis.push(draw.underlying);
    }
    let (clean, noisy) = rectangle(stream, prefix, &basis)?;
    Ok(Labeled {
        features,
        clean,
        noisy,
    })
}

fn generate_partitions(
    id: SmokeTestId,
    root: &RandomStream,
    n: usize,
    m: usize,
) -> Result<(Labeled, Option<Labeled>), CatalogError> {
    use SmokeTestId::*;
    const TRAIN: &str = "train";
    let uniform_rect = |lo: f64, hi: f64| -> Result<Labeled, CatalogError> {
        numeric_rectangle(root, TRAIN, uniform_columns(root, TRAIN, n, m, lo, hi)?)
    };
    let gamma = GammaSpec::new(0.1, 4.0)?;

    let train = match id {
        UNIFORM => uniform_rect(0.0, 1.0)?,
        MINFLOAT => uniform_rect(0.0, 1e-6)?,
        VERYSMALL => uniform_rect(0.0, 1e-10)?,
        MINDOUBLE => uniform_rect(0.0, 1e-15)?,
        MAXFLOAT => uniform_rect(0.0, 3.4e38)?,
        VERYLARGE => uniform_rect(0.0, 1e100)?,
        MAXDOUBLE => uniform_rect(0.0, 1.7e308)?,
        SPLIT => {
            let cols = numeric_columns(root, TRAIN, m, |s| {
                Ok((0..n)
                    .map(|_| {
                        let u = s.next_f64();
                        if s.next_bool(0.5) {
                            1e-5 * u
                        } else {
                            1e10 * (1.0 - u) + 1e11 * u
                        }
                    })
                    .collect())
            })?;
            let (clean, noisy) = random(root, TRAIN, n);
            Labeled {
                features: into_numeric(cols),
                clean,
                noisy,
            }
        }
        LEFTSKEW | RIGHTSKEW => {
            let sign = if id == LEFTSKEW { -1.0 } else { 1.0 };
            let cols = numeric_columns(root, TRAIN, m, |s| {
                Ok(datagen::sample_gamma(s, n, gamma)?
                    .as_numeric()
                    .unwrap_or_default()
                    .iter()
                    .map(|v| sign * v)
                    .collect())
            })?;
            numeric_rectangle(root, TRAIN, cols)?
        }
        ONECLASS | BIAS | RANDNUM => {
            let cols = uniform_columns(root, TRAIN, n, m, 0.0, 1.0)?;
            let (clean, noisy) = match id {
                ONECLASS => fixed(LabelVector(vec![Label::Class0; n])),
                BIAS => {
                    let mut labels = vec![Label::Class0; n];
                    labels[n - 1] = Label::Class1;
                    fixed(LabelVector(labels))
                }
                _ => random(root, TRAIN, n),
            };
            Labeled {
                features: into_numeric(cols),
                clean,
                noisy,
            }
        }
        OUTLIER => {
            let mut cols = uniform_columns(root, TRAIN, n, m, 0.0, 1e-5)?;
            let (clean, noisy) = rectangle(root, TRAIN, &cols)?;
            for col in &mut cols {
                col[n - 1] = 1e10;
            }
            Labeled {
                features: into_numeric(cols),
                clean,
                noisy,
            }
        }
        ZEROS => numeric_rectangle(root, TRAIN, vec![vec![0.0; n]; m])?,
        DISJNUM => uniform_rect(0.0, 1.0)?,
        CATEGORICAL => {
            categorical_rectangle(root, TRAIN, n, m, 10, 0, &(0..10).collect::<Vec<_>>())?
        }
        DISJCAT => categorical_rectangle(root, TRAIN, n, m, 10, 0, &(0..20).collect::<Vec<_>>())?,
        MANYCATS => categorical_rectangle(
            root,
            TRAIN,
            n,
            m,
            10_000,
            0,
            &(0..10_000).collect::<Vec<_>>(),
        )?,
        RANDCAT => {
            let features = (0..m)
                .map(|j| {
                    let mut s = root.substream(&format!("{TRAIN}/feature/{j}"));
                    datagen::sample_categorical_uniform(&mut s, n, 2).map(|d| d.column)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let (clean, noisy) = random(root, TRAIN, n);
            Labeled {
                features,
                clean,
                noisy,
            }
        }
        STARVEDMANY => {
            let n_ids = u32::try_from(n).map_err(|_| {
                CatalogError::Argument(format!("n = {n} exceeds the category id range"))
            })?;
            let features = (0..m)
                .map(|_| FeatureColumn::Categorical {
                    values: (0..n_ids).collect(),
                    declared: (0..n_ids).collect(),
                })
                .collect();
            let (clean, noisy) = random(root, TRAIN, n);
            Labeled {
                features,
                clean,
                noisy,
            }
        }
        STARVEDBINARY => {
            let ids: Vec<u32> = (0..m).map(|j| (j % 2) as u32).collect();
            let basis: Vec<Vec<f64>> = ids.iter().map(|id| vec![f64::from(*id); n]).collect();
            let (clean, noisy) = rectangle(root, TRAIN, &basis)?;
            Labeled {
                features: ids
                    .iter()
                    .map(|id| FeatureColumn::Categorical {
                        values: vec![*id; n],
                        declared: vec![0, 1],
                    })
                    .collect(),
                clean,
                noisy,
            }
        }
    };

    const TEST: &str = "test";
    let test = match id {
        DISJNUM => Some(numeric_rectangle(
            root,
            TEST,
            uniform_columns(root, TEST, n, m, 100.0, 101.0)?,
        )?),
        DISJCAT => Some(categorical_rectangle(
            root,
            TEST,
            n,
            m,
            10,
            10,
            &(0..20).collect::<Vec<_>>(),
        )?),
        _ => None,
    };
    Ok((train, test))
}
