//! Seeded primitive generators: distributions, quantiles, labels and noise.
//!
//! Every generator draws from a [`RandomStream`]. Streams are derived from a
//! `(seed, label)` pair so that the draws for one feature never shift the
//! draws for another.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatagenError {
    #[error("invalid argument: {0}")]
    Argument(String),
}

fn arg_err<T>(msg: impl Into<String>) -> Result<T, DatagenError> {
    Err(DatagenError::Argument(msg.into()))
}

/// Deterministic random number stream.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derives an independent stream from this stream's seed and a label.
    /// The parent's position is not consulted or advanced.
    pub fn substream(&self, label: &str) -> RandomStream {
        RandomStream::new(derive_seed(self.seed, label))
    }

    pub fn next_f64(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn next_bool(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    pub(crate) fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

// FNV-1a over the label, folded into the seed through a splitmix64 finalizer.
fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(seed ^ splitmix64(h))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureKind {
    #[serde(rename = "double", alias = "numeric")]
    Numeric,
    #[serde(rename = "categorical")]
    Categorical,
}

impl FeatureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Numeric => "double",
            FeatureKind::Categorical => "categorical",
        }
    }
}

impl std::fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One feature of a dataset partition.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureColumn {
    Numeric(Vec<f64>),
    Categorical {
        values: Vec<u32>,
        /// Ordered; may contain categories that are never observed.
        declared: Vec<u32>,
    },
}

impl FeatureColumn {
    pub fn kind(&self) -> FeatureKind {
        match self {
            FeatureColumn::Numeric(_) => FeatureKind::Numeric,
            FeatureColumn::Categorical { .. } => FeatureKind::Categorical,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            FeatureColumn::Numeric(v) => v.len(),
            FeatureColumn::Categorical { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn declared_categories(&self) -> Option<&[u32]> {
        match self {
            FeatureColumn::Numeric(_) => None,
            FeatureColumn::Categorical { declared, .. } => Some(declared),
        }
    }

    pub fn as_numeric(&self) -> Option<&[f64]> {
        match self {
            FeatureColumn::Numeric(v) => Some(v),
            FeatureColumn::Categorical { .. } => None,
        }
    }

    pub fn as_categorical(&self) -> Option<&[u32]> {
        match self {
            FeatureColumn::Numeric(_) => None,
            FeatureColumn::Categorical { values, .. } => Some(values),
        }
    }

    /// Value at row `i` as a float; categorical ids are widened.
    pub fn value_f64(&self, i: usize) -> f64 {
        match self {
            FeatureColumn::Numeric(v) => v[i],
            FeatureColumn::Categorical { values, .. } => f64::from(values[i]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "class_0")]
    Class0,
    #[serde(rename = "class_1")]
    Class1,
}

impl Label {
    pub fn flipped(self) -> Label {
        match self {
            Label::Class0 => Label::Class1,
            Label::Class1 => Label::Class0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Class0 => "class_0",
            Label::Class1 => "class_1",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabelVector(pub Vec<Label>);

impl LabelVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.0.iter().filter(|l| **l == label).count()
    }

    pub fn fraction(&self, label: Label) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        self.count(label) as f64 / self.0.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSpec {
    shape: f64,
    scale: f64,
}

impl GammaSpec {
    pub fn new(shape: f64, scale: f64) -> Result<Self, DatagenError> {
        if !(shape.is_finite() && shape > 0.0) {
            return arg_err(format!("gamma shape must be positive, got {shape}"));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return arg_err(format!("gamma scale must be positive, got {scale}"));
        }
        Ok(Self { shape, scale })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn mean(&self) -> f64 {
        self.shape * self.scale
    }

    pub fn variance(&self) -> f64 {
        self.shape * self.scale * self.scale
    }
}

/// `n` draws uniform in `[lo, hi)`. With `lo == hi` every draw is `lo`.
pub fn sample_uniform(
    rng: &mut RandomStream,
    n: usize,
    lo: f64,
    hi: f64,
) -> Result<FeatureColumn, DatagenError> {
    if !lo.is_finite() || !hi.is_finite() {
        return arg_err(format!("bounds must be finite, got [{lo}, {hi})"));
    }
    if lo > hi {
        return arg_err(format!("inverted bounds [{lo}, {hi})"));
    }
    let values = (0..n).map(|_| uniform_between(rng, lo, hi)).collect();
    Ok(FeatureColumn::Numeric(values))
}

fn uniform_between(rng: &mut RandomStream, lo: f64, hi: f64) -> f64 {
    let u = rng.next_f64();
    // convex combination avoids overflowing hi - lo on huge ranges
    let x = lo * (1.0 - u) + hi * u;
    if x >= hi && lo < hi {
        let below = f64::from_bits(if hi > 0.0 {
            hi.to_bits() - 1
        } else {
            hi.to_bits() + 1
        });
        below.max(lo)
    } else {
        x.max(lo)
    }
}

pub fn sample_gamma(
    rng: &mut RandomStream,
    n: usize,
    spec: GammaSpec,
) -> Result<FeatureColumn, DatagenError> {
    let dist = Gamma::new(spec.shape, spec.scale)
        .map_err(|e| DatagenError::Argument(format!("gamma: {e}")))?;
    let values = (0..n).map(|_| dist.sample(rng.rng())).collect();
    Ok(FeatureColumn::Numeric(values))
}

/// Categorical draw together with the uniforms it was discretized from.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalDraw {
    pub column: FeatureColumn,
    pub underlying: Vec<f64>,
}

pub fn sample_categorical_uniform(
    rng: &mut RandomStream,
    n: usize,
    k: u32,
) -> Result<CategoricalDraw, DatagenError> {
    if k == 0 {
        return arg_err("category count must be at least 1");
    }
    let underlying: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
    let values = categorize(&underlying, k)?;
    Ok(CategoricalDraw {
        column: FeatureColumn::Categorical {
            values,
            declared: (0..k).collect(),
        },
        underlying,
    })
}

/// Maps uniforms in `[0, 1)` to ids `floor(k * u)`, clamped to `k - 1`.
pub fn categorize(underlying: &[f64], k: u32) -> Result<Vec<u32>, DatagenError> {
    if k == 0 {
        return arg_err("category count must be at least 1");
    }
    Ok(underlying
        .iter()
        .map(|u| {
            let id = (f64::from(k) * u).floor();
            if id.is_nan() || id < 0.0 {
                0
            } else {
                (id as u32).min(k - 1)
            }
        })
        .collect())
}

/// Nearest-rank quantile: the `ceil(p * n)`-th smallest value (1-based).
pub fn empirical_quantile(values: &[f64], p: f64) -> Result<f64, DatagenError> {
    if values.is_empty() {
        return arg_err("quantile of an empty sequence");
    }
    if !(p > 0.0 && p <= 1.0) {
        return arg_err(format!("quantile probability must be in (0, 1], got {p}"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = (p * sorted.len() as f64).ceil() as usize;
    Ok(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// Axis-aligned rectangle labels: class_1 iff every feature lies strictly
/// below its `2^(-1/m)` empirical quantile.
pub fn rectangle_labels<C: AsRef<[f64]>>(columns: &[C]) -> Result<LabelVector, DatagenError> {
    let Some(first) = columns.first() else {
        return arg_err("rectangle labeling needs at least one column");
    };
    let n = first.as_ref().len();
    if n == 0 {
        return arg_err("rectangle labeling needs at least one instance");
    }
    if columns.iter().any(|c| c.as_ref().len() != n) {
        return arg_err("ragged columns");
    }
    let p = 2f64.powf(-1.0 / columns.len() as f64);
    let thresholds = columns
        .iter()
        .map(|c| empirical_quantile(c.as_ref(), p))
        .collect::<Result<Vec<_>, _>>()?;
    let labels = (0..n)
        .map(|i| {
            let inside = columns
                .iter()
                .zip(&thresholds)
                .all(|(c, q)| c.as_ref()[i] < *q);
            if inside {
                Label::Class1
            } else {
                Label::Class0
            }
        })
        .collect();
    Ok(LabelVector(labels))
}

/// Flips each label independently with probability `p`.
pub fn apply_label_noise(
    rng: &mut RandomStream,
    labels: &LabelVector,
    p: f64,
) -> Result<LabelVector, DatagenError> {
    if !(0.0..=1.0).contains(&p) {
        return arg_err(format!("noise probability must be in [0, 1], got {p}"));
    }
    Ok(LabelVector(
        labels
            .0
            .iter()
            .map(|l| if rng.next_bool(p) { l.flipped() } else { *l })
            .collect(),
    ))
}

/// Fair-coin labels, independent of any feature.
pub fn random_labels(rng: &mut RandomStream, n: usize) -> LabelVector {
    LabelVector(
        (0..n)
            .map(|_| {
                if rng.next_bool(0.5) {
                    Label::Class1
                } else {
                    Label::Class0
                }
            })
            .collect(),
    )
}
