//! Algorithm descriptors: which class to test, which feature kinds it accepts,
//! and how each hyperparameter is varied.
//!
//! The source format is YAML:
//!
//! ```yaml
//! name: WEKA_C45_UNPRUNED
//! type: classification
//! framework: weka
//! package: weka.classifiers.trees
//! class: J48
//! features: [double, categorical]
//! parameters:
//!   U:                 # only a default: pinned for the whole set
//!     default: enabled
//!   M:
//!     type: integer
//!     min: 1
//!     max: 10
//!     stepsize: 9
//!     default: 1
//! accepted_errors:     # optional regexes for documented exceptions
//!   - "more than 1 sample"
//! ```
//!
//! Parameter order is preserved; combination expansion depends on it.

use std::fmt;

use regex::RegexSet;
use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_yaml::{Mapping, Value};
use thiserror::Error;

use crate::catalog::Mode;
use crate::datagen::FeatureKind;

/// Upper bound on the candidate count of a single range parameter.
pub const MAX_CANDIDATES: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DescriptorError {
    #[error("syntax error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Syntax {
        line: Option<usize>,
        message: String,
    },
    #[error("missing required field `{0}`")]
    MissingField(&'static str),
    #[error("invalid value for `{field}`: {message}")]
    InvalidField { field: String, message: String },
    #[error("unknown top-level key `{0}`")]
    UnknownKey(String),
    #[error("`features` must list at least one feature kind")]
    EmptyFeatures,
    #[error("unknown feature kind `{0}` (expected `double` or `categorical`)")]
    UnknownFeatureKind(String),
    #[error("parameter `{parameter}`: unknown parameter type `{found}`")]
    UnknownParameterType { parameter: String, found: String },
    #[error("parameter `{parameter}`: missing `default`")]
    MissingDefault { parameter: String },
    #[error("parameter `{parameter}`: missing `{field}`")]
    MissingRangeField {
        parameter: String,
        field: &'static str,
    },
    #[error("parameter `{parameter}`: inverted range, min {min} > max {max}")]
    InvertedRange {
        parameter: String,
        min: String,
        max: String,
    },
    #[error("parameter `{parameter}`: stepsize must be positive, got {step}")]
    NonPositiveStep { parameter: String, step: String },
    #[error("duplicate parameter `{0}`")]
    DuplicateParameter(String),
    #[error("parameter `{parameter}`: value list is empty")]
    EmptyValueList { parameter: String },
    #[error("parameter `{parameter}`: invalid default: {message}")]
    InvalidDefault { parameter: String, message: String },
    #[error("parameter `{parameter}`: unknown key `{key}`")]
    UnknownParameterKey { parameter: String, key: String },
    #[error(
        "parameter `{parameter}`: {count} candidate values exceed the limit of {MAX_CANDIDATES}"
    )]
    TooManyCandidates { parameter: String, count: String },
    #[error("accepted error pattern `{pattern}` is not a valid regex: {message}")]
    InvalidPattern { pattern: String, message: String },
}

/// A single hyperparameter value.
///
/// Flags travel as booleans on every wire format except YAML, where they are
/// written `enabled`/`disabled`.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Flag(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Flag(true) => f.write_str("enabled"),
            ParamValue::Flag(false) => f.write_str("disabled"),
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Float(x) => write!(f, "{x:?}"),
            ParamValue::Text(s) => f.write_str(s),
        }
    }
}

impl Serialize for ParamValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ParamValue::Flag(b) => s.serialize_bool(*b),
            ParamValue::Int(i) => s.serialize_i64(*i),
            ParamValue::Float(x) => s.serialize_f64(*x),
            ParamValue::Text(t) => s.serialize_str(t),
        }
    }
}

impl<'de> Deserialize<'de> for ParamValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ParamValue;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a boolean, number or string")
            }
            fn visit_bool<E>(self, v: bool) -> Result<ParamValue, E> {
                Ok(ParamValue::Flag(v))
            }
            fn visit_i64<E>(self, v: i64) -> Result<ParamValue, E> {
                Ok(ParamValue::Int(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ParamValue, E> {
                i64::try_from(v)
                    .map(ParamValue::Int)
                    .map_err(|_| E::custom("integer out of range"))
            }
            fn visit_f64<E>(self, v: f64) -> Result<ParamValue, E> {
                Ok(ParamValue::Float(v))
            }
            fn visit_str<E>(self, v: &str) -> Result<ParamValue, E> {
                Ok(ParamValue::Text(v.to_string()))
            }
        }
        d.deserialize_any(V)
    }
}

impl ParamValue {
    fn to_yaml(&self) -> Value {
        match self {
            ParamValue::Flag(b) => Value::String(if *b { "enabled" } else { "disabled" }.into()),
            ParamValue::Int(i) => Value::Number((*i).into()),
            ParamValue::Float(x) => Value::Number((*x).into()),
            ParamValue::Text(t) => Value::String(t.clone()),
        }
    }

    fn from_yaml(v: &Value) -> Option<ParamValue> {
        match v {
            Value::Bool(b) => Some(ParamValue::Flag(*b)),
            Value::Number(n) => n
                .as_i64()
                .map(ParamValue::Int)
                .or_else(|| n.as_f64().filter(|x| x.is_finite()).map(ParamValue::Float)),
            Value::String(s) => Some(match s.as_str() {
                "enabled" => ParamValue::Flag(true),
                "disabled" => ParamValue::Flag(false),
                _ => ParamValue::Text(s.clone()),
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParameterKind {
    /// Only a default was given; held constant across the set.
    Pinned,
    Flag,
    Integer {
        min: i64,
        max: i64,
        step: i64,
    },
    Float {
        min: f64,
        max: f64,
        step: f64,
    },
    Values(Vec<ParamValue>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSpec {
    pub name: String,
    pub kind: ParameterKind,
    pub default: ParamValue,
}

impl ParameterSpec {
    pub fn is_pinned(&self) -> bool {
        matches!(self.kind, ParameterKind::Pinned)
    }

    /// Values the parameter takes during testing, in order. The default is
    /// not necessarily among them.
    pub fn candidate_values(&self) -> Vec<ParamValue> {
        match &self.kind {
            ParameterKind::Pinned => vec![self.default.clone()],
            ParameterKind::Flag => vec![ParamValue::Flag(true), ParamValue::Flag(false)],
            ParameterKind::Integer { min, max, step } => {
                let count = int_candidate_count(*min, *max, *step);
                (0..count as i64)
                    .map(|i| ParamValue::Int(min + i * step))
                    .collect()
            }
            ParameterKind::Float { min, max, step } => {
                let count = float_candidate_count(*min, *max, *step);
                (0..count)
                    .map(|i| ParamValue::Float(min + i as f64 * step))
                    .collect()
            }
            ParameterKind::Values(values) => values.clone(),
        }
    }

    pub fn candidate_count(&self) -> usize {
        match &self.kind {
            ParameterKind::Pinned => 1,
            ParameterKind::Flag => 2,
            ParameterKind::Integer { min, max, step } => {
                int_candidate_count(*min, *max, *step) as usize
            }
            ParameterKind::Float { min, max, step } => float_candidate_count(*min, *max, *step),
            ParameterKind::Values(v) => v.len(),
        }
    }
}

fn int_candidate_count(min: i64, max: i64, step: i64) -> u128 {
    ((i128::from(max) - i128::from(min)) / i128::from(step)) as u128 + 1
}

// Tolerates accumulated rounding so that e.g. 0.1..=0.3 step 0.1 yields three values.
fn float_candidate_count(min: f64, max: f64, step: f64) -> usize {
    let span = (max - min) / step;
    (span + 1e-9).floor() as usize + 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmDescriptor {
    pub name: String,
    pub mode: Mode,
    pub framework: String,
    pub package: String,
    pub class: String,
    pub features: Vec<FeatureKind>,
    pub parameters: Vec<ParameterSpec>,
    pub accepted_errors: Vec<String>,
}

impl AlgorithmDescriptor {
    pub fn supports(&self, kind: FeatureKind) -> bool {
        self.features.contains(&kind)
    }

    pub fn parameter(&self, name: &str) -> Option<&ParameterSpec> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn accepted_error_set(&self) -> RegexSet {
        // patterns are validated while parsing
        RegexSet::new(&self.accepted_errors).unwrap_or_else(|_| RegexSet::empty())
    }

    pub fn to_yaml(&self) -> String {
        let mut root = Mapping::new();
        let s = |v: &str| Value::String(v.to_string());
        root.insert(s("name"), s(&self.name));
        root.insert(s("type"), s(self.mode.as_str()));
        root.insert(s("framework"), s(&self.framework));
        root.insert(s("package"), s(&self.package));
        root.insert(s("class"), s(&self.class));
        root.insert(
            s("features"),
            Value::Sequence(self.features.iter().map(|f| s(f.as_str())).collect()),
        );
        let mut params = Mapping::new();
        for p in &self.parameters {
            let mut entry = Mapping::new();
            match &p.kind {
                ParameterKind::Pinned => {}
                ParameterKind::Flag => {
                    entry.insert(s("type"), s("flag"));
                }
                ParameterKind::Integer { min, max, step } => {
                    entry.insert(s("type"), s("integer"));
                    entry.insert(s("min"), Value::Number((*min).into()));
                    entry.insert(s("max"), Value::Number((*max).into()));
                    entry.insert(s("stepsize"), Value::Number((*step).into()));
                }
                ParameterKind::Float { min, max, step } => {
                    entry.insert(s("type"), s("float"));
                    entry.insert(s("min"), Value::Number((*min).into()));
                    entry.insert(s("max"), Value::Number((*max).into()));
                    entry.insert(s("stepsize"), Value::Number((*step).into()));
                }
                ParameterKind::Values(values) => {
                    entry.insert(s("type"), s("values"));
                    entry.insert(
                        s("values"),
                        Value::Sequence(values.iter().map(ParamValue::to_yaml).collect()),
                    );
                }
            }
            entry.insert(s("default"), p.default.to_yaml());
            params.insert(s(&p.name), Value::Mapping(entry));
        }
        root.insert(s("parameters"), Value::Mapping(params));
        if !self.accepted_errors.is_empty() {
            root.insert(
                s("accepted_errors"),
                Value::Sequence(self.accepted_errors.iter().map(|p| s(p)).collect()),
            );
        }
        serde_yaml::to_string(&Value::Mapping(root)).unwrap_or_default()
    }
}

/// Map that keeps every key in source order, including repeated ones.
#[derive(Debug, Default)]
struct OrderedPairs(Vec<(Value, Value)>);

impl<'de> Deserialize<'de> for OrderedPairs {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = OrderedPairs;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a mapping")
            }
            fn visit_unit<E>(self) -> Result<OrderedPairs, E> {
                Ok(OrderedPairs::default())
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<OrderedPairs, A::Error> {
                let mut pairs = Vec::new();
                while let Some((k, v)) = map.next_entry::<Value, Value>()? {
                    pairs.push((k, v));
                }
                Ok(OrderedPairs(pairs))
            }
        }
        d.deserialize_any(V)
    }
}

enum TopValue {
    Plain(Value),
    Parameters(OrderedPairs),
}

/// Top-level document. The `parameters` block is read as ordered pairs so a
/// repeated parameter name gets its own diagnostic instead of a YAML error.
struct TopLevel(Vec<(Value, TopValue)>);

impl<'de> Deserialize<'de> for TopLevel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = TopLevel;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a descriptor mapping")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<TopLevel, A::Error> {
                let mut entries = Vec::new();
                while let Some(key) = map.next_key::<Value>()? {
                    let value = if key.as_str() == Some("parameters") {
                        TopValue::Parameters(map.next_value()?)
                    } else {
                        TopValue::Plain(map.next_value()?)
                    };
                    entries.push((key, value));
                }
                Ok(TopLevel(entries))
            }
        }
        d.deserialize_any(V)
    }
}

fn syntax(e: serde_yaml::Error) -> DescriptorError {
    DescriptorError::Syntax {
        line: e.location().map(|l| l.line()),
        message: e.to_string(),
    }
}

fn key_name(k: &Value) -> Result<String, DescriptorError> {
    match k {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        other => Err(DescriptorError::InvalidField {
            field: "key".into(),
            message: format!("keys must be scalars, got {other:?}"),
        }),
    }
}

fn text_field(v: Option<Value>, field: &'static str) -> Result<String, DescriptorError> {
    match v {
        None | Some(Value::Null) => Err(DescriptorError::MissingField(field)),
        Some(Value::String(s)) if !s.trim().is_empty() => Ok(s),
        Some(Value::String(_)) => Err(DescriptorError::InvalidField {
            field: field.into(),
            message: "must not be empty".into(),
        }),
        Some(other) => Err(DescriptorError::InvalidField {
            field: field.into(),
            message: format!("expected a string, got {}", yaml_type_name(&other)),
        }),
    }
}

fn yaml_type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Sequence(_) => "sequence",
        Value::Mapping(_) => "mapping",
        Value::Tagged(_) => "tagged value",
    }
}

pub fn parse_descriptor(source: &str) -> Result<AlgorithmDescriptor, DescriptorError> {
    let top: TopLevel = serde_yaml::from_str(source).map_err(syntax)?;
    let mut fields: Vec<(String, TopValue)> = Vec::new();
    for (k, v) in top.0 {
        let key = key_name(&k)?;
        if fields.iter().any(|(seen, _)| *seen == key) {
            return Err(DescriptorError::InvalidField {
                field: key,
                message: "given more than once".into(),
            });
        }
        fields.push((key, v));
    }
    let mut parameter_pairs = None;
    fields.retain_mut(|(k, v)| {
        if k != "parameters" {
            return true;
        }
        if let TopValue::Parameters(p) = v {
            parameter_pairs = Some(std::mem::take(&mut p.0));
        }
        false
    });
    let mut take = |name: &str| {
        fields
            .iter()
            .position(|(k, _)| k == name)
            .map(|i| match fields.remove(i).1 {
                TopValue::Plain(v) => v,
                TopValue::Parameters(_) => Value::Null,
            })
    };

    let name = text_field(take("name"), "name")?;
    if !name
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
    {
        return Err(DescriptorError::InvalidField {
            field: "name".into(),
            message: format!("`{name}` may only contain ASCII letters, digits, `_`, `-` and `.`"),
        });
    }
    let mode_text = text_field(take("type"), "type")?;
    let mode = mode_text
        .parse::<Mode>()
        .map_err(|message| DescriptorError::InvalidField {
            field: "type".into(),
            message,
        })?;
    let framework = match take("framework") {
        None | Some(Value::Null) => String::new(),
        v => text_field(v, "framework")?,
    };
    let package = text_field(take("package"), "package")?;
    let class = text_field(take("class"), "class")?;
    let features = parse_features(take("features"))?;
    let parameters = parse_parameters(parameter_pairs.unwrap_or_default())?;
    let accepted_errors = parse_patterns(take("accepted_errors"))?;

    if let Some((key, _)) = fields.into_iter().next() {
        return Err(DescriptorError::UnknownKey(key));
    }

    Ok(AlgorithmDescriptor {
        name,
        mode,
        framework,
        package,
        class,
        features,
        parameters,
        accepted_errors,
    })
}

fn parse_features(v: Option<Value>) -> Result<Vec<FeatureKind>, DescriptorError> {
    let items = match v {
        None | Some(Value::Null) => return Err(DescriptorError::MissingField("features")),
        Some(Value::Sequence(items)) => items,
        Some(Value::String(s)) => vec![Value::String(s)],
        Some(other) => {
            return Err(DescriptorError::InvalidField {
                field: "features".into(),
                message: format!("expected a list, got {}", yaml_type_name(&other)),
            })
        }
    };
    if items.is_empty() {
        return Err(DescriptorError::EmptyFeatures);
    }
    let mut kinds = Vec::new();
    for item in items {
        let kind = match &item {
            Value::String(s) => match s.as_str() {
                "double" | "numeric" => FeatureKind::Numeric,
                "categorical" => FeatureKind::Categorical,
                other => return Err(DescriptorError::UnknownFeatureKind(other.to_string())),
            },
            other => return Err(DescriptorError::UnknownFeatureKind(format!("{other:?}"))),
        };
        if !kinds.contains(&kind) {
            kinds.push(kind);
        }
    }
    Ok(kinds)
}

fn parse_patterns(v: Option<Value>) -> Result<Vec<String>, DescriptorError> {
    let items = match v {
        None | Some(Value::Null) => return Ok(Vec::new()),
        Some(Value::Sequence(items)) => items,
        Some(other) => {
            return Err(DescriptorError::InvalidField {
                field: "accepted_errors".into(),
                message: format!("expected a list, got {}", yaml_type_name(&other)),
            })
        }
    };
    let mut patterns = Vec::new();
    for item in items {
        let Value::String(p) = item else {
            return Err(DescriptorError::InvalidField {
                field: "accepted_errors".into(),
                message: "patterns must be strings".into(),
            });
        };
        if let Err(e) = regex::Regex::new(&p) {
            return Err(DescriptorError::InvalidPattern {
                pattern: p,
                message: e.to_string(),
            });
        }
        patterns.push(p);
    }
    Ok(patterns)
}

fn parse_parameters(pairs: Vec<(Value, Value)>) -> Result<Vec<ParameterSpec>, DescriptorError> {
    let mut specs: Vec<ParameterSpec> = Vec::with_capacity(pairs.len());
    for (k, v) in pairs {
        let name = key_name(&k)?;
        if specs.iter().any(|s| s.name == name) {
            return Err(DescriptorError::DuplicateParameter(name));
        }
        specs.push(parse_parameter(name, v)?);
    }
    Ok(specs)
}

fn parse_parameter(name: String, body: Value) -> Result<ParameterSpec, DescriptorError> {
    let entries = match body {
        Value::Null => Mapping::new(),
        Value::Mapping(m) => m,
        other => {
            return Err(DescriptorError::InvalidField {
                field: format!("parameters.{name}"),
                message: format!("expected a mapping, got {}", yaml_type_name(&other)),
            })
        }
    };
    let mut ty = None;
    let mut min = None;
    let mut max = None;
    let mut step = None;
    let mut values = None;
    let mut default = None;
    for (k, v) in entries {
        let key = key_name(&k)?;
        let slot = match key.as_str() {
            "type" => &mut ty,
            "min" => &mut min,
            "max" => &mut max,
            "stepsize" => &mut step,
            "values" => &mut values,
            "default" => &mut default,
            _ => {
                return Err(DescriptorError::UnknownParameterKey {
                    parameter: name,
                    key,
                })
            }
        };
        *slot = Some(v);
    }

    let invalid_default = |message: String| DescriptorError::InvalidDefault {
        parameter: name.clone(),
        message,
    };
    let default = match default {
        None | Some(Value::Null) => {
            return Err(DescriptorError::MissingDefault { parameter: name })
        }
        Some(v) => ParamValue::from_yaml(&v).ok_or_else(|| {
            invalid_default(format!("expected a scalar, got {}", yaml_type_name(&v)))
        })?,
    };

    let ty = match ty {
        None => None,
        Some(Value::String(s)) => Some(s),
        Some(other) => {
            return Err(DescriptorError::UnknownParameterType {
                parameter: name,
                found: format!("{other:?}"),
            })
        }
    };

    let reject_extra = |present: &[(&'static str, bool)]| -> Result<(), DescriptorError> {
        for (key, set) in present {
            if *set {
                return Err(DescriptorError::UnknownParameterKey {
                    parameter: name.clone(),
                    key: (*key).to_string(),
                });
            }
        }
        Ok(())
    };

    let kind = match ty.as_deref() {
        None => {
            if min.is_some() || max.is_some() || step.is_some() || values.is_some() {
                return Err(DescriptorError::MissingField("type"));
            }
            ParameterKind::Pinned
        }
        Some("flag") => {
            reject_extra(&[
                ("min", min.is_some()),
                ("max", max.is_some()),
                ("stepsize", step.is_some()),
                ("values", values.is_some()),
            ])?;
            if !matches!(default, ParamValue::Flag(_)) {
                return Err(invalid_default(format!(
                    "flags default to `enabled` or `disabled`, got `{default}`"
                )));
            }
            ParameterKind::Flag
        }
        Some("integer") => {
            reject_extra(&[("values", values.is_some())])?;
            let get = |v: Option<Value>, field: &'static str| -> Result<i64, DescriptorError> {
                match v {
                    None | Some(Value::Null) => Err(DescriptorError::MissingRangeField {
                        parameter: name.clone(),
                        field,
                    }),
                    Some(Value::Number(n)) if n.as_i64().is_some() => Ok(n.as_i64().unwrap_or(0)),
                    Some(other) => Err(DescriptorError::InvalidField {
                        field: format!("parameters.{name}.{field}"),
                        message: format!("expected an integer, got {other:?}"),
                    }),
                }
            };
            let (lo, hi, st) = (get(min, "min")?, get(max, "max")?, get(step, "stepsize")?);
            if st <= 0 {
                return Err(DescriptorError::NonPositiveStep {
                    parameter: name,
                    step: st.to_string(),
                });
            }
            if lo > hi {
                return Err(DescriptorError::InvertedRange {
                    parameter: name,
                    min: lo.to_string(),
                    max: hi.to_string(),
                });
            }
            let count = int_candidate_count(lo, hi, st);
            if count > MAX_CANDIDATES as u128 {
                return Err(DescriptorError::TooManyCandidates {
                    parameter: name,
                    count: count.to_string(),
                });
            }
            if !matches!(default, ParamValue::Int(_)) {
                return Err(invalid_default(format!(
                    "expected an integer, got `{default}`"
                )));
            }
            ParameterKind::Integer {
                min: lo,
                max: hi,
                step: st,
            }
        }
        Some("float") => {
            reject_extra(&[("values", values.is_some())])?;
            let get = |v: Option<Value>, field: &'static str| -> Result<f64, DescriptorError> {
                match v {
                    None | Some(Value::Null) => Err(DescriptorError::MissingRangeField {
                        parameter: name.clone(),
                        field,
                    }),
                    Some(Value::Number(n)) if n.as_f64().is_some_and(f64::is_finite) => {
                        Ok(n.as_f64().unwrap_or(0.0))
                    }
                    Some(other) => Err(DescriptorError::InvalidField {
                        field: format!("parameters.{name}.{field}"),
                        message: format!("expected a finite number, got {other:?}"),
                    }),
                }
            };
            let (lo, hi, st) = (get(min, "min")?, get(max, "max")?, get(step, "stepsize")?);
            if st <= 0.0 {
                return Err(DescriptorError::NonPositiveStep {
                    parameter: name,
                    step: st.to_string(),
                });
            }
            if lo > hi {
                return Err(DescriptorError::InvertedRange {
                    parameter: name,
                    min: lo.to_string(),
                    max: hi.to_string(),
                });
            }
            let span = (hi - lo) / st;
            if !span.is_finite() || span >= MAX_CANDIDATES as f64 {
                return Err(DescriptorError::TooManyCandidates {
                    parameter: name,
                    count: format!("{}", span.floor() + 1.0),
                });
            }
            let default = match default {
                ParamValue::Int(i) => ParamValue::Float(i as f64),
                ParamValue::Float(x) => ParamValue::Float(x),
                other => return Err(invalid_default(format!("expected a number, got `{other}`"))),
            };
            return Ok(ParameterSpec {
                name,
                kind: ParameterKind::Float {
                    min: lo,
                    max: hi,
                    step: st,
                },
                default,
            });
        }
        Some("values") => {
            reject_extra(&[
                ("min", min.is_some()),
                ("max", max.is_some()),
                ("stepsize", step.is_some()),
            ])?;
            let items = match values {
                None | Some(Value::Null) => {
                    return Err(DescriptorError::MissingRangeField {
                        parameter: name,
                        field: "values",
                    })
                }
                Some(Value::Sequence(items)) => items,
                Some(other) => {
                    return Err(DescriptorError::InvalidField {
                        field: format!("parameters.{name}.values"),
                        message: format!("expected a list, got {}", yaml_type_name(&other)),
                    })
                }
            };
            if items.is_empty() {
                return Err(DescriptorError::EmptyValueList { parameter: name });
            }
            let parsed = items
                .iter()
                .map(|v| {
                    ParamValue::from_yaml(v).ok_or_else(|| DescriptorError::InvalidField {
                        field: format!("parameters.{name}.values"),
                        message: format!("expected scalars, got {}", yaml_type_name(v)),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            ParameterKind::Values(parsed)
        }
        Some(other) => {
            return Err(DescriptorError::UnknownParameterType {
                parameter: name,
                found: other.to_string(),
            })
        }
    };
    Ok(ParameterSpec {
        name,
        kind,
        default,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const LISTING: &str = r#"
name: WEKA_C45_UNPRUNED
type: classification
framework: weka
package: weka.classifiers.trees
class: J48
features: [double,categorical]
parameters:
  U: # only default means that this will always be enabled
    default: enabled
  M:
    type: integer # can sample over ranges
    min: 1
    max: 10
    stepsize: 9
    default: 2
  O:
    type: flag
    default: disabled
  A:
    type: flag
    default: disabled
  doNotMakeSplitPointActualValue:
    type: flag
    default: disabled
  J:
    type: flag
    default: disabled
"#;

    #[test]
    fn parses_listing() {
        let d = parse_descriptor(LISTING).unwrap();
        assert_eq!(d.name, "WEKA_C45_UNPRUNED");
        assert_eq!(d.mode, Mode::Classification);
        assert_eq!(
            d.features,
            vec![FeatureKind::Numeric, FeatureKind::Categorical]
        );
        assert_eq!(d.parameters.len(), 6);
        let order: Vec<_> = d.parameters.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(
            order,
            ["U", "M", "O", "A", "doNotMakeSplitPointActualValue", "J"]
        );
        let m = d.parameter("M").unwrap();
        assert_eq!(
            m.candidate_values(),
            vec![ParamValue::Int(1), ParamValue::Int(10)]
        );
        assert_eq!(m.default, ParamValue::Int(2));
        let u = d.parameter("U").unwrap();
        assert!(u.is_pinned());
        assert_eq!(u.candidate_values(), vec![ParamValue::Flag(true)]);
    }

    fn with_params(params: &str) -> String {
        format!(
            "name: X\ntype: classification\npackage: p\nclass: C\nfeatures: [double]\nparameters:\n{params}"
        )
    }

    type Check = fn(&DescriptorError) -> bool;

    #[test]
    fn distinct_diagnostics() {
        let cases: Vec<(String, Check)> = vec![
            (
                with_params("  M:\n    type: integer\n    min: 5\n    max: 1\n    stepsize: 1\n    default: 1\n"),
                |e| matches!(e, DescriptorError::InvertedRange { .. }),
            ),
            (
                with_params("  M:\n    type: integer\n    min: 1\n    max: 5\n    stepsize: 0\n    default: 1\n"),
                |e| matches!(e, DescriptorError::NonPositiveStep { .. }),
            ),
            (
                with_params("  M:\n    type: bogus\n    default: 1\n"),
                |e| matches!(e, DescriptorError::UnknownParameterType { .. }),
            ),
            (
                with_params("  M:\n    type: flag\n"),
                |e| matches!(e, DescriptorError::MissingDefault { .. }),
            ),
            (
                with_params("  M:\n    default: 1\n  M:\n    default: 2\n"),
                |e| matches!(e, DescriptorError::DuplicateParameter(n) if n == "M"),
            ),
            (
                with_params("  V:\n    type: values\n    values: []\n    default: a\n"),
                |e| matches!(e, DescriptorError::EmptyValueList { .. }),
            ),
            (
                "name: X\ntype: classification\npackage: p\nclass: C\nfeatures: [text]\n".into(),
                |e| matches!(e, DescriptorError::UnknownFeatureKind(_)),
            ),
            (
                "name: X\ntype: classification\npackage: p\nclass: C\nfeatures: []\n".into(),
                |e| matches!(e, DescriptorError::EmptyFeatures),
            ),
            (
                "name: X\ntype: classification\nclass: C\nfeatures: [double]\n".into(),
                |e| matches!(e, DescriptorError::MissingField("package")),
            ),
            (
                "name: X\ntype: regression\npackage: p\nclass: C\nfeatures: [double]\n".into(),
                |e| matches!(e, DescriptorError::InvalidField { .. }),
            ),
            (
                "name: X\ntype: classification\npackage: p\nclass: C\nfeatures: [double]\nextra: 1\n".into(),
                |e| matches!(e, DescriptorError::UnknownKey(k) if k == "extra"),
            ),
            (
                "name: X\ntype: classification\npackage: p\nclass: C\nfeatures: [double]\naccepted_errors: ['(']\n".into(),
                |e| matches!(e, DescriptorError::InvalidPattern { .. }),
            ),
        ];
        for (src, check) in cases {
            let err = parse_descriptor(&src).unwrap_err();
            assert!(check(&err), "unexpected error {err:?} for\n{src}");
        }
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = parse_descriptor("name: X\ntype: [unclosed\n").unwrap_err();
        match err {
            DescriptorError::Syntax { line, .. } => assert!(line.is_some()),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn value_list_default_outside_candidates() {
        let d = parse_descriptor(&with_params(
            "  C:\n    type: values\n    values: [0.05, 0.5, 0.95]\n    default: 0.25\n",
        ))
        .unwrap();
        let c = &d.parameters[0];
        assert_eq!(
            c.candidate_values(),
            vec![
                ParamValue::Float(0.05),
                ParamValue::Float(0.5),
                ParamValue::Float(0.95)
            ]
        );
        assert_eq!(c.default, ParamValue::Float(0.25));
    }

    #[test]
    fn float_range_candidates() {
        let d = parse_descriptor(&with_params(
            "  C:\n    type: float\n    min: 0.1\n    max: 0.3\n    stepsize: 0.1\n    default: 0\n",
        ))
        .unwrap();
        let c = &d.parameters[0];
        assert_eq!(c.candidate_count(), 3);
        assert_eq!(c.default, ParamValue::Float(0.0));
        let values = c.candidate_values();
        assert!(matches!(values[2], ParamValue::Float(x) if (x - 0.3).abs() < 1e-12));
    }

    #[test]
    fn huge_ranges_are_rejected() {
        let err = parse_descriptor(&with_params(
            "  M:\n    type: integer\n    min: 0\n    max: 9223372036854775807\n    stepsize: 1\n    default: 0\n",
        ))
        .unwrap_err();
        assert!(matches!(err, DescriptorError::TooManyCandidates { .. }));
    }

    #[test]
    fn yaml_round_trip() {
        let d = parse_descriptor(LISTING).unwrap();
        assert_eq!(parse_descriptor(&d.to_yaml()).unwrap(), d);
    }
}
