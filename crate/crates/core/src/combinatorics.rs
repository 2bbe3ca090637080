//! One-at-a-time hyperparameter expansion.
//!
//! The first combination uses every default. Each further combination changes
//! exactly one parameter to one of its non-default candidates, so the number of
//! combinations grows linearly with the number of parameters.

use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::catalog::SmokeTestSpec;
use crate::descriptor::{AlgorithmDescriptor, ParamValue};

/// Parameter name to value, in descriptor order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Assignment(pub Vec<(String, ParamValue)>);

impl Assignment {
    pub fn get(&self, name: &str) -> Option<&ParamValue> {
        self.0.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Names whose values differ between `self` and `other`.
    pub fn differing_keys<'a>(&'a self, other: &'a Assignment) -> Vec<&'a str> {
        self.0
            .iter()
            .filter(|(k, v)| other.get(k) != Some(v))
            .map(|(k, _)| k.as_str())
            .collect()
    }
}

impl Serialize for Assignment {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Assignment {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Assignment;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a parameter assignment object")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Assignment, A::Error> {
                let mut pairs = Vec::new();
                while let Some(entry) = map.next_entry::<String, ParamValue>()? {
                    pairs.push(entry);
                }
                Ok(Assignment(pairs))
            }
        }
        d.deserialize_map(V)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterCombination {
    pub index: usize,
    /// Absent for the all-defaults combination.
    pub varied: Option<String>,
    pub assignment: Assignment,
}

fn defaults(d: &AlgorithmDescriptor) -> Assignment {
    Assignment(
        d.parameters
            .iter()
            .map(|p| (p.name.clone(), p.default.clone()))
            .collect(),
    )
}

pub fn expand(d: &AlgorithmDescriptor) -> Vec<ParameterCombination> {
    let base = defaults(d);
    let mut out = vec![ParameterCombination {
        index: 0,
        varied: None,
        assignment: base.clone(),
    }];
    for (pos, p) in d.parameters.iter().enumerate() {
        for value in p.candidate_values() {
            if value == p.default {
                continue;
            }
            let mut assignment = base.clone();
            assignment.0[pos].1 = value;
            out.push(ParameterCombination {
                index: out.len(),
                varied: Some(p.name.clone()),
                assignment,
            });
        }
    }
    out
}

/// Size of the full cross product of candidate sets. Saturates at `u128::MAX`.
pub fn count_exhaustive(d: &AlgorithmDescriptor) -> u128 {
    d.parameters.iter().fold(1u128, |acc, p| {
        acc.saturating_mul(p.candidate_count() as u128)
    })
}

/// `expand(d).len()` without materializing the combinations.
pub fn count_linear(d: &AlgorithmDescriptor) -> usize {
    1 + d
        .parameters
        .iter()
        .map(|p| {
            p.candidate_values()
                .iter()
                .filter(|v| **v != p.default)
                .count()
        })
        .sum::<usize>()
}

pub fn is_applicable(d: &AlgorithmDescriptor, spec: &SmokeTestSpec) -> bool {
    d.mode == spec.mode && d.supports(spec.feature_kind)
}

/// Number of (smoke test, combination) pairs a campaign executes.
pub fn campaign_size(descriptors: &[AlgorithmDescriptor], catalog: &[SmokeTestSpec]) -> usize {
    descriptors
        .iter()
        .map(|d| catalog.iter().filter(|s| is_applicable(d, s)).count() * count_linear(d))
        .sum()
}
