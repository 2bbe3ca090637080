#![allow(dead_code)]

use std::path::PathBuf;

use mlsmoke::catalog::Mode;
use mlsmoke::datagen::FeatureKind;
use mlsmoke::descriptor::{
    parse_descriptor, AlgorithmDescriptor, ParamValue, ParameterKind, ParameterSpec,
};
use proptest::prelude::*;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures/descriptors")
        .join(name)
}

pub fn template(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("templates")
        .join(name)
}

pub fn load_fixture(name: &str) -> AlgorithmDescriptor {
    let text = std::fs::read_to_string(fixture(name)).unwrap();
    parse_descriptor(&text).unwrap()
}

pub const J48_FIXTURES: [&str; 3] = ["j48_unpruned.yaml", "j48_pruned.yaml", "j48_rep.yaml"];

pub fn descriptor(name: &str, mode: Mode, parameters: Vec<ParameterSpec>) -> AlgorithmDescriptor {
    AlgorithmDescriptor {
        name: name.into(),
        mode,
        framework: "test".into(),
        package: "pkg".into(),
        class: "Algo".into(),
        features: vec![FeatureKind::Numeric, FeatureKind::Categorical],
        parameters,
        accepted_errors: vec![],
    }
}

/// A parameter with at most five candidates.
fn parameter(name: String) -> impl Strategy<Value = ParameterSpec> {
    let pinned = any::<bool>().prop_map(|b| (ParameterKind::Pinned, ParamValue::Flag(b)));
    let flag = any::<bool>().prop_map(|b| (ParameterKind::Flag, ParamValue::Flag(b)));
    let integer = (-50i64..50, 1i64..20, 0i64..5, 0usize..6).prop_map(|(min, step, k, d)| {
        let max = min + k * step;
        let d = d as i64;
        let default = if d <= k { min + d * step } else { max + 1 };
        (
            ParameterKind::Integer { min, max, step },
            ParamValue::Int(default),
        )
    });
    let values = (
        prop::collection::btree_set(0i64..1000, 1..=5),
        any::<prop::sample::Index>(),
        any::<bool>(),
    )
        .prop_map(|(set, idx, outside)| {
            let vals: Vec<ParamValue> = set.iter().map(|v| ParamValue::Int(*v)).collect();
            let default = if outside {
                ParamValue::Int(-1)
            } else {
                vals[idx.index(vals.len())].clone()
            };
            (ParameterKind::Values(vals), default)
        });
    let text = (
        prop::collection::btree_set("[a-z]{1,6}", 1..=5),
        any::<prop::sample::Index>(),
    )
        .prop_map(|(set, idx)| {
            let vals: Vec<ParamValue> = set.into_iter().map(ParamValue::Text).collect();
            let default = vals[idx.index(vals.len())].clone();
            (ParameterKind::Values(vals), default)
        });
    prop_oneof![pinned, flag, integer, values, text].prop_map(move |(kind, default)| {
        ParameterSpec {
            name: name.clone(),
            kind,
            default,
        }
    })
}

/// Descriptors with up to 20 parameters of at most five candidates each.
pub fn arb_descriptor() -> impl Strategy<Value = AlgorithmDescriptor> {
    (0usize..=20)
        .prop_flat_map(|k| {
            (0..k)
                .map(|i| parameter(format!("p{i}")))
                .collect::<Vec<_>>()
        })
        .prop_map(|params| descriptor("generated", Mode::Classification, params))
}
