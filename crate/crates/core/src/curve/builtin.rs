//! Named curves shipped with the crate (sources under `data/curves/`).

use super::{CurveFile, CurveGraph};
use crate::error::{Error, Result};

const BUILTINS: &[(&str, &str)] = &[
    ("circle", include_str!("../../data/curves/circle.json")),
    ("helix", include_str!("../../data/curves/helix.json")),
    ("lgraph", include_str!("../../data/curves/lgraph.json")),
    ("tjunction", include_str!("../../data/curves/tjunction.json")),
    ("fig3", include_str!("../../data/curves/fig3.json")),
    ("zaxis", include_str!("../../data/curves/zaxis.json")),
];

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|(n, _)| *n)
}

/// Loads a built-in curve by name.
pub fn builtin(name: &str) -> Result<CurveGraph> {
    let (_, text) = BUILTINS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::CurveFile(format!("unknown built-in curve `{name}`")))?;
    CurveFile::parse(text)?.to_graph()
}
