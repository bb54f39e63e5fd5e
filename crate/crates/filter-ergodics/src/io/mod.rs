//! File formats: the JSON model schema, empirical-measure JSON, CSV and SVG
//! emission, and run manifests.

mod manifest;
mod measure;
mod svg;

pub use manifest::{fnv64_hex, RunManifest};
pub use measure::{measure_from_json, measure_to_json};
pub use svg::line_chart_svg;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{JointKernel, NondegenFactorization, StateSpace, StationaryLaw};

/// On-disk model description.
///
/// `rows` are indexed `(z * |F| + w)` by `(z' * |F| + w')`; the factorized
/// variant carries `P0` (`|E| x |E|`), `Q` (`|F| x |F|`) and the density `g`
/// nested as `g[z][w][z'][w']`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub hidden_labels: Vec<String>,
    pub observed_labels: Vec<String>,
    pub kernel: KernelSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum KernelSpec {
    #[serde(rename = "joint")]
    Joint { rows: Vec<Vec<f64>> },
    #[serde(rename = "factorized")]
    Factorized {
        #[serde(rename = "P0")]
        p0: Vec<Vec<f64>>,
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
        g: Vec<Vec<Vec<Vec<f64>>>>,
    },
}

/// A model loaded from disk: the kernel plus whatever the file supplied.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub kernel: JointKernel,
    pub supplied_pi: Option<Vec<f64>>,
    pub supplied_factorization: Option<NondegenFactorization>,
}

pub fn model_from_json(text: &str) -> Result<LoadedModel> {
    let file: ModelFile = serde_json::from_str(text)?;
    model_from_file(file)
}

pub fn model_from_file(file: ModelFile) -> Result<LoadedModel> {
    let space = StateSpace::new(file.hidden_labels.clone(), file.observed_labels.clone())?;
    let n = space.pair_count();
    let ne = space.hidden_count();
    let nf = space.observed_count();
    match file.kernel {
        KernelSpec::Joint { rows } => {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::ModelFile(format!(
                    "joint kernel must be {n} rows of {n} entries"
                )));
            }
            let flat: Vec<f64> = rows.into_iter().flatten().collect();
            let kernel = JointKernel::validate(space, flat)?;
            Ok(LoadedModel {
                kernel,
                supplied_pi: file.pi,
                supplied_factorization: None,
            })
        }
        KernelSpec::Factorized { p0, q, g } => {
            if p0.len() != ne || p0.iter().any(|r| r.len() != ne) {
                return Err(Error::ModelFile(format!("P0 must be {ne} x {ne}")));
            }
            if q.len() != nf || q.iter().any(|r| r.len() != nf) {
                return Err(Error::ModelFile(format!("Q must be {nf} x {nf}")));
            }
            let shape_ok = g.len() == ne
                && g.iter().all(|a| {
                    a.len() == nf
                        && a.iter().all(|b| {
                            b.len() == ne && b.iter().all(|c| c.len() == nf)
                        })
                });
            if !shape_ok {
                return Err(Error::ModelFile(format!(
                    "g must be nested [{ne}][{nf}][{ne}][{nf}]"
                )));
            }
            let p0_flat: Vec<f64> = p0.into_iter().flatten().collect();
            let q_flat: Vec<f64> = q.into_iter().flatten().collect();
            let mut g_flat = vec![0.0; n * n];
            let mut rows = vec![0.0; n * n];
            for z in 0..ne {
                for w in 0..nf {
                    let s = space.pair_index(z, w);
                    for z1 in 0..ne {
                        for w1 in 0..nf {
                            let t = space.pair_index(z1, w1);
                            let gv = g[z][w][z1][w1];
                            g_flat[s * n + t] = gv;
                            rows[s * n + t] = gv * p0_flat[z * ne + z1] * q_flat[w * nf + w1];
                        }
                    }
                }
            }
            let kernel = JointKernel::validate(space, rows)?;
            Ok(LoadedModel {
                kernel,
                supplied_pi: file.pi,
                supplied_factorization: Some(NondegenFactorization {
                    p0: p0_flat,
                    q: q_flat,
                    g: g_flat,
                }),
            })
        }
    }
}

/// Serialize a kernel (and optionally its invariant law) into the joint-rows
/// schema.
pub fn model_to_file(kernel: &JointKernel, law: Option<&StationaryLaw>) -> ModelFile {
    let space = kernel.space();
    let n = space.pair_count();
    let rows: Vec<Vec<f64>> = (0..n).map(|s| kernel.row(s).to_vec()).collect();
    ModelFile {
        hidden_labels: space.hidden_labels().to_vec(),
        observed_labels: space.observed_labels().to_vec(),
        kernel: KernelSpec::Joint { rows },
        pi: law.map(|l| l.pi().to_vec()),
    }
}

pub fn model_to_json(kernel: &JointKernel, law: Option<&StationaryLaw>) -> String {
    serde_json::to_string_pretty(&model_to_file(kernel, law)).expect("model serializes")
}

/// Serialize a factorization certificate into the factorized schema; the
/// kernel reconstructs as `g * (P0 (x) Q)` on load.
pub fn model_to_file_factorized(
    kernel: &JointKernel,
    fact: &NondegenFactorization,
    law: Option<&StationaryLaw>,
) -> ModelFile {
    let space = kernel.space();
    let ne = space.hidden_count();
    let nf = space.observed_count();
    let n = space.pair_count();
    ModelFile {
        hidden_labels: space.hidden_labels().to_vec(),
        observed_labels: space.observed_labels().to_vec(),
        kernel: KernelSpec::Factorized {
            p0: (0..ne).map(|z| fact.p0[z * ne..(z + 1) * ne].to_vec()).collect(),
            q: (0..nf).map(|w| fact.q[w * nf..(w + 1) * nf].to_vec()).collect(),
            g: (0..ne)
                .map(|z| {
                    (0..nf)
                        .map(|w| {
                            (0..ne)
                                .map(|z1| {
                                    (0..nf)
                                        .map(|w1| {
                                            fact.g[space.pair_index(z, w) * n
                                                + space.pair_index(z1, w1)]
                                        })
                                        .collect()
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        },
        pi: law.map(|l| l.pi().to_vec()),
    }
}

/// Format a float with 17 significant digits, locale-free. 17 digits
/// round-trip any f64 exactly, which keeps CSV outputs reproducible across
/// toolchains.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Parse an observation path given either as JSON array of observed labels
/// or of integer indices.
pub fn observations_from_json(space: &StateSpace, text: &str) -> Result<Vec<usize>> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let arr = value
        .as_array()
        .ok_or_else(|| Error::ModelFile("observation path must be a JSON array".into()))?;
    arr.iter()
        .map(|v| match v {
            serde_json::Value::String(s) => space.observed_index(s),
            serde_json::Value::Number(n) => {
                let idx = n
                    .as_u64()
                    .ok_or_else(|| Error::ModelFile(format!("bad observation index {n}")))?
                    as usize;
                if idx < space.observed_count() {
                    Ok(idx)
                } else {
                    Err(Error::ModelFile(format!("observation index {idx} out of range")))
                }
            }
            other => Err(Error::ModelFile(format!("bad observation entry {other}"))),
        })
        .collect()
}
