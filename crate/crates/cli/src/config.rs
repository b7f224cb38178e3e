//! Run configuration: JSON schema and conversions into core types.

use anyhow::{anyhow, bail, Context};
use nalgebra::DMatrix;
use num_complex::Complex64;
use otflow_core::hermitian::{HermitianMetric, NormalFormMetric};
use otflow_core::ot::{OTParams, SemidirectParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexSpec {
    pub re: f64,
    pub im: f64,
}

impl From<ComplexSpec> for Complex64 {
    fn from(z: ComplexSpec) -> Self {
        Complex64::new(z.re, z.im)
    }
}

impl From<Complex64> for ComplexSpec {
    fn from(z: Complex64) -> Self {
        ComplexSpec { re: z.re, im: z.im }
    }
}

/// Structure parameters: either direct OT data or a semidirect action table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamsSpec {
    Ot {
        r: usize,
        s: usize,
        b: Vec<Vec<f64>>,
        c: Vec<Vec<f64>>,
    },
    Semidirect {
        semidirect: SemidirectSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemidirectSpec {
    pub lambda: Vec<Vec<ComplexSpec>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda_prime: Option<Vec<Vec<ComplexSpec>>>,
}

/// Metric: split normal form (A, B, mixed C) or a full coefficient matrix.
/// Mixed indices are 1-based in the file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricSpec {
    NormalForm {
        #[serde(rename = "A")]
        a: Vec<f64>,
        #[serde(rename = "B")]
        b: Vec<f64>,
        #[serde(rename = "C", skip_serializing_if = "Option::is_none", default)]
        c: Option<Vec<MixedEntrySpec>>,
    },
    Full {
        g: Vec<Vec<ComplexSpec>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedEntrySpec {
    /// 1-based position among the γ factors.
    pub index: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kind: Option<FlowKindSpec>,
    pub t_max: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rtol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub atol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub first_sample: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sample_factor: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[clap(rename_all = "kebab-case")]
pub enum FlowKindSpec {
    ChernRicci,
    Pluriclosed,
    Generalized,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace_csv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub report_json: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub command: Option<String>,
    pub params: ParamsSpec,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub metric: Option<MetricSpec>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub flow: Option<FlowSpec>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub output: Option<OutputSpec>,
}

/// Either OT parameters or a built semidirect algebra.
pub enum BuiltParams {
    Ot(OTParams),
    Semidirect(SemidirectParams),
}

impl ParamsSpec {
    pub fn build(&self) -> anyhow::Result<BuiltParams> {
        match self {
            ParamsSpec::Ot { r, s, b, c } => Ok(BuiltParams::Ot(
                OTParams::new(*r, *s, b.clone(), c.clone()).map_err(|e| anyhow!("{e}"))?,
            )),
            ParamsSpec::Semidirect { semidirect } => {
                let lambda = semidirect
                    .lambda
                    .iter()
                    .map(|row| row.iter().map(|z| Complex64::from(z.clone())).collect())
                    .collect();
                let lambda_prime = semidirect.lambda_prime.as_ref().map(|lp| {
                    lp.iter()
                        .map(|row| row.iter().map(|z| Complex64::from(z.clone())).collect())
                        .collect()
                });
                Ok(BuiltParams::Semidirect(
                    SemidirectParams::new(lambda, lambda_prime).map_err(|e| anyhow!("{e}"))?,
                ))
            }
        }
    }
}

impl MetricSpec {
    /// 1-based mixed indices are shifted to the crate's 0-based convention.
    pub fn normal_form(&self) -> anyhow::Result<Option<NormalFormMetric>> {
        match self {
            MetricSpec::NormalForm { a, b, c } => {
                let mixed = c
                    .as_ref()
                    .map(|entries| {
                        entries
                            .iter()
                            .map(|e| {
                                if e.index == 0 {
                                    bail!("mixed index is 1-based; got 0");
                                }
                                Ok((e.index - 1, Complex64::new(e.re, e.im)))
                            })
                            .collect::<anyhow::Result<Vec<_>>>()
                    })
                    .transpose()?
                    .unwrap_or_default();
                Ok(Some(
                    NormalFormMetric::new(a.clone(), b.clone(), mixed)
                        .context("infeasible normal-form metric")?,
                ))
            }
            MetricSpec::Full { .. } => Ok(None),
        }
    }

    pub fn matrix(&self, n_h: usize, n_i: usize) -> anyhow::Result<DMatrix<Complex64>> {
        match self {
            MetricSpec::NormalForm { .. } => {
                let nf = self.normal_form()?.expect("normal form variant");
                if nf.s() != n_i || n_h != n_i {
                    bail!(
                        "normal-form metric of size {} does not fit type ({n_h},{n_i})",
                        nf.s()
                    );
                }
                Ok(nf.to_matrix())
            }
            MetricSpec::Full { g } => {
                let n = n_h + n_i;
                if g.len() != n || g.iter().any(|row| row.len() != n) {
                    bail!("metric matrix must be {n}x{n}");
                }
                Ok(DMatrix::from_fn(n, n, |i, j| {
                    Complex64::from(g[i][j].clone())
                }))
            }
        }
    }

    pub fn metric(&self, n_h: usize, n_i: usize) -> anyhow::Result<HermitianMetric> {
        HermitianMetric::new(n_h, n_i, self.matrix(n_h, n_i)?).context("infeasible metric")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_identically() {
        let text = r#"{
            "command": "flow",
            "params": {"r": 2, "s": 2, "b": [[-1.0,0.0],[0.0,-1.0]], "c": [[0.4,0.0],[0.9,0.3]]},
            "metric": {"A": [1.0, 1.0], "B": [1.0, 1.0], "C": [{"index": 2, "re": 0.5, "im": 0.0}]},
            "flow": {"kind": "pluriclosed", "t_max": 100.0, "rtol": 1e-8},
            "tol": 1e-10,
            "output": {"trace_csv": "trace.csv", "report_json": "report.json"}
        }"#;
        let parsed: RunConfig = serde_json::from_str(text).unwrap();
        let emitted = serde_json::to_string(&parsed).unwrap();
        let reparsed: RunConfig = serde_json::from_str(&emitted).unwrap();
        assert_eq!(parsed, reparsed);
    }

    #[test]
    fn semidirect_variant_parses() {
        let text = r#"{
            "params": {"semidirect": {"lambda": [[{"re": 0.1, "im": -0.25}]]}}
        }"#;
        let parsed: RunConfig = serde_json::from_str(text).unwrap();
        match parsed.params.build().unwrap() {
            BuiltParams::Semidirect(sd) => {
                assert_eq!(sd.r(), 1);
                assert_eq!(sd.s(), 1);
            }
            _ => panic!("expected semidirect"),
        }
    }

    #[test]
    fn mixed_index_is_one_based() {
        let spec = MetricSpec::NormalForm {
            a: vec![1.0, 1.0],
            b: vec![1.0, 1.0],
            c: Some(vec![MixedEntrySpec {
                index: 2,
                re: 0.3,
                im: 0.0,
            }]),
        };
        let nf = spec.normal_form().unwrap().unwrap();
        assert_eq!(nf.mixed()[0].0, 1);
        let zero = MetricSpec::NormalForm {
            a: vec![1.0],
            b: vec![1.0],
            c: Some(vec![MixedEntrySpec {
                index: 0,
                re: 0.3,
                im: 0.0,
            }]),
        };
        assert!(zero.normal_form().is_err());
    }
}
