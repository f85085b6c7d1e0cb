use scenario_cert::cdf::CdfEnvelope;
use scenario_cert::problems::ConicSector;
use scenario_cert::scenario::{CertificationReport, Decision, Interval};
use serde::{Deserialize, Serialize};

/// Problem-specific parameters needed to rebuild the problem from a saved
/// document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "kebab-case")]
pub enum Setup {
    PolePlacement { sector: ConicSector },
    InputDesign { rho: f64, postdesign_level: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub samples: usize,
    pub seed: u64,
    /// Fraction of fresh scenarios failing the post-design criterion.
    pub postdesign_risk: f64,
    pub within_upper: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub within_interval: Option<bool>,
}

impl MonteCarlo {
    pub fn new(samples: usize, seed: u64, risk: f64, report: &CertificationReport) -> Self {
        let interval = report.theorem2_interval.or(report.theorem3_interval);
        MonteCarlo {
            samples,
            seed,
            postdesign_risk: risk,
            within_upper: risk <= report.theorem1_upper,
            within_interval: interval.map(|i| contains(&i, risk)),
        }
    }
}

fn contains(i: &Interval, x: f64) -> bool {
    i.lower <= x && x <= i.upper
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub max_real: f64,
    pub instrumental_complexity: usize,
    pub upper: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<Interval>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub postdesign_risk: Option<f64>,
}

/// The JSON written by `certify`, `cdf` and `example`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateDoc {
    #[serde(flatten)]
    pub setup: Setup,
    #[serde(default)]
    pub scenario_seed: Option<u64>,
    pub decision: Decision,
    pub report: CertificationReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarlo>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<CdfEnvelope>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empirical_cdf: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonRow {
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_hi: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonDoc {
    pub n: usize,
    pub beta: f64,
    pub rows: Vec<EpsilonRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationDoc {
    #[serde(flatten)]
    pub setup: Setup,
    pub report_upper: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report_interval: Option<Interval>,
    pub monte_carlo: MonteCarlo,
}
