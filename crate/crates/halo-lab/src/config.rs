use std::path::{Path, PathBuf};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use halo_core::iwahori::{MonoidElem, UpOperatorSpec};
use halo_core::ring::{PadicScalar, PrimeConfig, RingTag, WeightPoint};
use halo_core::weights::{classical_point, RadiusParam, WeightCharacter};

use crate::error::{LabError, LabResult};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PrimeSpec {
    pub p: u64,
    pub p_precision: i64,
    pub x_window: (i64, i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FamilyRing {
    Lambda,
    Annulus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum WeightSpec {
    Classical {
        k: i64,
        #[serde(default)]
        twist: u64,
    },
    Universal {
        eta: u64,
        #[serde(default = "default_ring")]
        ring: FamilyRing,
    },
    ModP {
        eta: u64,
    },
}

fn default_ring() -> FamilyRing {
    FamilyRing::Lambda
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Summand {
    pub source: usize,
    pub target: usize,
    /// (a, b, c, d), read mod p^pPrecision.
    pub gamma: [i64; 4],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorSpec {
    ToyUp {
        #[serde(default)]
        extra: Vec<Summand>,
    },
    Blocks {
        blocks: usize,
        summands: Vec<Summand>,
    },
    MultByP,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum PointSpec {
    ModP,
    /// X -> x for an integer x divisible by p.
    Classical { x: i64 },
    /// The point of integer weight k, x = (1+p)^k - 1.
    Weight { k: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FactorSpec {
    /// Required for family weights; a local-field series is factored as is.
    #[serde(default)]
    pub point: Option<PointSpec>,
    /// Slope bound as (numerator, denominator).
    pub h: (i64, i64),
    pub precision: i64,
    #[serde(default)]
    pub riesz: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
    Dat,
}

impl std::str::FromStr for Format {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            "dat" => Ok(Format::Dat),
            other => Err(LabError::Config(format!("unknown output format {other:?}"))),
        }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json, Format::Dat]
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: default_dir(), formats: default_formats() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub prime_config: PrimeSpec,
    pub weight: WeightSpec,
    pub operator: OperatorSpec,
    /// r = p^(-a/b)
    pub radius: (u64, u64),
    pub truncation: usize,
    pub n_max: usize,
    pub target_precision: i64,
    #[serde(default)]
    pub points: Vec<PointSpec>,
    #[serde(default)]
    pub factor: Option<FactorSpec>,
    /// When set, the first this-many slopes must agree across all points.
    #[serde(default)]
    pub expect_slope_agreement: Option<usize>,
    #[serde(default)]
    pub outputs: OutputSpec,
}

/// Everything the pipeline needs, checked and converted.
#[derive(Clone, Debug)]
pub struct Validated {
    pub cfg: PrimeConfig,
    pub kappa: WeightCharacter,
    pub radius: RadiusParam,
    pub points: Vec<WeightPoint>,
    pub factor: Option<(Option<WeightPoint>, Ratio<i64>)>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> LabResult<Self> {
        serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// sha256 of the canonical serialization, so whitespace does not matter.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> LabResult<Validated> {
        let ps = &self.prime_config;
        if ps.p % 2 == 0 {
            return Err(LabError::Config("p must be odd".into()));
        }
        let cfg = PrimeConfig::new(ps.p, ps.p_precision, ps.x_window).map_err(cfg_err)?;
        let kappa = match self.weight {
            WeightSpec::Classical { k, twist } => WeightCharacter::classical_twisted(&cfg, k, twist),
            WeightSpec::Universal { eta, ring } => {
                let tag = match ring {
                    FamilyRing::Lambda => RingTag::LambdaEta,
                    FamilyRing::Annulus => RingTag::REta,
                };
                WeightCharacter::universal(&cfg, eta, tag)
            }
            WeightSpec::ModP { eta } => WeightCharacter::mod_p(&cfg, eta),
        }
        .map_err(cfg_err)?;
        let radius = RadiusParam::new(self.radius.0, self.radius.1).map_err(cfg_err)?;
        if self.n_max == 0 {
            return Err(LabError::Config("nMax must be positive".into()));
        }
        if self.truncation == 0 {
            return Err(LabError::Config("truncation must be positive".into()));
        }
        let family = matches!(kappa.ring_tag(), RingTag::LambdaEta | RingTag::REta);
        if !self.points.is_empty() && !family {
            return Err(LabError::Config("weight points need a family weight (kind universal)".into()));
        }
        let points = self.points.iter().map(|p| point(&cfg, p)).collect::<LabResult<Vec<_>>>()?;
        let mut labels: Vec<String> = points.iter().map(|p| p.label()).collect();
        labels.sort();
        labels.dedup();
        if labels.len() != points.len() {
            return Err(LabError::Config("weight points must be distinct".into()));
        }
        let factor = match &self.factor {
            None => None,
            Some(f) => {
                if f.h.1 <= 0 {
                    return Err(LabError::Config("slope denominator must be positive".into()));
                }
                let pt = match (&f.point, family) {
                    (Some(p), true) => Some(point(&cfg, p)?),
                    (None, false) => None,
                    (None, true) => return Err(LabError::Config("factor needs a point for a family weight".into())),
                    (Some(_), false) => return Err(LabError::Config("factor point given but the series is not a family".into())),
                };
                Some((pt, Ratio::new(f.h.0, f.h.1)))
            }
        };
        if let Some(n) = self.expect_slope_agreement {
            if points.len() < 2 || n == 0 {
                return Err(LabError::Config("expectSlopeAgreement needs two points and a positive count".into()));
            }
        }
        let v = Validated { cfg, kappa, radius, points, factor };
        self.up_spec(&v)?;
        Ok(v)
    }

    /// The operator description for `build_u`; None for the pushforward.
    pub fn up_spec(&self, v: &Validated) -> LabResult<Option<UpOperatorSpec>> {
        let p = v.cfg.p();
        let gamma = |s: &Summand| {
            let [a, b, c, d] = s.gamma;
            MonoidElem::from_ints(p, a, b, c, d).map_err(cfg_err)
        };
        let spec = match &self.operator {
            OperatorSpec::MultByP => return Ok(None),
            OperatorSpec::ToyUp { extra } => {
                let mut spec = UpOperatorSpec::toy_up(&v.kappa, v.radius, self.truncation);
                for s in extra {
                    if s.source != 0 || s.target != 0 {
                        return Err(LabError::Config("toy-up has a single block".into()));
                    }
                    spec.summands[0].push((0, gamma(s)?));
                }
                spec
            }
            OperatorSpec::Blocks { blocks, summands } => {
                let mut table = vec![Vec::new(); *blocks];
                for s in summands {
                    let slot = table
                        .get_mut(s.source)
                        .ok_or_else(|| LabError::Config(format!("source block {} out of range", s.source)))?;
                    slot.push((s.target, gamma(s)?));
                }
                UpOperatorSpec { nblocks: *blocks, summands: table, kappa: v.kappa, radius: v.radius, truncation: self.truncation }
            }
        };
        spec.validate().map_err(cfg_err)?;
        Ok(Some(spec))
    }
}

fn point(cfg: &PrimeConfig, p: &PointSpec) -> LabResult<WeightPoint> {
    match *p {
        PointSpec::ModP => Ok(WeightPoint::ModP),
        PointSpec::Classical { x } => {
            if x % cfg.p() as i64 != 0 {
                return Err(LabError::Config(format!("x = {x} is not divisible by p")));
            }
            Ok(WeightPoint::classical(PadicScalar::from_int(cfg.p(), x)))
        }
        PointSpec::Weight { k } => Ok(classical_point(cfg, k)),
    }
}

fn cfg_err(e: halo_core::HaloError) -> LabError {
    LabError::Config(e.to_string())
}
