use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use halo_core::distributions::{mult_by_p_pushforward, DenseOperatorMatrix};
use halo_core::fredholm::{
    fredholm_det, lambda_sequence, newton_polygon, poly_mul_trunc, riesz_kernel, slope_factorize,
    EntireSeriesTrunc, NewtonPolygon, PointValue,
};
use halo_core::iwahori::build_u;
use halo_core::ring::{BoundarySeriesElem, WeightPoint};
use halo_core::HaloError;

use crate::config::{ExperimentConfig, Validated};
use crate::error::{at, CheckFailure, LabError, LabResult};

pub const REPORT_SCHEMA: &str = "halo-lab/report/v1";

/// Which parts of the pipeline to run after the characteristic series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stages {
    pub lambda: bool,
    pub points: bool,
    pub factor: bool,
    pub riesz: bool,
}

impl Stages {
    pub const ALL: Stages = Stages { lambda: true, points: true, factor: true, riesz: true };
    pub const CHARSERIES: Stages = Stages { lambda: false, points: false, factor: false, riesz: false };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Unproven,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Provenance {
    pub config_sha256: String,
    pub library_version: String,
    pub ring: String,
    pub blocks: usize,
    pub truncation_requested: usize,
    pub truncation_used: usize,
    pub matrix_dimension: usize,
    pub n_max: usize,
    pub target_precision: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CoefficientRow {
    pub n: usize,
    /// Lower bound on the valuation; None when c_n is exactly zero.
    pub valuation: Option<i64>,
    pub certified: bool,
    /// c_n is known modulo this power of the uniformizer; None when exact.
    pub precision_modulus: Option<i64>,
    pub lambda_n: i64,
    pub ok: Status,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SlopeRow {
    pub slope_num: i64,
    pub slope_den: i64,
    pub multiplicity: usize,
    pub provisional: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PolygonReport {
    pub label: String,
    pub point: String,
    /// Valuation of the specializing x (1 at the mod-p point).
    pub point_valuation: Option<i64>,
    pub vertices: Vec<(i64, String)>,
    pub slopes: Vec<SlopeRow>,
    /// slope / v(x), one entry per slope counted with multiplicity.
    pub ratios: Vec<String>,
    #[serde(skip)]
    pub points: Vec<(i64, PointValue)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RieszReport {
    pub dimension: usize,
    pub char_poly: Vec<String>,
    pub matches_factor: Status,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FactorReport {
    pub point: String,
    pub h: String,
    pub degree: usize,
    pub q: Vec<String>,
    pub s: Vec<String>,
    pub residual: Status,
    pub riesz: Option<RieszReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Checks {
    pub entry_bound: Status,
    pub lambda_bound: Option<Status>,
    pub residual: Option<Status>,
    pub slope_agreement: Option<Status>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentReport {
    pub schema: String,
    pub provenance: Provenance,
    pub coefficients: Vec<CoefficientRow>,
    pub polygon: PolygonReport,
    pub points: Vec<PolygonReport>,
    pub factorization: Option<FactorReport>,
    pub checks: Checks,
}

impl ExperimentReport {
    /// The first assertion that failed, in exit-code order.
    pub fn failure(&self) -> Option<CheckFailure> {
        let c = &self.checks;
        if c.lambda_bound == Some(Status::Fail) {
            return Some(CheckFailure::Lambda);
        }
        if c.residual == Some(Status::Fail) {
            return Some(CheckFailure::Residual);
        }
        if matches!(c.slope_agreement, Some(Status::Fail | Status::Unproven)) {
            return Some(CheckFailure::SlopeAgreement);
        }
        None
    }
}

fn q_str(q: Ratio<i64>) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn slope_rows(np: &NewtonPolygon) -> Vec<SlopeRow> {
    np.segments
        .iter()
        .map(|s| SlopeRow {
            slope_num: *s.slope.numer(),
            slope_den: *s.slope.denom(),
            multiplicity: s.multiplicity,
            provisional: s.provisional,
        })
        .collect()
}

fn points_of(f: &EntireSeriesTrunc) -> Vec<(i64, PointValue)> {
    (0..=f.n_max()).map(|n| (n as i64, PointValue::from(f.valuation(n)))).collect()
}

fn polygon_report(label: String, point: String, vx: Option<i64>, f: &EntireSeriesTrunc, np: &NewtonPolygon) -> PolygonReport {
    let ratios = match vx {
        Some(v) if v != 0 => np.slope_list().into_iter().map(|s| q_str(s / Ratio::from_integer(v))).collect(),
        _ => vec![],
    };
    PolygonReport {
        label,
        point,
        point_valuation: vx,
        vertices: np.vertices.iter().map(|&(x, y)| (x, q_str(y))).collect(),
        slopes: slope_rows(np),
        ratios,
        points: points_of(f),
    }
}

fn point_valuation(pt: &WeightPoint) -> Option<i64> {
    match pt {
        WeightPoint::ModP => Some(1),
        WeightPoint::Classical { x, .. } => x.valuation().certified_value(),
    }
}

/// Build the operator; a failed entry bound gets its own exit code.
pub fn build_operator(config: &ExperimentConfig, v: &Validated) -> LabResult<DenseOperatorMatrix> {
    let u = match config.up_spec(v)? {
        Some(spec) => build_u(&spec, v.cfg.p_precision()),
        None => mult_by_p_pushforward(&v.cfg, v.kappa.ring_tag(), config.truncation, v.radius),
    };
    let u = u.map_err(|e| match e {
        HaloError::NormViolation { .. } => LabError::EntryBound(e),
        e => LabError::Compute { stage: "build", source: e },
    })?;
    u.verify_certificate().map_err(LabError::EntryBound)?;
    Ok(u)
}

/// Slopes at each point, specialized independently (in parallel when a pool is installed).
pub fn slope_scan(f: &EntireSeriesTrunc, points: &[WeightPoint], n_max: usize) -> LabResult<Vec<PolygonReport>> {
    points
        .par_iter()
        .map(|pt| {
            let g = f.truncated(n_max.min(f.n_max())).specialize(pt).map_err(at("slope scan"))?;
            let np = newton_polygon(&g).map_err(at("slope scan"))?;
            Ok(polygon_report(pt.label(), pt.to_string(), point_valuation(pt), &g, &np))
        })
        .collect()
}

fn certain_slopes(r: &PolygonReport) -> Vec<Ratio<i64>> {
    r.slopes
        .iter()
        .take_while(|s| !s.provisional)
        .flat_map(|s| std::iter::repeat(Ratio::new(s.slope_num, s.slope_den)).take(s.multiplicity))
        .collect()
}

/// The first `count` certified slopes coincide at every point.
pub fn agreement(points: &[PolygonReport], count: usize) -> Status {
    let lists: Vec<_> = points.iter().map(certain_slopes).collect();
    if lists.iter().any(|l| l.len() < count) {
        return Status::Unproven;
    }
    let first = &lists[0][..count];
    if lists.iter().all(|l| &l[..count] == first) {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn lambda_rows(f: &EntireSeriesTrunc, t: usize, p: u64) -> LabResult<(Vec<CoefficientRow>, Status)> {
    let lam = lambda_sequence(t, f.n_max(), p).map_err(at("lambda check"))?;
    let mut overall = Status::Pass;
    let rows = (0..=f.n_max())
        .map(|n| {
            let v = f.valuation(n);
            let l = lam.value(n);
            let ok = match (v.value, v.certified) {
                (None, _) => Status::Pass,
                (Some(x), _) if x >= l => Status::Pass,
                (Some(_), true) => Status::Fail,
                (Some(_), false) => Status::Unproven,
            };
            overall = match (overall, ok) {
                (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
                (Status::Unproven, _) | (_, Status::Unproven) => Status::Unproven,
                _ => Status::Pass,
            };
            CoefficientRow {
                n,
                valuation: v.value,
                certified: v.certified || v.value.is_none(),
                precision_modulus: f.precision(n),
                lambda_n: l,
                ok,
                value: f.coeff(n).to_string(),
            }
        })
        .collect();
    Ok((rows, overall))
}

fn factor_stage(
    config: &ExperimentConfig,
    u: &DenseOperatorMatrix,
    f: &EntireSeriesTrunc,
    pt: &Option<WeightPoint>,
    h: Ratio<i64>,
    riesz: bool,
) -> LabResult<FactorReport> {
    let spec = config.factor.as_ref().expect("validated factor spec");
    let local = match pt {
        Some(pt) => f.specialize(pt).map_err(at("factor"))?,
        None => f.clone(),
    };
    let fac = slope_factorize(&local, h, spec.precision).map_err(at("factor"))?;
    let len = local.n_max() + 1;
    let prod = poly_mul_trunc(&fac.q, fac.s.coeffs(), len).map_err(at("factor"))?;
    let residual = prod
        .iter()
        .zip(local.coeffs())
        .map(|(a, b)| a.agrees_with(b))
        .collect::<halo_core::Result<Vec<bool>>>()
        .map_err(at("factor"))?;
    let residual = if residual.iter().all(|&b| b) { Status::Pass } else { Status::Fail };
    let riesz = if riesz {
        let ul = match pt {
            Some(pt) => u.specialize(pt).map_err(at("riesz"))?,
            None => u.clone(),
        };
        let k = riesz_kernel(&ul, &fac.q, spec.precision).map_err(at("riesz"))?;
        let same = k
            .char_poly
            .iter()
            .zip(&fac.q)
            .map(|(a, b)| a.agrees_with(b))
            .collect::<halo_core::Result<Vec<bool>>>()
            .map_err(at("riesz"))?;
        Some(RieszReport {
            dimension: k.dim(),
            char_poly: k.char_poly.iter().map(BoundarySeriesElem::to_string).collect(),
            matches_factor: if same.iter().all(|&b| b) { Status::Pass } else { Status::Fail },
        })
    } else {
        None
    };
    Ok(FactorReport {
        point: pt.as_ref().map_or_else(|| "native".to_string(), |p| p.to_string()),
        h: q_str(h),
        degree: fac.degree(),
        q: fac.q.iter().map(BoundarySeriesElem::to_string).collect(),
        s: fac.s.coeffs().iter().map(BoundarySeriesElem::to_string).collect(),
        residual,
        riesz,
    })
}

/// build_U, fredholm_det, the lambda check, per-point polygons, then the
/// optional factorization. Mathematical failures are recorded in `checks`;
/// only errors that stop the pipeline are returned as Err.
pub fn run_experiment(config: &ExperimentConfig, stages: Stages) -> LabResult<ExperimentReport> {
    let v = config.validate()?;
    let u = build_operator(config, &v)?;
    let f = fredholm_det(&u, config.n_max, config.target_precision, None).map_err(at("fredholm determinant"))?;
    let (coefficients, lambda_status) = lambda_rows(&f, u.blocks(), v.cfg.p())?;
    let native = newton_polygon(&f).map_err(at("newton polygon"))?;
    let polygon = polygon_report("native".into(), format!("{:?} coefficients", f.tag()), None, &f, &native);
    let (points, slope_agreement) = if stages.points && !v.points.is_empty() {
        let pts = slope_scan(&f, &v.points, config.n_max)?;
        let agree = config.expect_slope_agreement.map(|n| agreement(&pts, n));
        (pts, agree)
    } else {
        (vec![], None)
    };
    let factorization = match (&v.factor, stages.factor) {
        (Some((pt, h)), true) => {
            let riesz = stages.riesz && config.factor.as_ref().is_some_and(|s| s.riesz);
            Some(factor_stage(config, &u, &f, pt, *h, riesz)?)
        }
        _ => None,
    };
    let residual = factorization.as_ref().map(|r| match (r.residual, r.riesz.as_ref().map(|k| k.matches_factor)) {
        (Status::Pass, None | Some(Status::Pass)) => Status::Pass,
        _ => Status::Fail,
    });
    Ok(ExperimentReport {
        schema: REPORT_SCHEMA.into(),
        provenance: Provenance {
            config_sha256: config.hash(),
            library_version: env!("CARGO_PKG_VERSION").into(),
            ring: format!("{:?}", f.tag()),
            blocks: u.blocks(),
            truncation_requested: config.truncation,
            truncation_used: f.truncation().unwrap_or(u.dim()),
            matrix_dimension: u.dim(),
            n_max: config.n_max,
            target_precision: config.target_precision,
        },
        coefficients,
        polygon,
        points,
        factorization,
        checks: Checks {
            entry_bound: Status::Pass,
            lambda_bound: stages.lambda.then_some(lambda_status),
            residual,
            slope_agreement,
        },
    })
}
