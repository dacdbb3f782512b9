//! Weight characters of Z_p^x, the radius parameter r = p^(-a/b), and the
//! dictionary between integer weights and X-coordinates.
//!
//! The X-coordinate uses the topological generator 1+p of 1 + pZ_p: the
//! universal character sends z to w(z mod p)^e (1+X)^s(z) with
//! s(z) = log<z> / log(1+p), so integer weight k sits at X = (1+p)^k - 1.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;

use crate::error::{HaloError, Result};
use crate::ring::{
    binomials, ilog, plog, teichmuller, BoundarySeriesElem, PadicScalar, PrimeConfig, RingTag,
    WeightPoint,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WeightKind {
    /// z -> w(z mod p)^twist * z^k, valued in Q_p.
    Classical { k: i64, twist: u64 },
    /// The universal character over Z_p[[X]] or the annulus ring, twisted by
    /// eta(z) = (z mod p)^eta.
    UniversalBoundary { eta: u64, target: RingTag },
    /// Reduction of the universal character mod p, valued in F_p((X)).
    ModPBoundary { eta: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WeightCharacter {
    kind: WeightKind,
    cfg: PrimeConfig,
}

impl WeightCharacter {
    pub fn classical(cfg: &PrimeConfig, k: i64) -> Self {
        WeightCharacter { kind: WeightKind::Classical { k, twist: 0 }, cfg: *cfg }
    }

    pub fn classical_twisted(cfg: &PrimeConfig, k: i64, twist: u64) -> Result<Self> {
        let order = cfg.p() - 1;
        if twist >= order {
            return Err(HaloError::ConfigInvalid(format!("twist must lie in 0..{order}")));
        }
        Ok(WeightCharacter { kind: WeightKind::Classical { k, twist }, cfg: *cfg })
    }

    /// The classical character the eta-family passes through at weight k:
    /// z -> w(z mod p)^eta <z>^k.
    pub fn classical_in_family(cfg: &PrimeConfig, k: i64, eta: u64) -> Result<Self> {
        let order = (cfg.p() - 1) as i64;
        let twist = (eta as i64 - k).rem_euclid(order) as u64;
        Self::classical_twisted(cfg, k, twist)
    }

    pub fn universal(cfg: &PrimeConfig, eta: u64, target: RingTag) -> Result<Self> {
        if eta >= cfg.p() - 1 {
            return Err(HaloError::ConfigInvalid(format!("eta must lie in 0..{}", cfg.p() - 1)));
        }
        if !matches!(target, RingTag::LambdaEta | RingTag::REta) {
            return Err(HaloError::ConfigInvalid(format!(
                "universal character lands in LambdaEta or REta, not {target:?}"
            )));
        }
        Ok(WeightCharacter { kind: WeightKind::UniversalBoundary { eta, target }, cfg: *cfg })
    }

    pub fn mod_p(cfg: &PrimeConfig, eta: u64) -> Result<Self> {
        if eta >= cfg.p() - 1 {
            return Err(HaloError::ConfigInvalid(format!("eta must lie in 0..{}", cfg.p() - 1)));
        }
        Ok(WeightCharacter { kind: WeightKind::ModPBoundary { eta }, cfg: *cfg })
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn cfg(&self) -> &PrimeConfig {
        &self.cfg
    }

    /// Ring the character takes values in.
    pub fn ring_tag(&self) -> RingTag {
        match self.kind {
            WeightKind::Classical { .. } => RingTag::Qp,
            WeightKind::UniversalBoundary { target, .. } => target,
            WeightKind::ModPBoundary { .. } => RingTag::FpLaurent,
        }
    }

    pub fn with_config(&self, cfg: &PrimeConfig) -> Self {
        WeightCharacter { kind: self.kind, cfg: *cfg }
    }

    pub fn eval(&self, z: &PadicScalar) -> Result<BoundarySeriesElem> {
        let p = self.cfg.p();
        if z.p() != p || z.valuation().certified_value() != Some(0) {
            return Err(HaloError::NonUnitArgument);
        }
        let zbar = z.residue_mod_p().ok_or(HaloError::NonUnitArgument)? as i64;
        let n = self.cfg.p_precision();
        match self.kind {
            WeightKind::Classical { k, twist } => {
                let zk = if k >= 0 {
                    z.pow(k as u64)
                } else {
                    z.inv(n)?.pow(k.unsigned_abs())
                };
                let v = if twist == 0 { zk } else { zk.mul(&teichmuller(p, zbar, n)?.pow(twist)) };
                BoundarySeriesElem::from_scalar(&self.cfg, RingTag::Qp, &v)
            }
            WeightKind::UniversalBoundary { eta, target } => self.eval_universal(z, zbar, eta, target),
            WeightKind::ModPBoundary { eta } => {
                let f = self.eval_universal(z, zbar, eta, RingTag::LambdaEta)?;
                f.specialize(&WeightPoint::ModP)
            }
        }
    }

    fn eval_universal(&self, z: &PadicScalar, zbar: i64, eta: u64, target: RingTag) -> Result<BoundarySeriesElem> {
        let p = self.cfg.p();
        let cap = self.cfg.series_cap();
        let work = cap + 2;
        let omega = teichmuller(p, zbar, work)?;
        let bracket = z.mul(&omega.inv(work)?).with_prec(work);
        let s = log_ratio(&bracket, p, work)?;
        let top = (cap - 1).min(self.cfg.n_max()).max(0) as usize;
        let bins = binomials(&s, top)?;
        let mut prec = cap;
        let mut coeffs = Vec::with_capacity(top + 1);
        for (j, b) in bins.iter().enumerate() {
            if let Some(k) = b.prec() {
                prec = prec.min(k + j as i64);
            }
            coeffs.push(b.to_integer().expect("binomials of Z_p elements are integral"));
        }
        if let Some(ks) = s.prec() {
            // coefficient j is known to ks - floor(log_p j) digits
            debug_assert!((0..=top).all(|j| ks - ilog(p, j as u64) + j as i64 >= prec));
        }
        let series = BoundarySeriesElem::from_coeffs(&self.cfg, target, 0, coeffs, Some(prec))?;
        if eta == 0 {
            return Ok(series);
        }
        series.mul_scalar(&omega.pow(eta).with_prec(work))
    }
}

/// s = log(u) / log(1+p), a p-adic integer for any 1-unit u.
fn log_ratio(u: &PadicScalar, p: u64, work: i64) -> Result<PadicScalar> {
    let lu = plog(u, work)?;
    let lg = plog(&PadicScalar::from_int(p, 1 + p as i64), work)?;
    // both logs have valuation >= 1 and log(1+p) has valuation exactly 1
    let pb = PadicScalar::from_int(p, p);
    let num = lu.div(&pb, work)?;
    let den = lg.div(&pb, work)?;
    num.div(&den, work)
}

impl fmt::Display for WeightCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            WeightKind::Classical { k, twist: 0 } => write!(f, "z^{k}"),
            WeightKind::Classical { k, twist } => write!(f, "w^{twist} z^{k}"),
            WeightKind::UniversalBoundary { eta, target } => write!(f, "kappa_eta (eta={eta}) over {target:?}"),
            WeightKind::ModPBoundary { eta } => write!(f, "kappa_eta mod p (eta={eta})"),
        }
    }
}

pub fn eval_weight(kappa: &WeightCharacter, z: &PadicScalar) -> Result<BoundarySeriesElem> {
    kappa.eval(z)
}

/// Radius r = p^(-a/b) with 0 < a/b <= 1, kept in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RadiusParam {
    a: u64,
    b: u64,
}

impl RadiusParam {
    pub fn new(a: u64, b: u64) -> Result<Self> {
        if a == 0 || b == 0 || a > b {
            return Err(HaloError::ConfigInvalid(format!(
                "radius p^(-{a}/{b}) must satisfy 0 < a/b <= 1"
            )));
        }
        let g = a.gcd(&b);
        Ok(RadiusParam { a: a / g, b: b / g })
    }

    /// r = 1/p.
    pub fn inverse_p() -> Self {
        RadiusParam { a: 1, b: 1 }
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    /// -log_p r as an exact rational.
    pub fn exponent(&self) -> Ratio<i64> {
        Ratio::new(self.a as i64, self.b as i64)
    }

    /// floor(alpha * a / b): the ON rescaling exponent of index alpha.
    pub fn n(&self, alpha: usize) -> i64 {
        ((alpha as u128 * self.a as u128) / self.b as u128) as i64
    }

    /// r^(1/p^m).
    pub fn root(&self, p: u64, m: u32) -> Self {
        let b = self.b * p.pow(m);
        let g = self.a.gcd(&b);
        RadiusParam { a: self.a / g, b: b / g }
    }

    /// r >= other as real numbers.
    pub fn is_at_least(&self, other: &RadiusParam) -> bool {
        (self.a as u128) * (other.b as u128) <= (other.a as u128) * (self.b as u128)
    }
}

impl fmt::Display for RadiusParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b == 1 {
            write!(f, "p^-{}", self.a)
        } else {
            write!(f, "p^-{}/{}", self.a, self.b)
        }
    }
}

/// Smallest r in [1/p, 1) with |kappa(1+p) - 1| <= r.
pub fn r_kappa(kappa: &WeightCharacter) -> Result<RadiusParam> {
    let cfg = kappa.cfg();
    let z = PadicScalar::from_int(cfg.p(), 1 + cfg.p() as i64);
    let e = kappa.eval(&z)?.sub(&BoundarySeriesElem::one(cfg, kappa.ring_tag()))?;
    let v = e.gauss_valuation();
    let v = match (v.value, v.certified) {
        (None, _) => 1,
        (Some(v), true) => v.min(1),
        (Some(v), false) if v >= 1 => 1,
        (Some(_), false) => {
            return Err(HaloError::PrecisionLoss(format!("val(kappa(1+p) - 1) is uncertified for {kappa}")))
        }
    };
    if v < 1 {
        return Err(HaloError::InvalidSpec(format!("{kappa} is not adapted: |kappa(1+p) - 1| = 1")));
    }
    RadiusParam::new(v as u64, 1)
}

/// X-coordinate (1+p)^k - 1 of the integer weight k.
pub fn classical_point(cfg: &PrimeConfig, k: i64) -> WeightPoint {
    let p = cfg.p();
    let gen = PadicScalar::from_int(p, BigInt::from(1 + p));
    let pow = if k >= 0 {
        gen.pow(k as u64)
    } else {
        gen.inv(cfg.p_precision()).expect("1+p is a unit").pow(k.unsigned_abs())
    };
    let x = pow.sub(&PadicScalar::one(p));
    WeightPoint::Classical { x, k: Some(k) }
}
