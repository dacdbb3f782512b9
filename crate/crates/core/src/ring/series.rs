use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::config::{ppow, with_powers, PrimeConfig};
use super::point::WeightPoint;
use super::scalar::{vp_bigint, PadicScalar};
use super::valuation::ValuationResult;
use crate::error::{HaloError, Result};

/// Which coefficient ring an element lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RingTag {
    /// Q_p at finite precision; the uniformizer is p.
    Qp,
    /// Z_p[[X]] truncated to the window.
    LambdaEta,
    /// Laurent series over Z_p with the Gauss norm sup |a_n| p^-n; X is a unit.
    REta,
    /// F_p((X)) truncated to the window.
    FpLaurent,
}

impl RingTag {
    pub fn is_series(self) -> bool {
        !matches!(self, RingTag::Qp)
    }

    pub fn is_field(self) -> bool {
        matches!(self, RingTag::Qp | RingTag::FpLaurent)
    }
}

/// Element of one of the four coefficient rings.
///
/// Series are known modulo the ideal {val >= prec} of the Gauss valuation
/// val = min(n + v_p(a_n)), so the coefficient of X^n carries prec - n
/// p-adic digits (one F_p digit for `FpLaurent`). `prec == None` marks an
/// exact element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundarySeriesElem {
    cfg: PrimeConfig,
    tag: RingTag,
    body: Body,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Body {
    Scalar(PadicScalar),
    Series(Series),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Series {
    lo: i64,
    coeffs: Vec<BigInt>,
    prec: Option<i64>,
    // cached certified valuation; None when no digit is known to be nonzero
    val: Option<i64>,
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

/// Operations available through [`arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Mul,
    Neg,
    InvertUnit,
    ScaleByXPower(i64),
}

/// Single entry point mirroring the ring operations.
pub fn arith(
    op: ArithOp,
    f: &BoundarySeriesElem,
    g: Option<&BoundarySeriesElem>,
) -> Result<BoundarySeriesElem> {
    let missing = || HaloError::InvalidSpec("binary operation needs two operands".into());
    match op {
        ArithOp::Add => f.add(g.ok_or_else(missing)?),
        ArithOp::Mul => f.mul(g.ok_or_else(missing)?),
        ArithOp::Neg => Ok(f.neg()),
        ArithOp::InvertUnit => f.invert_unit(),
        ArithOp::ScaleByXPower(k) => f.scale_by_x_power(k),
    }
}

pub fn gauss_valuation(f: &BoundarySeriesElem) -> ValuationResult {
    f.gauss_valuation()
}

pub fn specialize(f: &BoundarySeriesElem, pt: &WeightPoint) -> Result<BoundarySeriesElem> {
    f.specialize(pt)
}

fn cap_for(cfg: &PrimeConfig, tag: RingTag) -> i64 {
    match tag {
        RingTag::FpLaurent => cfg.n_max() + 1,
        RingTag::Qp => cfg.p_precision(),
        _ => cfg.series_cap(),
    }
}

fn build_series(
    cfg: &PrimeConfig,
    tag: RingTag,
    mut lo: i64,
    mut coeffs: Vec<BigInt>,
    mut prec: Option<i64>,
) -> Result<Series> {
    let p = cfg.p();
    let n_max = cfg.n_max();
    if let Some(k) = prec {
        if k > n_max + 1 {
            prec = Some(n_max + 1);
        }
    }
    let hi = lo + coeffs.len() as i64 - 1;
    if !coeffs.is_empty() && hi > n_max {
        let cut = (n_max - lo + 1).max(0) as usize;
        if coeffs[cut.min(coeffs.len())..].iter().any(|c| !c.is_zero()) {
            prec = min_opt(prec, Some(n_max + 1));
        }
        coeffs.truncate(cut);
    }
    if let Some(k) = prec {
        let keep = (k - lo).max(0) as usize;
        coeffs.truncate(keep);
    }
    match (tag, prec) {
        (RingTag::FpLaurent, _) => {
            let pb = BigInt::from(p);
            for c in coeffs.iter_mut() {
                if c.is_negative() || *c >= pb {
                    *c = c.mod_floor(&pb);
                }
            }
        }
        (_, Some(k)) => {
            let top = (k - lo).max(0) as usize;
            with_powers(p, top, |pw| {
                for (i, c) in coeffs.iter_mut().enumerate() {
                    let m = &pw[(k - lo) as usize - i];
                    if c.is_negative() || &*c >= m {
                        *c = c.mod_floor(m);
                    }
                }
            });
        }
        _ => {}
    }
    while coeffs.last().is_some_and(|c| c.is_zero()) {
        coeffs.pop();
    }
    let lead = coeffs.iter().take_while(|c| c.is_zero()).count();
    if lead > 0 {
        coeffs.drain(..lead);
        lo += lead as i64;
    }
    if coeffs.is_empty() {
        lo = 0;
    } else {
        if tag == RingTag::LambdaEta && lo < 0 {
            return Err(HaloError::NonUnit(format!(
                "X^{lo} is not in Z_p[[X]]; X is not invertible there"
            )));
        }
        if lo < cfg.n_min() {
            return Err(HaloError::WindowOverflow { exponent: lo, n_min: cfg.n_min(), n_max });
        }
    }
    let val = if coeffs.is_empty() {
        None
    } else if tag == RingTag::FpLaurent {
        Some(lo)
    } else {
        let mut best: Option<i64> = None;
        for (i, c) in coeffs.iter().enumerate() {
            let n = lo + i as i64;
            if best.is_some_and(|b| n >= b) {
                break;
            }
            if let Some(v) = vp_bigint(p, c) {
                best = Some(best.map_or(n + v, |b| b.min(n + v)));
            }
        }
        best
    };
    Ok(Series { lo, coeffs, prec, val })
}

impl Series {
    fn vlow(&self) -> Option<i64> {
        match self.val {
            Some(v) => Some(v),
            None => self.prec,
        }
    }

    fn coeff(&self, n: i64) -> BigInt {
        let i = n - self.lo;
        if i < 0 || i >= self.coeffs.len() as i64 {
            BigInt::zero()
        } else {
            self.coeffs[i as usize].clone()
        }
    }

    fn hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }
}

impl BoundarySeriesElem {
    pub fn zero(cfg: &PrimeConfig, tag: RingTag) -> Self {
        let body = match tag {
            RingTag::Qp => Body::Scalar(PadicScalar::zero(cfg.p())),
            _ => Body::Series(Series { lo: 0, coeffs: vec![], prec: None, val: None }),
        };
        BoundarySeriesElem { cfg: *cfg, tag, body }
    }

    /// Zero known only modulo {val >= prec}.
    pub fn zero_at(cfg: &PrimeConfig, tag: RingTag, prec: i64) -> Self {
        let body = match tag {
            RingTag::Qp => Body::Scalar(PadicScalar::zero_at(cfg.p(), prec)),
            _ => Body::Series(Series { lo: 0, coeffs: vec![], prec: Some(prec.min(cfg.n_max() + 1)), val: None }),
        };
        BoundarySeriesElem { cfg: *cfg, tag, body }
    }

    pub fn one(cfg: &PrimeConfig, tag: RingTag) -> Self {
        Self::from_int(cfg, tag, 1)
    }

    pub fn from_int(cfg: &PrimeConfig, tag: RingTag, n: i64) -> Self {
        Self::from_scalar(cfg, tag, &PadicScalar::from_int(cfg.p(), n)).expect("integers lie in every ring")
    }

    /// The uniformizer-free generator X (not available in Q_p).
    pub fn x(cfg: &PrimeConfig, tag: RingTag) -> Result<Self> {
        Self::monomial(cfg, tag, BigInt::one(), 1)
    }

    /// c * X^n, exact.
    pub fn monomial(cfg: &PrimeConfig, tag: RingTag, c: BigInt, n: i64) -> Result<Self> {
        if tag == RingTag::Qp {
            if n != 0 {
                return Err(HaloError::RingMismatch(RingTag::Qp, RingTag::LambdaEta));
            }
            return Ok(Self::from_scalar(cfg, tag, &PadicScalar::from_int(cfg.p(), c))?);
        }
        Self::from_coeffs(cfg, tag, n, vec![c], None)
    }

    /// Series sum_i coeffs[i] X^(lo + i) known modulo {val >= prec}.
    pub fn from_coeffs(
        cfg: &PrimeConfig,
        tag: RingTag,
        lo: i64,
        coeffs: Vec<BigInt>,
        prec: Option<i64>,
    ) -> Result<Self> {
        if tag == RingTag::Qp {
            return Err(HaloError::RingMismatch(RingTag::Qp, RingTag::LambdaEta));
        }
        let s = build_series(cfg, tag, lo, coeffs, prec)?;
        Ok(BoundarySeriesElem { cfg: *cfg, tag, body: Body::Series(s) })
    }

    /// Embeds a p-adic scalar as a constant. Series rings need it in Z_p.
    pub fn from_scalar(cfg: &PrimeConfig, tag: RingTag, s: &PadicScalar) -> Result<Self> {
        if s.p() != cfg.p() {
            return Err(HaloError::ConfigInvalid(format!("scalar over p={} used with p={}", s.p(), cfg.p())));
        }
        match tag {
            RingTag::Qp => Ok(BoundarySeriesElem { cfg: *cfg, tag, body: Body::Scalar(s.clone()) }),
            RingTag::FpLaurent => {
                let c = s.to_integer().ok_or(HaloError::NonUnitArgument)?;
                let prec = match s.prec() {
                    Some(k) if k < 1 => Some(0),
                    _ => None,
                };
                Self::from_coeffs(cfg, tag, 0, vec![c], prec)
            }
            _ => {
                let c = s.to_integer().ok_or(HaloError::NonUnitArgument)?;
                Self::from_coeffs(cfg, tag, 0, vec![c], s.prec())
            }
        }
    }

    pub fn tag(&self) -> RingTag {
        self.tag
    }

    pub fn cfg(&self) -> &PrimeConfig {
        &self.cfg
    }

    pub fn prec(&self) -> Option<i64> {
        match &self.body {
            Body::Scalar(s) => s.prec(),
            Body::Series(s) => s.prec,
        }
    }

    pub fn as_scalar(&self) -> Option<&PadicScalar> {
        match &self.body {
            Body::Scalar(s) => Some(s),
            Body::Series(_) => None,
        }
    }

    /// Coefficient of X^n (the value itself for Q_p when n = 0).
    pub fn coeff(&self, n: i64) -> BigInt {
        match &self.body {
            Body::Scalar(s) => {
                if n == 0 {
                    s.to_integer().unwrap_or_default()
                } else {
                    BigInt::zero()
                }
            }
            Body::Series(s) => s.coeff(n),
        }
    }

    /// Lowest and highest stored X-exponents, `None` when nothing is stored.
    pub fn support(&self) -> Option<(i64, i64)> {
        match &self.body {
            Body::Series(s) if !s.coeffs.is_empty() => Some((s.lo, s.hi())),
            _ => None,
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        match &self.body {
            Body::Scalar(s) => s.is_exact_zero(),
            Body::Series(s) => s.coeffs.is_empty() && s.prec.is_none(),
        }
    }

    pub fn is_known_zero(&self) -> bool {
        match &self.body {
            Body::Scalar(s) => s.is_known_zero(),
            Body::Series(s) => s.coeffs.is_empty(),
        }
    }

    pub fn gauss_valuation(&self) -> ValuationResult {
        match &self.body {
            Body::Scalar(s) => s.valuation(),
            Body::Series(s) => match (s.val, s.prec) {
                (Some(v), _) => ValuationResult::exact(v),
                (None, None) => ValuationResult::infinite(),
                (None, Some(k)) => ValuationResult::at_least(k),
            },
        }
    }

    fn vlow(&self) -> Option<i64> {
        match &self.body {
            Body::Scalar(s) => s.val_lower(),
            Body::Series(s) => s.vlow(),
        }
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.tag != o.tag {
            return Err(HaloError::RingMismatch(self.tag, o.tag));
        }
        if self.cfg.p() != o.cfg.p() {
            return Err(HaloError::ConfigInvalid(format!(
                "operands over p={} and p={}",
                self.cfg.p(),
                o.cfg.p()
            )));
        }
        Ok(())
    }

    fn wrap(&self, s: Series) -> Self {
        BoundarySeriesElem { cfg: self.cfg, tag: self.tag, body: Body::Series(s) }
    }

    fn wrap_scalar(&self, s: PadicScalar) -> Self {
        BoundarySeriesElem { cfg: self.cfg, tag: self.tag, body: Body::Scalar(s) }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        match (&self.body, &o.body) {
            (Body::Scalar(a), Body::Scalar(b)) => Ok(self.wrap_scalar(a.add(b))),
            (Body::Series(a), Body::Series(b)) => {
                let prec = min_opt(a.prec, b.prec);
                if b.coeffs.is_empty() {
                    return Ok(self.wrap(build_series(&self.cfg, self.tag, a.lo, a.coeffs.clone(), prec)?));
                }
                if a.coeffs.is_empty() {
                    return Ok(self.wrap(build_series(&self.cfg, self.tag, b.lo, b.coeffs.clone(), prec)?));
                }
                let lo = a.lo.min(b.lo);
                let hi = a.hi().max(b.hi());
                let mut out = vec![BigInt::zero(); (hi - lo + 1) as usize];
                for (i, c) in a.coeffs.iter().enumerate() {
                    out[(a.lo - lo) as usize + i] += c;
                }
                for (i, c) in b.coeffs.iter().enumerate() {
                    out[(b.lo - lo) as usize + i] += c;
                }
                Ok(self.wrap(build_series(&self.cfg, self.tag, lo, out, prec)?))
            }
            _ => unreachable!("tag determines body"),
        }
    }

    pub fn neg(&self) -> Self {
        match &self.body {
            Body::Scalar(a) => self.wrap_scalar(a.neg()),
            Body::Series(a) => {
                let coeffs = a.coeffs.iter().map(|c| -c).collect();
                self.wrap(build_series(&self.cfg, self.tag, a.lo, coeffs, a.prec).expect("negation stays in window"))
            }
        }
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        match (&self.body, &o.body) {
            (Body::Scalar(a), Body::Scalar(b)) => Ok(self.wrap_scalar(a.mul(b))),
            (Body::Series(a), Body::Series(b)) => {
                if self.is_exact_zero() || o.is_exact_zero() {
                    return Ok(Self::zero(&self.cfg, self.tag));
                }
                let va = a.vlow().unwrap();
                let vb = b.vlow().unwrap();
                let mut prec = match (a.prec, b.prec) {
                    (None, None) => None,
                    (Some(k), None) => Some(k + vb),
                    (None, Some(k)) => Some(k + va),
                    (Some(k), Some(l)) => Some((k + vb).min(l + va)),
                };
                if a.coeffs.is_empty() || b.coeffs.is_empty() {
                    return Ok(self.wrap(build_series(&self.cfg, self.tag, 0, vec![], prec)?));
                }
                let n_max = self.cfg.n_max();
                if a.hi() + b.hi() > n_max {
                    prec = min_opt(prec, Some(n_max + 1));
                }
                let lo = a.lo + b.lo;
                let mut limit = a.hi() + b.hi();
                if let Some(k) = prec {
                    limit = limit.min(k - 1);
                }
                if limit < lo {
                    return Ok(self.wrap(build_series(&self.cfg, self.tag, 0, vec![], prec)?));
                }
                let len = (limit - lo + 1) as usize;
                let (la, lb) = (a.coeffs.len(), b.coeffs.len());
                let mut out = Vec::with_capacity(len);
                for k in 0..len {
                    let i0 = k.saturating_sub(lb - 1);
                    let i1 = k.min(la - 1);
                    let mut acc = BigInt::zero();
                    for i in i0..=i1 {
                        let (x, y) = (&a.coeffs[i], &b.coeffs[k - i]);
                        if !x.is_zero() && !y.is_zero() {
                            acc += x * y;
                        }
                    }
                    out.push(acc);
                }
                Ok(self.wrap(build_series(&self.cfg, self.tag, lo, out, prec)?))
            }
            _ => unreachable!("tag determines body"),
        }
    }

    pub fn mul_scalar(&self, s: &PadicScalar) -> Result<Self> {
        self.mul(&Self::from_scalar(&self.cfg, self.tag, s)?)
    }

    pub fn pow(&self, mut k: u64) -> Result<Self> {
        let mut base = self.clone();
        let mut acc = Self::one(&self.cfg, self.tag);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Multiplies by X^k; in Q_p the uniformizer p plays the role of X.
    pub fn scale_by_x_power(&self, k: i64) -> Result<Self> {
        match &self.body {
            Body::Scalar(s) => {
                let pk = PadicScalar::from_parts(self.cfg.p(), BigInt::one(), k, None);
                Ok(self.wrap_scalar(s.mul(&pk)))
            }
            Body::Series(s) => {
                let prec = s.prec.map(|q| q + k);
                Ok(self.wrap(build_series(&self.cfg, self.tag, s.lo + k, s.coeffs.clone(), prec)?))
            }
        }
    }

    pub fn invert_unit(&self) -> Result<Self> {
        match (&self.body, self.tag) {
            (Body::Scalar(s), _) => Ok(self.wrap_scalar(s.inv(self.cfg.p_precision())?)),
            (Body::Series(s), RingTag::LambdaEta) => self.invert_lambda(s),
            (Body::Series(s), _) => self.invert_dominant(s),
        }
    }

    fn invert_lambda(&self, s: &Series) -> Result<Self> {
        let p = self.cfg.p();
        let pb = BigInt::from(p);
        if s.coeffs.is_empty() || s.lo != 0 || s.coeffs[0].mod_floor(&pb).is_zero() {
            return Err(HaloError::NonUnit(format!("{self} has no unit constant term")));
        }
        let target = s.prec.unwrap_or_else(|| cap_for(&self.cfg, self.tag));
        let top = (target - 1).min(self.cfg.n_max());
        if top < 0 {
            return Ok(self.wrap(build_series(&self.cfg, self.tag, 0, vec![], Some(target))?));
        }
        let big = ppow(p, target);
        let inv0 = s.coeffs[0].mod_floor(&big).modinv(&big).expect("unit constant term");
        let mut g: Vec<BigInt> = Vec::with_capacity(top as usize + 1);
        g.push(inv0.clone());
        with_powers(p, target as usize, |pw| {
            for k in 1..=top as usize {
                let mut acc = BigInt::zero();
                for i in 1..=k.min(s.coeffs.len() - 1) {
                    acc += &s.coeffs[i] * &g[k - i];
                }
                let m = &pw[target as usize - k];
                g.push((-(acc * &inv0)).mod_floor(m));
            }
        });
        Ok(self.wrap(build_series(&self.cfg, self.tag, 0, g, Some(target))?))
    }

    // f = c X^m (1 + h) with val(h) >= 1: invert by the geometric series.
    fn invert_dominant(&self, s: &Series) -> Result<Self> {
        let p = self.cfg.p();
        let v = s.val.ok_or_else(|| HaloError::NonUnit(format!("{self} has no certified nonzero digit")))?;
        let mut dom = None;
        for (i, c) in s.coeffs.iter().enumerate() {
            let n = s.lo + i as i64;
            let vc = if self.tag == RingTag::FpLaurent {
                if c.is_zero() { None } else { Some(0) }
            } else {
                vp_bigint(p, c)
            };
            if let Some(w) = vc {
                if n + w == v {
                    if dom.is_some() || w != 0 {
                        return Err(HaloError::NonUnit(format!("{self} has no single dominant unit term")));
                    }
                    dom = Some((n, c.clone()));
                }
            }
        }
        let (m, c) = dom.ok_or_else(|| HaloError::NonUnit(format!("{self} has no dominant unit term")))?;
        let target = match s.prec {
            Some(k) => k - 2 * m,
            None => cap_for(&self.cfg, self.tag) - m,
        };
        let cinv_scalar = PadicScalar::from_int(p, c.clone()).inv(target + 2 * m.abs() + 2)?;
        let cinv_int = cinv_scalar.to_integer().expect("inverse of a unit is integral");
        let lead_inv = if self.tag == RingTag::FpLaurent {
            let pb = BigInt::from(p);
            Self::from_coeffs(&self.cfg, self.tag, -m, vec![cinv_int.mod_floor(&pb)], None)?
        } else {
            let rel = cinv_scalar.prec();
            Self::from_coeffs(&self.cfg, self.tag, -m, vec![cinv_int], rel.map(|r| r - m))?
        };
        let one = Self::one(&self.cfg, self.tag);
        let h = self.mul(&lead_inv)?.sub(&one)?;
        if h.is_exact_zero() {
            return Ok(lead_inv);
        }
        let vh = h.vlow().unwrap_or(target + m).max(1);
        let terms = (target + m + vh - 1) / vh;
        let neg_h = h.neg();
        let mut acc = one.clone();
        let mut term = one;
        for _ in 1..terms.max(1) {
            term = term.mul(&neg_h)?;
            acc = acc.add(&term)?;
        }
        let series_tail = terms.max(1) * vh - m;
        acc.mul(&lead_inv).map(|g| g.with_prec(target.min(series_tail)))
    }

    /// Forget everything at Gauss valuation >= k.
    pub fn with_prec(&self, k: i64) -> Self {
        match &self.body {
            Body::Scalar(s) => self.wrap_scalar(s.with_prec(k)),
            Body::Series(s) => {
                let prec = min_opt(s.prec, Some(k));
                self.wrap(build_series(&self.cfg, self.tag, s.lo, s.coeffs.clone(), prec).expect("reduction stays in window"))
            }
        }
    }

    /// Same representative, declared exact.
    pub fn lift(&self) -> Self {
        match &self.body {
            Body::Scalar(s) => self.wrap_scalar(s.lift()),
            Body::Series(s) => self.wrap(Series { prec: None, ..s.clone() }),
        }
    }

    /// Equality on the digits both operands know.
    pub fn agrees_with(&self, o: &Self) -> Result<bool> {
        Ok(self.sub(o)?.is_known_zero())
    }

    /// Reinterpret between the integral series rings (Z_p[[X]] sits inside R_eta).
    pub fn promote(&self, tag: RingTag) -> Result<Self> {
        if tag == self.tag {
            return Ok(self.clone());
        }
        match (self.tag, tag, &self.body) {
            (RingTag::LambdaEta, RingTag::REta, Body::Series(s)) | (RingTag::REta, RingTag::LambdaEta, Body::Series(s)) => {
                let out = build_series(&self.cfg, tag, s.lo, s.coeffs.clone(), s.prec)?;
                Ok(BoundarySeriesElem { cfg: self.cfg, tag, body: Body::Series(out) })
            }
            _ => Err(HaloError::RingMismatch(self.tag, tag)),
        }
    }

    /// Re-home the element in a configuration with the same prime.
    pub fn with_config(&self, cfg: &PrimeConfig) -> Result<Self> {
        if cfg.p() != self.cfg.p() {
            return Err(HaloError::ConfigInvalid("prime changed".into()));
        }
        match &self.body {
            Body::Scalar(s) => Ok(BoundarySeriesElem { cfg: *cfg, tag: self.tag, body: Body::Scalar(s.clone()) }),
            Body::Series(s) => {
                let out = build_series(cfg, self.tag, s.lo, s.coeffs.clone(), s.prec)?;
                Ok(BoundarySeriesElem { cfg: *cfg, tag: self.tag, body: Body::Series(out) })
            }
        }
    }

    /// Ring homomorphism to a point of weight space: X -> x into Q_p, or
    /// reduction mod p into F_p((X)).
    pub fn specialize(&self, pt: &WeightPoint) -> Result<Self> {
        let s = match (&self.body, self.tag) {
            (Body::Series(s), RingTag::LambdaEta | RingTag::REta) => s,
            _ => {
                return Err(HaloError::PointOutsideDomain(format!(
                    "elements of {:?} cannot be specialized",
                    self.tag
                )))
            }
        };
        match pt {
            WeightPoint::ModP => {
                let out = build_series(&self.cfg, RingTag::FpLaurent, s.lo, s.coeffs.clone(), s.prec)?;
                Ok(BoundarySeriesElem { cfg: self.cfg, tag: RingTag::FpLaurent, body: Body::Series(out) })
            }
            WeightPoint::Classical { x, .. } => self.substitute(s, x),
        }
    }

    fn substitute(&self, s: &Series, x: &PadicScalar) -> Result<Self> {
        let p = self.cfg.p();
        let vx = x.valuation();
        let exact_zero = x.is_exact_zero();
        if !exact_zero {
            match vx.certified_value() {
                None => {
                    return Err(HaloError::PointOutsideDomain(format!(
                        "x = {x} has no certified valuation below pPrecision"
                    )))
                }
                Some(v) if v < 1 => {
                    return Err(HaloError::PointOutsideDomain(format!("x = {x} is not in pZp")))
                }
                Some(v) if self.tag == RingTag::REta && v != 1 => {
                    return Err(HaloError::PointOutsideDomain(format!(
                        "x = {x} is off the annulus v_p(x) = 1"
                    )))
                }
                _ => {}
            }
        } else if self.tag == RingTag::REta {
            return Err(HaloError::PointOutsideDomain("x = 0 is not a point of the annulus".into()));
        }
        let qp = |v: PadicScalar| BoundarySeriesElem { cfg: self.cfg, tag: RingTag::Qp, body: Body::Scalar(v) };
        if s.coeffs.is_empty() {
            return Ok(qp(match s.prec {
                None => PadicScalar::zero(p),
                Some(k) => PadicScalar::zero_at(p, k),
            }));
        }
        if exact_zero {
            let c0 = s.coeff(0);
            return Ok(qp(match s.prec {
                None => PadicScalar::from_int(p, c0),
                Some(k) => PadicScalar::from_int_prec(p, c0, k),
            }));
        }
        let xi = x.to_integer().expect("x lies in pZp");
        let mut acc = BigInt::zero();
        for c in s.coeffs.iter().rev() {
            acc = acc * &xi + c;
        }
        let mut val = PadicScalar::from_int(p, acc);
        let mut prec = s.prec;
        if s.lo != 0 {
            let xl = PadicScalar::from_int(p, xi.clone());
            let shift = if s.lo > 0 {
                xl.pow(s.lo as u64)
            } else {
                let rel = self.cfg.p_precision() + 2 * (-s.lo) + 2;
                xl.inv(rel)?.pow((-s.lo) as u64)
            };
            if s.lo < 0 && prec.is_none() {
                prec = Some(self.cfg.p_precision());
            }
            val = val.mul(&shift);
        }
        if let Some(kx) = x.prec() {
            let from_point = s.vlow().unwrap_or(kx) + kx - 1;
            prec = min_opt(prec, Some(from_point));
        }
        if let Some(k) = prec {
            val = val.with_prec(k);
        }
        Ok(qp(val))
    }
}

impl fmt::Display for BoundarySeriesElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.body {
            Body::Scalar(s) => write!(f, "{s}"),
            Body::Series(s) => {
                let mut first = true;
                for (i, c) in s.coeffs.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    if !first {
                        write!(f, " + ")?;
                    }
                    first = false;
                    let n = s.lo + i as i64;
                    match n {
                        0 => write!(f, "{c}")?,
                        1 => write!(f, "{c}*X")?,
                        _ => write!(f, "{c}*X^{n}")?,
                    }
                }
                if first {
                    write!(f, "0")?;
                }
                if let Some(k) = s.prec {
                    write!(f, " + O(val>={k})")?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PrimeConfig {
        PrimeConfig::new(3, 12, (-6, 10)).unwrap()
    }

    fn poly(tag: RingTag, lo: i64, c: &[i64]) -> BoundarySeriesElem {
        BoundarySeriesElem::from_coeffs(&cfg(), tag, lo, c.iter().map(|&v| BigInt::from(v)).collect(), None).unwrap()
    }

    #[test]
    fn x_minus_x_is_exact_zero() {
        for tag in [RingTag::LambdaEta, RingTag::REta, RingTag::FpLaurent] {
            let x = BoundarySeriesElem::x(&cfg(), tag).unwrap();
            assert!(x.add(&x.neg()).unwrap().is_exact_zero());
        }
    }

    #[test]
    fn difference_of_squares() {
        let a = poly(RingTag::LambdaEta, 0, &[1, 1]);
        let b = poly(RingTag::LambdaEta, 0, &[1, -1]);
        assert_eq!(a.mul(&b).unwrap(), poly(RingTag::LambdaEta, 0, &[1, 0, -1]));
    }

    #[test]
    fn geometric_series_inverse() {
        let c = PrimeConfig::new(5, 20, (0, 8)).unwrap();
        let f = BoundarySeriesElem::from_coeffs(&c, RingTag::LambdaEta, 0, vec![1.into(), (-1).into()], None).unwrap();
        let g = f.invert_unit().unwrap();
        for n in 0..=8 {
            assert_eq!(g.coeff(n), BigInt::from(1));
        }
        assert_eq!(g.coeff(9), BigInt::from(0));
        assert!(f.mul(&g).unwrap().agrees_with(&BoundarySeriesElem::one(&c, RingTag::LambdaEta)).unwrap());
    }

    #[test]
    fn gauss_norm_on_annulus() {
        let f = poly(RingTag::REta, -1, &[3]);
        assert_eq!(f.gauss_valuation(), ValuationResult::exact(0));
        assert_eq!(poly(RingTag::REta, 1, &[1]).gauss_valuation(), ValuationResult::exact(1));
        assert!(BoundarySeriesElem::zero(&cfg(), RingTag::REta).gauss_valuation().is_infinite());
    }

    #[test]
    fn annulus_units() {
        let x = poly(RingTag::REta, 1, &[1]);
        let xi = x.invert_unit().unwrap();
        assert_eq!(xi, poly(RingTag::REta, -1, &[1]));
        // 1 + p^2/X is a unit, but its inverse needs X^-10 at this precision
        let u = poly(RingTag::REta, -1, &[9, 1]);
        assert!(matches!(u.invert_unit(), Err(HaloError::WindowOverflow { .. })));
        let wide = PrimeConfig::new(3, 12, (-12, 10)).unwrap();
        let u = u.with_config(&wide).unwrap();
        let ui = u.invert_unit().unwrap();
        assert!(u.mul(&ui).unwrap().agrees_with(&BoundarySeriesElem::one(&wide, RingTag::REta)).unwrap());
        // X + p is not a unit
        assert!(poly(RingTag::REta, 0, &[3, 1]).invert_unit().is_err());
        assert!(poly(RingTag::REta, 0, &[3]).invert_unit().is_err());
    }

    #[test]
    fn specialize_examples() {
        let c = cfg();
        let three = PadicScalar::from_int(3, 3);
        let pt = WeightPoint::classical(three);
        let x = poly(RingTag::LambdaEta, 1, &[1]);
        assert_eq!(x.specialize(&pt).unwrap().as_scalar().unwrap(), &PadicScalar::from_int(3, 3));
        let f = poly(RingTag::LambdaEta, 0, &[3, 0, 1]);
        assert_eq!(f.specialize(&pt).unwrap().as_scalar().unwrap(), &PadicScalar::from_int(3, 12));
        let g = poly(RingTag::LambdaEta, 0, &[1, 1]).specialize(&WeightPoint::ModP).unwrap();
        assert_eq!(g.tag(), RingTag::FpLaurent);
        assert_eq!(g, BoundarySeriesElem::from_coeffs(&c, RingTag::FpLaurent, 0, vec![1.into(), 1.into()], None).unwrap());
    }

    #[test]
    fn window_overflow_on_low_side() {
        let a = poly(RingTag::REta, -4, &[1]);
        assert!(matches!(a.mul(&a), Err(HaloError::WindowOverflow { .. })));
    }

    #[test]
    fn high_truncation_becomes_precision() {
        let a = poly(RingTag::LambdaEta, 6, &[1]);
        let b = a.mul(&a).unwrap();
        assert!(b.is_known_zero());
        assert_eq!(b.prec(), Some(11));
    }
}
