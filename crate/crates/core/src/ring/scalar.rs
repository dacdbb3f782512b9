use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::config::ppow;
use super::valuation::ValuationResult;
use crate::error::{HaloError, Result};

/// An element of Q_p known modulo p^prec (absolute), or exactly.
///
/// Stored as p^val * unit with p not dividing unit. A finite-precision unit is
/// reduced into [0, p^(prec - val)). Zero at finite precision keeps
/// `val == prec`; the exact zero has `prec == None`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PadicScalar {
    p: u64,
    unit: BigInt,
    val: i64,
    prec: Option<i64>,
}

pub(crate) fn vp_bigint(p: u64, n: &BigInt) -> Option<i64> {
    if n.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return Some(v);
        }
        m = q;
        v += 1;
    }
}

fn strip(p: u64, n: BigInt) -> (BigInt, i64) {
    if n.is_zero() {
        return (n, 0);
    }
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut m = n;
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return (m, v);
        }
        m = q;
        v += 1;
    }
}

fn min_prec(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

impl PadicScalar {
    fn normalized(p: u64, unit: BigInt, val: i64, prec: Option<i64>) -> Self {
        match prec {
            None => {
                if unit.is_zero() {
                    return PadicScalar { p, unit, val: 0, prec: None };
                }
                let (u, v) = strip(p, unit);
                PadicScalar { p, unit: u, val: val + v, prec: None }
            }
            Some(k) => {
                if val >= k || unit.is_zero() {
                    return PadicScalar { p, unit: BigInt::zero(), val: k, prec: Some(k) };
                }
                let reduced = unit.mod_floor(&ppow(p, k - val));
                if reduced.is_zero() {
                    return PadicScalar { p, unit: reduced, val: k, prec: Some(k) };
                }
                let (u, v) = strip(p, reduced);
                PadicScalar { p, unit: u, val: val + v, prec: Some(k) }
            }
        }
    }

    /// p^val * unit known modulo p^prec (or exactly when `prec` is None).
    pub fn from_parts(p: u64, unit: BigInt, val: i64, prec: Option<i64>) -> Self {
        Self::normalized(p, unit, val, prec)
    }

    pub fn from_int(p: u64, n: impl Into<BigInt>) -> Self {
        Self::normalized(p, n.into(), 0, None)
    }

    pub fn from_int_prec(p: u64, n: impl Into<BigInt>, prec: i64) -> Self {
        Self::normalized(p, n.into(), 0, Some(prec))
    }

    pub fn zero(p: u64) -> Self {
        Self::from_int(p, 0)
    }

    pub fn one(p: u64) -> Self {
        Self::from_int(p, 1)
    }

    pub fn zero_at(p: u64, prec: i64) -> Self {
        Self::normalized(p, BigInt::zero(), prec, Some(prec))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Absolute precision; `None` for exact values.
    pub fn prec(&self) -> Option<i64> {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.prec.is_none() && self.unit.is_zero()
    }

    /// Zero as far as the tracked digits can tell (includes the exact zero).
    pub fn is_known_zero(&self) -> bool {
        self.unit.is_zero()
    }

    pub fn valuation(&self) -> ValuationResult {
        if self.unit.is_zero() {
            match self.prec {
                None => ValuationResult::infinite(),
                Some(k) => ValuationResult::at_least(k),
            }
        } else {
            ValuationResult::exact(self.val)
        }
    }

    /// Lower bound on the valuation, `None` for the exact zero.
    pub fn val_lower(&self) -> Option<i64> {
        self.valuation().value
    }

    pub fn unit_part(&self) -> &BigInt {
        &self.unit
    }

    pub fn is_unit(&self) -> bool {
        !self.unit.is_zero() && self.val == 0
    }

    /// Integer representative, available when the value lies in Z_p.
    pub fn to_integer(&self) -> Option<BigInt> {
        if self.unit.is_zero() {
            return Some(BigInt::zero());
        }
        if self.val < 0 {
            return None;
        }
        Some(&self.unit * ppow(self.p, self.val))
    }

    /// Reduction mod p of an element of Z_p known to at least one digit.
    pub fn residue_mod_p(&self) -> Option<u64> {
        let n = self.to_integer()?;
        if let Some(k) = self.prec {
            if k < 1 {
                return None;
            }
        }
        let r = n.mod_floor(&BigInt::from(self.p));
        Some(r.try_into().unwrap())
    }

    /// Same representative, declared exact.
    pub fn lift(&self) -> Self {
        PadicScalar { p: self.p, unit: self.unit.clone(), val: if self.unit.is_zero() { 0 } else { self.val }, prec: None }
    }

    /// Forget digits at and beyond p^k.
    pub fn with_prec(&self, k: i64) -> Self {
        let prec = min_prec(self.prec, Some(k));
        Self::normalized(self.p, self.unit.clone(), self.val, prec)
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.p, o.p, "mixed primes");
        let prec = min_prec(self.prec, o.prec);
        if self.is_exact_zero() {
            return o.with_prec_opt(prec);
        }
        if o.is_exact_zero() {
            return self.with_prec_opt(prec);
        }
        let e = self.val.min(o.val);
        let a = &self.unit * ppow(self.p, self.val - e);
        let b = &o.unit * ppow(self.p, o.val - e);
        Self::normalized(self.p, a + b, e, prec)
    }

    fn with_prec_opt(&self, prec: Option<i64>) -> Self {
        match prec {
            None => self.clone(),
            Some(k) => self.with_prec(k),
        }
    }

    pub fn neg(&self) -> Self {
        Self::normalized(self.p, -&self.unit, self.val, self.prec)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.p, o.p, "mixed primes");
        if self.is_exact_zero() || o.is_exact_zero() {
            return Self::zero(self.p);
        }
        let va = self.val_lower().unwrap();
        let vb = o.val_lower().unwrap();
        let prec = match (self.prec, o.prec) {
            (None, None) => None,
            (Some(k), None) => Some(k + vb),
            (None, Some(k)) => Some(k + va),
            (Some(k), Some(l)) => Some((k + vb).min(l + va)),
        };
        Self::normalized(self.p, &self.unit * &o.unit, self.val + o.val, prec)
    }

    pub fn mul_int(&self, n: &BigInt) -> Self {
        self.mul(&Self::from_int(self.p, n.clone()))
    }

    /// Multiplicative inverse. Exact inputs are inverted to `rel` digits of
    /// relative precision.
    pub fn inv(&self, rel: i64) -> Result<Self> {
        if self.unit.is_zero() {
            return Err(HaloError::NonUnit(format!("{self} has no certified nonzero digit")));
        }
        if self.unit.is_one() && self.prec.is_none() {
            return Ok(PadicScalar { p: self.p, unit: BigInt::one(), val: -self.val, prec: None });
        }
        if (-&self.unit).is_one() && self.prec.is_none() {
            return Ok(PadicScalar { p: self.p, unit: -BigInt::one(), val: -self.val, prec: None });
        }
        let r = match self.prec {
            Some(k) => k - self.val,
            None => rel,
        };
        let m = ppow(self.p, r);
        let u = self.unit.mod_floor(&m);
        let inv = u.modinv(&m).expect("unit is prime to p");
        Ok(Self::normalized(self.p, inv, -self.val, Some(r - self.val)))
    }

    pub fn div(&self, o: &Self, rel: i64) -> Result<Self> {
        Ok(self.mul(&o.inv(rel)?))
    }

    pub fn pow(&self, mut k: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.p);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Equality of the digits both sides know.
    pub fn agrees_with(&self, o: &Self) -> bool {
        self.sub(o).is_known_zero()
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.unit.is_zero() {
            write!(f, "0")?;
        } else if self.val == 0 {
            write!(f, "{}", self.unit)?;
        } else {
            write!(f, "{}^{}*{}", self.p, self.val, self.unit)?;
        }
        if let Some(k) = self.prec {
            write!(f, " + O({}^{})", self.p, k)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_zero_versus_zero_at_precision() {
        let a = PadicScalar::from_int(5, 25);
        let b = PadicScalar::from_int_prec(5, 25, 2);
        assert_eq!(a.valuation(), ValuationResult::exact(2));
        assert_eq!(b.valuation(), ValuationResult::at_least(2));
        assert!(a.sub(&a).is_exact_zero());
        assert!(!b.sub(&b).is_exact_zero());
        assert!(b.sub(&b).is_known_zero());
    }

    #[test]
    fn inverse_round_trip() {
        let a = PadicScalar::from_int_prec(7, 3 * 49, 10);
        let ai = a.inv(10).unwrap();
        assert_eq!(ai.valuation(), ValuationResult::exact(-2));
        let one = a.mul(&ai);
        assert!(one.agrees_with(&PadicScalar::one(7)));
        assert_eq!(one.prec(), Some(8));
    }

    #[test]
    fn product_precision() {
        let a = PadicScalar::from_int_prec(3, 3, 5);
        let b = PadicScalar::from_int_prec(3, 9, 6);
        let c = a.mul(&b);
        assert_eq!(c.prec(), Some(7));
        assert_eq!(c.valuation(), ValuationResult::exact(3));
    }
}
