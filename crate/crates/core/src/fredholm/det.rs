use crate::distributions::{DenseOperatorMatrix, RowCertificate};
use crate::error::{HaloError, Result};
use crate::ring::{BoundarySeriesElem, RingTag, ValuationResult, WeightPoint};

/// What is known about the coefficients past the stored ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    Unknown,
    /// A polynomial: every later coefficient is zero.
    Zero,
    /// val(c_n) >= sum of the n smallest row bounds, for every n.
    Bounded(RowCertificate),
}

/// c_0 = 1, c_1, ..., c_nMax. Each coefficient carries its own certified precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntireSeriesTrunc {
    coeffs: Vec<BoundarySeriesElem>,
    tail: Tail,
    truncation: Option<usize>,
}

impl EntireSeriesTrunc {
    pub fn new(coeffs: Vec<BoundarySeriesElem>, tail: Tail) -> Result<Self> {
        let c0 = coeffs.first().ok_or_else(|| HaloError::InvalidSpec("empty series".into()))?;
        let one = BoundarySeriesElem::one(c0.cfg(), c0.tag());
        if !c0.sub(&one)?.is_exact_zero() {
            return Err(HaloError::InvalidSpec("a Fredholm series has constant term 1".into()));
        }
        if let Some(e) = coeffs.iter().find(|e| e.tag() != c0.tag()) {
            return Err(HaloError::RingMismatch(c0.tag(), e.tag()));
        }
        Ok(EntireSeriesTrunc { coeffs, tail, truncation: None })
    }

    pub fn coeffs(&self) -> &[BoundarySeriesElem] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &BoundarySeriesElem {
        &self.coeffs[n]
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn tag(&self) -> RingTag {
        self.coeffs[0].tag()
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    /// Size of the truncated matrix the series came from.
    pub fn truncation(&self) -> Option<usize> {
        self.truncation
    }

    /// Precision P_n of c_n (None when exact).
    pub fn precision(&self, n: usize) -> Option<i64> {
        self.coeffs[n].prec()
    }

    pub fn valuation(&self, n: usize) -> ValuationResult {
        self.coeffs[n].gauss_valuation()
    }

    pub fn specialize(&self, pt: &WeightPoint) -> Result<Self> {
        let coeffs = self.coeffs.iter().map(|c| c.specialize(pt)).collect::<Result<Vec<_>>>()?;
        Ok(EntireSeriesTrunc { coeffs, ..self.clone() })
    }

    pub fn map_coeffs(&self, f: impl Fn(&BoundarySeriesElem) -> Result<BoundarySeriesElem>) -> Result<Self> {
        let coeffs = self.coeffs.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(EntireSeriesTrunc { coeffs, ..self.clone() })
    }

    /// Keep c_0..c_n.
    pub fn truncated(&self, n: usize) -> Self {
        let mut out = self.clone();
        out.coeffs.truncate(n + 1);
        if out.tail == Tail::Zero && n < self.n_max() {
            out.tail = Tail::Unknown;
        }
        out
    }
}

/// First `len` coefficients of det(1 - T A), division free (Berkowitz).
pub fn charpoly_truncated(a: &DenseOperatorMatrix, len: usize) -> Result<Vec<BoundarySeriesElem>> {
    let n = a.dim();
    let zero = BoundarySeriesElem::zero(a.cfg(), a.tag());
    let one = BoundarySeriesElem::one(a.cfg(), a.tag());
    let mul_acc = |acc: &mut BoundarySeriesElem, x: &BoundarySeriesElem, y: &BoundarySeriesElem| -> Result<()> {
        if !x.is_exact_zero() && !y.is_exact_zero() {
            *acc = acc.add(&x.mul(y)?)?;
        }
        Ok(())
    };
    let mut poly = vec![one.clone()];
    for r in 0..n {
        let want = (r + 2).min(len);
        let mut t = vec![one.clone(), a.entry(r, r).neg()];
        let mut w: Vec<BoundarySeriesElem> = (0..r).map(|i| a.entry(i, r).clone()).collect();
        while t.len() < want {
            let mut acc = zero.clone();
            for (i, wi) in w.iter().enumerate() {
                mul_acc(&mut acc, a.entry(r, i), wi)?;
            }
            t.push(acc.neg());
            if t.len() < want {
                let mut next = Vec::with_capacity(r);
                for i in 0..r {
                    let mut acc = zero.clone();
                    for (l, wl) in w.iter().enumerate() {
                        mul_acc(&mut acc, a.entry(i, l), wl)?;
                    }
                    next.push(acc);
                }
                w = next;
            }
        }
        t.truncate(want);
        let mut q = Vec::with_capacity(want);
        for i in 0..want {
            let mut acc = zero.clone();
            for j in 0..=i.min(poly.len() - 1) {
                mul_acc(&mut acc, &t[i - j], &poly[j])?;
            }
            q.push(acc);
        }
        poly = q;
    }
    poly.resize(len, zero);
    Ok(poly)
}

fn arithmetic_cap(a: &DenseOperatorMatrix) -> i64 {
    let cfg = a.cfg();
    match a.tag() {
        RingTag::Qp => cfg.p_precision(),
        RingTag::FpLaurent => cfg.n_max() + 1,
        _ => cfg.series_cap(),
    }
}

/// det(1 - T U) up to T^nMax. With rows from `k` on dropped, c_n is certified
/// modulo valuation lambda_rho(n-1) + rho(k): every principal n-minor meeting a
/// dropped row has n - 1 other rows, each worth at least its own bound.
/// `truncation = None` picks the smallest k with rho(k) >= `target`, so every
/// coefficient is known to at least `target`.
pub fn fredholm_det(
    u: &DenseOperatorMatrix,
    n_max: usize,
    target: i64,
    truncation: Option<usize>,
) -> Result<EntireSeriesTrunc> {
    let cert = *u
        .certificate()
        .ok_or_else(|| HaloError::UncertifiedInput("operator carries no row certificate".into()))?;
    let t = u.blocks();
    if cert.blocks != t {
        return Err(HaloError::UncertifiedInput("certificate and matrix disagree on the block count".into()));
    }
    let cap = arithmetic_cap(u);
    if target > cap {
        return Err(HaloError::PrecisionTargetUnreachable(format!(
            "target {target} exceeds the arithmetic precision {cap}"
        )));
    }
    let k = match truncation {
        Some(k) => {
            if k == 0 || k % t != 0 || k > u.dim() {
                return Err(HaloError::TruncationMismatch(format!("cannot truncate {} rows to {k}", u.dim())));
            }
            k
        }
        None => {
            let mut k = t;
            while cert.bound(k) < target {
                k += t;
                if k > u.dim() {
                    return Err(HaloError::PrecisionTargetUnreachable(format!(
                        "target {target} needs more than the {} stored rows",
                        u.dim()
                    )));
                }
            }
            k
        }
    };
    let a = u.leading(k)?;
    let raw = charpoly_truncated(&a, n_max + 1)?;
    let spill = cert.bound(k);
    let mut lam = 0;
    let mut coeffs = Vec::with_capacity(n_max + 1);
    for (n, c) in raw.into_iter().enumerate() {
        if n == 0 {
            coeffs.push(c);
            continue;
        }
        coeffs.push(c.with_prec(lam + spill));
        lam += cert.bound(n - 1);
    }
    Ok(EntireSeriesTrunc { coeffs, tail: Tail::Bounded(cert), truncation: Some(k) })
}
