use crate::error::{HaloError, Result};
use crate::ring::BoundarySeriesElem;

fn zero_like(e: &BoundarySeriesElem) -> BoundarySeriesElem {
    BoundarySeriesElem::zero(e.cfg(), e.tag())
}

/// Product of two coefficient lists, cut to `len` terms.
pub fn poly_mul_trunc(a: &[BoundarySeriesElem], b: &[BoundarySeriesElem], len: usize) -> Result<Vec<BoundarySeriesElem>> {
    let z = zero_like(a.first().or(b.first()).ok_or_else(|| HaloError::InvalidSpec("empty polynomial".into()))?);
    let mut out = vec![z; len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_exact_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            if y.is_exact_zero() {
                continue;
            }
            out[i + j] = out[i + j].add(&x.mul(y)?)?;
        }
    }
    Ok(out)
}

/// 1/a mod T^len for a with a(0) = 1; uses no division.
pub fn series_inverse(a: &[BoundarySeriesElem], len: usize) -> Result<Vec<BoundarySeriesElem>> {
    let one = BoundarySeriesElem::one(a[0].cfg(), a[0].tag());
    if !a[0].sub(&one)?.is_exact_zero() {
        return Err(HaloError::NonUnit("series inverse needs constant term 1".into()));
    }
    let mut g = Vec::with_capacity(len);
    g.push(one);
    for n in 1..len {
        let mut acc = zero_like(&a[0]);
        for i in 1..=n.min(a.len() - 1) {
            if !a[i].is_exact_zero() && !g[n - i].is_exact_zero() {
                acc = acc.add(&a[i].mul(&g[n - i])?)?;
            }
        }
        g.push(acc.neg());
    }
    Ok(g)
}

/// a / b mod T^len for b(0) = 1.
pub fn series_div(a: &[BoundarySeriesElem], b: &[BoundarySeriesElem], len: usize) -> Result<Vec<BoundarySeriesElem>> {
    poly_mul_trunc(a, &series_inverse(b, len)?, len)
}

/// Quotient of long division from the top degree, a = b q + r with deg r < deg b.
pub(crate) fn euclid_quotient(a: &[BoundarySeriesElem], b: &[BoundarySeriesElem]) -> Result<Vec<BoundarySeriesElem>> {
    let d = b.len() - 1;
    if a.len() <= d {
        return Ok(vec![zero_like(&a[0])]);
    }
    let lead_inv = b[d].invert_unit()?;
    let mut r = a.to_vec();
    let mut q = vec![zero_like(&a[0]); a.len() - d];
    for i in (d..a.len()).rev() {
        let c = r[i].mul(&lead_inv)?;
        for j in 0..=d {
            r[i - d + j] = r[i - d + j].sub(&c.mul(&b[j])?)?;
        }
        q[i - d] = c;
    }
    Ok(q)
}
