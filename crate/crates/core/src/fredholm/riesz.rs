use super::det::charpoly_truncated;
use crate::distributions::DenseOperatorMatrix;
use crate::error::{HaloError, Result};
use crate::ring::{BoundarySeriesElem, RingTag};

type Elem = BoundarySeriesElem;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RieszKernel {
    /// Column vectors spanning Ker Q*(U).
    pub basis: Vec<Vec<Elem>>,
    /// det(1 - T U) restricted to the span.
    pub char_poly: Vec<Elem>,
}

impl RieszKernel {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Gauss-Jordan with the pivot of least certified valuation, searched in the
/// first `k` columns. Returns (row, col) of each pivot; pivot rows end up scaled to 1.
fn gauss_jordan(m: &mut [Vec<Elem>], k: usize) -> Result<Vec<(usize, usize)>> {
    let rows = m.len();
    let mut used_r = vec![false; rows];
    let mut used_c = vec![false; k];
    let mut pivots = Vec::new();
    loop {
        let mut best: Option<(i64, usize, usize)> = None;
        for i in (0..rows).filter(|&i| !used_r[i]) {
            for j in (0..k).filter(|&j| !used_c[j]) {
                if let Some(v) = m[i][j].gauss_valuation().certified_value() {
                    if best.map_or(true, |b| v < b.0) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((_, i, j)) = best else { break };
        used_r[i] = true;
        used_c[j] = true;
        let inv = m[i][j].invert_unit()?;
        let pivot_row: Vec<Elem> = m[i].iter().map(|e| e.mul(&inv)).collect::<Result<_>>()?;
        for (r, row) in m.iter_mut().enumerate() {
            if r == i || row[j].is_exact_zero() {
                continue;
            }
            let f = row[j].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_exact_zero() {
                    *x = x.sub(&f.mul(y)?)?;
                }
            }
        }
        m[i] = pivot_row;
        pivots.push((i, j));
    }
    Ok(pivots)
}

/// Kernel of Q*(U) = U^d + q_1 U^(d-1) + ... + q_d over a local field, and the
/// characteristic series of U on it, compared with Q at `precision`.
pub fn riesz_kernel(u: &DenseOperatorMatrix, q: &[Elem], precision: i64) -> Result<RieszKernel> {
    if !matches!(u.tag(), RingTag::Qp | RingTag::FpLaurent) {
        return Err(HaloError::RingMismatch(u.tag(), RingTag::Qp));
    }
    let n = u.dim();
    let d = q.len() - 1;
    let cfg = *u.cfg();
    let tag = u.tag();
    let one = Elem::one(&cfg, tag);
    if d == 0 {
        return Ok(RieszKernel { basis: vec![], char_poly: vec![one] });
    }
    let r = u.source();
    let mut b = DenseOperatorMatrix::identity(&cfg, tag, n, r);
    for qi in &q[1..] {
        let shift = DenseOperatorMatrix::identity(&cfg, tag, n, r).map_entries(|e| e.mul(qi))?;
        b = b.mul(u)?.add(&shift)?;
    }
    let mut m: Vec<Vec<Elem>> = (0..n).map(|i| b.row(i).to_vec()).collect();
    let pivots = gauss_jordan(&mut m, n)?;
    let found = n - pivots.len();
    if found != d {
        return Err(HaloError::KernelDimensionMismatch { expected: d, found });
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|p| p.1).collect();
    let free: Vec<usize> = (0..n).filter(|j| !pivot_cols.contains(j)).collect();
    let zero = Elem::zero(&cfg, tag);
    let basis: Vec<Vec<Elem>> = free
        .iter()
        .map(|&f| {
            let mut v = vec![zero.clone(); n];
            v[f] = one.clone();
            for &(i, j) in &pivots {
                v[j] = m[i][f].neg();
            }
            v
        })
        .collect();
    // rows where the basis is independent, then C = V_P^-1 (U V)_P
    let mut vt: Vec<Vec<Elem>> = basis.clone();
    let rows_p: Vec<usize> = gauss_jordan(&mut vt, n)?.iter().map(|p| p.1).collect();
    if rows_p.len() != d {
        return Err(HaloError::PrecisionTargetUnreachable("kernel basis is not certified independent".into()));
    }
    let uv: Vec<Vec<Elem>> = basis.iter().map(|v| u.apply(v)).collect::<Result<_>>()?;
    let mut aug: Vec<Vec<Elem>> = rows_p
        .iter()
        .map(|&row| {
            let mut line: Vec<Elem> = basis.iter().map(|v| v[row].clone()).collect();
            line.extend(uv.iter().map(|w| w[row].clone()));
            line
        })
        .collect();
    let piv = gauss_jordan(&mut aug, d)?;
    if piv.len() != d {
        return Err(HaloError::PrecisionTargetUnreachable("restricted operator is not determined".into()));
    }
    let mut c = vec![vec![zero.clone(); d]; d];
    for &(i, j) in &piv {
        c[j] = aug[i][d..].to_vec();
    }
    let cm = DenseOperatorMatrix::from_rows(c, r, r, 1)?;
    let char_poly = charpoly_truncated(&cm, d + 1)?;
    for (k, (a, b)) in char_poly.iter().zip(q).enumerate() {
        if !a.sub(b)?.with_prec(precision).is_known_zero() {
            return Err(HaloError::PrecisionTargetUnreachable(format!(
                "characteristic series on the kernel differs from Q at degree {k}"
            )));
        }
    }
    Ok(RieszKernel { basis, char_poly })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::PrimeConfig;
    use crate::weights::RadiusParam;

    #[test]
    fn diagonal_eigenvector() {
        let cfg = PrimeConfig::new(3, 12, (-12, 12)).unwrap();
        let e = |v| Elem::from_int(&cfg, RingTag::Qp, v);
        let u = DenseOperatorMatrix::from_rows(vec![vec![e(1), e(0)], vec![e(0), e(3)]], RadiusParam::inverse_p(), RadiusParam::inverse_p(), 1)
            .unwrap();
        let k = riesz_kernel(&u, &[e(1), e(-1)], 10).unwrap();
        assert_eq!(k.dim(), 1);
        assert!(k.basis[0][1].is_known_zero());
        assert_eq!(k.char_poly, vec![e(1), e(-1)]);
        assert_eq!(riesz_kernel(&u, &[e(1)], 10).unwrap().dim(), 0);
    }
}
