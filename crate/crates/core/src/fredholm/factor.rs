use num_rational::Ratio;

use super::det::{EntireSeriesTrunc, Tail};
use super::newton::{newton_polygon, newton_polygon_points, PointValue};
use super::poly::{euclid_quotient, poly_mul_trunc, series_div};
use crate::error::{HaloError, Result};
use crate::ring::{BoundarySeriesElem, RingTag};

/// F = Q S with Q a polynomial of slopes <= h and S of slopes > h.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlopeFactorization {
    pub q: Vec<BoundarySeriesElem>,
    pub s: EntireSeriesTrunc,
    pub h: Ratio<i64>,
}

impl SlopeFactorization {
    pub fn degree(&self) -> usize {
        self.q.len() - 1
    }
}

fn rounded(v: &[BoundarySeriesElem], w: i64) -> Vec<BoundarySeriesElem> {
    v.iter().map(|c| c.with_prec(w).lift()).collect()
}

fn normalize(v: Vec<BoundarySeriesElem>) -> Result<Vec<BoundarySeriesElem>> {
    let inv = v[0].invert_unit()?;
    v.iter().map(|c| c.mul(&inv)).collect()
}

fn unfail(e: HaloError) -> HaloError {
    match e {
        HaloError::UncertifiedVertexCandidate(n) => {
            HaloError::PrecisionTargetUnreachable(format!("coefficient {n} is too imprecise to certify the factorization"))
        }
        e => e,
    }
}

/// Alternate Q <- [F/S] up to degree d and S <- F div Q (long division from the
/// top) on rounded representatives until Q is stable at `precision`. The digits
/// of Q that survive are the ones `certify` can prove; S = F/Q is then tracked.
pub fn slope_factorize(f: &EntireSeriesTrunc, h: Ratio<i64>, precision: i64) -> Result<SlopeFactorization> {
    if !matches!(f.tag(), RingTag::Qp | RingTag::FpLaurent) {
        return Err(HaloError::RingMismatch(f.tag(), RingTag::Qp));
    }
    let np = newton_polygon(f).map_err(unfail)?;
    let d = np
        .break_index(h)
        .ok_or_else(|| HaloError::NoSeparatingVertex(h.to_string()))?;
    let len = f.n_max() + 1;
    let fc = f.coeffs();
    let q = if d == 0 {
        vec![fc[0].clone()]
    } else {
        let fr = rounded(fc, precision);
        let mut q = fr[..=d].to_vec();
        let mut converged = false;
        for _ in 0..64 * (precision.max(1) as usize + d) {
            let s = normalize(euclid_quotient(&fr, &q)?)?;
            let s = rounded(&s, precision);
            let next = rounded(&series_div(&fr, &s, d + 1)?, precision);
            let same = next.iter().zip(&q).all(|(a, b)| a.sub(b).map(|e| e.is_known_zero()).unwrap_or(false));
            q = next;
            if same {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(HaloError::PrecisionTargetUnreachable(format!("slope factor did not settle at precision {precision}")));
        }
        q
    };
    if d == 0 {
        let s = EntireSeriesTrunc::new(fc.to_vec(), f.tail())?;
        return Ok(SlopeFactorization { q, s, h });
    }
    let q = certify(f, &q, h, np.vertices.iter().find(|v| v.0 == d as i64).map(|v| v.1).unwrap())?;
    let qpts: Vec<_> = q.iter().enumerate().map(|(n, c)| (n as i64, PointValue::from(c.gauss_valuation()))).collect();
    let qnp = newton_polygon_points(&qpts, Tail::Zero).map_err(unfail)?;
    if qnp.vertices.last().map(|v| v.0) != Some(d as i64) || qnp.segments.iter().any(|s| s.slope > h) {
        return Err(HaloError::PrecisionTargetUnreachable("polynomial factor does not have slopes <= h".into()));
    }
    let s = series_div(fc, &q, len)?;
    let s = EntireSeriesTrunc::new(s, Tail::Unknown)?;
    let snp = newton_polygon(&s).map_err(unfail)?;
    if snp.segments.iter().any(|s| s.slope <= h) {
        return Err(HaloError::PrecisionTargetUnreachable("series factor still has slopes <= h".into()));
    }
    Ok(SlopeFactorization { q, s, h })
}

fn weighted(c: &BoundarySeriesElem, h: Ratio<i64>, i: usize) -> Option<Ratio<i64>> {
    c.gauss_valuation().lower_bound().map(|v| Ratio::from_integer(v) - h * Ratio::from_integer(i as i64))
}

fn min_opt(a: Option<Ratio<i64>>, b: Option<Ratio<i64>>) -> Option<Ratio<i64>> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

// Work in the norm |g| = min v(g_i) - h i (None = infinite). There the true
// factor Q_t is distinguished of degree d with |Q_t| = y_d - h d, y_d the height
// of F's polygon at d. Write F = A Q + R. If A is a unit (A_0 - 1 and every
// other term of positive norm) then D = Q_t - Q satisfies A D = R mod Q_t with D_0 = 0,
// and Weierstrass division gives |D| >= |R| + |Q_t|, i.e.
// v(D_i) >= |R| + |Q_t| + h i. Coefficients of F past nMax go into R.
fn certify(f: &EntireSeriesTrunc, q: &[BoundarySeriesElem], h: Ratio<i64>, y_d: Ratio<i64>) -> Result<Vec<BoundarySeriesElem>> {
    let d = q.len() - 1;
    let fc = f.coeffs();
    let len = fc.len();
    let tail_norm = match f.tail() {
        Tail::Zero => None,
        Tail::Unknown => {
            return Err(HaloError::PrecisionTargetUnreachable("cannot certify a factor of a series with unknown tail".into()))
        }
        Tail::Bounded(cert) => {
            let mut m = len;
            let mut best = Ratio::from_integer(cert.partial_sum(m)) - h * Ratio::from_integer(m as i64);
            while Ratio::from_integer(cert.bound(m)) < h {
                m += 1;
                best = best.min(Ratio::from_integer(cert.partial_sum(m)) - h * Ratio::from_integer(m as i64));
            }
            Some(best)
        }
    };
    let q_norm = y_d - h * Ratio::from_integer(d as i64);
    let a = euclid_quotient(fc, q)?;
    let aq = poly_mul_trunc(&a, q, len)?;
    let mut r_norm = tail_norm;
    for (i, (x, y)) in fc.iter().zip(&aq).enumerate() {
        r_norm = min_opt(r_norm, weighted(&x.sub(y)?, h, i));
    }
    let zero = Ratio::from_integer(0);
    let a_unit = weighted(&a[0].sub(&fc[0])?, h, 0).map_or(true, |w| w > zero)
        && a.iter().enumerate().skip(1).all(|(i, c)| weighted(c, h, i).map_or(true, |w| w > zero))
        && tail_norm.map_or(true, |t| t - q_norm > zero);
    if !a_unit {
        return Err(HaloError::PrecisionTargetUnreachable("cofactor is not a unit past slope h".into()));
    }
    Ok(q
        .iter()
        .enumerate()
        .map(|(i, c)| match r_norm {
            _ if i == 0 => c.clone(),
            None => c.clone(),
            Some(r) => c.with_prec((r + q_norm + h * Ratio::from_integer(i as i64)).ceil().to_integer()),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::PrimeConfig;

    fn cfg() -> PrimeConfig {
        PrimeConfig::new(3, 20, (-20, 20)).unwrap()
    }

    fn series(cs: &[i64]) -> EntireSeriesTrunc {
        let v = cs.iter().map(|&c| BoundarySeriesElem::from_int(&cfg(), RingTag::Qp, c)).collect();
        EntireSeriesTrunc::new(v, Tail::Zero).unwrap()
    }

    #[test]
    fn two_unit_slopes() {
        let f = series(&[1, -4, 3]);
        let r = slope_factorize(&f, Ratio::from_integer(0), 15).unwrap();
        assert_eq!(r.degree(), 1);
        assert!(r.q[1].agrees_with(&BoundarySeriesElem::from_int(&cfg(), RingTag::Qp, -1)).unwrap());
        assert!(r.s.coeff(1).agrees_with(&BoundarySeriesElem::from_int(&cfg(), RingTag::Qp, -3)).unwrap());
    }

    #[test]
    fn nothing_below_h() {
        let f = series(&[1, -3]);
        let r = slope_factorize(&f, Ratio::from_integer(0), 15).unwrap();
        assert_eq!(r.degree(), 0);
        assert_eq!(r.s.coeffs(), f.coeffs());
    }

    #[test]
    fn half_separates_zero_and_one() {
        let f = series(&[1, -1, -3]);
        let r = slope_factorize(&f, Ratio::new(1, 2), 15).unwrap();
        assert_eq!(r.degree(), 1);
        let u = r.q[1].neg();
        assert_eq!(u.as_scalar().unwrap().residue_mod_p(), Some(1));
        // 1 - uT divides F exactly when u^2 - u - 3 = 0
        let three = BoundarySeriesElem::from_int(&cfg(), RingTag::Qp, 3);
        assert!(u.mul(&u).unwrap().sub(&u).unwrap().sub(&three).unwrap().is_known_zero());
    }
}
