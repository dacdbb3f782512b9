use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::config::ppow;
use super::scalar::{vp_bigint, PadicScalar};
use crate::error::{HaloError, Result};

/// Teichmüller lift of a nonzero residue: the (p-1)-th root of unity
/// congruent to z mod p, to `n` digits.
pub fn teichmuller(p: u64, z: i64, n: i64) -> Result<PadicScalar> {
    let pb = BigInt::from(p);
    let r = BigInt::from(z).mod_floor(&pb);
    if r.is_zero() {
        return Err(HaloError::ZeroResidue);
    }
    let m = ppow(p, n);
    let mut y = r;
    // y -> y^p gains one correct digit per step
    for _ in 0..n {
        y = y.modpow(&pb, &m);
    }
    Ok(PadicScalar::from_int_prec(p, y, n))
}

/// p-adic logarithm of a 1-unit, from the alternating series. Exact inputs
/// are treated as known to `n` digits.
pub fn plog(u: &PadicScalar, n: i64) -> Result<PadicScalar> {
    let p = u.p();
    let k = u.prec().unwrap_or(n);
    let one = PadicScalar::one(p);
    let y = u.sub(&one);
    if !y.valuation().proves_at_least(1) {
        return Err(HaloError::NotOneUnit);
    }
    let yi = y.to_integer().ok_or(HaloError::NotOneUnit)?;
    if k <= 0 {
        return Ok(PadicScalar::zero_at(p, k.max(0)));
    }
    let m = ppow(p, k);
    let mut acc = BigInt::zero();
    let mut ypow = BigInt::one();
    let mut j: i64 = 1;
    loop {
        ypow *= &yi;
        // terms with j - floor(log_p j) >= k vanish mod p^k
        let lg = ilog(p, j as u64);
        if j - lg >= k {
            break;
        }
        let vj = vp_bigint(p, &BigInt::from(j)).unwrap();
        let jp = ppow(p, vj);
        let cofactor = BigInt::from(j) / &jp;
        let num = &ypow / &jp;
        let inv = cofactor.mod_floor(&m).modinv(&m).expect("cofactor prime to p");
        let term = (num.mod_floor(&m) * inv).mod_floor(&m);
        if j % 2 == 1 {
            acc += term;
        } else {
            acc -= term;
        }
        ypow = ypow.mod_floor(&(&m * ppow(p, 2 * lg + 2)));
        j += 1;
    }
    Ok(PadicScalar::from_int_prec(p, acc, k))
}

pub(crate) fn ilog(p: u64, n: u64) -> i64 {
    let mut l = 0;
    let mut q = p;
    while q <= n {
        l += 1;
        match q.checked_mul(p) {
            Some(next) => q = next,
            None => break,
        }
    }
    l
}

/// Binomial coefficients C(u, 0..=nmax) for u in Z_p. If u is known mod p^K,
/// C(u, j) is known mod p^(K - floor(log_p j)) (Vandermonde: C(h, i) has
/// valuation >= K - v_p(i) when p^K divides h).
pub fn binomials(u: &PadicScalar, nmax: usize) -> Result<Vec<PadicScalar>> {
    let p = u.p();
    let ui = u.to_integer().ok_or(HaloError::NonUnitArgument)?;
    let mut out = Vec::with_capacity(nmax + 1);
    let mut c = BigInt::one();
    out.push(PadicScalar::one(p));
    for j in 1..=nmax {
        c = c * (&ui - BigInt::from(j - 1)) / BigInt::from(j);
        out.push(match u.prec() {
            None => PadicScalar::from_int(p, c.clone()),
            Some(k) => PadicScalar::from_int_prec(p, c.clone(), k - ilog(p, j as u64)),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn teichmuller_examples() {
        assert_eq!(teichmuller(5, 1, 6).unwrap(), PadicScalar::from_int_prec(5, 1, 6));
        assert_eq!(teichmuller(5, 2, 2).unwrap(), PadicScalar::from_int_prec(5, 7, 2));
        assert_eq!(teichmuller(7, 6, 4).unwrap(), PadicScalar::from_int_prec(7, 7i64.pow(4) - 1, 4));
        assert_eq!(teichmuller(3, 3, 4), Err(HaloError::ZeroResidue));
    }

    #[test]
    fn log_of_four_mod_27() {
        let u = PadicScalar::from_int(3, 4);
        assert_eq!(plog(&u, 3).unwrap(), PadicScalar::from_int_prec(3, 21, 3));
        assert!(plog(&PadicScalar::one(3), 5).unwrap().is_known_zero());
        assert_eq!(plog(&PadicScalar::from_int(3, 2), 5), Err(HaloError::NotOneUnit));
    }

    #[test]
    fn log_has_valuation_one() {
        for p in [3u64, 5, 7, 11] {
            let v = plog(&PadicScalar::from_int(p, 1 + p as i64), 10).unwrap();
            assert_eq!(v.valuation().certified_value(), Some(1));
        }
    }

    #[test]
    fn binomial_of_integers() {
        let b = binomials(&PadicScalar::from_int(5, 7), 8).unwrap();
        let expect = [1, 7, 21, 35, 35, 21, 7, 1, 0];
        for (x, e) in b.iter().zip(expect) {
            assert!(x.agrees_with(&PadicScalar::from_int(5, e)));
        }
    }
}
