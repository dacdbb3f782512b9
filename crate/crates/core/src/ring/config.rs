use std::cell::RefCell;
use std::collections::HashMap;

use num_bigint::BigInt;

use crate::error::{HaloError, Result};

/// Prime, p-adic working precision and the X-exponent window shared by all
/// elements of a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeConfig {
    p: u64,
    p_precision: i64,
    n_min: i64,
    n_max: i64,
}

impl PrimeConfig {
    pub fn new(p: u64, p_precision: i64, x_window: (i64, i64)) -> Result<Self> {
        if p == 2 || !is_prime(p) {
            return Err(HaloError::InvalidPrime(p));
        }
        if p_precision < 1 {
            return Err(HaloError::ConfigInvalid(format!(
                "pPrecision must be positive, got {p_precision}"
            )));
        }
        let (n_min, n_max) = x_window;
        if n_min > 0 || n_max < 0 {
            return Err(HaloError::ConfigInvalid(format!(
                "xWindow must satisfy n_min <= 0 <= n_max, got ({n_min}, {n_max})"
            )));
        }
        Ok(PrimeConfig { p, p_precision, n_min, n_max })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn p_precision(&self) -> i64 {
        self.p_precision
    }

    pub fn x_window(&self) -> (i64, i64) {
        (self.n_min, self.n_max)
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    /// Largest Gauss precision a windowed series can carry: the X^0 digit count
    /// is capped by pPrecision and the tail above the window is unknown.
    pub fn series_cap(&self) -> i64 {
        self.p_precision.min(self.n_max + 1)
    }

    pub fn with_precision(&self, p_precision: i64) -> Result<Self> {
        PrimeConfig::new(self.p, p_precision, (self.n_min, self.n_max))
    }

    pub fn with_window(&self, x_window: (i64, i64)) -> Result<Self> {
        PrimeConfig::new(self.p, self.p_precision, x_window)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

thread_local! {
    static POWERS: RefCell<HashMap<u64, Vec<BigInt>>> = RefCell::new(HashMap::new());
}

/// Runs `f` with a table holding p^0 ..= p^k.
pub(crate) fn with_powers<R>(p: u64, k: usize, f: impl FnOnce(&[BigInt]) -> R) -> R {
    POWERS.with(|cell| {
        let mut map = cell.borrow_mut();
        let table = map.entry(p).or_insert_with(|| vec![BigInt::from(1u32)]);
        while table.len() <= k {
            let next = table.last().unwrap() * p;
            table.push(next);
        }
        f(&table[..=k])
    })
}

pub(crate) fn ppow(p: u64, k: i64) -> BigInt {
    assert!(k >= 0, "negative power of p");
    with_powers(p, k as usize, |t| t[k as usize].clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_two_and_composites() {
        assert_eq!(PrimeConfig::new(2, 5, (0, 4)), Err(HaloError::InvalidPrime(2)));
        assert!(matches!(PrimeConfig::new(9, 5, (0, 4)), Err(HaloError::InvalidPrime(9))));
        assert!(PrimeConfig::new(3, 0, (0, 4)).is_err());
        assert!(PrimeConfig::new(3, 4, (1, 4)).is_err());
        assert!(PrimeConfig::new(7, 4, (-3, 4)).is_ok());
    }

    #[test]
    fn power_table() {
        assert_eq!(ppow(5, 3), BigInt::from(125));
        assert_eq!(ppow(3, 0), BigInt::from(1));
    }
}
