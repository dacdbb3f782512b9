use crate::error::{HaloError, Result};

/// lambda(0) = 0, lambda(i+1) = lambda(i) + floor(i/t) - floor(i/pt).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaSequence {
    pub t: usize,
    pub p: u64,
    pub values: Vec<i64>,
}

impl LambdaSequence {
    pub fn value(&self, n: usize) -> i64 {
        self.values[n]
    }
}

pub fn lambda_sequence(t: usize, n_max: usize, p: u64) -> Result<LambdaSequence> {
    if t == 0 {
        return Err(HaloError::InvalidSpec("block count must be positive".into()));
    }
    let pt = p as usize * t;
    let mut values = Vec::with_capacity(n_max + 1);
    values.push(0i64);
    for i in 0..n_max {
        values.push(values[i] + (i / t) as i64 - (i / pt) as i64);
    }
    Ok(LambdaSequence { t, p, values })
}
