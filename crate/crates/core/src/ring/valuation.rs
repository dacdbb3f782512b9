use std::fmt;

/// Valuation of an element together with whether the tracked precision
/// actually pins it down. `value == None` is the exact zero (+infinity).
/// When `certified` is false, `value` is only a lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ValuationResult {
    pub value: Option<i64>,
    pub certified: bool,
}

impl ValuationResult {
    pub fn infinite() -> Self {
        ValuationResult { value: None, certified: true }
    }

    pub fn exact(v: i64) -> Self {
        ValuationResult { value: Some(v), certified: true }
    }

    pub fn at_least(v: i64) -> Self {
        ValuationResult { value: Some(v), certified: false }
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_none()
    }

    /// Lower bound usable in inequalities; `None` means +infinity.
    pub fn lower_bound(&self) -> Option<i64> {
        self.value
    }

    /// The certified finite value, if there is one.
    pub fn certified_value(&self) -> Option<i64> {
        if self.certified {
            self.value
        } else {
            None
        }
    }

    /// True when the valuation is provably at least `bound`.
    pub fn proves_at_least(&self, bound: i64) -> bool {
        match self.value {
            None => true,
            Some(v) => v >= bound,
        }
    }

    pub fn shifted(&self, by: i64) -> Self {
        ValuationResult { value: self.value.map(|v| v + by), certified: self.certified }
    }
}

impl fmt::Display for ValuationResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.value, self.certified) {
            (None, _) => write!(f, "inf"),
            (Some(v), true) => write!(f, "{v}"),
            (Some(v), false) => write!(f, ">={v}"),
        }
    }
}
