use std::fmt;

use super::scalar::PadicScalar;

/// A point of weight space at which series coefficients can be evaluated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightPoint {
    /// Substitution X -> x with x in pZp. `k` records the integer weight the
    /// point came from, when it came from one.
    Classical { x: PadicScalar, k: Option<i64> },
    /// Reduction of coefficients mod p into F_p((X)).
    ModP,
}

impl WeightPoint {
    pub fn classical(x: PadicScalar) -> Self {
        WeightPoint::Classical { x, k: None }
    }

    /// True for classical points on the boundary annulus, i.e. v_p(x) = 1.
    pub fn in_annulus(&self) -> bool {
        match self {
            WeightPoint::Classical { x, .. } => x.valuation().certified_value() == Some(1),
            WeightPoint::ModP => false,
        }
    }

    /// Short identifier used for file names and report rows.
    pub fn label(&self) -> String {
        match self {
            WeightPoint::ModP => "modp".to_string(),
            WeightPoint::Classical { k: Some(k), .. } => format!("k{k}"),
            WeightPoint::Classical { x, k: None } => match x.to_integer() {
                Some(n) => format!("x{n}"),
                None => "x".to_string(),
            },
        }
    }
}

impl fmt::Display for WeightPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightPoint::ModP => write!(f, "mod-p point"),
            WeightPoint::Classical { x, k: Some(k) } => write!(f, "classical weight {k} (x = {x})"),
            WeightPoint::Classical { x, k: None } => write!(f, "classical point x = {x}"),
        }
    }
}
