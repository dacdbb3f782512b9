//! Weight-kappa action of the monoid { (a b; c d) : a unit, p | c, ad - bc != 0 }
//! on functions and distributions on pZ_p, and block U_p-type operators.
//!
//! Functions: (f.g)(x) = kappa(a + bx) f((c + dx)/(a + bx)). The matrix of g has
//! A[alpha][beta] = beta-th Mahler coefficient of E_alpha.g, so that column beta
//! is the image of T^beta under the dual action and A(g1 g2) = A(g1) A(g2).

use std::fmt;

use crate::distributions::{mahler_coefficients, DenseOperatorMatrix, DomainScale, RowCertificate};
use crate::error::{HaloError, Result};
use crate::ring::{binomials, BoundarySeriesElem, PadicScalar, RingTag};
use crate::weights::{r_kappa, RadiusParam, WeightCharacter};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MonoidElem {
    a: PadicScalar,
    b: PadicScalar,
    c: PadicScalar,
    d: PadicScalar,
}

impl MonoidElem {
    pub fn new(a: PadicScalar, b: PadicScalar, c: PadicScalar, d: PadicScalar) -> Result<Self> {
        let p = a.p();
        if [&b, &c, &d].iter().any(|x| x.p() != p) {
            return Err(HaloError::InvalidSpec("matrix entries over different primes".into()));
        }
        if a.valuation().certified_value() != Some(0) {
            return Err(HaloError::InvalidSpec(format!("a = {a} is not a p-adic unit")));
        }
        if !b.valuation().proves_at_least(0) || !d.valuation().proves_at_least(0) {
            return Err(HaloError::InvalidSpec("b and d must be p-adic integers".into()));
        }
        if !c.valuation().proves_at_least(1) {
            return Err(HaloError::InvalidSpec(format!("c = {c} is not divisible by p")));
        }
        let g = MonoidElem { a, b, c, d };
        if g.det().is_known_zero() {
            return Err(HaloError::InvalidSpec("determinant is not certified nonzero".into()));
        }
        Ok(g)
    }

    pub fn from_ints(p: u64, a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let s = |v| PadicScalar::from_int(p, v);
        Self::new(s(a), s(b), s(c), s(d))
    }

    pub fn identity(p: u64) -> Self {
        Self::from_ints(p, 1, 0, 0, 1).expect("identity is in the monoid")
    }

    pub fn p(&self) -> u64 {
        self.a.p()
    }

    pub fn entries(&self) -> [&PadicScalar; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn det(&self) -> PadicScalar {
        self.a.mul(&self.d).sub(&self.b.mul(&self.c))
    }

    /// m with v_p(det) = m.
    pub fn t_factor_exponent(&self) -> u32 {
        self.det().valuation().lower_bound().unwrap_or(0).max(0) as u32
    }

    pub fn is_iwahori(&self) -> bool {
        self.d.valuation().certified_value() == Some(0)
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        Self::new(
            self.a.mul(&o.a).add(&self.b.mul(&o.c)),
            self.a.mul(&o.b).add(&self.b.mul(&o.d)),
            self.c.mul(&o.a).add(&self.d.mul(&o.c)),
            self.c.mul(&o.b).add(&self.d.mul(&o.d)),
        )
    }

    /// det * g^-1 = (d -b; -c a); in the monoid exactly when g is Iwahori.
    pub fn adjugate(&self) -> Result<Self> {
        Self::new(self.d.clone(), self.b.neg(), self.c.neg(), self.a.clone())
    }

    /// (a + bx, (c + dx)/(a + bx)) with the second coordinate checked to lie in pZ_p.
    fn move_point(&self, x: &PadicScalar, rel: i64) -> Result<(PadicScalar, PadicScalar)> {
        let den = self.a.add(&self.b.mul(x));
        let num = self.c.add(&self.d.mul(x));
        let y = num.div(&den, rel)?;
        Ok((den, y))
    }
}

impl fmt::Display for MonoidElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {}; {} {})", self.a, self.b, self.c, self.d)
    }
}

/// kappa(a + bx) f((c + dx)/(a + bx)) at each x.
pub fn act_on_samples(
    g: &MonoidElem,
    kappa: &WeightCharacter,
    xs: &[PadicScalar],
    f: impl Fn(&PadicScalar) -> Result<BoundarySeriesElem>,
) -> Result<Vec<BoundarySeriesElem>> {
    let rel = kappa.cfg().p_precision() + 1;
    xs.iter()
        .enumerate()
        .map(|(i, x)| {
            if !x.valuation().proves_at_least(1) {
                return Err(HaloError::PointOutsideDomain(format!("{x} is not in pZp")));
            }
            let (den, y) = g.move_point(x, rel)?;
            if !y.valuation().proves_at_least(1) {
                return Err(HaloError::DomainEscape(i));
            }
            kappa.eval(&den)?.mul(&f(&y)?)
        })
        .collect()
}

/// Matrix of g on D_kappa = D(pZ_p) truncated at degree m, in the T^alpha basis,
/// computed from samples at x = 0, p, ..., mp. Entries are checked against the
/// row bound for r^(1/p^e), e = v_p(det g).
pub fn gamma_matrix(
    g: &MonoidElem,
    kappa: &WeightCharacter,
    r: RadiusParam,
    m: usize,
    precision: i64,
) -> Result<DenseOperatorMatrix> {
    let a = gamma_matrix_unchecked(g, kappa, r, m, precision)?;
    let cert = RowCertificate::new(1, r, g.p(), g.t_factor_exponent());
    let a = a.with_certificate(cert);
    check(&a)?;
    Ok(a)
}

fn check(a: &DenseOperatorMatrix) -> Result<()> {
    match a.verify_certificate() {
        Err(HaloError::UncertifiedInput(s)) => Err(HaloError::PrecisionExhausted(s)),
        other => other,
    }
}

fn gamma_matrix_unchecked(
    g: &MonoidElem,
    kappa: &WeightCharacter,
    r: RadiusParam,
    m: usize,
    precision: i64,
) -> Result<DenseOperatorMatrix> {
    let p = g.p();
    if kappa.cfg().p() != p {
        return Err(HaloError::InvalidSpec("matrix and character over different primes".into()));
    }
    if !r.is_at_least(&r_kappa(kappa)?) {
        return Err(HaloError::RadiusOrder(format!("r = {r} is below r_kappa for {kappa}")));
    }
    let cfg = kappa.cfg().with_precision(precision)?;
    let kappa = kappa.with_config(&cfg);
    let tag = kappa.ring_tag();
    let rel = precision + 2;
    let pp = PadicScalar::from_int(p, p);
    // samples[alpha][k] = kappa(a + b kp) C(y_k / p, alpha)
    let mut samples: Vec<Vec<BoundarySeriesElem>> = vec![Vec::with_capacity(m + 1); m + 1];
    for k in 0..=m {
        let x = PadicScalar::from_int(p, (k as u64 * p) as i64);
        let (den, y) = g.move_point(&x, rel)?;
        if !y.valuation().proves_at_least(1) {
            return Err(HaloError::DomainEscape(k));
        }
        let u = y.div(&pp, rel)?;
        let w = kappa.eval(&den)?;
        for (alpha, c) in binomials(&u, m)?.iter().enumerate() {
            let e = if tag == RingTag::Qp {
                BoundarySeriesElem::from_scalar(&cfg, tag, &c.mul(w.as_scalar().expect("Qp value")))?
            } else {
                w.mul_scalar(c)?
            };
            samples[alpha].push(e);
        }
    }
    let rows = samples
        .iter()
        .map(|s| mahler_coefficients(s, DomainScale::PZp).map(|f| f.coeffs))
        .collect::<Result<Vec<_>>>()?;
    DenseOperatorMatrix::from_rows(rows, r, r, 1)
}

/// Block operator data: for each source block, the (target block, g) summands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpOperatorSpec {
    pub nblocks: usize,
    pub summands: Vec<Vec<(usize, MonoidElem)>>,
    pub kappa: WeightCharacter,
    pub radius: RadiusParam,
    pub truncation: usize,
}

impl UpOperatorSpec {
    /// Single block, U_p = sum over a = 0..p-1 of (1 a; 0 p).
    pub fn toy_up(kappa: &WeightCharacter, radius: RadiusParam, truncation: usize) -> Self {
        let p = kappa.cfg().p();
        let summands = vec![(0..p as i64)
            .map(|a| (0, MonoidElem::from_ints(p, 1, a, 0, p as i64).expect("valid coset representative")))
            .collect()];
        UpOperatorSpec { nblocks: 1, summands, kappa: *kappa, radius, truncation }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nblocks == 0 || self.summands.len() != self.nblocks {
            return Err(HaloError::InvalidSpec(format!(
                "{} summand lists for {} blocks",
                self.summands.len(),
                self.nblocks
            )));
        }
        for list in &self.summands {
            for (j, g) in list {
                if *j >= self.nblocks {
                    return Err(HaloError::BlockIndexOutOfRange(*j, self.nblocks));
                }
                if g.t_factor_exponent() < 1 {
                    return Err(HaloError::InvalidSpec(format!("{g} has unit determinant, the operator is not compact")));
                }
            }
        }
        if !self.radius.is_at_least(&r_kappa(&self.kappa)?) {
            return Err(HaloError::RadiusOrder(format!("r = {} is below r_kappa", self.radius)));
        }
        Ok(())
    }
}

/// Assembled operator of size t(M+1), index I = alpha t + block, with the row
/// certificate rho(I) = n(r, I/t) - n(r^(1/p), I/t) attached and verified.
pub fn build_u(spec: &UpOperatorSpec, precision: i64) -> Result<DenseOperatorMatrix> {
    spec.validate()?;
    let t = spec.nblocks;
    let m = spec.truncation;
    let n = t * (m + 1);
    let cfg = spec.kappa.cfg().with_precision(precision)?;
    let tag = spec.kappa.ring_tag();
    let mut rows = vec![vec![BoundarySeriesElem::zero(&cfg, tag); n]; n];
    for (i, list) in spec.summands.iter().enumerate() {
        for (j, g) in list {
            let a = gamma_matrix(g, &spec.kappa, spec.radius, m, precision)?;
            for alpha in 0..=m {
                for beta in 0..=m {
                    let e = a.entry(alpha, beta);
                    if e.is_exact_zero() {
                        continue;
                    }
                    let cell = &mut rows[alpha * t + j][beta * t + i];
                    *cell = cell.add(e)?;
                }
            }
        }
    }
    let cert = RowCertificate::new(t, spec.radius, cfg.p(), 1);
    let u = DenseOperatorMatrix::from_rows(rows, spec.radius, spec.radius, t)?.with_certificate(cert);
    check(&u)?;
    Ok(u)
}
