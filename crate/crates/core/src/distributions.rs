//! Truncated distribution modules on Z_p or pZ_p in the monomial basis T^alpha
//! of the Amice transform, with the orthonormal rescaling
//! e_{r,alpha} = w^(-n(r,alpha)) T^alpha and matrices of operators between them.

use std::fmt;

use num_bigint::BigInt;
use num_rational::Ratio;

use crate::error::{HaloError, Result};
use crate::ring::{binomials, BoundarySeriesElem, PadicScalar, PrimeConfig, RingTag, ValuationResult, WeightPoint};
use crate::weights::RadiusParam;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DomainScale {
    /// Functions on Z_p, Mahler basis C(x, alpha), samples at 0, 1, 2, ...
    Zp,
    /// Functions on pZ_p, basis C(x/p, alpha), samples at 0, p, 2p, ...
    PZp,
}

impl DomainScale {
    pub fn step(self, p: u64) -> u64 {
        match self {
            DomainScale::Zp => 1,
            DomainScale::PZp => p,
        }
    }
}

/// floor(alpha * log_p r / log_p |w|) with |w| = 1/p.
pub fn on_scale_exponent(r: &RadiusParam, alpha: usize) -> i64 {
    r.n(alpha)
}

/// Mahler coefficients c_0..c_M of a function on Z_p or pZ_p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MahlerFunction {
    pub coeffs: Vec<BoundarySeriesElem>,
    pub scale: DomainScale,
}

/// Finite differences of samples f(0), f(step), ..., f(M step).
pub fn mahler_coefficients(values: &[BoundarySeriesElem], scale: DomainScale) -> Result<MahlerFunction> {
    let mut diff = values.to_vec();
    let mut coeffs = Vec::with_capacity(values.len());
    while !diff.is_empty() {
        coeffs.push(diff[0].clone());
        let mut next = Vec::with_capacity(diff.len() - 1);
        for w in diff.windows(2) {
            next.push(w[1].sub(&w[0])?);
        }
        diff = next;
    }
    Ok(MahlerFunction { coeffs, scale })
}

/// A truncated distribution sum d_alpha T^alpha.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistributionVec {
    pub coeffs: Vec<BoundarySeriesElem>,
    pub radius: RadiusParam,
    pub scale: DomainScale,
}

impl DistributionVec {
    /// Coordinates in the orthonormal basis e_{r,alpha} (needs w to be a unit).
    pub fn on_coefficients(&self) -> Result<Vec<BoundarySeriesElem>> {
        self.coeffs.iter().enumerate().map(|(a, d)| d.scale_by_x_power(self.radius.n(a))).collect()
    }

    /// Convolution, i.e. product of Amice transforms, truncated to the common length.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.scale != other.scale || self.coeffs.len() != other.coeffs.len() {
            return Err(HaloError::TruncationMismatch("convolution of different truncations".into()));
        }
        let n = self.coeffs.len();
        let first = &self.coeffs[0];
        let mut out = vec![BoundarySeriesElem::zero(first.cfg(), first.tag()); n];
        for i in 0..n {
            for j in 0..n - i {
                out[i + j] = out[i + j].add(&self.coeffs[i].mul(&other.coeffs[j])?)?;
            }
        }
        Ok(DistributionVec { coeffs: out, radius: self.radius, scale: self.scale })
    }
}

/// (1+T)^u for y = step * u, truncated to degree m.
pub fn amice_of_dirac(
    cfg: &PrimeConfig,
    tag: RingTag,
    y: &PadicScalar,
    scale: DomainScale,
    m: usize,
    radius: RadiusParam,
) -> Result<DistributionVec> {
    let p = cfg.p();
    let u = match scale {
        DomainScale::Zp => y.clone(),
        DomainScale::PZp => {
            if !y.valuation().proves_at_least(1) {
                return Err(HaloError::PointOutsideDomain(format!("{y} is not in pZp")));
            }
            y.div(&PadicScalar::from_int(p, p), cfg.p_precision())?
        }
    };
    let coeffs = binomials(&u, m)?
        .iter()
        .map(|c| BoundarySeriesElem::from_scalar(cfg, tag, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(DistributionVec { coeffs, radius, scale })
}

/// min_alpha (val(d_alpha) + alpha a/b); `None` for the zero distribution.
pub fn rnorm_valuation(mu: &DistributionVec) -> Result<Option<Ratio<i64>>> {
    let e = mu.radius.exponent();
    let mut best: Option<Ratio<i64>> = None;
    let mut floor: Option<Ratio<i64>> = None;
    for (a, d) in mu.coeffs.iter().enumerate() {
        let v = d.gauss_valuation();
        let shift = e * Ratio::from_integer(a as i64);
        match (v.value, v.certified) {
            (None, _) => {}
            (Some(x), true) => {
                let c = Ratio::from_integer(x) + shift;
                best = Some(best.map_or(c, |b| b.min(c)));
            }
            (Some(x), false) => {
                let c = Ratio::from_integer(x) + shift;
                floor = Some(floor.map_or(c, |b| b.min(c)));
            }
        }
    }
    match (best, floor) {
        (_, None) => Ok(best),
        (Some(b), Some(f)) if f > b => Ok(Some(b)),
        _ => Err(HaloError::Uncertified("r-norm is not determined by the known digits".into())),
    }
}

/// sum_alpha d_alpha c_alpha.
pub fn pairing(mu: &DistributionVec, f: &MahlerFunction) -> Result<BoundarySeriesElem> {
    if mu.scale != f.scale {
        return Err(HaloError::TruncationMismatch("distribution and function live on different domains".into()));
    }
    if mu.coeffs.len() != f.coeffs.len() {
        return Err(HaloError::TruncationMismatch(format!(
            "distribution has {} coefficients, function {}",
            mu.coeffs.len(),
            f.coeffs.len()
        )));
    }
    let first = &mu.coeffs[0];
    let mut acc = BoundarySeriesElem::zero(first.cfg(), first.tag());
    for (d, c) in mu.coeffs.iter().zip(&f.coeffs) {
        acc = acc.add(&d.mul(c)?)?;
    }
    Ok(acc)
}

/// Row bound rho(i) = n(r, i/t) - n(inner, i/t) on ON entries of an operator
/// read from D^r to D^r, where inner = r^(1/p^m). It is a formula, so it
/// also bounds rows beyond the stored truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RowCertificate {
    pub blocks: usize,
    pub r: RadiusParam,
    pub inner: RadiusParam,
}

impl RowCertificate {
    pub fn new(blocks: usize, r: RadiusParam, p: u64, m: u32) -> Self {
        RowCertificate { blocks, r, inner: r.root(p, m) }
    }

    pub fn bound(&self, row: usize) -> i64 {
        let alpha = row / self.blocks;
        self.r.n(alpha) - self.inner.n(alpha)
    }

    /// Sum of the k smallest row bounds (rho is nondecreasing).
    pub fn partial_sum(&self, k: usize) -> i64 {
        (0..k).map(|i| self.bound(i)).sum()
    }
}

/// Square truncated operator matrix in the monomial bases, columns = images.
/// Index i belongs to basis degree i / blocks and block i % blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseOperatorMatrix {
    n: usize,
    entries: Vec<BoundarySeriesElem>,
    source: RadiusParam,
    target: RadiusParam,
    blocks: usize,
    cert: Option<RowCertificate>,
}

impl DenseOperatorMatrix {
    pub fn from_rows(
        rows: Vec<Vec<BoundarySeriesElem>>,
        source: RadiusParam,
        target: RadiusParam,
        blocks: usize,
    ) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(HaloError::TruncationMismatch("operator matrix must be square and nonempty".into()));
        }
        if blocks == 0 || n % blocks != 0 {
            return Err(HaloError::TruncationMismatch(format!("{n} rows do not split into {blocks} blocks")));
        }
        let tag = rows[0][0].tag();
        let entries: Vec<_> = rows.into_iter().flatten().collect();
        if let Some(e) = entries.iter().find(|e| e.tag() != tag) {
            return Err(HaloError::RingMismatch(tag, e.tag()));
        }
        Ok(DenseOperatorMatrix { n, entries, source, target, blocks, cert: None })
    }

    pub fn identity(cfg: &PrimeConfig, tag: RingTag, n: usize, r: RadiusParam) -> Self {
        let mut entries = vec![BoundarySeriesElem::zero(cfg, tag); n * n];
        for i in 0..n {
            entries[i * n + i] = BoundarySeriesElem::one(cfg, tag);
        }
        DenseOperatorMatrix { n, entries, source: r, target: r, blocks: 1, cert: None }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn source(&self) -> RadiusParam {
        self.source
    }

    pub fn target(&self) -> RadiusParam {
        self.target
    }

    pub fn tag(&self) -> RingTag {
        self.entries[0].tag()
    }

    pub fn cfg(&self) -> &PrimeConfig {
        self.entries[0].cfg()
    }

    pub fn certificate(&self) -> Option<&RowCertificate> {
        self.cert.as_ref()
    }

    pub fn entry(&self, i: usize, j: usize) -> &BoundarySeriesElem {
        &self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[BoundarySeriesElem] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn with_radii(mut self, source: RadiusParam, target: RadiusParam) -> Self {
        self.source = source;
        self.target = target;
        self
    }

    pub fn with_certificate(mut self, cert: RowCertificate) -> Self {
        self.cert = Some(cert);
        self
    }

    /// val of the ON entry A_ij w^(n(target, i) - n(source, j)).
    pub fn on_valuation(&self, i: usize, j: usize) -> ValuationResult {
        self.on_valuation_between(i, j, &self.source, &self.target)
    }

    pub fn on_valuation_between(&self, i: usize, j: usize, source: &RadiusParam, target: &RadiusParam) -> ValuationResult {
        let shift = target.n(i / self.blocks) - source.n(j / self.blocks);
        self.entry(i, j).gauss_valuation().shifted(shift)
    }

    /// Checks every stored entry against the row certificate. Entries whose
    /// known digits cannot settle the bound are reported as uncertified.
    pub fn verify_certificate(&self) -> Result<()> {
        let cert = self
            .cert
            .ok_or_else(|| HaloError::UncertifiedInput("operator carries no row certificate".into()))?;
        for i in 0..self.n {
            let bound = cert.bound(i);
            for j in 0..self.n {
                let v = self.on_valuation_between(i, j, &cert.r, &cert.r);
                match (v.value, v.certified) {
                    (None, _) => {}
                    (Some(x), _) if x >= bound => {}
                    (Some(x), true) => return Err(HaloError::NormViolation { row: i, col: j, found: x, bound }),
                    (Some(x), false) => {
                        return Err(HaloError::UncertifiedInput(format!(
                            "entry ({i}, {j}) is only known to ON-valuation {x}, bound is {bound}"
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    /// Same operator in the ON bases; requires w to be invertible.
    pub fn to_on_basis(&self) -> Result<Self> {
        if self.tag() == RingTag::LambdaEta {
            return Err(HaloError::RingMismatch(RingTag::LambdaEta, RingTag::REta));
        }
        let mut entries = Vec::with_capacity(self.entries.len());
        for i in 0..self.n {
            for j in 0..self.n {
                let shift = self.target.n(i / self.blocks) - self.source.n(j / self.blocks);
                entries.push(self.entry(i, j).scale_by_x_power(shift)?);
            }
        }
        Ok(DenseOperatorMatrix { entries, ..self.clone() })
    }

    pub fn map_entries(&self, f: impl Fn(&BoundarySeriesElem) -> Result<BoundarySeriesElem>) -> Result<Self> {
        let entries = self.entries.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(DenseOperatorMatrix { entries, ..self.clone() })
    }

    pub fn specialize(&self, pt: &WeightPoint) -> Result<Self> {
        self.map_entries(|e| e.specialize(pt))
    }

    /// Leading principal k x k block.
    pub fn leading(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.n || k % self.blocks != 0 {
            return Err(HaloError::TruncationMismatch(format!("cannot cut {} rows to {k}", self.n)));
        }
        let mut entries = Vec::with_capacity(k * k);
        for i in 0..k {
            entries.extend_from_slice(&self.row(i)[..k]);
        }
        Ok(DenseOperatorMatrix { n: k, entries, ..self.clone() })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.n != o.n {
            return Err(HaloError::TruncationMismatch("sum of matrices of different size".into()));
        }
        let entries = self.entries.iter().zip(&o.entries).map(|(a, b)| a.add(b)).collect::<Result<Vec<_>>>()?;
        Ok(DenseOperatorMatrix { entries, cert: None, ..self.clone() })
    }

    /// Matrix product self * o (apply o first).
    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.n != o.n {
            return Err(HaloError::TruncationMismatch("product of matrices of different size".into()));
        }
        let n = self.n;
        let zero = BoundarySeriesElem::zero(self.cfg(), self.tag());
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = zero.clone();
                for k in 0..n {
                    let (a, b) = (self.entry(i, k), o.entry(k, j));
                    if a.is_exact_zero() || b.is_exact_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(b)?)?;
                }
                entries.push(acc);
            }
        }
        Ok(DenseOperatorMatrix { n, entries, source: o.source, target: self.target, blocks: self.blocks, cert: None })
    }

    /// Image of a coefficient vector.
    pub fn apply(&self, v: &[BoundarySeriesElem]) -> Result<Vec<BoundarySeriesElem>> {
        if v.len() != self.n {
            return Err(HaloError::TruncationMismatch("vector length differs from matrix size".into()));
        }
        let zero = BoundarySeriesElem::zero(self.cfg(), self.tag());
        (0..self.n)
            .map(|i| {
                let mut acc = zero.clone();
                for (a, x) in self.row(i).iter().zip(v) {
                    if !a.is_exact_zero() && !x.is_exact_zero() {
                        acc = acc.add(&a.mul(x)?)?;
                    }
                }
                Ok(acc)
            })
            .collect()
    }
}

impl fmt::Display for DenseOperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|e| e.to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Compact inclusion D^s -> D^r for r <= s: the identity on T^alpha, whose
/// ON entries are w^(n(r,alpha) - n(s,alpha)).
pub fn inclusion_matrix(
    cfg: &PrimeConfig,
    tag: RingTag,
    s: RadiusParam,
    r: RadiusParam,
    m: usize,
) -> Result<DenseOperatorMatrix> {
    if !s.is_at_least(&r) {
        return Err(HaloError::RadiusOrder(format!("inclusion needs r <= s, got r = {r}, s = {s}")));
    }
    Ok(DenseOperatorMatrix::identity(cfg, tag, m + 1, s).with_radii(s, r))
}

/// Pushforward along x -> px on the Amice side: column beta holds
/// ((1+T)^p - 1)^beta truncated at degree m. Read from D^r to D^r it carries
/// the row certificate with inner radius r^(1/p).
pub fn mult_by_p_pushforward(cfg: &PrimeConfig, tag: RingTag, m: usize, r: RadiusParam) -> Result<DenseOperatorMatrix> {
    let p = cfg.p() as usize;
    let n = m + 1;
    // base = (1+T)^p - 1
    let mut base = vec![BigInt::from(0); n];
    let mut c = BigInt::from(1);
    for k in 1..=p.min(m) {
        c = c * BigInt::from(p - k + 1) / BigInt::from(k);
        base[k] = c.clone();
    }
    let mut cols: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    let mut cur = vec![BigInt::from(0); n];
    cur[0] = BigInt::from(1);
    for _ in 0..n {
        cols.push(cur.clone());
        let mut next = vec![BigInt::from(0); n];
        for (i, a) in cur.iter().enumerate() {
            if a == &BigInt::from(0) {
                continue;
            }
            for (j, b) in base.iter().enumerate().take(n - i) {
                next[i + j] += a * b;
            }
        }
        cur = next;
    }
    let to_elem = |v: &BigInt| BoundarySeriesElem::from_scalar(cfg, tag, &PadicScalar::from_int(cfg.p(), v.clone()));
    let rows = (0..n)
        .map(|i| (0..n).map(|j| to_elem(&cols[j][i])).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(DenseOperatorMatrix::from_rows(rows, r, r, 1)?.with_certificate(RowCertificate::new(1, r, cfg.p(), 1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PrimeConfig {
        PrimeConfig::new(3, 20, (-20, 20)).unwrap()
    }

    fn qp(n: i64) -> BoundarySeriesElem {
        BoundarySeriesElem::from_int(&cfg(), RingTag::Qp, n)
    }

    #[test]
    fn scale_exponents() {
        let r = RadiusParam::inverse_p();
        assert_eq!(on_scale_exponent(&r, 5), 5);
        assert_eq!(on_scale_exponent(&r.root(3, 1), 7), 2);
        assert_eq!(on_scale_exponent(&RadiusParam::new(1, 2).unwrap(), 0), 0);
    }

    #[test]
    fn mahler_of_simple_functions() {
        let e2: Vec<_> = (0..5).map(|k| qp(k * (k - 1) / 2)).collect();
        let m = mahler_coefficients(&e2, DomainScale::Zp).unwrap();
        let want: Vec<_> = [0, 0, 1, 0, 0].iter().map(|&v| qp(v)).collect();
        assert_eq!(m.coeffs, want);
        let ones: Vec<_> = (0..4).map(|_| qp(1)).collect();
        assert_eq!(mahler_coefficients(&ones, DomainScale::Zp).unwrap().coeffs[1..], vec![qp(0); 3][..]);
        let id: Vec<_> = (0..4).map(qp).collect();
        assert_eq!(mahler_coefficients(&id, DomainScale::Zp).unwrap().coeffs, vec![qp(0), qp(1), qp(0), qp(0)]);
    }

    #[test]
    fn dirac_transforms() {
        let c = cfg();
        let r = RadiusParam::inverse_p();
        let d0 = amice_of_dirac(&c, RingTag::Qp, &PadicScalar::zero(3), DomainScale::PZp, 3, r).unwrap();
        assert_eq!(d0.coeffs, vec![qp(1), qp(0), qp(0), qp(0)]);
        let d1 = amice_of_dirac(&c, RingTag::Qp, &PadicScalar::from_int(3, 3), DomainScale::PZp, 3, r).unwrap();
        assert_eq!(d1.coeffs, vec![qp(1), qp(1), qp(0), qp(0)]);
        let dp = amice_of_dirac(&c, RingTag::Qp, &PadicScalar::from_int(3, 9), DomainScale::PZp, 4, r).unwrap();
        assert_eq!(dp.coeffs, vec![qp(1), qp(3), qp(3), qp(1), qp(0)]);
    }

    #[test]
    fn rnorm_examples() {
        let r1 = RadiusParam::inverse_p();
        let t3 = DistributionVec { coeffs: vec![qp(0), qp(0), qp(0), qp(1)], radius: r1, scale: DomainScale::Zp };
        assert_eq!(rnorm_valuation(&t3).unwrap(), Some(Ratio::from_integer(3)));
        let p1 = DistributionVec { coeffs: vec![qp(3)], radius: RadiusParam::new(1, 2).unwrap(), scale: DomainScale::Zp };
        assert_eq!(rnorm_valuation(&p1).unwrap(), Some(Ratio::from_integer(1)));
        let all = DistributionVec { coeffs: vec![qp(1); 5], radius: RadiusParam::new(1, 2).unwrap(), scale: DomainScale::Zp };
        assert_eq!(rnorm_valuation(&all).unwrap(), Some(Ratio::from_integer(0)));
    }

    #[test]
    fn pairing_examples() {
        let r = RadiusParam::inverse_p();
        let f = MahlerFunction { coeffs: vec![qp(5), qp(2), qp(7)], scale: DomainScale::Zp };
        let delta0 = DistributionVec { coeffs: vec![qp(1), qp(0), qp(0)], radius: r, scale: DomainScale::Zp };
        assert_eq!(pairing(&delta0, &f).unwrap(), qp(5));
        let t = DistributionVec { coeffs: vec![qp(0), qp(1)], radius: r, scale: DomainScale::Zp };
        let e1 = MahlerFunction { coeffs: vec![qp(0), qp(1)], scale: DomainScale::Zp };
        assert_eq!(pairing(&t, &e1).unwrap(), qp(1));
        assert!(matches!(pairing(&delta0, &e1), Err(HaloError::TruncationMismatch(_))));
    }

    #[test]
    fn inclusion_entries() {
        let c = cfg();
        let s = RadiusParam::new(1, 2).unwrap();
        let r = RadiusParam::inverse_p();
        let inc = inclusion_matrix(&c, RingTag::Qp, s, r, 6).unwrap();
        assert_eq!(inc.on_valuation(4, 4), ValuationResult::exact(2));
        assert_eq!(inc.on_valuation(0, 0), ValuationResult::exact(0));
        let same = inclusion_matrix(&c, RingTag::Qp, r, r, 6).unwrap();
        assert_eq!(same, DenseOperatorMatrix::identity(&c, RingTag::Qp, 7, r));
        assert!(matches!(inclusion_matrix(&c, RingTag::Qp, r, s, 6), Err(HaloError::RadiusOrder(_))));
    }

    #[test]
    fn pushforward_columns() {
        let c = cfg();
        let m = mult_by_p_pushforward(&c, RingTag::Qp, 6, RadiusParam::inverse_p()).unwrap();
        assert_eq!(*m.entry(0, 0), qp(1));
        for a in 1..=6 {
            assert_eq!(*m.entry(a, 0), qp(0));
        }
        let col1 = [0, 3, 3, 1, 0, 0, 0];
        for (a, v) in col1.iter().enumerate() {
            assert_eq!(*m.entry(a, 1), qp(*v));
        }
        for b in 0..=6 {
            assert_eq!(*m.entry(b, b), qp(3i64.pow(b as u32)));
            for a in 0..b {
                assert!(m.entry(a, b).is_exact_zero());
            }
        }
        m.verify_certificate().unwrap();
    }
}
