use num_bigint::BigInt;
use num_rational::Ratio;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use halo_core::distributions::{mult_by_p_pushforward, DenseOperatorMatrix};
use halo_core::fredholm::*;
use halo_core::iwahori::*;
use halo_core::ring::*;
use halo_core::weights::{classical_point, RadiusParam, WeightCharacter};

type Q = Ratio<i64>;

// k is a vertex iff every slope into it from the left is below every slope out of it
fn brute_hull(pts: &[(i64, Q)]) -> Vec<(i64, Q)> {
    let slope = |a: (i64, Q), b: (i64, Q)| (b.1 - a.1) / Q::from_integer(b.0 - a.0);
    (0..pts.len())
        .filter(|&k| {
            let left = (0..k).map(|i| slope(pts[i], pts[k])).max();
            let right = (k + 1..pts.len()).map(|j| slope(pts[k], pts[j])).min();
            match (left, right) {
                (Some(l), Some(r)) => l < r,
                _ => true,
            }
        })
        .map(|k| pts[k])
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hull_matches_brute_force(raw in prop::collection::btree_map(0i64..80, (-60i64..60, 1i64..5), 1..50)) {
        let pts: Vec<(i64, Q)> = raw.into_iter().map(|(x, (n, d))| (x, Q::new(n, d))).collect();
        prop_assert_eq!(lower_hull(&pts), brute_hull(&pts));
        let tagged: Vec<_> = pts.iter().map(|&(x, y)| (x, PointValue::Exact(y))).collect();
        let np = newton_polygon_points(&tagged, Tail::Zero).unwrap();
        prop_assert_eq!(np.vertices, brute_hull(&pts));
    }
}

fn qp_cfg() -> PrimeConfig {
    PrimeConfig::new(3, 40, (-10, 60)).unwrap()
}

fn elem(cfg: &PrimeConfig, tag: RingTag, val: i64, unit: i64, rng: &mut StdRng) -> BoundarySeriesElem {
    let p = cfg.p() as i64;
    match tag {
        RingTag::Qp => BoundarySeriesElem::from_scalar(cfg, tag, &PadicScalar::from_parts(cfg.p(), BigInt::from(unit), val, None)).unwrap(),
        _ => {
            let c = vec![BigInt::from(unit.rem_euclid(p)), BigInt::from(rng.gen_range(0..p)), BigInt::from(rng.gen_range(0..p))];
            BoundarySeriesElem::from_coeffs(cfg, tag, val, c, None).unwrap()
        }
    }
}

fn linear_product(cfg: &PrimeConfig, tag: RingTag, roots: &[BoundarySeriesElem]) -> Vec<BoundarySeriesElem> {
    let mut poly = vec![BoundarySeriesElem::one(cfg, tag)];
    for a in roots {
        let factor = vec![BoundarySeriesElem::one(cfg, tag), a.neg()];
        poly = poly_mul_trunc(&poly, &factor, poly.len() + 1).unwrap();
    }
    poly
}

fn companion(cfg: &PrimeConfig, tag: RingTag, q: &[BoundarySeriesElem]) -> Vec<Vec<BoundarySeriesElem>> {
    let d = q.len() - 1;
    let mut m = vec![vec![BoundarySeriesElem::zero(cfg, tag); d]; d];
    for i in 0..d {
        if i + 1 < d {
            m[i + 1][i] = BoundarySeriesElem::one(cfg, tag);
        }
        m[i][d - 1] = q[d - i].neg();
    }
    m
}

fn block_diag(a: Vec<Vec<BoundarySeriesElem>>, b: Vec<Vec<BoundarySeriesElem>>, zero: &BoundarySeriesElem) -> Vec<Vec<BoundarySeriesElem>> {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![zero.clone(); n + m]; n + m];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = a[i][j].clone();
        }
    }
    for i in 0..m {
        for j in 0..m {
            out[n + i][n + j] = b[i][j].clone();
        }
    }
    out
}

fn planted_case(rng: &mut StdRng, tag: RingTag) {
    let cfg = qp_cfg();
    let h = *[Q::from_integer(0), Q::new(1, 2), Q::from_integer(1), Q::new(3, 2)].get(rng.gen_range(0..4)).unwrap();
    let p = cfg.p() as i64;
    let unit = |rng: &mut StdRng| loop {
        let u = rng.gen_range(1..50i64);
        if u % p != 0 {
            break u;
        }
    };
    let d = rng.gen_range(0..4);
    let e = rng.gen_range(1..4);
    let floor_h = h.floor().to_integer();
    let small: Vec<_> = (0..d)
        .map(|_| {
            let v = rng.gen_range(0..=floor_h);
            let u = unit(rng);
            elem(&cfg, tag, v, u, rng)
        })
        .collect();
    let large: Vec<_> = (0..e)
        .map(|_| {
            let v = floor_h + 1 + rng.gen_range(0..3);
            let u = unit(rng);
            elem(&cfg, tag, v, u, rng)
        })
        .collect();
    let qp = linear_product(&cfg, tag, &small);
    let sp = linear_product(&cfg, tag, &large);
    let f = poly_mul_trunc(&qp, &sp, d + e + 1).unwrap();
    let series = EntireSeriesTrunc::new(f.clone(), Tail::Zero).unwrap();
    let fac = slope_factorize(&series, h, 30).unwrap();
    assert_eq!(fac.degree(), d);
    let prod = poly_mul_trunc(&fac.q, fac.s.coeffs(), d + e + 1).unwrap();
    for (a, b) in prod.iter().zip(&f) {
        assert!(a.agrees_with(b).unwrap());
    }
    let qpts: Vec<_> = fac.q.iter().enumerate().map(|(n, c)| (n as i64, PointValue::from(c.gauss_valuation()))).collect();
    assert!(newton_polygon_points(&qpts, Tail::Zero).unwrap().segments.iter().all(|s| s.slope <= h));
    assert!(newton_polygon(&fac.s).unwrap().segments.iter().all(|s| s.slope > h));
    for (a, b) in fac.q.iter().zip(&qp) {
        assert!(a.agrees_with(b).unwrap(), "planted Q: {a} vs {b} ({tag:?}, h={h})");
        assert!(a.prec().map_or(true, |k| k >= 20), "{a}");
    }

    // an operator with det(1 - T U) = F, mixed by a unipotent change of basis
    let zero = BoundarySeriesElem::zero(&cfg, tag);
    let blocks = if d == 0 { companion(&cfg, tag, &sp) } else { block_diag(companion(&cfg, tag, &qp), companion(&cfg, tag, &sp), &zero) };
    let n = blocks.len();
    let r = RadiusParam::inverse_p();
    let base = DenseOperatorMatrix::from_rows(blocks, r, r, 1).unwrap();
    let mut g = DenseOperatorMatrix::identity(&cfg, tag, n, r);
    let mut ginv = DenseOperatorMatrix::identity(&cfg, tag, n, r);
    if n >= 2 {
        let i = rng.gen_range(0..n - 1);
        let c = rng.gen_range(-5..5);
        let mut rows: Vec<Vec<_>> = (0..n).map(|k| g.row(k).to_vec()).collect();
        rows[i][n - 1] = BoundarySeriesElem::from_int(&cfg, tag, c);
        g = DenseOperatorMatrix::from_rows(rows.clone(), r, r, 1).unwrap();
        rows[i][n - 1] = BoundarySeriesElem::from_int(&cfg, tag, -c);
        ginv = DenseOperatorMatrix::from_rows(rows, r, r, 1).unwrap();
    }
    let u = g.mul(&base).unwrap().mul(&ginv).unwrap();
    let k = riesz_kernel(&u, &fac.q, 20).unwrap();
    assert_eq!(k.dim(), d);
    for (a, b) in k.char_poly.iter().zip(&fac.q) {
        assert!(a.agrees_with(b).unwrap());
    }
}

#[test]
fn planted_factorizations_and_kernels() {
    let mut rng = StdRng::seed_from_u64(7);
    for i in 0..120 {
        let tag = if i % 2 == 0 { RingTag::Qp } else { RingTag::FpLaurent };
        planted_case(&mut rng, tag);
    }
}

#[test]
fn no_separating_vertex_inside_segment() {
    let cfg = qp_cfg();
    let e = |v| BoundarySeriesElem::from_int(&cfg, RingTag::Qp, v);
    // slopes 1/2, 1/2 only: nothing separates at h = 1/4 beyond d = 0, and the
    // last segment of an unknown tail is never a safe break
    let f = EntireSeriesTrunc::new(vec![e(1), e(0), e(3)], Tail::Unknown).unwrap();
    assert!(matches!(slope_factorize(&f, Q::new(1, 2), 20), Err(halo_core::HaloError::NoSeparatingVertex(_))));
}

#[test]
fn pushforward_slopes_are_the_integers() {
    // the tail bound only overtakes the slope-10 line near n = 25
    let cfg = PrimeConfig::new(3, 300, (-4, 300)).unwrap();
    let u = mult_by_p_pushforward(&cfg, RingTag::Qp, 60, RadiusParam::inverse_p()).unwrap();
    let f = fredholm_det(&u, 26, 0, Some(60)).unwrap();
    let np = newton_polygon(&f).unwrap();
    let want: Vec<Q> = (0..=10).map(Q::from_integer).collect();
    assert_eq!(&np.certain_slopes()[..11], &want[..]);
    let fac = slope_factorize(&f, Q::from_integer(0), 40).unwrap();
    assert_eq!(fac.degree(), 1);
    let k = riesz_kernel(&u, &fac.q, 30).unwrap();
    assert_eq!(k.dim(), 1);
}

fn toy(p: u64, prec: i64, eta: u64, r: RadiusParam, m: usize, tag: RingTag) -> DenseOperatorMatrix {
    let cfg = PrimeConfig::new(p, prec, (-prec, prec - 1)).unwrap();
    let kap = WeightCharacter::universal(&cfg, eta, tag).unwrap();
    let mut spec = UpOperatorSpec::toy_up(&kap, r, m);
    spec.summands[0].push((0, MonoidElem::from_ints(p, 2, 1, p as i64, p as i64).unwrap()));
    build_u(&spec, prec).unwrap()
}

#[test]
fn radius_does_not_change_the_series() {
    let u1 = toy(3, 44, 1, RadiusParam::inverse_p(), 40, RingTag::LambdaEta);
    let u2 = toy(3, 44, 1, RadiusParam::new(1, 2).unwrap(), 40, RingTag::LambdaEta);
    let f1 = fredholm_det(&u1, 8, 10, None).unwrap();
    let f2 = fredholm_det(&u2, 8, 10, None).unwrap();
    for n in 0..=8 {
        assert!(f1.coeff(n).agrees_with(f2.coeff(n)).unwrap(), "c_{n}");
        assert!(f1.precision(n).unwrap_or(99) >= 10 && f2.precision(n).unwrap_or(99) >= 10);
    }
}

#[test]
fn specialization_commutes_with_the_determinant() {
    let p = 3;
    let prec = 30;
    let eta = 1;
    let r = RadiusParam::inverse_p();
    let u = toy(p, prec, eta, r, 24, RingTag::LambdaEta);
    let family = fredholm_det(&u, 6, 8, None).unwrap();
    let cfg = PrimeConfig::new(p, prec, (-prec, prec - 1)).unwrap();
    for k in 0..=2 {
        let kap = WeightCharacter::classical_in_family(&cfg, k, eta).unwrap();
        let mut spec = UpOperatorSpec::toy_up(&kap, r, 24);
        spec.summands[0].push((0, MonoidElem::from_ints(p, 2, 1, p as i64, p as i64).unwrap()));
        let direct = fredholm_det(&build_u(&spec, prec).unwrap(), 6, 8, None).unwrap();
        let spec_f = family.specialize(&classical_point(&cfg, k)).unwrap();
        for n in 0..=6 {
            let d = spec_f.coeff(n).sub(direct.coeff(n)).unwrap();
            assert!(d.with_prec(6).is_known_zero(), "k={k} n={n}");
            assert!(spec_f.precision(n).unwrap_or(99) >= 6 && direct.precision(n).unwrap_or(99) >= 6);
        }
    }
}

#[test]
fn orthonormal_rescaling_leaves_the_series_alone() {
    let u = toy(3, 24, 1, RadiusParam::inverse_p(), 20, RingTag::REta);
    let on = u.to_on_basis().unwrap();
    let f = fredholm_det(&u, 8, 8, None).unwrap();
    let g = fredholm_det(&on, 8, 8, None).unwrap();
    for n in 0..=8 {
        assert!(f.coeff(n).agrees_with(g.coeff(n)).unwrap());
        assert_eq!(f.precision(n), g.precision(n));
    }
}

#[test]
fn larger_truncation_keeps_certified_digits() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..20 {
        let p = [3u64, 5][rng.gen_range(0..2)];
        let eta = rng.gen_range(0..p - 1);
        let t = rng.gen_range(1..=2);
        let prec = 24;
        let cfg = PrimeConfig::new(p, prec, (-2, prec - 1)).unwrap();
        let kap = WeightCharacter::universal(&cfg, eta, RingTag::LambdaEta).unwrap();
        let pi = p as i64;
        let mut summands: Vec<Vec<(usize, MonoidElem)>> = vec![vec![]; t];
        for i in 0..t {
            for _ in 0..rng.gen_range(1..4) {
                let a = loop {
                    let a = rng.gen_range(1..20i64);
                    if a % pi != 0 {
                        break a;
                    }
                };
                let g = loop {
                    if let Ok(g) = MonoidElem::from_ints(p, a, rng.gen_range(-9..10), pi * rng.gen_range(-3..4), pi * rng.gen_range(1..4)) {
                        break g;
                    }
                };
                summands[i].push((rng.gen_range(0..t), g));
            }
        }
        let spec = UpOperatorSpec { nblocks: t, summands, kappa: kap, radius: RadiusParam::inverse_p(), truncation: 22 };
        let u = build_u(&spec, prec).unwrap();
        let k = 12 * t - t * (rng.gen_range(0..3));
        let f1 = fredholm_det(&u, 6, 0, Some(k)).unwrap();
        let f2 = fredholm_det(&u, 6, 0, Some(k + 10 * t)).unwrap();
        for n in 0..=6 {
            assert!(f1.coeff(n).agrees_with(f2.coeff(n)).unwrap(), "n={n}");
            assert!(f2.precision(n).unwrap_or(i64::MAX) >= f1.precision(n).unwrap_or(i64::MAX));
        }
    }
}

#[test]
fn specialized_slopes_of_simple_series() {
    let cfg = PrimeConfig::new(3, 20, (-4, 20)).unwrap();
    let x = BoundarySeriesElem::x(&cfg, RingTag::LambdaEta).unwrap();
    let f = EntireSeriesTrunc::new(vec![BoundarySeriesElem::one(&cfg, RingTag::LambdaEta), x.neg()], Tail::Zero).unwrap();
    let one = Q::from_integer(1);
    assert_eq!(slopes_at_point(&f, &WeightPoint::ModP, 1).unwrap().slope_list(), vec![one]);
    for u in [1, 2, 4, 5] {
        let pt = WeightPoint::classical(PadicScalar::from_int(3, 3 * u));
        assert_eq!(slopes_at_point(&f, &pt, 1).unwrap().slope_list(), vec![one]);
    }
}
