use num_rational::Ratio;

use super::det::{EntireSeriesTrunc, Tail};
use crate::error::{HaloError, Result};
use crate::ring::{ValuationResult, WeightPoint};

type Q = Ratio<i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointValue {
    Infinite,
    Exact(Q),
    AtLeast(Q),
}

impl From<ValuationResult> for PointValue {
    fn from(v: ValuationResult) -> Self {
        match (v.value, v.certified) {
            (None, _) => PointValue::Infinite,
            (Some(x), true) => PointValue::Exact(Q::from_integer(x)),
            (Some(x), false) => PointValue::AtLeast(Q::from_integer(x)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment {
    pub slope: Q,
    pub multiplicity: usize,
    /// Points beyond the known ones could still cut this segment.
    pub provisional: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct NewtonPolygon {
    pub vertices: Vec<(i64, Q)>,
    pub segments: Vec<Segment>,
}

impl NewtonPolygon {
    /// Slopes repeated by multiplicity.
    pub fn slope_list(&self) -> Vec<Q> {
        self.segments.iter().flat_map(|s| std::iter::repeat(s.slope).take(s.multiplicity)).collect()
    }

    /// Slopes from non-provisional segments only.
    pub fn certain_slopes(&self) -> Vec<Q> {
        self.segments
            .iter()
            .take_while(|s| !s.provisional)
            .flat_map(|s| std::iter::repeat(s.slope).take(s.multiplicity))
            .collect()
    }

    /// Number of slopes <= h, when that count ends at a vertex followed by a
    /// certain segment of slope > h (or ends the polygon of a polynomial).
    pub fn break_index(&self, h: Q) -> Option<usize> {
        let mut d = 0;
        for s in &self.segments {
            if s.slope > h {
                return Some(d);
            }
            if s.provisional {
                return None;
            }
            d += s.multiplicity;
        }
        None
    }
}

fn cross(o: (i64, Q), a: (i64, Q), b: (i64, Q)) -> Q {
    Q::from_integer(a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * Q::from_integer(b.0 - o.0)
}

/// Lower convex hull (monotone chain) of points with distinct, increasing x.
pub fn lower_hull(points: &[(i64, Q)]) -> Vec<(i64, Q)> {
    let mut h: Vec<(i64, Q)> = Vec::with_capacity(points.len());
    for &pt in points {
        while h.len() >= 2 && cross(h[h.len() - 2], h[h.len() - 1], pt) <= Q::from_integer(0) {
            h.pop();
        }
        h.push(pt);
    }
    h
}

fn hull_value(v: &[(i64, Q)], n: i64) -> Option<Q> {
    let i = v.windows(2).position(|w| w[0].0 <= n && n <= w[1].0)?;
    let (a, b) = (v[i], v[i + 1]);
    Some(a.1 + (b.1 - a.1) * Q::new(n - a.0, b.0 - a.0))
}

/// Hull of the certified points. Lower bounds inside the hull's range must sit
/// on or above it; lower bounds past it (and the tail) decide which segments
/// are provisional.
pub fn newton_polygon_points(points: &[(i64, PointValue)], tail: Tail) -> Result<NewtonPolygon> {
    let exact: Vec<(i64, Q)> = points
        .iter()
        .filter_map(|&(n, v)| match v {
            PointValue::Exact(x) => Some((n, x)),
            _ => None,
        })
        .collect();
    let vertices = lower_hull(&exact);
    if vertices.len() < 2 {
        return Ok(NewtonPolygon { vertices, segments: vec![] });
    }
    let last = vertices.last().unwrap().0;
    let mut outside: Vec<(i64, Q)> = Vec::new();
    for &(n, v) in points {
        if let PointValue::AtLeast(lb) = v {
            if n <= last {
                if let Some(hv) = hull_value(&vertices, n) {
                    if lb < hv {
                        return Err(HaloError::UncertifiedVertexCandidate(n as usize));
                    }
                }
            } else {
                outside.push((n, lb));
            }
        }
    }
    let top = points.iter().map(|p| p.0).max().unwrap_or(0);
    let mut segments: Vec<Segment> = vertices
        .windows(2)
        .map(|w| Segment {
            slope: (w[1].1 - w[0].1) / Q::from_integer(w[1].0 - w[0].0),
            multiplicity: (w[1].0 - w[0].0) as usize,
            provisional: false,
        })
        .collect();
    let cuts = |seg: usize, n: i64, lb: Q| {
        let (x0, y0) = vertices[seg];
        lb < y0 + segments[seg].slope * Q::from_integer(n - x0)
    };
    let mut flags = vec![false; segments.len()];
    for (i, f) in flags.iter_mut().enumerate() {
        *f = outside.iter().any(|&(n, lb)| cuts(i, n, lb));
    }
    match tail {
        Tail::Zero => {}
        Tail::Unknown => {
            let n = flags.len();
            flags[n - 1] = true;
        }
        Tail::Bounded(cert) => {
            let steep = segments.last().unwrap().slope;
            let mut lam: i64 = cert.partial_sum(top as usize + 1);
            let mut n = top + 1;
            loop {
                for (i, f) in flags.iter_mut().enumerate() {
                    if !*f && cuts(i, n, Q::from_integer(lam)) {
                        *f = true;
                    }
                }
                let step = cert.bound(n as usize);
                // past this point the bound grows faster than every segment line
                if Q::from_integer(step) >= steep && !flags.iter().zip(0..).any(|(f, i)| !f && cuts(i, n, Q::from_integer(lam))) {
                    break;
                }
                lam += step;
                n += 1;
            }
        }
    }
    for (s, f) in segments.iter_mut().zip(flags) {
        s.provisional = f;
    }
    // once a segment may move, so may everything after it
    let mut seen = false;
    for s in segments.iter_mut() {
        seen |= s.provisional;
        s.provisional = seen;
    }
    Ok(NewtonPolygon { vertices, segments })
}

/// Polygon of (n, val c_n) for the valuation native to the coefficient ring.
pub fn newton_polygon(f: &EntireSeriesTrunc) -> Result<NewtonPolygon> {
    let pts: Vec<(i64, PointValue)> =
        (0..=f.n_max()).map(|n| (n as i64, PointValue::from(f.valuation(n)))).collect();
    newton_polygon_points(&pts, f.tail())
}

/// Specialize every coefficient up to nMax, then take the polygon.
pub fn slopes_at_point(f: &EntireSeriesTrunc, pt: &WeightPoint, n_max: usize) -> Result<NewtonPolygon> {
    let g = f.truncated(n_max.min(f.n_max())).specialize(pt)?;
    newton_polygon(&g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::from_integer(n)
    }

    #[test]
    fn convex_sequence() {
        let pts: Vec<_> = (0..8).map(|n| (n, PointValue::Exact(q(n * (n - 1) / 2)))).collect();
        let np = newton_polygon_points(&pts, Tail::Zero).unwrap();
        assert_eq!(np.slope_list(), (0..7).map(q).collect::<Vec<_>>());
    }

    #[test]
    fn collinear_points_merge() {
        let pts = vec![(0, PointValue::Exact(q(0))), (1, PointValue::Exact(q(1))), (2, PointValue::Exact(q(2)))];
        let np = newton_polygon_points(&pts, Tail::Zero).unwrap();
        assert_eq!(np.segments.len(), 1);
        assert_eq!(np.segments[0].multiplicity, 2);
    }

    #[test]
    fn low_candidate_is_rejected() {
        let pts = vec![(0, PointValue::Exact(q(0))), (1, PointValue::AtLeast(q(0))), (2, PointValue::Exact(q(1)))];
        assert_eq!(newton_polygon_points(&pts, Tail::Zero), Err(HaloError::UncertifiedVertexCandidate(1)));
        let ok = vec![(0, PointValue::Exact(q(0))), (1, PointValue::AtLeast(q(1))), (2, PointValue::Exact(q(1)))];
        assert!(newton_polygon_points(&ok, Tail::Zero).is_ok());
    }

    #[test]
    fn unknown_tail_marks_last_segment() {
        let pts = vec![(0, PointValue::Exact(q(0))), (1, PointValue::Exact(q(0))), (2, PointValue::Exact(q(3)))];
        let np = newton_polygon_points(&pts, Tail::Unknown).unwrap();
        assert!(!np.segments[0].provisional);
        assert!(np.segments[1].provisional);
        assert_eq!(np.certain_slopes(), vec![q(0)]);
    }
}
