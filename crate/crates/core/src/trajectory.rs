//! Recorded trajectories and route similarity: Douglas-Peucker
//! simplification, closest-pair distance, LCSS distance and the
//! first/last-segment Hausdorff-style distance.

use std::collections::BTreeMap;
use std::io::Read;

use chrono::DateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point, Segment};

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("cannot read trajectory: {0}")]
    Io(#[from] std::io::Error),
    #[error("trajectory parse error: {0}")]
    Parse(String),
    #[error("invalid trajectory: {0}")]
    Invalid(String),
    #[error("{which} endpoints are {distance:.3} m apart, beyond the sharing tolerance")]
    EndpointsNotShared { which: &'static str, distance: f64 },
    #[error("unknown route '{0}'")]
    UnknownRoute(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// `(seconds, position)`, strictly increasing in time.
    pub samples: Vec<(f64, Point)>,
    /// One score in [0, 5] per inter-sample segment.
    pub scores: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn new(samples: Vec<(f64, Point)>, scores: Option<Vec<f64>>) -> Result<Self, TrajectoryError> {
        if samples.len() < 2 {
            return Err(TrajectoryError::Invalid("need at least two samples".into()));
        }
        if let Some(w) = samples.windows(2).find(|w| !(w[1].0 > w[0].0)) {
            return Err(TrajectoryError::Invalid(format!("timestamp {} does not increase", w[1].0)));
        }
        if let Some(s) = &scores {
            if s.len() != samples.len() - 1 {
                return Err(TrajectoryError::Invalid("need one score per segment".into()));
            }
            if let Some(v) = s.iter().find(|v| !(0.0..=5.0).contains(*v)) {
                return Err(TrajectoryError::Invalid(format!("score {v} outside [0, 5]")));
            }
        }
        Ok(Trajectory { samples, scores })
    }

    /// Builds a trajectory with one-second spacing from bare points.
    pub fn from_points(points: &[Point]) -> Result<Self, TrajectoryError> {
        Trajectory::new(points.iter().enumerate().map(|(i, p)| (i as f64, *p)).collect(), None)
    }

    pub fn points(&self) -> Vec<Point> {
        self.samples.iter().map(|s| s.1).collect()
    }

    /// Reads CSV with header `t,x,y[,score]`. `t` is epoch seconds or an
    /// RFC 3339 timestamp; a row's score belongs to the segment ending at
    /// that row, so the first row's score is ignored.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, TrajectoryError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| TrajectoryError::Parse(e.to_string()))?.clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let (Some(ct), Some(cx), Some(cy)) = (col("t"), col("x"), col("y")) else {
            return Err(TrajectoryError::Parse("header must contain t, x and y".into()));
        };
        let cs = col("score");
        let mut samples = Vec::new();
        let mut scores = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| TrajectoryError::Parse(e.to_string()))?;
            let field = |c: usize| rec.get(c).unwrap_or("");
            let num = |c: usize| -> Result<f64, TrajectoryError> {
                field(c)
                    .parse::<f64>()
                    .map_err(|_| TrajectoryError::Parse(format!("row {}: bad number '{}'", row + 2, field(c))))
            };
            let t = parse_time(field(ct))
                .ok_or_else(|| TrajectoryError::Parse(format!("row {}: bad timestamp '{}'", row + 2, field(ct))))?;
            let p = Point::try_new(num(cx)?, num(cy)?)
                .map_err(|e| TrajectoryError::Parse(format!("row {}: {e}", row + 2)))?;
            if let Some(c) = cs {
                if row > 0 {
                    scores.push(num(c)?);
                }
            }
            samples.push((t, p));
        }
        Trajectory::new(samples, cs.map(|_| scores))
    }

    pub fn write_csv(&self) -> String {
        let mut out = String::from(if self.scores.is_some() { "t,x,y,score\n" } else { "t,x,y\n" });
        for (i, (t, p)) in self.samples.iter().enumerate() {
            out.push_str(&format!("{t},{},{}", p.x, p.y));
            if let Some(s) = &self.scores {
                out.push(',');
                if i > 0 {
                    out.push_str(&s[i - 1].to_string());
                }
            }
            out.push('\n');
        }
        out
    }
}

fn parse_time(s: &str) -> Option<f64> {
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let dt = DateTime::parse_from_rfc3339(s).ok()?;
    Some(dt.timestamp() as f64 + f64::from(dt.timestamp_subsec_nanos()) * 1e-9)
}

/// Indices of the points kept by classic Douglas-Peucker at tolerance
/// `tol`, measured as point-to-segment distance.
pub fn simplify_indices(points: &[Point], tol: f64) -> Vec<usize> {
    let n = points.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut keep = vec![false; n];
    keep[0] = true;
    keep[n - 1] = true;
    let mut stack = vec![(0, n - 1)];
    while let Some((i, j)) = stack.pop() {
        if j <= i + 1 {
            continue;
        }
        let chord = Segment { a: points[i], b: points[j] };
        let degenerate = points[i] == points[j];
        let (k, d) = ((i + 1)..j)
            .map(|k| {
                let d = if degenerate { points[k].distance(&points[i]) } else { chord.distance_to_point(&points[k]) };
                (k, d)
            })
            .fold((i, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        if d > tol {
            keep[k] = true;
            stack.push((i, k));
            stack.push((k, j));
        }
    }
    (0..n).filter(|&k| keep[k]).collect()
}

/// Douglas-Peucker simplification. Timestamps are preserved; a merged
/// segment takes the worst (lowest) score of the segments it replaces.
pub fn simplify_dp(t: &Trajectory, tol: f64) -> Trajectory {
    let idx = simplify_indices(&t.points(), tol);
    let samples = idx.iter().map(|&k| t.samples[k]).collect();
    let scores = t.scores.as_ref().map(|s| {
        idx.windows(2)
            .map(|w| s[w[0]..w[1]].iter().copied().fold(f64::INFINITY, f64::min))
            .collect()
    });
    Trajectory { samples, scores }
}

/// Closest-pair distance: minimum distance over all sample pairs.
pub fn cpd(a: &[Point], b: &[Point]) -> f64 {
    a.iter()
        .flat_map(|p| b.iter().map(move |q| p.distance(q)))
        .fold(f64::INFINITY, f64::min)
}

/// Longest common subsequence length where samples match within `eps`.
pub fn lcss_length(a: &[Point], b: &[Point], eps: f64) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for p in a {
        for (j, q) in b.iter().enumerate() {
            cur[j + 1] = if p.distance(q) <= eps { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - lcss / min(|a|, |b|)`, in [0, 1].
pub fn lcss_distance(a: &[Point], b: &[Point], eps: f64) -> f64 {
    let m = a.len().min(b.len());
    if m == 0 {
        return 1.0;
    }
    1.0 - lcss_length(a, b, eps) as f64 / m as f64
}

fn sin_between(u: (f64, f64), v: (f64, f64)) -> f64 {
    let nu = u.0.hypot(u.1);
    let nv = v.0.hypot(v.1);
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    ((u.0 * v.1 - u.1 * v.0) / (nu * nv)).abs().min(1.0)
}

/// One segment pair sharing vertex `shared`; `pa`, `pb` are the other ends.
fn pair_value(shared: Point, pa: Point, pb: Point, w1: f64, w2: f64) -> f64 {
    let ua = pa.sub(&shared);
    let ub = pb.sub(&shared);
    let la = ua.0.hypot(ua.1);
    let lb = ub.0.hypot(ub.1);
    let d_par = pa.distance(&pb);
    let d_theta = la.min(lb) * sin_between(ua, ub);
    w1 * d_par + w2 * d_theta
}

/// Average of the first-segment and last-segment values
/// `w1 * d_par + w2 * d_theta`. `b` is translated so its shared endpoint
/// coincides with `a`'s; endpoints further apart than `tol` are an error.
pub fn dhaus(a: &[Point], b: &[Point], w1: f64, w2: f64, tol: f64) -> Result<f64, TrajectoryError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(TrajectoryError::Invalid("dhaus needs at least two points per trajectory".into()));
    }
    let (a0, b0) = (a[0], b[0]);
    let (an, bn) = (a[a.len() - 1], b[b.len() - 1]);
    for (which, p, q) in [("start", a0, b0), ("end", an, bn)] {
        let d = p.distance(&q);
        if d > tol {
            return Err(TrajectoryError::EndpointsNotShared { which, distance: d });
        }
    }
    let shift = |p: Point, from: Point, to: Point| Point::new(p.x - from.x + to.x, p.y - from.y + to.y);
    let first = pair_value(a0, a[1], shift(b[1], b0, a0), w1, w2);
    let last = pair_value(an, a[a.len() - 2], shift(b[b.len() - 2], bn, an), w1, w2);
    Ok(0.5 * (first + last))
}

/// Three-component segment distance of Lee, Han and Whang for arbitrary
/// segment pairs: perpendicular, parallel and angular parts.
pub fn dhaus_full(s1: &Segment, s2: &Segment, w_perp: f64, w_par: f64, w_theta: f64) -> f64 {
    let (long, short) = if s1.length() >= s2.length() { (s1, s2) } else { (s2, s1) };
    let len = long.length();
    let dir = long.b.sub(&long.a);
    let param = |p: &Point| {
        let v = p.sub(&long.a);
        (v.0 * dir.0 + v.1 * dir.1) / (len * len)
    };
    let perp = |p: &Point| long.a.lerp(&long.b, param(p)).distance(p);
    let (l1, l2) = (perp(&short.a), perp(&short.b));
    let d_perp = if l1 + l2 > 0.0 { (l1 * l1 + l2 * l2) / (l1 + l2) } else { 0.0 };
    let par = |p: &Point| {
        let t = param(p);
        (t * len).abs().min(((1.0 - t) * len).abs())
    };
    let d_par = par(&short.a).min(par(&short.b));
    let sv = short.b.sub(&short.a);
    let dot = sv.0 * dir.0 + sv.1 * dir.1;
    let d_theta = if dot >= 0.0 { short.length() * sin_between(sv, dir) } else { short.length() };
    w_perp * d_perp + w_par * d_par + w_theta * d_theta
}

/// Points along `poly` no more than `spacing` apart, vertices included.
pub fn densify(poly: &[Point], spacing: f64) -> Vec<Point> {
    let mut out = Vec::new();
    for w in poly.windows(2) {
        let n = (w[0].distance(&w[1]) / spacing).ceil().max(1.0) as usize;
        for k in 0..n {
            out.push(w[0].lerp(&w[1], k as f64 / n as f64));
        }
    }
    if let Some(last) = poly.last() {
        out.push(*last);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub lcss_eps: f64,
    /// Douglas-Peucker tolerance applied to the recorded trajectory before
    /// the segment-based measure.
    pub simplify_tol: f64,
    /// Spacing used to turn route polylines into point sequences.
    pub resample_spacing: f64,
    pub w1: f64,
    pub w2: f64,
    pub endpoint_tol: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig { lcss_eps: 4.0, simplify_tol: 5.0, resample_spacing: 1.0, w1: 1.0, w2: 1.0, endpoint_tol: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measures {
    pub cpd: f64,
    pub lcss_distance: f64,
    pub dhaus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Closeness {
    pub cpd: Option<f64>,
    pub lcss_distance: Option<f64>,
    pub dhaus: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub baseline: String,
    pub measures: BTreeMap<String, Measures>,
    /// `(baseline - candidate) / baseline` per measure; `None` when the
    /// baseline value is zero.
    pub closeness: BTreeMap<String, Closeness>,
}

/// Measures of one route against the recorded trajectory. The closest-pair
/// distance skips the shared first and last samples, which every route
/// contains by precondition.
pub fn measure_route(actual: &Trajectory, route: &[Point], cfg: &CompareConfig) -> Result<Measures, TrajectoryError> {
    let pts = actual.points();
    let simplified = simplify_dp(actual, cfg.simplify_tol).points();
    let dhaus_v = dhaus(&simplified, route, cfg.w1, cfg.w2, cfg.endpoint_tol)?;
    let dense = densify(route, cfg.resample_spacing);
    let interior = if pts.len() > 2 { &pts[1..pts.len() - 1] } else { &pts[..] };
    Ok(Measures {
        cpd: cpd(interior, &dense),
        lcss_distance: lcss_distance(&pts, &dense, cfg.lcss_eps),
        dhaus: dhaus_v,
    })
}

fn relative(baseline: f64, candidate: f64) -> Option<f64> {
    (baseline != 0.0).then(|| (baseline - candidate) / baseline)
}

pub fn compare_routes(
    actual: &Trajectory,
    candidates: &[(String, Vec<Point>)],
    baseline: &str,
    cfg: &CompareConfig,
) -> Result<SimilarityReport, TrajectoryError> {
    let mut measures = BTreeMap::new();
    for (name, route) in candidates {
        measures.insert(name.clone(), measure_route(actual, route, cfg)?);
    }
    let base = *measures
        .get(baseline)
        .ok_or_else(|| TrajectoryError::UnknownRoute(baseline.to_string()))?;
    let closeness = measures
        .iter()
        .map(|(name, m)| {
            (
                name.clone(),
                Closeness {
                    cpd: relative(base.cpd, m.cpd),
                    lcss_distance: relative(base.lcss_distance, m.lcss_distance),
                    dhaus: relative(base.dhaus, m.dhaus),
                },
            )
        })
        .collect();
    Ok(SimilarityReport { baseline: baseline.to_string(), measures, closeness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    #[test]
    fn dp_examples() {
        let t = Trajectory::from_points(&pts(&[(0., 0.), (1., 0.), (2., 0.)])).unwrap();
        assert_eq!(simplify_dp(&t, 0.1).points(), pts(&[(0., 0.), (2., 0.)]));
        let zig = pts(&[(0., 0.), (1., 1.), (2., 0.), (3., 1.), (4., 0.)]);
        assert_eq!(simplify_indices(&zig, 0.5), vec![0, 1, 2, 3, 4]);
        assert_eq!(simplify_indices(&zig, 0.0), vec![0, 1, 2, 3, 4]);
        // A backtracking point on the chord's line is not dropped.
        assert_eq!(simplify_indices(&pts(&[(0., 0.), (2., 0.), (1., 0.)]), 0.0), vec![0, 1, 2]);
    }

    #[test]
    fn dp_keeps_timestamps_and_worst_score() {
        let t = Trajectory::new(
            vec![(0.0, Point::new(0., 0.)), (2.0, Point::new(1., 0.)), (4.0, Point::new(2., 0.))],
            Some(vec![4.0, 2.0]),
        )
        .unwrap();
        let s = simplify_dp(&t, 0.1);
        assert_eq!(s.samples, vec![(0.0, Point::new(0., 0.)), (4.0, Point::new(2., 0.))]);
        assert_eq!(s.scores, Some(vec![2.0]));
    }

    #[test]
    fn cpd_examples() {
        assert_eq!(cpd(&pts(&[(0., 0.)]), &pts(&[(3., 4.)])), 5.0);
        assert_eq!(cpd(&pts(&[(0., 0.), (10., 0.)]), &pts(&[(4., 3.), (20., 20.)])), 5.0);
        assert_eq!(cpd(&pts(&[(1., 1.), (2., 2.)]), &pts(&[(7., 7.), (2., 2.)])), 0.0);
    }

    #[test]
    fn lcss_examples() {
        let a = pts(&[(0., 0.), (1., 0.), (2., 0.)]);
        assert_eq!(lcss_distance(&a, &a, 0.0), 0.0);
        let b = pts(&[(0., 0.1), (5., 5.), (2., 0.1)]);
        assert_eq!(lcss_length(&a, &b, 0.2), 2);
        assert!((lcss_distance(&a, &b, 0.2) - 1.0 / 3.0).abs() < 1e-12);
        let far = pts(&[(100., 100.), (101., 100.)]);
        assert_eq!(lcss_distance(&a, &far, 1.0), 1.0);
    }

    #[test]
    fn dhaus_examples() {
        let a = pts(&[(0., 0.), (1., 0.), (5., 5.)]);
        assert_eq!(dhaus(&a, &a, 1.0, 1.0, 1.0).unwrap(), 0.0);
        let a = pts(&[(0., 0.), (1., 0.), (3., 3.), (4., 3.)]);
        let b = pts(&[(0., 0.), (0., 1.), (3., 3.), (4., 3.)]);
        let want = (2f64.sqrt() + 1.0) / 2.0;
        assert!((dhaus(&a, &b, 1.0, 1.0, 1.0).unwrap() - want).abs() < 1e-9);
        assert!((dhaus(&b, &a, 1.0, 1.0, 1.0).unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn dhaus_translates_within_tolerance_and_rejects_beyond() {
        let a = pts(&[(0., 0.), (10., 0.)]);
        let b = pts(&[(0.5, 0.), (10.5, 0.)]);
        assert_eq!(dhaus(&a, &b, 1.0, 1.0, 1.0).unwrap(), 0.0);
        let c = pts(&[(3., 0.), (10., 0.)]);
        assert!(matches!(dhaus(&a, &c, 1.0, 1.0, 1.0), Err(TrajectoryError::EndpointsNotShared { which: "start", .. })));
    }

    #[test]
    fn dhaus_full_components() {
        let s1 = Segment::new(Point::new(0., 0.), Point::new(10., 0.)).unwrap();
        let s2 = Segment::new(Point::new(2., 1.), Point::new(5., 1.)).unwrap();
        // Perpendicular 1, parallel min(2, 5) = 2, angle 0.
        assert!((dhaus_full(&s1, &s2, 1.0, 1.0, 1.0) - 3.0).abs() < 1e-12);
        let s3 = Segment::new(Point::new(5., 1.), Point::new(2., 1.)).unwrap();
        // Opposite direction: angular part is the whole short length.
        assert!((dhaus_full(&s1, &s3, 0.0, 0.0, 1.0) - 3.0).abs() < 1e-12);
        assert_eq!(dhaus_full(&s1, &s1, 1.0, 1.0, 1.0), 0.0);
    }

    #[test]
    fn csv_round_trip_and_iso_times() {
        let text = "t,x,y,score\n2024-05-01T10:00:00Z,0,0,\n2024-05-01T10:00:02Z,1,0,4\n2024-05-01T10:00:04Z,2,1,3.5\n";
        let t = Trajectory::read_csv(text.as_bytes()).unwrap();
        assert_eq!(t.samples.len(), 3);
        assert_eq!(t.samples[1].0 - t.samples[0].0, 2.0);
        assert_eq!(t.scores, Some(vec![4.0, 3.5]));
        let again = Trajectory::read_csv(t.write_csv().as_bytes()).unwrap();
        assert_eq!(again, t);
        let epoch = Trajectory::read_csv("t,x,y\n0,0,0\n2.5,1,1\n".as_bytes()).unwrap();
        assert_eq!(epoch.scores, None);
        assert!(Trajectory::read_csv("t,x,y\n1,0,0\n1,1,1\n".as_bytes()).is_err());
        assert!(Trajectory::read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn compare_identity_and_baseline() {
        let route = pts(&[(0., 0.), (10., 0.), (10., 10.)]);
        let actual = Trajectory::from_points(&densify(&route, 0.5)).unwrap();
        let worse = pts(&[(0., 0.), (0., 10.), (10., 10.)]);
        let report = compare_routes(
            &actual,
            &[("open".into(), route.clone()), ("base".into(), worse)],
            "base",
            &CompareConfig::default(),
        )
        .unwrap();
        let open = report.measures["open"];
        assert_eq!(open.cpd, 0.0);
        assert_eq!(open.lcss_distance, 0.0);
        assert!(open.dhaus.abs() < 1e-12);
        let c = &report.closeness["open"];
        assert_eq!((c.cpd, c.lcss_distance, c.dhaus), (Some(1.0), Some(1.0), Some(1.0)));
        let b = &report.closeness["base"];
        assert_eq!((b.cpd, b.lcss_distance, b.dhaus), (Some(0.0), Some(0.0), Some(0.0)));
        assert!(matches!(
            compare_routes(&actual, &[], "missing", &CompareConfig::default()),
            Err(TrajectoryError::UnknownRoute(_))
        ));
    }

    fn transform(p: &[Point], angle: f64, dx: f64, dy: f64) -> Vec<Point> {
        let (s, c) = angle.sin_cos();
        p.iter().map(|q| Point::new(c * q.x - s * q.y + dx, s * q.x + c * q.y + dy)).collect()
    }

    fn poly_strategy() -> impl Strategy<Value = Vec<Point>> {
        prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 2..12)
            .prop_map(|v| v.into_iter().map(|(x, y)| Point::new(x, y)).collect())
    }

    proptest! {
        #[test]
        fn cpd_symmetric_and_nonnegative(a in poly_strategy(), b in poly_strategy()) {
            let d = cpd(&a, &b);
            prop_assert!(d >= 0.0);
            prop_assert_eq!(d, cpd(&b, &a));
        }

        #[test]
        fn lcss_bounded_symmetric_monotone(a in poly_strategy(), b in poly_strategy(), e1 in 0.0f64..30.0, e2 in 0.0f64..30.0) {
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            let d = lcss_distance(&a, &b, lo);
            prop_assert!((0.0..=1.0).contains(&d));
            prop_assert_eq!(d, lcss_distance(&b, &a, lo));
            prop_assert!(lcss_distance(&a, &b, hi) <= d);
        }

        #[test]
        fn measures_invariant_under_rigid_motion(
            a in poly_strategy(), b in poly_strategy(),
            angle in 0.0f64..6.3, dx in -1e3f64..1e3, dy in -1e3f64..1e3,
        ) {
            let mut b = b;
            b[0] = a[0];
            *b.last_mut().unwrap() = *a.last().unwrap();
            let ta = transform(&a, angle, dx, dy);
            let tb = transform(&b, angle, dx, dy);
            prop_assert!((cpd(&a, &b) - cpd(&ta, &tb)).abs() < 1e-9);
            let e = 10.0;
            prop_assert!((lcss_distance(&a, &b, e) - lcss_distance(&ta, &tb, e)).abs() < 1e-9);
            let d0 = dhaus(&a, &b, 1.0, 1.0, 1e-6).unwrap();
            let d1 = dhaus(&ta, &tb, 1.0, 1.0, 1e-6).unwrap();
            prop_assert!((d0 - d1).abs() < 1e-9 * d0.max(1.0));
        }

        #[test]
        fn dhaus_scales_linearly(a in poly_strategy(), b in poly_strategy(), k in 0.1f64..10.0) {
            let mut b = b;
            b[0] = a[0];
            *b.last_mut().unwrap() = *a.last().unwrap();
            let scale = |v: &[Point]| v.iter().map(|p| Point::new(p.x * k, p.y * k)).collect::<Vec<_>>();
            let d = dhaus(&a, &b, 1.0, 1.0, 1e-6).unwrap();
            let ds = dhaus(&scale(&a), &scale(&b), 1.0, 1.0, 1e-6).unwrap();
            prop_assert!((ds - k * d).abs() < 1e-9 * ds.max(1.0));
        }

        #[test]
        fn dp_bound_and_idempotence(a in poly_strategy(), tol in 0.0f64..10.0) {
            let idx = simplify_indices(&a, tol);
            prop_assert_eq!(idx[0], 0);
            prop_assert_eq!(*idx.last().unwrap(), a.len() - 1);
            for w in idx.windows(2) {
                if a[w[0]] == a[w[1]] {
                    continue;
                }
                let chord = Segment { a: a[w[0]], b: a[w[1]] };
                for k in (w[0] + 1)..w[1] {
                    prop_assert!(chord.distance_to_point(&a[k]) <= tol + 1e-12);
                }
            }
            let once: Vec<Point> = simplify_indices(&a, 0.0).into_iter().map(|k| a[k]).collect();
            let twice: Vec<Point> = simplify_indices(&once, 0.0).into_iter().map(|k| once[k]).collect();
            prop_assert_eq!(once, twice);
        }
    }
}
