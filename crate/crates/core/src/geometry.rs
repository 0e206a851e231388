//! Planar geometric primitives and predicates.
//!
//! Coordinates are projected meters. Two tolerance scales are used: a
//! predicate tolerance ([`PREDICATE_EPS`]) for orientation tests and a
//! boundary-contact tolerance ([`BOUNDARY_EPS`]) for deciding whether a point
//! sits on a ring.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Orientation / crossing tolerance, meters.
pub const PREDICATE_EPS: f64 = 1e-9;
/// Distance under which a point counts as lying on a boundary, meters.
pub const BOUNDARY_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("non-finite coordinate ({x}, {y})")]
    NonFinite { x: f64, y: f64 },
    #[error("zero-length segment at ({x}, {y})")]
    ZeroLengthSegment { x: f64, y: f64 },
    #[error("degenerate ring: {0}")]
    DegenerateRing(String),
    #[error("ring is self-intersecting near ({x}, {y})")]
    SelfIntersectingRing { x: f64, y: f64 },
    #[error("hole {index} is not strictly inside the outer ring")]
    HoleOutsideOuter { index: usize },
    #[error("holes {first} and {second} overlap or touch")]
    HolesOverlap { first: usize, second: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    /// Unchecked constructor for coordinates produced by internal arithmetic.
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Checked constructor used at every ingestion boundary.
    pub fn try_new(x: f64, y: f64) -> Result<Self, GeometryError> {
        if x.is_finite() && y.is_finite() {
            Ok(Point { x, y })
        } else {
            Err(GeometryError::NonFinite { x, y })
        }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn sub(&self, other: &Point) -> (f64, f64) {
        (self.x - other.x, self.y - other.y)
    }

    pub fn lerp(&self, other: &Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }

    pub fn approx_eq(&self, other: &Point, eps: f64) -> bool {
        self.distance(other) <= eps
    }
}

/// Twice the signed area of triangle `abc`; positive when `c` is left of `a → b`.
#[inline]
pub fn orient(a: &Point, b: &Point, c: &Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Result<Self, GeometryError> {
        if a.distance(&b) <= PREDICATE_EPS {
            return Err(GeometryError::ZeroLengthSegment { x: a.x, y: a.y });
        }
        Ok(Segment { a, b })
    }

    pub fn length(&self) -> f64 {
        self.a.distance(&self.b)
    }

    pub fn point_at(&self, t: f64) -> Point {
        self.a.lerp(&self.b, t)
    }

    pub fn reversed(&self) -> Segment {
        Segment { a: self.b, b: self.a }
    }

    pub fn mbr(&self) -> Mbr {
        Mbr::of_points([self.a, self.b]).expect("segment has two points")
    }

    /// Signed distance of `p` from the supporting line, positive on the left.
    fn signed_distance(&self, p: &Point) -> f64 {
        orient(&self.a, &self.b, p) / self.length()
    }

    /// Parameter of the orthogonal projection of `p`, clamped to `[0, 1]`.
    pub fn project(&self, p: &Point) -> f64 {
        let (dx, dy) = self.b.sub(&self.a);
        let (px, py) = p.sub(&self.a);
        ((px * dx + py * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0)
    }

    pub fn distance_to_point(&self, p: &Point) -> f64 {
        self.point_at(self.project(p)).distance(p)
    }

    /// Parameter along `self` where the supporting lines of `self` and
    /// `other` meet, if they are not parallel.
    pub fn line_intersection_param(&self, other: &Segment) -> Option<f64> {
        let (rx, ry) = self.b.sub(&self.a);
        let (sx, sy) = other.b.sub(&other.a);
        let denom = rx * sy - ry * sx;
        if denom.abs() <= f64::EPSILON * (rx.hypot(ry) * sx.hypot(sy)) {
            return None;
        }
        let (qx, qy) = other.a.sub(&self.a);
        Some((qx * sy - qy * sx) / denom)
    }
}

fn sign_with_tolerance(v: f64, eps: f64) -> i8 {
    if v > eps {
        1
    } else if v < -eps {
        -1
    } else {
        0
    }
}

/// True iff the interiors of the two segments cross at a single point.
///
/// Endpoint contact, T-junctions and collinear overlap are not proper
/// intersections.
pub fn segments_properly_intersect(s1: &Segment, s2: &Segment, eps: f64) -> bool {
    let d1 = sign_with_tolerance(s1.signed_distance(&s2.a), eps);
    let d2 = sign_with_tolerance(s1.signed_distance(&s2.b), eps);
    let d3 = sign_with_tolerance(s2.signed_distance(&s1.a), eps);
    let d4 = sign_with_tolerance(s2.signed_distance(&s1.b), eps);
    d1 * d2 < 0 && d3 * d4 < 0
}

/// Minimum distance between two segments.
pub fn segment_distance(s1: &Segment, s2: &Segment) -> f64 {
    if segments_properly_intersect(s1, s2, 0.0) {
        return 0.0;
    }
    s1.distance_to_point(&s2.a)
        .min(s1.distance_to_point(&s2.b))
        .min(s2.distance_to_point(&s1.a))
        .min(s2.distance_to_point(&s1.b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mbr {
    pub min: Point,
    pub max: Point,
}

impl Mbr {
    pub fn of_points<I: IntoIterator<Item = Point>>(points: I) -> Option<Mbr> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut m = Mbr { min: first, max: first };
        for p in it {
            m.min.x = m.min.x.min(p.x);
            m.min.y = m.min.y.min(p.y);
            m.max.x = m.max.x.max(p.x);
            m.max.y = m.max.y.max(p.y);
        }
        Some(m)
    }

    pub fn expanded(&self, margin: f64) -> Mbr {
        Mbr {
            min: Point::new(self.min.x - margin, self.min.y - margin),
            max: Point::new(self.max.x + margin, self.max.y + margin),
        }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    /// Corners in counter-clockwise order starting at `min`.
    pub fn corners(&self) -> [Point; 4] {
        [
            self.min,
            Point::new(self.max.x, self.min.y),
            self.max,
            Point::new(self.min.x, self.max.y),
        ]
    }

    pub fn contains_point(&self, p: &Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn intersects(&self, other: &Mbr) -> bool {
        self.min.x <= other.max.x
            && other.min.x <= self.max.x
            && self.min.y <= other.max.y
            && other.min.y <= self.max.y
    }

    /// Slab (Liang–Barsky) clipping; boundary contact counts as intersection.
    pub fn intersects_segment(&self, s: &Segment) -> bool {
        let (dx, dy) = s.b.sub(&s.a);
        let mut t0 = 0.0_f64;
        let mut t1 = 1.0_f64;
        let checks = [
            (-dx, s.a.x - self.min.x),
            (dx, self.max.x - s.a.x),
            (-dy, s.a.y - self.min.y),
            (dy, self.max.y - s.a.y),
        ];
        for (p, q) in checks {
            if p == 0.0 {
                if q < 0.0 {
                    return false;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
                if t0 > t1 {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Ccw,
    Cw,
}

/// A closed simple ring. The closing edge from the last vertex back to the
/// first is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ring {
    vertices: Vec<Point>,
    mbr: Mbr,
}

impl Ring {
    /// Validates and builds a ring. Consecutive duplicate vertices (and a
    /// repeated closing vertex) are collapsed; degenerate or
    /// self-intersecting rings are rejected.
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        for p in &vertices {
            Point::try_new(p.x, p.y)?;
        }
        let mut collapsed: Vec<Point> = Vec::with_capacity(vertices.len());
        for p in vertices {
            if collapsed.last().is_none_or(|q| !q.approx_eq(&p, PREDICATE_EPS)) {
                collapsed.push(p);
            }
        }
        while collapsed.len() > 1
            && collapsed[0].approx_eq(collapsed.last().unwrap(), PREDICATE_EPS)
        {
            collapsed.pop();
        }
        if collapsed.len() < 3 {
            return Err(GeometryError::DegenerateRing(format!(
                "{} distinct vertices, need at least 3",
                collapsed.len()
            )));
        }
        let mbr = Mbr::of_points(collapsed.iter().copied()).unwrap();
        let ring = Ring { vertices: collapsed, mbr };
        if ring.signed_area().abs() <= PREDICATE_EPS * ring.mbr.diagonal().max(1.0) {
            return Err(GeometryError::DegenerateRing("zero area".into()));
        }
        ring.check_simple()?;
        Ok(ring)
    }

    fn check_simple(&self) -> Result<(), GeometryError> {
        let n = self.vertices.len();
        let edges: Vec<Segment> = self.edges().collect();
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let (ei, ej) = (&edges[i], &edges[j]);
                if adjacent {
                    // Shared vertex; reject a spike that doubles back on itself.
                    let (shared, pi, pj) = if j == i + 1 {
                        (ei.b, ei.a, ej.b)
                    } else {
                        (ei.a, ei.b, ej.a)
                    };
                    let (ax, ay) = pi.sub(&shared);
                    let (bx, by) = pj.sub(&shared);
                    let cross = ax * by - ay * bx;
                    let dot = ax * bx + ay * by;
                    if cross.abs() <= PREDICATE_EPS * ei.length().max(ej.length()) && dot > 0.0
                    {
                        return Err(GeometryError::SelfIntersectingRing { x: shared.x, y: shared.y });
                    }
                    continue;
                }
                if !ei.mbr().expanded(PREDICATE_EPS).intersects(&ej.mbr()) {
                    continue;
                }
                if segment_distance(ei, ej) <= PREDICATE_EPS {
                    return Err(GeometryError::SelfIntersectingRing { x: ei.a.x, y: ei.a.y });
                }
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn mbr(&self) -> Mbr {
        self.mbr
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| Segment {
            a: self.vertices[i],
            b: self.vertices[(i + 1) % n],
        })
    }

    /// Shoelace signed area; positive for counter-clockwise rings.
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        let mut acc = 0.0;
        for i in 0..n {
            let p = &self.vertices[i];
            let q = &self.vertices[(i + 1) % n];
            acc += p.x * q.y - q.x * p.y;
        }
        acc / 2.0
    }

    pub fn orientation(&self) -> Orientation {
        if self.signed_area() > 0.0 {
            Orientation::Ccw
        } else {
            Orientation::Cw
        }
    }

    pub fn reversed(&self) -> Ring {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Ring { vertices, mbr: self.mbr }
    }

    fn oriented(self, want: Orientation) -> Ring {
        if self.orientation() == want {
            self
        } else {
            self.reversed()
        }
    }

    pub fn distance_to_point(&self, p: &Point) -> f64 {
        self.edges()
            .map(|e| e.distance_to_point(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Closest point on the ring boundary to `p`.
    pub fn closest_point(&self, p: &Point) -> Point {
        let mut best = (f64::INFINITY, self.vertices[0]);
        for e in self.edges() {
            let q = e.point_at(e.project(p));
            let d = q.distance(p);
            if d < best.0 {
                best = (d, q);
            }
        }
        best.1
    }

    pub fn contains(&self, p: &Point, eps: f64) -> Containment {
        point_in_ring(p, self, eps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Containment {
    Inside,
    OnBoundary,
    Outside,
}

/// Crossing-number test with an explicit boundary band of width `eps`.
pub fn point_in_ring(p: &Point, ring: &Ring, eps: f64) -> Containment {
    if !ring.mbr.expanded(eps).contains_point(p) {
        return Containment::Outside;
    }
    let mut inside = false;
    let v = &ring.vertices;
    let n = v.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (&v[j], &v[i]);
        let edge = Segment { a: *a, b: *b };
        if edge.distance_to_point(p) <= eps {
            return Containment::OnBoundary;
        }
        if (b.y > p.y) != (a.y > p.y) {
            let x_cross = (a.x - b.x) * (p.y - b.y) / (a.y - b.y) + b.x;
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    if inside {
        Containment::Inside
    } else {
        Containment::Outside
    }
}

/// A polygon with holes, outer ring counter-clockwise and holes clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonWithHoles {
    outer: Ring,
    holes: Vec<Ring>,
}

impl PolygonWithHoles {
    pub fn new(outer: Ring, holes: Vec<Ring>) -> Result<Self, GeometryError> {
        normalize_orientation(outer, holes)
    }

    pub fn outer(&self) -> &Ring {
        &self.outer
    }

    pub fn holes(&self) -> &[Ring] {
        &self.holes
    }

    pub fn rings(&self) -> impl Iterator<Item = &Ring> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }

    pub fn vertex_count(&self) -> usize {
        self.rings().map(Ring::len).sum()
    }

    pub fn mbr(&self) -> Mbr {
        self.outer.mbr
    }
}

/// Validates hole placement and returns the polygon with the outer ring
/// counter-clockwise and every hole clockwise. Idempotent.
pub fn normalize_orientation(
    outer: Ring,
    holes: Vec<Ring>,
) -> Result<PolygonWithHoles, GeometryError> {
    let outer = outer.oriented(Orientation::Ccw);
    let holes: Vec<Ring> = holes.into_iter().map(|h| h.oriented(Orientation::Cw)).collect();
    let outer_edges: Vec<Segment> = outer.edges().collect();
    for (index, hole) in holes.iter().enumerate() {
        let strictly_inside = hole
            .vertices
            .iter()
            .all(|p| point_in_ring(p, &outer, BOUNDARY_EPS) == Containment::Inside);
        let touches = hole.edges().any(|he| {
            outer_edges
                .iter()
                .any(|oe| segment_distance(&he, oe) <= BOUNDARY_EPS)
        });
        if !strictly_inside || touches {
            return Err(GeometryError::HoleOutsideOuter { index });
        }
    }
    for i in 0..holes.len() {
        for j in (i + 1)..holes.len() {
            if rings_overlap(&holes[i], &holes[j]) {
                return Err(GeometryError::HolesOverlap { first: i, second: j });
            }
        }
    }
    Ok(PolygonWithHoles { outer, holes })
}

/// True when two rings touch, cross, or one contains the other.
pub fn rings_overlap(a: &Ring, b: &Ring) -> bool {
    if !a.mbr.expanded(BOUNDARY_EPS).intersects(&b.mbr) {
        return false;
    }
    let edge_contact = a.edges().any(|ea| {
        b.edges()
            .any(|eb| segment_distance(&ea, &eb) <= BOUNDARY_EPS)
    });
    edge_contact
        || point_in_ring(&a.vertices[0], b, BOUNDARY_EPS) != Containment::Outside
        || point_in_ring(&b.vertices[0], a, BOUNDARY_EPS) != Containment::Outside
}

/// `Inside` iff `p` is inside the outer ring and inside no hole;
/// `OnBoundary` iff `p` is within `eps` of any ring edge.
pub fn point_in_polygon(p: &Point, poly: &PolygonWithHoles, eps: f64) -> Containment {
    match point_in_ring(p, &poly.outer, eps) {
        Containment::Outside => return Containment::Outside,
        Containment::OnBoundary => return Containment::OnBoundary,
        Containment::Inside => {}
    }
    for hole in &poly.holes {
        match point_in_ring(p, hole, eps) {
            Containment::Inside => return Containment::Outside,
            Containment::OnBoundary => return Containment::OnBoundary,
            Containment::Outside => {}
        }
    }
    Containment::Inside
}

/// A region is a traversable ring (or the whole plane) minus blocking rings.
struct Region<'a> {
    outer: Option<&'a Ring>,
    blockers: Vec<&'a Ring>,
}

impl Region<'_> {
    fn admits(&self, p: &Point) -> bool {
        if let Some(outer) = self.outer {
            if point_in_ring(p, outer, BOUNDARY_EPS) == Containment::Outside {
                return false;
            }
        }
        self.blockers
            .iter()
            .all(|r| point_in_ring(p, r, BOUNDARY_EPS) != Containment::Inside)
    }

    fn rings(&self) -> impl Iterator<Item = &Ring> {
        self.outer.into_iter().chain(self.blockers.iter().copied())
    }

    /// Full-inclusion test. Proper crossings reject immediately; otherwise
    /// the segment is cut at every parameter where it touches a ring vertex,
    /// and the midpoint of every resulting piece is classified together with
    /// both endpoints. Between consecutive contacts the segment cannot change
    /// sides, so the midpoints decide each piece.
    fn admits_segment(&self, seg: &Segment, eps: f64) -> bool {
        let seg_box = seg.mbr().expanded(BOUNDARY_EPS);
        let mut events: Vec<f64> = Vec::new();
        for ring in self.rings() {
            if !ring.mbr.intersects(&seg_box) {
                continue;
            }
            for edge in ring.edges() {
                if !edge.mbr().intersects(&seg_box) {
                    continue;
                }
                if segments_properly_intersect(seg, &edge, eps) {
                    return false;
                }
                if seg.distance_to_point(&edge.a) <= BOUNDARY_EPS {
                    events.push(seg.project(&edge.a));
                }
            }
        }
        let mut params = vec![0.0, 1.0];
        events.push(0.0);
        events.push(1.0);
        events.sort_by(|a, b| a.total_cmp(b));
        events.dedup_by(|a, b| (*a - *b).abs() <= f64::EPSILON);
        params.extend(events.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        params.into_iter().all(|t| self.admits(&seg.point_at(t)))
    }
}

/// True iff `seg` lies completely inside `poly` (boundary counts as inside).
pub fn segment_within_area(seg: &Segment, poly: &PolygonWithHoles, eps: f64) -> bool {
    Region {
        outer: Some(&poly.outer),
        blockers: poly.holes.iter().collect(),
    }
    .admits_segment(seg, eps)
}

/// True iff `seg` lies inside `outer` and never enters the interior of any
/// ring in `blockers`. Blockers need not be holes of a validated polygon.
pub fn segment_within_ring_avoiding(
    seg: &Segment,
    outer: &Ring,
    blockers: &[&Ring],
    eps: f64,
) -> bool {
    Region {
        outer: Some(outer),
        blockers: blockers.to_vec(),
    }
    .admits_segment(seg, eps)
}

/// True iff `seg` enters the interior of `ring`.
pub fn segment_enters_ring(seg: &Segment, ring: &Ring, eps: f64) -> bool {
    !Region {
        outer: None,
        blockers: vec![ring],
    }
    .admits_segment(seg, eps)
}

/// Smallest parameter along `seg` at which it meets the boundary of `ring`
/// (0 if it starts inside). Used to order collisions along a path.
pub fn first_contact_param(seg: &Segment, ring: &Ring) -> f64 {
    if point_in_ring(&seg.a, ring, BOUNDARY_EPS) == Containment::Inside {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for edge in ring.edges() {
        if segment_distance(seg, &edge) > BOUNDARY_EPS {
            continue;
        }
        let t = match seg.line_intersection_param(&edge) {
            Some(t) => t.clamp(0.0, 1.0),
            None => seg.project(&edge.a).min(seg.project(&edge.b)),
        };
        best = best.min(t);
    }
    if best.is_finite() {
        best
    } else {
        1.0
    }
}

pub fn mbr_of(ring: &Ring) -> Mbr {
    ring.mbr
}

pub fn mbr_intersects_segment(m: &Mbr, s: &Segment) -> bool {
    m.intersects_segment(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn ring(pts: &[(f64, f64)]) -> Ring {
        Ring::new(pts.iter().map(|&(x, y)| p(x, y)).collect()).unwrap()
    }

    fn seg(a: (f64, f64), b: (f64, f64)) -> Segment {
        Segment::new(p(a.0, a.1), p(b.0, b.1)).unwrap()
    }

    fn unit_square() -> Ring {
        ring(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
    }

    fn l_shape() -> PolygonWithHoles {
        PolygonWithHoles::new(
            ring(&[(0., 0.), (2., 0.), (2., 1.), (1., 1.), (1., 2.), (0., 2.)]),
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn rejects_non_finite_points() {
        assert!(Point::try_new(f64::NAN, 0.0).is_err());
        assert!(Point::try_new(0.0, f64::INFINITY).is_err());
        assert!(Point::try_new(1.0, 2.0).is_ok());
    }

    #[test]
    fn rejects_zero_length_segment() {
        assert!(matches!(
            Segment::new(p(1.0, 1.0), p(1.0, 1.0)),
            Err(GeometryError::ZeroLengthSegment { .. })
        ));
    }

    #[test]
    fn ring_collapses_duplicates_and_closing_vertex() {
        let r = ring(&[(0., 0.), (0., 0.), (1., 0.), (1., 1.), (0., 1.), (0., 0.)]);
        assert_eq!(r.len(), 4);
    }

    #[test]
    fn ring_rejects_bowtie_and_degenerate() {
        let bowtie = Ring::new(vec![p(0., 0.), p(2., 2.), p(2., 0.), p(0., 1.)]);
        assert!(matches!(bowtie, Err(GeometryError::SelfIntersectingRing { .. })));
        let flat = Ring::new(vec![p(0., 0.), p(1., 0.), p(2., 0.)]);
        assert!(matches!(flat, Err(GeometryError::DegenerateRing(_))));
        let two = Ring::new(vec![p(0., 0.), p(1., 0.)]);
        assert!(matches!(two, Err(GeometryError::DegenerateRing(_))));
    }

    #[test]
    fn normalize_keeps_already_normalized_polygon() {
        let hole = ring(&[(0.4, 0.4), (0.4, 0.6), (0.6, 0.6), (0.6, 0.4)]);
        assert_eq!(hole.orientation(), Orientation::Cw);
        let poly = normalize_orientation(unit_square(), vec![hole.clone()]).unwrap();
        assert_eq!(poly.outer(), &unit_square());
        assert_eq!(poly.holes()[0], hole);
    }

    #[test]
    fn normalize_flips_cw_outer() {
        let cw = unit_square().reversed();
        assert_eq!(cw.orientation(), Orientation::Cw);
        let poly = normalize_orientation(cw.clone(), vec![]).unwrap();
        assert_eq!(poly.outer().orientation(), Orientation::Ccw);
        let mut before: Vec<_> = cw.vertices().iter().map(|q| (q.x, q.y)).collect();
        let mut after: Vec<_> = poly.outer().vertices().iter().map(|q| (q.x, q.y)).collect();
        before.sort_by(|a, b| a.partial_cmp(b).unwrap());
        after.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(before, after);
    }

    #[test]
    fn normalize_flips_ccw_hole_and_negates_area() {
        let hole = ring(&[(0.4, 0.4), (0.6, 0.4), (0.6, 0.6), (0.4, 0.6)]);
        // Shoelace by hand: 0.2 x 0.2 square counter-clockwise.
        assert!((hole.signed_area() - 0.04).abs() < 1e-12);
        let poly = normalize_orientation(unit_square(), vec![hole]).unwrap();
        assert!((poly.holes()[0].signed_area() + 0.04).abs() < 1e-12);
    }

    #[test]
    fn normalize_rejects_hole_outside_or_touching() {
        let outside = ring(&[(2., 2.), (3., 2.), (3., 3.)]);
        assert!(matches!(
            normalize_orientation(unit_square(), vec![outside]),
            Err(GeometryError::HoleOutsideOuter { index: 0 })
        ));
        let touching = ring(&[(0., 0.4), (0.5, 0.4), (0.5, 0.6)]);
        assert!(matches!(
            normalize_orientation(unit_square(), vec![touching]),
            Err(GeometryError::HoleOutsideOuter { index: 0 })
        ));
        let big = ring(&[(0., 0.), (10., 0.), (10., 10.), (0., 10.)]);
        let a = ring(&[(1., 1.), (3., 1.), (3., 3.), (1., 3.)]);
        let b = ring(&[(2., 2.), (4., 2.), (4., 4.), (2., 4.)]);
        assert!(matches!(
            normalize_orientation(big, vec![a, b]),
            Err(GeometryError::HolesOverlap { .. })
        ));
    }

    #[test]
    fn point_in_polygon_cases() {
        let square = PolygonWithHoles::new(unit_square(), vec![]).unwrap();
        assert_eq!(point_in_polygon(&p(0.5, 0.5), &square, 1e-9), Containment::Inside);
        assert_eq!(point_in_polygon(&p(2.0, 2.0), &square, 1e-9), Containment::Outside);
        assert_eq!(point_in_polygon(&p(1.0, 0.5), &square, 1e-9), Containment::OnBoundary);
        let holed = PolygonWithHoles::new(
            ring(&[(0., 0.), (10., 0.), (10., 10.), (0., 10.)]),
            vec![ring(&[(4., 4.), (6., 4.), (6., 6.), (4., 6.)])],
        )
        .unwrap();
        assert_eq!(point_in_polygon(&p(5.0, 5.0), &holed, 1e-9), Containment::Outside);
        assert_eq!(point_in_polygon(&p(4.0, 5.0), &holed, 1e-9), Containment::OnBoundary);
    }

    #[test]
    fn proper_intersection_cases() {
        assert!(segments_properly_intersect(
            &seg((0., 0.), (1., 1.)),
            &seg((0., 1.), (1., 0.)),
            1e-9
        ));
        assert!(!segments_properly_intersect(
            &seg((0., 0.), (1., 0.)),
            &seg((1., 0.), (2., 0.)),
            1e-9
        ));
        assert!(segments_properly_intersect(
            &seg((0., 0.), (2., 0.)),
            &seg((1., -1.), (1., 1.)),
            1e-9
        ));
        // T-junction and collinear overlap are contacts, not crossings.
        assert!(!segments_properly_intersect(
            &seg((0., 0.), (2., 0.)),
            &seg((1., 0.), (1., 1.)),
            1e-9
        ));
        assert!(!segments_properly_intersect(
            &seg((0., 0.), (2., 0.)),
            &seg((1., 0.), (3., 0.)),
            1e-9
        ));
    }

    #[test]
    fn proper_intersection_matches_orientation_oracle() {
        // Four orientation triples for (0,0)-(2,0) x (1,-1)-(1,1).
        let (a, b, c, d) = (p(0., 0.), p(2., 0.), p(1., -1.), p(1., 1.));
        let o1 = orient(&a, &b, &c);
        let o2 = orient(&a, &b, &d);
        let o3 = orient(&c, &d, &a);
        let o4 = orient(&c, &d, &b);
        assert!(o1 * o2 < 0.0 && o3 * o4 < 0.0);
    }

    #[test]
    fn segment_within_area_cases() {
        let square = PolygonWithHoles::new(unit_square(), vec![]).unwrap();
        assert!(segment_within_area(&seg((0.1, 0.1), (0.9, 0.9)), &square, 1e-9));
        assert!(segment_within_area(&seg((0., 0.), (1., 0.)), &square, 1e-9));
        assert!(segment_within_area(&seg((0., 0.), (1., 1.)), &square, 1e-9));
        let l = l_shape();
        // Grazes the reflex vertex (1,1) without entering the notch.
        assert!(segment_within_area(&seg((1.5, 0.5), (0.5, 1.5)), &l, 1e-9));
        assert!(!segment_within_area(&seg((1.5, 0.75), (0.75, 1.5)), &l, 1e-9));
        assert!(segment_within_area(&seg((1.5, 0.5), (1.0, 1.0)), &l, 1e-9));
        // Through the reflex vertex and out the other side.
        assert!(!segment_within_area(&seg((0.5, 0.5), (1.5, 1.5)), &l, 1e-9));
        // Collinear with boundary edges on both sides of the reflex vertex.
        assert!(segment_within_area(&seg((2.0, 1.0), (1.0, 1.0)), &l, 1e-9));
        assert!(segment_within_area(&seg((2.0, 1.0), (0.5, 1.0)), &l, 1e-9));
    }

    #[test]
    fn l_shape_chords_agree_with_dense_sampling() {
        let l = l_shape();
        for s in [
            seg((1.5, 0.5), (0.5, 1.5)),
            seg((1.5, 0.75), (0.75, 1.5)),
            seg((1.9, 0.1), (0.1, 1.9)),
            seg((1.5, 0.9), (0.9, 1.5)),
        ] {
            // Sample spacing well under 1e-3 of the chord length.
            let n = 2000;
            let dense = (0..=n).all(|k| {
                point_in_polygon(&s.point_at(k as f64 / n as f64), &l, 1e-9) != Containment::Outside
            });
            assert_eq!(dense, segment_within_area(&s, &l, 1e-9), "{s:?}");
        }
    }

    #[test]
    fn hole_diagonal_is_blocked() {
        let holed = PolygonWithHoles::new(
            ring(&[(0., 0.), (10., 0.), (10., 10.), (0., 10.)]),
            vec![ring(&[(4., 4.), (6., 4.), (6., 6.), (4., 6.)])],
        )
        .unwrap();
        assert!(!segment_within_area(&seg((4., 4.), (6., 6.)), &holed, 1e-9));
        assert!(segment_within_area(&seg((4., 4.), (6., 4.)), &holed, 1e-9));
        assert!(!segment_within_area(&seg((1., 5.), (9., 5.)), &holed, 1e-9));
    }

    #[test]
    fn mbr_cases() {
        let r = ring(&[(1., 1.), (3., 1.), (2., 4.)]);
        let m = mbr_of(&r);
        assert_eq!(m.min, p(1., 1.));
        assert_eq!(m.max, p(3., 4.));
        assert!(mbr_intersects_segment(&m, &seg((0., 0.), (5., 5.))));
        assert!(!mbr_intersects_segment(&m, &seg((0., 5.), (1., 5.))));
        // Grazing contact with a corner counts.
        assert!(mbr_intersects_segment(&m, &seg((0., 2.), (1., 1.))));
    }

    fn star_ring(radii: &[f64], cx: f64, cy: f64) -> Ring {
        let n = radii.len();
        let pts = radii
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let a = std::f64::consts::TAU * i as f64 / n as f64;
                p(cx + r * a.cos(), cy + r * a.sin())
            })
            .collect();
        Ring::new(pts).unwrap()
    }

    fn winding_number(q: &Point, ring: &Ring) -> i32 {
        let v = ring.vertices();
        let n = v.len();
        let mut wn = 0;
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            if a.y <= q.y {
                if b.y > q.y && orient(&a, &b, q) > 0.0 {
                    wn += 1;
                }
            } else if b.y <= q.y && orient(&a, &b, q) < 0.0 {
                wn -= 1;
            }
        }
        wn
    }

    fn convex_ring(n: usize, angles: &[f64], rx: f64, ry: f64) -> Ring {
        let mut a: Vec<f64> = angles[..n].to_vec();
        a.sort_by(|x, y| x.total_cmp(y));
        a.dedup_by(|x, y| (*x - *y).abs() < 1e-3);
        let pts = a.iter().map(|t| p(rx * t.cos(), ry * t.sin())).collect();
        Ring::new(pts).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn pip_agrees_with_winding_number(
            radii in proptest::collection::vec(2.0f64..10.0, 5..16),
            hole_radii in proptest::collection::vec(0.3f64..1.2, 3..8),
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let outer = star_ring(&radii, 0.0, 0.0);
            let hole = star_ring(&hole_radii, 0.0, 0.0);
            let poly = PolygonWithHoles::new(outer, vec![hole]).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..10_000 {
                let q = p(rng.gen_range(-11.0..11.0), rng.gen_range(-11.0..11.0));
                let near = poly.rings().any(|r| r.distance_to_point(&q) <= 1e-6);
                let oracle_inside = winding_number(&q, poly.outer()) != 0
                    && winding_number(&q, &poly.holes()[0]) == 0;
                let got = point_in_polygon(&q, &poly, 1e-6);
                if near {
                    continue;
                }
                prop_assert_eq!(got == Containment::Inside, oracle_inside);
            }
        }

        #[test]
        fn normalize_is_idempotent(radii in proptest::collection::vec(1.0f64..5.0, 3..12), flip in any::<bool>()) {
            let r = star_ring(&radii, 0.0, 0.0);
            let r = if flip { r.reversed() } else { r };
            let hole = star_ring(&[0.3, 0.3, 0.3, 0.3], 0.0, 0.0);
            let once = normalize_orientation(r, vec![hole]).unwrap();
            let twice = normalize_orientation(once.outer().clone(), once.holes().to_vec()).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn within_area_symmetric_under_reversal(
            radii in proptest::collection::vec(1.0f64..6.0, 4..12),
            ax in -6.0f64..6.0, ay in -6.0f64..6.0, bx in -6.0f64..6.0, by in -6.0f64..6.0,
        ) {
            let poly = PolygonWithHoles::new(star_ring(&radii, 0.0, 0.0), vec![]).unwrap();
            if let Ok(s) = Segment::new(p(ax, ay), p(bx, by)) {
                prop_assert_eq!(
                    segment_within_area(&s, &poly, 1e-9),
                    segment_within_area(&s.reversed(), &poly, 1e-9)
                );
            }
        }

        #[test]
        fn convex_polygon_sees_all_interior_pairs(
            angles in proptest::collection::vec(0.0f64..std::f64::consts::TAU, 12),
            n in 3usize..12,
            u in proptest::collection::vec(0.05f64..0.95, 8),
        ) {
            let r = convex_ring(n.max(3), &angles, 5.0, 3.0);
            let poly = PolygonWithHoles::new(r.clone(), vec![]).unwrap();
            // Interior points as convex combinations of vertices.
            let v = r.vertices();
            let interior = |w: f64, k: usize| {
                let a = v[k % v.len()];
                let b = v[(k + 1) % v.len()];
                let c = v[(k + 2) % v.len()];
                let m = p((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0);
                m.lerp(&b, w)
            };
            let pts: Vec<Point> = u.iter().enumerate().map(|(k, w)| interior(*w, k)).collect();
            for i in 0..pts.len() {
                for j in (i + 1)..pts.len() {
                    if let Ok(s) = Segment::new(pts[i], pts[j]) {
                        prop_assert!(segment_within_area(&s, &poly, 1e-9));
                    }
                }
            }
        }

        #[test]
        fn mbr_has_no_false_negatives(
            ax in -5.0f64..5.0, ay in -5.0f64..5.0, bx in -5.0f64..5.0, by in -5.0f64..5.0,
            x0 in -3.0f64..0.0, y0 in -3.0f64..0.0, w in 0.1f64..3.0, h in 0.1f64..3.0,
        ) {
            let m = Mbr { min: p(x0, y0), max: p(x0 + w, y0 + h) };
            if let Ok(s) = Segment::new(p(ax, ay), p(bx, by)) {
                let c = m.corners();
                let hits_edge = (0..4).any(|i| {
                    segments_properly_intersect(&s, &Segment { a: c[i], b: c[(i + 1) % 4] }, 1e-9)
                });
                if hits_edge {
                    prop_assert!(mbr_intersects_segment(&m, &s));
                }
            }
        }
    }
}
