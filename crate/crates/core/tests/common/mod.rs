//! Fixtures shared by the integration tests: seeded random scenes and an
//! independent fine-grid shortest-path oracle.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use openarea::geometry::{point_in_polygon, point_in_ring, segment_within_area, Containment, Mbr, Point, Ring, Segment};
use openarea::scene::{FeatureField, FieldKind, SceneModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub fn ring(pts: &[(f64, f64)]) -> Ring {
    Ring::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
}

pub fn neutral_fields() -> Vec<FeatureField> {
    FieldKind::ALL.iter().map(|&k| FeatureField::new(k, k.fallback_default())).collect()
}

pub fn simple_scene(outer: &[(f64, f64)], holes: &[&[(f64, f64)]]) -> SceneModel {
    SceneModel::from_parts(
        vec![("a".into(), ring(outer))],
        holes.iter().enumerate().map(|(k, h)| (format!("o{k}"), ring(h))).collect(),
        vec![],
        vec![],
        neutral_fields(),
    )
    .unwrap()
}

pub struct RandomScene {
    pub scene: SceneModel,
    pub s: Point,
    pub t: Point,
    /// Every obstacle is an axis-aligned rectangle.
    pub rectangles: bool,
    pub convex_area: bool,
}

impl RandomScene {
    pub fn obstacles(&self) -> usize {
        self.scene.obstacles.len()
    }
}

fn convex_ring(rng: &mut ChaCha8Rng) -> Vec<Point> {
    let n = rng.gen_range(3..=200);
    let (a, b) = (rng.gen_range(40.0..80.0), rng.gen_range(30.0..60.0));
    let step = 2.0 * PI / n as f64;
    (0..n)
        .map(|k| {
            let th = k as f64 * step + rng.gen_range(0.0..0.3) * step;
            Point::new(100.0 + a * th.cos(), 100.0 + b * th.sin())
        })
        .collect()
}

fn notch_positions(rng: &mut ChaCha8Rng, width: f64) -> Vec<(f64, f64)> {
    let k = rng.gen_range(0..=8);
    let slots = ((width - 10.0) / 3.0) as usize;
    let mut picks: Vec<usize> = rand::seq::index::sample(rng, slots, (2 * k).min(slots)).into_vec();
    picks.sort_unstable();
    picks.chunks_exact(2).map(|c| (5.0 + 3.0 * c[0] as f64, 5.0 + 3.0 * c[1] as f64)).collect()
}

fn rectilinear_ring(rng: &mut ChaCha8Rng) -> Vec<Point> {
    let w = rng.gen_range(80.0..140.0f64).round();
    let h = rng.gen_range(60.0..100.0f64).round();
    let mut v = vec![Point::new(0.0, 0.0)];
    for (a, b) in notch_positions(rng, w) {
        let d = rng.gen_range(5.0..0.3 * h);
        v.extend([Point::new(a, 0.0), Point::new(a, d), Point::new(b, d), Point::new(b, 0.0)]);
    }
    v.push(Point::new(w, 0.0));
    v.push(Point::new(w, h));
    let mut top = notch_positions(rng, w);
    top.reverse();
    for (a, b) in top {
        let d = rng.gen_range(5.0..0.3 * h);
        v.extend([Point::new(b, h), Point::new(b, h - d), Point::new(a, h - d), Point::new(a, h)]);
    }
    v.push(Point::new(0.0, h));
    v
}

fn random_obstacle(rng: &mut ChaCha8Rng, m: &Mbr, rectangles: bool) -> Vec<Point> {
    let c = Point::new(rng.gen_range(m.min.x..m.max.x), rng.gen_range(m.min.y..m.max.y));
    let (hw, hh) = (rng.gen_range(1.5..7.5), rng.gen_range(1.5..7.5));
    if rectangles {
        return vec![
            Point::new(c.x - hw, c.y - hh),
            Point::new(c.x + hw, c.y - hh),
            Point::new(c.x + hw, c.y + hh),
            Point::new(c.x - hw, c.y + hh),
        ];
    }
    let rot = rng.gen_range(0.0..PI);
    let local: Vec<(f64, f64)> = if rng.gen_bool(0.5) {
        vec![(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)]
    } else {
        vec![(-hw, -hh), (hw, -hh), (rng.gen_range(-hw..hw), hh)]
    };
    local
        .into_iter()
        .map(|(x, y)| Point::new(c.x + x * rot.cos() - y * rot.sin(), c.y + x * rot.sin() + y * rot.cos()))
        .collect()
}

fn clearance(rings: &[&Ring], p: &Point) -> f64 {
    rings.iter().map(|r| r.distance_to_point(p)).fold(f64::INFINITY, f64::min)
}

/// Seeded scene: even seeds give a convex area with up to 200 vertices, odd
/// seeds a rectilinear area with rectangular notches. Up to five obstacles,
/// axis-aligned rectangles on every other pair of seeds.
pub fn random_scene(seed: u64) -> RandomScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let convex_area = seed % 2 == 0;
    let outer = Ring::new(if convex_area { convex_ring(&mut rng) } else { rectilinear_ring(&mut rng) }).unwrap();
    let rectangles = (seed / 2) % 2 == 0;
    let m = outer.mbr();
    let wanted = rng.gen_range(0..=5);
    let mut obstacles: Vec<Ring> = Vec::new();
    let mut attempts = 0;
    while obstacles.len() < wanted && attempts < 2000 {
        attempts += 1;
        let Ok(cand) = Ring::new(random_obstacle(&mut rng, &m, rectangles)) else { continue };
        let box_ = cand.mbr().expanded(2.0);
        let inside = cand
            .vertices()
            .iter()
            .all(|p| point_in_ring(p, &outer, 1e-9) == Containment::Inside && outer.distance_to_point(p) >= 2.0);
        let clear_of_edges = outer.edges().all(|e| !box_.intersects_segment(&e));
        let apart = obstacles.iter().all(|o| !o.mbr().expanded(2.0).intersects(&box_));
        if inside && clear_of_edges && apart {
            obstacles.push(cand);
        }
    }
    let scene = SceneModel::from_parts(
        vec![("area".into(), outer.clone())],
        obstacles.iter().enumerate().map(|(k, r)| (format!("o{k}"), r.clone())).collect(),
        vec![],
        vec![],
        neutral_fields(),
    )
    .unwrap();

    let h = scene.diameter() / 500.0;
    let rings: Vec<&Ring> = std::iter::once(&outer).chain(obstacles.iter()).collect();
    let sample = |rng: &mut ChaCha8Rng| loop {
        let p = Point::new(rng.gen_range(m.min.x..m.max.x), rng.gen_range(m.min.y..m.max.y));
        if scene.locate(&p) == Some(0) && scene.obstacle_at(&p).is_none() && clearance(&rings, &p) >= 4.0 * h {
            return p;
        }
    };
    let s = sample(&mut rng);
    let mut t = sample(&mut rng);
    for _ in 0..200 {
        if s.distance(&t) >= 0.3 * scene.diameter() {
            break;
        }
        t = sample(&mut rng);
    }
    RandomScene { scene, s, t, rectangles, convex_area }
}

/// Every leg of `pts` lies in the closed traversable space of `area`.
pub fn polyline_valid(scene: &SceneModel, area: usize, pts: &[Point]) -> bool {
    pts.windows(2).all(|w| match Segment::new(w[0], w[1]) {
        Ok(s) => segment_within_area(&s, &scene.areas[area].polygon, 1e-9),
        Err(_) => true,
    })
}

pub fn polyline_length(pts: &[Point]) -> f64 {
    pts.windows(2).map(|w| w[0].distance(&w[1])).sum()
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Length of the shortest 8-connected path on a lattice of spacing
/// `diameter / 500`. Lattice nodes closer than 1.5 spacings to any boundary
/// are masked out, so every lattice move stays in free space. The terminals
/// join lattice nodes within three spacings that they see directly.
pub fn grid_shortest(scene: &SceneModel, area: usize, s: Point, t: Point) -> Option<f64> {
    let poly = &scene.areas[area].polygon;
    let h = scene.diameter() / 500.0;
    let m = poly.mbr();
    let nx = (m.width() / h).floor() as usize + 1;
    let ny = (m.height() / h).floor() as usize + 1;
    let at = |i: usize, j: usize| Point::new(m.min.x + i as f64 * h, m.min.y + j as f64 * h);
    let clear = 1.5 * h;

    let mut blocked = vec![false; nx * ny];
    for e in poly.rings().flat_map(|r| r.edges()) {
        let b = e.mbr().expanded(clear);
        let i0 = ((b.min.x - m.min.x) / h).floor().max(0.0) as usize;
        let j0 = ((b.min.y - m.min.y) / h).floor().max(0.0) as usize;
        let i1 = (((b.max.x - m.min.x) / h).ceil() as usize).min(nx - 1);
        let j1 = (((b.max.y - m.min.y) / h).ceil() as usize).min(ny - 1);
        for j in j0..=j1 {
            for i in i0..=i1 {
                if e.distance_to_point(&at(i, j)) <= clear {
                    blocked[j * nx + i] = true;
                }
            }
        }
    }
    let free: Vec<bool> = (0..nx * ny)
        .into_par_iter()
        .map(|k| !blocked[k] && point_in_polygon(&at(k % nx, k / nx), poly, 1e-9) == Containment::Inside)
        .collect();

    let source = nx * ny;
    let target = source + 1;
    let attach = |p: Point| -> Vec<(usize, f64)> {
        let (ci, cj) = (((p.x - m.min.x) / h).round() as i64, ((p.y - m.min.y) / h).round() as i64);
        let mut out = Vec::new();
        for dj in -3..=3 {
            for di in -3..=3 {
                let (i, j) = (ci + di, cj + dj);
                if i < 0 || j < 0 || i >= nx as i64 || j >= ny as i64 {
                    continue;
                }
                let k = j as usize * nx + i as usize;
                let q = at(i as usize, j as usize);
                if free[k] && q.distance(&p) <= 3.0 * h {
                    let ok = Segment::new(p, q).map_or(true, |sg| segment_within_area(&sg, poly, 1e-9));
                    if ok {
                        out.push((k, p.distance(&q)));
                    }
                }
            }
        }
        out
    };
    let from_s = attach(s);
    let into_t: Vec<(usize, f64)> = attach(t);
    let mut to_t = vec![f64::INFINITY; nx * ny];
    for &(k, d) in &into_t {
        to_t[k] = d;
    }

    let mut dist = vec![f64::INFINITY; nx * ny + 2];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry(0.0, source));
    let diag = h * 2f64.sqrt();
    while let Some(Entry(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        if u == target {
            return Some(d);
        }
        let mut relax = |v: usize, w: f64, heap: &mut BinaryHeap<Entry>| {
            if d + w < dist[v] {
                dist[v] = d + w;
                heap.push(Entry(d + w, v));
            }
        };
        if u == source {
            for &(k, w) in &from_s {
                relax(k, w, &mut heap);
            }
            continue;
        }
        if to_t[u].is_finite() {
            relax(target, to_t[u], &mut heap);
        }
        let (i, j) = ((u % nx) as i64, (u / nx) as i64);
        for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)] {
            let (a, b) = (i + di, j + dj);
            if a < 0 || b < 0 || a >= nx as i64 || b >= ny as i64 {
                continue;
            }
            let v = b as usize * nx + a as usize;
            if free[v] {
                relax(v, if di != 0 && dj != 0 { diag } else { h }, &mut heap);
            }
        }
    }
    None
}
