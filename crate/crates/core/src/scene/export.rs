//! GeoJSON output for scenes, graphs and routes. Coordinates are planar
//! meters rounded to 1e-9; objects are emitted in a fixed order.

use serde_json::{json, Map, Value};

use super::SceneModel;
use crate::geometry::{Point, Ring};
use crate::route::RouteResult;
use crate::visibility::VisibilityGraph;

pub fn round_coord(v: f64) -> f64 {
    let r = (v * 1e9).round() / 1e9;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn position(p: &Point) -> Value {
    json!([round_coord(p.x), round_coord(p.y)])
}

fn closed_ring(r: &Ring) -> Value {
    let mut v: Vec<Value> = r.vertices().iter().map(position).collect();
    v.push(position(&r.vertices()[0]));
    Value::Array(v)
}

fn feature(geometry: Value, properties: Map<String, Value>) -> Value {
    json!({"type": "Feature", "geometry": geometry, "properties": properties})
}

fn props(pairs: &[(&str, Value)]) -> Map<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn collection(features: Vec<Value>, extra: &[(&str, Value)]) -> Value {
    let mut root = props(extra);
    root.insert("type".into(), json!("FeatureCollection"));
    root.insert("features".into(), Value::Array(features));
    Value::Object(root)
}

/// Scene in the input schema, always in local meters.
pub fn export_scene(scene: &SceneModel) -> Value {
    let mut features = Vec::new();
    for a in &scene.areas {
        features.push(feature(
            json!({"type": "Polygon", "coordinates": [closed_ring(a.polygon.outer())]}),
            props(&[("role", json!("area")), ("area_id", json!(a.id))]),
        ));
    }
    for o in &scene.obstacles {
        let mut p = props(&[("role", json!("obstacle")), ("obstacle_id", json!(o.id))]);
        for (k, v) in &o.attributes {
            p.insert(k.clone(), v.clone());
        }
        features.push(feature(json!({"type": "Polygon", "coordinates": [closed_ring(&o.boundary)]}), p));
    }
    for g in &scene.gates {
        features.push(feature(
            json!({"type": "Point", "coordinates": position(&g.center)}),
            props(&[("role", json!("gate")), ("gate_id", json!(g.id))]),
        ));
    }
    for c in &scene.connectors {
        features.push(feature(
            json!({"type": "LineString", "coordinates": [position(&c.segment.a), position(&c.segment.b)]}),
            props(&[("role", json!("connector")), ("connector_id", json!(c.id))]),
        ));
    }
    let mut defaults = Map::new();
    for f in &scene.fields {
        defaults.insert(f.kind.name().into(), json!(f.default));
        for z in &f.zones {
            features.push(feature(
                json!({"type": "Polygon", "coordinates": [closed_ring(&z.ring)]}),
                props(&[
                    ("role", json!("zone")),
                    ("zone_id", json!(z.id)),
                    ("field", json!(f.kind.name())),
                    ("value", json!(z.value)),
                ]),
            ));
        }
    }
    collection(features, &[("crs", json!("local-m")), ("defaults", Value::Object(defaults))])
}

/// Nodes as points, links as two-point lines carrying length and weight.
pub fn export_graph(g: &VisibilityGraph) -> Value {
    let mut features = Vec::new();
    for n in &g.nodes {
        features.push(feature(
            json!({"type": "Point", "coordinates": position(&n.point)}),
            props(&[("role", json!("node")), ("node_id", json!(n.id)), ("kind", json!(n.kind.name()))]),
        ));
    }
    for l in &g.links {
        features.push(feature(
            json!({"type": "LineString", "coordinates": [position(&l.geometry.a), position(&l.geometry.b)]}),
            props(&[
                ("role", json!("link")),
                ("from", json!(l.from)),
                ("to", json!(l.to)),
                ("length", json!(round_coord(l.length))),
                ("weight", json!(round_coord(l.weight))),
            ]),
        ));
    }
    collection(features, &[("crs", json!("local-m"))])
}

/// The route as a single line feature with its summary properties.
pub fn export_route(r: &RouteResult) -> Value {
    let coords: Vec<Value> = r.polyline.iter().map(position).collect();
    let f = feature(
        json!({"type": "LineString", "coordinates": coords}),
        props(&[
            ("role", json!("route")),
            ("total_cost", json!(round_coord(r.total_cost))),
            ("total_length_m", json!(round_coord(r.total_length))),
            ("algorithm", json!(r.algorithm.name())),
            ("iterations", json!(r.iterations)),
            ("gates_used", json!(r.gates_used)),
            ("fallback_used", json!(r.fallback_used)),
        ]),
    );
    collection(vec![f], &[("crs", json!("local-m"))])
}
