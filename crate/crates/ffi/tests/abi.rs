use std::ffi::{CStr, CString};
use std::ptr;

use openarea_ffi::*;

const SQUARE: &str = r#"{
  "type": "FeatureCollection",
  "features": [
    {"type": "Feature", "properties": {"role": "area", "area_id": "park"},
     "geometry": {"type": "Polygon", "coordinates": [[[0,0],[10,0],[10,10],[0,10],[0,0]]]}},
    {"type": "Feature", "properties": {"role": "obstacle", "obstacle_id": "pond"},
     "geometry": {"type": "Polygon", "coordinates": [[[4,4],[6,4],[6,6],[4,6],[4,4]]]}}
  ]
}"#;

fn last_error() -> String {
    let p = oa_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn load(doc: &str) -> *mut OaScene {
    let c = CString::new(doc).unwrap();
    let mut scene = ptr::null_mut();
    assert_eq!(unsafe { oa_scene_load_geojson(c.as_ptr(), &mut scene) }, OaStatus::Ok);
    assert!(!scene.is_null());
    scene
}

#[test]
fn route_round_trip() {
    let scene = load(SQUARE);
    assert_eq!(unsafe { oa_scene_area_count(scene) }, 1);
    let mut cost = ptr::null_mut();
    let cfg = CString::new(r#"{"c_length": 1, "c_slope": 0, "c_width": 0, "c_surface": 0, "c_weather": 0}"#).unwrap();
    let status = unsafe { oa_cost_model_parse(cfg.as_ptr(), false, &mut cost) };
    assert_eq!(status, OaStatus::Ok, "{}", if status == OaStatus::Ok { String::new() } else { last_error() });

    for alg in [OaAlgorithm::Full, OaAlgorithm::Hierarchical] {
        let mut r = ptr::null_mut();
        assert_eq!(unsafe { oa_route(scene, cost, 1.0, 5.0, 9.0, 5.0, alg, &mut r) }, OaStatus::Ok);
        let want = 2.0 * 10f64.sqrt() + 2.0;
        unsafe {
            assert!((oa_route_length(r) - want).abs() < 1e-9);
            assert!((oa_route_cost(r) - want).abs() < 1e-9);
            let n = oa_route_point_count(r);
            assert_eq!(n, 4);
            let mut xy = vec![0.0; 2 * n];
            assert_eq!(oa_route_points(r, xy.as_mut_ptr(), n), n);
            assert_eq!(&xy[..2], &[1.0, 5.0]);
            assert_eq!(&xy[2 * n - 2..], &[9.0, 5.0]);
            assert_eq!(oa_route_points(r, xy.as_mut_ptr(), 1), 1);

            let js = oa_route_to_geojson(r);
            let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(js).to_str().unwrap()).unwrap();
            assert_eq!(v["features"][0]["geometry"]["coordinates"].as_array().unwrap().len(), n);
            oa_string_free(js);
            oa_route_free(r);
        }
    }
    unsafe {
        oa_cost_model_free(cost);
        oa_scene_free(scene);
    }
}

#[test]
fn default_cost_model_routes() {
    let scene = load(SQUARE);
    let mut cost = ptr::null_mut();
    assert_eq!(unsafe { oa_cost_model_default(&mut cost) }, OaStatus::Ok);
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { oa_route(scene, cost, 1.0, 1.0, 9.0, 9.0, OaAlgorithm::Full, &mut r) }, OaStatus::Ok);
    assert!(unsafe { oa_route_cost(r) } > 0.0);
    unsafe {
        oa_route_free(r);
        oa_cost_model_free(cost);
        oa_scene_free(scene);
    }
}

#[test]
fn error_codes() {
    let mut scene = ptr::null_mut();
    let bad = CString::new("{not json").unwrap();
    assert_eq!(unsafe { oa_scene_load_geojson(bad.as_ptr(), &mut scene) }, OaStatus::InvalidInput);
    assert!(scene.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { oa_scene_load_geojson(ptr::null(), &mut scene) }, OaStatus::NullArgument);
    assert!(last_error().contains("geojson"));

    let scene = load(SQUARE);
    let mut r = ptr::null_mut();
    // Terminal inside the obstacle.
    let st = unsafe { oa_route(scene, ptr::null(), 5.0, 5.0, 9.0, 9.0, OaAlgorithm::Full, &mut r) };
    assert_eq!(st, OaStatus::InvalidInput);
    assert!(r.is_null());
    assert_eq!(unsafe { oa_route(ptr::null(), ptr::null(), 1.0, 1.0, 9.0, 9.0, OaAlgorithm::Full, &mut r) }, OaStatus::NullArgument);

    // A successful call clears the message.
    assert_eq!(unsafe { oa_route(scene, ptr::null(), 1.0, 1.0, 2.0, 2.0, OaAlgorithm::Full, &mut r) }, OaStatus::Ok);
    assert!(oa_last_error_message().is_null());
    unsafe {
        oa_route_free(r);
        oa_scene_free(scene);
    }
}

#[test]
fn unreachable_is_no_path() {
    // Pond splits the area into two pieces.
    let doc = SQUARE.replace("[[4,4],[6,4],[6,6],[4,6],[4,4]]", "[[4,-1],[6,-1],[6,11],[4,11],[4,-1]]");
    let c = CString::new(doc).unwrap();
    let mut scene = ptr::null_mut();
    if unsafe { oa_scene_load_geojson(c.as_ptr(), &mut scene) } != OaStatus::Ok {
        // Obstacles reaching past the area are rejected by the loader.
        assert!(!last_error().is_empty());
        return;
    }
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { oa_route(scene, ptr::null(), 1.0, 5.0, 9.0, 5.0, OaAlgorithm::Full, &mut r) }, OaStatus::NoPath);
    unsafe { oa_scene_free(scene) };
}

#[test]
fn measures() {
    let a = [0.0, 0.0, 1.0, 0.0, 2.0, 0.0];
    let b = [0.0, 3.0, 1.0, 3.0, 2.0, 4.0];
    let mut out = f64::NAN;
    unsafe {
        assert_eq!(oa_cpd(a.as_ptr(), 3, b.as_ptr(), 3, &mut out), OaStatus::Ok);
        assert_eq!(out, 3.0);
        assert_eq!(oa_lcss_distance(a.as_ptr(), 3, b.as_ptr(), 3, 3.0, &mut out), OaStatus::Ok);
        assert!((out - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(oa_cpd(a.as_ptr(), 0, b.as_ptr(), 3, &mut out), OaStatus::InvalidInput);

        let c = [0.0, 0.0, 1.0, 1.0, 2.0, 0.0];
        assert_eq!(oa_dhaus(a.as_ptr(), 3, c.as_ptr(), 3, 1.0, 1.0, 1e-9, &mut out), OaStatus::Ok);
        assert!(out > 0.0 && out.is_finite());
        assert_eq!(oa_dhaus(a.as_ptr(), 3, b.as_ptr(), 3, 1.0, 1.0, 1e-9, &mut out), OaStatus::InvalidInput);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/openarea.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct OaScene OaScene;"));
}

#[test]
fn header_compiles_as_c() {
    let Ok(out) = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include/openarea.h"))
        .output()
    else {
        eprintln!("no C compiler; header syntax not checked");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(oa_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
