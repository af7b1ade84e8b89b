use std::ffi::{CStr, CString};
use std::ptr;

use hsym_ffi::*;

fn last_error() -> String {
    let p = hsym_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn group_operations() {
    let p = [1.0, 2.0, 0.5];
    let q = [-0.5, 1.0, 2.0];
    let mut pq = [0.0; 3];
    let mut inv = [0.0; 3];
    let mut e = [0.0; 3];
    unsafe {
        assert_eq!(hsym_group_mul(1, p.as_ptr(), q.as_ptr(), pq.as_mut_ptr()), HsymStatus::Ok);
        assert_eq!(hsym_group_inv(1, p.as_ptr(), inv.as_mut_ptr()), HsymStatus::Ok);
        assert_eq!(hsym_group_mul(1, p.as_ptr(), inv.as_ptr(), e.as_mut_ptr()), HsymStatus::Ok);
    }
    assert_eq!(e, [0.0; 3]);
    assert_eq!(&pq[..2], &[0.5, 3.0]);
    let mut d = [0.0; 3];
    unsafe { hsym_dilate(1, 2.0, p.as_ptr(), d.as_mut_ptr()) };
    assert_eq!(d, [2.0, 4.0, 2.0]);
}

#[test]
fn distances_and_norms() {
    let o = [0.0, 0.0, 0.0];
    let c = [0.0, 0.0, std::f64::consts::PI];
    let mut d = 0.0;
    let mut n = 0.0;
    unsafe {
        assert_eq!(hsym_cc_distance(1, o.as_ptr(), c.as_ptr(), &mut d), HsymStatus::Ok);
        assert_eq!(hsym_norm(1, c.as_ptr(), HsymNorm::Cc, &mut n), HsymStatus::Ok);
    }
    assert!((d - 2.0 * std::f64::consts::PI).abs() < 1e-9, "{d}");
    assert_eq!(d, n);
    unsafe { hsym_norm(1, c.as_ptr(), HsymNorm::Sum, &mut n) };
    assert!((n - std::f64::consts::PI.sqrt()).abs() < 1e-15);
}

#[test]
fn lifted_maps() {
    let name = CString::new("shear").unwrap();
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(hsym_lift_new(name.as_ptr(), 3.0, 0.0, ptr::null(), &mut g), HsymStatus::Ok);
        assert_eq!(hsym_lift_dim(g), 2);
        let mut f = 0.0;
        assert_eq!(hsym_lift_vertical(g, [1.0, 1.0].as_ptr(), &mut f), HsymStatus::Ok);
        assert!((f - 0.5).abs() < 1e-12);
        let p = [0.3, -0.2, 0.7];
        let mut img = [0.0; 3];
        let mut back = [0.0; 3];
        assert_eq!(hsym_lift_apply(g, p.as_ptr(), img.as_mut_ptr()), HsymStatus::Ok);
        assert_eq!(hsym_lift_apply_inverse(g, img.as_ptr(), back.as_mut_ptr()), HsymStatus::Ok);
        for i in 0..3 {
            assert!((back[i] - p[i]).abs() < 1e-12);
        }
        hsym_lift_free(g);
    }
}

#[test]
fn fields_and_flows() {
    let json = CString::new(r#"{"kind": "harmonic", "n": 1, "scale": 1, "inner": 1, "outer": 3}"#).unwrap();
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(hsym_field_from_json(json.as_ptr(), HsymProfile::Constant, &mut h), HsymStatus::Ok);
        assert_eq!(hsym_field_dim(h), 2);
        let mut end = [0.0; 2];
        let t = std::f64::consts::FRAC_PI_2;
        assert_eq!(hsym_field_flow_point(h, [1.0, 0.0].as_ptr(), 0.0, t, 1000, end.as_mut_ptr()), HsymStatus::Ok);
        assert!(end[0].abs() < 1e-8 && (end[1] + 1.0).abs() < 1e-8, "{end:?}");
        let mut v = 0.0;
        hsym_field_value(h, 0.0, [0.5, 0.5].as_ptr(), &mut v);
        assert!((v - 0.25).abs() < 1e-15);
        let mut len = 0.0;
        assert_eq!(hsym_field_hofer_length(h, 1.0, 9, 5, &mut len), HsymStatus::Ok);
        assert!(len > 0.0);
        hsym_field_free(h);
    }
}

#[test]
fn errors_are_reported() {
    let mut out = [0.0; 3];
    let status = unsafe { hsym_group_mul(1, ptr::null(), [0.0; 3].as_ptr(), out.as_mut_ptr()) };
    assert_eq!(status, HsymStatus::NullPointer);
    assert!(last_error().contains("p is null"));

    let name = CString::new("twist").unwrap();
    let mut g = ptr::null_mut();
    let status = unsafe { hsym_lift_new(name.as_ptr(), 1.0, 0.0, ptr::null(), &mut g) };
    assert_eq!(status, HsymStatus::Validation);
    assert!(last_error().contains("shear"));
    assert!(g.is_null());

    let json = CString::new(r#"{"kind": "spiral"}"#).unwrap();
    let mut h = ptr::null_mut();
    let status = unsafe { hsym_field_from_json(json.as_ptr(), HsymProfile::Constant, &mut h) };
    assert_eq!(status, HsymStatus::Validation);

    let mut d = 0.0;
    let ok = unsafe { hsym_cc_distance(1, [0.0; 3].as_ptr(), [0.0; 3].as_ptr(), &mut d) };
    assert_eq!(ok, HsymStatus::Ok);
    assert!(hsym_last_error_message().is_null());
}

#[test]
fn scenarios_return_reports() {
    let config = CString::new("command = \"cc-distance\"\nseed = 3\n\n[params]\ntarget = [0.0, 0.0, 1.0]\n").unwrap();
    let mut json = ptr::null_mut();
    let status = unsafe { hsym_run_config(config.as_ptr(), &mut json) };
    assert_eq!(status, HsymStatus::Ok, "{}", last_error());
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { hsym_string_free(json) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["scenario"]["seed"], 3);
    assert!((v["result"]["length"].as_f64().unwrap() - 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-9);

    let bad = CString::new("command = \"flow\"\nsteps = 3\n").unwrap();
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { hsym_run_config(bad.as_ptr(), &mut json) }, HsymStatus::Validation);
    assert!(json.is_null());
    assert!(last_error().contains("line 2"));
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(hsym_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
