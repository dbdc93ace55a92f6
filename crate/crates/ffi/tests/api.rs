use std::ffi::{CStr, CString};
use std::ptr;

use mdfrule_ffi::*;

const CLAIRVOYANCE: &str = r#"{"n": 10, "p": [0.5, 0, 0, 0, 0, 0, 0, 0, 0, 0.5],
    "q": [0, 0, 0, 0, 1, 0, 0, 0, 0, 0], "pot": 1, "stack": 1, "p1_bets": [1], "p2_bets": [1]}"#;

fn last_error() -> String {
    let p = mdf_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn game(json: &str) -> *mut MdfGame {
    let json = CString::new(json).unwrap();
    let mut g = ptr::null_mut();
    assert_eq!(mdf_game_from_json(json.as_ptr(), &mut g), MdfStatus::Ok);
    g
}

#[test]
fn solve_clairvoyance_game() {
    unsafe {
        let g = game(CLAIRVOYANCE);
        let mut n = 0usize;
        assert_eq!(mdf_game_num_infosets(g, &mut n), MdfStatus::Ok);
        assert_eq!(n, 40);

        let mut r = ptr::null_mut();
        assert_eq!(mdf_solve(g, 0, 0.0, &mut r), MdfStatus::Ok);
        mdf_game_free(g);

        let (mut expl, mut value, mut iters) = (f64::NAN, f64::NAN, 0u32);
        assert_eq!(mdf_report_exploitability(r, &mut expl), MdfStatus::Ok);
        assert_eq!(mdf_report_game_value(r, &mut value), MdfStatus::Ok);
        assert_eq!(mdf_report_iterations(r, &mut iters), MdfStatus::Ok);
        assert!(expl <= 1e-3);
        assert!((value - 0.25).abs() < 2e-3, "{value}");
        assert!(iters > 0);

        let name = CString::new("P1/root/card10").unwrap();
        let mut bet = f64::NAN;
        assert_eq!(
            mdf_report_prob(r, name.as_ptr(), 1, &mut bet),
            MdfStatus::Ok
        );
        assert!(bet > 0.99, "{bet}");
        let call = CString::new("P2/facing_bet0/card5").unwrap();
        let mut pr = f64::NAN;
        assert_eq!(mdf_report_prob(r, call.as_ptr(), 0, &mut pr), MdfStatus::Ok);
        assert!((pr - 0.5).abs() < 0.05, "{pr}");

        assert_eq!(
            mdf_report_prob(r, name.as_ptr(), 2, &mut pr),
            MdfStatus::NotFound
        );
        let bogus = CString::new("P3/root/card1").unwrap();
        assert_eq!(
            mdf_report_prob(r, bogus.as_ptr(), 0, &mut pr),
            MdfStatus::NotFound
        );
        assert!(last_error().contains("P3/root/card1"));

        let mut json = ptr::null_mut();
        assert_eq!(mdf_report_to_json(r, &mut json), MdfStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        mdf_string_free(json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["exploitability"].as_f64().unwrap() <= 1e-3);
        mdf_report_free(r);
    }
}

#[test]
fn invalid_specs_are_rejected() {
    unsafe {
        let mut g = ptr::null_mut();
        let bad = CString::new(
            r#"{"n": 3, "p": [0.5, 0.5, 0.5], "q": [0.2, 0.3, 0.5], "pot": 1, "stack": 1}"#,
        )
        .unwrap();
        assert_eq!(
            mdf_game_from_json(bad.as_ptr(), &mut g),
            MdfStatus::InvalidInput
        );
        assert!(g.is_null());
        assert!(last_error().contains('p'), "{}", last_error());

        let not_json = CString::new("{").unwrap();
        assert_eq!(
            mdf_game_from_json(not_json.as_ptr(), &mut g),
            MdfStatus::InvalidInput
        );
        assert_eq!(
            mdf_game_from_json(ptr::null(), &mut g),
            MdfStatus::NullPointer
        );
        assert_eq!(
            mdf_game_from_json(not_json.as_ptr(), ptr::null_mut()),
            MdfStatus::NullPointer
        );

        let bytes = [0xffu8, 0];
        assert_eq!(
            mdf_game_from_json(bytes.as_ptr().cast(), &mut g),
            MdfStatus::InvalidUtf8
        );

        let mut out = 0.0;
        assert_eq!(
            mdf_report_exploitability(ptr::null(), &mut out),
            MdfStatus::NullPointer
        );
        mdf_game_free(ptr::null_mut());
        mdf_report_free(ptr::null_mut());
        mdf_string_free(ptr::null_mut());
    }
}

#[test]
fn metrics_and_rules() {
    unsafe {
        let mut v = f64::NAN;
        assert_eq!(mdf_mdf(1.0, 0.5, &mut v), MdfStatus::Ok);
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(mdf_mdf(1.0, -1.0, &mut v), MdfStatus::InvalidInput);
        assert!(last_error().contains("bet"));

        let p = [0.0, 0.0, 1.0];
        let q = [1.0 / 3.0; 3];
        assert_eq!(
            mdf_range_advantage(p.as_ptr(), q.as_ptr(), 3, &mut v),
            MdfStatus::Ok
        );
        assert!((v - 5.0 / 6.0).abs() < 1e-12);
        let bad = [0.5, 0.6, 0.0];
        assert_eq!(
            mdf_range_advantage(bad.as_ptr(), q.as_ptr(), 3, &mut v),
            MdfStatus::InvalidInput
        );

        assert_eq!(mdf_rule_100_50_25(0.5, 0.8, &mut v), MdfStatus::Ok);
        assert!((v - 0.35).abs() < 1e-12);
        assert_eq!(mdf_rule_signed(0.5, 0.6, &mut v), MdfStatus::Ok);
        assert!((v - 0.35).abs() < 1e-12);
        assert_eq!(
            mdf_rule_100_50_25(0.5, 1.5, &mut v),
            MdfStatus::InvalidInput
        );
        assert_eq!(
            mdf_rule_signed(0.5, 0.0, ptr::null_mut()),
            MdfStatus::NullPointer
        );
    }
}

#[test]
fn errors_are_cleared_on_success() {
    unsafe {
        let mut v = 0.0;
        assert_eq!(mdf_mdf(0.0, 1.0, &mut v), MdfStatus::InvalidInput);
        assert!(!mdf_last_error().is_null());
        assert_eq!(mdf_mdf(1.0, 1.0, &mut v), MdfStatus::Ok);
        assert!(mdf_last_error().is_null());
    }
}
