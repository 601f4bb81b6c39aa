use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use rstat_ffi::*;

fn last_error() -> String {
    let p = rstat_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn wave(n: usize, shift: f64) -> Vec<f64> {
    (0..n).map(|i| shift + ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect()
}

fn fast_config() -> RstatTestConfig {
    RstatTestConfig {
        p_perms: 200,
        m_draws: 300,
        ..rstat_test_config_default()
    }
}

#[test]
fn r0_and_status_codes() {
    let x = [1.0, -2.0, 3.0];
    let mut r0 = 0;
    assert_eq!(unsafe { rstat_r0_of_sample(x.as_ptr(), 3, &mut r0) }, RstatStatus::Ok);
    assert_eq!(r0, rstat::records::r0_of_sample(&rstat::Sample::new(x.to_vec()).unwrap()));

    assert_eq!(unsafe { rstat_r0_of_sample(ptr::null(), 3, &mut r0) }, RstatStatus::NullPointer);
    assert!(last_error().contains("values"));
    assert_eq!(unsafe { rstat_r0_of_sample(x.as_ptr(), 0, &mut r0) }, RstatStatus::InvalidInput);
    let nan = [1.0, f64::NAN];
    assert_eq!(unsafe { rstat_r0_of_sample(nan.as_ptr(), 2, &mut r0) }, RstatStatus::InvalidInput);
    assert_eq!(unsafe { rstat_r0_of_sample(x.as_ptr(), 3, ptr::null_mut()) }, RstatStatus::NullPointer);
}

#[test]
fn exact_pmf_and_sigma() {
    let mut buf = [0.0; 4];
    assert_eq!(unsafe { rstat_exact_record_pmf(3, buf.as_mut_ptr(), 4) }, RstatStatus::Ok);
    assert_eq!(buf, [5.0 / 16.0, 5.0 / 16.0, 4.0 / 16.0, 2.0 / 16.0]);
    assert_eq!(unsafe { rstat_exact_record_pmf(3, buf.as_mut_ptr(), 3) }, RstatStatus::InvalidInput);

    let mut s = 0.0;
    assert_eq!(unsafe { rstat_sigma_n(10, rstat_sigma_params_default(), &mut s) }, RstatStatus::Ok);
    assert!((s - 3.2298).abs() < 1e-3);
    assert_eq!(unsafe { rstat_sigma_n(0, rstat_sigma_params_default(), &mut s) }, RstatStatus::InvalidInput);
}

#[test]
fn permutation_means_are_seeded() {
    let x = wave(40, 0.2);
    let mut a = RstatPermEstimate::default();
    let mut b = RstatPermEstimate::default();
    unsafe {
        assert_eq!(rstat_mean_record_counts(x.as_ptr(), 40, 500, 5, 0, &mut a), RstatStatus::Ok);
        assert_eq!(rstat_mean_record_counts(x.as_ptr(), 40, 500, 5, 0, &mut b), RstatStatus::Ok);
    }
    assert_eq!(a.mean_r0, b.mean_r0);
    assert!((a.mean_r0 - (a.mean_r_plus - a.mean_r_minus)).abs() < 1e-12);
    assert_eq!(a.p, 500);
}

#[test]
fn single_test_matches_library() {
    let x = wave(60, 0.15);
    let cfg = fast_config();
    let mut out = RstatTestResult::default();
    assert_eq!(unsafe { rstat_r_test_single(x.as_ptr(), 60, &cfg, &mut out) }, RstatStatus::Ok);

    let lib = rstat::sntest::r_test_single(
        &rstat::Sample::new(x).unwrap(),
        &rstat::TestConfig { p_perms: 200, m_draws: 300, ..Default::default() },
    )
    .unwrap();
    assert_eq!(out.statistic, lib.statistic);
    assert_eq!(out.p_value, lib.p_value);
    assert_eq!(out.n_y, 0);
    assert!(!out.parametric);

    let zeros = [0.0; 10];
    assert_eq!(unsafe { rstat_r_test_single(zeros.as_ptr(), 10, &cfg, &mut out) }, RstatStatus::Degenerate);
}

#[test]
fn two_sample_antisymmetry_and_generator() {
    let x = wave(50, 0.3);
    let y: Vec<f64> = wave(40, 0.0).iter().map(|v| v * 1.2).collect();
    let mut cfg = fast_config();
    cfg.generator.family = RstatFamily::Uniform;
    let run = |a: &[f64], b: &[f64]| {
        let mut out = RstatTestResult::default();
        let st = unsafe { rstat_r_test_two(a.as_ptr(), a.len(), b.as_ptr(), b.len(), RstatVariant::Rd, &cfg, &mut out) };
        assert_eq!(st, RstatStatus::Ok);
        out
    };
    let ab = run(&x, &y);
    assert_eq!(ab.statistic, -run(&y, &x).statistic);
    assert!(ab.parametric);
    assert_eq!((ab.n_x, ab.n_y), (50, 40));

    cfg.generator.sigma = -1.0;
    let mut out = RstatTestResult::default();
    let st = unsafe { rstat_r_test_two(x.as_ptr(), 50, y.as_ptr(), 40, RstatVariant::Rd, &cfg, &mut out) };
    assert_eq!(st, RstatStatus::InvalidInput);
}

#[test]
fn null_table_lifecycle() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("t.csv").to_str().unwrap()).unwrap();
    let mut table: *mut RstatNull = ptr::null_mut();
    unsafe {
        let st = rstat_null_build(
            RstatVariant::SingleR0,
            30,
            0,
            RstatEqualize::Trim,
            100,
            ptr::null(),
            250,
            3,
            0,
            &mut table,
        );
        assert_eq!(st, RstatStatus::Ok);
        assert_eq!(rstat_null_len(table), 250);
        assert_eq!(rstat_null_save(table, path.as_ptr()), RstatStatus::Ok);

        let mut loaded: *mut RstatNull = ptr::null_mut();
        assert_eq!(rstat_null_load(path.as_ptr(), &mut loaded), RstatStatus::Ok);
        let (mut p1, mut p2) = (0.0, 0.0);
        rstat_null_p_value(table, 0.4, RstatAlternative::TwoSided, &mut p1);
        rstat_null_p_value(loaded, 0.4, RstatAlternative::TwoSided, &mut p2);
        assert_eq!(p1, p2);
        assert!(p1 > 0.0 && p1 <= 1.0);
        assert_eq!(rstat_null_p_value(loaded, f64::NAN, RstatAlternative::Greater, &mut p2), RstatStatus::InvalidInput);

        let x = wave(30, 0.1);
        let mut cfg = fast_config();
        cfg.p_perms = 100;
        cfg.null_table = loaded;
        let mut out = RstatTestResult::default();
        assert_eq!(rstat_r_test_single(x.as_ptr(), 30, &cfg, &mut out), RstatStatus::Ok);
        assert_eq!(out.m_draws, 250);
        let x31 = wave(31, 0.1);
        assert_eq!(rstat_r_test_single(x31.as_ptr(), 31, &cfg, &mut out), RstatStatus::TableMismatch);
        assert!(last_error().contains("mismatch"));

        rstat_null_free(loaded);
        rstat_null_free(table);
        rstat_null_free(ptr::null_mut());
        assert_eq!(rstat_null_len(ptr::null()), 0);

        let missing = CString::new(dir.path().join("none.csv").to_str().unwrap()).unwrap();
        assert_eq!(rstat_null_load(missing.as_ptr(), &mut loaded), RstatStatus::Io);
    }
}

#[test]
fn reference_statistics() {
    let x = [1.0, 2.0, -0.5, 3.0];
    let y = [0.0, 1.0, 0.5];
    let (xs, ys) = (rstat::Sample::new(x.to_vec()).unwrap(), rstat::Sample::new(y.to_vec()).unwrap());
    let mut v = 0.0;
    unsafe {
        rstat_t_statistic(x.as_ptr(), 4, &mut v);
        assert_eq!(v, rstat::ref_stats::t_statistic(&xs).unwrap());
        rstat_sign_statistic(x.as_ptr(), 4, &mut v);
        assert_eq!(v, 2.0);
        rstat_wilcoxon_signed_rank(x.as_ptr(), 4, &mut v);
        assert_eq!(v, rstat::ref_stats::wilcoxon_signed_rank(&xs));
        rstat_mann_whitney_u(x.as_ptr(), 4, y.as_ptr(), 3, &mut v);
        assert_eq!(v, rstat::ref_stats::mann_whitney_u(&xs, &ys));
        rstat_welch_t(x.as_ptr(), 4, y.as_ptr(), 3, &mut v);
        assert_eq!(v, rstat::ref_stats::welch_t(&xs, &ys).unwrap());
        let c = [2.0, 2.0];
        assert_eq!(rstat_t_statistic(c.as_ptr(), 2, &mut v), RstatStatus::Degenerate);
    }
}

const C_USAGE: &str = r#"
#include "rstat.h"
int main(void) {
    double x[3] = {1.0, -2.0, 3.0};
    RstatTestConfig cfg = rstat_test_config_default();
    RstatTestResult res;
    RstatNull *table = NULL;
    if (rstat_null_build(RSTAT_VARIANT_SINGLE_R0, 3, 0, RSTAT_EQUALIZE_TRIM, 10, NULL, 10, 0, 0, &table) != RSTAT_STATUS_OK)
        return 1;
    cfg.null_table = table;
    RstatStatus st = rstat_r_test_single(x, 3, &cfg, &res);
    rstat_null_free(table);
    return st == RSTAT_STATUS_OK ? 0 : (int)st;
}
"#;

#[test]
fn header_compiles_as_c() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler found; skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(&src, C_USAGE).unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let out = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include])
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
