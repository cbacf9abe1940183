use std::ffi::{c_char, CStr, CString};
use std::ptr;

use fda_secrecy_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let n = unsafe { fds_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn wiretap(snr_b: f64, snr_e: f64) -> *mut FdsWiretap {
    let bob = FdsFading { m: 2, k: 10.0, delta: 0.4 };
    let eve = FdsFading { m: 5, k: 5.0, delta: 0.35 };
    let mut w = ptr::null_mut();
    let st = unsafe { fds_wiretap_new(&bob, snr_b, &eve, snr_e, 4, 0, &mut w) };
    assert_eq!(st, FdsStatus::Ok);
    assert!(!w.is_null());
    w
}

#[test]
fn metrics_round_trip() {
    let w = wiretap(100.0, 5.0);
    let mut asr = 0.0;
    let mut p_pos = 0.0;
    let mut gauss = 0.0;
    let mut sop = 0.0;
    unsafe {
        assert_eq!(fds_asr_quadrature(w, &mut asr), FdsStatus::Ok);
        assert_eq!(fds_prob_positive_secrecy(w, &mut p_pos), FdsStatus::Ok);
        assert_eq!(fds_gaussian_asr(w, &mut gauss), FdsStatus::Ok);
        assert_eq!(fds_sop(w, 1.0, &mut sop), FdsStatus::Ok);
    }
    assert!(asr > 0.0 && asr < 2.0);
    assert!(gauss >= asr);
    assert!((0.0..=1.0).contains(&p_pos) && (0.0..=1.0).contains(&sop));

    let mut mix = ptr::null_mut();
    let (mut cf, mut bracket) = (0.0, 0.0);
    unsafe {
        assert_eq!(fds_mixture_fit(4, 0, &mut mix), FdsStatus::Ok);
        assert_eq!(fds_asr_closed_form(w, mix, &mut cf, &mut bracket), FdsStatus::Ok);
    }
    assert!((cf - asr).abs() <= bracket + 1e-9);

    let mut asym = FdsAsymptote::default();
    unsafe { assert_eq!(fds_asr_asymptote(w, &mut asym), FdsStatus::Ok) };
    assert!(asym.limit_value > asr && asym.slope_coeff > 0.0);

    let mut mc = FdsMcResult::default();
    unsafe { assert_eq!(fds_monte_carlo(w, 1.0, 200_000, 42, &mut mc), FdsStatus::Ok) };
    assert!(mc.has_sop);
    assert_eq!(mc.asr.n_samples, 200_000);
    assert!((mc.asr.mean - asr).abs() < 4.0 * mc.asr.std_error);
    assert!((mc.sop.mean - sop).abs() < 4.0 * mc.sop.std_error);

    unsafe {
        fds_mixture_free(mix);
        fds_wiretap_free(w);
    }
}

#[test]
fn errors_are_reported() {
    let bad = FdsFading { m: 1, k: -1.0, delta: 0.5 };
    let mut w = ptr::null_mut();
    let st = unsafe { fds_wiretap_new(&bad, 10.0, &bad, 1.0, 4, 0, &mut w) };
    assert_eq!(st, FdsStatus::InvalidArgument);
    assert!(w.is_null());
    assert!(last_error().contains("K must be"));

    let st = unsafe { fds_sop(ptr::null(), 1.0, ptr::null_mut()) };
    assert_eq!(st, FdsStatus::NullPointer);

    // Eve at a null: the series closed form refuses.
    let w = wiretap(10.0, 0.0);
    let mut mix = ptr::null_mut();
    let (mut v, mut b) = (0.0, 0.0);
    unsafe {
        assert_eq!(fds_mixture_fit(4, 0, &mut mix), FdsStatus::Ok);
        assert_eq!(fds_asr_closed_form(w, mix, &mut v, &mut b), FdsStatus::DegenerateEve);
        fds_mixture_free(mix);
        fds_wiretap_free(w);
    }
}

#[test]
fn fixed_truncation_guard_is_numerical() {
    let bob = FdsFading { m: 1, k: 20.0, delta: 1.0 };
    let mut w = ptr::null_mut();
    let st = unsafe { fds_wiretap_new(&bob, 10.0, &bob, 1.0, 4, 40, &mut w) };
    assert_eq!(st, FdsStatus::Numerical);
    assert!(last_error().contains("truncat"));
}

#[test]
fn config_json() {
    let text = CString::new(
        r#"{"array": {"n": 50, "f0_ghz": 28, "delta_f_khz": 1},
            "bob": {"r_km": 1, "theta_deg": 20, "m": 2, "K": 10, "delta": 0.4},
            "eve": {"r_km": 1.5, "theta_deg": 20, "m": 5, "K": 5, "delta": 0.35},
            "link": {"p_dbw": 10, "noise_dbm": -140}, "modulation": {"M": 4}}"#,
    )
    .unwrap();
    let mut w = ptr::null_mut();
    assert_eq!(unsafe { fds_wiretap_from_config_json(text.as_ptr(), &mut w) }, FdsStatus::Ok);
    let (mut b, mut e) = (0.0, 0.0);
    unsafe {
        assert_eq!(fds_wiretap_snrs(w, &mut b, &mut e), FdsStatus::Ok);
        fds_wiretap_free(w);
    }
    assert!(b > e && e > 0.0);

    let broken = CString::new(r#"{"array": {"n": 50}}"#).unwrap();
    assert_eq!(unsafe { fds_wiretap_from_config_json(broken.as_ptr(), &mut w) }, FdsStatus::Config);
    assert!(last_error().contains("missing"));
}

#[test]
fn scalar_helpers() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(fds_mi(16, 1e6, &mut v), FdsStatus::Ok);
        assert!((v - 4.0).abs() < 1e-12);
        assert_eq!(fds_beampattern_gain(50, 28e9, 1e3, 1000.0, 0.349, 1000.0, 0.349, &mut v), FdsStatus::Ok);
        assert!((v - 1.0).abs() < 1e-12);
        let f = FdsFading { m: 1, k: 0.0, delta: 0.0 };
        let (mut pdf, mut cdf) = (0.0, 0.0);
        assert_eq!(fds_ftr_pdf_cdf(&f, 2.0, 4.0, &mut pdf, &mut cdf), FdsStatus::Ok);
        assert!((pdf - (-0.5f64).exp() / 4.0).abs() < 1e-12);
        assert!((cdf - (1.0 - (-0.5f64).exp())).abs() < 1e-12);
        let version = CStr::from_ptr(fds_version()).to_str().unwrap();
        assert_eq!(version, env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/fda_secrecy.h");
    for name in [
        "fds_wiretap_new",
        "fds_wiretap_from_config_json",
        "fds_wiretap_free",
        "fds_asr_quadrature",
        "fds_asr_closed_form",
        "fds_sop",
        "fds_sop_asymptote",
        "fds_monte_carlo",
        "fds_last_error_message",
        "typedef struct FdsWiretap FdsWiretap",
        "FDS_STATUS_DEGENERATE_EVE = 5",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn c_program_links_against_staticlib() {
    let Some(cc) =
        ["cc", "gcc", "clang"].into_iter().find(|c| std::process::Command::new(c).arg("--version").output().is_ok())
    else {
        eprintln!("no C compiler found; skipping C link check");
        return;
    };
    // target/<profile>/deps/<test-binary> → target/<profile>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libfda_secrecy_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let out = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ffi_smoke");
    let status = std::process::Command::new(cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let run = std::process::Command::new(&out).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "C program exited with {:?}: {stdout}", run.status);
    assert!(stdout.contains("K must be"), "{stdout}");
}
