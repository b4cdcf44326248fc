use std::f64::consts::PI;
use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use jc_lattice_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(jc_last_error_message()) }.to_string_lossy().into_owned()
}

fn new_chain(omega0: f64, g: f64, n: usize, chain: JcChainId) -> *mut JcChain {
    let mut h = ptr::null_mut();
    let status = unsafe { jc_chain_new(1.0, omega0, g, n, chain, &mut h) };
    assert_eq!(status, JcStatus::Ok, "{}", last_error());
    h
}

#[test]
fn handle_lifecycle_and_revival() {
    let h = new_chain(0.0, 2.0, 64, JcChainId::F);
    let mut dim = 0;
    assert_eq!(unsafe { jc_chain_dim(h, &mut dim) }, JcStatus::Ok);
    assert_eq!(dim, 64);

    let mut obs = JcObservables::default();
    assert_eq!(unsafe { jc_chain_observables(h, 0, PI, &mut obs) }, JcStatus::Ok);
    assert!((obs.p_rev - (-16f64).exp()).abs() < 1e-9);
    assert!((obs.mean_photon - 16.0).abs() < 1e-8);
    assert!((obs.p_g - 0.5).abs() < 1e-8);
    assert!((obs.p_g + obs.p_e - 1.0).abs() < 1e-10);

    assert_eq!(unsafe { jc_chain_observables(h, 0, 2.0 * PI, &mut obs) }, JcStatus::Ok);
    assert!(obs.p_rev > 1.0 - 1e-8);

    let mut re = vec![0.0; 64];
    let mut im = vec![0.0; 64];
    assert_eq!(unsafe { jc_chain_evolve_site(h, 0, 1.0, re.as_mut_ptr(), im.as_mut_ptr(), 64) }, JcStatus::Ok);
    let norm: f64 = re.iter().zip(&im).map(|(a, b)| a * a + b * b).sum();
    assert!((norm - 1.0).abs() < 1e-12);
    unsafe { jc_chain_free(h) };
}

#[test]
fn eigenvalues_follow_the_ladder() {
    let h = new_chain(0.0, 2.0, 128, JcChainId::F);
    let mut ev = vec![0.0; 128];
    assert_eq!(unsafe { jc_chain_eigenvalues(h, ev.as_mut_ptr(), ev.len()) }, JcStatus::Ok);
    for (l, e) in ev.iter().take(10).enumerate() {
        assert!((e - (l as f64 - 4.0)).abs() < 1e-8);
    }
    assert_eq!(unsafe { jc_chain_eigenvalues(h, ev.as_mut_ptr(), 5) }, JcStatus::BufferTooSmall);
    assert!(last_error().contains("need 128"));
    unsafe { jc_chain_free(h) };
}

#[test]
fn error_codes() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { jc_chain_new(1.0, 0.0, 1.0, 1, JcChainId::C, &mut h) }, JcStatus::InvalidArgument);
    assert!(last_error().contains("n_sites"));
    assert_eq!(unsafe { jc_chain_new(1.0, 0.0, 1.0, 8, JcChainId::C, ptr::null_mut()) }, JcStatus::NullPointer);
    let mut dim = 0;
    assert_eq!(unsafe { jc_chain_dim(ptr::null(), &mut dim) }, JcStatus::NullPointer);

    let h = new_chain(0.0, 1.0, 8, JcChainId::C);
    let mut obs = JcObservables::default();
    assert_eq!(unsafe { jc_chain_observables(h, 8, 0.0, &mut obs) }, JcStatus::InvalidArgument);
    assert_eq!(unsafe { jc_chain_observables(h, 0, f64::NAN, &mut obs) }, JcStatus::InvalidArgument);
    assert_eq!(unsafe { jc_chain_observables(h, 0, 0.0, &mut obs) }, JcStatus::Ok);
    assert_eq!(last_error(), "");
    assert!(obs.p_g < 1e-14 && (obs.p_e - 1.0).abs() < 1e-14);
    unsafe { jc_chain_free(h) };
    unsafe { jc_chain_free(ptr::null_mut()) };
}

#[test]
fn truncation_and_closed_forms() {
    let mut n = 0;
    assert_eq!(unsafe { jc_choose_truncation(2.0, 0.0, 2.0 * PI, 1e-10, &mut n) }, JcStatus::Ok);
    assert!(n >= 25);
    assert_eq!(unsafe { jc_choose_truncation(2.0, 0.0, 2.0 * PI, 2.0, &mut n) }, JcStatus::InvalidArgument);
    assert!((jc_dsc_mean_photon(PI, 2.0, 1.0) - 16.0).abs() < 1e-12);
    assert!((jc_dsc_revival_probability(PI, 2.0, 1.0) - (-16f64).exp()).abs() < 1e-20);
    assert_eq!(jc_dsc_photon_distribution(0, 0.0, 2.0, 1.0), 1.0);
}

#[test]
fn design_through_c_abi() {
    let fab = jc_fabrication_default();
    let mut d = vec![0.0; 24];
    let mut s = JcDesignSummary::default();
    let status = unsafe { jc_design_array(2.0, 25, &fab, 600_000.0, 6.0, d.as_mut_ptr(), d.len(), &mut s) };
    assert_eq!(status, JcStatus::Ok, "{}", last_error());
    assert!((s.period_cm - 4.37).abs() / 4.37 < 5e-3);
    for (got, want) in d.iter().zip([9.54, 8.80, 8.37]) {
        assert!((got - want).abs() / want < 5e-3);
    }
    let status = unsafe { jc_design_array(100.0, 10, &fab, 600_000.0, 6.0, d.as_mut_ptr(), d.len(), &mut s) };
    assert_eq!(status, JcStatus::Infeasible);
    assert!(last_error().contains("bond 2"));
}

#[test]
fn header_is_generated() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/jc_lattice.h")).unwrap();
    for sym in [
        "jc_chain_new",
        "jc_chain_free",
        "jc_chain_observables",
        "jc_design_array",
        "JC_STATUS_OK",
        "typedef struct JcChain JcChain",
    ] {
        assert!(header.contains(sym), "missing {sym}");
    }
}

/// Compiles the C smoke program against the generated header and the static library.
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let target = exe.parent().and_then(|p| p.parent()).unwrap().to_path_buf();
    let lib = target.join("libjc_lattice_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let out = std::env::temp_dir().join(format!("jc_smoke_{}", std::process::id()));
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&out)
        .status()
        .expect("cc runs");
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    let _ = std::fs::remove_file(&out);
    assert!(run.status.success(), "smoke exited with {:?}", run.status);
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("4.3655 9.5452 8.8014 8.3664"), "{stdout}");
}
