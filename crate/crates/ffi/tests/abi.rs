use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use croqam_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(croqam_last_error()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn filter_handle_lifecycle() {
    let mut f = ptr::null_mut();
    let s = unsafe { croqam_filter_design(CroqamFilterFamily::Rrc as u32, 0.5, 8, 4, &mut f) };
    assert_eq!(s, CroqamStatus::Ok);
    let n = unsafe { croqam_filter_len(f) };
    assert_eq!(n, 32);
    let mut g = vec![CroqamComplex::default(); n];
    assert_eq!(
        unsafe { croqam_filter_time_response(f, g.as_mut_ptr(), n) },
        CroqamStatus::Ok
    );
    let energy: f64 = g.iter().map(|z| z.re * z.re + z.im * z.im).sum();
    assert!((energy - 1.0).abs() < 1e-12);
    assert_eq!(
        unsafe { croqam_filter_freq_response(f, g.as_mut_ptr(), n - 1) },
        CroqamStatus::LengthMismatch
    );
    let mut worst = f64::NAN;
    assert_eq!(
        unsafe { croqam_filter_orthogonality(f, CroqamPhaseMode::Conventional as u32, &mut worst) },
        CroqamStatus::Ok
    );
    assert!(worst < 1e-10);
    assert_eq!(
        unsafe { croqam_filter_ici(f, 1, g.as_mut_ptr(), n) },
        CroqamStatus::Ok
    );
    unsafe { croqam_filter_free(f) };
    unsafe { croqam_filter_free(ptr::null_mut()) };
}

#[test]
fn invalid_arguments_are_reported() {
    let mut f = ptr::null_mut();
    assert_eq!(
        unsafe { croqam_filter_design(9, 0.5, 8, 4, &mut f) },
        CroqamStatus::InvalidArgument
    );
    assert!(last_error().contains("filter family"));
    assert_eq!(
        unsafe { croqam_filter_design(1, 1.5, 8, 4, &mut f) },
        CroqamStatus::InvalidArgument
    );
    assert!(f.is_null());
    assert_eq!(
        unsafe { croqam_filter_design(1, 0.5, 8, 4, ptr::null_mut()) },
        CroqamStatus::NullPointer
    );
    assert_eq!(unsafe { croqam_filter_len(ptr::null()) }, 0);
    let mut x = 0.0;
    assert_eq!(
        unsafe { croqam_modem_xi_db(ptr::null(), &mut x) },
        CroqamStatus::NullPointer
    );
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { croqam_modem_reference(7, &mut m) },
        CroqamStatus::InvalidArgument
    );
    let idx = [16u32];
    let mut out = [CroqamComplex::default()];
    assert_eq!(
        unsafe { croqam_qam_map(idx.as_ptr(), out.as_mut_ptr(), 1) },
        CroqamStatus::InvalidArgument
    );
}

#[test]
fn modem_round_trip_through_the_abi() {
    let mut m = ptr::null_mut();
    let s = unsafe {
        croqam_modem_new(
            16,
            5,
            CroqamFilterFamily::Crrc as u32,
            1.0,
            CroqamDetector::Mf as u32,
            CroqamModulation::CrOqam as u32,
            4,
            &mut m,
        )
    };
    assert_eq!(s, CroqamStatus::Ok, "{}", last_error());
    let n = unsafe { croqam_modem_block_len(m) };
    assert_eq!((n, unsafe { croqam_modem_cp_len(m) }), (80, 4));
    let idx: Vec<u32> = (0..n as u32).map(|i| (i * 5 + 1) % 16).collect();
    let mut d = vec![CroqamComplex::default(); n];
    let mut x = vec![CroqamComplex::default(); n];
    let mut back = vec![0u32; n];
    unsafe {
        assert_eq!(
            croqam_qam_map(idx.as_ptr(), d.as_mut_ptr(), n),
            CroqamStatus::Ok
        );
        assert_eq!(
            croqam_modem_modulate(m, d.as_ptr(), x.as_mut_ptr(), n),
            CroqamStatus::Ok
        );
        assert_eq!(
            croqam_modem_detect(m, x.as_ptr(), d.as_mut_ptr(), n),
            CroqamStatus::Ok
        );
        assert_eq!(
            croqam_qam_demap(d.as_ptr(), back.as_mut_ptr(), n),
            CroqamStatus::Ok
        );
        let mut xi = f64::NAN;
        assert_eq!(croqam_modem_xi_db(m, &mut xi), CroqamStatus::Ok);
        assert!(xi.abs() < 1e-9);
        croqam_modem_free(m);
    }
    assert_eq!(idx, back);
}

#[test]
fn singular_configuration_maps_to_its_code() {
    let mut m = ptr::null_mut();
    let s = unsafe {
        croqam_modem_new(
            64,
            8,
            CroqamFilterFamily::Rc as u32,
            0.5,
            CroqamDetector::Zf as u32,
            CroqamModulation::Qam as u32,
            16,
            &mut m,
        )
    };
    assert_eq!(s, CroqamStatus::SingularMatrix);
    assert!(m.is_null());
    assert!(last_error().contains("singular"));
}

#[test]
fn status_strings_and_version() {
    let text = |s| {
        unsafe { CStr::from_ptr(croqam_status_str(s)) }
            .to_str()
            .unwrap()
            .to_string()
    };
    assert_eq!(text(0), "ok");
    assert_eq!(text(4), "singular modulation matrix");
    assert_eq!(text(-3), "unknown status");
    let v = unsafe { CStr::from_ptr(croqam_version()) }
        .to_str()
        .unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header =
        std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/croqam.h"))
            .unwrap();
    for name in [
        "croqam_filter_design",
        "croqam_modem_new",
        "croqam_modem_detect",
        "croqam_last_error",
        "CROQAM_STATUS_SINGULAR_MATRIX",
        "CROQAM_REFERENCE_CR_OQAM_MF",
        "CROQAM_FILTER_FAMILY_CRRC",
        "typedef struct CroqamModem CroqamModem",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

/// Compiles the C smoke test against the header and the static library.
#[test]
fn c_program_links_and_runs() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/abi-<hash> -> target/<profile>
    let profile_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = profile_dir.join("libcroqam_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let status = Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).ends_with(": ok\n"));
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc)
            .arg("--version")
            .output()
            .is_ok_and(|o| o.status.success())
        {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
