use std::ffi::{CStr, CString};
use std::ptr;

use qjsd_ffi::*;

fn operator(dim: usize, re: &[f64], im: &[f64]) -> *mut QjsdOperator {
    let mut out = ptr::null_mut();
    let status = unsafe { qjsd_operator_new(dim, re.as_ptr(), im.as_ptr(), &mut out) };
    assert_eq!(status, QjsdStatus::Ok);
    out
}

fn last_error() -> String {
    let p = qjsd_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

const ZEROS: [f64; 4] = [0.0; 4];

#[test]
fn kd_table_weak_value_and_rank() {
    let sx = operator(2, &[0.0, 1.0, 1.0, 0.0], &ZEROS);
    let sz = operator(2, &[1.0, 0.0, 0.0, -1.0], &ZEROS);
    let name = CString::new("kd").unwrap();
    let mut hashing = ptr::null_mut();
    assert_eq!(
        unsafe { qjsd_hashing_preset(name.as_ptr(), &mut hashing) },
        QjsdStatus::Ok
    );

    let obs = [sx as *const QjsdOperator, sz as *const QjsdOperator];
    let mut dist = ptr::null_mut();
    assert_eq!(
        unsafe { qjsd_build(hashing, obs.as_ptr(), 2, &mut dist) },
        QjsdStatus::Ok
    );
    let len = unsafe { qjsd_distribution_len(dist) };
    assert_eq!(len, 4);
    assert_eq!(unsafe { qjsd_distribution_n_axes(dist) }, 2);

    let mut state = ptr::null_mut();
    let (re, im) = ([1.0, 0.1], [0.0, 0.0]);
    assert_eq!(
        unsafe { qjsd_state_new_ket(2, re.as_ptr(), im.as_ptr(), true, &mut state) },
        QjsdStatus::Ok
    );

    let mut points = vec![0.0; 2 * len];
    let (mut vr, mut vi) = (vec![0.0; len], vec![0.0; len]);
    let status = unsafe {
        qjsd_classicalise(
            dist,
            state,
            points.as_mut_ptr(),
            vr.as_mut_ptr(),
            vi.as_mut_ptr(),
            len,
        )
    };
    assert_eq!(status, QjsdStatus::Ok);
    assert!((vr.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(vi.iter().sum::<f64>().abs() < 1e-12);
    assert_eq!(&points[..2], &[-1.0, -1.0]);

    let status = unsafe {
        qjsd_classicalise(
            dist,
            state,
            points.as_mut_ptr(),
            vr.as_mut_ptr(),
            vi.as_mut_ptr(),
            3,
        )
    };
    assert_eq!(status, QjsdStatus::BufferTooSmall);

    let (mut wr, mut wi) = (0.0, 0.0);
    let status = unsafe { qjsd_weak_value(sx, sz, -1.0, state, 1e-12, &mut wr, &mut wi) };
    assert_eq!(status, QjsdStatus::Ok);
    assert!((wr - 10.0).abs() < 1e-9 && wi.abs() < 1e-12);

    let mut rank = 0usize;
    assert_eq!(
        unsafe { qjsd_faithfulness_rank(dist, &mut rank) },
        QjsdStatus::Ok
    );
    assert_eq!(rank, 4);

    unsafe {
        qjsd_distribution_free(dist);
        qjsd_state_free(state);
        qjsd_hashing_free(hashing);
        qjsd_operator_free(sx);
        qjsd_operator_free(sz);
    }
}

#[test]
fn errors_set_status_and_message() {
    let mut out = ptr::null_mut();
    let status =
        unsafe { qjsd_operator_new(2, [1.0, 1e-3, 0.0, 1.0].as_ptr(), ZEROS.as_ptr(), &mut out) };
    assert_eq!(status, QjsdStatus::NotHermitian);
    assert!(out.is_null());
    assert!(last_error().contains("1e-3") || last_error().to_lowercase().contains("hermitian"));

    let status = unsafe { qjsd_operator_new(2, ptr::null(), ZEROS.as_ptr(), &mut out) };
    assert_eq!(status, QjsdStatus::NullPointer);

    let mut state = ptr::null_mut();
    let status = unsafe {
        qjsd_state_new_ket(
            2,
            [0.9, 0.0].as_ptr(),
            [0.0, 0.0].as_ptr(),
            false,
            &mut state,
        )
    };
    assert_eq!(status, QjsdStatus::InvalidState);

    let name = CString::new("nonsense").unwrap();
    let mut hashing = ptr::null_mut();
    assert_eq!(
        unsafe { qjsd_hashing_preset(name.as_ptr(), &mut hashing) },
        QjsdStatus::InvalidHashing
    );

    assert_eq!(
        unsafe { qjsd_hashing_alpha(0.0, 1.0, &mut hashing) },
        QjsdStatus::Ok
    );
    let sz = operator(2, &[1.0, 0.0, 0.0, -1.0], &ZEROS);
    let one = operator(1, &[2.0], &[0.0]);
    let obs = [sz as *const QjsdOperator, one as *const QjsdOperator];
    let mut dist = ptr::null_mut();
    assert_eq!(
        unsafe { qjsd_build(hashing, obs.as_ptr(), 2, &mut dist) },
        QjsdStatus::DimensionMismatch
    );
    assert_eq!(
        unsafe { qjsd_build(hashing, obs.as_ptr(), 1, &mut dist) },
        QjsdStatus::InvalidHashing
    );

    unsafe {
        qjsd_hashing_free(hashing);
        qjsd_operator_free(sz);
        qjsd_operator_free(one);
        qjsd_operator_free(ptr::null_mut());
    }
    assert_eq!(unsafe { qjsd_distribution_len(ptr::null()) }, 0);
}

#[test]
fn header_declares_the_api() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/qjsd.h")).unwrap();
    for name in [
        "typedef struct QjsdOperator QjsdOperator",
        "QJSD_STATUS_OK",
        "qjsd_build(",
        "qjsd_classicalise(",
        "qjsd_weak_value(",
        "qjsd_faithfulness_rank(",
        "qjsd_last_error(",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
    let version = unsafe { CStr::from_ptr(qjsd_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let dir = tempfile_dir();
    let src = dir.join("probe.c");
    std::fs::write(
        &src,
        "#include \"qjsd.h\"\nint probe(void) { QjsdOperator *op = 0; return (int)qjsd_operator_new(0, 0, 0, &op); }\n",
    )
    .unwrap();
    let status = std::process::Command::new("cc")
        .args([
            "-std=c99",
            "-Wall",
            "-Werror",
            "-fsyntax-only",
            "-I",
            include,
        ])
        .arg(&src)
        .status();
    match status {
        Ok(s) => assert!(s.success()),
        Err(e) => eprintln!("skipping: no C compiler ({e})"),
    }
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("qjsd-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
