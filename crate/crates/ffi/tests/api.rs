use std::ffi::{CStr, CString};
use std::ptr;

use qcloning_ffi::*;

fn last_error() -> String {
    let p = qcl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn closed_forms() {
    let mut x = 0.0;
    unsafe {
        assert_eq!(qcl_cloner_fidelity(3, 1, 2, &mut x), QclStatus::Ok);
        assert!((x - 0.75).abs() < 1e-15);
        assert_eq!(qcl_cloner_shrinking_factor(2, 1, 2, &mut x), QclStatus::Ok);
        assert!((x - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(qcl_estimation_fidelity(2, 3, &mut x), QclStatus::Ok);
        assert!((x - 0.8).abs() < 1e-15);
        assert_eq!(qcl_estimation_shrinking_factor(3, 2, &mut x), QclStatus::Ok);
        assert!((x - 0.4).abs() < 1e-15);
    }
    assert!(qcl_last_error().is_null());
}

#[test]
fn errors_are_reported() {
    let mut x = 0.0;
    unsafe {
        assert_eq!(
            qcl_cloner_fidelity(2, 3, 2, &mut x),
            QclStatus::InvalidArgument
        );
        assert!(!last_error().is_empty());
        assert_eq!(
            qcl_cloner_fidelity(2, 1, 2, ptr::null_mut()),
            QclStatus::NullPointer
        );
        assert!(last_error().contains("out"));

        let re = [1.0, 1.0];
        let im = [0.0, 0.0];
        assert_eq!(
            qcl_simulate_clone_fidelity(2, 1, 2, re.as_ptr(), im.as_ptr(), &mut x),
            QclStatus::InvalidState
        );

        let mut h = ptr::null_mut();
        let missing = CString::new("/nonexistent/p.json").unwrap();
        assert_eq!(qcl_povm_load(missing.as_ptr(), &mut h), QclStatus::Io);
        let bad = CString::new("{\"dimension\": 2").unwrap();
        assert_eq!(qcl_povm_from_json(bad.as_ptr(), &mut h), QclStatus::Schema);
        assert!(h.is_null());
        qcl_povm_free(ptr::null_mut());
        qcl_string_free(ptr::null_mut());
    }
}

#[test]
fn simulated_clone() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let re = [h, 0.0];
    let im = [0.0, h];
    let mut f = 0.0;
    unsafe {
        assert_eq!(
            qcl_simulate_clone_fidelity(2, 1, 2, re.as_ptr(), im.as_ptr(), &mut f),
            QclStatus::Ok
        );
    }
    assert!((f - 5.0 / 6.0).abs() < 1e-9);
}

#[test]
fn povm_lifecycle() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("d2n2.json").to_str().unwrap()).unwrap();
    unsafe {
        let mut povm = ptr::null_mut();
        assert_eq!(qcl_povm_design(2, 2, &mut povm), QclStatus::Ok);
        let (mut d, mut n, mut k) = (0, 0, 0);
        assert_eq!(qcl_povm_shape(povm, &mut d, &mut n, &mut k), QclStatus::Ok);
        assert_eq!((d, n), (2, 2));
        assert!(k > 0);

        let mut report = QclPovmReport::default();
        assert_eq!(qcl_povm_validate(povm, &mut report), QclStatus::Ok);
        assert_eq!(report.passed, 1);
        assert!((report.weight_sum - 3.0).abs() < 1e-9);

        assert_eq!(qcl_povm_save(povm, path.as_ptr()), QclStatus::Ok);
        let mut loaded = ptr::null_mut();
        assert_eq!(qcl_povm_load(path.as_ptr(), &mut loaded), QclStatus::Ok);

        let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(qcl_povm_to_json(povm, &mut a), QclStatus::Ok);
        assert_eq!(qcl_povm_to_json(loaded, &mut b), QclStatus::Ok);
        assert_eq!(CStr::from_ptr(a), CStr::from_ptr(b));
        qcl_string_free(a);
        qcl_string_free(b);

        let mut f = 0.0;
        assert_eq!(qcl_povm_average_fidelity(loaded, &mut f), QclStatus::Ok);
        assert!((f - 0.75).abs() < 1e-9);
        let (mut mean, mut se) = (0.0, 0.0);
        assert_eq!(
            qcl_povm_average_fidelity_mc(loaded, 2000, 5, &mut mean, &mut se),
            QclStatus::Ok
        );
        assert!((mean - 0.75).abs() < 1e-9);
        assert_eq!(
            qcl_povm_average_fidelity_mc(loaded, 0, 5, &mut mean, &mut se),
            QclStatus::InvalidArgument
        );

        qcl_povm_free(loaded);
        qcl_povm_free(povm);
    }
}
