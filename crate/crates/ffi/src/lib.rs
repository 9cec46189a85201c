//! C ABI over the decision procedures. Strings cross the boundary as NUL-terminated UTF-8;
//! every string returned through an out-pointer must be released with `rr_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rounded_reach::cli::{dispatch, outcome_json, simulate_json, Instance, InstanceFile};
use rounded_reach::numerics::parse_rational;
use rounded_reach::qbf::parse::parse_any;
use rounded_reach::qbf::program::{compile_qbf, perturb, Family};
use rounded_reach::rotation::{run_disk, write_grid, Theta};
use rounded_reach::Error;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RrStatus {
    Ok = 0,
    /// The instance lies outside every implemented procedure.
    Undecided = 2,
    NullArgument = -1,
    InvalidUtf8 = -2,
    Parse = -3,
    Validation = -4,
    Unsupported = -5,
    TooLarge = -6,
    GadgetBroken = -7,
    Internal = -8,
    Panic = -9,
}

/// A parsed instance.
pub struct RrInstance {
    inner: Instance,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> RrStatus {
    match e {
        Error::Parse(_) | Error::Io(_) => RrStatus::Parse,
        Error::ValidationFailed(_) | Error::DimensionMismatch(_) | Error::SingularMatrix | Error::NonCanonicalPrefix => {
            RrStatus::Validation
        }
        Error::UnsupportedCombination(_)
        | Error::UnsupportedAngle(_)
        | Error::NonRationalSpectrum
        | Error::ModulusOneEigenvalue { .. }
        | Error::UndecidableTie => RrStatus::Unsupported,
        Error::TooLarge(_) | Error::BudgetExceeded(_) | Error::PrecisionCap { .. } => RrStatus::TooLarge,
        Error::GadgetBroken(_) => RrStatus::GadgetBroken,
        _ => RrStatus::Internal,
    }
}

fn guarded(f: impl FnOnce() -> Result<RrStatus, (RrStatus, String)>) -> RrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("panic inside the library");
            RrStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (RrStatus, String) {
    (status_of(&e), e.to_string())
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (RrStatus, String)> {
    if p.is_null() {
        return Err((RrStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (RrStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn write_out(out: *mut *mut c_char, s: String) -> Result<(), (RrStatus, String)> {
    let c = CString::new(s).map_err(|_| (RrStatus::Internal, "output contains NUL".to_string()))?;
    *out = c.into_raw();
    Ok(())
}

fn check_out<T>(out: *mut *mut T) -> Result<(), (RrStatus, String)> {
    if out.is_null() {
        Err((RrStatus::NullArgument, "output pointer is null".into()))
    } else {
        Ok(())
    }
}

/// Parse a JSON instance. On success `*out` owns a handle for `rr_instance_free`.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rr_instance_parse(json: *const c_char, out: *mut *mut RrInstance) -> RrStatus {
    guarded(|| {
        check_out(out)?;
        *out = ptr::null_mut();
        let s = read_str(json, "json")?;
        let inst = InstanceFile::from_json(s).and_then(|f| f.to_instance()).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(RrInstance { inner: inst }));
        Ok(RrStatus::Ok)
    })
}

/// # Safety
/// `inst` must come from `rr_instance_parse` and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn rr_instance_free(inst: *mut RrInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Decide reachability; `*out_json` receives the verdict object.
/// Returns `Undecided` (with a verdict object) when no implemented procedure applies.
///
/// # Safety
/// `inst` must be a live handle and `out_json` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rr_decide(inst: *const RrInstance, out_json: *mut *mut c_char) -> RrStatus {
    guarded(|| {
        check_out(out_json)?;
        *out_json = ptr::null_mut();
        let inst = inst.as_ref().ok_or((RrStatus::NullArgument, "instance is null".to_string()))?;
        let o = dispatch(&inst.inner).map_err(lib_err)?;
        let (v, code) = outcome_json(&inst.inner, &o).map_err(lib_err)?;
        write_out(out_json, v.to_string())?;
        Ok(if code == 2 { RrStatus::Undecided } else { RrStatus::Ok })
    })
}

/// Simulate up to `steps` steps, stopping at the target; `*out_json` receives `{"hit", "states"}`.
///
/// # Safety
/// `inst` must be a live handle and `out_json` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rr_simulate(inst: *const RrInstance, steps: u64, out_json: *mut *mut c_char) -> RrStatus {
    guarded(|| {
        check_out(out_json)?;
        *out_json = ptr::null_mut();
        let inst = inst.as_ref().ok_or((RrStatus::NullArgument, "instance is null".to_string()))?;
        let v = simulate_json(&inst.inner, steps).map_err(lib_err)?;
        write_out(out_json, v.to_string())?;
        Ok(RrStatus::Ok)
    })
}

/// Compile a formula (text syntax or QDIMACS) into an instance JSON document.
/// `family` is `floor`, `ceil` or `minerr`; `factor` may be null or a rational such as `11/10`.
///
/// # Safety
/// String arguments must be valid NUL-terminated strings (or null for `factor`).
#[no_mangle]
pub unsafe extern "C" fn rr_compile_qbf(
    formula: *const c_char,
    family: *const c_char,
    factor: *const c_char,
    out_json: *mut *mut c_char,
) -> RrStatus {
    guarded(|| {
        check_out(out_json)?;
        *out_json = ptr::null_mut();
        let phi = parse_any(read_str(formula, "formula")?).map_err(lib_err)?;
        let fam = Family::parse(read_str(family, "family")?).map_err(lib_err)?;
        let mut inst = compile_qbf(&phi, fam).map_err(lib_err)?;
        if !factor.is_null() {
            let f = parse_rational(read_str(factor, "factor")?).map_err(lib_err)?;
            inst = perturb(&inst, &f).map_err(lib_err)?;
        }
        write_out(out_json, InstanceFile::from_hardness(&inst).to_json())?;
        Ok(RrStatus::Ok)
    })
}

/// Rotate every lattice point of the disk of radius `radius` by `theta` with minimal-error
/// rounding; `*out_csv` receives the `x,y,first_generation` grid.
///
/// # Safety
/// `theta` must be a valid NUL-terminated string and `out_csv` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rr_rotate(radius: u64, theta: *const c_char, budget: u64, out_csv: *mut *mut c_char) -> RrStatus {
    guarded(|| {
        check_out(out_csv)?;
        *out_csv = ptr::null_mut();
        let th = Theta::parse(read_str(theta, "theta")?).map_err(lib_err)?;
        let rep = run_disk(radius, &th, budget, false).map_err(lib_err)?;
        let mut buf = Vec::new();
        write_grid(&rep, &mut buf).map_err(lib_err)?;
        write_out(out_csv, String::from_utf8(buf).map_err(|_| (RrStatus::Internal, "csv".to_string()))?)?;
        Ok(RrStatus::Ok)
    })
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn rr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failure on this thread; valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn rr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
