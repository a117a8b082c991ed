//! C ABI over the `augpack` library.
//!
//! Instances and traces are opaque heap handles released with their `_free`
//! function. Every fallible call returns an [`AugpackStatus`]; on failure the
//! message is kept per thread and can be copied out with
//! [`augpack_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use augpack::harness::synthetic::gen_synthetic_matrix;
use augpack::offline::solve_offline;
use augpack::switching::{run_switching, AdviceStream, BetaPolicy, Mixing, SolutionTrace};
use augpack::{Error, PackingInstance, SubroutineConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugpackStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidInstance = 4,
    Config = 5,
    Numeric = 6,
    OutOfRange = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugpackSubroutineKind {
    Greedy = 0,
    Price = 1,
    KnapsackThreshold = 2,
}

/// Subroutine choice. `b_param`/`c_beta` apply to `Price`, the density
/// bounds to `KnapsackThreshold`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AugpackSubroutineOptions {
    pub kind: AugpackSubroutineKind,
    pub b_param: f64,
    pub c_beta: f64,
    pub density_lower: f64,
    pub density_upper: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AugpackRound {
    pub j: usize,
    pub x_adv: f64,
    pub x_sub: f64,
    pub x_comb: f64,
    pub used: bool,
    pub beta: f64,
    pub max_load_ratio: f64,
}

/// Opaque packing instance.
pub struct AugpackInstance(PackingInstance);

/// Opaque switching-run trace.
pub struct AugpackTrace(SolutionTrace);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> AugpackStatus {
    match err {
        Error::Parse(_) => AugpackStatus::Parse,
        Error::Invalid(_) => AugpackStatus::InvalidInstance,
        Error::Numeric(_) => AugpackStatus::Numeric,
        Error::DimensionMismatch { .. } => AugpackStatus::OutOfRange,
        _ => AugpackStatus::Config,
    }
}

struct Fail(AugpackStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(AugpackStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> AugpackStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AugpackStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside augpack".into());
            AugpackStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Fail(AugpackStatus::InvalidUtf8, format!("{what}: {e}")))
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length including the NUL, or
/// 0 if there is no error.
///
/// # Safety
/// `buf` must be null or valid for `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn augpack_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Parses an instance from its JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn augpack_instance_from_json(
    json: *const c_char,
    out: *mut *mut AugpackInstance,
) -> AugpackStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inst = PackingInstance::from_json_str(str_arg(json, "json")?)?;
        *out = Box::into_raw(Box::new(AugpackInstance(inst)));
        Ok(())
    })
}

/// Square synthetic instance: entries uniform on [0, 1) rounded to 0 below
/// `ell`, capacities uniform on (0, 1].
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn augpack_instance_synthetic(
    n: usize,
    ell: f64,
    seed: u64,
    out: *mut *mut AugpackInstance,
) -> AugpackStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if n == 0 || !(ell > 0.0 && ell < 1.0) {
            return Err(Fail(AugpackStatus::Config, format!("need n ≥ 1 and ell in (0, 1), got {n}, {ell}")));
        }
        let (a, b) = gen_synthetic_matrix(n, n, ell, seed);
        *out = Box::into_raw(Box::new(AugpackInstance(a.to_instance(&b)?)));
        Ok(())
    })
}

/// Serializes an instance as JSON. Release the string with [`augpack_string_free`].
///
/// # Safety
/// `inst` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn augpack_instance_to_json(
    inst: *const AugpackInstance,
    out: *mut *mut c_char,
) -> AugpackStatus {
    guard(|| {
        let inst = inst.as_ref().ok_or_else(|| null("instance"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CString::new(inst.0.to_json_string()).expect("JSON has no NUL bytes");
        *out = text.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn augpack_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Constraint count `m`, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn augpack_instance_rows(inst: *const AugpackInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.m())
}

/// Column count `n`, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn augpack_instance_columns(inst: *const AugpackInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.n())
}

/// # Safety
/// `inst` must be null or come from this library, and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn augpack_instance_free(inst: *mut AugpackInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Offline optimum: exact simplex for linear objectives, Frank-Wolfe
/// otherwise. Writes `n` values to `x_out` when it is non-null.
///
/// # Safety
/// `x_out` must be null or valid for `x_len` doubles; `opt_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn augpack_solve(
    inst: *const AugpackInstance,
    x_out: *mut f64,
    x_len: usize,
    opt_out: *mut f64,
) -> AugpackStatus {
    guard(|| {
        let inst = inst.as_ref().ok_or_else(|| null("instance"))?;
        if opt_out.is_null() {
            return Err(null("opt_out"));
        }
        if !x_out.is_null() && x_len < inst.0.n() {
            return Err(Fail(AugpackStatus::OutOfRange, format!("x_out holds {x_len} values, need {}", inst.0.n())));
        }
        let res = solve_offline(&inst.0)?;
        if !x_out.is_null() {
            ptr::copy_nonoverlapping(res.x_star.as_ptr(), x_out, res.x_star.len());
        }
        *opt_out = res.opt_value;
        Ok(())
    })
}

fn subroutine_config(opts: &AugpackSubroutineOptions) -> SubroutineConfig {
    match opts.kind {
        AugpackSubroutineKind::Greedy => SubroutineConfig::Greedy,
        AugpackSubroutineKind::Price => SubroutineConfig::Price { b_param: opts.b_param, c_beta: opts.c_beta },
        AugpackSubroutineKind::KnapsackThreshold => {
            SubroutineConfig::KnapsackThreshold { lower: opts.density_lower, upper: opts.density_upper }
        }
    }
}

/// Runs the switching algorithm with default mixing. `beta ≤ 0` uses the
/// subroutine's reported β each round; otherwise β is fixed at `beta`.
///
/// # Safety
/// `advice` must be valid for `advice_len` doubles; `options` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn augpack_run_switching(
    inst: *const AugpackInstance,
    advice: *const f64,
    advice_len: usize,
    options: *const AugpackSubroutineOptions,
    beta: f64,
    out: *mut *mut AugpackTrace,
) -> AugpackStatus {
    guard(|| {
        let inst = inst.as_ref().ok_or_else(|| null("instance"))?;
        let opts = options.as_ref().ok_or_else(|| null("options"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let values = if advice_len == 0 {
            Vec::new()
        } else if advice.is_null() {
            return Err(null("advice"));
        } else {
            std::slice::from_raw_parts(advice, advice_len).to_vec()
        };
        let advice = AdviceStream::new(values)?;
        let policy = if beta > 0.0 { BetaPolicy::Fixed(beta) } else { BetaPolicy::Reported };
        let mut sub = subroutine_config(opts).build(&inst.0.b)?;
        let trace = run_switching(&inst.0, &advice, sub.as_mut(), &policy, Mixing::default())?;
        *out = Box::into_raw(Box::new(AugpackTrace(trace)));
        Ok(())
    })
}

/// Number of rounds, or 0 for a null handle.
///
/// # Safety
/// `trace` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn augpack_trace_len(trace: *const AugpackTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.0.rounds.len())
}

/// Copies round `index` (0-based) into `out`.
///
/// # Safety
/// `trace` must come from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn augpack_trace_round(
    trace: *const AugpackTrace,
    index: usize,
    out: *mut AugpackRound,
) -> AugpackStatus {
    guard(|| {
        let trace = trace.as_ref().ok_or_else(|| null("trace"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = trace
            .0
            .rounds
            .get(index)
            .ok_or_else(|| Fail(AugpackStatus::OutOfRange, format!("round {index} of {}", trace.0.rounds.len())))?;
        *out = AugpackRound {
            j: r.j,
            x_adv: r.x_adv,
            x_sub: r.x_sub,
            x_comb: r.x_comb,
            used: r.used,
            beta: r.beta,
            max_load_ratio: r.max_load_ratio,
        };
        Ok(())
    })
}

/// Objective values of the combined solution, the subroutine's solution and
/// the advice. Any output pointer may be null.
///
/// # Safety
/// `trace` must come from this library; non-null outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn augpack_trace_objectives(
    trace: *const AugpackTrace,
    f_x: *mut f64,
    f_sub: *mut f64,
    f_advice: *mut f64,
) -> AugpackStatus {
    guard(|| {
        let t = &trace.as_ref().ok_or_else(|| null("trace"))?.0;
        for (p, v) in [(f_x, t.f_x), (f_sub, t.f_sub), (f_advice, t.f_advice)] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `trace` must be null or come from this library, and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn augpack_trace_free(trace: *mut AugpackTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}
