//! C ABI over the workbench.
//!
//! Objects are opaque heap handles released with their `_free` function.
//! Every fallible call returns an [`AleStatus`]; on failure the message is
//! available from [`ale_last_error`] on the same thread. Strings handed out
//! by the library must be released with [`ale_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use amoebot_le::engine::{self, RunOptions, Strategy, Trace};
use amoebot_le::modelcheck::{self, ExploreOptions};
use amoebot_le::render::{self, RenderFormat, RenderSpec};
use amoebot_le::service::Session;
use amoebot_le::{verify, Configuration, Pid};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AleStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    InvalidArgument = 4,
    NotActivable = 5,
    EmptyHistory = 6,
    CheckFailed = 7,
    Panic = 8,
}

/// Opaque configuration handle.
pub struct AleConfig(Configuration);

/// Opaque interactive session handle.
pub struct AleSession(Session);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AleRunSummary {
    pub steps: u64,
    /// 1 when the run ended with no activable particle.
    pub terminal: u8,
    pub leaders: u32,
    /// Failed checks; zero unless verification was requested.
    pub violations: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AleMcSummary {
    pub instances: u64,
    pub passed: u64,
    pub failed: u64,
    pub cyclic: u64,
    pub total_states: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: AleStatus, message: impl Into<String>) -> AleStatus {
    set_error(message);
    status
}

/// Runs `f`, turning a panic into [`AleStatus::Panic`].
fn guard(f: impl FnOnce() -> AleStatus) -> AleStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(AleStatus::Panic, "internal panic"))
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, AleStatus> {
    if s.is_null() {
        return Err(fail(AleStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(AleStatus::InvalidUtf8, "argument is not valid UTF-8"))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> AleStatus {
    if out.is_null() {
        return fail(AleStatus::NullPointer, "null output pointer");
    }
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            AleStatus::Ok
        }
        Err(_) => fail(AleStatus::InvalidArgument, "output contains a NUL byte"),
    }
}

macro_rules! try_ffi {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library on this thread.
#[no_mangle]
pub extern "C" fn ale_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ale_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses the JSON configuration format.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ale_config_parse(json: *const c_char, out: *mut *mut AleConfig) -> AleStatus {
    guard(|| {
        let text = try_ffi!(read_str(json));
        if out.is_null() {
            return fail(AleStatus::NullPointer, "null output pointer");
        }
        match Configuration::parse(text) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(AleConfig(c)));
                AleStatus::Ok
            }
            Err(e) => fail(AleStatus::InvalidConfig, e.to_string()),
        }
    })
}

/// Seeded random connected configuration.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ale_config_generate(
    n: usize,
    expanded_fraction: f64,
    hole_bias: f64,
    seed: u64,
    out: *mut *mut AleConfig,
) -> AleStatus {
    guard(|| {
        if out.is_null() {
            return fail(AleStatus::NullPointer, "null output pointer");
        }
        match amoebot_le::generate_random(n, expanded_fraction, hole_bias, seed) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(AleConfig(c)));
                AleStatus::Ok
            }
            Err(e) => fail(AleStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// # Safety
/// `config` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ale_config_free(config: *mut AleConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Number of particles, or 0 for NULL.
///
/// # Safety
/// `config` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ale_config_len(config: *const AleConfig) -> usize {
    config.as_ref().map_or(0, |c| c.0.len())
}

/// JSON in pid order.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ale_config_to_json(config: *const AleConfig, out: *mut *mut c_char) -> AleStatus {
    guard(|| {
        let Some(c) = config.as_ref() else {
            return fail(AleStatus::NullPointer, "null configuration");
        };
        write_string(out, c.0.to_json_by_pid())
    })
}

/// ASCII (`svg` = 0) or SVG (`svg` != 0) drawing with all annotations.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ale_config_render(config: *const AleConfig, svg: u8, out: *mut *mut c_char) -> AleStatus {
    guard(|| {
        let Some(c) = config.as_ref() else {
            return fail(AleStatus::NullPointer, "null configuration");
        };
        let format = if svg != 0 { RenderFormat::Svg } else { RenderFormat::Ascii };
        write_string(out, render::render(&c.0, &RenderSpec::new(format)))
    })
}

/// Runs the scheduler. `trace_out` may be NULL; otherwise it receives the
/// trace as JSON lines.
///
/// # Safety
/// `config` must be a live handle, `strategy` a NUL-terminated string,
/// `summary` writable, `trace_out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn ale_run(
    config: *const AleConfig,
    strategy: *const c_char,
    seed: u64,
    max_steps: u64,
    verify: u8,
    summary: *mut AleRunSummary,
    trace_out: *mut *mut c_char,
) -> AleStatus {
    guard(|| {
        let Some(c) = config.as_ref() else {
            return fail(AleStatus::NullPointer, "null configuration");
        };
        if summary.is_null() {
            return fail(AleStatus::NullPointer, "null summary pointer");
        }
        let name = try_ffi!(read_str(strategy));
        let strategy = match Strategy::from_name(name, seed) {
            Ok(s) => s,
            Err(e) => return fail(AleStatus::InvalidArgument, e.to_string()),
        };
        let options = RunOptions {
            max_steps,
            verify: verify != 0,
        };
        let result = match engine::run(&c.0, strategy, options) {
            Ok(r) => r,
            Err(e @ engine::EngineError::NotActivable { .. }) => return fail(AleStatus::NotActivable, e.to_string()),
            Err(e) => return fail(AleStatus::InvalidConfig, e.to_string()),
        };
        let violations = result.step_failures.iter().map(|(_, r)| r.violations.len()).sum::<usize>()
            + result.final_report.as_ref().map_or(0, |r| r.violations.len());
        *summary = AleRunSummary {
            steps: result.trace.events.len() as u64,
            terminal: u8::from(result.terminal()),
            leaders: verify::leaders(&result.final_config).len() as u32,
            violations: violations as u64,
        };
        if !trace_out.is_null() {
            return write_string(trace_out, result.trace.to_jsonl());
        }
        AleStatus::Ok
    })
}

/// Replays a trace and checks every step. Returns
/// [`AleStatus::CheckFailed`] on a replay mismatch or any violation.
///
/// # Safety
/// `trace` must be a NUL-terminated string; `violations` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn ale_trace_check(trace: *const c_char, violations: *mut u64) -> AleStatus {
    guard(|| {
        let text = try_ffi!(read_str(trace));
        let trace = match Trace::parse_jsonl(text) {
            Ok(t) => t,
            Err(e) => return fail(AleStatus::CheckFailed, e.to_string()),
        };
        let configs = match trace.replay() {
            Ok(c) => c,
            Err(e) => return fail(AleStatus::CheckFailed, e.to_string()),
        };
        let mut count = 0usize;
        for (i, e) in trace.events.iter().enumerate() {
            count += verify::check_transition(&configs[i], &configs[i + 1], e, trace.boundaries)
                .violations
                .len();
        }
        if trace.terminal() {
            if let Ok(r) = verify::check_final_properties(configs.last().unwrap()) {
                count += r.violations.len();
            }
        }
        if !violations.is_null() {
            *violations = count as u64;
        }
        if count == 0 {
            AleStatus::Ok
        } else {
            fail(AleStatus::CheckFailed, format!("{count} violations"))
        }
    })
}

/// Explores every connected instance of `n` particles.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ale_modelcheck(n: usize, allow_expanded: u8, budget: usize, out: *mut AleMcSummary) -> AleStatus {
    guard(|| {
        if out.is_null() {
            return fail(AleStatus::NullPointer, "null summary pointer");
        }
        if n == 0 || n > modelcheck::MAX_ENUMERATION {
            return fail(
                AleStatus::InvalidArgument,
                format!("n must be between 1 and {}", modelcheck::MAX_ENUMERATION),
            );
        }
        let report = modelcheck::check_all(
            n,
            allow_expanded != 0,
            ExploreOptions {
                budget,
                memoize: true,
            },
        );
        let s = &report.summary;
        *out = AleMcSummary {
            instances: s.instances as u64,
            passed: s.passed as u64,
            failed: s.failed as u64,
            cyclic: s.cyclic as u64,
            total_states: s.total_states as u64,
        };
        AleStatus::Ok
    })
}

fn session_status(e: amoebot_le::service::SessionError) -> AleStatus {
    let status = match e.code {
        "not_activable" => AleStatus::NotActivable,
        "empty_history" => AleStatus::EmptyHistory,
        "invalid_strategy" => AleStatus::InvalidArgument,
        _ => AleStatus::InvalidConfig,
    };
    fail(status, e.message)
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ale_session_new(json: *const c_char, out: *mut *mut AleSession) -> AleStatus {
    guard(|| {
        let text = try_ffi!(read_str(json));
        if out.is_null() {
            return fail(AleStatus::NullPointer, "null output pointer");
        }
        match Session::create("ffi", text) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(AleSession(s)));
                AleStatus::Ok
            }
            Err(e) => session_status(e),
        }
    })
}

/// # Safety
/// `session` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ale_session_free(session: *mut AleSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// # Safety
/// `session` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ale_session_activate(session: *mut AleSession, pid: u32) -> AleStatus {
    guard(|| {
        let Some(s) = session.as_mut() else {
            return fail(AleStatus::NullPointer, "null session");
        };
        match s.0.activate(Pid(pid)) {
            Ok(_) => AleStatus::Ok,
            Err(e) => session_status(e),
        }
    })
}

/// # Safety
/// `session` must be a live handle; `strategy` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ale_session_auto(
    session: *mut AleSession,
    strategy: *const c_char,
    steps: u64,
    seed: u64,
) -> AleStatus {
    guard(|| {
        let Some(s) = session.as_mut() else {
            return fail(AleStatus::NullPointer, "null session");
        };
        let name = try_ffi!(read_str(strategy));
        match s.0.auto_run(name, steps, seed) {
            Ok(_) => AleStatus::Ok,
            Err(e) => session_status(e),
        }
    })
}

/// # Safety
/// `session` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ale_session_undo(session: *mut AleSession) -> AleStatus {
    guard(|| {
        let Some(s) = session.as_mut() else {
            return fail(AleStatus::NullPointer, "null session");
        };
        match s.0.undo() {
            Ok(_) => AleStatus::Ok,
            Err(e) => session_status(e),
        }
    })
}

/// Current state in the service's JSON schema.
///
/// # Safety
/// `session` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ale_session_state_json(session: *const AleSession, out: *mut *mut c_char) -> AleStatus {
    guard(|| {
        let Some(s) = session.as_ref() else {
            return fail(AleStatus::NullPointer, "null session");
        };
        let json = serde_json::to_string(&s.0.state()).expect("state serializes");
        write_string(out, json)
    })
}
