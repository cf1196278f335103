//! C interface to moldkit.
//!
//! Objects are opaque heap handles released with their `_free` function.
//! Every fallible call returns a [`MoldStatus`]; on failure the message is
//! available from [`mold_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use moldkit::driver::{solve, DriverError, SolveResult};
use moldkit::io::parse_instance;
use moldkit::model::{Instance, ProcessingTimeModel};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MoldStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidInstance = 4,
    InvalidArgument = 5,
    SolveFailed = 6,
    OutOfRange = 7,
    Panic = 8,
}

/// Machine count plus jobs, validated when first needed.
pub struct MoldInstance {
    m: u64,
    jobs: Vec<ProcessingTimeModel>,
    built: Option<Instance>,
}

impl MoldInstance {
    fn instance(&mut self) -> Result<&Instance, (MoldStatus, String)> {
        if self.built.is_none() {
            let inst = Instance::new(self.m, self.jobs.clone())
                .map_err(|e| (MoldStatus::InvalidInstance, e.to_string()))?;
            self.built = Some(inst);
        }
        Ok(self.built.as_ref().unwrap())
    }
}

pub struct MoldSolveResult {
    inner: SolveResult,
    label: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, records its error message and converts panics to `Panic`.
fn guard(f: impl FnOnce() -> Result<(), (MoldStatus, String)>) -> MoldStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MoldStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(&message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(&message);
            MoldStatus::Panic
        }
    }
}

fn null() -> (MoldStatus, String) {
    (MoldStatus::NullPointer, "null pointer argument".to_string())
}

unsafe fn handle<'a, T>(p: *mut T) -> Result<&'a mut T, (MoldStatus, String)> {
    p.as_mut().ok_or_else(null)
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, (MoldStatus, String)> {
    p.as_mut().ok_or_else(null)
}

/// Message of the last failed call on this thread, or an empty string. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mold_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates an empty instance on `m` machines.
///
/// # Safety
/// `out_instance` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mold_instance_new(
    m: u64,
    out_instance: *mut *mut MoldInstance,
) -> MoldStatus {
    guard(|| {
        let slot = out(out_instance)?;
        if m == 0 {
            return Err((MoldStatus::InvalidArgument, "m must be at least 1".into()));
        }
        *slot = Box::into_raw(Box::new(MoldInstance {
            m,
            jobs: Vec::new(),
            built: None,
        }));
        Ok(())
    })
}

/// Parses the `MOLD 1` text format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out_instance` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mold_instance_parse(
    text: *const c_char,
    out_instance: *mut *mut MoldInstance,
) -> MoldStatus {
    guard(|| {
        let slot = out(out_instance)?;
        if text.is_null() {
            return Err(null());
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| (MoldStatus::InvalidUtf8, e.to_string()))?;
        let inst = parse_instance(text).map_err(|e| (MoldStatus::ParseError, e.to_string()))?;
        *slot = Box::into_raw(Box::new(MoldInstance {
            m: inst.m(),
            jobs: inst.jobs().to_vec(),
            built: Some(inst),
        }));
        Ok(())
    })
}

/// Appends a job with `t(k) = a * k^-beta`.
///
/// # Safety
/// `instance` must come from this library and not be freed.
#[no_mangle]
pub unsafe extern "C" fn mold_instance_add_powerlaw(
    instance: *mut MoldInstance,
    a: f64,
    beta: f64,
) -> MoldStatus {
    guard(|| {
        let inst = handle(instance)?;
        inst.jobs.push(ProcessingTimeModel::PowerLaw { a, beta });
        inst.built = None;
        Ok(())
    })
}

/// Appends a job given by `len` times for `1..=len` machines; `len` must
/// equal the machine count.
///
/// # Safety
/// `instance` must be live and `times` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mold_instance_add_table(
    instance: *mut MoldInstance,
    times: *const f64,
    len: usize,
) -> MoldStatus {
    guard(|| {
        let inst = handle(instance)?;
        if times.is_null() {
            return Err(null());
        }
        if len as u64 != inst.m {
            return Err((
                MoldStatus::InvalidArgument,
                format!("table has {len} entries, expected {}", inst.m),
            ));
        }
        let table = std::slice::from_raw_parts(times, len).to_vec();
        inst.jobs.push(ProcessingTimeModel::Table(table));
        inst.built = None;
        Ok(())
    })
}

/// Number of jobs, or 0 for a null handle.
///
/// # Safety
/// `instance` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn mold_instance_job_count(instance: *const MoldInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.jobs.len())
}

/// # Safety
/// `instance` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn mold_instance_free(instance: *mut MoldInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Fewest machines on which `job` finishes within `d`; writes 0 when no
/// machine count suffices.
///
/// # Safety
/// `instance` must be live and `out_machines` valid.
#[no_mangle]
pub unsafe extern "C" fn mold_instance_gamma(
    instance: *mut MoldInstance,
    job: usize,
    d: f64,
    out_machines: *mut u64,
) -> MoldStatus {
    guard(|| {
        let inst = handle(instance)?;
        let slot = out(out_machines)?;
        let inst = inst.instance()?;
        if job >= inst.n() {
            return Err((MoldStatus::OutOfRange, format!("job {job} of {}", inst.n())));
        }
        *slot = inst.gamma(job, d).unwrap_or(0);
        Ok(())
    })
}

/// Runs the dual approximation driver at accuracy `eps`.
///
/// # Safety
/// `instance` must be live and `out_result` valid.
#[no_mangle]
pub unsafe extern "C" fn mold_solve(
    instance: *mut MoldInstance,
    eps: f64,
    out_result: *mut *mut MoldSolveResult,
) -> MoldStatus {
    guard(|| {
        let inst = handle(instance)?;
        let slot = out(out_result)?;
        let inst = inst.instance()?;
        let inner = solve(inst, eps).map_err(|e| match e {
            DriverError::InvalidInstance(_) => (MoldStatus::InvalidInstance, e.to_string()),
            _ => (MoldStatus::SolveFailed, e.to_string()),
        })?;
        let label = CString::new(inner.label.clone()).unwrap_or_default();
        *slot = Box::into_raw(Box::new(MoldSolveResult { inner, label }));
        Ok(())
    })
}

/// # Safety
/// `result` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn mold_result_makespan(result: *const MoldSolveResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.makespan)
}

/// # Safety
/// `result` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn mold_result_lower_bound(result: *const MoldSolveResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.lower_bound)
}

/// Proven ratio of the returned makespan to the optimum.
///
/// # Safety
/// `result` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn mold_result_guarantee(result: *const MoldSolveResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.guarantee)
}

/// Human-readable algorithm label, owned by the result.
///
/// # Safety
/// `result` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn mold_result_label(result: *const MoldSolveResult) -> *const c_char {
    result.as_ref().map_or(ptr::null(), |r| r.label.as_ptr())
}

/// Number of schedule entries.
///
/// # Safety
/// `result` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn mold_result_entry_count(result: *const MoldSolveResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.schedule.len())
}

/// Entry `index` of the schedule; entries are not ordered by job.
///
/// # Safety
/// `result` must be live and the three output pointers valid.
#[no_mangle]
pub unsafe extern "C" fn mold_result_entry(
    result: *const MoldSolveResult,
    index: usize,
    out_job: *mut usize,
    out_machines: *mut u64,
    out_start: *mut f64,
) -> MoldStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(null)?;
        let (job, machines, start) = (out(out_job)?, out(out_machines)?, out(out_start)?);
        let e = r.inner.schedule.entries.get(index).ok_or_else(|| {
            (
                MoldStatus::OutOfRange,
                format!("entry {index} of {}", r.inner.schedule.len()),
            )
        })?;
        *job = e.job;
        *machines = e.machines;
        *start = e.start;
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn mold_result_free(result: *mut MoldSolveResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
