//! C interface to lepsched.
//!
//! Objects cross the boundary as opaque handles that the caller releases
//! with the matching `*_free` function. Every fallible call returns a
//! status code; on failure [`lep_last_error`] describes the problem for
//! the calling thread until its next call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lepsched::evaluation::simulate;
use lepsched::exact::solve_saa_exact;
use lepsched::fixtures::base_case;
use lepsched::saa::{gap_confidence_interval, run_saa, SaaParams};
use lepsched::scenario::sample_batch;
use lepsched::tabu::{run_ts, TsParams};
use lepsched::{Error, HiringDecision, ProblemInstance};

pub const LEP_OK: i32 = 0;
pub const LEP_ERR_NULL: i32 = 1;
pub const LEP_ERR_INVALID: i32 = 2;
pub const LEP_ERR_SIZE_GUARD: i32 = 3;
pub const LEP_ERR_IO: i32 = 4;
pub const LEP_ERR_PANIC: i32 = 5;

/// Problem instance handle.
pub struct LepInstance(ProblemInstance);

/// Hiring decision handle.
pub struct LepHiring(HiringDecision);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LepStats {
    pub n_scenarios: usize,
    pub mean_total: f64,
    pub std_total: f64,
    pub mean_wait: f64,
    pub service_level_emergency: f64,
    pub service_level_outpatient: f64,
    pub fixed: f64,
    pub variable: f64,
    pub overtime: f64,
    pub penalty: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LepGapInterval {
    pub z: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub gap_pct: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LepSaaSummary {
    pub lb_mean: f64,
    pub sigma_lb: f64,
    pub ub: f64,
    pub sigma_ub: f64,
    pub gap: f64,
    pub sigma_gap: f64,
    pub interval: LepGapInterval,
    pub m_star: usize,
    pub negative_gap_flag: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> i32 {
    match e {
        Error::SizeGuard(_) => LEP_ERR_SIZE_GUARD,
        Error::Io(_) => LEP_ERR_IO,
        _ => LEP_ERR_INVALID,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> i32 {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LEP_OK,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            LEP_ERR_NULL
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            LEP_ERR_PANIC
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

fn c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail::Lib(Error::validation("string", "interior nul byte")))
}

/// Message of the last failed call on this thread, or null. Owned by the
/// library; valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn lep_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn lep_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads an instance file (JSON).
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lep_instance_load(path: *const c_char, out: *mut *mut LepInstance) -> i32 {
    guard(|| {
        if path.is_null() {
            return Err(Fail::Null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Error::validation("path", "not valid UTF-8"))?;
        let inst = ProblemInstance::load(path)?;
        put(out, boxed(LepInstance(inst)), "out")
    })
}

/// The shipped base case.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lep_instance_base_case(out: *mut *mut LepInstance) -> i32 {
    guard(|| put(out, boxed(LepInstance(base_case())), "out"))
}

/// Validated and simplified copy of `inst`. Solvers expect simplified
/// instances.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lep_instance_simplify(inst: *const LepInstance, out: *mut *mut LepInstance) -> i32 {
    guard(|| {
        let s = as_ref(inst, "inst")?.0.simplify()?;
        put(out, boxed(LepInstance(s)), "out")
    })
}

/// Number of part-timers, the length of every hiring bit string.
///
/// # Safety
/// `inst` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn lep_instance_part_timers(inst: *const LepInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.part_timers().count())
}

/// Pretty JSON of the instance; release with [`lep_string_free`].
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lep_instance_to_json(inst: *const LepInstance, out: *mut *mut c_char) -> i32 {
    guard(|| {
        let json = lepsched::report::to_json_pretty(&as_ref(inst, "inst")?.0)?;
        put(out, c_string(json)?, "out")
    })
}

/// # Safety
/// `inst` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn lep_instance_free(inst: *mut LepInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Hiring decision from a string of `0`/`1`, one per part-timer in group
/// order.
///
/// # Safety
/// `inst` must be a live handle, `bits` nul-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lep_hiring_from_bits(
    inst: *const LepInstance,
    bits: *const c_char,
    out: *mut *mut LepHiring,
) -> i32 {
    guard(|| {
        let inst = as_ref(inst, "inst")?;
        if bits.is_null() {
            return Err(Fail::Null("bits"));
        }
        let bits = CStr::from_ptr(bits)
            .to_bytes()
            .iter()
            .map(|b| match b {
                b'0' => Ok(false),
                b'1' => Ok(true),
                _ => Err(Error::validation("bits", "expected only 0 and 1")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let w = lepsched::domain::group_part_timers(&inst.0).with_bits(bits)?;
        put(out, boxed(LepHiring(w)), "out")
    })
}

/// Bit string of a hiring decision; release with [`lep_string_free`].
///
/// # Safety
/// `w` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lep_hiring_bits(w: *const LepHiring, out: *mut *mut c_char) -> i32 {
    guard(|| {
        let s = as_ref(w, "w")?.0.bit_string();
        put(out, c_string(s)?, "out")
    })
}

/// # Safety
/// `w` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn lep_hiring_count(w: *const LepHiring) -> usize {
    w.as_ref().map_or(0, |w| w.0.hired_count())
}

/// # Safety
/// `w` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn lep_hiring_free(w: *mut LepHiring) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Tabu search with default parameters except `iterations`,
/// `fitness_scenarios` and `seed`. Zero keeps the default.
///
/// # Safety
/// `inst` must be a live handle; `out` writable; `fitness` writable or null.
#[no_mangle]
pub unsafe extern "C" fn lep_solve_ts(
    inst: *const LepInstance,
    iterations: usize,
    fitness_scenarios: usize,
    seed: u64,
    out: *mut *mut LepHiring,
    fitness: *mut f64,
) -> i32 {
    guard(|| {
        let inst = as_ref(inst, "inst")?;
        let d = TsParams::default();
        let p = TsParams {
            iterations: if iterations == 0 { d.iterations } else { iterations },
            fitness_sample_size: if fitness_scenarios == 0 { d.fitness_sample_size } else { fitness_scenarios },
            master_seed: seed,
            ..d
        };
        let r = run_ts(&inst.0, &p)?;
        if !fitness.is_null() {
            fitness.write(r.best_fitness);
        }
        put(out, boxed(LepHiring(r.hiring)), "out")
    })
}

/// Exact solution of the sample problem on `n_scenarios` sampled
/// scenarios. Fails with [`LEP_ERR_SIZE_GUARD`] on instances too large.
///
/// # Safety
/// `inst` must be a live handle; `out` writable; `objective` writable or null.
#[no_mangle]
pub unsafe extern "C" fn lep_solve_exact(
    inst: *const LepInstance,
    n_scenarios: usize,
    seed: u64,
    out: *mut *mut LepHiring,
    objective: *mut f64,
) -> i32 {
    guard(|| {
        let inst = as_ref(inst, "inst")?;
        let batch = sample_batch(&inst.0, n_scenarios, seed)?;
        let (w, v) = solve_saa_exact(&inst.0, &batch)?;
        if !objective.is_null() {
            objective.write(v);
        }
        put(out, boxed(LepHiring(w)), "out")
    })
}

/// Simulates `w` on `n` scenarios.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lep_simulate(
    inst: *const LepInstance,
    w: *const LepHiring,
    n: usize,
    seed: u64,
    out: *mut LepStats,
) -> i32 {
    guard(|| {
        let s = simulate(&as_ref(inst, "inst")?.0, &as_ref(w, "w")?.0, n, seed)?;
        let c = s.cost_breakdown_means;
        let stats = LepStats {
            n_scenarios: s.n_scenarios,
            mean_total: s.mean_total,
            std_total: s.std_total,
            mean_wait: s.mean_wait,
            service_level_emergency: s.service_level_emergency,
            service_level_outpatient: s.service_level_outpatient,
            fixed: c.fixed,
            variable: c.variable,
            overtime: c.overtime,
            penalty: c.penalty,
        };
        put(out, stats, "out")
    })
}

/// Confidence interval of an optimality gap.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lep_gap_interval(
    gap: f64,
    sigma_gap: f64,
    lb_mean: f64,
    confidence: f64,
    out: *mut LepGapInterval,
) -> i32 {
    guard(|| {
        if !(confidence > 0.0 && confidence < 1.0) {
            return Err(Error::validation("confidence", "must lie in (0, 1)").into());
        }
        let ci = gap_confidence_interval(gap, sigma_gap, lb_mean, confidence);
        put(
            out,
            LepGapInterval {
                z: ci.z,
                ci_low: ci.ci_low,
                ci_high: ci.ci_high,
                gap_pct: ci.gap_pct,
            },
            "out",
        )
    })
}

/// Sample average approximation with the exact inner solver. `best`
/// receives the selected hiring decision when not null.
///
/// # Safety
/// `inst` must be a live handle; `out` writable; `best` writable or null.
#[no_mangle]
pub unsafe extern "C" fn lep_saa(
    inst: *const LepInstance,
    samples: usize,
    replications: usize,
    eval_samples: usize,
    confidence: f64,
    seed: u64,
    out: *mut LepSaaSummary,
    best: *mut *mut LepHiring,
) -> i32 {
    guard(|| {
        let p = SaaParams {
            samples,
            replications,
            eval_samples,
            confidence,
            master_seed: seed,
            ..SaaParams::default()
        };
        let r = run_saa(&as_ref(inst, "inst")?.0, &p)?;
        let summary = LepSaaSummary {
            lb_mean: r.lb_mean,
            sigma_lb: r.sigma_lb,
            ub: r.ub,
            sigma_ub: r.sigma_ub,
            gap: r.gap,
            sigma_gap: r.sigma_gap,
            interval: LepGapInterval {
                z: r.z,
                ci_low: r.ci_low,
                ci_high: r.ci_high,
                gap_pct: r.gap_pct,
            },
            m_star: r.m_star,
            negative_gap_flag: r.negative_gap_flag,
        };
        put(out, summary, "out")?;
        if !best.is_null() {
            best.write(boxed(LepHiring(r.best().clone())));
        }
        Ok(())
    })
}
