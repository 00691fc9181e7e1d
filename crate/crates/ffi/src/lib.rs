//! C ABI for the navigo simulator.
//!
//! Scenarios and reports are opaque handles created and destroyed through
//! this API. Every fallible call returns a [`NavigoStatus`]; on failure the
//! message is available from [`navigo_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use navigo::error::ConfigError;
use navigo::metrics::MetricsReport;
use navigo::scenario::Scenario;
use navigo::strategy::StrategyKind;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NavigoStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Unparseable or invalid scenario, or an invalid parameter value.
    Config = 3,
    /// The simulation itself failed.
    Run = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

/// A loaded, validated scenario.
pub struct NavigoScenario {
    inner: Scenario,
}

/// Metrics of one finished run.
pub struct NavigoReport {
    inner: MetricsReport,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: NavigoStatus, msg: impl Into<String>) -> NavigoStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> NavigoStatus) -> NavigoStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(NavigoStatus::Panic, msg)
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, NavigoStatus> {
    if p.is_null() {
        return Err(fail(NavigoStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        fail(
            NavigoStatus::InvalidUtf8,
            format!("{what} is not valid UTF-8"),
        )
    })
}

fn config_error(e: ConfigError) -> NavigoStatus {
    fail(NavigoStatus::Config, e.to_string())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn navigo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn navigo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a scenario file; relative road and trace paths resolve against its
/// directory.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn navigo_scenario_load(
    path: *const c_char,
    out: *mut *mut NavigoScenario,
) -> NavigoStatus {
    guard(|| {
        if out.is_null() {
            return fail(NavigoStatus::NullArgument, "out is null");
        }
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match Scenario::load(Path::new(path)) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(NavigoScenario { inner }));
                NavigoStatus::Ok
            }
            Err(e) => config_error(e),
        }
    })
}

/// Builds the generated Manhattan grid scenario in memory: `rows` x `cols`
/// junctions, `block_m` blocks, `n_cars` random-walking vehicles and one RSU
/// at the centre. The same `seed` drives the mobility and the run.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn navigo_scenario_grid(
    rows: u32,
    cols: u32,
    block_m: f64,
    n_cars: u32,
    duration_s: f64,
    seed: u64,
    out: *mut *mut NavigoScenario,
) -> NavigoStatus {
    guard(|| {
        if out.is_null() {
            return fail(NavigoStatus::NullArgument, "out is null");
        }
        let spec = navigo::gen::GridSpec {
            rows: rows as usize,
            cols: cols as usize,
            block_m,
            n_cars: n_cars as usize,
            duration_s,
            seed,
            ..Default::default()
        };
        match spec.build(spec.config()) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(NavigoScenario { inner }));
                NavigoStatus::Ok
            }
            Err(e) => config_error(e),
        }
    })
}

/// Frees a scenario. Null is ignored.
///
/// # Safety
/// `scenario` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn navigo_scenario_free(scenario: *mut NavigoScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

unsafe fn scenario_mut<'a>(p: *mut NavigoScenario) -> Result<&'a mut Scenario, NavigoStatus> {
    p.as_mut()
        .map(|s| &mut s.inner)
        .ok_or_else(|| fail(NavigoStatus::NullArgument, "scenario is null"))
}

/// Sets the run seed.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn navigo_scenario_set_seed(
    scenario: *mut NavigoScenario,
    seed: u64,
) -> NavigoStatus {
    guard(|| match scenario_mut(scenario) {
        Ok(sc) => {
            sc.config.scenario.seed = seed;
            NavigoStatus::Ok
        }
        Err(s) => s,
    })
}

/// Selects the forwarding strategy: `"navigo"` or `"flood"`.
///
/// # Safety
/// `scenario` must be a live handle and `name` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn navigo_scenario_set_strategy(
    scenario: *mut NavigoScenario,
    name: *const c_char,
) -> NavigoStatus {
    guard(|| {
        let sc = match scenario_mut(scenario) {
            Ok(sc) => sc,
            Err(s) => return s,
        };
        let name = match str_arg(name, "name") {
            Ok(n) => n,
            Err(s) => return s,
        };
        match name.parse::<StrategyKind>() {
            Ok(k) => {
                sc.config.strategy.kind = k;
                NavigoStatus::Ok
            }
            Err(e) => fail(NavigoStatus::Config, e),
        }
    })
}

/// Sets the fraction of vehicles that act as consumers, in [0, 1].
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn navigo_scenario_set_consumer_fraction(
    scenario: *mut NavigoScenario,
    fraction: f64,
) -> NavigoStatus {
    guard(|| {
        let sc = match scenario_mut(scenario) {
            Ok(sc) => sc,
            Err(s) => return s,
        };
        let old = sc.config.workload.consumer_fraction;
        sc.config.workload.consumer_fraction = fraction;
        if let Err(e) = sc.config.validate_params() {
            sc.config.workload.consumer_fraction = old;
            return config_error(e);
        }
        NavigoStatus::Ok
    })
}

/// Runs the scenario to completion. The scenario is left untouched and can
/// be run again.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn navigo_run(
    scenario: *const NavigoScenario,
    out: *mut *mut NavigoReport,
) -> NavigoStatus {
    guard(|| {
        if out.is_null() {
            return fail(NavigoStatus::NullArgument, "out is null");
        }
        let Some(sc) = scenario.as_ref() else {
            return fail(NavigoStatus::NullArgument, "scenario is null");
        };
        let report = navigo::sim::run(&sc.inner).report;
        let json = match CString::new(report.to_json()) {
            Ok(j) => j,
            Err(e) => return fail(NavigoStatus::Run, e.to_string()),
        };
        *out = Box::into_raw(Box::new(NavigoReport {
            inner: report,
            json,
        }));
        NavigoStatus::Ok
    })
}

/// The full report as JSON, owned by the report.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn navigo_report_json(report: *const NavigoReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// Headline numbers of a report. Ratios that are undefined for the run
/// (nothing expressed, nothing satisfied) are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NavigoSummary {
    pub interests_expressed: u64,
    pub interests_satisfied: u64,
    pub success_rate: f64,
    pub user_satisfaction: f64,
    pub channel_accesses_per_satisfied: f64,
    pub infra_load: f64,
    pub infra_offload: f64,
    pub rtt_p95_ms: f64,
    pub max_faces_per_prefix: u32,
    pub mean_queue_depth: f64,
}

/// Fills `out` with the headline numbers of `report`.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn navigo_report_summary(
    report: *const NavigoReport,
    out: *mut NavigoSummary,
) -> NavigoStatus {
    guard(|| {
        let (Some(r), Some(out)) = (report.as_ref(), out.as_mut()) else {
            return fail(NavigoStatus::NullArgument, "report or out is null");
        };
        let r = &r.inner;
        let nan = |v: Option<f64>| v.unwrap_or(f64::NAN);
        *out = NavigoSummary {
            interests_expressed: r.interests_expressed as u64,
            interests_satisfied: r.interests_satisfied as u64,
            success_rate: nan(r.success_rate),
            user_satisfaction: nan(r.user_satisfaction),
            channel_accesses_per_satisfied: nan(r.channel_accesses_per_satisfied),
            infra_load: nan(r.infra_load),
            infra_offload: nan(r.infra_offload),
            rtt_p95_ms: nan(r.rtt_p95_ms),
            max_faces_per_prefix: r.max_faces_per_prefix,
            mean_queue_depth: nan(r.mean_queue_depth),
        };
        NavigoStatus::Ok
    })
}

/// Frees a report. Null is ignored.
///
/// # Safety
/// `report` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn navigo_report_free(report: *mut NavigoReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
