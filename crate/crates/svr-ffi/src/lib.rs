//! C ABI over the kernel. Modules are opaque handles; results come back
//! as JSON strings following the CLI report schema. All functions are
//! panic-safe and signal failure through [`SvrStatus`].
//!
//! The generated header lives at `include/svr.h`.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use svr_core::equivalence::{decide, Budget, Polarity};
use svr_core::machine::{run, NullOracle};
use svr_core::report::{EquivReport, Report};
use svr_core::surface::{
    desugar_expr_in_scope, elaborate_module, link_definition, parse_expr_snippet, Module,
};
use svr_core::syntax::{free_vars_term, fresh, Name, Process, Stack};
use svr_core::types::restrict_to_equational;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SvrStatus {
    /// The call succeeded.
    SvrOk = 0,
    /// A pointer argument was null.
    SvrNullArgument = 1,
    /// A string argument was not valid UTF-8.
    SvrInvalidUtf8 = 2,
    /// The requested definition does not exist or is not runnable.
    SvrNotFound = 3,
    /// An internal panic was caught; the handle is still valid.
    SvrInternal = 4,
}

/// An elaborated module (opaque).
pub struct SvrModule {
    module: Module,
}

fn budget_with_fuel(fuel: u64) -> Budget {
    let mut b = Budget::default();
    if fuel > 0 {
        b.machine_fuel = fuel;
    }
    b
}

unsafe fn cstr_arg<'a>(p: *const c_char) -> Result<&'a str, SvrStatus> {
    if p.is_null() {
        return Err(SvrStatus::SvrNullArgument);
    }
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| SvrStatus::SvrInvalidUtf8)
}

fn out_string(out: *mut *mut c_char, s: String) -> SvrStatus {
    if out.is_null() {
        return SvrStatus::SvrNullArgument;
    }
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            SvrStatus::SvrOk
        }
        Err(_) => SvrStatus::SvrInternal,
    }
}

/// Parse and elaborate a module from source. Always produces a handle on
/// success of the call itself; parse and check failures are recorded in
/// the module's report. `machine_fuel` of 0 selects the default budget.
///
/// # Safety
/// `source` must be a valid NUL-terminated string; `out` must be a valid
/// pointer. The returned handle must be released with
/// [`svr_module_free`].
#[no_mangle]
pub unsafe extern "C" fn svr_module_load(
    source: *const c_char,
    machine_fuel: u64,
    out: *mut *mut SvrModule,
) -> SvrStatus {
    if out.is_null() {
        return SvrStatus::SvrNullArgument;
    }
    let src = match unsafe { cstr_arg(source) } {
        Ok(s) => s.to_owned(),
        Err(e) => return e,
    };
    let result = catch_unwind(|| elaborate_module(&src, &budget_with_fuel(machine_fuel)));
    match result {
        Ok(module) => {
            let handle = Box::new(SvrModule { module });
            unsafe { *out = Box::into_raw(handle) };
            SvrStatus::SvrOk
        }
        Err(_) => SvrStatus::SvrInternal,
    }
}

/// Release a module handle. A null handle is ignored.
///
/// # Safety
/// `module` must be a handle from [`svr_module_load`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn svr_module_free(module: *mut SvrModule) {
    if !module.is_null() {
        drop(unsafe { Box::from_raw(module) });
    }
}

/// The check report of a loaded module, as JSON.
///
/// # Safety
/// `module` must be a live handle; `out_json` must be valid. The returned
/// string must be released with [`svr_string_free`].
#[no_mangle]
pub unsafe extern "C" fn svr_module_report_json(
    module: *const SvrModule,
    emit_derivations: bool,
    out_json: *mut *mut c_char,
) -> SvrStatus {
    let Some(handle) = (unsafe { module.as_ref() }) else {
        return SvrStatus::SvrNullArgument;
    };
    let report = catch_unwind(AssertUnwindSafe(|| {
        Report::from_module("check", &handle.module, emit_derivations).to_json_string()
    }));
    match report {
        Ok(json) => out_string(out_json, json),
        Err(_) => SvrStatus::SvrInternal,
    }
}

/// Run a definition on the abstract machine; the outcome is returned as a
/// JSON report. `fuel` of 0 selects the default.
///
/// # Safety
/// `module` must be a live handle; `main_name` a valid string; `out_json`
/// valid. Release the string with [`svr_string_free`].
#[no_mangle]
pub unsafe extern "C" fn svr_module_run_json(
    module: *const SvrModule,
    main_name: *const c_char,
    fuel: u64,
    out_json: *mut *mut c_char,
) -> SvrStatus {
    let Some(handle) = (unsafe { module.as_ref() }) else {
        return SvrStatus::SvrNullArgument;
    };
    let main = match unsafe { cstr_arg(main_name) } {
        Ok(s) => s.to_owned(),
        Err(e) => return e,
    };
    let fuel = if fuel == 0 { 100_000 } else { fuel };
    let result = catch_unwind(AssertUnwindSafe(|| {
        let linked = link_definition(&handle.module, &Name::new(&main))?;
        if !free_vars_term(&linked).is_empty() {
            return Err(format!("`{main}` is not closed"));
        }
        let process = Process::new(linked, Stack::Var(fresh(&Name::new("α"))));
        let outcome = run(&process, fuel, &NullOracle);
        let mut report = Report::new("run");
        report.set_run(&main, &outcome, None);
        Ok(report.to_json_string())
    }));
    match result {
        Ok(Ok(json)) => out_string(out_json, json),
        Ok(Err(_)) => SvrStatus::SvrNotFound,
        Err(_) => SvrStatus::SvrInternal,
    }
}

/// Decide an equivalence between two expressions in the module's scope;
/// the verdict and certificate are returned as a JSON report.
///
/// # Safety
/// `module` must be a live handle; `lhs`/`rhs` valid strings; `out_json`
/// valid. Release the string with [`svr_string_free`].
#[no_mangle]
pub unsafe extern "C" fn svr_module_equiv_json(
    module: *const SvrModule,
    lhs: *const c_char,
    rhs: *const c_char,
    machine_fuel: u64,
    out_json: *mut *mut c_char,
) -> SvrStatus {
    let Some(handle) = (unsafe { module.as_ref() }) else {
        return SvrStatus::SvrNullArgument;
    };
    let (lhs, rhs) = match (unsafe { cstr_arg(lhs) }, unsafe { cstr_arg(rhs) }) {
        (Ok(a), Ok(b)) => (a.to_owned(), b.to_owned()),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    let budget = budget_with_fuel(machine_fuel);
    let result = catch_unwind(AssertUnwindSafe(|| {
        let parse_side = |text: &str| -> Result<_, String> {
            let e = parse_expr_snippet(text).map_err(|d| d.render())?;
            desugar_expr_in_scope(text, &handle.module, &e)
                .map_err(|d| d.first().map(|d| d.render()).unwrap_or_default())
        };
        let l = parse_side(&lhs)?;
        let r = parse_side(&rhs)?;
        let e = restrict_to_equational(&handle.module.ctx);
        let verdict = decide(&e, &l, &r, Polarity::Equiv, &budget);
        let mut report = Report::new("equiv");
        report.status = match &verdict {
            svr_core::equivalence::Verdict::Proved { .. } => "proved".into(),
            svr_core::equivalence::Verdict::Refuted { .. } => "refuted".into(),
            svr_core::equivalence::Verdict::Unknown => "unknown".into(),
        };
        report.equiv = Some(EquivReport { lhs: l.to_string(), rhs: r.to_string(), verdict });
        Ok::<String, String>(report.to_json_string())
    }));
    match result {
        Ok(Ok(json)) => out_string(out_json, json),
        Ok(Err(_)) => SvrStatus::SvrNotFound,
        Err(_) => SvrStatus::SvrInternal,
    }
}

/// Release a string returned by this library. A null pointer is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn svr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn svr_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}
