//! C ABI over `modmove`.
//!
//! Systems and reports are opaque handles created and destroyed through this
//! interface. Every fallible function returns a [`ModmoveStatus`]; on failure
//! [`modmove_last_error`] describes the problem. Strings returned through
//! out-parameters are NUL-terminated UTF-8 and must be released with
//! [`modmove_string_free`].
//!
//! Handles are not synchronized. A handle may be read from several threads
//! at once but must not be freed while in use.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use modmove::cli::{AnalysisDocument, SuggestionDocument};
use modmove::ingest::{self, GeneratorConfig, Loaded};
use modmove::metrics::{estimate_workload, full_report};
use modmove::parallel::parallel_report;
use modmove::proponent::{
    mean_thresholds, suggest_all, what_if_move, Combine, Criterion, SuggestContext,
};
use modmove::{canonical, ClassId, IngestError, MethodId, MetricsReport, ModelError};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModmoveStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    Null = 1,
    Parse = 2,
    Validation = 3,
    Io = 4,
    InvalidArgument = 64,
    /// The library panicked; the call had no effect.
    Panic = 70,
}

pub const MODMOVE_CRITERION_SIMILARITY: u32 = 1;
pub const MODMOVE_CRITERION_COHESION: u32 = 2;
pub const MODMOVE_CRITERION_COUPLING: u32 = 4;
pub const MODMOVE_COMBINE_UNION: u32 = 0;
pub const MODMOVE_COMBINE_INTERSECTION: u32 = 1;

/// A validated system: classes, members and dependencies.
pub struct ModmoveSystem {
    loaded: Loaded,
}

/// Metrics computed for one system.
pub struct ModmoveReport {
    report: MetricsReport,
    document: AnalysisDocument,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModmoveGeneratorConfig {
    pub n_classes: usize,
    pub n_methods: usize,
    pub n_attributes: usize,
    pub max_calls_per_method: usize,
    pub max_accesses_per_method: usize,
    pub intra_class_bias: f64,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ModmoveWorkload {
    pub m: u64,
    pub c: u64,
    pub k_m: u64,
    pub k_a: u64,
    pub n_fan: u64,
    pub n_sim: u64,
    pub n_lcom: u64,
    pub n_cbo: u64,
    pub n_total: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModmoveMoveEffect {
    pub lcom_origin_before: f64,
    pub lcom_origin_after: f64,
    pub lcom_dest_before: f64,
    pub lcom_dest_after: f64,
    pub cbo_origin_before: u32,
    pub cbo_origin_after: u32,
    pub cbo_dest_before: u32,
    pub cbo_dest_after: u32,
    pub origin_emptied: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

type Failure = (ModmoveStatus, String);

fn set_last_error(message: Option<String>) {
    let message = message.map(|m| CString::new(m.replace('\0', " ")).expect("NUL bytes removed"));
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ModmoveStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(None);
            ModmoveStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_last_error(Some(message));
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_owned());
            set_last_error(Some(format!("internal error: {message}")));
            ModmoveStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    (ModmoveStatus::Null, format!("{name} is NULL"))
}

fn from_ingest(e: IngestError) -> Failure {
    let status = match e {
        IngestError::Io { .. } => ModmoveStatus::Io,
        IngestError::Parse { .. } | IngestError::UnsupportedSchema { .. } => ModmoveStatus::Parse,
        IngestError::Model(_) => ModmoveStatus::Validation,
    };
    (status, e.to_string())
}

fn from_model(e: ModelError) -> Failure {
    let status = match e {
        ModelError::Invalid(_) => ModmoveStatus::Validation,
        _ => ModmoveStatus::InvalidArgument,
    };
    (status, e.to_string())
}

/// # Safety
/// `p` is NULL or points to a NUL-terminated string.
unsafe fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|e| {
        (
            ModmoveStatus::InvalidArgument,
            format!("{name} is not UTF-8: {e}"),
        )
    })
}

/// # Safety
/// `p` is NULL or a live handle.
unsafe fn read_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

/// # Safety
/// `out` is NULL or writable.
unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

/// # Safety
/// `out` is NULL or writable.
unsafe fn write_string(out: *mut *mut c_char, text: String) -> Result<(), Failure> {
    let c = CString::new(text).map_err(|e| (ModmoveStatus::InvalidArgument, e.to_string()))?;
    write_out(out, c.into_raw(), "out")
}

/// Message for the most recent failed call on this thread, or NULL after a
/// successful call. The pointer stays valid until the next call on the same
/// thread.
#[no_mangle]
pub extern "C" fn modmove_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` is NULL or a string returned through an out-parameter of this library
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn modmove_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Reads and validates a facts file.
///
/// # Safety
/// `path` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn modmove_system_load(
    path: *const c_char,
    out: *mut *mut ModmoveSystem,
) -> ModmoveStatus {
    guard(|| {
        let path = read_str(path, "path")?;
        let loaded = ingest::load_facts(path).map_err(from_ingest)?;
        write_out(
            out,
            Box::into_raw(Box::new(ModmoveSystem { loaded })),
            "out",
        )
    })
}

/// Parses and validates facts JSON held in memory.
///
/// # Safety
/// `json` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn modmove_system_parse(
    json: *const c_char,
    out: *mut *mut ModmoveSystem,
) -> ModmoveStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let loaded = ingest::parse_facts(text).map_err(from_ingest)?;
        write_out(
            out,
            Box::into_raw(Box::new(ModmoveSystem { loaded })),
            "out",
        )
    })
}

#[no_mangle]
pub extern "C" fn modmove_generator_config_default() -> ModmoveGeneratorConfig {
    let d = GeneratorConfig::default();
    ModmoveGeneratorConfig {
        n_classes: d.n_classes,
        n_methods: d.n_methods,
        n_attributes: d.n_attributes,
        max_calls_per_method: d.max_calls_per_method,
        max_accesses_per_method: d.max_accesses_per_method,
        intra_class_bias: d.intra_class_bias,
        seed: d.seed,
    }
}

/// Generates a synthetic system; the same configuration always yields the
/// same system.
///
/// # Safety
/// `config` points to a readable configuration; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn modmove_system_generate(
    config: *const ModmoveGeneratorConfig,
    out: *mut *mut ModmoveSystem,
) -> ModmoveStatus {
    guard(|| {
        let c = read_ref(config, "config")?;
        let config = GeneratorConfig {
            n_classes: c.n_classes,
            n_methods: c.n_methods,
            n_attributes: c.n_attributes,
            max_calls_per_method: c.max_calls_per_method,
            max_accesses_per_method: c.max_accesses_per_method,
            intra_class_bias: c.intra_class_bias,
            seed: c.seed,
        };
        let (model, deps) = ingest::generate(&config)
            .map_err(|e| (ModmoveStatus::InvalidArgument, e.to_string()))?;
        let loaded = Loaded {
            model,
            deps,
            warnings: Vec::new(),
        };
        write_out(
            out,
            Box::into_raw(Box::new(ModmoveSystem { loaded })),
            "out",
        )
    })
}

/// Destroys a system. NULL is ignored.
///
/// # Safety
/// `system` is NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn modmove_system_free(system: *mut ModmoveSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// Class, method and attribute counts. Any output pointer may be NULL.
///
/// # Safety
/// `system` is a live handle; non-NULL outputs are writable.
#[no_mangle]
pub unsafe extern "C" fn modmove_system_counts(
    system: *const ModmoveSystem,
    classes: *mut usize,
    methods: *mut usize,
    attributes: *mut usize,
) -> ModmoveStatus {
    guard(|| {
        let model = &read_ref(system, "system")?.loaded.model;
        for (out, v) in [
            (classes, model.n_classes()),
            (methods, model.n_methods()),
            (attributes, model.n_attributes()),
        ] {
            if !out.is_null() {
                out.write(v);
            }
        }
        Ok(())
    })
}

/// The system as canonical facts JSON.
///
/// # Safety
/// `system` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn modmove_system_to_json(
    system: *const ModmoveSystem,
    out: *mut *mut c_char,
) -> ModmoveStatus {
    guard(|| {
        let loaded = &read_ref(system, "system")?.loaded;
        write_string(out, ingest::render_facts(&loaded.model, &loaded.deps))
    })
}

/// Worst-case count of metric values for the system.
///
/// # Safety
/// `system` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn modmove_system_workload(
    system: *const ModmoveSystem,
    out: *mut ModmoveWorkload,
) -> ModmoveStatus {
    guard(|| {
        let loaded = &read_ref(system, "system")?.loaded;
        let w = estimate_workload(&loaded.model, &loaded.deps);
        let value = ModmoveWorkload {
            m: w.m,
            c: w.c,
            k_m: w.k_m,
            k_a: w.k_a,
            n_fan: w.n_fan,
            n_sim: w.n_sim,
            n_lcom: w.n_lcom,
            n_cbo: w.n_cbo,
            n_total: w.n_total,
        };
        write_out(out, value, "out")
    })
}

/// Computes every metric. `workers` 0 selects the sequential engine; any
/// other value runs the parallel engine with that many workers. Both give
/// identical reports.
///
/// # Safety
/// `system` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn modmove_analyze(
    system: *const ModmoveSystem,
    workers: usize,
    out: *mut *mut ModmoveReport,
) -> ModmoveStatus {
    guard(|| {
        let loaded = &read_ref(system, "system")?.loaded;
        let report = if workers == 0 {
            full_report(&loaded.model, &loaded.deps)
        } else {
            parallel_report(&loaded.model, &loaded.deps, workers)
        }
        .map_err(from_model)?;
        let document =
            AnalysisDocument::new(&loaded.model, &loaded.deps, &report, &loaded.warnings);
        write_out(
            out,
            Box::into_raw(Box::new(ModmoveReport { report, document })),
            "out",
        )
    })
}

/// Destroys a report. NULL is ignored.
///
/// # Safety
/// `report` is NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn modmove_report_free(report: *mut ModmoveReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// The report as canonical JSON, byte-identical to `modmove analyze`.
///
/// # Safety
/// `report` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn modmove_report_to_json(
    report: *const ModmoveReport,
    out: *mut *mut c_char,
) -> ModmoveStatus {
    guard(|| {
        let r = read_ref(report, "report")?;
        write_string(
            out,
            canonical::to_string(&r.document).expect("report serializes"),
        )
    })
}

/// Normalized LCOM of one class.
///
/// # Safety
/// `report` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn modmove_report_lcom(
    report: *const ModmoveReport,
    class_id: u32,
    out: *mut f64,
) -> ModmoveStatus {
    guard(|| {
        let r = read_ref(report, "report")?;
        let v = *r
            .report
            .lcom
            .get(class_id as usize)
            .ok_or_else(|| from_model(ModelError::UnknownClass(ClassId(class_id))))?;
        write_out(out, v, "out")
    })
}

/// CBO of one class.
///
/// # Safety
/// `report` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn modmove_report_cbo(
    report: *const ModmoveReport,
    class_id: u32,
    out: *mut u32,
) -> ModmoveStatus {
    guard(|| {
        let r = read_ref(report, "report")?;
        let v = *r
            .report
            .cbo
            .get(class_id as usize)
            .ok_or_else(|| from_model(ModelError::UnknownClass(ClassId(class_id))))?;
        write_out(out, v, "out")
    })
}

/// Number of stored (nonzero) method-pair similarities.
///
/// # Safety
/// `report` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn modmove_report_similarity_count(
    report: *const ModmoveReport,
    out: *mut usize,
) -> ModmoveStatus {
    guard(|| {
        let r = read_ref(report, "report")?;
        write_out(out, r.report.similarity.len(), "out")
    })
}

/// LCOM and CBO of origin and destination if `method` moved from `origin`
/// to `destination`. The system is not modified.
///
/// # Safety
/// `system` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn modmove_what_if_move(
    system: *const ModmoveSystem,
    method: u32,
    origin: u32,
    destination: u32,
    out: *mut ModmoveMoveEffect,
) -> ModmoveStatus {
    guard(|| {
        let loaded = &read_ref(system, "system")?.loaded;
        let e = what_if_move(
            MethodId(method),
            ClassId(origin),
            ClassId(destination),
            &loaded.model,
            &loaded.deps,
        )
        .map_err(from_model)?;
        let value = ModmoveMoveEffect {
            lcom_origin_before: e.lcom_origin_before,
            lcom_origin_after: e.lcom_origin_after,
            lcom_dest_before: e.lcom_dest_before,
            lcom_dest_after: e.lcom_dest_after,
            cbo_origin_before: e.cbo_origin_before,
            cbo_origin_after: e.cbo_origin_after,
            cbo_dest_before: e.cbo_dest_before,
            cbo_dest_after: e.cbo_dest_after,
            origin_emptied: e.origin_emptied,
        };
        write_out(out, value, "out")
    })
}

/// Move suggestions as canonical JSON, using mean thresholds.
///
/// `criteria` is a bit set of `MODMOVE_CRITERION_*`; `combine` is one of
/// `MODMOVE_COMBINE_*`; `workers` must be at least 1. `report` must have been
/// computed from `system`.
///
/// # Safety
/// `system` and `report` are live handles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn modmove_suggest_json(
    system: *const ModmoveSystem,
    report: *const ModmoveReport,
    criteria: u32,
    combine: u32,
    workers: usize,
    out: *mut *mut c_char,
) -> ModmoveStatus {
    guard(|| {
        let loaded = &read_ref(system, "system")?.loaded;
        let r = read_ref(report, "report")?;
        let (model, deps) = (&loaded.model, &loaded.deps);
        let invalid = |m: String| (ModmoveStatus::InvalidArgument, m);
        if r.report.lcom.len() != model.n_classes() || r.report.fan_in.len() != model.n_methods() {
            return Err(invalid("report was not computed from this system".into()));
        }
        let all =
            MODMOVE_CRITERION_SIMILARITY | MODMOVE_CRITERION_COHESION | MODMOVE_CRITERION_COUPLING;
        if criteria == 0 || criteria & !all != 0 {
            return Err(invalid(format!(
                "criteria bit set {criteria:#x} is empty or has unknown bits"
            )));
        }
        let combine = match combine {
            MODMOVE_COMBINE_UNION => Combine::Union,
            MODMOVE_COMBINE_INTERSECTION => Combine::Intersection,
            other => return Err(invalid(format!("unknown combine mode {other}"))),
        };
        let selected: Vec<Criterion> = [
            (MODMOVE_CRITERION_SIMILARITY, Criterion::Similarity),
            (MODMOVE_CRITERION_COHESION, Criterion::Cohesion),
            (MODMOVE_CRITERION_COUPLING, Criterion::Coupling),
        ]
        .into_iter()
        .filter(|(bit, _)| criteria & bit != 0)
        .map(|(_, c)| c)
        .collect();

        let thresholds = mean_thresholds(&r.report);
        let ctx = SuggestContext::new(model, deps, &r.report, thresholds).with_workers(workers);
        let suggestions = suggest_all(&ctx, &selected, combine).map_err(from_model)?;
        let doc = SuggestionDocument::new(model, selected, combine, thresholds, suggestions);
        write_string(
            out,
            canonical::to_string(&doc).expect("suggestions serialize"),
        )
    })
}
