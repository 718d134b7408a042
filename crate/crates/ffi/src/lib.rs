//! C ABI over the `blaschke` crate.
//!
//! Products and factorization results cross the boundary as opaque handles
//! that the caller frees. Every fallible call returns a [`BlaschkeStatus`];
//! on failure the message is available from [`blaschke_last_error`] on the
//! same thread until the next failing call.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use blaschke::{compose, factorize_all, json, report, BlaschkeProduct, ComplexPoint, Config, Error, ErrorKind};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlaschkeStatus {
    Ok = 0,
    InvalidInput = 1,
    Numerical = 2,
    Declined = 3,
    NullPointer = 4,
    OutOfRange = 5,
    Panic = 6,
}

impl From<ErrorKind> for BlaschkeStatus {
    fn from(kind: ErrorKind) -> Self {
        match kind {
            ErrorKind::InvalidInput => BlaschkeStatus::InvalidInput,
            ErrorKind::Numerical => BlaschkeStatus::Numerical,
            ErrorKind::Declined => BlaschkeStatus::Declined,
        }
    }
}

/// Tunables exposed to C. Start from [`blaschke_options_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct BlaschkeOptions {
    /// Sup-norm residual a factorization must meet.
    pub residual: f64,
    /// Angles per verification radius.
    pub grid: usize,
    pub seed: u64,
}

impl BlaschkeOptions {
    fn config(&self) -> Config {
        Config {
            residual: self.residual,
            grid: self.grid,
            seed: self.seed,
            ..Config::default()
        }
    }
}

/// Opaque product handle.
pub struct BlaschkeProductHandle(BlaschkeProduct);

/// Opaque list of verified factorizations.
pub struct BlaschkeFactorizations(Vec<blaschke::Factorization>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: BlaschkeStatus, message: impl Into<String>) -> BlaschkeStatus {
    set_error(message.into());
    status
}

fn from_error(e: Error) -> BlaschkeStatus {
    fail(e.kind().into(), e.to_string())
}

fn guard(f: impl FnOnce() -> BlaschkeStatus) -> BlaschkeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(BlaschkeStatus::Panic, "internal panic"),
    }
}

fn options(opts: *const BlaschkeOptions) -> Result<Config, BlaschkeStatus> {
    let cfg = if opts.is_null() {
        Config::default()
    } else {
        unsafe { *opts }.config()
    };
    if cfg.grid == 0 || !(cfg.residual > 0.0) {
        return Err(fail(
            BlaschkeStatus::InvalidInput,
            "options: residual and grid must be positive",
        ));
    }
    Ok(cfg)
}

fn emit<T>(out: *mut *mut T, value: T) -> BlaschkeStatus {
    unsafe { *out = Box::into_raw(Box::new(value)) };
    BlaschkeStatus::Ok
}

fn emit_string(out: *mut *mut c_char, text: String) -> BlaschkeStatus {
    match CString::new(text) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            BlaschkeStatus::Ok
        }
        Err(_) => fail(BlaschkeStatus::Panic, "string contains NUL"),
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(BlaschkeStatus::NullPointer, concat!(stringify!($p), " is null"));
        })+
    };
}

#[no_mangle]
pub extern "C" fn blaschke_options_default() -> BlaschkeOptions {
    let cfg = Config::default();
    BlaschkeOptions {
        residual: cfg.residual,
        grid: cfg.grid,
        seed: cfg.seed,
    }
}

/// Message of the last failure on this thread, or NULL. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn blaschke_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a product from `lambda` and `degree` zeros given as interleaved
/// `re, im` pairs.
///
/// # Safety
/// `zeros` must point to `2 * degree` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn blaschke_product_new(
    lambda_re: f64,
    lambda_im: f64,
    zeros: *const f64,
    degree: usize,
    out: *mut *mut BlaschkeProductHandle,
) -> BlaschkeStatus {
    guard(|| {
        non_null!(out);
        if degree > 0 {
            non_null!(zeros);
        }
        let raw: &[f64] = if degree == 0 {
            &[]
        } else {
            unsafe { std::slice::from_raw_parts(zeros, 2 * degree) }
        };
        let zeros: Vec<ComplexPoint> = raw.chunks(2).map(|p| ComplexPoint::new(p[0], p[1])).collect();
        match BlaschkeProduct::new(ComplexPoint::new(lambda_re, lambda_im), zeros) {
            Ok(b) => emit(out, BlaschkeProductHandle(b)),
            Err(e) => from_error(e),
        }
    })
}

/// Parses `{"lambda": [re, im], "zeros": [[re, im], ...]}`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn blaschke_product_from_json(
    text: *const c_char,
    out: *mut *mut BlaschkeProductHandle,
) -> BlaschkeStatus {
    guard(|| {
        non_null!(text, out);
        let Ok(text) = unsafe { CStr::from_ptr(text) }.to_str() else {
            return fail(BlaschkeStatus::InvalidInput, "text is not UTF-8");
        };
        match BlaschkeProduct::from_json_str(text) {
            Ok(b) => emit(out, BlaschkeProductHandle(b)),
            Err(e) => from_error(e),
        }
    })
}

/// Seeded random product with zeros uniform in the disk of radius `radius`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn blaschke_product_random(
    degree: usize,
    seed: u64,
    radius: f64,
    out: *mut *mut BlaschkeProductHandle,
) -> BlaschkeStatus {
    guard(|| {
        non_null!(out);
        match blaschke::product::random(degree, seed, radius) {
            Ok(b) => emit(out, BlaschkeProductHandle(b)),
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `product` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn blaschke_product_free(product: *mut BlaschkeProductHandle) {
    if !product.is_null() {
        drop(unsafe { Box::from_raw(product) });
    }
}

/// Degree of the product, 0 for NULL.
///
/// # Safety
/// `product` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn blaschke_product_degree(product: *const BlaschkeProductHandle) -> usize {
    unsafe { product.as_ref() }.map_or(0, |p| p.0.degree())
}

/// Copies `lambda` into `lambda_out[0..2]` and the zeros into `zeros_out`,
/// which must hold `2 * degree` doubles.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn blaschke_product_data(
    product: *const BlaschkeProductHandle,
    lambda_out: *mut f64,
    zeros_out: *mut f64,
) -> BlaschkeStatus {
    guard(|| {
        non_null!(product, lambda_out);
        let b = &unsafe { &*product }.0;
        if b.degree() > 0 {
            non_null!(zeros_out);
        }
        unsafe {
            *lambda_out = b.lambda().re;
            *lambda_out.add(1) = b.lambda().im;
            for (k, z) in b.zeros().iter().enumerate() {
                *zeros_out.add(2 * k) = z.re;
                *zeros_out.add(2 * k + 1) = z.im;
            }
        }
        BlaschkeStatus::Ok
    })
}

/// Value at a point of the open disk.
///
/// # Safety
/// `product` must be a live handle; `out_re` and `out_im` writable.
#[no_mangle]
pub unsafe extern "C" fn blaschke_product_eval(
    product: *const BlaschkeProductHandle,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> BlaschkeStatus {
    guard(|| {
        non_null!(product, out_re, out_im);
        match unsafe { &*product }.0.value(ComplexPoint::new(re, im)) {
            Ok(w) => {
                unsafe {
                    *out_re = w.re;
                    *out_im = w.im;
                }
                BlaschkeStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// JSON text of the product; release with [`blaschke_string_free`].
///
/// # Safety
/// `product` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn blaschke_product_to_json(
    product: *const BlaschkeProductHandle,
    out: *mut *mut c_char,
) -> BlaschkeStatus {
    guard(|| {
        non_null!(product, out);
        emit_string(out, json::to_string(&unsafe { &*product }.0, false))
    })
}

/// `outer ∘ inner`.
///
/// # Safety
/// Handles must be live; `opts` may be NULL for defaults; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn blaschke_compose(
    outer: *const BlaschkeProductHandle,
    inner: *const BlaschkeProductHandle,
    opts: *const BlaschkeOptions,
    out: *mut *mut BlaschkeProductHandle,
) -> BlaschkeStatus {
    guard(|| {
        non_null!(outer, inner, out);
        let cfg = match options(opts) {
            Ok(cfg) => cfg,
            Err(status) => return status,
        };
        match compose(&unsafe { &*outer }.0, &unsafe { &*inner }.0, &cfg) {
            Ok(b) => emit(out, BlaschkeProductHandle(b)),
            Err(e) => from_error(e),
        }
    })
}

/// Every inequivalent verified factorization. An empty list is success.
///
/// # Safety
/// `product` must be live; `opts` may be NULL; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn blaschke_factorize(
    product: *const BlaschkeProductHandle,
    opts: *const BlaschkeOptions,
    out: *mut *mut BlaschkeFactorizations,
) -> BlaschkeStatus {
    guard(|| {
        non_null!(product, out);
        let cfg = match options(opts) {
            Ok(cfg) => cfg,
            Err(status) => return status,
        };
        match factorize_all(&unsafe { &*product }.0, &cfg) {
            Ok(r) => emit(out, BlaschkeFactorizations(r.factorizations)),
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `list` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn blaschke_factorizations_count(list: *const BlaschkeFactorizations) -> usize {
    unsafe { list.as_ref() }.map_or(0, |l| l.0.len())
}

/// Copies of the outer and inner factors of entry `index`, and its residual.
/// Either output handle pointer may be NULL to skip it.
///
/// # Safety
/// `list` must be live; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn blaschke_factorization_get(
    list: *const BlaschkeFactorizations,
    index: usize,
    outer: *mut *mut BlaschkeProductHandle,
    inner: *mut *mut BlaschkeProductHandle,
    residual: *mut f64,
) -> BlaschkeStatus {
    guard(|| {
        non_null!(list);
        let Some(f) = unsafe { &*list }.0.get(index) else {
            return fail(BlaschkeStatus::OutOfRange, format!("index {index} out of range"));
        };
        if !outer.is_null() {
            emit(outer, BlaschkeProductHandle(f.outer.clone()));
        }
        if !inner.is_null() {
            emit(inner, BlaschkeProductHandle(f.inner.clone()));
        }
        if !residual.is_null() {
            unsafe { *residual = f.residual };
        }
        BlaschkeStatus::Ok
    })
}

/// # Safety
/// `list` must come from [`blaschke_factorize`] and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn blaschke_factorizations_free(list: *mut BlaschkeFactorizations) {
    if !list.is_null() {
        drop(unsafe { Box::from_raw(list) });
    }
}

/// Full analysis report as JSON; release with [`blaschke_string_free`].
///
/// # Safety
/// `product` must be live; `opts` may be NULL; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn blaschke_analyze_json(
    product: *const BlaschkeProductHandle,
    opts: *const BlaschkeOptions,
    pretty: bool,
    out: *mut *mut c_char,
) -> BlaschkeStatus {
    guard(|| {
        non_null!(product, out);
        let cfg = match options(opts) {
            Ok(cfg) => cfg,
            Err(status) => return status,
        };
        match report::analyze(&unsafe { &*product }.0, &cfg) {
            Ok(r) => emit_string(out, json::to_string(&r, pretty)),
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn blaschke_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
