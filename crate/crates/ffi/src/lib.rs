//! C ABI over `apsquares`.
//!
//! Every function returns an [`ApsqStatus`] and writes results through out
//! pointers. On failure a message is kept per thread and can be copied out with
//! [`apsq_last_error_message`]. Scans and Pell orbits are returned as opaque
//! handles that the caller releases with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use apsquares::ap::{self, Delta, Region, ScanSpec, Theorem, YRule};
use apsquares::lfun::{self, DirichletChar};
use apsquares::quad;
use apsquares::spectral::{self, DoubleOptions, IdentityReport, SingleOptions};
use apsquares::{arith, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApsqStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Pole = 3,
    Overflow = 4,
    BoundTooLarge = 5,
    FactorizationBudget = 6,
    NotPrime = 7,
    IndexOutOfRange = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApsqRegionKind {
    Ratio = 0,
    Max = 1,
    Rect = 2,
    Product = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApsqTheorem {
    RatlPoints = 0,
    BoundedMax = 1,
    NaturalXy = 2,
    FirstTwo = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApsqCharacter {
    Chi8 = 0,
    Chi4 = 1,
    Principal8 = 2,
}

/// A counting region. `delta_num/delta_den` is read for `Ratio`, `y` for `Rect`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ApsqRegion {
    pub kind: ApsqRegionKind,
    pub x: u64,
    pub delta_num: u64,
    pub delta_den: u64,
    pub y: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ApsqIdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
    pub lhs_tail: f64,
    pub rhs_tail: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Parameters of a scan. For `NaturalXy`, `Y = floor(X^(y_exp_num / y_exp_den))`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ApsqScanParams {
    pub theorem: ApsqTheorem,
    pub delta_num: u64,
    pub delta_den: u64,
    pub y_exp_num: u32,
    pub y_exp_den: u32,
    pub include_trivial: bool,
    /// Worker threads; 0 picks the number of cores.
    pub threads: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ApsqCountRow {
    pub x: u64,
    /// Ratio bound for `RatlPoints`, 0/1 otherwise.
    pub delta_num: u64,
    pub delta_den: u64,
    /// Rectangle height for `NaturalXy`, 0 otherwise.
    pub y: u64,
    pub count: u64,
    pub main_term: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    pub elapsed_ms: u64,
}

/// Opaque scan result.
pub struct ApsqScan {
    rows: Vec<ApsqCountRow>,
}

/// Opaque list of Pell solutions `(c, b)`.
pub struct ApsqPell {
    solutions: Vec<(u64, u64)>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ApsqStatus {
    match e {
        Error::FactorizationBudget(_) => ApsqStatus::FactorizationBudget,
        Error::NotPrime(_) => ApsqStatus::NotPrime,
        Error::Overflow(_) => ApsqStatus::Overflow,
        Error::Domain(_) => ApsqStatus::Domain,
        Error::Pole(_) => ApsqStatus::Pole,
        Error::BoundTooLarge { .. } => ApsqStatus::BoundTooLarge,
    }
}

enum Fail {
    Lib(Error),
    Status(ApsqStatus, String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn null(what: &str) -> Fail {
    Fail::Status(ApsqStatus::NullPointer, format!("{what} is null"))
}

/// Run `f`, translating errors and panics into a status and the thread's
/// last-error message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ApsqStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ApsqStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            ApsqStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn region_from(r: &ApsqRegion) -> Result<Region, Fail> {
    Ok(match r.kind {
        ApsqRegionKind::Ratio => Region::RatioBound {
            x: r.x,
            delta: Delta::new(r.delta_num, r.delta_den)?,
        },
        ApsqRegionKind::Max => Region::MaxBound { x: r.x },
        ApsqRegionKind::Rect => Region::Rect { x: r.x, y: r.y },
        ApsqRegionKind::Product => Region::ProductBound { x: r.x },
    })
}

fn threads_or_default(t: u32) -> usize {
    if t == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        t as usize
    }
}

fn report_from(r: &IdentityReport) -> ApsqIdentityReport {
    ApsqIdentityReport {
        lhs: r.lhs,
        rhs: r.rhs,
        abs_diff: r.abs_diff,
        rel_diff: r.rel_diff,
        lhs_tail: r.lhs_tail,
        rhs_tail: r.rhs_tail,
        tolerance: r.tolerance,
        pass: r.pass,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn apsq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL, or 0
/// when there is no error.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn apsq_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Number of representations of `n` as a sum of two squares.
///
/// # Safety
/// `out` must be null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn apsq_r2(n: u64, out: *mut u64) -> ApsqStatus {
    guard(|| write(out, arith::r2(n)?, "out"))
}

/// Hecke eigenvalue `lambda_m(n)`.
///
/// # Safety
/// `out` must be null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn apsq_lambda(n: u64, m: i64, out: *mut f64) -> ApsqStatus {
    guard(|| write(out, quad::lambda_n(n, m)?, "out"))
}

/// `L(s, chi)` for `s > 0`.
///
/// # Safety
/// `out` must be null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn apsq_dirichlet_l(s: f64, chi: ApsqCharacter, out: *mut f64) -> ApsqStatus {
    let which = match chi {
        ApsqCharacter::Chi8 => DirichletChar::Chi8,
        ApsqCharacter::Chi4 => DirichletChar::Chi4,
        ApsqCharacter::Principal8 => DirichletChar::Principal8,
    };
    guard(|| write(out, lfun::dirichlet_l(s, which)?.value, "out"))
}

/// `L(s, eta^m2)` truncated at `prime_bound`; `tail` may be null.
///
/// # Safety
/// `out` must be valid; `tail` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn apsq_hecke_l(s: f64, m2: i64, prime_bound: u64, out: *mut f64, tail: *mut f64) -> ApsqStatus {
    guard(|| {
        let v = lfun::hecke_l(s, m2, prime_bound)?;
        write(out, v.value, "out")?;
        if !tail.is_null() {
            tail.write(v.tail_estimate);
        }
        Ok(())
    })
}

/// Exact number of APs in `region`. `threads = 0` uses every core.
///
/// # Safety
/// `region` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn apsq_count_region(
    region: *const ApsqRegion,
    include_trivial: bool,
    threads: u32,
    out: *mut u64,
) -> ApsqStatus {
    guard(|| {
        let r = region.as_ref().ok_or_else(|| null("region"))?;
        let n = ap::count_region_with(region_from(r)?, include_trivial, threads_or_default(threads))?;
        write(out, n, "out")
    })
}

/// Closed-form main term of the count in `region`.
///
/// # Safety
/// `region` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn apsq_main_term(region: *const ApsqRegion, out: *mut f64) -> ApsqStatus {
    guard(|| {
        let r = region.as_ref().ok_or_else(|| null("region"))?;
        write(out, ap::main_term(region_from(r)?)?, "out")
    })
}

/// Both sides of the single-series identity at `(h, s)`. `b_max = 0` selects
/// the default orbit cutoff.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn apsq_verify_single(
    h: u64,
    s: f64,
    tolerance: f64,
    m_max: u32,
    b_max: u64,
    out: *mut ApsqIdentityReport,
) -> ApsqStatus {
    guard(|| {
        let opts = SingleOptions {
            tolerance,
            m_max,
            b_max: (b_max > 0).then_some(b_max as u128),
        };
        write(out, report_from(&spectral::verify_single(h, s, &opts)?), "out")
    })
}

/// Both sides of the double-series identity at `(s, w)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn apsq_verify_double(
    s: f64,
    w: f64,
    tolerance: f64,
    h_max: u64,
    m_max: u32,
    prime_bound: u64,
    out: *mut ApsqIdentityReport,
) -> ApsqStatus {
    guard(|| {
        let opts = DoubleOptions {
            tolerance,
            h_max,
            m_max,
            prime_bound,
        };
        write(out, report_from(&spectral::verify_double(s, w, &opts)?), "out")
    })
}

/// Count along `grid` and compare with the main term. Release the handle with
/// [`apsq_scan_free`].
///
/// # Safety
/// `params` and `out` must be valid; `grid` must hold `grid_len` values.
#[no_mangle]
pub unsafe extern "C" fn apsq_scan_new(
    params: *const ApsqScanParams,
    grid: *const u64,
    grid_len: usize,
    out: *mut *mut ApsqScan,
) -> ApsqStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = if grid_len == 0 {
            &[][..]
        } else if grid.is_null() {
            return Err(null("grid"));
        } else {
            std::slice::from_raw_parts(grid, grid_len)
        };
        let theorem = match p.theorem {
            ApsqTheorem::RatlPoints => Theorem::RatlPoints,
            ApsqTheorem::BoundedMax => Theorem::BoundedMax,
            ApsqTheorem::NaturalXy => Theorem::NaturalXy,
            ApsqTheorem::FirstTwo => Theorem::FirstTwo,
        };
        let spec = ScanSpec {
            theorem,
            delta: if theorem == Theorem::RatlPoints {
                Delta::new(p.delta_num, p.delta_den)?
            } else {
                Delta::ONE
            },
            y_rule: YRule::Power {
                num: p.y_exp_num,
                den: p.y_exp_den,
            },
            include_trivial: p.include_trivial,
        };
        let rows = ap::scan(&spec, grid, threads_or_default(p.threads))?
            .iter()
            .map(|r| {
                let (delta_num, delta_den, y) = match r.region {
                    Region::RatioBound { delta, .. } => (delta.num(), delta.den(), 0),
                    Region::Rect { y, .. } => (0, 1, y),
                    _ => (0, 1, 0),
                };
                ApsqCountRow {
                    x: r.x,
                    delta_num,
                    delta_den,
                    y,
                    count: r.count,
                    main_term: r.main_term,
                    abs_error: r.abs_error,
                    rel_error: r.rel_error,
                    elapsed_ms: r.elapsed.as_millis() as u64,
                }
            })
            .collect();
        out.write(Box::into_raw(Box::new(ApsqScan { rows })));
        Ok(())
    })
}

/// Number of rows in a scan; 0 for a null handle.
///
/// # Safety
/// `scan` must be null or a live handle from [`apsq_scan_new`].
#[no_mangle]
pub unsafe extern "C" fn apsq_scan_len(scan: *const ApsqScan) -> usize {
    scan.as_ref().map_or(0, |s| s.rows.len())
}

/// Copy row `index` of a scan.
///
/// # Safety
/// `scan` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn apsq_scan_row(scan: *const ApsqScan, index: usize, out: *mut ApsqCountRow) -> ApsqStatus {
    guard(|| {
        let s = scan.as_ref().ok_or_else(|| null("scan"))?;
        let row = *s.rows.get(index).ok_or_else(|| {
            Fail::Status(
                ApsqStatus::IndexOutOfRange,
                format!("row {index} out of range for {} rows", s.rows.len()),
            )
        })?;
        write(out, row, "out")
    })
}

/// Release a scan. Null is ignored.
///
/// # Safety
/// `scan` must be null or a handle from [`apsq_scan_new`] not freed before.
#[no_mangle]
pub unsafe extern "C" fn apsq_scan_free(scan: *mut ApsqScan) {
    if !scan.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(scan))));
    }
}

/// Solutions of `c^2 - 2 b^2 = -h` with `c >= 0` and `b <= b_max`, sorted by
/// `b`. Release with [`apsq_pell_free`].
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn apsq_pell_new(h: u64, b_max: u64, out: *mut *mut ApsqPell) -> ApsqStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let orbit = quad::pell_solutions(h, b_max as u128)?;
        let solutions = orbit
            .solutions
            .iter()
            .map(|&(c, b)| {
                Ok((
                    u64::try_from(c).map_err(|_| Error::Overflow("Pell solution"))?,
                    b as u64,
                ))
            })
            .collect::<Result<Vec<_>, Error>>()?;
        out.write(Box::into_raw(Box::new(ApsqPell { solutions })));
        Ok(())
    })
}

/// Number of solutions held; 0 for a null handle.
///
/// # Safety
/// `pell` must be null or a live handle from [`apsq_pell_new`].
#[no_mangle]
pub unsafe extern "C" fn apsq_pell_len(pell: *const ApsqPell) -> usize {
    pell.as_ref().map_or(0, |p| p.solutions.len())
}

/// Solution `index` as `(c, b)`.
///
/// # Safety
/// `pell` must be a live handle; `c` and `b` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn apsq_pell_get(pell: *const ApsqPell, index: usize, c: *mut u64, b: *mut u64) -> ApsqStatus {
    guard(|| {
        let p = pell.as_ref().ok_or_else(|| null("pell"))?;
        let &(cc, bb) = p.solutions.get(index).ok_or_else(|| {
            Fail::Status(
                ApsqStatus::IndexOutOfRange,
                format!("solution {index} out of range for {}", p.solutions.len()),
            )
        })?;
        if c.is_null() || b.is_null() {
            return Err(null("c or b"));
        }
        c.write(cc);
        b.write(bb);
        Ok(())
    })
}

/// Release a Pell handle. Null is ignored.
///
/// # Safety
/// `pell` must be null or a handle from [`apsq_pell_new`] not freed before.
#[no_mangle]
pub unsafe extern "C" fn apsq_pell_free(pell: *mut ApsqPell) {
    if !pell.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(pell))));
    }
}
