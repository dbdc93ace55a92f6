//! C ABI over `mdfrule`.
//!
//! Every fallible function returns an [`MdfStatus`] and writes its result
//! through an out-pointer. On failure a message is kept per thread and can be
//! read with [`mdf_last_error`]. Handles are opaque and must be released with
//! their `_free` function; freeing NULL is a no-op.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use mdfrule::game::{CardDistribution, GameSpec, GameTree};
use mdfrule::regress;
use mdfrule::solver::{SolveReport, SolverConfig};
use mdfrule::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MdfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// An argument broke a documented constraint.
    InvalidInput = 3,
    /// No infoset with that name, or action index out of range.
    NotFound = 4,
    Internal = 5,
}

/// A validated game and its betting tree.
pub struct MdfGame {
    tree: Arc<GameTree>,
}

/// Result of solving an [`MdfGame`].
pub struct MdfReport {
    tree: Arc<GameTree>,
    report: SolveReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: MdfStatus, msg: impl Into<String>) -> MdfStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> MdfStatus {
    let status = if e.is_validation() {
        MdfStatus::InvalidInput
    } else {
        MdfStatus::Internal
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> MdfStatus) -> MdfStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f))
        .unwrap_or_else(|_| fail(MdfStatus::Internal, "panic inside mdfrule"))
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, MdfStatus> {
    if s.is_null() {
        return Err(fail(MdfStatus::NullPointer, format!("{what} is NULL")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(MdfStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

macro_rules! out_ptr {
    ($p:expr) => {
        if $p.is_null() {
            return fail(MdfStatus::NullPointer, concat!(stringify!($p), " is NULL"));
        }
    };
}

macro_rules! handle {
    ($p:expr) => {
        match $p.as_ref() {
            Some(h) => h,
            None => return fail(MdfStatus::NullPointer, concat!(stringify!($p), " is NULL")),
        }
    };
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next `mdf_` call on the same thread.
#[no_mangle]
pub extern "C" fn mdf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parse a game spec (`{"n", "p", "q", "pot", "stack", "p1_bets", "p2_bets"}`)
/// and build its tree.
#[no_mangle]
pub unsafe extern "C" fn mdf_game_from_json(
    json: *const c_char,
    out: *mut *mut MdfGame,
) -> MdfStatus {
    guard(|| {
        out_ptr!(out);
        let text = match read_str(json, "json") {
            Ok(s) => s,
            Err(st) => return st,
        };
        let tree = match GameSpec::from_json(text).and_then(GameTree::new) {
            Ok(t) => t,
            Err(e) => return from_error(e),
        };
        *out = Box::into_raw(Box::new(MdfGame {
            tree: Arc::new(tree),
        }));
        MdfStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn mdf_game_free(game: *mut MdfGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

#[no_mangle]
pub unsafe extern "C" fn mdf_game_num_infosets(game: *const MdfGame, out: *mut usize) -> MdfStatus {
    guard(|| {
        let g = handle!(game);
        out_ptr!(out);
        *out = g.tree.num_infosets();
        MdfStatus::Ok
    })
}

/// Solve `game`. `max_iterations == 0` and `target <= 0` select the defaults
/// (10000 iterations, 0.001 * pot).
#[no_mangle]
pub unsafe extern "C" fn mdf_solve(
    game: *const MdfGame,
    max_iterations: u32,
    target: f64,
    out: *mut *mut MdfReport,
) -> MdfStatus {
    guard(|| {
        let g = handle!(game);
        out_ptr!(out);
        let mut cfg = SolverConfig::default();
        if max_iterations > 0 {
            cfg.max_iterations = max_iterations;
        }
        if target > 0.0 {
            cfg.target_exploitability = Some(target);
        }
        match mdfrule::solve(&g.tree, &cfg) {
            Ok(report) => {
                *out = Box::into_raw(Box::new(MdfReport {
                    tree: Arc::clone(&g.tree),
                    report,
                }));
                MdfStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn mdf_report_free(report: *mut MdfReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

#[no_mangle]
pub unsafe extern "C" fn mdf_report_exploitability(
    report: *const MdfReport,
    out: *mut f64,
) -> MdfStatus {
    guard(|| {
        let r = handle!(report);
        out_ptr!(out);
        *out = r.report.exploitability;
        MdfStatus::Ok
    })
}

/// Player 1's expected payoff under the average profile.
#[no_mangle]
pub unsafe extern "C" fn mdf_report_game_value(
    report: *const MdfReport,
    out: *mut f64,
) -> MdfStatus {
    guard(|| {
        let r = handle!(report);
        out_ptr!(out);
        *out = r.report.game_value;
        MdfStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn mdf_report_iterations(
    report: *const MdfReport,
    out: *mut u32,
) -> MdfStatus {
    guard(|| {
        let r = handle!(report);
        out_ptr!(out);
        *out = r.report.iterations;
        MdfStatus::Ok
    })
}

/// Probability of action `action` at the infoset named like `P2/facing_bet0/card5`.
#[no_mangle]
pub unsafe extern "C" fn mdf_report_prob(
    report: *const MdfReport,
    infoset: *const c_char,
    action: usize,
    out: *mut f64,
) -> MdfStatus {
    guard(|| {
        let r = handle!(report);
        out_ptr!(out);
        let name = match read_str(infoset, "infoset") {
            Ok(s) => s,
            Err(st) => return st,
        };
        let Some(id) = r.tree.infoset_by_name(name) else {
            return fail(MdfStatus::NotFound, format!("no infoset named {name:?}"));
        };
        let k = r.tree.infosets()[id].num_actions;
        if action >= k {
            return fail(
                MdfStatus::NotFound,
                format!("{name} has {k} actions, asked for {action}"),
            );
        }
        *out = r.report.profile.prob(&r.tree, id, action);
        MdfStatus::Ok
    })
}

/// Full report as JSON. Release the string with [`mdf_string_free`].
#[no_mangle]
pub unsafe extern "C" fn mdf_report_to_json(
    report: *const MdfReport,
    out: *mut *mut c_char,
) -> MdfStatus {
    guard(|| {
        let r = handle!(report);
        out_ptr!(out);
        match CString::new(r.report.to_json(&r.tree)) {
            Ok(s) => {
                *out = s.into_raw();
                MdfStatus::Ok
            }
            Err(_) => fail(MdfStatus::Internal, "report JSON contains NUL"),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn mdf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Minimum defense frequency `pot / (bet + pot)`.
#[no_mangle]
pub unsafe extern "C" fn mdf_mdf(pot: f64, bet: f64, out: *mut f64) -> MdfStatus {
    guard(|| {
        out_ptr!(out);
        match mdfrule::mdf(pot, bet) {
            Ok(v) => {
                *out = v;
                MdfStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Player 1's showdown equity with card distribution `p` against player 2's
/// `q`. Both have length `n`, lowest rank first.
#[no_mangle]
pub unsafe extern "C" fn mdf_range_advantage(
    p: *const f64,
    q: *const f64,
    n: usize,
    out: *mut f64,
) -> MdfStatus {
    guard(|| {
        out_ptr!(out);
        if p.is_null() || q.is_null() {
            return fail(MdfStatus::NullPointer, "p or q is NULL");
        }
        let p = CardDistribution::new(std::slice::from_raw_parts(p, n).to_vec());
        let q = CardDistribution::new(std::slice::from_raw_parts(q, n).to_vec());
        match p.and_then(|p| q.and_then(|q| mdfrule::range_advantage(&p, &q))) {
            Ok(v) => {
                *out = v;
                MdfStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// The 100-50-25 MIN calling rule, `min(mdf, mdf - ra / 2 + 1 / 4)`.
#[no_mangle]
pub unsafe extern "C" fn mdf_rule_100_50_25(mdf: f64, ra: f64, out: *mut f64) -> MdfStatus {
    guard(|| {
        out_ptr!(out);
        match regress::rule_100_50_25(mdf, ra) {
            Ok(v) => {
                *out = v;
                MdfStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// `min(mdf, mdf - s / 4)` with signed range advantage `s` in [-1, 1].
#[no_mangle]
pub unsafe extern "C" fn mdf_rule_signed(mdf: f64, ra_signed: f64, out: *mut f64) -> MdfStatus {
    guard(|| {
        out_ptr!(out);
        match regress::rule_signed(mdf, ra_signed) {
            Ok(v) => {
                *out = v;
                MdfStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}
