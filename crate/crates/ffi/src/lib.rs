//! C ABI over the busview store.
//!
//! Stores are opaque heap handles created by `bv_store_open_snapshot` or
//! `bv_store_ingest` and released with `bv_store_free`. Every fallible call
//! returns a [`BvStatus`]; on failure `bv_last_error_message` describes the
//! most recent error on the calling thread. Strings handed out by the
//! library must be released with `bv_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use busview::ingest::{ingest_files, AlignOptions, InputPaths};
use busview::store::StoreError;
use busview::{api, Store};

/// Opaque store handle.
pub struct BvStore {
    inner: Store,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BvStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    BadInput = 4,
    NotFound = 5,
    BadRequest = 6,
    Internal = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let message = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(message).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: BvStatus, message: impl Into<String>) -> BvStatus {
    set_error(message);
    status
}

/// Runs `f`, turning panics into `Internal`.
fn guard(f: impl FnOnce() -> BvStatus) -> BvStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(BvStatus::Internal, "internal panic"),
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, BvStatus> {
    if p.is_null() {
        return Err(fail(BvStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(BvStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn store_status(err: &StoreError) -> BvStatus {
    match err {
        StoreError::Snapshot(busview::store::SnapshotError::Io(_)) => BvStatus::Io,
        e if e.is_not_found() => BvStatus::NotFound,
        _ => BvStatus::BadInput,
    }
}

unsafe fn hand_out(store: Store, out: *mut *mut BvStore) -> BvStatus {
    *out = Box::into_raw(Box::new(BvStore { inner: store }));
    BvStatus::Ok
}

/// Loads a snapshot file. On success `*out` owns a new handle.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bv_store_open_snapshot(path: *const c_char, out: *mut *mut BvStore) -> BvStatus {
    guard(|| {
        if out.is_null() {
            return fail(BvStatus::NullArgument, "out is null");
        }
        *out = ptr::null_mut();
        let path = match read_str(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match Store::load_snapshot(path.as_ref()) {
            Ok(store) => hand_out(store, out),
            Err(e) => fail(store_status(&e), e.to_string()),
        }
    })
}

/// Ingests the four raw files into a new store. Rejected lines are dropped
/// as in the CLI; `max_boardings` is the over-capacity threshold.
///
/// # Safety
/// All paths must be NUL-terminated strings and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bv_store_ingest(
    adherence: *const c_char,
    counts: *const c_char,
    fares: *const c_char,
    network: *const c_char,
    max_boardings: u32,
    out: *mut *mut BvStore,
) -> BvStatus {
    guard(|| {
        if out.is_null() {
            return fail(BvStatus::NullArgument, "out is null");
        }
        *out = ptr::null_mut();
        let paths = (|| {
            Ok::<_, BvStatus>(InputPaths {
                adherence: PathBuf::from(read_str(adherence, "adherence")?),
                counts: PathBuf::from(read_str(counts, "counts")?),
                fares: PathBuf::from(read_str(fares, "fares")?),
                network: PathBuf::from(read_str(network, "network")?),
            })
        })();
        let paths = match paths {
            Ok(p) => p,
            Err(s) => return s,
        };
        let options = AlignOptions {
            capacity_threshold: max_boardings,
        };
        let outcome = match ingest_files(&paths, &options) {
            Ok(o) => o,
            Err(e @ busview::ingest::IngestError::Io { .. }) | Err(e @ busview::ingest::IngestError::NetworkIo { .. }) => {
                return fail(BvStatus::Io, e.to_string())
            }
            Err(e) => return fail(BvStatus::BadInput, e.to_string()),
        };
        match Store::build(outcome.network, outcome.events, outcome.fares) {
            Ok(store) => hand_out(store, out),
            Err(e) => fail(BvStatus::Internal, e.to_string()),
        }
    })
}

/// Writes the store as a snapshot file.
///
/// # Safety
/// `store` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bv_store_save_snapshot(store: *const BvStore, path: *const c_char) -> BvStatus {
    guard(|| {
        let Some(store) = store.as_ref() else {
            return fail(BvStatus::NullArgument, "store is null");
        };
        let path = match read_str(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match store.inner.save_snapshot(path.as_ref()) {
            Ok(()) => BvStatus::Ok,
            Err(e) => fail(store_status(&e), e.to_string()),
        }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `store` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bv_store_free(store: *mut BvStore) {
    if !store.is_null() {
        drop(Box::from_raw(store));
    }
}

/// Number of stop events in the store, 0 for null.
///
/// # Safety
/// `store` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bv_store_event_count(store: *const BvStore) -> u64 {
    store.as_ref().map_or(0, |s| s.inner.events().len() as u64)
}

/// Answers an API request such as `path = "/api/calendar"`,
/// `query = "scope=route&id=R1"`. The response body, the same bytes the HTTP
/// server sends, is stored in `*out_json` for errors as well as successes;
/// `*out_http_status` receives the matching HTTP status.
///
/// # Safety
/// `store` must be a live handle, `path` a NUL-terminated string, `query`
/// null or NUL-terminated, and both out pointers valid.
#[no_mangle]
pub unsafe extern "C" fn bv_store_query(
    store: *const BvStore,
    path: *const c_char,
    query: *const c_char,
    out_json: *mut *mut c_char,
    out_http_status: *mut u16,
) -> BvStatus {
    guard(|| {
        if out_json.is_null() || out_http_status.is_null() {
            return fail(BvStatus::NullArgument, "output pointer is null");
        }
        *out_json = ptr::null_mut();
        *out_http_status = 0;
        let Some(store) = store.as_ref() else {
            return fail(BvStatus::NullArgument, "store is null");
        };
        let path = match read_str(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        let query = if query.is_null() {
            ""
        } else {
            match read_str(query, "query") {
                Ok(q) => q,
                Err(s) => return s,
            }
        };
        let (status, http, body) = match api::handle(&store.inner, path, query) {
            Ok(body) => (BvStatus::Ok, 200, body),
            Err(err) => {
                set_error(err.to_string());
                let status = match err.status {
                    404 => BvStatus::NotFound,
                    400 => BvStatus::BadRequest,
                    _ => BvStatus::Internal,
                };
                (status, err.status, err.to_json())
            }
        };
        // serde_json escapes control characters, so the body has no NUL.
        match CString::new(body) {
            Ok(s) => {
                *out_json = s.into_raw();
                *out_http_status = http;
                status
            }
            Err(_) => fail(BvStatus::Internal, "response contains NUL"),
        }
    })
}

/// Message for the last failure on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn bv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by `bv_store_query`. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn bv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
