//! Shared pieces of the acceptance suite in `tests/acceptance.rs`.

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use hyperlap::discretize::Interval;
use hyperlap::sl_family::{sweep, EigenTable, DEFAULT_TOL};

/// Spectral cutoff of the reference sweep.
pub const REFERENCE_CUTOFF: f64 = 1000.0;

pub fn unit_interval() -> Interval {
    Interval::new(-1.0, 1.0).expect("valid interval")
}

/// Certified sweep on `(-1, 1)` below [`REFERENCE_CUTOFF`], computed once per
/// process, with its wall time.
pub fn reference_table() -> &'static (EigenTable, Duration) {
    static TABLE: OnceLock<(EigenTable, Duration)> = OnceLock::new();
    TABLE.get_or_init(|| {
        let start = Instant::now();
        let table = sweep(unit_interval(), REFERENCE_CUTOFF, DEFAULT_TOL).expect("reference sweep");
        (table, start.elapsed())
    })
}

/// Prints one result line straight to stderr so it survives output capture.
pub fn report(id: u32, title: &str, passed: bool, detail: &str) {
    let line = format!(
        "acceptance criterion {id} [{}] {title}: {detail}\n",
        if passed { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
}
