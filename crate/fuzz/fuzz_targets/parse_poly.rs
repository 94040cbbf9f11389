#![no_main]

use libfuzzer_sys::fuzz_target;

// The graph-polynomial parser must reject malformed expressions with an
// error, never panic; accepted polynomials must evaluate to finite values at
// a benign sample point.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(poly) = idealsurf::oracle::GraphPoly::parse(text) {
            let _ = poly.eval(0.25, -0.5);
        }
    }
});
