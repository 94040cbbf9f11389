#![no_main]

use libfuzzer_sys::fuzz_target;

// The OBJ parser must reject malformed input with an error, never panic.
// When parsing succeeds, the mesh invariants checked by `Mesh::new`
// (manifoldness, winding, no isolated vertices) must hold.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = idealsurf::mesh::parse_obj(text);
    }
});
