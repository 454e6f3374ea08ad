#![no_main]

use hodge_hardy::complex::io::parse_complex;
use hodge_hardy::HodgeSystem;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(x) = parse_complex(text) {
        // Accepted complexes must be small enough to assemble quickly.
        if x.num_vertices() <= 32 {
            let _ = HodgeSystem::new(x);
        }
    }
});
