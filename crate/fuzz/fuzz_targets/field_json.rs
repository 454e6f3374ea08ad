#![no_main]

use hodge_hardy::tent::parse_field;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_field(text, &[2, 1]);
});
