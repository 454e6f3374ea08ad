#![no_main]

use hodge_hardy::operators::io::{form_to_json, parse_form};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = parse_form(text, &[3, 2]) {
        let back = parse_form(&form_to_json(&f).unwrap(), &[3, 2]).unwrap();
        assert_eq!(f.values(), back.values());
    }
});
