#![no_main]

use hodge_hardy::calculus::SymbolFunction;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(sym) = text.parse::<SymbolFunction>() {
        // Names must roundtrip and evaluation must not panic.
        let again: SymbolFunction = sym.name.parse().unwrap();
        assert_eq!(again.name, sym.name);
        let _ = sym.eval(0.5);
    }
});
