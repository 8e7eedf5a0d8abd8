#![no_main]

use libfuzzer_sys::fuzz_target;
use oag_core::dsl::parse;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(g) = parse(text) else {
        return;
    };
    let printed = g.to_string();
    let again = parse(&printed).expect("printed groups parse");
    assert_eq!(again, g);
    assert_eq!(again.to_string(), printed);
    let _ = oag_core::rank::verdict(&g);
});
