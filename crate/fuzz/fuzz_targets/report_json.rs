#![no_main]

use libfuzzer_sys::fuzz_target;
use oag_core::report::Report;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(r) = Report::from_json(text) {
        let again = Report::from_json(&r.to_json()).expect("a loaded report reloads");
        assert_eq!(again, r);
    }
});
