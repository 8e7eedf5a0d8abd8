#![no_main]

use libfuzzer_sys::fuzz_target;
use oag_core::dsl::parse_coeffs;
use oag_core::group::{h_n, h_n_minus, Element};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(ks) = parse_coeffs(text) else {
        return;
    };
    if ks.is_empty() || ks.len() > 32 {
        return;
    }
    let g =
        oag_core::parse(&format!("lex({})", vec!["Z"; ks.len()].join(","))).expect("all-Z group");
    let x = Element::from_slice(&ks);
    for n in [2, 3, 12] {
        let h = h_n(&x, n, &g).expect("finite presentation");
        let _ = h_n_minus(&x, n, &g).expect("finite presentation");
        let s = oag_core::spine::spine(&g, n).expect("n > 0");
        assert!(s.members().expect("finite spine").contains(&h));
    }
});
