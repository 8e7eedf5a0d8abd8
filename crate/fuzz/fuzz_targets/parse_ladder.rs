#![no_main]

use libfuzzer_sys::fuzz_target;
use oag_core::dsl::parse_ladder;
use oag_core::ladder::{Ambient, LadderSubgroup};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(moduli) = parse_ladder(text) else {
        return;
    };
    if moduli.is_empty() || moduli.len() > 64 {
        return;
    }
    let g = oag_core::parse(&format!("lex({})", vec!["Z"; moduli.len()].join(",")))
        .expect("all-Z group");
    let ambient = Ambient::of_group(&g).expect("finite");
    if let Ok(a) = LadderSubgroup::new(ambient, moduli) {
        assert_eq!(a.decompose_crt().recompose().expect("same ambient"), a);
        let _ = a.index(&a.intersect(&a).expect("same ambient"));
    }
});
