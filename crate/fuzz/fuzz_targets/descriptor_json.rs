#![no_main]

use libfuzzer_sys::fuzz_target;
use oag_core::fields::{
    audit_necessary, kaplansky_check, transfer_verdict, Status, ValuedFieldDescriptor,
};

fuzz_target!(|data: &[u8]| {
    let Ok(d) = serde_json::from_slice::<ValuedFieldDescriptor>(data) else {
        return;
    };
    let Ok(vf) = d.resolve() else {
        return;
    };
    let _ = kaplansky_check(&vf);
    if let Ok(v) = transfer_verdict(&vf) {
        if matches!(v.status, Status::StronglyDependent { .. }) {
            assert!(audit_necessary(&vf).map(|a| a.is_empty()).unwrap_or(true));
        }
    }
});
