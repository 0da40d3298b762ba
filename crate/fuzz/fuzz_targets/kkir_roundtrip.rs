#![no_main]

use libfuzzer_sys::fuzz_target;
use relog2smt_core::kkir::{parse_model, render_model};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(m) = parse_model(text) else { return };
    let rendered = render_model(&m);
    let back = parse_model(&rendered).expect("rendered model parses");
    assert_eq!(back, m);
    assert_eq!(render_model(&back), rendered);
});
