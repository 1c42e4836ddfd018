#![no_main]

use exadam::optim::goldens::SingleStepGoldens;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(g) = SingleStepGoldens::from_json(text) {
        let again = SingleStepGoldens::from_json(&g.to_json()).expect("round trip");
        assert!(again.compare(&g, 0.0).is_empty());
    }
});
