#![no_main]

use exadam::harness::RunTrace;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(trace) = RunTrace::from_json(text) {
        let _ = trace.to_csv();
        let _ = trace.lr_reductions();
        assert_eq!(RunTrace::from_json(&trace.to_json()).unwrap(), trace);
    }
});
