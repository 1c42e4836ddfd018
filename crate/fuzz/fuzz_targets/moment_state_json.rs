#![no_main]

use exadam::optim::MomentState;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(state) = MomentState::from_json(text) {
        assert_eq!(MomentState::from_json(&state.to_json()).unwrap(), state);
    }
});
