#![no_main]

use libfuzzer_sys::fuzz_target;

// Arguments are NUL-separated. Only parsing is exercised; nothing executes.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let argv = std::iter::once("exadam").chain(text.split('\0'));
    if let Err(e) = exadam_cli::parse_args(argv) {
        let code = e.exit_code();
        assert!(code == 0 || code == 2);
    }
});
