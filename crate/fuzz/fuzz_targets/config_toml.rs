#![no_main]

use exadam::config::ExperimentFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(file) = ExperimentFile::parse(text) {
        assert!(!file.experiments.is_empty());
        for cfg in &file.experiments {
            cfg.validate().expect("parsed experiments are valid");
        }
    }
});
