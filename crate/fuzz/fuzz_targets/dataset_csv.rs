#![no_main]

use exadam::problems::{Dataset, SplitFractions};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(ds) = Dataset::read_csv(data, SplitFractions::default(), 0) {
        // whatever parses must survive its own writer
        let text = ds.to_csv_string();
        let again = Dataset::read_csv(text.as_bytes(), SplitFractions::default(), 0)
            .expect("written csv parses");
        assert_eq!(again, ds);
    }
});
