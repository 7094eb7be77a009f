#![no_main]

use libfuzzer_sys::fuzz_target;
use relstring::io::parse_metadata;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(meta) = parse_metadata(text) {
        let again = parse_metadata(&meta.to_json().expect("json")).expect("reparse");
        assert_eq!(again, meta);
    }
});
