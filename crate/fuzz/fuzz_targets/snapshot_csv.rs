#![no_main]

use libfuzzer_sys::fuzz_target;
use relstring::io::{parse_snapshot, snapshot_table};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((points, states)) = parse_snapshot(text) {
        // whatever parses must serialise again
        if let Ok(t) = snapshot_table(&points, &states) {
            let again = t.to_csv_string().expect("csv");
            let (p2, s2) = parse_snapshot(&again).expect("reparse");
            assert_eq!(p2.len(), points.len());
            assert_eq!(s2.len(), states.len());
        }
    }
});
