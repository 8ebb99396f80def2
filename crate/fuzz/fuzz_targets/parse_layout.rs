#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = reachsynth::parse_layout(text) {
        let again = reachsynth::parse_layout(&reachsynth::write_layout(&spec)).unwrap();
        assert_eq!(again, spec);
        if spec.width * spec.height <= 400 {
            let _ = reachsynth::generate_grid(&spec);
        }
    }
});
