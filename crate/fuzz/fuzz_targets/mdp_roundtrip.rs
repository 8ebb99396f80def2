#![no_main]

use libfuzzer_sys::fuzz_target;
use reachsynth::MdpDocument;

// Any document that parses must print and parse back to itself, and any
// valid one must survive the trip through `Mdp`.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(doc) = MdpDocument::parse(text) else { return };
    assert_eq!(MdpDocument::parse(&doc.to_text()).unwrap(), doc);
    if let Ok(mdp) = doc.to_mdp() {
        let back = reachsynth::parse_mdp(&reachsynth::write_mdp(&mdp)).unwrap();
        assert_eq!(back, mdp);
    }
});
