#![no_main]

use libfuzzer_sys::fuzz_target;
use reachsynth::MdpBuilder;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let mut b = MdpBuilder::new(0.5);
    let s1 = b.add_state("s1");
    let s2 = b.add_state("s2");
    b.add_action(s1, "a1", &[(s1, 1.0)], 0.0);
    b.add_action(s1, "a2", &[(s2, 1.0)], 1.0);
    b.add_action(s2, "stay", &[(s2, 1.0)], 0.0);
    b.initial(s1).target(s2);
    let mdp = b.build().unwrap();
    if let Ok(pol) = reachsynth::parse_policy(text, &mdp) {
        pol.check(&mdp).unwrap();
    }
});
