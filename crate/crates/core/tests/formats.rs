use std::path::PathBuf;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reachsynth::grid::Risk;
use reachsynth::random::{random_mdp, RandomMdpOptions};
use reachsynth::*;

fn data(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn shipped_files_parse() {
    let fig1 = parse_mdp(&data("fig1.mdp")).unwrap();
    assert_eq!(fig1.num_states(), 2);
    assert_eq!(fig1.num_actions(0), 2);
    let tp = parse_mdp(&data("twopath.mdp")).unwrap();
    assert_eq!(tp.state_names(), ["s1", "m", "g"]);

    let spec = parse_layout(&data("grid10.layout")).unwrap();
    assert_eq!(spec.obstacles.len(), 12);
    let grid = generate_grid(&spec).unwrap();
    assert_eq!(grid.mdp.num_states(), 100 - 12);
    let ra = max_reach(&grid.mdp).unwrap();
    assert!((ra.x[grid.mdp.initial()] - 1.0).abs() < 1e-9);
}

#[test]
fn grid_mdp_survives_text_format() {
    let spec = parse_layout(&data("grid10.layout")).unwrap();
    let m = generate_grid(&spec).unwrap().mdp;
    assert_eq!(parse_mdp(&write_mdp(&m)).unwrap(), m);
}

fn random_spec(seed: u64) -> GridSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = GridSpec::new(rng.random_range(1..7), rng.random_range(1..7));
    for y in 0..spec.height {
        for x in 0..spec.width {
            if rng.random_bool(0.2) && (x, y) != spec.initial && (x, y) != spec.target {
                spec.obstacles.insert((x, y));
            } else {
                spec.set_risk(x, y, [Risk::High, Risk::Moderate, Risk::Low][rng.random_range(0..3)]);
            }
        }
    }
    spec.slip = [0.9, 0.75, 1.0][rng.random_range(0..3)];
    spec
}

proptest! {
    #[test]
    fn mdp_documents_round_trip(seed in any::<u64>(), det in any::<bool>()) {
        let opts = RandomMdpOptions { max_states: 8, deterministic: det, ..Default::default() };
        let m = random_mdp(&mut ChaCha8Rng::seed_from_u64(seed), &opts);
        let doc = MdpDocument::from_mdp(&m);
        let text = doc.to_text();
        prop_assert_eq!(&MdpDocument::parse(&text).unwrap(), &doc);
        prop_assert_eq!(parse_mdp(&text).unwrap(), m);
    }

    #[test]
    fn policies_round_trip(seed in any::<u64>(), pseed in any::<u64>()) {
        let m = random_mdp(&mut ChaCha8Rng::seed_from_u64(seed), &RandomMdpOptions::default());
        let mut rng = ChaCha8Rng::seed_from_u64(pseed);
        let choice: Vec<usize> = (0..m.num_states()).map(|s| rng.random_range(0..m.num_actions(s))).collect();
        let pol = StationaryPolicy::deterministic(&m, &choice);
        prop_assert_eq!(parse_policy(&write_policy(&m, &pol), &m).unwrap(), pol);
    }

    #[test]
    fn layouts_round_trip(seed in any::<u64>()) {
        let spec = random_spec(seed);
        prop_assert_eq!(parse_layout(&write_layout(&spec)).unwrap(), spec.clone());
        let g = generate_grid(&spec).unwrap();
        prop_assert_eq!(g.mdp.num_states(), spec.width * spec.height - spec.obstacles.len());
        prop_assert!(g.mdp.validate().is_empty());
    }

    #[test]
    fn parsers_never_panic(text in "\\PC{0,200}") {
        let m = parse_mdp(&data("twopath.mdp")).unwrap();
        let _ = MdpDocument::parse(&text);
        let _ = parse_policy(&text, &m);
        let _ = parse_layout(&text);
    }

    #[test]
    fn header_prefixed_garbage_is_rejected_cleanly(body in "[a-z0-9 .#\n-]{0,200}") {
        let m = parse_mdp(&data("twopath.mdp")).unwrap();
        let _ = parse_mdp(&format!("reachsynth-mdp 1\n{body}"));
        let _ = parse_policy(&format!("reachsynth-policy 1\n{body}"), &m);
        let _ = parse_layout(&format!("reachsynth-grid 1\n{body}"));
    }
}
