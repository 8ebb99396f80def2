//! Policy synthesis for finite MDPs under a lexicographic objective: first
//! reach an absorbing target set with maximum probability, then minimize
//! expected total discounted cost among the policies that do.
//!
//! ```
//! use reachsynth::{check_existence, MdpBuilder};
//!
//! let mut b = MdpBuilder::new(0.5);
//! let s = b.add_state("s");
//! let g = b.add_state("g");
//! b.add_action(s, "wait", &[(s, 1.0)], 0.0);
//! b.add_action(s, "go", &[(g, 1.0)], 1.0);
//! b.add_action(g, "stay", &[(g, 1.0)], 0.0);
//! b.initial(s).target(g);
//! let mdp = b.build().unwrap();
//!
//! // Waiting is free but never arrives, so the infimum 0 is not attained.
//! let cert = check_existence(&mdp).unwrap();
//! assert!(!cert.exists);
//! assert_eq!(cert.infimum, 0.0);
//! ```

pub mod approx;
pub mod baselines;
pub mod chain;
pub mod discount;
pub mod epsilon;
pub mod error;
pub mod exact;
pub mod existence;
pub mod graph;
pub mod grid;
pub mod io;
pub mod mdp;
pub mod oracle;
pub mod policy;
pub mod random;
pub mod reach;
pub mod report;
pub mod simulate;
pub mod tol;

pub use approx::{synth_approx, ApproxCertificate, ApproxOptions, ApproxSynthesis};
pub use chain::{induced_chain, InducedChain};
pub use discount::{evaluate_cost, modified_mdp, optimal_values, DiscountAnalysis};
pub use epsilon::{synth_eps_optimal, EpsilonSynthesis, Perturbation};
pub use error::{Error, Result};
pub use exact::{solve_exact, ExactOptions, ExactSynthesis};
pub use existence::{check_existence, ExistenceCertificate};
pub use graph::{partition_states, reachable_states, StatePartition};
pub use grid::{generate_grid, most_likely_trajectory, GridSpec, GridWorld, Risk};
pub use io::{parse_layout, parse_mdp, parse_policy, write_layout, write_mdp, write_policy, MdpDocument};
pub use mdp::{Mdp, MdpBuilder, Violation};
pub use oracle::{brute_force_oracle, OracleResult};
pub use policy::StationaryPolicy;
pub use reach::{cleanup, max_reach, reach_prob, ReachAnalysis};
pub use report::{Method, SynthesisReport};
pub use simulate::{simulate, SimulationOptions, SimulationResult};
