use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use reachsynth::approx::surrogate_value;
use reachsynth::baselines::{discounted_reach_policy, undiscounted_policy};
use reachsynth::discount::cost_to_go;
use reachsynth::graph::StateClass;
use reachsynth::reach::reach_probs;
use reachsynth::report::{render_table, trajectory_csv, values_csv};
use reachsynth::simulate::horizon_for_tolerance;
use reachsynth::{
    brute_force_oracle, check_existence, cleanup, generate_grid, max_reach, most_likely_trajectory,
    optimal_values, parse_layout, parse_mdp, parse_policy, simulate, solve_exact, synth_approx,
    synth_eps_optimal, write_mdp, write_policy, ApproxOptions, Error, ExactOptions, Mdp, Method,
    MdpDocument, SimulationOptions, StationaryPolicy, SynthesisReport,
};

#[derive(Parser)]
#[command(name = "reachsynth", version, about = "Reach-optimal, cost-minimal policies for finite MDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Outputs {
    /// Write a JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write per-state values as CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the synthesized policy here.
    #[arg(long)]
    policy: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicySource {
    Eps,
    Exact,
    Approx,
}

#[derive(Subcommand)]
enum Command {
    /// Check an MDP document and list every violated invariant.
    Validate { mdp: PathBuf },
    /// Maximum reach probabilities and the state partition.
    Reach {
        mdp: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Drop actions that lower the reach probability; prints the result.
    Cleanup {
        mdp: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized policy within `eps` of the optimal cost.
    SynthEps {
        mdp: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[command(flatten)]
        outputs: Outputs,
    },
    /// Decide whether an optimal policy exists.
    CheckExists {
        mdp: PathBuf,
        #[command(flatten)]
        outputs: Outputs,
    },
    /// Optimal deterministic policy via mixed-integer programming.
    SynthExact {
        mdp: PathBuf,
        #[arg(long, default_value_t = 100)]
        k: u32,
        /// Seconds; the best incumbent is reported on timeout.
        #[arg(long)]
        time_limit: Option<f64>,
        #[command(flatten)]
        outputs: Outputs,
    },
    /// Deterministic policy from two linear programs on surrogate costs.
    SynthApprox {
        mdp: PathBuf,
        #[arg(long, default_value_t = 100)]
        k: u32,
        /// Zero positive costs on targets and dead states instead of failing.
        #[arg(long)]
        zero_out: bool,
        #[command(flatten)]
        outputs: Outputs,
    },
    /// Monte-Carlo estimates for a policy file or a synthesized policy.
    Simulate {
        mdp: PathBuf,
        /// Policy file; defaults to the `--method` result.
        #[arg(long)]
        policy: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "approx")]
        method: PolicySource,
        #[arg(long, default_value_t = 10_000)]
        episodes: usize,
        /// Defaults to the horizon whose cost tail is below 1e-6.
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Enumerate all deterministic policies.
    Oracle {
        mdp: PathBuf,
        /// Print every policy, not only the best.
        #[arg(long)]
        all: bool,
    },
    /// Build a grid world from a layout and compare policies on it.
    Gridworld {
        #[arg(long)]
        layout: PathBuf,
        /// Also write the generated MDP document.
        #[arg(long)]
        emit_mdp: Option<PathBuf>,
        /// Write the approximate policy's most likely path as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run eps, exact and approximate synthesis side by side.
    Compare {
        mdp: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long, default_value_t = 100)]
        k: u32,
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

type CliResult<T> = Result<T, String>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn load(path: &Path) -> CliResult<Mdp> {
    parse_mdp(&read(path)?).map_err(|e| format!("{}: {}", path.display(), describe(&e)))
}

fn describe(e: &Error) -> String {
    match e {
        Error::InvalidMdp(vs) => {
            let lines: Vec<String> = vs.iter().map(|v| format!("  {v}")).collect();
            format!("invalid MDP:\n{}", lines.join("\n"))
        }
        other => other.to_string(),
    }
}

fn lib<T>(r: reachsynth::Result<T>) -> CliResult<T> {
    r.map_err(|e| describe(&e))
}

fn time_limit(secs: Option<f64>) -> CliResult<Option<Duration>> {
    secs.map(|s| Duration::try_from_secs_f64(s).map_err(|e| format!("--time-limit: {e}")))
        .transpose()
}

fn print_policy(mdp: &Mdp, pol: &StationaryPolicy) {
    for (state, acts) in pol.describe(mdp) {
        let shown: Vec<String> = acts
            .iter()
            .map(|(a, p)| if *p == 1.0 { a.clone() } else { format!("{a}:{p:.6}") })
            .collect();
        println!("  {state:<12} {}", shown.join(" "));
    }
}

fn emit(mdp: &Mdp, pol: Option<&StationaryPolicy>, report: &SynthesisReport, outputs: &Outputs) -> CliResult<()> {
    print!("{}", render_table(std::slice::from_ref(report)));
    if !report.bounds.is_empty() {
        let b: Vec<String> = report.bounds.iter().map(|(k, v)| format!("{k}={v:.6}")).collect();
        println!("bounds: {}", b.join(" "));
    }
    if let Some(p) = &outputs.out {
        write(p, &report.to_json())?;
    }
    if let Some(pol) = pol {
        if let Some(p) = &outputs.policy {
            write(p, &write_policy(mdp, pol))?;
        }
        if let Some(p) = &outputs.csv {
            let x = lib(max_reach(mdp))?.x;
            let reach = lib(reach_probs(mdp, pol))?;
            let cost = lib(cost_to_go(mdp, pol))?;
            write(p, &values_csv(mdp, &[("x", &x), ("reach", &reach), ("cost", &cost)]))?;
        }
    }
    Ok(())
}

fn synthesize(mdp: &Mdp, source: PolicySource) -> CliResult<StationaryPolicy> {
    Ok(match source {
        PolicySource::Eps => lib(synth_eps_optimal(mdp, 0.01))?.policy,
        PolicySource::Exact => lib(solve_exact(mdp, &ExactOptions::default()))?.policy,
        PolicySource::Approx => lib(synth_approx(mdp, &ApproxOptions::default()))?.policy,
    })
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Validate { mdp } => {
            let text = read(&mdp)?;
            let doc = MdpDocument::parse(&text).map_err(|e| format!("{}: {e}", mdp.display()))?;
            match doc.to_mdp() {
                Ok(m) => println!("ok: {} states, {} state-action pairs", m.num_states(), m.num_pairs()),
                Err(e) => return Err(format!("{}: {}", mdp.display(), describe(&e))),
            }
        }
        Command::Reach { mdp, csv } => {
            let m = load(&mdp)?;
            let ra = lib(max_reach(&m))?;
            println!("{:<12} {:>7} {:>12}  max-reach actions", "state", "class", "x");
            for s in 0..m.num_states() {
                let class = match ra.partition.class(s) {
                    StateClass::Target => "target",
                    StateClass::Zero => "zero",
                    StateClass::Rest => "rest",
                };
                let acts: Vec<&str> = ra.amax[s].iter().map(|&a| m.actions(s)[a].as_str()).collect();
                println!("{:<12} {class:>7} {:>12.9}  {}", m.state_name(s), ra.x[s], acts.join(" "));
            }
            if let Some(p) = csv {
                write(&p, &values_csv(&m, &[("x", &ra.x)]))?;
            }
        }
        Command::Cleanup { mdp, out } => {
            let m = load(&mdp)?;
            let ra = lib(max_reach(&m))?;
            let text = write_mdp(&lib(cleanup(&m, &ra))?.rebase());
            match out {
                Some(p) => write(&p, &text)?,
                None => print!("{text}"),
            }
        }
        Command::SynthEps { mdp, eps, outputs } => {
            let m = load(&mdp)?;
            let t = Instant::now();
            let r = lib(synth_eps_optimal(&m, eps))?;
            let rep = lib(SynthesisReport::from_eps(&m, eps, &r, t.elapsed()))?;
            println!("policy:");
            print_policy(&m, &r.policy);
            emit(&m, Some(&r.policy), &rep, &outputs)?;
        }
        Command::CheckExists { mdp, outputs } => {
            let m = load(&mdp)?;
            let t = Instant::now();
            let c = lib(check_existence(&m))?;
            let rep = lib(SynthesisReport::from_existence(&m, &c, t.elapsed()))?;
            match &c.witness {
                Some(w) => {
                    println!("optimal policy exists; value {}", c.infimum);
                    print_policy(&m, w);
                }
                None => println!("no optimal policy; infimum {}", c.infimum),
            }
            if let Some(p) = &outputs.out {
                write(p, &rep.to_json())?;
            }
            if let (Some(p), Some(w)) = (&outputs.policy, &c.witness) {
                write(p, &write_policy(&m, w))?;
            }
        }
        Command::SynthExact { mdp, k, time_limit: tl, outputs } => {
            let m = load(&mdp)?;
            let opts = ExactOptions {
                k,
                time_limit: time_limit(tl)?,
                ..Default::default()
            };
            let t = Instant::now();
            let r = lib(solve_exact(&m, &opts))?;
            let rep = lib(SynthesisReport::from_exact(&m, &r, t.elapsed()))?;
            println!("status {:?}, {} nodes, M={} ({})", r.status, r.nodes, r.big_m.value, r.big_m.note);
            println!("policy:");
            print_policy(&m, &r.policy);
            emit(&m, Some(&r.policy), &rep, &outputs)?;
        }
        Command::SynthApprox { mdp, k, zero_out, outputs } => {
            let m = load(&mdp)?;
            let t = Instant::now();
            let r = lib(synth_approx(&m, &ApproxOptions { k, zero_out }))?;
            let rep = lib(SynthesisReport::from_approx(&m, &r, t.elapsed()))?;
            if !r.costs.zeroed.is_empty() {
                eprintln!("note: zeroed {} positive costs on targets or dead states", r.costs.zeroed.len());
            }
            println!("policy:");
            print_policy(&m, &r.policy);
            emit(&m, Some(&r.policy), &rep, &outputs)?;
        }
        Command::Simulate { mdp, policy, method, episodes, horizon, seed } => {
            let m = load(&mdp)?;
            let pol = match policy {
                Some(p) => parse_policy(&read(&p)?, &m).map_err(|e| format!("{}: {e}", p.display()))?,
                None => synthesize(&m, method)?,
            };
            let horizon = horizon.unwrap_or_else(|| horizon_for_tolerance(m.discount(), m.max_cost(), 1e-6));
            let opts = SimulationOptions { episodes, horizon, seed, parallel: true };
            let r = lib(simulate(&m, &pol, &opts))?;
            let exact = lib(SynthesisReport::evaluate(Method::Oracle, &m, Some(&pol), Duration::ZERO))?;
            println!("{episodes} episodes, horizon {horizon}, seed {seed}, tail bound {:e}", r.tail_bound);
            println!(
                "reach {:.6} ± {:.6}  (exact {:.6})",
                r.reach.mean,
                r.reach.std_error,
                exact.reach.unwrap_or(f64::NAN)
            );
            println!(
                "cost  {:.6} ± {:.6}  (exact {:.6})",
                r.cost.mean,
                r.cost.std_error,
                exact.cost.unwrap_or(f64::NAN)
            );
        }
        Command::Oracle { mdp, all } => {
            let m = load(&mdp)?;
            let r = lib(brute_force_oracle(&m))?;
            println!("{} deterministic policies, {} reach-optimal", r.table.len(), r.feasible().count());
            if all {
                for e in &r.table {
                    let names: Vec<&str> = e.choice.iter().enumerate().map(|(s, &a)| m.actions(s)[a].as_str()).collect();
                    println!(
                        "  {:<30} reach {:.9} J {:.9}{}",
                        names.join(","),
                        e.reach,
                        e.cost,
                        if e.feasible { "" } else { "  (infeasible)" }
                    );
                }
            }
            println!("best J {} with", r.cost);
            print_policy(&m, &r.policy);
        }
        Command::Gridworld { layout, emit_mdp, csv, out } => {
            let spec = parse_layout(&read(&layout)?).map_err(|e| format!("{}: {e}", layout.display()))?;
            let grid = lib(generate_grid(&spec))?;
            let m = &grid.mdp;
            if let Some(p) = emit_mdp {
                write(&p, &write_mdp(m))?;
            }
            let t = Instant::now();
            let approx = lib(synth_approx(m, &ApproxOptions::default()))?;
            let approx_time = t.elapsed();
            let variants = [
                (Method::Approx, approx.policy.clone()),
                (Method::Undiscounted, lib(undiscounted_policy(m))?),
                (Method::DiscountedReach, lib(discounted_reach_policy(m))?),
            ];
            let raw = m.costs().to_vec();
            let mut reports = Vec::new();
            for (method, pol) in &variants {
                let path = most_likely_trajectory(m, pol, m.num_states() + 1);
                let counts = grid.count_risks(&path);
                let risk = lib(surrogate_value(m, pol, &raw))?;
                println!(
                    "{}: undiscounted risk {risk:.6}, most likely path visits H={} M={} L={}",
                    method.tag(),
                    counts.high,
                    counts.moderate,
                    counts.low
                );
                print!("{}", grid.render(&path));
                let wall = if *method == Method::Approx { approx_time } else { Duration::ZERO };
                reports.push(
                    lib(SynthesisReport::evaluate(*method, m, Some(pol), wall))?
                        .bound("undiscounted_risk", risk)
                        .stat("path_high", counts.high)
                        .stat("path_moderate", counts.moderate)
                        .stat("path_low", counts.low),
                );
                if let (Some(p), Method::Approx) = (&csv, method) {
                    write(p, &trajectory_csv(&grid, &path))?;
                }
            }
            print!("{}", render_table(&reports));
            if let Some(p) = out {
                write(&p, &serde_json::to_string_pretty(&reports).map_err(|e| e.to_string())?)?;
            }
        }
        Command::Compare { mdp, eps, k, time_limit: tl, out } => {
            let m = load(&mdp)?;
            let ra = lib(max_reach(&m))?;
            let y = lib(optimal_values(&lib(cleanup(&m, &ra))?))?.y[m.initial()];
            let t = Instant::now();
            let e = lib(synth_eps_optimal(&m, eps))?;
            let eps_rep = lib(SynthesisReport::from_eps(&m, eps, &e, t.elapsed()))?;
            let t = Instant::now();
            let opts = ExactOptions { k, time_limit: time_limit(tl)?, ..Default::default() };
            let x = lib(solve_exact(&m, &opts))?;
            let exact_rep = lib(SynthesisReport::from_exact(&m, &x, t.elapsed()))?;
            let t = Instant::now();
            let a = lib(synth_approx(&m, &ApproxOptions { k, zero_out: false }))?;
            let approx_rep = lib(SynthesisReport::from_approx(&m, &a, t.elapsed()))?;
            let reports = [eps_rep, exact_rep, approx_rep];
            println!("x(s1) = {:.9}, infimum y(s1) = {y:.9}", ra.x_initial(&m));
            print!("{}", render_table(&reports));
            if let Some(p) = out {
                write(&p, &serde_json::to_string_pretty(&reports).map_err(|e| e.to_string())?)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
