//! Command-line driver: reads an instance, runs one algorithm, prints a JSON report.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use liftlab::convex::{build_moment_matrix, MomentVector};
use liftlab::greedy::{greedy_setcover_full, knapsack_greedy, setcover_lp_value};
use liftlab::instances::{
    exact_knapsack_opt, exact_setcover_opt, gen_with_fallback, knapsack_lp_opt, parse_knapsack,
    parse_setcover, random_knapsack, random_setcover, GenerationConfig,
};
use liftlab::knapsack_lsplus::{ks_round_instance, KSRoundConfig};
use liftlab::ls_setcover::ls_round_with_witness;
use liftlab::rational::{harmonic_int, parse_rational, round12, Rational};
use liftlab::sa_certificate::{gap_experiment, VerifyMode};
use liftlab::subexp::{guess_and_greedy, SubexpConfig, DEFAULT_CAP};
use liftlab::tolerance::{Tolerances, EPS_FEAS};
use liftlab::Error;

const SCHEMA_VERSION: u32 = 1;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "liftlab",
    version,
    about = "Lift-and-project rounding for Set Cover and Knapsack"
)]
struct Cli {
    /// Worker threads for parallel loops (0 uses every core). Reports do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Include wall-clock timings in the report (they are always printed to stderr).
    #[arg(long, global = true)]
    timings: bool,
    /// Write the solved moment matrix as CSV to this path (sc-ls, ks-round).
    #[arg(long, global = true, value_name = "PATH")]
    dump_moments: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Weighted greedy Set Cover, compared with the LP optimum.
    ScGreedy {
        /// Instance file; standard input when omitted or "-".
        input: Option<PathBuf>,
    },
    /// Guess up to d sets of the optimum, then greedy on the small sets.
    ScSubexp {
        input: Option<PathBuf>,
        #[arg(long)]
        d: usize,
        /// Maximum number of guessed collections.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
    },
    /// Bisection on the lifted cost-constrained LP, conditioning, then greedy.
    ScLs {
        input: Option<PathBuf>,
        #[arg(long)]
        d: usize,
    },
    /// Exact Set Cover optimum.
    ScExact { input: Option<PathBuf> },
    /// Build and verify the symmetric lifted-LP certificate on a generated hard instance.
    SaCertify {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = rational_arg)]
        epsilon: Rational,
        #[arg(long, value_parser = rational_arg)]
        gamma: Rational,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
    },
    /// Solve the PSD Knapsack lift and round it.
    KsRound {
        input: Option<PathBuf>,
        #[arg(long, value_parser = rational_arg)]
        epsilon: Rational,
        /// Lift level; defaults to the capped budget for epsilon.
        #[arg(long)]
        level: Option<usize>,
        /// Single reward threshold.
        #[arg(long, value_parser = rational_arg, conflicts_with = "sweep")]
        rho: Option<Rational>,
        /// Try every reward and 0 as the threshold (the default).
        #[arg(long)]
        sweep: bool,
    },
    /// Exact Knapsack optimum.
    KsExact { input: Option<PathBuf> },
    /// Generate a seeded instance.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        n: usize,
        /// Number of sets (setcover).
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long, value_parser = rational_arg, default_value = "1/2")]
        epsilon: Rational,
        #[arg(long, value_parser = rational_arg, default_value = "1/4")]
        eta: Rational,
        #[arg(long, value_parser = rational_arg, default_value = "1/2")]
        gamma: Rational,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Integer set costs (setcover).
        #[arg(long)]
        integer_costs: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Direct,
    Symmetric,
    Both,
    Auto,
}

impl From<ModeArg> for VerifyMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Direct => VerifyMode::Direct,
            ModeArg::Symmetric => VerifyMode::Symmetric,
            ModeArg::Both => VerifyMode::Both,
            ModeArg::Auto => VerifyMode::Auto,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    SaHard,
    Setcover,
    Knapsack,
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct RunReport {
    schema_version: u32,
    command: &'static str,
    /// SHA-256 of the canonical instance JSON.
    instance_digest: Option<String>,
    params: Value,
    seed: Option<u64>,
    tolerances: Tolerances,
    result: Value,
    instance: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings: Option<Value>,
}

/// What a subcommand produces before the common envelope is added.
struct Outcome {
    params: Value,
    seed: Option<u64>,
    result: Value,
    /// Canonical JSON text of the instance worked on.
    instance: Option<String>,
    moments: Option<MomentVector<f64>>,
}

enum Failure {
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Run<T> = std::result::Result<T, Failure>;

fn read_input(path: &Option<PathBuf>) -> Run<String> {
    let mut text = String::new();
    match path {
        Some(p) if p.as_os_str() != "-" => {
            text = std::fs::read_to_string(p)
                .map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
        }
        _ => {
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| Failure::Io(format!("stdin: {e}")))?;
        }
    }
    Ok(text)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn digest(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn dump_moments(path: &Path, y: &MomentVector<f64>) -> Run<()> {
    let csv = if y.level() >= 2 {
        build_moment_matrix(y)?.to_csv()
    } else {
        let mut out = String::from("\"subset\",\"value\"\n");
        for (s, v) in y.subsets().iter().zip(y.values()) {
            out.push_str(&format!("\"{}\",{v}\n", s.label()));
        }
        out
    };
    std::fs::write(path, csv).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn run(cmd: &Command) -> Run<Outcome> {
    let none = |params, result, instance| Outcome {
        params,
        seed: None,
        result,
        instance,
        moments: None,
    };
    Ok(match cmd {
        Command::ScGreedy { input } => {
            let inst = parse_setcover(&read_input(input)?)?;
            let g = greedy_setcover_full(&inst)?;
            let lp = setcover_lp_value(&inst)?;
            let hb = harmonic_int(inst.max_set_size() as u64);
            let bound = liftlab::rational::to_f64(&hb) * (lp + EPS_FEAS);
            let result = json!({
                "greedy": to_value(&g),
                "lp_value": round12(lp),
                "harmonic_b": hb.to_string(),
                "lp_bound": round12(bound),
                "lp_bound_holds": liftlab::rational::to_f64(&g.total_cost) <= bound,
                "lp_bound_tolerance": EPS_FEAS,
            });
            none(json!({}), result, Some(inst.to_canonical_string()))
        }
        Command::ScSubexp { input, d, cap } => {
            let inst = parse_setcover(&read_input(input)?)?;
            let cfg = SubexpConfig {
                d: *d,
                cap: *cap,
                parallel: true,
            };
            let r = guess_and_greedy(&inst, &cfg)?;
            none(
                json!({ "d": d, "cap": cap }),
                to_value(&r),
                Some(inst.to_canonical_string()),
            )
        }
        Command::ScLs { input, d } => {
            let inst = parse_setcover(&read_input(input)?)?;
            let (r, witness) = ls_round_with_witness(&inst, *d)?;
            Outcome {
                params: json!({ "d": d }),
                seed: None,
                result: to_value(&r),
                instance: Some(inst.to_canonical_string()),
                moments: Some(witness),
            }
        }
        Command::ScExact { input } => {
            let inst = parse_setcover(&read_input(input)?)?;
            let opt = exact_setcover_opt(&inst)?;
            none(
                json!({}),
                json!({ "opt": opt.cost.to_string(), "sets": opt.sets }),
                Some(inst.to_canonical_string()),
            )
        }
        Command::SaCertify {
            n,
            epsilon,
            gamma,
            seed,
            mode,
        } => {
            let cfg = GenerationConfig {
                n: *n,
                epsilon: epsilon.clone(),
                eta: epsilon * epsilon,
                gamma: gamma.clone(),
                seed: *seed,
            };
            let (generated, _) = gen_with_fallback(&cfg)?;
            let r = gap_experiment(&cfg, (*mode).into())?;
            Outcome {
                params: json!({
                    "n": n,
                    "epsilon": epsilon.to_string(),
                    "gamma": gamma.to_string(),
                    "eta": cfg.eta.to_string(),
                    "mode": to_value(&VerifyMode::from(*mode)),
                }),
                seed: Some(*seed),
                result: to_value(&r),
                instance: Some(generated.instance.to_canonical_string()),
                moments: None,
            }
        }
        Command::KsRound {
            input,
            epsilon,
            level,
            rho,
            sweep: _,
        } => {
            let inst = parse_knapsack(&read_input(input)?)?;
            let mut cfg = KSRoundConfig::new(epsilon.clone(), *level)?;
            if let Some(r) = rho {
                cfg = cfg.with_rho(r.clone());
            }
            let opt = exact_knapsack_opt(&inst)?.reward;
            let r = ks_round_instance(&inst, &cfg, Some(&opt))?;
            let moments = Some(r.lift.y.clone());
            Outcome {
                params: json!({
                    "epsilon": epsilon.to_string(),
                    "level": cfg.level,
                    "level_capped": cfg.level_capped,
                    "rho": rho.as_ref().map(|r| r.to_string()),
                    "sweep": rho.is_none(),
                }),
                seed: None,
                result: to_value(&r),
                instance: Some(inst.to_canonical_string()),
                moments,
            }
        }
        Command::KsExact { input } => {
            let inst = parse_knapsack(&read_input(input)?)?;
            let opt = exact_knapsack_opt(&inst)?;
            let (lp, x) = knapsack_lp_opt(&inst);
            let g = knapsack_greedy(&inst);
            let result = json!({
                "opt": opt.reward.to_string(),
                "chosen": opt.chosen.ones().collect::<Vec<_>>(),
                "lp_value": lp.to_string(),
                "lp_x": x.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                "greedy": to_value(&g),
            });
            none(json!({}), result, Some(inst.to_canonical_string()))
        }
        Command::Gen {
            kind,
            n,
            m,
            epsilon,
            eta,
            gamma,
            seed,
            integer_costs,
        } => {
            let (params, result, text) = match kind {
                Kind::SaHard => {
                    let cfg = GenerationConfig {
                        n: *n,
                        epsilon: epsilon.clone(),
                        eta: eta.clone(),
                        gamma: gamma.clone(),
                        seed: *seed,
                    };
                    let (g, verified) = gen_with_fallback(&cfg)?;
                    let params = json!({
                        "kind": "sa-hard",
                        "n": n,
                        "epsilon": epsilon.to_string(),
                        "eta": eta.to_string(),
                        "gamma": gamma.to_string(),
                    });
                    let result = json!({
                        "frequency": cfg.frequency(),
                        "attempts": g.attempts,
                        "opt": g.opt.to_string(),
                        "opt_lower_bound": round12(cfg.opt_target()),
                        "opt_bound_verified": verified,
                    });
                    (params, result, g.instance.to_canonical_string())
                }
                Kind::Setcover => {
                    let inst = random_setcover(*n, *m, *integer_costs, *seed);
                    let params = json!({ "kind": "setcover", "n": n, "m": m, "integer_costs": integer_costs });
                    (params, json!({}), inst.to_canonical_string())
                }
                Kind::Knapsack => {
                    let inst = random_knapsack(*n, *seed);
                    (
                        json!({ "kind": "knapsack", "n": n }),
                        json!({}),
                        inst.to_canonical_string(),
                    )
                }
            };
            Outcome {
                params,
                seed: Some(*seed),
                result,
                instance: Some(text),
                moments: None,
            }
        }
    })
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::ScGreedy { .. } => "sc-greedy",
        Command::ScSubexp { .. } => "sc-subexp",
        Command::ScLs { .. } => "sc-ls",
        Command::ScExact { .. } => "sc-exact",
        Command::SaCertify { .. } => "sa-certify",
        Command::KsRound { .. } => "ks-round",
        Command::KsExact { .. } => "ks-exact",
        Command::Gen { .. } => "gen",
    }
}

fn exit_code(f: &Failure) -> u8 {
    match f {
        Failure::Lib(Error::Numerical(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build_global()
    {
        eprintln!("liftlab: cannot start {} worker threads: {e}", cli.jobs);
        return ExitCode::from(1);
    }
    let start = Instant::now();
    let name = command_name(&cli.command);
    let outcome = run(&cli.command).and_then(|o| {
        if let (Some(path), Some(y)) = (&cli.dump_moments, &o.moments) {
            dump_moments(path, y)?;
        }
        Ok(o)
    });
    let elapsed = start.elapsed().as_secs_f64();
    eprintln!("liftlab: {name} took {elapsed:.3}s");
    let o = match outcome {
        Ok(o) => o,
        Err(f) => {
            match &f {
                Failure::Lib(e) => eprintln!("liftlab: {e}"),
                Failure::Io(e) => eprintln!("liftlab: {e}"),
            }
            return ExitCode::from(exit_code(&f));
        }
    };
    let instance = o
        .instance
        .as_deref()
        .map(|t| serde_json::from_str::<Value>(t).expect("canonical JSON parses"));
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        command: name,
        instance_digest: o.instance.as_deref().map(digest),
        params: o.params,
        seed: o.seed,
        tolerances: Tolerances::default(),
        result: o.result,
        instance,
        timings: cli
            .timings
            .then(|| json!({ "total_seconds": round12(elapsed) })),
    };
    let mut out = std::io::stdout().lock();
    let text = serde_json::to_string_pretty(&report).expect("reports serialize");
    if writeln!(out, "{text}").is_err() {
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_error_kind() {
        assert_eq!(
            exit_code(&Failure::Lib(Error::Numerical("stalled".into()))),
            2
        );
        assert_eq!(
            exit_code(&Failure::Lib(Error::Infeasible("item 3".into()))),
            1
        );
        assert_eq!(exit_code(&Failure::Io("gone".into())), 1);
    }

    #[test]
    fn digest_is_lowercase_sha256() {
        assert_eq!(
            digest(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
