//! Command-line interface: sector enumeration, steady states by three
//! methods, cross-verification, hat-relation checking and simulation.
//!
//! All machine output is JSON on stdout (`--pretty` switches to
//! human-readable tables); diagnostics go to stderr. Exit codes: 0 success,
//! 2 usage or input error, 3 verification failure.

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use itazrp::gillespie::{run as run_simulation, SimConfig};
use itazrp::markov::{check_steady, solve_kernel, GeneratorMatrix};
use itazrp::mpf::{normalization_check, steady_state_matrix_product, SteadyState};
use itazrp::multiline::steady_state_multiline;
use itazrp::states::Sector;
use itazrp::Configuration;

#[derive(Parser)]
#[command(
    name = "itazrp",
    version,
    about = "Exact steady states of the multispecies inhomogeneous TAZRP on a ring"
)]
struct Cli {
    /// Worker threads for internal parallelism (default: TAZRP_THREADS, then
    /// all cores). Output does not depend on the thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SectorArgs {
    /// Species count
    #[arg(long)]
    n: usize,
    /// Chain length
    #[arg(long = "L")]
    l: usize,
    /// Particle count per species, comma separated (length n, all >= 1)
    #[arg(long, value_delimiter = ',')]
    m: Vec<u32>,
}

impl SectorArgs {
    fn build(&self) -> Result<Sector, CliError> {
        Sector::new(self.n, self.l, self.m.clone()).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Mpf,
    Multiline,
    Kernel,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReferenceArg {
    None,
    Kernel,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the configurations (or multiline states) of a sector
    Sector {
        #[command(flatten)]
        sector: SectorArgs,
        /// List multiline states instead of configurations
        #[arg(long)]
        multiline: bool,
        #[arg(long)]
        pretty: bool,
    },
    /// Compute the steady state of a sector
    Steady {
        #[command(flatten)]
        sector: SectorArgs,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Rates for the kernel method, comma separated rationals
        /// (e.g. 1,2 or 1/2,3)
        #[arg(long, value_delimiter = ',')]
        w: Option<Vec<String>>,
        #[arg(long)]
        pretty: bool,
    },
    /// Cross-verify the steady-state constructions on one sector
    Verify {
        #[command(flatten)]
        sector: SectorArgs,
        /// Additionally compare against the exact rational kernel at
        /// w = (1, 2, ..., n)
        #[arg(long)]
        deep: bool,
        #[arg(long)]
        pretty: bool,
    },
    /// Verify the hat relation for local states up to an occupation bound
    HatCheck {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        bound: u32,
        #[arg(long)]
        pretty: bool,
    },
    /// Continuous-time Monte Carlo simulation of a sector
    Simulate {
        #[command(flatten)]
        sector: SectorArgs,
        /// Rates, comma separated (rationals or decimals)
        #[arg(long, value_delimiter = ',')]
        w: Vec<String>,
        #[arg(long, default_value_t = 1_000_000)]
        events: u64,
        #[arg(long, default_value_t = 0)]
        burn_in: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Exact reference distribution for the TV summary
        #[arg(long, value_enum, default_value_t = ReferenceArg::None)]
        reference: ReferenceArg,
        #[arg(long)]
        pretty: bool,
    },
}

enum CliError {
    /// Bad flags or invalid sector: exit 2.
    Usage(String),
    /// Verification or internal consistency failure: exit 3, with a JSON
    /// witness on stdout.
    Failure(String, serde_json::Value),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads(cli.threads);
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(msg, witness)) => {
            eprintln!("error: {msg}");
            println!("{}", serde_json::to_string(&witness).expect("witness serializes"));
            ExitCode::from(3)
        }
    }
}

fn init_threads(flag: Option<usize>) {
    let threads = flag.or_else(|| {
        std::env::var("TAZRP_THREADS").ok().and_then(|v| v.parse().ok())
    });
    if let Some(k) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Sector { sector, multiline, pretty } => cmd_sector(&sector, multiline, pretty),
        Command::Steady { sector, method, w, pretty } => cmd_steady(&sector, method, w, pretty),
        Command::Verify { sector, deep, pretty } => cmd_verify(&sector, deep, pretty),
        Command::HatCheck { n, bound, pretty } => cmd_hat_check(n, bound, pretty),
        Command::Simulate { sector, w, events, burn_in, seed, reference, pretty } => {
            cmd_simulate(&sector, &w, events, burn_in, seed, reference, pretty)
        }
    }
}

fn cmd_sector(args: &SectorArgs, multiline: bool, pretty: bool) -> Result<(), CliError> {
    let sector = args.build()?;
    let (label, items): (&str, Vec<String>) = if multiline {
        (
            "multiline_states",
            sector.enumerate_multiline().iter().map(|x| x.to_string()).collect(),
        )
    } else {
        (
            "configurations",
            sector.enumerate_configurations().iter().map(|c| c.to_text()).collect(),
        )
    };
    if pretty {
        println!(
            "n={} L={} m={:?}",
            sector.species(),
            sector.chain_length(),
            sector.multiplicities()
        );
        println!("count: {}", items.len());
        for item in &items {
            println!("{item}");
        }
    } else {
        let doc = serde_json::json!({
            "n": sector.species(),
            "L": sector.chain_length(),
            "m": sector.multiplicities(),
            "count": items.len(),
            label: items,
        });
        println!("{doc}");
    }
    Ok(())
}

fn cmd_steady(
    args: &SectorArgs,
    method: MethodArg,
    w: Option<Vec<String>>,
    pretty: bool,
) -> Result<(), CliError> {
    let sector = args.build()?;
    match method {
        MethodArg::Mpf => {
            let ss = steady_state_matrix_product(&sector)
                .map_err(|e| CliError::Failure(e.to_string(), serde_json::json!({})))?;
            print_steady(&ss, pretty);
        }
        MethodArg::Multiline => {
            let ss = steady_state_multiline(&sector)
                .map_err(|e| CliError::Failure(e.to_string(), serde_json::json!({})))?;
            print_steady(&ss, pretty);
        }
        MethodArg::Kernel => {
            let w = w.ok_or_else(|| CliError::Usage("--method kernel requires --w".to_string()))?;
            let rates = parse_rates(&w, sector.species())?;
            let probs = solve_kernel(&sector, &rates)
                .map_err(|e| CliError::Failure(e.to_string(), serde_json::json!({})))?;
            // the polynomial normalization of the same kernel direction,
            // for labeling; the solver itself stays independent of it
            let ss = steady_state_matrix_product(&sector)
                .map_err(|e| CliError::Failure(e.to_string(), serde_json::json!({})))?;
            let unit_sum: BTreeMap<String, String> =
                probs.iter().map(|(c, v)| (c.to_text(), v.to_string())).collect();
            let polynomial_normalized: BTreeMap<String, String> = ss
                .probs()
                .iter()
                .map(|(c, p)| (c.to_text(), p.eval(&rates).expect("length checked").to_string()))
                .collect();
            if pretty {
                println!("{:<24} {:<20} polynomial_normalized", "configuration", "unit_sum");
                for (k, v) in &unit_sum {
                    println!("{:<24} {:<20} {}", k, v, polynomial_normalized[k]);
                }
            } else {
                let doc = serde_json::json!({
                    "method": "kernel",
                    "w": w,
                    "unit_sum": unit_sum,
                    "polynomial_normalized": polynomial_normalized,
                });
                println!("{doc}");
            }
        }
    }
    Ok(())
}

fn print_steady(ss: &SteadyState, pretty: bool) {
    if pretty {
        let map: BTreeMap<String, String> =
            ss.probs().iter().map(|(c, p)| (c.to_text(), p.to_string())).collect();
        let width = map.keys().map(|k| k.len()).max().unwrap_or(0);
        for (k, v) in map {
            println!("{k:<width$}  {v}");
        }
    } else {
        println!("{}", ss.to_json());
    }
}

fn cmd_verify(args: &SectorArgs, deep: bool, pretty: bool) -> Result<(), CliError> {
    let sector = args.build()?;
    let mut checks: Vec<serde_json::Value> = Vec::new();
    let mut all_pass = true;
    let mut record = |name: &str, result: Result<(), serde_json::Value>| match result {
        Ok(()) => checks.push(serde_json::json!({"name": name, "status": "pass"})),
        Err(witness) => {
            all_pass = false;
            checks.push(serde_json::json!({"name": name, "status": "fail", "witness": witness}));
        }
    };

    let generator = GeneratorMatrix::build(&sector);
    let mpf = steady_state_matrix_product(&sector)
        .map_err(|e| CliError::Failure(e.to_string(), serde_json::json!({})))?;
    let ml = steady_state_multiline(&sector)
        .map_err(|e| CliError::Failure(e.to_string(), serde_json::json!({})))?;

    for (name, ss) in [("steady_mpf", &mpf), ("steady_multiline", &ml)] {
        let outcome = check_steady(&generator, ss.probs())
            .map_err(|e| CliError::Failure(e.to_string(), serde_json::json!({})))?;
        record(
            name,
            outcome.map_err(|v| {
                serde_json::json!({
                    "configuration": v.configuration.to_text(),
                    "residual": v.residual.to_string(),
                })
            }),
        );
    }

    let want_degree = ((sector.species() - 1) * (sector.chain_length() - 1)) as u32;
    record(
        "degree",
        check_all(&mpf, |c, p| {
            if p.homogeneous_degree() == Ok(Some(want_degree)) {
                None
            } else {
                Some(serde_json::json!({
                    "configuration": c.to_text(),
                    "polynomial": p.to_string(),
                    "expected_degree": want_degree,
                }))
            }
        }),
    );
    record(
        "nonnegativity",
        check_all(&mpf, |c, p| {
            if p.is_nonnegative() {
                None
            } else {
                Some(serde_json::json!({
                    "configuration": c.to_text(),
                    "polynomial": p.to_string(),
                }))
            }
        }),
    );
    record(
        "normalization",
        normalization_check(&mpf).map_err(|e| {
            serde_json::json!({
                "expected": e.expected.to_string(),
                "got": e.got.to_string(),
            })
        }),
    );
    record(
        "cyclic_invariance",
        check_all(&mpf, |c, p| {
            let shifted = c.cyclic_shift();
            if mpf.get(&shifted) == Some(p) {
                None
            } else {
                Some(serde_json::json!({"configuration": c.to_text()}))
            }
        }),
    );
    record(
        "method_agreement",
        if mpf.probs() == ml.probs() {
            Ok(())
        } else {
            let diff = mpf
                .probs()
                .iter()
                .find(|(c, p)| ml.get(c) != Some(p))
                .map(|(c, _)| c.to_text())
                .unwrap_or_default();
            Err(serde_json::json!({"first_difference": diff}))
        },
    );

    if deep {
        let w: Vec<BigRational> = (1..=sector.species())
            .map(|k| BigRational::from_integer((k as i64).into()))
            .collect();
        let outcome = match (solve_kernel(&sector, &w), mpf.eval_unit_sum(&w)) {
            (Ok(kernel), Ok(evaluated)) => {
                if kernel == evaluated {
                    Ok(())
                } else {
                    let diff = kernel
                        .iter()
                        .find(|(c, v)| evaluated.get(c) != Some(v))
                        .map(|(c, _)| c.to_text())
                        .unwrap_or_default();
                    Err(serde_json::json!({"first_difference": diff}))
                }
            }
            (Err(e), _) => Err(serde_json::json!({"solver_error": e.to_string()})),
            (_, Err(e)) => Err(serde_json::json!({"eval_error": e.to_string()})),
        };
        record("kernel_agreement", outcome);
    }

    let status = if all_pass { "pass" } else { "fail" };
    let doc = serde_json::json!({
        "n": sector.species(),
        "L": sector.chain_length(),
        "m": sector.multiplicities(),
        "status": status,
        "checks": checks,
    });
    if pretty {
        for check in doc["checks"].as_array().expect("array") {
            println!(
                "{:<20} {}",
                check["name"].as_str().expect("name"),
                check["status"].as_str().expect("status")
            );
        }
        println!("overall: {status}");
    } else {
        println!("{doc}");
    }
    if all_pass {
        Ok(())
    } else {
        Err(CliError::Failure("verification failed".to_string(), doc))
    }
}

fn check_all(
    ss: &SteadyState,
    mut f: impl FnMut(&Configuration, &itazrp::Polynomial) -> Option<serde_json::Value>,
) -> Result<(), serde_json::Value> {
    for (c, p) in ss.probs() {
        if let Some(witness) = f(c, p) {
            return Err(witness);
        }
    }
    Ok(())
}

fn cmd_hat_check(n: usize, bound: u32, pretty: bool) -> Result<(), CliError> {
    if n < 2 {
        return Err(CliError::Usage(format!("--n must be at least 2, got {n}")));
    }
    match itazrp::fock::check_hat_relation(n, bound) {
        Ok(report) => {
            if pretty {
                println!(
                    "hat relation holds: n={n} bound={bound} cap={} tuples={}",
                    report.cap, report.tuples
                );
            } else {
                println!(
                    "{}",
                    serde_json::json!({
                        "n": n,
                        "bound": bound,
                        "cap": report.cap,
                        "tuples": report.tuples,
                        "status": "pass",
                    })
                );
            }
            Ok(())
        }
        Err(itazrp::fock::FockError::HatViolation { alpha, beta, mu, nu, column }) => {
            Err(CliError::Failure(
                "hat relation violated".to_string(),
                serde_json::json!({
                    "n": n,
                    "bound": bound,
                    "status": "fail",
                    "violation": {
                        "alpha": alpha, "beta": beta, "mu": mu, "nu": nu,
                        "input_occupations": column,
                    },
                }),
            ))
        }
        Err(e) => Err(CliError::Usage(e.to_string())),
    }
}

fn cmd_simulate(
    args: &SectorArgs,
    w: &[String],
    events: u64,
    burn_in: u64,
    seed: u64,
    reference: ReferenceArg,
    pretty: bool,
) -> Result<(), CliError> {
    let sector = args.build()?;
    let rates = parse_rates(w, sector.species())?;
    let w_f64: Vec<f64> = rates
        .iter()
        .map(|r| r.to_f64().ok_or_else(|| CliError::Usage("rate out of f64 range".into())))
        .collect::<Result<_, _>>()?;
    let cfg = SimConfig { sector: sector.clone(), w: w_f64, seed, events, burn_in };
    let empirical = run_simulation(&cfg).map_err(|e| CliError::Usage(e.to_string()))?;
    let fractions: BTreeMap<String, f64> = empirical
        .time_fractions()
        .into_iter()
        .map(|(c, v)| (c.to_text(), v))
        .collect();

    let tv = match reference {
        ReferenceArg::None => None,
        ReferenceArg::Kernel => {
            let exact = solve_kernel(&sector, &rates)
                .map_err(|e| CliError::Failure(e.to_string(), serde_json::json!({})))?;
            let exact_f64: BTreeMap<Configuration, f64> = exact
                .into_iter()
                .map(|(c, v)| (c, v.to_f64().expect("probability fits f64")))
                .collect();
            Some(empirical.total_variation(&exact_f64))
        }
    };

    if pretty {
        let width = fractions.keys().map(|k| k.len()).max().unwrap_or(0);
        for (k, v) in &fractions {
            println!("{k:<width$}  {v:.6}");
        }
        if let Some(tv) = tv {
            println!("tv_distance: {tv:.6}");
        }
    } else {
        println!("{}", serde_json::json!(fractions));
        if let Some(tv) = tv {
            println!("{}", serde_json::json!({"tv_distance": tv}));
        }
    }
    Ok(())
}

/// Parse rates given as `7`, `3/2` or `0.25`.
fn parse_rates(raw: &[String], n: usize) -> Result<Vec<BigRational>, CliError> {
    if raw.len() != n {
        return Err(CliError::Usage(format!(
            "--w needs {n} comma-separated rates, got {}",
            raw.len()
        )));
    }
    raw.iter()
        .map(|s| {
            let r = parse_rational(s.trim())
                .ok_or_else(|| CliError::Usage(format!("cannot parse rate {s:?}")))?;
            if r.is_positive() && !r.is_zero() {
                Ok(r)
            } else {
                Err(CliError::Usage(format!("rates must be positive, got {s:?}")))
            }
        })
        .collect()
}

fn parse_rational(s: &str) -> Option<BigRational> {
    if let Some((num, den)) = s.split_once('/') {
        let n: num_bigint::BigInt = num.parse().ok()?;
        let d: num_bigint::BigInt = den.parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let digits = frac.len() as u32;
        let int_part: num_bigint::BigInt =
            if int.is_empty() || int == "-" { 0.into() } else { int.parse().ok()? };
        let frac_part: num_bigint::BigInt =
            if frac.is_empty() { 0.into() } else { frac.parse().ok()? };
        let base = num_bigint::BigInt::from(10u32).pow(digits);
        let negative = int.starts_with('-');
        let total = &int_part * &base + if negative { -frac_part } else { frac_part };
        return Some(BigRational::new(total, base));
    }
    let n: num_bigint::BigInt = s.parse().ok()?;
    Some(BigRational::from_integer(n))
}
