//! Command-line front end: closed-form values, witness constructions, the
//! exact solver, weighted-configuration reports, the charge-redistribution
//! verifier, the inequality audit, the averaging identity, and a self-test
//! battery.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 budget exhausted before
//! optimality, 3 verification failure. A closed output pipe ends the run
//! quietly with the conventional SIGPIPE status (141).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use matchfree::config::{build_config, CyclicOrder, Variant};
use matchfree::{
    anchored_family, audit, average_identity, e_formula, kleitman_family, parse_family,
    random_upset, rational_string, records_to_csv, run_discharge, solve_exact,
    verify_disjointness_catalog, verify_family, verify_layer_sums, write_family, SetFamily,
};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "matchfree",
    version,
    about = "Verification laboratory for maximum set families without s pairwise disjoint members"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    /// Everything above the threshold layer plus part of the layer itself.
    Kleitman,
    /// Everything above the threshold layer plus the sets through element 1.
    Anchored,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Full,
    CentralOnly,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Full => Variant::Full,
            VariantArg::CentralOnly => Variant::CentralOnly,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the exact maximum family size for (n, s).
    Formula {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        s: u32,
    },
    /// Write a maximum family witnessing the closed form.
    Construct {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        s: u32,
        #[arg(long, value_enum, default_value = "anchored")]
        kind: KindArg,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report size, matching number, and formula agreement for a family file.
    Check {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        s: u32,
    },
    /// Exact branch-and-bound maximum for (n, s) under a time budget.
    Solve {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        s: u32,
        #[arg(long, default_value_t = 60)]
        budget_seconds: u64,
        /// Write the best family found to this file.
        #[arg(long)]
        emit_witness: Option<PathBuf>,
    },
    /// Emit the weighted configuration for one cyclic order as JSON.
    Config {
        #[arg(long)]
        s: u32,
        #[arg(long)]
        m: u32,
        /// Permutation file (one comma-separated line) or "identity".
        #[arg(long, default_value = "identity")]
        sigma: String,
        #[arg(long, value_enum, default_value = "full")]
        variant: VariantArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify the configuration's layer sums and disjointness catalog.
    AuditConfig {
        #[arg(long)]
        s: u32,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value = "identity")]
        sigma: String,
        #[arg(long, value_enum, default_value = "full")]
        variant: VariantArg,
    },
    /// Run the charge redistribution for a family and report the verdict.
    Discharge {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value = "identity")]
        sigma: String,
        #[arg(long, value_enum, default_value = "full")]
        variant: VariantArg,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Evaluate every supporting bound for m = 1..=m-max.
    AuditInequalities {
        #[arg(long)]
        s: u32,
        #[arg(long)]
        m_max: u32,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the full-permutation averaging identity for a family.
    Average {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        m: u32,
        #[arg(long, value_enum, default_value = "full")]
        variant: VariantArg,
    },
    /// Run the built-in verification battery.
    Selftest {
        /// Base seed for the randomized checks; recorded in the output.
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            // Help/version go to stdout, diagnostics to stderr, per clap.
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.cmd {
        Cmd::Formula { n, s } => cmd_formula(n, s),
        Cmd::Construct { n, s, kind, out } => cmd_construct(n, s, kind, out.as_deref()),
        Cmd::Check { family, s } => cmd_check(&family, s),
        Cmd::Solve {
            n,
            s,
            budget_seconds,
            emit_witness,
        } => cmd_solve(n, s, budget_seconds, emit_witness.as_deref()),
        Cmd::Config {
            s,
            m,
            sigma,
            variant,
            out,
        } => cmd_config(s, m, &sigma, variant.into(), out.as_deref()),
        Cmd::AuditConfig {
            s,
            m,
            sigma,
            variant,
        } => cmd_audit_config(s, m, &sigma, variant.into()),
        Cmd::Discharge {
            family,
            s,
            m,
            sigma,
            variant,
            report,
        } => cmd_discharge(&family, s, m, &sigma, variant.into(), report.as_deref()),
        Cmd::AuditInequalities {
            s,
            m_max,
            format,
            out,
        } => cmd_audit_inequalities(s, m_max, format, out.as_deref()),
        Cmd::Average {
            family,
            s,
            m,
            variant,
        } => cmd_average(&family, s, m, variant.into()),
        Cmd::Selftest { seed } => cmd_selftest(seed),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn read_to_string(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

/// Writes to stdout without panicking when the reader hangs up early
/// (`matchfree ... | head`): a closed pipe ends the run quietly with the
/// conventional SIGPIPE status.
fn emit(text: &str) {
    use std::io::Write as _;
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(141);
        }
        eprintln!("error: stdout: {e}");
        std::process::exit(i32::from(EXIT_USAGE));
    }
}

fn emit_line(text: &str) {
    emit(text);
    emit("\n");
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, content).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            emit_line(content);
            Ok(())
        }
    }
}

fn load_family(path: &Path) -> Result<SetFamily, String> {
    let text = read_to_string(path)?;
    parse_family(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// "identity" or a file holding one comma-separated permutation of 1..=n.
fn load_sigma(spec: &str, n: u32) -> Result<CyclicOrder, String> {
    if spec == "identity" {
        return Ok(CyclicOrder::identity(n));
    }
    let text = read_to_string(Path::new(spec))?;
    let line = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| format!("{spec}: no permutation line"))?;
    let order: Result<Vec<u32>, _> = line.split(',').map(|t| t.trim().parse::<u32>()).collect();
    let order = order.map_err(|e| format!("{spec}: {e}"))?;
    CyclicOrder::from_order(order).map_err(|e| format!("{spec}: {e}"))
}

fn cmd_formula(n: u32, s: u32) -> Result<u8, String> {
    let value = e_formula(n, s).map_err(|e| e.to_string())?;
    emit_line(&value.value.to_string());
    if let Some(note) = value.note {
        eprintln!("note: {note}");
    }
    Ok(EXIT_OK)
}

fn cmd_construct(n: u32, s: u32, kind: KindArg, out: Option<&Path>) -> Result<u8, String> {
    let family = match kind {
        KindArg::Kleitman => kleitman_family(n, s),
        KindArg::Anchored => anchored_family(n, s),
    }
    .map_err(|e| e.to_string())?;
    let text = write_family(&family);
    match out {
        Some(p) => {
            fs::write(p, &text).map_err(|e| format!("{}: {e}", p.display()))?;
            eprintln!("wrote {} members to {}", family.len(), p.display());
        }
        None => emit(&text),
    }
    Ok(EXIT_OK)
}

fn cmd_check(path: &Path, s: u32) -> Result<u8, String> {
    let family = load_family(path)?;
    let report = verify_family(&family, s).map_err(|e| e.to_string())?;
    emit_line(&serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(EXIT_OK)
}

fn cmd_solve(n: u32, s: u32, budget_seconds: u64, witness: Option<&Path>) -> Result<u8, String> {
    let result =
        solve_exact(n, s, Duration::from_secs(budget_seconds)).map_err(|e| e.to_string())?;
    let report = json!({
        "n": result.n,
        "s": result.s,
        "value": result.value,
        "optimal": result.optimal,
        "lower_bound": result.lower_bound,
        "upper_bound": result.upper_bound,
        "nodes": result.nodes,
        "elapsed_ms": result.elapsed.as_millis() as u64,
        "constraints": result.constraints,
    });
    emit_line(&serde_json::to_string_pretty(&report).expect("json"));
    if let Some(p) = witness {
        fs::write(p, write_family(&result.witness)).map_err(|e| format!("{}: {e}", p.display()))?;
    }
    Ok(if result.optimal { EXIT_OK } else { EXIT_BUDGET })
}

fn cmd_config(
    s: u32,
    m: u32,
    sigma: &str,
    variant: Variant,
    out: Option<&Path>,
) -> Result<u8, String> {
    let n = s.checked_mul(m).and_then(|v| v.checked_add(s - 2));
    let n = n.ok_or_else(|| "s and m are too large".to_string())?;
    let order = load_sigma(sigma, n)?;
    let cfg = build_config(&order, s, m, variant).map_err(|e| e.to_string())?;
    let entries: Vec<_> = cfg
        .entries
        .iter()
        .map(|(set, entry)| {
            let per_x: serde_json::Map<String, serde_json::Value> = entry
                .per_x
                .iter()
                .map(|(x, w)| (x.to_string(), rational_string(w).into()))
                .collect();
            json!({
                "set": set,
                "weight": rational_string(&entry.weight),
                "per_x": per_x,
                "slots": entry.slots,
            })
        })
        .collect();
    let doc = json!({
        "n": cfg.n,
        "s": cfg.s,
        "m": cfg.m,
        "variant": cfg.variant,
        "sigma": order.order(),
        "entries": entries,
    });
    write_output(out, &serde_json::to_string_pretty(&doc).expect("json"))?;
    Ok(EXIT_OK)
}

fn cmd_audit_config(s: u32, m: u32, sigma: &str, variant: Variant) -> Result<u8, String> {
    let n = s * m + s - 2;
    let order = load_sigma(sigma, n)?;
    let cfg = build_config(&order, s, m, variant).map_err(|e| e.to_string())?;
    let layers = verify_layer_sums(&cfg);
    let catalog = verify_disjointness_catalog(&order, s, m).map_err(|e| e.to_string())?;
    let doc = json!({
        "layer_sums": layers,
        "catalog": catalog,
    });
    emit_line(&serde_json::to_string_pretty(&doc).expect("json"));
    Ok(if layers.all_match && catalog.all_pass {
        EXIT_OK
    } else {
        EXIT_VERIFY
    })
}

fn cmd_discharge(
    path: &Path,
    s: u32,
    m: u32,
    sigma: &str,
    variant: Variant,
    report_path: Option<&Path>,
) -> Result<u8, String> {
    let family = load_family(path)?;
    let order = load_sigma(sigma, family.n())?;
    let report = run_discharge(&family, &order, s, m, variant).map_err(|e| e.to_string())?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    match report_path {
        Some(p) => {
            fs::write(p, &text).map_err(|e| format!("{}: {e}", p.display()))?;
            eprintln!(
                "verdict: {} ({} violations), report in {}",
                report.verdict,
                report.violations.len(),
                p.display()
            );
        }
        None => emit_line(&text),
    }
    Ok(if report.verdict { EXIT_OK } else { EXIT_VERIFY })
}

fn cmd_audit_inequalities(
    s: u32,
    m_max: u32,
    format: FormatArg,
    out: Option<&Path>,
) -> Result<u8, String> {
    let records = audit(s, m_max).map_err(|e| e.to_string())?;
    let content = match format {
        FormatArg::Csv => records_to_csv(&records),
        FormatArg::Json => serde_json::to_string_pretty(&records).expect("records serialize"),
    };
    write_output(out, content.trim_end())?;
    Ok(EXIT_OK)
}

fn cmd_average(path: &Path, s: u32, m: u32, variant: Variant) -> Result<u8, String> {
    let family = load_family(path)?;
    let report = average_identity(&family, s, m, variant).map_err(|e| e.to_string())?;
    emit_line(&serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(if report.identity_holds {
        EXIT_OK
    } else {
        EXIT_VERIFY
    })
}

/// Runs one named check, prints its line, and folds the outcome.
fn step(failures: &mut u32, name: &str, outcome: Result<(), String>) {
    match outcome {
        Ok(()) => emit_line(&format!("ok   - {name}")),
        Err(msg) => {
            *failures += 1;
            emit_line(&format!("FAIL - {name}: {msg}"));
        }
    }
}

fn expect(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cmd_selftest(seed: u64) -> Result<u8, String> {
    emit_line(&format!("selftest (seed {seed})"));
    let mut failures = 0u32;

    step(&mut failures, "closed-form anchor values", {
        let anchors = [
            (4u32, 3u32, 12u64),
            (5, 3, 26),
            (6, 3, 52),
            (7, 3, 105),
            (6, 4, 58),
            (7, 4, 120),
            (8, 4, 240),
            (10, 4, 977),
        ];
        anchors.iter().try_for_each(|&(n, s, want)| {
            let got = e_formula(n, s).map_err(|e| e.to_string())?.value;
            expect(got == want.into(), || format!("e({n},{s}) = {got}, want {want}"))
        })
    });

    step(&mut failures, "witness constructions", {
        [(4u32, 3u32), (5, 3), (6, 3), (7, 3), (6, 4), (7, 4), (8, 4), (10, 4), (13, 3), (14, 4)]
            .iter()
            .try_for_each(|&(n, s)| {
                let want = e_formula(n, s).map_err(|e| e.to_string())?.value;
                // Constructor choice follows the residue class of n mod s.
                let family = if n % s == s - 2 {
                    anchored_family(n, s).map_err(|e| e.to_string())?
                } else {
                    kleitman_family(n, s).map_err(|e| e.to_string())?
                };
                {
                    let report = verify_family(&family, s).map_err(|e| e.to_string())?;
                    expect(
                        report.size == usize::try_from(&want).unwrap_or(usize::MAX)
                            && report.nu_capped == (s - 1) as usize
                            && report.matches_formula == Some(true),
                        || format!("witness for ({n},{s}) off: {report:?}"),
                    )?;
                }
                Ok(())
            })
    });

    step(&mut failures, "exact solver on small grounds", {
        [(4u32, 3u32, 12usize), (5, 3, 26), (6, 4, 58)]
            .iter()
            .try_for_each(|&(n, s, want)| {
                let r = solve_exact(n, s, Duration::from_secs(60)).map_err(|e| e.to_string())?;
                expect(r.optimal && r.value == want, || {
                    format!("solver({n},{s}) = {} optimal={}", r.value, r.optimal)
                })
            })
    });

    step(&mut failures, "layer sums across random orders", {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut run = |s: u32, m: u32| -> Result<(), String> {
            let n = s * m + s - 2;
            let mut orders = vec![CyclicOrder::identity(n)];
            for _ in 0..3 {
                let mut perm: Vec<u32> = (1..=n).collect();
                perm.shuffle(&mut rng);
                orders.push(CyclicOrder::from_order(perm).map_err(|e| e.to_string())?);
            }
            for order in &orders {
                for variant in [Variant::Full, Variant::CentralOnly] {
                    let cfg = build_config(order, s, m, variant).map_err(|e| e.to_string())?;
                    let report = verify_layer_sums(&cfg);
                    expect(report.all_match, || {
                        format!("layer sums s={s} m={m} {variant:?}: {report:?}")
                    })?;
                }
            }
            Ok(())
        };
        (1..=4)
            .try_for_each(|m| run(3, m))
            .and_then(|()| (1..=3).try_for_each(|m| run(4, m)))
    });

    step(&mut failures, "disjointness catalog", {
        let mut out = Ok(());
        'outer: for (s, ms) in [(3u32, 3..=5u32), (4, 3..=4)] {
            for m in ms {
                let n = s * m + s - 2;
                let report = verify_disjointness_catalog(&CyclicOrder::identity(n), s, m)
                    .map_err(|e| e.to_string());
                match report {
                    Ok(r) if r.all_pass => {}
                    Ok(r) => {
                        out = Err(format!("catalog s={s} m={m}: {:?}", r.violations.first()));
                        break 'outer;
                    }
                    Err(e) => {
                        out = Err(e);
                        break 'outer;
                    }
                }
            }
        }
        out
    });

    step(&mut failures, "charge redistribution on witnesses", {
        [
            (7u32, 3u32, Variant::CentralOnly),
            (10, 3, Variant::Full),
            (10, 4, Variant::CentralOnly),
            (14, 4, Variant::Full),
        ]
        .iter()
        .try_for_each(|&(n, s, variant)| {
            let m = (n + 2 - s) / s;
            let family = anchored_family(n, s).map_err(|e| e.to_string())?;
            let report = run_discharge(&family, &CyclicOrder::identity(n), s, m, variant)
                .map_err(|e| e.to_string())?;
            expect(
                report.verdict && report.charged_total == report.bound_total,
                || format!("witness discharge ({n},{s}): {:?}", report.violations.first()),
            )
        })
    });

    step(&mut failures, "charge redistribution on random up-sets", {
        let mut out = Ok(());
        'outer: for (n, s, count) in [(10u32, 3u32, 25u64), (14, 4, 10)] {
            let m = (n + 2 - s) / s;
            for i in 0..count {
                let gen = random_upset(n, s, seed.wrapping_add(i)).map_err(|e| e.to_string());
                let gen = match gen {
                    Ok(g) => g,
                    Err(e) => {
                        out = Err(e);
                        break 'outer;
                    }
                };
                let report =
                    run_discharge(&gen.family, &CyclicOrder::identity(n), s, m, Variant::Full)
                        .map_err(|e| e.to_string());
                match report {
                    Ok(r) if r.verdict => {}
                    Ok(r) => {
                        out = Err(format!(
                            "seed {}: {:?}",
                            gen.seed,
                            r.violations.first()
                        ));
                        break 'outer;
                    }
                    Err(e) => {
                        out = Err(format!("seed {}: {e}", gen.seed));
                        break 'outer;
                    }
                }
            }
        }
        out
    });

    step(&mut failures, "averaging identity at the smallest grounds", {
        let f73 = anchored_family(7, 3).map_err(|e| e.to_string())?;
        let f64 = anchored_family(6, 4).map_err(|e| e.to_string())?;
        [(f73, 3u32, 2u32), (f64, 4, 1)]
            .iter()
            .try_for_each(|(family, s, m)| {
                let report = average_identity(family, *s, *m, Variant::Full)
                    .map_err(|e| e.to_string())?;
                expect(report.identity_holds, || {
                    format!(
                        "averaging s={s} m={m}: {} vs {}",
                        report.average_weighted_count, report.layer_census
                    )
                })
            })
    });

    step(&mut failures, "inequality audit thresholds", {
        let mut out = Ok(());
        'outer: for s in [3u32, 4] {
            let records = match audit(s, 120) {
                Ok(r) => r,
                Err(e) => {
                    out = Err(e.to_string());
                    break 'outer;
                }
            };
            for r in &records {
                let expected = match r.id {
                    "shared-target-capacity" | "stage2-s3-step" | "triple-target-cap" => r.m >= 3,
                    "stage2-s3-cap" | "stage1-s4-step" | "variant-triple-s4" => r.m >= 2,
                    _ => true,
                };
                if r.holds != expected {
                    out = Err(format!("{} at s={s} m={}: holds={}", r.id, r.m, r.holds));
                    break 'outer;
                }
            }
        }
        out
    });

    let mut summary = String::new();
    let _ = write!(summary, "selftest: {failures} failure(s)");
    emit_line(&summary);
    Ok(if failures == 0 { EXIT_OK } else { EXIT_VERIFY })
}
