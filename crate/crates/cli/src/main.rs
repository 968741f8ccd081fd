//! Command line front end: reproducible experiments over the repkit modules.
//!
//! Exit codes: 0 success, 2 precondition failure (bad arguments or inputs),
//! 3 certificate violation found by an audit-style run, 4 I/O error.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use repkit::cantor::Word;
use repkit::constructions::{apply_to_signed, build_product_schedule, LipschitzCoder};
use repkit::dyadic::Dyadic;
use repkit::entropy::{entropy_profile, FiniteMetricSpace, ProductSpace, DEFAULT_NODE_BUDGET};
use repkit::harness::{
    audit_admissibility, backward_modulus, binary_to_signed, dyadic_name_suite, dyadic_to_signed,
    forward_modulus, roundtrip_shift, signed_name_suite, signed_to_dyadic, verify_reduction,
    ReductionCheck,
};
use repkit::moduli::GrowthFn;
use repkit::standard_rep::{
    build_covering_family, family_from_json, family_to_json, kappa_of, run_cut_schedule,
    standard_decode, standard_encode, verify_schedule,
};
use repkit::unit_interval::{
    average_digits, binary_rep, dyadic_block_modulus, dyadic_rep, sigma_phi_rep, sigma_to_sigma_phi,
    sigma_to_sigma_phi_modulus, signed_decode, signed_digits, signed_digits_to_word, signed_rep,
    PointApprox, SignedDigit,
};
use serde_json::json;
use std::fs;
use std::process::ExitCode;

const EXIT_PRECONDITION: u8 = 2;
const EXIT_VIOLATION: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "repkit", version, about = "digit-stream representations, metric entropy, and admissibility experiments")]
struct Cli {
    /// Output format for the main artifact.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Average two signed-digit names; emits a signed name of (x+y)/2.
    Avg {
        /// First name: signed digits as glyphs (-0+) or raw wire bits.
        #[arg(allow_hyphen_values = true)]
        x: String,
        /// Second name, same syntax.
        #[arg(allow_hyphen_values = true)]
        y: String,
        /// Output digits to produce.
        #[arg(long, default_value_t = 16)]
        digits: u64,
    },
    /// Convert a name between representations of [0;1].
    Convert {
        #[arg(long, value_enum)]
        from: RepKind,
        #[arg(long, value_enum)]
        to: RepKind,
        /// Input name (signed names accept glyphs, everything accepts bits).
        #[arg(allow_hyphen_values = true)]
        name: String,
        /// Precision at which both sides are decoded for the report.
        #[arg(long = "n-max", default_value_t = 6)]
        n_max: u64,
        /// Position schedule for the scheduled signed target, e.g. "linear 0 2".
        #[arg(long, default_value = "linear 0 2")]
        phi: String,
    },
    /// Covering-number entropy profile of a finite metric space.
    Entropy {
        /// Path to a JSON space, or a builtin: grid:K, cantor:D,
        /// random:SEED:POINTS:RES, hilbert.
        space: String,
        #[arg(long = "n-max", default_value_t = 8)]
        n_max: u64,
        /// Branch-and-bound node budget before falling back to brackets.
        #[arg(long = "exact-limit", default_value_t = DEFAULT_NODE_BUDGET)]
        exact_limit: u64,
    },
    /// Build and verify a run-cut position schedule for a growth function.
    RunCut {
        /// Entropy-like growth function, e.g. "id", "linear 0 2", "poly 0 1 2".
        #[arg(long)]
        eta: String,
        /// Run factor c as a fraction, e.g. "3/2".
        #[arg(long, default_value = "3/2")]
        c: String,
        #[arg(long = "n-max", default_value_t = 4096)]
        n_max: u64,
    },
    /// Build a standard representation (covering family) and encode/decode.
    Standard {
        /// Space spec as for `entropy`, or a previously exported family JSON
        /// when the path ends in .family.json.
        space: String,
        #[arg(long, default_value_t = 6)]
        depth: u64,
        /// Encode the point with this index and print its name.
        #[arg(long)]
        encode: Option<usize>,
        /// Decode this name at precision --n-max and print the center.
        #[arg(long)]
        decode: Option<String>,
        #[arg(long = "n-max", default_value_t = 4)]
        n_max: u64,
        #[arg(long = "exact-limit", default_value_t = DEFAULT_NODE_BUDGET)]
        exact_limit: u64,
        /// Write the family as reproducible JSON to this path.
        #[arg(long)]
        out: Option<String>,
    },
    /// Countable-product bit schedule: position table and bijection check.
    Schedule {
        /// Comma-separated component moduli, e.g. "linear 0 2,linear 0 4".
        #[arg(long, default_value = "linear 0 2,linear 0 4,linear 0 6")]
        moduli: String,
        #[arg(long, default_value_t = 8)]
        depth: u64,
    },
    /// Apply a coded 1-Lipschitz function f(x) = |x - 1/2| on a dyadic grid.
    Apply {
        /// Grid resolution: points i/2^k.
        #[arg(long, default_value_t = 8)]
        k: u32,
        /// Argument x as a dyadic literal, e.g. "3/2^2".
        #[arg(long, default_value = "1/2^2")]
        x: String,
        /// Signed digits of f(x) to emit.
        #[arg(long, default_value_t = 4)]
        digits: u64,
    },
    /// Admissibility audit of a representation of [0;1].
    Audit {
        #[arg(long, value_enum)]
        rep: RepKind,
        #[arg(long = "c-max", default_value_t = 64)]
        c_max: u64,
        #[arg(long = "n-max", default_value_t = 512)]
        n_max: u64,
        /// Seed for the rival-name suites.
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Realizer-modulus calculators for the forward/backward bounds.
    Bounds {
        /// Source representation modulus.
        #[arg(long, default_value = "linear 0 2")]
        kappa: String,
        /// Target representation modulus.
        #[arg(long, default_value = "linear 0 2")]
        lambda: String,
        /// Function modulus.
        #[arg(long, default_value = "id")]
        mu: String,
        #[arg(long, default_value_t = 1)]
        c: u64,
        #[arg(long = "n-max", default_value_t = 16)]
        n_max: u64,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum RepKind {
    Binary,
    Dyadic,
    Signed,
    Scheduled,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if e.chain().any(|c| c.downcast_ref::<std::io::Error>().is_some()) {
                EXIT_IO
            } else {
                EXIT_PRECONDITION
            };
            ExitCode::from(code)
        }
    }
}

/// Parse a signed name given as glyphs (-0+) or as raw wire bits.
fn parse_signed(s: &str) -> Result<Vec<SignedDigit>> {
    let s = s.trim();
    if s.chars().any(|c| c == '+' || c == '-') {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '+' => Ok(SignedDigit::from_value(1).expect("valid")),
                '-' => Ok(SignedDigit::from_value(-1).expect("valid")),
                '0' => Ok(SignedDigit::from_value(0).expect("valid")),
                other => Err(anyhow!("bad signed glyph {other:?}")),
            })
            .collect()
    } else {
        let w = Word::parse_text(s).context("name is neither glyphs nor bits")?;
        Ok(signed_digits(&w)?)
    }
}

fn parse_word(s: &str) -> Result<Word> {
    Word::parse_text(s.trim()).map_err(|e| anyhow!("bad name: {e}"))
}

fn glyphs(digits: &[SignedDigit]) -> String {
    digits.iter().map(|d| d.glyph()).collect()
}

fn load_space(spec: &str, budget: u64) -> Result<FiniteMetricSpace> {
    if let Some(rest) = spec.strip_prefix("grid:") {
        return Ok(FiniteMetricSpace::grid_pow2(rest.parse().context("grid:K needs integer K")?));
    }
    if let Some(rest) = spec.strip_prefix("cantor:") {
        return Ok(FiniteMetricSpace::cantor_truncation(
            rest.parse().context("cantor:D needs integer D")?,
        ));
    }
    if let Some(rest) = spec.strip_prefix("random:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            bail!("random spec is random:SEED:POINTS:RES");
        }
        return Ok(FiniteMetricSpace::random_line_subset(
            parts[0].parse()?,
            parts[1].parse()?,
            parts[2].parse()?,
        ));
    }
    let _ = budget;
    let text = fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
    Ok(FiniteMetricSpace::from_json(&text)?)
}

fn parse_growth(s: &str) -> Result<GrowthFn> {
    GrowthFn::parse(s).map_err(|e| anyhow!("bad growth function {s:?}: {e}"))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let fmt = cli.format;
    match cli.command {
        Command::Avg { x, y, digits } => {
            let dx = parse_signed(&x)?;
            let dy = parse_signed(&y)?;
            let need = digits as usize + 2;
            if dx.len() < need || dy.len() < need {
                bail!("averaging {digits} digits needs {need} input digits (got {} and {})", dx.len(), dy.len());
            }
            let out = average_digits(&dx, &dy, digits)?;
            let w = signed_digits_to_word(&out);
            let value = signed_decode(&w, digits)?;
            match fmt {
                Format::Text => {
                    println!("digits {}", glyphs(&out));
                    println!("bits   {w}");
                    println!("decode@{digits} = {value}");
                }
                Format::Json => println!(
                    "{}",
                    json!({"digits": glyphs(&out), "bits": w.to_string(),
                           "decode": value.to_string(), "precision": digits})
                ),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Convert { from, to, name, n_max, phi } => {
            let (out, decode_in, decode_out): (Word, Dyadic, Dyadic) = match (from, to) {
                (RepKind::Binary, RepKind::Signed) => {
                    let w = parse_word(&name)?;
                    let out = binary_to_signed().apply(&w)?;
                    (out.clone(), binary_rep().decode(&w, n_max)?, signed_rep().decode(&out, n_max)?)
                }
                (RepKind::Dyadic, RepKind::Signed) => {
                    let w = parse_word(&name)?;
                    let out = dyadic_to_signed().apply(&w)?;
                    (out.clone(), dyadic_rep().decode(&w, n_max)?, signed_rep().decode(&out, n_max)?)
                }
                (RepKind::Signed, RepKind::Dyadic) => {
                    let w = signed_digits_to_word(&parse_signed(&name)?);
                    let out = signed_to_dyadic().apply(&w)?;
                    (out.clone(), signed_rep().decode(&w, n_max)?, dyadic_rep().decode(&out, n_max)?)
                }
                (RepKind::Signed, RepKind::Scheduled) => {
                    let phi = parse_growth(&phi)?;
                    let w = signed_digits_to_word(&parse_signed(&name)?);
                    let blocks = n_max + 1;
                    let out = sigma_to_sigma_phi(&w, &phi, blocks)?;
                    (
                        out.clone(),
                        signed_rep().decode(&w, n_max)?,
                        sigma_phi_rep(&phi).decode(&out, n_max)?,
                    )
                }
                _ => bail!("unsupported conversion; supported: binary->signed, dyadic->signed, signed->dyadic, signed->scheduled"),
            };
            let gap = (decode_in.clone() - decode_out.clone()).abs();
            match fmt {
                Format::Text => {
                    println!("output {out}");
                    println!("decode@{n_max}: in = {decode_in}, out = {decode_out} (gap {gap})");
                }
                Format::Json => println!(
                    "{}",
                    json!({"output": out.to_string(), "precision": n_max,
                           "decode_in": decode_in.to_string(),
                           "decode_out": decode_out.to_string(), "gap": gap.to_string()})
                ),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Entropy { space, n_max, exact_limit } => {
            let rows = if space == "hilbert" {
                ProductSpace::hilbert_standin().entropy_profile(n_max, exact_limit)
            } else {
                let sp = load_space(&space, exact_limit)?;
                entropy_profile(&sp, n_max, exact_limit)
            };
            match fmt {
                Format::Text => {
                    println!("{:>3} {:>10} {:>10} {:>6} {:>7} {:>7}", "n", "cover.lo", "cover.hi", "exact", "eta.lo", "eta.hi");
                    for r in &rows {
                        println!(
                            "{:>3} {:>10} {:>10} {:>6} {:>7} {:>7}",
                            r.n, r.covering.lo, r.covering.hi, r.covering.exact, r.eta_lo, r.eta_hi
                        );
                    }
                }
                Format::Json => {
                    let rows: Vec<_> = rows
                        .iter()
                        .map(|r| {
                            json!({"n": r.n, "covering_lo": r.covering.lo,
                                   "covering_hi": r.covering.hi, "exact": r.covering.exact,
                                   "eta_lo": r.eta_lo, "eta_hi": r.eta_hi})
                        })
                        .collect();
                    println!("{}", json!(rows));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::RunCut { eta, c, n_max } => {
            let eta = parse_growth(&eta)?;
            let (cn, cd) = c
                .split_once('/')
                .map(|(a, b)| (a.parse::<u64>(), b.parse::<u64>()))
                .map(|(a, b)| a.and_then(|a| b.map(|b| (a, b))))
                .unwrap_or_else(|| c.parse::<u64>().map(|a| (a, 1)))
                .map_err(|_| anyhow!("bad run factor {c:?}; use e.g. 3/2"))?;
            let sched = run_cut_schedule(&eta, cn, cd, n_max)?;
            let audit = verify_schedule(&eta, &sched, n_max)?;
            let ok = audit.run_factor_ok && audit.growth_ok && audit.growth_shifted_ok && audit.sum_bound_ok;
            match fmt {
                Format::Text => {
                    println!("cuts ({}): {:?}", sched.values.len(), sched.values);
                    println!("(a) run factor      {}", audit.run_factor_ok);
                    println!("(b) growth          {}", audit.growth_ok);
                    println!("(c) growth shifted  {}", audit.growth_shifted_ok);
                    println!("(d) sum bound       {}", audit.sum_bound_ok);
                    if let Some(v) = &audit.first_violation {
                        println!("first violation: {v}");
                    }
                }
                Format::Json => println!(
                    "{}",
                    json!({"cuts": sched.values, "c": format!("{cn}/{cd}"),
                           "run_factor_ok": audit.run_factor_ok, "growth_ok": audit.growth_ok,
                           "growth_shifted_ok": audit.growth_shifted_ok,
                           "sum_bound_ok": audit.sum_bound_ok,
                           "first_violation": audit.first_violation})
                ),
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(EXIT_VIOLATION) })
        }
        Command::Standard { space, depth, encode, decode, n_max, exact_limit, out } => {
            let family = if space.ends_with(".family.json") {
                let text = fs::read_to_string(&space).with_context(|| format!("reading {space}"))?;
                family_from_json(&text)?
            } else {
                build_covering_family(&load_space(&space, exact_limit)?, depth, exact_limit)
            };
            let kappa = kappa_of(&family);
            let mut report = json!({
                "depth": family.depth(),
                "all_exact": family.all_exact(),
                "kappa": (0..=family.depth()).map(|n| kappa.eval(n).unwrap_or(u64::MAX)).collect::<Vec<_>>(),
            });
            if let Some(i) = encode {
                let w = standard_encode(&family, i, family.depth())?;
                report["encoded"] = json!({"point": i, "name": w.to_string()});
            }
            if let Some(name) = decode {
                let w = parse_word(&name)?;
                let c = standard_decode(&family, &w, n_max)?;
                report["decoded"] =
                    json!({"precision": n_max, "center": c, "label": family.space.label(c)});
            }
            if let Some(path) = out {
                fs::write(&path, family_to_json(&family)).with_context(|| format!("writing {path}"))?;
                report["written"] = json!(path);
            }
            match fmt {
                Format::Text => {
                    println!("levels 0..={}, all_exact = {}", report["depth"], report["all_exact"]);
                    println!("kappa  {}", report["kappa"]);
                    for key in ["encoded", "decoded", "written"] {
                        if !report[key].is_null() {
                            println!("{key} {}", report[key]);
                        }
                    }
                }
                Format::Json => println!("{report}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Schedule { moduli, depth } => {
            let moduli: Vec<GrowthFn> =
                moduli.split(',').map(|s| parse_growth(s.trim())).collect::<Result<_>>()?;
            let sched = build_product_schedule(&moduli, depth)?;
            sched.verify_bijection()?;
            match fmt {
                Format::Text => {
                    println!("components {}, depth {}, total bits {}", sched.components(), depth, sched.positions.len());
                    println!("stage ends {:?}", sched.stage_ends);
                    let show = sched.positions.len().min(64);
                    for (g, (j, i)) in sched.positions.iter().enumerate().take(show) {
                        println!("{g:>4} -> component {j} bit {i}");
                    }
                    if sched.positions.len() > show {
                        println!("... {} more", sched.positions.len() - show);
                    }
                }
                Format::Json => println!(
                    "{}",
                    json!({"components": sched.components(), "depth": depth,
                           "stage_ends": sched.stage_ends,
                           "positions": sched.positions})
                ),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Apply { k, x, digits } => {
            let x: Dyadic = x.parse().map_err(|e| anyhow!("bad dyadic literal: {e}"))?;
            let space = FiniteMetricSpace::grid_pow2(k);
            let half = Dyadic::ratio(1, 1);
            let f: Vec<Dyadic> = (0..space.len())
                .map(|i| (space.dist(0, i) - half.clone()).abs())
                .collect();
            let top = (k as u64 + 2).min(digits + 7);
            let mut coders = Vec::new();
            let mut codes = Vec::new();
            for n in 2..=top {
                let coder = LipschitzCoder::new(&space, n)?;
                codes.push(coder.encode(&f)?);
                coders.push(coder);
            }
            let out = apply_to_signed(&coders, &codes, &PointApprox::exact(x.clone()), digits)?;
            let w = signed_digits_to_word(&out);
            let value = signed_decode(&w, digits)?;
            let truth = (x - half).abs();
            match fmt {
                Format::Text => {
                    println!("digits {}", glyphs(&out));
                    println!("decode@{digits} = {value} (f(x) = {truth})");
                }
                Format::Json => println!(
                    "{}",
                    json!({"digits": glyphs(&out), "decode": value.to_string(),
                           "truth": truth.to_string(), "precision": digits})
                ),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Audit { rep, c_max, n_max, seed } => {
            let eta = GrowthFn::id(); // entropy of [0;1] up to the +/-1 convention
            let (name, kappa) = match rep {
                RepKind::Signed => ("signed", signed_rep().modulus().clone()),
                RepKind::Dyadic => ("dyadic", dyadic_block_modulus()),
                RepKind::Scheduled => {
                    ("scheduled-signed", sigma_to_sigma_phi_modulus(&GrowthFn::id()))
                }
                RepKind::Binary => bail!("the binary representation has no modulus to audit"),
            };
            let reductions: Vec<ReductionCheck> = match rep {
                RepKind::Signed => {
                    let suite = dyadic_name_suite(seed, 50, 16);
                    vec![verify_reduction(&dyadic_to_signed(), &dyadic_rep(), &signed_rep(), &suite, 8)?]
                }
                RepKind::Dyadic => {
                    let suite = signed_name_suite(seed, 50, 40);
                    vec![verify_reduction(&signed_to_dyadic(), &signed_rep(), &dyadic_rep(), &suite, 8)?]
                }
                _ => vec![],
            };
            let report = audit_admissibility(name, &kappa, &eta, c_max, n_max, reductions)?;
            match fmt {
                Format::Text => {
                    println!("rep {name}");
                    println!("condition (i) linear:     passing C = {:?}", report.linear_i.passing_c);
                    println!("condition (i) polynomial: passing C = {:?}", report.polynomial_i.passing_c);
                    for r in &report.reductions {
                        println!(
                            "reduction {} ({} -> {}): ok = {}, checked {}",
                            r.realizer, r.from, r.to, r.ok, r.checked
                        );
                    }
                    println!("linearly admissible:     {}", report.audits_linear);
                    println!("polynomially admissible: {}", report.audits_polynomial);
                }
                Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
            }
            Ok(if report.audits_polynomial || report.audits_linear {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VIOLATION)
            })
        }
        Command::Bounds { kappa, lambda, mu, c, n_max } => {
            let kappa = parse_growth(&kappa)?;
            let lambda = parse_growth(&lambda)?;
            let mu = parse_growth(&mu)?;
            let nu = forward_modulus(&kappa, &mu, &lambda, c);
            let mu_prime = backward_modulus(&kappa, &nu, &lambda, c);
            let shift = roundtrip_shift(&mu, &mu_prime, n_max, 64)?;
            match fmt {
                Format::Text => {
                    println!("{:>4} {:>8} {:>8} {:>8}", "n", "mu", "nu", "mu'");
                    for n in 0..=n_max {
                        println!(
                            "{:>4} {:>8} {:>8} {:>8}",
                            n,
                            mu.eval(n)?,
                            nu.eval(n)?,
                            mu_prime.eval(n)?
                        );
                    }
                    println!("roundtrip shift C = {shift:?} (mu'(n) <= mu(n+C)+C)");
                }
                Format::Json => {
                    let rows: Vec<_> = (0..=n_max)
                        .map(|n| -> Result<_> {
                            Ok(json!({"n": n, "mu": mu.eval(n)?, "nu": nu.eval(n)?,
                                      "mu_prime": mu_prime.eval(n)?}))
                        })
                        .collect::<Result<_>>()?;
                    println!("{}", json!({"rows": rows, "roundtrip_shift": shift}));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
