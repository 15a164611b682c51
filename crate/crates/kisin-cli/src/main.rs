//! Command-line front end for the kisin library.
//!
//! Subcommands: verify-appendix, table-nine-cases, lines, hn, delta-surface,
//! delta-elliptic, delta-general, weights. Every command prints a concise
//! human summary by default and a deterministic JSON report with `--json`
//! (rationals appear as {num, den} strings; timing goes to stderr only).
//!
//! Exit codes: 0 success, 1 usage or invalid input, 2 verification mismatch,
//! 3 precision exhausted.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use num::BigRational;
use serde_json::{json, Value};

use kisin::algebra::TruncSeries;
use kisin::cm_combinatorics::{
    hodge_val_unram_full, hodge_val_unram_p_torsion, reflex_weights, CMTypeLocal, KernelType,
};
use kisin::heights::{
    elliptic_delta, surface_delta, general_delta_bound, HeightDelta, Qualifier, SplittingCase,
    SurfaceKernelSpec,
};
use kisin::hn::{is_semistable, module_polygon, slope};
use kisin::line_solver::enumerate_lines;
use kisin::presets::{build, PresetModule, PresetName};
use kisin::{Error, Result};

const SCHEMA: &str = "kisin.report/1";

#[derive(Parser)]
#[command(
    name = "kisin",
    version,
    about = "Exact arithmetic for CM Kisin modules: line enumeration, slopes, and height tables"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the shipped quartic valuation tables at p = 2 or p = 5.
    VerifyAppendix {
        /// Prime to verify (2 or 5).
        #[arg(long)]
        p: u64,
        /// Override the working precision of the preset.
        #[arg(long)]
        precision: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Print the nine splitting-case height coefficients at (p, n).
    TableNineCases {
        #[arg(long)]
        p: u64,
        /// Total exponent of the isogeny degree p^n.
        #[arg(long)]
        n: u32,
        /// Kernel shape a,b,c for cases 8-9 (default: balanced partition of n).
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long, conflicts_with = "csv")]
        json: bool,
        #[arg(long)]
        csv: bool,
    },
    /// Enumerate saturated-line valuations of a preset, with witnesses.
    Lines {
        /// One of: h2-level2, h4-cyclic, unram-h2, unram-h3, unram-h4.
        #[arg(long)]
        preset: String,
        #[arg(long)]
        p: u64,
        /// Restrict to a single corank (default: all coranks 1..h-1).
        #[arg(long)]
        corank: Option<usize>,
        #[arg(long)]
        precision: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Slope, semistability verdict, and slope polygon of a preset.
    Hn {
        #[arg(long)]
        preset: String,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        precision: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Height coefficient for one splitting case of an abelian surface.
    DeltaSurface {
        /// Case number 1-9.
        #[arg(long)]
        case: u8,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: u32,
        /// Kernel shape a,b,c for cases 8-9 (default: balanced partition of n).
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Per-prime height coefficients for a CM elliptic curve.
    DeltaElliptic {
        /// Negative discriminant, 0 or 1 mod 4.
        #[arg(long, allow_negative_numbers = true)]
        disc: i64,
        /// Isogeny degree; its prime factorization drives the formula.
        #[arg(long)]
        n: u64,
        #[arg(long)]
        json: bool,
    },
    /// Height bound from a general per-prime splitting descriptor file.
    DeltaGeneral {
        /// JSON file holding a list of prime-factor descriptors.
        #[arg(long)]
        desc: PathBuf,
        /// Total degree exponent.
        #[arg(long)]
        r: u32,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        json: bool,
    },
    /// Reflex weights and Hodge valuations of an unramified CM type.
    Weights {
        #[arg(long)]
        p: u64,
        /// CM degree.
        #[arg(long = "h")]
        h: u32,
        /// Comma-separated type, e.g. 1,2.
        #[arg(long)]
        phi: String,
        /// Optional kernel type of length h, e.g. 2,1,0,0.
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long)]
        json: bool,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    std::process::exit(0);
                }
                _ => {
                    eprint!("{e}");
                    std::process::exit(1);
                }
            }
        }
    };
    let started = Instant::now();
    let code = match run(cli.cmd) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::PrecisionExhausted(_) => 3,
                Error::Invalid(_) => 1,
            }
        }
    };
    eprintln!("# elapsed: {} ms", started.elapsed().as_millis());
    std::process::exit(code);
}

fn run(cmd: Cmd) -> Result<i32> {
    match cmd {
        Cmd::VerifyAppendix { p, precision, json } => cmd_verify_appendix(p, precision, json),
        Cmd::TableNineCases {
            p,
            n,
            lambda,
            json,
            csv,
        } => cmd_table_nine_cases(p, n, lambda.as_deref(), json, csv),
        Cmd::Lines {
            preset,
            p,
            corank,
            precision,
            json,
        } => cmd_lines(&preset, p, corank, precision, json),
        Cmd::Hn {
            preset,
            p,
            precision,
            json,
        } => cmd_hn(&preset, p, precision, json),
        Cmd::DeltaSurface {
            case,
            p,
            n,
            lambda,
            json,
        } => cmd_delta_surface(case, p, n, lambda.as_deref(), json),
        Cmd::DeltaElliptic { disc, n, json } => cmd_delta_elliptic(disc, n, json),
        Cmd::DeltaGeneral { desc, r, p, json } => cmd_delta_general(&desc, r, p, json),
        Cmd::Weights {
            p,
            h,
            phi,
            lambda,
            json,
        } => cmd_weights(p, h, &phi, lambda.as_deref(), json),
    }
}

// ---------------------------------------------------------------- reporting

fn rat(r: &BigRational) -> Value {
    json!({ "num": r.numer().to_string(), "den": r.denom().to_string() })
}

fn qualifier_value(q: &Qualifier) -> Value {
    match q {
        Qualifier::Exact => json!("exact"),
        Qualifier::LowerBound => json!("lower-bound"),
        Qualifier::Range { min, max } => json!({ "range": { "min": rat(min), "max": rat(max) } }),
    }
}

fn delta_value(d: &HeightDelta) -> Value {
    json!({
        "coefficient": rat(&d.coefficient),
        "prime": d.prime,
        "qualifier": qualifier_value(&d.qualifier),
    })
}

fn qualifier_label(q: &Qualifier) -> String {
    match q {
        Qualifier::Exact => "exact".to_string(),
        Qualifier::LowerBound => "lower bound".to_string(),
        Qualifier::Range { min, max } => format!("range {min} ..= {max}"),
    }
}

fn report(command: &str, inputs: Value, outputs: Value) -> String {
    let value = json!({
        "schema": SCHEMA,
        "command": command,
        "inputs": inputs,
        "outputs": outputs,
    });
    serde_json::to_string_pretty(&value).expect("report serialization")
}

fn sparse_terms(s: &TruncSeries) -> Value {
    Value::Array(
        s.terms()
            .iter()
            .map(|&(e, c)| json!([e, c]))
            .collect::<Vec<_>>(),
    )
}

// ------------------------------------------------------------------ parsing

fn parse_u32_list(s: &str, what: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<u32>()
                .map_err(|_| Error::Invalid(format!("{what}: bad entry '{part}'")))
        })
        .collect()
}

fn parse_lambda3(s: &str) -> Result<[u32; 3]> {
    let v = parse_u32_list(s, "--lambda")?;
    if v.len() != 3 {
        return Err(Error::Invalid(format!(
            "--lambda needs exactly three entries, got {}",
            v.len()
        )));
    }
    Ok([v[0], v[1], v[2]])
}

fn parse_preset(name: &str, p: u64, precision: Option<u64>) -> Result<PresetModule> {
    build(PresetName::parse(name)?, p, precision)
}

fn factorize(mut n: u64) -> Result<BTreeMap<u64, u32>> {
    if n == 0 {
        return Err(Error::Invalid("--n must be positive".to_string()));
    }
    let mut out = BTreeMap::new();
    let mut d = 2u64;
    while d * d <= n {
        while n % d == 0 {
            *out.entry(d).or_insert(0) += 1;
            n /= d;
        }
        d += 1;
    }
    if n > 1 {
        *out.entry(n).or_insert(0) += 1;
    }
    Ok(out)
}

// ----------------------------------------------------------------- commands

struct CorankCheck {
    corank: usize,
    computed: Vec<u64>,
    expected: Vec<u64>,
    exact: bool,
    ok: bool,
}

fn cmd_verify_appendix(p: u64, precision: Option<u64>, json: bool) -> Result<i32> {
    let tables: [(usize, Vec<u64>, bool); 3] = match p {
        2 => [
            (3, vec![16, 24], true),
            (2, vec![32, 40], true),
            (1, vec![48, 56], true),
        ],
        5 => [
            (3, vec![1000, 1400, 1480, 1496], true),
            (2, vec![2000, 2400, 2480, 2496, 2800, 2896], false),
            (1, vec![3000, 3400, 3480, 3496], false),
        ],
        other => {
            return Err(Error::Invalid(format!(
                "verify-appendix supports p = 2 or p = 5, got {other}"
            )))
        }
    };

    let pm = build(PresetName::H4Cyclic, p, precision)?;
    let mut checks = Vec::new();
    for (corank, expected, exact) in tables {
        let computed = kisin::line_solver::submodule_valuations(&pm.module, corank)?;
        let ok = if exact {
            computed == expected
        } else {
            !computed.is_empty() && computed.iter().all(|v| expected.contains(v))
        };
        checks.push(CorankCheck {
            corank,
            computed,
            expected,
            exact,
            ok,
        });
    }
    let all_ok = checks.iter().all(|c| c.ok);

    if json {
        let outputs = json!({
            "preset": "h4-cyclic",
            "e": pm.e,
            "checks": checks.iter().map(|c| json!({
                "corank": c.corank,
                "computed": c.computed,
                "expected": c.expected,
                "comparison": if c.exact { "equal" } else { "subset" },
                "ok": c.ok,
            })).collect::<Vec<_>>(),
            "ok": all_ok,
        });
        println!(
            "{}",
            report(
                "verify-appendix",
                json!({ "p": p, "precision": precision }),
                outputs
            )
        );
    } else {
        for c in &checks {
            println!(
                "corank {}: computed {:?} {} {:?} -> {}",
                c.corank,
                c.computed,
                if c.exact { "expected" } else { "within" },
                c.expected,
                if c.ok { "ok" } else { "MISMATCH" }
            );
        }
        println!(
            "verify-appendix p={p}: {}",
            if all_ok { "all sets match" } else { "MISMATCH" }
        );
    }
    Ok(if all_ok { 0 } else { 2 })
}

fn nine_case_rows(
    p: u64,
    n: u32,
    lambda: Option<&str>,
) -> Result<(SurfaceKernelSpec, Vec<(u8, Option<HeightDelta>)>)> {
    let spec = match lambda {
        Some(s) => SurfaceKernelSpec::new(parse_lambda3(s)?)?,
        None => SurfaceKernelSpec::balanced(n)?,
    };
    if spec.n != n {
        return Err(Error::Invalid(format!(
            "--lambda sums to {}, but --n is {n}",
            spec.n
        )));
    }
    let mut rows = Vec::new();
    for case in 1u8..=9 {
        if case == 9 && !(p == 2 || p % 4 == 1) {
            rows.push((case, None));
            continue;
        }
        let delta = surface_delta(&SplittingCase::Surface(case), p, &spec)?;
        rows.push((case, Some(delta)));
    }
    Ok((spec, rows))
}

fn cmd_table_nine_cases(
    p: u64,
    n: u32,
    lambda: Option<&str>,
    json: bool,
    csv: bool,
) -> Result<i32> {
    let (spec, rows) = nine_case_rows(p, n, lambda)?;

    if json {
        let outputs = json!({
            "lambda": spec.lambdas,
            "cases": rows.iter().map(|(case, delta)| match delta {
                Some(d) => json!({ "case": case, "delta": delta_value(d) }),
                None => json!({ "case": case, "unavailable": "needs p = 1 mod 4 or p = 2" }),
            }).collect::<Vec<_>>(),
        });
        println!(
            "{}",
            report(
                "table-nine-cases",
                json!({ "p": p, "n": n, "lambda": lambda }),
                outputs
            )
        );
    } else if csv {
        println!("case,coefficient_num,coefficient_den,qualifier,max_num,max_den");
        for (case, delta) in &rows {
            match delta {
                Some(d) => {
                    let (maxn, maxd) = match &d.qualifier {
                        Qualifier::Range { max, .. } => {
                            (max.numer().to_string(), max.denom().to_string())
                        }
                        _ => (String::new(), String::new()),
                    };
                    let kind = match &d.qualifier {
                        Qualifier::Exact => "exact",
                        Qualifier::LowerBound => "lower-bound",
                        Qualifier::Range { .. } => "range",
                    };
                    println!(
                        "{case},{},{},{kind},{maxn},{maxd}",
                        d.coefficient.numer(),
                        d.coefficient.denom()
                    );
                }
                None => println!("{case},,,unavailable,,"),
            }
        }
    } else {
        println!("nine-case table at p={p}, n={n}, lambda={:?}", spec.lambdas);
        for (case, delta) in &rows {
            match delta {
                Some(d) => println!(
                    "case {case}: {} ({})",
                    d.coefficient,
                    qualifier_label(&d.qualifier)
                ),
                None => println!("case {case}: unavailable (needs p = 1 mod 4 or p = 2)"),
            }
        }
    }
    Ok(0)
}

fn cmd_lines(
    preset: &str,
    p: u64,
    corank: Option<usize>,
    precision: Option<u64>,
    json: bool,
) -> Result<i32> {
    let pm = parse_preset(preset, p, precision)?;
    let m = &pm.module;
    let h = m.rank;
    let coranks: Vec<usize> = match corank {
        Some(c) => {
            if c == 0 || c >= h {
                return Err(Error::Invalid(format!(
                    "--corank must lie in 1..={}, got {c}",
                    h - 1
                )));
            }
            vec![c]
        }
        None => (1..h).collect(),
    };

    let mut sections = Vec::new();
    for &c in &coranks {
        let wedge = m.wedge_power(h - c)?;
        let v_det = wedge.det_valuation_finite()?;
        let lines = enumerate_lines(&wedge)?;
        sections.push((c, v_det, lines));
    }

    if json {
        let outputs = json!({
            "preset": pm.name.as_str(),
            "h": pm.h,
            "d": pm.d,
            "e": pm.e,
            "module": serde_json::to_value(m.to_repr()).expect("module repr"),
            "coranks": sections.iter().map(|(c, v_det, lines)| json!({
                "corank": c,
                "wedge_det_valuation": v_det,
                "mu": lines.iter().map(|l| l.mu).collect::<Vec<_>>(),
                "lines": lines.iter().map(|l| json!({
                    "mu": l.mu,
                    "hodge_exponent": v_det - l.mu,
                    "pivot": l.pivot,
                    "witness": l.generator.iter().map(sparse_terms).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        });
        println!(
            "{}",
            report(
                "lines",
                json!({
                    "preset": preset,
                    "p": p,
                    "corank": corank,
                    "precision": precision,
                }),
                outputs
            )
        );
    } else {
        println!(
            "preset {} p={p}: h={}, d={}, e={}, precision={}",
            pm.name,
            pm.h,
            pm.d,
            pm.e,
            m.precision()
        );
        for (c, v_det, lines) in &sections {
            let mus: Vec<u64> = lines.iter().map(|l| l.mu).collect();
            println!("corank {c}: mu {mus:?}");
            for l in lines {
                println!(
                    "  mu={} hodge_exponent={} pivot={}",
                    l.mu,
                    v_det - l.mu,
                    l.pivot
                );
            }
        }
    }
    Ok(0)
}

fn cmd_hn(preset: &str, p: u64, precision: Option<u64>, json: bool) -> Result<i32> {
    let pm = parse_preset(preset, p, precision)?;
    let m = &pm.module;
    let module_slope = slope(m)?;
    let verdict = is_semistable(m)?;
    let polygon = module_polygon(m)?;

    if json {
        let outputs = json!({
            "preset": pm.name.as_str(),
            "h": pm.h,
            "d": pm.d,
            "e": pm.e,
            "slope": rat(&module_slope),
            "semistable": verdict.semistable,
            "certificate": verdict.certificate.as_ref().map(|w| json!({
                "corank": w.corank,
                "mu": w.mu,
                "submodule_slope": rat(&w.submodule_slope),
            })),
            "polygon": polygon.breakpoints().iter().map(|(r, d)| json!([r, rat(d)]))
                .collect::<Vec<_>>(),
        });
        println!(
            "{}",
            report(
                "hn",
                json!({ "preset": preset, "p": p, "precision": precision }),
                outputs
            )
        );
    } else {
        println!(
            "preset {} p={p}: slope {}, semistable {}",
            pm.name, module_slope, verdict.semistable
        );
        if let Some(w) = &verdict.certificate {
            println!(
                "destabilizing witness: corank {} mu {} slope {}",
                w.corank, w.mu, w.submodule_slope
            );
        }
        let pts: Vec<String> = polygon
            .breakpoints()
            .iter()
            .map(|(r, d)| format!("({r}, {d})"))
            .collect();
        println!("polygon: {}", pts.join(" -> "));
    }
    Ok(0)
}

fn cmd_delta_surface(case: u8, p: u64, n: u32, lambda: Option<&str>, json: bool) -> Result<i32> {
    let spec = match lambda {
        Some(s) => SurfaceKernelSpec::new(parse_lambda3(s)?)?,
        None => SurfaceKernelSpec::balanced(n)?,
    };
    if spec.n != n {
        return Err(Error::Invalid(format!(
            "--lambda sums to {}, but --n is {n}",
            spec.n
        )));
    }
    let delta = surface_delta(&SplittingCase::Surface(case), p, &spec)?;
    if json {
        println!(
            "{}",
            report(
                "delta-surface",
                json!({ "case": case, "p": p, "n": n, "lambda": spec.lambdas }),
                delta_value(&delta)
            )
        );
    } else {
        println!(
            "case {case} at p={p}, n={n}: coefficient {} ({})",
            delta.coefficient,
            qualifier_label(&delta.qualifier)
        );
    }
    Ok(0)
}

fn cmd_delta_elliptic(disc: i64, n: u64, json: bool) -> Result<i32> {
    let factorization = factorize(n)?;
    let deltas = elliptic_delta(disc, &factorization)?;
    if json {
        let outputs = json!({
            "factorization": factorization.iter()
                .map(|(p, r)| json!({ "p": p, "r": r })).collect::<Vec<_>>(),
            "deltas": deltas.iter().map(delta_value).collect::<Vec<_>>(),
        });
        println!(
            "{}",
            report("delta-elliptic", json!({ "disc": disc, "n": n }), outputs)
        );
    } else {
        println!("disc {disc}, degree {n}:");
        for d in &deltas {
            println!(
                "  p={}: coefficient {} ({})",
                d.prime,
                d.coefficient,
                qualifier_label(&d.qualifier)
            );
        }
        if deltas.is_empty() {
            println!("  (degree 1: no prime factors, height unchanged)");
        }
    }
    Ok(0)
}

fn cmd_delta_general(desc: &PathBuf, r: u32, p: u64, json: bool) -> Result<i32> {
    let text = std::fs::read_to_string(desc)
        .map_err(|e| Error::Invalid(format!("reading {}: {e}", desc.display())))?;
    let factors: Vec<kisin::heights::PrimeFactorDesc> = serde_json::from_str(&text)
        .map_err(|e| Error::Invalid(format!("parsing {}: {e}", desc.display())))?;
    let delta = general_delta_bound(&SplittingCase::General(factors.clone()), r, p)?;
    if json {
        println!(
            "{}",
            report(
                "delta-general",
                json!({
                    "desc": serde_json::to_value(&factors).expect("descriptor"),
                    "r": r,
                    "p": p,
                }),
                delta_value(&delta)
            )
        );
    } else {
        println!(
            "general descriptor ({} factors) at p={p}, r={r}: coefficient {} ({})",
            factors.len(),
            delta.coefficient,
            qualifier_label(&delta.qualifier)
        );
    }
    Ok(0)
}

fn cmd_weights(p: u64, h: u32, phi: &str, lambda: Option<&str>, json: bool) -> Result<i32> {
    let phi = parse_u32_list(phi, "--phi")?;
    let t = CMTypeLocal::new(h, phi.clone(), p)?;
    let weights = reflex_weights(&t);

    let torsion: Vec<(u32, BigRational)> = (1..h)
        .map(|k| hodge_val_unram_p_torsion(&t, k).map(|v| (k, v)))
        .collect::<Result<_>>()?;

    let full = match lambda {
        Some(s) => {
            let lambdas = parse_u32_list(s, "--lambda")?;
            let kt = KernelType::new(lambdas)?;
            Some(hodge_val_unram_full(&t, &kt)?)
        }
        None => None,
    };

    if json {
        let outputs = json!({
            "weights": weights.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "p_torsion": torsion.iter()
                .map(|(k, v)| json!({ "k": k, "coefficient": rat(v) }))
                .collect::<Vec<_>>(),
            "coefficient": full.as_ref().map(rat),
        });
        println!(
            "{}",
            report(
                "weights",
                json!({ "p": p, "h": h, "phi": t.phi, "lambdas": lambda }),
                outputs
            )
        );
    } else {
        println!(
            "type phi={:?} at p={p}, h={h}: weights {:?}",
            t.phi,
            weights.iter().map(|w| w.to_string()).collect::<Vec<_>>()
        );
        for (k, v) in &torsion {
            println!("  p-torsion corank profile k={k}: {v}");
        }
        if let Some(v) = &full {
            println!("  full kernel coefficient: {v}");
        }
    }
    Ok(0)
}
