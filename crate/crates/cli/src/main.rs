//! `polylap` command-line front end. Every command prints a report (text or
//! JSON) and exits 0 on pass, 1 on a tolerance failure, 2 on a usage or
//! configuration error.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use polylap::catalog::{self, apply_group, get_solution, parse_params, verify_with, GroupElement, GroupKind};
use polylap::conjecture::{run_conjecture, CONJECTURE_TOLERANCE};
use polylap::fields::{DEFAULT_POINTS, DEFAULT_SEED};
use polylap::graded::{build_system, holomorphic_check, real_triviality_check};
use polylap::liealg::{
    adjoint_cells, adjoint_entry, commutator_cells, compare_tables, reference_adjoint, reference_table, render_table,
    structure_constants, AlgebraBasis, AlgebraName,
};
use polylap::prolong::{check_determining, invariance_on_manifold, parse_candidate, DeterminingSystem};
use polylap::reductions::{lift_ansatz, ode_residual, s_grid, BuiltinG, OdeKind, ReducedOde, BUILTIN_IDS, S_POINTS, S_RANGE};
use polylap::suite::{self, ADJOINT_TOLERANCE, INVARIANCE_TOLERANCE};
use polylap::{Error, OperatorId};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "polylap", version, about = "Symmetry and solution checks for the infinity-Polylaplacian")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Write the report to this file instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Random seed for sampling.
    #[arg(long, env = "POLYLAP_SEED", default_value_t = DEFAULT_SEED, global = true)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    Commutator,
    Adjoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GradedCheck {
    System,
    Holomorphic,
    RealTrivial,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a catalog solution against its PDE on seeded domain samples.
    Verify {
        id: String,
        /// Parameter override `key=v1,v2,...`; repeatable.
        #[arg(long = "param", short = 'p')]
        params: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        points: usize,
        /// Override the entry's tolerance.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Transport a catalog solution by a group element and re-verify it.
    Orbit {
        id: String,
        /// G1..G8, H, sigma, rho_x or rho_u.
        #[arg(long = "gen")]
        generator: String,
        /// Group parameter; ignored for discrete elements.
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        eps: f64,
        #[arg(long = "param", short = 'p')]
        params: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        points: usize,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Compare computed commutator or adjoint tables with the published ones.
    Tables {
        #[arg(long, default_value = "g")]
        algebra: String,
        #[arg(long, value_enum, default_value_t = Which::Commutator)]
        which: Which,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        eps: f64,
    },
    /// Evaluate the determining equations on a candidate vector field.
    Determining {
        /// File with lines `xi1 = ...`, `xi2 = ...`, `eta = ...`.
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long, default_value = "full16")]
        system: String,
    },
    /// On-manifold infinitesimal invariance of one basis generator.
    Invariance {
        /// X1..X8 (full equation algebra) or Y1..Y7 (reduced equation algebra).
        #[arg(long = "gen")]
        generator: String,
        /// infpolylap or reduced:1.
        #[arg(long, default_value = "infpolylap")]
        op: String,
        /// Samples per family (solution jets and algebraic samples).
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// ODE residual of a builtin profile, optionally lifting it back to the PDE.
    Reduce {
        ode: String,
        /// Builtin profile id.
        #[arg(long)]
        g: String,
        /// Profile parameter `key=v1,...`; repeatable.
        #[arg(long = "param", short = 'p')]
        params: Vec<String>,
        /// ODE parameter for the spiral reductions.
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = S_POINTS)]
        points: usize,
        /// Also verify the lifted two-variable field.
        #[arg(long)]
        lift: bool,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Graded module: exact quadratic system, holomorphic kernel, real probe.
    Graded {
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = GradedCheck::System)]
        check: GradedCheck,
        /// Random starts for the real probe.
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Generator counts and invariance of the conjectured n-dimensional algebras.
    Conjecture {
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Samples per variety family.
        #[arg(long, default_value_t = 40)]
        per_family: usize,
    },
    /// List catalog solutions, ODEs and builtin profiles.
    List,
    /// Run the full acceptance suite.
    All,
}

/// Common envelope of every report.
#[derive(Serialize)]
struct Envelope {
    tool: &'static str,
    version: &'static str,
    command: String,
    seed: u64,
    tolerance: Option<f64>,
    anchor: String,
    passed: bool,
    report: Value,
}

struct Outcome {
    passed: bool,
    tolerance: Option<f64>,
    anchor: String,
    report: Value,
    text: String,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let seed = cli.seed;
    match &cli.command {
        Command::Verify { id, params, points, tolerance } => {
            let mut s = get_solution(id, &parse_params(params)?)?;
            if let Some(t) = tolerance {
                s.tolerance = *t;
            }
            let r = verify_with(&s, *points, seed, cli.format == Format::Json)?;
            let text = format!(
                "{id}: {}\n  target {}, domain {}\n  max residual {:.3e}, mean {:.3e} over {} points (tolerance {:e})\n{}\n",
                r.formula,
                r.target,
                r.domain,
                r.max_residual,
                r.mean_residual,
                r.n_points,
                r.tolerance,
                verdict(r.passed)
            );
            Ok(Outcome { passed: r.passed, tolerance: Some(r.tolerance), anchor: r.formula.clone(), report: to_value(&r), text })
        }
        Command::Orbit { id, generator, eps, params, points, tolerance } => {
            let base = get_solution(id, &parse_params(params)?)?;
            let kind: GroupKind = generator.parse()?;
            let g = if kind.is_discrete() { GroupElement::discrete(kind) } else { GroupElement::new(kind, *eps) };
            let mut t = apply_group(g, &base)?;
            t.tolerance = tolerance.unwrap_or(catalog::ORBIT_FACTOR * base.tolerance);
            let r = verify_with(&t, *points, seed, cli.format == Format::Json)?;
            let text = format!(
                "{id} transported by {g}: {}\n  domain {}\n  max residual {:.3e} over {} points (tolerance {:e})\n{}\n",
                r.formula,
                r.domain,
                r.max_residual,
                r.n_points,
                r.tolerance,
                verdict(r.passed)
            );
            Ok(Outcome {
                passed: r.passed,
                tolerance: Some(r.tolerance),
                anchor: format!("{} under {g}", r.formula),
                report: to_value(&r),
                text,
            })
        }
        Command::Tables { algebra, which, eps } => {
            let name: AlgebraName = algebra.parse()?;
            let t = structure_constants(&AlgebraBasis::by_name(name))?;
            let total = name.dim() * name.dim();
            match which {
                Which::Commutator => {
                    let (ok, bad) = compare_tables(&t, &reference_table(name));
                    let passed = bad.is_empty();
                    let mut text = render_table(name, &commutator_cells(&t), "[,]");
                    writeln!(text, "{ok}/{total} entries match").ok();
                    for m in &bad {
                        writeln!(text, "  ({}, {}): computed {}, published {}", m.row, m.col, m.computed, m.expected).ok();
                    }
                    let report = json!({
                        "algebra": name, "which": "commutator", "entries": total, "matching": ok,
                        "mismatches": bad, "cells": commutator_cells(&t),
                    });
                    Ok(Outcome { passed, tolerance: None, anchor: format!("commutator table of {name}"), report, text })
                }
                Which::Adjoint => {
                    let want = reference_adjoint(name, *eps);
                    let mut ok = 0;
                    let mut worst: f64 = 0.0;
                    let mut bad = Vec::new();
                    for (i, row) in want.iter().enumerate() {
                        for (j, w) in row.iter().enumerate() {
                            let got = adjoint_entry(&t, i, j, *eps);
                            let gap = got.iter().zip(w).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                            worst = worst.max(gap);
                            if gap <= ADJOINT_TOLERANCE {
                                ok += 1;
                            } else {
                                bad.push(json!({"row": i + 1, "col": j + 1, "computed": got, "published": w, "gap": gap}));
                            }
                        }
                    }
                    let passed = bad.is_empty();
                    let cells = adjoint_cells(&t, *eps);
                    let mut text = render_table(name, &cells, "Ad");
                    writeln!(text, "eps = {eps}: {ok}/{total} entries within {ADJOINT_TOLERANCE:e} (max gap {worst:.3e})").ok();
                    let report = json!({
                        "algebra": name, "which": "adjoint", "eps": eps, "entries": total, "matching": ok,
                        "max_gap": worst, "mismatches": bad, "cells": cells,
                    });
                    Ok(Outcome {
                        passed,
                        tolerance: Some(ADJOINT_TOLERANCE),
                        anchor: format!("adjoint table of {name}"),
                        report,
                        text,
                    })
                }
            }
        }
        Command::Determining { candidate, system } => {
            let sys: DeterminingSystem = system.parse()?;
            let src = std::fs::read_to_string(candidate)
                .map_err(|e| Error::InvalidArgument(format!("{}: {e}", candidate.display())))?;
            let vf = parse_candidate(&src)?;
            let checks = check_determining(&vf, sys)?;
            let passed = checks.iter().all(|c| c.holds);
            let mut text = format!("candidate {}\n", vf.render());
            for c in &checks {
                writeln!(text, "  {:<5} {} = {}", if c.holds { "ok" } else { "FAIL" }, c.label, c.value).ok();
            }
            let holding = checks.iter().filter(|c| c.holds).count();
            writeln!(text, "{holding}/{} equations hold\n{}", checks.len(), verdict(passed)).ok();
            let report = json!({ "system": system, "field": vf.render(), "equations": checks });
            Ok(Outcome { passed, tolerance: None, anchor: format!("determining system {system}"), report, text })
        }
        Command::Invariance { generator, op, samples, tolerance } => {
            let op: OperatorId = op.parse()?;
            let (algebra, index) = parse_generator(generator)?;
            let basis = AlgebraBasis::by_name(algebra);
            let field = basis
                .elements
                .get(index)
                .ok_or_else(|| Error::UnknownId { kind: "generator", id: generator.clone() })?;
            let pts = match op {
                OperatorId::InfPolylap => suite::polylap_samples(seed, *samples)?,
                OperatorId::ReducedInfPolylap(1.0) => suite::reduced_samples(seed, *samples)?,
                other => return Err(Error::InvalidArgument(format!("no on-manifold sampler for {other}"))),
            };
            let r = invariance_on_manifold(field, op, &pts)?;
            let tol = tolerance.unwrap_or(INVARIANCE_TOLERANCE);
            let passed = r.max_normalized <= tol;
            let text = format!(
                "{generator} = {}\n  operator {op}, {} on-manifold samples\n  max normalized {:.3e}, mean {:.3e} (tolerance {tol:e})\n  exact multiple: {}\n{}\n",
                r.field,
                r.n_samples,
                r.max_normalized,
                r.mean_normalized,
                r.exact_multiple.as_deref().unwrap_or("none"),
                verdict(passed)
            );
            Ok(Outcome { passed, tolerance: Some(tol), anchor: format!("{generator} acting on {op}"), report: to_value(&r), text })
        }
        Command::Reduce { ode, g, params, alpha, points, lift, tolerance } => {
            let kind: OdeKind = ode.parse()?;
            let o = ReducedOde::new(kind, *alpha)?;
            let profile = BuiltinG::get(g, &parse_params(params)?)?;
            let mut r = ode_residual(&o, &profile, &s_grid(S_RANGE.0, S_RANGE.1, *points))?;
            if let Some(t) = tolerance {
                r.tolerance = *t;
                r.passed = r.max_abs_residual <= *t;
            }
            let mut passed = r.passed;
            let mut text = format!(
                "{o}: {}\n  {}\n  max |residual| {:.3e} on s in [{}, {}] at {} points (tolerance {:e})\n",
                r.formula, r.g_formula, r.max_abs_residual, r.s_min, r.s_max, r.n_points, r.tolerance
            );
            let mut report = json!({ "ode": r });
            if *lift {
                let spec = lift_ansatz(&o, &profile)?;
                let v = verify_with(&spec, DEFAULT_POINTS, seed, false)?;
                passed &= v.passed;
                writeln!(
                    text,
                    "  lift {}: max PDE residual {:.3e} over {} points (tolerance {:e})",
                    v.formula, v.max_residual, v.n_points, v.tolerance
                )
                .ok();
                report["lift"] = to_value(&v);
            }
            writeln!(text, "{}", verdict(passed)).ok();
            Ok(Outcome { passed, tolerance: Some(r.tolerance), anchor: kind.formula().to_string(), report, text })
        }
        Command::Graded { k, check, trials } => match check {
            GradedCheck::System => {
                let s = build_system(*k)?;
                let e = s.export();
                let mut text = format!("k = {k}: {} variables, {} quadratic forms\n", e.n_vars, e.n_forms);
                for f in &e.forms {
                    writeln!(text, "  coefficient of x^{} y^{}:", f.m, f.n).ok();
                    for row in &f.matrix {
                        writeln!(text, "    [{}]", row.join(", ")).ok();
                    }
                }
                let passed = e.n_vars == k + 1 && e.n_forms == 2 * k - 3;
                Ok(Outcome { passed, tolerance: None, anchor: format!("f: A_{k} -> A_{}", 2 * k - 4), report: to_value(&e), text })
            }
            GradedCheck::Holomorphic => {
                let r = holomorphic_check(*k)?;
                let text = format!("{r:#?}\n{}\n", verdict(r.passed));
                Ok(Outcome { passed: r.passed, tolerance: None, anchor: format!("(x + iy)^{k} in ker f"), report: to_value(&r), text })
            }
            GradedCheck::RealTrivial => {
                let r = real_triviality_check(*k, *trials, seed)?;
                let text = format!(
                    "k = {k}: {} starts, smallest value on the unit sphere {:.3e}, {} candidate roots\n  {}\n{}\n",
                    r.trials,
                    r.min_on_sphere,
                    r.nonzero_roots,
                    r.note,
                    verdict(r.passed)
                );
                Ok(Outcome {
                    passed: r.passed,
                    tolerance: None,
                    anchor: format!("real kernel of f on A_{k}"),
                    report: to_value(&r),
                    text,
                })
            }
        },
        Command::Conjecture { n, per_family } => {
            let r = run_conjecture(*n, *per_family, seed)?;
            let mut text = format!(
                "n = {n}: {} full-equation generators (expected {}), {} reduced (expected {})\n",
                r.count_full, r.expected_full, r.count_reduced, r.expected_reduced
            );
            for g in r.full.iter().chain(&r.reduced) {
                writeln!(text, "  {:<5} {:<24} {:>10} samples  max {:.3e}", verdict(g.passed), g.generator, g.n_samples, g.max_normalized)
                    .ok();
            }
            let c = &r.negative_control;
            writeln!(text, "  control {}: max {:.3e} ({})\n{}", c.generator, c.max_normalized, verdict(c.passed), verdict(r.passed)).ok();
            Ok(Outcome {
                passed: r.passed,
                tolerance: Some(CONJECTURE_TOLERANCE),
                anchor: format!("conjectured symmetry algebras in dimension {n}"),
                report: to_value(&r),
                text,
            })
        }
        Command::List => {
            let entries = catalog::list();
            let mut text = String::from("solutions:\n");
            for e in &entries {
                writeln!(text, "  {:<22} {} [{}] on {}", e.id, e.formula, e.target, e.domain).ok();
            }
            text.push_str("reduced ODEs:\n");
            for k in OdeKind::ALL {
                writeln!(text, "  {:<14} {}", k.id(), k.formula()).ok();
            }
            writeln!(text, "profiles:\n  {}", BUILTIN_IDS.join(" ")).ok();
            let odes: Vec<Value> = OdeKind::ALL.iter().map(|k| json!({"id": k.id(), "formula": k.formula()})).collect();
            let report = json!({ "solutions": entries, "odes": odes, "profiles": BUILTIN_IDS });
            Ok(Outcome { passed: true, tolerance: None, anchor: "catalog".into(), report, text })
        }
        Command::All => {
            let results = suite::run_all(seed);
            let passed = results.iter().all(|r| r.passed);
            let mut text = String::new();
            for r in &results {
                writeln!(text, "{} {:>2} {:<24} {}", verdict(r.passed), r.number, r.title, r.detail).ok();
            }
            let n_pass = results.iter().filter(|r| r.passed).count();
            writeln!(text, "{n_pass}/{} criteria passed", results.len()).ok();
            Ok(Outcome { passed, tolerance: None, anchor: "acceptance suite".into(), report: to_value(&results), text })
        }
    }
}

/// `X4` -> (g, 3), `Y2` -> (h, 1).
fn parse_generator(label: &str) -> Result<(AlgebraName, usize), Error> {
    let unknown = || Error::UnknownId { kind: "generator", id: label.to_string() };
    let mut chars = label.chars();
    let algebra = match chars.next() {
        Some('X') | Some('x') => AlgebraName::G,
        Some('Y') | Some('y') => AlgebraName::H,
        _ => return Err(unknown()),
    };
    let i: usize = chars.as_str().parse().map_err(|_| unknown())?;
    if i == 0 || i > algebra.dim() {
        return Err(unknown());
    }
    Ok((algebra, i - 1))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Verify { .. } => "verify",
        Command::Orbit { .. } => "orbit",
        Command::Tables { .. } => "tables",
        Command::Determining { .. } => "determining",
        Command::Invariance { .. } => "invariance",
        Command::Reduce { .. } => "reduce",
        Command::Graded { .. } => "graded",
        Command::Conjecture { .. } => "conjecture",
        Command::List => "list",
        Command::All => "all",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let body = match cli.format {
        Format::Json => {
            let env = Envelope {
                tool: "polylap",
                version: env!("CARGO_PKG_VERSION"),
                command: command_name(&cli.command).to_string(),
                seed: cli.seed,
                tolerance: outcome.tolerance,
                anchor: outcome.anchor,
                passed: outcome.passed,
                report: outcome.report,
            };
            let mut s = serde_json::to_string_pretty(&env).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Text => {
            format!("polylap {} (seed {})\n{}", env!("CARGO_PKG_VERSION"), cli.seed, outcome.text)
        }
    };
    match &cli.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, body) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{body}"),
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
