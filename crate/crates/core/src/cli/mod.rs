//! Command-line front end: instance files, dispatch to the deciders, and experiment output.

pub mod generate;
pub mod instance;

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use num_traits::{One, Signed};
use serde_json::{json, Value};

use crate::argand::{decide_argand_report, niven_classify, truncation_bounds};
use crate::error::{Error, Result};
use crate::hyperbolic::linalg::{jnf_rational, parse_jordan, validate_jnf};
use crate::hyperbolic::{
    conjugated_tables, decide_hyperbolic_general_report, decide_hyperbolic_jnf_report, jnf_block_table, radius_bound,
    ConjugatedSystem, RadiusTable,
};
use crate::numerics::{fmt_rational, parse_rational};
use crate::polar::{decide_polar_report, resource_bounds};
use crate::qbf::parse::parse_any;
use crate::qbf::program::{compile_qbf, lower_qbf_to_program, perturb, Family};
use crate::rotation::{emit_grid, run_disk, write_grid, Theta, DEFAULT_BUDGET};
use crate::rounding::{RealRoundingKind, Shape};
use crate::system::{simulate, Certificate, Verdict};

pub use instance::{Instance, InstanceFile};

/// Largest rational matrix analysed through its Jordan form.
pub const DENSE_LIMIT: usize = 48;

/// Result of routing an instance to a decider.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Decided { procedure: &'static str, verdict: Verdict, steps: u64 },
    Undecided { reason: String },
}

/// Pick the decision procedure that applies to `inst` and run it.
pub fn dispatch(inst: &Instance) -> Result<Outcome> {
    match inst {
        Instance::Rational { system, jordan } => {
            let d = system.matrix.dim();
            if d > DENSE_LIMIT {
                return Err(Error::TooLarge(format!("dimension {d} exceeds the Jordan analysis limit {DENSE_LIMIT}")));
            }
            let (p, j) = match jordan {
                Some((p, j)) => {
                    validate_jnf(&system.matrix.to_dense(), p, j)?;
                    (p.clone(), j.clone())
                }
                None => {
                    let (p, j, _) = jnf_rational(&system.matrix.to_dense())?;
                    (p, j)
                }
            };
            if parse_jordan(&j)?.iter().any(|(lam, _)| lam.abs().is_one()) {
                return Ok(Outcome::Undecided {
                    reason: "eigenvalue of modulus one in a rational matrix: only hyperbolic spectra are handled \
                             outside Jordan normal form"
                        .into(),
                });
            }
            let rep = decide_hyperbolic_general_report(system, Some((p, j)))?;
            Ok(Outcome::Decided { procedure: "hyperbolic", verdict: rep.verdict, steps: rep.steps })
        }
        Instance::Jnf(sys) => {
            let unit = sys.blocks.iter().any(|b| b.modulus.is_one());
            match sys.spec.shape {
                Shape::Polar { .. } => {
                    let (rep, _) = decide_polar_report(sys)?;
                    Ok(Outcome::Decided { procedure: "polar", verdict: rep.verdict, steps: rep.steps })
                }
                Shape::Argand(_) if !unit => {
                    let rep = decide_hyperbolic_jnf_report(sys)?;
                    Ok(Outcome::Decided { procedure: "hyperbolic", verdict: rep.verdict, steps: rep.steps })
                }
                Shape::Argand(RealRoundingKind::Truncate | RealRoundingKind::Expand) => {
                    let rep = decide_argand_report(sys)?;
                    Ok(Outcome::Decided { procedure: "argand", verdict: rep.verdict, steps: rep.steps })
                }
                Shape::Argand(k) => Ok(Outcome::Undecided {
                    reason: format!(
                        "eigenvalue of modulus one under Argand {} rounding: decidability is open, even for a \
                         two-dimensional rotation",
                        k.name()
                    ),
                }),
            }
        }
    }
}

fn certificate_json(c: &Certificate) -> Value {
    match c {
        Certificate::CycleDetected { step_bound, at_step } => {
            json!({"kind": c.name(), "step_bound": step_bound.to_string(), "at_step": at_step})
        }
        Certificate::EscapedRadius { dimension, radius } => {
            json!({"kind": c.name(), "dimension": dimension, "radius": fmt_rational(radius)})
        }
        Certificate::DivergedPastTarget { dimension } | Certificate::StabilizedMismatch { dimension } => {
            json!({"kind": c.name(), "dimension": dimension})
        }
    }
}

/// The state reached after `step` steps.
pub fn witness(inst: &Instance, step: u64) -> Result<Vec<Value>> {
    Ok(match inst {
        Instance::Rational { system, .. } => {
            let tr = simulate(system, step)?;
            tr.states.last().expect("trace holds the initial state").iter().map(|v| json!(fmt_rational(v))).collect()
        }
        Instance::Jnf(sys) => {
            let tr = simulate(sys, step)?;
            let r = sys.spec.polar_r();
            tr.states
                .last()
                .expect("trace holds the initial state")
                .iter()
                .map(|p| serde_json::to_value(instance::grid_value(p, r)).expect("value json"))
                .collect()
        }
    })
}

/// Orbit prefix as `{"hit": step or null, "states": [...]}`.
pub fn simulate_json(inst: &Instance, steps: u64) -> Result<Value> {
    let (states, hit): (Vec<Value>, Option<u64>) = match inst {
        Instance::Rational { system, .. } => {
            let tr = simulate(system, steps)?;
            (tr.states.iter().map(|s| json!(s.iter().map(fmt_rational).collect::<Vec<_>>())).collect(), tr.hit)
        }
        Instance::Jnf(sys) => {
            let tr = simulate(sys, steps)?;
            let r = sys.spec.polar_r();
            let states = tr
                .states
                .iter()
                .map(|s| serde_json::to_value(s.iter().map(|p| instance::grid_value(p, r)).collect::<Vec<_>>()).expect("json"))
                .collect();
            (states, tr.hit)
        }
    };
    Ok(json!({"hit": hit, "states": states}))
}

/// Verdict object printed by `decide`, with the process exit code.
pub fn outcome_json(inst: &Instance, o: &Outcome) -> Result<(Value, i32)> {
    Ok(match o {
        Outcome::Decided { procedure, verdict: Verdict::Reached { step }, steps } => (
            json!({"verdict": "reached", "procedure": procedure, "step": step, "steps_run": steps,
                   "witness": witness(inst, *step)?}),
            0,
        ),
        Outcome::Decided { procedure, verdict: Verdict::NotReached(c), steps } => (
            json!({"verdict": "not-reached", "procedure": procedure, "steps_run": steps,
                   "certificate": certificate_json(c)}),
            0,
        ),
        Outcome::Undecided { reason } => (json!({"verdict": "undecided-by-this-tool", "reason": reason}), 2),
    })
}

fn table_line(out: &mut String, t: &RadiusTable, modulus: &crate::numerics::Rational) {
    let c: Vec<String> = t.c.iter().map(fmt_rational).collect();
    let _ = writeln!(
        out,
        "  {}  radii C = [{}]  l = {}  step bound = {}  radius bound = {}",
        if t.expanding { "expanding" } else { "contracting" },
        c.join(", "),
        fmt_rational(&t.ell),
        t.step_bound,
        fmt_rational(&radius_bound(t, modulus))
    );
}

/// Human-readable bound tables.
pub fn bounds_report(inst: &Instance) -> Result<String> {
    let mut out = String::new();
    match inst {
        Instance::Rational { system, jordan } => {
            let d = system.matrix.dim();
            if d > DENSE_LIMIT {
                return Err(Error::TooLarge(format!("dimension {d} exceeds the Jordan analysis limit {DENSE_LIMIT}")));
            }
            let (p, j) = match jordan {
                Some(pj) => pj.clone(),
                None => {
                    let (p, j, _) = jnf_rational(&system.matrix.to_dense())?;
                    (p, j)
                }
            };
            let cs = ConjugatedSystem::new(system, &p, &j)?;
            let (tables, count) = conjugated_tables(&cs)?;
            let _ = writeln!(out, "rational system, dimension {d}, conjugated rounding effect {}", fmt_rational(&cs.rounding.delta));
            for ((lam, size), t) in cs.blocks.iter().zip(&tables) {
                let _ = writeln!(out, "block eigenvalue {} size {size}", fmt_rational(lam));
                table_line(&mut out, t, &lam.abs());
            }
            let _ = writeln!(out, "grid points within the radii: {count}");
        }
        Instance::Jnf(sys) => {
            let _ = writeln!(out, "Jordan system, dimension {}", sys.dimension());
            for (b, block) in sys.blocks.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "block {}: size {}  |lambda| = {}  arg = {}",
                    b + 1,
                    block.size,
                    fmt_rational(&block.modulus),
                    block.angle
                );
                if !block.modulus.is_one() {
                    table_line(&mut out, &jnf_block_table(sys, b)?, &block.modulus);
                    continue;
                }
                match sys.spec.shape {
                    Shape::Polar { .. } => {
                        let rb = resource_bounds(sys, b)?;
                        let u: Vec<String> = rb.u.iter().map(fmt_rational).collect();
                        let t: Vec<String> = rb.t.iter().map(|v| v.to_string()).collect();
                        let _ = writeln!(
                            out,
                            "  polar  U = [{}]  T = [{}]  F = {}  closed form holds: {}  budget = {}",
                            u.join(", "),
                            t.join(", "),
                            fmt_rational(&rb.f),
                            rb.closed_form_holds,
                            rb.budget
                        );
                    }
                    Shape::Argand(RealRoundingKind::Truncate | RealRoundingKind::Expand) => {
                        let tb = truncation_bounds(sys, b);
                        let u: Vec<String> = tb.u.iter().map(fmt_rational).collect();
                        let t: Vec<String> = tb.t.iter().map(|v| v.to_string()).collect();
                        let class = niven_classify(&block.angle);
                        let _ = writeln!(
                            out,
                            "  truncation  U = [{}]  T = [{}]  F = {}  closed form holds: {}  budget = {}  axis angle: {}",
                            u.join(", "),
                            t.join(", "),
                            fmt_rational(&tb.f),
                            tb.closed_form_holds,
                            tb.budget,
                            class.axis_multiple_90
                        );
                    }
                    Shape::Argand(k) => {
                        let _ = writeln!(out, "  no bound: modulus one under Argand {} rounding", k.name());
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Parser, Debug)]
#[command(name = "rounded-reach", version, about = "Point-to-point reachability under per-step rounding")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide whether the target is reached; prints a JSON verdict.
    Decide { instance: PathBuf },
    /// Print the first N states of the orbit as JSON.
    Simulate {
        instance: PathBuf,
        #[arg(long)]
        steps: u64,
    },
    /// Print radius, step and resource bounds.
    Bounds { instance: PathBuf },
    /// Compile a quantified formula (text or QDIMACS) into an instance file.
    CompileQbf {
        input: PathBuf,
        #[arg(long, default_value = "floor")]
        family: String,
        /// Scale every matrix entry, e.g. `11/10`.
        #[arg(long)]
        perturb: Option<String>,
        #[arg(long)]
        out: PathBuf,
        /// Print the per-step variable map.
        #[arg(long)]
        verbose: bool,
    },
    /// Rotate every lattice point of a disk with minimal-error rounding; writes a CSV grid.
    Rotate {
        #[arg(long)]
        radius: u64,
        /// `p/q pi`, `pi/42`, or an expression such as `2^(2/5)/10 pi`.
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use interval arithmetic even for rational multiples of pi.
        #[arg(long)]
        interval: bool,
    },
}

pub fn load(path: &PathBuf) -> Result<Instance> {
    InstanceFile::from_json(&std::fs::read_to_string(path)?)?.to_instance()
}

/// Run a parsed command; returns standard output and the exit code.
pub fn run(cmd: &Command) -> Result<(String, i32)> {
    match cmd {
        Command::Decide { instance } => {
            let inst = load(instance)?;
            let o = dispatch(&inst)?;
            let (v, code) = outcome_json(&inst, &o)?;
            Ok((format!("{v}\n"), code))
        }
        Command::Simulate { instance, steps } => Ok((format!("{}\n", simulate_json(&load(instance)?, *steps)?), 0)),
        Command::Bounds { instance } => Ok((bounds_report(&load(instance)?)?, 0)),
        Command::CompileQbf { input, family, perturb: factor, out, verbose } => {
            let phi = parse_any(&std::fs::read_to_string(input)?)?;
            let fam = Family::parse(family)?;
            let mut inst = compile_qbf(&phi, fam)?;
            if let Some(f) = factor {
                inst = perturb(&inst, &parse_rational(f)?)?;
            }
            std::fs::write(out, InstanceFile::from_hardness(&inst).to_json())?;
            let m = &inst.meta;
            let mut text = format!(
                "{}\n",
                json!({"n": m.n, "ell": m.ell, "m": m.m, "t": m.t, "dimension": m.dimension,
                       "family": fam.name(), "factor": m.factor.as_ref().map(fmt_rational)})
            );
            if *verbose {
                let p = lower_qbf_to_program(&phi.padded(), fam)?;
                for (i, n) in p.names.iter().enumerate() {
                    let _ = writeln!(text, "slot {i}: {n}");
                }
                for line in p.describe() {
                    text.push_str(&line);
                    text.push('\n');
                }
            }
            Ok((text, 0))
        }
        Command::Rotate { radius, theta, budget, out, interval } => {
            let th = Theta::parse(theta)?;
            let rep = run_disk(*radius, &th, *budget, *interval)?;
            let periods: Vec<u64> = rep.orbits.iter().filter_map(|o| o.period).collect();
            let errors = rep.orbits.iter().filter(|o| o.error.is_some()).count();
            let summary = json!({
                "radius": radius, "theta": rep.theta, "starts": rep.orbits.len(),
                "periodic": periods.len(), "unresolved": rep.unresolved.len(), "uncertified": errors,
                "max_period": periods.iter().max(), "cells": rep.cells.len(),
                "max_transient": rep.orbits.iter().map(|o| o.transient).max(),
            });
            match out {
                Some(p) => {
                    emit_grid(&rep, p)?;
                    Ok((format!("{summary}\n"), 0))
                }
                None => {
                    let mut buf = Vec::new();
                    write_grid(&rep, &mut buf)?;
                    Ok((String::from_utf8(buf).expect("csv is utf-8"), 0))
                }
            }
        }
    }
}

/// Entry point for the main binary.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok((out, code)) => {
            print!("{out}");
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
