//! Text format and command-line front end.

pub mod bpa;

use std::ffi::OsString;
use std::fmt::Display;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::{Signed, Zero};

use crate::calculus::{
    combine_with, condition_shafer, project, remove_shenoy, vacuous_extend, CombineRoute,
};
use crate::error::Error;
use crate::fixtures;
use crate::frame::VariableSet;
use crate::graphoid::{
    check_axiom, gen_random, sweep, universe_focal_experiment, Axiom, AxiomQuery, AxiomVerdict,
    GeneratorSpec, Relation, Status,
};
use crate::independence::{
    anticonditional_canonical, anticonditional_solve, anticonditional_verify, Checker, Constraint,
    Evidence, IndependenceQuery, IndependenceReport, Method, SolveOutcome, Verdict,
};
use crate::massfun::{commonality, mass_from_commonality, MassFunction};
use crate::rational::parse_rational;
use crate::regression::run_examples;
use crate::Limits;

use bpa::{emit_bpa, parse_bpa_with, parse_frame_decl, parse_set_expr};

pub const EXIT_TRUE: i32 = 0;
pub const EXIT_FALSE: i32 = 3;
pub const EXIT_UNKNOWN: i32 = 4;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_LATTICE: i32 = 66;
pub const EXIT_DOMAIN: i32 = 67;
pub const EXIT_IO: i32 = 74;

#[derive(Parser, Debug)]
#[command(
    name = "ds",
    version,
    about = "Exact Dempster-Shafer calculus over multivariate frames"
)]
struct Cli {
    /// Output layout.
    #[arg(long, value_enum, global = true, default_value_t = Format::Kv)]
    format: Format,
    /// Largest frame, in configurations, for which dense subset lattices are built.
    #[arg(long, global = true)]
    lattice_gate: Option<usize>,
    /// Largest number of free unknowns the feasibility eliminator accepts.
    #[arg(long, global = true)]
    solver_cap: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Kv,
    Table,
}

#[derive(Args, Debug)]
struct Output {
    /// Also write the resulting function as a document (`-` for stdout).
    #[arg(short, long)]
    output: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print a function, its classification and optional point values.
    Show {
        file: String,
        /// Set expression at which to report bel, pl and q.
        #[arg(long)]
        at: Option<String>,
    },
    /// Dempster's rule.
    Combine {
        first: String,
        second: String,
        #[arg(long, value_enum, default_value_t = Route::Auto)]
        route: Route,
        #[command(flatten)]
        out: Output,
    },
    /// Marginalize onto a set of variables.
    Project {
        file: String,
        /// Comma-separated variable names; empty for the unit frame.
        #[arg(long, allow_hyphen_values = true)]
        onto: String,
        #[command(flatten)]
        out: Output,
    },
    /// Vacuous extension by additional variables.
    Extend {
        file: String,
        /// Frame declaration, e.g. "Z = z1 z2".
        #[arg(long)]
        onto: String,
        #[command(flatten)]
        out: Output,
    },
    /// Shafer conditioning on an event.
    Condition {
        file: String,
        /// Set expression: `{ (x1 y1) ... }` or `X=x1,Y=y2`.
        #[arg(long)]
        evidence: String,
        #[command(flatten)]
        out: Output,
    },
    /// Shenoy removal: divide the first commonality function by the second.
    Remove { first: String, second: String },
    /// Anticonditional of a function given a set of variables.
    Anticond {
        file: String,
        #[arg(long, allow_hyphen_values = true)]
        given: String,
        /// `compress:<vars>` or `cano`.
        #[arg(long)]
        solve: Option<String>,
        /// Check a candidate instead of constructing one.
        #[arg(long, conflicts_with = "solve")]
        verify: Option<String>,
        #[command(flatten)]
        out: Output,
    },
    /// Independence query.
    Indep {
        file: String,
        #[arg(long = "type", value_enum)]
        kind: IndepType,
        /// Conditioning set; for `unconditional` without `-r`, the first block.
        #[arg(short, allow_hyphen_values = true, default_value = "")]
        p: String,
        #[arg(short, allow_hyphen_values = true, default_value = "")]
        q: String,
        #[arg(short, allow_hyphen_values = true)]
        r: Option<String>,
    },
    /// Graphoid axioms, swept over all set tuples or at one tuple.
    Graphoid {
        file: String,
        /// Comma-separated axiom names; all by default.
        #[arg(long)]
        axioms: Option<String>,
        #[arg(long, default_value = "intrinsic")]
        relation: String,
        /// Check a single tuple; requires exactly one axiom.
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        r: Option<String>,
        #[arg(long)]
        s: Option<String>,
        #[arg(long)]
        p: Option<String>,
        /// Print only the summary and non-holding instances.
        #[arg(long)]
        brief: bool,
    },
    /// Seeded random function, printed as a document.
    Gen {
        /// Comma-separated domain sizes.
        #[arg(long)]
        vars: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        focals: usize,
        #[arg(long)]
        diverse: bool,
        #[arg(long)]
        probabilistic: bool,
        /// Allow negative masses.
        #[arg(long)]
        improper: bool,
        /// Blocks separated by `|`, variables by `,`, e.g. `X,Y|Y,Z`.
        #[arg(long)]
        factorized: Option<String>,
    },
    /// Move mass from an independent uniform pair to the universe.
    UniverseFocal {
        #[arg(long)]
        size: usize,
        #[arg(long)]
        eps: String,
    },
    /// Replay the bundled worked examples.
    Examples {
        #[arg(long, default_value = "all")]
        run: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Route {
    Auto,
    Convolution,
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IndepType {
    Unconditional,
    Shenoy,
    Intrinsic,
    Cano,
}

enum Failure {
    Domain(Error),
    Io(String, io::Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Records printed as `key=value` lines or as an aligned two-column table.
#[derive(Default)]
struct Report {
    rows: Vec<(String, String)>,
}

impl Report {
    fn add(&mut self, key: &str, value: impl Display) {
        self.rows.push((key.to_string(), value.to_string()));
    }

    fn function(&mut self, prefix: &str, m: &MassFunction) {
        let key = |k: &str| {
            if prefix.is_empty() {
                k.to_string()
            } else {
                format!("{prefix}.{k}")
            }
        };
        self.add(&key("frame"), m.frame());
        for (event, mass) in m.focal_events() {
            self.add(&key("focal"), format!("{mass} {event}"));
        }
    }

    fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Kv => {
                for (k, v) in &self.rows {
                    out.push_str(&format!("{k}={v}\n"));
                }
            }
            Format::Table => {
                let width = self
                    .rows
                    .iter()
                    .map(|(k, _)| k.chars().count())
                    .max()
                    .unwrap_or(0);
                for (k, v) in &self.rows {
                    out.push_str(&format!("{k:<width$}  {v}\n"));
                }
            }
        }
        out
    }
}

struct Ctx<'a> {
    limits: Limits,
    report: Report,
    extra: String,
    stdin: &'a mut dyn Read,
}

impl Ctx<'_> {
    fn load(&mut self, name: &str) -> std::result::Result<MassFunction, Failure> {
        let text = if name == "-" {
            let mut s = String::new();
            self.stdin
                .read_to_string(&mut s)
                .map_err(|e| Failure::Io("<stdin>".into(), e))?;
            s
        } else {
            let path = PathBuf::from(name);
            match std::fs::read_to_string(&path) {
                Ok(s) => s,
                Err(e) if e.kind() == io::ErrorKind::NotFound => match bundled(name) {
                    Some(text) => text.to_string(),
                    None => return Err(Failure::Io(name.into(), e)),
                },
                Err(e) => return Err(Failure::Io(name.into(), e)),
            }
        };
        Ok(parse_bpa_with(&text, &self.limits)?)
    }

    fn write_function(
        &mut self,
        out: &Output,
        m: &MassFunction,
    ) -> std::result::Result<(), Failure> {
        match out.output.as_deref() {
            None => {}
            Some("-") => self.extra.push_str(&emit_bpa(m)),
            Some(path) => {
                std::fs::write(path, emit_bpa(m)).map_err(|e| Failure::Io(path.into(), e))?
            }
        }
        Ok(())
    }
}

/// A bundled fixture by file name, used when no such file exists.
fn bundled(name: &str) -> Option<&'static str> {
    let stem = std::path::Path::new(name).file_name()?.to_str()?;
    let stem = stem.strip_suffix(".bpa").unwrap_or(stem);
    fixtures::ALL
        .iter()
        .find(|(n, _)| *n == stem)
        .map(|(_, t)| *t)
}

fn var_list(text: &str) -> VariableSet {
    VariableSet::of(text.split(',').map(str::trim).filter(|s| !s.is_empty()))
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::True => EXIT_TRUE,
        Verdict::False => EXIT_FALSE,
        Verdict::Unknown => EXIT_UNKNOWN,
    }
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::LatticeTooLarge { .. } => EXIT_LATTICE,
        Error::InvalidQuery(_) => EXIT_USAGE,
        Error::Parse { .. }
        | Error::InvalidName(_)
        | Error::DuplicateVariable(_)
        | Error::EmptyDomain(_)
        | Error::DuplicateLabel { .. }
        | Error::UnknownVariable(_)
        | Error::UnknownValue { .. }
        | Error::ArityMismatch { .. }
        | Error::FrameTooLarge(_)
        | Error::EmptyFocal
        | Error::DuplicateFocal(_)
        | Error::NotNormalizable
        | Error::NotPseudoBelief(_) => EXIT_DATA,
        Error::IncompatibleFrames(_)
        | Error::TotalConflict
        | Error::RemovalUndefined(_)
        | Error::NoAnticonditional(_)
        | Error::NoCanonicalMember(_) => EXIT_DOMAIN,
    }
}

/// Parses `argv` (program name first), runs the command and writes its
/// report. Returns the process exit code.
pub fn run_command<I, T>(
    argv: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let defaults = Limits::default();
    let limits = Limits {
        lattice_gate: cli.lattice_gate.unwrap_or(defaults.lattice_gate),
        solver_cap: cli.solver_cap.unwrap_or(defaults.solver_cap),
        ..defaults
    };
    let mut ctx = Ctx {
        limits,
        report: Report::default(),
        extra: String::new(),
        stdin,
    };
    let outcome = dispatch(cli.command, &mut ctx);
    let printed = format!("{}{}", ctx.report.render(cli.format), ctx.extra);
    let _ = stdout.write_all(printed.as_bytes());
    match outcome {
        Ok(code) => code,
        Err(Failure::Domain(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            error_code(&e)
        }
        Err(Failure::Io(path, e)) => {
            let _ = writeln!(stderr, "error: {path}: {e}");
            EXIT_IO
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn dispatch(command: Command, ctx: &mut Ctx) -> Outcome {
    match command {
        Command::Show { file, at } => {
            let m = ctx.load(&file)?;
            ctx.report.function("", &m);
            let c = m.classify(&ctx.limits);
            for (k, v) in [
                ("proper", c.proper),
                ("pseudo", c.pseudo),
                ("normal", c.normal),
                ("positive", c.positive),
                ("vacuous", c.vacuous),
                ("diverse", c.diverse),
                ("probabilistic", c.probabilistic),
            ] {
                ctx.report.add(k, v);
            }
            if let Some(expr) = at {
                let event = parse_set_expr(&expr, m.frame())?;
                let pv = m.query(&event)?;
                ctx.report.add("bel", pv.bel);
                ctx.report.add("pl", pv.pl);
                match pv.q {
                    Some(q) => ctx.report.add("q", q),
                    None => ctx.report.add("q", "undefined"),
                }
            }
            Ok(0)
        }
        Command::Combine {
            first,
            second,
            route,
            out,
        } => {
            let (a, b) = (ctx.load(&first)?, ctx.load(&second)?);
            let route = match route {
                Route::Auto => CombineRoute::Auto,
                Route::Convolution => CombineRoute::Convolution,
                Route::Product => CombineRoute::CommonalityProduct,
            };
            let res = combine_with(&a, &b, route, &ctx.limits)?;
            ctx.report.function("", &res.result);
            ctx.report.add("conflict", &res.conflict);
            ctx.write_function(&out, &res.result)?;
            Ok(0)
        }
        Command::Project { file, onto, out } => {
            let m = ctx.load(&file)?;
            let res = project(&m, &var_list(&onto))?;
            ctx.report.function("", &res);
            ctx.write_function(&out, &res)?;
            Ok(0)
        }
        Command::Extend { file, onto, out } => {
            let m = ctx.load(&file)?;
            let extra = parse_frame_decl(&onto)?;
            let target = Arc::new(m.frame().union(&extra)?);
            let res = vacuous_extend(&m, &target)?;
            ctx.report.function("", &res);
            ctx.write_function(&out, &res)?;
            Ok(0)
        }
        Command::Condition {
            file,
            evidence,
            out,
        } => {
            let m = ctx.load(&file)?;
            let event = parse_set_expr(&evidence, m.frame())?;
            let res = condition_shafer(&m, &event)?;
            ctx.report.function("", &res.result);
            ctx.report.add("conflict", &res.conflict);
            ctx.write_function(&out, &res.result)?;
            Ok(0)
        }
        Command::Remove { first, second } => {
            let a = ctx.load(&first)?;
            let b = ctx.load(&second)?;
            let b = vacuous_extend(&b, a.frame())?;
            let qa = commonality(&a, &ctx.limits)?;
            let qb = commonality(&b, &ctx.limits)?;
            let quotient = remove_shenoy(&qa, &qb)?;
            let masses = mass_from_commonality(&quotient);
            let mut entries: Vec<_> = masses.entries().filter(|(_, v)| !v.is_zero()).collect();
            entries.sort_by_key(|(s, _)| s.to_vec());
            ctx.report.add("frame", a.frame());
            let mut negative = false;
            for (set, mass) in entries {
                negative |= mass.is_negative();
                ctx.report
                    .add("focal", format!("{mass} {}", a.frame().format_set(set)));
            }
            ctx.report.add("negative_mass", negative);
            Ok(0)
        }
        Command::Anticond {
            file,
            given,
            solve,
            verify,
            out,
        } => {
            let m = ctx.load(&file)?;
            let p = var_list(&given);
            if let Some(path) = verify {
                let cand = ctx.load(&path)?;
                let v = anticonditional_verify(&m, &p, &cand)?;
                ctx.report.add("valid", v.valid);
                if let Some(c) = &v.residual.conflict {
                    ctx.report.add("conflict", c);
                }
                if let Some(f) = &v.residual.failure {
                    ctx.report.add("failure", f);
                }
                for e in &v.residual.entries {
                    ctx.report.add(
                        "residual",
                        format!(
                            "{} mass={}->{} q={}->{}",
                            e.set, e.expected_mass, e.recombined_mass, e.expected_q, e.recombined_q
                        ),
                    );
                }
                return Ok(verdict_code(Verdict::from_bool(v.valid)));
            }
            let outcome = match solve.as_deref() {
                None => SolveOutcome::Found(anticonditional_canonical(&m, &p, &ctx.limits)?),
                Some("cano") => anticonditional_solve(
                    &m,
                    &p,
                    &Constraint::CanoVacuousOn(p.clone()),
                    &ctx.limits,
                )?,
                Some(s) => match s.strip_prefix("compress:") {
                    Some(vars) => anticonditional_solve(
                        &m,
                        &p,
                        &Constraint::CompressiblyIndependentOf(var_list(vars)),
                        &ctx.limits,
                    )?,
                    None => {
                        return Err(Failure::Usage(format!(
                            "unknown --solve `{s}`, expected compress:<vars> or cano"
                        )))
                    }
                },
            };
            match outcome {
                SolveOutcome::Found(b) => {
                    ctx.report.add("outcome", "found");
                    ctx.report.function("", &b);
                    ctx.report.add("proper", b.is_proper());
                    ctx.write_function(&out, &b)?;
                    Ok(EXIT_TRUE)
                }
                SolveOutcome::Infeasible(why) => {
                    ctx.report.add("outcome", "infeasible");
                    ctx.report.add("reason", why);
                    Ok(EXIT_FALSE)
                }
                SolveOutcome::Unknown(why) => {
                    ctx.report.add("outcome", "unknown");
                    ctx.report.add("reason", why);
                    Ok(EXIT_UNKNOWN)
                }
            }
        }
        Command::Indep {
            file,
            kind,
            p,
            q,
            r,
        } => {
            let m = ctx.load(&file)?;
            let (p, q) = (var_list(&p), var_list(&q));
            let query = match (kind, r) {
                (IndepType::Unconditional, None) => IndependenceQuery {
                    q: p,
                    r: q,
                    p: VariableSet::empty(),
                    method: Method::Unconditional,
                },
                (IndepType::Unconditional, Some(r)) => IndependenceQuery {
                    q,
                    r: var_list(&r),
                    p,
                    method: Method::Unconditional,
                },
                (IndepType::Cano, _) => IndependenceQuery {
                    q: VariableSet::empty(),
                    r: VariableSet::empty(),
                    p,
                    method: Method::Cano,
                },
                (IndepType::Shenoy, r) | (IndepType::Intrinsic, r) => {
                    let method = if kind == IndepType::Shenoy {
                        Method::Shenoy
                    } else {
                        Method::Intrinsic
                    };
                    IndependenceQuery {
                        q,
                        r: var_list(&r.unwrap_or_default()),
                        p,
                        method,
                    }
                }
            };
            let rep = Checker::new(&m, &ctx.limits)
                .with_cross_check(kind == IndepType::Intrinsic)
                .query(&query)?;
            independence_rows(&mut ctx.report, &rep);
            Ok(verdict_code(rep.verdict))
        }
        Command::Graphoid {
            file,
            axioms,
            relation,
            q,
            r,
            s,
            p,
            brief,
        } => {
            let m = ctx.load(&file)?;
            let relation: Relation = relation.parse()?;
            let axioms: Vec<Axiom> = match axioms {
                None => Axiom::ALL.to_vec(),
                Some(list) => list
                    .split(',')
                    .map(|a| a.trim().parse())
                    .collect::<crate::Result<_>>()?,
            };
            let verdicts = if q.is_some() || r.is_some() || s.is_some() || p.is_some() {
                let [axiom] = axioms[..] else {
                    return Err(Failure::Usage(
                        "a single tuple needs exactly one axiom".into(),
                    ));
                };
                let sets = [q, r, s, p].map(|x| var_list(&x.unwrap_or_default()));
                let [q, r, s, p] = sets;
                vec![check_axiom(
                    &m,
                    &AxiomQuery {
                        axiom,
                        q,
                        r,
                        s,
                        p,
                        relation,
                    },
                    &ctx.limits,
                )?]
            } else {
                sweep(&m, &axioms, relation, &ctx.limits)?
            };
            graphoid_rows(&mut ctx.report, &verdicts, brief);
            let any = |st: Status| verdicts.iter().any(|v| v.status == st);
            Ok(if any(Status::Violated) {
                EXIT_FALSE
            } else if any(Status::Unknown) {
                EXIT_UNKNOWN
            } else {
                EXIT_TRUE
            })
        }
        Command::Gen {
            vars,
            seed,
            focals,
            diverse,
            probabilistic,
            improper,
            factorized,
        } => {
            let sizes = vars
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| {
                    Failure::Usage(format!(
                        "--vars expects comma-separated sizes, got `{vars}`"
                    ))
                })?;
            let spec = GeneratorSpec {
                variables: sizes,
                focal_count: focals,
                diverse,
                probabilistic,
                proper: !improper,
                factorized: factorized.map(|f| f.split('|').map(var_list).collect()),
                seed,
            };
            let m = gen_random(&spec)?;
            ctx.extra.push_str(&emit_bpa(&m));
            Ok(0)
        }
        Command::UniverseFocal { size, eps } => {
            let eps = parse_rational(&eps)
                .ok_or_else(|| Failure::Usage(format!("`{eps}` is not a rational number")))?;
            let rep = universe_focal_experiment(size, &eps, &ctx.limits)?;
            ctx.report.add("size", size);
            ctx.report.add("eps", &eps);
            independence_rows(&mut ctx.report, &rep);
            Ok(verdict_code(rep.verdict))
        }
        Command::Examples { run } => {
            let Some(outcomes) = run_examples(&run, &ctx.limits) else {
                return Err(Failure::Usage(format!("unknown example `{run}`")));
            };
            let mut failed = 0;
            for o in &outcomes {
                ctx.report.add(
                    "example",
                    format!("{} {}", o.name, if o.passed { "pass" } else { "FAIL" }),
                );
                for n in &o.notes {
                    ctx.report.add(&format!("{}.note", o.name), n);
                }
                failed += usize::from(!o.passed);
            }
            ctx.report.add("passed", outcomes.len() - failed);
            ctx.report.add("failed", failed);
            Ok(if failed == 0 { EXIT_TRUE } else { EXIT_FALSE })
        }
    }
}

fn independence_rows(report: &mut Report, rep: &IndependenceReport) {
    report.add("query", &rep.query);
    report.add("verdict", rep.verdict);
    report.add("diversity", rep.diversity);
    if let Some(c) = rep.cross_check {
        report.add("cross_check", c);
    }
    match &rep.witness {
        Some(Evidence::Factorization(w)) => {
            report.function("left", &w.left);
            report.function("right", &w.right);
            report.add("scale", &w.scale);
        }
        Some(Evidence::Conditional(b)) => report.function("conditional", b),
        Some(Evidence::Violation(why)) => report.add("violation", why),
        None => {}
    }
}

fn graphoid_rows(report: &mut Report, verdicts: &[AxiomVerdict], brief: bool) {
    let count = |st: Status| verdicts.iter().filter(|v| v.status == st).count();
    for v in verdicts {
        if brief && matches!(v.status, Status::Holds | Status::PremisesFalse) {
            continue;
        }
        report.add(
            "instance",
            format!(
                "{} q={} r={} s={} p={} status={}",
                v.query.axiom, v.query.q, v.query.r, v.query.s, v.query.p, v.status
            ),
        );
    }
    report.add("checked", verdicts.len());
    for (key, st) in [
        ("holds", Status::Holds),
        ("premises_false", Status::PremisesFalse),
        ("violated", Status::Violated),
        ("gate_failed", Status::GateFailed),
        ("unknown", Status::Unknown),
    ] {
        report.add(key, count(st));
    }
}
