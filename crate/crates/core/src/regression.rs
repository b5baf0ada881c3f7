//! Replays the worked examples against the bundled fixtures.

use crate::calculus::{combine, condition_shafer, project, vacuous_extend};
use crate::cli::bpa::{emit_bpa, parse_set_expr};
use crate::fixtures;
use crate::graphoid::{
    check_axiom, universe_focal_experiment, Axiom, AxiomQuery, Relation, Status,
};
use crate::independence::{
    anticonditional_verify, cano_conditional_exists, compress, independent_unconditional,
    intrinsic_independent, Compression, Verdict, Verification,
};
use crate::massfun::MassFunction;
use crate::rational::ratio;
use crate::{Limits, Rational, VariableSet};

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Observations, or the reason for failure.
    pub notes: Vec<String>,
}

type Check = fn(&Limits, &mut Vec<String>) -> Result<(), String>;

pub const EXAMPLES: &[(&str, Check)] = &[
    ("ex-cano", ex_cano),
    ("ex-square", ex_square),
    ("ex-diag", ex_diag),
    ("ex-twocond", ex_twocond),
    ("ex-xor", ex_xor),
    ("ex-chain", ex_chain),
    ("universe-focal", universe_focal),
];

/// Runs every example, or the one named.
pub fn run_examples(which: &str, limits: &Limits) -> Option<Vec<ExampleOutcome>> {
    let picked: Vec<_> = EXAMPLES
        .iter()
        .filter(|(name, _)| which == "all" || *name == which)
        .collect();
    if picked.is_empty() {
        return None;
    }
    Some(
        picked
            .into_iter()
            .map(|(name, check)| {
                let mut notes = Vec::new();
                let passed = match check(limits, &mut notes) {
                    Ok(()) => true,
                    Err(why) => {
                        notes.push(why);
                        false
                    }
                };
                ExampleOutcome {
                    name,
                    passed,
                    notes,
                }
            })
            .collect(),
    )
}

fn vars(names: &[&str]) -> VariableSet {
    VariableSet::of(names.iter().copied())
}

fn expect(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn err(e: crate::Error) -> String {
    e.to_string()
}

fn ex_cano(limits: &Limits, notes: &mut Vec<String>) -> Result<(), String> {
    let out = combine(&fixtures::ex_cano_1(), &fixtures::ex_cano_2()).map_err(err)?;
    notes.push(format!("conflict={}", out.conflict));
    expect(out.conflict == ratio(9, 25), "conflict differs from 9/25")?;
    expect(
        out.result.universe_mass() == ratio(1, 32),
        "universe mass differs from 1/32",
    )?;
    let class = out.result.classify(limits);
    expect(
        class.positive && class.diverse,
        "combination is not positive and diverse",
    )?;
    let cano = cano_conditional_exists(&out.result, &vars(&["X"]), limits).map_err(err)?;
    notes.push(format!("cano({{X}})={}", cano.verdict));
    expect(
        cano.verdict == Verdict::False,
        "a Cano conditional given X was found",
    )?;
    let rep = intrinsic_independent(
        &out.result,
        &vars(&["Y"]),
        &vars(&["Z"]),
        &vars(&["X"]),
        limits,
    )
    .map_err(err)?;
    notes.push(format!("intrinsic(Y,Z|X)={}", rep.verdict));
    let w = rep.factorization().ok_or("no factorization witness")?;
    let back = combine(&w.left, &w.right).map_err(err)?.result;
    expect(
        rep.holds() && back == out.result,
        "witness does not recombine",
    )
}

fn ex_square(limits: &Limits, notes: &mut Vec<String>) -> Result<(), String> {
    let m = fixtures::ex_square();
    let expected = crate::cli::bpa::parse_bpa(
        "frame Y = y1 y2\nm { (y1) } = 1/4\nm { (y2) } = 1/4\nm { (y1) (y2) } = 1/2\n",
    )
    .map_err(err)?;
    for x in ["x1", "x2"] {
        let evidence = parse_set_expr(&format!("X={x}"), m.frame()).map_err(err)?;
        let cond = condition_shafer(&m, &evidence).map_err(err)?.result;
        let y = project(&cond, &vars(&["Y"])).map_err(err)?;
        expect(y == expected, format!("Y-marginal given X={x} is {y}"))?;
    }
    let rep = independent_unconditional(&m, &vars(&["X"]), &vars(&["Y"]), limits).map_err(err)?;
    notes.push(format!("unconditional(X,Y)={}", rep.verdict));
    expect(
        rep.verdict == Verdict::False,
        "X and Y reported independent",
    )?;
    let singles = m.singleton_commonalities();
    expect(
        m.is_diverse() && singles.iter().all(|q| *q == ratio(3, 4)),
        "singleton commonalities are not all 3/4",
    )
}

fn ex_diag(limits: &Limits, notes: &mut Vec<String>) -> Result<(), String> {
    let diag = fixtures::ex_diag();
    for (onto, text) in [
        (vars(&["Y", "Z"]), fixtures::EX_DIAG_YZ),
        (vars(&["X", "Y"]), fixtures::EX_DIAG_XY),
        (vars(&["Z"]), fixtures::EX_DIAG_Z),
    ] {
        let table = emit_bpa(&project(&diag, &onto).map_err(err)?);
        expect(
            table == text,
            format!("projection onto {onto} differs from its table"),
        )?;
    }
    let lifted = vacuous_extend(&fixtures::ex_diag_xy(), diag.frame()).map_err(err)?;
    expect(
        emit_bpa(&lifted) == fixtures::EX_DIAG_CANDIDATE,
        "extension of the XY table differs from the candidate table",
    )?;
    for v in ["X", "Y", "Z"] {
        let c = compress(&diag, &vars(&[v])).map_err(err)?;
        expect(
            c == Compression::NotCompressible,
            format!("diagonal compresses over {v}"),
        )?;
    }
    let cand = fixtures::ex_diag_candidate();
    let check = anticonditional_verify(&diag, &vars(&["Y", "Z"]), &cand).map_err(err)?;
    expect(check.valid, "candidate does not verify given {Y,Z}")?;
    let compressed = compress(&cand, &vars(&["Z"])).map_err(err)?;
    expect(
        compressed == Compression::Compressed(fixtures::ex_diag_compressed()),
        "candidate does not compress over Z",
    )?;
    let _ = limits;
    notes.push("candidate verifies and compresses over {Z}".into());
    Ok(())
}

/// Whether a verification's residual lists exactly the disagreements.
fn residual_complete(v: &Verification) -> bool {
    let entries_differ = v
        .residual
        .entries
        .iter()
        .all(|e| e.expected_mass != e.recombined_mass || e.expected_q != e.recombined_q);
    let empty = v.residual.entries.is_empty() && v.residual.failure.is_none();
    entries_differ && (v.valid == empty)
}

fn ex_twocond(_: &Limits, notes: &mut Vec<String>) -> Result<(), String> {
    let m = fixtures::ex_twocond();
    let y = vars(&["Y"]);
    for (label, cand) in [
        ("first", fixtures::ex_twocond_first()),
        ("second", fixtures::ex_twocond_second()),
    ] {
        let a = anticonditional_verify(&m, &y, &cand).map_err(err)?;
        let b = anticonditional_verify(&m, &y, &cand).map_err(err)?;
        expect(
            a == b,
            format!("{label} candidate: verdict is not deterministic"),
        )?;
        expect(
            residual_complete(&a),
            format!("{label} candidate: residual incomplete"),
        )?;
        notes.push(format!(
            "{label} candidate valid={} residual_sets={}",
            a.valid,
            a.residual.entries.len()
        ));
    }
    Ok(())
}

fn ex_xor(limits: &Limits, notes: &mut Vec<String>) -> Result<(), String> {
    let m = fixtures::ex_xor();
    let mut checker = crate::independence::Checker::new(&m, limits);
    for (a, b, c) in [("X", "Y", "Z"), ("X", "Z", "Y"), ("Y", "Z", "X")] {
        let unc = checker
            .query(&query(
                a,
                b,
                None,
                crate::independence::Method::Unconditional,
            ))
            .map_err(err)?;
        expect(
            unc.holds(),
            format!("{a},{b} not unconditionally independent"),
        )?;
        let sh = checker
            .query(&query(a, b, Some(c), crate::independence::Method::Shenoy))
            .map_err(err)?;
        expect(
            sh.verdict == Verdict::False,
            format!("{a},{b} independent given {c}"),
        )?;
    }
    notes.push("pairwise independent, no pair independent given the third".into());
    Ok(())
}

fn query(
    a: &str,
    b: &str,
    c: Option<&str>,
    method: crate::independence::Method,
) -> crate::independence::IndependenceQuery {
    crate::independence::IndependenceQuery {
        q: vars(&[a]),
        r: vars(&[b]),
        p: c.map_or_else(VariableSet::empty, |c| vars(&[c])),
        method,
    }
}

fn ex_chain(limits: &Limits, notes: &mut Vec<String>) -> Result<(), String> {
    let m: MassFunction = fixtures::ex_chain();
    let mk = |relation| AxiomQuery {
        axiom: Axiom::Intersection,
        q: vars(&["Y"]),
        r: vars(&["Z"]),
        s: vars(&["X"]),
        p: VariableSet::empty(),
        relation,
    };
    let shenoy = check_axiom(&m, &mk(Relation::Shenoy), limits).map_err(err)?;
    notes.push(format!("shenoy intersection {}", shenoy.status));
    expect(
        shenoy.status == Status::Violated,
        "Shenoy intersection not violated",
    )?;
    let intrinsic = check_axiom(&m, &mk(Relation::Intrinsic), limits).map_err(err)?;
    notes.push(format!("intrinsic intersection {}", intrinsic.status));
    expect(
        intrinsic.status == Status::GateFailed && intrinsic.premises.iter().all(|p| !p.diversity),
        "intrinsic intersection not stopped by the diversity gate",
    )
}

fn universe_focal(limits: &Limits, notes: &mut Vec<String>) -> Result<(), String> {
    for (eps, want) in [
        (ratio(1, 10), Verdict::False),
        (Rational::from_integer(0.into()), Verdict::True),
        (Rational::from_integer(1.into()), Verdict::True),
    ] {
        let rep = universe_focal_experiment(3, &eps, limits).map_err(err)?;
        notes.push(format!("size=3 eps={eps} independent={}", rep.verdict));
        expect(
            rep.verdict == want,
            format!("eps={eps} gave {}", rep.verdict),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_example_passes() {
        let out = run_examples("all", &Limits::default()).unwrap();
        assert_eq!(out.len(), EXAMPLES.len());
        for o in out {
            assert!(o.passed, "{}: {:?}", o.name, o.notes);
        }
    }

    #[test]
    fn unknown_example() {
        assert!(run_examples("ex-none", &Limits::default()).is_none());
    }
}
