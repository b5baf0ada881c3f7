//! Graphoid axioms for the independence relations, seeded random belief
//! functions and the universe-focal experiment.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::{combine, vacuous_extend};
use crate::error::{Error, Result};
use crate::frame::{ConfigSet, Frame, Variable, VariableSet};
use crate::independence::{Checker, IndependenceQuery, IndependenceReport, Method, Verdict};
use crate::massfun::{MassAssignment, MassFunction, NormMode};
use crate::rational::{int, ratio, Rational};
use crate::Limits;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axiom {
    Symmetry,
    Decomposition,
    WeakUnion,
    Contraction,
    Intersection,
}

impl Axiom {
    pub const ALL: [Axiom; 5] = [
        Axiom::Symmetry,
        Axiom::Decomposition,
        Axiom::WeakUnion,
        Axiom::Contraction,
        Axiom::Intersection,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::Symmetry => "symmetry",
            Axiom::Decomposition => "decomposition",
            Axiom::WeakUnion => "weak-union",
            Axiom::Contraction => "contraction",
            Axiom::Intersection => "intersection",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axiom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axiom::ALL
            .into_iter()
            .find(|a| a.name() == s || (s == "weak_union" && *a == Axiom::WeakUnion))
            .ok_or_else(|| Error::InvalidQuery(format!("unknown axiom `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Intrinsic,
    Shenoy,
    Unconditional,
}

impl Relation {
    fn method(self) -> Method {
        match self {
            Relation::Intrinsic => Method::Intrinsic,
            Relation::Shenoy => Method::Shenoy,
            Relation::Unconditional => Method::Unconditional,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.method().fmt(f)
    }
}

impl FromStr for Relation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intrinsic" => Ok(Relation::Intrinsic),
            "shenoy" => Ok(Relation::Shenoy),
            "unconditional" => Ok(Relation::Unconditional),
            _ => Err(Error::InvalidQuery(format!("unknown relation `{s}`"))),
        }
    }
}

/// One instance of an axiom. With `I(a, b | c)` for the relation:
///
/// | axiom | premises | conclusion |
/// |---|---|---|
/// | symmetry | `I(q, r \| p)` | `I(r, q \| p)` |
/// | decomposition | `I(q, r∪s \| p)` | `I(q, r \| p)` |
/// | weak union | `I(q, r∪s \| p)` | `I(q, r \| p∪s)` |
/// | contraction | `I(q, r \| p)`, `I(q, s \| p∪r)` | `I(q, r∪s \| p)` |
/// | intersection | `I(q, s \| p∪r)`, `I(r, s \| p∪q)` | `I(q∪r, s \| p)` |
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AxiomQuery {
    pub axiom: Axiom,
    pub q: VariableSet,
    pub r: VariableSet,
    pub s: VariableSet,
    pub p: VariableSet,
    pub relation: Relation,
}

impl AxiomQuery {
    fn statement(
        &self,
        a: &VariableSet,
        b: &VariableSet,
        given: &VariableSet,
    ) -> IndependenceQuery {
        IndependenceQuery {
            q: a.clone(),
            r: b.clone(),
            p: given.clone(),
            method: self.relation.method(),
        }
    }

    /// Premise and conclusion statements.
    pub fn statements(&self) -> (Vec<IndependenceQuery>, IndependenceQuery) {
        let (q, r, s, p) = (&self.q, &self.r, &self.s, &self.p);
        let i = |a: &VariableSet, b: &VariableSet, c: &VariableSet| self.statement(a, b, c);
        match self.axiom {
            Axiom::Symmetry => (vec![i(q, r, p)], i(r, q, p)),
            Axiom::Decomposition => (vec![i(q, &r.union(s), p)], i(q, r, p)),
            Axiom::WeakUnion => (vec![i(q, &r.union(s), p)], i(q, r, &p.union(s))),
            Axiom::Contraction => (vec![i(q, r, p), i(q, s, &p.union(r))], i(q, &r.union(s), p)),
            Axiom::Intersection => (
                vec![i(q, s, &p.union(r)), i(r, s, &p.union(q))],
                i(&q.union(r), s, p),
            ),
        }
    }

    fn validate(&self, m: &MassFunction) -> Result<()> {
        let sets = [&self.q, &self.r, &self.s, &self.p];
        for (i, a) in sets.iter().enumerate() {
            for b in &sets[i + 1..] {
                if !a.is_disjoint(b) {
                    return Err(Error::InvalidQuery(format!(
                        "sets of {self} are not pairwise disjoint"
                    )));
                }
            }
        }
        if self.axiom == Axiom::Symmetry && !self.s.is_empty() {
            return Err(Error::InvalidQuery("symmetry takes no third set".into()));
        }
        if self.relation == Relation::Intrinsic && !m.is_proper() {
            return Err(Error::InvalidQuery(
                "intrinsic graphoid checks need a proper belief function".into(),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for AxiomQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}[{}](q={} r={} s={} p={})",
            self.axiom, self.relation, self.q, self.r, self.s, self.p
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Holds,
    PremisesFalse,
    Violated,
    /// A premise failed only because its marginal is not diverse.
    GateFailed,
    Unknown,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Holds => "holds",
            Status::PremisesFalse => "premises-false",
            Status::Violated => "violated",
            Status::GateFailed => "gate-failed(diversity)",
            Status::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomVerdict {
    pub query: AxiomQuery,
    pub premises: Vec<IndependenceReport>,
    pub conclusion: IndependenceReport,
    pub status: Status,
}

pub fn check_axiom(m: &MassFunction, query: &AxiomQuery, limits: &Limits) -> Result<AxiomVerdict> {
    check_axiom_with(&mut Checker::new(m, limits), query)
}

/// Like [`check_axiom`], sharing marginals and answers through `checker`.
pub fn check_axiom_with(checker: &mut Checker, query: &AxiomQuery) -> Result<AxiomVerdict> {
    query.validate(checker.function())?;
    let (premise_queries, conclusion_query) = query.statements();
    let premises = premise_queries
        .iter()
        .map(|q| checker.query(q))
        .collect::<Result<Vec<_>>>()?;
    let conclusion = checker.query(&conclusion_query)?;
    let status = if premises
        .iter()
        .chain([&conclusion])
        .any(|r| r.verdict == Verdict::Unknown)
    {
        Status::Unknown
    } else if query.relation == Relation::Intrinsic && premises.iter().any(|r| !r.diversity) {
        Status::GateFailed
    } else if premises.iter().any(|r| r.verdict == Verdict::False) {
        Status::PremisesFalse
    } else if conclusion.holds() {
        Status::Holds
    } else {
        Status::Violated
    };
    Ok(AxiomVerdict {
        query: query.clone(),
        premises,
        conclusion,
        status,
    })
}

/// Every valid instance of each axiom over the variables of `m`, in a fixed
/// order: axioms as given, then assignments of variables to `q, r, s, p` or
/// to none, counted in base five with the first variable least significant.
pub fn sweep(
    m: &MassFunction,
    axioms: &[Axiom],
    relation: Relation,
    limits: &Limits,
) -> Result<Vec<AxiomVerdict>> {
    let names: Vec<String> = m
        .frame()
        .variables()
        .iter()
        .map(|v| v.name().to_string())
        .collect();
    if names.len() > limits.sweep_max_vars {
        return Err(Error::InvalidQuery(format!(
            "exhaustive sweeps cover at most {} variables, the function has {}",
            limits.sweep_max_vars,
            names.len()
        )));
    }
    let mut checker = Checker::new(m, limits);
    let mut out = Vec::new();
    let total = 5usize.pow(names.len() as u32);
    for &axiom in axioms {
        for code in 0..total {
            let mut parts = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
            let mut c = code;
            for name in &names {
                if c % 5 < 4 {
                    parts[c % 5].push(name.as_str());
                }
                c /= 5;
            }
            let [q, r, s, p] = parts.map(VariableSet::of);
            let shape_ok =
                !q.is_empty() && !r.is_empty() && (s.is_empty() == (axiom == Axiom::Symmetry));
            if !shape_ok {
                continue;
            }
            let query = AxiomQuery {
                axiom,
                q,
                r,
                s,
                p,
                relation,
            };
            if relation == Relation::Unconditional && !unconditional_shape(&query) {
                continue;
            }
            out.push(check_axiom_with(&mut checker, &query)?);
        }
    }
    Ok(out)
}

fn unconditional_shape(query: &AxiomQuery) -> bool {
    let (premises, conclusion) = query.statements();
    let ok = premises
        .iter()
        .chain([&conclusion])
        .all(|s| s.p.is_empty() && !s.q.is_empty() && !s.r.is_empty());
    ok
}

/// Parameters of a seeded random belief function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSpec {
    /// Domain size of each variable; variables are named `X Y Z W V U T S`
    /// and values `x1 x2 …` after their variable.
    pub variables: Vec<usize>,
    /// Number of random focal sets drawn per function or factor.
    pub focal_count: usize,
    /// Puts at least 1/100 of the mass on the universe.
    pub diverse: bool,
    /// Only singleton focal sets; with `diverse`, every singleton.
    pub probabilistic: bool,
    /// When false, some focal sets carry negative mass, offset by the universe
    /// so that commonalities stay nonnegative.
    pub proper: bool,
    /// Builds the function as a combination of independent factors, one per
    /// block. Blocks may overlap.
    pub factorized: Option<Vec<VariableSet>>,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(variables: Vec<usize>, seed: u64) -> Self {
        Self {
            variables,
            focal_count: 4,
            diverse: false,
            probabilistic: false,
            proper: true,
            factorized: None,
            seed,
        }
    }

    pub fn diverse(mut self) -> Self {
        self.diverse = true;
        self
    }

    pub fn probabilistic(mut self) -> Self {
        self.probabilistic = true;
        self
    }

    pub fn improper(mut self) -> Self {
        self.proper = false;
        self
    }

    pub fn focal_count(mut self, n: usize) -> Self {
        self.focal_count = n;
        self
    }

    pub fn factorized(mut self, blocks: Vec<VariableSet>) -> Self {
        self.factorized = Some(blocks);
        self
    }
}

const NAMES: [&str; 8] = ["X", "Y", "Z", "W", "V", "U", "T", "S"];

/// The frame `gen_random` uses for the given domain sizes.
pub fn generated_frame(sizes: &[usize]) -> Result<Frame> {
    if sizes.len() > NAMES.len() {
        return Err(Error::InvalidQuery(format!(
            "at most {} generated variables are supported",
            NAMES.len()
        )));
    }
    let vars = sizes
        .iter()
        .zip(NAMES)
        .map(|(&n, name)| {
            let lower = name.to_lowercase();
            Variable::new(name, (1..=n).map(|i| format!("{lower}{i}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Frame::new(vars)
}

pub fn gen_random(spec: &GeneratorSpec) -> Result<MassFunction> {
    let frame = Arc::new(generated_frame(&spec.variables)?);
    if !spec.proper && spec.probabilistic {
        return Err(Error::InvalidQuery(
            "a probabilistic function with negative masses is not a pseudo-belief function".into(),
        ));
    }
    let limits = Limits {
        lattice_gate: usize::MAX,
        ..Limits::default()
    };
    let Some(blocks) = &spec.factorized else {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        return random_over(&frame, spec, &mut rng, &limits);
    };
    let all = frame.variable_set();
    let covered = blocks
        .iter()
        .fold(VariableSet::empty(), |acc, b| acc.union(b));
    if let Some(v) = covered.difference(&all).iter().next() {
        return Err(Error::UnknownVariable(v.to_string()));
    }
    let mut result = MassFunction::vacuous(frame.clone());
    for (i, block) in blocks.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(i as u64 + 1);
        let sub = Arc::new(frame.subframe(block)?);
        let factor = random_over(&sub, spec, &mut rng, &limits)?;
        result = combine(&result, &vacuous_extend(&factor, &frame)?)?.result;
    }
    Ok(result)
}

fn random_over(
    frame: &Arc<Frame>,
    spec: &GeneratorSpec,
    rng: &mut ChaCha8Rng,
    limits: &Limits,
) -> Result<MassFunction> {
    let n = frame.size();
    let mut draws: Vec<(ConfigSet, i64)> = Vec::new();
    if spec.probabilistic && spec.diverse {
        for c in 0..n as u32 {
            draws.push((ConfigSet::singleton(n, c), rng.gen_range(1..=9)));
        }
    } else {
        for _ in 0..spec.focal_count.max(1) {
            let set = if spec.probabilistic {
                ConfigSet::singleton(n, rng.gen_range(0..n as u32))
            } else {
                random_subset(n, rng)
            };
            let weight = if spec.proper {
                rng.gen_range(1..=9)
            } else {
                *[-3i64, -2, -1, 1, 2, 3, 5, 7, 9].choose(rng).unwrap()
            };
            draws.push((set, weight));
        }
    }
    let mut raw = MassAssignment::new(frame.clone());
    let mut negative = 0i64;
    let mut total = 0i64;
    for (set, w) in &draws {
        raw.add(set.clone(), int(*w))?;
        negative += (-*w).max(0);
        total += w.abs();
    }
    if spec.diverse && !spec.probabilistic || negative > 0 {
        let mut universe = rng.gen_range(1..=9) + negative;
        if universe * 99 < total {
            universe = (total + 98) / 99;
        }
        raw.add(ConfigSet::full(n), int(universe))?;
    }
    let mode = if negative > 0 {
        NormMode::SignedSum
    } else {
        NormMode::AbsoluteSum
    };
    raw.normalize(mode, limits)
}

fn random_subset(n: usize, rng: &mut ChaCha8Rng) -> ConfigSet {
    loop {
        let picked: Vec<u32> = (0..n as u32).filter(|_| rng.gen_bool(0.5)).collect();
        if !picked.is_empty() {
            return ConfigSet::from_indices(n, picked);
        }
    }
}

/// Two independent uniform variables with `size` values each, with a share
/// `eps` of the mass moved from the singletons to the universe; reports
/// whether they stay Shenoy-independent.
pub fn universe_focal_experiment(
    size: usize,
    eps: &Rational,
    limits: &Limits,
) -> Result<IndependenceReport> {
    if size < 2 {
        return Err(Error::InvalidQuery("domain size must be at least 2".into()));
    }
    if eps < &Rational::zero() || eps > &Rational::one() {
        return Err(Error::InvalidQuery("epsilon must lie in [0, 1]".into()));
    }
    let frame = Arc::new(generated_frame(&[size, size])?);
    let n = frame.size();
    limits.check_lattice(n)?;
    let mut raw = MassAssignment::new(frame.clone());
    let single = (Rational::one() - eps) * ratio(1, n as i64);
    for c in 0..n as u32 {
        raw.add(ConfigSet::singleton(n, c), single.clone())?;
    }
    raw.add(ConfigSet::full(n), eps.clone())?;
    let m = raw.normalize(NormMode::AbsoluteSum, limits)?;
    Checker::new(&m, limits).query(&IndependenceQuery {
        q: VariableSet::of(["X"]),
        r: VariableSet::of(["Y"]),
        p: VariableSet::empty(),
        method: Method::Shenoy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn vars(names: &[&str]) -> VariableSet {
        VariableSet::of(names.iter().copied())
    }

    fn intersection(
        q: &[&str],
        r: &[&str],
        s: &[&str],
        p: &[&str],
        relation: Relation,
    ) -> AxiomQuery {
        AxiomQuery {
            axiom: Axiom::Intersection,
            q: vars(q),
            r: vars(r),
            s: vars(s),
            p: vars(p),
            relation,
        }
    }

    #[test]
    fn chain_breaks_intersection_without_diversity() {
        let m = fixtures::ex_chain();
        let l = Limits::default();
        let v = check_axiom(
            &m,
            &intersection(&["Y"], &["Z"], &["X"], &[], Relation::Shenoy),
            &l,
        )
        .unwrap();
        assert!(v.premises.iter().all(|p| p.holds()));
        assert_eq!(v.conclusion.verdict, Verdict::False);
        assert_eq!(v.status, Status::Violated);
        let v = check_axiom(
            &m,
            &intersection(&["Y"], &["Z"], &["X"], &[], Relation::Intrinsic),
            &l,
        )
        .unwrap();
        assert_eq!(v.status, Status::GateFailed);
    }

    #[test]
    fn generator_is_deterministic() {
        let spec = GeneratorSpec::new(vec![2, 3], 7).focal_count(5);
        assert_eq!(gen_random(&spec).unwrap(), gen_random(&spec).unwrap());
        let other = GeneratorSpec {
            seed: 8,
            ..spec.clone()
        };
        assert_ne!(gen_random(&spec).unwrap(), gen_random(&other).unwrap());
    }

    #[test]
    fn generator_flags() {
        let l = Limits::default();
        let m = gen_random(&GeneratorSpec::new(vec![2, 2], 1).diverse()).unwrap();
        assert!(m.classify(&l).diverse);
        assert!(m.universe_mass() >= ratio(1, 100));
        let m = gen_random(&GeneratorSpec::new(vec![3, 3], 2).probabilistic().diverse()).unwrap();
        assert_eq!(m.focal_count(), 9);
        assert!(m.classify(&l).probabilistic);
        let m = gen_random(&GeneratorSpec::new(vec![2, 2], 3).improper().focal_count(6)).unwrap();
        assert!(m.classify(&l).pseudo);
    }

    #[test]
    fn factorized_probabilistic_pair_is_independent() {
        let spec = GeneratorSpec::new(vec![3, 3], 11)
            .probabilistic()
            .diverse()
            .factorized(vec![vars(&["X"]), vars(&["Y"])]);
        let m = gen_random(&spec).unwrap();
        let mut c = Checker::new(&m, &Limits::default());
        let rep = c
            .query(&IndependenceQuery {
                q: vars(&["X"]),
                r: vars(&["Y"]),
                p: VariableSet::empty(),
                method: Method::Unconditional,
            })
            .unwrap();
        assert!(rep.holds());
    }

    #[test]
    fn universe_focal_destroys_independence() {
        let l = Limits::default();
        assert_eq!(
            universe_focal_experiment(3, &ratio(1, 10), &l)
                .unwrap()
                .verdict,
            Verdict::False
        );
        assert_eq!(
            universe_focal_experiment(3, &Rational::zero(), &l)
                .unwrap()
                .verdict,
            Verdict::True
        );
        assert_eq!(
            universe_focal_experiment(3, &Rational::one(), &l)
                .unwrap()
                .verdict,
            Verdict::True
        );
    }

    #[test]
    fn vacuous_sweep_has_no_violations() {
        let m = MassFunction::vacuous(Arc::new(generated_frame(&[2, 2, 2]).unwrap()));
        let l = Limits::default();
        for relation in [Relation::Shenoy, Relation::Unconditional] {
            let out = sweep(&m, &Axiom::ALL, relation, &l).unwrap();
            assert!(!out.is_empty());
            assert!(out.iter().all(|v| v.status == Status::Holds), "{relation}");
        }
    }

    #[test]
    fn sweep_order_is_fixed() {
        let m = fixtures::ex_xor();
        let l = Limits::default();
        let a = sweep(
            &m,
            &[Axiom::Symmetry, Axiom::Decomposition],
            Relation::Shenoy,
            &l,
        )
        .unwrap();
        let b = sweep(
            &m,
            &[Axiom::Symmetry, Axiom::Decomposition],
            Relation::Shenoy,
            &l,
        )
        .unwrap();
        let keys = |v: &[AxiomVerdict]| v.iter().map(|x| x.query.to_string()).collect::<Vec<_>>();
        assert_eq!(keys(&a), keys(&b));
        assert_eq!(a[0].query.axiom, Axiom::Symmetry);
    }

    #[test]
    fn axiom_names_parse() {
        for a in Axiom::ALL {
            assert_eq!(a.name().parse::<Axiom>().unwrap(), a);
        }
        assert!("union".parse::<Axiom>().is_err());
        assert_eq!("shenoy".parse::<Relation>().unwrap(), Relation::Shenoy);
    }
}
