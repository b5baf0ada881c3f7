use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;

use super::anticond::{anticonditional_solve, solve_cano, Constraint, SolveOutcome};
use super::{
    Evidence, FactorizationWitness, IndependenceQuery, IndependenceReport, Method, Verdict,
};
use crate::calculus::{combine, project};
use crate::error::{Error, Result};
use crate::frame::{ConfigSet, Frame, VariableSet};
use crate::lattice::{project_masks, Ground, Scaled};
use crate::massfun::{from_local_commonality, traced_commonality, MassFunction};
use crate::rational::Rational;
use crate::Limits;

fn validate(m: &MassFunction, query: &IndependenceQuery) -> Result<()> {
    let all = m.frame().variable_set();
    for set in [&query.q, &query.r, &query.p] {
        if let Some(v) = set.iter().find(|v| !all.contains(v)) {
            return Err(Error::UnknownVariable(v.to_string()));
        }
    }
    if !query.q.is_disjoint(&query.r)
        || !query.q.is_disjoint(&query.p)
        || !query.r.is_disjoint(&query.p)
    {
        return Err(Error::InvalidQuery(format!(
            "sets of {query} are not pairwise disjoint"
        )));
    }
    match query.method {
        Method::Unconditional if !query.p.is_empty() => Err(Error::InvalidQuery(
            "the unconditional relation takes no conditioning set".into(),
        )),
        Method::Unconditional if query.q.is_empty() || query.r.is_empty() => Err(
            Error::InvalidQuery("the unconditional relation needs two nonempty sets".into()),
        ),
        _ => Ok(()),
    }
}

/// First configuration whose singleton commonality vanishes.
fn undiverse_witness(m: &MassFunction) -> Option<String> {
    m.singleton_commonalities()
        .iter()
        .position(|q| q.is_zero())
        .map(|i| {
            format!(
                "not diverse: commonality of {{ {} }} is zero",
                m.frame().format_config(i)
            )
        })
}

/// A marginal with its dense commonality table, built on first use.
struct Marginal {
    m: MassFunction,
    table: Option<Rc<Scaled>>,
}

/// Answers independence queries about one function, caching marginals,
/// their commonality tables and earlier answers.
pub struct Checker {
    m: MassFunction,
    limits: Limits,
    cross_check: bool,
    marginals: HashMap<VariableSet, Marginal>,
    memo: HashMap<IndependenceQuery, IndependenceReport>,
}

impl Checker {
    pub fn new(m: &MassFunction, limits: &Limits) -> Self {
        Self {
            m: m.clone(),
            limits: *limits,
            cross_check: false,
            marginals: HashMap::new(),
            memo: HashMap::new(),
        }
    }

    /// Also runs the anticonditional-solver route for intrinsic queries and
    /// records its answer in the report.
    pub fn with_cross_check(mut self, on: bool) -> Self {
        self.cross_check = on;
        self
    }

    pub fn function(&self) -> &MassFunction {
        &self.m
    }

    pub fn marginal(&mut self, vars: &VariableSet) -> Result<MassFunction> {
        Ok(self.marginal_entry(vars)?.m.clone())
    }

    fn marginal_entry(&mut self, vars: &VariableSet) -> Result<&mut Marginal> {
        if !self.marginals.contains_key(vars) {
            let m = project(&self.m, vars)?;
            self.marginals
                .insert(vars.clone(), Marginal { m, table: None });
        }
        Ok(self.marginals.get_mut(vars).unwrap())
    }

    fn table(&mut self, vars: &VariableSet) -> Result<(MassFunction, Rc<Scaled>)> {
        let limits = self.limits;
        let entry = self.marginal_entry(vars)?;
        if entry.table.is_none() {
            limits.check_lattice(entry.m.frame().size())?;
            let ground = Ground::full(entry.m.frame().size());
            entry.table = Some(Rc::new(traced_commonality(&entry.m, &ground)));
        }
        Ok((entry.m.clone(), entry.table.clone().unwrap()))
    }

    pub fn query(&mut self, query: &IndependenceQuery) -> Result<IndependenceReport> {
        if let Some(hit) = self.memo.get(query) {
            return Ok(hit.clone());
        }
        validate(&self.m, query)?;
        let report = match query.method {
            Method::Unconditional => self.unconditional(query)?,
            Method::Shenoy => self.shenoy(query)?,
            Method::Intrinsic => self.intrinsic(query)?,
            Method::Cano => self.cano(query)?,
        };
        self.memo.insert(query.clone(), report.clone());
        Ok(report)
    }

    fn unconditional(&mut self, query: &IndependenceQuery) -> Result<IndependenceReport> {
        let joint = self.marginal(&query.q.union(&query.r))?;
        let left = self.marginal(&query.q)?;
        let right = self.marginal(&query.r)?;
        let product = combine(&left, &right)?.result;
        let holds = product == joint;
        let witness = if holds {
            Evidence::Factorization(FactorizationWitness {
                left,
                right,
                scale: Rational::from_integer(1.into()),
            })
        } else {
            Evidence::Violation(first_difference(&joint, &product))
        };
        Ok(IndependenceReport {
            query: query.clone(),
            verdict: Verdict::from_bool(holds),
            witness: Some(witness),
            diversity: joint.is_diverse(),
            cross_check: None,
        })
    }

    fn shenoy(&mut self, query: &IndependenceQuery) -> Result<IndependenceReport> {
        let vars = query.p.union(&query.q).union(&query.r);
        let (m, table) = self.table(&vars)?;
        let (verdict, witness) = factorize(&m, &table, &query.q, &query.r, &query.p)?;
        Ok(IndependenceReport {
            query: query.clone(),
            verdict,
            witness: Some(witness),
            diversity: m.is_diverse(),
            cross_check: None,
        })
    }

    fn intrinsic(&mut self, query: &IndependenceQuery) -> Result<IndependenceReport> {
        let vars = query.p.union(&query.q).union(&query.r);
        let m = self.marginal(&vars)?;
        if let Some(why) = undiverse_witness(&m) {
            return Ok(IndependenceReport {
                query: query.clone(),
                verdict: Verdict::False,
                witness: Some(Evidence::Violation(why)),
                diversity: false,
                cross_check: None,
            });
        }
        let mut report = self.shenoy(&IndependenceQuery {
            method: Method::Shenoy,
            ..query.clone()
        })?;
        report.query = query.clone();
        if self.cross_check {
            let given = query.p.union(&query.q);
            let constraint = Constraint::CompressiblyIndependentOf(query.q.clone());
            report.cross_check = Some(
                match anticonditional_solve(&m, &given, &constraint, &self.limits) {
                    Ok(SolveOutcome::Found(_)) => Verdict::True,
                    Ok(SolveOutcome::Infeasible(_)) | Err(Error::NoAnticonditional(_)) => {
                        Verdict::False
                    }
                    Ok(SolveOutcome::Unknown(_)) | Err(_) => Verdict::Unknown,
                },
            );
        }
        Ok(report)
    }

    fn cano(&mut self, query: &IndependenceQuery) -> Result<IndependenceReport> {
        let m = self.m.clone();
        let h = &query.p;
        let (verdict, witness) = match solve_cano(&m, h, h, true, &self.limits)? {
            SolveOutcome::Found(b) => (Verdict::True, Evidence::Conditional(b)),
            SolveOutcome::Infeasible(why) => (Verdict::False, Evidence::Violation(why)),
            SolveOutcome::Unknown(why) => (Verdict::Unknown, Evidence::Violation(why)),
        };
        Ok(IndependenceReport {
            query: query.clone(),
            verdict,
            witness: Some(witness),
            diversity: m.is_diverse(),
            cross_check: None,
        })
    }
}

fn first_difference(expected: &MassFunction, got: &MassFunction) -> String {
    let got = got
        .align_to(expected.frame())
        .unwrap_or_else(|_| got.clone());
    let mut sets: Vec<ConfigSet> = expected
        .focals()
        .chain(got.focals())
        .map(|(s, _)| s.clone())
        .collect();
    sets.sort_by_key(|s| s.to_vec());
    for s in sets {
        let (a, b) = (expected.mass(&s), got.mass(&s));
        if a != b {
            return format!(
                "mass at {} is {} but the product of marginals gives {}",
                expected.frame().format_set(&s),
                a,
                b
            );
        }
    }
    "functions differ".into()
}

/// Decides whether the commonality table factors as `f(A↓p∪q)·g(A↓p∪r)`.
///
/// Sets sharing both projections must share a value. Projection pairs `(b, c)`
/// are realized exactly when `b↓p = c↓p`, and for each such marginal `γ` the
/// realized pairs form a full product block, which must have rank at most one.
fn factorize(
    m: &MassFunction,
    table: &Scaled,
    q: &VariableSet,
    r: &VariableSet,
    p: &VariableSet,
) -> Result<(Verdict, Evidence)> {
    let frame = m.frame();
    let left_frame = Arc::new(frame.subframe(&p.union(q))?);
    let right_frame = Arc::new(frame.subframe(&p.union(r))?);
    let base_frame = frame.subframe(p)?;
    let left_of = project_masks(&bit_images(frame, &left_frame)?);
    let right_of = project_masks(&bit_images(frame, &right_frame)?);
    let base_bits = bit_images(&left_frame, &base_frame)?;

    let nums = &table.nums;
    let mut reps: HashMap<u64, usize> = HashMap::new();
    let mut order: Vec<usize> = Vec::new();
    for a in 1..nums.len() {
        let key = ((left_of[a] as u64) << 32) | right_of[a] as u64;
        match reps.get(&key) {
            Some(&rep) => {
                if nums[a] != nums[rep] {
                    return Ok((
                        Verdict::False,
                        Evidence::Violation(format!(
                            "commonality differs on {} and {}, which share both projections",
                            frame.format_set(&ConfigSet::Word(rep as u64)),
                            frame.format_set(&ConfigSet::Word(a as u64))
                        )),
                    ));
                }
            }
            None => {
                reps.insert(key, a);
                order.push(a);
            }
        }
    }

    let value = |b: u32, c: u32| -> &BigInt {
        static ZERO: std::sync::OnceLock<BigInt> = std::sync::OnceLock::new();
        reps.get(&(((b as u64) << 32) | c as u64))
            .map(|&a| &nums[a])
            .unwrap_or_else(|| ZERO.get_or_init(BigInt::zero))
    };
    let gamma = |b: u32| -> u32 {
        crate::lattice::MaskBits(b).fold(0, |acc, i| acc | base_bits[i as usize])
    };

    let mut refs: HashMap<u32, (u32, u32)> = HashMap::new();
    for &a in &order {
        if !nums[a].is_zero() {
            refs.entry(gamma(left_of[a]))
                .or_insert((left_of[a], right_of[a]));
        }
    }
    for &a in &order {
        let (b, c) = (left_of[a], right_of[a]);
        let Some(&(b0, c0)) = refs.get(&gamma(b)) else {
            continue;
        };
        let lhs = &nums[a] * value(b0, c0);
        let (row, col) = (value(b, c0), value(b0, c));
        if lhs != row * col {
            let kind = if row.is_zero() || col.is_zero() || nums[a].is_zero() {
                "zero pattern"
            } else {
                "cross ratio"
            };
            return Ok((
                Verdict::False,
                Evidence::Violation(format!(
                    "{kind} fails at {}: commonality {} against reference row and column",
                    frame.format_set(&ConfigSet::Word(a as u64)),
                    Rational::new(nums[a].clone(), table.denom.clone())
                )),
            ));
        }
    }

    let mut f = vec![Rational::zero(); 1 << left_frame.size()];
    let mut g = vec![Rational::zero(); 1 << right_frame.size()];
    for &a in &order {
        let (b, c) = (left_of[a], right_of[a]);
        let Some(&(b0, c0)) = refs.get(&gamma(b)) else {
            continue;
        };
        if c == c0 {
            f[b as usize] = Rational::new(nums[a].clone(), value(b0, c0).clone());
        }
        if b == b0 {
            g[c as usize] = Rational::new(nums[a].clone(), table.denom.clone());
        }
    }
    let (f, g) = (Scaled::from_rationals(&f), Scaled::from_rationals(&g));
    let limits = Limits {
        lattice_gate: usize::MAX,
        ..Limits::default()
    };
    let left_ground = Ground::full(left_frame.size());
    let right_ground = Ground::full(right_frame.size());
    let left = from_local_commonality(&left_frame, &left_ground, f, m.mode(), &limits)?;
    let right = from_local_commonality(&right_frame, &right_ground, g, m.mode(), &limits)?;

    let a0 = *order
        .iter()
        .find(|&&a| !nums[a].is_zero())
        .expect("a nonzero commonality");
    let q0 = Rational::new(nums[a0].clone(), table.denom.clone());
    let ql = left.q(&left_ground.global(left_of[a0]));
    let qr = right.q(&right_ground.global(right_of[a0]));
    let scale = q0 / (ql * qr);
    Ok((
        Verdict::True,
        Evidence::Factorization(FactorizationWitness { left, right, scale }),
    ))
}

/// For each configuration of `frame`, the bit of its image in `target`.
fn bit_images(frame: &Frame, target: &Frame) -> Result<Vec<u32>> {
    Ok(frame
        .projection_map(target)?
        .into_iter()
        .map(|t| 1u32 << t)
        .collect())
}

fn query(q: &VariableSet, r: &VariableSet, p: &VariableSet, method: Method) -> IndependenceQuery {
    IndependenceQuery {
        q: q.clone(),
        r: r.clone(),
        p: p.clone(),
        method,
    }
}

/// Whether the marginal on `a∪b` is the combination of the marginals on `a`
/// and on `b`.
pub fn independent_unconditional(
    m: &MassFunction,
    a: &VariableSet,
    b: &VariableSet,
    limits: &Limits,
) -> Result<IndependenceReport> {
    Checker::new(m, limits).query(&query(a, b, &VariableSet::empty(), Method::Unconditional))
}

/// Whether `q` and `r` are Shenoy-independent given `p`: the marginal on
/// `p∪q∪r` is a combination of pseudo-belief factors on `p∪q` and `p∪r`.
pub fn factorization_oracle(
    m: &MassFunction,
    q: &VariableSet,
    r: &VariableSet,
    p: &VariableSet,
    limits: &Limits,
) -> Result<IndependenceReport> {
    Checker::new(m, limits).query(&query(q, r, p, Method::Shenoy))
}

/// Diversity together with factorization; the anticonditional-solver route
/// is consulted as a cross-check.
pub fn intrinsic_independent(
    m: &MassFunction,
    q: &VariableSet,
    r: &VariableSet,
    p: &VariableSet,
    limits: &Limits,
) -> Result<IndependenceReport> {
    Checker::new(m, limits)
        .with_cross_check(true)
        .query(&query(q, r, p, Method::Intrinsic))
}

/// Whether `m = m↓h ⊕ β` for a proper `β` whose marginal on `h` is vacuous.
pub fn cano_conditional_exists(
    m: &MassFunction,
    h: &VariableSet,
    limits: &Limits,
) -> Result<IndependenceReport> {
    let empty = VariableSet::empty();
    Checker::new(m, limits).query(&query(&empty, &empty, h, Method::Cano))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::vacuous_extend;
    use crate::fixtures;

    fn vars(names: &[&str]) -> VariableSet {
        VariableSet::of(names.iter().copied())
    }

    fn bel12() -> MassFunction {
        combine(&fixtures::ex_cano_1(), &fixtures::ex_cano_2())
            .unwrap()
            .result
    }

    fn recombines(m: &MassFunction, w: &FactorizationWitness) -> bool {
        combine(&w.left, &w.right).unwrap().result == *m
    }

    #[test]
    fn combined_fixture_factorizes() {
        let m = bel12();
        let l = Limits::default();
        let rep =
            factorization_oracle(&m, &vars(&["Y"]), &vars(&["Z"]), &vars(&["X"]), &l).unwrap();
        assert_eq!(rep.verdict, Verdict::True);
        assert!(recombines(&m, rep.factorization().unwrap()));
        let rep =
            intrinsic_independent(&m, &vars(&["Y"]), &vars(&["Z"]), &vars(&["X"]), &l).unwrap();
        assert_eq!(rep.verdict, Verdict::True);
        assert!(rep.diversity);
        assert_eq!(rep.cross_check, Some(Verdict::True));
    }

    #[test]
    fn xor_does_not_factor_given_third() {
        let m = fixtures::ex_xor();
        let l = Limits::default();
        let rep =
            factorization_oracle(&m, &vars(&["X"]), &vars(&["Y"]), &vars(&["Z"]), &l).unwrap();
        assert_eq!(rep.verdict, Verdict::False, "{:?}", rep.witness);
        let rep = independent_unconditional(&m, &vars(&["X"]), &vars(&["Y"]), &l).unwrap();
        assert_eq!(rep.verdict, Verdict::True);
    }

    #[test]
    fn chain_factors_through_middle() {
        let m = fixtures::ex_chain();
        let l = Limits::default();
        let rep =
            factorization_oracle(&m, &vars(&["X"]), &vars(&["Y"]), &vars(&["Z"]), &l).unwrap();
        assert_eq!(rep.verdict, Verdict::True);
        let w = rep.factorization().unwrap();
        assert!(recombines(&m, w));
        let rep =
            intrinsic_independent(&m, &vars(&["X"]), &vars(&["Y"]), &vars(&["Z"]), &l).unwrap();
        assert_eq!(rep.verdict, Verdict::False);
        assert!(!rep.diversity);
    }

    #[test]
    fn square_is_not_unconditionally_independent() {
        let rep = independent_unconditional(
            &fixtures::ex_square(),
            &vars(&["X"]),
            &vars(&["Y"]),
            &Limits::default(),
        )
        .unwrap();
        assert_eq!(rep.verdict, Verdict::False);
        assert!(rep.violation().is_some());
    }

    #[test]
    fn product_of_marginals_is_independent() {
        let sq = fixtures::ex_square();
        let a = project(&sq, &vars(&["X"])).unwrap();
        let bel2 = fixtures::ex_cano_2();
        let b = project(&bel2, &vars(&["Z"])).unwrap();
        let big = Arc::new(sq.frame().union(bel2.frame()).unwrap());
        let m = combine(
            &vacuous_extend(&a, &big).unwrap(),
            &vacuous_extend(&b, &big).unwrap(),
        )
        .unwrap()
        .result;
        let rep = independent_unconditional(&m, &vars(&["X"]), &vars(&["Z"]), &Limits::default())
            .unwrap();
        assert!(rep.holds());
    }

    #[test]
    fn cano_verdicts() {
        let l = Limits::default();
        assert_eq!(
            cano_conditional_exists(&bel12(), &vars(&["X"]), &l)
                .unwrap()
                .verdict,
            Verdict::False
        );
        let vac = MassFunction::vacuous(bel12().frame().clone());
        assert_eq!(
            cano_conditional_exists(&vac, &vars(&["Y"]), &l)
                .unwrap()
                .verdict,
            Verdict::True
        );
    }

    #[test]
    fn symmetric_answers() {
        let m = bel12();
        let mut c = Checker::new(&m, &Limits::default());
        for (a, b, p) in [("Y", "Z", "X"), ("X", "Y", "Z"), ("X", "Z", "Y")] {
            let one = c
                .query(&query(
                    &vars(&[a]),
                    &vars(&[b]),
                    &vars(&[p]),
                    Method::Shenoy,
                ))
                .unwrap();
            let two = c
                .query(&query(
                    &vars(&[b]),
                    &vars(&[a]),
                    &vars(&[p]),
                    Method::Shenoy,
                ))
                .unwrap();
            assert_eq!(one.verdict, two.verdict);
        }
    }

    #[test]
    fn overlapping_sets_are_rejected() {
        let m = bel12();
        let err = factorization_oracle(
            &m,
            &vars(&["X"]),
            &vars(&["X"]),
            &vars(&[]),
            &Limits::default(),
        );
        assert!(matches!(err, Err(Error::InvalidQuery(_))));
    }
}
