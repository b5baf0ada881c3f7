use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::calculus::{combine, project, vacuous_extend};
use crate::error::{Error, Result};
use crate::feasibility::{Feasibility, LinForm, LinearSystem};
use crate::frame::{ConfigSet, EventSet, Frame, VariableSet};
use crate::lattice::{inv_superset_sums, project_masks, Ground, Scaled};
use crate::massfun::{from_local_commonality, traced_commonality, MassAssignment, MassFunction};
use crate::rational::Rational;
use crate::Limits;

/// Extra requirement placed on the anticonditional sought by
/// [`anticonditional_solve`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    None,
    /// The member must be the vacuous extension of a function that does not
    /// mention these variables.
    CompressiblyIndependentOf(VariableSet),
    /// The member's marginal on these variables must be vacuous.
    CanoVacuousOn(VariableSet),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    Found(MassFunction),
    Infeasible(String),
    Unknown(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Compression {
    Compressed(MassFunction),
    NotCompressible,
}

/// Comparison of a function with one recombined set: masses and
/// commonalities on both sides.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualEntry {
    pub set: EventSet,
    pub expected_mass: Rational,
    pub recombined_mass: Rational,
    pub expected_q: Rational,
    pub recombined_q: Rational,
}

impl ResidualEntry {
    /// `recombined_q / expected_q`, absent when the expected value is zero.
    pub fn q_ratio(&self) -> Option<Rational> {
        (!self.expected_q.is_zero()).then(|| &self.recombined_q / &self.expected_q)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Residual {
    /// Conflict of the recombination, when it could be formed.
    pub conflict: Option<Rational>,
    /// Why recombination failed outright.
    pub failure: Option<String>,
    /// Every focal set of either side on which mass or commonality differs,
    /// in canonical order.
    pub entries: Vec<ResidualEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub valid: bool,
    pub residual: Residual,
}

fn cylinder_of_marginal(m: &MassFunction, p: &VariableSet) -> Result<MassFunction> {
    vacuous_extend(&project(m, p)?, m.frame())
}

fn check_subset(m: &MassFunction, vars: &VariableSet) -> Result<()> {
    let all = m.frame().variable_set();
    match vars.iter().find(|v| !all.contains(v)) {
        Some(v) => Err(Error::UnknownVariable(v.to_string())),
        None => Ok(()),
    }
}

/// Commonality of `m` and of its marginal cylinder on `p`, traced on the
/// support of that cylinder. Both vanish on every set leaving the support.
struct LocalTables {
    ground: Ground,
    q: Scaled,
    d: Scaled,
}

impl LocalTables {
    fn build(m: &MassFunction, p: &VariableSet, limits: &Limits) -> Result<Self> {
        check_subset(m, p)?;
        let cyl = cylinder_of_marginal(m, p)?;
        let ground = Ground::of(m.frame().size(), &cyl.support());
        limits.check_lattice(ground.bits())?;
        Ok(Self {
            q: traced_commonality(m, &ground),
            d: traced_commonality(&cyl, &ground),
            ground,
        })
    }

    /// `Q(A) / D(A)` where `D(A) ≠ 0`, `None` where both vanish, and an error
    /// where only the divisor does.
    fn ratio(&self, frame: &Frame, mask: usize) -> Result<Option<Rational>> {
        let d = &self.d.nums[mask];
        let q = &self.q.nums[mask];
        if d.is_zero() {
            if q.is_zero() {
                return Ok(None);
            }
            let set = self.ground.global(mask as u32);
            return Err(Error::NoAnticonditional(format!(
                "commonality is nonzero at {} while the marginal's is zero",
                frame.format_set(&set)
            )));
        }
        Ok(Some(Rational::new(q * &self.d.denom, d * &self.q.denom)))
    }
}

/// The zero-filled anticonditional of `m` given `p`.
pub fn anticonditional_canonical(
    m: &MassFunction,
    p: &VariableSet,
    limits: &Limits,
) -> Result<MassFunction> {
    let tables = LocalTables::build(m, p, limits)?;
    let len = tables.ground.lattice_len();
    let mut values = vec![Rational::zero(); len];
    for (mask, slot) in values.iter_mut().enumerate().skip(1) {
        if let Some(r) = tables.ratio(m.frame(), mask)? {
            *slot = r;
        }
    }
    let member = from_local_commonality(
        m.frame(),
        &tables.ground,
        Scaled::from_rationals(&values),
        m.mode(),
        limits,
    )
    .map_err(|e| match e {
        Error::NotPseudoBelief(set) => Error::NoCanonicalMember(set),
        other => other,
    })?;
    ensure_valid(m, p, member)
}

fn ensure_valid(m: &MassFunction, p: &VariableSet, member: MassFunction) -> Result<MassFunction> {
    let check = anticonditional_verify(m, p, &member)?;
    if check.valid {
        Ok(member)
    } else {
        Err(Error::NoAnticonditional(
            "the constructed member does not recombine to the function".into(),
        ))
    }
}

/// Recombines `candidate` with the marginal of `m` on `p` and compares the
/// result with `m`.
pub fn anticonditional_verify(
    m: &MassFunction,
    p: &VariableSet,
    candidate: &MassFunction,
) -> Result<Verification> {
    check_subset(m, p)?;
    let candidate = candidate.align_to(m.frame())?;
    let cyl = cylinder_of_marginal(m, p)?;
    let mut residual = Residual::default();
    let recombined = match combine(&cyl, &candidate) {
        Ok(out) => {
            residual.conflict = Some(out.conflict);
            out.result.renormalize(m.mode())?
        }
        Err(Error::TotalConflict) => {
            residual.failure = Some("recombination is totally conflicting".into());
            return Ok(Verification {
                valid: false,
                residual,
            });
        }
        Err(e) => return Err(e),
    };
    let mut sets: Vec<ConfigSet> = m
        .focals()
        .chain(recombined.focals())
        .map(|(s, _)| s.clone())
        .collect();
    sets.sort_by_key(|s| s.to_vec());
    sets.dedup();
    for set in sets {
        let entry = ResidualEntry {
            expected_mass: m.mass(&set),
            recombined_mass: recombined.mass(&set),
            expected_q: m.q(&set),
            recombined_q: recombined.q(&set),
            set: EventSet::new(m.frame().clone(), set),
        };
        if entry.expected_mass != entry.recombined_mass || entry.expected_q != entry.recombined_q {
            residual.entries.push(entry);
        }
    }
    Ok(Verification {
        valid: residual.entries.is_empty(),
        residual,
    })
}

/// Searches the anticonditional family of `m` given `p` for a member meeting
/// `constraint`.
pub fn anticonditional_solve(
    m: &MassFunction,
    p: &VariableSet,
    constraint: &Constraint,
    limits: &Limits,
) -> Result<SolveOutcome> {
    match constraint {
        Constraint::None => anticonditional_canonical(m, p, limits).map(SolveOutcome::Found),
        Constraint::CompressiblyIndependentOf(q) => solve_compressible(m, p, q, limits),
        Constraint::CanoVacuousOn(h) => solve_cano(m, p, h, false, limits),
    }
}

/// A member of the form `(Y)↑V` with `Y` over `V∖q` has commonality
/// `h(A↓V∖q)`. Wherever the marginal's commonality is nonzero `h` is pinned
/// to `Q/D`; elsewhere it is only bounded below by zero, so it can be set to
/// zero. The family is nonempty exactly when the pinned values agree on every
/// fiber of the compression.
fn solve_compressible(
    m: &MassFunction,
    p: &VariableSet,
    q: &VariableSet,
    limits: &Limits,
) -> Result<SolveOutcome> {
    check_subset(m, q)?;
    let frame = m.frame();
    let tables = LocalTables::build(m, p, limits)?;
    let kept = Arc::new(frame.subframe(&frame.variable_set().difference(q))?);
    let map = frame.projection_map(&kept)?;
    let ground_set = ConfigSet::from_indices(frame.size(), tables.ground.configs().iter().copied());
    let kept_ground = Ground::of(kept.size(), &ground_set.map(&map, kept.size()));
    let bits: Vec<u32> = tables
        .ground
        .configs()
        .iter()
        .map(|&c| kept_ground.trace(&ConfigSet::singleton(kept.size(), map[c as usize])))
        .collect();
    let image = project_masks(&bits);

    let mut pinned: Vec<Option<(Rational, usize)>> = vec![None; kept_ground.lattice_len()];
    for mask in 1..tables.ground.lattice_len() {
        let Some(value) = tables.ratio(frame, mask)? else {
            continue;
        };
        let slot = &mut pinned[image[mask] as usize];
        match slot {
            Some((v, first)) if *v != value => {
                let a = tables.ground.global(*first as u32);
                let b = tables.ground.global(mask as u32);
                return Ok(SolveOutcome::Infeasible(format!(
                    "{} and {} compress to the same set but need commonality {} and {}",
                    frame.format_set(&a),
                    frame.format_set(&b),
                    v,
                    value
                )));
            }
            Some(_) => {}
            None => *slot = Some((value, mask)),
        }
    }
    let values: Vec<Rational> = pinned
        .into_iter()
        .map(|s| s.map_or_else(Rational::zero, |(v, _)| v))
        .collect();
    let small = from_local_commonality(
        &kept,
        &kept_ground,
        Scaled::from_rationals(&values),
        m.mode(),
        limits,
    )?;
    let member = vacuous_extend(&small, frame)?;
    ensure_valid(m, p, member).map(SolveOutcome::Found)
}

/// Anticonditional given `p` whose marginal on `h` is vacuous, optionally
/// also proper. Unknowns are the commonalities the marginal leaves free;
/// masses and marginal masses are linear in them.
pub(crate) fn solve_cano(
    m: &MassFunction,
    p: &VariableSet,
    h: &VariableSet,
    proper: bool,
    limits: &Limits,
) -> Result<SolveOutcome> {
    check_subset(m, h)?;
    let frame = m.frame();
    limits.check_lattice(frame.size())?;
    let tables = LocalTables::build(m, p, limits)?;
    let full = Ground::full(frame.size());
    let len = full.lattice_len();
    let ground_mask: u32 = tables
        .ground
        .configs()
        .iter()
        .fold(0, |acc, &c| acc | (1 << c));
    let local_bits: Vec<u32> = (0..frame.size() as u32)
        .map(|c| {
            tables
                .ground
                .configs()
                .iter()
                .position(|&g| g == c)
                .map_or(0, |i| 1 << i)
        })
        .collect();
    let to_local = project_masks(&local_bits);

    let mut forms: Vec<LinForm> = vec![LinForm::default(); len];
    let mut free = 0usize;
    for mask in 1..len {
        if mask as u32 & !ground_mask != 0 {
            forms[mask] = LinForm::var(free);
            free += 1;
            continue;
        }
        match tables.ratio(frame, to_local[mask] as usize)? {
            Some(v) => forms[mask] = LinForm::constant(v),
            None => {
                forms[mask] = LinForm::var(free);
                free += 1;
            }
        }
        if free > limits.solver_cap {
            return Ok(SolveOutcome::Unknown(format!(
                "more than {} free commonality values",
                limits.solver_cap
            )));
        }
    }
    if free > limits.solver_cap {
        return Ok(SolveOutcome::Unknown(format!(
            "{free} free commonality values exceed the cap of {}",
            limits.solver_cap
        )));
    }

    let mut sys = LinearSystem::new(free);
    if !proper {
        for f in &forms[1..] {
            if f.terms.len() == 1 && f.constant.is_zero() {
                sys.inequalities.push(f.clone());
            }
        }
    }
    let masses = mobius_forms(forms);

    let target = Arc::new(frame.subframe(h)?);
    let map = frame.projection_map(&target)?;
    let bits: Vec<u32> = map.iter().map(|&t| 1u32 << t).collect();
    let image = project_masks(&bits);
    let full_target = (1usize << target.size()) - 1;
    let mut marginal: Vec<LinForm> = vec![LinForm::default(); full_target + 1];
    for mask in 1..len {
        if masses[mask].terms.is_empty() && masses[mask].constant.is_zero() {
            continue;
        }
        marginal[image[mask] as usize].add_scaled(&masses[mask], &Rational::from_integer(1.into()));
    }
    for (g, form) in marginal.into_iter().enumerate().skip(1) {
        if g != full_target {
            sys.equalities.push(form);
        }
    }
    if proper {
        for f in &masses[1..] {
            if !(f.terms.is_empty() && !f.constant.is_negative()) {
                sys.inequalities.push(f.clone());
            }
        }
    }

    let values = match sys.solve(limits.solver_cap, limits.fm_row_limit) {
        Feasibility::Feasible(v) => v,
        Feasibility::Infeasible(why) => return Ok(SolveOutcome::Infeasible(why)),
        Feasibility::Unknown(why) => return Ok(SolveOutcome::Unknown(why)),
    };
    let mut raw = MassAssignment::new(frame.clone());
    for (mask, form) in masses.iter().enumerate().skip(1) {
        let v = form.eval(&values);
        if !v.is_zero() {
            raw.add(full.global(mask as u32), v)?;
        }
    }
    let member = raw.normalize(m.mode(), limits)?;
    ensure_valid(m, p, member).map(SolveOutcome::Found)
}

/// Möbius inversion over linear forms; constant tables take the integer path.
fn mobius_forms(forms: Vec<LinForm>) -> Vec<LinForm> {
    if forms.iter().all(|f| f.terms.is_empty()) {
        let consts: Vec<Rational> = forms.iter().map(|f| f.constant.clone()).collect();
        let mut table = Scaled::from_rationals(&consts);
        table.nums[0] = BigInt::zero();
        inv_superset_sums(&mut table.nums);
        return table
            .nums
            .into_iter()
            .map(|n| LinForm::constant(Rational::new(n, table.denom.clone())))
            .collect();
    }
    let mut xs = forms;
    xs[0] = LinForm::default();
    let len = xs.len();
    let minus_one = -Rational::from_integer(1.into());
    let mut e = 1;
    while e < len {
        for block in (0..len).step_by(2 * e) {
            for i in block..block + e {
                let (lo, hi) = xs.split_at_mut(i + e);
                lo[i].add_scaled(&hi[0], &minus_one);
            }
        }
        e *= 2;
    }
    xs
}

/// `(m↓V∖p)↑V` when it equals `m`.
pub fn compress(m: &MassFunction, p: &VariableSet) -> Result<Compression> {
    check_subset(m, p)?;
    let kept = m.frame().variable_set().difference(p);
    let small = project(m, &kept)?;
    let back = vacuous_extend(&small, m.frame())?;
    Ok(if back == *m {
        Compression::Compressed(small)
    } else {
        Compression::NotCompressible
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::int;

    fn vars(names: &[&str]) -> VariableSet {
        VariableSet::of(names.iter().copied())
    }

    #[test]
    fn diagonal_is_its_own_canonical_member() {
        let diag = fixtures::ex_diag();
        let member =
            anticonditional_canonical(&diag, &vars(&["Y", "Z"]), &Limits::default()).unwrap();
        assert_eq!(member, diag);
    }

    #[test]
    fn conditioning_on_nothing_returns_the_function() {
        let m = fixtures::ex_square();
        let member =
            anticonditional_canonical(&m, &VariableSet::empty(), &Limits::default()).unwrap();
        assert_eq!(member, m);
    }

    #[test]
    fn nine_configuration_candidate() {
        let diag = fixtures::ex_diag();
        let cand = fixtures::ex_diag_candidate();
        let check = anticonditional_verify(&diag, &vars(&["Y", "Z"]), &cand).unwrap();
        assert!(check.valid, "{:?}", check.residual);
        match compress(&cand, &vars(&["Z"])).unwrap() {
            Compression::Compressed(small) => assert_eq!(small, fixtures::ex_diag_compressed()),
            Compression::NotCompressible => panic!("candidate should compress"),
        }
    }

    #[test]
    fn compressible_member_found_for_diagonal() {
        let diag = fixtures::ex_diag();
        let out = anticonditional_solve(
            &diag,
            &vars(&["Y", "Z"]),
            &Constraint::CompressiblyIndependentOf(vars(&["Z"])),
            &Limits::default(),
        )
        .unwrap();
        let SolveOutcome::Found(member) = out else {
            panic!("{out:?}")
        };
        assert!(matches!(
            compress(&member, &vars(&["Z"])).unwrap(),
            Compression::Compressed(_)
        ));
        assert_eq!(member, fixtures::ex_diag_candidate());
    }

    #[test]
    fn diagonal_does_not_compress() {
        let diag = fixtures::ex_diag();
        for v in ["X", "Y", "Z"] {
            assert_eq!(
                compress(&diag, &vars(&[v])).unwrap(),
                Compression::NotCompressible
            );
        }
    }

    #[test]
    fn vacuous_compresses_anywhere() {
        let m = MassFunction::vacuous(fixtures::ex_diag().frame().clone());
        assert!(matches!(
            compress(&m, &vars(&["X", "Z"])).unwrap(),
            Compression::Compressed(_)
        ));
    }

    #[test]
    fn two_candidates_are_checked() {
        let m = fixtures::ex_twocond();
        for cand in [fixtures::ex_twocond_first(), fixtures::ex_twocond_second()] {
            let a = anticonditional_verify(&m, &vars(&["Y"]), &cand).unwrap();
            let b = anticonditional_verify(&m, &vars(&["Y"]), &cand).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.valid, a.residual.entries.is_empty());
        }
    }

    #[test]
    fn combined_fixture_member_is_vacuous_but_improper() {
        let m = combine(&fixtures::ex_cano_1(), &fixtures::ex_cano_2())
            .unwrap()
            .result;
        let x = vars(&["X"]);
        let l = Limits::default();
        let out = anticonditional_solve(&m, &x, &Constraint::CanoVacuousOn(x.clone()), &l).unwrap();
        let SolveOutcome::Found(member) = out else {
            panic!("{out:?}")
        };
        assert_eq!(member, anticonditional_canonical(&m, &x, &l).unwrap());
        assert!(project(&member, &x).unwrap().is_vacuous());
        assert!(!member.is_proper());
        let proper = solve_cano(&m, &x, &x, true, &l).unwrap();
        assert!(matches!(proper, SolveOutcome::Infeasible(_)), "{proper:?}");
    }

    #[test]
    fn cano_holds_for_vacuous() {
        let m = MassFunction::vacuous(fixtures::ex_square().frame().clone());
        let out = solve_cano(&m, &vars(&["X"]), &vars(&["X"]), true, &Limits::default()).unwrap();
        let SolveOutcome::Found(b) = out else {
            panic!()
        };
        assert!(b.is_vacuous());
    }

    #[test]
    fn positive_functions_have_unique_members() {
        let m = combine(&fixtures::ex_cano_1(), &fixtures::ex_cano_2())
            .unwrap()
            .result;
        let member = anticonditional_canonical(&m, &vars(&["X"]), &Limits::default()).unwrap();
        let cyl = cylinder_of_marginal(&m, &vars(&["X"])).unwrap();
        assert_eq!(combine(&cyl, &member).unwrap().result, m);
        assert!(member.mass(&ConfigSet::full(8)) > int(0));
    }
}
