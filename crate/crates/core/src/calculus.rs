//! Dempster combination, marginalization, vacuous extension, Shafer
//! conditioning and commonality removal.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::frame::{ConfigSet, EventSet, Frame, VariableSet};
use crate::lattice::{inv_superset_sums, Ground, Scaled};
use crate::massfun::{
    traced_commonality, CommonalityTable, MassAssignment, MassFunction, NormMode,
};
use crate::rational::Rational;
use crate::Limits;

/// A combined function together with the mass that fell on the empty set.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinationOutcome {
    pub result: MassFunction,
    pub conflict: Rational,
}

/// Which evaluation strategy [`combine_with`] should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineRoute {
    /// Pick by estimated cost.
    Auto,
    /// Pairwise intersection of focal sets.
    Convolution,
    /// Pointwise product of commonalities followed by Möbius inversion.
    CommonalityProduct,
}

pub fn combine(m1: &MassFunction, m2: &MassFunction) -> Result<CombinationOutcome> {
    combine_with(m1, m2, CombineRoute::Auto, &Limits::default())
}

/// Dempster's rule. Functions over different variables are first lifted to
/// the union frame. The result takes `m1`'s normalization mode.
pub fn combine_with(
    m1: &MassFunction,
    m2: &MassFunction,
    route: CombineRoute,
    limits: &Limits,
) -> Result<CombinationOutcome> {
    let (a, b) = common_frame(m1, m2)?;
    let frame = a.frame().clone();
    let support = a.support().intersection(&b.support());
    let ground = Ground::of(frame.size(), &support);
    let dense_ok = ground.bits() <= limits.lattice_gate;
    let use_dense = match route {
        CombineRoute::Convolution => false,
        CombineRoute::CommonalityProduct => {
            limits.check_lattice(ground.bits())?;
            true
        }
        CombineRoute::Auto => {
            let pairs = a.focal_count() * b.focal_count();
            let g = ground.bits();
            dense_ok && pairs.saturating_mul(8) > (g + 1) << g
        }
    };
    let (entries, conflict, denom) = if use_dense {
        product_route(&a, &b, &ground)
    } else {
        convolution_route(&a, &b)
    };
    let conflict = Rational::new(conflict, denom.clone());
    let trusted = a.is_proper() && b.is_proper();
    let result = finish(frame, entries, m1.mode(), trusted).map_err(|e| match e {
        Error::NotNormalizable => Error::TotalConflict,
        other => other,
    })?;
    Ok(CombinationOutcome { result, conflict })
}

fn common_frame(m1: &MassFunction, m2: &MassFunction) -> Result<(MassFunction, MassFunction)> {
    if m1.frame() == m2.frame() {
        return Ok((m1.clone(), m2.clone()));
    }
    let union = Arc::new(m1.frame().union(m2.frame())?);
    Ok((vacuous_extend(m1, &union)?, vacuous_extend(m2, &union)?))
}

/// Masses over one common denominator.
fn scaled_masses(m: &MassFunction) -> (Vec<(&ConfigSet, BigInt)>, BigInt) {
    let denom = m
        .focals()
        .fold(BigInt::one(), |acc, (_, v)| acc.lcm(v.denom()));
    let entries = m
        .focals()
        .map(|(s, v)| (s, v.numer() * (&denom / v.denom())))
        .collect();
    (entries, denom)
}

type Unnormalized = (Vec<(ConfigSet, BigInt)>, BigInt, BigInt);

fn convolution_route(a: &MassFunction, b: &MassFunction) -> Unnormalized {
    let (xs, dx) = scaled_masses(a);
    let (ys, dy) = scaled_masses(b);
    let mut acc: HashMap<ConfigSet, BigInt> = HashMap::new();
    let mut conflict = BigInt::zero();
    for (s1, v1) in &xs {
        for (s2, v2) in &ys {
            let meet = s1.intersection(s2);
            let product = v1 * v2;
            if meet.is_empty() {
                conflict += product;
            } else {
                *acc.entry(meet).or_default() += product;
            }
        }
    }
    (acc.into_iter().collect(), conflict, dx * dy)
}

fn product_route(a: &MassFunction, b: &MassFunction, ground: &Ground) -> Unnormalized {
    let qa = traced_commonality(a, ground);
    let qb = traced_commonality(b, ground);
    let mut nums: Vec<BigInt> = qa.nums.iter().zip(&qb.nums).map(|(x, y)| x * y).collect();
    inv_superset_sums(&mut nums);
    let conflict = std::mem::take(&mut nums[0]);
    let entries = nums
        .into_iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(mask, v)| (ground.global(mask as u32), v))
        .collect();
    (entries, conflict, qa.denom * qb.denom)
}

/// Normalizes integer masses over `denom` in `mode`. Untrusted inputs that
/// carry negative masses are checked for nonnegative commonality.
fn finish(
    frame: Arc<Frame>,
    entries: Vec<(ConfigSet, BigInt)>,
    mode: NormMode,
    trusted: bool,
) -> Result<MassFunction> {
    let entries: Vec<_> = entries.into_iter().filter(|(_, v)| !v.is_zero()).collect();
    let total: BigInt = match mode {
        NormMode::AbsoluteSum => entries.iter().map(|(_, v)| v.abs()).sum(),
        NormMode::SignedSum => entries.iter().map(|(_, v)| v).sum(),
    };
    if total.is_zero() {
        return Err(Error::NotNormalizable);
    }
    let negative = entries.iter().any(|(_, v)| v.is_negative());
    if trusted || !negative {
        let focals: BTreeMap<ConfigSet, Rational> = entries
            .into_iter()
            .map(|(s, v)| (s, Rational::new(v, total.clone())))
            .collect();
        return Ok(MassFunction::from_parts(frame, focals, mode));
    }
    let mut raw = MassAssignment::new(frame);
    for (s, v) in entries {
        raw.add(s, Rational::new(v, total.clone()))?;
    }
    raw.normalize(mode, &Limits::default())
}

/// Marginal of `m` on the variables `onto`, over the spanned subframe.
pub fn project(m: &MassFunction, onto: &VariableSet) -> Result<MassFunction> {
    let frame = m.frame();
    if onto == &frame.variable_set() {
        return Ok(m.clone());
    }
    let target = Arc::new(frame.subframe(onto)?);
    let map = frame.projection_map(&target)?;
    let (xs, _) = scaled_masses(m);
    let mut acc: HashMap<ConfigSet, BigInt> = HashMap::new();
    for (s, v) in xs {
        *acc.entry(s.map(&map, target.size())).or_default() += v;
    }
    finish(target, acc.into_iter().collect(), m.mode(), m.is_proper())
}

/// Cylinder extension of every focal set to `target`, whose variables must
/// include those of `m` with the same domains.
pub fn vacuous_extend(m: &MassFunction, target: &Arc<Frame>) -> Result<MassFunction> {
    if m.frame() == target {
        return Ok(m.clone());
    }
    if !target.contains_frame(m.frame()) {
        return Err(Error::IncompatibleFrames(format!(
            "{} is not a superframe of {}",
            target.variable_set(),
            m.frame().variable_set()
        )));
    }
    let map = target.projection_map(m.frame())?;
    let focals = m
        .focals()
        .map(|(s, v)| (s.preimage(&map), v.clone()))
        .collect();
    Ok(MassFunction::from_parts(target.clone(), focals, m.mode()))
}

/// Extension onto the frame obtained by adding `extra`'s variables.
pub fn vacuous_extend_by(m: &MassFunction, extra: &Frame) -> Result<MassFunction> {
    let target = Arc::new(m.frame().union(extra)?);
    vacuous_extend(m, &target)
}

/// Shafer conditioning on the evidence `event`.
pub fn condition_shafer(m: &MassFunction, event: &EventSet) -> Result<CombinationOutcome> {
    if event.is_empty() {
        return Err(Error::EmptyFocal);
    }
    let evidence = MassFunction::categorical(event)?;
    combine_with(m, &evidence, CombineRoute::Convolution, &Limits::default())
}

/// Normalized pointwise quotient `σ/ρ` over the sets where `ρ > 0`, zero
/// elsewhere, scaled by the alternating sum `K`.
pub fn remove_shenoy(sigma: &CommonalityTable, rho: &CommonalityTable) -> Result<CommonalityTable> {
    if sigma.frame() != rho.frame() {
        return Err(Error::IncompatibleFrames(
            "removal needs tables over one frame".into(),
        ));
    }
    let (s, r) = (sigma.values_scaled(), rho.values_scaled());
    let len = s.len();
    let mut quotients = vec![Rational::zero(); len];
    let mut k = Rational::zero();
    for mask in 1..len {
        if r.nums[mask].is_positive() {
            let q = Rational::new(&s.nums[mask] * &r.denom, &r.nums[mask] * &s.denom);
            if mask.count_ones() % 2 == 1 {
                k += &q;
            } else {
                k -= &q;
            }
            quotients[mask] = q;
        }
    }
    if !k.is_positive() {
        return Err(Error::RemovalUndefined(k));
    }
    for q in quotients.iter_mut().skip(1) {
        if !q.is_zero() {
            *q /= &k;
        }
    }
    let table = Scaled::from_rationals(&quotients);
    Ok(CommonalityTable::from_scaled(sigma.frame().clone(), table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Variable;
    use crate::massfun::commonality;
    use crate::rational::{int, ratio};

    fn frame(vars: &[(&str, &[&str])]) -> Arc<Frame> {
        Arc::new(
            Frame::new(
                vars.iter()
                    .map(|(n, d)| Variable::new(*n, d.iter().copied()).unwrap())
                    .collect(),
            )
            .unwrap(),
        )
    }

    fn xy() -> Arc<Frame> {
        frame(&[("X", &["x1", "x2"]), ("Y", &["y1", "y2"])])
    }

    fn set(f: &Arc<Frame>, tuples: &[&[&str]]) -> ConfigSet {
        let t: Vec<Vec<&str>> = tuples.iter().map(|t| t.to_vec()).collect();
        EventSet::from_tuples(f.clone(), &t).unwrap().into_set()
    }

    fn square() -> MassFunction {
        let f = xy();
        let all: [&[&str]; 4] = [&["x1", "y1"], &["x1", "y2"], &["x2", "y1"], &["x2", "y2"]];
        let entries = (0..4).map(|skip| {
            let members: Vec<&[&str]> = (0..4).filter(|i| *i != skip).map(|i| all[i]).collect();
            (set(&f, &members), ratio(1, 4))
        });
        MassFunction::new(f.clone(), entries, NormMode::AbsoluteSum).unwrap()
    }

    #[test]
    fn vacuous_is_identity() {
        let m = square();
        let out = combine(&MassFunction::vacuous(xy()), &m).unwrap();
        assert_eq!(out.conflict, int(0));
        assert_eq!(out.result, m);
    }

    #[test]
    fn disjoint_singletons_conflict_totally() {
        let f = xy();
        let a = MassFunction::new(
            f.clone(),
            [(set(&f, &[&["x1", "y1"]]), int(1))],
            NormMode::AbsoluteSum,
        )
        .unwrap();
        let b = MassFunction::new(
            f.clone(),
            [(set(&f, &[&["x2", "y2"]]), int(1))],
            NormMode::AbsoluteSum,
        )
        .unwrap();
        assert_eq!(combine(&a, &b).unwrap_err(), Error::TotalConflict);
        assert_eq!(
            combine_with(&a, &b, CombineRoute::CommonalityProduct, &Limits::default()).unwrap_err(),
            Error::TotalConflict
        );
    }

    #[test]
    fn routes_agree_on_square() {
        let m = square();
        let f = m.frame().clone();
        let other = MassFunction::new(
            f.clone(),
            [
                (set(&f, &[&["x1", "y1"], &["x2", "y2"]]), ratio(1, 3)),
                (set(&f, &[&["x2", "y1"]]), ratio(1, 3)),
                (ConfigSet::full(4), ratio(1, 3)),
            ],
            NormMode::AbsoluteSum,
        )
        .unwrap();
        let limits = Limits::default();
        let a = combine_with(&m, &other, CombineRoute::Convolution, &limits).unwrap();
        let b = combine_with(&m, &other, CombineRoute::CommonalityProduct, &limits).unwrap();
        assert_eq!(a.conflict, b.conflict);
        assert_eq!(a.result, b.result);
    }

    #[test]
    fn square_marginal_is_vacuous() {
        let m = square();
        let y = project(&m, &VariableSet::of(["Y"])).unwrap();
        assert!(y.is_vacuous());
        assert_eq!(project(&m, &VariableSet::of(["X", "Y"])).unwrap(), m);
    }

    #[test]
    fn projection_onto_nothing_is_unit() {
        let m = square();
        let unit = project(&m, &VariableSet::empty()).unwrap();
        assert_eq!(unit.frame().size(), 1);
        assert!(unit.is_vacuous());
    }

    #[test]
    fn square_conditioned_on_row() {
        let m = square();
        let f = m.frame().clone();
        for x in ["x1", "x2"] {
            let evidence = EventSet::cylinder(f.clone(), "X", x).unwrap();
            let out = condition_shafer(&m, &evidence).unwrap();
            assert_eq!(out.conflict, int(0));
            let y = project(&out.result, &VariableSet::of(["Y"])).unwrap();
            let yf = y.frame().clone();
            assert_eq!(y.universe_mass(), ratio(1, 2));
            assert_eq!(y.mass(&set(&yf, &[&["y1"]])), ratio(1, 4));
            assert_eq!(y.mass(&set(&yf, &[&["y2"]])), ratio(1, 4));
        }
    }

    #[test]
    fn extension_then_projection_round_trips() {
        let m = square();
        let big = Arc::new(
            m.frame()
                .union(&frame(&[("Z", &["z1", "z2", "z3"])]))
                .unwrap(),
        );
        let up = vacuous_extend(&m, &big).unwrap();
        assert_eq!(up.frame().size(), 12);
        assert_eq!(project(&up, &VariableSet::of(["X", "Y"])).unwrap(), m);
        assert!(vacuous_extend(&MassFunction::vacuous(xy()), &big)
            .unwrap()
            .is_vacuous());
    }

    #[test]
    fn mismatched_frames_are_lifted() {
        let fx = frame(&[("X", &["x1", "x2"])]);
        let fy = frame(&[("Y", &["y1", "y2"])]);
        let a = MassFunction::new(
            fx.clone(),
            [(ConfigSet::Word(1), int(1))],
            NormMode::AbsoluteSum,
        )
        .unwrap();
        let b = MassFunction::new(
            fy.clone(),
            [(ConfigSet::Word(2), int(1))],
            NormMode::AbsoluteSum,
        )
        .unwrap();
        let out = combine(&a, &b).unwrap();
        assert_eq!(
            out.result.frame().variable_set(),
            VariableSet::of(["X", "Y"])
        );
        assert_eq!(out.result.focal_count(), 1);
        let only = out.result.focals().next().unwrap().0.clone();
        assert_eq!(out.result.frame().format_set(&only), "{ (x1 y2) }");
    }

    #[test]
    fn removal_of_itself_is_vacuous() {
        let mut raw = square().to_assignment();
        raw.add(ConfigSet::full(4), int(1)).unwrap();
        let sigma = raw
            .normalize(NormMode::SignedSum, &Limits::default())
            .unwrap();
        let q = commonality(&sigma, &Limits::default()).unwrap();
        let out = remove_shenoy(&q, &q).unwrap();
        assert!(out.iter().all(|(_, v)| v == int(1)));
        let vac = commonality(&MassFunction::vacuous(xy()), &Limits::default()).unwrap();
        assert_eq!(remove_shenoy(&q, &vac).unwrap(), q);
    }

    #[test]
    fn removal_needs_positive_k() {
        let f = frame(&[("X", &["x1", "x2"])]);
        let sigma = CommonalityTable::from_values(
            f.clone(),
            &[int(0), int(0), int(0), int(1)],
            &Limits::default(),
        )
        .unwrap();
        assert!(matches!(
            remove_shenoy(&sigma, &sigma),
            Err(Error::RemovalUndefined(_))
        ));
    }
}
