//! Mass functions and the m / Bel / Pl / Q transform family.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::frame::{ConfigSet, EventSet, Frame};
use crate::lattice::{inv_superset_sums, superset_sums, Ground, Scaled};
use crate::rational::{abs, Rational};
use crate::Limits;

/// Which sum a mass function is scaled to make equal to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum NormMode {
    /// `Σ |m(A)| = 1`.
    #[default]
    AbsoluteSum,
    /// `Σ m(A) = 1`.
    SignedSum,
}

impl NormMode {
    fn total<'a>(self, masses: impl Iterator<Item = &'a Rational>) -> Rational {
        match self {
            NormMode::AbsoluteSum => masses.map(abs).sum(),
            NormMode::SignedSum => masses.sum(),
        }
    }
}

/// An unnormalized mass assignment: any rational weights on nonempty sets.
#[derive(Debug, Clone, PartialEq)]
pub struct MassAssignment {
    frame: Arc<Frame>,
    entries: BTreeMap<ConfigSet, Rational>,
}

impl MassAssignment {
    pub fn new(frame: Arc<Frame>) -> Self {
        Self {
            frame,
            entries: BTreeMap::new(),
        }
    }

    /// Adds `mass` to `set`. Masses on the empty set are rejected.
    pub fn add(&mut self, set: ConfigSet, mass: Rational) -> Result<()> {
        if set.is_empty() {
            if mass.is_zero() {
                return Ok(());
            }
            return Err(Error::EmptyFocal);
        }
        let slot = self.entries.entry(set).or_insert_with(Rational::zero);
        *slot += mass;
        Ok(())
    }

    /// Like [`add`](Self::add) but refuses a set that already has an entry.
    pub fn insert(&mut self, set: ConfigSet, mass: Rational) -> Result<()> {
        if self.entries.contains_key(&set) {
            return Err(Error::DuplicateFocal(self.frame.format_set(&set)));
        }
        self.add(set, mass)
    }

    pub fn frame(&self) -> &Arc<Frame> {
        &self.frame
    }

    pub fn entries(&self) -> impl Iterator<Item = (&ConfigSet, &Rational)> {
        self.entries.iter().filter(|(_, m)| !m.is_zero())
    }

    pub fn get(&self, set: &ConfigSet) -> Rational {
        self.entries
            .get(set)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn has_negative(&self) -> bool {
        self.entries.values().any(|m| m.is_negative())
    }

    /// Scales the assignment so the mode's sum is one and validates it as a
    /// (pseudo-)belief function.
    pub fn normalize(self, mode: NormMode, limits: &Limits) -> Result<MassFunction> {
        let mut focals: BTreeMap<ConfigSet, Rational> = self
            .entries
            .into_iter()
            .filter(|(_, m)| !m.is_zero())
            .collect();
        let total = mode.total(focals.values());
        if total.is_zero() {
            return Err(Error::NotNormalizable);
        }
        if !total.is_one() {
            for m in focals.values_mut() {
                *m /= &total;
            }
        }
        let mf = MassFunction {
            frame: self.frame,
            focals,
            mode,
        };
        if mf.focals.values().any(|m| m.is_negative()) {
            mf.check_pseudo(limits)?;
        }
        Ok(mf)
    }
}

/// A normalized belief or pseudo-belief function on a frame.
#[derive(Debug, Clone)]
pub struct MassFunction {
    frame: Arc<Frame>,
    focals: BTreeMap<ConfigSet, Rational>,
    mode: NormMode,
}

/// Point values of a function at one set.
#[derive(Debug, Clone, PartialEq)]
pub struct PointValues {
    pub bel: Rational,
    pub pl: Rational,
    /// Undefined on the empty set.
    pub q: Option<Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Classification {
    pub proper: bool,
    pub pseudo: bool,
    pub normal: bool,
    pub positive: bool,
    pub vacuous: bool,
    pub diverse: bool,
    pub probabilistic: bool,
}

impl MassFunction {
    /// Builds, normalizes and validates a function from `(set, mass)` pairs.
    pub fn new(
        frame: Arc<Frame>,
        entries: impl IntoIterator<Item = (ConfigSet, Rational)>,
        mode: NormMode,
    ) -> Result<Self> {
        Self::with_limits(frame, entries, mode, &Limits::default())
    }

    pub fn with_limits(
        frame: Arc<Frame>,
        entries: impl IntoIterator<Item = (ConfigSet, Rational)>,
        mode: NormMode,
        limits: &Limits,
    ) -> Result<Self> {
        let mut raw = MassAssignment::new(frame);
        for (set, mass) in entries {
            raw.insert(set, mass)?;
        }
        raw.normalize(mode, limits)
    }

    pub fn from_events(
        entries: impl IntoIterator<Item = (EventSet, Rational)>,
        mode: NormMode,
    ) -> Result<Self> {
        let mut frame: Option<Arc<Frame>> = None;
        let mut pairs = Vec::new();
        for (event, mass) in entries {
            match &frame {
                Some(f) if f != event.frame() => {
                    return Err(Error::IncompatibleFrames(
                        "events over different frames".into(),
                    ))
                }
                Some(_) => {}
                None => frame = Some(event.frame().clone()),
            }
            pairs.push((event.into_set(), mass));
        }
        let frame = frame.ok_or(Error::NotNormalizable)?;
        Self::new(frame, pairs, mode)
    }

    /// The function with the single focal set Ξ.
    pub fn vacuous(frame: Arc<Frame>) -> Self {
        let full = ConfigSet::full(frame.size());
        Self {
            frame,
            focals: BTreeMap::from([(full, Rational::one())]),
            mode: NormMode::AbsoluteSum,
        }
    }

    /// Point mass on a nonempty evidence set.
    pub fn categorical(event: &EventSet) -> Result<Self> {
        if event.is_empty() {
            return Err(Error::EmptyFocal);
        }
        Ok(Self {
            frame: event.frame().clone(),
            focals: BTreeMap::from([(event.set().clone(), Rational::one())]),
            mode: NormMode::AbsoluteSum,
        })
    }

    /// Wraps masses already known to be normalized in `mode` and valid.
    pub(crate) fn from_parts(
        frame: Arc<Frame>,
        focals: BTreeMap<ConfigSet, Rational>,
        mode: NormMode,
    ) -> Self {
        debug_assert!(focals.iter().all(|(s, m)| !s.is_empty() && !m.is_zero()));
        Self {
            frame,
            focals,
            mode,
        }
    }

    pub fn frame(&self) -> &Arc<Frame> {
        &self.frame
    }

    pub fn mode(&self) -> NormMode {
        self.mode
    }

    pub fn focals(&self) -> impl Iterator<Item = (&ConfigSet, &Rational)> {
        self.focals.iter()
    }

    pub fn focal_count(&self) -> usize {
        self.focals.len()
    }

    pub fn mass(&self, set: &ConfigSet) -> Rational {
        self.focals.get(set).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn universe_mass(&self) -> Rational {
        self.mass(&ConfigSet::full(self.frame.size()))
    }

    /// Focal sets with their masses as events, in canonical report order.
    pub fn focal_events(&self) -> Vec<(EventSet, Rational)> {
        let mut out: Vec<_> = self
            .focals
            .iter()
            .map(|(s, m)| (EventSet::new(self.frame.clone(), s.clone()), m.clone()))
            .collect();
        out.sort_by_key(|(e, _)| e.set().to_vec());
        out
    }

    pub fn to_assignment(&self) -> MassAssignment {
        MassAssignment {
            frame: self.frame.clone(),
            entries: self.focals.clone(),
        }
    }

    /// Union of the focal sets.
    pub fn support(&self) -> ConfigSet {
        self.focals
            .keys()
            .fold(ConfigSet::empty(self.frame.size()), |acc, f| acc.union(f))
    }

    pub fn is_proper(&self) -> bool {
        self.focals.values().all(|m| !m.is_negative())
    }

    pub fn signed_total(&self) -> Rational {
        self.focals.values().sum()
    }

    /// Rescales to the other normalization convention.
    pub fn renormalize(&self, mode: NormMode) -> Result<Self> {
        if mode == self.mode {
            return Ok(self.clone());
        }
        let total = mode.total(self.focals.values());
        if total.is_zero() {
            return Err(Error::NotNormalizable);
        }
        Ok(Self {
            frame: self.frame.clone(),
            focals: self
                .focals
                .iter()
                .map(|(s, m)| (s.clone(), m / &total))
                .collect(),
            mode,
        })
    }

    pub fn bel(&self, set: &ConfigSet) -> Rational {
        self.focals
            .iter()
            .filter(|(f, _)| f.is_subset(set))
            .map(|(_, m)| m)
            .sum()
    }

    /// Total mass of focal sets meeting `set`; equals `1 − Bel(Ξ∖A)` whenever
    /// the signed total is one.
    pub fn pl(&self, set: &ConfigSet) -> Rational {
        self.focals
            .iter()
            .filter(|(f, _)| !f.intersection(set).is_empty())
            .map(|(_, m)| m)
            .sum()
    }

    pub fn q(&self, set: &ConfigSet) -> Rational {
        self.focals
            .iter()
            .filter(|(f, _)| set.is_subset(f))
            .map(|(_, m)| m)
            .sum()
    }

    pub fn query(&self, event: &EventSet) -> Result<PointValues> {
        if event.frame() != &self.frame {
            return Err(Error::IncompatibleFrames(
                "query set is over another frame".into(),
            ));
        }
        let set = event.set();
        Ok(PointValues {
            bel: self.bel(set),
            pl: self.pl(set),
            q: (!set.is_empty()).then(|| self.q(set)),
        })
    }

    /// Commonality of every singleton, indexed by configuration.
    pub fn singleton_commonalities(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.frame.size()];
        for (f, m) in &self.focals {
            for c in f.iter() {
                out[c as usize] += m;
            }
        }
        out
    }

    pub fn is_diverse(&self) -> bool {
        self.singleton_commonalities().iter().all(|q| !q.is_zero())
    }

    pub fn is_vacuous(&self) -> bool {
        self.focals.len() == 1 && self.universe_mass().is_one()
    }

    pub fn classify(&self, limits: &Limits) -> Classification {
        let proper = self.is_proper();
        let positive = if proper {
            self.universe_mass().is_positive()
        } else if self.universe_mass().is_zero() {
            false
        } else {
            match commonality(self, limits) {
                Ok(table) => table.values_scaled().nums[1..]
                    .iter()
                    .all(|v| v.is_positive()),
                Err(_) => false,
            }
        };
        let pseudo = proper || self.check_pseudo(limits).is_ok();
        Classification {
            proper,
            pseudo,
            normal: self.signed_total().is_one(),
            positive,
            vacuous: self.is_vacuous(),
            diverse: self.is_diverse(),
            probabilistic: self.focals.keys().all(|f| f.len() == 1),
        }
    }

    /// Verifies `Q ≥ 0` on every nonempty set. Commonality vanishes outside
    /// the union of focal sets, so only that sub-lattice is scanned.
    fn check_pseudo(&self, limits: &Limits) -> Result<()> {
        let ground = Ground::of(self.frame.size(), &self.support());
        limits.check_lattice(ground.bits())?;
        let table = traced_commonality(self, &ground);
        if let Some(bad) = table.nums.iter().skip(1).position(|v| v.is_negative()) {
            let set = ground.global(bad as u32 + 1);
            return Err(Error::NotPseudoBelief(self.frame.format_set(&set)));
        }
        Ok(())
    }

    /// Same function over a frame listing the same variables in another order.
    pub fn align_to(&self, frame: &Arc<Frame>) -> Result<Self> {
        if &self.frame == frame {
            return Ok(self.clone());
        }
        if !self.frame.same_variables(frame) {
            return Err(Error::IncompatibleFrames(format!(
                "cannot align {} with {}",
                self.frame.variable_set(),
                frame.variable_set()
            )));
        }
        let map = self.frame.projection_map(frame)?;
        Ok(Self {
            frame: frame.clone(),
            focals: self
                .focals
                .iter()
                .map(|(s, m)| (s.map(&map, frame.size()), m.clone()))
                .collect(),
            mode: self.mode,
        })
    }

    /// Equality as normalized functions: same variables (any order) and equal
    /// focal maps after rescaling `other` to this function's mode.
    pub fn same_as(&self, other: &MassFunction) -> bool {
        let Ok(aligned) = other.align_to(&self.frame) else {
            return false;
        };
        match aligned.renormalize(self.mode) {
            Ok(o) => o.focals == self.focals,
            Err(_) => false,
        }
    }
}

impl PartialEq for MassFunction {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl fmt::Display for MassFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (event, m) in self.focal_events() {
            writeln!(f, "{} = {}", event, crate::rational::format_rational(&m))?;
        }
        Ok(())
    }
}

/// Commonality of `m` restricted to the nonempty subsets of `ground`.
/// Index 0 (the empty set) holds the total mass and is not a Q value.
pub(crate) fn traced_commonality(m: &MassFunction, ground: &Ground) -> Scaled {
    let len = ground.lattice_len();
    let traced: Vec<(usize, &Rational)> = m
        .focals()
        .map(|(f, v)| (ground.trace(f) as usize, v))
        .collect();
    let mut table = Scaled::from_entries(len, traced.iter().map(|(i, v)| (*i, *v)));
    superset_sums(&mut table.nums);
    table
}

/// Möbius inversion of a commonality table over `ground`, normalized in
/// `mode` and validated.
pub(crate) fn from_local_commonality(
    frame: &Arc<Frame>,
    ground: &Ground,
    mut table: Scaled,
    mode: NormMode,
    limits: &Limits,
) -> Result<MassFunction> {
    table.nums[0] = Zero::zero();
    inv_superset_sums(&mut table.nums);
    let mut raw = MassAssignment::new(frame.clone());
    for (mask, v) in table.nums.into_iter().enumerate().skip(1) {
        if !v.is_zero() {
            raw.add(
                ground.global(mask as u32),
                Rational::new(v, table.denom.clone()),
            )?;
        }
    }
    raw.normalize(mode, limits)
}

/// Dense commonality function over all nonempty subsets of a gated frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonalityTable {
    frame: Arc<Frame>,
    table: Scaled,
}

impl CommonalityTable {
    /// Builds a table from explicit values; `values[mask]` for every mask,
    /// index 0 ignored.
    pub fn from_values(frame: Arc<Frame>, values: &[Rational], limits: &Limits) -> Result<Self> {
        limits.check_lattice(frame.size())?;
        if values.len() != 1usize << frame.size() {
            return Err(Error::InvalidQuery(format!(
                "commonality table needs {} entries, got {}",
                1usize << frame.size(),
                values.len()
            )));
        }
        let mut table = Scaled::from_rationals(values);
        table.nums[0] = Zero::zero();
        Ok(Self { frame, table })
    }

    pub(crate) fn from_scaled(frame: Arc<Frame>, mut table: Scaled) -> Self {
        table.nums[0] = Zero::zero();
        Self { frame, table }
    }

    pub fn frame(&self) -> &Arc<Frame> {
        &self.frame
    }

    pub(crate) fn values_scaled(&self) -> &Scaled {
        &self.table
    }

    /// Q at a nonempty set.
    pub fn get(&self, set: &ConfigSet) -> Rational {
        let mask = set.word().expect("gated frames use word sets") as usize;
        self.table.value(mask)
    }

    pub fn at_mask(&self, mask: usize) -> Rational {
        self.table.value(mask)
    }

    pub fn len(&self) -> usize {
        self.table.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Nonempty sets with their Q values, in mask order.
    pub fn iter(&self) -> impl Iterator<Item = (ConfigSet, Rational)> + '_ {
        (1..self.table.len()).map(|m| (ConfigSet::Word(m as u64), self.table.value(m)))
    }

    pub fn all_nonnegative(&self) -> bool {
        self.table.nums[1..].iter().all(|v| !v.is_negative())
    }
}

/// Dense upward zeta transform of the masses.
pub fn commonality(m: &MassFunction, limits: &Limits) -> Result<CommonalityTable> {
    limits.check_lattice(m.frame().size())?;
    let ground = Ground::full(m.frame().size());
    Ok(CommonalityTable::from_scaled(
        m.frame().clone(),
        traced_commonality(m, &ground),
    ))
}

/// Möbius inversion of a commonality table. The result is unnormalized.
pub fn mass_from_commonality(q: &CommonalityTable) -> MassAssignment {
    let mut nums = q.table.nums.clone();
    inv_superset_sums(&mut nums);
    let frame = q.frame.clone();
    let entries = nums
        .into_iter()
        .enumerate()
        .skip(1)
        .filter(|(_, v)| !v.is_zero())
        .map(|(mask, v)| {
            (
                ConfigSet::Word(mask as u64),
                Rational::new(v, q.table.denom.clone()),
            )
        })
        .collect();
    MassAssignment { frame, entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{Variable, VariableSet};
    use crate::rational::{int, ratio};

    fn binary_xy() -> Arc<Frame> {
        Arc::new(
            Frame::new(vec![
                Variable::new("X", ["x1", "x2"]).unwrap(),
                Variable::new("Y", ["y1", "y2"]).unwrap(),
            ])
            .unwrap(),
        )
    }

    fn set(frame: &Arc<Frame>, tuples: &[[&str; 2]]) -> ConfigSet {
        let t: Vec<Vec<&str>> = tuples.iter().map(|t| t.to_vec()).collect();
        EventSet::from_tuples(frame.clone(), &t).unwrap().into_set()
    }

    /// The four three-element focal sets over binary X, Y, mass 1/4 each.
    fn square() -> MassFunction {
        let f = binary_xy();
        let all = [["x1", "y1"], ["x1", "y2"], ["x2", "y1"], ["x2", "y2"]];
        let entries = (0..4).map(|skip| {
            let members: Vec<[&str; 2]> = all
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != 3 - skip)
                .map(|(_, t)| *t)
                .collect();
            (set(&f, &members), ratio(1, 4))
        });
        MassFunction::new(f.clone(), entries, NormMode::AbsoluteSum).unwrap()
    }

    #[test]
    fn normalize_halves_masses() {
        let f = binary_xy();
        let mut raw = MassAssignment::new(f.clone());
        raw.add(set(&f, &[["x1", "y1"]]), int(1)).unwrap();
        raw.add(ConfigSet::full(4), int(1)).unwrap();
        let m = raw
            .normalize(NormMode::AbsoluteSum, &Limits::default())
            .unwrap();
        assert_eq!(m.universe_mass(), ratio(1, 2));
        assert_eq!(m.mass(&set(&f, &[["x1", "y1"]])), ratio(1, 2));
    }

    #[test]
    fn normalize_is_idempotent() {
        let m = square();
        let again = m
            .to_assignment()
            .normalize(NormMode::AbsoluteSum, &Limits::default())
            .unwrap();
        assert_eq!(again.focals().count(), 4);
        assert!(again.focals().zip(m.focals()).all(|(a, b)| a == b));
    }

    #[test]
    fn all_zero_is_not_normalizable() {
        let f = binary_xy();
        let mut raw = MassAssignment::new(f.clone());
        raw.add(ConfigSet::full(4), int(0)).unwrap();
        assert_eq!(
            raw.normalize(NormMode::AbsoluteSum, &Limits::default())
                .unwrap_err(),
            Error::NotNormalizable
        );
    }

    #[test]
    fn signed_masses_need_nonnegative_commonality() {
        let f = binary_xy();
        let bad = MassFunction::new(
            f.clone(),
            [
                (set(&f, &[["x1", "y1"]]), ratio(-2, 3)),
                (ConfigSet::full(4), ratio(1, 3)),
            ],
            NormMode::AbsoluteSum,
        );
        assert!(matches!(bad, Err(Error::NotPseudoBelief(_))));

        // every commonality is either 1 or 3/4 before scaling
        let ok = MassFunction::new(
            f.clone(),
            [
                (set(&f, &[["x1", "y1"], ["x1", "y2"]]), ratio(-1, 4)),
                (ConfigSet::full(4), int(1)),
            ],
            NormMode::SignedSum,
        )
        .unwrap();
        assert!(!ok.is_proper());
        assert_eq!(ok.universe_mass(), ratio(4, 3));
    }

    #[test]
    fn square_point_values() {
        let m = square();
        let f = m.frame().clone();
        let three = set(&f, &[["x1", "y1"], ["x1", "y2"], ["x2", "y1"]]);
        assert_eq!(m.bel(&three), ratio(1, 4));
        let single = EventSet::new(f.clone(), set(&f, &[["x1", "y1"]]));
        let pv = m.query(&single).unwrap();
        assert_eq!(pv.pl, ratio(3, 4));
        assert_eq!(pv.q, Some(ratio(3, 4)));
        assert_eq!(m.bel(&ConfigSet::full(4)), int(1));

        let q = commonality(&m, &Limits::default()).unwrap();
        assert_eq!(q.get(&set(&f, &[["x1", "y1"]])), ratio(3, 4));
    }

    #[test]
    fn vacuous_commonality_is_one() {
        let m = MassFunction::vacuous(binary_xy());
        let q = commonality(&m, &Limits::default()).unwrap();
        assert!(q.iter().all(|(_, v)| v == int(1)));
        let back = mass_from_commonality(&q)
            .normalize(NormMode::AbsoluteSum, &Limits::default())
            .unwrap();
        assert!(back.is_vacuous());
    }

    #[test]
    fn two_element_inversion() {
        let f = Arc::new(Frame::new(vec![Variable::new("X", ["x1", "x2"]).unwrap()]).unwrap());
        let q = CommonalityTable::from_values(
            f,
            &[int(0), ratio(1, 2), ratio(1, 2), int(0)],
            &Limits::default(),
        )
        .unwrap();
        let m = mass_from_commonality(&q);
        assert_eq!(m.get(&ConfigSet::Word(1)), ratio(1, 2));
        assert_eq!(m.get(&ConfigSet::Word(2)), ratio(1, 2));
        assert_eq!(m.get(&ConfigSet::Word(3)), int(0));
    }

    #[test]
    fn lattice_gate_enforced() {
        let vars = (0..5)
            .map(|i| Variable::new(format!("V{i}"), ["a", "b"]).unwrap())
            .collect();
        let f = Arc::new(Frame::new(vars).unwrap());
        let m = MassFunction::vacuous(f);
        assert!(matches!(
            commonality(&m, &Limits::default()),
            Err(Error::LatticeTooLarge { size: 32, gate: 20 })
        ));
    }

    #[test]
    fn classification_flags() {
        let m = square();
        let c = m.classify(&Limits::default());
        assert!(c.proper && c.pseudo && c.diverse && c.normal);
        assert!(!c.positive && !c.vacuous && !c.probabilistic);

        let v = MassFunction::vacuous(binary_xy()).classify(&Limits::default());
        assert!(v.vacuous && v.proper && v.positive && v.diverse);
    }

    #[test]
    fn modes_coincide_for_proper_functions() {
        let m = square();
        let s = m.renormalize(NormMode::SignedSum).unwrap();
        assert!(m
            .focals()
            .zip(s.focals())
            .all(|((a, x), (b, y))| a == b && x == y));
        assert_eq!(m, s);
    }

    #[test]
    fn alignment_permutes_variables() {
        let m = square();
        let yx = Arc::new(
            m.frame()
                .subframe(&VariableSet::of(["X", "Y"]))
                .map(|f| Frame::new(f.variables().iter().rev().cloned().collect()).unwrap())
                .unwrap(),
        );
        let aligned = m.align_to(&yx).unwrap();
        assert_ne!(aligned.frame(), m.frame());
        assert_eq!(aligned, m);
    }
}
