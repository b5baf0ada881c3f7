//! Exact rational feasibility for small linear systems: Gaussian elimination
//! of equalities, sign-based presolve, then Fourier-Motzkin elimination of
//! the remaining inequalities with back-substitution of a witness point.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};

use crate::rational::Rational;

/// `Σ coef·x + constant`, with no zero coefficients stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub(crate) struct LinForm {
    pub terms: BTreeMap<usize, Rational>,
    pub constant: Rational,
}

impl LinForm {
    pub fn constant(c: Rational) -> Self {
        Self {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(i: usize) -> Self {
        let mut f = Self::default();
        f.add_term(i, Rational::from_integer(1.into()));
        f
    }

    pub fn add_term(&mut self, i: usize, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(i).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&i);
        }
    }

    /// `self += k · other`.
    pub fn add_scaled(&mut self, other: &LinForm, k: &Rational) {
        if k.is_zero() {
            return;
        }
        for (&i, c) in &other.terms {
            self.add_term(i, c * k);
        }
        self.constant += &other.constant * k;
    }

    pub fn coef(&self, i: usize) -> Option<&Rational> {
        self.terms.get(&i)
    }

    pub fn eval(&self, values: &[Rational]) -> Rational {
        self.terms
            .iter()
            .fold(self.constant.clone(), |acc, (&i, c)| acc + c * &values[i])
    }

    /// Replaces `x_i` by `expr`.
    fn substitute(&mut self, i: usize, expr: &LinForm) {
        if let Some(c) = self.terms.remove(&i) {
            self.add_scaled(expr, &c);
        }
    }

    /// Positive rescaling making the largest coefficient magnitude one, so
    /// equivalent inequalities compare equal.
    fn normalized(mut self) -> Self {
        let Some(scale) = self.terms.values().map(|c| c.abs()).max() else {
            return self;
        };
        for c in self.terms.values_mut() {
            *c /= &scale;
        }
        self.constant /= &scale;
        self
    }
}

/// Equalities `form = 0` and inequalities `form ≥ 0` over `vars` unknowns.
#[derive(Debug, Clone, Default)]
pub(crate) struct LinearSystem {
    pub vars: usize,
    pub equalities: Vec<LinForm>,
    pub inequalities: Vec<LinForm>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Feasibility {
    Feasible(Vec<Rational>),
    Infeasible(String),
    Unknown(String),
}

/// Bounds on one variable, kept for back-substitution.
struct Stage {
    var: usize,
    rows: Vec<LinForm>,
}

impl LinearSystem {
    pub fn new(vars: usize) -> Self {
        Self {
            vars,
            ..Self::default()
        }
    }

    pub fn solve(&self, cap: usize, row_limit: usize) -> Feasibility {
        let mut subst: Vec<(usize, LinForm)> = Vec::new();
        for eq in &self.equalities {
            let mut row = eq.clone();
            for (v, expr) in &subst {
                row.substitute(*v, expr);
            }
            let Some((&pivot, coef)) = row.terms.iter().next() else {
                if row.constant.is_zero() {
                    continue;
                }
                return Feasibility::Infeasible(format!(
                    "equalities reduce to {} = 0",
                    row.constant
                ));
            };
            let coef = coef.clone();
            row.terms.remove(&pivot);
            let mut expr = LinForm::default();
            expr.add_scaled(&row, &(-Rational::from_integer(1.into()) / coef));
            for (_, e) in subst.iter_mut() {
                e.substitute(pivot, &expr);
            }
            subst.push((pivot, expr));
        }

        let mut rows: BTreeSet<LinForm> = BTreeSet::new();
        for ineq in &self.inequalities {
            let mut row = ineq.clone();
            for (v, expr) in &subst {
                row.substitute(*v, expr);
            }
            if row.terms.is_empty() {
                if row.constant.is_negative() {
                    return Feasibility::Infeasible(format!(
                        "inequality reduces to {} ≥ 0",
                        row.constant
                    ));
                }
                continue;
            }
            rows.insert(row.normalized());
        }

        let mut stages: Vec<Stage> = Vec::new();
        presolve(&mut rows, &mut stages);

        let live: BTreeSet<usize> = rows.iter().flat_map(|r| r.terms.keys().copied()).collect();
        if live.len() > cap {
            return Feasibility::Unknown(format!(
                "{} unknowns remain after elimination, above the cap of {}",
                live.len(),
                cap
            ));
        }

        while !rows.is_empty() {
            let live: BTreeSet<usize> = rows.iter().flat_map(|r| r.terms.keys().copied()).collect();
            let Some(var) = cheapest(&rows, &live) else {
                break;
            };
            let (touching, rest): (Vec<LinForm>, Vec<LinForm>) =
                rows.into_iter().partition(|r| r.coef(var).is_some());
            rows = rest.into_iter().collect();
            let (pos, neg): (Vec<&LinForm>, Vec<&LinForm>) = touching
                .iter()
                .partition(|r| r.coef(var).unwrap().is_positive());
            for p in &pos {
                for n in &neg {
                    let a = p.coef(var).unwrap().clone();
                    let b = -n.coef(var).unwrap().clone();
                    let mut combo = LinForm::default();
                    combo.add_scaled(p, &b);
                    combo.add_scaled(n, &a);
                    combo.terms.remove(&var);
                    if combo.terms.is_empty() {
                        if combo.constant.is_negative() {
                            return Feasibility::Infeasible(format!(
                                "bounds on unknown {} contradict each other",
                                var
                            ));
                        }
                        continue;
                    }
                    rows.insert(combo.normalized());
                    if rows.len() > row_limit {
                        return Feasibility::Unknown(format!(
                            "elimination produced more than {} inequalities",
                            row_limit
                        ));
                    }
                }
            }
            stages.push(Stage {
                var,
                rows: touching,
            });
            presolve(&mut rows, &mut stages);
        }

        let mut values = vec![Rational::zero(); self.vars];
        for stage in stages.iter().rev() {
            values[stage.var] = pick(stage, &values);
        }
        for (v, expr) in subst.iter().rev() {
            values[*v] = expr.eval(&values);
        }
        Feasibility::Feasible(values)
    }
}

/// Removes every variable whose coefficients all share one sign, together
/// with the rows it appears in: such a variable can always be pushed far
/// enough to satisfy them.
fn presolve(rows: &mut BTreeSet<LinForm>, stages: &mut Vec<Stage>) {
    loop {
        let mut sign: BTreeMap<usize, (bool, bool)> = BTreeMap::new();
        for r in rows.iter() {
            for (&i, c) in &r.terms {
                let e = sign.entry(i).or_default();
                if c.is_positive() {
                    e.0 = true;
                } else {
                    e.1 = true;
                }
            }
        }
        let Some((&var, _)) = sign.iter().find(|(_, (p, n))| !(*p && *n)) else {
            return;
        };
        let (touching, rest): (Vec<LinForm>, Vec<LinForm>) = std::mem::take(rows)
            .into_iter()
            .partition(|r| r.coef(var).is_some());
        *rows = rest.into_iter().collect();
        stages.push(Stage {
            var,
            rows: touching,
        });
    }
}

/// Variable whose elimination creates the fewest new rows; ties go to the
/// lowest index.
fn cheapest(rows: &BTreeSet<LinForm>, live: &BTreeSet<usize>) -> Option<usize> {
    live.iter()
        .map(|&v| {
            let pos = rows
                .iter()
                .filter(|r| r.coef(v).is_some_and(|c| c.is_positive()))
                .count();
            let neg = rows
                .iter()
                .filter(|r| r.coef(v).is_some_and(|c| c.is_negative()))
                .count();
            (pos * neg, v)
        })
        .min()
        .map(|(_, v)| v)
}

/// A value for the stage's variable meeting all its rows given the values
/// already fixed; zero when zero is admissible, else the nearest bound.
fn pick(stage: &Stage, values: &[Rational]) -> Rational {
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    for r in &stage.rows {
        let a = r.coef(stage.var).unwrap();
        let mut rest = r.clone();
        rest.terms.remove(&stage.var);
        let bound = -rest.eval(values) / a;
        if a.is_positive() {
            lo = Some(lo.map_or(bound.clone(), |l| l.max(bound)));
        } else {
            hi = Some(hi.map_or(bound.clone(), |h| h.min(bound)));
        }
    }
    let zero = Rational::zero();
    match (lo, hi) {
        (Some(l), _) if l > zero => l,
        (_, Some(h)) if h < zero => h,
        _ => zero,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn form(terms: &[(usize, i64)], c: i64) -> LinForm {
        let mut f = LinForm::constant(int(c));
        for &(i, k) in terms {
            f.add_term(i, int(k));
        }
        f
    }

    fn check(sys: &LinearSystem, values: &[Rational]) {
        for e in &sys.equalities {
            assert!(e.eval(values).is_zero());
        }
        for i in &sys.inequalities {
            assert!(!i.eval(values).is_negative(), "{:?} at {:?}", i, values);
        }
    }

    #[test]
    fn equalities_pin_values() {
        let mut sys = LinearSystem::new(2);
        sys.equalities.push(form(&[(0, 1), (1, 1)], -3));
        sys.equalities.push(form(&[(0, 1), (1, -1)], -1));
        let Feasibility::Feasible(v) = sys.solve(8, 100) else {
            panic!()
        };
        assert_eq!(v, vec![int(2), int(1)]);
    }

    #[test]
    fn inconsistent_equalities() {
        let mut sys = LinearSystem::new(1);
        sys.equalities.push(form(&[(0, 1)], -1));
        sys.equalities.push(form(&[(0, 2)], -3));
        assert!(matches!(sys.solve(8, 100), Feasibility::Infeasible(_)));
    }

    #[test]
    fn box_with_sum() {
        // 0 ≤ x, y ≤ 1 and x + y ≥ 3/2
        let mut sys = LinearSystem::new(2);
        for i in 0..2 {
            sys.inequalities.push(form(&[(i, 1)], 0));
            sys.inequalities.push(form(&[(i, -1)], 1));
        }
        sys.inequalities.push(form(&[(0, 2), (1, 2)], -3));
        let Feasibility::Feasible(v) = sys.solve(8, 100) else {
            panic!()
        };
        check(&sys, &v);
    }

    #[test]
    fn empty_polytope() {
        // x ≥ 0, y ≥ 0, x + y ≤ -1
        let mut sys = LinearSystem::new(2);
        sys.inequalities.push(form(&[(0, 1)], 0));
        sys.inequalities.push(form(&[(1, 1)], 0));
        sys.inequalities.push(form(&[(0, -1), (1, -1)], -1));
        assert!(matches!(sys.solve(8, 100), Feasibility::Infeasible(_)));
    }

    #[test]
    fn mixed_system() {
        // x = y, x - z ≥ 1/2, z ≥ 0, y ≤ 1
        let mut sys = LinearSystem::new(3);
        sys.equalities.push(form(&[(0, 1), (1, -1)], 0));
        let mut r = form(&[(0, 1), (2, -1)], 0);
        r.constant = ratio(-1, 2);
        sys.inequalities.push(r);
        sys.inequalities.push(form(&[(2, 1)], 0));
        sys.inequalities.push(form(&[(1, -1)], 1));
        let Feasibility::Feasible(v) = sys.solve(8, 100) else {
            panic!()
        };
        check(&sys, &v);
    }

    #[test]
    fn cap_yields_unknown() {
        let mut sys = LinearSystem::new(3);
        for i in 0..3 {
            sys.inequalities.push(form(&[(i, 1), ((i + 1) % 3, -1)], 0));
            sys.inequalities.push(form(&[(i, -1), ((i + 1) % 3, 1)], 1));
        }
        assert!(matches!(sys.solve(2, 100), Feasibility::Unknown(_)));
        let Feasibility::Feasible(v) = sys.solve(3, 100) else {
            panic!()
        };
        check(&sys, &v);
    }
}
