//! Anticonditionals, compressible independence, the factorization oracle
//! and the independence relations built on them.

mod anticond;
mod oracle;

use std::fmt;

pub use anticond::{
    anticonditional_canonical, anticonditional_solve, anticonditional_verify, compress,
    Compression, Constraint, Residual, ResidualEntry, SolveOutcome, Verification,
};
pub use oracle::{
    cano_conditional_exists, factorization_oracle, independent_unconditional,
    intrinsic_independent, Checker,
};

use crate::frame::VariableSet;
use crate::massfun::MassFunction;
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Unconditional,
    Shenoy,
    Intrinsic,
    Cano,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Unconditional => "unconditional",
            Method::Shenoy => "shenoy",
            Method::Intrinsic => "intrinsic",
            Method::Cano => "cano",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    True,
    False,
    Unknown,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::True
        } else {
            Verdict::False
        }
    }

    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::False, _) | (_, Verdict::False) => Verdict::False,
            (Verdict::True, Verdict::True) => Verdict::True,
            _ => Verdict::Unknown,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::True => "true",
            Verdict::False => "false",
            Verdict::Unknown => "unknown",
        })
    }
}

/// The sets of an independence statement: `q` and `r` given `p`. For the
/// unconditional relation `p` is empty and `q`, `r` are the two blocks; for
/// the Cano test `p` is the conditioning set and `q`, `r` are empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndependenceQuery {
    pub q: VariableSet,
    pub r: VariableSet,
    pub p: VariableSet,
    pub method: Method,
}

impl fmt::Display for IndependenceQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.method {
            Method::Cano => write!(f, "{}({})", self.method, self.p),
            _ => write!(f, "{}({} ⟂ {} | {})", self.method, self.q, self.r, self.p),
        }
    }
}

/// Two factors over `p∪q` and `p∪r` whose combination is the analysed
/// function. `scale` relates commonalities: `Q(A) = scale · Q_left(A↓p∪q) ·
/// Q_right(A↓p∪r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationWitness {
    pub left: MassFunction,
    pub right: MassFunction,
    pub scale: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Evidence {
    Factorization(FactorizationWitness),
    /// A factor found by the feasibility solver.
    Conditional(MassFunction),
    Violation(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceReport {
    pub query: IndependenceQuery,
    pub verdict: Verdict,
    pub witness: Option<Evidence>,
    pub diversity: bool,
    /// Outcome of the anticonditional-solver route, when it was consulted.
    pub cross_check: Option<Verdict>,
}

impl IndependenceReport {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::True
    }

    pub fn factorization(&self) -> Option<&FactorizationWitness> {
        match &self.witness {
            Some(Evidence::Factorization(w)) => Some(w),
            _ => None,
        }
    }

    pub fn violation(&self) -> Option<&str> {
        match &self.witness {
            Some(Evidence::Violation(v)) => Some(v),
            _ => None,
        }
    }
}
