//! The bundled example functions, shipped as text files.

use crate::cli::bpa::parse_bpa;
use crate::massfun::MassFunction;

pub const EX_CANO_1: &str = include_str!("../fixtures/ex-cano-1.bpa");
pub const EX_CANO_2: &str = include_str!("../fixtures/ex-cano-2.bpa");
pub const EX_SQUARE: &str = include_str!("../fixtures/ex-square.bpa");
pub const EX_DIAG: &str = include_str!("../fixtures/ex-diag.bpa");
pub const EX_DIAG_YZ: &str = include_str!("../fixtures/ex-diag-yz.bpa");
pub const EX_DIAG_XY: &str = include_str!("../fixtures/ex-diag-xy.bpa");
pub const EX_DIAG_Z: &str = include_str!("../fixtures/ex-diag-z.bpa");
pub const EX_DIAG_CANDIDATE: &str = include_str!("../fixtures/ex-diag-candidate.bpa");
pub const EX_TWOCOND: &str = include_str!("../fixtures/ex-twocond.bpa");
pub const EX_TWOCOND_FIRST: &str = include_str!("../fixtures/ex-twocond-first.bpa");
pub const EX_TWOCOND_SECOND: &str = include_str!("../fixtures/ex-twocond-second.bpa");
pub const EX_XOR: &str = include_str!("../fixtures/ex-xor.bpa");
pub const EX_CHAIN: &str = include_str!("../fixtures/ex-chain.bpa");

/// Every fixture by file stem.
pub const ALL: &[(&str, &str)] = &[
    ("ex-cano-1", EX_CANO_1),
    ("ex-cano-2", EX_CANO_2),
    ("ex-square", EX_SQUARE),
    ("ex-diag", EX_DIAG),
    ("ex-diag-yz", EX_DIAG_YZ),
    ("ex-diag-xy", EX_DIAG_XY),
    ("ex-diag-z", EX_DIAG_Z),
    ("ex-diag-candidate", EX_DIAG_CANDIDATE),
    ("ex-twocond", EX_TWOCOND),
    ("ex-twocond-first", EX_TWOCOND_FIRST),
    ("ex-twocond-second", EX_TWOCOND_SECOND),
    ("ex-xor", EX_XOR),
    ("ex-chain", EX_CHAIN),
];

pub fn by_name(name: &str) -> Option<MassFunction> {
    let stem = name.trim_end_matches(".bpa");
    ALL.iter()
        .find(|(n, _)| *n == stem)
        .map(|(_, text)| load(text))
}

fn load(text: &str) -> MassFunction {
    parse_bpa(text).expect("bundled fixture parses")
}

pub fn ex_cano_1() -> MassFunction {
    load(EX_CANO_1)
}

pub fn ex_cano_2() -> MassFunction {
    load(EX_CANO_2)
}

pub fn ex_square() -> MassFunction {
    load(EX_SQUARE)
}

pub fn ex_diag() -> MassFunction {
    load(EX_DIAG)
}

pub fn ex_diag_yz() -> MassFunction {
    load(EX_DIAG_YZ)
}

pub fn ex_diag_xy() -> MassFunction {
    load(EX_DIAG_XY)
}

pub fn ex_diag_z() -> MassFunction {
    load(EX_DIAG_Z)
}

/// The nine-configuration anticonditional of the diagonal given `{Y,Z}`.
pub fn ex_diag_candidate() -> MassFunction {
    load(EX_DIAG_CANDIDATE)
}

/// The candidate with `Z` compressed away, a function over `{X,Y}`.
pub fn ex_diag_compressed() -> MassFunction {
    load(EX_DIAG_XY)
}

pub fn ex_twocond() -> MassFunction {
    load(EX_TWOCOND)
}

pub fn ex_twocond_first() -> MassFunction {
    load(EX_TWOCOND_FIRST)
}

pub fn ex_twocond_second() -> MassFunction {
    load(EX_TWOCOND_SECOND)
}

pub fn ex_xor() -> MassFunction {
    load(EX_XOR)
}

pub fn ex_chain() -> MassFunction {
    load(EX_CHAIN)
}
