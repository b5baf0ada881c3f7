//! Dense subset-lattice tables and the superset zeta/Möbius pair.
//!
//! Tables are indexed by bit masks over a [`Ground`]: an ordered list of
//! frame configurations, bit `i` standing for `configs[i]`. For a gated
//! frame the ground is the whole frame; for larger frames it is the union
//! of the sets a computation can touch. Values are stored over a common
//! denominator so the transforms run on integers.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::frame::ConfigSet;
use crate::rational::Rational;

/// Rationals `nums[i] / denom` sharing one positive denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Scaled {
    pub nums: Vec<BigInt>,
    pub denom: BigInt,
}

impl Scaled {
    /// Builds a table of length `len` from sparse entries; absent slots are 0.
    pub fn from_entries<'a>(
        len: usize,
        entries: impl Iterator<Item = (usize, &'a Rational)> + Clone,
    ) -> Self {
        let denom = entries
            .clone()
            .fold(BigInt::one(), |acc, (_, r)| acc.lcm(r.denom()));
        let mut nums = vec![BigInt::zero(); len];
        for (i, r) in entries {
            nums[i] += r.numer() * (&denom / r.denom());
        }
        Self { nums, denom }
    }

    pub fn from_rationals(values: &[Rational]) -> Self {
        Self::from_entries(values.len(), values.iter().enumerate())
    }

    pub fn value(&self, i: usize) -> Rational {
        Rational::new(self.nums[i].clone(), self.denom.clone())
    }

    pub fn len(&self) -> usize {
        self.nums.len()
    }
}

fn bit_strides(len: usize) -> impl Iterator<Item = usize> {
    debug_assert!(len.is_power_of_two());
    (0..len.trailing_zeros()).map(|i| 1usize << i)
}

/// `xs[A] <- sum over B ⊇ A of xs[B]`.
pub(crate) fn superset_sums(xs: &mut [BigInt]) {
    for e in bit_strides(xs.len()) {
        for block in xs.chunks_exact_mut(2 * e) {
            let (lo, hi) = block.split_at_mut(e);
            for (z, o) in lo.iter_mut().zip(hi.iter()) {
                if !o.is_zero() {
                    *z += o;
                }
            }
        }
    }
}

/// Inverse of [`superset_sums`]: `xs[A] <- sum over B ⊇ A of (-1)^|B∖A| xs[B]`.
pub(crate) fn inv_superset_sums(xs: &mut [BigInt]) {
    for e in bit_strides(xs.len()) {
        for block in xs.chunks_exact_mut(2 * e) {
            let (lo, hi) = block.split_at_mut(e);
            for (z, o) in lo.iter_mut().zip(hi.iter()) {
                if !o.is_zero() {
                    *z -= o;
                }
            }
        }
    }
}

/// Ordered configurations spanning a dense lattice.
#[derive(Debug, Clone)]
pub(crate) struct Ground {
    frame_size: usize,
    configs: Vec<u32>,
    local: HashMap<u32, u32>,
    full: bool,
}

impl Ground {
    pub fn full(frame_size: usize) -> Self {
        Self {
            frame_size,
            configs: (0..frame_size as u32).collect(),
            local: HashMap::new(),
            full: true,
        }
    }

    pub fn of(frame_size: usize, set: &ConfigSet) -> Self {
        if set.len() == frame_size {
            return Self::full(frame_size);
        }
        let configs: Vec<u32> = set.iter().collect();
        let local = configs
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i as u32))
            .collect();
        Self {
            frame_size,
            configs,
            local,
            full: false,
        }
    }

    pub fn bits(&self) -> usize {
        self.configs.len()
    }

    pub fn lattice_len(&self) -> usize {
        1usize << self.configs.len()
    }

    pub fn configs(&self) -> &[u32] {
        &self.configs
    }

    /// Local mask of `set ∩ ground`.
    pub fn trace(&self, set: &ConfigSet) -> u32 {
        if self.full {
            if let Some(w) = set.word() {
                return w as u32;
            }
            return set.iter().fold(0u32, |m, c| m | (1 << c));
        }
        set.iter()
            .filter_map(|c| self.local.get(&c))
            .fold(0u32, |m, &i| m | (1 << i))
    }

    pub fn global(&self, mask: u32) -> ConfigSet {
        if self.full && self.frame_size <= crate::frame::WORD_BITS {
            return ConfigSet::Word(mask as u64);
        }
        ConfigSet::from_indices(
            self.frame_size,
            MaskBits(mask).map(|i| self.configs[i as usize]),
        )
    }
}

/// Iterates set bit positions of a mask, lowest first.
pub(crate) struct MaskBits(pub u32);

impl Iterator for MaskBits {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            None
        } else {
            let i = self.0.trailing_zeros();
            self.0 &= self.0 - 1;
            Some(i)
        }
    }
}

/// Projection of every lattice mask under a per-bit configuration map:
/// `out[A] = OR of target_bit[i] for i in A`. Linear time by peeling the
/// lowest bit.
pub(crate) fn project_masks(target_bits: &[u32]) -> Vec<u32> {
    let len = 1usize << target_bits.len();
    let mut out = vec![0u32; len];
    for a in 1..len {
        let low = a.trailing_zeros() as usize;
        out[a] = out[a & (a - 1)] | target_bits[low];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn zeta_then_mobius_is_identity() {
        let vals: Vec<Rational> = (0..16).map(|i| ratio(i * 7 % 5 - 2, 1 + i % 3)).collect();
        let mut s = Scaled::from_rationals(&vals);
        let original = s.clone();
        superset_sums(&mut s.nums);
        inv_superset_sums(&mut s.nums);
        assert_eq!(s, original);
    }

    #[test]
    fn superset_sum_by_hand() {
        // two-element lattice: m({a}) = 1/2, m({a,b}) = 1/2
        let vals = vec![ratio(0, 1), ratio(1, 2), ratio(0, 1), ratio(1, 2)];
        let mut s = Scaled::from_rationals(&vals);
        superset_sums(&mut s.nums);
        assert_eq!(s.value(1), ratio(1, 1));
        assert_eq!(s.value(2), ratio(1, 2));
        assert_eq!(s.value(3), ratio(1, 2));
    }

    #[test]
    fn partial_ground_round_trip() {
        let set = ConfigSet::from_indices(40, [3, 17, 39]);
        let g = Ground::of(40, &set);
        assert_eq!(g.bits(), 3);
        let probe = ConfigSet::from_indices(40, [17, 20, 39]);
        let mask = g.trace(&probe);
        assert_eq!(mask, 0b110);
        assert_eq!(g.global(mask), ConfigSet::from_indices(40, [17, 39]));
    }

    #[test]
    fn mask_projection_table() {
        // configs 0,1,2 map to target bits 1,1,2
        let table = project_masks(&[1, 1, 2]);
        assert_eq!(table[0b011], 1);
        assert_eq!(table[0b101], 3);
        assert_eq!(table[0b111], 3);
    }
}
