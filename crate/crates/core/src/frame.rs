//! Variables, product frames of discernment and the subset algebra on them.
//!
//! A configuration of a [`Frame`] is addressed by a mixed-radix index in
//! variable declaration order (the first variable is the most significant
//! digit), so index order is the lexicographic order of value tuples.
//! Subsets of configurations are [`ConfigSet`]s: a single `u64` bit mask
//! when the frame has at most 64 configurations, a sorted index list
//! otherwise.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Frames up to this many configurations store subsets as one machine word.
pub const WORD_BITS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Variable {
    name: String,
    domain: Vec<String>,
}

impl Variable {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        domain: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let name = name.into();
        if !is_identifier(&name) {
            return Err(Error::InvalidName(name));
        }
        let domain: Vec<String> = domain.into_iter().map(Into::into).collect();
        if domain.is_empty() {
            return Err(Error::EmptyDomain(name));
        }
        let mut seen = BTreeSet::new();
        for label in &domain {
            if !is_label(label) {
                return Err(Error::InvalidName(label.clone()));
            }
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateLabel {
                    var: name.clone(),
                    label: label.clone(),
                });
            }
        }
        Ok(Self { name, domain })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }

    pub fn value_index(&self, label: &str) -> Option<usize> {
        self.domain.iter().position(|v| v == label)
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn is_label(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | '\''))
}

/// A set of variable names. Order-free; iteration is alphabetical.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VariableSet(BTreeSet<String>);

impl VariableSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn of<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> Self {
        Self(names.into_iter().map(|s| s.as_ref().to_string()).collect())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains(name)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn union(&self, other: &Self) -> Self {
        Self(self.0.union(&other.0).cloned().collect())
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn difference(&self, other: &Self) -> Self {
        Self(self.0.difference(&other.0).cloned().collect())
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.0.is_disjoint(&other.0)
    }
}

impl fmt::Display for VariableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, name) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{name}")?;
        }
        write!(f, "}}")
    }
}

impl<S: AsRef<str>> FromIterator<S> for VariableSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self::of(iter)
    }
}

/// Ordered variables spanning a product space of configurations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    variables: Vec<Variable>,
    strides: Vec<usize>,
    size: usize,
}

impl Frame {
    pub fn new(variables: Vec<Variable>) -> Result<Self> {
        let mut names = BTreeSet::new();
        for v in &variables {
            if !names.insert(v.name()) {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
        }
        let size: u128 = variables.iter().map(|v| v.size() as u128).product();
        if size > u32::MAX as u128 {
            return Err(Error::FrameTooLarge(size));
        }
        let mut strides = vec![1usize; variables.len()];
        for i in (0..variables.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * variables[i + 1].size();
        }
        Ok(Self {
            variables,
            strides,
            size: size as usize,
        })
    }

    /// The frame with no variables and exactly one configuration.
    pub fn unit() -> Self {
        Self {
            variables: Vec::new(),
            strides: Vec::new(),
            size: 1,
        }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn variable_set(&self) -> VariableSet {
        VariableSet::of(self.variables.iter().map(|v| v.name()))
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.variables.len());
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    pub fn decode(&self, index: usize) -> Vec<usize> {
        debug_assert!(index < self.size);
        self.variables
            .iter()
            .zip(&self.strides)
            .map(|(v, s)| (index / s) % v.size())
            .collect()
    }

    pub fn encode_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<usize> {
        if labels.len() != self.variables.len() {
            return Err(Error::ArityMismatch {
                expected: self.variables.len(),
                got: labels.len(),
            });
        }
        let digits = labels
            .iter()
            .zip(&self.variables)
            .map(|(l, v)| {
                v.value_index(l.as_ref())
                    .ok_or_else(|| Error::UnknownValue {
                        var: v.name.clone(),
                        label: l.as_ref().to_string(),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.encode(&digits))
    }

    pub fn labels(&self, index: usize) -> Vec<&str> {
        self.decode(index)
            .into_iter()
            .zip(&self.variables)
            .map(|(d, v)| v.domain[d].as_str())
            .collect()
    }

    /// The frame spanned by `vars`, in this frame's declaration order.
    pub fn subframe(&self, vars: &VariableSet) -> Result<Frame> {
        if let Some(unknown) = vars.iter().find(|n| self.position(n).is_none()) {
            return Err(Error::UnknownVariable(unknown.to_string()));
        }
        Frame::new(
            self.variables
                .iter()
                .filter(|v| vars.contains(&v.name))
                .cloned()
                .collect(),
        )
    }

    /// The smallest frame containing both: this frame's variables followed by
    /// the other's new ones. Shared names must carry identical domains.
    pub fn union(&self, other: &Frame) -> Result<Frame> {
        let mut vars = self.variables.clone();
        for v in &other.variables {
            match self.variable(&v.name) {
                Some(mine) if mine == v => {}
                Some(_) => {
                    return Err(Error::IncompatibleFrames(format!(
                        "variable `{}` is declared with different domains",
                        v.name
                    )))
                }
                None => vars.push(v.clone()),
            }
        }
        Frame::new(vars)
    }

    /// True when every variable of `other` appears here with the same domain.
    pub fn contains_frame(&self, other: &Frame) -> bool {
        other
            .variables
            .iter()
            .all(|v| self.variable(&v.name) == Some(v))
    }

    pub fn same_variables(&self, other: &Frame) -> bool {
        self.variables.len() == other.variables.len() && self.contains_frame(other)
    }

    /// For every configuration of this frame, the index of its projection in
    /// `target`, whose variables must be a subset of ours.
    pub fn projection_map(&self, target: &Frame) -> Result<Vec<u32>> {
        let mut places = Vec::with_capacity(target.variables.len());
        for (tv, tstride) in target.variables.iter().zip(&target.strides) {
            match self.position(&tv.name) {
                Some(i) if self.variables[i] == *tv => places.push((i, *tstride)),
                Some(_) => {
                    return Err(Error::IncompatibleFrames(format!(
                        "variable `{}` is declared with different domains",
                        tv.name
                    )))
                }
                None => return Err(Error::UnknownVariable(tv.name.clone())),
            }
        }
        Ok((0..self.size)
            .map(|idx| {
                places
                    .iter()
                    .map(|&(i, tstride)| {
                        let digit = (idx / self.strides[i]) % self.variables[i].size();
                        digit * tstride
                    })
                    .sum::<usize>() as u32
            })
            .collect())
    }

    pub fn format_config(&self, index: usize) -> String {
        format!("({})", self.labels(index).join(" "))
    }

    pub fn format_set(&self, set: &ConfigSet) -> String {
        if set.is_empty() {
            return "{ }".to_string();
        }
        let mut out = String::from("{");
        for idx in set.iter() {
            out.push(' ');
            out.push_str(&self.format_config(idx as usize));
        }
        out.push_str(" }");
        out
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.variables.iter().enumerate() {
            if i > 0 {
                write!(f, " ; ")?;
            }
            write!(f, "{} = {}", v.name, v.domain.join(" "))?;
        }
        Ok(())
    }
}

/// A subset of configurations of some frame. The representation is fixed by
/// the frame size, so two sets of the same frame always compare structurally.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConfigSet {
    Word(u64),
    Sorted(Vec<u32>),
}

impl ConfigSet {
    pub fn empty(frame_size: usize) -> Self {
        if frame_size <= WORD_BITS {
            ConfigSet::Word(0)
        } else {
            ConfigSet::Sorted(Vec::new())
        }
    }

    pub fn full(frame_size: usize) -> Self {
        if frame_size <= WORD_BITS {
            ConfigSet::Word(low_bits(frame_size))
        } else {
            ConfigSet::Sorted((0..frame_size as u32).collect())
        }
    }

    pub fn singleton(frame_size: usize, index: u32) -> Self {
        Self::from_indices(frame_size, [index])
    }

    pub fn from_indices(frame_size: usize, indices: impl IntoIterator<Item = u32>) -> Self {
        if frame_size <= WORD_BITS {
            let mut w = 0u64;
            for i in indices {
                debug_assert!((i as usize) < frame_size);
                w |= 1 << i;
            }
            ConfigSet::Word(w)
        } else {
            let mut v: Vec<u32> = indices.into_iter().collect();
            v.sort_unstable();
            v.dedup();
            ConfigSet::Sorted(v)
        }
    }

    pub fn word(&self) -> Option<u64> {
        match self {
            ConfigSet::Word(w) => Some(*w),
            ConfigSet::Sorted(_) => None,
        }
    }

    pub fn contains(&self, index: u32) -> bool {
        match self {
            ConfigSet::Word(w) => index < 64 && (w >> index) & 1 == 1,
            ConfigSet::Sorted(v) => v.binary_search(&index).is_ok(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ConfigSet::Word(w) => w.count_ones() as usize,
            ConfigSet::Sorted(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            ConfigSet::Word(w) => *w == 0,
            ConfigSet::Sorted(v) => v.is_empty(),
        }
    }

    /// Members in ascending index order.
    pub fn iter(&self) -> ConfigIter<'_> {
        match self {
            ConfigSet::Word(w) => ConfigIter::Word(*w),
            ConfigSet::Sorted(v) => ConfigIter::Sorted(v.iter()),
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        match (self, other) {
            (ConfigSet::Word(a), ConfigSet::Word(b)) => ConfigSet::Word(a & b),
            (ConfigSet::Sorted(a), ConfigSet::Sorted(b)) => {
                let mut out = Vec::with_capacity(a.len().min(b.len()));
                let (mut i, mut j) = (0, 0);
                while i < a.len() && j < b.len() {
                    match a[i].cmp(&b[j]) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            out.push(a[i]);
                            i += 1;
                            j += 1;
                        }
                    }
                }
                ConfigSet::Sorted(out)
            }
            _ => mixed(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        match (self, other) {
            (ConfigSet::Word(a), ConfigSet::Word(b)) => ConfigSet::Word(a | b),
            (ConfigSet::Sorted(a), ConfigSet::Sorted(b)) => {
                let mut out: Vec<u32> = a.iter().chain(b).copied().collect();
                out.sort_unstable();
                out.dedup();
                ConfigSet::Sorted(out)
            }
            _ => mixed(),
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        match (self, other) {
            (ConfigSet::Word(a), ConfigSet::Word(b)) => a & !b == 0,
            (ConfigSet::Sorted(a), ConfigSet::Sorted(_)) => a.iter().all(|i| other.contains(*i)),
            _ => mixed(),
        }
    }

    pub fn complement(&self, frame_size: usize) -> Self {
        match self {
            ConfigSet::Word(w) => ConfigSet::Word(!w & low_bits(frame_size)),
            ConfigSet::Sorted(_) => ConfigSet::from_indices(
                frame_size,
                (0..frame_size as u32).filter(|i| !self.contains(*i)),
            ),
        }
    }

    /// Image of the set under a configuration map (e.g. a projection map).
    pub fn map(&self, map: &[u32], target_size: usize) -> Self {
        ConfigSet::from_indices(target_size, self.iter().map(|i| map[i as usize]))
    }

    /// Preimage of the set under a configuration map: the cylinder when `map`
    /// is a projection map.
    pub fn preimage(&self, map: &[u32]) -> Self {
        ConfigSet::from_indices(
            map.len(),
            (0..map.len() as u32).filter(|&i| self.contains(map[i as usize])),
        )
    }

    /// Members as a sorted vector, the canonical order for reports.
    pub fn to_vec(&self) -> Vec<u32> {
        self.iter().collect()
    }
}

fn mixed() -> ! {
    unreachable!("configuration sets from frames of different sizes")
}

pub(crate) fn low_bits(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub enum ConfigIter<'a> {
    Word(u64),
    Sorted(std::slice::Iter<'a, u32>),
}

impl Iterator for ConfigIter<'_> {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        match self {
            ConfigIter::Word(w) => {
                if *w == 0 {
                    None
                } else {
                    let i = w.trailing_zeros();
                    *w &= *w - 1;
                    Some(i)
                }
            }
            ConfigIter::Sorted(it) => it.next().copied(),
        }
    }
}

/// A set of configurations tied to its frame.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EventSet {
    frame: Arc<Frame>,
    set: ConfigSet,
}

impl EventSet {
    pub fn new(frame: Arc<Frame>, set: ConfigSet) -> Self {
        Self { frame, set }
    }

    pub fn empty(frame: Arc<Frame>) -> Self {
        let set = ConfigSet::empty(frame.size());
        Self { frame, set }
    }

    pub fn full(frame: Arc<Frame>) -> Self {
        let set = ConfigSet::full(frame.size());
        Self { frame, set }
    }

    /// Builds a set from value-label tuples in frame declaration order.
    pub fn from_tuples<S: AsRef<str>>(frame: Arc<Frame>, tuples: &[Vec<S>]) -> Result<Self> {
        let indices = tuples
            .iter()
            .map(|t| frame.encode_labels(t).map(|i| i as u32))
            .collect::<Result<Vec<_>>>()?;
        let set = ConfigSet::from_indices(frame.size(), indices);
        Ok(Self { frame, set })
    }

    /// The cylinder `{value} × rest` for one variable assignment.
    pub fn cylinder(frame: Arc<Frame>, var: &str, label: &str) -> Result<Self> {
        let pos = frame
            .position(var)
            .ok_or_else(|| Error::UnknownVariable(var.to_string()))?;
        let digit =
            frame.variables()[pos]
                .value_index(label)
                .ok_or_else(|| Error::UnknownValue {
                    var: var.to_string(),
                    label: label.to_string(),
                })?;
        let set = ConfigSet::from_indices(
            frame.size(),
            (0..frame.size())
                .filter(|&i| frame.decode(i)[pos] == digit)
                .map(|i| i as u32),
        );
        Ok(Self { frame, set })
    }

    pub fn frame(&self) -> &Arc<Frame> {
        &self.frame
    }

    pub fn set(&self) -> &ConfigSet {
        &self.set
    }

    pub fn into_set(self) -> ConfigSet {
        self.set
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    pub fn contains_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<bool> {
        Ok(self.set.contains(self.frame.encode_labels(labels)? as u32))
    }

    /// Per-vector projection onto `vars`, living on the spanned subframe.
    pub fn project(&self, vars: &VariableSet) -> Result<EventSet> {
        let target = Arc::new(self.frame.subframe(vars)?);
        let map = self.frame.projection_map(&target)?;
        let set = self.set.map(&map, target.size());
        Ok(EventSet { frame: target, set })
    }

    /// The cylinder over `target`, whose variables must include ours.
    pub fn extend(&self, target: &Arc<Frame>) -> Result<EventSet> {
        if !target.contains_frame(&self.frame) {
            return Err(Error::IncompatibleFrames(format!(
                "{} is not a superframe of {}",
                target.variable_set(),
                self.frame.variable_set()
            )));
        }
        let map = target.projection_map(&self.frame)?;
        Ok(EventSet {
            frame: target.clone(),
            set: self.set.preimage(&map),
        })
    }

    pub fn intersection(&self, other: &EventSet) -> Result<EventSet> {
        self.same_frame(other)?;
        Ok(EventSet {
            frame: self.frame.clone(),
            set: self.set.intersection(&other.set),
        })
    }

    pub fn is_subset(&self, other: &EventSet) -> Result<bool> {
        self.same_frame(other)?;
        Ok(self.set.is_subset(&other.set))
    }

    fn same_frame(&self, other: &EventSet) -> Result<()> {
        if self.frame == other.frame {
            Ok(())
        } else {
            Err(Error::IncompatibleFrames(
                "event sets over different frames".into(),
            ))
        }
    }
}

impl fmt::Display for EventSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.frame.format_set(&self.set))
    }
}
