use std::fmt;

use crate::error::{invalid, Result};

/// A subset of `[N] = {1, …, N}`, stored as strictly increasing members.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet {
    universe: usize,
    members: Vec<usize>,
}

impl IndexSet {
    pub fn new(universe: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return invalid("duplicate index in set");
        }
        if let Some(&bad) = members.iter().find(|&&i| i == 0 || i > universe) {
            return invalid(format!("index {bad} outside [1, {universe}]"));
        }
        Ok(IndexSet { universe, members })
    }

    pub fn empty(universe: usize) -> Self {
        IndexSet {
            universe,
            members: Vec::new(),
        }
    }

    pub fn full(universe: usize) -> Self {
        IndexSet {
            universe,
            members: (1..=universe).collect(),
        }
    }

    /// Members are the set bits of `mask`; bit 0 is index 1.
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        debug_assert!(universe <= 64);
        IndexSet {
            universe,
            members: (0..universe).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect(),
        }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    /// `[N] \ self`.
    pub fn complement(&self) -> Self {
        let mut it = self.members.iter().peekable();
        let members = (1..=self.universe)
            .filter(|i| {
                if it.peek() == Some(&i) {
                    it.next();
                    false
                } else {
                    true
                }
            })
            .collect();
        IndexSet {
            universe: self.universe,
            members,
        }
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, m) in self.members.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}/{}", self.universe)
    }
}

impl fmt::Display for IndexSet {
    /// Space-separated members, e.g. `1 3 4`; the empty set prints nothing.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, m) in self.members.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_members() {
        assert!(IndexSet::new(4, [0]).is_err());
        assert!(IndexSet::new(4, [5]).is_err());
        assert!(IndexSet::new(4, [2, 2]).is_err());
        assert_eq!(IndexSet::new(4, [3, 1]).unwrap().members(), [1, 3]);
    }

    #[test]
    fn complement_of_extremes() {
        assert_eq!(IndexSet::empty(3).complement(), IndexSet::full(3));
        assert!(IndexSet::full(3).complement().is_empty());
    }

    proptest! {
        #[test]
        fn complement_partitions_universe(mask in any::<u16>()) {
            let s = IndexSet::from_mask(16, mask as u64);
            let c = s.complement();
            prop_assert_eq!(s.len() + c.len(), 16);
            for i in 1..=16 {
                prop_assert!(s.contains(i) != c.contains(i));
            }
            prop_assert_eq!(c.complement(), s);
        }
    }
}
