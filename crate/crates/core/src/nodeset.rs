use std::cmp::Ordering;
use std::fmt;

use fixedbitset::FixedBitSet;

/// A set of node ids drawn from `0..capacity`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NodeSet {
    bits: FixedBitSet,
}

impl NodeSet {
    pub fn empty(capacity: usize) -> Self {
        NodeSet {
            bits: FixedBitSet::with_capacity(capacity),
        }
    }

    pub fn full(capacity: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(capacity);
        bits.insert_range(..);
        NodeSet { bits }
    }

    /// Panics if an id is out of range.
    pub fn from_ids(capacity: usize, ids: impl IntoIterator<Item = usize>) -> Self {
        let mut set = NodeSet::empty(capacity);
        for id in ids {
            set.insert(id);
        }
        set
    }

    pub fn capacity(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.bits.contains(id)
    }

    pub fn insert(&mut self, id: usize) {
        assert!(id < self.capacity(), "node {id} out of range");
        self.bits.insert(id);
    }

    pub fn remove(&mut self, id: usize) {
        self.bits.set(id, false);
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn ids(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn intersects(&self, other: &NodeSet) -> bool {
        !self.bits.is_disjoint(&other.bits)
    }

    pub fn union_with(&mut self, other: &NodeSet) {
        self.bits.union_with(&other.bits);
    }

    pub fn difference_with(&mut self, other: &NodeSet) {
        self.bits.difference_with(&other.bits);
    }

    pub fn complement(&self) -> NodeSet {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        NodeSet { bits }
    }

    /// Stable 64-bit fingerprint (FNV-1a over the sorted ids).
    pub fn fingerprint(&self) -> u64 {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for id in self.iter() {
            for byte in (id as u64).to_le_bytes() {
                hash ^= u64::from(byte);
                hash = hash.wrapping_mul(0x0100_0000_01b3);
            }
        }
        hash
    }
}

/// Tie order used by every placement search: at the lowest id where two sets
/// differ, the set containing that id comes first. This is the order in which
/// an include-first, lowest-id-first depth-first search reaches its leaves.
pub fn search_order(a: &NodeSet, b: &NodeSet) -> Ordering {
    let n = a.capacity().max(b.capacity());
    for id in 0..n {
        match (a.contains(id), b.contains(id)) {
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
    }
    Ordering::Equal
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
