//! Compressed, id-ordered node sets.
//!
//! Every candidate set, inverted list and adjacency row in the engine is a
//! [`NodeSet`]. The representation is a roaring bitmap, so intersections cost
//! roughly the size of the smaller operand and iteration is always ascending.

use std::fmt;
use std::iter::FromIterator;
use std::ops::RangeBounds;

use roaring::{MultiOps, RoaringBitmap};

/// Dense node index into a data graph.
pub type NodeId = u32;

#[derive(Clone, Default, PartialEq)]
pub struct NodeSet {
    bits: RoaringBitmap,
}

impl NodeSet {
    pub fn new() -> Self {
        NodeSet {
            bits: RoaringBitmap::new(),
        }
    }

    /// The full range `[0, n)`.
    pub fn full(n: u32) -> Self {
        let mut bits = RoaringBitmap::new();
        bits.insert_range(0..n);
        NodeSet { bits }
    }

    pub fn insert(&mut self, v: NodeId) -> bool {
        self.bits.insert(v)
    }

    pub fn remove(&mut self, v: NodeId) -> bool {
        self.bits.remove(v)
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.bits.contains(v)
    }

    pub fn len(&self) -> usize {
        self.bits.len() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn clear(&mut self) {
        self.bits.clear()
    }

    pub fn min(&self) -> Option<NodeId> {
        self.bits.min()
    }

    pub fn max(&self) -> Option<NodeId> {
        self.bits.max()
    }

    /// Members in strictly ascending order.
    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.bits.iter()
    }

    /// Members inside `range`, ascending.
    pub fn range<R: RangeBounds<u32>>(&self, range: R) -> impl Iterator<Item = NodeId> + '_ {
        self.bits.range(range)
    }

    pub fn to_vec(&self) -> Vec<NodeId> {
        self.bits.iter().collect()
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        NodeSet {
            bits: &self.bits & &other.bits,
        }
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        NodeSet {
            bits: &self.bits | &other.bits,
        }
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        NodeSet {
            bits: &self.bits - &other.bits,
        }
    }

    pub fn intersect_with(&mut self, other: &NodeSet) {
        self.bits &= &other.bits;
    }

    pub fn union_with(&mut self, other: &NodeSet) {
        self.bits |= &other.bits;
    }

    pub fn difference_with(&mut self, other: &NodeSet) {
        self.bits -= &other.bits;
    }

    pub fn is_disjoint(&self, other: &NodeSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn intersection_len(&self, other: &NodeSet) -> usize {
        self.bits.intersection_len(&other.bits) as usize
    }

    /// Intersection of every set in `sets`; the empty slice yields the empty set.
    ///
    /// Operands are folded smallest first.
    pub fn multiway_intersect(sets: &[&NodeSet]) -> NodeSet {
        match sets {
            [] => NodeSet::new(),
            [only] => (*only).clone(),
            _ => {
                let mut sorted: Vec<&NodeSet> = sets.to_vec();
                sorted.sort_by_key(|s| s.len());
                NodeSet {
                    bits: sorted.iter().map(|s| &s.bits).intersection(),
                }
            }
        }
    }

    /// Union of every set yielded by `sets`.
    pub fn union_all<'a, I>(sets: I) -> NodeSet
    where
        I: IntoIterator<Item = &'a NodeSet>,
    {
        NodeSet {
            bits: sets.into_iter().map(|s| &s.bits).union(),
        }
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        NodeSet {
            bits: iter.into_iter().collect(),
        }
    }
}

impl Extend<NodeId> for NodeSet {
    fn extend<I: IntoIterator<Item = NodeId>>(&mut self, iter: I) {
        self.bits.extend(iter)
    }
}

impl<'a> IntoIterator for &'a NodeSet {
    type Item = NodeId;
    type IntoIter = roaring::bitmap::Iter<'a>;

    fn into_iter(self) -> Self::IntoIter {
        self.bits.iter()
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.bits.iter()).finish()
    }
}
