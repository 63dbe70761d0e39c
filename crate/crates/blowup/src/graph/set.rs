use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A set of vertex ids drawn from a fixed universe `0..universe`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    bits: FixedBitSet,
}

impl VertexSet {
    pub fn new(universe: usize) -> Self {
        VertexSet { bits: FixedBitSet::with_capacity(universe) }
    }

    pub fn full(universe: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(universe);
        bits.insert_range(..);
        VertexSet { bits }
    }

    /// Builds a set from ids; panics if an id lies outside the universe.
    pub fn from_ids<I: IntoIterator<Item = usize>>(universe: usize, ids: I) -> Self {
        let mut s = Self::new(universe);
        for v in ids {
            s.insert(v);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn insert(&mut self, v: usize) -> bool {
        assert!(v < self.universe(), "vertex {v} outside universe {}", self.universe());
        !self.bits.put(v)
    }

    pub fn remove(&mut self, v: usize) -> bool {
        if v >= self.universe() {
            return false;
        }
        let was = self.bits.contains(v);
        self.bits.set(v, false);
        was
    }

    pub fn contains(&self, v: usize) -> bool {
        self.bits.contains(v)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn first(&self) -> Option<usize> {
        self.bits.minimum()
    }

    /// `|self ∩ other|` without allocating.
    pub fn count_and(&self, other: &VertexSet) -> usize {
        self.bits.intersection_count(&other.bits)
    }

    pub fn intersect_with(&mut self, other: &VertexSet) {
        self.bits.intersect_with(&other.bits);
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        self.bits.union_with(&other.bits);
    }

    pub fn difference_with(&mut self, other: &VertexSet) {
        self.bits.difference_with(&other.bits);
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.difference_with(other);
        s
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    pub fn clear(&mut self) {
        self.bits.clear();
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Serialize, Deserialize)]
struct SetRepr {
    universe: usize,
    members: Vec<usize>,
}

impl Serialize for VertexSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SetRepr { universe: self.universe(), members: self.to_vec() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for VertexSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = SetRepr::deserialize(d)?;
        if let Some(&bad) = repr.members.iter().find(|&&v| v >= repr.universe) {
            return Err(serde::de::Error::custom(format!("member {bad} outside universe {}", repr.universe)));
        }
        Ok(VertexSet::from_ids(repr.universe, repr.members))
    }
}
