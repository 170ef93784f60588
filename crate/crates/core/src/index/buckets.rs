//! Static bucket map `FilterId -> [point id]` in compressed sparse row form.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketTable {
    /// Distinct keys, ascending.
    keys: Vec<u128>,
    /// `ids[offsets[i]..offsets[i + 1]]` is the bucket of `keys[i]`.
    offsets: Vec<u32>,
    ids: Vec<u32>,
}

impl BucketTable {
    /// Groups `(key, id)` entries; ids within a bucket ascend.
    pub fn from_entries(mut entries: Vec<(u128, u32)>) -> Self {
        entries.sort_unstable();
        entries.dedup();
        let mut keys = Vec::new();
        let mut offsets = vec![0u32];
        let mut ids = Vec::with_capacity(entries.len());
        for (i, &(key, id)) in entries.iter().enumerate() {
            if i > 0 && entries[i - 1].0 != key {
                offsets.push(ids.len() as u32);
            }
            if keys.last() != Some(&key) {
                keys.push(key);
            }
            ids.push(id);
        }
        offsets.push(ids.len() as u32);
        if keys.is_empty() {
            offsets = vec![0];
        }
        BucketTable { keys, offsets, ids }
    }

    pub fn get(&self, key: u128) -> &[u32] {
        match self.keys.binary_search(&key) {
            Ok(i) => &self.ids[self.offsets[i] as usize..self.offsets[i + 1] as usize],
            Err(_) => &[],
        }
    }

    pub fn buckets(&self) -> usize {
        self.keys.len()
    }

    pub fn entries(&self) -> usize {
        self.ids.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u128, &[u32])> + '_ {
        self.keys
            .iter()
            .enumerate()
            .map(move |(i, &k)| (k, &self.ids[self.offsets[i] as usize..self.offsets[i + 1] as usize]))
    }
}

/// Query-local set of visited point ids.
pub struct Visited {
    bits: Vec<u64>,
}

impl Visited {
    pub fn new(n: usize) -> Self {
        Visited { bits: vec![0; n.div_ceil(64)] }
    }

    /// Marks `id`; true if it was not yet marked.
    pub fn insert(&mut self, id: u32) -> bool {
        let (w, b) = (id as usize / 64, id % 64);
        let fresh = self.bits[w] >> b & 1 == 0;
        self.bits[w] |= 1 << b;
        fresh
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_entries() {
        let t = BucketTable::from_entries(vec![(5, 2), (1, 0), (5, 1), (9, 3), (5, 2)]);
        assert_eq!(t.buckets(), 3);
        assert_eq!(t.entries(), 4);
        assert_eq!(t.get(5), &[1, 2]);
        assert_eq!(t.get(1), &[0]);
        assert!(t.get(7).is_empty());
        let all: Vec<(u128, Vec<u32>)> = t.iter().map(|(k, v)| (k, v.to_vec())).collect();
        assert_eq!(all, vec![(1, vec![0]), (5, vec![1, 2]), (9, vec![3])]);
        let empty = BucketTable::from_entries(Vec::new());
        assert!(empty.get(0).is_empty());
    }

    #[test]
    fn visited_once() {
        let mut v = Visited::new(130);
        assert!(v.insert(129));
        assert!(!v.insert(129));
        assert!(v.insert(0));
    }
}
