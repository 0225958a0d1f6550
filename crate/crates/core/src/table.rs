//! Hash tables keyed by packed syndrome words.

const EMPTY: u64 = u64::MAX;

#[inline]
fn mix(key: u64) -> u64 {
    key.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Growable linear-probing map used while enumerating. Keys must not equal
/// `u64::MAX`.
#[derive(Clone, Debug)]
pub struct KeyTable {
    slots: Vec<(u64, u64)>,
    len: usize,
    shift: u32,
}

impl Default for KeyTable {
    fn default() -> Self {
        Self::with_capacity(16)
    }
}

impl KeyTable {
    pub fn with_capacity(n: usize) -> Self {
        let cap = (n.max(8) * 8 / 7 + 1).next_power_of_two();
        KeyTable { slots: vec![(EMPTY, 0); cap], len: 0, shift: 64 - cap.trailing_zeros() }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.slots.len()
    }

    #[inline]
    pub fn get(&self, key: u64) -> Option<u64> {
        let mask = self.slots.len() - 1;
        let mut i = (mix(key) >> self.shift) as usize;
        loop {
            let (k, v) = self.slots[i];
            if k == key {
                return Some(v);
            }
            if k == EMPTY {
                return None;
            }
            i = (i + 1) & mask;
        }
    }

    /// Inserts if absent. Returns the existing value otherwise.
    #[inline]
    pub fn insert_new(&mut self, key: u64, val: u64) -> Option<u64> {
        debug_assert!(key != EMPTY);
        if (self.len + 1) * 8 > self.slots.len() * 7 {
            self.grow();
        }
        let mask = self.slots.len() - 1;
        let mut i = (mix(key) >> self.shift) as usize;
        loop {
            let (k, v) = self.slots[i];
            if k == key {
                return Some(v);
            }
            if k == EMPTY {
                self.slots[i] = (key, val);
                self.len += 1;
                return None;
            }
            i = (i + 1) & mask;
        }
    }

    fn grow(&mut self) {
        let cap = self.slots.len() * 2;
        let old = std::mem::replace(&mut self.slots, vec![(EMPTY, 0); cap]);
        self.shift -= 1;
        self.len = 0;
        for (k, v) in old {
            if k != EMPTY {
                self.insert_new(k, v);
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.slots.iter().copied().filter(|(k, _)| *k != EMPTY)
    }

    /// Compacts into a read-only table, reusing the slot allocation.
    pub fn freeze(self) -> FrozenTable {
        let mut entries = self.slots;
        entries.retain(|(k, _)| *k != EMPTY);
        entries.shrink_to_fit();
        FrozenTable::from_entries(entries)
    }
}

/// Read-only map stored as entries sorted by hash with a bucket directory;
/// about 18 bytes per entry.
#[derive(Clone, Debug, Default)]
pub struct FrozenTable {
    entries: Vec<(u64, u64)>,
    dir: Vec<u32>,
    bits: u32,
}

impl FrozenTable {
    /// Builds from distinct keys.
    pub fn from_entries(mut entries: Vec<(u64, u64)>) -> Self {
        entries.sort_unstable_by_key(|e| mix(e.0));
        let bits = (entries.len() / 2).max(1).next_power_of_two().trailing_zeros().max(1);
        let nb = 1usize << bits;
        let mut dir = vec![0u32; nb + 1];
        for e in &entries {
            dir[(mix(e.0) >> (64 - bits)) as usize + 1] += 1;
        }
        for i in 0..nb {
            dir[i + 1] += dir[i];
        }
        FrozenTable { entries, dir, bits }
    }

    #[inline]
    pub fn get(&self, key: u64) -> Option<u64> {
        let b = (mix(key) >> (64 - self.bits)) as usize;
        let (lo, hi) = (self.dir[b] as usize, self.dir[b + 1] as usize);
        self.entries[lo..hi].iter().find(|e| e.0 == key).map(|e| e.1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn resident_bytes(&self) -> usize {
        self.entries.len() * 16 + self.dir.len() * 4
    }

    /// Entries in storage order, which depends only on the key set.
    pub fn entries(&self) -> &[(u64, u64)] {
        &self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashMap;

    proptest! {
        #[test]
        fn behaves_like_hashmap(ops in proptest::collection::vec((0u64..500, any::<u64>()), 0..2000)) {
            let mut t = KeyTable::with_capacity(4);
            let mut h = HashMap::new();
            for (k, v) in ops {
                let a = t.insert_new(k, v);
                let b = match h.get(&k) { Some(&x) => Some(x), None => { h.insert(k, v); None } };
                prop_assert_eq!(a, b);
            }
            prop_assert_eq!(t.len(), h.len());
            for (k, v) in &h {
                prop_assert_eq!(t.get(*k), Some(*v));
            }
            prop_assert_eq!(t.get(10_000), None);
            let f = t.freeze();
            prop_assert_eq!(f.len(), h.len());
            for (k, v) in &h {
                prop_assert_eq!(f.get(*k), Some(*v));
            }
            prop_assert_eq!(f.get(10_000), None);
        }
    }

    #[test]
    fn empty_frozen() {
        let f = FrozenTable::from_entries(Vec::new());
        assert_eq!(f.get(0), None);
    }
}
