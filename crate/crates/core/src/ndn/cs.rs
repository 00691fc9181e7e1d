use std::collections::{BTreeMap, HashMap};

use crate::error::CsError;

use super::{Data, Name};

/// Byte-bounded Content Store with exact-name lookup and LRU eviction.
#[derive(Debug, Clone)]
pub struct ContentStore {
    capacity: u64,
    used: u64,
    clock: u64,
    entries: HashMap<Name, (Data, u64)>,
    recency: BTreeMap<u64, Name>,
}

impl ContentStore {
    pub fn new(capacity: u64) -> Self {
        ContentStore {
            capacity,
            used: 0,
            clock: 0,
            entries: HashMap::new(),
            recency: BTreeMap::new(),
        }
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn used_bytes(&self) -> u64 {
        self.used
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, name: &Name) -> bool {
        self.entries.contains_key(name)
    }

    fn tick(&mut self) -> u64 {
        self.clock += 1;
        self.clock
    }

    /// Exact-name match; a hit refreshes the entry's recency.
    pub fn lookup(&mut self, name: &Name) -> Option<Data> {
        let stamp = self.tick();
        let (data, last) = self.entries.get_mut(name)?;
        self.recency.remove(last);
        *last = stamp;
        self.recency.insert(stamp, name.clone());
        Some(data.clone())
    }

    /// Stores `data`, evicting least-recently-used entries until it fits.
    /// Returns the evicted names, oldest first.
    pub fn insert(&mut self, data: Data) -> Result<Vec<Name>, CsError> {
        let size = data.payload_size as u64;
        if size > self.capacity {
            return Err(CsError::Oversized {
                size,
                capacity: self.capacity,
            });
        }
        if let Some((old, last)) = self.entries.remove(&data.name) {
            self.recency.remove(&last);
            self.used -= old.payload_size as u64;
        }
        let mut evicted = Vec::new();
        while self.used + size > self.capacity {
            let (_, victim) = self
                .recency
                .pop_first()
                .expect("store over capacity has entries");
            let (gone, _) = self
                .entries
                .remove(&victim)
                .expect("recency and entries agree");
            self.used -= gone.payload_size as u64;
            evicted.push(victim);
        }
        let stamp = self.tick();
        self.recency.insert(stamp, data.name.clone());
        self.entries.insert(data.name.clone(), (data, stamp));
        self.used += size;
        Ok(evicted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(name: &str, size: u32) -> Data {
        Data {
            name: name.parse().unwrap(),
            payload_size: size,
        }
    }

    #[test]
    fn insert_into_empty_store() {
        let mut cs = ContentStore::new(10_000);
        assert!(cs.insert(data("/a/1", 1024)).unwrap().is_empty());
        assert!(cs.contains(&"/a/1".parse().unwrap()));
        assert_eq!(cs.used_bytes(), 1024);
    }

    #[test]
    fn lru_eviction() {
        let mut cs = ContentStore::new(2 * 1024);
        cs.insert(data("/a/1", 1024)).unwrap();
        cs.insert(data("/a/2", 1024)).unwrap();
        // touch /a/1 so /a/2 becomes the eviction victim
        assert!(cs.lookup(&"/a/1".parse().unwrap()).is_some());
        let evicted = cs.insert(data("/a/3", 1024)).unwrap();
        assert_eq!(evicted, vec!["/a/2".parse::<Name>().unwrap()]);
        assert_eq!(cs.len(), 2);
    }

    #[test]
    fn oversized_payload_is_rejected_without_change() {
        let mut cs = ContentStore::new(1000);
        cs.insert(data("/a/1", 600)).unwrap();
        assert_eq!(
            cs.insert(data("/a/2", 1001)),
            Err(CsError::Oversized {
                size: 1001,
                capacity: 1000
            })
        );
        assert_eq!(cs.len(), 1);
        assert_eq!(cs.used_bytes(), 600);
    }

    #[test]
    fn reinsert_same_name_does_not_double_count() {
        let mut cs = ContentStore::new(5000);
        cs.insert(data("/a/1", 1000)).unwrap();
        cs.insert(data("/a/1", 1000)).unwrap();
        assert_eq!(cs.used_bytes(), 1000);
    }

    #[test]
    fn ten_gigabytes_hold_a_whole_trip() {
        // three minutes of streaming at ~9.4 chunks/s of 1 KB is far below 10 GB
        let mut cs = ContentStore::new(10 * 1024 * 1024 * 1024);
        let mut evictions = 0;
        for i in 0..(3 * 1700) {
            evictions += cs
                .insert(data(
                    &format!("/p/song{}/chunk{}", i / 1700, i % 1700),
                    1024,
                ))
                .unwrap()
                .len();
        }
        assert_eq!(evictions, 0);
        assert_eq!(cs.len(), 5100);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn byte_accounting_never_exceeds_capacity(ops in proptest::collection::vec((0u8..20, 1u32..700, any::<bool>()), 1..200)) {
                let mut cs = ContentStore::new(2048);
                for (id, size, touch) in ops {
                    let name: Name = format!("/x/{id}").parse().unwrap();
                    if touch {
                        cs.lookup(&name);
                    } else {
                        cs.insert(Data { name, payload_size: size }).unwrap();
                    }
                    prop_assert!(cs.used_bytes() <= cs.capacity());
                    let sum: u64 = cs.entries.values().map(|(d, _)| d.payload_size as u64).sum();
                    prop_assert_eq!(sum, cs.used_bytes());
                    prop_assert_eq!(cs.entries.len(), cs.recency.len());
                }
            }
        }
    }
}
