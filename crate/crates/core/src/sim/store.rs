//! Byte-bounded LRU content store.

use std::collections::BTreeMap;

use crate::envelope::{digest, Digest};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChunkKey {
    pub name: String,
    pub chunk: u32,
}

impl ChunkKey {
    pub fn new(name: &str, chunk: u32) -> Self {
        ChunkKey {
            name: name.to_string(),
            chunk,
        }
    }
}

/// A cached chunk together with the hash its directory entry promises.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CachedChunk {
    pub bytes: Vec<u8>,
    pub expected: Digest,
    pub pinned: bool,
    last_used: u64,
}

impl CachedChunk {
    pub fn is_intact(&self) -> bool {
        digest(&self.bytes) == self.expected
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    /// The chunk cannot fit even after evicting every unpinned item.
    NoRoom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContentStore {
    capacity: usize,
    used: usize,
    clock: u64,
    items: BTreeMap<ChunkKey, CachedChunk>,
}

impl ContentStore {
    pub fn new(capacity: usize) -> Self {
        ContentStore {
            capacity,
            used: 0,
            clock: 0,
            items: BTreeMap::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn used(&self) -> usize {
        self.used
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, key: &ChunkKey) -> bool {
        self.items.contains_key(key)
    }

    pub fn peek(&self, key: &ChunkKey) -> Option<&CachedChunk> {
        self.items.get(key)
    }

    /// Looks up and marks as most recently used.
    pub fn get(&mut self, key: &ChunkKey) -> Option<&CachedChunk> {
        self.clock += 1;
        let now = self.clock;
        self.items.get_mut(key).map(|c| {
            c.last_used = now;
            &*c
        })
    }

    /// Inserts, evicting least recently used unpinned chunks as needed.
    /// Returns the evicted keys.
    pub fn insert(
        &mut self,
        key: ChunkKey,
        bytes: Vec<u8>,
        expected: Digest,
        pinned: bool,
    ) -> Result<Vec<ChunkKey>, Rejection> {
        let old = self.items.get(&key).map(|c| c.bytes.len()).unwrap_or(0);
        let evictable: usize = self
            .items
            .iter()
            .filter(|(k, c)| !c.pinned && **k != key)
            .map(|(_, c)| c.bytes.len())
            .sum();
        let pinned_bytes = self.used - old - evictable;
        if pinned_bytes + bytes.len() > self.capacity {
            return Err(Rejection::NoRoom);
        }
        self.remove(&key);
        let mut evicted = Vec::new();
        while self.used + bytes.len() > self.capacity {
            let victim = self
                .items
                .iter()
                .filter(|(_, c)| !c.pinned)
                .min_by_key(|(_, c)| c.last_used)
                .map(|(k, _)| k.clone())
                .expect("room was checked above");
            self.remove(&victim);
            evicted.push(victim);
        }
        self.clock += 1;
        self.used += bytes.len();
        self.items.insert(
            key,
            CachedChunk {
                bytes,
                expected,
                pinned,
                last_used: self.clock,
            },
        );
        Ok(evicted)
    }

    pub fn remove(&mut self, key: &ChunkKey) -> Option<CachedChunk> {
        let c = self.items.remove(key)?;
        self.used -= c.bytes.len();
        Some(c)
    }

    /// Flips one bit of a cached chunk in place. Returns false when the chunk
    /// is absent or empty.
    pub fn corrupt(&mut self, key: &ChunkKey, position: usize, bit: u8) -> bool {
        match self.items.get_mut(key) {
            Some(c) if !c.bytes.is_empty() => {
                let i = position % c.bytes.len();
                c.bytes[i] ^= 1 << (bit % 8);
                true
            }
            _ => false,
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &ChunkKey> {
        self.items.keys()
    }
}
