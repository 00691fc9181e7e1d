use std::collections::BTreeMap;

use super::{FaceId, Name};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FibEntry {
    pub prefix: Name,
    /// Faces in registration order, without duplicates.
    pub faces: Vec<FaceId>,
}

/// Prefix -> faces table with longest-prefix-match lookup.
#[derive(Debug, Clone, Default)]
pub struct Fib {
    entries: BTreeMap<Name, FibEntry>,
}

impl Fib {
    pub fn new() -> Self {
        Fib::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, prefix: &Name) -> Option<&FibEntry> {
        self.entries.get(prefix)
    }

    pub fn lookup(&self, name: &Name) -> Option<&FibEntry> {
        (1..=name.len()).rev().find_map(|k| {
            if k == name.len() {
                self.entries.get(name)
            } else {
                self.entries.get(&name.prefix(k))
            }
        })
    }

    /// Idempotent per `(prefix, face)`. Returns true if the face was new.
    pub fn register(&mut self, prefix: &Name, face: FaceId) -> bool {
        let entry = self
            .entries
            .entry(prefix.clone())
            .or_insert_with(|| FibEntry {
                prefix: prefix.clone(),
                faces: Vec::new(),
            });
        if entry.faces.contains(&face) {
            false
        } else {
            entry.faces.push(face);
            true
        }
    }

    /// Removes one binding; deletes the entry with its last face.
    pub fn unbind(&mut self, prefix: &Name, face: FaceId) -> bool {
        let Some(entry) = self.entries.get_mut(prefix) else {
            return false;
        };
        let before = entry.faces.len();
        entry.faces.retain(|f| *f != face);
        let removed = entry.faces.len() != before;
        if entry.faces.is_empty() {
            self.entries.remove(prefix);
        }
        removed
    }

    /// Removes `face` from every entry.
    pub fn purge_face(&mut self, face: FaceId) {
        self.entries.retain(|_, e| {
            e.faces.retain(|f| *f != face);
            !e.faces.is_empty()
        });
    }

    pub fn references(&self, face: FaceId) -> bool {
        self.entries.values().any(|e| e.faces.contains(&face))
    }

    pub fn max_width(&self) -> usize {
        self.entries
            .values()
            .map(|e| e.faces.len())
            .max()
            .unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = &FibEntry> {
        self.entries.values()
    }
}
