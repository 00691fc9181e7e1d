use std::collections::{BTreeMap, HashMap};

use crate::geo::Position;
use crate::time::{SimDuration, SimTime};

use super::{FaceId, Name};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PitDecision {
    Forward,
    Aggregate,
    DuplicateDrop,
}

/// Where and how an Interest reached us on one downstream face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InRecord {
    pub nonce: u64,
    /// Position of the previous hop, for Interests heard over the air.
    pub prev_hop: Option<Position>,
    pub arrived: SimTime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PitEntry {
    pub name: Name,
    pub downstream: BTreeMap<FaceId, InRecord>,
    pub nonces_seen: Vec<u64>,
    pub created: SimTime,
    pub expires: SimTime,
}

#[derive(Debug, Clone, Default)]
pub struct Pit {
    entries: HashMap<Name, PitEntry>,
}

impl Pit {
    pub fn new() -> Self {
        Pit::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &Name, now: SimTime) -> Option<&PitEntry> {
        self.entries.get(name).filter(|e| e.expires > now)
    }

    /// New name: Forward. Seen nonce: DuplicateDrop. New nonce from a new
    /// face: Aggregate. New nonce from a face already listed is a
    /// retransmission and is forwarded again.
    pub fn on_interest(
        &mut self,
        name: &Name,
        record: InRecord,
        face: FaceId,
        now: SimTime,
        lifetime: SimDuration,
    ) -> PitDecision {
        match self.entries.get_mut(name) {
            Some(entry) if entry.expires > now => {
                if entry.nonces_seen.contains(&record.nonce) {
                    return PitDecision::DuplicateDrop;
                }
                entry.nonces_seen.push(record.nonce);
                entry.expires = entry.expires.max(now + lifetime);
                let retransmission = entry.downstream.contains_key(&face);
                entry.downstream.insert(face, record);
                if retransmission {
                    PitDecision::Forward
                } else {
                    PitDecision::Aggregate
                }
            }
            _ => {
                let mut downstream = BTreeMap::new();
                downstream.insert(face, record);
                self.entries.insert(
                    name.clone(),
                    PitEntry {
                        name: name.clone(),
                        downstream,
                        nonces_seen: vec![record.nonce],
                        created: now,
                        expires: now + lifetime,
                    },
                );
                PitDecision::Forward
            }
        }
    }

    /// Removes and returns the live entry for `name` (Data satisfaction).
    pub fn take(&mut self, name: &Name, now: SimTime) -> Option<PitEntry> {
        let entry = self.entries.remove(name)?;
        (entry.expires > now).then_some(entry)
    }

    /// Drops one downstream face; the entry goes away with its last face.
    pub fn remove_downstream(&mut self, name: &Name, face: FaceId) {
        if let Some(entry) = self.entries.get_mut(name) {
            entry.downstream.remove(&face);
            if entry.downstream.is_empty() {
                self.entries.remove(name);
            }
        }
    }

    pub fn purge_expired(&mut self, now: SimTime) -> usize {
        let before = self.entries.len();
        self.entries.retain(|_, e| e.expires > now);
        before - self.entries.len()
    }
}
