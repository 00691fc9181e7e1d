//! Per-node NDN engine: Content Store, Pending Interest Table, FIB, and the
//! standard Interest/Data pipeline. Knows nothing about geography; GeoFaces
//! are just face ids handed down by the link adaptation layer.

mod cs;
mod fib;
mod name;
mod pit;

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use cs::ContentStore;
pub use fib::{Fib, FibEntry};
pub use name::Name;
pub use pit::{InRecord, Pit, PitDecision, PitEntry};

use crate::geo::Position;
use crate::time::{SimDuration, SimTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FaceId(pub u32);

impl FaceId {
    /// Local application.
    pub const APP: FaceId = FaceId(0);
    /// Broadcast V2V face used for exploration flooding.
    pub const V2V: FaceId = FaceId(1);
    /// Wired backhaul (RSUs only).
    pub const WIRED: FaceId = FaceId(2);
    /// GeoFaces are allocated from here up.
    pub const FIRST_GEO: u32 = 16;

    pub fn is_geo(self) -> bool {
        self.0 >= Self::FIRST_GEO
    }
}

impl fmt::Display for FaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FaceId::APP => f.write_str("app"),
            FaceId::V2V => f.write_str("v2v"),
            FaceId::WIRED => f.write_str("wired"),
            FaceId(n) => write!(f, "geo{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interest {
    pub name: Name,
    pub nonce: u64,
    /// Prefix aggregating all pieces of the content; travels in the L2.5 header.
    pub routable_prefix: Name,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Data {
    pub name: Name,
    pub payload_size: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NdnParams {
    pub cs_capacity_bytes: u64,
    pub pit_lifetime_ms: u64,
    pub dead_nonce_capacity: usize,
}

impl Default for NdnParams {
    fn default() -> Self {
        NdnParams {
            cs_capacity_bytes: 10 * 1024 * 1024 * 1024,
            pit_lifetime_ms: 4_000,
            dead_nonce_capacity: 4_096,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InterestOutcome {
    /// Content Store hit; answer with this Data.
    CacheHit(Data),
    Forward,
    Aggregate,
    Duplicate,
}

#[derive(Debug, Clone)]
pub struct NdnNode {
    pub cs: ContentStore,
    pub pit: Pit,
    pub fib: Fib,
    pit_lifetime: SimDuration,
    dead_capacity: usize,
    dead_order: VecDeque<u64>,
    dead: HashSet<u64>,
}

impl NdnNode {
    pub fn new(params: &NdnParams) -> Self {
        NdnNode {
            cs: ContentStore::new(params.cs_capacity_bytes),
            pit: Pit::new(),
            fib: Fib::new(),
            pit_lifetime: SimDuration::from_millis(params.pit_lifetime_ms),
            dead_capacity: params.dead_nonce_capacity,
            dead_order: VecDeque::new(),
            dead: HashSet::new(),
        }
    }

    fn bury(&mut self, nonce: u64) {
        if self.dead.insert(nonce) {
            self.dead_order.push_back(nonce);
            while self.dead_order.len() > self.dead_capacity {
                if let Some(old) = self.dead_order.pop_front() {
                    self.dead.remove(&old);
                }
            }
        }
    }

    pub fn is_dead_nonce(&self, nonce: u64) -> bool {
        self.dead.contains(&nonce)
    }

    /// Incoming Interest: nonce loop check, then CS, then PIT.
    pub fn on_interest(
        &mut self,
        interest: &Interest,
        face: FaceId,
        prev_hop: Option<Position>,
        now: SimTime,
    ) -> InterestOutcome {
        if self.dead.contains(&interest.nonce) {
            return InterestOutcome::Duplicate;
        }
        if let Some(entry) = self.pit.get(&interest.name, now) {
            if entry.nonces_seen.contains(&interest.nonce) {
                return InterestOutcome::Duplicate;
            }
        }
        if let Some(data) = self.cs.lookup(&interest.name) {
            self.bury(interest.nonce);
            return InterestOutcome::CacheHit(data);
        }
        let record = InRecord {
            nonce: interest.nonce,
            prev_hop,
            arrived: now,
        };
        match self
            .pit
            .on_interest(&interest.name, record, face, now, self.pit_lifetime)
        {
            PitDecision::Forward => InterestOutcome::Forward,
            PitDecision::Aggregate => InterestOutcome::Aggregate,
            PitDecision::DuplicateDrop => InterestOutcome::Duplicate,
        }
    }

    /// The LAL declined to forward an Interest that the PIT accepted from
    /// `face`. Drops that downstream and remembers the nonce so later copies
    /// are not taken for a new request.
    pub fn abandon(&mut self, name: &Name, face: FaceId, nonce: u64) {
        self.pit.remove_downstream(name, face);
        self.bury(nonce);
    }

    /// Incoming Data. Returns the downstream faces to deliver to, or `None`
    /// when unsolicited (dropped, not cached).
    pub fn on_data(&mut self, data: &Data, now: SimTime) -> Option<Vec<(FaceId, InRecord)>> {
        let entry = self.pit.take(&data.name, now)?;
        for &n in &entry.nonces_seen {
            self.bury(n);
        }
        // payloads never exceed the store; an oversized one is just not cached
        let _ = self.cs.insert(data.clone());
        Some(entry.downstream.into_iter().collect())
    }
}
