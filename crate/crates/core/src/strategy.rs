//! Forwarding strategies for locally expressed Interests.
//!
//! Navigo exploits a known GeoFace (round-robin when several are bound) and
//! keeps exploring by flooding with probability `1 - p` when only one is
//! known. Interests sent on a GeoFace arm a deadline; a miss unbinds the face
//! from the prefix, a hit lifts the deadlines of every other Interest of the
//! prefix pending on that face. The flood baseline always floods.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ndn::{FaceId, Fib, FibEntry, Name};
use crate::time::{SimDuration, SimTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Navigo,
    Flood,
}

impl std::str::FromStr for StrategyKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "navigo" => Ok(StrategyKind::Navigo),
            "flood" => Ok(StrategyKind::Flood),
            other => Err(format!(
                "unknown strategy {other:?} (expected navigo or flood)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategyParams {
    pub kind: StrategyKind,
    /// Probability of using the single known face instead of exploring.
    pub exploit_probability: f64,
    pub deadline_ms: u64,
}

impl Default for StrategyParams {
    fn default() -> Self {
        StrategyParams {
            kind: StrategyKind::Navigo,
            exploit_probability: 0.95,
            deadline_ms: 300,
        }
    }
}

impl StrategyParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.exploit_probability > 0.0 && self.exploit_probability <= 1.0) {
            return Err(format!(
                "exploit_probability must be in (0, 1], got {}",
                self.exploit_probability
            ));
        }
        if self.deadline_ms == 0 {
            return Err("deadline_ms must be positive".into());
        }
        Ok(())
    }

    pub fn deadline(&self) -> SimDuration {
        SimDuration::from_millis(self.deadline_ms)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Choice {
    Face(FaceId),
    Flood,
}

#[derive(Debug, Clone, PartialEq)]
struct SentRecord {
    prefix: Name,
    face: FaceId,
    deadline: Option<SimTime>,
}

#[derive(Debug, Clone)]
pub struct Strategy {
    params: StrategyParams,
    cursors: HashMap<Name, usize>,
    sent: HashMap<Name, SentRecord>,
}

impl Strategy {
    pub fn new(params: StrategyParams) -> Self {
        Strategy {
            params,
            cursors: HashMap::new(),
            sent: HashMap::new(),
        }
    }

    pub fn params(&self) -> &StrategyParams {
        &self.params
    }

    pub fn choose_face<R: Rng + ?Sized>(
        &mut self,
        entry: Option<&FibEntry>,
        rng: &mut R,
    ) -> Choice {
        if self.params.kind == StrategyKind::Flood {
            return Choice::Flood;
        }
        let Some(entry) = entry.filter(|e| !e.faces.is_empty()) else {
            return Choice::Flood;
        };
        if entry.faces.len() == 1 {
            return if rng.random::<f64>() < self.params.exploit_probability {
                Choice::Face(entry.faces[0])
            } else {
                Choice::Flood
            };
        }
        let cursor = self.cursors.entry(entry.prefix.clone()).or_insert(0);
        let face = entry.faces[*cursor % entry.faces.len()];
        *cursor = cursor.wrapping_add(1);
        Choice::Face(face)
    }

    /// Records a send. A GeoFace send arms a deadline, which is returned so
    /// the caller can schedule it.
    pub fn on_sent(
        &mut self,
        name: &Name,
        prefix: &Name,
        choice: Choice,
        now: SimTime,
    ) -> Option<SimTime> {
        match choice {
            Choice::Face(face) if face.is_geo() => {
                let deadline = now + self.params.deadline();
                self.sent.insert(
                    name.clone(),
                    SentRecord {
                        prefix: prefix.clone(),
                        face,
                        deadline: Some(deadline),
                    },
                );
                Some(deadline)
            }
            _ => {
                self.sent.remove(name);
                None
            }
        }
    }

    /// Deadline event for `name` scheduled at `at`. Unbinds the face if the
    /// deadline is still armed. Returns the binding if it was still there.
    pub fn on_deadline(
        &mut self,
        name: &Name,
        at: SimTime,
        fib: &mut Fib,
    ) -> Option<(Name, FaceId)> {
        let rec = self.sent.get(name)?;
        if rec.deadline != Some(at) {
            return None;
        }
        let rec = self.sent.remove(name).expect("checked above");
        fib.unbind(&rec.prefix, rec.face)
            .then_some((rec.prefix, rec.face))
    }

    /// `name` was satisfied by Data that came in on face `via`. If that is
    /// the face the Interest went out on, lifts the deadlines of all other
    /// Interests for the same prefix pending on it. Returns how many were
    /// lifted.
    pub fn on_satisfaction(&mut self, name: &Name, via: Option<FaceId>) -> usize {
        let Some(rec) = self.sent.remove(name) else {
            return 0;
        };
        if via != Some(rec.face) {
            return 0;
        }
        let mut lifted = 0;
        for other in self.sent.values_mut() {
            if other.face == rec.face && other.prefix == rec.prefix && other.deadline.is_some() {
                other.deadline = None;
                lifted += 1;
            }
        }
        lifted
    }

    /// Forgets a send without touching the FIB (e.g. the session ended).
    pub fn forget(&mut self, name: &Name) {
        self.sent.remove(name);
    }

    pub fn armed_deadline(&self, name: &Name) -> Option<SimTime> {
        self.sent.get(name).and_then(|r| r.deadline)
    }

    pub fn outstanding(&self) -> usize {
        self.sent.len()
    }
}
