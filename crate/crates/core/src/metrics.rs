//! Append-only event log and the report computed from it.
//!
//! Every number in [`MetricsReport`] is a pure function of the log, so a
//! persisted log replays to the identical report.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::lal::{DataSource, PacketClass};
use crate::ndn::Name;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "ev", rename_all = "snake_case")]
pub enum Event {
    /// A consumer application expressed an Interest. `first` is false for
    /// re-expressions after a timeout.
    Expressed {
        t_us: u64,
        node: u32,
        name: Name,
        first: bool,
    },
    /// Data reached the consumer application.
    Satisfied {
        t_us: u64,
        node: u32,
        name: Name,
        /// From the most recent expression of the name.
        rtt_us: u64,
        source: DataSource,
        responder: u32,
        /// The name had been expressed exactly once.
        first_issue: bool,
    },
    /// One frame put on the air.
    Transmission {
        t_us: u64,
        node: u32,
        class: PacketClass,
    },
    /// An Interest crossed an RSU backhaul to the origin server.
    ProducerRequest {
        t_us: u64,
        rsu: u32,
    },
    /// A song played to its end.
    SongEnded {
        t_us: u64,
        node: u32,
        song: usize,
        clean: bool,
    },
    QueueSample {
        t_us: u64,
        node: u32,
        depth: u32,
    },
    /// Faces bound to one prefix after a FIB registration grew it.
    FibWidth {
        t_us: u64,
        node: u32,
        width: u32,
    },
    /// A deadline expired and removed a GeoFace from a prefix. `width` is
    /// what remains bound.
    Unbound {
        t_us: u64,
        node: u32,
        width: u32,
    },
    /// MAC queue overflow.
    FrameDropped {
        t_us: u64,
        node: u32,
    },
}

#[derive(Debug, Clone, Default)]
pub struct EventLog {
    events: Vec<Event>,
}

impl EventLog {
    pub fn new() -> Self {
        EventLog::default()
    }

    pub fn push(&mut self, event: Event) {
        self.events.push(event);
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self, String> {
        let mut events = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line.map_err(|e| e.to_string())?;
            if line.trim().is_empty() {
                continue;
            }
            events.push(serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", i + 1))?);
        }
        Ok(EventLog { events })
    }
}

impl From<Vec<Event>> for EventLog {
    fn from(events: Vec<Event>) -> Self {
        EventLog { events }
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn count(log: &[Event], f: impl Fn(&Event) -> bool) -> usize {
    log.iter().filter(|e| f(e)).count()
}

fn satisfied(log: &[Event]) -> usize {
    count(log, |e| matches!(e, Event::Satisfied { .. }))
}

/// Satisfied Interests over Interests issued, re-expressions included.
pub fn success_rate(log: &[Event]) -> Option<f64> {
    ratio(
        satisfied(log),
        count(log, |e| matches!(e, Event::Expressed { .. })),
    )
}

/// Songs played to the end without a buffer underrun, over songs played to the end.
pub fn user_satisfaction(log: &[Event]) -> Option<f64> {
    ratio(
        count(log, |e| matches!(e, Event::SongEnded { clean: true, .. })),
        count(log, |e| matches!(e, Event::SongEnded { .. })),
    )
}

/// Interest and Data frames on the air per satisfied Interest.
pub fn overhead(log: &[Event]) -> Option<f64> {
    ratio(
        count(log, |e| matches!(e, Event::Transmission { .. })),
        satisfied(log),
    )
}

/// Requests reaching the origin server per satisfied Interest.
pub fn infra_load(log: &[Event]) -> Option<f64> {
    ratio(
        count(log, |e| matches!(e, Event::ProducerRequest { .. })),
        satisfied(log),
    )
}

/// Share of first-issue satisfactions answered from a cache. Re-issued
/// Interests are left out. With `mules_only`, only car caches count.
pub fn infra_offload(log: &[Event], mules_only: bool) -> Option<f64> {
    let firsts = log.iter().filter_map(|e| match e {
        Event::Satisfied {
            source,
            first_issue: true,
            ..
        } => Some(*source),
        _ => None,
    });
    let (mut hits, mut total) = (0, 0);
    for source in firsts {
        total += 1;
        let cached = match source {
            DataSource::CarCache => true,
            DataSource::RsuCache => !mules_only,
            DataSource::Origin => false,
        };
        hits += cached as usize;
    }
    ratio(hits, total)
}

/// Nearest-rank percentile of the Interest-Data round trips, in ms.
pub fn rtt_percentile(log: &[Event], p: f64) -> Option<f64> {
    let mut rtts: Vec<u64> = log
        .iter()
        .filter_map(|e| match e {
            Event::Satisfied { rtt_us, .. } => Some(*rtt_us),
            _ => None,
        })
        .collect();
    nearest_rank(&mut rtts, p).map(|us| us as f64 / 1000.0)
}

pub fn nearest_rank(values: &mut [u64], p: f64) -> Option<u64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable();
    let rank = ((p / 100.0) * values.len() as f64).ceil().max(1.0) as usize;
    Some(values[rank.min(values.len()) - 1])
}

/// Histogram: number of distinct mules that served a consumer -> consumers.
pub fn mules_per_consumer(log: &[Event]) -> BTreeMap<usize, usize> {
    let mut mules: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
    for e in log {
        match e {
            Event::Expressed { node, .. } => {
                mules.entry(*node).or_default();
            }
            Event::Satisfied {
                node,
                source: DataSource::CarCache,
                responder,
                ..
            } => {
                mules.entry(*node).or_default().insert(*responder);
            }
            _ => {}
        }
    }
    let mut hist = BTreeMap::new();
    for set in mules.values() {
        *hist.entry(set.len()).or_insert(0) += 1;
    }
    hist
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub interests_expressed: usize,
    pub interests_satisfied: usize,
    pub first_issue_satisfied: usize,
    pub interest_transmissions: usize,
    pub data_transmissions: usize,
    pub producer_requests: usize,
    pub songs_completed: usize,
    pub frames_dropped: usize,
    pub success_rate: Option<f64>,
    pub user_satisfaction: Option<f64>,
    pub channel_accesses_per_satisfied: Option<f64>,
    pub infra_load: Option<f64>,
    pub infra_offload: Option<f64>,
    pub offload_mules_only: Option<f64>,
    pub mules_per_consumer: BTreeMap<usize, usize>,
    pub rtt_p50_ms: Option<f64>,
    pub rtt_p95_ms: Option<f64>,
    pub max_faces_per_prefix: u32,
    pub mean_queue_depth: Option<f64>,
    pub max_queue_depth: u32,
}

impl MetricsReport {
    pub fn from_log(log: &[Event]) -> Self {
        let mut depth_sum = 0u64;
        let mut depth_n = 0usize;
        let mut depth_max = 0u32;
        let mut width = 0u32;
        for e in log {
            match e {
                Event::QueueSample { depth, .. } => {
                    depth_sum += *depth as u64;
                    depth_n += 1;
                    depth_max = depth_max.max(*depth);
                }
                Event::FibWidth { width: w, .. } => width = width.max(*w),
                _ => {}
            }
        }
        MetricsReport {
            schema_version: REPORT_SCHEMA_VERSION,
            interests_expressed: count(log, |e| matches!(e, Event::Expressed { .. })),
            interests_satisfied: satisfied(log),
            first_issue_satisfied: count(log, |e| {
                matches!(
                    e,
                    Event::Satisfied {
                        first_issue: true,
                        ..
                    }
                )
            }),
            interest_transmissions: count(log, |e| {
                matches!(
                    e,
                    Event::Transmission {
                        class: PacketClass::Interest,
                        ..
                    }
                )
            }),
            data_transmissions: count(log, |e| {
                matches!(
                    e,
                    Event::Transmission {
                        class: PacketClass::Data,
                        ..
                    }
                )
            }),
            producer_requests: count(log, |e| matches!(e, Event::ProducerRequest { .. })),
            songs_completed: count(log, |e| matches!(e, Event::SongEnded { .. })),
            frames_dropped: count(log, |e| matches!(e, Event::FrameDropped { .. })),
            success_rate: success_rate(log),
            user_satisfaction: user_satisfaction(log),
            channel_accesses_per_satisfied: overhead(log),
            infra_load: infra_load(log),
            infra_offload: infra_offload(log, false),
            offload_mules_only: infra_offload(log, true),
            mules_per_consumer: mules_per_consumer(log),
            rtt_p50_ms: rtt_percentile(log, 50.0),
            rtt_p95_ms: rtt_percentile(log, 95.0),
            max_faces_per_prefix: width,
            mean_queue_depth: (depth_n > 0).then(|| depth_sum as f64 / depth_n as f64),
            max_queue_depth: depth_max,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `t_ms,node_id,queue_depth`
pub fn write_queue_csv<W: Write>(log: &[Event], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t_ms", "node_id", "queue_depth"])?;
    for e in log {
        if let Event::QueueSample { t_us, node, depth } = e {
            out.write_record([fmt_ms(*t_us), node.to_string(), depth.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// `t_ms,rtt_ms`
pub fn write_rtt_csv<W: Write>(log: &[Event], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t_ms", "rtt_ms"])?;
    for e in log {
        if let Event::Satisfied { t_us, rtt_us, .. } = e {
            out.write_record([fmt_ms(*t_us), fmt_ms(*rtt_us)])?;
        }
    }
    out.flush()?;
    Ok(())
}

fn fmt_ms(us: u64) -> String {
    format!("{}.{:03}", us / 1000, us % 1000)
}

/// Per-name bookkeeping for `first_issue` and RTT, kept by the simulator
/// while it appends to the log.
#[derive(Debug, Clone, Default)]
pub struct ExpressionTracker {
    last: HashMap<(u32, Name), (u64, u32)>,
}

impl ExpressionTracker {
    /// Records an expression. Returns true if it is the first for this name.
    pub fn expressed(&mut self, node: u32, name: &Name, t_us: u64) -> bool {
        let entry = self.last.entry((node, name.clone())).or_insert((t_us, 0));
        entry.0 = t_us;
        entry.1 += 1;
        entry.1 == 1
    }

    /// Closes the name out. Returns `(rtt_us, first_issue)`.
    pub fn satisfied(&mut self, node: u32, name: &Name, t_us: u64) -> Option<(u64, bool)> {
        let (sent, n) = self.last.remove(&(node, name.clone()))?;
        Some((t_us - sent, n == 1))
    }
}
