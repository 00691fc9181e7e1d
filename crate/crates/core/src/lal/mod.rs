//! Link Adaptation Layer: the shim between the NDN engine and the broadcast
//! radio. It owns the GeoFace/geo-area bindings, carries destination and
//! previous-hop information in the L2.5 header, and decides on the receiver
//! side whether and when an overheard packet is worth re-broadcasting.

mod header;
mod timer;

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

pub use header::L25Header;
pub use timer::{ClassTimers, PacketClass, TimerParams};

use crate::geo::{GeoArea, GeoGrid, Position};
use crate::ndn::{Data, FaceId, Fib, Interest, Name};
use crate::road::{project_on_segment, RoadGraph, Router};
use crate::time::{SimDuration, SimTime};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LalParams {
    pub timers: TimerParams,
    /// Half-width of the strip between two hops whose cars get suppressed.
    pub corridor_m: f64,
    pub face_idle_s: f64,
    pub ack_retries: u8,
    pub interest_table_capacity: usize,
}

impl Default for LalParams {
    fn default() -> Self {
        LalParams {
            timers: TimerParams::default(),
            corridor_m: 20.0,
            face_idle_s: 30.0,
            ack_retries: 2,
            interest_table_capacity: 4096,
        }
    }
}

impl LalParams {
    pub fn validate(&self) -> Result<(), String> {
        self.timers.validate()?;
        if !(self.corridor_m.is_finite() && self.corridor_m >= 0.0) {
            return Err(format!(
                "corridor_m must be non-negative, got {}",
                self.corridor_m
            ));
        }
        if !(self.face_idle_s.is_finite() && self.face_idle_s > 0.0) {
            return Err(format!(
                "face_idle_s must be positive, got {}",
                self.face_idle_s
            ));
        }
        if self.interest_table_capacity == 0 {
            return Err("interest_table_capacity must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Packet {
    Interest(Interest),
    Data(Data),
}

impl Packet {
    pub fn name(&self) -> &Name {
        match self {
            Packet::Interest(i) => &i.name,
            Packet::Data(d) => &d.name,
        }
    }

    pub fn class(&self) -> PacketClass {
        match self {
            Packet::Interest(_) => PacketClass::Interest,
            Packet::Data(_) => PacketClass::Data,
        }
    }
}

/// Where a Data packet was produced. Simulation bookkeeping, not on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Origin,
    RsuCache,
    CarCache,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lineage {
    pub responder: u32,
    pub source: DataSource,
}

/// A packet with its L2.5 encapsulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub packet: Packet,
    pub header: L25Header,
    pub lineage: Option<Lineage>,
}

/// Fixed part of an Interest frame beyond name and header.
pub const INTEREST_BASE_BYTES: usize = 60;

impl Frame {
    pub fn wire_len(&self, grid: &GeoGrid) -> usize {
        let body = match &self.packet {
            Packet::Interest(i) => INTEREST_BASE_BYTES + i.name.wire_len(),
            Packet::Data(d) => d.payload_size as usize + d.name.wire_len(),
        };
        body + self.header.wire_len(grid)
    }
}

/// Face-to-Area table: a bijection between GeoFaces and geo-areas with
/// per-face idle tracking.
#[derive(Debug, Clone)]
pub struct F2aTable {
    by_face: BTreeMap<FaceId, (GeoArea, SimTime)>,
    by_area: HashMap<GeoArea, FaceId>,
    next_id: u32,
    idle: SimDuration,
}

impl F2aTable {
    pub fn new(idle: SimDuration) -> Self {
        F2aTable {
            by_face: BTreeMap::new(),
            by_area: HashMap::new(),
            next_id: FaceId::FIRST_GEO,
            idle,
        }
    }

    pub fn len(&self) -> usize {
        self.by_face.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_face.is_empty()
    }

    fn is_stale(&self, last: SimTime, now: SimTime) -> bool {
        now.saturating_since(last) >= self.idle
    }

    /// Returns the face bound to `area`, creating one if needed. A binding
    /// idle past the timeout is torn down first, FIB references included.
    pub fn get_or_create(&mut self, area: GeoArea, now: SimTime, fib: &mut Fib) -> FaceId {
        if let Some(&face) = self.by_area.get(&area) {
            let last = self.by_face[&face].1;
            if !self.is_stale(last, now) {
                self.by_face.insert(face, (area, now));
                return face;
            }
            self.remove(face, fib);
        }
        let face = FaceId(self.next_id);
        self.next_id += 1;
        self.by_face.insert(face, (area, now));
        self.by_area.insert(area, face);
        face
    }

    pub fn lookup_area(&self, face: FaceId) -> Option<GeoArea> {
        self.by_face.get(&face).map(|(a, _)| *a)
    }

    pub fn lookup_face(&self, area: &GeoArea) -> Option<FaceId> {
        self.by_area.get(area).copied()
    }

    pub fn touch(&mut self, face: FaceId, now: SimTime) {
        if let Some(entry) = self.by_face.get_mut(&face) {
            entry.1 = entry.1.max(now);
        }
    }

    fn remove(&mut self, face: FaceId, fib: &mut Fib) {
        if let Some((area, _)) = self.by_face.remove(&face) {
            self.by_area.remove(&area);
        }
        fib.purge_face(face);
    }

    /// Drops every face idle past the timeout. Returns the removed faces.
    pub fn expire(&mut self, now: SimTime, fib: &mut Fib) -> Vec<FaceId> {
        let stale: Vec<FaceId> = self
            .by_face
            .iter()
            .filter(|(_, (_, last))| self.is_stale(*last, now))
            .map(|(f, _)| *f)
            .collect();
        for &f in &stale {
            self.remove(f, fib);
        }
        stale
    }

    pub fn iter(&self) -> impl Iterator<Item = (FaceId, GeoArea)> + '_ {
        self.by_face.iter().map(|(f, (a, _))| (*f, *a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetInterest {
    pub prev_hop: Position,
    pub dest_area: Option<GeoArea>,
    pub arrived: SimTime,
}

/// Nonce-indexed memory of Interests heard over the air, so the LAL can
/// restore the consumer's destination area when the NDN engine hands the
/// Interest back for forwarding.
#[derive(Debug, Clone)]
pub struct InterestFromNetwork {
    capacity: usize,
    entries: HashMap<u64, NetInterest>,
    order: VecDeque<u64>,
}

impl InterestFromNetwork {
    pub fn new(capacity: usize) -> Self {
        InterestFromNetwork {
            capacity,
            entries: HashMap::new(),
            order: VecDeque::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn store(&mut self, nonce: u64, info: NetInterest) {
        if self.entries.insert(nonce, info).is_none() {
            self.order.push_back(nonce);
            while self.entries.len() > self.capacity {
                match self.order.pop_front() {
                    Some(old) => {
                        self.entries.remove(&old);
                    }
                    None => break,
                }
            }
        }
    }

    pub fn get(&self, nonce: u64) -> Option<&NetInterest> {
        self.entries.get(&nonce)
    }

    /// Removes the entry; the order queue is cleaned lazily.
    pub fn consume(&mut self, nonce: u64) -> Option<NetInterest> {
        let info = self.entries.remove(&nonce)?;
        if self.order.front() == Some(&nonce) {
            self.order.pop_front();
        }
        Some(info)
    }
}

/// Per-node LAL state.
#[derive(Debug, Clone)]
pub struct Lal {
    pub f2a: F2aTable,
    pub from_network: InterestFromNetwork,
    pub malformed: u64,
}

impl Lal {
    pub fn new(params: &LalParams) -> Self {
        Lal {
            f2a: F2aTable::new(SimDuration::from_millis_f64(params.face_idle_s * 1e3)),
            from_network: InterestFromNetwork::new(params.interest_table_capacity),
            malformed: 0,
        }
    }

    /// An Interest arrived over the air. Records its header and returns the
    /// face the NDN engine should see it on.
    pub fn on_wire_interest(&mut self, header: &L25Header, now: SimTime, fib: &mut Fib) -> FaceId {
        self.from_network.store(
            header.nonce,
            NetInterest {
                prev_hop: header.prev_hop,
                dest_area: header.dest_area,
                arrived: now,
            },
        );
        match header.dest_area {
            Some(area) => self.f2a.get_or_create(area, now, fib),
            None => FaceId::V2V,
        }
    }

    /// A Data packet arrived over the air. Returns the face it is delivered
    /// on: the GeoFace of the provider's area, or the v2v face without one.
    pub fn on_wire_data(&mut self, header: &L25Header, now: SimTime, fib: &mut Fib) -> FaceId {
        match header.provider_area {
            Some(area) => self.f2a.get_or_create(area, now, fib),
            None => FaceId::V2V,
        }
    }

    /// After the NDN engine accepted the Data: bind the routable prefix to
    /// the provider's GeoFace. Returns the new face count for the prefix.
    pub fn learn(&mut self, prefix: &Name, face: FaceId, fib: &mut Fib) -> Option<usize> {
        if !face.is_geo() {
            return None;
        }
        fib.register(prefix, face);
        fib.get(prefix).map(|e| e.faces.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    NotCloser,
    Unreachable,
    /// The previous hop was already inside the destination area and we are not.
    LeftArea,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ForwardDecision {
    /// Toward the destination area; ACK expected from `next_street`.
    Directed {
        next_street: usize,
        cost: f64,
    },
    /// Inside the destination area: flood locally.
    LocalFlood,
    /// No destination area: exploration flood.
    Flood,
    Drop(DropReason),
}

/// Receiver-side decision for an overheard Interest.
pub fn forward_decision(
    router: &Router,
    my_pos: &Position,
    prev_pos: &Position,
    dest_area: Option<&GeoArea>,
) -> ForwardDecision {
    let Some(area) = dest_area else {
        return ForwardDecision::Flood;
    };
    let grid = router.grid();
    if grid.area_contains(area, my_pos) {
        return ForwardDecision::LocalFlood;
    }
    if grid.area_contains(area, prev_pos) {
        return ForwardDecision::Drop(DropReason::LeftArea);
    }
    let mine = router.path(my_pos, area);
    if !mine.reachable {
        return ForwardDecision::Drop(DropReason::Unreachable);
    }
    let prev = router.cost(prev_pos, area);
    if mine.cost < prev {
        ForwardDecision::Directed {
            next_street: next_hop_street(router.graph(), my_pos, &mine.route),
            cost: mine.cost,
        }
    } else {
        ForwardDecision::Drop(DropReason::NotCloser)
    }
}

/// Decision for a locally generated Interest sent toward `dest_area`.
/// Never drops: the consumer's own send always goes out.
pub fn origin_decision(
    router: &Router,
    my_pos: &Position,
    dest_area: Option<&GeoArea>,
) -> ForwardDecision {
    let Some(area) = dest_area else {
        return ForwardDecision::Flood;
    };
    if router.grid().area_contains(area, my_pos) {
        return ForwardDecision::LocalFlood;
    }
    let path = router.path(my_pos, area);
    if !path.reachable {
        return ForwardDecision::Flood;
    }
    ForwardDecision::Directed {
        next_street: next_hop_street(router.graph(), my_pos, &path.route),
        cost: path.cost,
    }
}

/// The logical street a packet leaves on: the street toward the second
/// route node when standing at the first one (within the FP2 radius, corners
/// included), else the street being driven on.
pub fn next_hop_street(graph: &RoadGraph, my_pos: &Position, route: &[usize]) -> usize {
    if let [first, second, ..] = route {
        if graph.nodes()[*first].distance(my_pos) <= graph.params().fp2_radius_m {
            if let Some(&(_, e)) = graph.neighbors(*first).iter().find(|(n, _)| n == second) {
                return graph.logical_of_edge(e);
            }
        }
    }
    graph.logical_of_edge(graph.project(my_pos).edge)
}

/// Data goes back toward the node the Interest came from; forward only when
/// that brings it strictly closer than the hop we heard it from.
pub fn data_should_forward(
    my_pos: &Position,
    sender_pos: &Position,
    interest_prev_hop: &Position,
) -> bool {
    my_pos.distance(interest_prev_hop) < sender_pos.distance(interest_prev_hop)
}

/// True when `me` lies in the strip between `sender` and `forwarder`.
pub fn between(me: &Position, sender: &Position, forwarder: &Position, corridor_m: f64) -> bool {
    let (dx, dy) = (forwarder.x - sender.x, forwarder.y - sender.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return me.distance(sender) <= corridor_m;
    }
    let t = ((me.x - sender.x) * dx + (me.y - sender.y) * dy) / len2;
    if !(0.0..=1.0).contains(&t) {
        return false;
    }
    project_on_segment(me, sender, forwarder).1 <= corridor_m
}

/// Whether a node waiting to forward should give up after overhearing the
/// same packet re-broadcast by `forwarder`. `sender` is the previous hop the
/// waiting node originally heard it from.
pub fn suppressed(
    graph: &RoadGraph,
    me: &Position,
    sender: &Position,
    forwarder: &Position,
    corridor_m: f64,
) -> bool {
    if between(me, sender, forwarder, corridor_m) {
        return true;
    }
    // a peer in the same junction fired first, so its timer was lower
    matches!((graph.junction_at(me), graph.junction_at(forwarder)), (Some(a), Some(b)) if a == b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TxState {
    /// Waiting for the forwarding timer.
    Waiting,
    /// Handed to the MAC queue.
    Queued,
    /// Sent; waiting for implicit ACKs until the deadline.
    AwaitingAck { deadline: SimTime },
}

/// A broadcast the LAL committed to, from timer start to the last ACK.
#[derive(Debug, Clone)]
pub struct PendingTransmission {
    pub frame: Frame,
    pub fire_time: SimTime,
    /// Logical streets still owing an implicit ACK. Empty for Data.
    pub required_acks: Vec<usize>,
    pub retries_left: u8,
    pub state: TxState,
    /// Where the packet was heard from, for suppression.
    pub heard_from: Option<Position>,
}

impl PendingTransmission {
    pub fn nonce(&self) -> u64 {
        self.frame.header.nonce
    }

    /// Marks the streets of an overheard copy as acknowledged. True once
    /// every required direction has answered.
    pub fn ack(&mut self, streets: &[usize]) -> bool {
        self.required_acks.retain(|s| !streets.contains(s));
        self.required_acks.is_empty()
    }

    pub fn ack_all(&mut self) {
        self.required_acks.clear();
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::road::{manhattan_segments, RawSegment, RoadParams};

    fn area(e: u32, n: u32) -> GeoArea {
        GeoArea {
            easting: e,
            northing: n,
            precision: 3,
        }
    }

    fn secs(s: u64) -> SimTime {
        SimTime(s * 1_000_000)
    }

    #[test]
    fn same_area_same_face() {
        let mut fib = Fib::new();
        let mut t = F2aTable::new(SimDuration::from_secs(30));
        let a = t.get_or_create(area(1, 1), SimTime::ZERO, &mut fib);
        assert_eq!(t.get_or_create(area(1, 1), secs(1), &mut fib), a);
        let b = t.get_or_create(area(2, 1), secs(1), &mut fib);
        assert_ne!(a, b);
        assert!(a.is_geo() && b.is_geo());
        assert_eq!(t.lookup_area(b), Some(area(2, 1)));
        assert_eq!(t.lookup_face(&area(1, 1)), Some(a));
    }

    #[test]
    fn idle_face_is_replaced_and_fib_purged() {
        let mut fib = Fib::new();
        let mut t = F2aTable::new(SimDuration::from_secs(30));
        let a = t.get_or_create(area(1, 1), SimTime::ZERO, &mut fib);
        fib.register(&"/p/s".parse().unwrap(), a);
        let a2 = t.get_or_create(area(1, 1), secs(31), &mut fib);
        assert_ne!(a, a2);
        assert!(!fib.references(a));
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn expire_sweeps_idle_faces() {
        let mut fib = Fib::new();
        let mut t = F2aTable::new(SimDuration::from_secs(30));
        let a = t.get_or_create(area(1, 1), SimTime::ZERO, &mut fib);
        let b = t.get_or_create(area(2, 2), secs(20), &mut fib);
        fib.register(&"/p/s".parse().unwrap(), a);
        fib.register(&"/p/s".parse().unwrap(), b);
        assert_eq!(t.expire(secs(35), &mut fib), vec![a]);
        assert_eq!(fib.get(&"/p/s".parse().unwrap()).unwrap().faces, vec![b]);
        t.touch(b, secs(40));
        assert!(t.expire(secs(60), &mut fib).is_empty());
    }

    #[test]
    fn wire_interest_faces() {
        let mut fib = Fib::new();
        let mut lal = Lal::new(&LalParams::default());
        let h = L25Header::interest(
            5,
            Position::new(1.0, 1.0),
            Some(area(3, 2)),
            "/p".parse().unwrap(),
        );
        let f = lal.on_wire_interest(&h, SimTime::ZERO, &mut fib);
        assert_eq!(lal.f2a.lookup_area(f), Some(area(3, 2)));
        assert_eq!(lal.from_network.get(5).unwrap().dest_area, Some(area(3, 2)));
        let h = L25Header::interest(6, Position::new(1.0, 1.0), None, "/p".parse().unwrap());
        assert_eq!(
            lal.on_wire_interest(&h, SimTime::ZERO, &mut fib),
            FaceId::V2V
        );
        // same nonce again: refreshed, still delivered
        let h2 = L25Header::interest(6, Position::new(9.0, 9.0), None, "/p".parse().unwrap());
        assert_eq!(lal.on_wire_interest(&h2, SimTime(5), &mut fib), FaceId::V2V);
        assert_eq!(
            lal.from_network.get(6).unwrap().prev_hop,
            Position::new(9.0, 9.0)
        );
    }

    #[test]
    fn data_learning() {
        let mut fib = Fib::new();
        let mut lal = Lal::new(&LalParams::default());
        let prefix: Name = "/p/song1".parse().unwrap();
        let hx = L25Header::data(
            1,
            Position::new(0.0, 0.0),
            Some(area(1, 1)),
            Some(prefix.clone()),
        );
        let fx = lal.on_wire_data(&hx, SimTime::ZERO, &mut fib);
        assert_eq!(lal.learn(&prefix, fx, &mut fib), Some(1));
        let hy = L25Header::data(
            2,
            Position::new(0.0, 0.0),
            Some(area(4, 4)),
            Some(prefix.clone()),
        );
        let fy = lal.on_wire_data(&hy, SimTime::ZERO, &mut fib);
        assert_eq!(lal.learn(&prefix, fy, &mut fib), Some(2));
        let none = L25Header::data(3, Position::new(0.0, 0.0), None, None);
        assert_eq!(
            lal.on_wire_data(&none, SimTime::ZERO, &mut fib),
            FaceId::V2V
        );
        assert_eq!(lal.learn(&prefix, FaceId::V2V, &mut fib), None);
    }

    #[test]
    fn interest_table_is_bounded() {
        let mut t = InterestFromNetwork::new(3);
        let info = NetInterest {
            prev_hop: Position::new(0.0, 0.0),
            dest_area: None,
            arrived: SimTime::ZERO,
        };
        for n in 0..5 {
            t.store(n, info);
        }
        assert_eq!(t.len(), 3);
        assert!(t.get(0).is_none() && t.get(1).is_none());
        assert!(t.consume(4).is_some());
        assert!(t.consume(4).is_none());
    }

    fn router() -> Router {
        // 5x5 blocks of 200 m, all two-lane
        let g = RoadGraph::build(
            &manhattan_segments(5, 5, 200.0, |_, _, _| 2),
            RoadParams::default(),
        )
        .unwrap();
        Router::new(Arc::new(g), GeoGrid::default())
    }

    #[test]
    fn forward_only_when_cheaper() {
        let r = router();
        let da = area(3, 0);
        let prev = Position::new(100.0, 0.0);
        match forward_decision(&r, &Position::new(300.0, 0.0), &prev, Some(&da)) {
            ForwardDecision::Directed { cost, .. } => assert!((cost - 300.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            forward_decision(&r, &prev, &Position::new(300.0, 0.0), Some(&da)),
            ForwardDecision::Drop(DropReason::NotCloser)
        );
        // equal cost drops
        assert_eq!(
            forward_decision(
                &r,
                &Position::new(300.0, 200.0),
                &Position::new(300.0, 0.0),
                Some(&da)
            ),
            ForwardDecision::Drop(DropReason::NotCloser)
        );
        assert_eq!(
            forward_decision(&r, &Position::new(650.0, 0.0), &prev, Some(&da)),
            ForwardDecision::LocalFlood
        );
        assert_eq!(
            forward_decision(
                &r,
                &Position::new(500.0, 0.0),
                &Position::new(650.0, 0.0),
                Some(&da)
            ),
            ForwardDecision::Drop(DropReason::LeftArea)
        );
        assert_eq!(
            forward_decision(&r, &prev, &prev, None),
            ForwardDecision::Flood
        );
    }

    #[test]
    fn unreachable_area_drops() {
        let segs = vec![
            RawSegment::new(Position::new(0.0, 0.0), Position::new(100.0, 0.0), 2),
            RawSegment::new(
                Position::new(1000.0, 1000.0),
                Position::new(1100.0, 1000.0),
                2,
            ),
        ];
        let r = Router::new(
            Arc::new(RoadGraph::build(&segs, RoadParams::default()).unwrap()),
            GeoGrid::default(),
        );
        let d = forward_decision(
            &r,
            &Position::new(50.0, 0.0),
            &Position::new(0.0, 0.0),
            Some(&area(5, 5)),
        );
        assert_eq!(d, ForwardDecision::Drop(DropReason::Unreachable));
    }

    #[test]
    fn next_street_from_junction() {
        let r = router();
        let g = r.graph();
        // at (0,0) heading to cell (0,3): north along x = 0
        let p = r.path(&Position::new(2.0, 1.0), &area(0, 3));
        let s = next_hop_street(g, &Position::new(2.0, 1.0), &p.route);
        let origin = g
            .nodes()
            .iter()
            .position(|n| *n == Position::new(0.0, 0.0))
            .unwrap();
        let north = g
            .neighbors(origin)
            .iter()
            .find(|(n, _)| g.nodes()[*n] == Position::new(0.0, 200.0))
            .unwrap()
            .1;
        assert_eq!(s, g.logical_of_edge(north));
    }

    #[test]
    fn data_rule() {
        let origin = Position::new(0.0, 0.0);
        assert!(data_should_forward(
            &Position::new(100.0, 0.0),
            &Position::new(300.0, 0.0),
            &origin
        ));
        assert!(!data_should_forward(
            &Position::new(300.0, 0.0),
            &Position::new(100.0, 0.0),
            &origin
        ));
    }

    #[test]
    fn corridor() {
        let s = Position::new(0.0, 0.0);
        let f = Position::new(200.0, 0.0);
        assert!(between(&Position::new(100.0, 10.0), &s, &f, 20.0));
        assert!(!between(&Position::new(100.0, 30.0), &s, &f, 20.0));
        assert!(!between(&Position::new(250.0, 0.0), &s, &f, 20.0));
        assert!(!between(&Position::new(-10.0, 0.0), &s, &f, 20.0));
    }

    #[test]
    fn suppression_in_same_junction() {
        let r = router();
        let g = r.graph();
        let s = Position::new(0.0, 200.0);
        // forwarder and waiting node both inside the junction at (200, 200)
        assert!(suppressed(
            g,
            &Position::new(205.0, 185.0),
            &s,
            &Position::new(200.0, 210.0),
            20.0
        ));
        // beyond the forwarder on another street
        assert!(!suppressed(
            g,
            &Position::new(200.0, 320.0),
            &s,
            &Position::new(200.0, 210.0),
            20.0
        ));
    }

    #[test]
    fn acks() {
        let frame = Frame {
            packet: Packet::Data(Data {
                name: "/a".parse().unwrap(),
                payload_size: 1,
            }),
            header: L25Header::data(1, Position::new(0.0, 0.0), None, None),
            lineage: None,
        };
        let mut p = PendingTransmission {
            frame,
            fire_time: SimTime::ZERO,
            required_acks: vec![1, 2, 3, 4],
            retries_left: 2,
            state: TxState::Waiting,
            heard_from: None,
        };
        assert!(!p.ack(&[1, 9]));
        assert!(!p.ack(&[2, 3]));
        assert!(p.ack(&[4]));
    }
}
