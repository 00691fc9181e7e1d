//! Discrete-event simulation of vehicles and RSUs running NDN with the
//! geolocation-aware LAL over a shared broadcast channel.

mod radio;
mod scheduler;
mod trace;

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use radio::{CollisionMode, RadioConfig};
pub use scheduler::Scheduler;
pub use trace::{write_samples, MobilityTrace, TraceSample, Track};

use crate::geo::{GeoArea, GeoGrid, Position};
use crate::lal::{
    data_should_forward, forward_decision, origin_decision, suppressed, DataSource,
    ForwardDecision, Frame, L25Header, Lal, LalParams, Lineage, Packet, PacketClass,
    PendingTransmission, TxState,
};
use crate::metrics::{Event, EventLog, ExpressionTracker, MetricsReport};
use crate::ndn::{Data, FaceId, Interest, InterestOutcome, Name, NdnNode};
use crate::road::{FpClass, RoadGraph, Router};
use crate::scenario::Scenario;
use crate::strategy::{Choice, Strategy};
use crate::time::{SimDuration, SimTime};
use crate::workload::{Catalog, StreamSession, Tick, ZipfPopularity};

const GEO_REFRESH: u64 = 100_000;
const HOUSEKEEPING: SimDuration = SimDuration::from_secs(1);

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: MetricsReport,
    pub log: EventLog,
}

/// Runs a validated scenario to its horizon.
pub fn run(scenario: &Scenario) -> RunOutput {
    Simulation::new(scenario).run()
}

#[derive(Debug)]
enum Action {
    ConsumerStart(usize),
    TimerFire {
        node: usize,
        tx: u64,
    },
    MacAttempt(usize),
    TxEnd(u64),
    AckTimeout {
        node: usize,
        tx: u64,
    },
    Deadline {
        node: usize,
        name: Name,
        at: SimTime,
    },
    AppTimeout {
        node: usize,
        chunk: u32,
        nonce: u64,
    },
    PlaybackTick(usize),
    ToProducer {
        rsu: usize,
        interest: Interest,
    },
    FromProducer {
        rsu: usize,
        data: Data,
        prefix: Name,
    },
    Sample,
    Housekeeping,
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Vehicle(usize),
    Rsu {
        pos: Position,
        latency: SimDuration,
        rate_bps: f64,
    },
}

#[derive(Debug)]
struct Pending {
    tx: PendingTransmission,
    /// Face the Interest entered the PIT on, for abandoning it.
    in_face: Option<FaceId>,
    /// Data only: the Interest's previous hop the Data heads for.
    target: Option<Position>,
}

#[derive(Debug, Default)]
struct GeoCache {
    bucket: Option<u64>,
    fp: Option<FpClass>,
    area: Option<GeoArea>,
    streets: Vec<usize>,
    lines: Vec<usize>,
}

#[derive(Debug)]
struct Consumer {
    scripted_song: Option<usize>,
    prebind: Option<GeoArea>,
    session: Option<StreamSession>,
    nonces: HashMap<u32, u64>,
}

struct Node {
    kind: Kind,
    ndn: NdnNode,
    lal: Lal,
    strategy: Strategy,
    pending: BTreeMap<u64, Pending>,
    by_nonce: HashMap<u64, u64>,
    by_name: HashMap<Name, Vec<u64>>,
    queue: VecDeque<u64>,
    queued: usize,
    transmitting: Option<u64>,
    mac_armed: bool,
    busy_until: SimTime,
    receiving: Vec<(u64, SimTime)>,
    geo: GeoCache,
    consumer: Option<Consumer>,
}

struct Air {
    sender: usize,
    tx: u64,
    frame: Frame,
    sender_pos: Position,
    receivers: Vec<usize>,
    lost: Vec<usize>,
}

pub struct Simulation<'a> {
    scenario: &'a Scenario,
    graph: Arc<RoadGraph>,
    grid: GeoGrid,
    router: Router,
    radio: RadioConfig,
    lal_params: LalParams,
    catalog: Catalog,
    zipf: ZipfPopularity,
    chunk_play: SimDuration,
    provider_prefix: Name,
    rng: ChaCha8Rng,
    sched: Scheduler<Action>,
    nodes: Vec<Node>,
    airs: HashMap<u64, Air>,
    next_id: u64,
    log: EventLog,
    tracker: ExpressionTracker,
    horizon: SimTime,
}

impl<'a> Simulation<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        let cfg = &scenario.config;
        let graph = scenario.graph.clone();
        let grid = cfg.grid.clone();
        let w = &cfg.workload;
        let zipf = ZipfPopularity::calibrated(w.n_songs, w.top_fraction, w.top_mass)
            .expect("validated scenario");
        let catalog = w.catalog();
        let new_node = |kind| {
            let mut ndn = NdnNode::new(&cfg.ndn);
            if matches!(kind, Kind::Rsu { .. }) {
                ndn.fib.register(&catalog.provider_prefix(), FaceId::WIRED);
            }
            Node {
                kind,
                ndn,
                lal: Lal::new(&cfg.lal),
                strategy: Strategy::new(cfg.strategy),
                pending: BTreeMap::new(),
                by_nonce: HashMap::new(),
                by_name: HashMap::new(),
                queue: VecDeque::new(),
                queued: 0,
                transmitting: None,
                mac_armed: false,
                busy_until: SimTime::ZERO,
                receiving: Vec::new(),
                geo: GeoCache::default(),
                consumer: None,
            }
        };
        let mut nodes: Vec<Node> = (0..scenario.trace.len())
            .map(|i| new_node(Kind::Vehicle(i)))
            .collect();
        for r in &cfg.rsu {
            nodes.push(new_node(Kind::Rsu {
                pos: r.position(),
                latency: SimDuration::from_millis_f64(r.backhaul_latency_ms),
                rate_bps: r.backhaul_rate_bps,
            }));
        }
        Simulation {
            scenario,
            router: Router::new(graph.clone(), grid.clone()),
            graph,
            grid,
            radio: cfg.radio,
            lal_params: cfg.lal,
            provider_prefix: catalog.provider_prefix(),
            catalog,
            zipf,
            chunk_play: w.chunk_play(),
            rng: ChaCha8Rng::seed_from_u64(cfg.scenario.seed),
            sched: Scheduler::new(),
            nodes,
            airs: HashMap::new(),
            next_id: 0,
            log: EventLog::new(),
            tracker: ExpressionTracker::default(),
            horizon: SimTime::from_secs_f64(cfg.scenario.duration_s),
        }
    }

    pub fn run(mut self) -> RunOutput {
        self.setup_consumers();
        self.sched.schedule(SimTime::ZERO, Action::Sample);
        self.sched
            .schedule(SimTime::ZERO + HOUSEKEEPING, Action::Housekeeping);
        while let Some(t) = self.sched.peek_time() {
            if t > self.horizon {
                break;
            }
            let (_, action) = self.sched.pop().expect("peeked");
            self.handle(action);
        }
        RunOutput {
            report: MetricsReport::from_log(self.log.events()),
            log: self.log,
        }
    }

    fn now(&self) -> SimTime {
        self.sched.now()
    }

    fn fresh_id(&mut self) -> u64 {
        self.next_id += 1;
        self.next_id
    }

    fn setup_consumers(&mut self) {
        let w = &self.scenario.config.workload;
        let tracks = self.scenario.trace.tracks();
        let mut starts: Vec<(usize, SimTime, Consumer)> = Vec::new();
        if !w.scripted.is_empty() {
            for s in &w.scripted {
                let i = self
                    .scenario
                    .trace
                    .index_of(&s.vehicle)
                    .expect("validated scenario");
                let at = SimTime::from_secs_f64(s.start_s).max(tracks[i].first());
                let prebind = s
                    .prebind_area
                    .as_ref()
                    .map(|l| self.grid.parse_label(l).expect("validated scenario"));
                starts.push((i, at, Consumer::new(Some(s.song), prebind)));
            }
        } else {
            let count = (w.consumer_fraction * tracks.len() as f64).round() as usize;
            let mut chosen =
                rand::seq::index::sample(&mut self.rng, tracks.len(), count).into_vec();
            chosen.sort_unstable();
            for i in chosen {
                let offset = if w.start_window_s > 0.0 {
                    self.rng.random_range(0.0..w.start_window_s)
                } else {
                    0.0
                };
                let at = tracks[i].first() + SimDuration::from_millis_f64(offset * 1e3);
                starts.push((i, at, Consumer::new(None, None)));
            }
        }
        for (i, at, c) in starts {
            self.nodes[i].consumer = Some(c);
            self.sched.schedule(at, Action::ConsumerStart(i));
        }
    }

    fn handle(&mut self, action: Action) {
        match action {
            Action::ConsumerStart(n) => self.consumer_start(n),
            Action::TimerFire { node, tx } => {
                if self.nodes[node]
                    .pending
                    .get(&tx)
                    .is_some_and(|p| p.tx.state == TxState::Waiting)
                {
                    self.enqueue(node, tx);
                }
            }
            Action::MacAttempt(n) => self.mac_attempt(n),
            Action::TxEnd(air) => self.tx_end(air),
            Action::AckTimeout { node, tx } => self.ack_timeout(node, tx),
            Action::Deadline { node, name, at } => {
                let nd = &mut self.nodes[node];
                if let Some((prefix, _)) = nd.strategy.on_deadline(&name, at, &mut nd.ndn.fib) {
                    let width = nd.ndn.fib.get(&prefix).map_or(0, |e| e.faces.len()) as u32;
                    self.log.push(Event::Unbound {
                        t_us: at.0,
                        node: node as u32,
                        width,
                    });
                }
            }
            Action::AppTimeout { node, chunk, nonce } => self.app_timeout(node, chunk, nonce),
            Action::PlaybackTick(n) => self.playback_tick(n),
            Action::ToProducer { rsu, interest } => self.producer(rsu, interest),
            Action::FromProducer { rsu, data, prefix } => self.producer_reply(rsu, data, prefix),
            Action::Sample => self.sample(),
            Action::Housekeeping => {
                let now = self.now();
                for nd in &mut self.nodes {
                    nd.lal.f2a.expire(now, &mut nd.ndn.fib);
                    nd.ndn.pit.purge_expired(now);
                }
                self.sched
                    .schedule(now + HOUSEKEEPING, Action::Housekeeping);
            }
        }
    }

    // ---- geometry

    fn pos(&self, n: usize) -> Option<Position> {
        match self.nodes[n].kind {
            Kind::Vehicle(i) => self.scenario.trace.tracks()[i].position_at(self.now()),
            Kind::Rsu { pos, .. } => Some(pos),
        }
    }

    fn is_rsu(&self, n: usize) -> bool {
        matches!(self.nodes[n].kind, Kind::Rsu { .. })
    }

    fn refresh_geo(&mut self, n: usize, pos: &Position) {
        let bucket = self.now().0 / GEO_REFRESH;
        let g = &mut self.nodes[n].geo;
        if g.bucket == Some(bucket) {
            return;
        }
        g.bucket = Some(bucket);
        g.fp = Some(self.graph.classify_fp(pos));
        g.area = self.grid.area(pos).ok();
        g.streets = self.graph.streets_at(pos);
        g.lines = self.graph.sight_lines_at(pos);
    }

    fn fp(&mut self, n: usize, pos: &Position) -> FpClass {
        self.refresh_geo(n, pos);
        self.nodes[n].geo.fp.expect("refreshed")
    }

    fn area(&mut self, n: usize, pos: &Position) -> Option<GeoArea> {
        self.refresh_geo(n, pos);
        self.nodes[n].geo.area
    }

    fn streets(&mut self, n: usize, pos: &Position) -> Vec<usize> {
        self.refresh_geo(n, pos);
        self.nodes[n].geo.streets.clone()
    }

    // ---- pending transmissions and MAC

    fn add_pending(&mut self, n: usize, pending: Pending, delay: SimDuration) {
        let id = self.fresh_id();
        let nd = &mut self.nodes[n];
        if pending.tx.frame.packet.class() == PacketClass::Interest {
            nd.by_nonce.insert(pending.tx.nonce(), id);
        }
        nd.by_name
            .entry(pending.tx.frame.packet.name().clone())
            .or_default()
            .push(id);
        nd.pending.insert(id, pending);
        if delay == SimDuration::ZERO {
            self.enqueue(n, id);
        } else {
            let at = self.now() + delay;
            self.sched
                .schedule(at, Action::TimerFire { node: n, tx: id });
        }
    }

    fn remove_pending(&mut self, n: usize, id: u64) -> Option<Pending> {
        let nd = &mut self.nodes[n];
        let p = nd.pending.remove(&id)?;
        if p.tx.state == TxState::Queued {
            nd.queued -= 1;
        }
        if nd.by_nonce.get(&p.tx.nonce()) == Some(&id) {
            nd.by_nonce.remove(&p.tx.nonce());
        }
        let name = p.tx.frame.packet.name();
        if let Some(ids) = nd.by_name.get_mut(name) {
            ids.retain(|i| *i != id);
            if ids.is_empty() {
                nd.by_name.remove(name);
            }
        }
        Some(p)
    }

    fn enqueue(&mut self, n: usize, id: u64) {
        let now = self.now();
        let limit = self.radio.queue_limit;
        let nd = &mut self.nodes[n];
        if nd.queued >= limit {
            self.remove_pending(n, id);
            self.log.push(Event::FrameDropped {
                t_us: now.0,
                node: n as u32,
            });
            return;
        }
        let p = nd.pending.get_mut(&id).expect("pending exists");
        p.tx.state = TxState::Queued;
        nd.queued += 1;
        nd.queue.push_back(id);
        self.kick_mac(n);
    }

    fn kick_mac(&mut self, n: usize) {
        let nd = &mut self.nodes[n];
        if !nd.mac_armed && nd.transmitting.is_none() && !nd.queue.is_empty() {
            nd.mac_armed = true;
            let now = self.now();
            self.sched.schedule(now, Action::MacAttempt(n));
        }
    }

    fn mac_attempt(&mut self, n: usize) {
        let now = self.now();
        let nd = &mut self.nodes[n];
        nd.mac_armed = false;
        if nd.transmitting.is_some() {
            return;
        }
        while let Some(id) = nd.queue.front() {
            if nd
                .pending
                .get(id)
                .is_some_and(|p| p.tx.state == TxState::Queued)
            {
                break;
            }
            nd.queue.pop_front();
        }
        let Some(&id) = nd.queue.front() else {
            return;
        };
        if nd.busy_until > now {
            nd.mac_armed = true;
            let at = nd.busy_until;
            self.sched.schedule(at, Action::MacAttempt(n));
            return;
        }
        nd.queue.pop_front();
        let Some(pos) = self.pos(n) else {
            // departed: nothing left to send
            let ids: Vec<u64> = self.nodes[n].pending.keys().copied().collect();
            for id in ids {
                self.remove_pending(n, id);
            }
            self.nodes[n].queue.clear();
            return;
        };
        self.start_tx(n, id, pos);
    }

    fn start_tx(&mut self, n: usize, id: u64, pos: Position) {
        let now = self.now();
        let nd = &mut self.nodes[n];
        let p = nd.pending.get_mut(&id).expect("queued pending");
        p.tx.state = TxState::AwaitingAck { deadline: now };
        nd.queued -= 1;
        let mut frame = p.tx.frame.clone();
        frame.header.prev_hop = pos;
        let class = frame.packet.class();
        let end = now + self.radio.tx_duration(frame.wire_len(&self.grid));

        self.refresh_geo(n, &pos);
        let my_lines = self.nodes[n].geo.lines.clone();
        let mut receivers = Vec::new();
        for r in 0..self.nodes.len() {
            if r == n {
                continue;
            }
            let Some(rp) = self.pos(r) else { continue };
            if rp.distance(&pos) > self.radio.range_m {
                continue;
            }
            self.refresh_geo(r, &rp);
            if self
                .radio
                .reachable(&pos, &my_lines, &rp, &self.nodes[r].geo.lines)
            {
                receivers.push(r);
            }
        }

        let air_id = self.fresh_id();
        let mut lost = Vec::new();
        if self.radio.collision == CollisionMode::Destructive {
            // half duplex: whatever the sender was hearing is lost
            let me = &mut self.nodes[n];
            me.receiving.retain(|(_, e)| *e > now);
            for (a, _) in me.receiving.drain(..) {
                if let Some(air) = self.airs.get_mut(&a) {
                    air.lost.push(n);
                }
            }
            for &r in &receivers {
                let rn = &mut self.nodes[r];
                rn.receiving.retain(|(_, e)| *e > now);
                if rn.transmitting.is_some() || !rn.receiving.is_empty() {
                    lost.push(r);
                    for (a, _) in &rn.receiving {
                        if let Some(air) = self.airs.get_mut(a) {
                            air.lost.push(r);
                        }
                    }
                }
                rn.receiving.push((air_id, end));
            }
        }
        for &r in &receivers {
            let rn = &mut self.nodes[r];
            rn.busy_until = rn.busy_until.max(end);
        }
        self.nodes[n].transmitting = Some(air_id);
        self.airs.insert(
            air_id,
            Air {
                sender: n,
                tx: id,
                frame,
                sender_pos: pos,
                receivers,
                lost,
            },
        );
        self.log.push(Event::Transmission {
            t_us: now.0,
            node: n as u32,
            class,
        });
        self.sched.schedule(end, Action::TxEnd(air_id));
    }

    fn tx_end(&mut self, air_id: u64) {
        let now = self.now();
        let air = self.airs.remove(&air_id).expect("air in flight");
        let n = air.sender;
        self.nodes[n].transmitting = None;
        let ack_timeout = self.lal_params.timers.ack_timeout();
        if let Some(p) = self.nodes[n].pending.get_mut(&air.tx) {
            if p.tx.required_acks.is_empty() {
                self.remove_pending(n, air.tx);
            } else {
                let deadline = now + ack_timeout;
                p.tx.state = TxState::AwaitingAck { deadline };
                self.sched.schedule(
                    deadline,
                    Action::AckTimeout {
                        node: n,
                        tx: air.tx,
                    },
                );
            }
        }
        for &r in &air.receivers {
            if air.lost.contains(&r) {
                continue;
            }
            if self.pos(r).is_none() {
                continue;
            }
            self.receive(r, &air.frame, air.sender_pos);
        }
        self.kick_mac(n);
    }

    fn ack_timeout(&mut self, n: usize, id: u64) {
        let now = self.now();
        let present = self.pos(n).is_some();
        let Some(p) = self.nodes[n].pending.get_mut(&id) else {
            return;
        };
        if p.tx.state != (TxState::AwaitingAck { deadline: now }) {
            return;
        }
        if p.tx.retries_left > 0 && present {
            p.tx.retries_left -= 1;
            self.enqueue(n, id);
        } else {
            self.remove_pending(n, id);
        }
    }

    // ---- reception

    fn receive(&mut self, n: usize, frame: &Frame, sender_pos: Position) {
        match &frame.packet {
            Packet::Interest(i) => self.on_air_interest(n, frame, i, sender_pos),
            Packet::Data(d) => self.on_air_data(n, frame, d, sender_pos),
        }
    }

    fn on_air_interest(
        &mut self,
        n: usize,
        frame: &Frame,
        interest: &Interest,
        sender_pos: Position,
    ) {
        let now = self.now();
        let me = self.pos(n).expect("receiver present");
        let nonce = frame.header.nonce;
        let da = frame.header.dest_area;

        if let Some(&id) = self.nodes[n].by_nonce.get(&nonce) {
            let p = &self.nodes[n].pending[&id];
            match p.tx.state {
                TxState::Waiting | TxState::Queued => {
                    let overtaken = da.is_some()
                        && matches!(
                            forward_decision(&self.router, &me, &sender_pos, da.as_ref()),
                            ForwardDecision::Drop(_)
                        );
                    let covered = p.tx.heard_from.is_some_and(|h| {
                        suppressed(
                            &self.graph,
                            &me,
                            &h,
                            &sender_pos,
                            self.lal_params.corridor_m,
                        )
                    });
                    if overtaken || covered {
                        let p = self.remove_pending(n, id).expect("present");
                        if let Some(face) = p.in_face {
                            self.nodes[n].ndn.abandon(&interest.name, face, nonce);
                        }
                    }
                }
                TxState::AwaitingAck { .. } => {
                    let streets = self.graph.streets_at(&sender_pos);
                    let p = self.nodes[n].pending.get_mut(&id).expect("present");
                    if p.tx.ack(&streets) {
                        self.remove_pending(n, id);
                    }
                }
            }
            return;
        }

        let nd = &mut self.nodes[n];
        if nd.ndn.is_dead_nonce(nonce) {
            return;
        }
        let face = nd.lal.on_wire_interest(&frame.header, now, &mut nd.ndn.fib);
        match nd.ndn.on_interest(interest, face, Some(sender_pos), now) {
            InterestOutcome::Duplicate | InterestOutcome::Aggregate => {
                nd.lal.from_network.consume(nonce);
            }
            InterestOutcome::CacheHit(data) => {
                nd.lal.from_network.consume(nonce);
                let source = if self.is_rsu(n) {
                    DataSource::RsuCache
                } else {
                    DataSource::CarCache
                };
                let area = self.area(n, &me);
                let header =
                    L25Header::data(nonce, me, area, Some(interest.routable_prefix.clone()));
                let lineage = Lineage {
                    responder: n as u32,
                    source,
                };
                self.schedule_data(n, data, header, lineage, sender_pos, &sender_pos, None);
            }
            InterestOutcome::Forward => {
                nd.lal.from_network.consume(nonce);
                if self.is_rsu(n) && self.provider_prefix.is_prefix_of(&interest.name) {
                    self.send_wired(n, interest.clone());
                    return;
                }
                let decision = forward_decision(&self.router, &me, &sender_pos, da.as_ref());
                let acks = match decision {
                    ForwardDecision::Drop(_) => {
                        self.nodes[n].ndn.abandon(&interest.name, face, nonce);
                        return;
                    }
                    ForwardDecision::Directed { next_street, .. } => vec![next_street],
                    ForwardDecision::LocalFlood | ForwardDecision::Flood => self.streets(n, &me),
                };
                if da.is_some() && face.is_geo() {
                    // relays send on the destination's GeoFace too, under the same deadline
                    let nd = &mut self.nodes[n];
                    if let Some(at) = nd.strategy.on_sent(
                        &interest.name,
                        &interest.routable_prefix,
                        Choice::Face(face),
                        now,
                    ) {
                        self.sched.schedule(
                            at,
                            Action::Deadline {
                                node: n,
                                name: interest.name.clone(),
                                at,
                            },
                        );
                    }
                }
                let fp = self.fp(n, &me);
                let delay = self.lal_params.timers.waiting_timer(
                    PacketClass::Interest,
                    fp,
                    me.distance(&sender_pos),
                    &mut self.rng,
                );
                let frame = Frame {
                    packet: Packet::Interest(interest.clone()),
                    header: L25Header::interest(nonce, me, da, interest.routable_prefix.clone()),
                    lineage: None,
                };
                let pending = Pending {
                    tx: PendingTransmission {
                        frame,
                        fire_time: now + delay,
                        required_acks: acks,
                        retries_left: self.lal_params.ack_retries,
                        state: TxState::Waiting,
                        heard_from: Some(sender_pos),
                    },
                    in_face: Some(face),
                    target: None,
                };
                self.add_pending(n, pending, delay);
            }
        }
    }

    fn on_air_data(&mut self, n: usize, frame: &Frame, data: &Data, sender_pos: Position) {
        let now = self.now();
        let me = self.pos(n).expect("receiver present");
        let corridor = self.lal_params.corridor_m;

        let ids = self.nodes[n]
            .by_name
            .get(&data.name)
            .cloned()
            .unwrap_or_default();
        for id in ids {
            let p = &self.nodes[n].pending[&id];
            let keep = match (p.tx.frame.packet.class(), p.tx.state) {
                (PacketClass::Data, TxState::Waiting | TxState::Queued) => {
                    p.target
                        .is_some_and(|t| data_should_forward(&me, &sender_pos, &t))
                        && !p.tx.heard_from.is_some_and(|h| {
                            suppressed(&self.graph, &me, &h, &sender_pos, corridor)
                        })
                }
                (PacketClass::Data, TxState::AwaitingAck { .. }) => true,
                (PacketClass::Interest, _) => false,
            };
            if !keep {
                self.remove_pending(n, id);
            }
        }

        if self.nodes[n].ndn.pit.get(&data.name, now).is_none() {
            return;
        }
        let rsu = self.is_rsu(n);
        let nd = &mut self.nodes[n];
        let face = nd.lal.on_wire_data(&frame.header, now, &mut nd.ndn.fib);
        let Some(downstream) = nd.ndn.on_data(data, now) else {
            return;
        };
        if !rsu {
            if let Some(prefix) = &frame.header.routable_prefix {
                let before = nd.ndn.fib.get(prefix).map_or(0, |e| e.faces.len());
                if let Some(width) = nd.lal.learn(prefix, face, &mut nd.ndn.fib) {
                    if width > before {
                        self.log.push(Event::FibWidth {
                            t_us: now.0,
                            node: n as u32,
                            width: width as u32,
                        });
                    }
                }
            }
        }
        let nd = &mut self.nodes[n];
        if face.is_geo() {
            nd.lal.f2a.touch(face, now);
        }
        let lineage = frame.lineage.expect("data frames carry lineage");
        let mut target = None;
        for (f, rec) in &downstream {
            if *f == FaceId::APP {
                continue;
            }
            if let Some(p) = rec.prev_hop {
                if target.is_none() && data_should_forward(&me, &sender_pos, &p) {
                    target = Some(p);
                }
            }
        }
        if downstream.iter().any(|(f, _)| *f == FaceId::APP) {
            self.deliver_app(n, data, lineage, Some(face));
        } else {
            self.nodes[n]
                .strategy
                .on_satisfaction(&data.name, Some(face));
        }
        if let Some(t) = target {
            let header = L25Header {
                prev_hop: me,
                ..frame.header.clone()
            };
            self.schedule_data(
                n,
                data.clone(),
                header,
                lineage,
                t,
                &sender_pos,
                Some(sender_pos),
            );
        }
    }

    /// Queues a Data broadcast heading for `target`. The waiting timer grows
    /// with proximity to `timer_from`.
    #[allow(clippy::too_many_arguments)]
    fn schedule_data(
        &mut self,
        n: usize,
        data: Data,
        header: L25Header,
        lineage: Lineage,
        target: Position,
        timer_from: &Position,
        heard_from: Option<Position>,
    ) {
        let has_data = self.nodes[n].by_name.get(&data.name).is_some_and(|ids| {
            ids.iter()
                .any(|id| self.nodes[n].pending[id].tx.frame.packet.class() == PacketClass::Data)
        });
        if has_data {
            return;
        }
        let me = self.pos(n).expect("present");
        let fp = self.fp(n, &me);
        let delay = self.lal_params.timers.waiting_timer(
            PacketClass::Data,
            fp,
            me.distance(timer_from),
            &mut self.rng,
        );
        let pending = Pending {
            tx: PendingTransmission {
                frame: Frame {
                    packet: Packet::Data(data),
                    header,
                    lineage: Some(lineage),
                },
                fire_time: self.now() + delay,
                required_acks: Vec::new(),
                retries_left: 0,
                state: TxState::Waiting,
                heard_from,
            },
            in_face: None,
            target: Some(target),
        };
        self.add_pending(n, pending, delay);
    }

    // ---- RSU backhaul

    fn backhaul_delay(&self, rsu: usize, bytes: usize) -> SimDuration {
        match self.nodes[rsu].kind {
            Kind::Rsu {
                latency, rate_bps, ..
            } => {
                latency
                    + SimDuration::from_micros((bytes as f64 * 8.0 / rate_bps * 1e6).ceil() as u64)
            }
            Kind::Vehicle(_) => unreachable!("backhaul only at RSUs"),
        }
    }

    fn send_wired(&mut self, rsu: usize, interest: Interest) {
        let bytes = crate::lal::INTEREST_BASE_BYTES + interest.name.wire_len();
        let at = self.now() + self.backhaul_delay(rsu, bytes);
        self.sched
            .schedule(at, Action::ToProducer { rsu, interest });
    }

    fn producer(&mut self, rsu: usize, interest: Interest) {
        let now = self.now();
        self.log.push(Event::ProducerRequest {
            t_us: now.0,
            rsu: rsu as u32,
        });
        if !self.catalog.has(&interest.name) {
            return;
        }
        let data = Data {
            name: interest.name,
            payload_size: self.scenario.config.workload.payload_bytes,
        };
        let at = now + self.backhaul_delay(rsu, data.payload_size as usize + data.name.wire_len());
        self.sched.schedule(
            at,
            Action::FromProducer {
                rsu,
                data,
                prefix: interest.routable_prefix,
            },
        );
    }

    fn producer_reply(&mut self, n: usize, data: Data, prefix: Name) {
        let now = self.now();
        let Some(downstream) = self.nodes[n].ndn.on_data(&data, now) else {
            return;
        };
        let Some((_, rec)) = downstream
            .iter()
            .find(|(f, r)| *f != FaceId::APP && r.prev_hop.is_some())
        else {
            return;
        };
        let target = rec.prev_hop.expect("filtered");
        let me = self.pos(n).expect("rsu");
        let area = self.area(n, &me);
        let header = L25Header::data(rec.nonce, me, area, Some(prefix));
        let lineage = Lineage {
            responder: n as u32,
            source: DataSource::Origin,
        };
        self.schedule_data(n, data, header, lineage, target, &target, None);
    }

    // ---- consumers

    fn consumer_start(&mut self, n: usize) {
        if self.pos(n).is_none() {
            return;
        }
        let now = self.now();
        let c = self.nodes[n].consumer.as_ref().expect("consumer");
        if let Some(area) = c.prebind {
            let song = c.scripted_song.expect("prebind is scripted");
            let nd = &mut self.nodes[n];
            let face = nd.lal.f2a.get_or_create(area, now, &mut nd.ndn.fib);
            nd.ndn.fib.register(&self.catalog.song_prefix(song), face);
        }
        self.start_song(n);
    }

    fn start_song(&mut self, n: usize) {
        let w = &self.scenario.config.workload;
        let scripted = self.nodes[n]
            .consumer
            .as_ref()
            .expect("consumer")
            .scripted_song;
        let song = scripted.unwrap_or_else(|| self.zipf.sample(&mut self.rng));
        let c = self.nodes[n].consumer.as_mut().expect("consumer");
        c.session = Some(StreamSession::new(
            song,
            w.chunks_per_song,
            w.pipeline_limit,
            w.buffer_ms,
            self.chunk_play,
        ));
        c.nonces.clear();
        self.fill(n);
    }

    fn fill(&mut self, n: usize) {
        let chunks = match self.nodes[n]
            .consumer
            .as_mut()
            .and_then(|c| c.session.as_mut())
        {
            Some(s) => s.fill(),
            None => return,
        };
        for chunk in chunks {
            self.express(n, chunk);
        }
    }

    fn express(&mut self, n: usize, chunk: u32) {
        let now = self.now();
        let Some(me) = self.pos(n) else { return };
        let song = self.nodes[n]
            .consumer
            .as_ref()
            .and_then(|c| c.session.as_ref())
            .expect("session")
            .song;
        let name = self.catalog.chunk_name(song, chunk);
        let prefix = self.catalog.song_prefix(song);
        let nonce: u64 = self.rng.random();
        let first = self.tracker.expressed(n as u32, &name, now.0);
        self.log.push(Event::Expressed {
            t_us: now.0,
            node: n as u32,
            name: name.clone(),
            first,
        });
        self.nodes[n]
            .consumer
            .as_mut()
            .expect("consumer")
            .nonces
            .insert(chunk, nonce);

        let interest = Interest {
            name: name.clone(),
            nonce,
            routable_prefix: prefix.clone(),
        };
        match self.nodes[n]
            .ndn
            .on_interest(&interest, FaceId::APP, None, now)
        {
            InterestOutcome::CacheHit(data) => {
                let lineage = Lineage {
                    responder: n as u32,
                    source: DataSource::CarCache,
                };
                self.deliver_app(n, &data, lineage, None);
            }
            InterestOutcome::Forward => {
                let nd = &mut self.nodes[n];
                let entry = nd.ndn.fib.lookup(&name).cloned();
                let choice = nd.strategy.choose_face(entry.as_ref(), &mut self.rng);
                let bound = entry.map_or(prefix, |e| e.prefix);
                if let Some(at) = nd.strategy.on_sent(&name, &bound, choice, now) {
                    self.sched.schedule(
                        at,
                        Action::Deadline {
                            node: n,
                            name: name.clone(),
                            at,
                        },
                    );
                }
                let da = match choice {
                    Choice::Face(f) => self.nodes[n].lal.f2a.lookup_area(f),
                    Choice::Flood => None,
                };
                let acks = match origin_decision(&self.router, &me, da.as_ref()) {
                    ForwardDecision::Directed { next_street, .. } => vec![next_street],
                    _ => self.streets(n, &me),
                };
                let frame = Frame {
                    header: L25Header::interest(nonce, me, da, interest.routable_prefix.clone()),
                    packet: Packet::Interest(interest),
                    lineage: None,
                };
                let pending = Pending {
                    tx: PendingTransmission {
                        frame,
                        fire_time: now,
                        required_acks: acks,
                        retries_left: self.lal_params.ack_retries,
                        state: TxState::Waiting,
                        heard_from: None,
                    },
                    in_face: None,
                    target: None,
                };
                self.add_pending(n, pending, SimDuration::ZERO);
            }
            InterestOutcome::Aggregate | InterestOutcome::Duplicate => {}
        }
        // after the strategy deadline, which shares the instant
        let timeout = self.nodes[n].strategy.params().deadline();
        self.sched.schedule(
            now + timeout,
            Action::AppTimeout {
                node: n,
                chunk,
                nonce,
            },
        );
    }

    fn deliver_app(&mut self, n: usize, data: &Data, lineage: Lineage, via: Option<FaceId>) {
        let now = self.now();
        let Some((song, chunk)) = self.catalog.parse_chunk(&data.name) else {
            return;
        };
        let Some(c) = self.nodes[n].consumer.as_mut() else {
            return;
        };
        let Some(session) = c.session.as_mut().filter(|s| s.song == song) else {
            return;
        };
        let was_started = session.started();
        if !session.on_data(chunk) {
            return;
        }
        let started = session.started();
        c.nonces.remove(&chunk);
        if let Some((rtt, first_issue)) = self.tracker.satisfied(n as u32, &data.name, now.0) {
            self.log.push(Event::Satisfied {
                t_us: now.0,
                node: n as u32,
                name: data.name.clone(),
                rtt_us: rtt,
                source: lineage.source,
                responder: lineage.responder,
                first_issue,
            });
        }
        self.nodes[n].strategy.on_satisfaction(&data.name, via);
        if started && !was_started {
            self.playback_tick(n);
        } else {
            self.fill(n);
        }
    }

    fn app_timeout(&mut self, n: usize, chunk: u32, nonce: u64) {
        if self.pos(n).is_none() {
            return;
        }
        let Some(c) = self.nodes[n].consumer.as_ref() else {
            return;
        };
        let live = c.nonces.get(&chunk) == Some(&nonce)
            && c.session.as_ref().is_some_and(|s| s.on_timeout(chunk));
        if live {
            self.express(n, chunk);
        }
    }

    fn playback_tick(&mut self, n: usize) {
        let now = self.now();
        if self.pos(n).is_none() {
            return;
        }
        let Some(session) = self.nodes[n]
            .consumer
            .as_mut()
            .and_then(|c| c.session.as_mut())
        else {
            return;
        };
        match session.on_tick() {
            Tick::Waiting => return,
            Tick::Played | Tick::Stalled { .. } => {}
            Tick::Finished => {
                let (song, clean) = (session.song, !session.underflow());
                self.log.push(Event::SongEnded {
                    t_us: now.0,
                    node: n as u32,
                    song,
                    clean,
                });
                let c = self.nodes[n].consumer.as_mut().expect("consumer");
                c.session = None;
                if c.scripted_song.is_none() {
                    self.start_song(n);
                }
                return;
            }
        }
        self.sched
            .schedule(now + self.chunk_play, Action::PlaybackTick(n));
        self.fill(n);
    }

    // ---- sampling

    fn sample(&mut self) {
        let now = self.now();
        for n in 0..self.nodes.len() {
            if self.pos(n).is_none() {
                continue;
            }
            let depth = self.nodes[n]
                .pending
                .values()
                .filter(|p| matches!(p.tx.state, TxState::Waiting | TxState::Queued))
                .count();
            self.log.push(Event::QueueSample {
                t_us: now.0,
                node: n as u32,
                depth: depth as u32,
            });
        }
        let every = SimDuration::from_millis(self.scenario.config.metrics.sample_interval_ms);
        self.sched.schedule(now + every, Action::Sample);
    }
}

impl Consumer {
    fn new(scripted_song: Option<usize>, prebind: Option<GeoArea>) -> Self {
        Consumer {
            scripted_song,
            prebind,
            session: None,
            nonces: HashMap::new(),
        }
    }
}
