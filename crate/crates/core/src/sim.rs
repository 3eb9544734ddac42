//! Discrete-event simulation engine: per-antenna FIFO transmit queues,
//! queue + transmission + propagation latency per hop, Poisson gateway
//! traffic, topology refresh, and feedback/train hooks for learning routers.
//!
//! The event loop is single-threaded and fully deterministic: events are
//! dispatched in (time, sequence) order with the sequence counter assigned at
//! scheduling time.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeoPosition, OrbitalShell, SatelliteId, SPEED_OF_LIGHT_KM_S};
use crate::topology::{refresh_topology, NetworkGraph, NodeRef, TopologyError, TopologyParams};

/// Queue port index of the GSL antenna on a satellite (after the 4 ISLs).
pub const GSL_PORT: usize = 4;
/// Queues per satellite: 4 ISL antennas plus the GSL downlink.
pub const PORTS_PER_SAT: usize = 5;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("traffic requires at least 2 gateways, got {0}")]
    TooFewGateways(usize),
    #[error("hop over link with non-positive data rate {0} bit/s")]
    InfeasibleLink(f64),
    #[error("router selected port {port} at {sat} with no edge (routing contract violation)")]
    RoutingContract { sat: SatelliteId, port: usize },
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// Why a packet left the simulation without being delivered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    QueueFull,
    TtlExceeded,
    NoFeasibleAction,
    Unreachable,
}

/// One hop in a packet's journey, recorded at the forwarding node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopRecord {
    pub node: NodeRef,
    pub enqueue_time: f64,
    pub queue_delay: f64,
    pub tx_delay: f64,
    pub prop_delay: f64,
}

/// A routed packet with its full hop log.
#[derive(Debug, Clone)]
pub struct Packet {
    pub id: u64,
    pub src_gateway: usize,
    pub dst_gateway: usize,
    pub size_bits: u64,
    pub created_at: f64,
    pub hop_log: Vec<HopRecord>,
    pub delivered_at: Option<f64>,
    pub dropped: Option<DropReason>,
    /// ISL hop awaiting receiver feedback: (sender, action, prop delay,
    /// sender hop index).
    pending_hop: Option<PendingHop>,
}

#[derive(Debug, Clone, Copy)]
struct PendingHop {
    sender: SatelliteId,
    action: usize,
    prop_delay: f64,
    hop_index: usize,
}

/// Poisson traffic parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficConfig {
    pub per_gateway_rate: f64,
    pub packet_size_bits: u64,
    pub duration_s: f64,
    pub seed: u64,
}

impl TrafficConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.per_gateway_rate < 0.0 {
            return Err("per_gateway_rate must be >= 0".into());
        }
        if self.packet_size_bits == 0 {
            return Err("packet_size_bits must be > 0".into());
        }
        if !(self.duration_s > 0.0) {
            return Err("duration_s must be > 0".into());
        }
        Ok(())
    }
}

/// A packet creation before it enters the simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketSpec {
    pub created_at: f64,
    pub src_gateway: usize,
    pub dst_gateway: usize,
}

/// Deterministic Poisson arrival stream per gateway, destinations uniform
/// over the other gateways, merged in time order.
pub fn generate_traffic(
    cfg: &TrafficConfig,
    num_gateways: usize,
) -> Result<Vec<PacketSpec>, SimError> {
    if num_gateways < 2 {
        return Err(SimError::TooFewGateways(num_gateways));
    }
    let mut specs = Vec::new();
    if cfg.per_gateway_rate > 0.0 {
        for gw in 0..num_gateways {
            let mut rng = ChaCha8Rng::seed_from_u64(
                cfg.seed
                    .wrapping_add(0x9E3779B97F4A7C15u64.wrapping_mul(gw as u64 + 1)),
            );
            let mut t = 0.0;
            loop {
                let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                t += -u.ln() / cfg.per_gateway_rate;
                if t > cfg.duration_s {
                    break;
                }
                let mut dst = rng.gen_range(0..num_gateways - 1);
                if dst >= gw {
                    dst += 1;
                }
                specs.push(PacketSpec {
                    created_at: t,
                    src_gateway: gw,
                    dst_gateway: dst,
                });
            }
        }
    }
    specs.sort_by(|a, b| {
        a.created_at
            .total_cmp(&b.created_at)
            .then(a.src_gateway.cmp(&b.src_gateway))
    });
    Ok(specs)
}

/// Transmission and propagation delay for one hop.
pub fn hop_latency(
    queue_delay: f64,
    size_bits: u64,
    rate_bps: f64,
    distance_km: f64,
) -> Result<(f64, f64, f64), SimError> {
    if !(rate_bps > 0.0) {
        return Err(SimError::InfeasibleLink(rate_bps));
    }
    let tx = size_bits as f64 / rate_bps;
    let prop = distance_km / SPEED_OF_LIGHT_KM_S;
    Ok((tx, prop, queue_delay + tx + prop))
}

/// FIFO transmit queue tracked by occupancy count and the time its server
/// frees up. Service order is FIFO because start times are assigned at
/// enqueue in arrival order.
#[derive(Debug, Clone, Copy)]
pub struct TxQueue {
    pub capacity: usize,
    pub len: usize,
    pub busy_until: f64,
}

impl TxQueue {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            len: 0,
            busy_until: 0.0,
        }
    }

    /// Occupied fraction of the queue.
    pub fn occupancy(&self) -> f64 {
        self.len as f64 / self.capacity as f64
    }

    /// Admit a packet at `now` with service time `tx_delay`. Returns the
    /// queue delay, or `None` when the queue is full.
    pub fn try_enqueue(&mut self, now: f64, tx_delay: f64) -> Option<f64> {
        if self.len >= self.capacity {
            return None;
        }
        let queue_delay = (self.busy_until - now).max(0.0);
        self.busy_until = (now + queue_delay) + tx_delay;
        self.len += 1;
        Some(queue_delay)
    }

    pub fn on_tx_complete(&mut self) {
        debug_assert!(self.len > 0);
        self.len -= 1;
    }
}

/// All transmit queues in the network.
#[derive(Debug, Clone)]
pub struct QueueState {
    /// Per satellite (dense index), ports 0..3 are the ISL antennas in
    /// adjacency order, port 4 the GSL downlink.
    pub sat: Vec<[TxQueue; PORTS_PER_SAT]>,
    /// Per gateway: the single uplink queue.
    pub gateway: Vec<TxQueue>,
}

impl QueueState {
    fn new(num_sats: usize, num_gateways: usize, capacity: usize) -> Self {
        Self {
            sat: vec![[TxQueue::new(capacity); PORTS_PER_SAT]; num_sats],
            gateway: vec![TxQueue::new(capacity); num_gateways],
        }
    }

    /// Most-loaded outgoing ISL queue of a satellite, as an occupancy
    /// fraction in [0, 1].
    pub fn max_isl_occupancy(&self, sat_index: usize) -> f64 {
        self.sat[sat_index][..4]
            .iter()
            .map(|q| q.occupancy())
            .fold(0.0, f64::max)
    }
}

/// Read-only view of the simulation handed to routers.
pub struct WorldView<'a> {
    pub graph: &'a NetworkGraph,
    pub queues: &'a QueueState,
    pub time: f64,
}

/// Outcome of a routing decision at a satellite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RouteDecision {
    /// Forward out of the given ISL antenna port (0..3).
    Forward(usize),
    /// No usable action; the packet is dropped.
    Drop,
}

/// Hop arrival notification for learning routers: packet sent by `sender`
/// via `action` was received and enqueued, so its queue delay is known.
#[derive(Debug, Clone, Copy)]
pub struct HopArrival {
    pub packet_id: u64,
    /// Index of the sender's entry in the packet hop log.
    pub hop_index: usize,
    pub sender: SatelliteId,
    pub action: usize,
    pub receiver: SatelliteId,
    pub dst_gateway: usize,
    pub queue_delay: f64,
    /// True when the receiver delivers the packet down its GSL.
    pub terminal: bool,
}

/// Metrics a learning router reports at a train-step event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainMetrics {
    pub epsilon: f64,
    pub loss: f64,
    pub buffer_size: usize,
}

/// Routing engine interface invoked synchronously from the event loop.
pub trait Router {
    fn on_topology(&mut self, _graph: &NetworkGraph) {}

    /// Pick the outgoing ISL port for a packet held at `sat`. `hop_index` is
    /// the index this hop will occupy in the packet's hop log; the matching
    /// `HopArrival` carries the same index.
    fn decide(
        &mut self,
        packet_id: u64,
        hop_index: usize,
        sat: SatelliteId,
        dst_gateway: usize,
        view: &WorldView,
    ) -> RouteDecision;

    /// Whether the engine should run the neighbor feedback protocol.
    fn needs_feedback(&self) -> bool {
        false
    }

    /// Receiver-side observation point; fires when the forwarded packet's
    /// queue delay becomes known at the receiver.
    fn on_hop_arrival(&mut self, _arrival: &HopArrival, _view: &WorldView) {}

    /// Sender-side completion; fires one propagation delay after the hop
    /// arrival, when the feedback message reaches the sender.
    fn on_feedback_delivered(&mut self, _packet_id: u64, _hop_index: usize, _view: &WorldView) {}

    /// Whether the engine should schedule periodic train-step events.
    fn needs_train_steps(&self) -> bool {
        false
    }

    fn train_step(&mut self, _now: f64, _view: &WorldView) -> Option<TrainMetrics> {
        None
    }
}

/// Pre-loads every ISL queue of one orbital plane and keeps it at that
/// occupancy with filler transmissions until `until_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreloadConfig {
    pub plane: usize,
    pub fraction: f64,
    pub until_s: f64,
}

/// Full simulation scenario.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub shell: OrbitalShell,
    pub gateways: Vec<GeoPosition>,
    pub topology: TopologyParams,
    pub traffic: TrafficConfig,
    pub queue_capacity: usize,
    pub ttl_hops: usize,
    pub topology_refresh_s: f64,
    /// Interval between train-step events, when the router wants them.
    pub train_every_s: f64,
    /// Route hop feedback through the reverse ISL queue instead of
    /// delivering it out of band after one propagation delay.
    pub feedback_consumes_bandwidth: bool,
    pub preload: Option<PreloadConfig>,
}

/// Size of one feedback message when it consumes link capacity: a minimal
/// control frame (packet id, hop index, queue delay, terminal flag).
pub const FEEDBACK_SIZE_BITS: u64 = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
enum EventKind {
    PacketCreated { spec_index: usize },
    TxComplete { queue: QueueRef },
    ArrivalSat { packet_id: u64, sat_index: usize },
    ArrivalGateway { packet_id: u64 },
    TopologyRefresh,
    FeedbackDelivered { packet_id: u64, hop_index: usize },
    TrainStep,
    FillerTx { sat_index: usize, port: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum QueueRef {
    Sat { sat_index: usize, port: usize },
    Gateway { gw: usize },
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.seq.cmp(&other.seq))
    }
}

/// Per-packet outcome row.
#[derive(Debug, Clone)]
pub struct PacketRecord {
    pub id: u64,
    pub src_gateway: usize,
    pub dst_gateway: usize,
    pub created_at: f64,
    pub delivered_at: Option<f64>,
    pub hops: usize,
    pub e2e_latency_s: Option<f64>,
    pub dropped: Option<DropReason>,
    pub hop_log: Vec<HopRecord>,
}

/// One training.csv row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainRow {
    pub step: u64,
    pub sim_time: f64,
    pub epsilon: f64,
    pub loss: f64,
    pub window_mean_latency_s: f64,
    pub buffer_size: usize,
}

/// Aggregate and per-packet results of a run.
#[derive(Debug, Clone)]
pub struct SimReport {
    pub packets: Vec<PacketRecord>,
    pub created: usize,
    pub delivered: usize,
    pub dropped: usize,
    pub in_flight: usize,
    pub mean_latency_s: f64,
    pub median_latency_s: f64,
    pub p95_latency_s: f64,
    pub max_queue_occupancy: f64,
    pub train_rows: Vec<TrainRow>,
    pub traffic_seed: u64,
}

impl SimReport {
    pub fn delivered_latencies(&self) -> Vec<f64> {
        self.packets
            .iter()
            .filter_map(|p| p.e2e_latency_s)
            .collect()
    }
}

pub(crate) fn latency_stats(latencies: &mut [f64]) -> (f64, f64, f64) {
    if latencies.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    latencies.sort_by(f64::total_cmp);
    let mean = latencies.iter().sum::<f64>() / latencies.len() as f64;
    let median = latencies[latencies.len() / 2];
    let p95 = latencies[((latencies.len() as f64) * 0.95) as usize % latencies.len()];
    (mean, median, p95)
}

struct Engine<'r> {
    cfg: SimConfig,
    router: &'r mut dyn Router,
    graph: NetworkGraph,
    queues: QueueState,
    packets: Vec<Packet>,
    specs: Vec<PacketSpec>,
    events: BinaryHeap<Reverse<Event>>,
    seq: u64,
    now: f64,
    max_occupancy: f64,
    window_latencies: Vec<f64>,
    train_rows: Vec<TrainRow>,
    train_steps: u64,
}

impl<'r> Engine<'r> {
    fn schedule(&mut self, time: f64, kind: EventKind) {
        debug_assert!(time >= self.now, "causality: {} < {}", time, self.now);
        let seq = self.seq;
        self.seq += 1;
        self.events.push(Reverse(Event { time, seq, kind }));
    }

    fn note_occupancy(&mut self, occ: f64) {
        if occ > self.max_occupancy {
            self.max_occupancy = occ;
        }
    }

    fn view<'a>(graph: &'a NetworkGraph, queues: &'a QueueState, time: f64) -> WorldView<'a> {
        WorldView {
            graph,
            queues,
            time,
        }
    }

    /// Enqueue a packet on a queue; on success returns
    /// (queue_delay, tx_delay, prop_delay).
    fn enqueue(
        &mut self,
        queue: QueueRef,
        size_bits: u64,
        rate_bps: f64,
        distance_km: f64,
    ) -> Result<Option<(f64, f64, f64)>, SimError> {
        let (tx, prop, _) = hop_latency(0.0, size_bits, rate_bps, distance_km)?;
        let q = match queue {
            QueueRef::Sat { sat_index, port } => &mut self.queues.sat[sat_index][port],
            QueueRef::Gateway { gw } => &mut self.queues.gateway[gw],
        };
        let now = self.now;
        match q.try_enqueue(now, tx) {
            None => Ok(None),
            Some(queue_delay) => {
                let occ = q.occupancy();
                self.note_occupancy(occ);
                let tx_done = ((now + queue_delay) + tx, queue_delay);
                self.schedule(tx_done.0, EventKind::TxComplete { queue });
                Ok(Some((tx_done.1, tx, prop)))
            }
        }
    }

    fn drop_packet(&mut self, packet_id: u64, reason: DropReason) {
        let p = &mut self.packets[packet_id as usize];
        if p.delivered_at.is_none() && p.dropped.is_none() {
            p.dropped = Some(reason);
            p.pending_hop = None;
        }
    }

    fn on_packet_created(&mut self, spec_index: usize) -> Result<(), SimError> {
        let spec = self.specs[spec_index];
        let id = self.packets.len() as u64;
        self.packets.push(Packet {
            id,
            src_gateway: spec.src_gateway,
            dst_gateway: spec.dst_gateway,
            size_bits: self.cfg.traffic.packet_size_bits,
            created_at: self.now,
            hop_log: Vec::new(),
            delivered_at: None,
            dropped: None,
            pending_hop: None,
        });
        // Uplink on the gateway's single GSL.
        let gsl = self.graph.gsl[spec.src_gateway];
        let size = self.cfg.traffic.packet_size_bits;
        let queue = QueueRef::Gateway {
            gw: spec.src_gateway,
        };
        match self.enqueue(queue, size, gsl.data_rate_bps, gsl.distance_km)? {
            None => self.drop_packet(id, DropReason::QueueFull),
            Some((qd, tx, prop)) => {
                let now = self.now;
                self.packets[id as usize].hop_log.push(HopRecord {
                    node: NodeRef::Gateway(spec.src_gateway),
                    enqueue_time: now,
                    queue_delay: qd,
                    tx_delay: tx,
                    prop_delay: prop,
                });
                let arrival = (((now + qd) + tx) + prop, gsl.sat);
                let sat_index = self.graph.shell.sat_index(arrival.1);
                self.schedule(
                    arrival.0,
                    EventKind::ArrivalSat {
                        packet_id: id,
                        sat_index,
                    },
                );
            }
        }
        Ok(())
    }

    fn on_arrival_sat(&mut self, packet_id: u64, sat_index: usize) -> Result<(), SimError> {
        let p = &self.packets[packet_id as usize];
        if p.dropped.is_some() {
            return Ok(());
        }
        let dst = p.dst_gateway;
        let size = p.size_bits;
        let pending = p.pending_hop;
        let hops_so_far = p.hop_log.len();
        let sat = self.graph.shell.sat_id(sat_index);

        if hops_so_far >= self.cfg.ttl_hops {
            self.drop_packet(packet_id, DropReason::TtlExceeded);
            return Ok(());
        }

        let serving = self.graph.serving_satellite(dst);
        let terminal = serving == sat;

        // Choose the outgoing queue: the GSL downlink for terminal hops
        // (delivery is automatic, not a learned action), otherwise ask the
        // router for an ISL port.
        let (queue, rate, distance, next): (QueueRef, f64, f64, Option<NextHop>) = if terminal {
            let gsl = self.graph.gsl[dst];
            (
                QueueRef::Sat {
                    sat_index,
                    port: GSL_PORT,
                },
                gsl.data_rate_bps,
                gsl.distance_km,
                None,
            )
        } else {
            let decision = {
                let view = Self::view(&self.graph, &self.queues, self.now);
                self.router.decide(packet_id, hops_so_far, sat, dst, &view)
            };
            match decision {
                RouteDecision::Drop => {
                    self.drop_packet(packet_id, DropReason::NoFeasibleAction);
                    return Ok(());
                }
                RouteDecision::Forward(port) => {
                    if port >= 4 {
                        return Err(SimError::RoutingContract { sat, port });
                    }
                    let link = self.graph.isl[sat_index][port]
                        .ok_or(SimError::RoutingContract { sat, port })?;
                    (
                        QueueRef::Sat { sat_index, port },
                        link.data_rate_bps,
                        link.distance_km,
                        Some(NextHop {
                            action: port,
                            neighbor: link.neighbor,
                        }),
                    )
                }
            }
        };

        let enq = self.enqueue(queue, size, rate, distance)?;
        let Some((qd, tx, prop)) = enq else {
            self.drop_packet(packet_id, DropReason::QueueFull);
            return Ok(());
        };
        let now = self.now;
        let hop_index = self.packets[packet_id as usize].hop_log.len();
        self.packets[packet_id as usize].hop_log.push(HopRecord {
            node: NodeRef::Satellite(sat),
            enqueue_time: now,
            queue_delay: qd,
            tx_delay: tx,
            prop_delay: prop,
        });

        // Feedback for the previous ISL hop: the queue delay here is exactly
        // what the sender needs for its reward.
        if let (Some(ph), true) = (pending, self.router.needs_feedback()) {
            let arrival = HopArrival {
                packet_id,
                hop_index: ph.hop_index,
                sender: ph.sender,
                action: ph.action,
                receiver: sat,
                dst_gateway: dst,
                queue_delay: qd,
                terminal,
            };
            {
                let view = Self::view(&self.graph, &self.queues, self.now);
                self.router.on_hop_arrival(&arrival, &view);
            }
            let mut feedback_at = now + ph.prop_delay;
            if self.cfg.feedback_consumes_bandwidth {
                // The feedback frame queues on the receiver's antenna facing
                // the sender. If that link vanished at a topology refresh or
                // its queue is full, fall back to out-of-band delivery.
                let reverse = self.graph.isl[sat_index]
                    .iter()
                    .enumerate()
                    .find_map(|(port, l)| l.filter(|l| l.neighbor == ph.sender).map(|l| (port, l)));
                if let Some((port, link)) = reverse {
                    let enq = self.enqueue(
                        QueueRef::Sat { sat_index, port },
                        FEEDBACK_SIZE_BITS,
                        link.data_rate_bps,
                        link.distance_km,
                    )?;
                    if let Some((qd, tx, prop)) = enq {
                        feedback_at = ((now + qd) + tx) + prop;
                    }
                }
            }
            self.schedule(
                feedback_at,
                EventKind::FeedbackDelivered {
                    packet_id,
                    hop_index: ph.hop_index,
                },
            );
        }

        let arrival_time = ((now + qd) + tx) + prop;
        match next {
            None => {
                self.packets[packet_id as usize].pending_hop = None;
                self.schedule(arrival_time, EventKind::ArrivalGateway { packet_id });
            }
            Some(nh) => {
                self.packets[packet_id as usize].pending_hop = Some(PendingHop {
                    sender: sat,
                    action: nh.action,
                    prop_delay: prop,
                    hop_index,
                });
                let next_index = self.graph.shell.sat_index(nh.neighbor);
                self.schedule(
                    arrival_time,
                    EventKind::ArrivalSat {
                        packet_id,
                        sat_index: next_index,
                    },
                );
            }
        }
        Ok(())
    }

    fn on_arrival_gateway(&mut self, packet_id: u64) {
        let now = self.now;
        let p = &mut self.packets[packet_id as usize];
        if p.dropped.is_none() && p.delivered_at.is_none() {
            p.delivered_at = Some(now);
            self.window_latencies.push(now - p.created_at);
        }
    }

    fn on_topology_refresh(&mut self) -> Result<(), SimError> {
        self.graph = refresh_topology(
            &self.cfg.shell,
            &self.cfg.gateways,
            &self.cfg.topology,
            self.now,
        )?;
        self.router.on_topology(&self.graph);
        Ok(())
    }

    fn on_train_step(&mut self) {
        self.train_steps += 1;
        let metrics = {
            let view = Self::view(&self.graph, &self.queues, self.now);
            self.router.train_step(self.now, &view)
        };
        if let Some(m) = metrics {
            let window_mean = if self.window_latencies.is_empty() {
                0.0
            } else {
                self.window_latencies.iter().sum::<f64>() / self.window_latencies.len() as f64
            };
            self.train_rows.push(TrainRow {
                step: self.train_steps,
                sim_time: self.now,
                epsilon: m.epsilon,
                loss: m.loss,
                window_mean_latency_s: window_mean,
                buffer_size: m.buffer_size,
            });
        }
        self.window_latencies.clear();
    }

    /// Filler service completion on a preloaded queue; tops the queue back
    /// up while the preload window is open.
    fn on_filler_tx(&mut self, sat_index: usize, port: usize) {
        self.queues.sat[sat_index][port].on_tx_complete();
        let until = self.cfg.preload.map(|p| p.until_s).unwrap_or(0.0);
        if self.now < until {
            if let Some(link) = self.graph.isl[sat_index][port] {
                let tx = self.cfg.traffic.packet_size_bits as f64 / link.data_rate_bps;
                let q = &mut self.queues.sat[sat_index][port];
                if q.try_enqueue(self.now, tx).is_some() {
                    let t = q.busy_until;
                    self.schedule(t, EventKind::FillerTx { sat_index, port });
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct NextHop {
    action: usize,
    neighbor: SatelliteId,
}

/// Run a full scenario with the given router. Identical configs and seeds
/// produce identical reports.
pub fn run_simulation(cfg: &SimConfig, router: &mut dyn Router) -> Result<SimReport, SimError> {
    let specs = generate_traffic(&cfg.traffic, cfg.gateways.len())?;
    let graph = refresh_topology(&cfg.shell, &cfg.gateways, &cfg.topology, 0.0)?;
    let num_sats = cfg.shell.num_satellites();
    let queues = QueueState::new(num_sats, cfg.gateways.len(), cfg.queue_capacity);

    let mut engine = Engine {
        cfg: cfg.clone(),
        router,
        graph,
        queues,
        packets: Vec::with_capacity(specs.len()),
        specs,
        events: BinaryHeap::new(),
        seq: 0,
        now: 0.0,
        max_occupancy: 0.0,
        window_latencies: Vec::new(),
        train_rows: Vec::new(),
        train_steps: 0,
    };
    engine.router.on_topology(&engine.graph);

    let until = cfg.traffic.duration_s;
    for i in 0..engine.specs.len() {
        let t = engine.specs[i].created_at;
        engine.schedule(t, EventKind::PacketCreated { spec_index: i });
    }
    let mut t = cfg.topology_refresh_s;
    while t <= until {
        engine.schedule(t, EventKind::TopologyRefresh);
        t += cfg.topology_refresh_s;
    }
    if engine.router.needs_train_steps() {
        let mut t = cfg.train_every_s;
        while t <= until {
            engine.schedule(t, EventKind::TrainStep);
            t += cfg.train_every_s;
        }
    }
    if let Some(pre) = cfg.preload {
        let fill = ((cfg.queue_capacity as f64) * pre.fraction).floor() as usize;
        for slot in 0..cfg.shell.sats_per_plane {
            let sat_index = cfg.shell.sat_index(SatelliteId {
                plane: pre.plane,
                slot,
            });
            for port in 0..4 {
                if let Some(link) = engine.graph.isl[sat_index][port] {
                    let tx = cfg.traffic.packet_size_bits as f64 / link.data_rate_bps;
                    for _ in 0..fill {
                        let q = &mut engine.queues.sat[sat_index][port];
                        if q.try_enqueue(0.0, tx).is_some() {
                            let t = q.busy_until;
                            engine.schedule(t, EventKind::FillerTx { sat_index, port });
                        }
                    }
                }
            }
        }
    }

    while let Some(Reverse(ev)) = engine.events.pop() {
        debug_assert!(ev.time >= engine.now);
        engine.now = ev.time;
        match ev.kind {
            EventKind::PacketCreated { spec_index } => engine.on_packet_created(spec_index)?,
            EventKind::TxComplete { queue } => match queue {
                QueueRef::Sat { sat_index, port } => {
                    engine.queues.sat[sat_index][port].on_tx_complete()
                }
                QueueRef::Gateway { gw } => engine.queues.gateway[gw].on_tx_complete(),
            },
            EventKind::ArrivalSat {
                packet_id,
                sat_index,
            } => engine.on_arrival_sat(packet_id, sat_index)?,
            EventKind::ArrivalGateway { packet_id } => engine.on_arrival_gateway(packet_id),
            EventKind::TopologyRefresh => engine.on_topology_refresh()?,
            EventKind::FeedbackDelivered {
                packet_id,
                hop_index,
            } => {
                let view = Engine::view(&engine.graph, &engine.queues, engine.now);
                engine
                    .router
                    .on_feedback_delivered(packet_id, hop_index, &view);
            }
            EventKind::TrainStep => engine.on_train_step(),
            EventKind::FillerTx { sat_index, port } => engine.on_filler_tx(sat_index, port),
        }
    }

    let records: Vec<PacketRecord> = engine
        .packets
        .iter()
        .map(|p| PacketRecord {
            id: p.id,
            src_gateway: p.src_gateway,
            dst_gateway: p.dst_gateway,
            created_at: p.created_at,
            delivered_at: p.delivered_at,
            hops: p.hop_log.len(),
            e2e_latency_s: p.delivered_at.map(|d| d - p.created_at),
            dropped: p.dropped,
            hop_log: p.hop_log.clone(),
        })
        .collect();
    let delivered = records.iter().filter(|r| r.delivered_at.is_some()).count();
    let dropped = records.iter().filter(|r| r.dropped.is_some()).count();
    let created = records.len();
    let mut latencies: Vec<f64> = records.iter().filter_map(|r| r.e2e_latency_s).collect();
    let (mean, median, p95) = latency_stats(&mut latencies);
    Ok(SimReport {
        created,
        delivered,
        dropped,
        in_flight: created - delivered - dropped,
        mean_latency_s: mean,
        median_latency_s: median,
        p95_latency_s: p95,
        max_queue_occupancy: engine.max_occupancy,
        packets: records,
        train_rows: engine.train_rows,
        traffic_seed: cfg.traffic.seed,
    })
}
