//! Agent-side primitives of the learning framework: local observations,
//! the slant-range/queue reward, epsilon-greedy action selection over the
//! Q-network, and the experience replay buffer.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{slant_range, SatelliteId};
use crate::nn::{MlpParams, TrainSample, NUM_ACTIONS};
use crate::sim::WorldView;

/// Flattened observation length: own position (3), four neighbor positions
/// (12), destination position (3), four congestion levels (4).
pub const OBSERVATION_DIM: usize = 22;

/// What an agent sees when holding a packet: unit-sphere positions of
/// itself, its four neighbors and the destination gateway, plus per-neighbor
/// congestion levels. Absent neighbors are zero-filled and masked out.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub values: Vec<f64>,
    pub mask: [bool; NUM_ACTIONS],
}

/// Build the observation for a packet held at `sat` and destined for
/// `dst_gateway`. Congestion per neighbor is the occupancy fraction of that
/// neighbor's most-loaded outgoing ISL queue.
pub fn observe(sat: SatelliteId, dst_gateway: usize, view: &WorldView) -> Observation {
    let graph = view.graph;
    let shell = &graph.shell;
    let mut values = Vec::with_capacity(OBSERVATION_DIM);
    let own = graph.sat_position(sat).unit();
    values.extend_from_slice(&[own.x, own.y, own.z]);

    let links = graph.isl_links(sat);
    let mut mask = [false; NUM_ACTIONS];
    let mut congestion = [0.0; NUM_ACTIONS];
    for (k, link) in links.iter().enumerate() {
        match link {
            Some(l) => {
                let p = graph.sat_position(l.neighbor).unit();
                values.extend_from_slice(&[p.x, p.y, p.z]);
                mask[k] = true;
                congestion[k] = view.queues.max_isl_occupancy(shell.sat_index(l.neighbor));
            }
            None => values.extend_from_slice(&[0.0, 0.0, 0.0]),
        }
    }
    let dest = graph.gateway_positions[dst_gateway].unit();
    values.extend_from_slice(&[dest.x, dest.y, dest.z]);
    values.extend_from_slice(&congestion);
    debug_assert_eq!(values.len(), OBSERVATION_DIM);
    Observation { values, mask }
}

/// Reward normalizers and the congestion weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardConfig {
    /// Slant-range normalizer, km.
    pub l_ref_km: f64,
    /// Queue-time normalizer, seconds.
    pub t_ref_s: f64,
    /// Weight of the queue-time penalty.
    pub beta: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            l_ref_km: 1000.0,
            t_ref_s: 0.01,
            beta: 1.0,
        }
    }
}

/// r = (d_before - d_after)/L_ref - beta * queue_time/T_ref.
pub fn compute_reward(
    d_before_km: f64,
    d_after_km: f64,
    queue_time_s: f64,
    cfg: &RewardConfig,
) -> f64 {
    (d_before_km - d_after_km) / cfg.l_ref_km - cfg.beta * queue_time_s / cfg.t_ref_s
}

/// Reward for one hop of a packet toward `dst_gateway`, with slant ranges
/// taken from the current snapshot.
pub fn hop_reward(
    sender: SatelliteId,
    receiver: SatelliteId,
    dst_gateway: usize,
    queue_time_s: f64,
    view: &WorldView,
    cfg: &RewardConfig,
) -> f64 {
    let gw = view.graph.gateway_positions[dst_gateway];
    let d_before = slant_range(view.graph.sat_position(sender), gw);
    let d_after = slant_range(view.graph.sat_position(receiver), gw);
    compute_reward(d_before, d_after, queue_time_s, cfg)
}

/// Epsilon-greedy action over the feasible entries of the Q-network output;
/// greedy ties go to the lowest action index. `None` when nothing is
/// feasible.
pub fn select_action<R: Rng>(
    net: &MlpParams,
    obs: &Observation,
    epsilon: f64,
    rng: &mut R,
) -> Option<usize> {
    let feasible: Vec<usize> = (0..NUM_ACTIONS).filter(|&a| obs.mask[a]).collect();
    if feasible.is_empty() {
        return None;
    }
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        return Some(feasible[rng.gen_range(0..feasible.len())]);
    }
    let q = net.forward(&obs.values).expect("observation length fixed");
    let mut best = feasible[0];
    for &a in &feasible[1..] {
        if q[a] > q[best] {
            best = a;
        }
    }
    Some(best)
}

/// Cross-agent experience tuple: state at the sender, action taken, reward,
/// and the state observed at the receiving agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Experience {
    pub state: Observation,
    pub action: usize,
    pub reward: f64,
    pub next_state: Option<Observation>,
    pub terminal: bool,
}

impl Experience {
    pub fn to_sample(&self) -> TrainSample {
        TrainSample {
            state: self.state.values.clone(),
            action: self.action,
            reward: self.reward,
            next_state: self.next_state.as_ref().map(|o| o.values.clone()),
            next_mask: self
                .next_state
                .as_ref()
                .map(|o| o.mask)
                .unwrap_or([false; NUM_ACTIONS]),
        }
    }
}

/// Bounded ring of experiences with uniform sampling; eviction is strictly
/// oldest-first.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    ring: Vec<Experience>,
    head: usize,
    pushed: u64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        Self {
            capacity,
            ring: Vec::with_capacity(capacity.min(1 << 16)),
            head: 0,
            pushed: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.ring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ring.is_empty()
    }

    pub fn total_pushed(&self) -> u64 {
        self.pushed
    }

    pub fn push(&mut self, e: Experience) {
        self.pushed += 1;
        if self.ring.len() < self.capacity {
            self.ring.push(e);
        } else {
            self.ring[self.head] = e;
            self.head = (self.head + 1) % self.capacity;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Experience> {
        self.ring.iter()
    }

    /// Uniform sample with replacement.
    pub fn sample<R: Rng>(&self, batch: usize, rng: &mut R) -> Vec<TrainSample> {
        (0..batch)
            .map(|_| self.ring[rng.gen_range(0..self.ring.len())].to_sample())
            .collect()
    }
}

/// Learning phase selector and exploration schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    OfflineExploration,
    OnlineExploitation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseConfig {
    pub mode: PhaseMode,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Multiplicative decay applied per train-step event:
    /// eps <- max(eps_end, eps * (1 - decay)).
    pub epsilon_decay_per_step: f64,
    pub buffer_capacity: usize,
    pub local_buffer_capacity: usize,
    pub online_learning_enabled: bool,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self {
            mode: PhaseMode::OfflineExploration,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_per_step: 0.004,
            buffer_capacity: 100_000,
            local_buffer_capacity: 10_000,
            online_learning_enabled: true,
        }
    }
}

impl PhaseConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.epsilon_start) {
            return Err("epsilon_start must be in [0, 1]".into());
        }
        if !(0.0..=1.0).contains(&self.epsilon_end) {
            return Err("epsilon_end must be in [0, 1]".into());
        }
        if self.epsilon_end > self.epsilon_start {
            return Err("epsilon_end must not exceed epsilon_start".into());
        }
        if !(self.epsilon_decay_per_step > 0.0) {
            return Err("epsilon_decay_per_step must be > 0".into());
        }
        if self.buffer_capacity == 0 || self.local_buffer_capacity == 0 {
            return Err("buffer capacities must be >= 1".into());
        }
        Ok(())
    }
}
