//! Tabular Q-routing baseline: per-satellite tables over (destination
//! gateway, ISL direction), no positional features, trained from the same
//! neighbor feedback and reward as the deep router.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{hop_reward, RewardConfig};
use crate::geometry::SatelliteId;
use crate::nn::NUM_ACTIONS;
use crate::sim::{HopArrival, RouteDecision, Router, TrainMetrics, WorldView};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QRoutingConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

impl Default for QRoutingConfig {
    fn default() -> Self {
        Self {
            alpha: 0.3,
            gamma: 0.9,
            epsilon: 0.05,
        }
    }
}

impl QRoutingConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err("alpha must be in (0, 1]".into());
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err("gamma must be in (0, 1]".into());
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err("epsilon must be in [0, 1]".into());
        }
        Ok(())
    }
}

/// Estimated returns per (satellite, destination gateway, action),
/// zero-initialized.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    pub values: Vec<Vec<[f64; NUM_ACTIONS]>>,
}

impl QTable {
    pub fn zeros(num_sats: usize, num_gateways: usize) -> Self {
        Self {
            values: vec![vec![[0.0; NUM_ACTIONS]; num_gateways]; num_sats],
        }
    }

    pub fn entry(&self, sat: usize, dst: usize, action: usize) -> f64 {
        self.values[sat][dst][action]
    }

    /// Best estimated return at a satellite over the feasible actions.
    pub fn best_feasible(&self, sat: usize, dst: usize, feasible: &[bool; NUM_ACTIONS]) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for (a, &ok) in feasible.iter().enumerate() {
            if ok && self.values[sat][dst][a] > best {
                best = self.values[sat][dst][a];
            }
        }
        if best.is_finite() {
            best
        } else {
            0.0
        }
    }

    /// Greedy action over feasible entries, ties to the lowest index.
    pub fn greedy(&self, sat: usize, dst: usize, feasible: &[bool; NUM_ACTIONS]) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (a, &ok) in feasible.iter().enumerate() {
            if !ok {
                continue;
            }
            if best.is_none_or(|b| self.values[sat][dst][a] > self.values[sat][dst][b]) {
                best = Some(a);
            }
        }
        best
    }
}

/// Q(d,a) <- Q(d,a) + alpha * (r + gamma * neighbor_best * (1 - terminal) - Q(d,a)).
pub fn q_routing_update(
    entry: &mut f64,
    alpha: f64,
    reward: f64,
    gamma: f64,
    neighbor_best: f64,
    terminal: bool,
) {
    let bootstrap = if terminal { 0.0 } else { gamma * neighbor_best };
    *entry += alpha * (reward + bootstrap - *entry);
}

/// Epsilon-greedy over feasible actions.
pub fn q_routing_next_hop<R: Rng>(
    table: &QTable,
    sat: usize,
    dst: usize,
    feasible: &[bool; NUM_ACTIONS],
    epsilon: f64,
    rng: &mut R,
) -> Option<usize> {
    let options: Vec<usize> = (0..NUM_ACTIONS).filter(|&a| feasible[a]).collect();
    if options.is_empty() {
        return None;
    }
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        return Some(options[rng.gen_range(0..options.len())]);
    }
    table.greedy(sat, dst, feasible)
}

#[derive(Debug, Clone, Copy)]
struct PendingUpdate {
    sat: usize,
    dst: usize,
    action: usize,
    reward: f64,
    neighbor_best: f64,
    terminal: bool,
}

/// Router owning one Q-table per satellite, updated when the neighbor
/// feedback message arrives back at the sender.
pub struct QRoutingRouter {
    pub table: QTable,
    cfg: QRoutingConfig,
    reward_cfg: RewardConfig,
    rng: ChaCha8Rng,
    pending: HashMap<(u64, usize), PendingUpdate>,
    updates: u64,
}

impl QRoutingRouter {
    pub fn new(
        num_sats: usize,
        num_gateways: usize,
        cfg: QRoutingConfig,
        reward_cfg: RewardConfig,
        seed: u64,
    ) -> Self {
        Self {
            table: QTable::zeros(num_sats, num_gateways),
            cfg,
            reward_cfg,
            rng: ChaCha8Rng::seed_from_u64(seed),
            pending: HashMap::new(),
            updates: 0,
        }
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    fn feasible(view: &WorldView, sat_index: usize) -> [bool; NUM_ACTIONS] {
        let mut mask = [false; NUM_ACTIONS];
        for (k, l) in view.graph.isl[sat_index].iter().enumerate() {
            mask[k] = l.is_some();
        }
        mask
    }
}

impl Router for QRoutingRouter {
    fn decide(
        &mut self,
        _packet_id: u64,
        _hop_index: usize,
        sat: SatelliteId,
        dst_gateway: usize,
        view: &WorldView,
    ) -> RouteDecision {
        let idx = view.graph.shell.sat_index(sat);
        let feasible = Self::feasible(view, idx);
        match q_routing_next_hop(
            &self.table,
            idx,
            dst_gateway,
            &feasible,
            self.cfg.epsilon,
            &mut self.rng,
        ) {
            Some(a) => RouteDecision::Forward(a),
            None => RouteDecision::Drop,
        }
    }

    fn needs_feedback(&self) -> bool {
        true
    }

    fn on_hop_arrival(&mut self, arrival: &HopArrival, view: &WorldView) {
        let shell = &view.graph.shell;
        let sender = shell.sat_index(arrival.sender);
        let receiver = shell.sat_index(arrival.receiver);
        let reward = hop_reward(
            arrival.sender,
            arrival.receiver,
            arrival.dst_gateway,
            arrival.queue_delay,
            view,
            &self.reward_cfg,
        );
        // The receiver's best estimate is read at arrival time and shipped
        // back with the feedback message.
        let neighbor_best = self.table.best_feasible(
            receiver,
            arrival.dst_gateway,
            &Self::feasible(view, receiver),
        );
        self.pending.insert(
            (arrival.packet_id, arrival.hop_index),
            PendingUpdate {
                sat: sender,
                dst: arrival.dst_gateway,
                action: arrival.action,
                reward,
                neighbor_best,
                terminal: arrival.terminal,
            },
        );
    }

    fn on_feedback_delivered(&mut self, packet_id: u64, hop_index: usize, _view: &WorldView) {
        if let Some(u) = self.pending.remove(&(packet_id, hop_index)) {
            q_routing_update(
                &mut self.table.values[u.sat][u.dst][u.action],
                self.cfg.alpha,
                u.reward,
                self.cfg.gamma,
                u.neighbor_best,
                u.terminal,
            );
            self.updates += 1;
        }
    }

    fn needs_train_steps(&self) -> bool {
        // No batched training, but train-step events drive the metrics log.
        true
    }

    fn train_step(&mut self, _now: f64, _view: &WorldView) -> Option<TrainMetrics> {
        Some(TrainMetrics {
            epsilon: self.cfg.epsilon,
            loss: 0.0,
            buffer_size: self.updates as usize,
        })
    }
}
