//! Multi-agent deep RL router. Offline phase: every agent acts through one
//! shared Q-network trained from a global replay buffer with decaying
//! exploration. Online phase: each satellite gets its own copy of the
//! trained weights, acts greedily with a small residual epsilon, and can
//! keep training on a private buffer of its own experiences.

use std::collections::{BTreeSet, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::agent::{
    hop_reward, observe, select_action, Experience, Observation, PhaseConfig, PhaseMode,
    ReplayBuffer, RewardConfig, OBSERVATION_DIM,
};
use crate::geometry::SatelliteId;
use crate::nn::{
    copy_weights, sync_target, train_step, AdamState, MlpParams, TrainConfig, NUM_ACTIONS,
};
use crate::sim::{HopArrival, RouteDecision, Router, TrainMetrics, WorldView};

struct LocalAgent {
    params: MlpParams,
    target: MlpParams,
    adam: AdamState,
    buffer: ReplayBuffer,
}

pub struct MadrlRouter {
    phase: PhaseConfig,
    train_cfg: TrainConfig,
    reward_cfg: RewardConfig,
    global: MlpParams,
    target: MlpParams,
    adam: AdamState,
    global_buffer: ReplayBuffer,
    /// Per-satellite nets, populated only in the online phase.
    locals: Vec<LocalAgent>,
    epsilon: f64,
    action_rng: ChaCha8Rng,
    sample_rng: ChaCha8Rng,
    /// Sender observations awaiting the receiver side of the experience.
    pending_obs: HashMap<(u64, usize), Observation>,
    /// Completed experiences riding back to the sender as feedback.
    pending_exp: HashMap<(u64, usize), (usize, Experience)>,
    /// Agents with new local experiences since their last train step.
    dirty_agents: BTreeSet<usize>,
    steps: u64,
    local_pushed: u64,
}

impl MadrlRouter {
    fn layer_dims(train_cfg: &TrainConfig) -> Vec<usize> {
        vec![
            OBSERVATION_DIM,
            train_cfg.hidden_dims[0],
            train_cfg.hidden_dims[1],
            NUM_ACTIONS,
        ]
    }

    /// Offline exploration: fresh random global weights, shared by all
    /// agents.
    pub fn offline(
        phase: PhaseConfig,
        train_cfg: TrainConfig,
        reward_cfg: RewardConfig,
        seed: u64,
    ) -> Self {
        let mut init_rng = ChaCha8Rng::seed_from_u64(seed);
        let global = MlpParams::init(&Self::layer_dims(&train_cfg), &mut init_rng);
        let target = sync_target(&global);
        let adam = AdamState::new(&global);
        let buffer_capacity = phase.buffer_capacity;
        Self {
            epsilon: phase.epsilon_start,
            phase,
            train_cfg,
            reward_cfg,
            target,
            adam,
            global_buffer: ReplayBuffer::new(buffer_capacity),
            locals: Vec::new(),
            action_rng: ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5_5A5A_1234_5678),
            sample_rng: ChaCha8Rng::seed_from_u64(seed ^ 0x0F0F_F0F0_8765_4321),
            pending_obs: HashMap::new(),
            pending_exp: HashMap::new(),
            dirty_agents: BTreeSet::new(),
            steps: 0,
            local_pushed: 0,
            global,
        }
    }

    /// Online exploitation: every agent starts from an exact copy of the
    /// pretrained weights and owns a private buffer.
    pub fn online(
        pretrained: MlpParams,
        num_sats: usize,
        phase: PhaseConfig,
        train_cfg: TrainConfig,
        reward_cfg: RewardConfig,
        seed: u64,
    ) -> Self {
        let locals = (0..num_sats)
            .map(|_| {
                let params = copy_weights(&pretrained);
                let target = sync_target(&params);
                let adam = AdamState::new(&params);
                LocalAgent {
                    params,
                    target,
                    adam,
                    buffer: ReplayBuffer::new(phase.local_buffer_capacity),
                }
            })
            .collect();
        let target = sync_target(&pretrained);
        let adam = AdamState::new(&pretrained);
        Self {
            epsilon: phase.epsilon_end,
            phase,
            train_cfg,
            reward_cfg,
            target,
            adam,
            global_buffer: ReplayBuffer::new(1),
            locals,
            action_rng: ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5_5A5A_1234_5678),
            sample_rng: ChaCha8Rng::seed_from_u64(seed ^ 0x0F0F_F0F0_8765_4321),
            pending_obs: HashMap::new(),
            pending_exp: HashMap::new(),
            dirty_agents: BTreeSet::new(),
            steps: 0,
            local_pushed: 0,
            global: pretrained,
        }
    }

    pub fn mode(&self) -> PhaseMode {
        self.phase.mode
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn global_params(&self) -> &MlpParams {
        &self.global
    }

    /// Per-agent weights in dense satellite-index order (online phase).
    pub fn local_params(&self) -> Vec<&MlpParams> {
        self.locals.iter().map(|a| &a.params).collect()
    }

    pub fn global_buffer_len(&self) -> usize {
        self.global_buffer.len()
    }

    pub fn local_buffer_lens(&self) -> Vec<usize> {
        self.locals.iter().map(|a| a.buffer.len()).collect()
    }

    pub fn global_experiences(&self) -> impl Iterator<Item = &Experience> {
        self.global_buffer.iter()
    }
}

impl Router for MadrlRouter {
    fn decide(
        &mut self,
        packet_id: u64,
        hop_index: usize,
        sat: SatelliteId,
        dst_gateway: usize,
        view: &WorldView,
    ) -> RouteDecision {
        let idx = view.graph.shell.sat_index(sat);
        let obs = observe(sat, dst_gateway, view);
        let net = if self.locals.is_empty() {
            &self.global
        } else {
            &self.locals[idx].params
        };
        let action = select_action(net, &obs, self.epsilon, &mut self.action_rng);
        match action {
            None => RouteDecision::Drop,
            Some(a) => {
                self.pending_obs.insert((packet_id, hop_index), obs);
                RouteDecision::Forward(a)
            }
        }
    }

    fn needs_feedback(&self) -> bool {
        true
    }

    fn on_hop_arrival(&mut self, arrival: &HopArrival, view: &WorldView) {
        let Some(state) = self
            .pending_obs
            .remove(&(arrival.packet_id, arrival.hop_index))
        else {
            return;
        };
        let reward = hop_reward(
            arrival.sender,
            arrival.receiver,
            arrival.dst_gateway,
            arrival.queue_delay,
            view,
            &self.reward_cfg,
        );
        let next_state =
            (!arrival.terminal).then(|| observe(arrival.receiver, arrival.dst_gateway, view));
        let sender_index = view.graph.shell.sat_index(arrival.sender);
        self.pending_exp.insert(
            (arrival.packet_id, arrival.hop_index),
            (
                sender_index,
                Experience {
                    state,
                    action: arrival.action,
                    reward,
                    next_state,
                    terminal: arrival.terminal,
                },
            ),
        );
    }

    fn on_feedback_delivered(&mut self, packet_id: u64, hop_index: usize, _view: &WorldView) {
        let Some((sender, exp)) = self.pending_exp.remove(&(packet_id, hop_index)) else {
            return;
        };
        match self.phase.mode {
            PhaseMode::OfflineExploration => self.global_buffer.push(exp),
            PhaseMode::OnlineExploitation => {
                self.locals[sender].buffer.push(exp);
                self.local_pushed += 1;
                if self.phase.online_learning_enabled {
                    self.dirty_agents.insert(sender);
                }
            }
        }
    }

    fn needs_train_steps(&self) -> bool {
        true
    }

    fn train_step(&mut self, _now: f64, _view: &WorldView) -> Option<TrainMetrics> {
        self.steps += 1;
        let batch_size = self.train_cfg.batch_size;
        let mut loss = 0.0;
        match self.phase.mode {
            PhaseMode::OfflineExploration => {
                if self.global_buffer.len() >= batch_size {
                    let batch = self.global_buffer.sample(batch_size, &mut self.sample_rng);
                    loss = train_step(
                        &mut self.global,
                        &self.target,
                        &mut self.adam,
                        &batch,
                        &self.train_cfg,
                    )
                    .expect("training diverged");
                    if self
                        .adam
                        .step
                        .is_multiple_of(self.train_cfg.target_sync_every)
                    {
                        self.target = sync_target(&self.global);
                    }
                }
                self.epsilon = (self.epsilon * (1.0 - self.phase.epsilon_decay_per_step))
                    .max(self.phase.epsilon_end);
                Some(TrainMetrics {
                    epsilon: self.epsilon,
                    loss,
                    buffer_size: self.global_buffer.len(),
                })
            }
            PhaseMode::OnlineExploitation => {
                if self.phase.online_learning_enabled {
                    let dirty: Vec<usize> =
                        std::mem::take(&mut self.dirty_agents).into_iter().collect();
                    let mut trained = 0usize;
                    for idx in dirty {
                        let agent = &mut self.locals[idx];
                        if agent.buffer.len() >= batch_size {
                            let batch = agent.buffer.sample(batch_size, &mut self.sample_rng);
                            loss += train_step(
                                &mut agent.params,
                                &agent.target,
                                &mut agent.adam,
                                &batch,
                                &self.train_cfg,
                            )
                            .expect("training diverged");
                            if agent
                                .adam
                                .step
                                .is_multiple_of(self.train_cfg.target_sync_every)
                            {
                                agent.target = sync_target(&agent.params);
                            }
                            trained += 1;
                        }
                    }
                    if trained > 0 {
                        loss /= trained as f64;
                    }
                }
                Some(TrainMetrics {
                    epsilon: self.epsilon,
                    loss,
                    buffer_size: self.local_pushed.min(usize::MAX as u64) as usize,
                })
            }
        }
    }
}
