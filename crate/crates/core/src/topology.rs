//! Time-varying network graph: satellites with up to 2 intra-plane and
//! 2 inter-plane ISLs, gateways with a single GSL to their nearest satellite.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    gateway_position, satellite_position, slant_range, EcefVector, GeoPosition, OrbitalShell,
    SatelliteId,
};
use crate::link::{feasible_rate, LinkBudgetParams, ModcodTable};

/// Number of ISL antennas per satellite.
pub const NUM_ISL_DIRECTIONS: usize = 4;

/// Antenna slots in adjacency order.
pub const INTRA_FORWARD: usize = 0;
pub const INTRA_BACKWARD: usize = 1;
pub const INTER_LEFT: usize = 2;
pub const INTER_RIGHT: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("gateway {gateway} has no feasible MODCOD to any satellite")]
    InfeasibleGateway { gateway: usize },
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeRef {
    Satellite(SatelliteId),
    Gateway(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeKind {
    IntraPlaneIsl,
    InterPlaneIsl,
    Gsl,
}

/// One directed view of a satellite-to-satellite link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IslLink {
    pub neighbor: SatelliteId,
    pub distance_km: f64,
    pub data_rate_bps: f64,
    pub kind: EdgeKind,
}

/// Gateway attachment to its serving satellite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GslLink {
    pub sat: SatelliteId,
    pub distance_km: f64,
    pub data_rate_bps: f64,
}

/// Inter-plane partner policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterplanePolicy {
    /// Connect to the nearest satellite in the adjacent plane when the choice
    /// is mutual.
    NearestMutual,
    /// Connect to the same slot index in the adjacent plane.
    SameSlot,
}

/// Link parameters shared by topology construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyParams {
    pub isl: LinkBudgetParams,
    pub gsl: LinkBudgetParams,
    pub modcod: ModcodTable,
    /// Permit cross-seam inter-plane links when the plane ring wraps.
    pub wrap_seam: bool,
    pub interplane_policy: InterplanePolicy,
}

/// Immutable topology snapshot at a point in simulated time.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    pub snapshot_time: f64,
    pub shell: OrbitalShell,
    pub sat_positions: Vec<EcefVector>,
    pub gateway_positions: Vec<EcefVector>,
    /// Per satellite, per antenna slot: the ISL carried by that antenna.
    pub isl: Vec<[Option<IslLink>; NUM_ISL_DIRECTIONS]>,
    /// Per gateway: its single GSL.
    pub gsl: Vec<GslLink>,
}

impl NetworkGraph {
    pub fn sat_position(&self, id: SatelliteId) -> EcefVector {
        self.sat_positions[self.shell.sat_index(id)]
    }

    pub fn isl_links(&self, id: SatelliteId) -> &[Option<IslLink>; NUM_ISL_DIRECTIONS] {
        &self.isl[self.shell.sat_index(id)]
    }

    pub fn serving_satellite(&self, gateway: usize) -> SatelliteId {
        self.gsl[gateway].sat
    }

    /// Gateways currently served by `sat`.
    pub fn gateways_served_by(&self, sat: SatelliteId) -> impl Iterator<Item = usize> + '_ {
        self.gsl
            .iter()
            .enumerate()
            .filter(move |(_, g)| g.sat == sat)
            .map(|(i, _)| i)
    }

    /// True when the satellite subgraph is connected over its ISLs.
    pub fn satellites_connected(&self) -> bool {
        let n = self.shell.num_satellites();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for link in self.isl[i].iter().flatten() {
                let j = self.shell.sat_index(link.neighbor);
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count == n
    }
}

/// Build the ISL adjacency at time `t`.
///
/// Intra-plane antennas connect slot neighbors around the plane ring.
/// Inter-plane antennas connect to the nearest satellite in the adjacent
/// plane; the edge is kept only when the choice is mutual, so adjacency stays
/// symmetric and every satellite keeps at most one link per antenna. Edges
/// with no feasible MODCOD are omitted.
pub fn build_isl_edges(
    shell: &OrbitalShell,
    params: &TopologyParams,
    sat_positions: &[EcefVector],
) -> Vec<[Option<IslLink>; NUM_ISL_DIRECTIONS]> {
    let n = shell.num_satellites();
    let mut isl: Vec<[Option<IslLink>; NUM_ISL_DIRECTIONS]> = vec![[None; 4]; n];
    let pos = |id: SatelliteId| sat_positions[shell.sat_index(id)];
    let link = |a: SatelliteId, b: SatelliteId, kind: EdgeKind| -> Option<IslLink> {
        let d = slant_range(pos(a), pos(b));
        let rate = feasible_rate(&params.isl, &params.modcod, d)?;
        Some(IslLink {
            neighbor: b,
            distance_km: d,
            data_rate_bps: rate,
            kind,
        })
    };

    // Intra-plane ring.
    let s = shell.sats_per_plane;
    for id in shell.ids() {
        let i = shell.sat_index(id);
        if s >= 2 {
            let fwd = SatelliteId {
                plane: id.plane,
                slot: (id.slot + 1) % s,
            };
            isl[i][INTRA_FORWARD] = link(id, fwd, EdgeKind::IntraPlaneIsl);
        }
        if s >= 3 {
            let back = SatelliteId {
                plane: id.plane,
                slot: (id.slot + s - 1) % s,
            };
            isl[i][INTRA_BACKWARD] = link(id, back, EdgeKind::IntraPlaneIsl);
        }
    }

    // Inter-plane links for each adjacent ordered plane pair (p, p+1).
    let m = shell.num_planes;
    if m >= 2 {
        let wrap = params.wrap_seam && shell.raan_spread_deg >= 360.0 && m > 2;
        let last_pair = if wrap { m } else { m - 1 };
        for p in 0..last_pair {
            let q = (p + 1) % m;
            for k in 0..s {
                let a = SatelliteId { plane: p, slot: k };
                let partner = match params.interplane_policy {
                    InterplanePolicy::SameSlot => Some(k),
                    InterplanePolicy::NearestMutual => {
                        let j = nearest_slot_in_plane(shell, sat_positions, pos(a), q);
                        // Keep the edge only when the choice is mutual.
                        let b = SatelliteId { plane: q, slot: j };
                        let back = nearest_slot_in_plane(shell, sat_positions, pos(b), p);
                        (back == k).then_some(j)
                    }
                };
                if let Some(j) = partner {
                    let b = SatelliteId { plane: q, slot: j };
                    if let Some(l) = link(a, b, EdgeKind::InterPlaneIsl) {
                        isl[shell.sat_index(a)][INTER_RIGHT] = Some(l);
                        isl[shell.sat_index(b)][INTER_LEFT] = Some(IslLink { neighbor: a, ..l });
                    }
                }
            }
        }
    }
    isl
}

/// Slot index in `plane` nearest to `from`, ties to the smallest slot.
pub fn nearest_slot_in_plane(
    shell: &OrbitalShell,
    sat_positions: &[EcefVector],
    from: EcefVector,
    plane: usize,
) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for slot in 0..shell.sats_per_plane {
        let d = slant_range(
            from,
            sat_positions[shell.sat_index(SatelliteId { plane, slot })],
        );
        if d < best_d {
            best_d = d;
            best = slot;
        }
    }
    best
}

/// Attach each gateway to its nearest feasible satellite; ties go to the
/// smallest (plane, slot).
pub fn attach_gateways(
    shell: &OrbitalShell,
    params: &TopologyParams,
    sat_positions: &[EcefVector],
    gateway_positions: &[EcefVector],
) -> Result<Vec<GslLink>, TopologyError> {
    let mut gsl = Vec::with_capacity(gateway_positions.len());
    for (g, &gpos) in gateway_positions.iter().enumerate() {
        let mut best: Option<GslLink> = None;
        for id in shell.ids() {
            let d = slant_range(gpos, sat_positions[shell.sat_index(id)]);
            if best.is_none_or(|b| d < b.distance_km) {
                if let Some(rate) = feasible_rate(&params.gsl, &params.modcod, d) {
                    best = Some(GslLink {
                        sat: id,
                        distance_km: d,
                        data_rate_bps: rate,
                    });
                }
            }
        }
        gsl.push(best.ok_or(TopologyError::InfeasibleGateway { gateway: g })?);
    }
    Ok(gsl)
}

/// Full topology rebuild at time `t`. Deterministic for fixed inputs.
pub fn refresh_topology(
    shell: &OrbitalShell,
    gateways: &[GeoPosition],
    params: &TopologyParams,
    t: f64,
) -> Result<NetworkGraph, TopologyError> {
    let sat_positions: Vec<EcefVector> = shell
        .ids()
        .map(|id| satellite_position(shell, id, t))
        .collect::<Result<_, _>>()?;
    let gateway_positions: Vec<EcefVector> =
        gateways.iter().map(|g| gateway_position(g, t)).collect();
    let isl = build_isl_edges(shell, params, &sat_positions);
    let gsl = attach_gateways(shell, params, &sat_positions, &gateway_positions)?;
    Ok(NetworkGraph {
        snapshot_time: t,
        shell: *shell,
        sat_positions,
        gateway_positions,
        isl,
        gsl,
    })
}
