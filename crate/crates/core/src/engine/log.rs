use nalgebra::DVector;

use super::{Diagnostics, GainReport};
use crate::control::ControllerState;
use crate::topology::ProximityGraph;

#[derive(Debug, Clone, PartialEq)]
pub struct FollowerState {
    pub q: DVector<f64>,
    pub qd: DVector<f64>,
    pub ctrl: ControllerState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub leader_q: DVector<f64>,
    pub leader_qd: DVector<f64>,
    pub followers: Vec<FollowerState>,
    /// FNV-1a hash of the labelled edge set at this tick.
    pub edge_hash: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeEventKind {
    Added,
    Removed,
}

/// An edge appearing or disappearing at a tick boundary. `a < b` are agent
/// labels: 0 is the leader, follower `k` is `k + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeEvent {
    pub t: f64,
    pub a: usize,
    pub b: usize,
    pub kind: EdgeEventKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimLog {
    pub scenario_name: String,
    pub n: usize,
    pub p: usize,
    pub radius: f64,
    pub samples: Vec<Sample>,
    pub events: Vec<EdgeEvent>,
    pub initial_graph: ProximityGraph,
    /// Number of gradient evaluations that hit the saturation limit.
    pub cap_engagements: usize,
    /// Smallest separation between any two agents over every tick.
    pub min_distance: f64,
    pub gain_report: GainReport,
    pub warnings: Vec<String>,
    pub diagnostics: Diagnostics,
}

impl SimLog {
    pub fn final_sample(&self) -> &Sample {
        self.samples.last().expect("a log always holds the initial sample")
    }

    /// Largest `‖q̇_i − q̇₀‖` at the final sample.
    pub fn final_max_velocity_error(&self) -> f64 {
        let s = self.final_sample();
        s.followers
            .iter()
            .map(|f| (&f.qd - &s.leader_qd).norm())
            .fold(0.0, f64::max)
    }

    pub fn count_events(&self, kind: EdgeEventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    /// Edges of the initial graph that were removed at some point.
    pub fn initial_edges_lost(&self) -> usize {
        let g = &self.initial_graph;
        let initial = |a: usize, b: usize| {
            if a == 0 {
                g.leader_adj()[b - 1]
            } else {
                g.has_edge(a - 1, b - 1)
            }
        };
        let mut lost: Vec<(usize, usize)> = self
            .events
            .iter()
            .filter(|e| e.kind == EdgeEventKind::Removed && initial(e.a, e.b))
            .map(|e| (e.a, e.b))
            .collect();
        lost.sort_unstable();
        lost.dedup();
        lost.len()
    }
}

pub(crate) fn edge_hash(g: &ProximityGraph) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    let mut feed = |x: u64| {
        for byte in x.to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(PRIME);
        }
    };
    for (i, &a) in g.leader_adj().iter().enumerate() {
        if a {
            feed(0);
            feed(i as u64 + 1);
        }
    }
    for &(i, j) in g.follower_edges() {
        feed(i as u64 + 1);
        feed(j as u64 + 1);
    }
    h
}

pub(crate) fn min_pairwise(points: &[DVector<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for a in 0..points.len() {
        for b in (a + 1)..points.len() {
            best = best.min((&points[a] - &points[b]).norm());
        }
    }
    best
}
