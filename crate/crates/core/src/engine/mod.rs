//! Closed-loop simulation: plant, controllers, proximity graph and leader,
//! advanced with fixed-step RK4.
//!
//! The proximity graph is rebuilt at the start of every tick and held fixed
//! through the four RK4 stages, so between ticks the closed loop is an
//! ordinary ODE.

mod diagnostics;
mod leader;
mod log;

pub use diagnostics::{diagnostics, Diagnostics};
pub use leader::{LeaderMotion, LeaderState, LeaderTrajectory};
pub use log::{EdgeEvent, EdgeEventKind, FollowerState, Sample, SimLog};

use nalgebra::{DMatrix, DVector};

use crate::control::{self, ControlLaw, ControllerState, Neighbor, NeighborMeasurement, OwnState};
use crate::error::{Error, Result};
use crate::plant::{EulerLagrange, Regressor, Spacecraft};
use crate::potential::{PotentialError, PotentialSpec, Regime};
use crate::topology::{self, ProximityGraph};

/// Concrete plants a scenario can carry.
#[derive(Debug, Clone, PartialEq)]
pub enum PlantModel {
    Spacecraft(Spacecraft),
}

impl Regressor for PlantModel {
    fn dim(&self) -> usize {
        match self {
            PlantModel::Spacecraft(s) => s.dim(),
        }
    }

    fn param_dim(&self) -> usize {
        match self {
            PlantModel::Spacecraft(s) => s.param_dim(),
        }
    }

    fn regressor(
        &self,
        q: &DVector<f64>,
        qd: &DVector<f64>,
        x: &DVector<f64>,
        y: &DVector<f64>,
    ) -> Result<DMatrix<f64>> {
        match self {
            PlantModel::Spacecraft(s) => s.regressor(q, qd, x, y),
        }
    }
}

impl EulerLagrange for PlantModel {
    fn true_params(&self) -> DVector<f64> {
        match self {
            PlantModel::Spacecraft(s) => s.true_params(),
        }
    }

    fn mass_matrix(&self, q: &DVector<f64>) -> DMatrix<f64> {
        match self {
            PlantModel::Spacecraft(s) => s.mass_matrix(q),
        }
    }

    fn coriolis(&self, q: &DVector<f64>, qd: &DVector<f64>) -> DMatrix<f64> {
        match self {
            PlantModel::Spacecraft(s) => s.coriolis(q, qd),
        }
    }

    fn gravity(&self, q: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            PlantModel::Spacecraft(s) => s.gravity(q),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FollowerSpec {
    pub plant: PlantModel,
    pub q0: DVector<f64>,
    pub qd0: DVector<f64>,
    /// Initial estimate of the leader velocity.
    pub v0: DVector<f64>,
    pub theta_hat0: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    pub law: ControlLaw,
    /// Γ_i = adaptation_gain · I
    pub adaptation_gain: f64,
    pub alpha0: f64,
    pub beta0: f64,
    /// Reference gains used only by the V₃ diagnostic. Defaults derive from σ_l and λ_min[H(0)].
    pub alpha_bar: Option<f64>,
    pub beta_bar: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integration {
    pub dt: f64,
    pub t_end: f64,
    /// Saturation applied to every potential-gradient norm before it reaches a controller, N.
    pub gradient_cap: f64,
}

impl Integration {
    pub fn steps(&self) -> Result<u64> {
        let ratio = self.t_end / self.dt;
        let steps = ratio.round();
        if (steps - ratio).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::validation(
                "integration.t_end",
                format!("t_end = {} s is not a whole number of steps of {} s", self.t_end, self.dt),
            ));
        }
        Ok(steps as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub followers: Vec<FollowerSpec>,
    pub leader: LeaderTrajectory,
    pub potential: PotentialSpec,
    pub controller: ControllerConfig,
    pub integration: Integration,
    /// Log every `decimation` ticks; the final tick is always logged.
    pub decimation: usize,
}

/// Sufficient-gain check evaluated on the initial graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GainReport {
    pub sigma_l: f64,
    pub lambda_min_h0: f64,
    pub leader_reaches_all: bool,
    /// `max{σ_l, σ_l / √λ_min[H(0)]}`
    pub alpha_threshold: f64,
    /// Common gain of the varying-velocity law, when that law is selected.
    pub alpha: Option<f64>,
}

impl GainReport {
    /// `None` for laws without a fixed common gain.
    pub fn satisfied(&self) -> Option<bool> {
        self.alpha.map(|a| a > self.alpha_threshold)
    }
}

impl Scenario {
    pub fn n(&self) -> usize {
        self.followers.len()
    }

    pub fn dim(&self) -> usize {
        self.leader.dim()
    }

    pub fn radius(&self) -> f64 {
        self.potential.radius()
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.dim();
        let Integration { dt, t_end, gradient_cap } = self.integration;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::validation("integration.dt", format!("must be positive, got {dt}")));
        }
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(Error::validation("integration.t_end", format!("must be nonnegative, got {t_end}")));
        }
        if t_end > 0.0 && t_end < dt {
            return Err(Error::validation("integration.t_end", "must be at least one step"));
        }
        self.integration.steps()?;
        if !(gradient_cap > 0.0) {
            return Err(Error::validation("integration.gradient_cap", "must be positive"));
        }
        if self.decimation == 0 {
            return Err(Error::validation("output.decimation", "must be at least 1"));
        }
        if self.followers.is_empty() {
            return Err(Error::validation("plant.masses", "at least one follower is required"));
        }
        if (self.leader.horizon() - t_end).abs() > 1e-12 * t_end.max(1.0) {
            return Err(Error::Config("leader horizon differs from integration.t_end".into()));
        }
        for (k, f) in self.followers.iter().enumerate() {
            if f.plant.dim() != p || f.q0.len() != p || f.qd0.len() != p || f.v0.len() != p {
                return Err(Error::Config(format!("follower {} has inconsistent dimension", k + 1)));
            }
            if f.theta_hat0.len() != f.plant.param_dim() {
                return Err(Error::Config(format!("follower {} parameter estimate has wrong length", k + 1)));
            }
        }
        let positions = self.initial_positions();
        for a in 0..positions.len() {
            for b in (a + 1)..positions.len() {
                if (&positions[a] - &positions[b]).norm() == 0.0 {
                    return Err(Error::validation(
                        "plant.initial_positions",
                        format!("agents {a} and {b} start at the same point"),
                    ));
                }
            }
        }
        if !(self.controller.adaptation_gain > 0.0) {
            return Err(Error::validation("controller.adaptation_gain", "must be positive"));
        }
        if self.controller.alpha0 < 0.0 || self.controller.beta0 < 0.0 {
            return Err(Error::validation("controller.alpha0", "initial gains must be nonnegative"));
        }
        match self.controller.law {
            ControlLaw::ConstantVelocity { gamma } if !(gamma > 0.0) => {
                return Err(Error::validation("controller.gamma", "must be positive"))
            }
            ControlLaw::VaryingVelocity { alpha, .. } if !(alpha > 0.0) => {
                return Err(Error::validation("controller.alpha", "must be positive"))
            }
            ControlLaw::FullyDistributed { gamma1, gamma2, .. } if !(gamma1 > 0.0 && gamma2 > 0.0) => {
                return Err(Error::validation("controller.gamma1", "adaptation rates must be positive"))
            }
            _ => {}
        }
        Ok(())
    }

    /// Leader first, then followers in order.
    pub fn initial_positions(&self) -> Vec<DVector<f64>> {
        std::iter::once(self.leader.initial_position.clone())
            .chain(self.followers.iter().map(|f| f.q0.clone()))
            .collect()
    }

    pub fn initial_graph(&self) -> Result<ProximityGraph> {
        let q: Vec<_> = self.followers.iter().map(|f| f.q0.clone()).collect();
        topology::build_graph(&self.leader.initial_position, &q, self.radius())
    }

    pub fn gain_report(&self) -> Result<GainReport> {
        let g = self.initial_graph()?;
        let lambda = topology::min_eig_sym(&topology::matrices(&g).h)?;
        let sigma_l = self.leader.sigma_l(self.n());
        let alpha_threshold = if lambda > 0.0 {
            sigma_l.max(sigma_l / lambda.sqrt())
        } else {
            f64::INFINITY
        };
        let alpha = match self.controller.law {
            ControlLaw::VaryingVelocity { alpha, .. } => Some(alpha),
            _ => None,
        };
        Ok(GainReport {
            sigma_l,
            lambda_min_h0: lambda,
            leader_reaches_all: topology::leader_reaches_all(&g),
            alpha_threshold,
            alpha,
        })
    }

    /// `(ᾱ, β̄)` for the V₃ diagnostic.
    pub fn reference_gains(&self) -> Result<(f64, f64)> {
        let report = self.gain_report()?;
        let alpha_bar = self.controller.alpha_bar.unwrap_or(if report.lambda_min_h0 > 0.0 {
            1.5 * report.sigma_l / report.lambda_min_h0.sqrt()
        } else {
            0.0
        });
        let beta_bar = self.controller.beta_bar.unwrap_or(1.5 * report.sigma_l);
        Ok((alpha_bar, beta_bar))
    }
}

/// Pair regimes frozen from the initial configuration. Agent labels: 0 is
/// the leader, follower `k` is `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRegimes {
    size: usize,
    regimes: Vec<Regime>,
}

impl PairRegimes {
    pub fn from_positions(positions: &[DVector<f64>], radius: f64) -> Self {
        let size = positions.len();
        let mut regimes = vec![Regime::Unconnected; size * size];
        for a in 0..size {
            for b in 0..size {
                if a != b && (&positions[a] - &positions[b]).norm() < radius {
                    regimes[a * size + b] = Regime::Connected;
                }
            }
        }
        Self { size, regimes }
    }

    pub fn get(&self, a: usize, b: usize) -> Regime {
        self.regimes[a * self.size + b]
    }

    pub fn connected_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.size)
            .flat_map(move |a| ((a + 1)..self.size).map(move |b| (a, b)))
            .filter(move |&(a, b)| self.get(a, b) == Regime::Connected)
    }
}

/// Offsets of one follower's block inside the flat state vector.
#[derive(Debug, Clone, Copy)]
struct Block {
    start: usize,
    p: usize,
    p_theta: usize,
    slots: usize,
}

impl Block {
    fn q(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.p
    }
    fn qd(&self) -> std::ops::Range<usize> {
        self.start + self.p..self.start + 2 * self.p
    }
    fn v(&self) -> std::ops::Range<usize> {
        self.start + 2 * self.p..self.start + 3 * self.p
    }
    fn theta(&self) -> std::ops::Range<usize> {
        let s = self.start + 3 * self.p;
        s..s + self.p_theta
    }
    fn alpha(&self) -> std::ops::Range<usize> {
        let s = self.start + 3 * self.p + self.p_theta;
        s..s + self.slots
    }
    fn beta(&self) -> usize {
        self.start + 3 * self.p + self.p_theta + self.slots
    }
    fn len(&self) -> usize {
        3 * self.p + self.p_theta + self.slots + 1
    }
}

fn seg(x: &DVector<f64>, r: std::ops::Range<usize>) -> DVector<f64> {
    DVector::from_column_slice(&x.as_slice()[r])
}

/// Stepwise simulator for one scenario.
pub struct Simulator<'a> {
    scenario: &'a Scenario,
    regimes: PairRegimes,
    blocks: Vec<Block>,
    adaptation: Vec<DMatrix<f64>>,
    state: DVector<f64>,
    step_index: u64,
    graph: ProximityGraph,
    cap_engagements: usize,
}

impl<'a> Simulator<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self> {
        scenario.validate()?;
        let n = scenario.n();
        let p = scenario.dim();
        let mut blocks = Vec::with_capacity(n);
        let mut start = 0;
        for f in &scenario.followers {
            let b = Block {
                start,
                p,
                p_theta: f.plant.param_dim(),
                slots: n + 1,
            };
            start += b.len();
            blocks.push(b);
        }
        let mut state = DVector::zeros(start);
        for (f, b) in scenario.followers.iter().zip(&blocks) {
            state.rows_mut(b.q().start, p).copy_from(&f.q0);
            state.rows_mut(b.qd().start, p).copy_from(&f.qd0);
            state.rows_mut(b.v().start, p).copy_from(&f.v0);
            state.rows_mut(b.theta().start, b.p_theta).copy_from(&f.theta_hat0);
            for k in b.alpha() {
                state[k] = scenario.controller.alpha0;
            }
            state[b.beta()] = scenario.controller.beta0;
        }
        let adaptation = blocks
            .iter()
            .map(|b| DMatrix::identity(b.p_theta, b.p_theta) * scenario.controller.adaptation_gain)
            .collect();
        let regimes = PairRegimes::from_positions(&scenario.initial_positions(), scenario.radius());
        Ok(Self {
            scenario,
            regimes,
            blocks,
            adaptation,
            graph: scenario.initial_graph()?,
            state,
            step_index: 0,
            cap_engagements: 0,
        })
    }

    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.scenario.integration.dt
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn graph(&self) -> &ProximityGraph {
        &self.graph
    }

    pub fn regimes(&self) -> &PairRegimes {
        &self.regimes
    }

    pub fn cap_engagements(&self) -> usize {
        self.cap_engagements
    }

    pub fn raw_state(&self) -> &DVector<f64> {
        &self.state
    }

    pub fn followers(&self) -> Vec<FollowerState> {
        self.unpack(&self.state)
    }

    pub fn positions(&self) -> Vec<DVector<f64>> {
        self.blocks.iter().map(|b| seg(&self.state, b.q())).collect()
    }

    fn unpack(&self, x: &DVector<f64>) -> Vec<FollowerState> {
        self.blocks
            .iter()
            .map(|b| FollowerState {
                q: seg(x, b.q()),
                qd: seg(x, b.qd()),
                ctrl: ControllerState {
                    v: seg(x, b.v()),
                    theta_hat: seg(x, b.theta()),
                    alpha: x.as_slice()[b.alpha()].to_vec(),
                    beta: x[b.beta()],
                },
            })
            .collect()
    }

    fn capped_gradient(&self, a: usize, b: usize, qa: &DVector<f64>, qb: &DVector<f64>, caps: &mut usize) -> Result<DVector<f64>> {
        let g = self
            .scenario
            .potential
            .gradient(qa, qb, self.regimes.get(a, b))
            .map_err(|e| match e {
                PotentialError::Collision => Error::Collision(a.min(b), a.max(b)),
                PotentialError::Barrier(distance) => Error::BarrierViolation {
                    a: a.min(b),
                    b: a.max(b),
                    distance,
                },
            })?;
        let cap = self.scenario.integration.gradient_cap;
        let norm = g.norm();
        if norm > cap {
            *caps += 1;
            Ok(g * (cap / norm))
        } else {
            Ok(g)
        }
    }

    /// Closed-loop rates at time `t` with the tick's frozen graph.
    fn rates(&self, t: f64, x: &DVector<f64>, caps: &mut usize) -> Result<DVector<f64>> {
        let leader = self.scenario.leader.state(t)?;
        let followers = self.unpack(x);
        let law = self.scenario.controller.law;
        let mut dx = DVector::zeros(x.len());
        for (i, (fs, b)) in followers.iter().zip(&self.blocks).enumerate() {
            let mut meas = Vec::new();
            if self.graph.leader_adj()[i] {
                meas.push(NeighborMeasurement {
                    neighbor: Neighbor::Leader,
                    rel_pos: &fs.q - &leader.q,
                    rel_vel: &fs.qd - &leader.qd,
                    potential_gradient: self.capped_gradient(i + 1, 0, &fs.q, &leader.q, caps)?,
                });
            }
            for j in self.graph.follower_neighbors(i) {
                let other = &followers[j];
                meas.push(NeighborMeasurement {
                    neighbor: Neighbor::Follower(j),
                    rel_pos: &fs.q - &other.q,
                    rel_vel: &fs.qd - &other.qd,
                    potential_gradient: self.capped_gradient(i + 1, j + 1, &fs.q, &other.q, caps)?,
                });
            }
            let own = OwnState {
                q: fs.q.clone(),
                qd: fs.qd.clone(),
            };
            let leader_error = law.needs_leader_velocity().then(|| &fs.qd - &leader.qd);
            let plant = &self.scenario.followers[i].plant;
            let out = control::compute(&law, &own, &fs.ctrl, &meas, &self.adaptation[i], plant, leader_error.as_ref())?;
            let qdd = plant.accel(&fs.q, &fs.qd, &out.u)?;
            dx.rows_mut(b.q().start, b.p).copy_from(&fs.qd);
            dx.rows_mut(b.qd().start, b.p).copy_from(&qdd);
            dx.rows_mut(b.v().start, b.p).copy_from(&out.v_dot);
            dx.rows_mut(b.theta().start, b.p_theta).copy_from(&out.theta_hat_dot);
            for (k, r) in b.alpha().zip(&out.alpha_dot) {
                dx[k] = *r;
            }
            dx[b.beta()] = out.beta_dot;
        }
        Ok(dx)
    }

    /// Advances one tick and returns the graph events it produced.
    pub fn step(&mut self) -> Result<Vec<EdgeEvent>> {
        let h = self.scenario.integration.dt;
        let t = self.time();
        let x = &self.state;
        let mut caps = 0;
        let k1 = self.rates(t, x, &mut caps)?;
        let k2 = self.rates(t + 0.5 * h, &(x + &k1 * (0.5 * h)), &mut caps)?;
        let k3 = self.rates(t + 0.5 * h, &(x + &k2 * (0.5 * h)), &mut caps)?;
        let k4 = self.rates(t + h, &(x + &k3 * h), &mut caps)?;
        let next = x + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
        self.cap_engagements += caps;
        self.step_index += 1;
        let t_next = self.time();
        if let Some(k) = next.iter().position(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                t: t_next,
                what: format!("state component {k} is {}", next[k]),
            });
        }
        self.state = next;
        self.check_safety(t_next)?;

        let q: Vec<_> = self.positions();
        let leader = self.scenario.leader.state(t_next)?;
        let graph = topology::build_graph(&leader.q, &q, self.scenario.radius())?;
        let events = edge_events(&self.graph, &graph, t_next);
        self.graph = graph;
        Ok(events)
    }

    fn check_safety(&self, t: f64) -> Result<()> {
        let leader = self.scenario.leader.state(t)?;
        let all: Vec<_> = std::iter::once(leader.q).chain(self.positions()).collect();
        let radius = self.scenario.radius();
        for a in 0..all.len() {
            for b in (a + 1)..all.len() {
                let d = (&all[a] - &all[b]).norm();
                if d == 0.0 {
                    return Err(Error::Collision(a, b));
                }
                if d >= radius && self.regimes.get(a, b) == Regime::Connected {
                    return Err(Error::BarrierViolation { a, b, distance: d });
                }
            }
        }
        Ok(())
    }

    pub fn sample(&self) -> Result<Sample> {
        let t = self.time();
        let leader = self.scenario.leader.state(t)?;
        Ok(Sample {
            t,
            leader_q: leader.q,
            leader_qd: leader.qd,
            followers: self.followers(),
            edge_hash: log::edge_hash(&self.graph),
        })
    }
}

/// Edge differences between consecutive graphs, labelled with agent labels.
fn edge_events(old: &ProximityGraph, new: &ProximityGraph, t: f64) -> Vec<EdgeEvent> {
    let labelled = |g: &ProximityGraph| -> Vec<(usize, usize)> {
        let mut e: Vec<_> = g
            .leader_adj()
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| (0, i + 1))
            .chain(g.follower_edges().iter().map(|&(i, j)| (i + 1, j + 1)))
            .collect();
        e.sort_unstable();
        e
    };
    let (before, after) = (labelled(old), labelled(new));
    let mut events = Vec::new();
    for &(a, b) in &after {
        if before.binary_search(&(a, b)).is_err() {
            events.push(EdgeEvent { t, a, b, kind: EdgeEventKind::Added });
        }
    }
    for &(a, b) in &before {
        if after.binary_search(&(a, b)).is_err() {
            events.push(EdgeEvent { t, a, b, kind: EdgeEventKind::Removed });
        }
    }
    events
}

/// Runs a scenario to its horizon and computes diagnostics.
pub fn run(scenario: &Scenario) -> Result<SimLog> {
    let mut sim = Simulator::new(scenario)?;
    let steps = scenario.integration.steps()?;
    let gain_report = scenario.gain_report()?;
    let mut warnings = Vec::new();
    if !gain_report.leader_reaches_all {
        warnings.push("leader does not reach every follower in the initial graph".to_string());
    }
    if gain_report.satisfied() == Some(false) {
        warnings.push(format!(
            "alpha = {} does not exceed max(sigma_l, sigma_l/sqrt(lambda_min H0)) = {:.6}",
            gain_report.alpha.unwrap_or_default(),
            gain_report.alpha_threshold
        ));
    }
    let initial_graph = sim.graph().clone();
    let mut samples = vec![sim.sample()?];
    let mut events = Vec::new();
    let mut min_distance = min_pair_distance(&sim, 0.0)?;
    for k in 1..=steps {
        events.extend(sim.step()?);
        min_distance = min_distance.min(min_pair_distance(&sim, sim.time())?);
        if k % scenario.decimation as u64 == 0 || k == steps {
            samples.push(sim.sample()?);
        }
    }
    let mut log = SimLog {
        scenario_name: scenario.name.clone(),
        n: scenario.n(),
        p: scenario.dim(),
        radius: scenario.radius(),
        samples,
        events,
        initial_graph,
        cap_engagements: sim.cap_engagements(),
        min_distance,
        gain_report,
        warnings,
        diagnostics: Diagnostics::default(),
    };
    log.diagnostics = diagnostics(&log, scenario)?;
    Ok(log)
}

fn min_pair_distance(sim: &Simulator<'_>, t: f64) -> Result<f64> {
    let leader = sim.scenario.leader.state(t)?;
    let all: Vec<_> = std::iter::once(leader.q).chain(sim.positions()).collect();
    Ok(log::min_pairwise(&all))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::SignMode;
    use crate::plant::{SpacecraftParams, EARTH_MU};
    use nalgebra::dvector;

    fn follower(mass: f64, q0: DVector<f64>, qd0: DVector<f64>, theta: f64) -> FollowerSpec {
        FollowerSpec {
            plant: PlantModel::Spacecraft(Spacecraft::new(SpacecraftParams::new(mass, 7.0e6, EARTH_MU).unwrap())),
            q0,
            qd0,
            v0: DVector::zeros(3),
            theta_hat0: dvector![theta],
        }
    }

    fn scenario(followers: Vec<FollowerSpec>, law: ControlLaw, dt: f64, t_end: f64) -> Scenario {
        Scenario {
            name: "test".into(),
            followers,
            leader: LeaderTrajectory::new(
                dvector![0.0, 0.0, 0.0],
                LeaderMotion::ConstantVelocity {
                    velocity: dvector![0.1, 0.1, 0.2],
                },
                t_end,
            )
            .unwrap(),
            potential: PotentialSpec::new(200.0, 80.0).unwrap(),
            controller: ControllerConfig {
                law,
                adaptation_gain: 5.0,
                alpha0: 0.0,
                beta0: 0.0,
                alpha_bar: None,
                beta_bar: None,
            },
            integration: Integration {
                dt,
                t_end,
                gradient_cap: 1e3,
            },
            decimation: 1,
        }
    }

    #[test]
    fn matched_follower_stays_matched() {
        // One follower at the preferred distance, moving with the leader, θ̂ = θ.
        let qd0 = dvector![0.1, 0.1, 0.2];
        let mut f = follower(35.0, dvector![80.0, 0.0, 0.0], qd0.clone(), 35.0);
        f.v0 = qd0.clone();
        let sc = scenario(vec![f], ControlLaw::ConstantVelocity { gamma: 0.04 }, 0.01, 1.0);
        let mut sim = Simulator::new(&sc).unwrap();
        for _ in 0..100 {
            sim.step().unwrap();
        }
        let fs = &sim.followers()[0];
        assert!((&fs.qd - &qd0).norm() < 1e-12, "{}", fs.qd);
        assert!((&fs.ctrl.v - &qd0).norm() < 1e-12);
    }

    #[test]
    fn zero_rates_leave_state_unchanged() {
        let mut st = DVector::from_vec(vec![1.5, -2.25, 3.0]);
        let zero = DVector::zeros(3);
        let before = st.clone();
        let h = 0.01;
        st = &st + (&zero + (&zero + &zero) * 2.0 + &zero) * (h / 6.0);
        assert_eq!(st, before);
    }

    #[test]
    fn tanh_mode_with_zero_horizon() {
        let f = follower(40.0, dvector![100.0, 0.0, 0.0], dvector![0.0, 0.0, 0.0], 0.0);
        let law = ControlLaw::VaryingVelocity {
            alpha: 0.04,
            sign: SignMode::Tanh { slope: 1000.0 },
        };
        let sc = scenario(vec![f], law, 0.01, 0.0);
        let log = run(&sc).unwrap();
        assert_eq!(log.samples.len(), 1);
    }

    #[test]
    fn non_neighbors_do_not_affect_control() {
        // Follower 0 sees follower 1 only; follower 2 is far away. Moving
        // follower 2 elsewhere (still out of range) must not change follower 0's rates.
        let base = |q2: DVector<f64>| {
            vec![
                follower(35.0, dvector![100.0, 0.0, 0.0], dvector![0.0, 0.0, 0.0], 0.0),
                follower(40.0, dvector![150.0, 50.0, 0.0], dvector![0.02, 0.0, 0.0], 0.0),
                follower(45.0, q2, dvector![0.3, -0.1, 0.0], 0.0),
            ]
        };
        let law = ControlLaw::ConstantVelocity { gamma: 0.04 };
        let a = scenario(base(dvector![900.0, 0.0, 0.0]), law, 0.01, 1.0);
        let b = scenario(base(dvector![-700.0, 400.0, 10.0]), law, 0.01, 1.0);
        let (sa, sb) = (Simulator::new(&a).unwrap(), Simulator::new(&b).unwrap());
        let mut caps = 0;
        let ra = sa.rates(0.0, &sa.state, &mut caps).unwrap();
        let rb = sb.rates(0.0, &sb.state, &mut caps).unwrap();
        let blk = sa.blocks[0];
        assert_eq!(ra.rows(blk.start, blk.len()), rb.rows(blk.start, blk.len()));
    }

    #[test]
    fn barrier_violation_aborts() {
        // Connected pair flying apart fast enough to reach the radius.
        let f = follower(35.0, dvector![190.0, 0.0, 0.0], dvector![50.0, 0.0, 0.0], 0.0);
        let sc = scenario(vec![f], ControlLaw::ConstantVelocity { gamma: 0.04 }, 0.1, 10.0);
        assert!(matches!(run(&sc), Err(Error::BarrierViolation { a: 0, b: 1, .. })));
    }

    #[test]
    fn validation_catches_bad_step() {
        let f = follower(35.0, dvector![100.0, 0.0, 0.0], dvector![0.0, 0.0, 0.0], 0.0);
        let mut sc = scenario(vec![f], ControlLaw::ConstantVelocity { gamma: 0.04 }, 0.01, 1.0);
        sc.integration.dt = 0.0;
        match sc.validate() {
            Err(Error::Validation { key, .. }) => assert_eq!(key, "integration.dt"),
            other => panic!("{other:?}"),
        }
    }
}
