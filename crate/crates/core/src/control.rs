//! Distributed follower controllers.
//!
//! Each law sees only the follower's own absolute state, its own controller
//! state, and a list of [`NeighborMeasurement`]s for agents currently in
//! sensing range. There is no other input path to neighbor or global data,
//! with one exception: [`GainLaw::LeaderVelocity`] reproduces a gain rule that
//! needs the leader velocity at every follower, and it must be handed in
//! explicitly.
//!
//! Every law shares the same adaptive outer loop:
//!
//! ```text
//! u  = û + Y(q, q̇, v̇, v) θ̂
//! θ̂' = -Γ Yᵀ s,          s = q̇ - v
//! ```
//!
//! and differs in how `û` and the estimator rate `v̇` are formed.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::plant::Regressor;

/// Identifies a neighbor of some follower.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Neighbor {
    Leader,
    /// Zero-based follower index.
    Follower(usize),
}

impl Neighbor {
    /// Position of this neighbor's gain in [`ControllerState::alpha`].
    pub fn slot(self) -> usize {
        match self {
            Neighbor::Leader => 0,
            Neighbor::Follower(k) => k + 1,
        }
    }

    pub fn is_leader(self) -> bool {
        self == Neighbor::Leader
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborMeasurement {
    pub neighbor: Neighbor,
    /// `q_i - q_j`
    pub rel_pos: DVector<f64>,
    /// `q̇_i - q̇_j`
    pub rel_vel: DVector<f64>,
    /// `∂V_ij/∂q_i`, already passed through any engine-side saturation.
    pub potential_gradient: DVector<f64>,
}

impl NeighborMeasurement {
    pub fn is_leader(&self) -> bool {
        self.neighbor.is_leader()
    }
}

/// The follower's own absolute position and velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct OwnState {
    pub q: DVector<f64>,
    pub qd: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    /// Estimate of the leader velocity.
    pub v: DVector<f64>,
    pub theta_hat: DVector<f64>,
    /// Edge gains `α_ij`, indexed by [`Neighbor::slot`]. The follower's own slot is unused.
    pub alpha: Vec<f64>,
    pub beta: f64,
}

impl ControllerState {
    /// All-zero state for a follower in a group of `n`.
    pub fn zeros(p: usize, p_theta: usize, n: usize) -> Self {
        Self {
            v: DVector::zeros(p),
            theta_hat: DVector::zeros(p_theta),
            alpha: vec![0.0; n + 1],
            beta: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlOutput {
    pub u: DVector<f64>,
    pub u_hat: DVector<f64>,
    pub v_dot: DVector<f64>,
    pub theta_hat_dot: DVector<f64>,
    /// Same indexing as [`ControllerState::alpha`].
    pub alpha_dot: Vec<f64>,
    pub beta_dot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignMode {
    Exact,
    /// `tanh(slope · x)`
    Tanh { slope: f64 },
}

/// Edge-gain adaptation driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GainLaw {
    /// `α̇_ij = γ₁ a_ij ‖q̇_i − q̇_j‖₁`, using only the relative velocity to that neighbor.
    #[default]
    PerEdge,
    /// `α̇_ij = γ₁ a_ij ‖q̇_i − q̇_0‖₁` for every edge; needs the leader velocity everywhere.
    LeaderVelocity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlLaw {
    /// Continuous law for a leader with constant velocity.
    ConstantVelocity { gamma: f64 },
    /// Discontinuous law with a common gain for a leader with bounded acceleration.
    VaryingVelocity { alpha: f64, sign: SignMode },
    /// Discontinuous law whose gains adapt online.
    FullyDistributed {
        gamma1: f64,
        gamma2: f64,
        sign: SignMode,
        gain_law: GainLaw,
    },
}

impl ControlLaw {
    pub fn name(&self) -> &'static str {
        match self {
            ControlLaw::ConstantVelocity { .. } => "constant_velocity",
            ControlLaw::VaryingVelocity { .. } => "varying_velocity",
            ControlLaw::FullyDistributed { .. } => "fully_distributed",
        }
    }

    pub fn needs_leader_velocity(&self) -> bool {
        matches!(
            self,
            ControlLaw::FullyDistributed {
                gain_law: GainLaw::LeaderVelocity,
                ..
            }
        )
    }
}

pub fn sgn_smooth(x: &DVector<f64>, mode: SignMode) -> DVector<f64> {
    match mode {
        SignMode::Exact => x.map(|c| {
            if c > 0.0 {
                1.0
            } else if c < 0.0 {
                -1.0
            } else {
                0.0
            }
        }),
        SignMode::Tanh { slope } => x.map(|c| (slope * c).tanh()),
    }
}

/// `s_i = q̇_i − v_i`
pub fn sliding_variable(qd: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    qd - v
}

/// Leader-relative errors `(q̃_i, ṽ_i) = (q_i − q_0, v_i − q̇_0)`.
pub fn leader_errors(
    q: &DVector<f64>,
    v: &DVector<f64>,
    q0: &DVector<f64>,
    qd0: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    (q - q0, v - qd0)
}

fn gradient_sum(p: usize, measurements: &[NeighborMeasurement]) -> DVector<f64> {
    measurements
        .iter()
        .fold(DVector::zeros(p), |acc, m| acc + &m.potential_gradient)
}

fn adaptive_part(
    own: &OwnState,
    state: &ControllerState,
    u_hat: DVector<f64>,
    v_dot: DVector<f64>,
    adaptation_gain: &DMatrix<f64>,
    plant: &dyn Regressor,
    n_slots: usize,
) -> Result<ControlOutput> {
    let y = plant.regressor(&own.q, &own.qd, &v_dot, &state.v)?;
    let s = sliding_variable(&own.qd, &state.v);
    let u = &u_hat + &y * &state.theta_hat;
    let theta_hat_dot = -(adaptation_gain * (y.transpose() * s));
    Ok(ControlOutput {
        u,
        u_hat,
        v_dot,
        theta_hat_dot,
        alpha_dot: vec![0.0; n_slots],
        beta_dot: 0.0,
    })
}

fn check_dims(own: &OwnState, state: &ControllerState, measurements: &[NeighborMeasurement]) -> Result<usize> {
    let p = own.q.len();
    let ok = own.qd.len() == p
        && state.v.len() == p
        && measurements
            .iter()
            .all(|m| m.rel_pos.len() == p && m.rel_vel.len() == p && m.potential_gradient.len() == p);
    if ok {
        Ok(p)
    } else {
        Err(Error::Config("inconsistent vector dimensions in controller inputs".into()))
    }
}

/// Continuous adaptive law for a constant-velocity leader.
pub fn control_const_vel(
    own: &OwnState,
    state: &ControllerState,
    measurements: &[NeighborMeasurement],
    gamma: f64,
    adaptation_gain: &DMatrix<f64>,
    plant: &dyn Regressor,
) -> Result<ControlOutput> {
    let p = check_dims(own, state, measurements)?;
    let damping = measurements
        .iter()
        .fold(DVector::zeros(p), |acc, m| acc + &m.rel_vel);
    let u_hat = -gradient_sum(p, measurements) - damping * gamma;
    let v_dot = u_hat.clone();
    adaptive_part(own, state, u_hat, v_dot, adaptation_gain, plant, state.alpha.len())
}

/// Signum-consensus law with a common gain `alpha`.
pub fn control_varying(
    own: &OwnState,
    state: &ControllerState,
    measurements: &[NeighborMeasurement],
    alpha: f64,
    adaptation_gain: &DMatrix<f64>,
    plant: &dyn Regressor,
    sign: SignMode,
) -> Result<ControlOutput> {
    let p = check_dims(own, state, measurements)?;
    let consensus = measurements
        .iter()
        .fold(DVector::zeros(p), |acc, m| acc + sgn_smooth(&m.rel_vel, sign));
    let v_dot = -gradient_sum(p, measurements) - consensus * alpha;
    let s = sliding_variable(&own.qd, &state.v);
    let u_hat = &v_dot - sgn_smooth(&s, sign) * alpha;
    adaptive_part(own, state, u_hat, v_dot, adaptation_gain, plant, state.alpha.len())
}

/// Fully distributed law: per-edge gains `α_ij` and a sliding gain `β_i`
/// adapted from local velocity mismatch.
#[allow(clippy::too_many_arguments)]
pub fn control_adaptive(
    own: &OwnState,
    state: &ControllerState,
    measurements: &[NeighborMeasurement],
    gamma1: f64,
    gamma2: f64,
    adaptation_gain: &DMatrix<f64>,
    plant: &dyn Regressor,
    sign: SignMode,
    gain_law: GainLaw,
    leader_velocity_error: Option<&DVector<f64>>,
) -> Result<ControlOutput> {
    let p = check_dims(own, state, measurements)?;
    let mut consensus = DVector::zeros(p);
    let mut alpha_dot = vec![0.0; state.alpha.len()];
    let leader_error_l1 = match gain_law {
        GainLaw::PerEdge => None,
        GainLaw::LeaderVelocity => Some(
            leader_velocity_error
                .ok_or_else(|| Error::Config("leader-velocity gain law needs q̇_i − q̇_0".into()))?
                .lp_norm(1),
        ),
    };
    for m in measurements {
        let slot = m.neighbor.slot();
        let gain = *state
            .alpha
            .get(slot)
            .ok_or_else(|| Error::Config(format!("no gain slot for neighbor {:?}", m.neighbor)))?;
        consensus += sgn_smooth(&m.rel_vel, sign) * gain;
        alpha_dot[slot] = gamma1 * leader_error_l1.unwrap_or_else(|| m.rel_vel.lp_norm(1));
    }
    let s = sliding_variable(&own.qd, &state.v);
    let v_dot = -gradient_sum(p, measurements) - consensus;
    let u_hat = &v_dot - sgn_smooth(&s, sign) * state.beta;
    let mut out = adaptive_part(own, state, u_hat, v_dot, adaptation_gain, plant, state.alpha.len())?;
    out.alpha_dot = alpha_dot;
    out.beta_dot = gamma2 * s.lp_norm(1);
    Ok(out)
}

/// Dispatches to the law selected by `law`.
pub fn compute(
    law: &ControlLaw,
    own: &OwnState,
    state: &ControllerState,
    measurements: &[NeighborMeasurement],
    adaptation_gain: &DMatrix<f64>,
    plant: &dyn Regressor,
    leader_velocity_error: Option<&DVector<f64>>,
) -> Result<ControlOutput> {
    match *law {
        ControlLaw::ConstantVelocity { gamma } => {
            control_const_vel(own, state, measurements, gamma, adaptation_gain, plant)
        }
        ControlLaw::VaryingVelocity { alpha, sign } => {
            control_varying(own, state, measurements, alpha, adaptation_gain, plant, sign)
        }
        ControlLaw::FullyDistributed {
            gamma1,
            gamma2,
            sign,
            gain_law,
        } => control_adaptive(
            own,
            state,
            measurements,
            gamma1,
            gamma2,
            adaptation_gain,
            plant,
            sign,
            gain_law,
            leader_velocity_error,
        ),
    }
}
