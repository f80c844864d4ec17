use nalgebra::DVector;

use super::{PairRegimes, Scenario, SimLog};
use crate::control::{leader_errors, sliding_variable, ControlLaw};
use crate::error::{Error, Result};
use crate::plant::EulerLagrange;
use crate::potential::PotentialError;
use crate::topology;

/// Lyapunov and flocking diagnostics at each logged sample.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub t: Vec<f64>,
    /// `½ Σ sᵀ M s + ½ Σ θ̃ᵀ Γ⁻¹ θ̃`
    pub v1: Vec<f64>,
    /// `½ Σ ṽᵀ ṽ`
    pub v_est: Vec<f64>,
    /// `Σ_{i<j} V_ij + Σ_i V_i0`
    pub v2: Vec<f64>,
    /// Gain-error energy; zero unless the fully distributed law is in use.
    pub v3: Vec<f64>,
    pub total: Vec<f64>,
    /// `‖q̇_i − q̇₀‖` per sample, per follower.
    pub velocity_errors: Vec<Vec<f64>>,
    pub min_distance: Vec<f64>,
    /// Largest separation among initially connected pairs.
    pub max_connected_distance: Vec<f64>,
    pub lambda_min_h: Vec<f64>,
    pub edge_count: Vec<usize>,
    pub edges_added: usize,
    pub edges_removed: usize,
    pub initial_edges_lost: usize,
    pub alpha_bar: f64,
    pub beta_bar: f64,
}

impl Diagnostics {
    /// Largest one-sample increase of the composite function.
    pub fn max_total_increase(&self) -> f64 {
        self.total
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn diagnostics(log: &SimLog, scenario: &Scenario) -> Result<Diagnostics> {
    let regimes = PairRegimes::from_positions(&scenario.initial_positions(), scenario.radius());
    let spec = &scenario.potential;
    let (alpha_bar, beta_bar) = scenario.reference_gains()?;
    let gain_rates = match scenario.controller.law {
        ControlLaw::FullyDistributed { gamma1, gamma2, .. } => Some((gamma1, gamma2)),
        _ => None,
    };
    let inv_gain = 1.0 / scenario.controller.adaptation_gain;
    let mut d = Diagnostics {
        edges_added: log.count_events(super::EdgeEventKind::Added),
        edges_removed: log.count_events(super::EdgeEventKind::Removed),
        initial_edges_lost: log.initial_edges_lost(),
        alpha_bar,
        beta_bar,
        ..Default::default()
    };

    for sample in &log.samples {
        let mut v1 = 0.0;
        let mut v_est = 0.0;
        let mut v3 = 0.0;
        let mut errs = Vec::with_capacity(log.n);
        for (i, f) in sample.followers.iter().enumerate() {
            let plant = &scenario.followers[i].plant;
            let s = sliding_variable(&f.qd, &f.ctrl.v);
            let theta_err = plant.true_params() - &f.ctrl.theta_hat;
            v1 += 0.5 * (s.transpose() * plant.mass_matrix(&f.q) * &s)[0]
                + 0.5 * inv_gain * theta_err.norm_squared();
            let (_, v_tilde) = leader_errors(&f.q, &f.ctrl.v, &sample.leader_q, &sample.leader_qd);
            v_est += 0.5 * v_tilde.norm_squared();
            errs.push((&f.qd - &sample.leader_qd).norm());
            if let Some((g1, g2)) = gain_rates {
                for (slot, &a) in f.ctrl.alpha.iter().enumerate() {
                    let e2 = (a - alpha_bar).powi(2);
                    match slot {
                        0 => v3 += e2 / (2.0 * g1),
                        k if k == i + 1 => {}
                        _ => v3 += e2 / (4.0 * g1),
                    }
                }
                v3 += (f.ctrl.beta - beta_bar).powi(2) / (2.0 * g2);
            }
        }

        let points: Vec<&DVector<f64>> = std::iter::once(&sample.leader_q)
            .chain(sample.followers.iter().map(|f| &f.q))
            .collect();
        let mut v2 = 0.0;
        let mut min_d = f64::INFINITY;
        let mut max_conn = 0.0_f64;
        for a in 0..points.len() {
            for b in (a + 1)..points.len() {
                let dist = (points[a] - points[b]).norm();
                let regime = regimes.get(a, b);
                v2 += spec.value_at(dist, regime).map_err(|e| match e {
                    PotentialError::Collision => Error::Collision(a, b),
                    PotentialError::Barrier(distance) => Error::BarrierViolation { a, b, distance },
                })?;
                min_d = min_d.min(dist);
                if regime == crate::potential::Regime::Connected {
                    max_conn = max_conn.max(dist);
                }
            }
        }

        let followers: Vec<DVector<f64>> = sample.followers.iter().map(|f| f.q.clone()).collect();
        let g = topology::build_graph(&sample.leader_q, &followers, scenario.radius())?;
        let lambda = topology::min_eig_sym(&topology::matrices(&g).h)?;

        d.t.push(sample.t);
        d.v1.push(v1);
        d.v_est.push(v_est);
        d.v2.push(v2);
        d.v3.push(v3);
        d.total.push(v1 + v_est + v2 + v3);
        d.velocity_errors.push(errs);
        d.min_distance.push(min_d);
        d.max_connected_distance.push(max_conn);
        d.lambda_min_h.push(lambda);
        d.edge_count.push(g.edge_count() + g.leader_adj().iter().filter(|&&a| a).count());
    }
    Ok(d)
}
