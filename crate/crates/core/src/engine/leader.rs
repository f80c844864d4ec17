use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Position, velocity and acceleration of the leader at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaderState {
    pub q: DVector<f64>,
    pub qd: DVector<f64>,
    pub qdd: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LeaderMotion {
    ConstantVelocity {
        velocity: DVector<f64>,
    },
    /// `q̇₀(t) = offset + sin_amp ⊙ sin(ωt) + cos_amp ⊙ cos(ωt)` with `ω = 2π / period`.
    Sinusoidal {
        offset: DVector<f64>,
        sin_amp: DVector<f64>,
        cos_amp: DVector<f64>,
        period: f64,
    },
    /// Piecewise-linear velocity through `(time, velocity)` knots; held constant past the last knot.
    Table { knots: Vec<(f64, DVector<f64>)> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeaderTrajectory {
    pub initial_position: DVector<f64>,
    pub motion: LeaderMotion,
    horizon: f64,
}

impl LeaderTrajectory {
    pub fn new(initial_position: DVector<f64>, motion: LeaderMotion, horizon: f64) -> Result<Self> {
        let p = initial_position.len();
        let dims_ok = match &motion {
            LeaderMotion::ConstantVelocity { velocity } => velocity.len() == p,
            LeaderMotion::Sinusoidal {
                offset,
                sin_amp,
                cos_amp,
                period,
            } => {
                if !(*period > 0.0) {
                    return Err(Error::Config(format!("leader period must be positive, got {period}")));
                }
                offset.len() == p && sin_amp.len() == p && cos_amp.len() == p
            }
            LeaderMotion::Table { knots } => {
                if knots.is_empty() || knots[0].0 != 0.0 {
                    return Err(Error::Config("velocity table must start at t = 0".into()));
                }
                if knots.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(Error::Config("velocity table times must increase strictly".into()));
                }
                knots.iter().all(|(_, v)| v.len() == p)
            }
        };
        if !dims_ok {
            return Err(Error::Config("leader trajectory vectors have inconsistent dimensions".into()));
        }
        if !(horizon >= 0.0) {
            return Err(Error::Config(format!("horizon must be nonnegative, got {horizon}")));
        }
        Ok(Self {
            initial_position,
            motion,
            horizon,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.initial_position.len()
    }

    /// Exact state at time `t`, `0 ≤ t ≤ horizon`.
    pub fn state(&self, t: f64) -> Result<LeaderState> {
        // Allow round-off in the last RK stage time.
        let slack = 1e-9 * self.horizon.max(1.0);
        if !(t >= 0.0 && t <= self.horizon + slack) {
            return Err(Error::Contract(format!(
                "leader queried at t = {t} s outside [0, {}] s",
                self.horizon
            )));
        }
        let q_init = &self.initial_position;
        Ok(match &self.motion {
            LeaderMotion::ConstantVelocity { velocity } => LeaderState {
                q: q_init + velocity * t,
                qd: velocity.clone(),
                qdd: DVector::zeros(velocity.len()),
            },
            LeaderMotion::Sinusoidal {
                offset,
                sin_amp,
                cos_amp,
                period,
            } => {
                let w = std::f64::consts::TAU / period;
                let (s, c) = (w * t).sin_cos();
                LeaderState {
                    q: q_init + offset * t + sin_amp * ((1.0 - c) / w) + cos_amp * (s / w),
                    qd: offset + sin_amp * s + cos_amp * c,
                    qdd: (sin_amp * c - cos_amp * s) * w,
                }
            }
            LeaderMotion::Table { knots } => table_state(q_init, knots, t),
        })
    }

    /// Analytic upper bound on `‖q̈₀(t)‖` over all `t ≥ 0`.
    pub fn max_accel(&self) -> f64 {
        match &self.motion {
            LeaderMotion::ConstantVelocity { .. } => 0.0,
            LeaderMotion::Sinusoidal {
                sin_amp,
                cos_amp,
                period,
                ..
            } => {
                // q̈₀ = ω [a, −b] (cos ωt, sin ωt)ᵀ, so the sup is ω σ_max([a, −b]).
                let w = std::f64::consts::TAU / period;
                let (aa, bb, ab) = (sin_amp.dot(sin_amp), cos_amp.dot(cos_amp), sin_amp.dot(cos_amp));
                let gram = DMatrix::from_row_slice(2, 2, &[aa, -ab, -ab, bb]);
                let half_tr = 0.5 * (gram[(0, 0)] + gram[(1, 1)]);
                let det = gram.determinant();
                let top = half_tr + (half_tr * half_tr - det).max(0.0).sqrt();
                w * top.sqrt()
            }
            LeaderMotion::Table { knots } => knots
                .windows(2)
                .map(|w| (&w[1].1 - &w[0].1).norm() / (w[1].0 - w[0].0))
                .fold(0.0, f64::max),
        }
    }

    /// Bound `σ_l ≥ ‖1_n ⊗ q̈₀‖` for `n` followers.
    pub fn sigma_l(&self, n: usize) -> f64 {
        (n as f64).sqrt() * self.max_accel()
    }
}

fn table_state(q_init: &DVector<f64>, knots: &[(f64, DVector<f64>)], t: f64) -> LeaderState {
    let mut q = q_init.clone();
    for w in knots.windows(2) {
        let (t0, v0) = (&w[0].0, &w[0].1);
        let (t1, v1) = (&w[1].0, &w[1].1);
        let a = (v1 - v0) / (t1 - t0);
        if t <= *t1 {
            let tau = t - t0;
            return LeaderState {
                q: q + v0 * tau + &a * (0.5 * tau * tau),
                qd: v0 + &a * tau,
                qdd: a,
            };
        }
        q += (v0 + v1) * (0.5 * (t1 - t0));
    }
    let (t_last, v_last) = knots.last().expect("non-empty table");
    LeaderState {
        q: q + v_last * (t - t_last),
        qd: v_last.clone(),
        qdd: DVector::zeros(v_last.len()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn circle() -> LeaderTrajectory {
        LeaderTrajectory::new(
            dvector![-80.0, 200.0, 0.0],
            LeaderMotion::Sinusoidal {
                offset: dvector![0.0, 0.0, 0.2],
                sin_amp: dvector![0.1, 0.0, 0.0],
                cos_amp: dvector![0.0, 0.1, 0.0],
                period: 60.0,
            },
            300.0,
        )
        .unwrap()
    }

    #[test]
    fn constant_velocity_position() {
        let traj = LeaderTrajectory::new(
            dvector![-80.0, 200.0, 0.0],
            LeaderMotion::ConstantVelocity {
                velocity: dvector![0.1, 0.1, 0.2],
            },
            300.0,
        )
        .unwrap();
        let s = traj.state(10.0).unwrap();
        assert!((s.q - dvector![-79.0, 201.0, 2.0]).norm() < 1e-12);
        assert_eq!(traj.sigma_l(4), 0.0);
    }

    #[test]
    fn sinusoidal_initial_velocity() {
        let s = circle().state(0.0).unwrap();
        assert_eq!(s.qd, dvector![0.0, 0.1, 0.2]);
        assert_eq!(s.q, dvector![-80.0, 200.0, 0.0]);
    }

    #[test]
    fn sinusoidal_acceleration_bound() {
        // d/dt of (0.1 sin ωt, 0.1 cos ωt, 0.2) has constant norm 0.1 ω.
        let expected = 0.1 * std::f64::consts::TAU / 60.0;
        assert!((expected - 1.047_197_551_196_597_8e-2).abs() < 1e-16);
        let traj = circle();
        for k in 0..50 {
            let s = traj.state(k as f64 * 5.3).unwrap();
            assert!((s.qdd.norm() - expected).abs() < 1e-15);
        }
        assert!((traj.max_accel() - expected).abs() < 1e-15);
        assert!((traj.sigma_l(4) - 2.0 * expected).abs() < 1e-15);
    }

    #[test]
    fn sinusoidal_position_is_integral_of_velocity() {
        let traj = circle();
        let h = 1e-4;
        for t in [3.0, 47.0, 150.0] {
            let fd = (traj.state(t + h).unwrap().q - traj.state(t - h).unwrap().q) / (2.0 * h);
            assert!((fd - traj.state(t).unwrap().qd).norm() < 1e-9);
        }
    }

    #[test]
    fn table_motion() {
        let traj = LeaderTrajectory::new(
            dvector![0.0, 0.0],
            LeaderMotion::Table {
                knots: vec![(0.0, dvector![0.0, 0.0]), (10.0, dvector![1.0, 0.0]), (20.0, dvector![1.0, 2.0])],
            },
            40.0,
        )
        .unwrap();
        assert!((traj.state(10.0).unwrap().q - dvector![5.0, 0.0]).norm() < 1e-12);
        assert!((traj.state(20.0).unwrap().q - dvector![15.0, 10.0]).norm() < 1e-12);
        assert!((traj.state(30.0).unwrap().q - dvector![25.0, 30.0]).norm() < 1e-12);
        assert!((traj.max_accel() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn outside_horizon_is_rejected() {
        assert!(circle().state(301.0).is_err());
        assert!(circle().state(-0.1).is_err());
    }
}
