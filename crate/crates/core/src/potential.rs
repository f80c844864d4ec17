//! Pairwise artificial potentials for collision avoidance and connectivity
//! maintenance.
//!
//! Only gradients enter the control laws. Potential values are recovered by
//! integrating the radial derivative and are used for Lyapunov diagnostics.
//!
//! Two regimes exist, chosen once per pair from the initial configuration:
//!
//! * [`Regime::Connected`]: the pair started within sensing range. The
//!   potential has a barrier at the sensing radius so the link is never lost.
//! * [`Regime::Unconnected`]: the pair started out of range. The force
//!   vanishes beyond the sensing radius.
//!
//! Both regimes share the collision branch `(d - d̄) / (A d)` below `d̄`.

use std::f64::consts::PI;

use nalgebra::DVector;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Connected,
    Unconnected,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum PotentialError {
    #[error("agents coincide")]
    Collision,
    #[error("connected pair at distance {0} m, outside the sensing radius")]
    Barrier(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    radius: f64,
    d_bar: f64,
    /// Divisor `A` of the collision and cosine branches.
    outer_scale: f64,
    /// Divisor `B` of the connectivity barrier `(d - d̄) / (B (d - R)²)`.
    barrier_scale: f64,
    /// Cosine branch is `cos(k π (d - d̄)) / A`; this is `k`, in 1/m.
    cosine_rate: f64,
    /// Shifts applied to the integrated radial derivative so values are nonnegative.
    offsets: [f64; 2],
}

impl PotentialSpec {
    /// Potential with the default branch constants (A = 250, B = 25, k = 0.1 /m).
    pub fn new(radius: f64, d_bar: f64) -> Result<Self, String> {
        Self::with_scales(radius, d_bar, 250.0, 25.0, 0.1)
    }

    pub fn with_scales(
        radius: f64,
        d_bar: f64,
        outer_scale: f64,
        barrier_scale: f64,
        cosine_rate: f64,
    ) -> Result<Self, String> {
        if !(d_bar > 0.0 && d_bar < radius) {
            return Err(format!("need 0 < d_bar < radius, got d_bar = {d_bar}, radius = {radius}"));
        }
        if !(outer_scale > 0.0 && barrier_scale > 0.0) {
            return Err("potential scales must be positive".into());
        }
        if !cosine_rate.is_finite() {
            return Err("cosine rate must be finite".into());
        }
        let mut spec = Self {
            radius,
            d_bar,
            outer_scale,
            barrier_scale,
            cosine_rate,
            offsets: [0.0; 2],
        };
        spec.offsets = [
            -spec.raw_minimum(Regime::Connected).min(0.0),
            -spec.raw_minimum(Regime::Unconnected).min(0.0),
        ];
        Ok(spec)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn d_bar(&self) -> f64 {
        self.d_bar
    }

    pub fn outer_scale(&self) -> f64 {
        self.outer_scale
    }

    pub fn barrier_scale(&self) -> f64 {
        self.barrier_scale
    }

    pub fn cosine_rate(&self) -> f64 {
        self.cosine_rate
    }

    /// Constant added to the integrated derivative in `regime`.
    pub fn offset(&self, regime: Regime) -> f64 {
        self.offsets[regime as usize]
    }

    /// `dV/dd` at separation `d`.
    pub fn radial_derivative(&self, d: f64, regime: Regime) -> Result<f64, PotentialError> {
        if !(d > 0.0) {
            return Err(PotentialError::Collision);
        }
        if d <= self.d_bar {
            return Ok((d - self.d_bar) / (self.outer_scale * d));
        }
        match regime {
            Regime::Unconnected if d > self.radius => Ok(0.0),
            Regime::Unconnected => {
                Ok((self.cosine_rate * PI * (d - self.d_bar)).cos() / self.outer_scale)
            }
            Regime::Connected if d >= self.radius => Err(PotentialError::Barrier(d)),
            Regime::Connected => {
                let gap = d - self.radius;
                Ok((d - self.d_bar) / (self.barrier_scale * gap * gap))
            }
        }
    }

    /// `∂V_ij/∂q_i`. Swapping the arguments negates the result exactly.
    pub fn gradient(
        &self,
        qi: &DVector<f64>,
        qj: &DVector<f64>,
        regime: Regime,
    ) -> Result<DVector<f64>, PotentialError> {
        let diff = qi - qj;
        let d = diff.norm();
        let slope = self.radial_derivative(d, regime)?;
        Ok(diff * (slope / d))
    }

    pub fn value(
        &self,
        qi: &DVector<f64>,
        qj: &DVector<f64>,
        regime: Regime,
    ) -> Result<f64, PotentialError> {
        self.value_at((qi - qj).norm(), regime)
    }

    /// `V(d) = offset + ∫_{d̄}^{d} dV/ds ds`.
    pub fn value_at(&self, d: f64, regime: Regime) -> Result<f64, PotentialError> {
        // Validate the distance first so errors match the gradient's.
        self.radial_derivative(d, regime)?;
        Ok(self.offset(regime) + self.integrate_raw(d, regime))
    }

    fn integrate_raw(&self, d: f64, regime: Regime) -> f64 {
        let f = |s: f64| self.radial_derivative(s, regime).unwrap_or(0.0);
        if d <= self.d_bar {
            return -adaptive_simpson(&f, d, self.d_bar, QUAD_TOL);
        }
        // Past the radius the derivative is identically zero.
        adaptive_simpson(&f, self.d_bar, d.min(self.radius), QUAD_TOL)
    }

    /// Smallest value of the integrated derivative over the admissible domain.
    fn raw_minimum(&self, regime: Regime) -> f64 {
        const GRID: usize = 4000;
        let f = |s: f64| self.radial_derivative(s, regime).unwrap_or(0.0);
        // The anchor d̄ itself contributes a raw value of zero.
        let mut best = 0.0_f64;
        let hi = self.radius * (1.0 - 1e-6);
        for (a, b) in [(self.d_bar * 1e-3, self.d_bar), (self.d_bar, hi)] {
            let h = (b - a) / GRID as f64;
            for k in 0..GRID {
                let (x0, x1) = (a + h * k as f64, a + h * (k + 1) as f64);
                // derivative crossing from negative to positive marks a local minimum
                if f(x0) < 0.0 && f(x1) >= 0.0 {
                    best = best.min(self.integrate_raw(bisect(&f, x0, x1), regime));
                }
            }
        }
        if regime == Regime::Unconnected {
            // plateau beyond the radius
            best = best.min(self.integrate_raw(self.radius, regime));
        }
        best
    }
}

const QUAD_TOL: f64 = 1e-13;
const QUAD_MAX_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, QUAD_MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if depth == 0 || delta.abs() <= 15.0 * tol.max(floor) {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn spec() -> PotentialSpec {
        PotentialSpec::new(200.0, 80.0).unwrap()
    }

    const REGIMES: [Regime; 2] = [Regime::Connected, Regime::Unconnected];

    // Closed-form antiderivatives of the radial derivative, anchored at d̄ = 80.
    fn raw_closed_form(d: f64, regime: Regime) -> f64 {
        if d <= 80.0 {
            return ((d - 80.0) - 80.0 * (d / 80.0).ln()) / 250.0;
        }
        match regime {
            Regime::Connected => ((200.0 - d) / 120.0).ln() / 25.0 - (120.0 / (d - 200.0) + 1.0) / 25.0,
            Regime::Unconnected => (0.1 * PI * (d.min(200.0) - 80.0)).sin() / (25.0 * PI),
        }
    }

    #[test]
    fn zero_force_at_preferred_distance() {
        let s = spec();
        for r in REGIMES {
            let g = s.gradient(&dvector![80.0, 0.0, 0.0], &dvector![0.0, 0.0, 0.0], r).unwrap();
            assert_eq!(g.norm(), 0.0);
        }
    }

    #[test]
    fn unconnected_force_vanishes_out_of_range() {
        let g = spec()
            .gradient(&dvector![250.0, 0.0, 0.0], &dvector![0.0, 0.0, 0.0], Regime::Unconnected)
            .unwrap();
        assert_eq!(g, dvector![0.0, 0.0, 0.0]);
    }

    #[test]
    fn collision_branch_value() {
        // 40 * (-40) / (250 * 1600)
        let g = spec()
            .gradient(&dvector![40.0, 0.0, 0.0], &dvector![0.0, 0.0, 0.0], Regime::Unconnected)
            .unwrap();
        assert!((g[0] + 0.004).abs() < 1e-15);
        assert_eq!(g[1], 0.0);
        assert_eq!(g[2], 0.0);
    }

    #[test]
    fn error_paths() {
        let s = spec();
        let o = dvector![1.0, 1.0, 1.0];
        assert_eq!(s.gradient(&o, &o, Regime::Unconnected), Err(PotentialError::Collision));
        assert_eq!(
            s.gradient(&dvector![201.0, 1.0, 1.0], &o, Regime::Connected),
            Err(PotentialError::Barrier(200.0))
        );
        assert!(s.value_at(0.0, Regime::Connected).is_err());
        assert!(PotentialSpec::new(200.0, 250.0).is_err());
    }

    #[test]
    fn value_has_local_minimum_at_preferred_distance() {
        let s = spec();
        for r in REGIMES {
            let v0 = s.value_at(80.0, r).unwrap();
            assert!(s.value_at(79.9, r).unwrap() > v0);
            assert!(s.value_at(80.1, r).unwrap() > v0);
        }
        assert_eq!(s.value_at(80.0, Regime::Connected).unwrap(), 0.0);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let s = spec();
        for r in REGIMES {
            for d in [0.5, 5.0, 33.3, 79.0, 80.0, 81.0, 99.0, 140.0, 185.0, 199.0, 199.9] {
                let want = s.offset(r) + raw_closed_form(d, r);
                let got = s.value_at(d, r).unwrap();
                assert!((got - want).abs() < 1e-9 * (1.0 + want.abs()), "{r:?} d={d}: {got} vs {want}");
            }
        }
        let far = s.value_at(350.0, Regime::Unconnected).unwrap();
        assert!((far - s.offset(Regime::Unconnected)).abs() < 1e-10);
    }

    #[test]
    fn offsets_make_values_nonnegative() {
        let s = spec();
        assert_eq!(s.offset(Regime::Connected), 0.0);
        // The cosine branch dips to -1/(25π) below its anchor.
        assert!((s.offset(Regime::Unconnected) - 1.0 / (25.0 * PI)).abs() < 1e-10);
        for r in REGIMES {
            for k in 1..400 {
                let d = k as f64 * 0.4995;
                assert!(s.value_at(d, r).unwrap() >= -1e-12);
            }
        }
    }

    #[test]
    fn finite_difference_matches_gradient_at_120() {
        let s = spec();
        let h = 1e-3;
        let fd = (s.value_at(120.0 + h, Regime::Unconnected).unwrap()
            - s.value_at(120.0 - h, Regime::Unconnected).unwrap())
            / (2.0 * h);
        let g = s.radial_derivative(120.0, Regime::Unconnected).unwrap();
        assert!(((fd - g) / g).abs() < 1e-4, "{fd} vs {g}");
    }

    #[test]
    fn connected_value_is_monotone_away_from_minimum() {
        let s = spec();
        let mut prev = s.value_at(80.0, Regime::Connected).unwrap();
        for k in 1..=119 {
            let v = s.value_at(80.0 + k as f64, Regime::Connected).unwrap();
            assert!(v > prev);
            prev = v;
        }
        let mut prev = s.value_at(80.0, Regime::Connected).unwrap();
        for k in 1..80 {
            let v = s.value_at(80.0 - k as f64, Regime::Connected).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn branch_joints() {
        let s = spec();
        let eps = 1e-9;
        // Barrier and collision branches both carry (d - d̄).
        let below = s.radial_derivative(80.0, Regime::Connected).unwrap();
        let above = s.radial_derivative(80.0 + eps, Regime::Connected).unwrap();
        assert!((above - below).abs() < 1e-10);
        // The cosine branch does not: it jumps by 1/A at d̄ and again at R.
        let jump_low = s.radial_derivative(80.0 + eps, Regime::Unconnected).unwrap()
            - s.radial_derivative(80.0, Regime::Unconnected).unwrap();
        assert!((jump_low - 1.0 / 250.0).abs() < 1e-9);
        let jump_high = s.radial_derivative(200.0, Regime::Unconnected).unwrap()
            - s.radial_derivative(200.0 + eps, Regime::Unconnected).unwrap();
        assert!((jump_high - 1.0 / 250.0).abs() < 1e-9);
    }
}
