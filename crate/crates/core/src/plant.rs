//! Euler-Lagrange plants `M(q) q̈ + C(q, q̇) q̇ + g(q) = u` and the
//! spacecraft relative-motion model in a circular-orbit LVLH frame.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Standard gravitational parameter of the Earth, m³/s².
pub const EARTH_MU: f64 = 3.986_004_418e14;

/// Linear parameterisation `M x + C y + g = Y(q, q̇, x, y) θ`.
///
/// This is the only view of the plant a controller gets; it never sees θ itself.
pub trait Regressor {
    fn dim(&self) -> usize;
    fn param_dim(&self) -> usize;
    fn regressor(
        &self,
        q: &DVector<f64>,
        qd: &DVector<f64>,
        x: &DVector<f64>,
        y: &DVector<f64>,
    ) -> Result<DMatrix<f64>>;
}

pub trait EulerLagrange: Regressor {
    /// Ground-truth parameters. Used by the simulator and by diagnostics only.
    fn true_params(&self) -> DVector<f64>;
    fn mass_matrix(&self, q: &DVector<f64>) -> DMatrix<f64>;
    fn coriolis(&self, q: &DVector<f64>, qd: &DVector<f64>) -> DMatrix<f64>;
    fn gravity(&self, q: &DVector<f64>) -> Result<DVector<f64>>;

    /// Left-hand side `M x + C y + g`.
    fn lhs(
        &self,
        q: &DVector<f64>,
        qd: &DVector<f64>,
        x: &DVector<f64>,
        y: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        Ok(self.mass_matrix(q) * x + self.coriolis(q, qd) * y + self.gravity(q)?)
    }

    /// Forward dynamics `q̈ = M⁻¹ (u - C q̇ - g)`.
    fn accel(&self, q: &DVector<f64>, qd: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>> {
        let rhs = u - self.coriolis(q, qd) * qd - self.gravity(q)?;
        self.mass_matrix(q)
            .cholesky()
            .map(|ch| ch.solve(&rhs))
            .ok_or_else(|| Error::Contract("mass matrix is not positive definite".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacecraftParams {
    /// kg
    pub mass: f64,
    /// Chief orbit radius, m.
    pub orbit_radius: f64,
    /// Gravitational parameter, m³/s².
    pub mu: f64,
}

impl SpacecraftParams {
    pub fn new(mass: f64, orbit_radius: f64, mu: f64) -> Result<Self> {
        if !(mass > 0.0) || !(orbit_radius > 0.0) || !(mu > 0.0) {
            return Err(Error::Config(format!(
                "spacecraft parameters must be positive (mass {mass}, r0 {orbit_radius}, mu {mu})"
            )));
        }
        Ok(Self {
            mass,
            orbit_radius,
            mu,
        })
    }

    /// Mean motion of the reference orbit, rad/s.
    pub fn mean_motion(&self) -> f64 {
        (self.mu / self.orbit_radius.powi(3)).sqrt()
    }
}

/// Translational dynamics of one spacecraft relative to a chief on a circular
/// orbit. The unknown parameter is the mass (`p_θ = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Spacecraft {
    params: SpacecraftParams,
    n0: f64,
}

impl Spacecraft {
    pub fn new(params: SpacecraftParams) -> Self {
        Self {
            n0: params.mean_motion(),
            params,
        }
    }

    pub fn params(&self) -> &SpacecraftParams {
        &self.params
    }

    pub fn mean_motion(&self) -> f64 {
        self.n0
    }

    fn unit_coriolis(&self) -> DMatrix<f64> {
        let w = 2.0 * self.n0;
        DMatrix::from_row_slice(3, 3, &[0.0, -w, 0.0, w, 0.0, 0.0, 0.0, 0.0, 0.0])
    }

    /// Gravity and frame terms per unit mass.
    fn unit_gravity(&self, q: &DVector<f64>) -> Result<DVector<f64>> {
        let SpacecraftParams {
            orbit_radius: r0,
            mu,
            ..
        } = self.params;
        let (x, y, z) = (q[0], q[1], q[2]);
        let r = ((r0 + x).powi(2) + y * y + z * z).sqrt();
        if r == 0.0 {
            return Err(Error::Singularity);
        }
        let r3 = r * r * r;
        let n2 = self.n0 * self.n0;
        Ok(DVector::from_vec(vec![
            -n2 * x + mu * (r0 + x) / r3 - mu / (r0 * r0),
            -n2 * y + mu * y / r3,
            mu * z / r3,
        ]))
    }
}

impl Regressor for Spacecraft {
    fn dim(&self) -> usize {
        3
    }

    fn param_dim(&self) -> usize {
        1
    }

    fn regressor(
        &self,
        q: &DVector<f64>,
        _qd: &DVector<f64>,
        x: &DVector<f64>,
        y: &DVector<f64>,
    ) -> Result<DMatrix<f64>> {
        let col = x + self.unit_coriolis() * y + self.unit_gravity(q)?;
        Ok(DMatrix::from_column_slice(3, 1, col.as_slice()))
    }
}

impl EulerLagrange for Spacecraft {
    fn true_params(&self) -> DVector<f64> {
        DVector::from_element(1, self.params.mass)
    }

    fn mass_matrix(&self, _q: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(3, 3) * self.params.mass
    }

    fn coriolis(&self, _q: &DVector<f64>, _qd: &DVector<f64>) -> DMatrix<f64> {
        self.unit_coriolis() * self.params.mass
    }

    fn gravity(&self, q: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.unit_gravity(q)? * self.params.mass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn craft(mass: f64) -> Spacecraft {
        Spacecraft::new(SpacecraftParams::new(mass, 7.0e6, EARTH_MU).unwrap())
    }

    #[test]
    fn constant_mass_matrix() {
        let sc = craft(35.0);
        let m = sc.mass_matrix(&dvector![1.0, 2.0, 3.0]);
        assert_eq!(m, DMatrix::from_diagonal_element(3, 3, 35.0));
        assert_eq!(m, sc.mass_matrix(&dvector![-500.0, 7.0, 0.0]));
        assert_eq!(craft(1.0).mass_matrix(&dvector![0.0, 0.0, 0.0]), DMatrix::identity(3, 3));
    }

    #[test]
    fn coriolis_structure() {
        // Unit mass with n0 = 1: pick r0 = 1, mu = 1.
        let sc = Spacecraft::new(SpacecraftParams::new(1.0, 1.0, 1.0).unwrap());
        let c = sc.coriolis(&dvector![0.0, 0.0, 0.0], &dvector![0.0, 0.0, 0.0]);
        assert_eq!(c, DMatrix::from_row_slice(3, 3, &[0.0, -2.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0]));
        let s = dvector![0.3, -1.7, 2.0];
        assert_eq!((s.transpose() * &c * &s)[0], 0.0);
    }

    #[test]
    fn coriolis_entry_at_seven_thousand_km() {
        // n0 from an independent 40-digit evaluation: 1.078007612872506e-3 rad/s
        let sc = craft(40.0);
        assert!((sc.mean_motion() - 1.078_007_612_872_506e-3).abs() < 1e-15);
        let c = sc.coriolis(&dvector![0.0, 0.0, 0.0], &dvector![0.0, 0.0, 0.0]);
        assert!((c[(0, 1)] - (-8.624_060_902_980_048e-2)).abs() < 1e-14);
    }

    #[test]
    fn frame_origin_is_an_equilibrium() {
        let g = craft(35.0).gravity(&dvector![0.0, 0.0, 0.0]).unwrap();
        assert!(g.norm() < 1e-12, "{g}");
    }

    #[test]
    fn along_track_offset_cancels() {
        let g = craft(35.0).gravity(&dvector![0.0, 5.0, 0.0]).unwrap();
        // (-n0² + mu/r³) y with r ≈ r0 (second order in y/r0)
        assert!(g[1].abs() < 1e-12, "{g}");
    }

    #[test]
    fn radial_offset_gravity_matches_high_precision_reference() {
        // 40-digit evaluation of the printed formula for x = 1000 m, m = 35 kg.
        let g = craft(35.0).gravity(&dvector![1000.0, 0.0, 0.0]).unwrap();
        let reference = -0.122_003_115_221_656_19;
        assert!(((g[0] - reference) / reference).abs() < 1e-8, "{}", g[0]);
        assert_eq!(g[1], 0.0);
        assert_eq!(g[2], 0.0);
    }

    #[test]
    fn singular_gravity_is_rejected() {
        let sc = craft(35.0);
        assert!(matches!(sc.gravity(&dvector![-7.0e6, 0.0, 0.0]), Err(Error::Singularity)));
    }

    #[test]
    fn regressor_special_values() {
        let sc = craft(45.0);
        let zero = dvector![0.0, 0.0, 0.0];
        let y0 = sc.regressor(&zero, &zero, &zero, &zero).unwrap();
        assert_eq!(y0.shape(), (3, 1));
        assert!(y0.norm() < 1e-12);
        let y1 = sc.regressor(&zero, &zero, &dvector![1.0, 0.0, 0.0], &zero).unwrap();
        assert!((y1 - DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0])).norm() < 1e-12);
    }

    #[test]
    fn accel_special_values() {
        let sc = craft(50.0);
        let zero = dvector![0.0, 0.0, 0.0];
        let a = sc.accel(&zero, &zero, &dvector![50.0, 0.0, 0.0]).unwrap();
        assert!((a - dvector![1.0, 0.0, 0.0]).norm() < 1e-12);

        let q = dvector![12.0, -40.0, 3.0];
        let qd = dvector![0.1, 0.2, -0.3];
        let u = sc.coriolis(&q, &qd) * &qd + sc.gravity(&q).unwrap();
        assert!(sc.accel(&q, &qd, &u).unwrap().norm() < 1e-15);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(SpacecraftParams::new(0.0, 7e6, EARTH_MU).is_err());
        assert!(SpacecraftParams::new(35.0, -1.0, EARTH_MU).is_err());
    }
}
