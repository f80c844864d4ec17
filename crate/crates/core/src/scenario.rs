//! Scenario files: TOML sections with unit-suffixed physical quantities.
//!
//! ```toml
//! [plant]
//! model = "spacecraft"
//! orbit_radius = "7000 km"
//! masses = ["35 kg", "40 kg"]
//! initial_positions = ["(-80, 90, 0) m", "(100, 90, 0) m"]
//! ```
//!
//! Scalars are written `"<number> <unit>"`, vectors `"(<x>, <y>, <z>) <unit>"`.
//! Gains are plain numbers.

use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::DVector;
use toml::{Table, Value};

use crate::control::{ControlLaw, GainLaw, SignMode};
use crate::engine::{ControllerConfig, FollowerSpec, Integration, LeaderMotion, LeaderTrajectory, PlantModel, Scenario};
use crate::error::{Error, Result};
use crate::plant::{Spacecraft, SpacecraftParams, EARTH_MU};
use crate::potential::PotentialSpec;

pub const CASE1: &str = include_str!("../scenarios/case1.cfg");
pub const CASE2: &str = include_str!("../scenarios/case2.cfg");
pub const CASE3: &str = include_str!("../scenarios/case3.cfg");

/// Scenario text shipped with the crate, looked up by stem (`"case1"`).
pub fn bundled(name: &str) -> Option<&'static str> {
    match name {
        "case1" => Some(CASE1),
        "case2" => Some(CASE2),
        "case3" => Some(CASE3),
        _ => None,
    }
}

pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    parse_scenario_str(&text, stem)
}

/// Parse and validate scenario text. `default_name` is used when the file has no `name` key.
pub fn parse_scenario_str(text: &str, default_name: &str) -> Result<Scenario> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| Error::Parse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(1),
        message: e.message().to_string(),
    })?;
    let mut top = Section::new("", &root);
    let name = match top.opt("name") {
        Some(v) => top.string_value("name", v)?,
        None => default_name.to_string(),
    };
    let mut plant_sec = Section::new("plant", top.table("plant")?);
    let mut leader_sec = Section::new("leader", top.table("leader")?);
    let mut potential_sec = Section::new("potential", top.table("potential")?);
    let mut controller_sec = Section::new("controller", top.table("controller")?);
    let mut integration_sec = Section::new("integration", top.table("integration")?);
    let output_table = top.opt_table("output")?;
    top.finish()?;

    let integration = Integration {
        dt: integration_sec.scalar("dt", Dim::Time)?,
        t_end: integration_sec.scalar("t_end", Dim::Time)?,
        gradient_cap: integration_sec.opt_scalar("gradient_cap", Dim::Force)?.unwrap_or(1e3),
    };
    integration_sec.finish()?;

    let decimation = match output_table {
        Some(t) => {
            let mut out = Section::new("output", t);
            let d = out.opt_count("decimation")?.unwrap_or(10);
            out.finish()?;
            d
        }
        None => 10,
    };

    let followers = parse_plant(&mut plant_sec)?;
    plant_sec.finish()?;
    let leader = parse_leader(&mut leader_sec, integration.t_end)?;
    leader_sec.finish()?;

    let potential = PotentialSpec::new(
        potential_sec.scalar("radius", Dim::Length)?,
        potential_sec.scalar("desired_distance", Dim::Length)?,
    )
    .map_err(|m| Error::validation("potential.desired_distance", m))?;
    potential_sec.finish()?;

    let controller = parse_controller(&mut controller_sec)?;
    controller_sec.finish()?;

    let scenario = Scenario {
        name,
        followers,
        leader,
        potential,
        controller,
        integration,
        decimation,
    };
    scenario.validate()?;
    Ok(scenario)
}

fn parse_plant(sec: &mut Section) -> Result<Vec<FollowerSpec>> {
    let model = sec.string("model")?;
    if model != "spacecraft" {
        return Err(Error::validation("plant.model", format!("unknown model `{model}`")));
    }
    let orbit_radius = sec.scalar("orbit_radius", Dim::Length)?;
    let mu = sec.opt_scalar("mu", Dim::GravParam)?.unwrap_or(EARTH_MU);
    let masses = sec.scalar_list("masses", Dim::Mass)?;
    let n = masses.len();
    let positions = sec.vector_list("initial_positions", Dim::Length)?;
    check_len(sec, "initial_positions", positions.len(), n)?;
    let velocities = match sec.opt_vector_list("initial_velocities", Dim::Velocity)? {
        Some(v) => {
            check_len(sec, "initial_velocities", v.len(), n)?;
            v
        }
        None => positions.iter().map(|q| DVector::zeros(q.len())).collect(),
    };
    let estimator_velocities = match sec.opt_vector_list("initial_estimator_velocities", Dim::Velocity)? {
        Some(v) => {
            check_len(sec, "initial_estimator_velocities", v.len(), n)?;
            v
        }
        None => positions.iter().map(|q| DVector::zeros(q.len())).collect(),
    };
    let estimates = match sec.opt_scalar_list("initial_mass_estimates", Dim::Mass)? {
        Some(v) => {
            check_len(sec, "initial_mass_estimates", v.len(), n)?;
            v
        }
        None => vec![0.0; n],
    };
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let params = SpacecraftParams::new(masses[k], orbit_radius, mu)
            .map_err(|e| Error::validation("plant.masses", e.to_string()))?;
        if positions[k].len() != 3 || velocities[k].len() != 3 || estimator_velocities[k].len() != 3 {
            return Err(Error::validation("plant.initial_positions", "spacecraft states are 3-vectors"));
        }
        out.push(FollowerSpec {
            plant: PlantModel::Spacecraft(Spacecraft::new(params)),
            q0: positions[k].clone(),
            qd0: velocities[k].clone(),
            v0: estimator_velocities[k].clone(),
            theta_hat0: DVector::from_element(1, estimates[k]),
        });
    }
    Ok(out)
}

fn check_len(sec: &Section, key: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::validation(
            sec.path(key),
            format!("expected {want} entries, found {got}"),
        ));
    }
    Ok(())
}

fn parse_leader(sec: &mut Section, horizon: f64) -> Result<LeaderTrajectory> {
    let q0 = sec.vector("initial_position", Dim::Length)?;
    let motion = match sec.string("motion")?.as_str() {
        "constant_velocity" => LeaderMotion::ConstantVelocity {
            velocity: sec.vector("velocity", Dim::Velocity)?,
        },
        "sinusoidal" => LeaderMotion::Sinusoidal {
            offset: sec.vector("offset", Dim::Velocity)?,
            sin_amp: sec.vector("sin_amplitude", Dim::Velocity)?,
            cos_amp: sec.vector("cos_amplitude", Dim::Velocity)?,
            period: sec.scalar("period", Dim::Time)?,
        },
        "table" => {
            let times = sec.scalar_list("knot_times", Dim::Time)?;
            let vels = sec.vector_list("knot_velocities", Dim::Velocity)?;
            check_len(sec, "knot_velocities", vels.len(), times.len())?;
            LeaderMotion::Table {
                knots: times.into_iter().zip(vels).collect(),
            }
        }
        other => return Err(Error::validation("leader.motion", format!("unknown motion `{other}`"))),
    };
    LeaderTrajectory::new(q0, motion, horizon).map_err(|e| Error::validation("leader", e.to_string()))
}

fn parse_controller(sec: &mut Section) -> Result<ControllerConfig> {
    let law_name = sec.string("law")?;
    let law = match law_name.as_str() {
        "constant_velocity" => ControlLaw::ConstantVelocity {
            gamma: sec.number("gamma")?,
        },
        "varying_velocity" => {
            let alpha = sec.number("alpha")?;
            ControlLaw::VaryingVelocity { alpha, sign: parse_sign(sec)? }
        }
        "fully_distributed" => {
            let gamma1 = sec.number("gamma1")?;
            let gamma2 = sec.number("gamma2")?;
            let sign = parse_sign(sec)?;
            let gain_law = match sec.opt("gain_law") {
                None => GainLaw::default(),
                Some(v) => match sec.string_value("gain_law", v)?.as_str() {
                    "per_edge" => GainLaw::PerEdge,
                    "leader_velocity" => GainLaw::LeaderVelocity,
                    other => return Err(Error::validation("controller.gain_law", format!("unknown variant `{other}`"))),
                },
            };
            ControlLaw::FullyDistributed {
                gamma1,
                gamma2,
                sign,
                gain_law,
            }
        }
        other => return Err(Error::validation("controller.law", format!("unknown law `{other}`"))),
    };
    Ok(ControllerConfig {
        law,
        adaptation_gain: sec.number("adaptation_gain")?,
        alpha0: sec.opt_number("alpha0")?.unwrap_or(0.0),
        beta0: sec.opt_number("beta0")?.unwrap_or(0.0),
        alpha_bar: sec.opt_number("alpha_bar")?,
        beta_bar: sec.opt_number("beta_bar")?,
    })
}

fn parse_sign(sec: &mut Section) -> Result<SignMode> {
    let mode = match sec.opt("sign") {
        Some(v) => sec.string_value("sign", v)?,
        None => "tanh".into(),
    };
    match mode.as_str() {
        "exact" => Ok(SignMode::Exact),
        "tanh" => Ok(SignMode::Tanh {
            slope: sec.opt_number("tanh_slope")?.unwrap_or(1000.0),
        }),
        other => Err(Error::validation("controller.sign", format!("unknown mode `{other}`"))),
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dim {
    Length,
    Velocity,
    Time,
    Mass,
    Force,
    GravParam,
}

impl Dim {
    fn name(self) -> &'static str {
        match self {
            Dim::Length => "a length (m, km)",
            Dim::Velocity => "a velocity (m/s, km/s)",
            Dim::Time => "a time (s, min)",
            Dim::Mass => "a mass (kg)",
            Dim::Force => "a force (N, kN)",
            Dim::GravParam => "a gravitational parameter (m^3/s^2, km^3/s^2)",
        }
    }

    fn factor(self, unit: &str) -> Option<f64> {
        Some(match (self, unit) {
            (Dim::Length, "m") => 1.0,
            (Dim::Length, "km") => 1e3,
            (Dim::Velocity, "m/s") => 1.0,
            (Dim::Velocity, "km/s") => 1e3,
            (Dim::Time, "s") => 1.0,
            (Dim::Time, "min") => 60.0,
            (Dim::Mass, "kg") => 1.0,
            (Dim::Force, "N") => 1.0,
            (Dim::Force, "kN") => 1e3,
            (Dim::GravParam, "m^3/s^2") => 1.0,
            (Dim::GravParam, "km^3/s^2") => 1e9,
            _ => return None,
        })
    }
}

/// Key-tracking view of one table; `finish` rejects anything not consumed.
struct Section<'a> {
    name: &'static str,
    table: &'a Table,
    used: BTreeSet<&'a str>,
}

impl<'a> Section<'a> {
    fn new(name: &'static str, table: &'a Table) -> Self {
        Self {
            name,
            table,
            used: BTreeSet::new(),
        }
    }

    fn path(&self, key: &str) -> String {
        if self.name.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.name)
        }
    }

    fn opt(&mut self, key: &str) -> Option<&'a Value> {
        let (k, v) = self.table.get_key_value(key)?;
        self.used.insert(k.as_str());
        Some(v)
    }

    fn req(&mut self, key: &str) -> Result<&'a Value> {
        self.opt(key)
            .ok_or_else(|| Error::validation(self.path(key), "missing required key"))
    }

    fn finish(self) -> Result<()> {
        match self.table.keys().find(|k| !self.used.contains(k.as_str())) {
            Some(k) => Err(Error::validation(self.path(k), "unknown key")),
            None => Ok(()),
        }
    }

    fn table(&mut self, key: &str) -> Result<&'a Table> {
        match self.req(key)? {
            Value::Table(t) => Ok(t),
            _ => Err(Error::validation(self.path(key), "expected a section")),
        }
    }

    fn opt_table(&mut self, key: &str) -> Result<Option<&'a Table>> {
        match self.opt(key) {
            None => Ok(None),
            Some(Value::Table(t)) => Ok(Some(t)),
            Some(_) => Err(Error::validation(self.path(key), "expected a section")),
        }
    }

    fn string_value(&self, key: &str, v: &Value) -> Result<String> {
        v.as_str()
            .map(str::to_string)
            .ok_or_else(|| Error::validation(self.path(key), "expected a string"))
    }

    fn string(&mut self, key: &str) -> Result<String> {
        let v = self.req(key)?;
        self.string_value(key, v)
    }

    fn number_value(&self, key: &str, v: &Value) -> Result<f64> {
        let x = match v {
            Value::Float(x) => *x,
            Value::Integer(i) => *i as f64,
            Value::String(s) => {
                return Err(Error::Unit {
                    key: self.path(key),
                    expected: "a plain number",
                    found: s.clone(),
                })
            }
            _ => return Err(Error::validation(self.path(key), "expected a number")),
        };
        if !x.is_finite() {
            return Err(Error::validation(self.path(key), "must be finite"));
        }
        Ok(x)
    }

    fn number(&mut self, key: &str) -> Result<f64> {
        let v = self.req(key)?;
        self.number_value(key, v)
    }

    fn opt_number(&mut self, key: &str) -> Result<Option<f64>> {
        match self.opt(key) {
            Some(v) => self.number_value(key, v).map(Some),
            None => Ok(None),
        }
    }

    fn opt_count(&mut self, key: &str) -> Result<Option<usize>> {
        match self.opt(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(_) => Err(Error::validation(self.path(key), "expected a nonnegative integer")),
        }
    }

    fn quantity_value(&self, key: &str, v: &Value, dim: Dim) -> Result<Vec<f64>> {
        let text = match v {
            Value::String(s) => s.trim(),
            Value::Integer(_) | Value::Float(_) => {
                return Err(Error::Unit {
                    key: self.path(key),
                    expected: dim.name(),
                    found: v.to_string(),
                })
            }
            _ => return Err(Error::validation(self.path(key), "expected a quantity string")),
        };
        let bad = |m: &str| Error::validation(self.path(key), format!("{m} in `{text}`"));
        let (numbers, unit) = if let Some(rest) = text.strip_prefix('(') {
            let close = rest.find(')').ok_or_else(|| bad("unclosed parenthesis"))?;
            let parts: Vec<&str> = rest[..close].split(',').map(str::trim).collect();
            (parts, rest[close + 1..].trim())
        } else {
            match text.split_once(char::is_whitespace) {
                Some((num, unit)) => (vec![num], unit.trim()),
                None => (vec![text], ""),
            }
        };
        let factor = dim.factor(unit).ok_or_else(|| Error::Unit {
            key: self.path(key),
            expected: dim.name(),
            found: if unit.is_empty() { "no unit".into() } else { unit.to_string() },
        })?;
        numbers
            .iter()
            .map(|s| match s.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x * factor),
                _ => Err(bad(&format!("invalid number `{s}`"))),
            })
            .collect()
    }

    fn scalar_value(&self, key: &str, v: &Value, dim: Dim) -> Result<f64> {
        let xs = self.quantity_value(key, v, dim)?;
        match xs.as_slice() {
            [x] => Ok(*x),
            _ => Err(Error::validation(self.path(key), "expected a scalar, found a vector")),
        }
    }

    fn scalar(&mut self, key: &str, dim: Dim) -> Result<f64> {
        let v = self.req(key)?;
        self.scalar_value(key, v, dim)
    }

    fn opt_scalar(&mut self, key: &str, dim: Dim) -> Result<Option<f64>> {
        match self.opt(key) {
            Some(v) => self.scalar_value(key, v, dim).map(Some),
            None => Ok(None),
        }
    }

    fn vector(&mut self, key: &str, dim: Dim) -> Result<DVector<f64>> {
        let v = self.req(key)?;
        Ok(DVector::from_vec(self.quantity_value(key, v, dim)?))
    }

    fn array(&self, key: &str, v: &'a Value) -> Result<&'a Vec<Value>> {
        v.as_array()
            .ok_or_else(|| Error::validation(self.path(key), "expected an array"))
    }

    fn opt_scalar_list(&mut self, key: &str, dim: Dim) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.opt(key) else { return Ok(None) };
        let items = self.array(key, v)?;
        let out = items
            .iter()
            .map(|x| self.scalar_value(key, x, dim))
            .collect::<Result<Vec<_>>>()?;
        Ok(Some(out))
    }

    fn scalar_list(&mut self, key: &str, dim: Dim) -> Result<Vec<f64>> {
        self.req(key)?;
        Ok(self.opt_scalar_list(key, dim)?.unwrap_or_default())
    }

    fn opt_vector_list(&mut self, key: &str, dim: Dim) -> Result<Option<Vec<DVector<f64>>>> {
        let Some(v) = self.opt(key) else { return Ok(None) };
        let items = self.array(key, v)?;
        let out = items
            .iter()
            .map(|x| self.quantity_value(key, x, dim).map(DVector::from_vec))
            .collect::<Result<Vec<_>>>()?;
        Ok(Some(out))
    }

    fn vector_list(&mut self, key: &str, dim: Dim) -> Result<Vec<DVector<f64>>> {
        self.req(key)?;
        Ok(self.opt_vector_list(key, dim)?.unwrap_or_default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::EulerLagrange;
    use nalgebra::dvector;

    #[test]
    fn case1_parameters() {
        let s = parse_scenario_str(CASE1, "case1").unwrap();
        assert_eq!(s.name, "case1");
        assert_eq!(s.controller.law, ControlLaw::ConstantVelocity { gamma: 0.04 });
        assert_eq!(s.controller.adaptation_gain, 5.0);
        assert_eq!(s.radius(), 200.0);
        assert_eq!(s.potential.d_bar(), 80.0);
        let masses: Vec<f64> = s.followers.iter().map(|f| f.plant.true_params()[0]).collect();
        assert_eq!(masses, vec![35.0, 40.0, 45.0, 50.0]);
        assert_eq!(s.followers[2].q0, dvector![100.0, -100.0, 0.0]);
        assert_eq!(s.leader.initial_position, dvector![-80.0, 200.0, 0.0]);
        let PlantModel::Spacecraft(sc) = &s.followers[0].plant;
        assert_eq!(sc.params().orbit_radius, 7.0e6);
        assert_eq!(s.integration, Integration { dt: 0.01, t_end: 300.0, gradient_cap: 1e3 });
        assert_eq!(s.decimation, 10);
    }

    #[test]
    fn case2_and_case3_parameters() {
        let s2 = parse_scenario_str(CASE2, "case2").unwrap();
        assert_eq!(
            s2.controller.law,
            ControlLaw::VaryingVelocity { alpha: 0.04, sign: SignMode::Tanh { slope: 1000.0 } }
        );
        let s3 = parse_scenario_str(CASE3, "case3").unwrap();
        match s3.controller.law {
            ControlLaw::FullyDistributed { gamma1, gamma2, gain_law, .. } => {
                assert_eq!((gamma1, gamma2), (0.003, 0.003));
                assert_eq!(gain_law, GainLaw::PerEdge);
            }
            other => panic!("unexpected law {other:?}"),
        }
        assert_eq!(s2.leader, s3.leader);
        assert_eq!(s2.followers, s3.followers);
    }

    fn edited(from: &str, to: &str) -> String {
        assert!(CASE1.contains(from), "fixture lacks `{from}`");
        CASE1.replacen(from, to, 1)
    }

    #[test]
    fn zero_step_names_the_key() {
        let err = parse_scenario_str(&edited("dt = \"0.01 s\"", "dt = \"0 s\""), "x").unwrap_err();
        assert!(matches!(&err, Error::Validation { key, .. } if key == "integration.dt"), "{err}");
    }

    #[test]
    fn unknown_and_missing_keys() {
        let err = parse_scenario_str(&edited("gamma = 0.04", "gamma = 0.04\ngama = 1"), "x").unwrap_err();
        assert!(matches!(&err, Error::Validation { key, .. } if key == "controller.gama"), "{err}");
        let err = parse_scenario_str(&edited("gamma = 0.04", ""), "x").unwrap_err();
        assert!(matches!(&err, Error::Validation { key, .. } if key == "controller.gamma"), "{err}");
        let err = parse_scenario_str(&edited("[output]", "[outputs]"), "x").unwrap_err();
        assert!(matches!(&err, Error::Validation { key, .. } if key == "outputs"), "{err}");
    }

    #[test]
    fn unit_mismatch() {
        let err = parse_scenario_str(&edited("\"7000 km\"", "\"7000 kg\""), "x").unwrap_err();
        assert!(matches!(&err, Error::Unit { key, .. } if key == "plant.orbit_radius"), "{err}");
        let err = parse_scenario_str(&edited("\"0.01 s\"", "0.01"), "x").unwrap_err();
        assert!(matches!(&err, Error::Unit { key, .. } if key == "integration.dt"), "{err}");
        let err = parse_scenario_str(&edited("gamma = 0.04", "gamma = \"0.04 s\""), "x").unwrap_err();
        assert!(matches!(&err, Error::Unit { .. }), "{err}");
    }

    #[test]
    fn unit_conversion() {
        let s = parse_scenario_str(&edited("\"0.01 s\"", "\"0.0002 min\""), "x").unwrap();
        assert!((s.integration.dt - 0.012).abs() < 1e-15);
    }

    #[test]
    fn parse_error_reports_line() {
        let text = "[plant]\nmodel = \"spacecraft\"\nmasses = [\n";
        match parse_scenario_str(text, "x").unwrap_err() {
            Error::Parse { line, .. } => assert!(line >= 3, "line {line}"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn mismatched_follower_lists() {
        let err = parse_scenario_str(&edited("\"50 kg\"", "\"50 kg\", \"55 kg\""), "x").unwrap_err();
        assert!(matches!(&err, Error::Validation { key, .. } if key == "plant.initial_positions"), "{err}");
    }

    #[test]
    fn zero_horizon_is_accepted() {
        let s = parse_scenario_str(&edited("t_end = \"300 s\"", "t_end = \"0 s\""), "x").unwrap();
        assert_eq!(s.integration.steps().unwrap(), 0);
    }
}
