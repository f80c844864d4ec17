//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Three operations are exported: a pair-potential profile, a closed-loop run
//! of a bundled case with an adjustable gain, and the spectrum of the
//! leader-follower topology matrix for a hand-placed configuration.

use nalgebra::DVector;
use wasm_bindgen::prelude::*;

use lagflock::control::ControlLaw;
use lagflock::engine::{self, LeaderTrajectory, SimLog};
use lagflock::plant::EulerLagrange;
use lagflock::potential::{PotentialSpec, Regime};
use lagflock::scenario;
use lagflock::topology;

/// Flat `[d, V(d), dV/dd, ...]` triples over `samples` distances.
pub fn profile(radius: f64, d_bar: f64, connected: bool, samples: usize) -> Result<Vec<f64>, String> {
    let spec = PotentialSpec::new(radius, d_bar)?;
    let regime = if connected { Regime::Connected } else { Regime::Unconnected };
    let top = if connected { radius } else { 1.5 * radius };
    let samples = samples.max(2);
    let mut out = Vec::with_capacity(3 * samples);
    for k in 0..samples {
        // open interval: both ends are singular in the connected regime
        let d = top * (k as f64 + 0.5) / samples as f64;
        let (Ok(v), Ok(g)) = (spec.value_at(d, regime), spec.radial_derivative(d, regime)) else {
            continue;
        };
        out.extend([d, v, g]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn potential_profile(radius: f64, d_bar: f64, connected: bool, samples: usize) -> Result<Vec<f64>, JsError> {
    profile(radius, d_bar, connected, samples).map_err(|e| JsError::new(&e))
}

/// Result of a closed-loop run, flattened for JavaScript.
#[wasm_bindgen]
pub struct Simulation {
    times: Vec<f64>,
    leader: Vec<f64>,
    followers: Vec<Vec<f64>>,
    errors: Vec<Vec<f64>>,
    initial_edges: Vec<u32>,
    summary: String,
}

#[wasm_bindgen]
impl Simulation {
    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }

    /// `[x0, y0, x1, y1, ...]`
    pub fn leader_path(&self) -> Vec<f64> {
        self.leader.clone()
    }

    pub fn follower_count(&self) -> usize {
        self.followers.len()
    }

    pub fn follower_path(&self, k: usize) -> Vec<f64> {
        self.followers.get(k).cloned().unwrap_or_default()
    }

    pub fn velocity_error(&self, k: usize) -> Vec<f64> {
        self.errors.get(k).cloned().unwrap_or_default()
    }

    /// Agent-label pairs `[a, b, ...]` of the initial graph; label 0 is the leader.
    pub fn initial_edges(&self) -> Vec<u32> {
        self.initial_edges.clone()
    }

    pub fn summary(&self) -> String {
        self.summary.clone()
    }
}

/// Run a bundled case with its main gain replaced by `gain`, over `t_end`
/// seconds, starting each mass estimate at `estimate_fraction` of the true mass.
pub fn run_case(case: &str, gain: f64, t_end: f64, estimate_fraction: f64) -> Result<Simulation, String> {
    let text = scenario::bundled(case).ok_or_else(|| format!("unknown case `{case}`"))?;
    let mut sc = scenario::parse_scenario_str(text, case).map_err(|e| e.to_string())?;
    sc.controller.law = match sc.controller.law {
        ControlLaw::ConstantVelocity { .. } => ControlLaw::ConstantVelocity { gamma: gain },
        ControlLaw::VaryingVelocity { sign, .. } => ControlLaw::VaryingVelocity { alpha: gain, sign },
        ControlLaw::FullyDistributed { sign, gain_law, .. } => ControlLaw::FullyDistributed {
            gamma1: gain,
            gamma2: gain,
            sign,
            gain_law,
        },
    };
    let dt = sc.integration.dt;
    sc.integration.t_end = (t_end / dt).round() * dt;
    sc.leader = LeaderTrajectory::new(sc.leader.initial_position.clone(), sc.leader.motion.clone(), sc.integration.t_end)
        .map_err(|e| e.to_string())?;
    for f in &mut sc.followers {
        f.theta_hat0 = f.plant.true_params() * estimate_fraction;
    }
    sc.decimation = (sc.integration.steps().map_err(|e| e.to_string())? / 600).max(1) as usize;
    let log = engine::run(&sc).map_err(|e| e.to_string())?;
    Ok(flatten(&log))
}

fn flatten(log: &SimLog) -> Simulation {
    let xy = |q: &DVector<f64>| [q[0], q[1]];
    let mut followers = vec![Vec::new(); log.n];
    let mut leader = Vec::new();
    for s in &log.samples {
        leader.extend(xy(&s.leader_q));
        for (k, f) in s.followers.iter().enumerate() {
            followers[k].extend(xy(&f.q));
        }
    }
    let d = &log.diagnostics;
    let errors = (0..log.n)
        .map(|k| d.velocity_errors.iter().map(|row| row[k]).collect())
        .collect();
    let g = &log.initial_graph;
    let mut initial_edges = Vec::new();
    for (i, &a) in g.leader_adj().iter().enumerate() {
        if a {
            initial_edges.extend([0, i as u32 + 1]);
        }
    }
    for &(i, j) in g.follower_edges() {
        initial_edges.extend([i as u32 + 1, j as u32 + 1]);
    }
    let summary = format!(
        "final max velocity error {:.4e} m/s, edges added {}, initial edges lost {}, min distance {:.2} m, lambda_min(H0) {:.4}",
        log.final_max_velocity_error(),
        d.edges_added,
        d.initial_edges_lost,
        log.min_distance,
        log.gain_report.lambda_min_h0
    );
    Simulation {
        times: d.t.clone(),
        leader,
        followers,
        errors,
        initial_edges,
        summary,
    }
}

#[wasm_bindgen]
pub fn simulate(case: &str, gain: f64, t_end: f64, estimate_fraction: f64) -> Result<Simulation, JsError> {
    run_case(case, gain, t_end, estimate_fraction).map_err(|e| JsError::new(&e))
}

/// Proximity graph and topology-matrix spectrum for planar points.
#[wasm_bindgen]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    edges: Vec<u32>,
    reaches_all: bool,
}

#[wasm_bindgen]
impl Spectrum {
    /// Ascending eigenvalues of `L_F + diag(leader links)`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues.clone()
    }

    pub fn edges(&self) -> Vec<u32> {
        self.edges.clone()
    }

    pub fn reaches_all(&self) -> bool {
        self.reaches_all
    }
}

/// `xy` holds `[x, y]` pairs, leader first.
pub fn spectrum(xy: &[f64], radius: f64) -> Result<Spectrum, String> {
    if xy.len() < 4 || !xy.len().is_multiple_of(2) {
        return Err("need the leader and at least one follower as x, y pairs".into());
    }
    let pts: Vec<DVector<f64>> = xy.chunks(2).map(|c| DVector::from_vec(vec![c[0], c[1]])).collect();
    let g = topology::build_graph(&pts[0], &pts[1..], radius).map_err(|e| e.to_string())?;
    let mut eigenvalues = topology::sym_eigenvalues(&topology::matrices(&g).h).map_err(|e| e.to_string())?;
    eigenvalues.sort_by(f64::total_cmp);
    let mut edges = Vec::new();
    for (i, &a) in g.leader_adj().iter().enumerate() {
        if a {
            edges.extend([0, i as u32 + 1]);
        }
    }
    for &(i, j) in g.follower_edges() {
        edges.extend([i as u32 + 1, j as u32 + 1]);
    }
    Ok(Spectrum {
        eigenvalues,
        edges,
        reaches_all: topology::leader_reaches_all(&g),
    })
}

#[wasm_bindgen]
pub fn topology_spectrum(xy: Vec<f64>, radius: f64) -> Result<Spectrum, JsError> {
    spectrum(&xy, radius).map_err(|e| JsError::new(&e))
}
