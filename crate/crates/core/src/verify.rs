//! Seeded property suites behind `lagflock verify`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{self, Scenario};
use crate::error::Result;
use crate::plant::{EulerLagrange, Regressor, Spacecraft, SpacecraftParams, EARTH_MU};
use crate::potential::{PotentialSpec, Regime};
use crate::scenario;
use crate::topology::{self, ProximityGraph};

pub const DEFAULT_SEED: u64 = 0x5eed_f10c;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Matrices,
    Plant,
    Potential,
    Lyapunov,
    All,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "matrices" => Suite::Matrices,
            "plant" => Suite::Plant,
            "potential" => Suite::Potential,
            "lyapunov" => Suite::Lyapunov,
            "all" => Suite::All,
            other => return Err(format!("unknown suite `{other}` (matrices, plant, potential, lyapunov, all)")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// observed < tolerance
    Below,
    /// observed > tolerance
    Above,
    /// observed ≥ tolerance
    AtLeast,
    /// observed ≤ tolerance
    AtMost,
}

impl Relation {
    fn holds(self, observed: f64, tol: f64) -> bool {
        match self {
            Relation::Below => observed < tol,
            Relation::Above => observed > tol,
            Relation::AtLeast => observed >= tol,
            Relation::AtMost => observed <= tol,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Relation::Below => "<",
            Relation::Above => ">",
            Relation::AtLeast => ">=",
            Relation::AtMost => "<=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub relation: Relation,
    pub tolerance: f64,
    pub observed: f64,
    pub samples: usize,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.relation.holds(self.observed, self.tolerance)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, suite: &'static str, name: &str, relation: Relation, tolerance: f64, observed: f64, samples: usize) {
        self.checks.push(Check {
            suite,
            name: name.to_string(),
            relation,
            tolerance,
            observed,
            samples,
        });
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<10} {:<34} observed {:>12.4e} {} {:<9.1e} (n = {})",
                if c.passed() { "PASS" } else { "FAIL" },
                c.suite,
                c.name,
                c.observed,
                c.relation.symbol(),
                c.tolerance,
                c.samples
            )?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed()).count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

pub fn verify(suite: Suite, seed: u64) -> Result<Report> {
    let mut report = Report::default();
    let all = suite == Suite::All;
    if all || suite == Suite::Matrices {
        matrices(&mut report, seed)?;
    }
    if all || suite == Suite::Plant {
        plant(&mut report, seed)?;
    }
    if all || suite == Suite::Potential {
        potential(&mut report, seed)?;
    }
    if all || suite == Suite::Lyapunov {
        lyapunov(&mut report)?;
    }
    Ok(report)
}

fn random_positions(rng: &mut ChaCha8Rng, count: usize, extent: f64) -> Vec<DVector<f64>> {
    (0..count)
        .map(|_| DVector::from_fn(3, |_, _| rng.gen_range(-extent..extent)))
        .collect()
}

fn random_graph(rng: &mut ChaCha8Rng) -> Result<ProximityGraph> {
    let n = rng.gen_range(2..=9);
    let pts = random_positions(rng, n + 1, 220.0);
    topology::build_graph(&pts[0], &pts[1..], 200.0)
}

/// Laplacian factorisation together with definiteness and subgraph monotonicity of H on seeded random graphs.
pub fn matrices(report: &mut Report, seed: u64) -> Result<()> {
    const S: &str = "matrices";
    const WANT: usize = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut factor_err = 0i64;
    let mut generated = 0;
    let mut pd_min = f64::INFINITY;
    let mut reachable = 0;
    let mut eig_diff = 0.0_f64;
    let mut perm_diff = 0.0_f64;
    let mut attempts = 0;
    while reachable < WANT && attempts < 100 * WANT {
        attempts += 1;
        let g = random_graph(&mut rng)?;
        let m = topology::matrices(&g);
        generated += 1;
        let dd = &m.incidence * m.incidence.transpose();
        factor_err = factor_err.max((&m.laplacian - dd).abs().max());
        if !topology::leader_reaches_all(&g) {
            continue;
        }
        reachable += 1;
        let ev = topology::sym_eigenvalues(&m.h)?;
        pd_min = pd_min.min(ev.iter().copied().fold(f64::INFINITY, f64::min));
        let mut mine = ev.clone();
        mine.sort_by(f64::total_cmp);
        let mut reference: Vec<f64> = m.h.clone().symmetric_eigenvalues().iter().copied().collect();
        reference.sort_by(f64::total_cmp);
        for (a, b) in mine.iter().zip(&reference) {
            eig_diff = eig_diff.max((a - b).abs());
        }
        let mut perm: Vec<usize> = (0..g.n()).collect();
        perm.shuffle(&mut rng);
        let pg = permuted(&g, &perm)?;
        let mut pev = topology::sym_eigenvalues(&topology::matrices(&pg).h)?;
        pev.sort_by(f64::total_cmp);
        for (a, b) in mine.iter().zip(&pev) {
            perm_diff = perm_diff.max((a - b).abs());
        }
    }
    report.push(S, "laplacian_equals_incidence_product", Relation::AtMost, 0.0, factor_err as f64, generated);
    report.push(S, "h_positive_definite_when_reachable", Relation::Above, 1e-10, pd_min, reachable);
    report.push(S, "jacobi_vs_reference_eigenvalues", Relation::Below, 1e-9, eig_diff, reachable);
    report.push(S, "h_spectrum_relabel_invariance", Relation::Below, 1e-9, perm_diff, reachable);

    let mut mono_min = f64::INFINITY;
    let mut subgraph_ok = true;
    for _ in 0..WANT {
        let b = random_graph(&mut rng)?;
        let edges: Vec<_> = b.follower_edges().iter().copied().filter(|_| rng.gen_bool(0.6)).collect();
        let leader: Vec<bool> = b.leader_adj().iter().map(|&x| x && rng.gen_bool(0.6)).collect();
        let a = ProximityGraph::from_parts(b.n(), edges, leader, b.radius())?;
        subgraph_ok &= topology::is_subgraph(&a, &b)?;
        let diff: DMatrix<f64> = topology::matrices(&b).h - topology::matrices(&a).h;
        mono_min = mono_min.min(topology::min_eig_sym(&diff)?);
    }
    report.push(S, "h_monotone_under_edge_addition", Relation::AtLeast, -1e-10, mono_min, WANT);
    report.push(S, "subgraph_relation_detected", Relation::Above, 0.5, f64::from(u8::from(subgraph_ok)), WANT);
    Ok(())
}

fn permuted(g: &ProximityGraph, perm: &[usize]) -> Result<ProximityGraph> {
    let edges = g.follower_edges().iter().map(|&(i, j)| (perm[i], perm[j]));
    let mut leader = vec![false; g.n()];
    for (i, &a) in g.leader_adj().iter().enumerate() {
        leader[perm[i]] = a;
    }
    ProximityGraph::from_parts(g.n(), edges, leader, g.radius())
}

/// Skew-symmetry and linear parameterisation of the spacecraft model.
pub fn plant(report: &mut Report, seed: u64) -> Result<()> {
    const S: &str = "plant";
    const N: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0001);
    let mut skew = 0.0_f64;
    let mut lin = 0.0_f64;
    let mut mass_sym = 0.0_f64;
    for _ in 0..N {
        let mass = rng.gen_range(1.0..500.0);
        let r0 = rng.gen_range(6.6e6..4.3e7);
        let craft = Spacecraft::new(SpacecraftParams::new(mass, r0, EARTH_MU)?);
        let v = |rng: &mut ChaCha8Rng, s: f64| DVector::from_fn(3, |_, _| rng.gen_range(-s..s));
        let (q, qd, s, x, y) = (v(&mut rng, 5e3), v(&mut rng, 10.0), v(&mut rng, 10.0), v(&mut rng, 1.0), v(&mut rng, 10.0));
        let c = craft.coriolis(&q, &qd);
        let ss = s.norm_squared();
        skew = skew.max((s.transpose() * &c * &s)[0].abs() / ss);
        let lhs = craft.lhs(&q, &qd, &x, &y)?;
        let ytheta = craft.regressor(&q, &qd, &x, &y)? * craft.true_params();
        lin = lin.max((ytheta - &lhs).norm() / (1.0 + lhs.norm()));
        let m = craft.mass_matrix(&q);
        mass_sym = mass_sym.max((&m - m.transpose()).abs().max());
    }
    report.push(S, "skew_symmetry_sCs_over_s2", Relation::Below, 1e-10, skew, N);
    report.push(S, "regressor_residual_relative", Relation::Below, 1e-9, lin, N);
    report.push(S, "mass_matrix_asymmetry", Relation::AtMost, 0.0, mass_sym, N);
    Ok(())
}

/// Antisymmetry, radiality, the equilibrium and finite-difference consistency.
pub fn potential(report: &mut Report, seed: u64) -> Result<()> {
    const S: &str = "potential";
    let spec = PotentialSpec::new(200.0, 80.0).map_err(crate::Error::Config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0002);
    let mut antisym = 0.0_f64;
    let mut radial = 0.0_f64;
    let mut samples = 0;
    for _ in 0..500 {
        let qi = DVector::from_fn(3, |_, _| rng.gen_range(-300.0..300.0));
        let qj = DVector::from_fn(3, |_, _| rng.gen_range(-300.0..300.0));
        for regime in [Regime::Connected, Regime::Unconnected] {
            let (Ok(a), Ok(b)) = (spec.gradient(&qi, &qj, regime), spec.gradient(&qj, &qi, regime)) else {
                continue;
            };
            samples += 1;
            antisym = antisym.max((&a + &b).abs().max());
            let diff = &qi - &qj;
            let cross = diff.cross(&a);
            radial = radial.max(cross.norm() / (diff.norm() * a.norm()).max(f64::MIN_POSITIVE));
        }
    }
    report.push(S, "gradient_antisymmetry", Relation::AtMost, 0.0, antisym, samples);
    report.push(S, "gradient_radiality", Relation::Below, 1e-12, radial, samples);

    let mut at_min = 0.0_f64;
    let origin = DVector::zeros(3);
    for regime in [Regime::Connected, Regime::Unconnected] {
        for k in 0..8 {
            let th = k as f64 * 0.7;
            let q = DVector::from_vec(vec![80.0 * th.cos(), 80.0 * th.sin(), 0.0]);
            let g = spec.gradient(&q, &origin, regime).map_err(|e| crate::Error::Contract(e.to_string()))?;
            at_min = at_min.max(g.norm());
        }
    }
    report.push(S, "gradient_norm_at_desired_distance", Relation::Below, 1e-14, at_min, 16);

    let h = 1e-4;
    for (regime, label, lo, hi) in [
        (Regime::Connected, "fd_relative_error_connected", 5.0, 195.0),
        (Regime::Unconnected, "fd_relative_error_unconnected", 5.0, 195.0),
    ] {
        let mut worst = 0.0_f64;
        for k in 0..20 {
            let mut d = lo + (hi - lo) * (k as f64 + 0.5) / 20.0;
            // keep the stencil off the desired distance, where the slope vanishes
            if (d - 80.0).abs() < 1.0 {
                d += 3.0;
            }
            let f = |x: f64| spec.value_at(x, regime).map_err(|e| crate::Error::Contract(e.to_string()));
            let fd = (f(d + h)? - f(d - h)?) / (2.0 * h);
            let g = spec.radial_derivative(d, regime).map_err(|e| crate::Error::Contract(e.to_string()))?;
            worst = worst.max(((fd - g) / g).abs());
        }
        report.push(S, label, Relation::Below, 1e-4, worst, 20);
    }
    Ok(())
}

/// Composite function along the bundled constant-velocity scenario, and at a global equilibrium.
pub fn lyapunov(report: &mut Report) -> Result<()> {
    const S: &str = "lyapunov";
    let case = scenario::parse_scenario_str(scenario::CASE1, "case1")?;
    let log = engine::run(&case)?;
    let d = &log.diagnostics;
    report.push(S, "case1_max_step_increase", Relation::Below, 1e-6, d.max_total_increase(), d.total.len());
    report.push(S, "case1_min_distance", Relation::AtLeast, 1.0, log.min_distance, d.total.len());
    report.push(S, "case1_cap_engagements", Relation::AtMost, 0.0, log.cap_engagements as f64, d.total.len());
    let lambda0 = d.lambda_min_h[0];
    let floor = d.lambda_min_h.iter().copied().fold(f64::INFINITY, f64::min) - lambda0;
    report.push(S, "case1_lambda_min_h_not_below_initial", Relation::AtLeast, -1e-9, floor, d.total.len());

    let eq = equilibrium_scenario(&case)?;
    let log = engine::run(&eq)?;
    let d = &log.diagnostics;
    let spread = d.total.iter().map(|v| (v - d.total[0]).abs()).fold(0.0, f64::max);
    let verr = d.velocity_errors.iter().flatten().copied().fold(0.0, f64::max);
    report.push(S, "equilibrium_v_drift", Relation::Below, 1e-9, spread, d.total.len());
    report.push(S, "equilibrium_velocity_error", Relation::Below, 1e-9, verr, d.total.len());
    Ok(())
}

/// One follower resting at the desired distance from a constant-velocity leader, fully matched.
fn equilibrium_scenario(base: &Scenario) -> Result<Scenario> {
    let mut s = base.clone();
    s.name = "equilibrium".into();
    let velocity = match &base.leader.motion {
        engine::LeaderMotion::ConstantVelocity { velocity } => velocity.clone(),
        _ => unreachable!("bundled case 1 has a constant-velocity leader"),
    };
    let mut f = s.followers[0].clone();
    f.q0 = &base.leader.initial_position + DVector::from_vec(vec![80.0, 0.0, 0.0]);
    f.qd0 = velocity.clone();
    f.v0 = velocity;
    f.theta_hat0 = f.plant.true_params();
    s.followers = vec![f];
    s.integration.t_end = 20.0;
    s.leader = engine::LeaderTrajectory::new(base.leader.initial_position.clone(), base.leader.motion.clone(), 20.0)?;
    s.validate()?;
    Ok(s)
}
