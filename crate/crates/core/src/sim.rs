//! Fixed-step RK4 integration of the closed loop and classification of
//! where the outputs end up.

use std::io::{self, Write};

use thiserror::Error;

use crate::edgefn::EdgeFnError;
use crate::network::{NetworkError, NetworkSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation setting: {0}")]
    InvalidConfig(String),
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("trajectory has not settled (outcome: {0})")]
    NotSteady(&'static str),
    #[error("empty trajectory")]
    Empty,
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Keep every `record_every`-th step (the final state is always kept).
    pub record_every: usize,
    pub u_tol: f64,
    /// Time span over which the input must stay below `u_tol`.
    pub window: f64,
    pub blowup_threshold: f64,
    pub cluster_tol: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 50.0,
            record_every: 10,
            u_tol: 1e-6,
            window: 1.0,
            blowup_threshold: 1e6,
            cluster_tol: 1e-3,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        for (name, v) in [
            ("dt", self.dt),
            ("t_end", self.t_end),
            ("u_tol", self.u_tol),
            ("window", self.window),
            ("blowup_threshold", self.blowup_threshold),
            ("cluster_tol", self.cluster_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".into());
        }
        if self.dt >= self.window {
            return bad(format!(
                "dt = {} must be below window = {}",
                self.dt, self.window
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Reached `t_end`.
    EndTime,
    /// Input stayed below `u_tol` for a whole window.
    Steady,
    /// Some output exceeded `blowup_threshold` in magnitude.
    Blowup,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Node outputs `y = x` at each recorded time.
    pub states: Vec<Vec<f64>>,
    /// Sup-norm of the effective input over the last step, see [`simulate`].
    pub final_u_norm: f64,
    pub stop: StopReason,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn blew_up(&self) -> bool {
        self.stop == StopReason::Blowup
    }

    /// CSV with header `t,y1,...,yn` and 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let n = self.states.first().map_or(0, Vec::len);
        write!(out, "t")?;
        for i in 1..=n {
            write!(out, ",y{i}")?;
        }
        writeln!(out)?;
        for (t, y) in self.times.iter().zip(&self.states) {
            write!(out, "{t:.16e}")?;
            for v in y {
                write!(out, ",{v:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

struct Rk4 {
    k: [Vec<f64>; 4],
    stage: Vec<f64>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            stage: vec![0.0; n],
        }
    }

    /// Advances `x` by one step and leaves the averaged slope in `k[0]`.
    fn step(&mut self, net: &NetworkSystem, x: &mut [f64], dt: f64) {
        let [k1, k2, k3, k4] = &mut self.k;
        net.vector_field_into(x, k1);
        for ((s, xi), ki) in self.stage.iter_mut().zip(x.iter()).zip(k1.iter()) {
            *s = xi + 0.5 * dt * ki;
        }
        net.vector_field_into(&self.stage, k2);
        for ((s, xi), ki) in self.stage.iter_mut().zip(x.iter()).zip(k2.iter()) {
            *s = xi + 0.5 * dt * ki;
        }
        net.vector_field_into(&self.stage, k3);
        for ((s, xi), ki) in self.stage.iter_mut().zip(x.iter()).zip(k3.iter()) {
            *s = xi + dt * ki;
        }
        net.vector_field_into(&self.stage, k4);
        for i in 0..x.len() {
            let slope = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
            k1[i] = slope;
            x[i] += dt * slope;
        }
    }
}

/// Integrates the network from `x0` with classical RK4.
///
/// Steadiness is judged on the effective input of each step,
/// `gamma^{-1}((x(t+dt) - x(t)) / dt)`, rather than on `u` at the step
/// points. With non-Lipschitz edges such as `|zeta|^alpha` the stepper can
/// lock onto a state whose pointwise input is far from zero while the RK4
/// stages cancel exactly; the increment tells the truth about motion.
pub fn simulate(net: &NetworkSystem, x0: &[f64], cfg: &SimConfig) -> Result<Trajectory, SimError> {
    cfg.validate()?;
    let n = net.node_count();
    if x0.len() != n {
        return Err(NetworkError::DimensionMismatch {
            what: "initial state",
            expected: n,
            got: x0.len(),
        }
        .into());
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(SimError::NonFiniteState { t: 0.0 });
    }

    let mut x = x0.to_vec();
    let mut times = vec![0.0];
    let mut states = vec![x.clone()];
    let mut u_norm = sup_norm(&net.coupling_input(&x)?);

    let steps = (cfg.t_end / cfg.dt - 1e-9).ceil() as u64;
    let window_steps = (cfg.window / cfg.dt - 1e-9).ceil() as u64;
    let mut rk = Rk4::new(n);
    let mut quiet_steps = 0u64;
    let mut stop = StopReason::EndTime;

    for step in 1..=steps {
        rk.step(net, &mut x, cfg.dt);
        let t = step as f64 * cfg.dt;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFiniteState { t });
        }
        u_norm = net
            .node_dynamics()
            .iter()
            .zip(&rk.k[0])
            .map(|(d, &v)| d.input_for_drift(v).abs())
            .fold(0.0, f64::max);
        quiet_steps = if u_norm < cfg.u_tol {
            quiet_steps + 1
        } else {
            0
        };

        if x.iter().any(|v| v.abs() > cfg.blowup_threshold) {
            stop = StopReason::Blowup;
        } else if quiet_steps >= window_steps {
            stop = StopReason::Steady;
        }
        let last = stop != StopReason::EndTime || step == steps;
        if last || step % cfg.record_every as u64 == 0 {
            times.push(t);
            states.push(x.clone());
        }
        if stop != StopReason::EndTime {
            break;
        }
    }
    log::debug!(
        "simulation stopped at t = {} ({:?}), |u| = {:e}",
        times.last().unwrap(),
        stop,
        u_norm
    );
    Ok(Trajectory {
        times,
        states,
        final_u_norm: u_norm,
        stop,
    })
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// A group of nodes sharing (approximately) one output value.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub nodes: Vec<usize>,
    /// Mean output of the members.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OutcomeClass {
    Agreement { value: f64 },
    Clustering { clusters: Vec<Cluster> },
    Divergence,
    Undecided,
}

impl OutcomeClass {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Agreement { .. } => "agreement",
            Self::Clustering { .. } => "clustering",
            Self::Divergence => "divergence",
            Self::Undecided => "undecided",
        }
    }

    pub fn cluster_count(&self) -> Option<usize> {
        match self {
            Self::Agreement { .. } => Some(1),
            Self::Clustering { clusters } => Some(clusters.len()),
            _ => None,
        }
    }

    pub fn is_settled(&self) -> bool {
        matches!(self, Self::Agreement { .. } | Self::Clustering { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub class: OutcomeClass,
    pub steady_tension: Option<Vec<f64>>,
}

/// Groups values by single linkage: neighbors in sorted order closer than
/// `tol` share a cluster. Clusters come out in ascending value order.
pub fn group_values(values: &[f64], tol: f64) -> Vec<Cluster> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    for i in order {
        if clusters.is_empty() || values[i] - prev > tol {
            clusters.push(Vec::new());
        }
        clusters.last_mut().unwrap().push(i);
        prev = values[i];
    }
    clusters
        .into_iter()
        .map(|mut nodes| {
            let value = nodes.iter().map(|&i| values[i]).sum::<f64>() / nodes.len() as f64;
            nodes.sort_unstable();
            Cluster { nodes, value }
        })
        .collect()
}

fn spread(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    hi - lo
}

pub fn classify_outcome(tr: &Trajectory, cfg: &SimConfig) -> Result<Outcome, SimError> {
    let y = tr.final_state();
    if y.is_empty() {
        return Err(SimError::Empty);
    }
    let class = if tr.blew_up() {
        OutcomeClass::Divergence
    } else if spread(y) < cfg.cluster_tol {
        OutcomeClass::Agreement {
            value: y.iter().sum::<f64>() / y.len() as f64,
        }
    } else if tr.final_u_norm < cfg.u_tol {
        OutcomeClass::Clustering {
            clusters: group_values(y, cfg.cluster_tol),
        }
    } else {
        OutcomeClass::Undecided
    };
    Ok(Outcome {
        class,
        steady_tension: None,
    })
}

/// Final tensions of a settled run and whether each lies in its edge's
/// equilibria interval (`None` when that set is not an interval).
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyTension {
    pub zeta: Vec<f64>,
    pub in_equilibria: Vec<Option<bool>>,
}

pub fn steady_tension(
    net: &NetworkSystem,
    tr: &Trajectory,
    cfg: &SimConfig,
) -> Result<SteadyTension, SimError> {
    let outcome = classify_outcome(tr, cfg)?;
    if !outcome.class.is_settled() {
        return Err(SimError::NotSteady(outcome.class.label()));
    }
    let zeta = net.tension(tr.final_state())?;
    let in_equilibria = net
        .edge_functions()
        .iter()
        .zip(&zeta)
        .map(|(f, &z)| match f.equilibria() {
            Ok(i) => Some(i.contains(z, cfg.cluster_tol)),
            Err(EdgeFnError::NotAnInterval) => None,
            Err(_) => None,
        })
        .collect();
    Ok(SteadyTension {
        zeta,
        in_equilibria,
    })
}

/// Classifies the run and attaches the final tensions when it settled.
pub fn outcome(net: &NetworkSystem, tr: &Trajectory, cfg: &SimConfig) -> Result<Outcome, SimError> {
    let mut out = classify_outcome(tr, cfg)?;
    if out.class.is_settled() {
        out.steady_tension = Some(net.tension(tr.final_state())?);
    }
    Ok(out)
}

/// `sum_i (x_i - y_ref_i)^2 / 2` at every recorded sample.
pub fn storage_profile(tr: &Trajectory, y_ref: &[f64]) -> Vec<f64> {
    tr.states
        .iter()
        .map(|x| {
            x.iter()
                .zip(y_ref)
                .map(|(&xi, &yi)| crate::nodes::storage(xi, yi))
                .sum()
        })
        .collect()
}

/// Total edge cocontent at every recorded sample.
pub fn cocontent_profile(net: &NetworkSystem, tr: &Trajectory) -> Vec<f64> {
    tr.states
        .iter()
        .map(|x| {
            let zeta = net.graph().tension_of(x);
            net.total_cocontent(&zeta)
                .expect("dimensions fixed by the network")
        })
        .collect()
}

/// Largest increase between consecutive entries (0 for a non-increasing
/// sequence).
pub fn max_increase(values: &[f64]) -> f64 {
    values.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}
