//! Euler-Arnold flow of the body velocity and a heuristic blow-up probe.

use std::cell::Cell;

use nalgebra::{Vector3, U3};
use ode_solvers::dop_shared::{IntegrationError, OutputType};
use ode_solvers::{Dopri5, System};
use serde::Serialize;

use crate::lie::LieAlgebra3;
use crate::metric::MetricForm;
use crate::{Error, Result};

/// Speed threshold above which a run counts as escaping.
pub const BLOWUP_SPEED: f64 = 1e12;
/// Step collapse, relative to the horizon, that must accompany the escape.
pub const BLOWUP_STEP: f64 = 1e-14;
/// Radius of the initial velocities used by the direction sweep.
pub const SWEEP_RADIUS: f64 = 0.25;
pub const SWEEP_DIRECTIONS: usize = 64;
/// Runs are cut here to stay clear of floating-point overflow.
const OVERFLOW_GUARD: f64 = 1e150;

/// `v' = g^-1 ad_v^T g v`, the geodesic equation in body velocity.
pub fn euler_arnold_rhs(a: &LieAlgebra3, g: &MetricForm, v: &Vector3<f64>) -> Vector3<f64> {
    g.inverse() * a.ad(v).transpose() * g.g * v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    BoundedToHorizon,
    BlowupDetected,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeVerdict {
    pub outcome: Outcome,
    pub v0: [f64; 3],
    pub horizon: f64,
    pub max_abs_v: f64,
    /// signed: negative when the escape happens in backward time
    pub blowup_t: Option<f64>,
    pub t_forward: f64,
    pub t_backward: f64,
    pub energy_drift: f64,
    pub note: Option<String>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Sample {
    pub t: f64,
    pub v: [f64; 3],
    pub energy: f64,
}

#[derive(Default)]
struct Tracker {
    last_t: Cell<f64>,
    last_step: Cell<f64>,
    max_v: Cell<f64>,
    escaped: Cell<bool>,
}

struct Flow<'a> {
    a: &'a LieAlgebra3,
    g: &'a MetricForm,
    ginv: nalgebra::Matrix3<f64>,
    sign: f64,
    collapse: f64,
    track: &'a Tracker,
}

type State = ode_solvers::OVector<f64, U3>;

impl System<f64, State> for Flow<'_> {
    fn system(&self, _t: f64, y: &State, dy: &mut State) {
        let v = Vector3::new(y[0], y[1], y[2]);
        let r = self.ginv * self.a.ad(&v).transpose() * self.g.g * v * self.sign;
        dy.copy_from(&r);
    }
    fn solout(&mut self, t: f64, y: &State, _dy: &State) -> bool {
        let tr = self.track;
        tr.last_step.set((t - tr.last_t.get()).abs());
        tr.last_t.set(t);
        let n = y.norm();
        tr.max_v.set(tr.max_v.get().max(n));
        // fast but smooth growth (exponential, say) keeps going; only a collapsing step stops
        if n > BLOWUP_SPEED && tr.last_step.get() < self.collapse {
            tr.escaped.set(true);
            return true;
        }
        !n.is_finite() || n > OVERFLOW_GUARD
    }
}

struct Leg {
    escaped: bool,
    t_end: f64,
    max_v: f64,
    samples: Vec<Sample>,
    error: Option<String>,
}

fn run_leg(a: &LieAlgebra3, g: &MetricForm, v0: &Vector3<f64>, horizon: f64, tol: f64, sign: f64) -> Leg {
    let track = Tracker::default();
    track.last_step.set(f64::INFINITY);
    track.max_v.set(v0.norm());
    let flow = Flow { a, g, ginv: g.inverse(), sign, collapse: BLOWUP_STEP * horizon, track: &track };
    let mut solver = Dopri5::new(flow, 0.0, horizon, horizon, State::from(*v0), tol, tol * 1e-3);
    solver.set_output(OutputType::Sparse);
    let res = solver.integrate();
    let mut samples: Vec<Sample> = solver
        .x_out()
        .iter()
        .zip(solver.y_out())
        .map(|(t, y)| {
            let v = Vector3::new(y[0], y[1], y[2]);
            Sample { t: t * sign, v: v.into(), energy: g.inner(&v, &v) }
        })
        .collect();
    // the integrator keeps its last state when the stop hook fires
    let t_end = samples.last().map(|s| s.t.abs()).unwrap_or(0.0);
    if samples.is_empty() {
        samples.push(Sample { t: 0.0, v: (*v0).into(), energy: g.inner(v0, v0) });
    }
    let error = match res {
        Ok(_) => None,
        Err(IntegrationError::StepSizeUnderflow { x }) => Some(format!("step size underflow at t = {x}")),
        Err(IntegrationError::MaxNumStepReached { x, n_step }) => Some(format!("step budget {n_step} exhausted at t = {x}")),
        Err(IntegrationError::StiffnessDetected { x }) => Some(format!("stiffness detected at t = {x}")),
    };
    Leg { escaped: track.escaped.get(), t_end, max_v: track.max_v.get(), samples, error }
}

pub fn check_tolerance(tol: f64) -> Result<()> {
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(Error::ToleranceUnachievable(tol));
    }
    Ok(())
}

/// Integrates forward and backward to `horizon` from `v0` and returns the verdict and the
/// trajectory samples (backward leg first, in increasing `t`).
pub fn integrate(a: &LieAlgebra3, g: &MetricForm, v0: &Vector3<f64>, horizon: f64, tol: f64) -> Result<(ProbeVerdict, Vec<Sample>)> {
    check_tolerance(tol)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidInput(format!("horizon {horizon} must be positive")));
    }
    let e0 = g.inner(v0, v0);
    let fwd = run_leg(a, g, v0, horizon, tol, 1.0);
    let bwd = run_leg(a, g, v0, horizon, tol, -1.0);
    let leg_blows = |l: &Leg| l.escaped;
    let cut = |l: &Leg| !l.escaped && l.max_v > OVERFLOW_GUARD;
    let (outcome, blowup_t, note) = if leg_blows(&fwd) || leg_blows(&bwd) {
        let t = if leg_blows(&fwd) { fwd.t_end } else { -bwd.t_end };
        (Outcome::BlowupDetected, Some(t), None)
    } else if cut(&fwd) || cut(&bwd) {
        (Outcome::Inconclusive, None, Some("speed grew past the overflow guard without step collapse".to_string()))
    } else if fwd.error.is_some() || bwd.error.is_some() {
        (Outcome::Inconclusive, None, fwd.error.clone().or(bwd.error.clone()))
    } else {
        (Outcome::BoundedToHorizon, None, None)
    };
    let drift = fwd
        .samples
        .iter()
        .chain(&bwd.samples)
        .filter(|s| s.v.iter().all(|x| x.abs() < 1e6))
        .map(|s| (s.energy - e0).abs())
        .fold(0.0, f64::max);
    let mut traj: Vec<Sample> = bwd.samples.iter().rev().filter(|s| s.t != 0.0).copied().collect();
    traj.extend(fwd.samples.iter().copied());
    Ok((
        ProbeVerdict {
            outcome,
            v0: (*v0).into(),
            horizon,
            max_abs_v: fwd.max_v.max(bwd.max_v),
            blowup_t,
            t_forward: fwd.t_end,
            t_backward: bwd.t_end,
            energy_drift: drift,
            note,
        },
        traj,
    ))
}

/// Roughly uniform unit directions (Fibonacci lattice on the sphere).
pub fn sweep_directions(n: usize) -> Vec<Vector3<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let th = golden * i as f64;
            Vector3::new(r * th.cos(), r * th.sin(), z)
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub overall: Outcome,
    pub blowup_directions: usize,
    pub inconclusive_directions: usize,
    pub verdicts: Vec<ProbeVerdict>,
}

pub fn sweep(a: &LieAlgebra3, g: &MetricForm, horizon: f64, tol: f64) -> Result<SweepReport> {
    use rayon::prelude::*;
    check_tolerance(tol)?;
    let verdicts: Vec<ProbeVerdict> = sweep_directions(SWEEP_DIRECTIONS)
        .par_iter()
        .map(|d| integrate(a, g, &(d * SWEEP_RADIUS), horizon, tol).map(|r| r.0))
        .collect::<Result<_>>()?;
    let blow = verdicts.iter().filter(|v| v.outcome == Outcome::BlowupDetected).count();
    let inc = verdicts.iter().filter(|v| v.outcome == Outcome::Inconclusive).count();
    let overall = if blow > 0 {
        Outcome::BlowupDetected
    } else if inc > 0 {
        Outcome::Inconclusive
    } else {
        Outcome::BoundedToHorizon
    };
    Ok(SweepReport { overall, blowup_directions: blow, inconclusive_directions: inc, verdicts })
}

pub fn trajectory_csv(samples: &[Sample]) -> String {
    let mut s = String::from("t,v1,v2,v3,energy\n");
    for p in samples {
        s.push_str(&format!("{:e},{:e},{:e},{:e},{:e}\n", p.t, p.v[0], p.v[1], p.v[2], p.energy));
    }
    s
}
