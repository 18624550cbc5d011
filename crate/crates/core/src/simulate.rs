//! Closed-loop simulation: frozen discrete loops and the nonlinear
//! unbalanced disk under the scheduled controller.
//!
//! The nonlinear plant is integrated with classical fourth-order
//! Runge-Kutta on `Ts / substeps`; the controller runs once per `Ts` and
//! its output is held between samples.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmark::{sinc, DiskParameters};
use crate::ctrlparam::ControllerParameterization;
use crate::error::{Error, Result};
use crate::ltikit::StateSpaceModel;
use crate::realize::{realize, ScheduledFilter};

/// Signals larger than this abort the run.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// Integrator refinement per control period.
pub const DEFAULT_SUBSTEPS: usize = 50;

/// A scalar signal of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Signal {
    Constant { value: f64 },
    /// `levels[i]` on `[i * segment, (i + 1) * segment)`, last level afterwards.
    Staircase { levels: Vec<f64>, segment: f64 },
    /// From `from` towards `to` at `rate` (units per second), then held.
    Ramp { from: f64, to: f64, rate: f64, start: f64 },
    /// Zero-order-held samples at `ts`, last value afterwards.
    Samples { ts: f64, values: Vec<f64> },
}

impl Signal {
    pub fn zero() -> Self {
        Signal::Constant { value: 0.0 }
    }

    pub fn at(&self, t: f64) -> f64 {
        match self {
            Signal::Constant { value } => *value,
            Signal::Staircase { levels, segment } => {
                let i = (t / segment).floor().max(0.0) as usize;
                levels.get(i).or(levels.last()).copied().unwrap_or(0.0)
            }
            Signal::Ramp { from, to, rate, start } => {
                let travel = (rate * (t - start).max(0.0)).min((to - from).abs());
                from + travel * (to - from).signum()
            }
            Signal::Samples { ts, values } => {
                let i = (t / ts + 1e-9).floor().max(0.0) as usize;
                values.get(i).or(values.last()).copied().unwrap_or(0.0)
            }
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        let bad = |why: &str| Err(Error::InvalidScenario(format!("{name}: {why}")));
        match self {
            Signal::Constant { value } if !value.is_finite() => bad("non-finite value"),
            Signal::Staircase { levels, segment } => {
                if levels.is_empty() || !(*segment > 0.0) {
                    bad("staircase needs levels and a positive segment length")
                } else if levels.iter().any(|l| !l.is_finite()) {
                    bad("non-finite level")
                } else {
                    Ok(())
                }
            }
            Signal::Ramp { from, to, rate, start } => {
                if !(*rate > 0.0) || ![from, to, start].iter().all(|v| v.is_finite()) {
                    bad("ramp needs finite end points and a positive rate")
                } else {
                    Ok(())
                }
            }
            Signal::Samples { ts, values } => {
                if !(*ts > 0.0) || values.iter().any(|v| !v.is_finite()) {
                    bad("samples need a positive period and finite values")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    /// Reference angle (rad).
    pub reference: Signal,
    /// Input disturbance added to the control voltage.
    #[serde(default = "Signal::zero")]
    pub disturbance: Signal,
    pub duration: f64,
    #[serde(rename = "Ts")]
    pub ts: f64,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    /// `[theta, theta', I]` at `t = 0`.
    #[serde(default)]
    pub initial_state: [f64; 3],
    /// Feed this constant to the controller instead of `sinc(theta)`.
    #[serde(default)]
    pub scheduling_override: Option<f64>,
}

fn default_substeps() -> usize {
    DEFAULT_SUBSTEPS
}

impl SimScenario {
    pub fn new(reference: Signal, duration: f64, ts: f64) -> Self {
        SimScenario {
            reference,
            disturbance: Signal::zero(),
            duration,
            ts,
            substeps: DEFAULT_SUBSTEPS,
            initial_state: [0.0; 3],
            scheduling_override: None,
        }
    }

    /// Setpoints `0, pi/4, pi/2, pi/4, 0`, four seconds each.
    pub fn staircase(ts: f64) -> Self {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
        let levels = vec![0.0, FRAC_PI_4, FRAC_PI_2, FRAC_PI_4, 0.0];
        SimScenario::new(Signal::Staircase { levels, segment: 4.0 }, 20.0, ts)
    }

    /// Reference ramp from 0 to `pi/2` at `rate` rad/s, then held for 5 s.
    pub fn slow_ramp(rate: f64, ts: f64) -> Self {
        let to = std::f64::consts::FRAC_PI_2;
        let reference = Signal::Ramp {
            from: 0.0,
            to,
            rate,
            start: 1.0,
        };
        SimScenario::new(reference, 1.0 + to / rate + 5.0, ts)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidScenario(format!("duration {}", self.duration)));
        }
        if !(self.ts > 0.0 && self.ts.is_finite()) {
            return Err(Error::InvalidScenario(format!("sample time {}", self.ts)));
        }
        if self.substeps == 0 {
            return Err(Error::InvalidScenario("substeps must be at least 1".into()));
        }
        if self.initial_state.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidScenario("non-finite initial state".into()));
        }
        self.reference.validate("reference")?;
        self.disturbance.validate("disturbance")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let s: SimScenario = serde_json::from_str(&text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn samples(&self) -> usize {
        (self.duration / self.ts).round() as usize + 1
    }
}

/// Sampled closed-loop signals; `x` holds the plant state at each sample.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub e: Vec<f64>,
    pub p: Vec<f64>,
    pub x: Vec<Vec<f64>>,
}

impl SimResult {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn push(&mut self, t: f64, r: f64, y: f64, u: f64, p: f64, x: &[f64]) {
        self.t.push(t);
        self.r.push(r);
        self.y.push(y);
        self.u.push(u);
        self.e.push(r - y);
        self.p.push(p);
        self.x.push(x.to_vec());
    }

    /// Largest `|e|` over samples with `t0 <= t < t1`.
    pub fn max_abs_error(&self, t0: f64, t1: f64) -> f64 {
        self.t
            .iter()
            .zip(&self.e)
            .filter(|(t, _)| **t >= t0 - 1e-12 && **t < t1 - 1e-12)
            .map(|(_, e)| e.abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs<'a>(signal: impl IntoIterator<Item = &'a f64>) -> f64 {
        signal.into_iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let nx = self.x.first().map_or(0, |x| x.len());
        let mut header: Vec<String> = ["t", "r", "y", "u", "e", "p"].iter().map(|s| s.to_string()).collect();
        header.extend((0..nx).map(|i| format!("x{i}")));
        w.write_record(&header)?;
        for k in 0..self.len() {
            let mut row = vec![
                self.t[k].to_string(),
                self.r[k].to_string(),
                self.y[k].to_string(),
                self.u[k].to_string(),
                self.e[k].to_string(),
                self.p[k].to_string(),
            ];
            row.extend(self.x[k].iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

fn diverged(t: f64, values: &[f64]) -> Option<Error> {
    let m = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    (!(m <= DIVERGENCE_LIMIT)).then_some(Error::Divergence { time: t, magnitude: m })
}

/// Unit-step response of a frozen discrete loop `e = r - y`, `u = K e`.
pub fn simulate_frozen_step(
    plant: &StateSpaceModel,
    filter: &mut ScheduledFilter,
    p: f64,
    duration: f64,
) -> Result<SimResult> {
    simulate_frozen(plant, filter, p, &Signal::Constant { value: 1.0 }, duration)
}

/// Frozen discrete loop for an arbitrary reference.
pub fn simulate_frozen(
    plant: &StateSpaceModel,
    filter: &mut ScheduledFilter,
    p: f64,
    reference: &Signal,
    duration: f64,
) -> Result<SimResult> {
    let ts = match plant.domain.sample_time() {
        Some(ts) if (ts - filter.ts()).abs() <= 1e-12 * ts => ts,
        _ => {
            return Err(Error::DomainMismatch(format!(
                "plant is {}, controller runs at {} s",
                plant.domain,
                filter.ts()
            )))
        }
    };
    if plant.d != 0.0 {
        return Err(Error::Dimension("frozen loop needs a strictly proper plant".into()));
    }
    if !(duration > 0.0) {
        return Err(Error::InvalidScenario(format!("duration {duration}")));
    }
    reference.validate("reference")?;
    let steps = (duration / ts).round() as usize + 1;
    let mut x = nalgebra::DVector::zeros(plant.order());
    let mut out = SimResult::default();
    for k in 0..steps {
        let t = k as f64 * ts;
        let y = (&plant.c * &x)[0];
        let r = reference.at(t);
        let u = filter.step(r - y, p)?;
        out.push(t, r, y, u, p, x.as_slice());
        if let Some(err) = diverged(t, &[y, u]) {
            return Err(err);
        }
        x = &plant.a * &x + &plant.b * u;
    }
    Ok(out)
}

/// Right-hand side of the disk dynamics.
pub fn disk_dynamics(params: &DiskParameters, x: &[f64; 3], u: f64) -> [f64; 3] {
    let DiskParameters {
        k, r, l_ind, j, b, ..
    } = *params;
    [
        x[1],
        params.stiffness() * x[0].sin() - b / j * x[1] + k / j * x[2],
        -k / l_ind * x[1] - r / l_ind * x[2] + u / l_ind,
    ]
}

/// One classical Runge-Kutta step with `u` held.
pub fn rk4_step(params: &DiskParameters, x: &[f64; 3], u: f64, h: f64) -> [f64; 3] {
    let add = |a: &[f64; 3], b: &[f64; 3], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
    let k1 = disk_dynamics(params, x, u);
    let k2 = disk_dynamics(params, &add(x, &k1, h / 2.0), u);
    let k3 = disk_dynamics(params, &add(x, &k2, h / 2.0), u);
    let k4 = disk_dynamics(params, &add(x, &k3, h), u);
    std::array::from_fn(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Open-loop run with a prescribed input sequence (held per `ts`).
pub fn simulate_open_loop(
    params: &DiskParameters,
    x0: [f64; 3],
    input: &Signal,
    duration: f64,
    ts: f64,
    substeps: usize,
) -> Result<SimResult> {
    let mut scenario = SimScenario::new(Signal::zero(), duration, ts);
    scenario.disturbance = input.clone();
    scenario.substeps = substeps;
    scenario.initial_state = x0;
    run_nonlinear(params, None, &scenario)
}

/// Total stored energy relative to the hanging rest position:
/// kinetic, gravitational and magnetic.
pub fn disk_energy(params: &DiskParameters, x: &[f64; 3]) -> f64 {
    let potential = params.m * params.g * params.l_arm * (x[0].cos() + 1.0);
    0.5 * params.j * x[1] * x[1] + potential + 0.5 * params.l_ind * x[2] * x[2]
}

pub fn simulate_nonlinear(
    params: &DiskParameters,
    filter: &mut ScheduledFilter,
    scenario: &SimScenario,
) -> Result<SimResult> {
    if (scenario.ts - filter.ts()).abs() > 1e-12 * scenario.ts {
        return Err(Error::DomainMismatch(format!(
            "scenario runs at {} s, controller at {} s",
            scenario.ts,
            filter.ts()
        )));
    }
    run_nonlinear(params, Some(filter), scenario)
}

fn run_nonlinear(
    params: &DiskParameters,
    mut filter: Option<&mut ScheduledFilter>,
    scenario: &SimScenario,
) -> Result<SimResult> {
    params.validate()?;
    scenario.validate()?;
    let h = scenario.ts / scenario.substeps as f64;
    let mut x = scenario.initial_state;
    let mut out = SimResult::default();
    for k in 0..scenario.samples() {
        let t = k as f64 * scenario.ts;
        let r = scenario.reference.at(t);
        let y = x[0];
        let p = scenario.scheduling_override.unwrap_or_else(|| sinc(y));
        let mut u = scenario.disturbance.at(t);
        if let Some(f) = filter.as_deref_mut() {
            u += f.step(r - y, p)?;
        }
        out.push(t, r, y, u, p, &x);
        if let Some(err) = diverged(t, &[x[0], x[1], x[2], u]) {
            return Err(err);
        }
        for _ in 0..scenario.substeps {
            x = rk4_step(params, &x, u, h);
        }
    }
    Ok(out)
}

/// Independent scenarios run in parallel, each with a fresh filter.
pub fn simulate_batch(
    params: &DiskParameters,
    controller: &ControllerParameterization,
    scenarios: &[SimScenario],
) -> Vec<Result<SimResult>> {
    scenarios
        .par_iter()
        .map(|s| {
            let mut f = realize(controller)?;
            simulate_nonlinear(params, &mut f, s)
        })
        .collect()
}
