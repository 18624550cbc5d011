//! Certification of a given controller against frozen FRF data.
//!
//! Stability at an operating point holds when the sampled characteristic
//! function `D_p = D_G D_K + N_G N_K` stays away from the origin and has
//! zero winding number around it. The unwrapped phase `-arg D_p` is then a
//! sampled multiplier rotating `D_p` onto the positive real axis.
//! Performance additionally asks that every disk of radius
//! `|W N_p| / gamma` centred at `D_p` exclude the origin.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ctrlparam::{ControllerParameterization, Factor};
use crate::error::{Error, Result};
use crate::frfdata::{weight_frf, Channel, FrfDataset, WeightSet};
use crate::synthesis::channel_factors;

/// Tolerances for the sampled tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisOptions {
    /// Samples closer than `origin_tol * max|D_p|` to the origin are rejected.
    pub origin_tol: f64,
    /// Largest admissible phase change between neighbouring samples.
    pub max_increment: f64,
    /// Performance margins must exceed this value.
    pub margin_tol: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            origin_tol: 1e-9,
            max_increment: FRAC_PI_2,
            margin_tol: 0.0,
        }
    }
}

/// Net counter-clockwise encirclements of the origin by a closed curve.
///
/// `samples` are taken at increasing non-negative frequencies; the curve is
/// closed with their complex conjugates in reverse order.
pub fn winding_number(samples: &[Complex64]) -> Result<i64> {
    winding_number_with(samples, &AnalysisOptions::default())
}

pub fn winding_number_with(samples: &[Complex64], opts: &AnalysisOptions) -> Result<i64> {
    let curve = closed_curve(samples);
    check_origin(samples, opts)?;
    let mut total = 0.0;
    for i in 0..curve.len() {
        let a = curve[i];
        let b = curve[(i + 1) % curve.len()];
        let inc = (b / a).arg();
        if inc.abs() > opts.max_increment {
            return Err(Error::GridTooCoarse {
                index: i % samples.len().max(1),
                increment: inc,
            });
        }
        total += inc;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

fn closed_curve(samples: &[Complex64]) -> Vec<Complex64> {
    let mut curve: Vec<Complex64> = samples.iter().rev().map(|c| c.conj()).collect();
    curve.extend_from_slice(samples);
    curve
}

fn check_origin(samples: &[Complex64], opts: &AnalysisOptions) -> Result<f64> {
    let max = samples.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let (index, min) = samples
        .iter()
        .map(|c| c.norm())
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    if !(min > opts.origin_tol * max) {
        return Err(Error::NearOrigin { index, distance: min });
    }
    Ok(min)
}

/// Unwrapped `-arg(samples)`, starting in `(-pi, pi]`.
pub fn multiplier_phase(samples: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(samples.len());
    let mut acc = 0.0;
    for (i, c) in samples.iter().enumerate() {
        if i == 0 {
            acc = -c.arg();
        } else {
            acc -= (c / samples[i - 1]).arg();
        }
        out.push(acc);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Unstable,
    /// `D_p` touches the origin within tolerance.
    Marginal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityEntry {
    pub p: f64,
    pub winding: Option<i64>,
    pub min_abs: f64,
    /// Sampled multiplier phase (radians), present when stable.
    pub multiplier_phase: Option<Vec<f64>>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityCertificate {
    pub entries: Vec<StabilityEntry>,
}

impl StabilityCertificate {
    pub fn is_stable(&self) -> bool {
        self.entries.iter().all(|e| e.verdict == Verdict::Stable)
    }

    pub fn stable_count(&self) -> usize {
        self.entries.iter().filter(|e| e.verdict == Verdict::Stable).count()
    }
}

/// `D_p` over the grid at operating point `j`.
pub fn characteristic_samples(
    data: &FrfDataset,
    controller: &ControllerParameterization,
    j: usize,
) -> Result<Vec<Complex64>> {
    check_domain(data, controller)?;
    let p = data.points().points()[j];
    data.grid()
        .omegas()
        .iter()
        .enumerate()
        .map(|(k, &w)| {
            let nk = controller.eval_factor(Factor::N, w, p)?;
            let dk = controller.eval_factor(Factor::D, w, p)?;
            Ok(data.d(k, j) * dk + data.n(k, j) * nk)
        })
        .collect()
}

fn check_domain(data: &FrfDataset, controller: &ControllerParameterization) -> Result<()> {
    match data.grid().domain().sample_time() {
        Some(ts) if (ts - controller.ts()).abs() <= 1e-12 * ts => Ok(()),
        Some(ts) => Err(Error::DomainMismatch(format!(
            "data sampled at {ts} s, controller at {} s",
            controller.ts()
        ))),
        None => Err(Error::DomainMismatch(
            "discrete controller against continuous-time data".into(),
        )),
    }
}

pub fn check_stability(
    data: &FrfDataset,
    controller: &ControllerParameterization,
    j: usize,
) -> Result<StabilityEntry> {
    check_stability_with(data, controller, j, &AnalysisOptions::default())
}

pub fn check_stability_with(
    data: &FrfDataset,
    controller: &ControllerParameterization,
    j: usize,
    opts: &AnalysisOptions,
) -> Result<StabilityEntry> {
    let p = *data
        .points()
        .points()
        .get(j)
        .ok_or_else(|| Error::InvalidPoints(format!("no operating point with index {j}")))?;
    let dp = characteristic_samples(data, controller, j)?;
    let min_abs = dp.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min);
    match winding_number_with(&dp, opts) {
        Ok(w) => {
            let stable = w == 0;
            Ok(StabilityEntry {
                p,
                winding: Some(w),
                min_abs,
                multiplier_phase: stable.then(|| multiplier_phase(&dp)),
                verdict: if stable { Verdict::Stable } else { Verdict::Unstable },
            })
        }
        Err(Error::NearOrigin { .. }) => Ok(StabilityEntry {
            p,
            winding: None,
            min_abs,
            multiplier_phase: None,
            verdict: Verdict::Marginal,
        }),
        Err(e) => Err(e),
    }
}

/// Stability entries for every operating point, computed in parallel.
pub fn certify_stability(
    data: &FrfDataset,
    controller: &ControllerParameterization,
    opts: &AnalysisOptions,
) -> Result<StabilityCertificate> {
    let entries = (0..data.points().len())
        .into_par_iter()
        .map(|j| check_stability_with(data, controller, j, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityCertificate { entries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceMargin {
    pub omega: f64,
    pub p: f64,
    pub channel: Channel,
    /// `|D_p| - |W N_p| / gamma`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceCertificate {
    pub gamma: f64,
    pub stability: StabilityCertificate,
    pub margins: Vec<PerformanceMargin>,
    pub worst: Option<PerformanceMargin>,
    pub pass: bool,
}

impl PerformanceCertificate {
    pub fn worst_margin(&self) -> f64 {
        self.worst.as_ref().map_or(f64::INFINITY, |m| m.margin)
    }
}

pub fn check_performance(
    data: &FrfDataset,
    weights: &WeightSet,
    controller: &ControllerParameterization,
    gamma: f64,
) -> Result<PerformanceCertificate> {
    check_performance_with(data, weights, controller, gamma, &AnalysisOptions::default())
}

pub fn check_performance_with(
    data: &FrfDataset,
    weights: &WeightSet,
    controller: &ControllerParameterization,
    gamma: f64,
    opts: &AnalysisOptions,
) -> Result<PerformanceCertificate> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidProblem(format!("gamma must be positive, got {gamma}")));
    }
    let stability = certify_stability(data, controller, opts)?;
    let grid = data.grid();
    let channels: Vec<Channel> = weights.channels().collect();
    let wfrf = channels
        .iter()
        .map(|&c| weight_frf(weights, c, grid))
        .collect::<Result<Vec<_>>>()?;
    let points = data.points().points();
    let per_point = (0..points.len())
        .into_par_iter()
        .map(|j| {
            let p = points[j];
            let mut out = Vec::with_capacity(grid.len() * channels.len());
            for (k, &w) in grid.omegas().iter().enumerate() {
                let rn = controller.regressor_row(Factor::N, w, p)?;
                let rd = controller.regressor_row(Factor::D, w, p)?;
                let theta = controller.theta();
                for (c, &ch) in channels.iter().enumerate() {
                    let f = channel_factors((data.n(k, j), data.d(k, j)), (&rn, &rd), ch);
                    let dp = f.dp.eval(theta.as_slice());
                    let np = f.np.eval(theta.as_slice());
                    out.push(PerformanceMargin {
                        omega: w,
                        p,
                        channel: ch,
                        margin: dp.norm() - (wfrf[c][k] * np).norm() / gamma,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let margins: Vec<PerformanceMargin> = per_point.into_iter().flatten().collect();
    let worst = margins
        .iter()
        .min_by(|a, b| a.margin.total_cmp(&b.margin))
        .cloned();
    let disks_ok = worst.as_ref().is_none_or(|m| m.margin > opts.margin_tol);
    Ok(PerformanceCertificate {
        gamma,
        pass: disks_ok && stability.is_stable(),
        stability,
        margins,
        worst,
    })
}

/// Machine-readable bundle written by the command-line front end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub stability: StabilityCertificate,
    pub performance: Option<PerformanceCertificate>,
}

impl Certificate {
    pub fn passes(&self) -> bool {
        self.stability.is_stable() && self.performance.as_ref().is_none_or(|p| p.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}

impl fmt::Display for StabilityCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>8}  {:>7}  {:>10}  verdict", "p", "winding", "min|D_p|")?;
        for e in &self.entries {
            let w = e.winding.map_or("-".to_string(), |w| w.to_string());
            writeln!(f, "{:>8.4}  {:>7}  {:>10.3e}  {:?}", e.p, w, e.min_abs, e.verdict)?;
        }
        write!(f, "{}/{} operating points stable", self.stable_count(), self.entries.len())
    }
}

impl fmt::Display for PerformanceCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.stability)?;
        write!(f, "gamma = {}: ", self.gamma)?;
        match &self.worst {
            Some(m) => write!(
                f,
                "worst margin {:.3e} at omega = {:.4} rad/s, p = {:.4}, channel {}; {}",
                m.margin,
                m.omega,
                m.p,
                m.channel,
                if self.pass { "pass" } else { "fail" }
            ),
            None => write!(f, "no weighted channels; {}", if self.pass { "pass" } else { "fail" }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(n: usize) -> Vec<Complex64> {
        (0..=n)
            .map(|k| Complex64::from_polar(1.0, PI * k as f64 / n as f64))
            .collect()
    }

    #[test]
    fn constant_curve_has_zero_winding() {
        let s = vec![Complex64::new(1.0, 0.0); 50];
        assert_eq!(winding_number(&s).unwrap(), 0);
    }

    #[test]
    fn one_zero_inside() {
        let s: Vec<_> = circle(256).into_iter().map(|z| z - 0.5).collect();
        assert_eq!(winding_number(&s).unwrap(), 1);
    }

    #[test]
    fn two_zeros_inside() {
        let s: Vec<_> = circle(256).into_iter().map(|z| (z - 0.5) * (z - 0.25)).collect();
        assert_eq!(winding_number(&s).unwrap(), 2);
    }

    #[test]
    fn zero_outside_in_inverse_variable() {
        // 1 - 2 z^-1 has its zero at z = 2 and a pole at the origin
        let s: Vec<_> = circle(256).into_iter().map(|z| 1.0 - 2.0 / z).collect();
        assert_eq!(winding_number(&s).unwrap(), -1);
    }

    #[test]
    fn origin_and_coarse_grid_are_reported() {
        let s: Vec<_> = circle(64).into_iter().map(|z| z - 1.0).collect();
        assert!(matches!(winding_number(&s), Err(Error::NearOrigin { .. })));
        let s: Vec<_> = circle(3).into_iter().map(|z| z - 0.9).collect();
        assert!(matches!(winding_number(&s), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn multiplier_rotates_onto_positive_axis() {
        let s: Vec<_> = circle(128).into_iter().map(|z| 1.0 + 0.8 / z).collect();
        let phi = multiplier_phase(&s);
        for (c, f) in s.iter().zip(&phi) {
            let r = c * Complex64::from_polar(1.0, *f);
            assert!(r.re > 0.0 && (r.re - c.norm()).abs() < 1e-12);
        }
        let travel = phi.iter().cloned().fold(f64::MIN, f64::max) - phi.iter().cloned().fold(f64::MAX, f64::min);
        assert!(travel < 2.0 * PI);
    }
}
