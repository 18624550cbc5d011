//! Executable scheduled filter `K_p = N_K D_K^{-1}` for pulse bases.
//!
//! With `phi_i = z^-i` both factors are FIR in `z^-1` and `D_K` is monic,
//! so the controller is the recursion
//!
//! ```text
//! zeta_k = e_k - sum_{i>=1} v_i(p_k) zeta_{k-i}
//! u_k    = sum_{i>=0} w_i(p_k) zeta_{k-i}
//! ```
//!
//! Scheduling coefficients are evaluated at the current sample `p_k`.

use crate::ctrlparam::{ControllerParameterization, Factor};
use crate::error::{Error, Result};
use crate::ltikit::StateSpaceModel;

#[derive(Debug, Clone)]
pub struct ScheduledFilter {
    param: ControllerParameterization,
    // zeta_{k-1}, zeta_{k-2}, ..
    history: Vec<f64>,
}

/// Builds a zero-state filter; only pulse bases are supported.
pub fn realize(param: &ControllerParameterization) -> Result<ScheduledFilter> {
    if !param.num_basis().is_pulse() || !param.den_basis().is_pulse() {
        return Err(Error::UnsupportedBasis(
            "only pulse bases have an FIR realization".into(),
        ));
    }
    let v = param.v();
    let monic = v[(0, 0)] == 1.0 && (1..v.ncols()).all(|l| v[(0, l)] == 0.0);
    if !monic {
        return Err(Error::InvalidParameterization(
            "leading denominator coefficient must be identically one".into(),
        ));
    }
    let len = param.num_basis().order().max(param.den_basis().order());
    Ok(ScheduledFilter {
        param: param.clone(),
        history: vec![0.0; len],
    })
}

impl ScheduledFilter {
    pub fn ts(&self) -> f64 {
        self.param.ts()
    }

    pub fn parameterization(&self) -> &ControllerParameterization {
        &self.param
    }

    pub fn reset(&mut self) {
        self.history.iter_mut().for_each(|z| *z = 0.0);
    }

    /// Intermediate samples `zeta_{k-1}, zeta_{k-2}, ..`.
    pub fn state(&self) -> &[f64] {
        &self.history
    }

    /// One sample: consumes `e_k` at scheduling `p_k`, returns `u_k`.
    pub fn step(&mut self, e: f64, p: f64) -> Result<f64> {
        let w = self.param.coefficients_at(Factor::N, p)?;
        let v = self.param.coefficients_at(Factor::D, p)?;
        let mut zeta = e;
        for (vi, z) in v.iter().skip(1).zip(&self.history) {
            zeta -= vi * z;
        }
        let mut u = w[0] * zeta;
        for (wi, z) in w.iter().skip(1).zip(&self.history) {
            u += wi * z;
        }
        if !self.history.is_empty() {
            self.history.rotate_right(1);
            self.history[0] = zeta;
        }
        Ok(u)
    }

    /// Response to `input` with scheduling `p` held constant, from the current state.
    pub fn run_frozen(&mut self, input: &[f64], p: f64) -> Result<Vec<f64>> {
        input.iter().map(|&e| self.step(e, p)).collect()
    }

    /// LTI realization of the filter at frozen `p`.
    pub fn frozen(&self, p: f64) -> Result<StateSpaceModel> {
        let w = self.param.coefficients_at(Factor::N, p)?;
        let v = self.param.coefficients_at(Factor::D, p)?;
        StateSpaceModel::from_transfer_function(&w, &v, self.ts())
    }
}
