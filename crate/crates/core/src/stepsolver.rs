//! Analytic ground state of the centered step `ṽ · 1_{[-c, c]}` on
//! `(-L/2, L/2)` with Neumann conditions.
//!
//! In the dimensionless variable `ω = k·L` the even-state matching
//! condition reads
//!
//! ```text
//! (M/ω) · tanh(M · l₂) = tan(ω · l₁),   M = √(L²ṽ - ω²),
//! l₁ = 1/2 - c/L,   l₂ = c/L.
//! ```
//!
//! The left side decreases from `+∞` and the right side increases to `+∞`
//! at `ω·l₁ = π/2`, so the below-barrier ground state is the unique sign
//! change on `(0, min(π/2l₁, L√ṽ))`.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;
use thiserror::Error;

/// Inner offset of the bisection bracket from both ends.
pub const BRACKET_OFFSET: f64 = 1e-9;
/// Relative bracket width the bisection must reach at least.
pub const BRACKET_RTOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StepError {
    #[error("L must be positive, got {0}")]
    Length(f64),
    #[error("step half-width must satisfy 0 < c < L/2, got c={c}, L={length}")]
    HalfWidth { c: f64, length: f64 },
    #[error("step height must be positive, got {0}")]
    Height(f64),
    #[error("omega={omega} outside the below-barrier range (0, {limit}]")]
    OmegaOutOfRange { omega: f64, limit: f64 },
    #[error("no sign change of the quantization residual on ({lo}, {hi}); ground state is above the barrier")]
    Bracket { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepProblem {
    pub length: f64,
    /// Half-width `c` of the step.
    pub c: f64,
    /// Height `ṽ` of the step.
    pub vtilde: f64,
    pub l1: f64,
    pub l2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantizationRoot {
    pub omega0: f64,
    pub m0: f64,
    pub ktilde0: f64,
    pub lambda0: f64,
    /// Residual of the matching condition at `omega0`.
    pub residual: f64,
}

impl StepProblem {
    pub fn new(length: f64, c: f64, vtilde: f64) -> Result<Self, StepError> {
        if !(length.is_finite() && length > 0.0) {
            return Err(StepError::Length(length));
        }
        if !(c.is_finite() && c > 0.0 && c < 0.5 * length) {
            return Err(StepError::HalfWidth { c, length });
        }
        if !(vtilde.is_finite() && vtilde > 0.0) {
            return Err(StepError::Height(vtilde));
        }
        let l2 = c / length;
        Ok(Self {
            length,
            c,
            vtilde,
            l1: 0.5 - l2,
            l2,
        })
    }

    /// `L·√ṽ`, the barrier top in the scaled variable.
    pub fn barrier(&self) -> f64 {
        self.length * self.vtilde.sqrt()
    }

    /// Upper end of the ground-state branch, `min(π/2l₁, L√ṽ)`.
    pub fn branch_limit(&self) -> f64 {
        (FRAC_PI_2 / self.l1).min(self.barrier())
    }

    fn m(&self, omega: f64) -> f64 {
        let top = self.barrier();
        ((top - omega) * (top + omega)).max(0.0).sqrt()
    }

    /// `(M/ω)·tanh(M·l₂) - tan(ω·l₁)`.
    pub fn quantization_residual(&self, omega: f64) -> Result<f64, StepError> {
        let limit = self.barrier();
        if !(omega > 0.0 && omega <= limit) {
            return Err(StepError::OmegaOutOfRange { omega, limit });
        }
        let m = self.m(omega);
        Ok(m / omega * (m * self.l2).tanh() - (omega * self.l1).tan())
    }

    /// Smallest positive root by bisection, run to floating-point
    /// exhaustion of the bracket.
    pub fn solve_ground(&self) -> Result<QuantizationRoot, StepError> {
        let mut lo = BRACKET_OFFSET;
        let mut hi = self.branch_limit() - BRACKET_OFFSET;
        if !(hi > lo) {
            return Err(StepError::Bracket { lo, hi });
        }
        let f_lo = self.quantization_residual(lo)?;
        let f_hi = self.quantization_residual(hi)?;
        if !(f_lo > 0.0 && f_hi < 0.0) {
            return Err(StepError::Bracket { lo, hi });
        }
        let width = BRACKET_RTOL * hi;
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.quantization_residual(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        debug_assert!(hi - lo < width);
        let omega0 = 0.5 * (lo + hi);
        let ktilde0 = omega0 / self.length;
        Ok(QuantizationRoot {
            omega0,
            m0: self.m(omega0),
            ktilde0,
            lambda0: ktilde0 * ktilde0,
            residual: self.quantization_residual(omega0)?,
        })
    }

    /// `π/2 - ω₀·l₁`, the distance of the ground state from the hard-wall
    /// limit.
    pub fn separation(&self) -> Result<f64, StepError> {
        Ok(FRAC_PI_2 - self.solve_ground()?.omega0 * self.l1)
    }
}
