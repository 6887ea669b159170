//! Finite-difference Neumann eigensolver.
//!
//! The grid is vertex centered, `x_i = -L/2 + i·h` for `i = 0..=n`, and the
//! Neumann condition is closed with ghost points. In nodal form the operator
//! is the non-symmetric tridiagonal matrix
//!
//! ```text
//! row 0:  (2/h² + v₀) u₀ - (2/h²) u₁
//! row i:  (2/h² + vᵢ) uᵢ - (1/h²)(uᵢ₋₁ + uᵢ₊₁)
//! row n:  (2/h² + vₙ) uₙ - (2/h²) uₙ₋₁
//! ```
//!
//! which is similar, through the trapezoidal weights, to a symmetric matrix
//! with off-diagonal `-√2/h²` in the two boundary couplings. Both have the
//! same LDU pivots.
//!
//! Every row sum of the nodal matrix equals the potential sample `vᵢ`. The
//! pivot recurrence is therefore run on the excess `sᵢ = dᵢ - |uᵢ|` of each
//! pivot over its right coupling,
//!
//! ```text
//! sᵢ = (vᵢ - σ) + |lᵢ| · sᵢ₋₁ / dᵢ₋₁
//! ```
//!
//! which never subtracts two numbers of size `1/h²`. Eigenvalues of order
//! `L⁻²` then come out with relative, not absolute, accuracy even though the
//! matrix norm is `4/h²`.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;
use thiserror::Error;

use crate::potentials::{PotentialError, PotentialSpec};

pub const DEFAULT_TOL: f64 = 1e-9;
/// Largest grid `solve_extrapolated` will build.
pub const MAX_CELLS: usize = 1 << 22;
pub const INVERSE_ITERATION_MAX: usize = 100;
pub const INVERSE_ITERATION_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("L must be positive, got {0}")]
    InvalidLength(f64),
    #[error("need at least 2 grid cells, got {0}")]
    TooFewCells(usize),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(
        "inverse iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    InverseIteration { iterations: usize, residual: f64 },
    #[error("ground state is not strictly positive on the grid (min {0:e})")]
    NonPositiveGroundState(f64),
}

/// Discretized Neumann operator on a uniform grid.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub length: f64,
    pub cells: usize,
    pub h: f64,
    /// Main diagonal, `2/h² + vᵢ`.
    pub diag: Vec<f64>,
    /// Off-diagonal of the symmetrized matrix.
    pub offdiag: Vec<f64>,
    /// Potential samples `vᵢ` (the row sums of the nodal matrix).
    pub potential: Vec<f64>,
}

/// Node `i` of an `n`-cell grid on `(-L/2, L/2)`. Written so that node
/// `n - i` is the exact negative of node `i`.
pub fn grid_node(length: f64, cells: usize, i: usize) -> f64 {
    let h = length / cells as f64;
    (2.0 * i as f64 - cells as f64) * (0.5 * h)
}

pub fn discretize(
    spec: &PotentialSpec,
    length: f64,
    cells: usize,
) -> Result<Discretization, SolverError> {
    if !(length.is_finite() && length > 0.0) {
        return Err(SolverError::InvalidLength(length));
    }
    if cells < 2 {
        return Err(SolverError::TooFewCells(cells));
    }
    spec.validate_shape()?;

    let h = length / cells as f64;
    let inv_h2 = 1.0 / (h * h);
    let potential: Vec<f64> = (0..=cells)
        .map(|i| spec.node_value(grid_node(length, cells, i), h))
        .collect();
    let diag = potential.iter().map(|v| 2.0 * inv_h2 + v).collect();
    let offdiag = (0..cells)
        .map(|i| {
            if i == 0 || i + 1 == cells {
                -SQRT_2 * inv_h2
            } else {
                -inv_h2
            }
        })
        .collect();

    Ok(Discretization {
        length,
        cells,
        h,
        diag,
        offdiag,
        potential,
    })
}

impl Discretization {
    fn inv_h2(&self) -> f64 {
        1.0 / (self.h * self.h)
    }

    /// Magnitude of the nodal coupling from row `i` to row `i - 1`.
    fn left(&self, i: usize) -> f64 {
        match i {
            0 => 0.0,
            i if i == self.cells => 2.0 * self.inv_h2(),
            _ => self.inv_h2(),
        }
    }

    /// Magnitude of the nodal coupling from row `i` to row `i + 1`.
    fn right(&self, i: usize) -> f64 {
        match i {
            0 => 2.0 * self.inv_h2(),
            i if i == self.cells => 0.0,
            _ => self.inv_h2(),
        }
    }

    fn pivot_floor(&self) -> f64 {
        f64::MIN_POSITIVE.sqrt() * self.inv_h2()
    }

    pub fn node(&self, i: usize) -> f64 {
        grid_node(self.length, self.cells, i)
    }

    /// Upper bound on `‖A‖∞` of the nodal matrix.
    pub fn norm_bound(&self) -> f64 {
        4.0 * self.inv_h2() + self.potential.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Number of eigenvalues strictly below `sigma` (Sturm count).
    pub fn count_below(&self, sigma: f64) -> usize {
        let floor = self.pivot_floor();
        let mut count = 0;
        let mut s = self.potential[0] - sigma;
        let mut d = guard(self.right(0) + s, floor);
        if d < 0.0 {
            count += 1;
        }
        for i in 1..=self.cells {
            s = (self.potential[i] - sigma) + self.left(i) * (s / d);
            d = guard(self.right(i) + s, floor);
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// LDU pivots of `A - σ`.
    fn pivots(&self, sigma: f64) -> Vec<f64> {
        let floor = self.pivot_floor();
        let mut out = Vec::with_capacity(self.cells + 1);
        let mut s = self.potential[0] - sigma;
        let mut d = guard(self.right(0) + s, floor);
        out.push(d);
        for i in 1..=self.cells {
            s = (self.potential[i] - sigma) + self.left(i) * (s / d);
            d = guard(self.right(i) + s, floor);
            out.push(d);
        }
        out
    }

    /// Eigenvalue number `index` (0-based, ascending) by Sturm bisection.
    pub fn eigenvalue(&self, index: usize) -> f64 {
        let free = ((index + 1) as f64 * PI / self.length).powi(2);
        let vmax = self.potential.iter().fold(0.0f64, |m, &v| m.max(v));
        // Adding v ≥ 0 raises each eigenvalue by at most max v.
        let mut hi = free + vmax;
        while self.count_below(hi) <= index {
            hi *= 2.0;
        }
        let mut lo = 0.0f64;
        if self.count_below(lo) > index {
            // only reachable with negative samples
            lo = -vmax.max(1.0);
            while self.count_below(lo) > index {
                lo *= 2.0;
            }
        }
        self.bisect(index, lo, hi)
    }

    /// Like [`eigenvalue`](Self::eigenvalue), starting from a bracket of
    /// relative width `spread` around `guess` when that bracket is valid.
    pub fn eigenvalue_near(&self, index: usize, guess: f64, spread: f64) -> f64 {
        let lo = guess - spread * guess.abs();
        let hi = guess + spread * guess.abs();
        if guess > 0.0 && self.count_below(lo) <= index && self.count_below(hi) > index {
            self.bisect(index, lo, hi)
        } else {
            self.eigenvalue(index)
        }
    }

    fn bisect(&self, index: usize, mut lo: f64, mut hi: f64) -> f64 {
        let atol = 1e-2 * f64::EPSILON * (PI / self.length).powi(2);
        for _ in 0..4096 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if hi - lo <= atol.max(2.0 * f64::EPSILON * lo.abs().max(hi.abs())) {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn lowest_two_values(&self) -> (f64, f64) {
        (self.eigenvalue(0), self.eigenvalue(1))
    }

    /// Solves `(A - σ) y = rhs` with precomputed pivots.
    fn shifted_solve(&self, pivots: &[f64], rhs: &[f64]) -> Vec<f64> {
        let n = self.cells;
        let mut z = Vec::with_capacity(n + 1);
        z.push(rhs[0]);
        for i in 1..=n {
            let prev = z[i - 1];
            z.push(rhs[i] + self.left(i) * prev / pivots[i - 1]);
        }
        let mut y = vec![0.0; n + 1];
        y[n] = z[n] / pivots[n];
        for i in (0..n).rev() {
            y[i] = (z[i] + self.right(i) * y[i + 1]) / pivots[i];
        }
        y
    }

    /// `‖(A - σ) y‖∞`.
    fn residual_norm(&self, sigma: f64, y: &[f64]) -> f64 {
        let n = self.cells;
        let c2 = 2.0 * self.inv_h2();
        (0..=n)
            .map(|i| {
                let mut r = (c2 + self.potential[i] - sigma) * y[i];
                if i > 0 {
                    r -= self.left(i) * y[i - 1];
                }
                if i < n {
                    r -= self.right(i) * y[i + 1];
                }
                r.abs()
            })
            .fold(0.0, f64::max)
    }

    /// Nodal eigenvector for the eigenvalue closest to `sigma` by inverse
    /// iteration. Sign fixed by making the largest entry positive and
    /// normalized to unit L² norm under the trapezoidal rule.
    pub fn eigenvector(&self, sigma: f64) -> Result<Vec<f64>, SolverError> {
        let pivots = self.pivots(sigma);
        let scale = self.norm_bound();
        let mut x = vec![1.0; self.cells + 1];
        let mut residual = f64::INFINITY;
        for _ in 0..INVERSE_ITERATION_MAX {
            let mut y = self.shifted_solve(&pivots, &x);
            let peak = y
                .iter()
                .fold(0.0f64, |m, &v| if v.abs() > m.abs() { v } else { m });
            if peak == 0.0 || !peak.is_finite() {
                break;
            }
            y.iter_mut().for_each(|v| *v /= peak);
            residual = self.residual_norm(sigma, &y) / scale;
            x = y;
            if residual <= INVERSE_ITERATION_TOL {
                let norm = trapezoid_norm(&x, self.h);
                x.iter_mut().for_each(|v| *v /= norm);
                return Ok(x);
            }
        }
        Err(SolverError::InverseIteration {
            iterations: INVERSE_ITERATION_MAX,
            residual,
        })
    }
}

fn guard(d: f64, floor: f64) -> f64 {
    if d.abs() < floor {
        -floor
    } else {
        d
    }
}

fn trapezoid_norm(y: &[f64], h: f64) -> f64 {
    let n = y.len() - 1;
    let sum: f64 = y
        .iter()
        .enumerate()
        .map(|(i, v)| if i == 0 || i == n { 0.5 * v * v } else { v * v })
        .sum();
    (sum * h).sqrt()
}

/// Two lowest eigenpairs and the ground-state quantities consumed by the
/// bounds.
#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    pub length: f64,
    /// Cells of the grid `phi0` lives on.
    pub cells: usize,
    pub lambda0: f64,
    pub lambda1: f64,
    pub gap: f64,
    pub k0: f64,
    #[serde(skip)]
    pub phi0: Vec<f64>,
    pub inf_phi: f64,
    pub sup_phi: f64,
    pub err_estimate: f64,
    /// False when `solve_extrapolated` hit the grid ceiling before meeting
    /// its tolerance.
    pub converged: bool,
}

impl EigenResult {
    pub fn h(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        grid_node(self.length, self.cells, i)
    }

    /// `inf φ₀ / sup φ₀`.
    pub fn ratio(&self) -> f64 {
        self.inf_phi / self.sup_phi
    }

    fn assemble(
        disc: &Discretization,
        lambda0: f64,
        lambda1: f64,
        phi0: Vec<f64>,
        err_estimate: f64,
        converged: bool,
    ) -> Result<Self, SolverError> {
        let inf_phi = phi0.iter().copied().fold(f64::INFINITY, f64::min);
        let sup_phi = phi0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(inf_phi > 0.0) {
            return Err(SolverError::NonPositiveGroundState(inf_phi));
        }
        let lambda0 = lambda0.max(0.0);
        Ok(Self {
            length: disc.length,
            cells: disc.cells,
            lambda0,
            lambda1,
            gap: lambda1 - lambda0,
            k0: lambda0.sqrt(),
            phi0,
            inf_phi,
            sup_phi,
            err_estimate,
            converged,
        })
    }
}

/// Two lowest eigenvalues by Sturm bisection and the ground state by inverse
/// iteration, on a single grid.
pub fn lowest_two(disc: &Discretization) -> Result<EigenResult, SolverError> {
    let (lambda0, lambda1) = disc.lowest_two_values();
    let phi0 = disc.eigenvector(lambda0)?;
    EigenResult::assemble(disc, lambda0, lambda1, phi0, 0.0, true)
}

/// Starting grid for `solve_extrapolated`: `max(1024, ⌈40 L⌉)`, even, and
/// moved up (by less than a factor two) onto a grid that has nodes on every
/// jump of the potential when such a grid exists.
pub fn start_cells(spec: &PotentialSpec, length: f64) -> usize {
    let base = 1024usize.max((40.0 * length).ceil() as usize);
    let base = base + base % 2;
    let jumps = spec.discontinuities();
    if jumps.is_empty() {
        return base;
    }
    (base..2 * base)
        .step_by(2)
        .find(|&n| jumps.iter().all(|&x| on_node(length, n, x)))
        .unwrap_or(base)
}

fn on_node(length: f64, cells: usize, x: f64) -> bool {
    let q = cells as f64 * (x / length + 0.5);
    (q - q.round()).abs() <= 1e-9 * q.abs().max(1.0)
}

/// Richardson-controlled solve.
///
/// Solves on grids `n` and `2n`, extrapolates both eigenvalues with the
/// `h²` error model and doubles `n` until `|extrapolated - fine|` is below
/// `tol · max(|λ|, L⁻²)` for both. The eigenvector comes from the finest
/// grid. At the grid ceiling the best result is returned with
/// `converged = false`.
pub fn solve_extrapolated(
    spec: &PotentialSpec,
    length: f64,
    tol: f64,
) -> Result<EigenResult, SolverError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(SolverError::InvalidTolerance(tol));
    }
    let mut cells = start_cells(spec, length);
    let mut coarse = discretize(spec, length, cells)?.lowest_two_values();
    let floor = length.powi(-2);
    loop {
        let fine_disc = discretize(spec, length, 2 * cells)?;
        // grid refinement moves each eigenvalue by O(h²); 1% covers it
        let fine = (
            fine_disc.eigenvalue_near(0, coarse.0, 1e-2),
            fine_disc.eigenvalue_near(1, coarse.1, 1e-2),
        );
        let ext = (
            (4.0 * fine.0 - coarse.0) / 3.0,
            (4.0 * fine.1 - coarse.1) / 3.0,
        );
        let diff = ((ext.0 - fine.0).abs(), (ext.1 - fine.1).abs());
        let done = diff.0 < tol * ext.0.abs().max(floor) && diff.1 < tol * ext.1.abs().max(floor);
        let ceiling = 4 * cells > MAX_CELLS;
        if done || ceiling {
            let phi0 = fine_disc.eigenvector(fine.0)?;
            return EigenResult::assemble(&fine_disc, ext.0, ext.1, phi0, diff.0.max(diff.1), done);
        }
        cells *= 2;
        coarse = fine;
    }
}

/// Discrepancy in the integrated eigenvalue equation
/// `φ'(x) = ∫ₓ⁰ (λ₀ - v(s)) φ(s) ds` on `x ∈ [-b, 0]`, measured from the
/// interval midpoint.
///
/// `φ'` is a central difference of the computed eigenvector; the integral is
/// a trapezoidal rule that splits cells at jumps of `v` and uses one-sided
/// limits there. Returns the largest absolute difference over the grid nodes
/// in `[-b, 0]`.
pub fn turning_point_residual(res: &EigenResult, spec: &PotentialSpec, length: f64) -> f64 {
    let n = res.cells;
    let h = length / n as f64;
    let phi = &res.phi0;
    let lambda = res.lambda0;
    let node = |i: usize| grid_node(length, n, i);
    let jumps = spec.discontinuities();
    let side = 1e-9 * h;

    // ∫ over [a, c] of (λ - v) φ with φ linear between the given end values.
    let piece = |a: f64, c: f64, pa: f64, pc: f64| -> f64 {
        let va = spec.evaluate(a + side);
        let vc = spec.evaluate(c - side);
        0.5 * (c - a) * ((lambda - va) * pa + (lambda - vc) * pc)
    };
    let cell = |a: f64, c: f64, pa: f64, pc: f64| -> f64 {
        let mut cuts: Vec<f64> = jumps.iter().copied().filter(|&x| x > a && x < c).collect();
        cuts.sort_by(f64::total_cmp);
        let mut total = 0.0;
        let mut left = a;
        let mut pleft = pa;
        for x in cuts {
            let px = pa + (pc - pa) * (x - a) / (c - a);
            total += piece(left, x, pleft, px);
            left = x;
            pleft = px;
        }
        total + piece(left, c, pleft, pc)
    };

    // Node m is the last node with x ≤ 0; for odd n the midpoint sits inside
    // cell [m, m+1].
    let m = n / 2;
    let mut integral = if n % 2 == 0 {
        0.0
    } else {
        let mid_phi = 0.5 * (phi[m] + phi[m + 1]);
        cell(node(m), 0.0, phi[m], mid_phi)
    };

    let first = ((0.5 * length - spec.b) / h - 1e-9).ceil().max(1.0) as usize;
    let mut worst = 0.0f64;
    let mut j = m;
    loop {
        if j >= 1 && j < n {
            let derivative = (phi[j + 1] - phi[j - 1]) / (2.0 * h);
            worst = worst.max((derivative - integral).abs());
        }
        if j <= first || j == 0 {
            break;
        }
        integral += cell(node(j - 1), node(j), phi[j - 1], phi[j]);
        j -= 1;
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::PotentialSpec;

    /// Plain LDLᵀ Sturm count on the symmetric matrix.
    fn naive_count(disc: &Discretization, sigma: f64) -> usize {
        let mut count = 0;
        let mut q = disc.diag[0] - sigma;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..disc.diag.len() {
            let e = disc.offdiag[i - 1];
            q = disc.diag[i] - sigma - e * e / q;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn rejects_bad_grids() {
        let z = PotentialSpec::zero(0.5);
        assert_eq!(
            discretize(&z, -1.0, 100).unwrap_err(),
            SolverError::InvalidLength(-1.0)
        );
        assert_eq!(
            discretize(&z, 1.0, 1).unwrap_err(),
            SolverError::TooFewCells(1)
        );
        assert!(solve_extrapolated(&z, 1.0, 0.0).is_err());
    }

    #[test]
    fn matrix_shape() {
        let d = discretize(&PotentialSpec::step(0.5, 1.0), 4.0, 8).unwrap();
        assert_eq!(d.diag.len(), 9);
        assert_eq!(d.offdiag.len(), 8);
        assert_eq!(d.offdiag[0], d.offdiag[7]);
        assert!((d.offdiag[0] / d.offdiag[1] - SQRT_2).abs() < 1e-15);
        // nodes symmetric bitwise
        for i in 0..=8 {
            assert_eq!(d.node(i), -d.node(8 - i));
        }
    }

    #[test]
    fn excess_count_matches_naive_count() {
        let d = discretize(&PotentialSpec::trapezoid(0.5, 0.25, 3.0), 6.0, 300).unwrap();
        for k in 0..200 {
            let sigma = -1.0 + 0.37 * k as f64;
            assert_eq!(
                d.count_below(sigma),
                naive_count(&d, sigma),
                "sigma={sigma}"
            );
        }
    }

    #[test]
    fn free_spectrum_matches_discrete_formula() {
        let length = 3.0;
        let n = 200;
        let d = discretize(&PotentialSpec::zero(0.5), length, n).unwrap();
        let h = length / n as f64;
        for k in 0..4 {
            let exact = 4.0 / (h * h) * (k as f64 * PI * h / (2.0 * length)).sin().powi(2);
            let got = d.eigenvalue(k);
            assert!(
                (got - exact).abs() <= 1e-12 * exact.max(1e-3),
                "{k}: {got} vs {exact}"
            );
        }
    }

    #[test]
    fn free_eigenvalues_pi_over_length() {
        let d = discretize(&PotentialSpec::zero(0.5), PI, 1000).unwrap();
        let (l0, l1) = d.lowest_two_values();
        assert!(l0.abs() < 1e-12);
        assert!((l1 - 1.0).abs() < 1e-5);

        let d = discretize(&PotentialSpec::zero(0.5), 1.0, 1000).unwrap();
        assert!((d.eigenvalue(1) - PI * PI).abs() / (PI * PI) < 1e-5);
    }

    #[test]
    fn free_ground_state_is_constant() {
        let length = 10.0;
        let d = discretize(&PotentialSpec::zero(0.5), length, 10_000).unwrap();
        let r = lowest_two(&d).unwrap();
        assert!((r.gap - PI * PI / 100.0).abs() / (PI * PI / 100.0) < 1e-6);
        assert!((r.ratio() - 1.0).abs() < 1e-8);
        let c = 1.0 / length.sqrt();
        assert!(r.phi0.iter().all(|p| (p - c).abs() < 1e-8));
    }

    #[test]
    fn step_ground_state_extrema() {
        let length = 20.0;
        let n = 4000;
        let d = discretize(&PotentialSpec::step(0.5, 1.0), length, n).unwrap();
        let r = lowest_two(&d).unwrap();
        assert!(r.inf_phi < r.sup_phi);
        let argmin = (0..=n)
            .min_by(|&a, &b| r.phi0[a].total_cmp(&r.phi0[b]))
            .unwrap();
        let argmax = (0..=n)
            .max_by(|&a, &b| r.phi0[a].total_cmp(&r.phi0[b]))
            .unwrap();
        assert_eq!(argmin, n / 2);
        assert!(argmax == 0 || argmax == n, "argmax at {argmax}");
        assert_eq!(r.phi0[0], r.sup_phi);
        assert!(r.phi0.iter().all(|&p| p > 0.0));
    }

    #[test]
    fn ground_state_is_even() {
        let d = discretize(&PotentialSpec::trapezoid(0.5, 0.25, 1.0), 50.0, 5000).unwrap();
        let r = lowest_two(&d).unwrap();
        let worst = (0..=d.cells)
            .map(|i| (r.phi0[i] - r.phi0[d.cells - i]).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-8 * r.sup_phi, "{worst}");
    }

    #[test]
    fn start_grid_lands_on_jumps() {
        let step = PotentialSpec::step(0.5, 1.0);
        for length in [25.0, 50.0, 100.0, 200.0] {
            let n = start_cells(&step, length);
            assert!(
                on_node(length, n, 0.5) && on_node(length, n, -0.5),
                "{length}: {n}"
            );
            assert!(n >= 1024 && n >= (40.0 * length) as usize);
        }
        assert_eq!(start_cells(&PotentialSpec::zero(0.5), 10.0), 1024);
    }

    #[test]
    fn zero_turning_point_residual_vanishes() {
        let z = PotentialSpec::zero(0.5);
        for n in [1000, 1001] {
            let r = lowest_two(&discretize(&z, 7.0, n).unwrap()).unwrap();
            assert!(turning_point_residual(&r, &z, 7.0) < 1e-12);
        }
    }
}
