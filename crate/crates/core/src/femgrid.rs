//! Uniform periodic mesh and the piecewise-linear (hat function) mass matrix.
//!
//! The mesh has nodes `x_n = n·h`, `n = 0..count`, with the node at `L`
//! identified with `0`. The periodic mass matrix is circulant tridiagonal with
//! stencil `(h/6)·[1, 4, 1]`; `fᵀMg` is the quadrature used for every L² inner
//! product of grid functions.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::basis::{BoundaryKind, SpectralBasis};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    length: f64,
    count: usize,
}

impl Grid {
    /// Mesh of `[0, 1)` with spacing `x_step`; `1/x_step` must be a positive integer.
    pub fn build(x_step: f64) -> Result<Self> {
        if !(x_step.is_finite() && x_step > 0.0 && x_step <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "x_step must lie in (0, 1], got {x_step}"
            )));
        }
        let inv = 1.0 / x_step;
        let count = inv.round();
        if (inv - count).abs() > 1e-9 * inv {
            return Err(Error::InvalidParameter(format!(
                "1/x_step must be a positive integer, got 1/{x_step} = {inv}"
            )));
        }
        Self::with_nodes(1.0, count as usize)
    }

    /// Mesh of `[0, length)` with `count` nodes.
    pub fn with_nodes(length: f64, count: usize) -> Result<Self> {
        if count < 3 {
            return Err(Error::InvalidParameter(format!(
                "a periodic mesh needs at least 3 nodes, got {count}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "domain length must be positive, got {length}"
            )));
        }
        Ok(Self { length, count })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.length / self.count as f64
    }

    pub fn node(&self, n: usize) -> f64 {
        n as f64 * self.step()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.count).map(|n| self.node(n)).collect()
    }

    pub fn mass_matrix(&self) -> MassMatrix {
        MassMatrix { step: self.step(), count: self.count }
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.count).map(|n| f(self.node(n))).collect()
    }

    /// Samples eigenfunction `i` (or one of its derivatives) at the nodes.
    pub fn sample_mode(&self, basis: &SpectralBasis, i: usize, order: u32) -> Result<Vec<f64>> {
        let shape = basis.shape(i)?;
        Ok(self.sample(|x| shape.derivative(x, order)))
    }

    fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.count {
            return Err(Error::LengthMismatch { expected: self.count, got: f.len() });
        }
        Ok(())
    }

    /// `fᵀ M g`.
    pub fn inner_product(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        self.check_len(f)?;
        self.check_len(g)?;
        let mg = self.mass_matrix().apply(g);
        Ok(f.iter().zip(&mg).map(|(a, b)| a * b).sum())
    }

    /// First `modes` Galerkin coefficients of `f`:
    /// `z_n = (f, e_n)_M / (e_n, e_n)_M`.
    pub fn project_onto_modes(&self, basis: &SpectralBasis, f: &[f64], modes: usize) -> Result<Vec<f64>> {
        self.check_len(f)?;
        if modes > basis.modes() {
            return Err(Error::InvalidParameter(format!(
                "requested {modes} modes from a basis of {}",
                basis.modes()
            )));
        }
        let mf = self.mass_matrix().apply(f);
        (1..=modes)
            .map(|i| {
                let e = self.sample_mode(basis, i, 0)?;
                let num: f64 = e.iter().zip(&mf).map(|(a, b)| a * b).sum();
                let den = self.inner_product(&e, &e)?;
                Ok(num / den)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassMatrix {
    step: f64,
    count: usize,
}

impl MassMatrix {
    pub fn diagonal(&self) -> f64 {
        4.0 * self.step / 6.0
    }

    pub fn off_diagonal(&self) -> f64 {
        self.step / 6.0
    }

    pub fn size(&self) -> usize {
        self.count
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        let (d, o) = (self.diagonal(), self.off_diagonal());
        (0..n)
            .map(|k| d * f[k] + o * (f[(k + n - 1) % n] + f[(k + 1) % n]))
            .collect()
    }

    /// Eigenvalue of the circulant matrix on the discrete Fourier mode with
    /// `wave` oscillations per period: `(h/6)(4 + 2cos(2π·wave/n))`.
    pub fn symbol(&self, wave: usize) -> f64 {
        let theta = 2.0 * std::f64::consts::PI * wave as f64 / self.count as f64;
        self.step / 6.0 * (4.0 + 2.0 * theta.cos())
    }

    /// Solves `M x = b` with the cyclic Thomas algorithm (Sherman–Morrison).
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.count;
        if b.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: b.len() });
        }
        let (d, o) = (self.diagonal(), self.off_diagonal());
        // A = T + u vᵀ with u = (γ, 0, .., 0, o), v = (1, 0, .., 0, o/γ)
        let gamma = -d;
        let mut diag = vec![d; n];
        diag[0] = d - gamma;
        diag[n - 1] = d - o * o / gamma;
        let y = thomas(o, &diag, b);
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = o;
        let z = thomas(o, &diag, &u);
        let vy = y[0] + o / gamma * y[n - 1];
        let vz = z[0] + o / gamma * z[n - 1];
        let factor = vy / (1.0 + vz);
        Ok(y.iter().zip(&z).map(|(yi, zi)| yi - factor * zi).collect())
    }
}

/// Tridiagonal solve with constant off-diagonals.
fn thomas(off: f64, diag: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut beta = diag[0];
    x[0] = rhs[0] / beta;
    for k in 1..n {
        c[k] = off / beta;
        beta = diag[k] - off * c[k];
        x[k] = (rhs[k] - off * x[k - 1]) / beta;
    }
    for k in (0..n - 1).rev() {
        x[k] -= c[k + 1] * x[k + 1];
    }
    x
}

/// Fast evaluation of periodic Galerkin expansions at the mesh nodes and fast
/// mass-matrix projection of grid functions onto the modes.
///
/// Both directions compute the same sums as [`Grid::project_onto_modes`] and a
/// direct nodal evaluation, but through a length-`n` DFT.
#[derive(Clone)]
pub struct PeriodicTransform {
    grid: Grid,
    modes: usize,
    basis: SpectralBasis,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `(e_i, e_i)_M` for each mode.
    discrete_norms: Vec<f64>,
    /// Mass-matrix symbol on each mode's frequency.
    symbols: Vec<f64>,
}

impl std::fmt::Debug for PeriodicTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicTransform")
            .field("grid", &self.grid)
            .field("modes", &self.modes)
            .finish()
    }
}

impl PeriodicTransform {
    pub fn new(grid: &Grid, basis: &SpectralBasis) -> Result<Self> {
        if basis.bc() != BoundaryKind::Periodic {
            return Err(Error::InvalidParameter(
                "the grid transform supports periodic bases only".into(),
            ));
        }
        if (basis.length() - grid.length()).abs() > 1e-12 * grid.length() {
            return Err(Error::InvalidParameter(format!(
                "basis length {} differs from grid length {}",
                basis.length(),
                grid.length()
            )));
        }
        let n = grid.len();
        let top_wave = basis.modes() / 2;
        if 2 * top_wave >= n {
            return Err(Error::InvalidParameter(format!(
                "{} modes need more than {} grid nodes (highest frequency {top_wave} must stay below n/2)",
                basis.modes(),
                n
            )));
        }
        let mut planner = FftPlanner::new();
        let mass = grid.mass_matrix();
        let symbols: Vec<f64> = (1..=basis.modes()).map(|i| mass.symbol(i / 2)).collect();
        let discrete_norms = (1..=basis.modes())
            .map(|i| {
                let count = if i == 1 { n as f64 } else { 0.5 * n as f64 };
                symbols[i - 1] * count
            })
            .collect();
        Ok(Self {
            grid: grid.clone(),
            modes: basis.modes(),
            basis: *basis,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            discrete_norms,
            symbols,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// `Σ_i z_i d^order e_i/dx^order` at every node.
    pub fn synthesize(&self, coeffs: &[f64], order: u32) -> Vec<f64> {
        debug_assert_eq!(coeffs.len(), self.modes);
        let n = self.grid.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let two_pi_over_l = 2.0 * std::f64::consts::PI / self.grid.length();
        for (idx, &z) in coeffs.iter().enumerate() {
            let i = idx + 1;
            let wave = i / 2;
            let k = wave as f64 * two_pi_over_l;
            // d^p/dx^p of cos(kx) and sin(kx) as a·cos + b·sin.
            let (a, b) = if i == 1 {
                (if order == 0 { z } else { 0.0 }, 0.0)
            } else if i % 2 == 0 {
                rotate(0.0, z, k, order)
            } else {
                rotate(z, 0.0, k, order)
            };
            // a cos(θ) + b sin(θ) = Re[(a - i b) e^{iθ}]
            buf[wave] += Complex64::new(a, -b);
        }
        self.inverse.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Mass-matrix projection `(f, e_i)_M / (e_i, e_i)_M` for every mode.
    pub fn analyze(&self, f: &[f64]) -> Vec<f64> {
        self.inner_products(f)
            .into_iter()
            .zip(&self.discrete_norms)
            .map(|(num, den)| num / den)
            .collect()
    }

    /// `(f, e_i)_M` for every mode.
    pub fn inner_products(&self, f: &[f64]) -> Vec<f64> {
        debug_assert_eq!(f.len(), self.grid.len());
        let mut buf: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        // M is circulant, so (Mf)·e_i = symbol · (f·e_i).
        (1..=self.modes)
            .map(|i| {
                let c = buf[i / 2];
                let dot = if i == 1 {
                    c.re
                } else if i % 2 == 0 {
                    -c.im
                } else {
                    c.re
                };
                self.symbols[i - 1] * dot
            })
            .collect()
    }
}

/// Coefficients `(a', b')` with `d^p/dx^p [a cos(kx) + b sin(kx)] = a' cos(kx) + b' sin(kx)`.
fn rotate(a: f64, b: f64, k: f64, order: u32) -> (f64, f64) {
    let (mut a, mut b) = (a, b);
    for _ in 0..order {
        // d/dx: a cos + b sin -> -a k sin + b k cos
        let (na, nb) = (b * k, -a * k);
        a = na;
        b = nb;
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_construction() {
        let g = Grid::build(0.25).unwrap();
        assert_eq!(g.nodes(), vec![0.0, 0.25, 0.5, 0.75]);
        assert_eq!(Grid::build(1e-4).unwrap().len(), 10_000);
        assert!(Grid::build(0.3).is_err());
        assert!(Grid::build(0.0).is_err());
        assert!(Grid::build(-0.1).is_err());
    }

    #[test]
    fn mass_matrix_rows_sum_to_step() {
        let g = Grid::build(0.01).unwrap();
        let m = g.mass_matrix();
        let ones = vec![1.0; g.len()];
        for v in m.apply(&ones) {
            assert!((v - 0.01).abs() < 1e-16);
        }
        assert!((g.inner_product(&ones, &ones).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inner_products_of_trig_functions() {
        let g = Grid::build(1e-3).unwrap();
        let s = g.sample(|x| (2.0 * PI * x).sin());
        let c = g.sample(|x| (2.0 * PI * x).cos());
        assert!((g.inner_product(&s, &s).unwrap() - 0.5).abs() < 1e-5);
        assert!(g.inner_product(&s, &c).unwrap().abs() < 1e-6);
        assert!(matches!(
            g.inner_product(&s, &c[..10]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn quadrature_is_second_order() {
        let exact = 0.5;
        let err = |n: usize| {
            let g = Grid::with_nodes(1.0, n).unwrap();
            let f = g.sample(|x| (6.0 * PI * x).sin());
            (g.inner_product(&f, &f).unwrap() - exact).abs()
        };
        let (e1, e2, e3) = (err(50), err(100), err(200));
        for ratio in [e1 / e2, e2 / e3] {
            assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn cyclic_solve_inverts_mass_matrix() {
        for n in [3, 10, 101, 1000] {
            let g = Grid::with_nodes(1.0, n).unwrap();
            let m = g.mass_matrix();
            let x: Vec<f64> = (0..n).map(|k| ((k * 7919) % 31) as f64 - 15.0).collect();
            let b = m.apply(&x);
            let y = m.solve(&b).unwrap();
            let err = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-9, "n={n} err={err}");
        }
    }

    #[test]
    fn projection_recovers_modes() {
        let g = Grid::build(1e-3).unwrap();
        let basis = SpectralBasis::periodic(1.0, 9).unwrap();
        let f = g.sample_mode(&basis, 3, 0).unwrap();
        let z = g.project_onto_modes(&basis, &f, 8).unwrap();
        let tol = 10.0 * 1e-6;
        for (i, c) in z.iter().enumerate() {
            let want = if i == 2 { 1.0 } else { 0.0 };
            assert!((c - want).abs() <= tol);
        }
        let excluded = g.sample_mode(&basis, 9, 0).unwrap();
        let z = g.project_onto_modes(&basis, &excluded, 8).unwrap();
        assert!(z.iter().all(|c| c.abs() <= tol));
    }

    #[test]
    fn projection_of_manufactured_initial_state() {
        let g = Grid::build(1e-3).unwrap();
        let basis = SpectralBasis::periodic(1.0, 12).unwrap();
        let f = g.sample(|x| 3.0 + 10.0 * (6.0 * PI * x).cos() + 4.0 * (2.0 * PI * x).sin());
        let z = g.project_onto_modes(&basis, &f, 12).unwrap();
        for (idx, c) in z.iter().enumerate() {
            let want = match idx + 1 {
                1 => 3.0,
                2 => 4.0,
                7 => 10.0,
                _ => 0.0,
            };
            assert!((c - want).abs() < 1e-9, "mode {} got {c}", idx + 1);
        }
    }

    #[test]
    fn transform_matches_direct_sums() {
        let g = Grid::with_nodes(1.0, 64).unwrap();
        let basis = SpectralBasis::periodic(1.0, 21).unwrap();
        let t = PeriodicTransform::new(&g, &basis).unwrap();
        let z: Vec<f64> = (0..21).map(|k| ((k * 37) % 11) as f64 * 0.1 - 0.5).collect();
        for order in 0..=2 {
            let fast = t.synthesize(&z, order);
            for (n, v) in fast.iter().enumerate() {
                let x = g.node(n);
                let direct: f64 = (1..=21)
                    .map(|i| z[i - 1] * basis.shape(i).unwrap().derivative(x, order))
                    .sum();
                assert!((v - direct).abs() < 1e-9 * (1.0 + direct.abs()), "order {order}");
            }
        }
        let f = g.sample(|x| (x * 5.0).sin().exp());
        let fast = t.analyze(&f);
        let direct = g.project_onto_modes(&basis, &f, 21).unwrap();
        for (a, b) in fast.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn transform_rejects_aliasing_and_nonperiodic() {
        let g = Grid::with_nodes(1.0, 10).unwrap();
        assert!(PeriodicTransform::new(&g, &SpectralBasis::periodic(1.0, 10).unwrap()).is_err());
        assert!(PeriodicTransform::new(&g, &SpectralBasis::periodic(1.0, 9).unwrap()).is_ok());
        let d = SpectralBasis::new(BoundaryKind::Dirichlet, 1.0, 3).unwrap();
        assert!(PeriodicTransform::new(&g, &d).is_err());
    }
}
