//! Oblique projection onto the actuator span along the orthogonal complement
//! of the leading eigenfunctions.
//!
//! With `E_M = {e_1..e_M}` and actuators `U_M = {1_{ω_1}..1_{ω_M}}`, the
//! projection `P` is characterized by `Ph ∈ span U_M` and `(e_i, h - Ph) = 0`
//! for `i <= M`. Writing `Ph = Σ u_j 1_{ω_j}` this is the linear system
//! `G u = m` with Gram matrix `G_ij = (e_i, 1_{ω_j})` and `m_i = (e_i, h)`.
//! `H = span U_M ⊕ (span E_M)^⊥` holds exactly when `G` is invertible.

use nalgebra::{DMatrix, DVector, SymmetricEigen, LU};

use crate::actuation::ActuatorSet;
use crate::basis::{BoundaryKind, SpectralBasis};
use crate::error::{Error, Result};
use crate::femgrid::Grid;

/// Condition numbers at or above this are treated as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Off-diagonal tolerance, relative to the largest diagonal entry, below which
/// the periodic `Θ` is read as diagonal.
pub const THETA_DIAGONAL_TOL: f64 = 1e-10;

/// `(e_i, 1_{ω_j})_{L²}` for `i = 1..=modes`, `j = 1..=M`, from exact antiderivatives.
pub fn mode_actuator_products(basis: &SpectralBasis, actuators: &ActuatorSet, modes: usize) -> Result<DMatrix<f64>> {
    check_lengths(basis, actuators)?;
    let basis = basis.truncated(modes)?;
    let w = actuators.half_width();
    let centers = actuators.centers();
    Ok(DMatrix::from_fn(modes, actuators.count(), |r, c| {
        basis.shape_unchecked(r + 1).integral(centers[c], w)
    }))
}

/// The square Gram matrix `[(e_i, 1_{ω_j})]` with `i, j = 1..=M`.
pub fn gram_matrix(basis: &SpectralBasis, actuators: &ActuatorSet) -> Result<DMatrix<f64>> {
    mode_actuator_products(basis, actuators, actuators.count())
}

fn check_lengths(basis: &SpectralBasis, actuators: &ActuatorSet) -> Result<()> {
    if (basis.length() - actuators.length()).abs() > 1e-12 * basis.length() {
        return Err(Error::InvalidParameter(format!(
            "basis length {} differs from actuator domain length {}",
            basis.length(),
            actuators.length()
        )));
    }
    Ok(())
}

/// `Σ_k cos(m ĉ_k)` and `Σ_k sin(m ĉ_k)` over the `M` scaled centers
/// `ĉ_k = 2π c_k / L = π(2k - 1)/M`. Both vanish for `1 <= m < M`.
pub fn center_trig_sums(count: usize, m: usize) -> (f64, f64) {
    (1..=count).fold((0.0, 0.0), |(c, s), k| {
        let angle = m as f64 * std::f64::consts::PI * (2 * k - 1) as f64 / count as f64;
        (c + angle.cos(), s + angle.sin())
    })
}

/// Closed-form smallest eigenvalue `ϑ_M` of `Θ` for periodic actuators.
pub fn min_theta_closed_form(count: usize, fraction: f64) -> Result<f64> {
    if count < 1 {
        return Err(Error::InvalidParameter("M must be at least 1".into()));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter(format!("r must lie in (0, 1), got {fraction}")));
    }
    let r = fraction;
    let m = count as f64;
    let wave = match count {
        1 | 2 => return Ok(r),
        c if c % 2 == 1 => m - 1.0,
        _ => m - 2.0,
    };
    let arg = wave * r * std::f64::consts::PI / (2.0 * m);
    let scale = 2.0 * m / (wave * r * std::f64::consts::PI);
    Ok(r * scale * scale * arg.sin().powi(2))
}

/// Large-`M` limit `ϑ_∞ = r (2/(rπ))² sin²(rπ/2)`.
pub fn theta_infinity(fraction: f64) -> f64 {
    let x = fraction * std::f64::consts::PI / 2.0;
    fraction * (x.sin() / x).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectSumCertificate {
    pub ok: bool,
    pub condition: f64,
}

#[derive(Debug, Clone)]
pub struct ObliqueProjector {
    basis: SpectralBasis,
    actuators: ActuatorSet,
    gram: DMatrix<f64>,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    condition: f64,
}

impl ObliqueProjector {
    /// Builds the projector for the first `M` modes of `basis` and the `M`
    /// actuators of `actuators`.
    pub fn new(basis: &SpectralBasis, actuators: &ActuatorSet) -> Result<Self> {
        let basis = basis.truncated(actuators.count())?;
        let gram = gram_matrix(&basis, actuators)?;
        let sv = gram.singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        let lu = gram.clone().lu();
        Ok(Self { basis, actuators: actuators.clone(), gram, lu, condition })
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    pub fn actuators(&self) -> &ActuatorSet {
        &self.actuators
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn count(&self) -> usize {
        self.actuators.count()
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn certify_direct_sum(&self) -> DirectSumCertificate {
        let ok = self.lu.is_invertible() && self.condition.is_finite() && self.condition < CONDITION_LIMIT;
        DirectSumCertificate { ok, condition: self.condition }
    }

    fn require_certified(&self) -> Result<()> {
        let cert = self.certify_direct_sum();
        if !cert.ok {
            return Err(Error::SingularGram { condition: cert.condition });
        }
        Ok(())
    }

    /// Gram matrix of the normalized families, `B_ij = (ē_i, 1̄_{ω_j})`.
    pub fn normalized_gram(&self) -> DMatrix<f64> {
        let act = self.actuators.support_measure().sqrt();
        DMatrix::from_fn(self.count(), self.count(), |i, j| {
            self.gram[(i, j)] / (self.basis.norm_squared_unchecked(i + 1).sqrt() * act)
        })
    }

    /// `Θ = B Bᵀ`.
    pub fn theta_matrix(&self) -> DMatrix<f64> {
        let b = self.normalized_gram();
        &b * b.transpose()
    }

    /// Smallest eigenvalue of `Θ`. For periodic bases `Θ` is diagonal and the
    /// minimum is read off the diagonal once that has been checked; other
    /// boundary conditions use a symmetric eigensolver.
    pub fn theta_min_eigenvalue(&self) -> Result<f64> {
        let theta = self.theta_matrix();
        if self.basis.bc() == BoundaryKind::Periodic {
            let n = theta.nrows();
            let diag_max = (0..n).map(|i| theta[(i, i)].abs()).fold(0.0, f64::max);
            let mut off_max: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        off_max = off_max.max(theta[(i, j)].abs());
                    }
                }
            }
            if off_max <= THETA_DIAGONAL_TOL * diag_max {
                return Ok((0..n).map(|i| theta[(i, i)]).fold(f64::INFINITY, f64::min));
            }
        }
        Ok(SymmetricEigen::new(theta).eigenvalues.min())
    }

    /// `‖P‖_{L(L²)} = (min eig Θ)^{-1/2}`.
    pub fn projection_norm(&self) -> Result<f64> {
        self.require_certified()?;
        let min_eig = self.theta_min_eigenvalue()?;
        if min_eig <= 0.0 {
            return Err(Error::SingularGram { condition: self.condition });
        }
        Ok(min_eig.powf(-0.5))
    }

    /// Solves `G u = m` for the actuator amplitudes given the moments
    /// `m_i = (e_i, h)`, `i = 1..=M`.
    pub fn amplitudes(&self, moments: &[f64]) -> Result<Vec<f64>> {
        self.require_certified()?;
        if moments.len() != self.count() {
            return Err(Error::LengthMismatch { expected: self.count(), got: moments.len() });
        }
        let rhs = DVector::from_column_slice(moments);
        let u = self
            .lu
            .solve(&rhs)
            .ok_or(Error::SingularGram { condition: self.condition })?;
        Ok(u.iter().copied().collect())
    }

    /// Binds the projector to a mesh so grid functions can be projected.
    pub fn on_grid(&self, grid: &Grid) -> Result<GridProjection<'_>> {
        if (grid.length() - self.basis.length()).abs() > 1e-12 * grid.length() {
            return Err(Error::InvalidParameter(format!(
                "grid length {} differs from projector length {}",
                grid.length(),
                self.basis.length()
            )));
        }
        let nodes = grid.nodes();
        let modes = (1..=self.count())
            .map(|i| grid.sample_mode(&self.basis, i, 0))
            .collect::<Result<Vec<_>>>()?;
        let indicators = (1..=self.count())
            .map(|j| self.actuators.sample(j, &nodes))
            .collect::<Result<Vec<_>>>()?;
        let mass = grid.mass_matrix();
        let m_ind: Vec<Vec<f64>> = indicators.iter().map(|v| mass.apply(v)).collect();
        let gram = DMatrix::from_fn(self.count(), self.count(), |i, j| {
            modes[i].iter().zip(&m_ind[j]).map(|(a, b)| a * b).sum()
        });
        let sv = gram.singular_values();
        let condition = if sv.min() > 0.0 { sv.max() / sv.min() } else { f64::INFINITY };
        let lu = gram.clone().lu();
        if !(lu.is_invertible() && condition < CONDITION_LIMIT) {
            return Err(Error::SingularGram { condition });
        }
        Ok(GridProjection { projector: self, grid: grid.clone(), modes, indicators, gram, lu })
    }

    /// Applies `P` to a grid function: returns the amplitudes `u` and the grid
    /// function `Σ u_j 1_{ω_j}`.
    pub fn apply_projection(&self, grid: &Grid, h: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.on_grid(grid)?.apply(h)
    }
}

/// An [`ObliqueProjector`] discretized on a mesh: eigenfunctions and
/// actuators are sampled at the nodes and every inner product, including the
/// Gram entries, uses the mass matrix. This keeps `P` an exact projection on
/// grid functions.
#[derive(Debug, Clone)]
pub struct GridProjection<'a> {
    projector: &'a ObliqueProjector,
    grid: Grid,
    modes: Vec<Vec<f64>>,
    indicators: Vec<Vec<f64>>,
    gram: DMatrix<f64>,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl GridProjection<'_> {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn projector(&self) -> &ObliqueProjector {
        self.projector
    }

    /// `(e_i, 1_{ω_j})_M`.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// `m_i = (e_i, h)_M` by mass-matrix quadrature.
    pub fn moments(&self, h: &[f64]) -> Result<Vec<f64>> {
        if h.len() != self.grid.len() {
            return Err(Error::LengthMismatch { expected: self.grid.len(), got: h.len() });
        }
        let mh = self.grid.mass_matrix().apply(h);
        Ok(self
            .modes
            .iter()
            .map(|e| e.iter().zip(&mh).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn actuator_combination(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for (uj, ind) in u.iter().zip(&self.indicators) {
            for (o, v) in out.iter_mut().zip(ind) {
                *o += uj * v;
            }
        }
        out
    }

    pub fn apply(&self, h: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let rhs = DVector::from_vec(self.moments(h)?);
        let u: Vec<f64> = self
            .lu
            .solve(&rhs)
            .ok_or(Error::SingularGram { condition: f64::INFINITY })?
            .iter()
            .copied()
            .collect();
        let ph = self.actuator_combination(&u);
        Ok((u, ph))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn periodic(m: usize, r: f64) -> ObliqueProjector {
        let basis = SpectralBasis::periodic(1.0, m).unwrap();
        let act = ActuatorSet::build(m, r, 1.0).unwrap();
        ObliqueProjector::new(&basis, &act).unwrap()
    }

    #[test]
    fn gram_small_cases() {
        let p = periodic(1, 0.2);
        assert!((p.gram()[(0, 0)] - 0.2).abs() < 1e-15);
        let p = periodic(3, 0.2);
        for j in 0..3 {
            assert!((p.gram()[(0, j)] - 1.0 / 15.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gram_matches_product_formula() {
        // (L/π) sin(mδ) sin(mĉ_j)/m for the sine rows, cos for the cosine rows.
        let (m_act, r) = (7, 0.3);
        let p = periodic(m_act, r);
        let delta = r * std::f64::consts::PI / m_act as f64;
        for (j, &c) in p.actuators().centers().iter().enumerate() {
            let chat = 2.0 * std::f64::consts::PI * c;
            for i in 2..=m_act {
                let m = (i / 2) as f64;
                let trig = if i % 2 == 0 { (m * chat).sin() } else { (m * chat).cos() };
                let want = (m * delta).sin() * trig / (std::f64::consts::PI * m);
                assert!((p.gram()[(i - 1, j)] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        let basis = SpectralBasis::periodic(2.0, 3).unwrap();
        let act = ActuatorSet::build(3, 0.2, 1.0).unwrap();
        assert!(ObliqueProjector::new(&basis, &act).is_err());
    }

    #[test]
    fn direct_sum_certified_for_many_m() {
        for m in 1..=64 {
            let cert = periodic(m, 0.2).certify_direct_sum();
            assert!(cert.ok, "M={m} condition {}", cert.condition);
        }
        for bc in [BoundaryKind::Dirichlet, BoundaryKind::Neumann] {
            for m in 1..=32 {
                let basis = SpectralBasis::new(bc, 1.0, m).unwrap();
                let act = ActuatorSet::build(m, 0.2, 1.0).unwrap();
                assert!(ObliqueProjector::new(&basis, &act).unwrap().certify_direct_sum().ok);
            }
        }
    }

    #[test]
    fn theta_is_diagonal_for_periodic() {
        let p = periodic(3, 0.2);
        let theta = p.theta_matrix();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(theta[(i, j)].abs() <= 1e-12);
                }
            }
        }
        let p1 = periodic(1, 0.37);
        assert!((p1.theta_matrix()[(0, 0)] - 0.37).abs() < 1e-15);
    }

    #[test]
    fn theta_m4_contains_half_wave_entry() {
        let r = 0.2;
        let p = periodic(4, r);
        let theta = p.theta_matrix();
        let pi = std::f64::consts::PI;
        let want = 2.0 * r * (2.0 / (r * pi)).powi(2) * (r * pi / 2.0).sin().powi(2);
        assert!((0..4).any(|i| (theta[(i, i)] - want).abs() < 1e-12));
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(min_theta_closed_form(2, 0.2).unwrap(), 0.2);
        assert_eq!(min_theta_closed_form(1, 0.5).unwrap(), 0.5);
        assert!(min_theta_closed_form(0, 0.2).is_err());
        assert!(min_theta_closed_form(3, 1.0).is_err());
        let x = 0.1 * std::f64::consts::PI;
        assert!((theta_infinity(0.2) - 0.2 * (x.sin() / x).powi(2)).abs() < 1e-15);
        assert!((theta_infinity(0.2) - 0.193506).abs() < 1e-6);
        let mut prev = f64::INFINITY;
        for m in (3..=10_001).step_by(2) {
            let v = min_theta_closed_form(m, 0.2).unwrap();
            assert!(v > theta_infinity(0.2) && v < prev);
            prev = v;
        }
        // The gap closes like 1/M.
        let gap = |m: usize| min_theta_closed_form(m, 0.2).unwrap() - theta_infinity(0.2);
        assert!(gap(10_001) < 2e-6);
        assert!((gap(2001) / gap(4001) - 2.0).abs() < 1e-2);
    }

    #[test]
    fn norm_for_small_m() {
        assert!((periodic(1, 0.2).projection_norm().unwrap() - 5f64.sqrt()).abs() < 1e-12);
        assert!((periodic(2, 0.5).projection_norm().unwrap() - 2f64.sqrt()).abs() < 1e-12);
        for m in 1..=40 {
            assert!(periodic(m, 0.2).projection_norm().unwrap() <= theta_infinity(0.2).powf(-0.5));
        }
    }

    #[test]
    fn trig_sums_vanish_below_m() {
        for m_act in 2..=64 {
            for m in 1..m_act {
                let (c, s) = center_trig_sums(m_act, m);
                assert!(c.abs() < 1e-10 && s.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn projection_on_range_and_kernel() {
        for &step in &[1e-3, 1e-4] {
            let grid = Grid::build(step).unwrap();
            let p = periodic(5, 0.2);
            let gp = p.on_grid(&grid).unwrap();
            let h = gp.actuator_combination(&[1.0, 0.0, 0.0, 0.0, 0.0]);
            let (u, ph) = gp.apply(&h).unwrap();
            assert!((u[0] - 1.0).abs() < 1e-12);
            assert!(u[1..].iter().all(|v| v.abs() < 1e-12));
            let err: f64 = ph.iter().zip(&h).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-12);
            // The discrete Gram converges to the exact one at first order.
            let gap = (gp.gram() - p.gram()).abs().max();
            assert!(gap < 2.0 * step, "{gap}");
        }

        let grid = Grid::build(1e-3).unwrap();
        let p = periodic(5, 0.2);
        let gp = p.on_grid(&grid).unwrap();
        let basis6 = SpectralBasis::periodic(1.0, 6).unwrap();
        let e6 = grid.sample_mode(&basis6, 6, 0).unwrap();
        let (u, _) = gp.apply(&e6).unwrap();
        assert!(u.iter().all(|v| v.abs() < 1e-9));
    }
}
