//! Dense reference implementations shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use ks_stab::{ActuatorSet, Grid};

/// Dense periodic hat-function mass matrix, built entry by entry.
pub fn dense_mass(n: usize, h: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = 4.0 * h / 6.0;
        m[(i, (i + 1) % n)] += h / 6.0;
        m[(i, (i + n - 1) % n)] += h / 6.0;
    }
    m
}

/// Projection onto the actuators along the mesh-orthogonal complement of the
/// first `M` sampled modes, solved densely from its defining constraints.
pub struct DenseOracle {
    e: DMatrix<f64>,
    ind: DMatrix<f64>,
    mass: DMatrix<f64>,
}

impl DenseOracle {
    pub fn new(m: usize, r: f64, grid: &Grid) -> Self {
        let act = ActuatorSet::build(m, r, 1.0).unwrap();
        let n = grid.len();
        let e = DMatrix::from_fn(n, m, |k, i| {
            let x = grid.node(k);
            if i == 0 {
                1.0
            } else if i % 2 == 1 {
                (2.0 * PI * i.div_ceil(2) as f64 * x).sin()
            } else {
                (2.0 * PI * (i / 2) as f64 * x).cos()
            }
        });
        let ind = DMatrix::from_fn(n, m, |k, j| {
            let (a, b) = act.support(j + 1).unwrap();
            let x = grid.node(k);
            if x > a && x < b { 1.0 } else { 0.0 }
        });
        Self { e, ind, mass: dense_mass(n, grid.step()) }
    }

    pub fn project(&self, h: &DVector<f64>) -> DVector<f64> {
        let et_m = self.e.transpose() * &self.mass;
        let a = &et_m * &self.ind;
        let rhs = &et_m * h;
        let u = a.full_piv_lu().solve(&rhs).unwrap();
        &self.ind * u
    }
}

pub fn rel(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(1e-300)
}

