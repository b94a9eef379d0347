//! Proximal operators for the edge penalty.
//!
//! For an edge with L2 coefficient `c1` and L1 coefficient `c2`, the
//! consensus update solves
//!
//! ```text
//! min  c1 ||z_i - z_j||_2 + c2 ||z_i - z_j||_1
//!      + (rho/2) (||z_i - a||^2 + ||z_j - b||^2)
//! ```
//!
//! In the variables `s = z_i + z_j`, `d = z_i - z_j` the quadratic part
//! becomes `(rho/4)(||s - (a+b)||^2 + ||d - (a-b)||^2)`, so the problem
//! separates: `s* = a + b` and `d*` is the sparse-group shrinkage of `a - b`,
//! i.e. soft-thresholding followed by block shrinkage.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Per-edge parameters of the consensus update.
#[derive(Debug, Clone, Copy)]
pub struct EdgeProxParams {
    /// ADMM penalty, strictly positive.
    pub rho: f64,
    /// L2 edge coefficient, `lambda * (1 - alpha) * w_ij`.
    pub c1: f64,
    /// L1 edge coefficient, `lambda * alpha * w_ij`.
    pub c2: f64,
}

impl EdgeProxParams {
    pub fn new(rho: f64, c1: f64, c2: f64) -> Result<Self> {
        if !rho.is_finite() || rho <= 0.0 {
            return Err(Error::invalid(format!("rho must be positive, got {rho}")));
        }
        if !c1.is_finite() || c1 < 0.0 || !c2.is_finite() || c2 < 0.0 {
            return Err(Error::invalid(format!(
                "edge coefficients must be finite and non-negative, got c1={c1}, c2={c2}"
            )));
        }
        Ok(EdgeProxParams { rho, c1, c2 })
    }
}

/// Componentwise `sign(v_k) * max(|v_k| - t, 0)`.
pub fn soft_threshold(v: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::invalid(format!(
            "soft threshold must be non-negative, got {t}"
        )));
    }
    Ok(v.map(|x| x.signum() * (x.abs() - t).max(0.0)))
}

/// Block shrinkage `max(1 - t/||v||_2, 0) * v`; the zero vector maps to
/// itself for any threshold.
pub fn group_shrink(v: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::invalid(format!(
            "group shrinkage threshold must be non-negative, got {t}"
        )));
    }
    let norm = v.norm();
    if norm == 0.0 {
        return Ok(v.clone());
    }
    let factor = (1.0 - t / norm).max(0.0);
    Ok(v * factor)
}

/// Exact minimizer of the edge objective above.
///
/// Returns `(z_ij, z_ji)` with `z_ij + z_ji = a + b`; the two copies agree
/// exactly when the shrunken difference vanishes.
pub fn edge_prox(
    a: &DVector<f64>,
    b: &DVector<f64>,
    params: &EdgeProxParams,
) -> Result<(DVector<f64>, DVector<f64>)> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "edge prox inputs have lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let thresholded = soft_threshold(&(a - b), 2.0 * params.c2 / params.rho)?;
    let delta = group_shrink(&thresholded, 2.0 * params.c1 / params.rho)?;
    let sum = a + b;
    let z_ij = (&sum + &delta) * 0.5;
    let z_ji = (sum - delta) * 0.5;
    Ok((z_ij, z_ji))
}
