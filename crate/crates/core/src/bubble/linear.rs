//! Exact least squares for the coefficients that enter a model linearly.

use nalgebra::{DMatrix, DVector};

/// Least-squares coefficients of `y` on the given basis columns, together
/// with the residual sum of squares. Columns are normalised before the SVD
/// so that badly scaled bases (e.g. steep exponentials) stay solvable; rank
/// deficient bases get the minimum-norm solution.
pub fn solve_slaved(columns: &[Vec<f64>], y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let n = y.len();
    let k = columns.len();
    if k == 0 || columns.iter().any(|c| c.len() != n) {
        return None;
    }
    let mut norms = Vec::with_capacity(k);
    let mut design = DMatrix::<f64>::zeros(n, k);
    for (j, col) in columns.iter().enumerate() {
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() {
            return None;
        }
        let norm = if norm > 0.0 { norm } else { 1.0 };
        norms.push(norm);
        for (i, v) in col.iter().enumerate() {
            design[(i, j)] = v / norm;
        }
    }
    let rhs = DVector::from_column_slice(y);
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let scaled = svd.solve(&rhs, smax * 1e-13).ok()?;
    let coef: Vec<f64> = scaled.iter().zip(&norms).map(|(c, s)| c / s).collect();
    if coef.iter().any(|c| !c.is_finite()) {
        return None;
    }
    let rss = residuals(columns, &coef, y).iter().map(|r| r * r).sum();
    Some((coef, rss))
}

pub fn residuals(columns: &[Vec<f64>], coef: &[f64], y: &[f64]) -> Vec<f64> {
    y.iter()
        .enumerate()
        .map(|(i, yi)| yi - columns.iter().zip(coef).map(|(c, b)| b * c[i]).sum::<f64>())
        .collect()
}
