//! Trapezoid rule on circles, spectrally accurate for integrands analytic
//! near the contour.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 64;

/// Nodes `c + R e^{iθ_k}` and weights `i R e^{iθ_k} 2π/M`, so that
/// `∮ f dz ≈ Σ f(z_k) dz_k`.
pub fn circle_nodes(center: Complex64, radius: f64, m: usize) -> Vec<(Complex64, Complex64)> {
    let h = 2.0 * PI / m as f64;
    (0..m)
        .map(|k| {
            let u = Complex64::from_polar(1.0, h * k as f64);
            (center + radius * u, Complex64::new(0.0, radius * h) * u)
        })
        .collect()
}

fn check_points(m: usize) -> Result<()> {
    if m < MIN_POINTS {
        return Err(Error::InvalidConfig(format!(
            "quadrature needs at least {MIN_POINTS} points per circle, got {m}"
        )));
    }
    Ok(())
}

/// `∮_{|z-c|=R} f(z) dz` counter-clockwise with `m` equispaced points.
pub fn contour_integral<F>(mut f: F, center: Complex64, radius: f64, m: usize) -> Result<Complex64>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    check_points(m)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for (index, (z, dz)) in circle_nodes(center, radius, m).into_iter().enumerate() {
        let value = f(z)?;
        if !value.is_finite() {
            return Err(Error::NonFinite { index });
        }
        sum += value * dz;
    }
    Ok(sum)
}
