//! Prescribed principal parts of meromorphic differentials.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoleLocation {
    Finite(Complex64),
    Infinity,
}

/// A pole with coefficients `a_1, ..., a_m`.
///
/// At a finite point `q` the principal part is `Σ a_n dz/(z-q)^n`; at infinity
/// it is `Σ a_n dw/w^n` in the chart `w = 1/z`, i.e. `-Σ a_n z^(n-2) dz`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pole {
    pub at: PoleLocation,
    pub coefficients: Vec<Complex64>,
}

impl Pole {
    pub fn new(at: PoleLocation, coefficients: Vec<Complex64>) -> Self {
        Pole { at, coefficients }
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn residue(&self) -> Complex64 {
        self.coefficients
            .first()
            .copied()
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }
}

/// Principal parts per vertex (indexed like the graph's vertices) together
/// with the exclusion radius `r` around each pole.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalParts {
    pub radius: f64,
    pub poles: Vec<Vec<Pole>>,
}

impl PrincipalParts {
    pub fn empty(g: &Graph, radius: f64) -> Self {
        PrincipalParts {
            radius,
            poles: vec![Vec::new(); g.vertex_count()],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.poles.iter().all(Vec::is_empty)
    }

    pub fn at(&self, v: usize) -> &[Pole] {
        self.poles.get(v).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn residue_sum(&self, v: usize) -> Complex64 {
        self.at(v).iter().map(Pole::residue).sum()
    }

    /// Largest pole order, 0 without poles.
    pub fn max_order(&self) -> usize {
        self.poles
            .iter()
            .flatten()
            .map(Pole::order)
            .max()
            .unwrap_or(0)
    }

    pub fn has_infinity(&self, v: usize) -> bool {
        self.at(v)
            .iter()
            .any(|p| p.at == PoleLocation::Infinity)
    }

    /// Structural checks that do not need gluing data: one list per vertex,
    /// finite distinct locations, at most one pole at infinity per sphere.
    pub fn check_shape(&self, g: &Graph) -> Result<()> {
        if self.poles.len() != g.vertex_count() {
            return Err(Error::InvalidPoles(format!(
                "expected {} pole lists, found {}",
                g.vertex_count(),
                self.poles.len()
            )));
        }
        if !self.is_empty() && !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::InvalidPoles(format!(
                "exclusion radius must be positive, got {}",
                self.radius
            )));
        }
        for (v, poles) in self.poles.iter().enumerate() {
            let name = g.vertex_id(v);
            let mut infinite = 0;
            for (i, pole) in poles.iter().enumerate() {
                if pole.coefficients.is_empty() {
                    return Err(Error::InvalidPoles(format!(
                        "pole {i} on `{name}` has no coefficients"
                    )));
                }
                if pole.coefficients.iter().any(|a| !a.is_finite()) {
                    return Err(Error::InvalidPoles(format!(
                        "pole {i} on `{name}` has a non-finite coefficient"
                    )));
                }
                match pole.at {
                    PoleLocation::Infinity => infinite += 1,
                    PoleLocation::Finite(q) => {
                        if !q.is_finite() {
                            return Err(Error::InvalidPoles(format!(
                                "pole {i} on `{name}` is not finite; use \"inf\""
                            )));
                        }
                        for other in &poles[..i] {
                            if let PoleLocation::Finite(q2) = other.at {
                                if (q - q2).norm() < 2.0 * self.radius {
                                    return Err(Error::InvalidPoles(format!(
                                        "poles at {q} and {q2} on `{name}` are closer than 2r"
                                    )));
                                }
                            }
                        }
                    }
                }
            }
            if infinite > 1 {
                return Err(Error::InvalidPoles(format!(
                    "more than one pole at infinity on `{name}`"
                )));
            }
        }
        Ok(())
    }
}
