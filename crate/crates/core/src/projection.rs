//! Euclidean projection onto a bounded convex set.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProjectionSet {
    /// Axis-aligned box `lower <= y <= upper`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Closed Euclidean ball.
    Ball { center: Vec<f64>, radius: f64 },
}

impl ProjectionSet {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let set = ProjectionSet::Box { lower, upper };
        set.validate()?;
        Ok(set)
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let set = ProjectionSet::Ball { center, radius };
        set.validate()?;
        Ok(set)
    }

    /// Symmetric box `[-half, half]^dim`.
    pub fn cube(dim: usize, half: f64) -> Result<Self> {
        Self::boxed(vec![-half; dim], vec![half; dim])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProjectionSet::Box { lower, upper } => {
                if lower.len() != upper.len() || lower.is_empty() {
                    return Err(Error::domain("box bounds must be nonempty and of equal length"));
                }
                if lower.iter().chain(upper).any(|v| !v.is_finite()) {
                    return Err(Error::domain("box bounds must be finite"));
                }
                if lower.iter().zip(upper).any(|(l, u)| l > u) {
                    return Err(Error::domain("box has lower > upper"));
                }
            }
            ProjectionSet::Ball { center, radius } => {
                if center.is_empty() || center.iter().any(|v| !v.is_finite()) {
                    return Err(Error::domain("ball center must be a finite nonempty vector"));
                }
                if !(radius.is_finite() && *radius >= 0.0) {
                    return Err(Error::domain("ball radius must be finite and nonnegative"));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            ProjectionSet::Box { lower, .. } => lower.len(),
            ProjectionSet::Ball { center, .. } => center.len(),
        }
    }

    /// Smallest axis-aligned box containing the set.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            ProjectionSet::Box { lower, upper } => (lower.clone(), upper.clone()),
            ProjectionSet::Ball { center, radius } => {
                (center.iter().map(|c| c - radius).collect(), center.iter().map(|c| c + radius).collect())
            }
        }
    }

    fn check_dim(&self, y: &DVector<f64>) -> Result<()> {
        if y.len() != self.dim() {
            return Err(Error::domain(format!("point has dimension {} but set has {}", y.len(), self.dim())));
        }
        Ok(())
    }
}

/// Euclidean projection `P_X(y)`.
pub fn project(set: &ProjectionSet, y: &DVector<f64>) -> Result<DVector<f64>> {
    set.check_dim(y)?;
    Ok(match set {
        ProjectionSet::Box { lower, upper } => DVector::from_fn(y.len(), |j, _| y[j].clamp(lower[j], upper[j])),
        ProjectionSet::Ball { center, radius } => {
            let c = DVector::from_column_slice(center);
            let offset = y - &c;
            let dist = offset.norm();
            if dist <= *radius {
                y.clone()
            } else if dist == 0.0 || *radius == 0.0 {
                c
            } else {
                c + offset * (*radius / dist)
            }
        }
    })
}

/// Closed-set membership. Box bounds are exact; the ball allows a relative
/// `1e-12` slack on the radius so radially rescaled points are members.
pub fn contains(set: &ProjectionSet, y: &DVector<f64>) -> Result<bool> {
    set.check_dim(y)?;
    Ok(match set {
        ProjectionSet::Box { lower, upper } => {
            y.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| *l <= *v && *v <= *u)
        }
        ProjectionSet::Ball { center, radius } => {
            let dist = (y - DVector::from_column_slice(center)).norm();
            dist <= radius * (1.0 + 1e-12)
        }
    })
}
