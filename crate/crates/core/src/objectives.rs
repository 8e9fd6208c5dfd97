//! Per-agent convex objectives and reference minimizers of their sum.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projection::{contains, project, ProjectionSet};

fn default_scale() -> f64 {
    1.0
}

/// A convex objective `f_i : R^m -> R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    /// `scale * sum_j |x_j - c_j|`.
    AbsoluteDeviation {
        center: Vec<f64>,
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// `sum_j q_j (x_j - c_j)^2` with `q_j >= 0`.
    Quadratic {
        center: Vec<f64>,
        weights: Vec<f64>,
    },
    Constant {
        value: f64,
        dim: usize,
    },
}

impl ObjectiveSpec {
    pub fn absolute(center: &[f64]) -> Self {
        ObjectiveSpec::AbsoluteDeviation { center: center.to_vec(), scale: 1.0 }
    }

    pub fn quadratic(center: &[f64]) -> Self {
        ObjectiveSpec::Quadratic { center: center.to_vec(), weights: vec![1.0; center.len()] }
    }

    pub fn constant(value: f64, dim: usize) -> Self {
        ObjectiveSpec::Constant { value, dim }
    }

    pub fn dim(&self) -> usize {
        match self {
            ObjectiveSpec::AbsoluteDeviation { center, .. } | ObjectiveSpec::Quadratic { center, .. } => center.len(),
            ObjectiveSpec::Constant { dim, .. } => *dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ObjectiveSpec::AbsoluteDeviation { center, scale } => {
                if center.is_empty() || !(scale.is_finite() && *scale >= 0.0) {
                    return Err(Error::domain("absolute deviation needs a nonempty center and scale >= 0"));
                }
            }
            ObjectiveSpec::Quadratic { center, weights } => {
                if center.is_empty() || center.len() != weights.len() {
                    return Err(Error::domain("quadratic center and weights must have equal nonzero length"));
                }
                if weights.iter().any(|q| !(q.is_finite() && *q >= 0.0)) {
                    return Err(Error::domain("quadratic weights must be finite and nonnegative"));
                }
            }
            ObjectiveSpec::Constant { value, dim } => {
                if *dim == 0 || !value.is_finite() {
                    return Err(Error::domain("constant objective needs dim >= 1 and a finite value"));
                }
            }
        }
        Ok(())
    }

    pub fn center(&self) -> Option<&[f64]> {
        match self {
            ObjectiveSpec::AbsoluteDeviation { center, .. } | ObjectiveSpec::Quadratic { center, .. } => Some(center),
            ObjectiveSpec::Constant { .. } => None,
        }
    }

    fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::domain(format!("point has dimension {} but objective has {}", x.len(), self.dim())));
        }
        Ok(())
    }
}

pub fn evaluate(spec: &ObjectiveSpec, x: &DVector<f64>) -> Result<f64> {
    spec.check_dim(x)?;
    Ok(match spec {
        ObjectiveSpec::AbsoluteDeviation { center, scale } => {
            scale * x.iter().zip(center).map(|(v, c)| (v - c).abs()).sum::<f64>()
        }
        ObjectiveSpec::Quadratic { center, weights } => {
            x.iter().zip(center).zip(weights).map(|((v, c), q)| q * (v - c) * (v - c)).sum()
        }
        ObjectiveSpec::Constant { value, .. } => *value,
    })
}

/// Deterministic subgradient selection. At a kink of the absolute deviation
/// the coordinate gets 0.
pub fn subgradient(spec: &ObjectiveSpec, x: &DVector<f64>) -> Result<DVector<f64>> {
    spec.check_dim(x)?;
    Ok(match spec {
        ObjectiveSpec::AbsoluteDeviation { center, scale } => DVector::from_fn(x.len(), |j, _| {
            let diff = x[j] - center[j];
            if diff > 0.0 {
                *scale
            } else if diff < 0.0 {
                -scale
            } else {
                0.0
            }
        }),
        ObjectiveSpec::Quadratic { center, weights } => {
            DVector::from_fn(x.len(), |j, _| 2.0 * weights[j] * (x[j] - center[j]))
        }
        ObjectiveSpec::Constant { dim, .. } => DVector::zeros(*dim),
    })
}

/// An `L` bounding the Euclidean norm of every selected subgradient on `set`
/// (`None` means all of `R^m`).
pub fn subgradient_bound(spec: &ObjectiveSpec, set: Option<&ProjectionSet>) -> Result<f64> {
    match spec {
        ObjectiveSpec::AbsoluteDeviation { center, scale } => Ok(scale * (center.len() as f64).sqrt()),
        ObjectiveSpec::Constant { .. } => Ok(0.0),
        ObjectiveSpec::Quadratic { center, weights } => {
            if weights.iter().all(|&q| q == 0.0) {
                return Ok(0.0);
            }
            let set = set.ok_or_else(|| {
                Error::UnboundedSubgradient("quadratic objective has unbounded gradients on R^m".into())
            })?;
            if set.dim() != center.len() {
                return Err(Error::domain("set and objective dimensions differ"));
            }
            let (lower, upper) = set.bounding_box();
            let sq: f64 = (0..center.len())
                .map(|j| {
                    let reach = (lower[j] - center[j]).abs().max((upper[j] - center[j]).abs());
                    (2.0 * weights[j] * reach).powi(2)
                })
                .sum();
            Ok(sq.sqrt())
        }
    }
}

/// Network-wide bound: the largest individual bound.
pub fn network_subgradient_bound(specs: &[ObjectiveSpec], set: Option<&ProjectionSet>) -> Result<f64> {
    specs.iter().try_fold(0.0_f64, |acc, s| Ok(acc.max(subgradient_bound(s, set)?)))
}

pub fn sum_value(specs: &[ObjectiveSpec], x: &DVector<f64>) -> Result<f64> {
    specs.iter().map(|s| evaluate(s, x)).sum()
}

/// Relative grid resolution of the fallback minimizer.
pub const GRID_RESOLUTION: f64 = 1e-4;

/// A minimizer of `sum_i f_i` over `set` and the minimal value.
///
/// Exact for the absolute-deviation family (weighted coordinatewise median)
/// and the quadratic family (weighted mean), grid-refined for mixtures in
/// dimension one or two.
pub fn sum_minimizer(specs: &[ObjectiveSpec], set: &ProjectionSet) -> Result<(DVector<f64>, f64)> {
    let Some(first) = specs.first() else {
        return Err(Error::domain("need at least one objective"));
    };
    let m = first.dim();
    for s in specs {
        s.validate()?;
        if s.dim() != m {
            return Err(Error::domain("objectives disagree on dimension"));
        }
    }
    if set.dim() != m {
        return Err(Error::domain("projection set dimension differs from objectives"));
    }
    let (lower, upper) = set.bounding_box();
    let mid: Vec<f64> = lower.iter().zip(&upper).map(|(l, u)| 0.5 * (l + u)).collect();

    let is_abs =
        |s: &ObjectiveSpec| matches!(s, ObjectiveSpec::AbsoluteDeviation { .. } | ObjectiveSpec::Constant { .. });
    let is_quad = |s: &ObjectiveSpec| matches!(s, ObjectiveSpec::Quadratic { .. } | ObjectiveSpec::Constant { .. });

    let closed_form = if specs.iter().all(is_abs) {
        Some(DVector::from_fn(m, |j, _| {
            let pts: Vec<(f64, f64)> = specs
                .iter()
                .filter_map(|s| match s {
                    ObjectiveSpec::AbsoluteDeviation { center, scale } if *scale > 0.0 => Some((center[j], *scale)),
                    _ => None,
                })
                .collect();
            weighted_median(pts).unwrap_or(mid[j])
        }))
    } else if specs.iter().all(is_quad) {
        Some(DVector::from_fn(m, |j, _| {
            let (num, den) = specs.iter().fold((0.0, 0.0), |(num, den), s| match s {
                ObjectiveSpec::Quadratic { center, weights } => (num + weights[j] * center[j], den + weights[j]),
                _ => (num, den),
            });
            if den > 0.0 {
                num / den
            } else {
                mid[j]
            }
        }))
    } else {
        None
    };

    if let Some(x) = closed_form {
        // both families are coordinatewise separable, so clamping to a box is exact
        let candidate = match set {
            ProjectionSet::Box { .. } => Some(project(set, &x)?),
            ProjectionSet::Ball { .. } if contains(set, &x)? => Some(x),
            ProjectionSet::Ball { .. } => None,
        };
        if let Some(x) = candidate {
            let value = sum_value(specs, &x)?;
            return Ok((x, value));
        }
    }
    grid_minimizer(specs, set)
}

fn weighted_median(mut pts: Vec<(f64, f64)>) -> Option<f64> {
    if pts.is_empty() {
        return None;
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pts.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    for (idx, &(c, w)) in pts.iter().enumerate() {
        acc += w;
        let half = 0.5 * total;
        if (acc - half).abs() <= 1e-12 * total {
            // flat segment between this center and the next one
            let next = pts.get(idx + 1).map_or(c, |p| p.0);
            return Some(0.5 * (c + next));
        }
        if acc > half {
            return Some(c);
        }
    }
    pts.last().map(|p| p.0)
}

fn grid_minimizer(specs: &[ObjectiveSpec], set: &ProjectionSet) -> Result<(DVector<f64>, f64)> {
    let m = set.dim();
    if m > 2 {
        return Err(Error::Unsupported(format!(
            "no closed-form minimizer for this objective mixture and grid fallback is limited to m <= 2 (m = {m})"
        )));
    }
    let (lower, upper) = set.bounding_box();
    let width: Vec<f64> = lower.iter().zip(&upper).map(|(l, u)| u - l).collect();
    let target: Vec<f64> = width.iter().map(|w| w * GRID_RESOLUTION).collect();
    let points_per_axis = if m == 1 { 10_001 } else { 101 };

    let mut lo = lower.clone();
    let mut hi = upper.clone();
    let mut best: Option<(DVector<f64>, f64)> = None;
    let mut refined_at_target = false;
    loop {
        let step: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| (h - l) / (points_per_axis - 1) as f64).collect();
        let mut idx = vec![0usize; m];
        loop {
            let x = DVector::from_fn(m, |j, _| (lo[j] + step[j] * idx[j] as f64).clamp(lower[j], upper[j]));
            if contains(set, &x)? {
                let v = sum_value(specs, &x)?;
                if best.as_ref().is_none_or(|b| v < b.1) {
                    best = Some((x, v));
                }
            }
            // odometer over the grid
            let mut axis = 0;
            while axis < m {
                idx[axis] += 1;
                if idx[axis] < points_per_axis {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
            }
            if axis == m {
                break;
            }
        }
        let Some((center, _)) = best.as_ref() else {
            return Err(Error::Unsupported("grid search found no feasible point".into()));
        };
        let at_target = step.iter().zip(&target).all(|(s, t)| s <= t);
        if at_target && refined_at_target {
            break;
        }
        refined_at_target |= at_target;
        for j in 0..m {
            lo[j] = (center[j] - 2.0 * step[j]).max(lower[j]);
            hi[j] = (center[j] + 2.0 * step[j]).min(upper[j]);
        }
        if lo.iter().zip(&hi).all(|(l, h)| h <= l) {
            break;
        }
    }
    Ok(best.expect("at least one feasible grid point"))
}
