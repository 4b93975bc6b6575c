//! Closed convex sets and cones as data, with exact projection rules.
//!
//! Every variant of [`ConvexSet`] carries enough parameters for a closed-form
//! projection. Polar cones are never materialized: `π_{K°}[x] = x − π_K[x]`
//! (Moreau decomposition), so every cone automatically supports its polar.

use crate::linalg::{dot, norm};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    /// Polar or cone-intersect-ball built on something that is not a cone.
    NotACone,
    /// Box with lower > upper somewhere, nonpositive radius, bad angle, ...
    InvalidParameters(String),
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::NotACone => write!(f, "operation requires a cone"),
            GeometryError::InvalidParameters(msg) => write!(f, "invalid set parameters: {msg}"),
        }
    }
}

impl std::error::Error for GeometryError {}

/// A closed convex set with an exact projection rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ConvexSet {
    /// {0}
    Zero { dim: usize },
    /// ℝ^dim
    Reals { dim: usize },
    /// {x : x ≥ 0}
    NonnegOrthant { dim: usize },
    /// {x : ‖x₋ₐₓᵢₛ‖ ≤ x_axis}
    SecondOrderCone { dim: usize, axis_index: usize },
    /// {x : ‖x − center‖ ≤ radius}
    Ball {
        dim: usize,
        radius: f64,
        center: Vec<f64>,
    },
    /// {x : ‖x‖_∞ ≤ radius}
    InfBall { dim: usize, radius: f64 },
    /// {x : lower ≤ x ≤ upper}
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// {x : ⟨normal, x⟩ ≤ offset}
    Halfspace { normal: Vec<f64>, offset: f64 },
    /// cone ∩ {‖x‖ ≤ radius}, ball centered at the origin
    ConeIntersectBall { cone: Box<ConvexSet>, radius: f64 },
    /// {u : ‖u‖ cos θ ≤ ⟨u, axis⟩}, axis a unit vector, θ ∈ (0, π/2]
    IceCream {
        dim: usize,
        half_angle: f64,
        axis: Vec<f64>,
    },
    /// Ordered Cartesian product
    Cartesian { factors: Vec<ConvexSet> },
    /// Polar cone of `inner`, projected via Moreau decomposition
    Polar { inner: Box<ConvexSet> },
}

impl ConvexSet {
    /// Polar cone constructor; only cones admit a polar.
    pub fn polar(inner: ConvexSet) -> Result<ConvexSet, GeometryError> {
        if !inner.is_cone() {
            return Err(GeometryError::NotACone);
        }
        Ok(ConvexSet::Polar {
            inner: Box::new(inner),
        })
    }

    /// Cone intersected with an origin-centered ball. The compose-then-clamp
    /// projection rule requires the ball to be centered at the origin, so no
    /// center parameter exists.
    pub fn cone_intersect_ball(cone: ConvexSet, radius: f64) -> Result<ConvexSet, GeometryError> {
        if !cone.is_cone() {
            return Err(GeometryError::NotACone);
        }
        if !radius.is_finite() || radius <= 0.0 {
            return Err(GeometryError::InvalidParameters(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(ConvexSet::ConeIntersectBall {
            cone: Box::new(cone),
            radius,
        })
    }

    pub fn ice_cream(half_angle: f64, axis: Vec<f64>) -> Result<ConvexSet, GeometryError> {
        if !half_angle.is_finite() || half_angle <= 0.0 || half_angle > std::f64::consts::FRAC_PI_2 {
            return Err(GeometryError::InvalidParameters(format!(
                "half angle must lie in (0, π/2], got {half_angle}"
            )));
        }
        let n = norm(&axis);
        if (n - 1.0).abs() > 1e-9 {
            return Err(GeometryError::InvalidParameters(format!(
                "cone axis must be a unit vector, got norm {n}"
            )));
        }
        Ok(ConvexSet::IceCream {
            dim: axis.len(),
            half_angle,
            axis,
        })
    }

    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<ConvexSet, GeometryError> {
        if lower.len() != upper.len() {
            return Err(GeometryError::InvalidParameters(
                "box bound lengths differ".into(),
            ));
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
            return Err(GeometryError::InvalidParameters(
                "box requires lower ≤ upper elementwise".into(),
            ));
        }
        Ok(ConvexSet::Box { lower, upper })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Zero { dim }
            | ConvexSet::Reals { dim }
            | ConvexSet::NonnegOrthant { dim }
            | ConvexSet::SecondOrderCone { dim, .. }
            | ConvexSet::Ball { dim, .. }
            | ConvexSet::InfBall { dim, .. }
            | ConvexSet::IceCream { dim, .. } => *dim,
            ConvexSet::Box { lower, .. } => lower.len(),
            ConvexSet::Halfspace { normal, .. } => normal.len(),
            ConvexSet::ConeIntersectBall { cone, .. } => cone.dim(),
            ConvexSet::Cartesian { factors } => factors.iter().map(|f| f.dim()).sum(),
            ConvexSet::Polar { inner } => inner.dim(),
        }
    }

    pub fn is_cone(&self) -> bool {
        match self {
            ConvexSet::Zero { .. }
            | ConvexSet::Reals { .. }
            | ConvexSet::NonnegOrthant { .. }
            | ConvexSet::SecondOrderCone { .. }
            | ConvexSet::IceCream { .. } => true,
            ConvexSet::Polar { inner } => inner.is_cone(),
            ConvexSet::Cartesian { factors } => factors.iter().all(|f| f.is_cone()),
            _ => false,
        }
    }

    /// Structural validation; used when sets arrive from files rather than
    /// from the checked constructors.
    pub fn validate(&self) -> Result<(), GeometryError> {
        match self {
            ConvexSet::Zero { .. } | ConvexSet::Reals { .. } | ConvexSet::NonnegOrthant { .. } => {
                Ok(())
            }
            ConvexSet::SecondOrderCone { dim, axis_index } => {
                if *axis_index >= *dim {
                    return Err(GeometryError::InvalidParameters(format!(
                        "axis index {axis_index} outside dimension {dim}"
                    )));
                }
                if *dim == 0 {
                    return Err(GeometryError::InvalidParameters(
                        "zero-dimensional cone".into(),
                    ));
                }
                Ok(())
            }
            ConvexSet::Ball { dim, radius, center } => {
                if !radius.is_finite() || *radius <= 0.0 {
                    return Err(GeometryError::InvalidParameters(format!(
                        "ball radius must be positive, got {radius}"
                    )));
                }
                if center.len() != *dim {
                    return Err(GeometryError::InvalidParameters(
                        "ball center length differs from dim".into(),
                    ));
                }
                Ok(())
            }
            ConvexSet::InfBall { radius, .. } => {
                if !radius.is_finite() || *radius <= 0.0 {
                    return Err(GeometryError::InvalidParameters(format!(
                        "ℓ∞ ball radius must be positive, got {radius}"
                    )));
                }
                Ok(())
            }
            ConvexSet::Box { lower, upper } => {
                ConvexSet::boxed(lower.clone(), upper.clone()).map(|_| ())
            }
            ConvexSet::Halfspace { normal, .. } => {
                if norm(normal) == 0.0 {
                    return Err(GeometryError::InvalidParameters(
                        "halfspace normal must be nonzero".into(),
                    ));
                }
                Ok(())
            }
            ConvexSet::ConeIntersectBall { cone, radius } => {
                if !cone.is_cone() {
                    return Err(GeometryError::NotACone);
                }
                if !radius.is_finite() || *radius <= 0.0 {
                    return Err(GeometryError::InvalidParameters(
                        "intersecting ball radius must be positive".into(),
                    ));
                }
                cone.validate()
            }
            ConvexSet::IceCream {
                dim,
                half_angle,
                axis,
            } => {
                if axis.len() != *dim {
                    return Err(GeometryError::InvalidParameters(
                        "axis length differs from dim".into(),
                    ));
                }
                ConvexSet::ice_cream(*half_angle, axis.clone()).map(|_| ())
            }
            ConvexSet::Cartesian { factors } => {
                for f in factors {
                    f.validate()?;
                }
                Ok(())
            }
            ConvexSet::Polar { inner } => {
                if !inner.is_cone() {
                    return Err(GeometryError::NotACone);
                }
                inner.validate()
            }
        }
    }

    /// Euclidean projection onto the set. Panics on dimension mismatch.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.project_into(x, &mut out);
        out
    }

    /// Projection written into `out` (same length as `x`).
    pub fn project_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(
            x.len(),
            self.dim(),
            "projection dimension mismatch: x has {}, set has {}",
            x.len(),
            self.dim()
        );
        assert_eq!(x.len(), out.len());
        match self {
            ConvexSet::Zero { .. } => out.fill(0.0),
            ConvexSet::Reals { .. } => out.copy_from_slice(x),
            ConvexSet::NonnegOrthant { .. } => {
                for (o, &v) in out.iter_mut().zip(x.iter()) {
                    *o = v.max(0.0);
                }
            }
            ConvexSet::SecondOrderCone { axis_index, .. } => {
                let a = x[*axis_index];
                let tail_sq: f64 = x
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| i != axis_index)
                    .map(|(_, v)| v * v)
                    .sum();
                let r = tail_sq.sqrt();
                if r <= a {
                    out.copy_from_slice(x);
                } else if r <= -a {
                    out.fill(0.0);
                } else {
                    let coef = (a + r) / 2.0;
                    let tail_scale = coef / r;
                    for (i, (o, &v)) in out.iter_mut().zip(x.iter()).enumerate() {
                        *o = if i == *axis_index { coef } else { tail_scale * v };
                    }
                }
            }
            ConvexSet::Ball { radius, center, .. } => {
                let dist_sq: f64 = x
                    .iter()
                    .zip(center.iter())
                    .map(|(v, c)| (v - c) * (v - c))
                    .sum();
                let dist = dist_sq.sqrt();
                if dist <= *radius {
                    out.copy_from_slice(x);
                } else {
                    let s = radius / dist;
                    for ((o, &v), &c) in out.iter_mut().zip(x.iter()).zip(center.iter()) {
                        *o = c + s * (v - c);
                    }
                }
            }
            ConvexSet::InfBall { radius, .. } => {
                for (o, &v) in out.iter_mut().zip(x.iter()) {
                    *o = v.clamp(-radius, *radius);
                }
            }
            ConvexSet::Box { lower, upper } => {
                for ((o, &v), (&l, &u)) in out
                    .iter_mut()
                    .zip(x.iter())
                    .zip(lower.iter().zip(upper.iter()))
                {
                    *o = v.clamp(l, u);
                }
            }
            ConvexSet::Halfspace { normal, offset } => {
                let violation = dot(normal, x) - offset;
                if violation <= 0.0 {
                    out.copy_from_slice(x);
                } else {
                    let s = violation / dot(normal, normal);
                    for ((o, &v), &nc) in out.iter_mut().zip(x.iter()).zip(normal.iter()) {
                        *o = v - s * nc;
                    }
                }
            }
            ConvexSet::ConeIntersectBall { cone, radius } => {
                // Project onto the cone, then radially clamp to the ball;
                // exact because the ball is centered at the origin.
                cone.project_into(x, out);
                let n = norm(out);
                if n > *radius {
                    let s = radius / n;
                    for o in out.iter_mut() {
                        *o *= s;
                    }
                }
            }
            ConvexSet::IceCream {
                half_angle, axis, ..
            } => {
                let (sin_t, cos_t) = half_angle.sin_cos();
                let a = dot(axis, x);
                // tail = x − a·axis
                let mut tail_sq = 0.0;
                for (v, c) in x.iter().zip(axis.iter()) {
                    let t = v - a * c;
                    tail_sq += t * t;
                }
                let r = tail_sq.sqrt();
                if r * cos_t <= a * sin_t {
                    out.copy_from_slice(x);
                } else if r * sin_t <= -a * cos_t {
                    out.fill(0.0);
                } else {
                    // Nearest boundary ray: coefficient along the axis is
                    // s·cosθ, tail is scaled to s·sinθ, s = a cosθ + r sinθ.
                    let s = a * cos_t + r * sin_t;
                    let axis_coef = s * cos_t;
                    let tail_scale = s * sin_t / r;
                    for ((o, &v), &c) in out.iter_mut().zip(x.iter()).zip(axis.iter()) {
                        *o = tail_scale * (v - a * c) + axis_coef * c;
                    }
                }
            }
            ConvexSet::Cartesian { factors } => {
                let mut offset = 0;
                for f in factors {
                    let d = f.dim();
                    f.project_into(&x[offset..offset + d], &mut out[offset..offset + d]);
                    offset += d;
                }
            }
            ConvexSet::Polar { inner } => {
                inner.polar_project_into(x, out);
            }
        }
    }

    /// Projection onto the polar cone via Moreau: `out = x − π_K[x]`.
    /// Panics unless the set is a cone.
    pub fn polar_project_into(&self, x: &[f64], out: &mut [f64]) {
        assert!(
            self.is_cone(),
            "polar projection requires a cone, got a non-cone set"
        );
        self.project_into(x, out);
        for (o, &v) in out.iter_mut().zip(x.iter()) {
            *o = v - *o;
        }
    }

    /// `π_{K°}[x]` as a fresh vector; exactly `x − project(K, x)`.
    pub fn moreau_polar_project(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.polar_project_into(x, &mut out);
        out
    }

    /// Quadratic distance function `d(w) = ½‖w − π[w]‖²`; zero iff `w` is in
    /// the set.
    pub fn dist_sq_half(&self, w: &[f64]) -> f64 {
        let p = self.project(w);
        0.5 * w
            .iter()
            .zip(p.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
    }
}
