//! Feasible sets, linear optimization oracles and sampling.
//!
//! Every set contains the origin in its interior, so that the inner radius
//! `r` (largest centered ball inside the set) and outer radius `R` (smallest
//! centered ball containing it) are positive and known in closed form.

mod rng;
mod vector;

pub use rng::{derive_stream, streams, Rng};
pub use vector::{distance, distance_sq, dot, lerp, norm, sub, Vector};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SetKind {
    /// Centered Euclidean ball.
    Ball { radius: f64 },
    /// Centered axis-aligned box, `|x_i| <= half_widths[i]`.
    Box { half_widths: Vec<f64> },
    /// Centered cross-polytope, `||x||_1 <= radius`.
    L1Ball { radius: f64 },
}

/// A convex compact set described by its kind, dimension and a shrink factor.
///
/// `scale` multiplies the base set; `scale == 0` is the degenerate set `{0}`
/// produced by shrinking with `delta == r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetRepr", into = "SetRepr")]
pub struct FeasibleSet {
    kind: SetKind,
    dim: usize,
    scale: f64,
}

#[derive(Clone, Serialize, Deserialize)]
struct SetRepr {
    #[serde(flatten)]
    kind: SetKind,
    dim: usize,
    #[serde(default = "one")]
    scale: f64,
}

fn one() -> f64 {
    1.0
}

impl From<FeasibleSet> for SetRepr {
    fn from(set: FeasibleSet) -> Self {
        SetRepr {
            kind: set.kind,
            dim: set.dim,
            scale: set.scale,
        }
    }
}

impl TryFrom<SetRepr> for FeasibleSet {
    type Error = Error;
    fn try_from(repr: SetRepr) -> Result<Self> {
        let set = FeasibleSet::new(repr.kind, repr.dim)?;
        if !(repr.scale.is_finite() && (0.0..=1.0).contains(&repr.scale)) {
            return Err(Error::Parameter(format!(
                "set scale must lie in [0, 1], got {}",
                repr.scale
            )));
        }
        Ok(FeasibleSet {
            scale: repr.scale,
            ..set
        })
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be positive and finite, got {v}")))
    }
}

impl FeasibleSet {
    pub fn new(kind: SetKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("dimension must be at least 1".into()));
        }
        match &kind {
            SetKind::Ball { radius } | SetKind::L1Ball { radius } => positive("radius", *radius)?,
            SetKind::Box { half_widths } => {
                check_dim(dim, half_widths.len())?;
                for w in half_widths {
                    positive("half-width", *w)?;
                }
            }
        }
        Ok(FeasibleSet { kind, dim, scale: 1.0 })
    }

    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        Self::new(SetKind::Ball { radius }, dim)
    }

    /// A cube `[-half_width, half_width]^dim`.
    pub fn cube(dim: usize, half_width: f64) -> Result<Self> {
        Self::new(
            SetKind::Box {
                half_widths: vec![half_width; dim],
            },
            dim,
        )
    }

    pub fn boxed(half_widths: Vec<f64>) -> Result<Self> {
        let dim = half_widths.len();
        Self::new(SetKind::Box { half_widths }, dim)
    }

    pub fn l1_ball(dim: usize, radius: f64) -> Result<Self> {
        Self::new(SetKind::L1Ball { radius }, dim)
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Short label for reports: `ball`, `box` or `l1`.
    pub fn label(&self) -> &'static str {
        match self.kind {
            SetKind::Ball { .. } => "ball",
            SetKind::Box { .. } => "box",
            SetKind::L1Ball { .. } => "l1",
        }
    }

    /// Radius of the largest centered ball inside the set.
    pub fn inner_radius(&self) -> f64 {
        let base = match &self.kind {
            SetKind::Ball { radius } => *radius,
            SetKind::Box { half_widths } => half_widths.iter().copied().fold(f64::INFINITY, f64::min),
            SetKind::L1Ball { radius } => radius / (self.dim as f64).sqrt(),
        };
        self.scale * base
    }

    /// Radius of the smallest centered ball containing the set.
    pub fn outer_radius(&self) -> f64 {
        let base = match &self.kind {
            SetKind::Ball { radius } | SetKind::L1Ball { radius } => *radius,
            SetKind::Box { half_widths } => norm(half_widths),
        };
        self.scale * base
    }

    /// Returns `argmin_{x in set} <direction, x>`, always an extreme point.
    ///
    /// Ties go to the lowest coordinate index. Zero coordinates of the
    /// direction pick the negative face, so a zero direction yields the vertex
    /// minimizing `<e_1, x>`.
    pub fn lmo(&self, direction: &[f64]) -> Result<Vector> {
        check_dim(self.dim, direction.len())?;
        let s = self.scale;
        let out = match &self.kind {
            SetKind::Ball { radius } => {
                let nd = norm(direction);
                if nd > 0.0 {
                    direction.iter().map(|d| -s * radius * d / nd).collect()
                } else {
                    let mut v = Vector::zeros(self.dim);
                    v[0] = -s * radius;
                    v
                }
            }
            SetKind::Box { half_widths } => direction
                .iter()
                .zip(half_widths)
                .map(|(d, w)| if *d < 0.0 { s * w } else { -s * w })
                .collect(),
            SetKind::L1Ball { radius } => {
                let mut best = 0;
                for (i, d) in direction.iter().enumerate() {
                    if d.abs() > direction[best].abs() {
                        best = i;
                    }
                }
                let mut v = Vector::zeros(self.dim);
                v[best] = if direction[best] < 0.0 { s * radius } else { -s * radius };
                v
            }
        };
        Ok(out)
    }

    /// `K_delta = (1 - delta / r) K`. Every point of the result plus a
    /// `delta`-ball lies in `self`.
    pub fn shrink(&self, delta: f64) -> Result<FeasibleSet> {
        let r = self.inner_radius();
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Parameter(format!("shrink delta must be positive, got {delta}")));
        }
        if delta > r {
            return Err(Error::Parameter(format!(
                "shrink delta {delta} exceeds inner radius {r}"
            )));
        }
        let factor = (1.0 - delta / r).max(0.0);
        Ok(FeasibleSet {
            kind: self.kind.clone(),
            dim: self.dim,
            scale: self.scale * factor,
        })
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, x: &[f64]) -> Vector {
        assert_eq!(x.len(), self.dim, "projection dimension mismatch");
        let s = self.scale;
        match &self.kind {
            SetKind::Ball { radius } => {
                let rad = s * radius;
                let nx = norm(x);
                if nx <= rad {
                    Vector::from(x)
                } else if rad == 0.0 {
                    Vector::zeros(self.dim)
                } else {
                    x.iter().map(|v| v * rad / nx).collect()
                }
            }
            SetKind::Box { half_widths } => x.iter().zip(half_widths).map(|(v, w)| v.clamp(-s * w, s * w)).collect(),
            SetKind::L1Ball { radius } => project_l1(x, s * radius),
        }
    }

    /// True iff the defining inequality holds within additive `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim || !x.iter().all(|v| v.is_finite()) {
            return false;
        }
        let s = self.scale;
        match &self.kind {
            SetKind::Ball { radius } => norm(x) <= s * radius + tol,
            SetKind::Box { half_widths } => x.iter().zip(half_widths).all(|(v, w)| v.abs() <= s * w + tol),
            SetKind::L1Ball { radius } => x.iter().map(|v| v.abs()).sum::<f64>() <= s * radius + tol,
        }
    }

    /// A uniform draw from the set.
    pub fn sample_uniform(&self, rng: &mut Rng) -> Vector {
        let s = self.scale;
        match &self.kind {
            SetKind::Ball { radius } => sample_ball(rng, self.dim).scaled(s * radius),
            SetKind::Box { half_widths } => half_widths
                .iter()
                .map(|w| s * w * (2.0 * rng.uniform() - 1.0))
                .collect(),
            SetKind::L1Ball { radius } => {
                // first n coordinates of a uniform point on the (n+1)-simplex
                let e: Vec<f64> = (0..=self.dim).map(|_| rng.exponential()).collect();
                let total: f64 = e.iter().sum();
                e[..self.dim]
                    .iter()
                    .map(|ei| {
                        let sign = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
                        sign * s * radius * ei / total
                    })
                    .collect()
            }
        }
    }
}

/// Projection onto `{x : ||x||_1 <= radius}` through the sorting-based
/// simplex projection of `|x|`.
fn project_l1(x: &[f64], radius: f64) -> Vector {
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    if l1 <= radius {
        return Vector::from(x);
    }
    if radius == 0.0 {
        return Vector::zeros(x.len());
    }
    let mut u: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, uk) in u.iter().enumerate() {
        cumsum += uk;
        let candidate = (cumsum - radius) / (k + 1) as f64;
        if uk - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    x.iter().map(|v| v.signum() * (v.abs() - theta).max(0.0)).collect()
}

/// Uniform draw from the unit sphere in `R^n`: normalized standard Gaussians,
/// redrawing the all-zero vector.
pub fn sample_sphere(rng: &mut Rng, n: usize) -> Vector {
    assert!(n >= 1, "sphere dimension must be at least 1");
    loop {
        let mut g = Vector::from_fn(n, |_| rng.standard_normal());
        let len = g.norm();
        if len > 0.0 {
            g.scale_mut(1.0 / len);
            return g;
        }
    }
}

/// Uniform draw from the unit ball: a sphere draw scaled by `U^{1/n}`.
pub fn sample_ball(rng: &mut Rng, n: usize) -> Vector {
    let mut u = sample_sphere(rng, n);
    let radius = rng.uniform_pos().powf(1.0 / n as f64);
    u.scale_mut(radius);
    u
}
