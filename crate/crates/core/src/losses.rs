//! Strongly convex loss families, oblivious adversaries and smoothing.
//!
//! The only family shipped is the isotropic quadratic
//! `f(x) = (alpha/2) ||x - theta||^2 + <linear, x>`, for which smoothing over
//! a `delta`-ball, the best point in hindsight and the value/gradient bounds
//! over a set are all available in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{derive_stream, distance_sq, dot, norm, sample_sphere, streams, FeasibleSet, Rng, Vector};

/// Zeroth-order access to a loss: the only thing a bandit learner may call.
pub trait ValueOracle {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> Result<f64>;
}

/// First-order access to an `alpha`-strongly convex loss.
pub trait Loss: ValueOracle {
    fn alpha(&self) -> f64;
    fn gradient(&self, x: &[f64]) -> Result<Vector>;
}

/// Wraps a closure as a [`ValueOracle`].
pub struct FnValue<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64> FnValue<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnValue { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64> ValueOracle for FnValue<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok((self.f)(x))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticLoss {
    alpha: f64,
    theta: Vector,
    linear: Vector,
}

impl QuadraticLoss {
    pub fn new(alpha: f64, theta: Vector, linear: Vector) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Parameter(format!("alpha must be positive, got {alpha}")));
        }
        check_dim(theta.dim(), linear.dim())?;
        if theta.dim() == 0 {
            return Err(Error::Parameter("loss dimension must be at least 1".into()));
        }
        if !(theta.is_finite() && linear.is_finite()) {
            return Err(Error::Parameter("loss center and linear term must be finite".into()));
        }
        Ok(QuadraticLoss { alpha, theta, linear })
    }

    /// `(alpha/2) ||x - theta||^2` without a linear term.
    pub fn centered(alpha: f64, theta: Vector) -> Result<Self> {
        let n = theta.dim();
        Self::new(alpha, theta, Vector::zeros(n))
    }

    pub fn theta(&self) -> &Vector {
        &self.theta
    }

    pub fn linear(&self) -> &Vector {
        &self.linear
    }

    /// `theta - linear / alpha`.
    pub fn unconstrained_minimizer(&self) -> Vector {
        let mut z = self.theta.clone();
        z.axpy(-1.0 / self.alpha, &self.linear);
        z
    }

    /// Bounds certified over any set contained in the ball of radius
    /// `set.outer_radius()`.
    pub fn bounds_over(&self, set: &FeasibleSet) -> LossBounds {
        let big_r = set.outer_radius();
        let reach = big_r + self.theta.norm();
        let lin = self.linear.norm();
        LossBounds {
            value_bound: 0.5 * self.alpha * reach * reach + lin * big_r,
            gradient_bound: self.alpha * reach + lin,
            alpha: self.alpha,
        }
    }
}

impl ValueOracle for QuadraticLoss {
    fn dim(&self) -> usize {
        self.theta.dim()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.theta.dim(), x.len())?;
        Ok(0.5 * self.alpha * distance_sq(x, &self.theta) + dot(&self.linear, x))
    }
}

impl Loss for QuadraticLoss {
    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn gradient(&self, x: &[f64]) -> Result<Vector> {
        check_dim(self.theta.dim(), x.len())?;
        Ok(x.iter()
            .zip(self.theta.iter())
            .zip(self.linear.iter())
            .map(|((xi, ti), li)| self.alpha * (xi - ti) + li)
            .collect())
    }
}

/// `M >= sup |f|`, `G >= sup ||grad f||` over the feasible set, and the
/// common strong-convexity modulus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossBounds {
    pub value_bound: f64,
    pub gradient_bound: f64,
    pub alpha: f64,
}

impl LossBounds {
    /// Component-wise worst case of two bound sets.
    pub fn join(self, other: LossBounds) -> LossBounds {
        LossBounds {
            value_bound: self.value_bound.max(other.value_bound),
            gradient_bound: self.gradient_bound.max(other.gradient_bound),
            alpha: self.alpha.min(other.alpha),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AdversaryKind {
    /// The same loss every round. Without an explicit center, one is drawn
    /// uniformly from the set.
    FixedCenter {
        #[serde(default)]
        center: Option<Vector>,
    },
    /// A projected random walk of the center with the given step length.
    DriftingCenter { step: f64 },
    /// Centers alternate between `lmo(-1)` and `lmo(+1)`, two opposite
    /// extreme points of the set.
    AlternatingCorners,
    /// Centers drawn independently and uniformly from the set.
    IidRandomCenter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversarySpec {
    #[serde(flatten)]
    pub kind: AdversaryKind,
    pub alpha: f64,
    #[serde(default)]
    pub seed_offset: u64,
}

impl AdversarySpec {
    pub fn new(kind: AdversaryKind, alpha: f64) -> Self {
        AdversarySpec {
            kind,
            alpha,
            seed_offset: 0,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            AdversaryKind::FixedCenter { .. } => "fixed",
            AdversaryKind::DriftingCenter { .. } => "drifting",
            AdversaryKind::AlternatingCorners => "corners",
            AdversaryKind::IidRandomCenter => "iid",
        }
    }
}

/// A fully materialized loss sequence with bounds certified over its set.
#[derive(Clone, Debug, PartialEq)]
pub struct LossSequence {
    losses: Vec<QuadraticLoss>,
    bounds: LossBounds,
}

impl LossSequence {
    pub fn new(losses: Vec<QuadraticLoss>, set: &FeasibleSet) -> Result<Self> {
        let mut iter = losses.iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::Usage("loss sequence must be nonempty".into()))?;
        let mut bounds = first.bounds_over(set);
        for loss in iter {
            check_dim(set.dim(), loss.dim())?;
            if loss.alpha() != first.alpha() {
                return Err(Error::Usage("all losses in a sequence must share alpha".into()));
            }
            bounds = bounds.join(loss.bounds_over(set));
        }
        check_dim(set.dim(), first.dim())?;
        Ok(LossSequence { losses, bounds })
    }

    pub fn losses(&self) -> &[QuadraticLoss] {
        &self.losses
    }

    pub fn bounds(&self) -> LossBounds {
        self.bounds
    }

    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }

    pub fn alpha(&self) -> f64 {
        self.bounds.alpha
    }
}

/// Materializes `horizon` losses from `spec`. The draw uses its own
/// sub-stream of `rng` (keyed by the adversary's seed offset), so the sequence is a
/// function of `(spec, horizon, set, rng seed/stream)` only.
pub fn generate_sequence(spec: &AdversarySpec, horizon: usize, set: &FeasibleSet, rng: &Rng) -> Result<LossSequence> {
    if horizon == 0 {
        return Err(Error::Usage("horizon must be at least 1".into()));
    }
    let n = set.dim();
    let mut rng = rng.substream(derive_stream(streams::ADVERSARY, spec.seed_offset));
    let alpha = spec.alpha;
    let centers: Vec<Vector> = match &spec.kind {
        AdversaryKind::FixedCenter { center } => {
            let c = match center {
                Some(c) => {
                    check_dim(n, c.dim())?;
                    if !set.contains(c, 1e-12) {
                        return Err(Error::Usage("fixed center must lie in the set".into()));
                    }
                    c.clone()
                }
                None => set.sample_uniform(&mut rng),
            };
            vec![c; horizon]
        }
        AdversaryKind::DriftingCenter { step } => {
            if !(step.is_finite() && *step >= 0.0) {
                return Err(Error::Parameter(format!("drift step must be nonnegative, got {step}")));
            }
            let mut c = set.sample_uniform(&mut rng);
            let mut out = Vec::with_capacity(horizon);
            for _ in 0..horizon {
                out.push(c.clone());
                let u = sample_sphere(&mut rng, n);
                c.axpy(*step, &u);
                c = set.project(&c);
            }
            out
        }
        AdversaryKind::AlternatingCorners => {
            let up = set.lmo(&vec![-1.0; n])?;
            let down = set.lmo(&vec![1.0; n])?;
            (0..horizon)
                .map(|t| if t % 2 == 0 { up.clone() } else { down.clone() })
                .collect()
        }
        AdversaryKind::IidRandomCenter => (0..horizon).map(|_| set.sample_uniform(&mut rng)).collect(),
    };
    let losses = centers
        .into_iter()
        .map(|c| QuadraticLoss::centered(alpha, c))
        .collect::<Result<Vec<_>>>()?;
    LossSequence::new(losses, set)
}

/// `E_{u ~ B^n}[f(x + delta u)] = f(x) + (alpha/2) delta^2 n/(n+2)` for the
/// isotropic quadratic: cross terms vanish and `E||u||^2 = n/(n+2)`.
pub fn smoothed_value_closed_form(loss: &QuadraticLoss, x: &[f64], delta: f64) -> Result<f64> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::Parameter(format!("delta must be nonnegative, got {delta}")));
    }
    let n = loss.dim() as f64;
    Ok(loss.value(x)? + 0.5 * loss.alpha() * delta * delta * n / (n + 2.0))
}

/// Gradient of the smoothed quadratic; equal to the plain gradient because
/// smoothing only adds a constant.
pub fn smoothed_gradient_closed_form(loss: &QuadraticLoss, x: &[f64]) -> Result<Vector> {
    loss.gradient(x)
}

/// The single-sample spherical estimator `(n/delta) f(x + delta u) u`,
/// unbiased for the gradient of the `delta`-smoothed loss.
pub fn one_point_gradient_estimate<O: ValueOracle + ?Sized>(
    oracle: &O,
    x: &[f64],
    delta: f64,
    u: &[f64],
) -> Result<Vector> {
    let n = oracle.dim();
    check_dim(n, x.len())?;
    check_dim(n, u.len())?;
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Parameter(format!("delta must be positive, got {delta}")));
    }
    if (norm(u) - 1.0).abs() > 1e-9 {
        return Err(Error::Usage("estimator direction must be a unit vector".into()));
    }
    let y: Vector = x.iter().zip(u).map(|(a, b)| a + delta * b).collect();
    let scale = n as f64 / delta * oracle.value(&y)?;
    Ok(u.iter().map(|v| scale * v).collect())
}
