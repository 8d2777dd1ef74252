//! The accumulated regularized follow-the-leader objective.
//!
//! Each accumulated term is `<x, g> + w (alpha/2) ||x - anchor||^2`, and the
//! initial regularizer is `T0 (alpha/2) ||x - x1||^2`. Expanding the squares,
//! the whole sum is determined by four running quantities:
//!
//! ```text
//! F(x) = <x, S> + (alpha/2) (W ||x||^2 - 2 <x, A> + C)
//! ```
//!
//! with `S` the gradient sum, `A` the weighted anchor sum, `C` the weighted
//! sum of squared anchor norms and `W` the total weight. The Hessian is
//! `alpha W I`, which makes exact line search a closed form and the
//! constrained minimizer a Euclidean projection.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{dot, lerp, FeasibleSet, Vector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RftlObjective {
    alpha: f64,
    grad_sum: Vector,
    anchor_sum: Vector,
    anchor_sq: f64,
    weight_total: f64,
}

impl RftlObjective {
    /// `F(x) = T0 (alpha/2) ||x - x1||^2`.
    pub fn fresh(alpha: f64, t0: f64, x1: &[f64]) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Parameter(format!("alpha must be positive, got {alpha}")));
        }
        if !(t0.is_finite() && t0 >= 0.0) {
            return Err(Error::Parameter(format!("T0 must be nonnegative, got {t0}")));
        }
        if x1.is_empty() {
            return Err(Error::Parameter("dimension must be at least 1".into()));
        }
        let x1 = Vector::from(x1);
        Ok(RftlObjective {
            alpha,
            grad_sum: Vector::zeros(x1.dim()),
            anchor_sq: t0 * x1.norm_sq(),
            anchor_sum: x1.scaled(t0),
            weight_total: t0,
        })
    }

    pub fn dim(&self) -> usize {
        self.grad_sum.dim()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn weight_total(&self) -> f64 {
        self.weight_total
    }

    pub fn grad_sum(&self) -> &Vector {
        &self.grad_sum
    }

    pub fn anchor_sum(&self) -> &Vector {
        &self.anchor_sum
    }

    /// `alpha W`: both the strong-convexity modulus and the smoothness.
    pub fn hessian_scale(&self) -> f64 {
        self.alpha * self.weight_total
    }

    /// Adds `<x, g> + w (alpha/2) ||x - anchor||^2`.
    pub fn accumulate(&mut self, g: &[f64], anchor: &[f64], w: f64) -> Result<()> {
        check_dim(self.dim(), g.len())?;
        check_dim(self.dim(), anchor.len())?;
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::Parameter(format!("term weight must be positive, got {w}")));
        }
        self.grad_sum.axpy(1.0, g);
        self.anchor_sum.axpy(w, anchor);
        self.anchor_sq += w * dot(anchor, anchor);
        self.weight_total += w;
        Ok(())
    }

    /// Non-mutating form of [`accumulate`](Self::accumulate).
    pub fn accumulated(&self, g: &[f64], anchor: &[f64], w: f64) -> Result<Self> {
        let mut next = self.clone();
        next.accumulate(g, anchor, w)?;
        Ok(next)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        dot(x, &self.grad_sum)
            + 0.5 * self.alpha * (self.weight_total * dot(x, x) - 2.0 * dot(x, &self.anchor_sum) + self.anchor_sq)
    }

    /// `S + alpha (W x - A)`.
    pub fn gradient(&self, x: &[f64]) -> Vector {
        debug_assert_eq!(x.len(), self.dim());
        let aw = self.hessian_scale();
        x.iter()
            .zip(self.grad_sum.iter())
            .zip(self.anchor_sum.iter())
            .map(|((xi, si), ai)| si + aw * xi - self.alpha * ai)
            .collect()
    }

    /// `F(x) - F(y)` via the exact second-order expansion around `y`, which
    /// avoids cancellation between the large constant terms of long runs.
    pub fn difference(&self, x: &[f64], y: &[f64]) -> f64 {
        let grad = self.gradient(y);
        let mut lin = 0.0;
        let mut sq = 0.0;
        for ((xi, yi), gi) in x.iter().zip(y).zip(grad.iter()) {
            let d = xi - yi;
            lin += gi * d;
            sq += d * d;
        }
        lin + 0.5 * self.hessian_scale() * sq
    }

    /// Unconstrained minimizer `(alpha A - S) / (alpha W)`.
    pub fn unconstrained_minimizer(&self) -> Result<Vector> {
        if self.weight_total <= 0.0 {
            return Err(Error::UndefinedMinimizer);
        }
        let aw = self.hessian_scale();
        Ok(self
            .anchor_sum
            .iter()
            .zip(self.grad_sum.iter())
            .map(|(a, s)| (self.alpha * a - s) / aw)
            .collect())
    }

    /// Exact minimizer over `set`: the projection of the unconstrained
    /// minimizer, valid because the Hessian is a multiple of the identity.
    pub fn exact_minimizer(&self, set: &FeasibleSet) -> Result<Vector> {
        check_dim(set.dim(), self.dim())?;
        Ok(set.project(&self.unconstrained_minimizer()?))
    }

    /// `F(x) - min_{set} F`.
    pub fn suboptimality(&self, set: &FeasibleSet, x: &[f64]) -> Result<f64> {
        let star = self.exact_minimizer(set)?;
        Ok(self.difference(x, &star))
    }

    /// Exact minimizer of `sigma -> F(x + sigma (v - x))` over `[0, 1]`.
    pub fn exact_line_search(&self, x: &[f64], v: &[f64]) -> f64 {
        let grad = self.gradient(x);
        let mut num = 0.0;
        let mut dist_sq = 0.0;
        for ((gi, xi), vi) in grad.iter().zip(x).zip(v) {
            num += gi * (xi - vi);
            dist_sq += (vi - xi) * (vi - xi);
        }
        if dist_sq == 0.0 {
            return 0.0;
        }
        let curvature = self.hessian_scale() * dist_sq;
        if curvature == 0.0 {
            // F is linear along the segment
            return if num > 0.0 { 1.0 } else { 0.0 };
        }
        (num / curvature).clamp(0.0, 1.0)
    }

    /// `x + sigma (v - x)` with the exact line-search step.
    pub fn line_search_step(&self, x: &[f64], v: &[f64]) -> (f64, Vector) {
        let sigma = self.exact_line_search(x, v);
        (sigma, lerp(x, v, sigma))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{distance_sq, Rng};
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};

    fn random_objective(rng: &mut Rng, n: usize, terms: usize) -> RftlObjective {
        let alpha = rng.uniform_range(0.2, 2.0);
        let t0 = rng.uniform_range(0.5, 5.0);
        let x1 = Vector::from_fn(n, |_| 0.3 * rng.standard_normal());
        let mut obj = RftlObjective::fresh(alpha, t0, &x1).unwrap();
        for _ in 0..terms {
            let g = Vector::from_fn(n, |_| rng.standard_normal());
            let a = Vector::from_fn(n, |_| 0.5 * rng.standard_normal());
            let w = rng.uniform_range(0.5, 3.0);
            obj.accumulate(&g, &a, w).unwrap();
        }
        obj
    }

    /// Direct evaluation of the sum of terms, independent of the accumulator.
    struct Explicit {
        alpha: f64,
        t0: f64,
        x1: Vector,
        terms: Vec<(Vector, Vector, f64)>,
    }

    impl Explicit {
        fn value(&self, x: &[f64]) -> f64 {
            let mut v = self.t0 * 0.5 * self.alpha * distance_sq(x, &self.x1);
            for (g, a, w) in &self.terms {
                v += dot(x, g) + w * 0.5 * self.alpha * distance_sq(x, a);
            }
            v
        }
    }

    #[test]
    fn fresh_examples() {
        let obj = RftlObjective::fresh(1.0, 2.0, &[1.0, 0.0]).unwrap();
        let mut rng = Rng::new(1);
        for _ in 0..50 {
            let x = Vector::from_fn(2, |_| rng.standard_normal());
            assert!((obj.value(&x) - distance_sq(&x, &[1.0, 0.0])).abs() < 1e-12);
            assert!(obj.value(&x) >= obj.value(&[1.0, 0.0]));
        }
        let flat = RftlObjective::fresh(1.0, 0.0, &[1.0, 0.0]).unwrap();
        assert_eq!(flat.value(&[3.0, -2.0]), 0.0);
        assert_eq!(flat.unconstrained_minimizer(), Err(Error::UndefinedMinimizer));
    }

    #[test]
    fn accumulate_examples() {
        let mut rng = Rng::new(2);
        let x1 = [0.5, -0.5];
        let base = random_objective(&mut rng, 2, 3);
        let next = base.accumulated(&[0.0, 0.0], &x1, 1.0).unwrap();
        for _ in 0..100 {
            let x = Vector::from_fn(2, |_| rng.standard_normal());
            let want = base.value(&x) + 0.5 * base.alpha() * distance_sq(&x, &x1);
            assert!((next.value(&x) - want).abs() < 1e-10);
        }

        let (g1, a1) = ([1.0, 2.0], [0.1, 0.2]);
        let (g2, a2) = ([-0.5, 0.3], [-0.4, 0.0]);
        let ab = base
            .accumulated(&g1, &a1, 1.0)
            .unwrap()
            .accumulated(&g2, &a2, 2.0)
            .unwrap();
        let ba = base
            .accumulated(&g2, &a2, 2.0)
            .unwrap()
            .accumulated(&g1, &a1, 1.0)
            .unwrap();
        for _ in 0..20 {
            let x = Vector::from_fn(2, |_| rng.standard_normal());
            assert!((ab.value(&x) - ba.value(&x)).abs() < 1e-10);
        }
        assert!(base.accumulated(&g1, &a1, 0.0).is_err());
        assert!(base.accumulated(&[1.0], &a1, 1.0).is_err());
    }

    #[test]
    fn accumulator_matches_explicit_sum() {
        let mut rng = Rng::new(3);
        let n = 4;
        let x1 = Vector::from_fn(n, |_| rng.standard_normal());
        let mut explicit = Explicit {
            alpha: 0.7,
            t0: 3.0,
            x1: x1.clone(),
            terms: vec![],
        };
        let mut obj = RftlObjective::fresh(0.7, 3.0, &x1).unwrap();
        for _ in 0..25 {
            let g = Vector::from_fn(n, |_| rng.standard_normal());
            let a = Vector::from_fn(n, |_| rng.standard_normal());
            let w = rng.uniform_range(0.5, 2.0);
            let before = obj.clone();
            obj.accumulate(&g, &a, w).unwrap();
            for _ in 0..4 {
                let x = Vector::from_fn(n, |_| rng.standard_normal());
                let term = dot(&x, &g) + w * 0.5 * 0.7 * distance_sq(&x, &a);
                assert!((obj.value(&x) - before.value(&x) - term).abs() < 1e-10);
            }
            explicit.terms.push((g, a, w));
        }
        for _ in 0..100 {
            let x = Vector::from_fn(n, |_| rng.standard_normal());
            let want = explicit.value(&x);
            assert!((obj.value(&x) - want).abs() <= 1e-10 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = Rng::new(4);
        let h = 1e-5;
        for _ in 0..30 {
            let obj = random_objective(&mut rng, 3, 5);
            let x = Vector::from_fn(3, |_| rng.standard_normal());
            let g = obj.gradient(&x);
            for i in 0..3 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (obj.value(&xp) - obj.value(&xm)) / (2.0 * h);
                assert!((fd - g[i]).abs() <= 1e-6 * (1.0 + g[i].abs()));
            }
        }
    }

    #[test]
    fn smoothness_identity_is_exact() {
        let mut rng = Rng::new(5);
        for _ in 0..100 {
            let obj = random_objective(&mut rng, 3, 4);
            let x = Vector::from_fn(3, |_| rng.standard_normal());
            let y = Vector::from_fn(3, |_| rng.standard_normal());
            let lhs = obj.value(&y) - obj.value(&x) - dot(&obj.gradient(&x), &crate::geometry::sub(&y, &x));
            let rhs = 0.5 * obj.hessian_scale() * distance_sq(&x, &y);
            assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs));
            assert!((obj.difference(&y, &x) - (obj.value(&y) - obj.value(&x))).abs() < 1e-9);
        }
    }

    #[test]
    fn line_search_examples() {
        // F(x) = ||x||^2, i.e. alpha W = 2
        let obj = RftlObjective::fresh(1.0, 2.0, &[0.0, 0.0]).unwrap();
        let (sigma, z) = obj.line_search_step(&[1.0, 0.0], &[-1.0, 0.0]);
        assert_eq!(sigma, 0.5);
        assert_eq!(z.as_slice(), &[0.0, 0.0]);
        // moving away from the minimizer
        assert_eq!(obj.exact_line_search(&[0.5, 0.0], &[1.0, 0.0]), 0.0);
        assert_eq!(obj.exact_line_search(&[0.5, 0.0], &[0.5, 0.0]), 0.0);
    }

    /// Golden-section search on [0, 1] as an independent oracle.
    #[test]
    fn line_search_matches_golden_section() {
        let mut rng = Rng::new(6);
        for _ in 0..100 {
            let obj = random_objective(&mut rng, 3, 3);
            let x = Vector::from_fn(3, |_| rng.standard_normal());
            let v = Vector::from_fn(3, |_| rng.standard_normal());
            // F(y) - F(reference) orders points exactly like F(y) but without
            // cancellation near the minimizer, so golden section resolves 1e-8.
            let reference = lerp(&x, &v, obj.exact_line_search(&x, &v));
            let phi = |s: f64| obj.difference(&lerp(&x, &v, s), &reference);
            let ratio = (5f64.sqrt() - 1.0) / 2.0;
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..200 {
                let a = hi - ratio * (hi - lo);
                let b = lo + ratio * (hi - lo);
                if phi(a) < phi(b) {
                    hi = b;
                } else {
                    lo = a;
                }
            }
            let golden = 0.5 * (lo + hi);
            assert!((obj.exact_line_search(&x, &v) - golden).abs() < 1e-8);
        }
    }

    #[test]
    fn minimizer_examples() {
        let ball = FeasibleSet::ball(2, 1.0).unwrap();
        let obj = RftlObjective::fresh(1.0, 4.0, &[0.2, 0.1]).unwrap();
        let star = obj.exact_minimizer(&ball).unwrap();
        assert!(distance_sq(&star, &[0.2, 0.1]) < 1e-30);
        assert!(obj.gradient(&star).norm() < 1e-14);
        assert!(obj.suboptimality(&ball, &star).unwrap().abs() < 1e-15);

        // S = 0 => project(A / W)
        let mut far = RftlObjective::fresh(1.0, 1.0, &[0.0, 0.0]).unwrap();
        far.accumulate(&[0.0, 0.0], &[6.0, 8.0], 1.0).unwrap();
        let star = far.exact_minimizer(&ball).unwrap();
        assert!(distance_sq(&star, &[0.6, 0.8]) < 1e-28);
    }

    #[test]
    fn minimizer_beats_random_feasible_points() {
        let mut rng = Rng::new(7);
        let ball = FeasibleSet::ball(3, 1.0).unwrap();
        for _ in 0..5 {
            let obj = random_objective(&mut rng, 3, 6);
            let star = obj.exact_minimizer(&ball).unwrap();
            let best = obj.value(&star);
            for _ in 0..10_000 {
                let y = ball.sample_uniform(&mut rng);
                assert!(best <= obj.value(&y) + 1e-12);
            }
        }
    }

    #[test]
    fn suboptimality_bounds() {
        let mut rng = Rng::new(8);
        let cube = FeasibleSet::cube(2, 1.0).unwrap();
        for _ in 0..10 {
            let obj = random_objective(&mut rng, 2, 4);
            let star = obj.exact_minimizer(&cube).unwrap();
            for _ in 0..100 {
                let x = cube.sample_uniform(&mut rng);
                let gap = obj.suboptimality(&cube, &x).unwrap();
                assert!(gap >= -1e-9);
                assert!(0.5 * obj.hessian_scale() * distance_sq(&x, &star) <= gap + 1e-9);
            }
        }
    }

    /// Grid search over the cube in n = 2 as an independent minimizer oracle.
    #[test]
    fn suboptimality_matches_grid_search() {
        let mut rng = Rng::new(9);
        let cube = FeasibleSet::cube(2, 1.0).unwrap();
        let steps = 1000;
        for _ in 0..3 {
            let obj = random_objective(&mut rng, 2, 3);
            let mut grid_min = f64::INFINITY;
            for i in 0..=steps {
                for j in 0..=steps {
                    let y = [
                        -1.0 + 2.0 * i as f64 / steps as f64,
                        -1.0 + 2.0 * j as f64 / steps as f64,
                    ];
                    grid_min = grid_min.min(obj.value(&y));
                }
            }
            let x = cube.sample_uniform(&mut rng);
            let want = obj.value(&x) - grid_min;
            let got = obj.suboptimality(&cube, &x).unwrap();
            assert!(
                (got - want).abs() < 1e-4 * (1.0 + obj.hessian_scale()),
                "{got} vs {want}"
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        /// Follow-the-leader / be-the-leader on accumulate terms in n = 2, ten
        /// rounds, with exact constrained minimizers.
        #[test]
        fn ftl_btl_inequality(seed in any::<u64>()) {
            let mut rng = Rng::new(seed);
            let ball = FeasibleSet::ball(2, 1.0).unwrap();
            let alpha = rng.uniform_range(0.2, 2.0);
            let t0 = rng.uniform_range(0.5, 4.0);
            let x1 = ball.sample_uniform(&mut rng);
            let c1 = t0 * alpha / 2.0;
            let rounds = 10;
            let terms: Vec<(Vector, Vector, f64)> = (0..rounds)
                .map(|_| {
                    let g = Vector::from_fn(2, |_| 2.0 * rng.standard_normal());
                    let a = ball.sample_uniform(&mut rng);
                    (g, a, rng.uniform_range(0.5, 2.0))
                })
                .collect();
            let term = |m: usize, x: &[f64]| {
                let (g, a, w) = &terms[m];
                dot(x, g) + w * 0.5 * alpha * distance_sq(x, a)
            };
            let mut obj = RftlObjective::fresh(alpha, t0, &x1).unwrap();
            let mut minimizers = vec![obj.exact_minimizer(&ball).unwrap()];
            for (g, a, w) in &terms {
                obj.accumulate(g, a, *w).unwrap();
                minimizers.push(obj.exact_minimizer(&ball).unwrap());
            }
            let drift: f64 = (0..rounds).map(|m| term(m, &minimizers[m]) - term(m, &minimizers[m + 1])).sum();
            for _ in 0..100 {
                let x = ball.sample_uniform(&mut rng);
                let lhs: f64 = (0..rounds).map(|m| term(m, &minimizers[m]) - term(m, &x)).sum();
                prop_assert!(lhs <= drift + c1 * distance_sq(&x, &x1) + 1e-9);
            }
        }
    }
}
