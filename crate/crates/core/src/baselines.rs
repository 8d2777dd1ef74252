//! Exact comparators: projected online gradient descent, exact RFTL and the
//! best fixed point in hindsight.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{FeasibleSet, Vector};
use crate::losses::{Loss, LossSequence, QuadraticLoss, ValueOracle};
use crate::objective::RftlObjective;
use crate::ofw_full::check_start;
use crate::trace::{RoundRecord, RunTrace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    OgdStronglyConvex,
    RftlExact,
}

/// Projected gradient descent with step `1/(alpha t)`.
pub fn ogd_run(losses: &LossSequence, set: &FeasibleSet, alpha: f64, x1: &[f64]) -> Result<RunTrace> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Parameter(format!("alpha must be positive, got {alpha}")));
    }
    check_start(set, x1)?;
    let mut x = Vector::from(x1);
    let mut rounds = Vec::with_capacity(losses.len());
    for (t, loss) in losses.losses().iter().enumerate() {
        let value = loss.value(&x)?;
        let grad = loss.gradient(&x)?;
        let step = 1.0 / (alpha * (t + 1) as f64);
        let mut next = x.clone();
        next.axpy(-step, &grad);
        let next = set.project(&next);
        rounds.push(RoundRecord {
            play: x,
            loss: value,
            grad_norm: grad.norm(),
            sigma: step,
            lmo_calls: 0,
            suboptimality: None,
        });
        x = next;
    }
    let projections = rounds.len() as u64;
    Ok(RunTrace {
        rounds,
        lmo_calls: 0,
        projections,
    })
}

/// Plays the exact minimizer of the accumulated objective every round, with
/// the objective built from its own plays and gradients.
pub fn rftl_exact_run(losses: &LossSequence, set: &FeasibleSet, alpha: f64, t0: f64, x1: &[f64]) -> Result<RunTrace> {
    if !(t0.is_finite() && t0 > 0.0) {
        return Err(Error::Parameter(format!(
            "T0 must be positive for an exact minimizer, got {t0}"
        )));
    }
    check_start(set, x1)?;
    let mut obj = RftlObjective::fresh(alpha, t0, x1)?;
    let mut rounds = Vec::with_capacity(losses.len());
    for loss in losses.losses() {
        let x = obj.exact_minimizer(set)?;
        let suboptimality = obj.suboptimality(set, &x)?;
        let value = loss.value(&x)?;
        let grad = loss.gradient(&x)?;
        obj.accumulate(&grad, &x, 1.0)?;
        rounds.push(RoundRecord {
            play: x,
            loss: value,
            grad_norm: grad.norm(),
            sigma: 0.0,
            lmo_calls: 0,
            suboptimality: Some(suboptimality),
        });
    }
    let projections = rounds.len() as u64;
    Ok(RunTrace {
        rounds,
        lmo_calls: 0,
        projections,
    })
}

/// `argmin_{x in set} sum_t f_t(x)` and the total loss there. The sum of
/// isotropic quadratics is isotropic, so the minimizer is the projection of
/// `sum (alpha_t theta_t - linear_t) / sum alpha_t`.
pub fn best_in_hindsight(losses: &[QuadraticLoss], set: &FeasibleSet) -> Result<(Vector, f64)> {
    let first = losses
        .first()
        .ok_or_else(|| Error::Usage("loss sequence must be nonempty".into()))?;
    let n = first.dim();
    crate::error::check_dim(set.dim(), n)?;
    let mut weight = 0.0;
    let mut target = Vector::zeros(n);
    for loss in losses {
        crate::error::check_dim(n, loss.dim())?;
        weight += loss.alpha();
        target.axpy(loss.alpha(), loss.theta());
        target.axpy(-1.0, loss.linear());
    }
    target.scale_mut(1.0 / weight);
    let x_star = set.project(&target);
    let mut total = 0.0;
    for loss in losses {
        total += loss.value(&x_star)?;
    }
    Ok((x_star, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{distance, Rng};
    use crate::losses::{generate_sequence, AdversaryKind, AdversarySpec};

    fn seq(kind: AdversaryKind, horizon: usize, set: &FeasibleSet, seed: u64) -> LossSequence {
        generate_sequence(&AdversarySpec::new(kind, 1.0), horizon, set, &Rng::new(seed)).unwrap()
    }

    #[test]
    fn hindsight_examples() {
        let ball = FeasibleSet::ball(2, 1.0).unwrap();
        let losses = vec![
            QuadraticLoss::centered(1.0, Vector::from([2.0, 0.0])).unwrap(),
            QuadraticLoss::centered(1.0, Vector::from([0.0, 2.0])).unwrap(),
        ];
        let (x, total) = best_in_hindsight(&losses, &ball).unwrap();
        let h = 0.5f64.sqrt();
        assert!(distance(&x, &[h, h]) < 1e-15);
        let want: f64 = losses.iter().map(|l| l.value(&x).unwrap()).sum();
        assert!((total - want).abs() < 1e-12);

        let single = vec![QuadraticLoss::centered(2.0, Vector::from([0.0, 3.0])).unwrap()];
        let (x, _) = best_in_hindsight(&single, &ball).unwrap();
        assert!(distance(&x, &[0.0, 1.0]) < 1e-15);
        assert!(best_in_hindsight(&[], &ball).is_err());
    }

    #[test]
    fn hindsight_beats_random_points() {
        let mut rng = Rng::new(4);
        for set in [
            FeasibleSet::ball(3, 1.0).unwrap(),
            FeasibleSet::l1_ball(3, 1.0).unwrap(),
        ] {
            let losses: Vec<QuadraticLoss> = (0..20)
                .map(|_| {
                    let theta = Vector::from_fn(3, |_| 2.0 * rng.standard_normal());
                    let lin = Vector::from_fn(3, |_| rng.standard_normal());
                    QuadraticLoss::new(rng.uniform_range(0.5, 2.0), theta, lin).unwrap()
                })
                .collect();
            let (_, total) = best_in_hindsight(&losses, &set).unwrap();
            for _ in 0..10_000 {
                let y = set.sample_uniform(&mut rng);
                let other: f64 = losses.iter().map(|l| l.value(&y).unwrap()).sum();
                assert!(total <= other + 1e-9);
            }
        }
    }

    #[test]
    fn ogd_examples() {
        let ball = FeasibleSet::ball(2, 1.0).unwrap();
        let one = seq(AdversaryKind::IidRandomCenter, 1, &ball, 1);
        let trace = ogd_run(&one, &ball, 1.0, &[0.0, 0.0]).unwrap();
        assert_eq!(trace.len(), 1);
        assert_eq!(trace.rounds[0].play.as_slice(), &[0.0, 0.0]);

        let center = Vector::from([0.4, -0.5]);
        let fixed = seq(
            AdversaryKind::FixedCenter {
                center: Some(center.clone()),
            },
            500,
            &ball,
            2,
        );
        let trace = ogd_run(&fixed, &ball, 1.0, &[-0.9, 0.0]).unwrap();
        assert_eq!(trace.projections, 500);
        assert_eq!(trace.lmo_calls, 0);
        let last = &trace.rounds.last().unwrap().play;
        assert!(distance(last, &center) <= 10.0 / 500.0);
    }

    #[test]
    fn ogd_logarithmic_regret() {
        let ball = FeasibleSet::ball(3, 1.0).unwrap();
        for seed in 0..5 {
            let s = seq(AdversaryKind::IidRandomCenter, 2000, &ball, seed);
            let trace = ogd_run(&s, &ball, 1.0, &[0.0; 3]).unwrap();
            let (_, best) = best_in_hindsight(s.losses(), &ball).unwrap();
            let regret = trace.total_loss() - best;
            let g = s.bounds().gradient_bound;
            assert!(regret <= 2.0 * g * g / 2.0 * (1.0 + 2000f64.ln()), "{regret}");
        }
    }

    #[test]
    fn rftl_examples() {
        let ball = FeasibleSet::ball(2, 1.0).unwrap();
        let s = seq(AdversaryKind::DriftingCenter { step: 0.1 }, 300, &ball, 3);
        let x1 = [0.1, 0.2];
        let trace = rftl_exact_run(&s, &ball, 1.0, 5.0, &x1).unwrap();
        assert_eq!(trace.rounds[0].play.as_slice(), &x1);
        assert_eq!(trace.projections, 300);
        for r in &trace.rounds {
            assert!(r.suboptimality.unwrap().abs() <= 1e-9);
            assert!(ball.contains(&r.play, 1e-12));
        }
        assert!(rftl_exact_run(&s, &ball, 1.0, 0.0, &x1).is_err());
    }
}
