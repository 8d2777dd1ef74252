//! End-to-end runs of the online algorithms over every feasible-set shape.

use pfol_core::baselines::{best_in_hindsight, ogd_run, rftl_exact_run};
use pfol_core::geometry::distance;
use pfol_core::losses::{generate_sequence, AdversaryKind, AdversarySpec};
use pfol_core::ofw_bandit::{self, BanditConfig, SolveMode};
use pfol_core::ofw_full::{self, BConstant, OfwConfig};
use pfol_core::{FeasibleSet, LossSequence, RftlObjective, Rng};

fn sets(n: usize) -> Vec<FeasibleSet> {
    vec![
        FeasibleSet::ball(n, 1.0).unwrap(),
        FeasibleSet::cube(n, 0.7).unwrap(),
        FeasibleSet::l1_ball(n, 1.5).unwrap(),
    ]
}

fn sequence(kind: AdversaryKind, horizon: usize, set: &FeasibleSet, seed: u64) -> LossSequence {
    generate_sequence(&AdversarySpec::new(kind, 1.0), horizon, set, &Rng::new(seed)).unwrap()
}

#[test]
fn full_information_gap_holds_on_every_set() {
    for set in sets(4) {
        for kind in [
            AdversaryKind::DriftingCenter { step: 0.1 },
            AdversaryKind::AlternatingCorners,
            AdversaryKind::IidRandomCenter,
        ] {
            let seq = sequence(kind, 2000, &set, 9);
            let cfg = OfwConfig::auto(&seq, &set, BConstant::GapGuarantee).with_suboptimality(true);
            let trace = ofw_full::run(&seq, &set, &cfg, &[0.0; 4]).unwrap();
            assert_eq!(trace.lmo_calls, 2000);
            assert_eq!(trace.projections, 0);
            for (t, r) in trace.rounds.iter().enumerate() {
                assert!(set.contains(&r.play, 1e-9), "{} round {}", set.label(), t + 1);
                assert!(r.suboptimality.unwrap() <= cfg.epsilon(t as u64 + 1) + 1e-6);
            }
        }
    }
}

#[test]
fn full_information_regret_within_both_bounds() {
    let ball = FeasibleSet::ball(5, 1.0).unwrap();
    let seq = sequence(AdversaryKind::DriftingCenter { step: 0.05 }, 1000, &ball, 17);
    let cfg = OfwConfig::auto(&seq, &ball, BConstant::GapGuarantee);
    let trace = ofw_full::run(&seq, &ball, &cfg, &[0.0; 5]).unwrap();
    let (_, best) = best_in_hindsight(seq.losses(), &ball).unwrap();
    let regret = trace.total_loss() - best;
    let g = seq.bounds().gradient_bound;
    let params = ofw_full::schedule_params(g, 1.0, 1.0, BConstant::GapGuarantee);
    assert!(regret <= ofw_full::regret_decomposition_bound(g, 1.0, 1.0, params, 1000));
    assert!(regret <= ofw_full::full_info_regret_bound(g, 1.0, 1.0, 1000));
}

#[test]
fn ofw_suboptimality_is_measured_against_the_exact_iterates() {
    // Feeding OFW's own plays into a fresh objective reproduces the recorded
    // suboptimality, and exact RFTL on the same losses starts at x1.
    let set = FeasibleSet::l1_ball(3, 1.0).unwrap();
    let seq = sequence(AdversaryKind::IidRandomCenter, 300, &set, 2);
    let cfg = OfwConfig::auto(&seq, &set, BConstant::GapGuarantee).with_suboptimality(true);
    let x1 = [0.1, -0.2, 0.3];
    let trace = ofw_full::run(&seq, &set, &cfg, &x1).unwrap();
    let mut obj = RftlObjective::fresh(cfg.alpha, cfg.t0, &x1).unwrap();
    for (r, loss) in trace.rounds.iter().zip(seq.losses()) {
        let sub = obj.suboptimality(&set, &r.play).unwrap();
        assert!((sub - r.suboptimality.unwrap()).abs() <= 1e-9 * sub.abs().max(1.0));
        use pfol_core::losses::Loss;
        obj.accumulate(&loss.gradient(&r.play).unwrap(), &r.play, 1.0).unwrap();
    }
    let exact = rftl_exact_run(&seq, &set, cfg.alpha, cfg.t0, &x1).unwrap();
    assert_eq!(exact.rounds[0].play.as_slice(), &x1);
}

#[test]
fn bandit_blocks_are_certified_on_every_set() {
    for set in sets(3) {
        let seq = sequence(AdversaryKind::DriftingCenter { step: 0.1 }, 3000, &set, 4);
        let c = 0.5 * set.inner_radius() * 3000f64.cbrt();
        let cfg = BanditConfig::auto(&seq, &set, Some(c))
            .unwrap()
            .with_suboptimality(true);
        let run = ofw_bandit::run(&seq, &set, &cfg, &Rng::new(8), &[0.0; 3]).unwrap();
        assert_eq!(run.trace.len(), 3000);
        assert_eq!(run.blocks.len() as u64, cfg.num_blocks());
        let shrunk = set.shrink(cfg.delta).unwrap();
        for b in &run.blocks {
            assert!(shrunk.contains(&b.base, 1e-9));
            if let Some(s) = &b.solve {
                assert!(s.converged);
                assert!(b.suboptimality.unwrap() <= b.epsilon + 1e-6);
            }
        }
        assert!(run.trace.plays().all(|y| set.contains(y, 1e-9)));
        let lmo: u64 = run
            .blocks
            .iter()
            .filter_map(|b| b.solve.as_ref())
            .map(|s| s.lmo_calls)
            .sum();
        assert_eq!(lmo, run.trace.lmo_calls);
    }
}

#[test]
fn bandit_schedule_modes_agree_on_every_set() {
    for set in sets(2) {
        let seq = sequence(AdversaryKind::IidRandomCenter, 500, &set, 6);
        let c = 0.5 * set.inner_radius() * 500f64.cbrt();
        let base = BanditConfig::auto(&seq, &set, Some(c)).unwrap();
        let runs: Vec<_> = [SolveMode::SolveFirst, SolveMode::PlayFirst, SolveMode::Background]
            .into_iter()
            .map(|m| ofw_bandit::run(&seq, &set, &base.clone().with_solve_mode(m), &Rng::new(3), &[0.0; 2]).unwrap())
            .collect();
        assert_eq!(runs[0], runs[1]);
        assert_eq!(runs[0], runs[2]);
    }
}

#[test]
fn ogd_and_rftl_stay_feasible_and_converge_on_fixed_losses() {
    for set in sets(3) {
        let center = set.sample_uniform(&mut Rng::new(1)).scaled(0.5);
        let kind = AdversaryKind::FixedCenter {
            center: Some(center.clone()),
        };
        let seq = sequence(kind, 400, &set, 1);
        let ogd = ogd_run(&seq, &set, 1.0, &[0.0; 3]).unwrap();
        let rftl = rftl_exact_run(&seq, &set, 1.0, 5.0, &[0.0; 3]).unwrap();
        for trace in [&ogd, &rftl] {
            assert!(trace.plays().all(|x| set.contains(x, 1e-9)));
            assert_eq!(trace.projections, 400);
            assert!(distance(&trace.rounds[399].play, &center) <= 10.0 / 400.0);
        }
    }
}

#[test]
fn configs_round_trip_through_json() {
    let set = FeasibleSet::cube(2, 0.5).unwrap();
    let json = serde_json::to_string(&set).unwrap();
    assert_eq!(serde_json::from_str::<FeasibleSet>(&json).unwrap(), set);
    let seq = sequence(AdversaryKind::IidRandomCenter, 64, &set, 0);
    let cfg = BanditConfig::auto(&seq, &set, Some(0.5)).unwrap();
    let back: BanditConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(back, cfg);
}
