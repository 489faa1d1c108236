//! Solvers checked against exhaustive search on small random instances.

mod common;

use common::{crossed_groups, pair_groups, random_instance, rng, Bounds, Shape};
use fairvote::solvers::brute_force;
use fairvote::{
    feasibility_exact, solve, violation_report, Error, FeasibilityOptions, FeasibilityStatus,
    Guarantee, Instance, Rule, SolveOptions, Strategy,
};

const CAP: u128 = 10_000_000;

fn with_strategy(strategy: Strategy) -> SolveOptions {
    SolveOptions {
        strategy,
        ..SolveOptions::default()
    }
}

#[test]
fn auto_is_exact_for_modular_rules_up_to_degree_two() {
    let mut r = rng(11);
    let shape = Shape {
        m: (4, 13),
        n: 20,
        p: (1, 8),
        max_deg: 2,
        k_max: 6,
        bounds: Bounds::Both,
    };
    let rules = [Rule::Sntv, Rule::Bloc, Rule::KBorda];
    for i in 0..120 {
        let inst = random_instance(&mut r, &shape);
        let rule = &rules[i % 3];
        let opt = brute_force(&inst, rule, CAP);
        let got = solve(&inst, rule, &SolveOptions::default());
        match (opt, got) {
            (Ok(o), Ok(s)) => {
                assert_eq!(s.score, o.score, "instance {i}");
                assert_eq!(s.guarantee, Guarantee::Exact);
                assert!(s.committee.is_feasible(&inst));
            }
            (Err(Error::Infeasible(_)), Err(Error::Infeasible(_))) => {}
            (o, s) => panic!("instance {i}: brute {o:?} vs auto {s:?}"),
        }
    }
}

#[test]
fn auto_with_few_groups_is_feasible_and_half_optimal() {
    // constant-p keeps the per-vector quota greedy, a 1/2-approximation
    let mut r = rng(12);
    let shape = Shape {
        m: (4, 12),
        n: 15,
        p: (1, 4),
        max_deg: 3,
        k_max: 5,
        bounds: Bounds::Both,
    };
    for i in 0..60 {
        let inst = random_instance(&mut r, &shape);
        let rule = if i % 2 == 0 {
            Rule::AlphaCc
        } else {
            Rule::BetaCc
        };
        let opt = brute_force(&inst, &rule, CAP);
        let got = solve(&inst, &rule, &SolveOptions::default());
        match (opt, got) {
            (Ok(o), Ok(s)) => {
                assert!(s.committee.is_feasible(&inst), "instance {i}");
                assert!(s.score <= o.score + 1e-9);
                assert!(
                    s.score >= o.score / 2.0 - 1e-9,
                    "instance {i}: {} vs OPT {}",
                    s.score,
                    o.score
                );
            }
            (Err(Error::Infeasible(_)), Err(Error::Infeasible(_))) => {}
            (o, s) => panic!("instance {i}: brute {o:?} vs auto {s:?}"),
        }
    }
}

#[test]
fn feasibility_agrees_with_enumeration() {
    let mut r = rng(13);
    let shape = Shape {
        m: (3, 12),
        n: 0,
        p: (1, 7),
        max_deg: 3,
        k_max: 6,
        bounds: Bounds::Both,
    };
    let (mut yes, mut no) = (0, 0);
    for i in 0..150 {
        let inst = random_instance(&mut r, &shape);
        let exists = brute_force(&inst, &Rule::AlphaCc, CAP).is_ok();
        match feasibility_exact(&inst, &FeasibilityOptions::default()).status {
            FeasibilityStatus::Feasible(c) => {
                assert!(
                    exists && c.is_feasible(&inst) && c.len() == inst.k(),
                    "instance {i}"
                );
                yes += 1;
            }
            FeasibilityStatus::Infeasible(_) => {
                assert!(!exists, "instance {i}");
                no += 1;
            }
            FeasibilityStatus::Unknown(why) => panic!("instance {i}: unknown ({why})"),
        }
    }
    assert!(yes > 20 && no > 20, "{yes} feasible, {no} infeasible");
}

#[test]
fn upper_only_pipelines_stay_within_twice_the_bounds() {
    let mut r = rng(14);
    let shape = Shape {
        m: (6, 12),
        n: 15,
        p: (2, 6),
        max_deg: 3,
        k_max: 5,
        bounds: Bounds::UpperOnly,
    };
    let mut checked = 0;
    while checked < 30 {
        let inst = random_instance(&mut r, &shape);
        let Ok(opt) = brute_force(&inst, &Rule::BetaCc, CAP) else {
            continue;
        };
        for strategy in [Strategy::GreedyExtendible, Strategy::ShrunkCg] {
            let s = solve(&inst, &Rule::BetaCc, &with_strategy(strategy)).unwrap();
            assert_eq!(s.committee.len(), inst.k());
            // bounds may be exceeded, so the score can beat the constrained optimum
            if strategy == Strategy::GreedyExtendible {
                assert!(s.score >= opt.score / (inst.delta() as f64 + 1.0) - 1e-9);
            }
            for (c, g) in s.committee.group_counts().iter().zip(inst.groups()) {
                assert!(
                    *c <= 2 * g.upper,
                    "{}: count {c} > 2·{}",
                    strategy.name(),
                    g.upper
                );
            }
            assert!(
                matches!(s.guarantee, Guarantee::Bicriterion { violation_cap, .. } if violation_cap == 2.0)
            );
        }
        checked += 1;
    }
}

#[test]
fn lower_only_is_always_feasible() {
    let mut r = rng(15);
    let shape = Shape {
        m: (6, 12),
        n: 15,
        p: (1, 5),
        max_deg: 3,
        k_max: 6,
        bounds: Bounds::Both,
    };
    let mut checked = 0;
    while checked < 30 {
        let base = random_instance(&mut r, &shape);
        let bounds: Vec<(usize, usize)> = base
            .groups()
            .iter()
            .map(|g| (g.lower, g.members.len()))
            .collect();
        let inst = base.with_bounds(&bounds).unwrap();
        let Ok(opt) = brute_force(&inst, &Rule::AlphaCc, CAP) else {
            continue;
        };
        let s = solve(&inst, &Rule::AlphaCc, &with_strategy(Strategy::LowerOnly)).unwrap();
        assert!(s.committee.is_feasible(&inst));
        assert!(s.score <= opt.score);
        checked += 1;
    }
}

#[test]
fn swap_pipeline_reports_bicriterion_guarantee() {
    let mut r = rng(16);
    let shape = Shape {
        m: (6, 12),
        n: 15,
        p: (2, 5),
        max_deg: 3,
        k_max: 6,
        bounds: Bounds::Both,
    };
    let mut checked = 0;
    while checked < 20 {
        let inst = random_instance(&mut r, &shape);
        if inst.delta() < 2 || brute_force(&inst, &Rule::BetaCc, CAP).is_err() {
            continue;
        }
        let s = solve(
            &inst,
            &Rule::BetaCc,
            &with_strategy(Strategy::ContinuousGreedy),
        )
        .unwrap();
        assert_eq!(s.solver, "cg+swap");
        assert_eq!(s.committee.len(), inst.k());
        let rep = violation_report(&s.committee, &inst);
        assert_eq!(rep.feasible, s.committee.is_feasible(&inst));
        assert!(matches!(s.guarantee, Guarantee::Bicriterion { .. }));
        checked += 1;
    }
}

#[test]
fn solutions_are_reproducible_from_the_seed() {
    let inst = pair_groups(0);
    for strategy in [
        Strategy::Auto,
        Strategy::ContinuousGreedy,
        Strategy::ConstantP,
    ] {
        let opts = SolveOptions {
            strategy,
            seed: 7,
            ..SolveOptions::default()
        };
        let a = solve(&inst, &Rule::BetaCc, &opts).unwrap();
        let b = solve(&inst, &Rule::BetaCc, &opts).unwrap();
        assert_eq!(a.committee, b.committee);
        assert_eq!(a.score, b.score);
    }
}

#[test]
fn worked_examples_through_every_applicable_strategy() {
    let crossed = crossed_groups();
    for strategy in [Strategy::Auto, Strategy::BruteForce, Strategy::ConstantP] {
        let s = solve(&crossed, &Rule::BetaCc, &with_strategy(strategy)).unwrap();
        assert_eq!(s.score, 1300.0, "{}", strategy.name());
    }
    let tight = pair_groups(1);
    let s = solve(&tight, &Rule::BetaCc, &with_strategy(Strategy::BruteForce)).unwrap();
    assert_eq!((s.committee.one_based(), s.score), (vec![3, 4], 200.0));
}

#[test]
fn solution_json_carries_the_report() {
    let inst = crossed_groups();
    let s = solve(&inst, &Rule::Sntv, &SolveOptions::default()).unwrap();
    let v = s.to_json(&inst);
    assert_eq!(v["score"], s.score);
    assert_eq!(v["feasible"], true);
    assert_eq!(v["violation"]["feasible"], true);
    assert_eq!(v["committee"].as_array().unwrap().len(), 4);
    assert!(v["committee"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c.as_u64().unwrap() >= 1));
}

#[test]
fn instance_json_round_trip() {
    let mut r = rng(17);
    let shape = Shape {
        m: (2, 10),
        n: 6,
        p: (0, 4),
        max_deg: 2,
        k_max: 5,
        bounds: Bounds::Both,
    };
    for _ in 0..40 {
        let inst = random_instance(&mut r, &shape);
        assert_eq!(Instance::from_json(&inst.to_json()).unwrap(), inst);
    }
}
