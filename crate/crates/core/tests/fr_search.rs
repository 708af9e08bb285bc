mod common;

use common::checks::oracle_case;
use common::{check_solution, context, scenario};
use locomanip::fr_planner::AdStar;

fn matches_oracle(name: &str, len: usize) {
    match oracle_case(name, len) {
        Ok(detail) => eprintln!("{detail}"),
        Err(why) => panic!("{why}"),
    }
}

#[test]
fn optimal_on_straight_bobbin_prefix() {
    matches_oracle("straight", 8);
}

#[test]
fn optimal_on_curved_bobbin_prefix() {
    matches_oracle("curved", 8);
}

#[test]
fn optimal_on_door_prefix() {
    matches_oracle("door", 6);
}

#[test]
fn optimal_on_door_with_obstacle_prefix() {
    matches_oracle("door_obstacle", 6);
}

#[test]
fn optimal_on_cart_prefix() {
    matches_oracle("cart", 9);
}

fn full_plan(
    name: &str,
    max_expansions: usize,
) -> (locomanip::fr_planner::PlanningContext, AdStar) {
    let mut s = scenario(name);
    s.fr.max_expansions = Some(max_expansions);
    s.fr.time_budget = 120.0;
    let ctx = context(&s, None);
    let mut search = AdStar::new(ctx.clone()).unwrap();
    let _ = search.run();
    (ctx, search)
}

#[test]
fn every_anytime_solution_is_sound() {
    for name in ["bobbin", "door", "door_obstacle", "cart"] {
        let (ctx, search) = full_plan(name, 20_000);
        assert!(!search.solutions().is_empty(), "{name}: no solution");
        for sol in search.solutions() {
            check_solution(&ctx, sol);
        }
    }
}

#[test]
fn anytime_costs_and_inflation_never_increase() {
    let (_, search) = full_plan("bobbin", 20_000);
    let sols = search.solutions();
    assert!(sols.len() > 1);
    for w in sols.windows(2) {
        assert!(w[1].cost <= w[0].cost + 1e-12);
        assert!(w[1].epsilon < w[0].epsilon);
        assert!(w[1].expansions >= w[0].expansions);
    }
}

#[test]
fn expansion_capped_search_is_deterministic() {
    let (_, a) = full_plan("door_obstacle", 5_000);
    let (_, b) = full_plan("door_obstacle", 5_000);
    let key = |s: &AdStar| {
        s.solutions()
            .iter()
            .map(|x| (x.epsilon, x.cost, x.expansions, x.states.clone()))
            .collect::<Vec<_>>()
    };
    assert_eq!(key(&a), key(&b));
    assert_eq!(a.stats().expansions, b.stats().expansions);
}
