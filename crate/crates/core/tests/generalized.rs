mod common;

use border_core::fixtures;
use border_core::genborder::{
    build_flow_instance, check_feasible_general, check_flow_feasible, target_mass,
    weight_condition, FeasibilitySystem, GeneralVerdict,
};
use border_core::{Execution, Rational};
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn flow_and_lp_agree_with_duality_sandwich() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut yes, mut no) = (0, 0);
    for _ in 0..100 {
        let (model, rf) = common::random_demand_instance(&mut rng);
        let sys = FeasibilitySystem::from_model(&model).unwrap();
        let verdict = check_feasible_general(&model, &rf, &sys).unwrap();
        let flow = build_flow_instance(&model, &rf).unwrap();
        let profiles = flow.profiles.len();
        assert_eq!(
            flow.edges.len(),
            (model.items + model.num_bidders()) * profiles
        );
        assert_eq!(
            flow.nodes.len(),
            model.items + profiles + model.total_types()
        );
        assert_eq!(check_flow_feasible(&flow).unwrap(), verdict.is_feasible());
        match verdict {
            GeneralVerdict::Feasible(_) => yes += 1,
            GeneralVerdict::Infeasible(cw) => {
                no += 1;
                assert!(cw.primal_optimum < target_mass(&model, &rf));
                assert!(cw.lhs > cw.rhs);
                assert!(cw
                    .weights
                    .iter()
                    .flatten()
                    .flatten()
                    .all(|w| *w >= Rational::zero() && *w <= Rational::one()));
                let again = weight_condition(&model, &rf, &sys, &cw.weights, Execution::Sequential)
                    .unwrap();
                assert_eq!(again, (cw.lhs, cw.rhs));
            }
        }
    }
    assert!(yes >= 10 && no >= 10, "{yes} / {no}");
}

#[test]
fn feasible_witness_implements_the_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..60 {
        let (model, rf) = common::random_demand_instance(&mut rng);
        let sys = FeasibilitySystem::from_model(&model).unwrap();
        let GeneralVerdict::Feasible(witness) = check_feasible_general(&model, &rf, &sys).unwrap()
        else {
            continue;
        };
        let joint = &model.joint.as_ref().unwrap().profiles;
        for j in 0..model.items {
            for i in 0..model.num_bidders() {
                for a in 0..model.num_types(i) {
                    let mut got = Rational::zero();
                    for alloc in &witness {
                        let pr = &joint.iter().find(|(t, _)| *t == alloc.types).unwrap().1;
                        if alloc.types[i] == a {
                            got += &alloc.phi[i][j] * pr;
                        }
                    }
                    assert_eq!(got, rf.get(j, i, a) * model.prob(i, a));
                }
            }
        }
        for alloc in &witness {
            for h in &sys.inequalities {
                let lhs: Rational = h
                    .coeffs
                    .iter()
                    .map(|(i, j, c)| c * &alloc.phi[*i][*j])
                    .sum();
                assert!(lhs <= h.bound);
            }
        }
    }
}

#[test]
fn false_extension_two_needs_item_dependent_weights() {
    let (model, rf) = fixtures::false_extension_two();
    let sys = FeasibilitySystem::from_model(&model).unwrap();
    let grid = [Rational::zero(), common::r(1, 2), Rational::one()];
    let per = model.num_bidders() * 2;
    for code in 0..3usize.pow(per as u32) {
        let mut c = code;
        let uniform: Vec<Vec<Rational>> = (0..model.num_bidders())
            .map(|_| {
                (0..2)
                    .map(|_| {
                        let w = grid[c % 3].clone();
                        c /= 3;
                        w
                    })
                    .collect()
            })
            .collect();
        let weights = vec![uniform; model.items];
        let (lhs, rhs) =
            weight_condition(&model, &rf, &sys, &weights, Execution::default()).unwrap();
        assert!(lhs <= rhs);
    }
    let GeneralVerdict::Infeasible(cw) = check_feasible_general(&model, &rf, &sys).unwrap() else {
        panic!("false extension 2 must be infeasible");
    };
    let item_dependent = (0..model.num_bidders())
        .any(|i| (0..2).any(|a| cw.weights.iter().any(|w| w[i][a] != cw.weights[0][i][a])));
    assert!(item_dependent);
    assert!(cw.lhs > cw.rhs);
}
