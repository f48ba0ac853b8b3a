mod common;

use border_core::genborder::{check_feasible_general, FeasibilitySystem};
use border_core::model::{BidderModel, ReducedForm};
use border_core::oracle::brute_force_feasible;
use border_core::{check_feasible, check_feasible_iid, SymmetricReducedForm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn border_check_matches_explicit_allocation_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (mut feasible, mut infeasible) = (0, 0);
    for _ in 0..600 {
        let model = common::random_grid_model(&mut rng, 3, 3, 1);
        let rf = ReducedForm::single(common::random_grid_table(&mut rng, &model));
        let fast = check_feasible(&model, &rf, 0).unwrap();
        let sys = FeasibilitySystem::items_once(model.num_bidders(), 1);
        let slow = brute_force_feasible(&model, &rf, &sys).unwrap();
        assert_eq!(fast.is_feasible(), slow.is_some(), "{model:?}\n{rf:?}");
        if let Some(c) = &fast.certificate {
            assert!(c.lhs > c.rhs);
            assert_eq!(c.hyperplane.lhs(&rf.to_vector()), c.lhs);
            infeasible += 1;
        } else {
            feasible += 1;
        }
    }
    assert!(
        feasible >= 100 && infeasible >= 100,
        "{feasible} / {infeasible}"
    );
}

#[test]
fn iid_check_matches_explicit_allocation_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..200 {
        let base = common::random_grid_model(&mut rng, 1, 3, 1);
        let m = rng.gen_range(1..=3);
        let model = BidderModel::iid(m, (*base.bidders[0]).clone(), 1);
        let row = common::random_grid_table(&mut rng, &base).remove(0);
        let srf = SymmetricReducedForm::new(vec![row]);
        let fast = check_feasible_iid(&model, &srf, 0).unwrap();
        let rf = srf.to_reduced_form(m);
        let sys = FeasibilitySystem::items_once(m, 1);
        assert_eq!(
            fast.is_feasible(),
            brute_force_feasible(&model, &rf, &sys).unwrap().is_some()
        );
        assert_eq!(
            fast.is_feasible(),
            check_feasible(&model, &rf, 0).unwrap().is_feasible()
        );
    }
}

#[test]
fn general_check_specializes_to_border_for_product_joints() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..150 {
        let model = common::random_grid_model(&mut rng, 3, 3, 1);
        let rf = ReducedForm::single(common::random_grid_table(&mut rng, &model));
        let joint = model.product_joint();
        let with_joint = model.clone().with_joint(joint);
        let sys = FeasibilitySystem::items_once(model.num_bidders(), 1);
        let general = check_feasible_general(&with_joint, &rf, &sys).unwrap();
        assert_eq!(
            general.is_feasible(),
            check_feasible(&model, &rf, 0).unwrap().is_feasible()
        );
    }
}
