mod common;

use border_core::hierarchy::{decompose_reduced_form, reduced_form_of};
use border_core::model::BidderModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn round_trip(model: &BidderModel, rng: &mut ChaCha8Rng) {
    let dist = common::random_distribution(rng, model);
    let rf = reduced_form_of(model, std::slice::from_ref(&dist));
    let out =
        decompose_reduced_form(model, &rf, 0).unwrap_or_else(|e| panic!("{e}: {model:?} {rf:?}"));
    assert_eq!(reduced_form_of(model, std::slice::from_ref(&out)), rf);
    assert!(out.validate(model).is_ok());
    let types: usize = model.total_types();
    assert!(out.len() <= types + 1);
    let table = rf.item(0);
    for e in &out.entries {
        if model.iid {
            assert!(out.len() <= model.num_types(0) + 1);
            assert!(e.mechanism.is_well_ordered(&table[0]));
        } else {
            assert!(e.mechanism.is_strict(), "{:?}", e.mechanism);
            assert!(e.mechanism.is_partially_ordered(table));
        }
    }
}

#[test]
fn independent_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..200 {
        let model = common::random_independent(&mut rng, 3, 4);
        round_trip(&model, &mut rng);
    }
}

#[test]
fn iid_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..200 {
        let model = common::random_iid(&mut rng, 4, 4);
        round_trip(&model, &mut rng);
    }
}

#[test]
fn iid_model_with_asymmetric_form_uses_the_general_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let base = common::random_iid(&mut rng, 3, 3);
        let indep = BidderModel {
            iid: false,
            ..base.clone()
        };
        let dist = common::random_distribution(&mut rng, &indep);
        let rf = reduced_form_of(&base, std::slice::from_ref(&dist));
        let out = decompose_reduced_form(&base, &rf, 0).unwrap();
        assert_eq!(reduced_form_of(&base, std::slice::from_ref(&out)), rf);
    }
}
