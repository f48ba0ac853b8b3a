//! Small named instances used across tests, benches and the CLI fixtures.

use crate::model::{Bidder, BidderModel, ReducedForm, SymmetricReducedForm};
use crate::optimal::{ValuationModel, ValuedType};
use crate::rational::{ratio, zero, Rational};

/// Two bidders: `{A: 1/8, B: 7/8}` with `π = (5/8, 0)` and `{C: 1/2, D: 1/2}`
/// with `π = (1, 3/4)`. Infeasible, yet every plain-π threshold set passes.
pub fn threshold_blind_spot() -> (BidderModel, ReducedForm) {
    let model = BidderModel::independent(
        vec![
            Bidder::from_pairs(&[("A", ratio(1, 8)), ("B", ratio(7, 8))]),
            Bidder::from_pairs(&[("C", ratio(1, 2)), ("D", ratio(1, 2))]),
        ],
        1,
    );
    let rf = ReducedForm::single(vec![
        vec![ratio(5, 8), zero()],
        vec![ratio(1, 1), ratio(3, 4)],
    ]);
    (model, rf)
}

/// Bidder 1 has the single type `A` with `π = 1/3`; bidder 2 has `B`, `C`
/// equally likely with `π = 2/3 ± eps`.
pub fn virtual_order_boundary(eps: &Rational) -> (BidderModel, ReducedForm) {
    let model = BidderModel::independent(
        vec![
            Bidder::from_pairs(&[("A", ratio(1, 1))]),
            Bidder::from_pairs(&[("B", ratio(1, 2)), ("C", ratio(1, 2))]),
        ],
        1,
    );
    let two_thirds = ratio(2, 3);
    let rf = ReducedForm::single(vec![
        vec![ratio(1, 3)],
        vec![&two_thirds + eps, &two_thirds - eps],
    ]);
    (model, rf)
}

/// Two i.i.d. bidders with equiprobable types `A`, `B` and the given
/// symmetric interim probabilities.
pub fn iid_two_types(pi_a: Rational, pi_b: Rational) -> (BidderModel, SymmetricReducedForm) {
    let model = BidderModel::iid(
        2,
        Bidder::from_pairs(&[("A", ratio(1, 2)), ("B", ratio(1, 2))]),
        1,
    );
    (model, SymmetricReducedForm::new(vec![vec![pi_a, pi_b]]))
}

/// `iid_two_types(5/8, 3/8)`: feasible, and the midpoint of two vertices.
pub fn iid_five_eighths() -> (BidderModel, SymmetricReducedForm) {
    iid_two_types(ratio(5, 8), ratio(3, 8))
}

/// Three unit-demand i.i.d. bidders with `Pr[A] = Pr[B] = 1/2`. Type `A` gets
/// each of the first two items with probability 1/2; every other entry is 0.
/// `items` is 2 or more; extra items carry `π ≡ 0`.
pub fn false_extension(items: usize) -> (BidderModel, ReducedForm) {
    let model = BidderModel::iid(
        3,
        Bidder::from_pairs(&[("A", ratio(1, 2)), ("B", ratio(1, 2))]),
        items,
    )
    .with_demands(vec![1, 1, 1]);
    let model = {
        let joint = model.product_joint();
        model.with_joint(joint)
    };
    let rf = ReducedForm::new(
        (0..items)
            .map(|j| {
                let a = if j < 2 { ratio(1, 2) } else { zero() };
                vec![vec![a, zero()]; 3]
            })
            .collect(),
    );
    (model, rf)
}

pub fn false_extension_one() -> (BidderModel, ReducedForm) {
    false_extension(2)
}

pub fn false_extension_two() -> (BidderModel, ReducedForm) {
    false_extension(3)
}

/// One bidder, one item, the given values equally likely.
pub fn one_bidder_values(values: &[Rational]) -> ValuationModel {
    let p = ratio(1, values.len() as i64);
    ValuationModel::new(
        vec![values
            .iter()
            .enumerate()
            .map(|(k, v)| ValuedType {
                label: format!("v{k}"),
                prob: p.clone(),
                values: vec![v.clone()],
            })
            .collect()],
        1,
    )
}

/// One bidder who values each of two items at 1, with certainty.
pub fn point_mass_two_items() -> ValuationModel {
    ValuationModel::new(
        vec![vec![ValuedType {
            label: "v".into(),
            prob: ratio(1, 1),
            values: vec![ratio(1, 1), ratio(1, 1)],
        }]],
        2,
    )
}

/// Two independent bidders, each valuing one item at 1 or 2 with equal
/// probability.
pub fn two_iid_bidders_one_two() -> ValuationModel {
    let one = one_bidder_values(&[ratio(1, 1), ratio(2, 1)]);
    ValuationModel::new(vec![one.bidders[0].clone(), one.bidders[0].clone()], 1)
}
