#![allow(dead_code)]

use border_core::model::{
    Bidder, BidderModel, HierarchicalMechanism, JointDistribution, MechanismDistribution, Rank,
    ReducedForm, WeightedMechanism,
};
use border_core::Rational;
use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;

pub fn r(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Positive weights with small denominators, summing to one.
pub fn random_simplex<R: Rng>(rng: &mut R, len: usize) -> Vec<Rational> {
    let raw: Vec<i64> = (0..len).map(|_| rng.gen_range(1..=6)).collect();
    let total: i64 = raw.iter().sum();
    raw.into_iter().map(|w| r(w, total)).collect()
}

pub fn random_bidder<R: Rng>(rng: &mut R, max_types: usize) -> Bidder {
    let k = rng.gen_range(1..=max_types);
    let labels = (0..k).map(|j| format!("t{j}")).collect();
    Bidder::new(labels, random_simplex(rng, k))
}

pub fn random_independent<R: Rng>(
    rng: &mut R,
    max_bidders: usize,
    max_types: usize,
) -> BidderModel {
    let m = rng.gen_range(1..=max_bidders);
    BidderModel::independent((0..m).map(|_| random_bidder(rng, max_types)).collect(), 1)
}

pub fn random_iid<R: Rng>(rng: &mut R, max_bidders: usize, max_types: usize) -> BidderModel {
    let m = rng.gen_range(1..=max_bidders);
    BidderModel::iid(m, random_bidder(rng, max_types), 1)
}

fn random_rank<R: Rng>(rng: &mut R, levels: u32) -> Rank {
    if rng.gen_bool(0.2) {
        Rank::Lose
    } else {
        Rank::Level(rng.gen_range(1..=levels))
    }
}

pub fn random_mechanism<R: Rng>(rng: &mut R, model: &BidderModel) -> HierarchicalMechanism {
    if model.iid {
        let ranks = (0..model.num_types(0))
            .map(|_| random_rank(rng, 4))
            .collect();
        HierarchicalMechanism::symmetric(model.num_bidders(), ranks)
    } else {
        HierarchicalMechanism::new(
            (0..model.num_bidders())
                .map(|i| {
                    (0..model.num_types(i))
                        .map(|_| random_rank(rng, 5))
                        .collect()
                })
                .collect(),
        )
    }
}

pub fn random_distribution<R: Rng>(rng: &mut R, model: &BidderModel) -> MechanismDistribution {
    let n = rng.gen_range(1..=4);
    MechanismDistribution {
        item: 0,
        entries: random_simplex(rng, n)
            .into_iter()
            .map(|weight| WeightedMechanism {
                weight,
                mechanism: random_mechanism(rng, model),
            })
            .collect(),
    }
}

/// Interim table with entries on the grid `k/8`, biased low enough that
/// both verdicts are common.
pub fn random_grid_table<R: Rng>(rng: &mut R, model: &BidderModel) -> Vec<Vec<Rational>> {
    let m = model.num_bidders() as i64;
    let top = [8 / m, 8 * 2 / (m + 1), 8][rng.gen_range(0..3)];
    (0..model.num_bidders())
        .map(|i| {
            (0..model.num_types(i))
                .map(|_| r(rng.gen_range(0..=top), 8))
                .collect()
        })
        .collect()
}

/// Independent model whose probabilities lie on the grid `k/6`.
pub fn random_grid_model<R: Rng>(
    rng: &mut R,
    max_bidders: usize,
    max_types: usize,
    items: usize,
) -> BidderModel {
    let m = rng.gen_range(1..=max_bidders);
    let bidders = (0..m)
        .map(|_| {
            let k = rng.gen_range(1..=max_types);
            let mut cuts: Vec<i64> = (0..k - 1).map(|_| rng.gen_range(1..6)).collect();
            cuts.sort_unstable();
            let mut last = 0;
            let mut probs = Vec::with_capacity(k);
            for c in cuts.into_iter().chain(std::iter::once(6)) {
                probs.push(r(c - last, 6));
                last = c;
            }
            Bidder::new((0..k).map(|j| format!("t{j}")).collect(), probs)
        })
        .collect();
    BidderModel::independent(bidders, items)
}

/// Additive valuation model with values on the grid `{0, 1/2, …, 4}` and
/// positive type probabilities.
pub fn random_valuation<R: Rng>(
    rng: &mut R,
    max_bidders: usize,
    max_types: usize,
    items: usize,
) -> border_core::optimal::ValuationModel {
    use border_core::optimal::{ValuationModel, ValuedType};
    let m = rng.gen_range(1..=max_bidders);
    let bidders = (0..m)
        .map(|_| {
            let k = rng.gen_range(1..=max_types);
            random_simplex(rng, k)
                .into_iter()
                .enumerate()
                .map(|(t, prob)| ValuedType {
                    label: format!("t{t}"),
                    prob,
                    values: (0..items).map(|_| r(rng.gen_range(0..=8), 2)).collect(),
                })
                .collect()
        })
        .collect();
    ValuationModel::new(bidders, items)
}

/// Demand-constrained instance with a correlated joint over all profiles.
pub fn random_demand_instance<R: Rng>(rng: &mut R) -> (BidderModel, ReducedForm) {
    let m = rng.gen_range(1..=3);
    let items = rng.gen_range(1..=2);
    let sizes: Vec<usize> = (0..m).map(|_| rng.gen_range(1..=2)).collect();
    let mut profiles = vec![Vec::new()];
    for &k in &sizes {
        profiles = profiles
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                (0..k).map(move |t| {
                    let mut q = p.clone();
                    q.push(t);
                    q
                })
            })
            .collect();
    }
    let weights = random_simplex(rng, profiles.len());
    let mut marginals: Vec<Vec<Rational>> =
        sizes.iter().map(|&k| vec![Rational::zero(); k]).collect();
    for (p, w) in profiles.iter().zip(&weights) {
        for (i, &t) in p.iter().enumerate() {
            marginals[i][t] += w;
        }
    }
    let bidders = marginals
        .into_iter()
        .map(|probs| Bidder::new((0..probs.len()).map(|t| format!("t{t}")).collect(), probs))
        .collect();
    let demands = (0..m).map(|_| rng.gen_range(1..=2)).collect();
    let model = BidderModel::independent(bidders, items)
        .with_demands(demands)
        .with_joint(JointDistribution {
            profiles: profiles.into_iter().zip(weights).collect(),
        });
    let rf = ReducedForm::new(
        (0..items)
            .map(|_| {
                sizes
                    .iter()
                    .map(|&k| (0..k).map(|_| r(rng.gen_range(0..=4), 4)).collect())
                    .collect()
            })
            .collect(),
    );
    (model, rf)
}
