mod common;

use std::collections::BTreeSet;

use border_core::hierarchy::interim_of;
use border_core::model::{Bidder, BidderModel};
use border_core::oracle::enumerate_mechanisms;
use border_core::Rational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `a·x ≤ b` in two dimensions.
type HalfPlane = ([Rational; 2], Rational);

/// The inequality system for two i.i.d. types `A ≻ B`, written from scratch.
fn system(m: u32, pa: &Rational, pb: &Rational) -> Vec<HalfPlane> {
    let one = Rational::one();
    let zero = Rational::zero();
    let mm = Rational::from_integer(m.into());
    let pow = |x: Rational| (0..m).fold(Rational::one(), |acc, _| acc * &x);
    vec![
        ([-one.clone(), one.clone()], zero.clone()),
        ([zero.clone(), -one.clone()], zero.clone()),
        ([&mm * pa, zero.clone()], &one - pow(&one - pa)),
        ([&mm * pa, &mm * pb], &one - pow(&one - pa - pb)),
    ]
}

fn vertices(hs: &[HalfPlane]) -> BTreeSet<Vec<Rational>> {
    let mut out = BTreeSet::new();
    for a in 0..hs.len() {
        for b in a + 1..hs.len() {
            let ([a0, a1], ra) = &hs[a];
            let ([b0, b1], rb) = &hs[b];
            let det = a0 * b1 - a1 * b0;
            if det.is_zero() {
                continue;
            }
            let x = (ra * b1 - a1 * rb) / &det;
            let y = (a0 * rb - ra * b0) / &det;
            if hs.iter().all(|([c0, c1], r)| c0 * &x + c1 * &y <= *r) {
                out.insert(vec![x, y]);
            }
        }
    }
    out
}

#[test]
fn vertices_are_the_well_ordered_mechanisms() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        let m = rng.gen_range(1..=4);
        let probs = common::random_simplex(&mut rng, 2);
        let model = BidderModel::iid(
            m,
            Bidder::new(vec!["A".into(), "B".into()], probs.clone()),
            1,
        );
        let order = [common::r(2, 1), common::r(1, 1)];
        let mechanisms = enumerate_mechanisms(&model, |h| h.is_well_ordered(&order)).unwrap();
        assert_eq!(mechanisms.len(), 4);
        let from_mechanisms: BTreeSet<Vec<Rational>> = mechanisms
            .iter()
            .map(|h| interim_of(&model, h).swap_remove(0))
            .collect();
        let from_geometry = vertices(&system(m as u32, &probs[0], &probs[1]));
        assert_eq!(from_mechanisms, from_geometry, "m = {m}, probs = {probs:?}");
    }
}
