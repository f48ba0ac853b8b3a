use std::time::{Duration, Instant};

use border_core::feasibility::{check_feasible, check_feasible_iid};
use border_core::model::{Bidder, BidderModel, ReducedForm, SymmetricReducedForm};
use border_core::rational::ratio;

/// `c` equiprobable types with distinct `π` just below `1/m`: feasible, so
/// every prefix is scanned.
fn iid_instance(c: usize, m: usize) -> (BidderModel, SymmetricReducedForm) {
    let labels = (0..c).map(|t| format!("t{t}")).collect();
    let probs = vec![ratio(1, c as i64); c];
    let pi = (0..c)
        .map(|t| ratio(2 * c as i64 - t as i64, 2 * c as i64 * m as i64))
        .collect();
    (
        BidderModel::iid(m, Bidder::new(labels, probs), 1),
        SymmetricReducedForm::new(vec![pi]),
    )
}

fn independent_instance(m: usize, per: usize) -> (BidderModel, ReducedForm) {
    let bidders = (0..m)
        .map(|i| {
            Bidder::new(
                (0..per).map(|t| format!("{i}-{t}")).collect(),
                vec![ratio(1, per as i64); per],
            )
        })
        .collect();
    let table = (0..m)
        .map(|i| {
            (0..per)
                .map(|t| ratio((4 * per * m - t * m - i) as i64, (4 * per * m * m) as i64))
                .collect()
        })
        .collect();
    (
        BidderModel::independent(bidders, 1),
        ReducedForm::single(table),
    )
}

#[test]
fn iid_check_at_scale() {
    let (model, srf) = iid_instance(100_000, 1_000);
    let start = Instant::now();
    let verdict = check_feasible_iid(&model, &srf, 0).unwrap();
    let elapsed = start.elapsed();
    assert!(verdict.is_feasible());
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
}

#[test]
fn independent_check_at_scale() {
    let (model, rf) = independent_instance(50, 200);
    let start = Instant::now();
    let verdict = check_feasible(&model, &rf, 0).unwrap();
    let elapsed = start.elapsed();
    assert!(verdict.is_feasible());
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
}
