//! Single-item Border checks with constricting-set certificates.
//!
//! The i.i.d. check scans prefixes of types sorted by decreasing `π`; the
//! independent check scans prefixes of `(bidder, type)` pairs sorted by
//! decreasing virtual `π̂`. Only tie-complete prefixes are tested, and types
//! with zero interim probability never enter a certificate.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::{
    validate, validate_model, BidderModel, Hyperplane, InterimTable, ReducedForm,
    SymmetricReducedForm,
};
use crate::par::Execution;
use crate::rational::{is_probability, pow, Rational};

/// Which threshold sets enumerate the prefixes: `{π̂ > x}` or `{π̂ ≥ x}`.
/// Both families coincide on finite type spaces; the choice is kept so the
/// two readings can be tested side by side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdRule {
    #[default]
    Strict,
    NonStrict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstrictingSet {
    /// Shared type indices, taken for every bidder (i.i.d. check).
    Types(Vec<usize>),
    /// `(bidder, type)` pairs (independent check).
    Pairs(Vec<(usize, usize)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub set: ConstrictingSet,
    pub hyperplane: Hyperplane,
    pub lhs: Rational,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityVerdict {
    pub item: usize,
    pub certificate: Option<Certificate>,
}

impl FeasibilityVerdict {
    pub fn feasible(item: usize) -> Self {
        FeasibilityVerdict {
            item,
            certificate: None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.certificate.is_none()
    }
}

/// `π̂_i(A) = Pr[π_i(t_i) ≤ π_i(A)] · π_i(A)`, indexed `[bidder][type]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VirtualReducedForm {
    pub values: InterimTable,
}

/// A violated prefix found by one of the scans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation<S> {
    pub set: S,
    pub lhs: Rational,
    pub rhs: Rational,
}

pub(crate) fn virtual_row(probs: &[Rational], pi: &[Rational]) -> Vec<Rational> {
    let mut order: Vec<usize> = (0..pi.len()).collect();
    order.sort_by(|&a, &b| pi[a].cmp(&pi[b]));
    let mut out = vec![Rational::zero(); pi.len()];
    let mut cum = Rational::zero();
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end < order.len() && pi[order[end]] == pi[order[start]] {
            cum += &probs[order[end]];
            end += 1;
        }
        for &t in &order[start..end] {
            out[t] = &cum * &pi[t];
        }
        start = end;
    }
    out
}

pub(crate) fn virtual_table(model: &BidderModel, table: &InterimTable) -> InterimTable {
    model
        .bidders
        .iter()
        .zip(table)
        .map(|(b, row)| virtual_row(&b.probs, row))
        .collect()
}

fn check_item(model: &BidderModel, rf: &ReducedForm, item: usize) -> Result<()> {
    validate(model, rf).map_err(Error::Invalid)?;
    if item >= model.items {
        return Err(Error::ItemOutOfRange(item));
    }
    if !model.is_product() {
        return Err(Error::CorrelatedModel);
    }
    Ok(())
}

pub fn virtual_pi(
    model: &BidderModel,
    rf: &ReducedForm,
    item: usize,
) -> Result<VirtualReducedForm> {
    check_item(model, rf, item)?;
    Ok(VirtualReducedForm {
        values: virtual_table(model, rf.item(item)),
    })
}

/// Fixed-point scale for the interval filter: `1.0` is `2^62`, so products of
/// two values fit in `u128`.
const FIX_BITS: u32 = 62;
const FIX_ONE: u128 = 1 << FIX_BITS;

fn fix_floor(x: &Rational) -> u128 {
    let scaled: BigInt = (x.numer() << FIX_BITS) / x.denom();
    scaled.to_u128().expect("value in [0, 1]")
}

fn fix_ceil(x: &Rational) -> u128 {
    let num: BigInt = x.numer() << FIX_BITS;
    let (q, r) = (&num / x.denom(), &num % x.denom());
    let q = q.to_u128().expect("value in [0, 1]");
    if r.is_zero() {
        q
    } else {
        q + 1
    }
}

fn fix_pow(base: u128, mut exp: u32, round_up: bool) -> u128 {
    let mul = |a: u128, b: u128| {
        let p = a * b;
        if round_up {
            (p + FIX_ONE - 1) >> FIX_BITS
        } else {
            p >> FIX_BITS
        }
    };
    let mut acc = FIX_ONE;
    let mut b = base;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul(acc, b);
        }
        b = mul(b, b);
        exp >>= 1;
    }
    acc
}

/// Decides `lhs ≤ 1 − survivor^m` for `lhs ≥ 0`, `survivor ∈ [0, 1]`, with an
/// exact fallback when the fixed-point interval is inconclusive.
fn iid_prefix_holds(lhs: &Rational, survivor: &Rational, m: u32) -> bool {
    if lhs > &Rational::one() {
        return false;
    }
    let lhs_lo = fix_floor(lhs);
    let lhs_hi = fix_ceil(lhs);
    let pow_lo = fix_pow(fix_floor(survivor), m, false);
    let pow_hi = fix_pow(fix_ceil(survivor), m, true).min(FIX_ONE);
    if lhs_hi + pow_hi <= FIX_ONE {
        return true;
    }
    if lhs_lo + pow_lo > FIX_ONE {
        return false;
    }
    *lhs <= Rational::one() - pow(survivor, m)
}

/// First tie-complete prefix (by decreasing `π`) with
/// `m·Σ π·Pr > 1 − (1 − Pr[S])^m`.
pub fn iid_violation(m: u32, probs: &[Rational], pi: &[Rational]) -> Option<Violation<Vec<usize>>> {
    let mut order: Vec<usize> = (0..pi.len()).collect();
    order.sort_by(|&a, &b| pi[b].cmp(&pi[a]).then(a.cmp(&b)));
    let scale = Rational::from_integer(BigInt::from(m));
    let mut weighted = Rational::zero();
    let mut mass = Rational::zero();
    let mut start = 0;
    while start < order.len() && pi[order[start]].is_positive() {
        let mut end = start;
        while end < order.len() && pi[order[end]] == pi[order[start]] {
            let t = order[end];
            weighted += &pi[t] * &probs[t];
            mass += &probs[t];
            end += 1;
        }
        let lhs = &scale * &weighted;
        let survivor = Rational::one() - &mass;
        if !iid_prefix_holds(&lhs, &survivor, m) {
            let mut set = order[..end].to_vec();
            set.sort_unstable();
            return Some(Violation {
                set,
                lhs,
                rhs: Rational::one() - pow(&survivor, m),
            });
        }
        start = end;
    }
    None
}

/// Product of per-bidder survivor probabilities, updated one factor at a time
/// without division.
struct SurvivorTree {
    size: usize,
    nodes: Vec<Rational>,
}

impl SurvivorTree {
    fn new(len: usize) -> Self {
        let size = len.next_power_of_two().max(1);
        SurvivorTree {
            size,
            nodes: vec![Rational::one(); 2 * size],
        }
    }

    fn set(&mut self, idx: usize, value: Rational) {
        let mut k = idx + self.size;
        self.nodes[k] = value;
        while k > 1 {
            k /= 2;
            self.nodes[k] = &self.nodes[2 * k] * &self.nodes[2 * k + 1];
        }
    }

    fn product(&self) -> &Rational {
        &self.nodes[1]
    }
}

/// First threshold set `{key > x}` (or `{key ≥ x}`) over all `(bidder, type)`
/// pairs that violates `Σ π·Pr ≤ 1 − ∏_i (1 − Pr[t_i ∈ S_i])`.
pub fn threshold_violation(
    probs: &[Vec<Rational>],
    pi: &InterimTable,
    keys: &InterimTable,
    rule: ThresholdRule,
) -> Option<Violation<Vec<(usize, usize)>>> {
    let mut cells: Vec<(usize, usize)> = keys
        .iter()
        .enumerate()
        .flat_map(|(i, row)| (0..row.len()).map(move |t| (i, t)))
        .filter(|&(i, t)| keys[i][t].is_positive())
        .collect();
    cells.sort_by(|&(i, a), &(j, b)| keys[j][b].cmp(&keys[i][a]).then((i, a).cmp(&(j, b))));

    let mut thresholds: Vec<Rational> = cells.iter().map(|&(i, a)| keys[i][a].clone()).collect();
    thresholds.dedup();
    let key = |c: &(usize, usize)| &keys[c.0][c.1];
    let mut boundaries: Vec<usize> = match rule {
        ThresholdRule::Strict => thresholds
            .iter()
            .chain(std::iter::once(&Rational::zero()))
            .map(|x| cells.partition_point(|c| key(c) > x))
            .collect(),
        ThresholdRule::NonStrict => thresholds
            .iter()
            .map(|x| cells.partition_point(|c| key(c) >= x))
            .collect(),
    };
    boundaries.retain(|&b| b > 0);

    let mut tree = SurvivorTree::new(probs.len());
    let mut survivors: Vec<Rational> = vec![Rational::one(); probs.len()];
    let mut lhs = Rational::zero();
    let mut added = 0;
    for &end in &boundaries {
        let mut touched = Vec::new();
        for &(i, a) in &cells[added..end] {
            lhs += &pi[i][a] * &probs[i][a];
            survivors[i] -= &probs[i][a];
            touched.push(i);
        }
        added = end;
        touched.sort_unstable();
        touched.dedup();
        for i in touched {
            tree.set(i, survivors[i].clone());
        }
        let rhs = Rational::one() - tree.product();
        if lhs > rhs {
            let mut set = cells[..end].to_vec();
            set.retain(|&(i, a)| pi[i][a].is_positive());
            set.sort_unstable();
            return Some(Violation { set, lhs, rhs });
        }
    }
    None
}

/// Border's condition for independent bidders on one item's interim table,
/// scanning virtual-`π` prefixes.
pub fn independent_violation(
    probs: &[Vec<Rational>],
    pi: &InterimTable,
    rule: ThresholdRule,
) -> Option<Violation<Vec<(usize, usize)>>> {
    let keys: InterimTable = probs
        .iter()
        .zip(pi)
        .map(|(p, row)| virtual_row(p, row))
        .collect();
    threshold_violation(probs, pi, &keys, rule)
}

fn probs_of(model: &BidderModel) -> Vec<Vec<Rational>> {
    model.bidders.iter().map(|b| b.probs.clone()).collect()
}

fn pairs_certificate(
    model: &BidderModel,
    item: usize,
    v: Violation<Vec<(usize, usize)>>,
) -> Certificate {
    let coeffs = v
        .set
        .iter()
        .map(|&(i, a)| (model.coord(item, i, a), model.prob(i, a).clone()))
        .collect();
    let mut survivors: Vec<Rational> = model.bidders.iter().map(|_| Rational::one()).collect();
    for &(i, a) in &v.set {
        survivors[i] -= model.prob(i, a);
    }
    let product = survivors.iter().fold(Rational::one(), |acc, s| acc * s);
    let hyperplane = Hyperplane::new(coeffs, Rational::one() - product);
    Certificate {
        set: ConstrictingSet::Pairs(v.set),
        hyperplane,
        lhs: v.lhs,
        rhs: v.rhs,
    }
}

/// Independent-bidder check for one item.
pub fn check_feasible(
    model: &BidderModel,
    rf: &ReducedForm,
    item: usize,
) -> Result<FeasibilityVerdict> {
    check_feasible_with(model, rf, item, ThresholdRule::default())
}

pub fn check_feasible_with(
    model: &BidderModel,
    rf: &ReducedForm,
    item: usize,
    rule: ThresholdRule,
) -> Result<FeasibilityVerdict> {
    check_item(model, rf, item)?;
    let certificate = independent_violation(&probs_of(model), rf.item(item), rule)
        .map(|v| pairs_certificate(model, item, v));
    Ok(FeasibilityVerdict { item, certificate })
}

/// The same scan keyed on plain `π` instead of `π̂`. This family is not
/// sufficient for independent bidders; it is exposed for comparison.
pub fn check_plain_thresholds(
    model: &BidderModel,
    rf: &ReducedForm,
    item: usize,
) -> Result<FeasibilityVerdict> {
    check_item(model, rf, item)?;
    let table = rf.item(item);
    let certificate = threshold_violation(&probs_of(model), table, table, ThresholdRule::Strict)
        .map(|v| pairs_certificate(model, item, v));
    Ok(FeasibilityVerdict { item, certificate })
}

/// i.i.d. check on a bidder-symmetric form. Certificate coordinates are
/// `item * |T| + type`.
pub fn check_feasible_iid(
    model: &BidderModel,
    srf: &SymmetricReducedForm,
    item: usize,
) -> Result<FeasibilityVerdict> {
    if !model.iid {
        return Err(Error::NotIid);
    }
    validate_model(model).map_err(Error::Invalid)?;
    if item >= model.items {
        return Err(Error::ItemOutOfRange(item));
    }
    let bidder = &model.bidders[0];
    let mut issues = Vec::new();
    if srf.items.len() != model.items {
        issues.push(crate::model::ValidationIssue::IndexMismatch(format!(
            "reduced form has {} items, model has {}",
            srf.items.len(),
            model.items
        )));
    }
    for (j, row) in srf.items.iter().enumerate() {
        if row.len() != bidder.len() {
            issues.push(crate::model::ValidationIssue::IndexMismatch(format!(
                "item {j} lists {} types, model has {}",
                row.len(),
                bidder.len()
            )));
        }
        for (t, v) in row.iter().enumerate() {
            if !is_probability(v) {
                issues.push(crate::model::ValidationIssue::OutOfRangeEntry {
                    item: j,
                    bidder: 0,
                    ty: t,
                    value: v.clone(),
                });
            }
        }
    }
    if !issues.is_empty() {
        return Err(Error::Invalid(issues));
    }
    let m = u32::try_from(model.num_bidders()).expect("bidder count fits in u32");
    let c = bidder.len();
    let certificate = iid_violation(m, &bidder.probs, &srf.items[item]).map(|v| {
        let scale = Rational::from_integer(BigInt::from(m));
        let coeffs = v
            .set
            .iter()
            .map(|&t| (item * c + t, &scale * &bidder.probs[t]))
            .collect();
        Certificate {
            hyperplane: Hyperplane::new(coeffs, v.rhs.clone()),
            set: ConstrictingSet::Types(v.set),
            lhs: v.lhs,
            rhs: v.rhs,
        }
    });
    Ok(FeasibilityVerdict { item, certificate })
}

/// Per-item checks for additive bidders without demand constraints.
pub fn check_feasible_multi(
    model: &BidderModel,
    rf: &ReducedForm,
) -> Result<Vec<FeasibilityVerdict>> {
    check_feasible_multi_with(model, rf, Execution::default())
}

pub fn check_feasible_multi_with(
    model: &BidderModel,
    rf: &ReducedForm,
    exec: Execution,
) -> Result<Vec<FeasibilityVerdict>> {
    if model.demands.is_some() {
        return Err(Error::DemandConstraintsPresent);
    }
    validate(model, rf).map_err(Error::Invalid)?;
    if !model.is_product() {
        return Err(Error::CorrelatedModel);
    }
    let probs = probs_of(model);
    Ok(exec.map_range(model.items, |j| FeasibilityVerdict {
        item: j,
        certificate: independent_violation(&probs, rf.item(j), ThresholdRule::default())
            .map(|v| pairs_certificate(model, j, v)),
    }))
}
