//! Hierarchical mechanisms as executable objects: exact reduced forms,
//! the mechanism polytopes and their oracles, decomposition of a feasible
//! reduced form into a lottery over hierarchical mechanisms, and auction
//! execution.

mod auction;
mod iid;
mod independent;

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::caratheodory::{decompose, Corner};
use crate::error::{Error, Result};
use crate::feasibility::{check_feasible, check_feasible_iid};
use crate::model::{
    validate, Bidder, BidderModel, HierarchicalMechanism, InterimTable, MechanismDistribution,
    Rank, ReducedForm, WeightedMechanism,
};
use crate::par::Execution;
use crate::rational::{pow, Rational};

pub use auction::{
    run_auction, run_auction_with, simulate, trace, ProfileSampler, Round, Simulation,
};
pub use iid::{IidFace, IidPolytope};
pub use independent::{IndependentFace, IndependentPolytope};

/// A single-item instance in which each bidder's types with equal `π` have
/// been fused, ordered by decreasing `π`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergedInstance {
    pub model: BidderModel,
    pub pi: InterimTable,
    /// `groups[i][k]` lists the original types fused into merged type `k`.
    pub groups: Vec<Vec<Vec<usize>>>,
}

impl MergedInstance {
    /// Original-type mechanism giving every member of a super-type its rank.
    pub fn expand(
        &self,
        merged: &HierarchicalMechanism,
        original: &BidderModel,
    ) -> HierarchicalMechanism {
        let ranks = self
            .groups
            .iter()
            .zip(&merged.ranks)
            .zip(&original.bidders)
            .map(|((groups, row), bidder)| {
                let mut out = vec![Rank::Lose; bidder.len()];
                for (members, rank) in groups.iter().zip(row) {
                    for &t in members {
                        out[t] = *rank;
                    }
                }
                out
            })
            .collect();
        HierarchicalMechanism::new(ranks)
    }

    pub fn point(&self) -> Vec<Rational> {
        self.pi.iter().flatten().cloned().collect()
    }
}

fn merge_bidder(bidder: &Bidder, pi: &[Rational]) -> (Bidder, Vec<Rational>, Vec<Vec<usize>>) {
    let mut order: Vec<usize> = (0..pi.len()).collect();
    order.sort_by(|&a, &b| pi[b].cmp(&pi[a]).then(a.cmp(&b)));
    let mut labels = Vec::new();
    let mut probs = Vec::new();
    let mut values = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for t in order {
        if values.last() == Some(&pi[t]) {
            let k = groups.len() - 1;
            groups[k].push(t);
            probs[k] += &bidder.probs[t];
        } else {
            groups.push(vec![t]);
            probs.push(bidder.probs[t].clone());
            values.push(pi[t].clone());
        }
    }
    for g in &groups {
        let names: Vec<&str> = g.iter().map(|&t| bidder.labels[t].as_str()).collect();
        labels.push(if names.len() == 1 {
            names[0].to_string()
        } else {
            format!("<{}>", names.join(","))
        });
    }
    (Bidder::new(labels, probs), values, groups)
}

/// Fuses equal-`π` types of each bidder for one item.
pub fn type_merge(model: &BidderModel, rf: &ReducedForm, item: usize) -> Result<MergedInstance> {
    validate(model, rf).map_err(Error::Invalid)?;
    if item >= model.items {
        return Err(Error::ItemOutOfRange(item));
    }
    let table = rf.item(item);
    let symmetric = model.iid && table.iter().all(|row| row == &table[0]);
    let mut bidders: Vec<Arc<Bidder>> = Vec::with_capacity(model.num_bidders());
    let mut pi: Vec<Vec<Rational>> = Vec::with_capacity(model.num_bidders());
    let mut groups: Vec<Vec<Vec<usize>>> = Vec::with_capacity(model.num_bidders());
    for (i, bidder) in model.bidders.iter().enumerate() {
        if symmetric && i > 0 {
            bidders.push(Arc::clone(&bidders[0]));
            pi.push(pi[0].clone());
            groups.push(groups[0].clone());
            continue;
        }
        let (b, values, g) = merge_bidder(bidder, &table[i]);
        bidders.push(Arc::new(b));
        pi.push(values);
        groups.push(g);
    }
    let merged = BidderModel {
        bidders,
        items: 1,
        iid: symmetric,
        demands: None,
        joint: None,
    };
    Ok(MergedInstance {
        model: merged,
        pi,
        groups,
    })
}

/// Per-bidder cumulative rank distribution: `Pr[rank ≤ r]` by level.
struct RankCdf {
    levels: Vec<u32>,
    at: Vec<Rational>,
    upto: Vec<Rational>,
}

impl RankCdf {
    fn new(bidder: &Bidder, ranks: &[Rank]) -> Self {
        let mut mass: BTreeMap<u32, Rational> = BTreeMap::new();
        for (p, r) in bidder.probs.iter().zip(ranks) {
            if let Rank::Level(l) = r {
                *mass.entry(*l).or_insert_with(Rational::zero) += p;
            }
        }
        let mut levels = Vec::with_capacity(mass.len());
        let mut at = Vec::with_capacity(mass.len());
        let mut upto = Vec::with_capacity(mass.len());
        let mut acc = Rational::zero();
        for (l, p) in mass {
            acc += &p;
            levels.push(l);
            at.push(p);
            upto.push(acc.clone());
        }
        RankCdf { levels, at, upto }
    }

    /// `(Pr[rank = r], Pr[rank > r])`.
    fn split(&self, r: u32) -> (Rational, Rational) {
        match self.levels.binary_search(&r) {
            Ok(k) => (self.at[k].clone(), Rational::one() - &self.upto[k]),
            Err(0) => (Rational::zero(), Rational::one()),
            Err(k) => (Rational::zero(), Rational::one() - &self.upto[k - 1]),
        }
    }
}

/// Chance of winning at level `r` against rivals given as
/// `(Pr[rank = r], Pr[rank > r])`, with uniform tie-breaking.
fn win_probability(rivals: impl Iterator<Item = (Rational, Rational)>) -> Rational {
    // coeffs[k]: probability that exactly k rivals tie and the rest rank worse.
    let mut coeffs = vec![Rational::one()];
    let mut constant = Rational::one();
    for (tie, worse) in rivals {
        if tie.is_zero() {
            constant *= worse;
            if constant.is_zero() {
                return Rational::zero();
            }
            continue;
        }
        let mut next = vec![Rational::zero(); coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k] += c * &worse;
            next[k + 1] += c * &tie;
        }
        coeffs = next;
    }
    let shared: Rational = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c / Rational::from_integer(BigInt::from(k + 1)))
        .sum();
    constant * shared
}

/// Symmetric closed form for `m` i.i.d. bidders: with `q = Pr[rank = r]` and
/// `s = Pr[rank > r]`, a type at level `r` wins with `((q+s)^m − s^m)/(m q)`.
fn iid_win_probability(m: u32, q: &Rational, s: &Rational) -> Rational {
    if q.is_zero() {
        return pow(s, m - 1);
    }
    let top = pow(&(q + s), m) - pow(s, m);
    top / (Rational::from_integer(BigInt::from(m)) * q)
}

fn is_shared_iid(model: &BidderModel, h: &HierarchicalMechanism) -> bool {
    model.iid
        && model
            .bidders
            .iter()
            .all(|b| Arc::ptr_eq(b, &model.bidders[0]) || **b == *model.bidders[0])
        && h.ranks.iter().all(|row| row == &h.ranks[0])
}

/// Interim allocation probabilities of `h` for independent bidders.
pub fn interim_of(model: &BidderModel, h: &HierarchicalMechanism) -> InterimTable {
    let m = model.num_bidders();
    if m > 0 && is_shared_iid(model, h) {
        let cdf = RankCdf::new(&model.bidders[0], &h.ranks[0]);
        let mut cache: BTreeMap<u32, Rational> = BTreeMap::new();
        let row: Vec<Rational> = h.ranks[0]
            .iter()
            .map(|r| match r {
                Rank::Lose => Rational::zero(),
                Rank::Level(l) => cache
                    .entry(*l)
                    .or_insert_with(|| {
                        let (q, s) = cdf.split(*l);
                        iid_win_probability(m as u32, &q, &s)
                    })
                    .clone(),
            })
            .collect();
        return vec![row; m];
    }
    let cdfs: Vec<RankCdf> = model
        .bidders
        .iter()
        .zip(&h.ranks)
        .map(|(b, r)| RankCdf::new(b, r))
        .collect();
    h.ranks
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut cache: BTreeMap<u32, Rational> = BTreeMap::new();
            row.iter()
                .map(|r| match r {
                    Rank::Lose => Rational::zero(),
                    Rank::Level(l) => cache
                        .entry(*l)
                        .or_insert_with(|| {
                            win_probability(
                                cdfs.iter()
                                    .enumerate()
                                    .filter(|&(k, _)| k != i)
                                    .map(|(_, c)| c.split(*l)),
                            )
                        })
                        .clone(),
                })
                .collect()
        })
        .collect()
}

pub fn interim_of_distribution(model: &BidderModel, dist: &MechanismDistribution) -> InterimTable {
    let mut total: InterimTable = model
        .bidders
        .iter()
        .map(|b| vec![Rational::zero(); b.len()])
        .collect();
    for e in &dist.entries {
        let table = interim_of(model, &e.mechanism);
        for (acc, row) in total.iter_mut().zip(table) {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += &e.weight * v;
            }
        }
    }
    total
}

/// Reduced form of one distribution per item; items without a distribution
/// are all zero.
pub fn reduced_form_of(model: &BidderModel, dists: &[MechanismDistribution]) -> ReducedForm {
    let mut rf = ReducedForm::zeros(model);
    for d in dists {
        rf.items[d.item] = interim_of_distribution(model, d);
    }
    rf
}

fn feasibility_gate(model: &BidderModel, rf: &ReducedForm, item: usize) -> Result<()> {
    let verdict = match rf.to_symmetric() {
        Some(srf) if model.iid => check_feasible_iid(model, &srf, item)?,
        _ => check_feasible(model, rf, item)?,
    };
    if verdict.is_feasible() {
        Ok(())
    } else {
        Err(Error::InfeasibleReducedForm(Box::new(verdict)))
    }
}

/// Writes one item's feasible reduced form as a lottery over at most
/// `Σ_i |T_i| + 1` hierarchical mechanisms (at most `|T| + 1` well-ordered
/// ones on the i.i.d. path) and checks the recomposition exactly.
pub fn decompose_reduced_form(
    model: &BidderModel,
    rf: &ReducedForm,
    item: usize,
) -> Result<MechanismDistribution> {
    validate(model, rf).map_err(Error::Invalid)?;
    if item >= model.items {
        return Err(Error::ItemOutOfRange(item));
    }
    feasibility_gate(model, rf, item)?;
    let merged = type_merge(model, rf, item)?;
    for (i, b) in merged.model.bidders.iter().enumerate() {
        if let Some(k) = b.probs.iter().position(Zero::is_zero) {
            return Err(Error::ZeroProbabilityType {
                bidder: i,
                ty: merged.groups[i][k][0],
            });
        }
    }

    let dist = if merged.pi.iter().flatten().all(Zero::is_zero) {
        MechanismDistribution::single(item, HierarchicalMechanism::all_lose(model))
    } else {
        let entries: Vec<(Rational, HierarchicalMechanism)> = if merged.model.iid {
            let polytope = IidPolytope::new(&merged)?;
            let combo = decompose(&merged.pi[0], &polytope)?;
            combo
                .entries
                .into_iter()
                .map(|(w, c): (Rational, Corner<Vec<Rank>>)| {
                    (
                        w,
                        HierarchicalMechanism::symmetric(model.num_bidders(), c.tag),
                    )
                })
                .collect()
        } else {
            let polytope = IndependentPolytope::new(&merged)?;
            let combo = decompose(&merged.point(), &polytope)?;
            combo.entries.into_iter().map(|(w, c)| (w, c.tag)).collect()
        };
        MechanismDistribution {
            item,
            entries: entries
                .into_iter()
                .map(|(weight, h)| WeightedMechanism {
                    weight,
                    mechanism: merged.expand(&h, model).normalized(),
                })
                .collect(),
        }
    };
    if interim_of_distribution(model, &dist) != *rf.item(item) {
        return Err(Error::RecompositionMismatch);
    }
    Ok(dist)
}

/// `decompose_reduced_form` for every item.
pub fn decompose_all(
    model: &BidderModel,
    rf: &ReducedForm,
    exec: Execution,
) -> Result<Vec<MechanismDistribution>> {
    exec.map_range(model.items, |j| decompose_reduced_form(model, rf, j))
        .into_iter()
        .collect()
}

/// Per-entry keep probabilities turning `implemented` into `target` by
/// discarding the item after allocation.
pub fn thin_to_target(implemented: &ReducedForm, target: &ReducedForm) -> Result<ReducedForm> {
    if implemented.items.len() != target.items.len() {
        return Err(Error::Invalid(vec![
            crate::model::ValidationIssue::IndexMismatch(
                "implemented and target forms differ in shape".into(),
            ),
        ]));
    }
    let mut items = Vec::with_capacity(target.items.len());
    for (j, (imp, tgt)) in implemented.items.iter().zip(&target.items).enumerate() {
        if imp.len() != tgt.len() || imp.iter().zip(tgt).any(|(a, b)| a.len() != b.len()) {
            return Err(Error::Invalid(vec![
                crate::model::ValidationIssue::IndexMismatch(format!("item {j} differs in shape")),
            ]));
        }
        let mut table = Vec::with_capacity(imp.len());
        for (i, (ri, rt)) in imp.iter().zip(tgt).enumerate() {
            let mut row = Vec::with_capacity(ri.len());
            for (t, (x, y)) in ri.iter().zip(rt).enumerate() {
                if y > x {
                    return Err(Error::TargetExceedsImplemented {
                        item: j,
                        bidder: i,
                        ty: t,
                    });
                }
                row.push(if x.is_zero() { Rational::one() } else { y / x });
            }
            table.push(row);
        }
        items.push(table);
    }
    Ok(ReducedForm::new(items))
}
