//! Domain types shared by every pipeline: bidder models, reduced forms,
//! hyperplanes, and hierarchical mechanisms.
//!
//! Coordinates of a reduced form are flattened item-major, then bidder, then
//! type: `item * N + offset(bidder) + ty` with `N` the total type count.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::rational::{is_probability, sparse_dot, Canonical, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bidder {
    pub labels: Vec<String>,
    pub probs: Vec<Rational>,
}

impl Bidder {
    pub fn new(labels: Vec<String>, probs: Vec<Rational>) -> Self {
        Bidder { labels, probs }
    }

    /// Convenience for tests and fixtures: labels as `&str`.
    pub fn from_pairs(pairs: &[(&str, Rational)]) -> Self {
        Bidder {
            labels: pairs.iter().map(|(l, _)| l.to_string()).collect(),
            probs: pairs.iter().map(|(_, p)| p.clone()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Explicit distribution over type profiles. Each profile lists one type index
/// per bidder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointDistribution {
    pub profiles: Vec<(Vec<usize>, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    pub types: Vec<usize>,
    pub prob: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BidderModel {
    /// i.i.d. models share one allocation across all bidders.
    pub bidders: Vec<Arc<Bidder>>,
    pub items: usize,
    pub iid: bool,
    pub demands: Option<Vec<u32>>,
    pub joint: Option<JointDistribution>,
}

impl BidderModel {
    /// Independent bidders with the given marginals.
    pub fn independent(bidders: Vec<Bidder>, items: usize) -> Self {
        BidderModel {
            bidders: bidders.into_iter().map(Arc::new).collect(),
            items,
            iid: false,
            demands: None,
            joint: None,
        }
    }

    /// `count` i.i.d. copies of one bidder.
    pub fn iid(count: usize, bidder: Bidder, items: usize) -> Self {
        BidderModel {
            bidders: std::iter::repeat_n(Arc::new(bidder), count).collect(),
            items,
            iid: true,
            demands: None,
            joint: None,
        }
    }

    pub fn with_demands(mut self, demands: Vec<u32>) -> Self {
        self.demands = Some(demands);
        self
    }

    pub fn with_joint(mut self, joint: JointDistribution) -> Self {
        self.joint = Some(joint);
        self
    }

    pub fn num_bidders(&self) -> usize {
        self.bidders.len()
    }

    pub fn num_types(&self, bidder: usize) -> usize {
        self.bidders[bidder].len()
    }

    pub fn total_types(&self) -> usize {
        self.bidders.iter().map(|b| b.len()).sum()
    }

    pub fn prob(&self, bidder: usize, ty: usize) -> &Rational {
        &self.bidders[bidder].probs[ty]
    }

    pub fn label(&self, bidder: usize, ty: usize) -> &str {
        &self.bidders[bidder].labels[ty]
    }

    pub fn type_index(&self, bidder: usize, label: &str) -> Option<usize> {
        self.bidders
            .get(bidder)?
            .labels
            .iter()
            .position(|l| l == label)
    }

    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.bidders
            .iter()
            .map(|b| {
                let o = acc;
                acc += b.len();
                o
            })
            .collect()
    }

    /// Flat coordinate of `(item, bidder, ty)`.
    pub fn coord(&self, item: usize, bidder: usize, ty: usize) -> usize {
        let offset: usize = self.bidders[..bidder].iter().map(|b| b.len()).sum();
        item * self.total_types() + offset + ty
    }

    /// Number of profiles in the full product space.
    pub fn product_size(&self) -> u128 {
        self.bidders
            .iter()
            .fold(1u128, |acc, b| acc.saturating_mul(b.len() as u128))
    }

    /// Every product profile, with probability, in lexicographic order.
    pub fn product_profiles(&self) -> Vec<Profile> {
        let mut out = vec![Profile {
            types: Vec::with_capacity(self.num_bidders()),
            prob: Rational::one(),
        }];
        for bidder in &self.bidders {
            let mut next = Vec::with_capacity(out.len() * bidder.len());
            for p in &out {
                for (t, pr) in bidder.probs.iter().enumerate() {
                    let mut types = p.types.clone();
                    types.push(t);
                    next.push(Profile {
                        types,
                        prob: &p.prob * pr,
                    });
                }
            }
            out = next;
        }
        out
    }

    /// Profiles of the joint distribution if one is given, otherwise the
    /// product of the marginals.
    pub fn profiles(&self) -> Vec<Profile> {
        match &self.joint {
            Some(joint) => joint
                .profiles
                .iter()
                .map(|(types, prob)| Profile {
                    types: types.clone(),
                    prob: prob.clone(),
                })
                .collect(),
            None => self.product_profiles(),
        }
    }

    pub fn product_joint(&self) -> JointDistribution {
        JointDistribution {
            profiles: self
                .product_profiles()
                .into_iter()
                .map(|p| (p.types, p.prob))
                .collect(),
        }
    }

    /// True when there is no joint, or the joint equals the product of its
    /// marginals.
    pub fn is_product(&self) -> bool {
        let Some(joint) = &self.joint else {
            return true;
        };
        if joint
            .profiles
            .iter()
            .any(|(t, _)| t.len() != self.num_bidders())
        {
            return false;
        }
        let mut mass = std::collections::HashMap::new();
        for (types, prob) in &joint.profiles {
            *mass.entry(types.clone()).or_insert_with(Rational::zero) += prob;
        }
        let marginals = joint_marginals(self.num_bidders(), &self.bidders, joint);
        let Some(marginals) = marginals else {
            return false;
        };
        let product = BidderModel::independent(
            self.bidders
                .iter()
                .zip(marginals)
                .map(|(b, probs)| Bidder::new(b.labels.clone(), probs))
                .collect(),
            self.items,
        );
        product.product_profiles().into_iter().all(|p| {
            let got = mass.get(&p.types).cloned().unwrap_or_else(Rational::zero);
            got == p.prob
        })
    }
}

fn joint_marginals(
    bidders_len: usize,
    bidders: &[Arc<Bidder>],
    joint: &JointDistribution,
) -> Option<Vec<Vec<Rational>>> {
    let mut marginals: Vec<Vec<Rational>> = bidders
        .iter()
        .map(|b| vec![Rational::zero(); b.len()])
        .collect();
    for (types, prob) in &joint.profiles {
        if types.len() != bidders_len {
            return None;
        }
        for (i, &t) in types.iter().enumerate() {
            *marginals[i].get_mut(t)? += prob;
        }
    }
    Some(marginals)
}

/// Interim allocation probabilities for one item, indexed `[bidder][type]`.
pub type InterimTable = Vec<Vec<Rational>>;

/// Interim allocation rule `π_ij(A)`, stored `[item][bidder][type]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedForm {
    pub items: Vec<InterimTable>,
}

impl ReducedForm {
    pub fn new(items: Vec<InterimTable>) -> Self {
        ReducedForm { items }
    }

    pub fn single(table: InterimTable) -> Self {
        ReducedForm { items: vec![table] }
    }

    pub fn zeros(model: &BidderModel) -> Self {
        let table: InterimTable = model
            .bidders
            .iter()
            .map(|b| vec![Rational::zero(); b.len()])
            .collect();
        ReducedForm {
            items: vec![table; model.items],
        }
    }

    pub fn get(&self, item: usize, bidder: usize, ty: usize) -> &Rational {
        &self.items[item][bidder][ty]
    }

    pub fn item(&self, item: usize) -> &InterimTable {
        &self.items[item]
    }

    pub fn to_vector(&self) -> Vec<Rational> {
        self.items
            .iter()
            .flat_map(|t| t.iter().flat_map(|row| row.iter().cloned()))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.to_vector().iter().all(Zero::is_zero)
    }

    /// The shared table when every bidder's row is identical.
    pub fn to_symmetric(&self) -> Option<SymmetricReducedForm> {
        let mut items = Vec::with_capacity(self.items.len());
        for table in &self.items {
            let first = table.first()?;
            if table.iter().any(|row| row != first) {
                return None;
            }
            items.push(first.clone());
        }
        Some(SymmetricReducedForm { items })
    }
}

/// Bidder-symmetric interim rule `π_j(A)`, stored `[item][type]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricReducedForm {
    pub items: Vec<Vec<Rational>>,
}

impl SymmetricReducedForm {
    pub fn new(items: Vec<Vec<Rational>>) -> Self {
        SymmetricReducedForm { items }
    }

    pub fn to_reduced_form(&self, bidders: usize) -> ReducedForm {
        ReducedForm {
            items: self
                .items
                .iter()
                .map(|row| vec![row.clone(); bidders])
                .collect(),
        }
    }

    pub fn to_vector(&self) -> Vec<Rational> {
        self.items.iter().flatten().cloned().collect()
    }
}

/// Linear inequality `Σ coeffs·x ≤ rhs` over flat coordinates. Coefficients
/// are sorted by coordinate with zeros removed, so structurally equal
/// hyperplanes compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hyperplane {
    pub coeffs: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

impl Hyperplane {
    pub fn new(mut coeffs: Vec<(usize, Rational)>, rhs: Rational) -> Self {
        coeffs.sort_by_key(|(k, _)| *k);
        let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(coeffs.len());
        for (k, c) in coeffs {
            match merged.last_mut() {
                Some((last, acc)) if *last == k => *acc += c,
                _ => merged.push((k, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        Hyperplane {
            coeffs: merged,
            rhs,
        }
    }

    pub fn lhs(&self, x: &[Rational]) -> Rational {
        sparse_dot(&self.coeffs, x)
    }

    pub fn is_violated(&self, x: &[Rational]) -> bool {
        self.lhs(x) > self.rhs
    }

    pub fn is_tight(&self, x: &[Rational]) -> bool {
        self.lhs(x) == self.rhs
    }

    pub fn coeff(&self, coord: usize) -> Option<&Rational> {
        self.coeffs
            .binary_search_by_key(&coord, |(k, _)| *k)
            .ok()
            .map(|i| &self.coeffs[i].1)
    }
}

/// Priority level of a (bidder, type) pair. `Lose` orders after every level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rank {
    Level(u32),
    Lose,
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Level(l) => write!(f, "{l}"),
            Rank::Lose => f.write_str("LOSE"),
        }
    }
}

/// Ex-post rule: the item goes uniformly at random to a reporter in the best
/// populated level, and is discarded if everyone is `Lose`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HierarchicalMechanism {
    pub ranks: Vec<Vec<Rank>>,
}

impl HierarchicalMechanism {
    pub fn new(ranks: Vec<Vec<Rank>>) -> Self {
        HierarchicalMechanism { ranks }
    }

    pub fn all_lose(model: &BidderModel) -> Self {
        HierarchicalMechanism {
            ranks: model
                .bidders
                .iter()
                .map(|b| vec![Rank::Lose; b.len()])
                .collect(),
        }
    }

    /// Same ranks for every bidder.
    pub fn symmetric(bidders: usize, ranks: Vec<Rank>) -> Self {
        HierarchicalMechanism {
            ranks: vec![ranks; bidders],
        }
    }

    pub fn rank(&self, bidder: usize, ty: usize) -> Rank {
        self.ranks[bidder][ty]
    }

    /// Distinct bidders never share a non-`Lose` level.
    pub fn is_strict(&self) -> bool {
        let mut owner = std::collections::HashMap::new();
        for (i, row) in self.ranks.iter().enumerate() {
            for r in row {
                if let Rank::Level(l) = r {
                    if let Some(prev) = owner.insert(*l, i) {
                        if prev != i {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// `π_i(A) ≥ π_i(A') ⇒ H(A,i) ≤ H(A',i)` within every bidder.
    pub fn is_partially_ordered(&self, pi: &InterimTable) -> bool {
        self.ranks.iter().zip(pi).all(|(row, vals)| {
            (0..row.len())
                .all(|a| (0..row.len()).all(|b| a == b || vals[a] < vals[b] || row[a] <= row[b]))
        })
    }

    /// Bidder-symmetric and `π(A) ≥ π(A') ⇒ H(A) ≤ H(A')`.
    pub fn is_well_ordered(&self, pi: &[Rational]) -> bool {
        let Some(first) = self.ranks.first() else {
            return true;
        };
        self.ranks.iter().all(|row| row == first)
            && (0..first.len())
                .all(|a| (0..first.len()).all(|b| a == b || pi[a] < pi[b] || first[a] <= first[b]))
    }

    /// `π̂_i(A) ≥ π̂_j(B) ⇒ H(A,i) ≤ H(B,j)` across all pairs.
    pub fn is_virtually_ordered(&self, virtual_pi: &InterimTable) -> bool {
        let cells: Vec<(&Rational, Rank)> = self
            .ranks
            .iter()
            .zip(virtual_pi)
            .flat_map(|(row, vals)| vals.iter().zip(row.iter().copied()))
            .collect();
        cells
            .iter()
            .all(|(va, ra)| cells.iter().all(|(vb, rb)| va < vb || ra <= rb))
    }

    /// Renumbers levels to `1..=k` preserving order.
    pub fn normalized(&self) -> Self {
        let mut levels: Vec<u32> = self
            .ranks
            .iter()
            .flatten()
            .filter_map(|r| match r {
                Rank::Level(l) => Some(*l),
                Rank::Lose => None,
            })
            .collect();
        levels.sort_unstable();
        levels.dedup();
        let ranks = self
            .ranks
            .iter()
            .map(|row| {
                row.iter()
                    .map(|r| match r {
                        Rank::Level(l) => {
                            Rank::Level(levels.binary_search(l).expect("level present") as u32 + 1)
                        }
                        Rank::Lose => Rank::Lose,
                    })
                    .collect()
            })
            .collect();
        HierarchicalMechanism { ranks }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedMechanism {
    pub weight: Rational,
    pub mechanism: HierarchicalMechanism,
}

/// Lottery over hierarchical mechanisms for a single item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MechanismDistribution {
    pub item: usize,
    pub entries: Vec<WeightedMechanism>,
}

impl MechanismDistribution {
    pub fn single(item: usize, mechanism: HierarchicalMechanism) -> Self {
        MechanismDistribution {
            item,
            entries: vec![WeightedMechanism {
                weight: Rational::one(),
                mechanism,
            }],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Positive weights summing to one, shapes matching the model, and support
    /// within `Σ_i |T_i| + 1`.
    pub fn validate(&self, model: &BidderModel) -> Result<(), Vec<ValidationIssue>> {
        let mut issues = Vec::new();
        let mut total = Rational::zero();
        for (k, e) in self.entries.iter().enumerate() {
            if !e.weight.is_positive() {
                issues.push(ValidationIssue::NonPositiveWeight { entry: k });
            }
            total += &e.weight;
            let shape_ok = e.mechanism.ranks.len() == model.num_bidders()
                && e.mechanism
                    .ranks
                    .iter()
                    .zip(&model.bidders)
                    .all(|(r, b)| r.len() == b.len());
            if !shape_ok {
                issues.push(ValidationIssue::IndexMismatch(format!(
                    "mechanism {k} does not match the bidder model"
                )));
            }
        }
        if total != Rational::one() {
            issues.push(ValidationIssue::WeightSumMismatch { sum: total });
        }
        if self.entries.len() > model.total_types() + 1 {
            issues.push(ValidationIssue::SupportTooLarge {
                len: self.entries.len(),
                bound: model.total_types() + 1,
            });
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(issues)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationIssue {
    NoBidders,
    EmptyTypeSpace {
        bidder: usize,
    },
    DuplicateLabel {
        bidder: usize,
        label: String,
    },
    NegativeProbability {
        bidder: usize,
        ty: usize,
    },
    ProbabilitySumMismatch {
        bidder: usize,
        sum: Rational,
    },
    IidMismatch {
        bidder: usize,
    },
    BadDemand {
        bidder: usize,
    },
    InvalidProfile {
        index: usize,
    },
    JointSumMismatch {
        sum: Rational,
    },
    JointMarginalMismatch {
        bidder: usize,
        ty: usize,
    },
    IndexMismatch(String),
    OutOfRangeEntry {
        item: usize,
        bidder: usize,
        ty: usize,
        value: Rational,
    },
    NonPositiveWeight {
        entry: usize,
    },
    WeightSumMismatch {
        sum: Rational,
    },
    SupportTooLarge {
        len: usize,
        bound: usize,
    },
    BadInequality {
        index: usize,
        reason: String,
    },
    BadValue {
        bidder: usize,
        ty: usize,
        reason: String,
    },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ValidationIssue::*;
        match self {
            NoBidders => f.write_str("model has no bidders"),
            EmptyTypeSpace { bidder } => write!(f, "bidder {bidder} has no types"),
            DuplicateLabel { bidder, label } => {
                write!(f, "bidder {bidder} repeats type label `{label}`")
            }
            NegativeProbability { bidder, ty } => {
                write!(f, "bidder {bidder} type {ty} has negative probability")
            }
            ProbabilitySumMismatch { bidder, sum } => write!(
                f,
                "ProbabilitySumMismatch: bidder {bidder} probabilities sum to {}",
                Canonical(sum)
            ),
            IidMismatch { bidder } => {
                write!(
                    f,
                    "bidder {bidder} differs from bidder 0 in an i.i.d. model"
                )
            }
            BadDemand { bidder } => write!(f, "bidder {bidder} has a non-positive demand"),
            InvalidProfile { index } => write!(f, "joint profile {index} is malformed"),
            JointSumMismatch { sum } => {
                write!(f, "joint probabilities sum to {}", Canonical(sum))
            }
            JointMarginalMismatch { bidder, ty } => write!(
                f,
                "bidder {bidder} type {ty} marginal disagrees with the joint distribution"
            ),
            IndexMismatch(msg) => write!(f, "IndexMismatch: {msg}"),
            OutOfRangeEntry {
                item,
                bidder,
                ty,
                value,
            } => write!(
                f,
                "OutOfRangeEntry: item {item} bidder {bidder} type {ty} has value {}",
                Canonical(value)
            ),
            NonPositiveWeight { entry } => write!(f, "entry {entry} has a non-positive weight"),
            WeightSumMismatch { sum } => {
                write!(f, "weights sum to {}", Canonical(sum))
            }
            SupportTooLarge { len, bound } => {
                write!(f, "distribution has {len} entries, more than {bound}")
            }
            BadInequality { index, reason } => write!(f, "inequality {index}: {reason}"),
            BadValue { bidder, ty, reason } => write!(f, "bidder {bidder} type {ty}: {reason}"),
        }
    }
}

/// Checks the model on its own, collecting every violation.
pub fn validate_model(model: &BidderModel) -> Result<(), Vec<ValidationIssue>> {
    let mut issues = Vec::new();
    if model.bidders.is_empty() {
        issues.push(ValidationIssue::NoBidders);
    }
    for (i, b) in model.bidders.iter().enumerate() {
        if i > 0 && Arc::ptr_eq(b, &model.bidders[i - 1]) {
            continue;
        }
        if b.is_empty() {
            issues.push(ValidationIssue::EmptyTypeSpace { bidder: i });
        }
        if b.labels.len() != b.probs.len() {
            issues.push(ValidationIssue::IndexMismatch(format!(
                "bidder {i} has {} labels but {} probabilities",
                b.labels.len(),
                b.probs.len()
            )));
        }
        let mut seen = HashSet::new();
        for l in &b.labels {
            if !seen.insert(l.as_str()) {
                issues.push(ValidationIssue::DuplicateLabel {
                    bidder: i,
                    label: l.clone(),
                });
            }
        }
        let mut sum = Rational::zero();
        for (t, p) in b.probs.iter().enumerate() {
            if p.is_negative() {
                issues.push(ValidationIssue::NegativeProbability { bidder: i, ty: t });
            }
            sum += p;
        }
        if sum != Rational::one() {
            issues.push(ValidationIssue::ProbabilitySumMismatch { bidder: i, sum });
        }
    }
    if model.iid {
        if let Some(first) = model.bidders.first() {
            for (i, b) in model.bidders.iter().enumerate().skip(1) {
                if !Arc::ptr_eq(b, first) && b != first {
                    issues.push(ValidationIssue::IidMismatch { bidder: i });
                }
            }
        }
    }
    if let Some(demands) = &model.demands {
        if demands.len() != model.num_bidders() {
            issues.push(ValidationIssue::IndexMismatch(format!(
                "{} demands for {} bidders",
                demands.len(),
                model.num_bidders()
            )));
        }
        for (i, d) in demands.iter().enumerate() {
            if *d == 0 {
                issues.push(ValidationIssue::BadDemand { bidder: i });
            }
        }
    }
    if let Some(joint) = &model.joint {
        let mut sum = Rational::zero();
        let mut well_formed = true;
        for (k, (types, prob)) in joint.profiles.iter().enumerate() {
            let ok = types.len() == model.num_bidders()
                && types
                    .iter()
                    .enumerate()
                    .all(|(i, &t)| t < model.num_types(i))
                && !prob.is_negative();
            if !ok {
                issues.push(ValidationIssue::InvalidProfile { index: k });
                well_formed = false;
            }
            sum += prob;
        }
        if sum != Rational::one() {
            issues.push(ValidationIssue::JointSumMismatch { sum });
        }
        if well_formed {
            if let Some(marg) = joint_marginals(model.num_bidders(), &model.bidders, joint) {
                for (i, row) in marg.iter().enumerate() {
                    for (t, p) in row.iter().enumerate() {
                        if *p != model.bidders[i].probs[t] {
                            issues
                                .push(ValidationIssue::JointMarginalMismatch { bidder: i, ty: t });
                        }
                    }
                }
            }
        }
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(issues)
    }
}

/// Validates the model and that `rf` is indexed exactly like it with every
/// entry in `[0, 1]`. Returns every violation found.
pub fn validate(model: &BidderModel, rf: &ReducedForm) -> Result<(), Vec<ValidationIssue>> {
    let mut issues = validate_model(model).err().unwrap_or_default();
    if rf.items.len() != model.items {
        issues.push(ValidationIssue::IndexMismatch(format!(
            "reduced form has {} items, model has {}",
            rf.items.len(),
            model.items
        )));
    }
    for (j, table) in rf.items.iter().enumerate() {
        if table.len() != model.num_bidders() {
            issues.push(ValidationIssue::IndexMismatch(format!(
                "item {j} lists {} bidders, model has {}",
                table.len(),
                model.num_bidders()
            )));
        }
        for (i, row) in table.iter().enumerate() {
            if let Some(b) = model.bidders.get(i) {
                if row.len() != b.len() {
                    issues.push(ValidationIssue::IndexMismatch(format!(
                        "item {j} bidder {i} lists {} types, model has {}",
                        row.len(),
                        b.len()
                    )));
                }
            }
            for (t, v) in row.iter().enumerate() {
                if !is_probability(v) {
                    issues.push(ValidationIssue::OutOfRangeEntry {
                        item: j,
                        bidder: i,
                        ty: t,
                        value: v.clone(),
                    });
                }
            }
        }
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(issues)
    }
}
