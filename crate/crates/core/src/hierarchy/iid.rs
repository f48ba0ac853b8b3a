//! The bidder-symmetric mechanism polytope over merged types sorted by
//! decreasing `π`. Its faces are the order constraints `x_{i+1} ≤ x_i`
//! (with `x_{k-1} ≥ 0` for the last type) and one Border prefix constraint
//! per type.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{iid_win_probability, MergedInstance, RankCdf};
use crate::caratheodory::{Corner, PolytopeOracles, Separation};
use crate::error::{Error, Result};
use crate::feasibility::iid_violation;
use crate::model::{Bidder, Hyperplane, Rank};
use crate::rational::{pow, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum IidFace {
    /// `x_{i+1} − x_i ≤ 0`, or `−x_i ≤ 0` for the last type.
    Tie(usize),
    /// `Σ_{j ≤ i} m·Pr[A_j]·x_j ≤ 1 − (1 − Σ_{j ≤ i} Pr[A_j])^m`.
    Prefix(usize),
}

#[derive(Debug, Clone)]
pub struct IidPolytope {
    m: u32,
    bidder: Bidder,
    cum: Vec<Rational>,
}

impl IidPolytope {
    pub fn new(merged: &MergedInstance) -> Result<Self> {
        if !merged.model.iid {
            return Err(Error::NotIid);
        }
        if merged.pi[0].windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::NotMerged { bidder: 0 });
        }
        let bidder = (*merged.model.bidders[0]).clone();
        let mut acc = Rational::zero();
        let cum = bidder
            .probs
            .iter()
            .map(|p| {
                acc += p;
                acc.clone()
            })
            .collect();
        Ok(IidPolytope {
            m: u32::try_from(merged.model.num_bidders()).expect("bidder count fits in u32"),
            bidder,
            cum,
        })
    }

    fn len(&self) -> usize {
        self.bidder.len()
    }

    fn scale(&self) -> Rational {
        Rational::from_integer(BigInt::from(self.m))
    }

    fn prefix_rhs(&self, i: usize) -> Rational {
        Rational::one() - pow(&(Rational::one() - &self.cum[i]), self.m)
    }

    pub fn hyperplane(&self, face: IidFace) -> Hyperplane {
        let one = Rational::one();
        match face {
            IidFace::Tie(i) if i + 1 == self.len() => {
                Hyperplane::new(vec![(i, -one)], Rational::zero())
            }
            IidFace::Tie(i) => {
                Hyperplane::new(vec![(i, -one.clone()), (i + 1, one)], Rational::zero())
            }
            IidFace::Prefix(i) => {
                let s = self.scale();
                Hyperplane::new(
                    (0..=i).map(|j| (j, &s * &self.bidder.probs[j])).collect(),
                    self.prefix_rhs(i),
                )
            }
        }
    }

    pub fn classify(&self, h: &Hyperplane) -> Option<IidFace> {
        let first = h.coeffs.first()?;
        let face = if first.1 < Rational::zero() {
            IidFace::Tie(first.0)
        } else {
            IidFace::Prefix(h.coeffs.last()?.0)
        };
        let in_range = match face {
            IidFace::Tie(i) | IidFace::Prefix(i) => i < self.len(),
        };
        (in_range && self.hyperplane(face) == *h).then_some(face)
    }

    /// Well-ordered ranks whose reduced form lies on every face given, or
    /// `None` when a tie and a prefix constraint at the same index are both
    /// required.
    pub fn mechanism(&self, faces: &BTreeSet<IidFace>) -> Option<Vec<Rank>> {
        let k = self.len();
        if (0..k).any(|i| faces.contains(&IidFace::Tie(i)) && faces.contains(&IidFace::Prefix(i))) {
            return None;
        }
        // Group numbers counted from the bottom; `None` is LOSE.
        let mut group: Vec<Option<u32>> = vec![None; k];
        let mut groups = 0u32;
        for i in (0..k).rev() {
            let tied = faces.contains(&IidFace::Tie(i));
            group[i] = if i + 1 == k {
                if tied {
                    None
                } else {
                    groups += 1;
                    Some(groups)
                }
            } else if tied {
                group[i + 1]
            } else {
                groups += 1;
                Some(groups)
            };
        }
        Some(
            group
                .into_iter()
                .map(|g| g.map_or(Rank::Lose, |g| Rank::Level(groups - g + 1)))
                .collect(),
        )
    }

    pub fn point_of(&self, ranks: &[Rank]) -> Vec<Rational> {
        let cdf = RankCdf::new(&self.bidder, ranks);
        ranks
            .iter()
            .map(|r| match r {
                Rank::Lose => Rational::zero(),
                Rank::Level(l) => {
                    let (q, s) = cdf.split(*l);
                    iid_win_probability(self.m, &q, &s)
                }
            })
            .collect()
    }
}

impl PolytopeOracles for IidPolytope {
    type Tag = Vec<Rank>;

    fn dimension(&self) -> usize {
        self.len()
    }

    fn is_boundary(&self, h: &Hyperplane) -> bool {
        self.classify(h).is_some()
    }

    fn separate(&self, x: &[Rational]) -> Separation {
        let k = self.len();
        if let Some(i) = (0..k.saturating_sub(1)).find(|&i| x[i + 1] > x[i]) {
            return Separation::Violated(self.hyperplane(IidFace::Tie(i)));
        }
        if k > 0 && x[k - 1] < Rational::zero() {
            return Separation::Violated(self.hyperplane(IidFace::Tie(k - 1)));
        }
        match iid_violation(self.m, &self.bidder.probs, x) {
            None => Separation::Inside,
            Some(v) => {
                let last = *v.set.iter().max().expect("violations are non-empty");
                debug_assert_eq!(v.set, (0..=last).collect::<Vec<_>>());
                Separation::Violated(self.hyperplane(IidFace::Prefix(last)))
            }
        }
    }

    fn corner(&self, tight: &[Hyperplane]) -> Option<Corner<Vec<Rank>>> {
        let faces: BTreeSet<IidFace> = tight
            .iter()
            .map(|h| self.classify(h))
            .collect::<Option<_>>()?;
        let ranks = self.mechanism(&faces)?;
        Some(Corner {
            point: self.point_of(&ranks),
            tag: ranks,
        })
    }
}
