//! The mechanism polytope for independent, not necessarily identical,
//! bidders. Coordinates are merged types, bidder-major, each bidder's types
//! in decreasing `π`.
//!
//! Faces:
//! * order constraints `x_{i,j+1} ≤ x_{i,j}` and `x_{i,last} ≥ 0`;
//! * near-constricting sets: the first `c_i` types of every bidder, with
//!   `0 ≤ c_i < |T_i|` and not all zero,
//!   `Σ Pr·x ≤ 1 − ∏_i (1 − Pr[t_i among the first c_i])`;
//! * the all-types constraint `Σ Pr·x ≤ 1`.
//!
//! Vertices are strict hierarchical mechanisms that respect each bidder's
//! order. The corner oracle builds one from the tight faces: tied runs of a
//! bidder share a level, a tight near-constricting set sits above everything
//! outside it, and types whose chain of ties reaches the `≥ 0` face lose.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use super::{interim_of, MergedInstance};
use crate::caratheodory::{Corner, PolytopeOracles, Separation};
use crate::error::{Error, Result};
use crate::feasibility::{independent_violation, ThresholdRule};
use crate::model::{BidderModel, HierarchicalMechanism, Hyperplane, Rank};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum IndependentFace {
    Tie { bidder: usize, ty: usize },
    Near(Vec<usize>),
    Full,
}

#[derive(Debug, Clone)]
pub struct IndependentPolytope {
    model: BidderModel,
    offsets: Vec<usize>,
    owner: Vec<(usize, usize)>,
    /// `cum[i][c]`: probability of bidder `i`'s first `c` types.
    cum: Vec<Vec<Rational>>,
}

struct Atom {
    bidder: usize,
    first: usize,
    last: usize,
    lo: usize,
    hi: usize,
}

impl IndependentPolytope {
    pub fn new(merged: &MergedInstance) -> Result<Self> {
        for (i, row) in merged.pi.iter().enumerate() {
            if row.windows(2).any(|w| w[0] <= w[1]) {
                return Err(Error::NotMerged { bidder: i });
            }
        }
        let mut model = merged.model.clone();
        model.iid = false;
        let offsets = model.offsets();
        let owner = model
            .bidders
            .iter()
            .enumerate()
            .flat_map(|(i, b)| (0..b.len()).map(move |j| (i, j)))
            .collect();
        let cum = model
            .bidders
            .iter()
            .map(|b| {
                let mut acc = Rational::zero();
                let mut out = vec![acc.clone()];
                for p in &b.probs {
                    acc += p;
                    out.push(acc.clone());
                }
                out
            })
            .collect();
        Ok(IndependentPolytope {
            model,
            offsets,
            owner,
            cum,
        })
    }

    fn k(&self, i: usize) -> usize {
        self.model.num_types(i)
    }

    pub fn hyperplane(&self, face: &IndependentFace) -> Hyperplane {
        let one = Rational::one();
        match face {
            IndependentFace::Tie { bidder, ty } => {
                let c = self.offsets[*bidder] + ty;
                if ty + 1 == self.k(*bidder) {
                    Hyperplane::new(vec![(c, -one)], Rational::zero())
                } else {
                    Hyperplane::new(vec![(c, -one.clone()), (c + 1, one)], Rational::zero())
                }
            }
            IndependentFace::Near(counts) => {
                let mut coeffs = Vec::new();
                let mut survive = Rational::one();
                for (i, &c) in counts.iter().enumerate() {
                    for j in 0..c {
                        coeffs.push((self.offsets[i] + j, self.model.prob(i, j).clone()));
                    }
                    survive *= Rational::one() - &self.cum[i][c];
                }
                Hyperplane::new(coeffs, Rational::one() - survive)
            }
            IndependentFace::Full => Hyperplane::new(
                self.owner
                    .iter()
                    .enumerate()
                    .map(|(c, &(i, j))| (c, self.model.prob(i, j).clone()))
                    .collect(),
                one,
            ),
        }
    }

    pub fn classify(&self, h: &Hyperplane) -> Option<IndependentFace> {
        let (c0, a0) = h.coeffs.first()?;
        if *c0 >= self.owner.len() || h.coeffs.last()?.0 >= self.owner.len() {
            return None;
        }
        let face = if *a0 < Rational::zero() {
            let (bidder, ty) = self.owner[*c0];
            IndependentFace::Tie { bidder, ty }
        } else {
            let mut counts = vec![0usize; self.model.num_bidders()];
            for (c, _) in &h.coeffs {
                let (i, _) = self.owner[*c];
                counts[i] += 1;
            }
            if counts.iter().enumerate().all(|(i, &c)| c == self.k(i)) {
                IndependentFace::Full
            } else if counts.iter().enumerate().all(|(i, &c)| c < self.k(i)) {
                IndependentFace::Near(counts)
            } else {
                return None;
            }
        };
        (self.hyperplane(&face) == *h).then_some(face)
    }

    fn block_of(nears: &[Vec<usize>], i: usize, j: usize) -> usize {
        nears.iter().position(|c| j < c[i]).unwrap_or(nears.len())
    }

    /// A strict mechanism, respecting each bidder's order, whose reduced form
    /// lies on every face given; `None` when no point of the polytope does.
    pub fn mechanism(&self, faces: &BTreeSet<IndependentFace>) -> Option<HierarchicalMechanism> {
        let m = self.model.num_bidders();
        let mut tie: Vec<Vec<bool>> = (0..m).map(|i| vec![false; self.k(i)]).collect();
        let mut nears: Vec<Vec<usize>> = Vec::new();
        let mut full = false;
        for f in faces {
            match f {
                IndependentFace::Tie { bidder, ty } => tie[*bidder][*ty] = true,
                IndependentFace::Near(c) => nears.push(c.clone()),
                IndependentFace::Full => full = true,
            }
        }
        nears.sort_by_key(|c| c.iter().sum::<usize>());
        nears.dedup();
        if nears
            .windows(2)
            .any(|w| w[0].iter().zip(&w[1]).any(|(a, b)| a > b))
        {
            return None;
        }

        // Types forced to lose: the tail of a bidder's order tied down to 0.
        let lose_from: Vec<usize> = (0..m)
            .map(|i| {
                let k = self.k(i);
                if !tie[i][k - 1] {
                    return k;
                }
                let mut j = k - 1;
                while j > 0 && tie[i][j - 1] {
                    j -= 1;
                }
                j
            })
            .collect();
        if let Some(outer) = nears.last() {
            if (0..m).any(|i| lose_from[i] < outer[i]) {
                return None;
            }
        }
        if full && (0..m).all(|i| lose_from[i] < self.k(i)) {
            return None;
        }

        let mut atoms: Vec<Atom> = Vec::new();
        for i in 0..m {
            let mut j = 0;
            while j < lose_from[i] {
                let first = j;
                while j + 1 < lose_from[i] && tie[i][j] {
                    j += 1;
                }
                atoms.push(Atom {
                    bidder: i,
                    first,
                    last: j,
                    lo: Self::block_of(&nears, i, first),
                    hi: Self::block_of(&nears, i, j),
                });
                j += 1;
            }
        }
        // An atom must rank above every other bidder's atom that ends in a
        // later block than it starts; both directions at once is a conflict.
        for x in atoms.iter().filter(|a| a.lo < a.hi) {
            if atoms
                .iter()
                .any(|y| y.bidder != x.bidder && x.lo < y.hi && y.lo < x.hi)
            {
                return None;
            }
        }
        atoms.sort_by_key(|a| (a.lo + a.hi, a.bidder, a.first));

        let mut ranks: Vec<Vec<Rank>> = (0..m).map(|i| vec![Rank::Lose; self.k(i)]).collect();
        for (level, a) in atoms.iter().enumerate() {
            ranks[a.bidder][a.first..=a.last].fill(Rank::Level(level as u32 + 1));
        }
        Some(HierarchicalMechanism::new(ranks))
    }

    fn table(&self, x: &[Rational]) -> Vec<Vec<Rational>> {
        self.offsets
            .iter()
            .enumerate()
            .map(|(i, &o)| x[o..o + self.k(i)].to_vec())
            .collect()
    }
}

impl PolytopeOracles for IndependentPolytope {
    type Tag = HierarchicalMechanism;

    fn dimension(&self) -> usize {
        self.owner.len()
    }

    fn is_boundary(&self, h: &Hyperplane) -> bool {
        self.classify(h).is_some()
    }

    fn separate(&self, x: &[Rational]) -> Separation {
        for i in 0..self.model.num_bidders() {
            let o = self.offsets[i];
            let k = self.k(i);
            if let Some(j) = (0..k - 1).find(|&j| x[o + j + 1] > x[o + j]) {
                return Separation::Violated(
                    self.hyperplane(&IndependentFace::Tie { bidder: i, ty: j }),
                );
            }
            if x[o + k - 1] < Rational::zero() {
                return Separation::Violated(self.hyperplane(&IndependentFace::Tie {
                    bidder: i,
                    ty: k - 1,
                }));
            }
        }
        let probs: Vec<Vec<Rational>> =
            self.model.bidders.iter().map(|b| b.probs.clone()).collect();
        match independent_violation(&probs, &self.table(x), ThresholdRule::Strict) {
            None => Separation::Inside,
            Some(v) => {
                let mut counts = vec![0usize; self.model.num_bidders()];
                for &(i, _) in &v.set {
                    counts[i] += 1;
                }
                debug_assert!(v.set.iter().all(|&(i, j)| j < counts[i]));
                let face = if counts.iter().enumerate().any(|(i, &c)| c == self.k(i)) {
                    IndependentFace::Full
                } else {
                    IndependentFace::Near(counts)
                };
                Separation::Violated(self.hyperplane(&face))
            }
        }
    }

    fn corner(&self, tight: &[Hyperplane]) -> Option<Corner<HierarchicalMechanism>> {
        let faces: BTreeSet<IndependentFace> = tight
            .iter()
            .map(|h| self.classify(h))
            .collect::<Option<_>>()?;
        let h = self.mechanism(&faces)?;
        let point = interim_of(&self.model, &h).into_iter().flatten().collect();
        Some(Corner { point, tag: h })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::hierarchy::type_merge;
    use crate::rational::ratio;

    fn virtual_order_boundary() -> (IndependentPolytope, Vec<Rational>) {
        let (model, rf) = fixtures::virtual_order_boundary(&ratio(1, 6));
        let merged = type_merge(&model, &rf, 0).unwrap();
        (IndependentPolytope::new(&merged).unwrap(), merged.point())
    }

    #[test]
    fn unconstrained_corner_is_an_accepted_vertex() {
        let (p, _) = virtual_order_boundary();
        let c = p.corner(&[]).unwrap();
        assert!(c.tag.is_strict());
        assert_eq!(p.separate(&c.point), Separation::Inside);
    }

    #[test]
    fn crossing_near_sets_have_no_corner() {
        let (p, _) = virtual_order_boundary();
        // {A} and {B} are not nested.
        let b = [
            p.hyperplane(&IndependentFace::Near(vec![1, 0])),
            p.hyperplane(&IndependentFace::Near(vec![0, 1])),
        ];
        assert!(p.corner(&b).is_none());
    }

    #[test]
    fn full_face_never_discards_the_item() {
        let (p, _) = virtual_order_boundary();
        let full = p.hyperplane(&IndependentFace::Full);
        let c = p.corner(std::slice::from_ref(&full)).unwrap();
        assert!(full.is_tight(&c.point));
        // Some bidder never loses, so the item is always allocated.
        assert!(c
            .tag
            .ranks
            .iter()
            .any(|row| row.iter().all(|r| *r != Rank::Lose)));
    }

    #[test]
    fn virtual_order_boundary_point_is_inside_and_tight_on_full() {
        let (p, x) = virtual_order_boundary();
        assert_eq!(p.separate(&x), Separation::Inside);
        assert!(p.hyperplane(&IndependentFace::Full).is_tight(&x));
    }

    #[test]
    fn faces_round_trip_through_classification() {
        let (p, _) = virtual_order_boundary();
        let faces = [
            IndependentFace::Tie { bidder: 0, ty: 0 },
            IndependentFace::Tie { bidder: 1, ty: 0 },
            IndependentFace::Tie { bidder: 1, ty: 1 },
            IndependentFace::Near(vec![0, 1]),
            IndependentFace::Full,
        ];
        for f in faces {
            assert_eq!(p.classify(&p.hyperplane(&f)), Some(f));
        }
    }
}
