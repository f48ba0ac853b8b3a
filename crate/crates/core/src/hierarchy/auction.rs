//! Running mechanism distributions on reported profiles, and Monte Carlo
//! estimates of the interim allocation they induce.
//!
//! All sampling is exact: a categorical draw over rational weights scales
//! them to a common denominator and draws a uniform integer below it.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{BidderModel, InterimTable, MechanismDistribution, Rank, ReducedForm};
use crate::par::Execution;
use crate::rational::Rational;

/// Rounds per independently seeded stream; fixes the result regardless of
/// how chunks are scheduled.
const CHUNK: u64 = 8192;

#[derive(Debug, Clone)]
enum Cumulative {
    Small(Vec<u64>),
    Big(Vec<BigUint>),
}

#[derive(Debug, Clone)]
struct Categorical {
    cum: Cumulative,
}

impl Categorical {
    fn new(weights: &[Rational]) -> Self {
        let denom = weights
            .iter()
            .fold(num_bigint::BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let mut acc = BigUint::zero();
        let cum: Vec<BigUint> = weights
            .iter()
            .map(|w| {
                let scaled = w.numer() * (&denom / w.denom());
                acc += scaled.to_biguint().expect("weights are non-negative");
                acc.clone()
            })
            .collect();
        let small: Option<Vec<u64>> = cum.iter().map(|c| c.to_u64()).collect();
        Categorical {
            cum: small.map_or(Cumulative::Big(cum), Cumulative::Small),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match &self.cum {
            Cumulative::Small(cum) => {
                let x = rng.gen_range(0..*cum.last().expect("non-empty"));
                cum.partition_point(|&c| c <= x)
            }
            Cumulative::Big(cum) => {
                let x = rng.gen_biguint_below(cum.last().expect("non-empty"));
                cum.partition_point(|c| *c <= x)
            }
        }
    }
}

/// Draws type profiles from a model: bidder by bidder for product models,
/// from the explicit joint otherwise.
#[derive(Debug, Clone)]
pub struct ProfileSampler {
    source: Source,
}

#[derive(Debug, Clone)]
enum Source {
    Product(Vec<Categorical>),
    Joint(Vec<Vec<usize>>, Categorical),
}

impl ProfileSampler {
    pub fn new(model: &BidderModel) -> Self {
        let source = match &model.joint {
            Some(joint) if !model.is_product() => {
                let weights: Vec<Rational> =
                    joint.profiles.iter().map(|(_, p)| p.clone()).collect();
                Source::Joint(
                    joint.profiles.iter().map(|(t, _)| t.clone()).collect(),
                    Categorical::new(&weights),
                )
            }
            _ => {
                let mut per: Vec<Categorical> = Vec::with_capacity(model.num_bidders());
                for (i, b) in model.bidders.iter().enumerate() {
                    let shared = i > 0 && std::sync::Arc::ptr_eq(b, &model.bidders[i - 1]);
                    let next = if shared {
                        per[i - 1].clone()
                    } else {
                        Categorical::new(&b.probs)
                    };
                    per.push(next);
                }
                Source::Product(per)
            }
        };
        ProfileSampler { source }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        match &self.source {
            Source::Product(per) => per.iter().map(|c| c.sample(rng)).collect(),
            Source::Joint(profiles, c) => profiles[c.sample(rng)].clone(),
        }
    }
}

/// Mechanism distributions compiled for repeated runs.
#[derive(Debug, Clone)]
struct Auction<'a> {
    dists: &'a [MechanismDistribution],
    choosers: Vec<Categorical>,
}

impl<'a> Auction<'a> {
    fn new(dists: &'a [MechanismDistribution]) -> Self {
        let choosers = dists
            .iter()
            .map(|d| {
                Categorical::new(
                    &d.entries
                        .iter()
                        .map(|e| e.weight.clone())
                        .collect::<Vec<_>>(),
                )
            })
            .collect();
        Auction { dists, choosers }
    }

    fn run<R: Rng + ?Sized>(&self, profile: &[usize], rng: &mut R) -> Vec<Option<usize>> {
        let mut tied = Vec::with_capacity(profile.len());
        self.dists
            .iter()
            .zip(&self.choosers)
            .map(|(d, chooser)| {
                let h = &d.entries[chooser.sample(rng)].mechanism;
                let mut best = u32::MAX;
                tied.clear();
                for (i, &t) in profile.iter().enumerate() {
                    if let Rank::Level(l) = h.rank(i, t) {
                        if l < best {
                            best = l;
                            tied.clear();
                        }
                        if l == best {
                            tied.push(i);
                        }
                    }
                }
                match tied.len() {
                    0 => None,
                    1 => Some(tied[0]),
                    n => Some(tied[rng.gen_range(0..n)]),
                }
            })
            .collect()
    }
}

fn check_profile(model: &BidderModel, profile: &[usize]) -> Result<()> {
    if profile.len() != model.num_bidders() {
        return Err(Error::ProfileLength {
            expected: model.num_bidders(),
            got: profile.len(),
        });
    }
    match profile
        .iter()
        .enumerate()
        .find(|&(i, &t)| t >= model.num_types(i))
    {
        Some((bidder, &ty)) => Err(Error::UnknownType { bidder, ty }),
        None => Ok(()),
    }
}

/// Winner of each item (in the order of `dists`), or `None` when every
/// reported type is ranked LOSE.
pub fn run_auction(
    model: &BidderModel,
    dists: &[MechanismDistribution],
    profile: &[usize],
    seed: u64,
) -> Result<Vec<Option<usize>>> {
    run_auction_with(model, dists, profile, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn run_auction_with<R: Rng + ?Sized>(
    model: &BidderModel,
    dists: &[MechanismDistribution],
    profile: &[usize],
    rng: &mut R,
) -> Result<Vec<Option<usize>>> {
    check_profile(model, profile)?;
    Ok(Auction::new(dists).run(profile, rng))
}

/// Counts from repeated auctions on sampled profiles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Simulation {
    pub rounds: u64,
    /// `reports[i][t]`: rounds in which bidder `i` had type `t`.
    pub reports: Vec<Vec<u64>>,
    /// `wins[k][i][t]`: of those, rounds in which the `k`-th item went to `i`.
    pub wins: Vec<Vec<Vec<u64>>>,
}

impl Simulation {
    fn empty(model: &BidderModel, items: usize) -> Self {
        let zeros: Vec<Vec<u64>> = (0..model.num_bidders())
            .map(|i| vec![0; model.num_types(i)])
            .collect();
        Simulation {
            rounds: 0,
            reports: zeros.clone(),
            wins: vec![zeros; items],
        }
    }

    fn absorb(&mut self, other: &Simulation) {
        self.rounds += other.rounds;
        add_into(&mut self.reports, &other.reports);
        for (a, b) in self.wins.iter_mut().zip(&other.wins) {
            add_into(a, b);
        }
    }

    /// Empirical interim table of the `k`-th item; unreported types get 0.
    pub fn empirical(&self, k: usize) -> InterimTable {
        self.wins[k]
            .iter()
            .zip(&self.reports)
            .map(|(w, n)| {
                w.iter()
                    .zip(n)
                    .map(|(&w, &n)| {
                        if n == 0 {
                            Rational::zero()
                        } else {
                            Rational::new(w.into(), n.into())
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Largest `|empirical − expected|` over all cells with at least one report.
    pub fn max_deviation(&self, expected: &ReducedForm) -> Rational {
        let mut worst = Rational::zero();
        for k in 0..self.wins.len() {
            let emp = self.empirical(k);
            for (i, row) in emp.iter().enumerate() {
                for (t, e) in row.iter().enumerate() {
                    if self.reports[i][t] > 0 {
                        let d = (e - expected.get(k, i, t)).abs();
                        if d > worst {
                            worst = d;
                        }
                    }
                }
            }
        }
        worst
    }

    /// Cells whose win count lies outside `nπ ± 3√(nπ(1−π))`, where `n` is
    /// the number of rounds the type was reported. Decided exactly by
    /// squaring.
    pub fn outside_three_sigma(&self, expected: &ReducedForm) -> Vec<(usize, usize, usize)> {
        let nine = Rational::from_integer(9.into());
        let mut out = Vec::new();
        for (k, item) in self.wins.iter().enumerate() {
            for (i, row) in item.iter().enumerate() {
                for (t, &w) in row.iter().enumerate() {
                    let n = Rational::from_integer(self.reports[i][t].into());
                    let p = expected.get(k, i, t);
                    let gap = Rational::from_integer(w.into()) - &n * p;
                    let var = &n * p * (Rational::one() - p);
                    if &gap * &gap > &nine * var {
                        out.push((k, i, t));
                    }
                }
            }
        }
        out
    }
}

fn add_into(a: &mut [Vec<u64>], b: &[Vec<u64>]) {
    for (x, y) in a.iter_mut().zip(b) {
        for (u, v) in x.iter_mut().zip(y) {
            *u += v;
        }
    }
}

/// One simulated round: the sampled profile and each item's winner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Round {
    pub profile: Vec<usize>,
    pub winners: Vec<Option<usize>>,
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// The individual rounds that [`simulate`] aggregates, for the same seed.
pub fn trace(
    model: &BidderModel,
    dists: &[MechanismDistribution],
    rounds: u64,
    seed: u64,
) -> Vec<Round> {
    let sampler = ProfileSampler::new(model);
    let auction = Auction::new(dists);
    let mut out = Vec::with_capacity(rounds as usize);
    for c in 0..rounds.div_ceil(CHUNK) {
        let mut rng = chunk_rng(seed, c);
        for _ in 0..CHUNK.min(rounds - c * CHUNK) {
            let profile = sampler.sample(&mut rng);
            let winners = auction.run(&profile, &mut rng);
            out.push(Round { profile, winners });
        }
    }
    out
}

/// Runs `rounds` auctions on profiles drawn from the model. The result
/// depends only on `seed`, not on `exec`.
pub fn simulate(
    model: &BidderModel,
    dists: &[MechanismDistribution],
    rounds: u64,
    seed: u64,
    exec: Execution,
) -> Simulation {
    let sampler = ProfileSampler::new(model);
    let auction = Auction::new(dists);
    let chunks = rounds.div_ceil(CHUNK);
    let parts = exec.map_range(chunks as usize, |c| {
        let mut rng = chunk_rng(seed, c as u64);
        let n = CHUNK.min(rounds - c as u64 * CHUNK);
        let mut sim = Simulation::empty(model, dists.len());
        sim.rounds = n;
        for _ in 0..n {
            let profile = sampler.sample(&mut rng);
            let winners = auction.run(&profile, &mut rng);
            for (i, &t) in profile.iter().enumerate() {
                sim.reports[i][t] += 1;
            }
            for (k, w) in winners.into_iter().enumerate() {
                if let Some(i) = w {
                    sim.wins[k][i][profile[i]] += 1;
                }
            }
        }
        sim
    });
    let mut total = Simulation::empty(model, dists.len());
    for p in &parts {
        total.absorb(p);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::hierarchy::{decompose_reduced_form, reduced_form_of};
    use crate::model::{Bidder, HierarchicalMechanism, JointDistribution};
    use crate::rational::ratio;

    fn five_eighths() -> (BidderModel, ReducedForm, Vec<MechanismDistribution>) {
        let (model, srf) = fixtures::iid_five_eighths();
        let rf = srf.to_reduced_form(2);
        let dist = decompose_reduced_form(&model, &rf, 0).unwrap();
        (model, rf, vec![dist])
    }

    #[test]
    fn all_lose_never_allocates() {
        let (model, _, _) = five_eighths();
        let d = vec![MechanismDistribution::single(
            0,
            HierarchicalMechanism::all_lose(&model),
        )];
        for seed in 0..20 {
            assert_eq!(run_auction(&model, &d, &[0, 1], seed).unwrap(), vec![None]);
        }
    }

    #[test]
    fn unique_minimum_rank_wins() {
        let model = BidderModel::independent(
            vec![
                Bidder::from_pairs(&[("A", ratio(1, 1))]),
                Bidder::from_pairs(&[("B", ratio(1, 2)), ("C", ratio(1, 2))]),
            ],
            1,
        );
        let h = HierarchicalMechanism::new(vec![
            vec![Rank::Level(2)],
            vec![Rank::Level(1), Rank::Lose],
        ]);
        let d = vec![MechanismDistribution::single(0, h)];
        assert_eq!(run_auction(&model, &d, &[0, 0], 3).unwrap(), vec![Some(1)]);
        assert_eq!(run_auction(&model, &d, &[0, 1], 3).unwrap(), vec![Some(0)]);
    }

    #[test]
    fn bad_profiles_are_rejected() {
        let (model, _, d) = five_eighths();
        assert_eq!(
            run_auction(&model, &d, &[0], 1),
            Err(Error::ProfileLength {
                expected: 2,
                got: 1
            })
        );
        assert_eq!(
            run_auction(&model, &d, &[0, 2], 1),
            Err(Error::UnknownType { bidder: 1, ty: 2 })
        );
    }

    #[test]
    fn simulation_matches_interim_within_three_sigma() {
        let (model, rf, d) = five_eighths();
        let sim = simulate(&model, &d, 100_000, 7, Execution::default());
        assert_eq!(sim.rounds, 100_000);
        assert!(
            sim.outside_three_sigma(&rf).is_empty(),
            "{:?}",
            sim.empirical(0)
        );
    }

    #[test]
    fn execution_mode_does_not_change_the_result() {
        let (model, _, d) = five_eighths();
        let a = simulate(&model, &d, 20_000, 11, Execution::Sequential);
        let b = simulate(&model, &d, 20_000, 11, Execution::Parallel);
        assert_eq!(a, b);
    }

    #[test]
    fn trace_agrees_with_simulation() {
        let (model, _, d) = five_eighths();
        let rounds = trace(&model, &d, 9000, 3);
        let sim = simulate(&model, &d, 9000, 3, Execution::default());
        let wins: u64 = rounds
            .iter()
            .filter(|r| r.winners[0] == Some(0) && r.profile[0] == 0)
            .count() as u64;
        assert_eq!(wins, sim.wins[0][0][0]);
    }

    #[test]
    fn ties_split_evenly() {
        let (model, _, _) = five_eighths();
        let h = HierarchicalMechanism::symmetric(2, vec![Rank::Level(1), Rank::Level(1)]);
        let d = vec![MechanismDistribution::single(0, h.clone())];
        let expected = reduced_form_of(&model, &d);
        assert_eq!(expected.get(0, 0, 0), &ratio(1, 2));
        let sim = simulate(&model, &d, 40_000, 5, Execution::default());
        assert!(sim.outside_three_sigma(&expected).is_empty());
    }

    #[test]
    fn correlated_profiles_come_from_the_joint() {
        let b = Bidder::from_pairs(&[("L", ratio(1, 2)), ("H", ratio(1, 2))]);
        let joint = JointDistribution {
            profiles: vec![(vec![0, 0], ratio(1, 2)), (vec![1, 1], ratio(1, 2))],
        };
        let model = BidderModel::iid(2, b, 1).with_joint(joint);
        let sampler = ProfileSampler::new(&model);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..200 {
            let p = sampler.sample(&mut rng);
            assert_eq!(p[0], p[1]);
        }
    }

    #[test]
    fn categorical_handles_huge_denominators() {
        let tiny = Rational::new(1.into(), num_bigint::BigInt::from(10u8).pow(40));
        let c = Categorical::new(&[tiny.clone(), Rational::one() - tiny]);
        assert!(matches!(c.cum, Cumulative::Big(_)));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..100).all(|_| c.sample(&mut rng) == 1));
    }
}
