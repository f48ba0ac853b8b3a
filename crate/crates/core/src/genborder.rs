//! Feasibility of reduced forms under arbitrary non-negative linear
//! constraints on each profile's allocation, with possibly correlated
//! bidders. Profiles are enumerated explicitly.
//!
//! A reduced form is feasible iff for every weighting `W_ij(A) ∈ [0, 1]`
//!
//! ```text
//! Σ_{i,j,A} W_ij(A)·π_ij(A)·Pr[t_i = A]  ≤  Σ_P Pr[P] · max_{φ ∈ F} Σ_{i,j} W_ij(P_i)·φ_ij
//! ```
//!
//! Infeasibility is certified by weights read off the dual of the
//! exact-implementation LP.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, LpError, Result};
use crate::lp::{solve, Constraint, LinearProgram};
use crate::model::{validate, BidderModel, Profile, ReducedForm, ValidationIssue};
use crate::par::Execution;
use crate::rational::Rational;

/// Exhaustive assignment is used for the preset while `(m+1)^n` stays below
/// this.
const EXHAUSTIVE_LIMIT: u128 = 100_000;

/// `Σ c_ij·φ_ij ≤ bound` over one profile's allocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inequality {
    /// `(bidder, item, coefficient)`.
    pub coeffs: Vec<(usize, usize, Rational)>,
    pub bound: Rational,
}

/// Constraints every profile's allocation must satisfy; `φ ≥ 0` is implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilitySystem {
    pub bidders: usize,
    pub items: usize,
    pub inequalities: Vec<Inequality>,
    /// Set for the items-once-plus-demands preset, which admits a
    /// combinatorial max-weight solver.
    demands: Option<Vec<u32>>,
}

impl FeasibilitySystem {
    /// Each item allocated at most once, bidder `i` receiving at most
    /// `demands[i]` items.
    pub fn items_once_with_demands(demands: &[u32], items: usize) -> Self {
        let bidders = demands.len();
        let mut inequalities = Vec::with_capacity(items + bidders);
        for j in 0..items {
            inequalities.push(Inequality {
                coeffs: (0..bidders).map(|i| (i, j, Rational::one())).collect(),
                bound: Rational::one(),
            });
        }
        for (i, &c) in demands.iter().enumerate() {
            inequalities.push(Inequality {
                coeffs: (0..items).map(|j| (i, j, Rational::one())).collect(),
                bound: Rational::from_integer(c.into()),
            });
        }
        FeasibilitySystem {
            bidders,
            items,
            inequalities,
            demands: Some(demands.to_vec()),
        }
    }

    /// Each item allocated at most once, with no demand limit.
    pub fn items_once(bidders: usize, items: usize) -> Self {
        let cap = u32::try_from(items).expect("item count fits in u32");
        Self::items_once_with_demands(&vec![cap; bidders], items)
    }

    /// The preset built from the model's demands.
    pub fn from_model(model: &BidderModel) -> Result<Self> {
        let demands = model.demands.as_ref().ok_or(Error::DemandsMissing)?;
        Ok(Self::items_once_with_demands(demands, model.items))
    }

    pub fn explicit(bidders: usize, items: usize, inequalities: Vec<Inequality>) -> Result<Self> {
        let mut issues = Vec::new();
        for (index, h) in inequalities.iter().enumerate() {
            let mut bad =
                |reason: String| issues.push(ValidationIssue::BadInequality { index, reason });
            if h.bound.is_negative() {
                bad("negative bound".into());
            }
            for (i, j, c) in &h.coeffs {
                if *i >= bidders || *j >= items {
                    bad(format!("variable ({i}, {j}) out of range"));
                } else if c.is_negative() {
                    bad(format!("negative coefficient on ({i}, {j})"));
                }
            }
        }
        if !issues.is_empty() {
            return Err(Error::Invalid(issues));
        }
        Ok(FeasibilitySystem {
            bidders,
            items,
            inequalities,
            demands: None,
        })
    }

    fn var(&self, bidder: usize, item: usize) -> usize {
        bidder * self.items + item
    }

    /// First variable with positive weight that no inequality bounds.
    fn unbounded(&self, weights: &[Vec<Rational>]) -> Option<(usize, usize)> {
        let mut bounded = vec![false; self.bidders * self.items];
        for h in &self.inequalities {
            for (i, j, c) in &h.coeffs {
                if c.is_positive() {
                    bounded[self.var(*i, *j)] = true;
                }
            }
        }
        (0..self.bidders)
            .flat_map(|i| (0..self.items).map(move |j| (i, j)))
            .find(|&(i, j)| weights[i][j].is_positive() && !bounded[self.var(i, j)])
    }
}

/// A maximizer of `Σ W_ij·φ_ij` over one profile's feasible allocations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedAllocation {
    /// `phi[i][j]`.
    pub phi: Vec<Vec<Rational>>,
    pub value: Rational,
}

/// `weights[i][j]` is the weight of giving item `j` to bidder `i`.
pub fn max_weight_allocation(
    weights: &[Vec<Rational>],
    system: &FeasibilitySystem,
) -> Result<WeightedAllocation> {
    if let Some((bidder, item)) = system.unbounded(weights) {
        return Err(Error::UnboundedSystem { bidder, item });
    }
    let m = system.bidders as u128;
    let fits = (0..system.items).try_fold(1u128, |acc, _| {
        acc.checked_mul(m + 1).filter(|&v| v <= EXHAUSTIVE_LIMIT)
    });
    match (&system.demands, fits) {
        (Some(demands), Some(_)) => Ok(exhaustive_assignment(weights, demands, system.items)),
        _ => lp_allocation(weights, system),
    }
}

fn exhaustive_assignment(
    weights: &[Vec<Rational>],
    demands: &[u32],
    items: usize,
) -> WeightedAllocation {
    struct Search<'a> {
        weights: &'a [Vec<Rational>],
        left: Vec<u32>,
        current: Vec<Option<usize>>,
        best: Option<(Rational, Vec<Option<usize>>)>,
    }
    impl Search<'_> {
        fn go(&mut self, j: usize, value: Rational) {
            if j == self.current.len() {
                if self.best.as_ref().is_none_or(|(b, _)| value > *b) {
                    self.best = Some((value, self.current.clone()));
                }
                return;
            }
            self.current[j] = None;
            self.go(j + 1, value.clone());
            for i in 0..self.weights.len() {
                if self.left[i] > 0 && self.weights[i][j].is_positive() {
                    self.left[i] -= 1;
                    self.current[j] = Some(i);
                    self.go(j + 1, &value + &self.weights[i][j]);
                    self.left[i] += 1;
                }
            }
            self.current[j] = None;
        }
    }
    let mut s = Search {
        weights,
        left: demands.to_vec(),
        current: vec![None; items],
        best: None,
    };
    s.go(0, Rational::zero());
    let (value, assignment) = s.best.expect("the empty assignment is always available");
    let mut phi = vec![vec![Rational::zero(); items]; weights.len()];
    for (j, a) in assignment.into_iter().enumerate() {
        if let Some(i) = a {
            phi[i][j] = Rational::one();
        }
    }
    WeightedAllocation { phi, value }
}

fn lp_allocation(
    weights: &[Vec<Rational>],
    system: &FeasibilitySystem,
) -> Result<WeightedAllocation> {
    let n = system.bidders * system.items;
    let objective = (0..system.bidders)
        .flat_map(|i| (0..system.items).map(move |j| (i, j)))
        .filter(|&(i, j)| weights[i][j].is_positive())
        .map(|(i, j)| (system.var(i, j), weights[i][j].clone()))
        .collect();
    let mut lp = LinearProgram::new(n).maximize(objective);
    for h in &system.inequalities {
        lp.add(Constraint::le(
            h.coeffs
                .iter()
                .map(|(i, j, c)| (system.var(*i, *j), c.clone()))
                .collect(),
            h.bound.clone(),
        ));
    }
    for (i, row) in weights.iter().enumerate() {
        for (j, w) in row.iter().enumerate() {
            if !w.is_positive() {
                lp.add(Constraint::eq(
                    vec![(system.var(i, j), Rational::one())],
                    Rational::zero(),
                ));
            }
        }
    }
    let sol = solve(&lp)?;
    let phi = (0..system.bidders)
        .map(|i| {
            (0..system.items)
                .map(|j| sol.x[system.var(i, j)].clone())
                .collect()
        })
        .collect();
    Ok(WeightedAllocation {
        phi,
        value: sol.objective,
    })
}

/// Weights `W_ij(A)` violating the feasibility condition, indexed like a
/// reduced form: `weights[j][i][A]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstrictingWeights {
    pub weights: Vec<Vec<Vec<Rational>>>,
    /// `Σ W·π·Pr`.
    pub lhs: Rational,
    /// `Σ_P Pr[P]·max Σ W·φ`, recomputed profile by profile.
    pub rhs: Rational,
    /// Optimum of the exact-implementation LP, strictly below
    /// `Σ π·Pr`.
    pub primal_optimum: Rational,
}

/// Allocation `phi[i][j]` on one profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileAllocation {
    pub types: Vec<usize>,
    pub phi: Vec<Vec<Rational>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneralVerdict {
    /// An ex-post allocation, one per positive-probability profile,
    /// implementing the reduced form exactly.
    Feasible(Vec<ProfileAllocation>),
    Infeasible(ConstrictingWeights),
}

impl GeneralVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, GeneralVerdict::Feasible(_))
    }
}

fn positive_profiles(model: &BidderModel) -> Result<Vec<Profile>> {
    if model.joint.is_none() {
        return Err(Error::JointMissing);
    }
    Ok(model
        .profiles()
        .into_iter()
        .filter(|p| p.prob.is_positive())
        .collect())
}

/// `Σ_{i,j,A} π_ij(A)·Pr[t_i = A]`.
pub fn target_mass(model: &BidderModel, rf: &ReducedForm) -> Rational {
    let mut total = Rational::zero();
    for table in &rf.items {
        for (i, row) in table.iter().enumerate() {
            for (t, v) in row.iter().enumerate() {
                total += v * model.prob(i, t);
            }
        }
    }
    total
}

/// Both sides of the feasibility condition for the given weights
/// (`weights[j][i][A]`), the right side via per-profile max-weight
/// allocations.
pub fn weight_condition(
    model: &BidderModel,
    rf: &ReducedForm,
    system: &FeasibilitySystem,
    weights: &[Vec<Vec<Rational>>],
    exec: Execution,
) -> Result<(Rational, Rational)> {
    let profiles = positive_profiles(model)?;
    let mut lhs = Rational::zero();
    for (j, table) in rf.items.iter().enumerate() {
        for (i, row) in table.iter().enumerate() {
            for (t, v) in row.iter().enumerate() {
                lhs += &weights[j][i][t] * v * model.prob(i, t);
            }
        }
    }
    let parts = exec.map(&profiles, |p| {
        let w: Vec<Vec<Rational>> = (0..model.num_bidders())
            .map(|i| {
                (0..model.items)
                    .map(|j| weights[j][i][p.types[i]].clone())
                    .collect()
            })
            .collect();
        max_weight_allocation(&w, system).map(|a| a.value * &p.prob)
    });
    let mut rhs = Rational::zero();
    for part in parts {
        rhs += part?;
    }
    Ok((lhs, rhs))
}

/// Decides feasibility by solving the exact-implementation LP over every
/// positive-probability profile of the joint distribution.
pub fn check_feasible_general(
    model: &BidderModel,
    rf: &ReducedForm,
    system: &FeasibilitySystem,
) -> Result<GeneralVerdict> {
    check_feasible_general_with(model, rf, system, Execution::default())
}

pub fn check_feasible_general_with(
    model: &BidderModel,
    rf: &ReducedForm,
    system: &FeasibilitySystem,
    exec: Execution,
) -> Result<GeneralVerdict> {
    validate(model, rf).map_err(Error::Invalid)?;
    let profiles = positive_profiles(model)?;
    let (m, n) = (model.num_bidders(), model.items);
    if system.bidders != m || system.items != n {
        return Err(Error::Invalid(vec![ValidationIssue::IndexMismatch(
            format!(
                "feasibility system is {}×{}, model is {m}×{n}",
                system.bidders, system.items
            ),
        )]));
    }
    let var = |p: usize, i: usize, j: usize| (p * m + i) * n + j;
    let mut lp = LinearProgram::new(profiles.len() * m * n).maximize(
        profiles
            .iter()
            .enumerate()
            .flat_map(|(p, prof)| (0..m * n).map(move |k| (p * m * n + k, prof.prob.clone())))
            .collect(),
    );
    // One row per (item, bidder, type), in reduced-form order.
    let mut rows = Vec::new();
    for j in 0..n {
        for i in 0..m {
            for t in 0..model.num_types(i) {
                let coeffs = profiles
                    .iter()
                    .enumerate()
                    .filter(|(_, prof)| prof.types[i] == t)
                    .map(|(p, prof)| (var(p, i, j), prof.prob.clone()))
                    .collect();
                rows.push((j, i, t));
                lp.add(Constraint::le(coeffs, rf.get(j, i, t) * model.prob(i, t)));
            }
        }
    }
    for p in 0..profiles.len() {
        for h in &system.inequalities {
            lp.add(Constraint::le(
                h.coeffs
                    .iter()
                    .map(|(i, j, c)| (var(p, *i, *j), c.clone()))
                    .collect(),
                h.bound.clone(),
            ));
        }
    }
    let sol = solve(&lp)?;
    let target = target_mass(model, rf);
    if sol.objective == target {
        let witness = profiles
            .iter()
            .enumerate()
            .map(|(p, prof)| ProfileAllocation {
                types: prof.types.clone(),
                phi: (0..m)
                    .map(|i| (0..n).map(|j| sol.x[var(p, i, j)].clone()).collect())
                    .collect(),
            })
            .collect();
        return Ok(GeneralVerdict::Feasible(witness));
    }
    let mut weights: Vec<Vec<Vec<Rational>>> = (0..n)
        .map(|_| {
            (0..m)
                .map(|i| vec![Rational::zero(); model.num_types(i)])
                .collect()
        })
        .collect();
    for (r, &(j, i, t)) in rows.iter().enumerate() {
        let y = sol.duals[r]
            .clone()
            .clamp(Rational::zero(), Rational::one());
        weights[j][i][t] = Rational::one() - y;
    }
    let (lhs, rhs) = weight_condition(model, rf, system, &weights, exec)?;
    debug_assert!(lhs > rhs);
    Ok(GeneralVerdict::Infeasible(ConstrictingWeights {
        weights,
        lhs,
        rhs,
        primal_optimum: sol.objective,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FlowNode {
    /// `S(j)`.
    Source(usize),
    /// `I(P)`, indexed into [`FlowInstance::profiles`].
    Profile(usize),
    /// `T(i, A)`.
    Sink(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowEdge {
    pub from: FlowNode,
    pub to: FlowNode,
    pub capacity: Rational,
}

/// `G_ij(A)`: route `demand` from `S(j)` to `T(i, A)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Commodity {
    pub item: usize,
    pub bidder: usize,
    pub ty: usize,
    pub demand: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowInstance {
    pub nodes: Vec<FlowNode>,
    pub edges: Vec<FlowEdge>,
    pub commodities: Vec<Commodity>,
    pub profiles: Vec<Profile>,
}

/// Items feed profiles with capacity `Pr[P]`; each profile feeds the sink
/// of every bidder's realized type with capacity `C_i·Pr[P]`.
pub fn build_flow_instance(model: &BidderModel, rf: &ReducedForm) -> Result<FlowInstance> {
    validate(model, rf).map_err(Error::Invalid)?;
    let demands = model.demands.as_ref().ok_or(Error::DemandsMissing)?;
    if model.joint.is_none() {
        return Err(Error::JointMissing);
    }
    let profiles = model.profiles();
    let (m, n) = (model.num_bidders(), model.items);
    let mut nodes: Vec<FlowNode> = (0..n).map(FlowNode::Source).collect();
    nodes.extend((0..profiles.len()).map(FlowNode::Profile));
    for i in 0..m {
        nodes.extend((0..model.num_types(i)).map(|t| FlowNode::Sink(i, t)));
    }
    let mut edges = Vec::with_capacity((n + m) * profiles.len());
    for j in 0..n {
        for (p, prof) in profiles.iter().enumerate() {
            edges.push(FlowEdge {
                from: FlowNode::Source(j),
                to: FlowNode::Profile(p),
                capacity: prof.prob.clone(),
            });
        }
    }
    for (p, prof) in profiles.iter().enumerate() {
        for (i, &c) in demands.iter().enumerate() {
            edges.push(FlowEdge {
                from: FlowNode::Profile(p),
                to: FlowNode::Sink(i, prof.types[i]),
                capacity: Rational::from_integer(c.into()) * &prof.prob,
            });
        }
    }
    let mut commodities = Vec::new();
    for j in 0..n {
        for i in 0..m {
            for t in 0..model.num_types(i) {
                commodities.push(Commodity {
                    item: j,
                    bidder: i,
                    ty: t,
                    demand: model.prob(i, t) * rf.get(j, i, t),
                });
            }
        }
    }
    Ok(FlowInstance {
        nodes,
        edges,
        commodities,
        profiles,
    })
}

/// Whether every commodity can be routed simultaneously within capacities.
///
/// A commodity only ever uses edges on a path from its source to its sink,
/// so flow variables are created for those edges alone.
pub fn check_flow_feasible(flow: &FlowInstance) -> Result<bool> {
    let mut num_vars = 0;
    // (edge, var) per commodity, plus conservation pairs at profile nodes.
    let mut on_edge: Vec<Vec<usize>> = vec![Vec::new(); flow.edges.len()];
    let mut lp_rows = Vec::new();
    for g in &flow.commodities {
        let mut out_of_source = Vec::new();
        let mut into: Vec<Option<usize>> = vec![None; flow.profiles.len()];
        let mut out: Vec<Option<usize>> = vec![None; flow.profiles.len()];
        for (e, edge) in flow.edges.iter().enumerate() {
            let used = match (edge.from, edge.to) {
                (FlowNode::Source(j), FlowNode::Profile(p)) => {
                    j == g.item && flow.profiles[p].types[g.bidder] == g.ty
                }
                (FlowNode::Profile(_), FlowNode::Sink(i, t)) => i == g.bidder && t == g.ty,
                _ => false,
            };
            if !used {
                continue;
            }
            let v = num_vars;
            num_vars += 1;
            on_edge[e].push(v);
            match (edge.from, edge.to) {
                (FlowNode::Source(_), FlowNode::Profile(p)) => {
                    into[p] = Some(v);
                    out_of_source.push(v);
                }
                (FlowNode::Profile(p), _) => out[p] = Some(v),
                _ => unreachable!(),
            }
        }
        for (a, b) in into.iter().zip(&out) {
            let mut coeffs = Vec::new();
            if let Some(a) = a {
                coeffs.push((*a, Rational::one()));
            }
            if let Some(b) = b {
                coeffs.push((*b, -Rational::one()));
            }
            if !coeffs.is_empty() {
                lp_rows.push(Constraint::eq(coeffs, Rational::zero()));
            }
        }
        lp_rows.push(Constraint::eq(
            out_of_source
                .into_iter()
                .map(|v| (v, Rational::one()))
                .collect(),
            g.demand.clone(),
        ));
    }
    let mut lp = LinearProgram::new(num_vars);
    for c in lp_rows {
        lp.add(c);
    }
    for (e, vars) in on_edge.iter().enumerate() {
        if !vars.is_empty() {
            lp.add(Constraint::le(
                vars.iter().map(|&v| (v, Rational::one())).collect(),
                flow.edges[e].capacity.clone(),
            ));
        }
    }
    match solve(&lp) {
        Ok(_) => Ok(true),
        Err(LpError::Infeasible) => Ok(false),
        Err(e) => Err(e.into()),
    }
}
