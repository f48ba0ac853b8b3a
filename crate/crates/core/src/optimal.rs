//! Revenue-optimal Bayesian incentive compatible mechanisms for additive
//! independent bidders with finitely many types.
//!
//! The LP ranges over interim allocations `π_ij(A)` and interim prices
//! `q_i(A)` with IR and BIC written out explicitly; feasibility of each
//! item's interim table is imposed lazily, adding the violated Border
//! inequality found by the feasibility check as a cut.

use std::collections::HashSet;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::feasibility::check_feasible_multi_with;
use crate::hierarchy::decompose_all;
use crate::lp::{iteration_cap, solve_lazy, Constraint, LinearProgram};
use crate::model::{Bidder, BidderModel, MechanismDistribution, ReducedForm, ValidationIssue};
use crate::par::Execution;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuedType {
    pub label: String,
    pub prob: Rational,
    /// Additive value for each item.
    pub values: Vec<Rational>,
}

/// Independent bidders, each with a finite distribution over value vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuationModel {
    pub bidders: Vec<Vec<ValuedType>>,
    pub items: usize,
}

impl ValuationModel {
    pub fn new(bidders: Vec<Vec<ValuedType>>, items: usize) -> Self {
        ValuationModel { bidders, items }
    }

    /// Convenience constructor from `(label, prob, values)` triples.
    pub fn from_triples(bidders: &[&[(&str, Rational, &[Rational])]], items: usize) -> Self {
        ValuationModel {
            bidders: bidders
                .iter()
                .map(|types| {
                    types
                        .iter()
                        .map(|(l, p, v)| ValuedType {
                            label: (*l).to_string(),
                            prob: p.clone(),
                            values: v.to_vec(),
                        })
                        .collect()
                })
                .collect(),
            items,
        }
    }

    pub fn num_bidders(&self) -> usize {
        self.bidders.len()
    }

    pub fn value(&self, bidder: usize, ty: usize, item: usize) -> &Rational {
        &self.bidders[bidder][ty].values[item]
    }

    /// The underlying type model, without values.
    pub fn type_model(&self) -> BidderModel {
        BidderModel::independent(
            self.bidders
                .iter()
                .map(|types| {
                    Bidder::new(
                        types.iter().map(|t| t.label.clone()).collect(),
                        types.iter().map(|t| t.prob.clone()).collect(),
                    )
                })
                .collect(),
            self.items,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let mut issues = crate::model::validate_model(&self.type_model())
            .err()
            .unwrap_or_default();
        for (i, types) in self.bidders.iter().enumerate() {
            for (t, ty) in types.iter().enumerate() {
                if ty.values.len() != self.items {
                    issues.push(ValidationIssue::BadValue {
                        bidder: i,
                        ty: t,
                        reason: format!("{} values for {} items", ty.values.len(), self.items),
                    });
                }
                if ty.values.iter().any(Signed::is_negative) {
                    issues.push(ValidationIssue::BadValue {
                        bidder: i,
                        ty: t,
                        reason: "negative value".into(),
                    });
                }
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(issues))
        }
    }

    /// `Σ_j v_ij(A)·π_ij(B) − q_i(B)`: the interim utility of type `A`
    /// reporting `B`.
    pub fn utility(
        &self,
        rf: &ReducedForm,
        q: &[Vec<Rational>],
        bidder: usize,
        truth: usize,
        report: usize,
    ) -> Rational {
        let mut u = -q[bidder][report].clone();
        for j in 0..self.items {
            u += self.value(bidder, truth, j) * rf.get(j, bidder, report);
        }
        u
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IncentiveViolation {
    /// Negative truthful utility.
    Participation { bidder: usize, ty: usize },
    /// `truth` gains by reporting `report`.
    Misreport {
        bidder: usize,
        truth: usize,
        report: usize,
    },
}

/// Every IR and BIC inequality that `(rf, q)` violates, checked exactly.
pub fn incentive_violations(
    model: &ValuationModel,
    rf: &ReducedForm,
    q: &[Vec<Rational>],
) -> Vec<IncentiveViolation> {
    let mut out = Vec::new();
    for (i, types) in model.bidders.iter().enumerate() {
        for a in 0..types.len() {
            let truthful = model.utility(rf, q, i, a, a);
            if truthful.is_negative() {
                out.push(IncentiveViolation::Participation { bidder: i, ty: a });
            }
            for b in (0..types.len()).filter(|&b| b != a) {
                if model.utility(rf, q, i, a, b) > truthful {
                    out.push(IncentiveViolation::Misreport {
                        bidder: i,
                        truth: a,
                        report: b,
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BICMechanismSolution {
    pub rf: ReducedForm,
    /// Interim price `q[i][A]`.
    pub q: Vec<Vec<Rational>>,
    pub revenue: Rational,
    /// One implementing distribution per item.
    pub distributions: Vec<MechanismDistribution>,
    /// Feasibility cuts added beyond the initial relaxation.
    pub cuts: usize,
}

/// Maximizes expected revenue over IR, BIC, feasible interim mechanisms and
/// returns an implementation of the optimum.
pub fn solve_optimal_bic(model: &ValuationModel) -> Result<BICMechanismSolution> {
    model.validate()?;
    let types = model.type_model();
    let total = types.total_types();
    let offsets = types.offsets();
    let n = model.items;
    let pi_var = |j: usize, i: usize, a: usize| types.coord(j, i, a);
    let q_var = |i: usize, a: usize| n * total + offsets[i] + a;
    let num_vars = (n + 1) * total;

    let objective = (0..model.num_bidders())
        .flat_map(|i| (0..types.num_types(i)).map(move |a| (i, a)))
        .map(|(i, a)| (q_var(i, a), types.prob(i, a).clone()))
        .collect();
    let mut lp = LinearProgram::new(num_vars).maximize(objective);
    for i in 0..model.num_bidders() {
        for a in 0..types.num_types(i) {
            lp.set_free(q_var(i, a));
            for j in 0..n {
                lp.add(Constraint::le(
                    vec![(pi_var(j, i, a), Rational::one())],
                    Rational::one(),
                ));
            }
        }
    }
    // Truthful utility minus deviation utility, as coefficients.
    let gain = |i: usize, a: usize, b: Option<usize>| {
        let mut coeffs: Vec<(usize, Rational)> = (0..n)
            .map(|j| (pi_var(j, i, a), model.value(i, a, j).clone()))
            .collect();
        coeffs.push((q_var(i, a), -Rational::one()));
        if let Some(b) = b {
            coeffs.extend((0..n).map(|j| (pi_var(j, i, b), -model.value(i, a, j))));
            coeffs.push((q_var(i, b), Rational::one()));
        }
        coeffs
    };
    for i in 0..model.num_bidders() {
        for a in 0..types.num_types(i) {
            lp.add(Constraint::ge(gain(i, a, None), Rational::zero()));
            for b in (0..types.num_types(i)).filter(|&b| b != a) {
                lp.add(Constraint::ge(gain(i, a, Some(b)), Rational::zero()));
            }
        }
    }
    for j in 0..n {
        let coeffs = (0..model.num_bidders())
            .flat_map(|i| (0..types.num_types(i)).map(move |a| (i, a)))
            .map(|(i, a)| (pi_var(j, i, a), types.prob(i, a).clone()))
            .collect();
        lp.add(Constraint::le(coeffs, Rational::one()));
    }

    let table_of = |x: &[Rational]| {
        ReducedForm::new(
            (0..n)
                .map(|j| {
                    (0..model.num_bidders())
                        .map(|i| {
                            (0..types.num_types(i))
                                .map(|a| x[pi_var(j, i, a)].clone())
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        )
    };
    let mut seen = HashSet::new();
    let mut oracle_error = None;
    let lazy = solve_lazy(&lp, iteration_cap(), |x| {
        let verdicts = match check_feasible_multi_with(&types, &table_of(x), Execution::Sequential)
        {
            Ok(v) => v,
            Err(e) => {
                oracle_error = Some(e);
                return Vec::new();
            }
        };
        verdicts
            .into_iter()
            .filter_map(|v| v.certificate)
            .filter(|c| seen.insert(c.hyperplane.clone()))
            .map(|c| Constraint::le(c.hyperplane.coeffs, c.hyperplane.rhs))
            .collect()
    })?;
    if let Some(e) = oracle_error {
        return Err(e);
    }
    let x = &lazy.solution.x;
    let rf = table_of(x);
    let q: Vec<Vec<Rational>> = (0..model.num_bidders())
        .map(|i| {
            (0..types.num_types(i))
                .map(|a| x[q_var(i, a)].clone())
                .collect()
        })
        .collect();
    let distributions = decompose_all(&types, &rf, Execution::default())?;
    Ok(BICMechanismSolution {
        rf,
        q,
        revenue: lazy.solution.objective,
        distributions,
        cuts: lazy.cuts.len(),
    })
}
