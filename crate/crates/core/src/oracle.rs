//! Brute-force reference implementations for tiny instances: explicit
//! per-profile allocation LPs and exhaustive mechanism enumeration. Every
//! entry point refuses instances beyond a hard size cap.

use num_traits::{One, Zero};

use crate::error::{Error, LpError, Result};
use crate::genborder::FeasibilitySystem;
use crate::lp::{solve, Constraint, LinearProgram};
use crate::model::{validate, BidderModel, HierarchicalMechanism, Rank, ReducedForm};
use crate::optimal::ValuationModel;
use crate::rational::Rational;

/// Largest number of explicit allocation variables `φ_ij(P)`.
pub const MAX_ALLOCATION_VARS: usize = 2000;
/// Largest type count accepted by [`enumerate_mechanisms`].
pub const MAX_ENUMERATION_TYPES: usize = 8;

/// Explicit allocation `φ_ij(P)` for every profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitAllocation {
    pub profiles: Vec<Vec<usize>>,
    /// `phi[p][i][j]`.
    pub phi: Vec<Vec<Vec<Rational>>>,
}

fn too_large(what: &str, got: usize, cap: usize) -> Error {
    Error::InstanceTooLarge(format!("{what}: {got} exceeds the cap of {cap}"))
}

/// Whether some explicit allocation meeting `system` at every profile
/// implements `rf` exactly. Returns the allocation when one exists.
pub fn brute_force_feasible(
    model: &BidderModel,
    rf: &ReducedForm,
    system: &FeasibilitySystem,
) -> Result<Option<ExplicitAllocation>> {
    validate(model, rf).map_err(Error::Invalid)?;
    let profiles = model.profiles();
    let (m, n) = (model.num_bidders(), model.items);
    let vars = profiles.len() * m * n;
    if vars > MAX_ALLOCATION_VARS {
        return Err(too_large("allocation variables", vars, MAX_ALLOCATION_VARS));
    }
    let var = |p: usize, i: usize, j: usize| (p * m + i) * n + j;
    let mut lp = LinearProgram::new(vars);
    for j in 0..n {
        for i in 0..m {
            for a in 0..model.num_types(i) {
                let coeffs = profiles
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| p.types[i] == a)
                    .map(|(k, p)| (var(k, i, j), p.prob.clone()))
                    .collect();
                lp.add(Constraint::eq(coeffs, rf.get(j, i, a) * model.prob(i, a)));
            }
        }
    }
    for k in 0..profiles.len() {
        for h in &system.inequalities {
            lp.add(Constraint::le(
                h.coeffs
                    .iter()
                    .map(|(i, j, c)| (var(k, *i, *j), c.clone()))
                    .collect(),
                h.bound.clone(),
            ));
        }
    }
    match solve(&lp) {
        Ok(sol) => Ok(Some(ExplicitAllocation {
            phi: (0..profiles.len())
                .map(|k| {
                    (0..m)
                        .map(|i| (0..n).map(|j| sol.x[var(k, i, j)].clone()).collect())
                        .collect()
                })
                .collect(),
            profiles: profiles.into_iter().map(|p| p.types).collect(),
        })),
        Err(LpError::Infeasible) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Optimal expected revenue over IR, BIC mechanisms that allocate each item
/// at most once per profile, with the allocation written out per profile.
pub fn brute_force_optimal_revenue(model: &ValuationModel) -> Result<Rational> {
    model.validate()?;
    let types = model.type_model();
    let profiles = types.product_profiles();
    let (m, n) = (types.num_bidders(), types.items);
    let phi_vars = profiles.len() * m * n;
    if phi_vars > MAX_ALLOCATION_VARS {
        return Err(too_large(
            "allocation variables",
            phi_vars,
            MAX_ALLOCATION_VARS,
        ));
    }
    let offsets = types.offsets();
    let phi = |p: usize, i: usize, j: usize| (p * m + i) * n + j;
    let price = |i: usize, a: usize| phi_vars + offsets[i] + a;
    let mut lp = LinearProgram::new(phi_vars + types.total_types()).maximize(
        (0..m)
            .flat_map(|i| (0..types.num_types(i)).map(move |a| (i, a)))
            .map(|(i, a)| (price(i, a), types.prob(i, a).clone()))
            .collect(),
    );
    for i in 0..m {
        for a in 0..types.num_types(i) {
            lp.set_free(price(i, a));
        }
    }
    // `Pr[t_i = a] · Σ_j v_j · π_ij(a)` written over φ, scaled by Pr[t_i = a]
    // so the coefficients are plain profile probabilities.
    let value_terms =
        |i: usize, report: usize, truth: usize, sign: &Rational| -> Vec<(usize, Rational)> {
            let mut out = Vec::new();
            for (k, p) in profiles.iter().enumerate() {
                if p.types[i] != report {
                    continue;
                }
                for j in 0..n {
                    out.push((phi(k, i, j), sign * &p.prob * model.value(i, truth, j)));
                }
            }
            out
        };
    let one = Rational::one();
    let minus = -Rational::one();
    for i in 0..m {
        for a in 0..types.num_types(i) {
            let pa = types.prob(i, a).clone();
            let mut ir = value_terms(i, a, a, &one);
            ir.push((price(i, a), -pa.clone()));
            lp.add(Constraint::ge(ir.clone(), Rational::zero()));
            for b in (0..types.num_types(i)).filter(|&b| b != a) {
                let pb = types.prob(i, b).clone();
                if pb.is_zero() || pa.is_zero() {
                    continue;
                }
                // Both sides multiplied by Pr[a]·Pr[b] to stay in φ-space.
                let mut row: Vec<(usize, Rational)> =
                    ir.iter().map(|(v, c)| (*v, c * &pb)).collect();
                row.extend(
                    value_terms(i, b, a, &minus)
                        .into_iter()
                        .map(|(v, c)| (v, c * &pa)),
                );
                row.push((price(i, b), &pa * &pb));
                lp.add(Constraint::ge(row, Rational::zero()));
            }
        }
    }
    for k in 0..profiles.len() {
        for j in 0..n {
            lp.add(Constraint::le(
                (0..m).map(|i| (phi(k, i, j), one.clone())).collect(),
                one.clone(),
            ));
        }
    }
    Ok(solve(&lp)?.objective)
}

/// Every hierarchical mechanism, up to relabeling levels to `1..=k`, that
/// satisfies `keep`. i.i.d. models enumerate bidder-symmetric mechanisms.
pub fn enumerate_mechanisms<F>(model: &BidderModel, keep: F) -> Result<Vec<HierarchicalMechanism>>
where
    F: Fn(&HierarchicalMechanism) -> bool,
{
    let sizes: Vec<usize> = if model.iid {
        vec![model.num_types(0)]
    } else {
        (0..model.num_bidders())
            .map(|i| model.num_types(i))
            .collect()
    };
    let total: usize = sizes.iter().sum();
    if total > MAX_ENUMERATION_TYPES {
        return Err(too_large("types", total, MAX_ENUMERATION_TYPES));
    }
    let build = |levels: &[Rank]| {
        let mut rows = Vec::with_capacity(sizes.len());
        let mut at = 0;
        for &k in &sizes {
            rows.push(levels[at..at + k].to_vec());
            at += k;
        }
        if model.iid {
            HierarchicalMechanism::symmetric(model.num_bidders(), rows.pop().expect("one row"))
        } else {
            HierarchicalMechanism::new(rows)
        }
    };
    // Ordered set partitions of a subset of the types: peel off the next
    // level's members, or send everything left to LOSE.
    fn go<G: FnMut(&[Rank])>(remaining: u32, level: u32, ranks: &mut Vec<Rank>, emit: &mut G) {
        emit(ranks);
        let mut sub = remaining;
        while sub != 0 {
            for (t, r) in ranks.iter_mut().enumerate() {
                if sub >> t & 1 == 1 {
                    *r = Rank::Level(level);
                }
            }
            go(remaining & !sub, level + 1, ranks, emit);
            for (t, r) in ranks.iter_mut().enumerate() {
                if sub >> t & 1 == 1 {
                    *r = Rank::Lose;
                }
            }
            sub = (sub - 1) & remaining;
        }
    }
    let mut out = Vec::new();
    let mut ranks = vec![Rank::Lose; total];
    go((1u32 << total) - 1, 1, &mut ranks, &mut |r: &[Rank]| {
        let h = build(r);
        if keep(&h) {
            out.push(h);
        }
    });
    Ok(out)
}
