//! One function per subcommand. Each returns the JSON report and exit code;
//! input problems come back as [`CliError`].

use std::path::Path;

use border_core::feasibility::{
    check_feasible, check_feasible_iid, check_feasible_multi, Certificate, ConstrictingSet,
};
use border_core::genborder::{
    build_flow_instance, check_feasible_general, check_flow_feasible, target_mass,
    FeasibilitySystem, GeneralVerdict,
};
use border_core::hierarchy::{decompose_all, reduced_form_of, simulate, trace};
use border_core::model::{BidderModel, ReducedForm};
use border_core::optimal::solve_optimal_bic;
use border_core::{Error, Execution, FeasibilityVerdict};
use serde_json::{json, Map, Value};

use crate::schema::{rat, DistributionFile, Instance};
use crate::{load_distribution, load_instance, CliError, Outcome};

/// Simulations up to this many rounds also list every round.
const TRACE_LIMIT: u64 = 100;

fn need_rf(instance: &Instance) -> Result<&ReducedForm, CliError> {
    instance
        .rf
        .as_ref()
        .ok_or_else(|| CliError::Missing("instance has no reduced_form".into()))
}

/// `(item, bidder, type)` of a flat coordinate.
fn decode(model: &BidderModel, coord: usize) -> (usize, usize, usize) {
    let total = model.total_types();
    let (item, mut rest) = (coord / total, coord % total);
    for i in 0..model.num_bidders() {
        if rest < model.num_types(i) {
            return (item, i, rest);
        }
        rest -= model.num_types(i);
    }
    unreachable!("coordinate within the model")
}

fn certificate_json(model: &BidderModel, c: &Certificate) -> Value {
    match &c.set {
        ConstrictingSet::Pairs(pairs) => json!({
            "set": pairs.iter().map(|&(i, t)| json!([i + 1, model.label(i, t)])).collect::<Vec<_>>(),
            "hyperplane": {
                "coeffs": c.hyperplane.coeffs.iter().map(|(k, a)| {
                    let (_, i, t) = decode(model, *k);
                    json!({ "bidder": i + 1, "type": model.label(i, t), "coeff": rat(a) })
                }).collect::<Vec<_>>(),
                "rhs": rat(&c.hyperplane.rhs),
            },
            "lhs": rat(&c.lhs),
            "rhs": rat(&c.rhs),
        }),
        ConstrictingSet::Types(types) => {
            let c_len = model.num_types(0);
            json!({
                "types": types.iter().map(|&t| model.label(0, t)).collect::<Vec<_>>(),
                "set": (0..model.num_bidders())
                    .flat_map(|i| types.iter().map(move |&t| json!([i + 1, model.label(0, t)])))
                    .collect::<Vec<_>>(),
                "hyperplane": {
                    "coeffs": c.hyperplane.coeffs.iter().map(|(k, a)| {
                        json!({ "type": model.label(0, k % c_len), "coeff": rat(a) })
                    }).collect::<Vec<_>>(),
                    "rhs": rat(&c.hyperplane.rhs),
                },
                "lhs": rat(&c.lhs),
                "rhs": rat(&c.rhs),
            })
        }
    }
}

fn verdict_json(model: &BidderModel, v: &FeasibilityVerdict, method: &str) -> Value {
    let mut out = json!({ "item": v.item + 1, "feasible": v.is_feasible(), "method": method });
    if let Some(c) = &v.certificate {
        out["certificate"] = certificate_json(model, c);
    }
    out
}

/// Border feasibility of one item (`item`, numbered from 1) or of all items.
pub fn cmd_check(path: &Path, item: Option<usize>) -> Result<Outcome, CliError> {
    let instance = load_instance(path)?;
    let model = &instance.model;
    let rf = need_rf(&instance)?;
    let items: Vec<usize> = match item {
        Some(k) if k == 0 || k > model.items => return Err(Error::ItemOutOfRange(k).into()),
        Some(k) => vec![k - 1],
        None => (0..model.items).collect(),
    };
    let verdicts: Vec<Value> = match rf.to_symmetric().filter(|_| model.iid) {
        Some(srf) => items
            .iter()
            .map(|&j| check_feasible_iid(model, &srf, j).map(|v| verdict_json(model, &v, "iid")))
            .collect::<Result<_, _>>()?,
        None if items.len() > 1 => check_feasible_multi(model, rf)?
            .iter()
            .map(|v| verdict_json(model, v, "independent"))
            .collect(),
        None => items
            .iter()
            .map(|&j| check_feasible(model, rf, j).map(|v| verdict_json(model, &v, "independent")))
            .collect::<Result<_, _>>()?,
    };
    let feasible = verdicts.iter().all(|v| v["feasible"] == json!(true));
    Ok(Outcome::verdict(
        json!({ "feasible": feasible, "items": verdicts }),
        feasible,
    ))
}

/// Implements the reduced form as a lottery over hierarchical mechanisms
/// per item, optionally writing the distribution file to `out`.
pub fn cmd_decompose(path: &Path, out: Option<&Path>) -> Result<Outcome, CliError> {
    let instance = load_instance(path)?;
    let model = &instance.model;
    let rf = need_rf(&instance)?;
    let dists = match decompose_all(model, rf, Execution::default()) {
        Ok(d) => d,
        Err(Error::InfeasibleReducedForm(v)) => {
            let report =
                json!({ "feasible": false, "items": [verdict_json(model, &v, "independent")] });
            return Ok(Outcome::verdict(report, false));
        }
        Err(e) => return Err(e.into()),
    };
    if reduced_form_of(model, &dists) != *rf {
        return Err(Error::RecompositionMismatch.into());
    }
    let file = DistributionFile::from_distributions(model, &dists);
    let report = serde_json::to_value(&file).expect("distribution file serializes");
    if let Some(out) = out {
        let text = serde_json::to_string_pretty(&file).expect("distribution file serializes");
        std::fs::write(out, text + "\n").map_err(|source| CliError::Io {
            path: out.display().to_string(),
            source,
        })?;
    }
    Ok(Outcome::ok(report))
}

/// Runs the distribution on `rounds` sampled profiles and compares the
/// empirical interim table with the analytic one.
pub fn cmd_simulate(
    path: &Path,
    dist_path: &Path,
    rounds: u64,
    seed: u64,
) -> Result<Outcome, CliError> {
    let instance = load_instance(path)?;
    let model = &instance.model;
    if !model.is_product() {
        return Err(Error::CorrelatedModel.into());
    }
    let dists = load_distribution(dist_path)?.to_distributions(model)?;
    let analytic = reduced_form_of(model, &dists);
    let sim = simulate(model, &dists, rounds, seed, Execution::default());
    let outside = sim.outside_three_sigma(&analytic);
    let mut cells = Vec::new();
    for j in 0..model.items {
        let emp = sim.empirical(j);
        for (i, row) in emp.iter().enumerate() {
            for (t, freq) in row.iter().enumerate() {
                cells.push(json!({
                    "item": j + 1,
                    "bidder": i + 1,
                    "type": model.label(i, t),
                    "reports": sim.reports[i][t],
                    "wins": sim.wins[j][i][t],
                    "empirical": rat(freq),
                    "analytic": rat(analytic.get(j, i, t)),
                    "within_3_sigma": !outside.contains(&(j, i, t)),
                }));
            }
        }
    }
    let mut report = json!({
        "rounds": rounds,
        "seed": seed,
        "cells": cells,
        "max_abs_deviation": rat(&sim.max_deviation(&analytic)),
        "all_within_3_sigma": outside.is_empty(),
    });
    if rounds <= TRACE_LIMIT {
        report["allocations"] = trace(model, &dists, rounds, seed)
            .into_iter()
            .map(|r| {
                json!({
                    "profile": r.profile.iter().enumerate().map(|(i, &t)| model.label(i, t)).collect::<Vec<_>>(),
                    "winners": r.winners.iter().map(|w| w.map(|i| i + 1)).collect::<Vec<_>>(),
                })
            })
            .collect();
    }
    Ok(Outcome::ok(report))
}

/// Revenue-optimal BIC mechanism for the instance's valuations.
pub fn cmd_optimal(path: &Path) -> Result<Outcome, CliError> {
    let instance = load_instance(path)?;
    let valuation = instance
        .valuation
        .as_ref()
        .ok_or_else(|| CliError::Missing("instance has no values".into()))?;
    let sol = solve_optimal_bic(valuation)?;
    let model = &instance.model;
    Ok(Outcome::ok(json!({
        "revenue": rat(&sol.revenue),
        "pi": sol.rf.items.iter().map(|t| t.iter().map(|row| row.iter().map(rat).collect::<Vec<_>>()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "q": sol.q.iter().map(|row| row.iter().map(rat).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "cuts": sol.cuts,
        "distributions": serde_json::to_value(DistributionFile::from_distributions(model, &sol.distributions))
            .expect("distribution file serializes")["distributions"],
    })))
}

/// The model with a joint attached: the given one, or the product of the
/// marginals.
fn with_joint(model: &BidderModel) -> BidderModel {
    if model.joint.is_some() {
        model.clone()
    } else {
        model.clone().with_joint(model.product_joint())
    }
}

fn system_for(instance: &Instance) -> FeasibilitySystem {
    let model = &instance.model;
    match (&instance.system, &model.demands) {
        (Some(s), _) => s.clone(),
        (None, Some(d)) => FeasibilitySystem::items_once_with_demands(d, model.items),
        (None, None) => FeasibilitySystem::items_once(model.num_bidders(), model.items),
    }
}

/// Feasibility under the instance's feasibility system (or its demands),
/// with correlated bidders allowed.
pub fn cmd_general_check(path: &Path) -> Result<Outcome, CliError> {
    let instance = load_instance(path)?;
    let rf = need_rf(&instance)?;
    let model = with_joint(&instance.model);
    let system = system_for(&instance);
    let labels = |types: &[usize]| -> Vec<String> {
        types
            .iter()
            .enumerate()
            .map(|(i, &t)| model.label(i, t).to_string())
            .collect()
    };
    match check_feasible_general(&model, rf, &system)? {
        GeneralVerdict::Feasible(witness) => {
            let witness: Vec<Value> = witness
                .iter()
                .map(|a| {
                    let mut phi = Map::new();
                    for (i, row) in a.phi.iter().enumerate() {
                        for (j, v) in row.iter().enumerate() {
                            if *v != border_core::rational::zero() {
                                phi.insert(format!("{},{}", i + 1, j + 1), json!(rat(v)));
                            }
                        }
                    }
                    json!({ "profile": labels(&a.types), "phi": phi })
                })
                .collect();
            Ok(Outcome::verdict(
                json!({ "feasible": true, "witness": witness }),
                true,
            ))
        }
        GeneralVerdict::Infeasible(cw) => {
            let mut weights = Vec::new();
            for (j, table) in cw.weights.iter().enumerate() {
                for (i, row) in table.iter().enumerate() {
                    for (t, w) in row.iter().enumerate() {
                        weights.push(json!({ "item": j + 1, "bidder": i + 1, "type": model.label(i, t), "weight": rat(w) }));
                    }
                }
            }
            let report = json!({
                "feasible": false,
                "weights": weights,
                "lhs": rat(&cw.lhs),
                "rhs": rat(&cw.rhs),
                "primal_optimum": rat(&cw.primal_optimum),
                "target": rat(&target_mass(&model, rf)),
            });
            Ok(Outcome::verdict(report, false))
        }
    }
}

/// Feasibility as a multi-commodity flow; needs demands.
pub fn cmd_flow_check(path: &Path) -> Result<Outcome, CliError> {
    let instance = load_instance(path)?;
    let rf = need_rf(&instance)?;
    let model = with_joint(&instance.model);
    let flow = build_flow_instance(&model, rf)?;
    let feasible = check_flow_feasible(&flow)?;
    Ok(Outcome::verdict(
        json!({
            "feasible": feasible,
            "nodes": flow.nodes.len(),
            "edges": flow.edges.len(),
            "commodities": flow.commodities.len(),
        }),
        feasible,
    ))
}
