//! On-disk JSON formats. Every rational is a string `"a/b"`; bidders and
//! items are numbered from 1.

use std::collections::BTreeMap;
use std::sync::Arc;

use border_core::genborder::{FeasibilitySystem, Inequality};
use border_core::model::{
    validate_model, Bidder, BidderModel, HierarchicalMechanism, JointDistribution,
    MechanismDistribution, Rank, ReducedForm, WeightedMechanism,
};
use border_core::optimal::{ValuationModel, ValuedType};
use border_core::{format_rational, parse_rational, Rational};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub bidders: Vec<BidderSpec>,
    pub items: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub iid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demands: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint: Option<Vec<JointEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced_form: Option<ReducedFormSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasibility_system: Option<Vec<InequalitySpec>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BidderSpec {
    pub types: Vec<TypeSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeSpec {
    pub label: String,
    pub prob: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointEntry {
    pub profile: Vec<String>,
    pub prob: String,
}

/// `pi[item][bidder][type]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedFormSpec {
    pub pi: Vec<Vec<Vec<String>>>,
}

/// `coeffs` maps `"bidder,item"` to a coefficient.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalitySpec {
    pub coeffs: BTreeMap<String, String>,
    pub bound: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionFile {
    pub distributions: Vec<ItemDistribution>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItemDistribution {
    pub item: usize,
    pub entries: Vec<EntrySpec>,
}

/// `ranks` maps `"bidder/label"` to a level or `"LOSE"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntrySpec {
    pub weight: String,
    pub ranks: BTreeMap<String, RankSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RankSpec {
    Level(u32),
    Lose(LoseTag),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum LoseTag {
    #[serde(rename = "LOSE")]
    Lose,
}

/// A parsed instance with whatever optional parts it carries.
#[derive(Debug, Clone)]
pub struct Instance {
    pub model: BidderModel,
    pub rf: Option<ReducedForm>,
    pub valuation: Option<ValuationModel>,
    pub system: Option<FeasibilitySystem>,
}

struct Issues(Vec<String>);

impl Issues {
    fn rational(&mut self, text: &str, context: impl FnOnce() -> String) -> Rational {
        match parse_rational(text) {
            Ok(r) => r,
            Err(e) => {
                self.0.push(format!("{}: {e}", context()));
                border_core::rational::zero()
            }
        }
    }
}

pub fn rat(value: &Rational) -> String {
    format_rational(value)
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<Instance, CliError> {
        let mut issues = Issues(Vec::new());
        let bidders: Vec<Bidder> = self
            .bidders
            .iter()
            .enumerate()
            .map(|(i, b)| {
                Bidder::new(
                    b.types.iter().map(|t| t.label.clone()).collect(),
                    b.types
                        .iter()
                        .map(|t| {
                            issues.rational(&t.prob, || {
                                format!("bidder {} type {} prob", i + 1, t.label)
                            })
                        })
                        .collect(),
                )
            })
            .collect();
        let shared = self.iid && bidders.windows(2).all(|w| w[0] == w[1]);
        let mut model = if shared && !bidders.is_empty() {
            BidderModel::iid(bidders.len(), bidders[0].clone(), self.items)
        } else {
            let mut m = BidderModel::independent(bidders, self.items);
            m.iid = self.iid;
            m
        };
        if let Some(d) = self.demands.clone() {
            model = model.with_demands(d);
        }
        if let Some(joint) = &self.joint {
            let mut profiles = Vec::with_capacity(joint.len());
            for (k, e) in joint.iter().enumerate() {
                let types: Option<Vec<usize>> = if e.profile.len() == model.num_bidders() {
                    e.profile
                        .iter()
                        .enumerate()
                        .map(|(i, l)| model.type_index(i, l))
                        .collect()
                } else {
                    None
                };
                let prob = issues.rational(&e.prob, || format!("joint entry {} prob", k + 1));
                match types {
                    Some(t) => profiles.push((t, prob)),
                    None => issues
                        .0
                        .push(format!("joint entry {} names unknown types", k + 1)),
                }
            }
            model = model.with_joint(JointDistribution { profiles });
        }
        if let Err(list) = validate_model(&model) {
            issues.0.extend(list.iter().map(|i| i.to_string()));
        }

        let rf = self.reduced_form.as_ref().map(|spec| {
            ReducedForm::new(
                spec.pi
                    .iter()
                    .enumerate()
                    .map(|(j, table)| {
                        table
                            .iter()
                            .enumerate()
                            .map(|(i, row)| {
                                row.iter()
                                    .enumerate()
                                    .map(|(t, v)| {
                                        issues.rational(v, || {
                                            format!(
                                                "pi item {} bidder {} type {}",
                                                j + 1,
                                                i + 1,
                                                t + 1
                                            )
                                        })
                                    })
                                    .collect()
                            })
                            .collect()
                    })
                    .collect(),
            )
        });
        if let Some(rf) = &rf {
            if let Err(list) = border_core::validate(&model, rf) {
                for i in list {
                    let text = i.to_string();
                    if !issues.0.contains(&text) {
                        issues.0.push(text);
                    }
                }
            }
        }

        let has_values = self
            .bidders
            .iter()
            .any(|b| b.types.iter().any(|t| t.values.is_some()));
        let valuation = if has_values {
            let mut bidders = Vec::with_capacity(self.bidders.len());
            for (i, b) in self.bidders.iter().enumerate() {
                let mut types = Vec::with_capacity(b.types.len());
                for (t, spec) in b.types.iter().enumerate() {
                    let Some(values) = &spec.values else {
                        issues.0.push(format!(
                            "bidder {} type {} has no values",
                            i + 1,
                            spec.label
                        ));
                        continue;
                    };
                    types.push(ValuedType {
                        label: spec.label.clone(),
                        prob: model.prob(i, t).clone(),
                        values: values
                            .iter()
                            .enumerate()
                            .map(|(j, v)| {
                                issues.rational(v, || {
                                    format!("bidder {} type {} value {}", i + 1, spec.label, j + 1)
                                })
                            })
                            .collect(),
                    });
                }
                bidders.push(types);
            }
            let v = ValuationModel::new(bidders, self.items);
            if let Err(border_core::Error::Invalid(list)) = v.validate() {
                for i in list {
                    let text = i.to_string();
                    if !issues.0.contains(&text) {
                        issues.0.push(text);
                    }
                }
            }
            Some(v)
        } else {
            None
        };

        let system = match &self.feasibility_system {
            None => None,
            Some(list) => {
                let mut inequalities = Vec::with_capacity(list.len());
                for (k, h) in list.iter().enumerate() {
                    let mut coeffs = Vec::new();
                    for (key, c) in &h.coeffs {
                        let parsed = key.split_once(',').and_then(|(a, b)| {
                            Some((
                                a.trim().parse::<usize>().ok()?,
                                b.trim().parse::<usize>().ok()?,
                            ))
                        });
                        match parsed {
                            Some((i, j)) if i >= 1 && j >= 1 => {
                                let c = issues.rational(c, || {
                                    format!("inequality {} coefficient {key}", k + 1)
                                });
                                coeffs.push((i - 1, j - 1, c));
                            }
                            _ => issues.0.push(format!(
                                "inequality {}: key `{key}` is not `bidder,item`",
                                k + 1
                            )),
                        }
                    }
                    let bound = issues.rational(&h.bound, || format!("inequality {} bound", k + 1));
                    inequalities.push(Inequality { coeffs, bound });
                }
                match FeasibilitySystem::explicit(model.num_bidders(), self.items, inequalities) {
                    Ok(s) => Some(s),
                    Err(border_core::Error::Invalid(list)) => {
                        issues.0.extend(list.iter().map(|i| i.to_string()));
                        None
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        };

        if !issues.0.is_empty() {
            return Err(CliError::Invalid(issues.0));
        }
        Ok(Instance {
            model,
            rf,
            valuation,
            system,
        })
    }
}

pub fn rank_key(model: &BidderModel, bidder: usize, ty: usize) -> String {
    format!("{}/{}", bidder + 1, model.label(bidder, ty))
}

impl DistributionFile {
    pub fn from_distributions(model: &BidderModel, dists: &[MechanismDistribution]) -> Self {
        DistributionFile {
            distributions: dists
                .iter()
                .map(|d| ItemDistribution {
                    item: d.item + 1,
                    entries: d
                        .entries
                        .iter()
                        .map(|e| EntrySpec {
                            weight: rat(&e.weight),
                            ranks: (0..model.num_bidders())
                                .flat_map(|i| (0..model.num_types(i)).map(move |t| (i, t)))
                                .map(|(i, t)| {
                                    let spec = match e.mechanism.rank(i, t) {
                                        Rank::Level(l) => RankSpec::Level(l),
                                        Rank::Lose => RankSpec::Lose(LoseTag::Lose),
                                    };
                                    (rank_key(model, i, t), spec)
                                })
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// One distribution per item of the model, in item order.
    pub fn to_distributions(
        &self,
        model: &BidderModel,
    ) -> Result<Vec<MechanismDistribution>, CliError> {
        let mut issues = Issues(Vec::new());
        let mut by_item: Vec<Option<MechanismDistribution>> = vec![None; model.items];
        for d in &self.distributions {
            if d.item == 0 || d.item > model.items {
                issues
                    .0
                    .push(format!("distribution for unknown item {}", d.item));
                continue;
            }
            let mut entries = Vec::with_capacity(d.entries.len());
            for (k, e) in d.entries.iter().enumerate() {
                let weight = issues.rational(&e.weight, || {
                    format!("item {} entry {} weight", d.item, k + 1)
                });
                let mut ranks: Vec<Vec<Option<Rank>>> = (0..model.num_bidders())
                    .map(|i| vec![None; model.num_types(i)])
                    .collect();
                for (key, spec) in &e.ranks {
                    let slot = key.split_once('/').and_then(|(b, l)| {
                        let i = b.parse::<usize>().ok()?.checked_sub(1)?;
                        if i >= model.num_bidders() {
                            return None;
                        }
                        Some((i, model.type_index(i, l)?))
                    });
                    match slot {
                        Some((i, t)) => {
                            ranks[i][t] = Some(match spec {
                                RankSpec::Level(0) => {
                                    issues.0.push(format!(
                                        "item {} entry {}: level 0 at `{key}`",
                                        d.item,
                                        k + 1
                                    ));
                                    Rank::Lose
                                }
                                RankSpec::Level(l) => Rank::Level(*l),
                                RankSpec::Lose(_) => Rank::Lose,
                            })
                        }
                        None => issues.0.push(format!(
                            "item {} entry {}: unknown type `{key}`",
                            d.item,
                            k + 1
                        )),
                    }
                }
                let mut rows = Vec::with_capacity(ranks.len());
                for (i, row) in ranks.into_iter().enumerate() {
                    let mut out = Vec::with_capacity(row.len());
                    for (t, r) in row.into_iter().enumerate() {
                        match r {
                            Some(r) => out.push(r),
                            None => {
                                issues.0.push(format!(
                                    "item {} entry {}: no rank for `{}`",
                                    d.item,
                                    k + 1,
                                    rank_key(model, i, t)
                                ));
                                out.push(Rank::Lose);
                            }
                        }
                    }
                    rows.push(out);
                }
                entries.push(WeightedMechanism {
                    weight,
                    mechanism: HierarchicalMechanism::new(rows),
                });
            }
            let dist = MechanismDistribution {
                item: d.item - 1,
                entries,
            };
            if let Err(list) = dist.validate(model) {
                issues
                    .0
                    .extend(list.iter().map(|i| format!("item {}: {i}", d.item)));
            }
            if by_item[d.item - 1].replace(dist).is_some() {
                issues
                    .0
                    .push(format!("item {} has two distributions", d.item));
            }
        }
        let out: Vec<MechanismDistribution> = by_item
            .into_iter()
            .enumerate()
            .filter_map(|(j, d)| {
                if d.is_none() {
                    issues.0.push(format!("no distribution for item {}", j + 1));
                }
                d
            })
            .collect();
        if issues.0.is_empty() {
            Ok(out)
        } else {
            Err(CliError::Invalid(issues.0))
        }
    }
}

/// The instance file describing `model` (and optionally `rf`).
pub fn instance_file(model: &BidderModel, rf: Option<&ReducedForm>) -> InstanceFile {
    InstanceFile {
        bidders: model
            .bidders
            .iter()
            .map(|b: &Arc<Bidder>| BidderSpec {
                types: b
                    .labels
                    .iter()
                    .zip(&b.probs)
                    .map(|(l, p)| TypeSpec {
                        label: l.clone(),
                        prob: rat(p),
                        values: None,
                    })
                    .collect(),
            })
            .collect(),
        items: model.items,
        iid: model.iid,
        demands: model.demands.clone(),
        joint: model.joint.as_ref().map(|j| {
            j.profiles
                .iter()
                .map(|(types, p)| JointEntry {
                    profile: types
                        .iter()
                        .enumerate()
                        .map(|(i, &t)| model.label(i, t).to_string())
                        .collect(),
                    prob: rat(p),
                })
                .collect()
        }),
        reduced_form: rf.map(|rf| ReducedFormSpec {
            pi: rf
                .items
                .iter()
                .map(|t| t.iter().map(|row| row.iter().map(rat).collect()).collect())
                .collect(),
        }),
        feasibility_system: None,
    }
}
