//! Brute-force reference implementations used as test oracles. Everything
//! here works on plain id vectors and `BTreeSet`s, without the library's
//! packed property sets, partitioned engines or candidate generation.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use modmove::ingest::{generate, GeneratorConfig};
use modmove::{DependencyTable, SystemModel};

/// A system as raw ids: per class its attributes and methods, per method its
/// calls and accesses.
#[derive(Debug, Clone)]
pub struct Raw {
    pub class_attrs: Vec<Vec<u32>>,
    pub class_methods: Vec<Vec<u32>>,
    pub calls: Vec<Vec<u32>>,
    pub accesses: Vec<Vec<u32>>,
    pub method_owner: BTreeMap<u32, usize>,
    pub attr_owner: BTreeMap<u32, usize>,
}

impl Raw {
    pub fn of(model: &SystemModel, deps: &DependencyTable) -> Self {
        let mut raw = Raw {
            class_attrs: Vec::new(),
            class_methods: Vec::new(),
            calls: Vec::new(),
            accesses: Vec::new(),
            method_owner: BTreeMap::new(),
            attr_owner: BTreeMap::new(),
        };
        for (k, c) in model.classes().iter().enumerate() {
            raw.class_attrs
                .push(c.attribute_ids.iter().map(|a| a.0).collect());
            raw.class_methods
                .push(c.method_ids.iter().map(|m| m.0).collect());
            for m in &c.method_ids {
                raw.method_owner.insert(m.0, k);
            }
            for a in &c.attribute_ids {
                raw.attr_owner.insert(a.0, k);
            }
        }
        for m in 0..model.n_methods() {
            let id = modmove::MethodId::from(m);
            raw.calls.push(deps.calls(id).iter().map(|t| t.0).collect());
            raw.accesses
                .push(deps.accesses(id).iter().map(|a| a.0).collect());
        }
        raw
    }

    pub fn n_methods(&self) -> usize {
        self.calls.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_methods.len()
    }

    pub fn owner(&self, m: u32) -> usize {
        self.method_owner[&m]
    }

    /// Class memberships after moving `x` from `o` to `d`.
    pub fn moved(&self, x: u32, o: usize, d: usize) -> Vec<Vec<u32>> {
        let mut members = self.class_methods.clone();
        members[o].retain(|&m| m != x);
        members[d].push(x);
        members[d].sort_unstable();
        members
    }
}

pub fn generated(config: &GeneratorConfig) -> (SystemModel, DependencyTable, Raw) {
    let (model, deps) = generate(config).expect("valid generator config");
    let raw = Raw::of(&model, &deps);
    (model, deps, raw)
}

pub fn fan_in(raw: &Raw) -> Vec<u32> {
    (0..raw.n_methods() as u32)
        .map(|p| {
            (0..raw.n_methods())
                .filter(|&q| q as u32 != p && raw.calls[q].contains(&p))
                .count() as u32
        })
        .collect()
}

pub fn fan_out(raw: &Raw) -> Vec<u32> {
    raw.calls
        .iter()
        .enumerate()
        .map(|(q, calls)| {
            calls
                .iter()
                .filter(|&&t| t as usize != q)
                .collect::<BTreeSet<_>>()
                .len() as u32
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prop {
    Method(u32),
    Attr(u32),
}

fn props(raw: &Raw, m: usize) -> BTreeSet<Prop> {
    raw.calls[m]
        .iter()
        .map(|&t| Prop::Method(t))
        .chain(raw.accesses[m].iter().map(|&a| Prop::Attr(a)))
        .collect()
}

pub fn jaccard(raw: &Raw, i: usize, j: usize) -> f64 {
    let (p, q) = (props(raw, i), props(raw, j));
    if p.is_empty() || q.is_empty() {
        return 0.0;
    }
    let shared = p.intersection(&q).count();
    if shared == 0 {
        return 0.0;
    }
    shared as f64 / p.union(&q).count() as f64
}

/// Nonzero similarities for `i < j`, in `(i, j)` order.
pub fn similarities(raw: &Raw) -> Vec<(u32, u32, f64)> {
    let n = raw.n_methods();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let v = jaccard(raw, i, j);
            if v != 0.0 {
                out.push((i as u32, j as u32, v));
            }
        }
    }
    out
}

/// Normalized LCOM as an exact fraction `num / den`.
#[derive(Debug, Clone, Copy)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn lt(self, other: Ratio) -> bool {
        (self.num as u128) * (other.den as u128) < (other.num as u128) * (self.den as u128)
    }

    /// The value the library reports: `1 - hits / (A·|M|)` with a single
    /// division. The degenerate `0/1` evaluates to 0.
    pub fn to_f64(self) -> f64 {
        1.0 - (self.den - self.num) as f64 / self.den as f64
    }
}

/// LCOM of class `k` with method set `members`. Attributes stay
/// with their original class.
pub fn lcom_ratio(raw: &Raw, k: usize, members: &[u32]) -> Ratio {
    let own: BTreeSet<u32> = raw.class_attrs[k].iter().copied().collect();
    if own.is_empty() || members.is_empty() {
        return Ratio { num: 0, den: 1 };
    }
    let hits: u64 = members
        .iter()
        .map(|&m| {
            raw.accesses[m as usize]
                .iter()
                .filter(|a| own.contains(a))
                .count() as u64
        })
        .sum();
    let den = own.len() as u64 * members.len() as u64;
    Ratio {
        num: den - hits,
        den,
    }
}

pub fn lcom(raw: &Raw, k: usize, members: &[u32]) -> f64 {
    lcom_ratio(raw, k, members).to_f64()
}

pub fn lcom_ck(raw: &Raw, k: usize, members: &[u32]) -> u64 {
    let own: BTreeSet<u32> = raw.class_attrs[k].iter().copied().collect();
    let used: Vec<BTreeSet<u32>> = members
        .iter()
        .map(|&m| {
            raw.accesses[m as usize]
                .iter()
                .copied()
                .filter(|a| own.contains(a))
                .collect()
        })
        .collect();
    let (mut p, mut q) = (0i64, 0i64);
    for i in 0..used.len() {
        for j in i + 1..used.len() {
            if used[i].is_disjoint(&used[j]) {
                p += 1;
            } else {
                q += 1;
            }
        }
    }
    (p - q).max(0) as u64
}

/// Classes used by the methods in `members`, other than `k`; ownership of
/// targets comes from the unmodified system.
pub fn used_classes(raw: &Raw, k: usize, members: &[u32]) -> BTreeSet<usize> {
    let mut used = BTreeSet::new();
    for &m in members {
        used.extend(raw.calls[m as usize].iter().map(|t| raw.method_owner[t]));
        used.extend(raw.accesses[m as usize].iter().map(|a| raw.attr_owner[a]));
    }
    used.remove(&k);
    used
}

pub fn cbo(raw: &Raw, k: usize, members: &[u32]) -> u32 {
    used_classes(raw, k, members).len() as u32
}

/// Per-class (lcom, lcom_ck, cbo) for a whole membership assignment.
pub fn class_metrics(raw: &Raw, members: &[Vec<u32>]) -> Vec<(f64, u64, u32)> {
    (0..raw.n_classes())
        .map(|k| {
            (
                lcom(raw, k, &members[k]),
                lcom_ck(raw, k, &members[k]),
                cbo(raw, k, &members[k]),
            )
        })
        .collect()
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OracleThresholds {
    pub similarity: f64,
    pub lcom: f64,
    pub cbo: f64,
}

pub fn mean_thresholds(raw: &Raw) -> OracleThresholds {
    let sims: Vec<f64> = similarities(raw).iter().map(|s| s.2).collect();
    let lcoms: Vec<f64> = (0..raw.n_classes())
        .map(|k| lcom(raw, k, &raw.class_methods[k]))
        .collect();
    let cbos: Vec<f64> = (0..raw.n_classes())
        .map(|k| f64::from(cbo(raw, k, &raw.class_methods[k])))
        .collect();
    OracleThresholds {
        similarity: mean(&sims),
        lcom: mean(&lcoms),
        cbo: mean(&cbos),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    Similarity,
    Cohesion,
    Coupling,
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub method: u32,
    pub origin: usize,
    pub destination: usize,
    pub lcom_sum_after: f64,
    pub cbo_dest_after: u32,
}

/// Every `(method, destination)` pair tested against `kind`'s rule:
/// whether the origin qualifies, whether the destination is related to the
/// method as the rule requires, and whether the metrics improve. Returns
/// the passing pairs, or only the best per method when `best_only`.
pub fn brute_force(
    raw: &Raw,
    t: OracleThresholds,
    kind: Kind,
    best_only: bool,
) -> Vec<(u32, usize, usize)> {
    let mut passing: Vec<Candidate> = Vec::new();
    for x in 0..raw.n_methods() as u32 {
        let o = raw.owner(x);
        let origin_members = &raw.class_methods[o];
        let uses = used_classes(raw, o, &[x]);
        let calls_into: BTreeSet<usize> = raw.calls[x as usize]
            .iter()
            .map(|t| raw.method_owner[t])
            .filter(|&k| k != o)
            .collect();
        let similar: BTreeSet<usize> = (0..raw.n_methods() as u32)
            .filter(|&y| {
                y != x && raw.owner(y) != o && jaccard(raw, x as usize, y as usize) > t.similarity
            })
            .map(|y| raw.owner(y))
            .collect();

        let qualifies = match kind {
            Kind::Similarity => !similar.is_empty(),
            Kind::Cohesion => lcom(raw, o, origin_members) > t.lcom,
            Kind::Coupling => f64::from(cbo(raw, o, origin_members)) > t.cbo,
        };
        if !qualifies {
            continue;
        }
        for d in 0..raw.n_classes() {
            if d == o {
                continue;
            }
            let related = match kind {
                Kind::Similarity => similar.contains(&d) || calls_into.contains(&d),
                Kind::Cohesion | Kind::Coupling => uses.contains(&d),
            };
            if !related {
                continue;
            }
            let after = raw.moved(x, o, d);
            let lo_b = lcom_ratio(raw, o, origin_members);
            let lo_a = lcom_ratio(raw, o, &after[o]);
            let ld_b = lcom_ratio(raw, d, &raw.class_methods[d]);
            let ld_a = lcom_ratio(raw, d, &after[d]);
            let improves = match kind {
                Kind::Similarity | Kind::Cohesion => lo_a.lt(lo_b) && ld_a.lt(ld_b),
                Kind::Coupling => {
                    cbo(raw, o, &after[o]) < cbo(raw, o, origin_members)
                        && cbo(raw, d, &after[d]) <= cbo(raw, d, &raw.class_methods[d])
                }
            };
            if improves {
                passing.push(Candidate {
                    method: x,
                    origin: o,
                    destination: d,
                    lcom_sum_after: lo_a.to_f64() + ld_a.to_f64(),
                    cbo_dest_after: cbo(raw, d, &after[d]),
                });
            }
        }
    }

    let mut out: Vec<(u32, usize, usize)> = if best_only {
        let mut best: BTreeMap<u32, Candidate> = BTreeMap::new();
        for c in passing {
            let replace = match best.get(&c.method) {
                None => true,
                Some(b) => match kind {
                    Kind::Coupling => {
                        (c.cbo_dest_after, c.destination) < (b.cbo_dest_after, b.destination)
                    }
                    _ => {
                        c.lcom_sum_after < b.lcom_sum_after
                            || (c.lcom_sum_after == b.lcom_sum_after
                                && c.destination < b.destination)
                    }
                },
            };
            if replace {
                best.insert(c.method, c);
            }
        }
        best.into_values()
            .map(|c| (c.method, c.origin, c.destination))
            .collect()
    } else {
        passing
            .into_iter()
            .map(|c| (c.method, c.origin, c.destination))
            .collect()
    };
    out.sort_by_key(|&(m, o, d)| (o, m, d));
    out
}
