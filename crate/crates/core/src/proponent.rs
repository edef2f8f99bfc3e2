//! Move-method suggestions driven by similarity, cohesion (LCOM) and
//! coupling (CBO).
//!
//! Every candidate move is evaluated as a what-if: the method is removed
//! from the origin's member set and added to the destination's, then LCOM
//! and CBO of both classes are recomputed. Attributes never move, and the
//! owner of every dependency target is read from the unmodified model, so
//! no class other than origin and destination is affected.
//!
//! Suggestions are always computed against the original model; applying a
//! move and re-analysing is left to the caller.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, ModelError};
use crate::metrics::{cbo, lcom_normalized, MetricsReport};
use crate::model::{ClassId, DependencyTable, MethodId, SystemModel};
use crate::parallel::{plan_partition, run_workers};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Similarity,
    Cohesion,
    Coupling,
}

impl Criterion {
    pub const ALL: [Criterion; 3] = [
        Criterion::Similarity,
        Criterion::Cohesion,
        Criterion::Coupling,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Similarity => "similarity",
            Criterion::Cohesion => "cohesion",
            Criterion::Coupling => "coupling",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "similarity" => Ok(Criterion::Similarity),
            "cohesion" => Ok(Criterion::Cohesion),
            "coupling" => Ok(Criterion::Coupling),
            other => Err(format!(
                "unknown criterion {other:?} (expected similarity, cohesion or coupling)"
            )),
        }
    }
}

/// LCOM and CBO of origin and destination before and after one move.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveEffect {
    pub lcom_origin_before: f64,
    pub lcom_origin_after: f64,
    pub lcom_dest_before: f64,
    pub lcom_dest_after: f64,
    pub cbo_origin_before: u32,
    pub cbo_origin_after: u32,
    pub cbo_dest_before: u32,
    pub cbo_dest_after: u32,
    /// The origin is left without methods, so its LCOM is 0 by convention.
    pub origin_emptied: bool,
}

impl MoveEffect {
    pub fn improves_cohesion(&self) -> bool {
        self.lcom_origin_after < self.lcom_origin_before
            && self.lcom_dest_after < self.lcom_dest_before
    }

    pub fn improves_coupling(&self) -> bool {
        self.cbo_origin_after < self.cbo_origin_before
            && self.cbo_dest_after <= self.cbo_dest_before
    }

    /// Whether the recorded values satisfy `criterion`'s improvement rule.
    pub fn satisfies(&self, criterion: Criterion) -> bool {
        match criterion {
            Criterion::Similarity | Criterion::Cohesion => self.improves_cohesion(),
            Criterion::Coupling => self.improves_coupling(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveSuggestion {
    pub method: MethodId,
    pub origin: ClassId,
    pub destination: ClassId,
    /// Criteria that produced this move, in `Criterion` order.
    pub criteria: Vec<Criterion>,
    #[serde(flatten)]
    pub effect: MoveEffect,
}

impl MoveSuggestion {
    fn key(&self) -> (ClassId, MethodId, ClassId) {
        (self.origin, self.method, self.destination)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMode {
    Mean,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub similarity: f64,
    pub lcom: f64,
    pub cbo: f64,
    pub mode: ThresholdMode,
}

impl Thresholds {
    pub fn explicit(similarity: f64, lcom: f64, cbo: f64) -> Result<Self, ConfigError> {
        for (name, v) in [
            ("similarity threshold", similarity),
            ("lcom threshold", lcom),
            ("cbo threshold", cbo),
        ] {
            check_threshold(name, v)?;
        }
        Ok(Self {
            similarity,
            lcom,
            cbo,
            mode: ThresholdMode::Explicit,
        })
    }

    /// Replaces the given values; any replacement switches the mode to
    /// explicit.
    pub fn with_overrides(
        mut self,
        similarity: Option<f64>,
        lcom: Option<f64>,
        cbo: Option<f64>,
    ) -> Result<Self, ConfigError> {
        if let Some(v) = similarity {
            check_threshold("similarity threshold", v)?;
            self.similarity = v;
            self.mode = ThresholdMode::Explicit;
        }
        if let Some(v) = lcom {
            check_threshold("lcom threshold", v)?;
            self.lcom = v;
            self.mode = ThresholdMode::Explicit;
        }
        if let Some(v) = cbo {
            check_threshold("cbo threshold", v)?;
            self.cbo = v;
            self.mode = ThresholdMode::Explicit;
        }
        Ok(self)
    }
}

fn check_threshold(name: &'static str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(ConfigError::NegativeThreshold(name))
    }
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    if n == 0 {
        0.0
    } else {
        values.sum::<f64>() / n as f64
    }
}

/// Means over the report: of the stored (nonzero) similarities, of LCOM over
/// all classes and of CBO over all classes. Empty collections give 0.
pub fn mean_thresholds(report: &MetricsReport) -> Thresholds {
    Thresholds {
        similarity: mean(report.similarity.iter().map(|e| e.value)),
        lcom: mean(report.lcom.iter().copied()),
        cbo: mean(report.cbo.iter().map(|&c| f64::from(c))),
        mode: ThresholdMode::Mean,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdSource {
    Mean,
    Explicit(Thresholds),
}

pub fn compute_thresholds(report: &MetricsReport, source: ThresholdSource) -> Thresholds {
    match source {
        ThresholdSource::Mean => mean_thresholds(report),
        ThresholdSource::Explicit(t) => Thresholds {
            mode: ThresholdMode::Explicit,
            ..t
        },
    }
}

fn check_move(
    method: MethodId,
    origin: ClassId,
    destination: ClassId,
    model: &SystemModel,
) -> Result<(), ModelError> {
    model.class(origin)?;
    model.class(destination)?;
    if origin == destination {
        return Err(ModelError::SameClass(origin));
    }
    if model.method_owner(method) != Some(origin) {
        return Err(ModelError::NotOwner {
            method,
            claimed: origin,
        });
    }
    Ok(())
}

fn without(members: &[MethodId], method: MethodId) -> Vec<MethodId> {
    members.iter().copied().filter(|&m| m != method).collect()
}

fn with(members: &[MethodId], method: MethodId) -> Vec<MethodId> {
    let mut out = members.to_vec();
    if let Err(pos) = out.binary_search(&method) {
        out.insert(pos, method);
    }
    out
}

/// LCOM and CBO of origin and destination if `method` moved from `origin`
/// to `destination`. The model is not modified.
pub fn what_if_move(
    method: MethodId,
    origin: ClassId,
    destination: ClassId,
    model: &SystemModel,
    deps: &DependencyTable,
) -> Result<MoveEffect, ModelError> {
    check_move(method, origin, destination, model)?;
    let before = |class| -> Result<(f64, u32), ModelError> {
        Ok((
            lcom_normalized(class, model, deps, None)?,
            cbo(class, model, deps, None)?,
        ))
    };
    let (lcom_o, cbo_o) = before(origin)?;
    let (lcom_d, cbo_d) = before(destination)?;
    Evaluator { model, deps }.effect(
        method,
        origin,
        destination,
        (lcom_o, cbo_o),
        (lcom_d, cbo_d),
    )
}

struct Evaluator<'a> {
    model: &'a SystemModel,
    deps: &'a DependencyTable,
}

impl Evaluator<'_> {
    fn effect(
        &self,
        method: MethodId,
        origin: ClassId,
        destination: ClassId,
        origin_before: (f64, u32),
        dest_before: (f64, u32),
    ) -> Result<MoveEffect, ModelError> {
        let (origin_after, origin_emptied) = self.origin_after(method, origin)?;
        let dest_after = self.dest_after(method, destination)?;
        Ok(MoveEffect {
            lcom_origin_before: origin_before.0,
            lcom_origin_after: origin_after.0,
            lcom_dest_before: dest_before.0,
            lcom_dest_after: dest_after.0,
            cbo_origin_before: origin_before.1,
            cbo_origin_after: origin_after.1,
            cbo_dest_before: dest_before.1,
            cbo_dest_after: dest_after.1,
            origin_emptied,
        })
    }

    fn origin_after(
        &self,
        method: MethodId,
        origin: ClassId,
    ) -> Result<((f64, u32), bool), ModelError> {
        let members = without(&self.model.class(origin)?.method_ids, method);
        Ok((
            (
                lcom_normalized(origin, self.model, self.deps, Some(&members))?,
                cbo(origin, self.model, self.deps, Some(&members))?,
            ),
            members.is_empty(),
        ))
    }

    fn dest_after(&self, method: MethodId, destination: ClassId) -> Result<(f64, u32), ModelError> {
        let members = with(&self.model.class(destination)?.method_ids, method);
        Ok((
            lcom_normalized(destination, self.model, self.deps, Some(&members))?,
            cbo(destination, self.model, self.deps, Some(&members))?,
        ))
    }
}

/// Whether to keep only the best destination per method or every passing
/// one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Selection {
    #[default]
    Best,
    All,
}

/// Shared inputs of the three criteria.
pub struct SuggestContext<'a> {
    pub model: &'a SystemModel,
    pub deps: &'a DependencyTable,
    pub report: &'a MetricsReport,
    pub thresholds: Thresholds,
    pub selection: Selection,
    pub workers: usize,
}

impl<'a> SuggestContext<'a> {
    pub fn new(
        model: &'a SystemModel,
        deps: &'a DependencyTable,
        report: &'a MetricsReport,
        thresholds: Thresholds,
    ) -> Self {
        Self {
            model,
            deps,
            report,
            thresholds,
            selection: Selection::Best,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_selection(mut self, selection: Selection) -> Self {
        self.selection = selection;
        self
    }

    fn evaluator(&self) -> Evaluator<'a> {
        Evaluator {
            model: self.model,
            deps: self.deps,
        }
    }

    fn before(&self, class: ClassId) -> (f64, u32) {
        (
            self.report.lcom[class.index()],
            self.report.cbo[class.index()],
        )
    }

    fn owner(&self, m: MethodId) -> ClassId {
        self.model
            .method_owner(m)
            .expect("validated model owns every method")
    }

    /// Classes owning a called method of `method`, other than `origin`.
    fn call_owners(&self, method: MethodId, origin: ClassId) -> Vec<ClassId> {
        let mut out: Vec<ClassId> = self
            .deps
            .calls(method)
            .iter()
            .map(|&t| self.owner(t))
            .filter(|&c| c != origin)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Classes whose methods `method` calls or whose attributes it accesses,
    /// other than `origin`.
    fn used_classes(&self, method: MethodId, origin: ClassId) -> Vec<ClassId> {
        let mut out = self.call_owners(method, origin);
        out.extend(
            self.deps
                .accesses(method)
                .iter()
                .filter_map(|&a| self.model.attribute_owner(a))
                .filter(|&c| c != origin),
        );
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Evaluates every candidate for `method`, keeps those passing
    /// `accept`, and returns either all of them or the minimum under `rank`
    /// (ties to the lowest class id).
    fn choose<K: PartialOrd>(
        &self,
        criterion: Criterion,
        method: MethodId,
        origin: ClassId,
        candidates: &[ClassId],
        accept: impl Fn(&MoveEffect) -> bool,
        rank: impl Fn(&MoveEffect) -> K,
    ) -> Result<Vec<MoveSuggestion>, ModelError> {
        if candidates.is_empty() {
            return Ok(Vec::new());
        }
        let evaluator = self.evaluator();
        let origin_before = self.before(origin);
        let (origin_after, origin_emptied) = evaluator.origin_after(method, origin)?;
        let mut passing = Vec::new();
        for &destination in candidates {
            let dest_before = self.before(destination);
            let dest_after = evaluator.dest_after(method, destination)?;
            let effect = MoveEffect {
                lcom_origin_before: origin_before.0,
                lcom_origin_after: origin_after.0,
                lcom_dest_before: dest_before.0,
                lcom_dest_after: dest_after.0,
                cbo_origin_before: origin_before.1,
                cbo_origin_after: origin_after.1,
                cbo_dest_before: dest_before.1,
                cbo_dest_after: dest_after.1,
                origin_emptied,
            };
            if accept(&effect) {
                passing.push(MoveSuggestion {
                    method,
                    origin,
                    destination,
                    criteria: vec![criterion],
                    effect,
                });
            }
        }
        if self.selection == Selection::All {
            return Ok(passing);
        }
        // candidates arrive in ascending class order, so a strict `<` keeps
        // the lowest id among equals
        let mut best: Option<MoveSuggestion> = None;
        for s in passing {
            let better = match &best {
                None => true,
                Some(b) => rank(&s.effect) < rank(&b.effect),
            };
            if better {
                best = Some(s);
            }
        }
        Ok(best.into_iter().collect())
    }

    /// Runs `per_class` over class-id ranges, one range per worker, and
    /// returns the sorted concatenation.
    fn over_classes(
        &self,
        per_class: impl Fn(ClassId) -> Result<Vec<MoveSuggestion>, ModelError> + Sync,
    ) -> Result<Vec<MoveSuggestion>, ModelError> {
        let plan = plan_partition(self.model.n_classes(), self.workers)?;
        let chunks = run_workers(
            &plan,
            |_, range| -> Result<Vec<MoveSuggestion>, ModelError> {
                let mut local = Vec::new();
                for idx in range {
                    local.extend(per_class(ClassId::from(idx))?);
                }
                Ok(local)
            },
        );
        let mut out = Vec::new();
        for chunk in chunks {
            out.extend(chunk?);
        }
        out.sort_by_key(MoveSuggestion::key);
        Ok(out)
    }
}

/// Similar methods on different classes: try moving either one to the
/// other's class, or to a class owning one of its called methods. A move is
/// kept when LCOM strictly drops for both origin and destination.
pub fn suggest_by_similarity(ctx: &SuggestContext<'_>) -> Result<Vec<MoveSuggestion>, ModelError> {
    let threshold = ctx.thresholds.similarity;
    // partner classes per method from qualifying cross-class pairs
    let mut partners: Vec<Vec<ClassId>> = vec![Vec::new(); ctx.model.n_methods()];
    for e in &ctx.report.similarity {
        if e.value <= threshold {
            continue;
        }
        let (owner_i, owner_j) = (ctx.owner(e.i), ctx.owner(e.j));
        if owner_i != owner_j {
            partners[e.i.index()].push(owner_j);
            partners[e.j.index()].push(owner_i);
        }
    }
    let partners = &partners;
    ctx.over_classes(|class| {
        let mut out = Vec::new();
        for &method in &ctx.model.class(class)?.method_ids {
            let mine = &partners[method.index()];
            if mine.is_empty() {
                continue;
            }
            let mut candidates = mine.clone();
            candidates.extend(ctx.call_owners(method, class));
            candidates.sort_unstable();
            candidates.dedup();
            out.extend(ctx.choose(
                Criterion::Similarity,
                method,
                class,
                &candidates,
                MoveEffect::improves_cohesion,
                |e| e.lcom_origin_after + e.lcom_dest_after,
            )?);
        }
        Ok(out)
    })
}

/// Classes with LCOM above threshold give up methods, highest fan-out first,
/// to a class they use, when LCOM strictly drops on both sides.
pub fn suggest_by_cohesion(ctx: &SuggestContext<'_>) -> Result<Vec<MoveSuggestion>, ModelError> {
    let threshold = ctx.thresholds.lcom;
    ctx.over_classes(|class| {
        if ctx.report.lcom[class.index()] <= threshold {
            return Ok(Vec::new());
        }
        let mut methods = ctx.model.class(class)?.method_ids.clone();
        methods.sort_by_key(|m| (std::cmp::Reverse(ctx.report.fan_out[m.index()]), *m));
        let mut out = Vec::new();
        for method in methods {
            let candidates = ctx.used_classes(method, class);
            out.extend(ctx.choose(
                Criterion::Cohesion,
                method,
                class,
                &candidates,
                MoveEffect::improves_cohesion,
                |e| e.lcom_origin_after + e.lcom_dest_after,
            )?);
        }
        Ok(out)
    })
}

/// Classes with CBO above threshold give up methods, highest fan-in plus
/// fan-out first, to a class the method uses, when origin CBO strictly drops
/// and destination CBO does not rise.
pub fn suggest_by_coupling(ctx: &SuggestContext<'_>) -> Result<Vec<MoveSuggestion>, ModelError> {
    let threshold = ctx.thresholds.cbo;
    ctx.over_classes(|class| {
        if f64::from(ctx.report.cbo[class.index()]) <= threshold {
            return Ok(Vec::new());
        }
        let mut methods = ctx.model.class(class)?.method_ids.clone();
        methods.sort_by_key(|m| {
            let i = m.index();
            (
                std::cmp::Reverse(ctx.report.fan_in[i] + ctx.report.fan_out[i]),
                *m,
            )
        });
        let mut out = Vec::new();
        for method in methods {
            let candidates = ctx.used_classes(method, class);
            out.extend(ctx.choose(
                Criterion::Coupling,
                method,
                class,
                &candidates,
                MoveEffect::improves_coupling,
                |e| e.cbo_dest_after,
            )?);
        }
        Ok(out)
    })
}

pub fn suggest(
    ctx: &SuggestContext<'_>,
    criterion: Criterion,
) -> Result<Vec<MoveSuggestion>, ModelError> {
    match criterion {
        Criterion::Similarity => suggest_by_similarity(ctx),
        Criterion::Cohesion => suggest_by_cohesion(ctx),
        Criterion::Coupling => suggest_by_coupling(ctx),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combine {
    #[default]
    Union,
    Intersection,
}

impl FromStr for Combine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "union" => Ok(Combine::Union),
            "intersection" => Ok(Combine::Intersection),
            other => Err(format!(
                "unknown combine mode {other:?} (expected union or intersection)"
            )),
        }
    }
}

/// Runs the selected criteria and merges their moves by
/// `(method, destination)`. Union keeps every move; intersection keeps moves
/// that every selected criterion produced. Merged moves carry all their
/// criterion tags. Output is sorted by `(origin, method, destination)`.
pub fn suggest_all(
    ctx: &SuggestContext<'_>,
    criteria: &[Criterion],
    combine: Combine,
) -> Result<Vec<MoveSuggestion>, ModelError> {
    let mut selected = criteria.to_vec();
    selected.sort_unstable();
    selected.dedup();

    let mut merged: BTreeMap<(MethodId, ClassId), MoveSuggestion> = BTreeMap::new();
    for &criterion in &selected {
        for s in suggest(ctx, criterion)? {
            merged
                .entry((s.method, s.destination))
                .and_modify(|existing| existing.criteria.push(criterion))
                .or_insert(s);
        }
    }
    let mut out: Vec<MoveSuggestion> = merged
        .into_values()
        .filter(|s| combine == Combine::Union || s.criteria.len() == selected.len())
        .collect();
    out.sort_by_key(MoveSuggestion::key);
    Ok(out)
}
