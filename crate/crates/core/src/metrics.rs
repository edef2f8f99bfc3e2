//! Sequential reference implementations of fan-in, fan-out, Jaccard
//! similarity, both LCOM variants and CBO, plus the workload estimate.
//!
//! Every function here is single-threaded. The parallel engine must
//! reproduce these results exactly.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::model::{
    all_properties, ensure_valid, properties_of, ClassId, DependencyTable, MethodId, PropertySet,
    SystemModel,
};

/// One stored similarity: `i < j` and `value` in `(0, 1]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SimilarityEntry {
    pub i: MethodId,
    pub j: MethodId,
    pub value: f64,
}

/// All metric values for one system. Per-method and per-class maps are dense
/// vectors indexed by id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsReport {
    pub fan_in: Vec<u32>,
    pub fan_out: Vec<u32>,
    /// Nonzero similarities only, sorted by `(i, j)`.
    pub similarity: Vec<SimilarityEntry>,
    /// Normalized LCOM in `[0, 1]`.
    pub lcom: Vec<f64>,
    /// Original pair-counting LCOM, clamped at zero.
    pub lcom_ck: Vec<u64>,
    pub cbo: Vec<u32>,
    /// Classes whose normalized LCOM fell back to 0 because they have no
    /// attributes or no methods.
    pub lcom_degenerate: Vec<ClassId>,
}

/// Counts of metric values the suggestion process has to compute in the
/// worst case for `m` methods and `c` classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkloadEstimate {
    pub m: u64,
    pub c: u64,
    pub k_m: u64,
    pub k_a: u64,
    /// fan-in plus fan-out values: `2m`
    pub n_fan: u64,
    /// unordered method pairs: `m(m-1)/2`
    pub n_sim: u64,
    /// each class as is, plus after receiving every method: `c(m+1)`
    pub n_lcom: u64,
    pub n_cbo: u64,
    pub n_total: u64,
}

impl WorkloadEstimate {
    pub fn from_counts(m: u64, c: u64, k_m: u64, k_a: u64) -> Self {
        let n_fan = 2 * m;
        let n_sim = m * m.saturating_sub(1) / 2;
        let n_lcom = c * (m + 1);
        let n_cbo = n_lcom;
        Self {
            m,
            c,
            k_m,
            k_a,
            n_fan,
            n_sim,
            n_lcom,
            n_cbo,
            n_total: n_fan + n_sim + n_lcom + n_cbo,
        }
    }

    /// Worst-case membership comparisons for one fan-in value: `k_m(m-1)`.
    pub fn fan_in_comparisons(&self) -> u64 {
        self.k_m * self.m.saturating_sub(1)
    }

    /// Worst-case element comparisons for one similarity value: `(k_m+k_a)^2`.
    pub fn similarity_comparisons(&self) -> u64 {
        (self.k_m + self.k_a).pow(2)
    }

    /// `n_total` in millions, rounded half-up to one decimal.
    pub fn total_millions_1dp(&self) -> f64 {
        ((self.n_total + 50_000) / 100_000) as f64 / 10.0
    }
}

pub fn estimate_workload(model: &SystemModel, deps: &DependencyTable) -> WorkloadEstimate {
    WorkloadEstimate::from_counts(
        model.n_methods() as u64,
        model.n_classes() as u64,
        deps.max_calls() as u64,
        deps.max_accesses() as u64,
    )
}

/// Number of distinct callers of each method.
pub fn fan_in(model: &SystemModel, deps: &DependencyTable) -> Vec<u32> {
    let mut counts = vec![0u32; model.n_methods()];
    for q in 0..model.n_methods() {
        let caller = MethodId::from(q);
        for &callee in deps.calls(caller) {
            if callee != caller {
                counts[callee.index()] += 1;
            }
        }
    }
    counts
}

/// Number of distinct methods each method calls.
pub fn fan_out(model: &SystemModel, deps: &DependencyTable) -> Vec<u32> {
    (0..model.n_methods())
        .map(|p| deps.calls(MethodId::from(p)).len() as u32)
        .collect()
}

/// `|P ∩ Q| / |P ∪ Q|`, or 0 when both sets are empty. Both engines go
/// through this one expression so their results agree bit for bit.
#[inline]
pub fn jaccard_sets(p: &PropertySet, q: &PropertySet) -> f64 {
    if p.is_empty() || q.is_empty() {
        return 0.0;
    }
    let shared = p.intersection_len(q);
    if shared == 0 {
        return 0.0;
    }
    let union = p.len() + q.len() - shared;
    shared as f64 / union as f64
}

pub fn jaccard(p: MethodId, q: MethodId, deps: &DependencyTable) -> Result<f64, ModelError> {
    if p == q {
        return Err(ModelError::SelfPair(p));
    }
    let props_p = properties_of(p, deps)?;
    let props_q = properties_of(q, deps)?;
    Ok(jaccard_sets(&props_p, &props_q))
}

/// Every pair `i < j` with nonzero similarity, sorted by `(i, j)`.
pub fn all_similarities(model: &SystemModel, deps: &DependencyTable) -> Vec<SimilarityEntry> {
    let mut props = all_properties(deps);
    props.resize_with(model.n_methods(), PropertySet::default);
    let mut out = Vec::new();
    for (i, p) in props.iter().enumerate() {
        if p.is_empty() {
            continue;
        }
        for (j, q) in props.iter().enumerate().skip(i + 1) {
            let value = jaccard_sets(p, q);
            if value > 0.0 {
                out.push(SimilarityEntry {
                    i: MethodId::from(i),
                    j: MethodId::from(j),
                    value,
                });
            }
        }
    }
    out
}

fn members<'a>(
    model: &'a SystemModel,
    class: ClassId,
    membership_override: Option<&'a [MethodId]>,
) -> Result<&'a [MethodId], ModelError> {
    let record = model.class(class)?;
    Ok(membership_override.unwrap_or(&record.method_ids))
}

/// Accesses of `method` that hit attributes owned by `class`.
#[inline]
fn own_accesses(
    model: &SystemModel,
    deps: &DependencyTable,
    class: ClassId,
    method: MethodId,
) -> usize {
    deps.accesses(method)
        .iter()
        .filter(|&&a| model.attribute_owner(a) == Some(class))
        .count()
}

/// True when normalized LCOM of `class` is 0 by convention rather than by
/// measurement: the class has no attributes, or (under the override) no
/// methods.
pub fn lcom_is_degenerate(
    class: ClassId,
    model: &SystemModel,
    membership_override: Option<&[MethodId]>,
) -> Result<bool, ModelError> {
    let record = model.class(class)?;
    let methods = members(model, class, membership_override)?;
    Ok(record.attribute_ids.is_empty() || methods.is_empty())
}

/// `1 - (1/|M|) Σ_m |own attributes accessed by m| / A`, evaluated as
/// `1 - hits / (A·|M|)`. Classes without attributes or methods score 0.
///
/// `membership_override` replaces the class's method set; attributes never
/// move.
pub fn lcom_normalized(
    class: ClassId,
    model: &SystemModel,
    deps: &DependencyTable,
    membership_override: Option<&[MethodId]>,
) -> Result<f64, ModelError> {
    let n_attrs = model.class(class)?.attribute_ids.len();
    let methods = members(model, class, membership_override)?;
    if n_attrs == 0 || methods.is_empty() {
        return Ok(0.0);
    }
    let hits: usize = methods
        .iter()
        .map(|&m| own_accesses(model, deps, class, m))
        .sum();
    Ok(1.0 - hits as f64 / (n_attrs * methods.len()) as f64)
}

/// Pairs of methods with disjoint own-attribute access sets, minus pairs
/// sharing at least one, clamped at zero.
pub fn lcom_ck(
    class: ClassId,
    model: &SystemModel,
    deps: &DependencyTable,
    membership_override: Option<&[MethodId]>,
) -> Result<u64, ModelError> {
    let methods = members(model, class, membership_override)?;
    if methods.len() < 2 {
        return Ok(0);
    }
    let used: Vec<Vec<_>> = methods
        .iter()
        .map(|&m| {
            deps.accesses(m)
                .iter()
                .copied()
                .filter(|&a| model.attribute_owner(a) == Some(class))
                .collect()
        })
        .collect();
    let (mut disjoint, mut sharing) = (0u64, 0u64);
    for (i, a) in used.iter().enumerate() {
        for b in &used[i + 1..] {
            if a.iter().any(|x| b.binary_search(x).is_ok()) {
                sharing += 1;
            } else {
                disjoint += 1;
            }
        }
    }
    Ok(disjoint.saturating_sub(sharing))
}

/// Distinct other classes whose methods the class's methods call or whose
/// attributes they access. Target ownership is always read from `model`.
pub fn cbo(
    class: ClassId,
    model: &SystemModel,
    deps: &DependencyTable,
    membership_override: Option<&[MethodId]>,
) -> Result<u32, ModelError> {
    let methods = members(model, class, membership_override)?;
    let mut used: Vec<ClassId> = Vec::new();
    for &m in methods {
        used.extend(deps.calls(m).iter().filter_map(|&t| model.method_owner(t)));
        used.extend(
            deps.accesses(m)
                .iter()
                .filter_map(|&a| model.attribute_owner(a)),
        );
    }
    used.sort_unstable();
    used.dedup();
    Ok(used.iter().filter(|&&owner| owner != class).count() as u32)
}

/// Every metric for a validated system, computed on the calling thread.
pub fn full_report(
    model: &SystemModel,
    deps: &DependencyTable,
) -> Result<MetricsReport, ModelError> {
    ensure_valid(model, deps)?;
    let mut report = MetricsReport {
        fan_in: fan_in(model, deps),
        fan_out: fan_out(model, deps),
        similarity: all_similarities(model, deps),
        ..MetricsReport::default()
    };
    for class in model.classes() {
        report
            .lcom
            .push(lcom_normalized(class.id, model, deps, None)?);
        report.lcom_ck.push(lcom_ck(class.id, model, deps, None)?);
        report.cbo.push(cbo(class.id, model, deps, None)?);
    }
    report.lcom_degenerate = degenerate_classes(model);
    Ok(report)
}

pub(crate) fn degenerate_classes(model: &SystemModel) -> Vec<ClassId> {
    model
        .classes()
        .iter()
        .filter(|c| c.attribute_ids.is_empty() || c.method_ids.is_empty())
        .map(|c| c.id)
        .collect()
}
