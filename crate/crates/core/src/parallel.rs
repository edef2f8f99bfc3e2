//! Data-parallel metric computation over contiguous id ranges.
//!
//! Each worker owns one range of ids and writes only to its own local
//! buffer. Similarity results are variable-length, so after every worker
//! has finished, each one reserves a slot range in the shared output by a
//! single fetch-and-add on a cursor and copies its entries there. That
//! reservation is the only point where workers synchronise. Per-class and
//! per-method results have exactly one slot per id and are written straight
//! into disjoint chunks of dense output arrays.

use std::cell::UnsafeCell;
use std::ops::Range;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;

use crate::error::ModelError;
use crate::metrics::{
    cbo, degenerate_classes, jaccard_sets, lcom_ck, lcom_normalized, MetricsReport, SimilarityEntry,
};
use crate::model::{
    all_properties, ensure_valid, ClassId, DependencyTable, MethodId, PropertySet, SystemModel,
};

/// Balanced split of `0..n_items` into one contiguous range per worker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPlan {
    pub n_items: usize,
    pub ranges: Vec<Range<usize>>,
}

impl PartitionPlan {
    pub fn n_workers(&self) -> usize {
        self.ranges.len()
    }
}

/// The first `n_items % n_workers` workers get one extra item. Workers past
/// the last item get empty ranges.
pub fn plan_partition(n_items: usize, n_workers: usize) -> Result<PartitionPlan, ModelError> {
    if n_workers == 0 {
        return Err(ModelError::NoWorkers);
    }
    let base = n_items / n_workers;
    let extra = n_items % n_workers;
    let mut start = 0;
    let ranges = (0..n_workers)
        .map(|w| {
            let len = base + usize::from(w < extra);
            let range = start..start + len;
            start += len;
            range
        })
        .collect();
    Ok(PartitionPlan { n_items, ranges })
}

/// Results accumulated by one worker before compaction.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBuffer<T> {
    pub owner: usize,
    pub entries: Vec<T>,
}

/// Runs `job(worker, range)` for every range of the plan, one thread per
/// worker, and returns the results in worker order. Worker 0 runs on the
/// calling thread.
pub(crate) fn run_workers<T, F>(plan: &PartitionPlan, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, Range<usize>) -> T + Sync,
{
    let job = &job;
    thread::scope(|scope| {
        let handles: Vec<_> = plan
            .ranges
            .iter()
            .enumerate()
            .skip(1)
            .map(|(w, r)| {
                let r = r.clone();
                scope.spawn(move || job(w, r))
            })
            .collect();
        let mut results = Vec::with_capacity(plan.n_workers());
        if let Some(first) = plan.ranges.first() {
            results.push(job(0, first.clone()));
        }
        results.extend(
            handles
                .into_iter()
                .map(|h| h.join().expect("metric worker panicked")),
        );
        results
    })
}

/// Hands each worker the chunk of `out` matching its range and runs
/// `job(range, chunk)` on it.
fn fill_chunks<T, F>(plan: &PartitionPlan, out: &mut [T], job: F)
where
    T: Send,
    F: Fn(Range<usize>, &mut [T]) + Sync,
{
    debug_assert_eq!(out.len(), plan.n_items);
    let job = &job;
    thread::scope(|scope| {
        let mut rest = out;
        let mut inline = None;
        for (w, range) in plan.ranges.iter().enumerate() {
            let (chunk, tail) = std::mem::take(&mut rest).split_at_mut(range.len());
            rest = tail;
            let range = range.clone();
            if w == 0 {
                inline = Some((range, chunk));
            } else {
                scope.spawn(move || job(range, chunk));
            }
        }
        if let Some((range, chunk)) = inline {
            job(range, chunk);
        }
    });
}

/// Shared output region filled through cursor reservations.
struct CompactionTarget<T> {
    cursor: AtomicUsize,
    slots: Vec<UnsafeCell<T>>,
}

// SAFETY: slots are only written through `Reservation`s, and every
// reservation covers a range handed out exactly once by the atomic cursor,
// so no two threads ever touch the same slot.
unsafe impl<T: Send> Sync for CompactionTarget<T> {}

/// A slot range handed out by the cursor. Consumed by `fill`, so each range
/// is written at most once.
struct Reservation {
    start: usize,
    len: usize,
}

impl<T: Copy + Default> CompactionTarget<T> {
    fn with_len(len: usize) -> Self {
        Self {
            cursor: AtomicUsize::new(0),
            slots: (0..len).map(|_| UnsafeCell::new(T::default())).collect(),
        }
    }

    fn reserve(&self, len: usize) -> Reservation {
        let start = self.cursor.fetch_add(len, Ordering::AcqRel);
        assert!(
            start + len <= self.slots.len(),
            "reservation {start}..{} overruns output of {}",
            start + len,
            self.slots.len()
        );
        Reservation { start, len }
    }

    fn fill(&self, reservation: Reservation, entries: &[T]) {
        assert_eq!(reservation.len, entries.len());
        // checked-build hook: nothing lands past the reserved frontier
        debug_assert!(reservation.start + reservation.len <= self.cursor.load(Ordering::Acquire));
        for (k, &entry) in entries.iter().enumerate() {
            // SAFETY: see the `Sync` impl; this range belongs to us alone.
            unsafe { *self.slots[reservation.start + k].get() = entry };
        }
    }

    fn reserved(&self) -> usize {
        self.cursor.load(Ordering::Acquire)
    }

    fn into_vec(self) -> Vec<T> {
        self.slots.into_iter().map(UnsafeCell::into_inner).collect()
    }
}

/// Bookkeeping from one parallel similarity run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarityStats {
    /// Pairs each worker evaluated.
    pub pairs_evaluated: Vec<u64>,
    /// Final value of the reservation cursor.
    pub reserved: usize,
}

/// Worker for the similarity row range `rows`: evaluates `(i, j)` for every
/// owned `i` and every `j > i`, keeping nonzero values.
fn similarity_rows(
    owner: usize,
    rows: Range<usize>,
    props: &[PropertySet],
) -> (LocalBuffer<SimilarityEntry>, u64) {
    let mut entries = Vec::new();
    let mut evaluated = 0u64;
    let n = props.len();
    for i in rows {
        evaluated += (n - i - 1) as u64;
        let p = &props[i];
        if p.is_empty() {
            continue;
        }
        for (j, q) in props.iter().enumerate().skip(i + 1) {
            let value = jaccard_sets(p, q);
            if value > 0.0 {
                entries.push(SimilarityEntry {
                    i: MethodId::from(i),
                    j: MethodId::from(j),
                    value,
                });
            }
        }
    }
    (LocalBuffer { owner, entries }, evaluated)
}

pub fn parallel_similarities(
    model: &SystemModel,
    deps: &DependencyTable,
    n_workers: usize,
) -> Result<Vec<SimilarityEntry>, ModelError> {
    parallel_similarities_with_stats(model, deps, n_workers).map(|(list, _)| list)
}

/// [`parallel_similarities`] plus per-worker pair counts and the final
/// cursor value.
pub fn parallel_similarities_with_stats(
    model: &SystemModel,
    deps: &DependencyTable,
    n_workers: usize,
) -> Result<(Vec<SimilarityEntry>, SimilarityStats), ModelError> {
    let plan = plan_partition(model.n_methods(), n_workers)?;
    let mut props = all_properties(deps);
    props.resize_with(model.n_methods(), PropertySet::default);
    let props = props.as_slice();

    let computed = run_workers(&plan, |w, rows| similarity_rows(w, rows, props));
    // barrier: every worker has finished computing

    let total: usize = computed.iter().map(|(b, _)| b.entries.len()).sum();
    let target = CompactionTarget::with_len(total);
    let mut buffers = Vec::with_capacity(computed.len());
    let mut pairs_evaluated = Vec::with_capacity(computed.len());
    for (buffer, evaluated) in computed {
        pairs_evaluated.push(evaluated);
        buffers.push(buffer);
    }
    let compaction_plan = PartitionPlan {
        n_items: buffers.len(),
        ranges: (0..buffers.len()).map(|w| w..w + 1).collect(),
    };
    run_workers(&compaction_plan, |w, _| {
        let buffer = &buffers[w];
        debug_assert_eq!(buffer.owner, w);
        let slots = target.reserve(buffer.entries.len());
        target.fill(slots, &buffer.entries);
    });

    let reserved = target.reserved();
    debug_assert_eq!(reserved, total);
    let mut list = target.into_vec();
    if !list.is_sorted_by_key(|e| (e.i, e.j)) {
        list.sort_unstable_by_key(|e| (e.i, e.j));
    }
    Ok((
        list,
        SimilarityStats {
            pairs_evaluated,
            reserved,
        },
    ))
}

/// Per-class metric arrays indexed by class id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassMetrics {
    pub lcom: Vec<f64>,
    pub lcom_ck: Vec<u64>,
    pub cbo: Vec<u32>,
}

fn class_values(
    class: ClassId,
    model: &SystemModel,
    deps: &DependencyTable,
) -> Result<(f64, u64, u32), ModelError> {
    Ok((
        lcom_normalized(class, model, deps, None)?,
        lcom_ck(class, model, deps, None)?,
        cbo(class, model, deps, None)?,
    ))
}

pub fn parallel_class_metrics(
    model: &SystemModel,
    deps: &DependencyTable,
    n_workers: usize,
) -> Result<ClassMetrics, ModelError> {
    let plan = plan_partition(model.n_classes(), n_workers)?;
    // (lcom, lcom_ck, cbo) per class
    let mut slots: Vec<Result<(f64, u64, u32), ModelError>> =
        vec![Ok((0.0, 0, 0)); model.n_classes()];
    fill_chunks(&plan, &mut slots, |range, chunk| {
        for (slot, idx) in chunk.iter_mut().zip(range) {
            *slot = class_values(ClassId::from(idx), model, deps);
        }
    });
    let mut out = ClassMetrics {
        lcom: Vec::with_capacity(slots.len()),
        lcom_ck: Vec::with_capacity(slots.len()),
        cbo: Vec::with_capacity(slots.len()),
    };
    for slot in slots {
        let (lcom, ck, coupling) = slot?;
        out.lcom.push(lcom);
        out.lcom_ck.push(ck);
        out.cbo.push(coupling);
    }
    Ok(out)
}

/// Fan-in and fan-out, partitioned over method ids. Fan-in of `p` scans
/// every other method's call set, reading the shared table only.
pub fn parallel_fan_metrics(
    model: &SystemModel,
    deps: &DependencyTable,
    n_workers: usize,
) -> Result<(Vec<u32>, Vec<u32>), ModelError> {
    let n = model.n_methods();
    let plan = plan_partition(n, n_workers)?;
    let mut fans = vec![(0u32, 0u32); n];
    fill_chunks(&plan, &mut fans, |range, chunk| {
        for (slot, p) in chunk.iter_mut().zip(range) {
            let target = MethodId::from(p);
            let fan_in = (0..n)
                .filter(|&q| q != p && deps.calls(MethodId::from(q)).binary_search(&target).is_ok())
                .count() as u32;
            *slot = (fan_in, deps.calls(target).len() as u32);
        }
    });
    Ok(fans.into_iter().unzip())
}

/// Every metric for a validated system, computed by `n_workers` workers.
pub fn parallel_report(
    model: &SystemModel,
    deps: &DependencyTable,
    n_workers: usize,
) -> Result<MetricsReport, ModelError> {
    if n_workers == 0 {
        return Err(ModelError::NoWorkers);
    }
    ensure_valid(model, deps)?;
    let (fan_in, fan_out) = parallel_fan_metrics(model, deps, n_workers)?;
    let similarity = parallel_similarities(model, deps, n_workers)?;
    let classes = parallel_class_metrics(model, deps, n_workers)?;
    Ok(MetricsReport {
        fan_in,
        fan_out,
        similarity,
        lcom: classes.lcom,
        lcom_ck: classes.lcom_ck,
        cbo: classes.cbo,
        lcom_degenerate: degenerate_classes(model),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{generate, GeneratorConfig};
    use crate::metrics::{all_similarities, full_report};
    use crate::model::ClassRecord;

    fn sizes(plan: &PartitionPlan) -> Vec<usize> {
        plan.ranges.iter().map(|r| r.len()).collect()
    }

    #[test]
    fn even_split() {
        let plan = plan_partition(10, 2).unwrap();
        assert_eq!(plan.ranges, vec![0..5, 5..10]);
    }

    #[test]
    fn uneven_split_is_balanced() {
        let plan = plan_partition(10, 3).unwrap();
        assert_eq!(sizes(&plan), vec![4, 3, 3]);
        assert_eq!(plan.ranges, vec![0..4, 4..7, 7..10]);
    }

    #[test]
    fn more_workers_than_items() {
        let plan = plan_partition(3, 8).unwrap();
        assert_eq!(sizes(&plan), vec![1, 1, 1, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn zero_workers_is_rejected() {
        assert_eq!(plan_partition(4, 0), Err(ModelError::NoWorkers));
    }

    fn sample(seed: u64, n_classes: usize, n_methods: usize) -> (SystemModel, DependencyTable) {
        generate(&GeneratorConfig {
            n_classes,
            n_methods,
            n_attributes: n_classes * 3,
            seed,
            ..GeneratorConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn one_worker_matches_sequential() {
        let (model, deps) = sample(5, 6, 60);
        assert_eq!(
            parallel_similarities(&model, &deps, 1).unwrap(),
            all_similarities(&model, &deps)
        );
    }

    #[test]
    fn each_pair_is_evaluated_once_and_cursor_counts_entries() {
        let (model, deps) = sample(9, 5, 41);
        for workers in [1, 2, 3, 8] {
            let (list, stats) = parallel_similarities_with_stats(&model, &deps, workers).unwrap();
            let evaluated: u64 = stats.pairs_evaluated.iter().sum();
            assert_eq!(evaluated, 41 * 40 / 2);
            assert_eq!(stats.reserved, list.len());
        }
    }

    #[test]
    fn no_overlap_leaves_cursor_at_zero() {
        let model = SystemModel::from_classes(vec![ClassRecord {
            id: ClassId(0),
            name: "A".into(),
            attribute_ids: vec![],
            method_ids: vec![MethodId(0), MethodId(1), MethodId(2)],
        }]);
        let deps = DependencyTable::empty(3);
        let (list, stats) = parallel_similarities_with_stats(&model, &deps, 4).unwrap();
        assert!(list.is_empty());
        assert_eq!(stats.reserved, 0);
    }

    #[test]
    fn chain_fan_metrics() {
        let model = SystemModel::from_classes(vec![ClassRecord {
            id: ClassId(0),
            name: "A".into(),
            attribute_ids: vec![],
            method_ids: vec![MethodId(0), MethodId(1), MethodId(2)],
        }]);
        let deps = DependencyTable::new(vec![vec![MethodId(1)], vec![MethodId(2)], vec![]], vec![]);
        let (fan_in, fan_out) = parallel_fan_metrics(&model, &deps, 2).unwrap();
        assert_eq!(fan_in, vec![0, 1, 1]);
        assert_eq!(fan_out, vec![1, 1, 0]);
    }

    #[test]
    fn single_class_many_workers() {
        let (model, deps) = sample(2, 1, 12);
        let par = parallel_class_metrics(&model, &deps, 8).unwrap();
        let seq = full_report(&model, &deps).unwrap();
        assert_eq!(par.lcom, seq.lcom);
        assert_eq!(par.cbo, seq.cbo);
        assert_eq!(par.lcom_ck, seq.lcom_ck);
    }

    #[test]
    fn class_metrics_match_on_hundred_classes() {
        let (model, deps) = sample(7, 100, 700);
        let par = parallel_class_metrics(&model, &deps, 4).unwrap();
        let seq = full_report(&model, &deps).unwrap();
        assert_eq!(par.lcom, seq.lcom);
        assert_eq!(par.cbo, seq.cbo);
    }

    #[test]
    fn full_parallel_report_matches_for_all_worker_counts() {
        let (model, deps) = sample(13, 9, 150);
        let seq = full_report(&model, &deps).unwrap();
        for workers in [1, 2, 4, 8] {
            assert_eq!(parallel_report(&model, &deps, workers).unwrap(), seq);
        }
    }
}
