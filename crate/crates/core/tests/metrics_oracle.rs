mod common;

use common::{class_metrics, generated};
use modmove::ingest::GeneratorConfig;
use modmove::metrics::{estimate_workload, full_report};
use modmove::parallel::parallel_report;

fn config(seed: u64, m: usize, c: usize) -> GeneratorConfig {
    GeneratorConfig {
        n_classes: c,
        n_methods: m,
        n_attributes: 2 * c + 3,
        seed,
        ..GeneratorConfig::default()
    }
}

#[test]
fn full_report_matches_brute_force() {
    for (seed, m, c) in [(42, 30, 5), (1, 12, 3), (2, 25, 10), (3, 40, 1), (4, 60, 8)] {
        let (model, deps, raw) = generated(&config(seed, m, c));
        let report = full_report(&model, &deps).unwrap();
        assert_eq!(report.fan_in, common::fan_in(&raw), "seed {seed}");
        assert_eq!(report.fan_out, common::fan_out(&raw), "seed {seed}");
        let sims: Vec<(u32, u32, f64)> = report
            .similarity
            .iter()
            .map(|e| (e.i.0, e.j.0, e.value))
            .collect();
        assert_eq!(sims, common::similarities(&raw), "seed {seed}");
        for (k, (lcom, ck, coupling)) in class_metrics(&raw, &raw.class_methods)
            .into_iter()
            .enumerate()
        {
            assert_eq!(report.lcom[k], lcom, "seed {seed} class {k}");
            assert_eq!(report.lcom_ck[k], ck, "seed {seed} class {k}");
            assert_eq!(report.cbo[k], coupling, "seed {seed} class {k}");
        }
        for workers in [1, 3, 8] {
            assert_eq!(parallel_report(&model, &deps, workers).unwrap(), report);
        }
    }
}

#[test]
fn degenerate_classes_are_listed() {
    // more classes than attributes leaves some classes without state
    let (model, deps, raw) = generated(&GeneratorConfig {
        n_classes: 6,
        n_methods: 18,
        n_attributes: 3,
        seed: 5,
        ..GeneratorConfig::default()
    });
    let report = full_report(&model, &deps).unwrap();
    let expected: Vec<u32> = (0..raw.n_classes())
        .filter(|&k| raw.class_attrs[k].is_empty() || raw.class_methods[k].is_empty())
        .map(|k| k as u32)
        .collect();
    assert!(!expected.is_empty());
    assert_eq!(
        report
            .lcom_degenerate
            .iter()
            .map(|c| c.0)
            .collect::<Vec<_>>(),
        expected
    );
    for &k in &expected {
        assert_eq!(report.lcom[k as usize], 0.0);
    }
}

#[test]
fn workload_matches_closed_form() {
    for (seed, m, c) in [(42, 1200, 231), (0, 10, 2), (9, 333, 17)] {
        let (model, deps, _) = generated(&config(seed, m, c));
        let w = estimate_workload(&model, &deps);
        let (m, c) = (m as u64, c as u64);
        assert_eq!(w.n_total, 2 * m + m * (m - 1) / 2 + 2 * c * (m + 1));
        assert_eq!(w.n_fan + w.n_sim + w.n_lcom + w.n_cbo, w.n_total);
    }
    let (model, deps, _) = generated(&config(42, 1200, 231));
    assert_eq!(estimate_workload(&model, &deps).n_total, 1_276_662);
}
