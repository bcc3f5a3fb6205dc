use std::collections::BTreeMap;
use std::path::PathBuf;

use proptest::prelude::*;
use rekindle_core::eval::load_fixtures;
use rekindle_core::text::BlendedRelevance;
use rekindle_core::{compute_metrics, run_eval, Group, RankMethod, RankParams};

fn labels(ls: &[u8]) -> BTreeMap<usize, u8> {
    ls.iter().enumerate().map(|(i, l)| (i, *l)).collect()
}

#[test]
fn hand_computed_values() {
    let m = compute_metrics(&[0, 1, 2], &labels(&[1, 0, 1])).unwrap();
    assert!((m.average_precision - 0.8333333333333333).abs() < 1e-6);
    assert!((m.ndcg - 0.9197207891481876).abs() < 1e-6);
    assert_eq!(m.p_at_1, 1.0);
}

#[test]
fn shipped_fixture_report_shape() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/eval.jsonl");
    let fixtures = load_fixtures(path).unwrap();
    assert_eq!(fixtures.len(), 12);
    let params = RankParams::default();
    let report = run_eval(&fixtures, &RankMethod::ALL, &Group::ALL, &params, &BlendedRelevance::default()).unwrap();
    assert_eq!(report.rows.len(), 10);
    for (i, row) in report.rows.iter().enumerate() {
        assert_eq!(row.group, Group::ALL[i / 5]);
        assert_eq!(row.method, RankMethod::ALL[i % 5]);
        assert_eq!(row.instances, 6);
    }
    let again = run_eval(&fixtures, &RankMethod::ALL, &Group::ALL, &params, &BlendedRelevance::default()).unwrap();
    assert_eq!(report.to_json(), again.to_json());
}

fn ideal(ls: &[u8]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ls.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(ls[i]));
    order
}

proptest! {
    #[test]
    fn metrics_lie_in_unit_interval(ls in prop::collection::vec(0u8..=1, 1..20), seed in any::<u64>()) {
        let mut order: Vec<usize> = (0..ls.len()).collect();
        let n = order.len();
        for i in 0..n {
            order.swap(i, (seed as usize).wrapping_mul(31).wrapping_add(i * 7) % n);
        }
        let m = compute_metrics(&order, &labels(&ls)).unwrap();
        for v in [m.p_at_1, m.average_precision, m.ndcg] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert_eq!(m.p_at_1, ls[order[0]] as f64);
    }

    #[test]
    fn ideal_ordering_scores_one(ls in prop::collection::vec(0u8..=1, 1..20)) {
        prop_assume!(ls.contains(&1));
        let m = compute_metrics(&ideal(&ls), &labels(&ls)).unwrap();
        prop_assert!((m.average_precision - 1.0).abs() < 1e-12);
        prop_assert!((m.ndcg - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_relevant_items_score_zero(n in 1usize..20) {
        let m = compute_metrics(&(0..n).collect::<Vec<_>>(), &labels(&vec![0; n])).unwrap();
        prop_assert_eq!((m.p_at_1, m.average_precision, m.ndcg), (0.0, 0.0, 0.0));
    }

    #[test]
    fn promoting_a_relevant_item_never_hurts(ls in prop::collection::vec(0u8..=1, 2..15), pos in 1usize..15) {
        let n = ls.len();
        let pos = pos % n;
        prop_assume!(pos > 0 && ls[pos] == 1 && ls[pos - 1] == 0);
        let order: Vec<usize> = (0..n).collect();
        let mut better = order.clone();
        better.swap(pos, pos - 1);
        let a = compute_metrics(&order, &labels(&ls)).unwrap();
        let b = compute_metrics(&better, &labels(&ls)).unwrap();
        prop_assert!(b.average_precision >= a.average_precision);
        prop_assert!(b.ndcg >= a.ndcg);
    }
}
