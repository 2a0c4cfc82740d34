//! Property suites shared by the `properties` and `acceptance` targets.
//!
//! Each suite runs a fixed number of randomized cases from a deterministic
//! generator and returns the first failure as text.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use strapsim::constituent::{forest_proximity, forest_train, FeatureTable, ForestConfig};
use strapsim::eval::spearman;
use strapsim::metrics::{
    exact_transport_oracle, jaccard, strapsim, strapsim_identity_reduction, weighted_jaccard, ORACLE_CELL_CAP,
};
use strapsim::{ConstituentId, Metric, SimilarityMatrix, WeightedSet};

pub const CASES: u32 = 1000;
const TOL: f64 = 1e-9;

fn runner() -> TestRunner {
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn check<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    runner().run(&strategy, test).map_err(|e| e.to_string())
}

fn ids(prefix: &str, n: usize) -> Vec<ConstituentId> {
    (0..n).map(|i| ConstituentId::new(format!("{prefix}{i}")).unwrap()).collect()
}

fn set(label: &str, ids: &[ConstituentId], weights: &[f64]) -> WeightedSet {
    WeightedSet::new(label, ids.iter().map(|i| i.as_str().to_string()).zip(weights.iter().copied()), false).unwrap()
}

/// Two sets of size 1..=6 with disjoint ids and a rectangular matrix that is
/// zero about a third of the time.
fn rectangular() -> impl Strategy<Value = (WeightedSet, WeightedSet, SimilarityMatrix)> {
    (1usize..=6, 1usize..=6).prop_flat_map(|(m, n)| {
        (
            prop::collection::vec(0.01f64..1.0, m),
            prop::collection::vec(0.01f64..1.0, n),
            prop::collection::vec(prop_oneof![1 => Just(0.0), 2 => 0.0f64..=1.0], m * n),
        )
            .prop_map(move |(wx, wy, s)| {
                let (rx, cy) = (ids("x", m), ids("y", n));
                let x = set("x", &rx, &wx);
                let y = set("y", &cy, &wy);
                (x, y, SimilarityMatrix::new(rx, cy, s).unwrap())
            })
    })
}

/// Two sets drawn from a common universe of up to 8 ids with a symmetric
/// unit-diagonal matrix over the universe.
fn shared_universe() -> impl Strategy<Value = (WeightedSet, WeightedSet, SimilarityMatrix)> {
    (2usize..=8).prop_flat_map(|u| {
        (
            prop::collection::vec(prop::option::weighted(0.7, 0.01f64..1.0), u),
            prop::collection::vec(prop::option::weighted(0.7, 0.01f64..1.0), u),
            prop::collection::vec(0.0f64..0.99, u * (u - 1) / 2),
        )
            .prop_filter_map("both sets need an element", move |(ax, ay, upper)| {
                let universe = ids("c", u);
                let pick = |ws: &[Option<f64>]| -> (Vec<ConstituentId>, Vec<f64>) {
                    ws.iter()
                        .enumerate()
                        .filter_map(|(i, w)| w.map(|w| (universe[i].clone(), w)))
                        .unzip()
                };
                let (ix, wx) = pick(&ax);
                let (iy, wy) = pick(&ay);
                if ix.is_empty() || iy.is_empty() {
                    return None;
                }
                let mut values = vec![1.0; u * u];
                let mut k = 0;
                for a in 0..u {
                    for b in (a + 1)..u {
                        values[a * u + b] = upper[k];
                        values[b * u + a] = upper[k];
                        k += 1;
                    }
                }
                let s = SimilarityMatrix::square(universe.clone(), values).unwrap();
                Some((set("x", &ix, &wx), set("y", &iy, &wy), s))
            })
    })
}

pub fn greedy_below_oracle() -> Result<(), String> {
    check(rectangular(), |(x, y, s)| {
        let greedy = strapsim(&x, &y, &s).unwrap().total_score;
        let oracle = exact_transport_oracle(&x, &y, &s).unwrap().objective;
        prop_assert!(greedy <= oracle + TOL, "greedy {greedy} > oracle {oracle}");
        Ok(())
    })
}

pub fn symmetric_under_symmetric_matrix() -> Result<(), String> {
    check(shared_universe(), |(x, y, s)| {
        let xy = Metric::Strapsim.compute(&x, &y, Some(&s), &Default::default()).unwrap();
        let yx = Metric::Strapsim.compute(&y, &x, Some(&s), &Default::default()).unwrap();
        prop_assert!((xy.score - yx.score).abs() < TOL, "{} vs {}", xy.score, yx.score);
        prop_assert!((xy.residual - yx.residual).abs() < TOL);
        Ok(())
    })
}

pub fn mass_conservation() -> Result<(), String> {
    check(rectangular(), |(x, y, s)| {
        let t = strapsim(&x, &y, &s).unwrap();
        for (side, shipped, residual, weights) in [
            ("x", t.shipped_x(), &t.residual_x, x.weights()),
            ("y", t.shipped_y(), &t.residual_y, y.weights()),
        ] {
            for i in 0..weights.len() {
                prop_assert!(residual[i] >= 0.0, "negative residual on {side}{i}");
                prop_assert!(
                    (shipped[i] + residual[i] - weights[i]).abs() < TOL,
                    "{side}{i}: shipped {} + residual {} != weight {}",
                    shipped[i],
                    residual[i],
                    weights[i]
                );
            }
        }
        let residual_sum: f64 = t.residual_x.iter().chain(&t.residual_y).sum();
        prop_assert!((t.total_residual - residual_sum).abs() < TOL);
        let contributions: f64 = t.steps.iter().map(|s| s.contribution).sum();
        prop_assert!((t.total_score - contributions).abs() < TOL);
        prop_assert!(t.matched_mass() <= x.total_weight().min(y.total_weight()) + TOL);
        Ok(())
    })
}

pub fn exact_match_is_weighted_jaccard_numerator() -> Result<(), String> {
    check(shared_universe(), |(x, y, _)| {
        let exact = SimilarityMatrix::exact_match(&x, &y);
        let greedy = strapsim(&x, &y, &exact).unwrap();
        let numerator: f64 = x
            .iter()
            .filter_map(|(id, w)| y.weight_of(id.as_str()).map(|v| w.min(v)))
            .sum();
        prop_assert!((greedy.total_score - numerator).abs() < TOL);
        prop_assert!((strapsim_identity_reduction(&x, &y).score - numerator).abs() < TOL);
        let wj = weighted_jaccard(&x, &y).unwrap().score;
        let union: f64 = x.total_weight() + y.total_weight() - numerator;
        prop_assert!((wj * union - numerator).abs() < TOL);
        // the exact optimum with an identity matrix is the same overlap
        if x.len() * y.len() <= ORACLE_CELL_CAP {
            let oracle = exact_transport_oracle(&x, &y, &exact).unwrap().objective;
            prop_assert!((oracle - numerator).abs() < TOL);
        }
        Ok(())
    })
}

pub fn jaccard_complements_residual() -> Result<(), String> {
    check(shared_universe(), |(x, y, _)| {
        let r = jaccard(&x, &y);
        prop_assert!((r.score + r.residual - 1.0).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&r.score));
        Ok(())
    })
}

pub fn proximity_structure() -> Result<(), String> {
    let strategy = (10usize..=24, 1usize..=6, any::<u64>()).prop_flat_map(|(n, trees, seed)| {
        (
            prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), n),
            Just(trees),
            Just(seed),
        )
    });
    check(strategy, |(rows, trees, seed)| {
        let n = rows.len();
        let target: Vec<f64> = rows.iter().map(|r| r[0] * 2.0 - r[1]).collect();
        let table = FeatureTable::new(
            (0..n).map(|i| format!("r{i}")).collect(),
            vec!["a".into(), "b".into(), "c".into()],
            rows,
        )
        .unwrap()
        .with_target("t", target)
        .unwrap();
        let config = ForestConfig {
            trees,
            max_depth: 4,
            min_leaf: 1,
            seed,
        };
        let model = forest_train(&table, &["t"], &config).unwrap();
        let p = forest_proximity(&model, &table).unwrap();
        for a in 0..n {
            prop_assert_eq!(p.get(a, a), 1.0);
            for b in 0..n {
                prop_assert_eq!(p.get(a, b), p.get(b, a));
                let scaled = p.get(a, b) * trees as f64;
                prop_assert!((scaled - scaled.round()).abs() < 1e-9, "{} not a multiple of 1/{trees}", p.get(a, b));
            }
        }
        Ok(())
    })
}

pub fn spearman_monotone_invariance() -> Result<(), String> {
    let strategy = (3usize..=30).prop_flat_map(|n| {
        (
            prop::collection::vec(-100i32..100, n),
            prop::collection::vec(-100i32..100, n),
        )
    });
    check(strategy, |(a, b)| {
        let a: Vec<f64> = a.into_iter().map(f64::from).collect();
        let b: Vec<f64> = b.into_iter().map(f64::from).collect();
        let Ok(base) = spearman(&a, &b) else {
            return Ok(());
        };
        let transformed: Vec<f64> = a.iter().map(|v| (v / 50.0).exp() + v.powi(3)).collect();
        let other = spearman(&transformed, &b).unwrap();
        prop_assert!((base.rho - other.rho).abs() < 1e-12, "{} vs {}", base.rho, other.rho);
        prop_assert!((base.p_value - other.p_value).abs() < 1e-12);
        Ok(())
    })
}

/// Every suite with its name, in the order they are reported.
pub fn all_suites() -> Vec<(&'static str, fn() -> Result<(), String>)> {
    vec![
        ("greedy <= transport oracle", greedy_below_oracle),
        ("symmetry under symmetric S", symmetric_under_symmetric_matrix),
        ("mass conservation", mass_conservation),
        ("exact match = weighted-Jaccard numerator", exact_match_is_weighted_jaccard_numerator),
        ("Jaccard score + residual = 1", jaccard_complements_residual),
        ("proximity symmetric, unit diagonal, 1/T steps", proximity_structure),
        ("Spearman monotone invariance", spearman_monotone_invariance),
    ]
}
