//! Property tests for the data-layer invariants.

use casetwin::data::casebase::{Case, CaseBase};
use casetwin::data::io::{load_tabular_csv, save_tabular_csv};
use casetwin::data::metric::{diff_features, distance};
use casetwin::data::schema::{FeatureKind, FeatureSchema, FeatureSpec, Value};
use casetwin::retrieval::knn_cases;

use proptest::collection::vec;
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum ColumnSpec {
    Numeric,
    Categorical(Vec<String>),
}

fn column_strategy() -> impl Strategy<Value = ColumnSpec> {
    prop_oneof![
        Just(ColumnSpec::Numeric),
        vec("[a-z]{1,6}", 2..5).prop_map(|mut cats| {
            cats.sort();
            cats.dedup();
            ColumnSpec::Categorical(cats)
        }),
    ]
}

fn value_strategy(spec: &ColumnSpec) -> BoxedStrategy<Value> {
    match spec {
        ColumnSpec::Numeric => (-1.0e6..1.0e6f64).prop_map(Value::Num).boxed(),
        ColumnSpec::Categorical(cats) => {
            let cats = cats.clone();
            (0..cats.len()).prop_map(move |i| Value::Cat(cats[i].clone())).boxed()
        }
    }
}

prop_compose! {
    fn casebase_strategy()(columns in vec(column_strategy(), 1..5))(
        rows in vec(
            columns.iter().map(value_strategy).collect::<Vec<_>>(),
            2..25,
        ),
        labels in vec(0usize..2, 2..25),
        columns in Just(columns),
    ) -> CaseBase {
        let features = columns
            .iter()
            .enumerate()
            .map(|(i, c)| FeatureSpec {
                name: format!("col{i}"),
                kind: match c {
                    ColumnSpec::Numeric => FeatureKind::Numeric { observed_range: (0.0, 0.0) },
                    ColumnSpec::Categorical(cats) => {
                        FeatureKind::Categorical { categories: cats.clone() }
                    }
                },
            })
            .collect();
        let schema = FeatureSchema::new(
            features,
            "label",
            vec!["a".into(), "b".into()],
        ).unwrap();
        let cases = rows
            .into_iter()
            .zip(labels.into_iter().chain(std::iter::repeat(0)))
            .enumerate()
            .map(|(id, (features, label))| Case { id, features, label })
            .collect();
        CaseBase::new(schema, cases).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The mixed distance is a semi-metric: non-negative, symmetric, and
    /// zero on identical cases.
    #[test]
    fn distance_is_a_semi_metric(cb in casebase_strategy(), i in 0usize..24, j in 0usize..24) {
        let cases = cb.cases();
        let a = &cases[i % cases.len()];
        let b = &cases[j % cases.len()];
        let d_ab = distance(a, b, cb.scaler(), None).unwrap();
        let d_ba = distance(b, a, cb.scaler(), None).unwrap();
        prop_assert!(d_ab >= 0.0);
        prop_assert!((d_ab - d_ba).abs() < 1e-12);
        prop_assert_eq!(distance(a, a, cb.scaler(), None).unwrap(), 0.0);
    }

    /// Feature difference sets are symmetric in their arguments.
    #[test]
    fn diff_features_is_symmetric(
        cb in casebase_strategy(),
        i in 0usize..24,
        j in 0usize..24,
        tau in 0.0..0.5f64,
    ) {
        let cases = cb.cases();
        let a = &cases[i % cases.len()];
        let b = &cases[j % cases.len()];
        prop_assert_eq!(
            diff_features(a, b, cb.scaler(), tau),
            diff_features(b, a, cb.scaler(), tau)
        );
    }

    /// Normalization maps every training value into [0, 1]; out-of-range
    /// query values extrapolate beyond the unit interval, never clipped.
    #[test]
    fn normalize_bounds_training_values_without_clipping(cb in casebase_strategy()) {
        for case in cb.cases() {
            for (i, v) in case.features.iter().enumerate() {
                if let Value::Num(x) = v {
                    let t = cb.scaler().normalize(i, *x);
                    prop_assert!((-1e-12..=1.0 + 1e-12).contains(&t), "training value escaped [0,1]");
                }
            }
        }
        for (i, range) in cb.scaler().ranges().iter().enumerate() {
            let Some((lo, hi)) = range else { continue };
            if hi > lo {
                let outside = hi + (hi - lo);
                let t = cb.scaler().normalize(i, outside);
                prop_assert!(t > 1.0, "out-of-range value was clipped: {t}");
                let below = lo - (hi - lo);
                prop_assert!(cb.scaler().normalize(i, below) < 0.0);
            }
        }
    }

    /// Ingest -> serialize -> ingest is the identity on schema and cases.
    #[test]
    fn csv_round_trip_is_identity(cb in casebase_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let first = dir.path().join("first.csv");
        save_tabular_csv(&cb, &first).unwrap();
        let loaded = load_tabular_csv(&first, "label", None).unwrap();
        let second = dir.path().join("second.csv");
        save_tabular_csv(&loaded, &second).unwrap();
        let reloaded = load_tabular_csv(&second, "label", None).unwrap();
        prop_assert_eq!(loaded.schema(), reloaded.schema());
        prop_assert_eq!(loaded.cases(), reloaded.cases());
    }

    /// k-NN with k = |index| returns every case exactly once, distances
    /// non-decreasing.
    #[test]
    fn knn_with_full_k_is_a_permutation(cb in casebase_strategy(), qi in 0usize..24) {
        let query = &cb.cases()[qi % cb.len()];
        let got = knn_cases(&cb, query, None, cb.len(), None).unwrap();
        prop_assert_eq!(got.len(), cb.len());
        let mut ids: Vec<usize> = got.iter().map(|n| n.case_id).collect();
        ids.sort_unstable();
        let expect: Vec<usize> = {
            let mut all: Vec<usize> = cb.cases().iter().map(|c| c.id).collect();
            all.sort_unstable();
            all
        };
        prop_assert_eq!(ids, expect);
        prop_assert!(got.windows(2).all(|w| w[0].distance <= w[1].distance));
    }
}
