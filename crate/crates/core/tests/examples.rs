//! Runs every example's `main` in-process so they stay working.

macro_rules! example {
    ($name:ident, $path:literal) => {
        #[path = $path]
        mod $name;

        #[test]
        fn $name() {
            $name::main().unwrap();
        }
    };
}

example!(belief_algebra, "../examples/belief_algebra.rs");
example!(mass_estimation, "../examples/mass_estimation.rs");
example!(weights_of_evidence, "../examples/weights_of_evidence.rs");
example!(group_search, "../examples/group_search.rs");
example!(logistic_baseline, "../examples/logistic_baseline.rs");
example!(diagnosis_pipeline, "../examples/diagnosis_pipeline.rs");
example!(roc_comparison, "../examples/roc_comparison.rs");
