//! Every example runs to completion with its built-in data.

macro_rules! example {
    ($module:ident, $test:ident, $file:literal) => {
        #[path = $file]
        mod $module;

        #[test]
        fn $test() {
            let out = $module::run_example().expect(concat!($file, " should run"));
            assert!(!out.trim().is_empty());
        }
    };
}

example!(parse_java, parse_java_runs, "../examples/parse_java.rs");
example!(detect_kus, detect_kus_runs, "../examples/detect_kus.rs");
example!(code_metrics, code_metrics_runs, "../examples/code_metrics.rs");
example!(feature_table, feature_table_runs, "../examples/feature_table.rs");
example!(rank_stats, rank_stats_runs, "../examples/rank_stats.rs");
example!(clustering, clustering_runs, "../examples/clustering.rs");
example!(bootstrap_eval, bootstrap_eval_runs, "../examples/bootstrap_eval.rs");
example!(explain_shap, explain_shap_runs, "../examples/explain_shap.rs");
example!(run_study, run_study_runs, "../examples/run_study.rs");
