use std::ffi::{CStr, CString};
use std::ptr;

use tilebench_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(tb_last_error()) }.to_string_lossy().into_owned()
}

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

#[test]
fn lexicon_handles() {
    unsafe {
        let mut lex = ptr::null_mut();
        assert_eq!(tb_lexicon_bundled(&mut lex), TbStatus::Ok);
        assert!(tb_lexicon_word_count(lex) > 20_000);
        let mut found = false;
        assert_eq!(tb_lexicon_contains(lex, c("quixotic").as_ptr(), &mut found), TbStatus::Ok);
        assert!(found);
        assert_eq!(tb_lexicon_contains(lex, c("QXZ").as_ptr(), &mut found), TbStatus::Ok);
        assert!(!found);
        assert_eq!(tb_lexicon_contains(lex, ptr::null(), &mut found), TbStatus::NullArgument);
        assert!(last_error().contains("word is null"));
        tb_lexicon_free(lex);

        let mut missing = ptr::null_mut();
        assert_eq!(tb_lexicon_open(c("/no/such/lexicon").as_ptr(), &mut missing), TbStatus::Io);
        assert!(last_error().starts_with("[io]"));
        assert!(missing.is_null());
        tb_lexicon_free(ptr::null_mut());
    }
}

#[test]
fn ruleset_handles() {
    unsafe {
        let mut rs = ptr::null_mut();
        assert_eq!(tb_ruleset_open(c("wwf").as_ptr(), &mut rs), TbStatus::Ok);
        assert_eq!(tb_ruleset_tile_total(rs), 104);
        assert_eq!(tb_ruleset_bingo_bonus(rs), 35);
        tb_ruleset_free(rs);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "not = [valid").unwrap();
        let mut bad = ptr::null_mut();
        let p = c(path.to_str().unwrap());
        assert_eq!(tb_ruleset_open(p.as_ptr(), &mut bad), TbStatus::InvalidInput);
        assert!(last_error().starts_with("[parse]"), "{}", last_error());
    }
}

#[test]
fn experiment_round_trip_and_analysis() {
    unsafe {
        let (mut lex, mut rs) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(tb_lexicon_bundled(&mut lex), TbStatus::Ok);
        assert_eq!(tb_ruleset_open(c("scrabble").as_ptr(), &mut rs), TbStatus::Ok);
        let mut config = tb_experiment_config_default();
        assert_eq!(config.perturbation_half_width, 1.0);
        config.n_orders = 3;
        config.replicates_per_order = 2;
        config.master_seed = 11;
        config.audit = true;

        let dir = tempfile::tempdir().unwrap();
        let out = c(dir.path().join("run.csv").to_str().unwrap());
        let mut table = ptr::null_mut();
        assert_eq!(tb_experiment_run(rs, lex, &config, out.as_ptr(), &mut table), TbStatus::Ok, "{}", last_error());
        assert_eq!(tb_outcome_table_len(table), 6);

        let mut g = TbGameSummary::default();
        assert_eq!(tb_outcome_table_get(table, 5, &mut g), TbStatus::Ok);
        assert_eq!((g.order_id, g.replicate_id), (2, 1));
        assert_eq!(g.diff, g.p1_score - g.p2_score);
        assert_eq!(g.audit_violations, 0);
        assert_eq!(tb_outcome_table_get(table, 6, &mut g), TbStatus::OutOfRange);

        let mut again = ptr::null_mut();
        assert_eq!(tb_outcome_table_read(out.as_ptr(), &mut again), TbStatus::Ok);
        let mut first = TbGameSummary::default();
        let mut second = TbGameSummary::default();
        for i in 0..6 {
            tb_outcome_table_get(table, i, &mut first);
            tb_outcome_table_get(again, i, &mut second);
            assert_eq!((first.seed, first.p1_score, first.p2_score), (second.seed, second.p1_score, second.p2_score));
        }

        let mut d = TbDecomposition::default();
        assert_eq!(tb_decompose(table, TbMetric::Diff, &mut d), TbStatus::Ok);
        assert_eq!((d.n_orders, d.replicates), (3, 2));
        assert!((d.ss_total - d.ss_between - d.ss_within).abs() <= 1e-9 * d.ss_total);
        let mut a = TbAdvantage::default();
        assert_eq!(tb_first_player_advantage(table, &mut a), TbStatus::Ok);
        assert_eq!((a.games, a.clusters), (6, 3));
        assert!(a.ci_low <= a.mean_diff && a.mean_diff <= a.ci_high);

        let (mut slope, mut se) = (0.0, 0.0);
        assert_eq!(tb_tile_effect(table, b'1' as _, TbMetric::P1Score, &mut slope, &mut se), TbStatus::InvalidInput);
        let status = tb_tile_effect(table, b'E' as _, TbMetric::P1Score, &mut slope, &mut se);
        assert!(matches!(status, TbStatus::Ok | TbStatus::UndefinedEstimate));

        let copy = c(dir.path().join("copy.csv").to_str().unwrap());
        assert_eq!(tb_outcome_table_write(again, copy.as_ptr()), TbStatus::Ok);
        assert_eq!(
            std::fs::read(dir.path().join("copy.csv")).unwrap(),
            std::fs::read(dir.path().join("run.csv")).unwrap()
        );

        config.workers = 0;
        let mut none = ptr::null_mut();
        assert_eq!(tb_experiment_run(rs, lex, &config, ptr::null(), &mut none), TbStatus::InvalidInput);
        assert!(last_error().starts_with("[invalid_config]"));

        tb_outcome_table_free(table);
        tb_outcome_table_free(again);
        tb_ruleset_free(rs);
        tb_lexicon_free(lex);
    }
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(tb_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
