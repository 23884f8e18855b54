//! Estimators against synthetic tables with planted effects.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::Normal;

use tilebench::analysis::{
    blank_contrast, clustered_mean, compare_rulesets, null_between_fraction, s_position_table, tile_regression, Metric,
};
use tilebench::harness::{GameOutcome, OutcomeTable, Winner};
use tilebench::tiles::{parse_tile, BLANK, TILE_KINDS};

fn blank_outcome(order_id: u64, replicate_id: u64) -> GameOutcome {
    GameOutcome {
        order_id,
        replicate_id,
        seed: 0,
        p1_score: 0,
        p2_score: 0,
        diff: 0,
        winner: Winner::Tie,
        bingos: [0; 2],
        blank_positions: [0; 2],
        s_positions: Vec::new(),
        tiles_available: [50; 2],
        turns: 20,
        end: "played_out".into(),
        audit_violations: 0,
        p1_drawn: [0; TILE_KINDS],
        p1_played: [0; TILE_KINDS],
    }
}

fn set_p1(o: &mut GameOutcome, p1: f64) {
    o.p1_score = p1.round() as i32;
    o.p2_score = 400;
    o.diff = o.p1_score - o.p2_score;
    o.winner = match o.diff.signum() {
        1 => Winner::P1,
        -1 => Winner::P2,
        _ => Winner::Tie,
    };
}

#[test]
fn clustered_interval_has_nominal_coverage() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let between = Normal::new(0.0, 1.0).unwrap();
    let within = Normal::new(0.0, 2.0).unwrap();
    let truth = 3.0;
    let datasets = 1000;
    let mut covered = 0;
    for _ in 0..datasets {
        let groups: Vec<Vec<f64>> = (0..30)
            .map(|_| {
                let b = rng.sample(between);
                (0..10).map(|_| truth + b + rng.sample(within)).collect()
            })
            .collect();
        let a = clustered_mean(&groups).unwrap();
        covered += usize::from(a.ci_low <= truth && truth <= a.ci_high);
    }
    // Three binomial standard errors around 0.95 at n = 1000.
    let rate = covered as f64 / datasets as f64;
    assert!((0.929..=0.971).contains(&rate), "coverage {rate}");
}

#[test]
fn shuffled_labels_give_the_permutation_expectation() {
    // Under label shuffling E[SS_between] / SS_total = (G - 1) / (N - 1).
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let groups: Vec<Vec<f64>> = (0..40).map(|g| (0..8).map(|_| g as f64 + rng.gen::<f64>() * 5.0).collect()).collect();
    let null = null_between_fraction(&groups, 4000, 3).unwrap();
    let expected = 39.0 / 319.0;
    assert!((null.mean - expected).abs() < 0.004, "{} vs {expected}", null.mean);
    assert!(null.q95 > null.mean && null.max >= null.q95);
}

#[test]
fn planted_blank_value_is_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let noise = Normal::new(0.0, 15.0).unwrap();
    let mut outcomes = Vec::new();
    for order in 0..400u64 {
        let picks = sample(&mut rng, 100, 2);
        let positions = [picks.index(0) as u16 + 1, picks.index(1) as u16 + 1];
        let front = positions.iter().filter(|&&p| p <= 50).count() as f64;
        for rep in 0..10 {
            let mut o = blank_outcome(order, rep);
            o.blank_positions = positions;
            set_p1(&mut o, 400.0 + 30.0 * front + rng.sample(noise));
            outcomes.push(o);
        }
    }
    let b = blank_contrast(&OutcomeTable::new(outcomes)).unwrap();
    assert!((b.contrast - 30.0).abs() < 3.0 * b.std_error + 0.5, "{b:?}");
}

#[test]
fn planted_tile_slope_is_recovered_within_its_standard_error() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let order_effect = Normal::new(0.0, 20.0).unwrap();
    let noise = Normal::new(0.0, 30.0).unwrap();
    let s = parse_tile('S').unwrap();
    let mut outcomes = Vec::new();
    for order in 0..200u64 {
        let base = rng.sample(order_effect);
        for rep in 0..20 {
            let mut o = blank_outcome(order, rep);
            let n = rng.gen_range(0..=4);
            o.p1_drawn[s as usize] = n;
            set_p1(&mut o, 420.0 + base + 5.0 * n as f64 + rng.sample(noise));
            outcomes.push(o);
        }
    }
    let e = tile_regression(&OutcomeTable::new(outcomes), s, Metric::P1Score).unwrap();
    assert!((e.slope - 5.0).abs() < 3.0 * e.std_error, "{e:?}");
    assert!(e.std_error > 0.1 && e.std_error < 1.0, "{e:?}");
}

fn planted_table(seed: u64, j_slope: f64, shift: f64) -> OutcomeTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 25.0).unwrap();
    let j = parse_tile('J').unwrap() as usize;
    let mut outcomes = Vec::new();
    for order in 0..150u64 {
        for rep in 0..20 {
            let mut o = blank_outcome(order, rep);
            for k in 0..TILE_KINDS {
                o.p1_drawn[k] = rng.gen_range(0..=2);
            }
            let x = o.p1_drawn[j] as f64;
            set_p1(&mut o, 400.0 + shift + j_slope * x + rng.sample(noise));
            outcomes.push(o);
        }
    }
    OutcomeTable::new(outcomes)
}

#[test]
fn ruleset_comparison_recovers_a_planted_delta() {
    let first = planted_table(6, 1.0, 0.0);
    let second = planted_table(7, 5.0, 40.0);
    let cmp = compare_rulesets(&first, &second, Metric::P1Score);
    let j = parse_tile('J').unwrap();
    let delta = cmp.letter(j).delta.unwrap();
    let se = tile_regression(&first, j, Metric::P1Score)
        .unwrap()
        .std_error
        .hypot(tile_regression(&second, j, Metric::P1Score).unwrap().std_error);
    assert!((delta - 4.0).abs() < 3.0 * se, "delta {delta} se {se}");
    assert!(cmp.second_mean_p1 - cmp.first_mean_p1 > 30.0);
    assert_eq!(cmp.letters.len(), TILE_KINDS);
    assert_eq!(cmp.letter(BLANK).letter, "?");
    // Letters without a planted effect stay near zero.
    let e = cmp.letter(parse_tile('E').unwrap()).delta.unwrap();
    assert!(e.abs() < 3.0 * se, "E delta {e}");
}

#[test]
fn s_position_means_follow_a_planted_trend() {
    // p1 falls by half a point per position of the first S, so the decile
    // means of the first S are 400 - 0.5 * (mean position in the decile).
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let noise = Normal::new(0.0, 2.0).unwrap();
    let mut outcomes = Vec::new();
    for order in 0..2000u64 {
        let mut s: Vec<u16> = sample(&mut rng, 100, 4).iter().map(|i| i as u16 + 1).collect();
        s.sort_unstable();
        let mut o = blank_outcome(order, 0);
        set_p1(&mut o, 400.0 - 0.5 * s[0] as f64 + rng.sample(noise));
        o.s_positions = s;
        outcomes.push(o);
    }
    let table = OutcomeTable::new(outcomes);
    let grid = s_position_table(&table, 30);
    assert_eq!(grid.counts.len(), 4);
    // First-S positions are concentrated early; compare the well-populated deciles.
    let mut checked = 0;
    for d in 0..10 {
        let Some(mean) = grid.shown(0, d) else { continue };
        let rows: Vec<&GameOutcome> =
            table.outcomes.iter().filter(|o| (o.s_positions[0] as usize - 1) / 10 == d).collect();
        let mean_pos = rows.iter().map(|o| o.s_positions[0] as f64).sum::<f64>() / rows.len() as f64;
        let se = 2.0 / (rows.len() as f64).sqrt();
        assert!((mean - (400.0 - 0.5 * mean_pos)).abs() < 4.0 * se + 0.5, "decile {d}: {mean}");
        checked += 1;
    }
    assert!(checked >= 4);
}
