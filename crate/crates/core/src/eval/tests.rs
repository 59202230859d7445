use proptest::prelude::*;

use super::*;
use crate::env::ToyEnv;

fn counts(tp: usize, fp: usize, fn_: usize) -> Confusion {
    Confusion { tp, fp, fn_ }
}

#[test]
fn textbook_f1_values() {
    assert_eq!(counts(30, 10, 10).f1(), 0.75);
    assert_eq!(counts(200, 0, 0).f1(), 1.0);
    assert_eq!(counts(0, 5, 200).f1(), 0.0);
    assert_eq!(counts(0, 0, 0).f1(), 0.0);
}

#[test]
fn report_maps_onto_confusion_counts() {
    let r = CoverageReport::from_counts((120, 200), (30, 900), (4, 150)).unwrap();
    assert_eq!(metrics_from_report(&r), (120, 30, 80));
    let full = CoverageReport::from_counts((200, 200), (0, 900), (0, 150)).unwrap();
    assert_eq!(Confusion::from_report(&full).f1(), 1.0);
}

#[test]
fn perfect_policy_scores_perfectly() {
    let env = ToyEnv::default();
    let m = evaluate_with(&env, |o: &Observation| Ok(ToyEnv::best_action(o)), 20, 1).unwrap();
    assert_eq!(m.trials.len(), 20);
    assert_eq!(m.f1, 1.0);
    assert_eq!(m.mean_f1, 1.0);
    assert_eq!(m.mean_reward, 100.0);
    assert_eq!(m.std_reward, 0.0);
}

#[test]
fn evaluation_is_seeded() {
    let env = ToyEnv::default();
    let lazy = |_: &Observation| Ok(Action::new([0.0, 0.0, 0.1, 0.1]));
    let a = evaluate_with(&env, lazy, 30, 9).unwrap();
    let b = evaluate_with(&env, lazy, 30, 9).unwrap();
    let c = evaluate_with(&env, lazy, 30, 10).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.trials[0].seed, c.trials[0].seed);
    assert!(a.trials.iter().enumerate().all(|(i, t)| t.index == i));
}

#[test]
fn zero_trials_rejected() {
    let r = evaluate_with(&ToyEnv::default(), |_: &Observation| Ok(Action::new([0.0; 4])), 0, 0);
    assert!(matches!(r, Err(Error::InvalidArgument(_))));
}

/// Resets fail for every seed divisible by three.
struct Picky;

impl Environment for Picky {
    type State = <ToyEnv as Environment>::State;

    fn reset(&self, seed: u64) -> Result<(Self::State, Observation)> {
        if seed % 3 == 0 {
            return Err(Error::ResetFailed { attempts: 1, reason: "picky".into() });
        }
        ToyEnv::default().reset(seed)
    }

    fn execute(&self, state: &Self::State, action: &Action) -> Result<crate::env::Outcome> {
        ToyEnv::default().execute(state, action)
    }
}

#[test]
fn failed_resets_are_replaced() {
    let m = evaluate_with(&Picky, |o: &Observation| Ok(ToyEnv::best_action(o)), 25, 2).unwrap();
    assert_eq!(m.trials.len(), 25);
    assert!(m.skipped.iter().all(|s| s % 3 == 0));
    assert!(m.trials.iter().all(|t| t.seed % 3 != 0));
}

#[test]
fn pooled_and_trial_mean_f1_differ() {
    let trial = |i: usize, c: Confusion, reward: f64| TrialRecord {
        index: i,
        seed: i as u64,
        observation: Observation([0.0; 12]),
        action: Action::new([0.0; 4]),
        confusion: c,
        f1: c.f1(),
        reward,
        settled: true,
    };
    let m = Metrics::from_trials(vec![trial(0, counts(100, 0, 0), 100.0), trial(1, counts(0, 0, 10), -20.0)], vec![])
        .unwrap();
    assert_eq!(m.confusion, counts(100, 0, 10));
    assert!((m.f1 - 100.0 / 105.0).abs() < 1e-15);
    assert_eq!(m.mean_f1, 0.5);
    assert_eq!(m.mean_reward, 40.0);
    assert_eq!(m.std_reward, 60.0);
}

#[test]
fn conditions_toggle_one_randomization_each() {
    let base = EnvConfig::default();
    assert_eq!(Condition::Original.apply(&base), base);
    let b = Condition::RandomBlanket.apply(&base);
    assert!(b.vary_blanket && !b.vary_body);
    let s = Condition::RandomBody.apply(&base);
    assert!(s.vary_body && !s.vary_blanket);
    for c in Condition::ALL {
        assert_eq!(c.name().parse::<Condition>().unwrap(), c);
    }
}

fn row(target: Target, condition: Condition, f1: f64) -> EvalRow {
    let c = Confusion { tp: 90, fp: 5, fn_: 10 };
    EvalRow {
        target,
        condition,
        metrics: Metrics {
            confusion: c,
            f1,
            mean_f1: f1,
            mean_reward: 85.5,
            std_reward: 3.25,
            trials: vec![],
            skipped: vec![],
        },
    }
}

#[test]
fn csv_has_the_documented_columns() {
    let rows = vec![row(Target::UpperBody, Condition::Original, 0.9), row(Target::LeftArm, Condition::RandomBody, 0.5)];
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "target,condition,trials,TP,FP,FN,F1,mean_reward,std_reward");
    assert_eq!(lines[1], "upper_body,original,0,90,5,10,0.900000,85.500000,3.250000");
    assert_eq!(lines.len(), 3);
}

#[test]
fn markdown_table_has_one_row_per_target() {
    let rows: Vec<EvalRow> = [Target::UpperBody, Target::LowerBody]
        .into_iter()
        .flat_map(|t| Condition::ALL.map(|c| row(t, c, 0.8)))
        .collect();
    let md = markdown_table(&rows);
    let lines: Vec<&str> = md.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("| Upper Body |"));
    assert!(lines[3].contains("85.5 (±3.2)") || lines[3].contains("85.5 (±3.3)"));
    assert_eq!(lines[0].matches("F1 |").count(), 6);
}

proptest! {
    #[test]
    fn f1_identities_hold(t in 0usize..500, n in 0usize..2000, u in 0usize..2000, extra in 0usize..500) {
        let target_total = t + extra;
        let report = CoverageReport::from_counts((t, target_total), (n.min(u), u.max(n)), (0, 10)).unwrap();
        let (tp, fp, fn_) = metrics_from_report(&report);
        prop_assert_eq!(tp, t);
        prop_assert_eq!(tp + fn_, target_total);
        let f1 = Confusion { tp, fp, fn_ }.f1();
        prop_assert!((0.0..=1.0).contains(&f1));
        if tp > 0 {
            let expected = tp as f64 / (tp as f64 + 0.5 * (fp + fn_) as f64);
            prop_assert!((f1 - expected).abs() < 1e-15);
            prop_assert_eq!(f1 == 1.0, fp == 0 && fn_ == 0);
        } else {
            prop_assert_eq!(f1, 0.0);
        }
    }

    #[test]
    fn pooled_f1_is_f1_of_summed_counts(cs in prop::collection::vec((0usize..300, 0usize..300, 0usize..300), 1..20)) {
        let trials: Vec<TrialRecord> = cs
            .iter()
            .enumerate()
            .map(|(i, &(tp, fp, fn_))| {
                let c = Confusion { tp, fp, fn_ };
                TrialRecord {
                    index: i,
                    seed: i as u64,
                    observation: Observation([0.0; 12]),
                    action: Action::new([0.0; 4]),
                    confusion: c,
                    f1: c.f1(),
                    reward: tp as f64 - fp as f64,
                    settled: true,
                }
            })
            .collect();
        let m = Metrics::from_trials(trials, vec![]).unwrap();
        let total = cs.iter().fold(Confusion::default(), |a, &(tp, fp, fn_)| a + Confusion { tp, fp, fn_ });
        prop_assert_eq!(m.f1, total.f1());
        prop_assert!(m.std_reward >= 0.0);
    }
}
