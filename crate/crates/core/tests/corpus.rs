mod common;

use common::*;

#[test]
fn corpus_is_large_enough() {
    assert!(corpus().len() >= 11);
}

#[test]
fn closed_forms_satisfy_their_recurrences() {
    let stats = corpus_self_check().unwrap();
    for c in ["0", "1", "1/2", "-1/2", "2"] {
        assert!(
            stats.self_coeffs.contains(&q(c)),
            "no recurrence with c = {c}"
        );
    }
    assert!(stats.resonant > 0);
    assert!(stats.non_resonant > 0);
}

#[test]
fn closed_forms_match_iteration() {
    let n = corpus_iteration_oracle(25, 3).unwrap();
    assert!(n > 1000);
}

#[test]
fn every_corpus_program_round_trips_through_the_printer() {
    for (name, src) in corpus() {
        let p = load(&src);
        let printed = p.program().to_string();
        let again = load(&printed);
        assert_eq!(again.program(), p.program(), "{name}");
    }
}
