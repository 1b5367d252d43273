//! Engines against each other and against brute-force model search, on
//! profiles dense enough that a fair share of the formulas is unsatisfiable.

use grsat::engine::{solve, Engine, Limits, SolveError, Verdict};
use grsat::formula::Formula;
use grsat::gen::{generate, Profile};
use grsat::kripke::{enumerate_models, Enumeration};

fn verdict(engine: Engine, f: &Formula) -> Verdict {
    // with a model requested, `solve` rejects any witness that fails `f`
    solve(engine, f, Limits::default(), true)
        .unwrap_or_else(|e| panic!("{engine} on {f}: {e}"))
        .verdict
}

/// A model found by enumeration proves satisfiability.
fn enumeration_agrees(f: &Formula, v: Verdict) -> bool {
    match enumerate_models(f, 3, 1 << 16) {
        Enumeration::Found(..) => v == Verdict::Sat,
        Enumeration::NoneFound | Enumeration::Inconclusive => true,
    }
}

/// The conjunction of `k` generated formulas; conjuncts over few atoms and
/// one or two relations often contradict each other.
fn conjunction(seed: u64, k: u64, profile: &Profile) -> Formula {
    Formula::conj((0..k).map(|j| generate(seed * k + j, profile)))
}

/// The standard engine may need exponential time on these profiles; a
/// capped run that gives up is skipped.
fn standard_verdict(f: &Formula) -> Option<Verdict> {
    let limits = Limits {
        max_steps: 50_000,
        ..Limits::default()
    };
    match solve(Engine::Standard, f, limits, true) {
        Ok(o) => Some(o.verdict),
        Err(SolveError::ResourceLimit { .. }) => None,
        Err(e) => panic!("standard on {f}: {e}"),
    }
}

#[test]
fn plain_engines_agree_on_dense_formulas() {
    let profile = Profile {
        max_size: 12,
        max_n: 3,
        atoms: 2,
        relations: 1,
        ..Profile::default()
    };
    let (mut unsat, mut skipped) = (0, 0);
    for seed in 1..=400 {
        let f = conjunction(seed, 3, &profile);
        let opt = verdict(Engine::Optimized, &f);
        match standard_verdict(&f) {
            Some(v) => assert_eq!(opt, v, "standard on {f}"),
            None => skipped += 1,
        }
        assert_eq!(opt, verdict(Engine::Inverse, &f), "inverse on {f}");
        assert!(
            enumeration_agrees(&f, opt),
            "enumeration found a model of {f}"
        );
        unsat += (opt == Verdict::Unsat) as u32;
    }
    println!("unsat={unsat} skipped={skipped}");
    assert!(unsat >= 60, "only {unsat} unsatisfiable formulas");
    assert!(
        skipped <= 60,
        "standard engine gave up on {skipped} formulas"
    );
}

#[test]
fn inverse_engine_against_enumeration() {
    let profile = Profile {
        max_size: 10,
        max_n: 2,
        atoms: 2,
        relations: 2,
        allow_inverse: true,
        allow_intersection: true,
        ..Profile::default()
    };
    let mut unsat = 0;
    for seed in 1..=600 {
        let f = conjunction(seed, 3, &profile);
        let v = verdict(Engine::Inverse, &f);
        assert!(
            enumeration_agrees(&f, v),
            "enumeration found a model of {f}"
        );
        unsat += (v == Verdict::Unsat) as u32;
    }
    println!("unsat={unsat}");
    assert!(unsat >= 60, "only {unsat} unsatisfiable formulas");
}

#[test]
fn unsatisfiable_conjunctions_of_satisfiable_parts() {
    // a formula and its negation, each satisfiable, never both
    let profile = Profile {
        max_size: 14,
        max_n: 3,
        atoms: 2,
        relations: 1,
        allow_inverse: true,
        ..Profile::default()
    };
    for seed in 1..=300 {
        let f = generate(seed, &profile);
        let both = Formula::and(f.clone(), Formula::not(f.clone()));
        assert_eq!(verdict(Engine::Inverse, &both), Verdict::Unsat, "{both}");
        let either = Formula::or(f.clone(), Formula::not(f.clone()));
        assert_eq!(verdict(Engine::Inverse, &either), Verdict::Sat, "{either}");
        if !f.contains_inverse_or_intersection() {
            assert_eq!(verdict(Engine::Optimized, &both), Verdict::Unsat, "{both}");
            assert_eq!(verdict(Engine::Standard, &both), Verdict::Unsat, "{both}");
        }
    }
}
