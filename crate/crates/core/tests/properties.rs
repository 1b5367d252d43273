use std::collections::BTreeSet;

use proptest::prelude::*;

use grsat::engine::{solve, Engine, Limits, SolveError, Verdict};
use grsat::formula::{
    measures, modernize, neg_nnf, parse, to_nnf, Closure, Formula, RelationExpr, Role,
};
use grsat::kripke::KripkeStructure;

#[derive(Clone, Copy)]
struct Syntax {
    inverse: bool,
    legacy: bool,
}

fn relation(inverse: bool) -> BoxedStrategy<RelationExpr> {
    if inverse {
        prop_oneof![
            Just(RelationExpr::name("R")),
            Just(RelationExpr::name("S")),
            Just(RelationExpr::inverse("R")),
            Just(RelationExpr::from_roles(vec![
                Role::named("R"),
                Role::named("S")
            ])),
            Just(RelationExpr::from_roles(vec![
                Role::named("R"),
                Role::inverse_of("S")
            ])),
        ]
        .boxed()
    } else {
        prop_oneof![Just(RelationExpr::name("R")), Just(RelationExpr::name("S"))].boxed()
    }
}

fn formula(syntax: Syntax) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![Just(Formula::atom("p")), Just(Formula::atom("q"))];
    leaf.prop_recursive(4, 24, 2, move |inner| {
        let mut options = vec![
            inner.clone().prop_map(Formula::not).boxed(),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Formula::and(a, b))
                .boxed(),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Formula::or(a, b))
                .boxed(),
            (relation(syntax.inverse), 0..4u64, inner.clone())
                .prop_map(|(r, n, f)| Formula::geq(r, n, f))
                .boxed(),
            (relation(syntax.inverse), 0..4u64, inner.clone())
                .prop_map(|(r, n, f)| Formula::leq(r, n, f))
                .boxed(),
        ];
        if syntax.legacy {
            options.push(
                (0..3u64, inner.clone())
                    .prop_map(|(n, f)| Formula::dia("R", n, f))
                    .boxed(),
            );
            options.push(
                (0..3u64, inner)
                    .prop_map(|(n, f)| Formula::boxed("R", n, f))
                    .boxed(),
            );
        }
        proptest::strategy::Union::new(options)
    })
}

const PLAIN: Syntax = Syntax {
    inverse: false,
    legacy: false,
};
const INVERSE: Syntax = Syntax {
    inverse: true,
    legacy: false,
};
const LEGACY: Syntax = Syntax {
    inverse: true,
    legacy: true,
};

/// A structure over `R`, `S`, `p`, `q` with 1 to 3 worlds.
fn structure() -> impl Strategy<Value = KripkeStructure> {
    (1..=3usize).prop_flat_map(|k| {
        (
            Just(k),
            proptest::collection::vec(any::<bool>(), 2 * k * k + 2 * k),
        )
            .prop_map(|(k, bits)| {
                let mut m = KripkeStructure::new(k);
                let mut it = bits.into_iter();
                for r in ["R", "S"] {
                    m.declare_relation(r);
                    for i in 0..k {
                        for j in 0..k {
                            if it.next().unwrap() {
                                m.add_edge(r, i, j);
                            }
                        }
                    }
                }
                for a in ["p", "q"] {
                    for w in 0..k {
                        if it.next().unwrap() {
                            m.set_true(a, w);
                        }
                    }
                }
                m
            })
    })
}

/// `clos` by the definition: close `{φ}` under immediate subformulas and `∼`.
fn naive_closure(f: &Formula) -> BTreeSet<Formula> {
    let mut set = BTreeSet::new();
    let mut todo = vec![f.clone()];
    while let Some(g) = todo.pop() {
        if !set.insert(g.clone()) {
            continue;
        }
        todo.push(neg_nnf(&g));
        if !matches!(g, Formula::Not(_)) {
            todo.extend(g.children().into_iter().cloned());
        }
    }
    set
}

proptest! {
    #[test]
    fn printing_round_trips(f in formula(LEGACY)) {
        prop_assert_eq!(parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn nnf_is_nnf_and_idempotent(f in formula(LEGACY)) {
        let g = to_nnf(&f);
        prop_assert!(g.is_nnf());
        prop_assert_eq!(to_nnf(&g), g.clone());
        prop_assert!(measures(&g).modal_depth <= measures(&f).modal_depth);
    }

    #[test]
    fn closure_matches_definition(f in formula(INVERSE)) {
        let g = to_nnf(&f);
        let clos = Closure::new(&g).unwrap();
        prop_assert_eq!(clos.to_set(), naive_closure(&g));
        prop_assert!(clos.len() as u64 <= 2 * measures(&f).size);
        for id in clos.ids() {
            prop_assert_eq!(clos.formula(clos.neg(id)), &neg_nnf(clos.formula(id)));
        }
    }

    #[test]
    fn negation_flips_truth(f in formula(LEGACY), m in structure()) {
        let neg = to_nnf(&Formula::not(f.clone()));
        let pos = m.truth_set(&f);
        let flipped: Vec<bool> = m.truth_set(&neg).into_iter().map(|b| !b).collect();
        prop_assert_eq!(pos.clone(), flipped);
        prop_assert_eq!(pos.clone(), m.truth_set(&to_nnf(&f)));
        prop_assert_eq!(pos, m.truth_set(&modernize(&f)));
    }

    #[test]
    fn models_satisfy_formulas(f in formula(LEGACY), m in structure()) {
        // a structure satisfying f at some world proves satisfiability
        let f = to_nnf(&modernize(&f));
        if let Some(w) = m.truth_set(&f).iter().position(|&b| b) {
            prop_assert!(m.check(w, &f));
            let engine = if f.contains_inverse_or_intersection() { Engine::Inverse } else { Engine::Optimized };
            prop_assert_eq!(solve(engine, &f, Limits::default(), true).unwrap().verdict, Verdict::Sat);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn engines_agree(f in formula(PLAIN)) {
        let opt = solve(Engine::Optimized, &f, Limits::default(), true).unwrap();
        let inv = solve(Engine::Inverse, &f, Limits::default(), true).unwrap();
        prop_assert_eq!(opt.verdict, inv.verdict);
        let capped = Limits { max_steps: 100_000, ..Limits::default() };
        match solve(Engine::Standard, &f, capped, true) {
            Ok(std) => prop_assert_eq!(opt.verdict, std.verdict),
            Err(SolveError::ResourceLimit { .. }) => {}
            Err(e) => panic!("{e}"),
        }
        if let Some(s) = &opt.system {
            // without inverses the witness is a tree over single relations
            for x in s.vars() {
                let preds: Vec<_> = s.preds(x).collect();
                match s.parent(x) {
                    None => prop_assert!(preds.is_empty()),
                    Some(p) => {
                        prop_assert_eq!(preds, vec![p]);
                        prop_assert_eq!(s.edge_mask(p, x).count_ones(), 1);
                    }
                }
            }
        }
        let bound = measures(&to_nnf(&f)).modal_depth + 1;
        prop_assert!(opt.stats.max_depth <= bound);
        prop_assert!(inv.stats.max_depth <= bound);
    }

    #[test]
    fn inverse_witnesses_check(f in formula(INVERSE)) {
        // `solve` checks the witness against f and errors if it fails
        let o = solve(Engine::Inverse, &f, Limits::default(), true).unwrap();
        let clos = Closure::new(&to_nnf(&f)).unwrap();
        prop_assert!(o.stats.max_depth <= clos.modal_depth(clos.root()) + 1);
        prop_assert_eq!(o.model.is_some(), o.verdict == Verdict::Sat);
        let neg = solve(Engine::Inverse, &Formula::not(f.clone()), Limits::default(), false).unwrap();
        // a formula and its negation cannot both be unsatisfiable
        prop_assert!(o.verdict == Verdict::Sat || neg.verdict == Verdict::Sat);
    }
}
