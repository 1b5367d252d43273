//! Seeded random formulas for differential testing.
//!
//! The generator draws from ChaCha8 (`rand_chacha`), seeded with
//! [`SeedableRng::seed_from_u64`]. Bounded integers are taken from the high
//! half of `next_u64() * bound` (128-bit product), so output depends only on
//! the ChaCha8 stream and is identical on every platform.
//!
//! A formula is grown top-down from a size budget. Each node takes what it
//! needs from the budget and splits the rest among its subformulas; the
//! chance of stopping at an atom rises with depth, which keeps most formulas
//! shallow.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::formula::{bit_length, measures, Formula, RelationExpr, Role};

/// Shape of the generated formulas. Atoms are named `p1, p2, …` and
/// relations `R1, R2, …`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Profile {
    /// Upper bound on the size of the formula.
    pub max_size: u64,
    /// Upper bound on every number in a modality.
    pub max_n: u64,
    pub atoms: usize,
    pub relations: usize,
    pub allow_inverse: bool,
    pub allow_intersection: bool,
    /// Use `dia`/`box` instead of `ge`/`le`.
    pub allow_legacy: bool,
}

impl Default for Profile {
    fn default() -> Self {
        Profile {
            max_size: 25,
            max_n: 4,
            atoms: 3,
            relations: 2,
            allow_inverse: false,
            allow_intersection: false,
            allow_legacy: false,
        }
    }
}

struct Gen<'p> {
    rng: ChaCha8Rng,
    profile: &'p Profile,
}

impl Gen<'_> {
    /// Uniform in `0..bound`.
    fn below(&mut self, bound: u64) -> u64 {
        ((u128::from(self.rng.next_u64()) * u128::from(bound)) >> 64) as u64
    }

    fn chance(&mut self, num: u64, den: u64) -> bool {
        self.below(den) < num
    }

    fn atom(&mut self) -> Formula {
        let i = self.below(self.profile.atoms as u64) + 1;
        Formula::atom(format!("p{i}"))
    }

    fn relation_name(&mut self) -> String {
        format!("R{}", self.below(self.profile.relations as u64) + 1)
    }

    /// A relation expression costing at most `budget` size units.
    fn relation(&mut self, budget: u64) -> RelationExpr {
        let p = self.profile;
        if p.allow_intersection && p.relations > 1 && budget >= 3 && self.chance(1, 4) {
            let a = self.relation_name();
            let mut b = self.relation_name();
            while b == a {
                b = self.relation_name();
            }
            let mut roles = vec![Role::named(a), Role::named(b)];
            for r in roles.iter_mut() {
                // each inverse mark costs one more
                if p.allow_inverse && budget >= 4 && self.chance(1, 3) {
                    *r = r.inverted();
                    break;
                }
            }
            return RelationExpr::from_roles(roles);
        }
        if p.allow_inverse && budget >= 2 && self.chance(1, 3) {
            return RelationExpr::inverse(self.relation_name());
        }
        RelationExpr::name(self.relation_name())
    }

    fn formula(&mut self, budget: u64, depth: u32) -> Formula {
        let stop = match depth {
            0..=2 => 0,
            3 => 2,
            4 => 4,
            _ => 6,
        };
        if budget <= 1 || self.chance(stop, 8) {
            return self.atom();
        }
        loop {
            match self.below(6) {
                0 if depth > 0 => {
                    return Formula::not(self.formula(budget - 1, depth + 1));
                }
                1 | 2 if budget >= 3 => {
                    let rest = budget - 1;
                    let left = 1 + self.below(rest - 1);
                    let a = self.formula(left, depth + 1);
                    let used = measures(&a).size;
                    let b = self.formula(rest - used, depth + 1);
                    return if self.chance(1, 2) {
                        Formula::and(a, b)
                    } else {
                        Formula::or(a, b)
                    };
                }
                3..=5 if budget >= 4 => return self.modal(budget, depth),
                _ if budget < 3 => return Formula::not(self.atom()),
                _ => {}
            }
        }
    }

    fn modal(&mut self, budget: u64, depth: u32) -> Formula {
        let mut n = self.below(self.profile.max_n + 1);
        if self.profile.allow_legacy {
            let rel = self.relation_name();
            while 2 + bit_length(n) + 1 > budget {
                n /= 2;
            }
            let body = self.formula(budget - 2 - bit_length(n), depth + 1);
            return if self.chance(1, 2) {
                Formula::dia(rel, n, body)
            } else {
                Formula::boxed(rel, n, body)
            };
        }
        while 1 + 1 + bit_length(n) + 1 > budget {
            n /= 2;
        }
        let rel = self.relation(budget - 2 - bit_length(n));
        let rel_cost = measures(&Formula::geq(rel.clone(), 0, Formula::atom("p"))).size - 3;
        let body = self.formula(budget - 1 - rel_cost - bit_length(n), depth + 1);
        if self.chance(1, 2) {
            Formula::geq(rel, n, body)
        } else {
            Formula::leq(rel, n, body)
        }
    }
}

/// The formula for `seed` under `profile`. Same inputs, same formula.
///
/// Panics if `max_size`, `atoms` or `relations` is zero.
pub fn generate(seed: u64, profile: &Profile) -> Formula {
    assert!(
        profile.max_size > 0 && profile.atoms > 0 && profile.relations > 0,
        "profile bounds must be positive"
    );
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        profile,
    };
    let f = g.formula(profile.max_size, 0);
    debug_assert!(measures(&f).size <= profile.max_size);
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use std::collections::BTreeSet;

    #[test]
    fn golden_seed_one() {
        assert_eq!(
            generate(1, &Profile::default()).to_string(),
            "(ge R1 1 (and (ge R2 1 p1) (or (ge R1 0 p2) p1)))"
        );
    }

    #[test]
    fn deterministic() {
        let p = Profile::default();
        assert_eq!(generate(1, &p), generate(1, &p));
        assert_ne!(generate(1, &p), generate(2, &p));
    }

    #[test]
    fn within_bounds() {
        for max_size in [1, 2, 3, 4, 5, 8, 12, 25, 40] {
            let p = Profile {
                max_size,
                allow_inverse: true,
                allow_intersection: true,
                ..Profile::default()
            };
            for seed in 0..300 {
                let f = generate(seed, &p);
                assert!(measures(&f).size <= max_size, "{f} for size {max_size}");
                assert!(f.max_number() <= p.max_n);
                assert_eq!(parse(&f.to_string()).unwrap(), f);
            }
        }
    }

    #[test]
    fn no_inverse_or_intersection_unless_allowed() {
        let p = Profile::default();
        for seed in 1..=500 {
            let text = generate(seed, &p).to_string();
            assert!(!text.contains("inv") && !text.contains("cap"), "{text}");
        }
        let p = Profile {
            allow_inverse: true,
            allow_intersection: true,
            ..Profile::default()
        };
        let all: String = (1..=200).map(|s| generate(s, &p).to_string()).collect();
        assert!(all.contains("(inv ") && all.contains("(cap "));
    }

    #[test]
    fn legacy_profile() {
        let p = Profile {
            allow_legacy: true,
            ..Profile::default()
        };
        for seed in 1..=200 {
            let f = generate(seed, &p);
            assert!(!f.contains_graded(), "{f}");
            assert!(measures(&f).size <= p.max_size);
        }
    }

    #[test]
    fn thousand_distinct() {
        let p = Profile::default();
        let set: BTreeSet<String> = (1..=1000).map(|s| generate(s, &p).to_string()).collect();
        assert_eq!(set.len(), 1000);
    }
}
