//! Exact computations for the two-walker urn.
//!
//! Two walkers share the segment −1, 0, 1 and start at 0 with left weight a
//! and right weight b. A walker at 0 picks the left edge with probability
//! proportional to its current weight; a walker at ±1 must return. Every
//! traversal adds 1 to the edge traversed.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest half-length accepted by [`enumerate_paths`].
pub const MAX_HALF_LENGTH: u32 = 6;

/// One move: which walker (1 or 2) moved, and whether it moved left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub walker: u8,
    pub left: bool,
}

/// A path of Path_{2l} with its probability and statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub symbols: Vec<Symbol>,
    pub probability: BigRational,
    /// Number of traversals of the left edge.
    pub left_traversals: u32,
    /// Whether the walker returning to the centre at the final step comes from the left.
    pub returns_from_left: bool,
}

/// Result of the exhaustive enumeration of Path_{2l}.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnumeration {
    pub l: u32,
    pub paths: Vec<PathRecord>,
    /// Σ P(ρ)·(a + x(ρ))/(a + b + 2l).
    pub e: BigRational,
    /// Σ P(ρ)·left(ρ).
    pub q: BigRational,
    /// P(the next meeting in the centre happens after exactly 2l steps).
    pub mass: BigRational,
}

#[derive(Clone, Copy)]
enum Schedule {
    /// Walker chosen by a fair coin at each step.
    Uniform,
    /// Walker 1 at odd steps, walker 2 at even steps.
    Alternating,
}

struct Walk<'a> {
    a: &'a BigRational,
    b: &'a BigRational,
    steps: u32,
    schedule: Schedule,
    /// Discard histories in which both walkers are back at 0 before `steps`.
    first_meeting_only: bool,
}

struct Leaf<'a> {
    symbols: &'a [Symbol],
    probability: &'a BigRational,
    positions: [i8; 2],
    left_traversals: u32,
}

impl Walk<'_> {
    fn run(&self, visit: &mut dyn FnMut(&Leaf<'_>)) {
        let mut symbols = Vec::with_capacity(self.steps as usize);
        self.dfs(0, [0, 0], 0, BigRational::one(), &mut symbols, visit);
    }

    fn dfs(
        &self,
        t: u32,
        pos: [i8; 2],
        left: u32,
        prob: BigRational,
        symbols: &mut Vec<Symbol>,
        visit: &mut dyn FnMut(&Leaf<'_>),
    ) {
        if t == self.steps {
            visit(&Leaf { symbols, probability: &prob, positions: pos, left_traversals: left });
            return;
        }
        if self.first_meeting_only && t > 0 && pos == [0, 0] {
            return;
        }
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let walkers: &[(usize, Option<BigRational>)] = &match self.schedule {
            Schedule::Uniform => vec![(0, Some(half.clone())), (1, Some(half))],
            Schedule::Alternating => vec![((t % 2) as usize, None)],
        };
        for (m, coin) in walkers {
            let m = *m;
            let p_walker = coin.clone().unwrap_or_else(BigRational::one);
            let here = pos[m];
            for go_left in [true, false] {
                let (p_move, to) = if here == 0 {
                    let total = self.a + self.b + BigRational::from_integer(BigInt::from(t));
                    let w_left = self.a + BigRational::from_integer(BigInt::from(left));
                    if go_left {
                        (w_left / total, -1)
                    } else {
                        ((total.clone() - w_left) / total, 1)
                    }
                } else if (here == 1) == go_left {
                    (BigRational::one(), 0)
                } else {
                    continue;
                };
                let crosses_left = here == -1 || to == -1;
                let mut next = pos;
                next[m] = to;
                symbols.push(Symbol { walker: m as u8 + 1, left: go_left });
                self.dfs(t + 1, next, left + u32::from(crosses_left), &prob * &p_walker * p_move, symbols, visit);
                symbols.pop();
            }
        }
    }
}

fn check_weights(a: &BigRational, b: &BigRational) -> Result<()> {
    if a <= &BigRational::zero() || b <= &BigRational::zero() {
        return Err(Error::Domain("urn weights must be positive".into()));
    }
    Ok(())
}

fn int(n: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Enumerate Path_{2l} under the uniform-random scheduler and accumulate
/// E_{a,b,l} and q_{a,b,l}.
pub fn enumerate_paths(a: &BigRational, b: &BigRational, l: u32) -> Result<PathEnumeration> {
    check_weights(a, b)?;
    if l == 0 || l > MAX_HALF_LENGTH {
        return Err(Error::Size(format!("half-length must be in 1..={MAX_HALF_LENGTH}, got {l}")));
    }
    let denom = a + b + int(2 * l);
    let mut out = PathEnumeration {
        l,
        paths: Vec::new(),
        e: BigRational::zero(),
        q: BigRational::zero(),
        mass: BigRational::zero(),
    };
    let walk = Walk { a, b, steps: 2 * l, schedule: Schedule::Uniform, first_meeting_only: true };
    walk.run(&mut |leaf| {
        if leaf.positions != [0, 0] {
            return;
        }
        let last = leaf.symbols[leaf.symbols.len() - 1];
        // The last walker moves from ±1 to 0; from −1 it moves right.
        let returns_from_left = !last.left;
        out.e += leaf.probability * (a + int(leaf.left_traversals)) / &denom;
        if returns_from_left {
            out.q += leaf.probability;
        }
        out.mass += leaf.probability;
        out.paths.push(PathRecord {
            symbols: leaf.symbols.to_vec(),
            probability: leaf.probability.clone(),
            left_traversals: leaf.left_traversals,
            returns_from_left,
        });
    });
    Ok(out)
}

/// Total probability of all histories of `steps` moves (no filtering).
pub fn unfiltered_mass(a: &BigRational, b: &BigRational, steps: u32) -> Result<BigRational> {
    check_weights(a, b)?;
    if steps > 2 * MAX_HALF_LENGTH {
        return Err(Error::Size("too many steps".into()));
    }
    let mut total = BigRational::zero();
    Walk { a, b, steps, schedule: Schedule::Uniform, first_meeting_only: false }.run(&mut |leaf| {
        total += leaf.probability;
    });
    Ok(total)
}

/// Expected left-edge weight fraction after one four-step round of the
/// alternating scheduler, started from left weight a and right weight b.
pub fn alternating_martingale_check(a: &BigRational, b: &BigRational) -> Result<BigRational> {
    check_weights(a, b)?;
    let mut sum = BigRational::zero();
    let denom = a + b + int(4);
    Walk { a, b, steps: 4, schedule: Schedule::Alternating, first_meeting_only: false }.run(&mut |leaf| {
        debug_assert_eq!(leaf.positions, [0, 0]);
        sum += leaf.probability * (a + int(leaf.left_traversals)) / &denom;
    });
    Ok(sum)
}

/// State (l, E_{a,b,l}, q_{a,b,l}) of the two-walker recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct UrnRecursionState {
    pub a: BigRational,
    pub b: BigRational,
    pub l: u32,
    pub e: BigRational,
    pub q: BigRational,
}

impl UrnRecursionState {
    /// The l = 1 values, from the two-step paths: walker m leaves 0 with
    /// probability ½ each and returns on the next step.
    pub fn base(a: &BigRational, b: &BigRational) -> Result<Self> {
        check_weights(a, b)?;
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let s = a + b;
        let p_left = a / &s;
        let p_right = b / &s;
        // Gap 2: the same walker that left returns, with probability ½.
        let e = &half * (&p_left * (a + int(2)) / (&s + int(2)) + &p_right * a / (&s + int(2)));
        let q = &half * &p_left;
        Ok(Self { a: a.clone(), b: b.clone(), l: 1, e, q })
    }

    /// Closed form E = q = 2^{-l}·a/(a+b).
    pub fn closed_form(a: &BigRational, b: &BigRational, l: u32) -> BigRational {
        a / (a + b) / BigRational::from_integer(BigInt::from(2).pow(l))
    }

    /// Advance from l to l + 1.
    pub fn step(&self) -> Self {
        let s = &self.a + &self.b;
        let two_l = int(2 * self.l);
        let one = BigRational::one();
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
        let diff = &self.e - &self.q;
        let k1 = (&s + &two_l - &one) * (&s + &two_l + int(2));
        let e = &half * &self.e + &diff / k1;
        let q = &half * &self.q + quarter * (&s + &two_l) / (&s + &two_l - &one) * &diff;
        Self { a: self.a.clone(), b: self.b.clone(), l: self.l + 1, e, q }
    }
}

/// Reachable limit fractions {(a + 2x)/(a + b + 2l) : 0 ≤ x ≤ l, 1 ≤ l ≤ bound}.
pub fn reachable_fraction_set(a: &BigRational, b: &BigRational, bound: u32) -> Result<BTreeSet<BigRational>> {
    check_weights(a, b)?;
    let mut out = BTreeSet::new();
    for l in 1..=bound {
        for x in 0..=l {
            out.insert((a + int(2 * x)) / (a + b + int(2 * l)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn enumeration_examples() {
        let e = enumerate_paths(&r(1, 1), &r(1, 1), 1).unwrap();
        assert_eq!((e.e.clone(), e.q.clone()), (r(1, 4), r(1, 4)));
        assert_eq!(e.paths.len(), 4);
        let e = enumerate_paths(&r(1, 1), &r(1, 1), 2).unwrap();
        assert_eq!((e.e, e.q), (r(1, 8), r(1, 8)));
        let e = enumerate_paths(&r(2, 1), &r(3, 1), 1).unwrap();
        assert_eq!((e.e, e.q), (r(1, 5), r(1, 5)));
        assert!(matches!(enumerate_paths(&r(1, 1), &r(1, 1), 7), Err(Error::Size(_))));
    }

    #[test]
    fn gap_law_is_geometric() {
        for l in 1..=4 {
            let e = enumerate_paths(&r(3, 2), &r(1, 3), l).unwrap();
            assert_eq!(e.mass, BigRational::new(BigInt::one(), BigInt::from(2).pow(l)));
        }
    }

    #[test]
    fn paths_meet_only_at_the_ends() {
        let e = enumerate_paths(&r(1, 1), &r(2, 1), 3).unwrap();
        for p in &e.paths {
            let mut pos = [0i8; 2];
            for (t, s) in p.symbols.iter().enumerate() {
                let m = usize::from(s.walker - 1);
                pos[m] = if pos[m] == 0 { if s.left { -1 } else { 1 } } else { 0 };
                if t % 2 == 1 && t + 1 < p.symbols.len() {
                    assert!(pos[0] != 0 && pos[1] != 0);
                }
            }
            assert_eq!(pos, [0, 0]);
        }
    }

    #[test]
    fn unfiltered_histories_sum_to_one() {
        for steps in 0..=8 {
            assert_eq!(unfiltered_mass(&r(2, 3), &r(5, 7), steps).unwrap(), BigRational::one());
        }
    }

    #[test]
    fn alternating_identity() {
        assert_eq!(alternating_martingale_check(&r(1, 1), &r(1, 1)).unwrap(), r(1, 2));
        assert_eq!(alternating_martingale_check(&r(1, 1), &r(3, 1)).unwrap(), r(1, 4));
        assert_eq!(alternating_martingale_check(&r(5, 1), &r(2, 1)).unwrap(), r(5, 7));
    }

    #[test]
    fn alternating_identity_matches_the_four_term_sum() {
        // Oracle: the four sub-paths written out by hand.
        for (a, b) in [(1, 1), (1, 3), (5, 2), (7, 4)] {
            let (a, b) = (r(a, 1), r(b, 1));
            let s = &a + &b;
            let one = r(1, 1);
            let two = r(2, 1);
            let four = r(4, 1);
            let sum = &a / &s * (&a + &one) / (&s + &one) * (&a + &four) / (&s + &four)
                + &a / &s * &b / (&s + &one) * (&a + &two) / (&s + &four)
                + &b / &s * &a / (&s + &one) * (&a + &two) / (&s + &four)
                + &b / &s * (&b + &one) / (&s + &one) * &a / (&s + &four);
            assert_eq!(alternating_martingale_check(&a, &b).unwrap(), sum);
            assert_eq!(sum, &a / &s);
        }
    }

    #[test]
    fn recursion_examples() {
        let base = UrnRecursionState::base(&r(1, 1), &r(1, 1)).unwrap();
        assert_eq!((base.e.clone(), base.q.clone()), (r(1, 4), r(1, 4)));
        let next = base.step();
        assert_eq!(next.e, base.e / r(2, 1));
        let s = UrnRecursionState::base(&r(1, 1), &r(3, 1)).unwrap().step();
        assert_eq!((s.l, s.e, s.q), (2, r(1, 16), r(1, 16)));
    }

    #[test]
    fn recursion_with_unequal_inputs() {
        // Hand evaluation: a = b = 1, l = 1, E = 1/2, q = 1/4:
        // E' = 1/4 + (1/4)/(3·6) = 19/72, q' = 1/8 + (1/4)(4/3)(1/4) = 5/24.
        let s = UrnRecursionState { a: r(1, 1), b: r(1, 1), l: 1, e: r(1, 2), q: r(1, 4) }.step();
        assert_eq!((s.e, s.q), (r(19, 72), r(5, 24)));
    }

    #[test]
    fn reachable_fractions() {
        let one = reachable_fraction_set(&r(1, 1), &r(1, 1), 1).unwrap();
        assert_eq!(one.into_iter().collect::<Vec<_>>(), vec![r(1, 4), r(3, 4)]);
        let two = reachable_fraction_set(&r(1, 1), &r(1, 1), 2).unwrap();
        for f in [r(1, 6), r(1, 2), r(5, 6), r(1, 4), r(3, 4)] {
            assert!(two.contains(&f));
        }
        assert_eq!(two.len(), 5);
        let many = reachable_fraction_set(&r(2, 1), &r(3, 1), 12).unwrap();
        assert!(!many.contains(&r(0, 1)) && !many.contains(&r(1, 1)));
    }
}
