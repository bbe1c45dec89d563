//! Urn processes.
//!
//! [`Urn`] covers Pólya, asymmetric and randomly reinforced urns with real
//! counts. [`two_player`] holds the exact computations for the two-walker
//! urn on the three-node segment.

pub mod two_player;

use num_integer::Integer;
use rand::{Rng, RngExt};

use crate::error::{Error, Result};
use crate::special::BetaParams;

pub use two_player::{
    alternating_martingale_check, enumerate_paths, reachable_fraction_set, PathEnumeration, PathRecord, Symbol,
    UrnRecursionState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Color {
    White,
    Black,
}

/// A distribution with finite support on the nonnegative integers.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDist {
    values: Vec<u32>,
    cumulative: Vec<f64>,
}

impl FiniteDist {
    pub fn new(pairs: &[(u32, f64)]) -> Result<Self> {
        if pairs.is_empty() || pairs.iter().any(|(_, p)| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Domain("distribution needs nonnegative probabilities".into()));
        }
        let total: f64 = pairs.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("probabilities sum to {total}, not 1")));
        }
        let mut acc = 0.0;
        let cumulative = pairs
            .iter()
            .map(|(_, p)| {
                acc += p / total;
                acc
            })
            .collect();
        Ok(Self { values: pairs.iter().map(|(v, _)| *v).collect(), cumulative })
    }

    pub fn point(value: u32) -> Self {
        Self { values: vec![value], cumulative: vec![1.0] }
    }

    pub fn prob_of(&self, value: u32) -> f64 {
        let mut prev = 0.0;
        let mut total = 0.0;
        for (v, c) in self.values.iter().zip(&self.cumulative) {
            if *v == value {
                total += c - prev;
            }
            prev = *c;
        }
        total
    }

    pub fn mean(&self) -> f64 {
        let mut prev = 0.0;
        self.values
            .iter()
            .zip(&self.cumulative)
            .map(|(v, c)| {
                let m = f64::from(*v) * (c - prev);
                prev = *c;
                m
            })
            .sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.random();
        let i = self.cumulative.partition_point(|c| *c <= u).min(self.values.len() - 1);
        self.values[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReplacementRule {
    /// Return the ball with `delta` more of its colour.
    Polya { delta: f64 },
    Asymmetric { delta_white: f64, delta_black: f64 },
    /// A drawn black ball is replaced by M ~ `black` black balls, a drawn white
    /// ball by N ~ `white` white balls.
    Random { black: FiniteDist, white: FiniteDist },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Urn {
    white: f64,
    black: f64,
    rule: ReplacementRule,
    draws: u64,
}

impl Urn {
    pub fn new(white: f64, black: f64, rule: ReplacementRule) -> Result<Self> {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        if !pos(white) || !pos(black) {
            return Err(Error::Domain(format!("urn counts must be positive, got {white}, {black}")));
        }
        match &rule {
            ReplacementRule::Polya { delta } if !pos(*delta) => {
                return Err(Error::Domain("Pólya increment must be positive".into()))
            }
            ReplacementRule::Asymmetric { delta_white, delta_black } if !pos(*delta_white) || !pos(*delta_black) => {
                return Err(Error::Domain("urn increments must be positive".into()))
            }
            // A black draw must never remove the last black ball.
            ReplacementRule::Random { black, .. } if black.prob_of(0) > 0.0 => {
                return Err(Error::Domain("black replacement law must not charge 0".into()))
            }
            _ => {}
        }
        Ok(Self { white, black, rule, draws: 0 })
    }

    pub fn white(&self) -> f64 {
        self.white
    }

    pub fn black(&self) -> f64 {
        self.black
    }

    pub fn rule(&self) -> &ReplacementRule {
        &self.rule
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn white_fraction(&self) -> f64 {
        self.white / (self.white + self.black)
    }

    /// Draw one ball and apply the replacement rule.
    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Color {
        let u: f64 = rng.random();
        let color = if u * (self.white + self.black) < self.white { Color::White } else { Color::Black };
        match (&self.rule, color) {
            (ReplacementRule::Polya { delta }, Color::White) => self.white += delta,
            (ReplacementRule::Polya { delta }, Color::Black) => self.black += delta,
            (ReplacementRule::Asymmetric { delta_white, .. }, Color::White) => self.white += delta_white,
            (ReplacementRule::Asymmetric { delta_black, .. }, Color::Black) => self.black += delta_black,
            (ReplacementRule::Random { white, .. }, Color::White) => {
                self.white += f64::from(white.sample(rng)) - 1.0;
            }
            (ReplacementRule::Random { black, .. }, Color::Black) => {
                self.black += f64::from(black.sample(rng)) - 1.0;
            }
        }
        self.draws += 1;
        color
    }
}

/// Parameters (w/Δ, b/Δ) of the Beta law of the limiting white fraction.
pub fn polya_limit_params(w: f64, b: f64, delta: f64) -> Result<BetaParams> {
    if !(w > 0.0 && b > 0.0 && delta > 0.0) {
        return Err(Error::Domain(format!("Pólya parameters must be positive, got ({w}, {b}, {delta})")));
    }
    BetaParams::new(w / delta, b / delta)
}

/// The urn describing the exit directions at a node of the λ-biased walk on ℤ
/// with λ = p/q: white balls stand for the left edge, black for the right.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasedNodeUrn {
    pub urn: Urn,
    pub p: u64,
    pub q: u64,
}

impl BiasedNodeUrn {
    /// Weight of the left edge implied by the urn contents.
    pub fn left_weight(&self) -> f64 {
        self.urn.white() / self.q as f64
    }

    pub fn right_weight(&self) -> f64 {
        self.urn.black() / self.p as f64
    }

    pub fn lambda(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

/// Urn for λ = p/q with left/right edge weights `l0`, `r0`. The fraction is
/// reduced to lowest terms.
pub fn biased_node_urn(p: u64, q: u64, l0: f64, r0: f64) -> Result<BiasedNodeUrn> {
    if p == 0 || q == 0 {
        return Err(Error::Domain("λ = p/q needs p, q > 0".into()));
    }
    let g = p.gcd(&q);
    let (p, q) = (p / g, q / g);
    let urn = Urn::new(
        q as f64 * l0,
        p as f64 * r0,
        ReplacementRule::Asymmetric { delta_white: 2.0 * q as f64, delta_black: 2.0 * p as f64 },
    )?;
    Ok(BiasedNodeUrn { urn, p, q })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn polya_draw_adds_delta() {
        let mut rng = seeded(3);
        let mut urn = Urn::new(1.0, 1.0, ReplacementRule::Polya { delta: 2.0 }).unwrap();
        match urn.draw(&mut rng) {
            Color::White => assert_eq!((urn.white(), urn.black()), (3.0, 1.0)),
            Color::Black => assert_eq!((urn.white(), urn.black()), (1.0, 3.0)),
        }
    }

    #[test]
    fn draw_probability_is_proportional() {
        let mut rng = seeded(11);
        let n = 200_000;
        let mut whites = 0;
        for _ in 0..n {
            let mut urn = Urn::new(2.0, 0.5, ReplacementRule::Polya { delta: 1.0 }).unwrap();
            whites += usize::from(urn.draw(&mut rng) == Color::White);
        }
        let p = whites as f64 / n as f64;
        let se = (0.8f64 * 0.2 / n as f64).sqrt();
        assert!((p - 0.8).abs() < 4.0 * se, "{p}");
    }

    #[test]
    fn random_rule_replaces_with_m_balls() {
        let mut rng = seeded(5);
        let rule = ReplacementRule::Random { black: FiniteDist::point(3), white: FiniteDist::point(2) };
        let mut urn = Urn::new(1e-12, 1.0, rule).unwrap();
        assert_eq!(urn.draw(&mut rng), Color::Black);
        assert_eq!(urn.black(), 3.0);
        let zero = ReplacementRule::Random { black: FiniteDist::new(&[(0, 0.5), (2, 0.5)]).unwrap(), white: FiniteDist::point(1) };
        assert!(Urn::new(1.0, 1.0, zero).is_err());
    }

    #[test]
    fn finite_dist_sampling() {
        let d = FiniteDist::new(&[(1, 0.25), (4, 0.75)]).unwrap();
        assert_eq!(d.mean(), 3.25);
        let mut rng = seeded(9);
        let n = 100_000;
        let ones = (0..n).filter(|_| d.sample(&mut rng) == 1).count() as f64 / n as f64;
        assert!((ones - 0.25).abs() < 0.006);
        assert!(FiniteDist::new(&[(1, 0.5)]).is_err());
    }

    #[test]
    fn polya_params() {
        let p = polya_limit_params(1.0, 1.0, 2.0).unwrap();
        assert_eq!((p.alpha, p.beta), (0.5, 0.5));
        let u = polya_limit_params(2.0, 2.0, 2.0).unwrap();
        assert_eq!((u.alpha, u.beta), (1.0, 1.0));
        let s = polya_limit_params(3.0, 5.0, 0.5).unwrap();
        let t = polya_limit_params(3.0 * 7.0, 5.0 * 7.0, 0.5 * 7.0).unwrap();
        assert!((s.alpha - t.alpha).abs() < 1e-12 && (s.beta - t.beta).abs() < 1e-12);
        assert!(polya_limit_params(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn biased_node_urn_construction() {
        let u = biased_node_urn(3, 2, 1.0, 1.0).unwrap();
        assert_eq!((u.urn.white(), u.urn.black()), (2.0, 3.0));
        assert_eq!(u.urn.rule(), &ReplacementRule::Asymmetric { delta_white: 4.0, delta_black: 6.0 });
        let sym = biased_node_urn(5, 5, 0.3, 0.9).unwrap();
        assert_eq!((sym.p, sym.q), (1, 1));
        assert_eq!((sym.urn.white(), sym.urn.black()), (0.3, 0.9));
        assert!(biased_node_urn(0, 1, 1.0, 1.0).is_err());
        // First draw matches the walk: P(right) = λ r0 / (l0 + λ r0).
        let (l0, r0) = (1.7, 0.4);
        let v = biased_node_urn(3, 2, l0, r0).unwrap();
        let p_black = v.urn.black() / (v.urn.white() + v.urn.black());
        assert!((p_black - 1.5 * r0 / (l0 + 1.5 * r0)).abs() < 1e-15);
    }

    #[test]
    fn biased_node_urn_tracks_weights() {
        let mut rng = seeded(1);
        let mut u = biased_node_urn(3, 2, 1.0, 1.0).unwrap();
        let (mut l, mut r) = (1.0, 1.0);
        for _ in 0..50 {
            match u.urn.draw(&mut rng) {
                Color::White => l += 2.0,
                Color::Black => r += 2.0,
            }
            assert!((u.left_weight() - l).abs() < 1e-9 && (u.right_weight() - r).abs() < 1e-9);
        }
    }
}
