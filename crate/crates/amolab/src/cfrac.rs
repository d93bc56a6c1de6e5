//! Exact continued-fraction arithmetic for frequencies.
//!
//! A frequency alpha in (0,1) is stored as a finite list of partial quotients
//! together with its big-integer convergents p_n/q_n. Everything downstream
//! (phases, resonance distances, norm distances) reduces against the deepest
//! convergent with exact integer arithmetic before any rounding happens, so
//! cosine arguments stay accurate for sites far beyond f64 range.

use crate::error::{Error, Result};
use crate::mp;
use rug::ops::RemRounding;
use rug::{Float, Integer, Rational};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Default ceiling on the decimal digits of any constructed denominator.
pub const DEFAULT_DIGIT_BUDGET: u64 = 1_000_000;

/// A frequency in (0,1) as a finite continued fraction with convergents.
///
/// Invariants, checked on construction:
/// - `q_0 = 1 <= q_1 < q_2 < ...` (strict from n >= 1),
/// - `p_n q_{n-1} - p_{n-1} q_n = (-1)^{n-1}` for all n >= 1,
/// - `p_n/q_n` lies in (0,1] for n >= 1, with the value 1 possible only at
///   n = 1 (the first convergent of any fraction starting with a_1 = 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frequency {
    coeffs: Vec<Integer>,
    convergents: Vec<(Integer, Integer)>,
}

impl Frequency {
    /// Builds a frequency from partial quotients `a_1..a_m` (all >= 1).
    pub fn from_coeffs(coeffs: Vec<Integer>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::BadDepth);
        }
        if coeffs.len() == 1 && coeffs[0] == 1 {
            // [1] would be the value 1, not a frequency in (0,1).
            return Err(Error::PhaseOutOfRange("1".into()));
        }
        if coeffs.iter().any(|a| *a < 1) {
            return Err(Error::Config("partial quotients must be >= 1".into()));
        }
        let mut convergents = Vec::with_capacity(coeffs.len() + 1);
        convergents.push((Integer::from(0), Integer::from(1)));
        let (mut p_prev, mut q_prev) = (Integer::from(1), Integer::from(0));
        for a in &coeffs {
            let (p_last, q_last) = convergents.last().unwrap().clone();
            let p = Integer::from(a * &p_last) + &p_prev;
            let q = Integer::from(a * &q_last) + &q_prev;
            p_prev = p_last;
            q_prev = q_last;
            convergents.push((p, q));
        }
        let f = Frequency { coeffs, convergents };
        debug_assert!(f.determinant_identity_holds());
        Ok(f)
    }

    /// Golden-mean truncation: all partial quotients equal to 1.
    pub fn golden(depth: usize) -> Self {
        Self::from_coeffs(vec![Integer::from(1); depth.max(2)]).unwrap()
    }

    /// Number of stored partial quotients.
    pub fn depth(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    /// Convergent pairs `(p_n, q_n)` for n = 0..=depth.
    pub fn convergents(&self) -> &[(Integer, Integer)] {
        &self.convergents
    }

    pub fn p(&self, n: usize) -> Result<&Integer> {
        self.convergents
            .get(n)
            .map(|c| &c.0)
            .ok_or(Error::NoSuchLevel(n))
    }

    pub fn q(&self, n: usize) -> Result<&Integer> {
        self.convergents
            .get(n)
            .map(|c| &c.1)
            .ok_or(Error::NoSuchLevel(n))
    }

    /// The deepest stored convergent `(p_m, q_m)`.
    pub fn deepest(&self) -> (&Integer, &Integer) {
        let (p, q) = self.convergents.last().unwrap();
        (p, q)
    }

    /// The frequency value as an exact rational, `p_m/q_m`.
    pub fn as_rational(&self) -> Rational {
        let (p, q) = self.deepest();
        Rational::from((p.clone(), q.clone()))
    }

    pub fn to_float(&self, prec: u32) -> Float {
        mp::from_rational(prec, &self.as_rational())
    }

    /// Exact check of `p_n q_{n-1} - p_{n-1} q_n = (-1)^{n-1}` at every level.
    pub fn determinant_identity_holds(&self) -> bool {
        for n in 1..self.convergents.len() {
            let (p_n, q_n) = &self.convergents[n];
            let (p_prev, q_prev) = &self.convergents[n - 1];
            let det = Integer::from(p_n * q_prev) - Integer::from(p_prev * q_n);
            let expected = if n % 2 == 1 { 1 } else { -1 };
            if det != expected {
                return false;
            }
        }
        true
    }
}

/// Continued-fraction expansion of a rational x in (0,1).
///
/// Runs the Euclidean algorithm until the remainder vanishes or `depth`
/// quotients have been produced. For rational x and sufficient depth the
/// result reproduces x exactly.
pub fn expand(x: &Rational, depth: usize) -> Result<Frequency> {
    if depth == 0 {
        return Err(Error::BadDepth);
    }
    if *x <= 0 || *x >= 1 {
        return Err(Error::PhaseOutOfRange(x.to_string()));
    }
    let mut num = x.numer().clone();
    let mut den = x.denom().clone();
    let mut coeffs = Vec::new();
    while coeffs.len() < depth && num != 0 {
        // 1/(num/den) = den/num = a + rem/num
        let (a, rem) = den.div_rem_euc(num.clone());
        coeffs.push(a);
        den = num;
        num = rem;
    }
    Frequency::from_coeffs(coeffs)
}

/// Extends `seed_coeffs` so that `ln q_{n+1} / q_n` approaches `beta_target`.
///
/// Each appended quotient is `max(1, round(exp(beta_target * q_n) / q_n))`,
/// which makes the next denominator track `exp(beta_target * q_n)`. Growth is
/// doubly exponential, so the construction refuses any level whose
/// denominator would exceed `digit_budget` decimal digits rather than
/// truncate silently.
pub fn build_liouville(
    beta_target: f64,
    levels: usize,
    seed_coeffs: &[u32],
    digit_budget: u64,
) -> Result<Frequency> {
    if !(beta_target > 0.0) {
        return Err(Error::Config(format!(
            "beta target must be positive, got {beta_target}"
        )));
    }
    if seed_coeffs.is_empty() {
        return Err(Error::Config("seed coefficients must be nonempty".into()));
    }
    let mut coeffs: Vec<Integer> = seed_coeffs.iter().map(|&a| Integer::from(a)).collect();
    let mut freq = Frequency::from_coeffs(coeffs.clone())?;
    for level in 0..levels {
        let (_, q_n) = freq.deepest();
        // ln q_{n+1} ~ beta * q_n; refuse before allocating the monster.
        let q_n_f = q_n.to_f64();
        let predicted_digits = (beta_target * q_n_f * std::f64::consts::LOG10_E).ceil();
        if !predicted_digits.is_finite() || predicted_digits as u64 > digit_budget {
            return Err(Error::DigitBudget {
                level: freq.depth() + 1,
                predicted_digits: predicted_digits.min(u64::MAX as f64) as u64,
                budget: digit_budget,
            });
        }
        let _ = level;
        // Enough mantissa to round exp(beta q_n)/q_n to the nearest integer.
        let int_bits = (beta_target * q_n_f * std::f64::consts::LOG2_E).ceil() as u32;
        let prec = int_bits.saturating_add(96).max(128);
        let exponent = Float::with_val(prec, beta_target) * Float::with_val(prec, q_n);
        let grown = exponent.exp() / Float::with_val(prec, q_n);
        let mut a = grown
            .to_integer_round(rug::float::Round::Nearest)
            .map(|(i, _)| i)
            .unwrap_or_else(|| Integer::from(1));
        if a < 1 {
            a = Integer::from(1);
        }
        coeffs.push(a);
        freq = Frequency::from_coeffs(coeffs.clone())?;
    }
    Ok(freq)
}

/// Per-level growth exponents `ln q_{n+1} / q_n` and their maximum.
#[derive(Debug, Clone)]
pub struct BetaEstimate {
    /// Pairs `(n, ln q_{n+1} / q_n)` for n = 0..depth-1.
    pub per_level: Vec<(usize, Float)>,
    /// Maximum over `per_level`.
    pub running_max: Float,
}

impl BetaEstimate {
    /// The deepest-level exponent: the natural finite-depth limsup proxy.
    pub fn deepest(&self) -> &Float {
        &self.per_level.last().unwrap().1
    }
}

/// Evaluates `ln q_{n+1} / q_n` at every stored level in extended precision.
pub fn beta_estimate(f: &Frequency, prec: u32) -> Result<BetaEstimate> {
    if f.convergents.len() < 2 {
        return Err(Error::NoSuchLevel(1));
    }
    let mut per_level = Vec::with_capacity(f.depth());
    let mut running_max = Float::with_val(prec, f64::NEG_INFINITY);
    for n in 0..f.depth() {
        let q_next = f.q(n + 1)?;
        let q_n = f.q(n)?;
        let val = mp::ln_integer(prec, q_next) / Float::with_val(prec, q_n);
        if val > running_max {
            running_max = val.clone();
        }
        per_level.push((n, val));
    }
    Ok(BetaEstimate {
        per_level,
        running_max,
    })
}

/// Distance of `k * alpha` to the nearest integer, evaluated against the
/// deepest stored convergent by exact modular reduction, then rounded once.
///
/// Requires `0 < |k| < q_level` so the convergent at `level` resolves the
/// distance faithfully; the rounding error against the true `||k alpha||` is
/// bounded by `|k| / q_{m+1}`.
pub fn norm_dist(k: i64, f: &Frequency, level: usize, prec: u32) -> Result<Float> {
    let q_level = f.q(level)?;
    let k_abs = Integer::from(k.unsigned_abs());
    if k == 0 || k_abs >= *q_level {
        return Err(Error::ConvergentTooShallow {
            k: k.to_string(),
            level,
            q: q_level.to_string(),
        });
    }
    let (p_m, q_m) = f.deepest();
    let r = Integer::from(&k_abs * p_m).rem_euc(q_m.clone());
    let folded = std::cmp::min(Integer::from(q_m - &r), r);
    Ok(mp::from_integer(prec, &folded) / mp::from_integer(prec, q_m))
}

/// Exact distance from an integer site to the half-denominator lattice
/// `{ j q_n / 2 : j integer }`, in half-integer arithmetic.
pub fn site_distance(y: i64, q_n: &Integer) -> Rational {
    assert!(*q_n >= 1, "q_n must be >= 1");
    let two_y = Integer::from(2) * Integer::from(y);
    let r = two_y.rem_euc(q_n.clone());
    let folded = std::cmp::min(Integer::from(q_n - &r), r);
    Rational::from((folded, Integer::from(2)))
}

/// Resonance classification of a site at one denominator scale.
#[derive(Debug, Clone)]
pub struct ResonanceLabel {
    pub level: usize,
    /// Exact `dist(y, q_n Z + (q_n/2) Z)`.
    pub distance: Rational,
    pub resonant: bool,
    /// The window `b_n = eta * q_n` as an exact rational.
    pub b_n: Rational,
}

/// Labels `y` as `n`-resonant iff its lattice distance is at most `eta*q_n`.
pub fn classify(y: i64, f: &Frequency, level: usize, eta: f64) -> Result<ResonanceLabel> {
    if y == 0 {
        return Err(Error::ZeroSite);
    }
    if !(eta > 0.0 && eta < 0.05) {
        return Err(Error::BadEta(eta));
    }
    let q_n = f.q(level)?;
    let distance = site_distance(y, q_n);
    let eta_rat = Rational::from_f64(eta).expect("eta is finite");
    let b_n = eta_rat * Rational::from(q_n);
    let resonant = distance <= b_n;
    Ok(ResonanceLabel {
        level,
        distance,
        resonant,
        b_n,
    })
}

// --- JSON wire format -------------------------------------------------------
//
// {"coeffs": ["1", "1", ...], "convergents": [["0","1"], ["1","1"], ...]}
// Decimal strings throughout: the integers routinely exceed 64 bits.

#[derive(Serialize, Deserialize)]
struct FrequencyWire {
    coeffs: Vec<String>,
    convergents: Vec<[String; 2]>,
}

impl Serialize for Frequency {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let wire = FrequencyWire {
            coeffs: self.coeffs.iter().map(|a| a.to_string()).collect(),
            convergents: self
                .convergents
                .iter()
                .map(|(p, q)| [p.to_string(), q.to_string()])
                .collect(),
        };
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Frequency {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = FrequencyWire::deserialize(deserializer)?;
        let coeffs = wire
            .coeffs
            .iter()
            .map(|s| Integer::from_str_radix(s, 10).map_err(D::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let f = Frequency::from_coeffs(coeffs).map_err(D::Error::custom)?;
        // The stored convergents are re-derived; reject a tampered wire form.
        let given = wire
            .convergents
            .iter()
            .map(|[p, q]| {
                Ok((
                    Integer::from_str_radix(p, 10).map_err(D::Error::custom)?,
                    Integer::from_str_radix(q, 10).map_err(D::Error::custom)?,
                ))
            })
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        if given != f.convergents {
            return Err(D::Error::custom("convergents do not match coefficients"));
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fib(n: usize) -> Integer {
        let (mut a, mut b) = (Integer::from(1), Integer::from(1));
        for _ in 2..n {
            let c = Integer::from(&a + &b);
            a = b;
            b = c;
        }
        b
    }

    #[test]
    fn expand_five_eighths() {
        let f = expand(&Rational::from((5, 8)), 10).unwrap();
        let coeffs: Vec<i64> = f.coeffs().iter().map(|a| a.to_i64().unwrap()).collect();
        assert_eq!(coeffs, vec![1, 1, 1, 2]);
        assert_eq!(f.as_rational(), Rational::from((5, 8)));
        assert!(f.determinant_identity_holds());
    }

    #[test]
    fn expand_one_half() {
        let f = expand(&Rational::from((1, 2)), 10).unwrap();
        let coeffs: Vec<i64> = f.coeffs().iter().map(|a| a.to_i64().unwrap()).collect();
        assert_eq!(coeffs, vec![2]);
        assert_eq!(*f.q(0).unwrap(), 1);
        assert_eq!(*f.q(1).unwrap(), 2);
    }

    #[test]
    fn expand_rejects_bad_input() {
        assert!(expand(&Rational::from((5, 8)), 0).is_err());
        assert!(expand(&Rational::from((3, 2)), 5).is_err());
        assert!(expand(&Rational::from(0), 5).is_err());
    }

    #[test]
    fn golden_denominators_are_fibonacci() {
        let f = Frequency::golden(20);
        for n in 1..=20 {
            assert_eq!(*f.q(n).unwrap(), fib(n + 1), "q_{n}");
        }
        // Expanding the truncation reproduces its exact value.
        let back = expand(&f.as_rational(), 40).unwrap();
        assert_eq!(back.as_rational(), f.as_rational());
        assert!(back.determinant_identity_holds());
    }

    #[test]
    fn beta_estimate_two_level() {
        let f = Frequency::from_coeffs(vec![Integer::from(1), Integer::from(10)]).unwrap();
        assert_eq!(*f.q(1).unwrap(), 1);
        assert_eq!(*f.q(2).unwrap(), 11);
        let est = beta_estimate(&f, 128).unwrap();
        let expected = 11f64.ln();
        assert!((est.per_level[1].1.to_f64() - expected).abs() < 1e-15);
    }

    #[test]
    fn beta_estimate_golden_tends_to_zero() {
        let f = Frequency::golden(25);
        let est = beta_estimate(&f, 128).unwrap();
        // The max is pinned at the shallow end (ln q_2/q_1 = ln 2), and the
        // levels decay to zero from there.
        assert!(est.running_max.to_f64() <= 2f64.ln() + 1e-12);
        let vals: Vec<f64> = est.per_level.iter().map(|(_, v)| v.to_f64()).collect();
        for w in vals[1..].windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!(est.deepest().to_f64() < 1e-3);
    }

    #[test]
    fn liouville_levels_converge() {
        let f = build_liouville(0.5, 4, &[1, 1, 1], DEFAULT_DIGIT_BUDGET).unwrap();
        assert_eq!(f.depth(), 7);
        let est = beta_estimate(&f, 128).unwrap();
        let deepest = est.deepest().to_f64();
        assert!(
            (deepest - 0.5).abs() / 0.5 < 0.01,
            "deepest estimate {deepest}"
        );
        // Constructed levels keep the recurrence, checked independently.
        for n in 4..=7 {
            let a = &f.coeffs()[n - 1];
            let q = Integer::from(a * f.q(n - 1).unwrap()) + f.q(n - 2).unwrap();
            assert_eq!(q, *f.q(n).unwrap());
        }
    }

    #[test]
    fn liouville_seed_only_matches_golden() {
        let f = build_liouville(0.5, 0, &[1; 20], DEFAULT_DIGIT_BUDGET).unwrap();
        assert_eq!(f, Frequency::golden(20));
    }

    #[test]
    fn liouville_budget_refusal() {
        let err = build_liouville(1.0, 8, &[1, 1], 1000).unwrap_err();
        match err {
            Error::DigitBudget { .. } => {}
            other => panic!("expected digit budget refusal, got {other}"),
        }
    }

    #[test]
    fn norm_dist_sandwich_at_convergent_denominators() {
        let f = Frequency::golden(25);
        let prec = 128;
        for n in 3..20 {
            let q_n = f.q(n).unwrap().to_i64().unwrap();
            let d = norm_dist(q_n, &f, n + 1, prec).unwrap().to_f64();
            let q_next = f.q(n + 1).unwrap().to_f64();
            assert!(d >= 1.0 / (2.0 * q_next) - 1e-30, "n={n}: {d}");
            assert!(d <= 1.0 / q_next + 1e-30, "n={n}: {d}");
        }
    }

    #[test]
    fn norm_dist_rejects_zero_and_shallow() {
        let f = Frequency::golden(10);
        assert!(norm_dist(0, &f, 5, 128).is_err());
        let q5 = f.q(5).unwrap().to_i64().unwrap();
        assert!(norm_dist(q5, &f, 5, 128).is_err());
        assert!(norm_dist(q5 - 1, &f, 5, 128).is_ok());
    }

    #[test]
    fn site_distance_examples() {
        let q = Integer::from(7);
        assert_eq!(site_distance(21, &q), Rational::from(0));
        assert_eq!(site_distance(3, &q), Rational::from((1, 2)));
        let q = Integer::from(8);
        assert_eq!(site_distance(2, &q), Rational::from(2));
    }

    #[test]
    fn classify_examples() {
        let f = expand(&Rational::from((47, 100)), 30).unwrap();
        // Denominator 100 appears as the deepest convergent.
        let level = f.depth();
        assert_eq!(*f.q(level).unwrap(), 100);
        let lab = classify(52, &f, level, 0.01).unwrap();
        assert_eq!(lab.distance, Rational::from(2));
        assert!(!lab.resonant);
        let lab = classify(148, &f, level, 0.049).unwrap();
        assert_eq!(lab.distance, Rational::from(2));
        assert!(lab.resonant);
        let lab = classify(100, &f, level, 0.01).unwrap();
        assert!(lab.resonant);
        assert_eq!(lab.distance, Rational::from(0));
        assert!(classify(0, &f, level, 0.01).is_err());
        assert!(classify(5, &f, level, 0.3).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let f = build_liouville(0.8, 2, &[1, 1, 1], DEFAULT_DIGIT_BUDGET).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"coeffs\""));
        let back: Frequency = serde_json::from_str(&s).unwrap();
        assert_eq!(f, back);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn determinant_identity_random(coeffs in prop::collection::vec(1u32..30, 2..25)) {
            let f = Frequency::from_coeffs(coeffs.iter().map(|&a| Integer::from(a)).collect()).unwrap();
            prop_assert!(f.determinant_identity_holds());
            for n in 1..=f.depth() {
                let r = Rational::from((f.p(n).unwrap().clone(), f.q(n).unwrap().clone()));
                prop_assert!(r > 0 && r <= 1);
                if n >= 2 {
                    prop_assert!(r < 1);
                }
            }
        }

        #[test]
        fn best_approximation_property(coeffs in prop::collection::vec(1u32..12, 6..14), k_frac in 0.0f64..1.0) {
            let f = Frequency::from_coeffs(coeffs.iter().map(|&a| Integer::from(a)).collect()).unwrap();
            let n = f.depth() - 2;
            let q_n = f.q(n).unwrap().to_f64();
            let q_next = f.q(n + 1).unwrap().to_f64();
            if q_next < 9e15 {
                let k = 1 + (k_frac * (q_next - 2.0)) as i64;
                let d_k = norm_dist(k, &f, n + 1, 128).unwrap();
                let d_qn = norm_dist(q_n as i64, &f, n + 1, 128).unwrap();
                prop_assert!(d_k >= d_qn - 1e-25);
            }
        }
    }
}
