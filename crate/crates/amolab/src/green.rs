//! Interval Green functions, regularity testing, and block expansion.
//!
//! Green values are computed two independent ways: a pivoted tridiagonal
//! solve of `(H_I - E) u = e_boundary`, and the determinant-ratio form
//! whose numerators are window determinants starting just past the probe
//! site. The two routes cross-check each other to 1e-8 in log-magnitude.
//! On top of them sit the `(t,k)`-regularity scan with its 1/7 boundary
//! margins and the greedy multi-hop block expansion used to certify decay
//! across nonresonant stretches.

use crate::cfrac;
use crate::detkernel::{DetEngine, LogSigned, ModelParams};
use crate::error::{Error, Result};
use crate::linalg::TridiagLu;
use crate::spectral::EigenPair;
use rug::Float;
use serde::Serialize;
use std::io::Write;

/// An integer interval `[x1, x2]` with `x2 = x1 + k - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IntervalSpec {
    pub x1: i64,
    pub x2: i64,
}

impl IntervalSpec {
    pub fn new(x1: i64, k: usize) -> Self {
        assert!(k >= 1);
        IntervalSpec { x1, x2: x1 + k as i64 - 1 }
    }

    pub fn len(&self) -> usize {
        (self.x2 - self.x1 + 1) as usize
    }

    pub fn contains(&self, y: i64) -> bool {
        y >= self.x1 && y <= self.x2
    }
}

/// Green values of one interval at both boundary columns:
/// `left[y - x1] = G(x1, y)` and `right[y - x1] = G(y, x2)`.
#[derive(Debug, Clone)]
pub struct GreenTable {
    pub interval: IntervalSpec,
    pub left: Vec<LogSigned>,
    pub right: Vec<LogSigned>,
}

impl GreenTable {
    pub fn left_at(&self, y: i64) -> &LogSigned {
        &self.left[(y - self.interval.x1) as usize]
    }

    pub fn right_at(&self, y: i64) -> &LogSigned {
        &self.right[(y - self.interval.x1) as usize]
    }
}

fn logsigned_of(prec: u32, v: &Float) -> LogSigned {
    match v.cmp0() {
        Some(std::cmp::Ordering::Greater) => LogSigned {
            sign: 1,
            logmag: Float::with_val(prec, v.clone().ln()),
        },
        Some(std::cmp::Ordering::Less) => LogSigned {
            sign: -1,
            logmag: Float::with_val(prec, v.clone().abs().ln()),
        },
        _ => LogSigned::zero(prec),
    }
}

/// Pivot floor for interval solves: below `e^-40` relative to the row scale
/// the energy counts as resonant with the interval.
fn interval_pivot_floor(prec: u32) -> Float {
    Float::with_val(prec, -40f64).exp()
}

/// Direct-solve Green table: one LU factorization, two boundary columns.
pub fn green_table(engine: &DetEngine, interval: IntervalSpec) -> Result<GreenTable> {
    let params = engine.params;
    let prec = params.prec;
    let k = interval.len();
    let v = engine.potentials(interval.x1, k)?;
    let diag: Vec<Float> = v
        .iter()
        .map(|vi| Float::with_val(prec, vi - &params.energy))
        .collect();
    let lu = TridiagLu::factor_interval(prec, &diag, &interval_pivot_floor(prec), interval.x1, interval.x2)?;
    let mut e1 = vec![Float::with_val(prec, 0); k];
    e1[0] = Float::with_val(prec, 1);
    let col_left = lu.solve(&e1);
    let mut ek = vec![Float::with_val(prec, 0); k];
    ek[k - 1] = Float::with_val(prec, 1);
    let col_right = lu.solve(&ek);
    Ok(GreenTable {
        interval,
        left: col_left.iter().map(|x| logsigned_of(prec, x)).collect(),
        right: col_right.iter().map(|x| logsigned_of(prec, x)).collect(),
    })
}

/// `(G(x1, y), G(y, x2))` by direct solve.
pub fn green_direct(
    params: &ModelParams,
    interval: IntervalSpec,
    y: i64,
) -> Result<(LogSigned, LogSigned)> {
    if !interval.contains(y) {
        return Err(Error::Config(format!(
            "site {y} outside interval [{}, {}]",
            interval.x1, interval.x2
        )));
    }
    let engine = DetEngine::new(params, interval.len());
    let table = green_table(&engine, interval)?;
    Ok((table.left_at(y).clone(), table.right_at(y).clone()))
}

/// Determinant-ratio Green table.
///
/// `|G(x1,y)| = |P_{x2-y}(theta+(y+1)alpha)| / |P_k(theta+x1 alpha)|` and
/// `|G(y,x2)| = |P_{y-x1}(theta+x1 alpha)| / |P_k(theta+x1 alpha)|`; the
/// numerators come from one forward ladder at `x1` and one backward ladder
/// at `x2`, signs carry the alternating cofactor factor.
pub fn green_cramer_table(engine: &DetEngine, interval: IntervalSpec) -> Result<GreenTable> {
    let params = engine.params;
    let prec = params.prec;
    let k = interval.len();
    params.check_sites(interval.x1, interval.x2)?;
    let fwd_phase = params.phase_of_site(interval.x1);
    let fwd = engine.det_sequence_at(&fwd_phase, &engine.base(&fwd_phase), k, true);
    let bwd_phase = params.phase_of_site(interval.x2);
    let bwd = engine.det_sequence_at(&bwd_phase, &engine.base(&bwd_phase), k, false);
    let det = &fwd.values[k];
    if det.is_zero() {
        return Err(Error::ResonantInterval { x1: interval.x1, x2: interval.x2, row: k - 1 });
    }
    let mut left = Vec::with_capacity(k);
    let mut right = Vec::with_capacity(k);
    for idx in 0..k {
        let y = interval.x1 + idx as i64;
        let par_left = if (y - interval.x1) % 2 == 0 { 1i8 } else { -1 };
        let num_left = &bwd.values[(interval.x2 - y) as usize];
        left.push(LogSigned {
            sign: par_left * num_left.sign * det.sign,
            logmag: num_left.log_ratio(det, prec),
        });
        let par_right = if (interval.x2 - y) % 2 == 0 { 1i8 } else { -1 };
        let num_right = &fwd.values[(y - interval.x1) as usize];
        right.push(LogSigned {
            sign: par_right * num_right.sign * det.sign,
            logmag: num_right.log_ratio(det, prec),
        });
    }
    Ok(GreenTable { interval, left, right })
}

/// `(G(x1, y), G(y, x2))` by determinant ratios.
pub fn green_cramer(
    params: &ModelParams,
    interval: IntervalSpec,
    y: i64,
) -> Result<(LogSigned, LogSigned)> {
    if !interval.contains(y) {
        return Err(Error::Config(format!(
            "site {y} outside interval [{}, {}]",
            interval.x1, interval.x2
        )));
    }
    let engine = DetEngine::new(params, interval.len());
    let table = green_cramer_table(&engine, interval)?;
    Ok((table.left_at(y).clone(), table.right_at(y).clone()))
}

/// Certificate that `y` is `(t,k)`-regular: an interval around `y` whose
/// Green function decays at rate `t` to both boundaries, with both margins
/// at least `ceil(k/7)` sites.
#[derive(Debug, Clone, Serialize)]
pub struct RegularityWitness {
    pub y: i64,
    pub t: f64,
    pub k: usize,
    pub interval: IntervalSpec,
    /// Log-slack at the (left, right) boundary: `-t |y - x_i| - log|G|`.
    pub bound_margins: (f64, f64),
}

/// Scans every admissible interval around `y` and returns the witness with
/// the largest minimum log-slack, or `None` when no interval qualifies.
/// Intervals where the energy is resonant are skipped, not fatal.
pub fn is_regular(
    engine: &DetEngine,
    y: i64,
    t: f64,
    k: usize,
    clip: Option<(i64, i64)>,
) -> Result<Option<RegularityWitness>> {
    if !(t > 0.0) || k < 7 {
        return Err(Error::Config("regularity scan needs t > 0 and k >= 7".into()));
    }
    let margin = k.div_ceil(7) as i64;
    let k_i = k as i64;
    let mut best: Option<RegularityWitness> = None;
    for x1 in (y - (k_i - 1) + margin)..=(y - margin) {
        let interval = IntervalSpec::new(x1, k);
        if let Some((lo, hi)) = clip {
            if interval.x1 < lo || interval.x2 > hi {
                continue;
            }
        }
        let table = match green_table(engine, interval) {
            Ok(t) => t,
            Err(Error::ResonantInterval { .. }) => continue,
            Err(e) => return Err(e),
        };
        let d1 = (y - interval.x1) as f64;
        let d2 = (interval.x2 - y) as f64;
        let m1 = -t * d1 - table.left_at(y).logmag.to_f64();
        let m2 = -t * d2 - table.right_at(y).logmag.to_f64();
        if m1 >= 0.0 && m2 >= 0.0 {
            let candidate = RegularityWitness {
                y,
                t,
                k,
                interval,
                bound_margins: (m1, m2),
            };
            let cand_min = m1.min(m2);
            if best
                .as_ref()
                .map_or(true, |b| cand_min > b.bound_margins.0.min(b.bound_margins.1))
            {
                best = Some(candidate);
            }
        }
    }
    Ok(best)
}

/// Max defect of the boundary-expansion identity
/// `phi(x) = -G(x1,x) phi(x1-1) - G(x,x2) phi(x2+1)` over the interval.
///
/// The Green table is evaluated at the eigenpair's own energy (the identity
/// holds at no other), so the defect measures only eigenpair and solve
/// accuracy. It is exact for eigenvectors of any enclosing truncation.
pub fn block_expand_residual(
    pair: &EigenPair,
    params: &ModelParams,
    interval: IntervalSpec,
) -> Result<Float> {
    let lo = -pair.radius;
    let hi = pair.radius;
    if interval.x1 - 1 < lo || interval.x2 + 1 > hi {
        return Err(Error::IntervalOutsideDomain {
            x1: interval.x1,
            x2: interval.x2,
            lo,
            hi,
        });
    }
    let prec = params.prec;
    let at_pair_energy = params.with_energy(pair.energy.clone());
    let engine = DetEngine::new(&at_pair_energy, interval.len());
    let table = green_table(&engine, interval)?;
    let phi_l = pair.value_at(interval.x1 - 1).unwrap();
    let phi_r = pair.value_at(interval.x2 + 1).unwrap();
    let mut worst = Float::with_val(prec, 0);
    for y in interval.x1..=interval.x2 {
        let g_left = table.left_at(y).to_float(prec);
        let g_right = table.right_at(y).to_float(prec);
        let mut acc = Float::with_val(prec, pair.value_at(y).unwrap());
        acc += g_left * phi_l;
        acc += g_right * phi_r;
        let a = acc.abs();
        if a > worst {
            worst = a;
        }
    }
    Ok(worst)
}

/// One hop of an expansion chain.
#[derive(Debug, Clone, Serialize)]
pub struct ChainHop {
    pub interval: IntervalSpec,
    pub exit_site: i64,
    /// log |G(y, exit)| for this hop.
    pub log_increment: f64,
}

/// A greedy iterated block expansion across a nonresonant stretch.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionChain {
    pub start: i64,
    pub hops: Vec<ChainHop>,
    pub terminal: i64,
    /// Sum of the hop Green log-magnitudes.
    pub accumulated: f64,
    /// No regularity witness at the last probed site.
    pub stuck: bool,
    pub hop_cap_reached: bool,
    /// Window length used for every witness scan.
    pub k: usize,
    /// Slack in `accumulated <= -(ln lambda - eta)(distance - slack)`.
    pub realized_slack: f64,
}

/// Default hop cap `floor(4 q_n / q_{n - n0})`.
pub fn default_hop_cap(freq: &cfrac::Frequency, level: usize, n0: usize) -> Result<usize> {
    let q_n = freq.q(level)?.to_f64();
    let q_small = freq.q(level - n0)?.to_f64();
    Ok((4.0 * q_n / q_small).floor() as usize)
}

/// Expansion scales for a site: the least `n0` (and largest `s`) with
/// `4 s q_{n-n0} <= dist(y, q_n Z + (q_n/2) Z) - 2`.
pub fn expansion_scales(
    freq: &cfrac::Frequency,
    level: usize,
    dist: f64,
) -> Result<(usize, usize)> {
    for n0 in 1..level {
        let q_small = freq.q(level - n0)?.to_f64();
        if 4.0 * q_small <= dist - 2.0 {
            let s = ((dist - 2.0) / (4.0 * q_small)).floor() as usize;
            return Ok((n0, s));
        }
    }
    Err(Error::NoExpansionScale { dist: format!("{dist}") })
}

/// Greedy iterated block expansion from `start` toward the nearer edge of
/// `region`, using the max-slack regularity witness at each hop.
pub fn expand_chain(
    params: &ModelParams,
    start: i64,
    level: usize,
    region: (i64, i64),
    max_hops: usize,
    eta: f64,
) -> Result<ExpansionChain> {
    if max_hops == 0 {
        return Err(Error::BadHopCap);
    }
    if start <= region.0 || start >= region.1 {
        return Err(Error::Config(format!(
            "start {start} is not interior to region [{}, {}]",
            region.0, region.1
        )));
    }
    let label = cfrac::classify(start, &params.freq, level, eta)?;
    if label.resonant {
        return Err(Error::Config(format!(
            "start {start} is resonant at level {level}"
        )));
    }
    let dist = label.distance.to_f64();
    let (n0, s) = expansion_scales(&params.freq, level, dist)?;
    let q_small = params.freq.q(level - n0)?.to_f64() as usize;
    let k = 6 * s * q_small - 1;
    if k < 7 {
        return Err(Error::NoExpansionScale { dist: format!("{dist}") });
    }
    let t = params.ln_lambda() - eta;
    let engine = DetEngine::new(params, k);
    // March toward the nearer region edge.
    let dir: i64 = if region.1 - start <= start - region.0 { 1 } else { -1 };

    let mut hops = Vec::new();
    let mut accumulated = 0f64;
    let mut y = start;
    let mut stuck = false;
    let mut hop_cap_reached = false;
    loop {
        if hops.len() == max_hops {
            hop_cap_reached = true;
            break;
        }
        // Arrived at the boundary zone: no window of length k fits between
        // here and the region edge, which is where expansion is meant to stop.
        if (y - region.0).min(region.1 - y) < k as i64 {
            break;
        }
        let witness = is_regular(&engine, y, t, k, Some(region))?;
        let Some(w) = witness else {
            stuck = true;
            break;
        };
        let exit_site = if dir > 0 { w.interval.x2 } else { w.interval.x1 };
        let table = green_table(&engine, w.interval)?;
        let g = if dir > 0 { table.right_at(y) } else { table.left_at(y) };
        let log_increment = g.logmag.to_f64();
        accumulated += log_increment;
        hops.push(ChainHop { interval: w.interval, exit_site, log_increment });
        let next = exit_site + dir;
        y = next;
        if next <= region.0 || next >= region.1 {
            break;
        }
    }
    let distance = (y - start).abs() as f64;
    let realized_slack = if t > 0.0 { distance + accumulated / t } else { f64::NAN };
    Ok(ExpansionChain {
        start,
        hops,
        terminal: y,
        accumulated,
        stuck,
        hop_cap_reached,
        k,
        realized_slack,
    })
}

/// Chain dump as JSON lines, one hop per line.
pub fn write_chain_jsonl<W: Write>(chain: &ExpansionChain, out: &mut W) -> Result<()> {
    for hop in &chain.hops {
        let line = serde_json::to_string(hop).map_err(|e| Error::Config(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    let summary = serde_json::json!({
        "start": chain.start,
        "terminal": chain.terminal,
        "accumulated": chain.accumulated,
        "stuck": chain.stuck,
        "hop_cap_reached": chain.hop_cap_reached,
        "k": chain.k,
        "realized_slack": chain.realized_slack,
    });
    writeln!(out, "{summary}")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfrac::Frequency;
    use crate::detkernel::{potential, sturm_count_from_diag, ThetaKind};
    use crate::mp;
    use crate::spectral::eigen_solve;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn params(lambda: f64, theta: ThetaKind, e: f64) -> ModelParams {
        let freq = Arc::new(Frequency::golden(40));
        ModelParams::new(lambda, theta, freq, mp::mpf(128, e), 128).unwrap()
    }

    #[test]
    fn single_site_green_is_reciprocal() {
        let p = params(3.0, ThetaKind::Zero, 0.35);
        let iv = IntervalSpec::new(5, 1);
        let (l, r) = green_direct(&p, iv, 5).unwrap();
        let v = potential(&p, 5).unwrap();
        let expect = (Float::with_val(128, &v - &p.energy)).recip();
        assert_eq!(l.sign, r.sign);
        assert!((l.to_float(128) - &expect).abs().to_f64() < 1e-30);
        assert!((r.to_float(128) - expect).abs().to_f64() < 1e-30);
    }

    #[test]
    fn two_site_green_closed_form() {
        let p = params(3.0, ThetaKind::HalfAlpha, -0.2);
        let iv = IntervalSpec::new(-3, 2);
        let v1 = Float::with_val(128, potential(&p, -3).unwrap() - &p.energy);
        let v2 = Float::with_val(128, potential(&p, -2).unwrap() - &p.energy);
        let det = Float::with_val(128, &v1 * &v2) - 1u32;
        let (l, _) = green_direct(&p, iv, -2).unwrap();
        // G(x1, x2) = -1/det.
        let expect = -det.clone().recip();
        assert!((l.to_float(128) - expect).abs().to_f64() < 1e-25);
        let (l1, _) = green_direct(&p, iv, -3).unwrap();
        // G(x1, x1) = v2/det.
        let expect = Float::with_val(128, &v2 / &det);
        assert!((l1.to_float(128) - expect).abs().to_f64() < 1e-25);
    }

    #[test]
    fn cramer_and_direct_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let thetas = ThetaKind::ALL;
        for trial in 0..25 {
            let lambda = rng.gen_range(1.5..6.0);
            let e = rng.gen_range(-2.0..2.0);
            let p = params(lambda, thetas[trial % 4], e);
            let k = rng.gen_range(2..60);
            let x1 = rng.gen_range(-300i64..300);
            let iv = IntervalSpec::new(x1, k);
            let engine = DetEngine::new(&p, k);
            let direct = match green_table(&engine, iv) {
                Ok(t) => t,
                Err(Error::ResonantInterval { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            let cramer = green_cramer_table(&engine, iv).unwrap();
            for y in iv.x1..=iv.x2 {
                for (a, b) in [
                    (direct.left_at(y), cramer.left_at(y)),
                    (direct.right_at(y), cramer.right_at(y)),
                ] {
                    assert_eq!(a.sign, b.sign, "trial {trial} y {y}");
                    let la = a.logmag.to_f64();
                    let lb = b.logmag.to_f64();
                    assert!(
                        (la - lb).abs() <= 1e-8 * la.abs().max(1.0),
                        "trial {trial} y {y}: {la} vs {lb}"
                    );
                }
            }
        }
    }

    #[test]
    fn regularity_margins_enforced() {
        let p = params(3.0, ThetaKind::HalfAlpha, 0.1);
        let engine = DetEngine::new(&p, 7);
        // k = 7: margin = 1, so x1 ranges over y-5 ..= y-1.
        let w = is_regular(&engine, 0, 1e-9, 7, None).unwrap();
        let w = w.expect("tiny rate must have a witness");
        let d1 = 0 - w.interval.x1;
        let d2 = w.interval.x2;
        assert!(d1 >= 1 && d2 >= 1);
        assert_eq!(w.interval.len(), 7);
    }

    #[test]
    fn regularity_skips_resonant_intervals() {
        // Pick E exactly at an eigenvalue of one candidate window; the scan
        // must skip it and still find witnesses elsewhere.
        let p0 = params(3.0, ThetaKind::HalfAlpha, 0.0);
        let k = 9usize;
        let y = 0i64;
        let bad_x1 = -4i64;
        let engine0 = DetEngine::new(&p0, k);
        let v = engine0.potentials(bad_x1, k).unwrap();
        // Bisect one eigenvalue of that window.
        let (mut lo, mut hi) = (mp::mpf(128, -9.0), mp::mpf(128, 9.0));
        let target = sturm_count_from_diag(128, &v, &hi).unwrap() / 2;
        for _ in 0..220 {
            let mid = Float::with_val(128, &lo + &hi) / 2u32;
            if sturm_count_from_diag(128, &v, &mid).unwrap_or(target) <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let e_bad = Float::with_val(128, &lo + &hi) / 2u32;
        let p = p0.with_energy(e_bad);
        let engine = DetEngine::new(&p, k);
        let iv_bad = IntervalSpec::new(bad_x1, k);
        assert!(matches!(
            green_table(&engine, iv_bad),
            Err(Error::ResonantInterval { .. })
        ));
        let w = is_regular(&engine, y, 1e-9, k, None).unwrap();
        let w = w.expect("other intervals should still qualify");
        assert_ne!(w.interval.x1, bad_x1);
    }

    #[test]
    fn block_expansion_is_identity_for_eigenvectors() {
        let p = params(3.0, ThetaKind::HalfAlpha, 0.0);
        let pairs = eigen_solve(&p, 50, (-1.0, 1.0), 9).unwrap();
        assert!(!pairs.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for pair in pairs.iter().take(4) {
            for _ in 0..5 {
                let k = rng.gen_range(3..30usize);
                let x1 = rng.gen_range(-49..(49 - k as i64));
                let iv = IntervalSpec::new(x1, k);
                match block_expand_residual(pair, &p, iv) {
                    Ok(resid) => assert!(
                        resid.to_f64() <= 1e-20,
                        "residual {} at {iv:?}",
                        resid.to_f64()
                    ),
                    Err(Error::ResonantInterval { .. }) => continue,
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }

    #[test]
    fn block_expansion_negative_control() {
        let p = params(3.0, ThetaKind::HalfAlpha, 0.0);
        let pairs = eigen_solve(&p, 30, (-1.0, 1.0), 9).unwrap();
        let mut fake = pairs[0].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for v in fake.vector.iter_mut() {
            *v = Float::with_val(128, rng.gen_range(-1.0f64..1.0));
        }
        let iv = IntervalSpec::new(-10, 12);
        let resid = block_expand_residual(&fake, &p, iv).unwrap();
        assert!(resid.to_f64() > 1e-3, "random vector should break the identity");
    }

    #[test]
    fn block_expansion_domain_guard() {
        let p = params(3.0, ThetaKind::HalfAlpha, 0.0);
        let pairs = eigen_solve(&p, 20, (-1.0, 1.0), 9).unwrap();
        let iv = IntervalSpec::new(-20, 5);
        assert!(matches!(
            block_expand_residual(&pairs[0], &p, iv),
            Err(Error::IntervalOutsideDomain { .. })
        ));
    }

    #[test]
    fn chain_requires_positive_hop_cap() {
        let p = params(3.0, ThetaKind::HalfAlpha, 0.0);
        assert!(matches!(
            expand_chain(&p, 40, 7, (30, 60), 0, 0.01),
            Err(Error::BadHopCap)
        ));
    }

    #[test]
    fn chain_crosses_nonresonant_stretch() {
        // Level 10: q_10 = 89. Stretch between the resonance at 89 and the
        // half-lattice point at 133; a spectral energy keeps Green decay real.
        let p0 = params(3.0, ThetaKind::HalfAlpha, 0.0);
        let e = crate::spectral::spectral_energies(&p0, 60, 5).unwrap()[2].clone();
        let p = p0.with_energy(e);
        let level = 10usize;
        let start = 111i64;
        let label = cfrac::classify(start, &p.freq, level, 0.01).unwrap();
        assert!(!label.resonant);
        let chain = expand_chain(&p, start, level, (90, 132), 40, 0.01).unwrap();
        assert!(!chain.stuck, "chain stuck: {chain:?}");
        assert!(!chain.hops.is_empty());
        assert!(chain.accumulated < 0.0);
        // Exit points chain into start neighbors.
        let mut cur = start;
        for hop in &chain.hops {
            assert!(hop.interval.contains(cur));
            cur = hop.exit_site + if hop.exit_site == hop.interval.x1 { -1 } else { 1 };
        }
        assert_eq!(cur, chain.terminal);
    }
}
