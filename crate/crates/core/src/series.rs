//! Power series of `f_p(x, 1)` on `(0, 1)` and a finite certificate that its
//! coefficients are nonpositive.
//!
//! With `α_k` the Taylor coefficients of `(1 − z)^{−a/2}`,
//!
//! ```text
//! 1 / (1 − 2x cos(jθ) + x²)^{a/2} = Σ_n ( Σ_{k+l=n} α_k α_l e^{iθj(k−l)} ) xⁿ
//! ```
//!
//! so `f_p(x, 1) = Σ_n β_n xⁿ`. Every trigonometric sum in `β_n` collapses to
//! `Σ_{j=1}^{N} cos(jθs) ∈ {0, N}`, which [`cosine_sum`] evaluates in integer
//! arithmetic; `β_n` is then one half of
//!
//! ```text
//!   − α_n α_0 [C(p+1+n) + C(p+1−n)]
//!   + Σ_{k<n} α_k (α_{n−k−1} − α_{n−k}) C(p+1+2k−n)
//!   + Σ_{k<n} α_k [α_{n−k−1} C(p−2k+n−1) − α_{n−k} C(p+1−2k+n)]
//! ```
//!
//! The first two groups are nonpositive term by term because `α_k` is
//! positive and nondecreasing for `a ≥ 2`. A term of the last group is
//! positive only when `C(p−2k+n−1) = N` and `C(p+1−2k+n) = 0`; it is then
//! cancelled by the negative half of term `k + 1`, or, for `k = n − 1`, by the
//! `C(p+1−n)` part of the first group.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Default truncation order for certificates.
pub const DEFAULT_MAX_ORDER: usize = 100;

/// Scale-relative tolerance for calling a coefficient nonpositive.
pub const NONPOSITIVE_TOLERANCE: f64 = 1e-12;

/// Points at which certificates report the truncation bound.
pub const CERTIFICATE_TAIL_POINTS: [f64; 3] = [0.1, 0.5, 0.9];

/// `α_k = (−1)^k C(−a/2, k)` by the recurrence `α_k = α_{k−1} (a/2 + k − 1)/k`.
pub fn alpha_coeff(k: usize, a: f64) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * (a / 2.0 + i as f64 - 1.0) / i as f64)
}

/// `α_0..=α_max`.
pub fn alpha_table(max: usize, a: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max + 1);
    out.push(1.0);
    for k in 1..=max {
        let prev = out[k - 1];
        out.push(prev * (a / 2.0 + k as f64 - 1.0) / k as f64);
    }
    out
}

/// `Σ_{j=1}^{n} cos(2π j s / n)`: `n` when `n | s`, otherwise `0`.
pub fn cosine_sum(s: i64, n: usize) -> i64 {
    let n = n as i64;
    if s.rem_euclid(n) == 0 {
        n
    } else {
        0
    }
}

/// The individual contributions to `2 β_n`, grouped as in the module docs.
#[derive(Debug, Clone)]
struct BetaTerms {
    /// `−α_n α_0 C(p+1+n)` and `−α_n α_0 C(p+1−n)`.
    head: [f64; 2],
    /// `α_k (α_{n−k−1} − α_{n−k}) C(p+1+2k−n)` for `k < n`.
    middle: Vec<f64>,
    /// `(α_k α_{n−k−1} C(p−2k+n−1), −α_k α_{n−k} C(p+1−2k+n))` for `k < n`.
    tail: Vec<(f64, f64)>,
}

impl BetaTerms {
    fn new(order: usize, p: i64, n: usize, alphas: &[f64]) -> Self {
        let c = |s: i64| cosine_sum(s, n) as f64;
        let m = order as i64;
        let head = [
            -alphas[order] * alphas[0] * c(p + 1 + m),
            -alphas[order] * alphas[0] * c(p + 1 - m),
        ];
        let mut middle = Vec::with_capacity(order);
        let mut tail = Vec::with_capacity(order);
        for k in 0..order {
            let ki = k as i64;
            middle.push(
                alphas[k] * (alphas[order - k - 1] - alphas[order - k]) * c(p + 1 + 2 * ki - m),
            );
            tail.push((
                alphas[k] * alphas[order - k - 1] * c(p - 2 * ki + m - 1),
                -alphas[k] * alphas[order - k] * c(p + 1 - 2 * ki + m),
            ));
        }
        Self { head, middle, tail }
    }

    fn beta(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        self.head.iter().for_each(|&x| acc.add(x));
        self.middle.iter().for_each(|&x| acc.add(x));
        for &(pos, neg) in &self.tail {
            acc.add(pos);
            acc.add(neg);
        }
        0.5 * acc.value()
    }

    fn magnitude(&self) -> f64 {
        let s: f64 = self.head.iter().map(|x| x.abs()).sum::<f64>()
            + self.middle.iter().map(|x| x.abs()).sum::<f64>()
            + self
                .tail
                .iter()
                .map(|(x, y)| x.abs() + y.abs())
                .sum::<f64>();
        0.5 * s
    }
}

/// `β_order` for mode `p`; `alphas` must hold at least `order + 1` entries.
fn beta_from_table(order: usize, p: i64, n: usize, alphas: &[f64]) -> (f64, f64) {
    if order == 0 {
        let b0 = -alphas[0] * alphas[0] * cosine_sum(p + 1, n) as f64;
        return (b0, b0.abs());
    }
    let terms = BetaTerms::new(order, p, n, alphas);
    (terms.beta(), terms.magnitude())
}

/// Coefficient `β_order` of `xⁿ` in `f_p(x, 1)`.
pub fn beta_coeff(order: usize, p: i64, n: usize, a: f64) -> f64 {
    let alphas = alpha_table(order, a);
    beta_from_table(order, p, n, &alphas).0
}

/// `β_0..=β_max` together with the magnitude scale of each (sum of the
/// absolute values of its contributions).
pub fn beta_table(max: usize, p: i64, n: usize, a: f64) -> (Vec<f64>, Vec<f64>) {
    let alphas = alpha_table(max, a);
    (0..=max).map(|k| beta_from_table(k, p, n, &alphas)).unzip()
}

/// Upper bound on `Σ_{m > order} |β_m| x^m` from the envelope
/// `|β_m| ≤ 4N (m+1) α_m α_{⌈m/2⌉}`.
pub fn tail_bound(n: usize, a: f64, x: f64, order: usize) -> f64 {
    let h = a / 2.0;
    // ratio bound e_{m+1}/e_m <= ratio(m), nonincreasing in m
    let ratio = |m: usize| {
        let mf = m as f64;
        let half = (m / 2) as f64;
        (mf + 2.0) / (mf + 1.0) * (h + mf) / (mf + 1.0) * (h + half) / (half + 1.0)
    };
    let mut ln_alpha = vec![0.0f64];
    let ln_alpha_at = |ln_alpha: &mut Vec<f64>, m: usize| {
        while ln_alpha.len() <= m {
            let k = ln_alpha.len() as f64;
            let prev = *ln_alpha.last().unwrap();
            ln_alpha.push(prev + ((h + k - 1.0) / k).ln());
        }
        ln_alpha[m]
    };
    let ln_x = x.ln();
    let ln_4n = (4.0 * n as f64).ln();
    let close_at = 0.5 * (1.0 + x);
    let mut acc = 0.0;
    let mut m = order + 1;
    while m < 1_000_000 {
        let ln_term = ln_4n
            + ((m + 1) as f64).ln()
            + ln_alpha_at(&mut ln_alpha, m)
            + ln_alpha_at(&mut ln_alpha, m.div_ceil(2))
            + m as f64 * ln_x;
        let term = ln_term.exp();
        let q = x * ratio(m);
        if q <= close_at {
            return acc + term / (1.0 - q);
        }
        acc += term;
        m += 1;
    }
    f64::INFINITY
}

/// Truncated series value at `x` with a bound on the neglected tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
}

impl SeriesValue {
    /// Whether `exact` lies within the tail bound (plus a rounding `slack`) of
    /// the partial sum.
    pub fn brackets(&self, exact: f64, slack: f64) -> bool {
        (exact - self.value).abs() <= self.tail_bound + slack
    }
}

fn check_unit_interval(x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "series in x is only valid on (0, 1), got {x}"
        )))
    }
}

/// Partial sums `Σ_{m≤k} β_m x^m` for `k = 0..=order`.
pub fn partial_sums(p: i64, n: usize, a: f64, x: f64, order: usize) -> Result<Vec<f64>> {
    check_unit_interval(x)?;
    let (betas, _) = beta_table(order, p, n, a);
    let mut acc = CompensatedSum::new();
    let mut xm = 1.0;
    Ok(betas
        .iter()
        .map(|b| {
            acc.add(b * xm);
            xm *= x;
            acc.value()
        })
        .collect())
}

/// Evaluate `f_p(x, 1)` by its series truncated at `order`.
pub fn series_eval(p: i64, n: usize, a: f64, x: f64, order: usize) -> Result<SeriesValue> {
    let sums = partial_sums(p, n, a, x, order)?;
    Ok(SeriesValue {
        value: *sums.last().unwrap(),
        tail_bound: tail_bound(n, a, x, order),
    })
}

/// `f_p(x, 1)` summed from its series until the tail bound is below rounding.
///
/// All coefficients share a sign, so the result keeps full relative accuracy
/// even where the direct sum loses it to cancellation (`x` near zero).
pub fn f_small_ratio(p: i64, n: usize, a: f64, x: f64) -> Result<f64> {
    check_unit_interval(x)?;
    let mut order = 32;
    while order <= 4096 {
        let sum = *partial_sums(p, n, a, x, order)?.last().unwrap();
        if tail_bound(n, a, x, order) <= f64::EPSILON * sum.abs() {
            return Ok(sum);
        }
        order *= 2;
    }
    Err(Error::InvalidArgument(format!(
        "series at x = {x} did not reach rounding level"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "order", rename_all = "kebab-case")]
pub enum SeriesVerdict {
    AllNonpositive,
    /// First coefficient exceeding the tolerance.
    ViolationAt(usize),
}

/// How often a positive contribution appeared and how often it was paired
/// with a compensating negative one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingEvidence {
    pub fired: usize,
    pub compensated: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub x: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesCertificate {
    pub n: usize,
    pub a: f64,
    pub p: i64,
    pub max_order: usize,
    pub betas: Vec<f64>,
    pub verdict: SeriesVerdict,
    pub pairing: PairingEvidence,
    /// Envelope-based truncation bounds; an estimate derived from a crude
    /// coefficient envelope, not a sharp remainder.
    pub tail_bounds: Vec<TailBound>,
}

fn nonpositive(value: f64, scale: f64) -> bool {
    value <= NONPOSITIVE_TOLERANCE * scale.max(1.0)
}

/// Check the pairing argument for one order: every positive tail term must
/// meet an unused compensating negative term with a nonpositive pair sum.
fn pairing_at(order: usize, p: i64, n: usize, alphas: &[f64]) -> PairingEvidence {
    let mut ev = PairingEvidence::default();
    if order == 0 {
        return ev;
    }
    let terms = BetaTerms::new(order, p, n, alphas);
    let m = order as i64;
    let nn = n as i64;
    let mut used = vec![false; order + 1];
    for k in 0..order {
        let ki = k as i64;
        let fires =
            cosine_sum(p - 2 * ki + m - 1, n) == nn && cosine_sum(p + 1 - 2 * ki + m, n) == 0;
        if !fires {
            continue;
        }
        ev.fired += 1;
        let (pos, neg) = terms.tail[k];
        let (partner, slot) = if k + 1 < order {
            // the k+1 term's positive half must vanish for the pairing to work
            if cosine_sum(p - 2 * ki + m - 3, n) != 0 {
                continue;
            }
            (terms.tail[k + 1].1, k + 1)
        } else {
            (terms.head[1], order)
        };
        if used[slot] || partner > 0.0 {
            continue;
        }
        used[slot] = true;
        let pair = pos + neg + partner;
        if nonpositive(pair, pos.abs() + partner.abs()) {
            ev.compensated += 1;
        }
    }
    ev
}

/// Compute `β_0..=β_max_order` for mode `p` and certify that none is positive.
pub fn certify_nonpositive(n: usize, a: f64, p: i64, max_order: usize) -> SeriesCertificate {
    let alphas = alpha_table(max_order, a);
    let mut betas = Vec::with_capacity(max_order + 1);
    let mut verdict = SeriesVerdict::AllNonpositive;
    let mut pairing = PairingEvidence::default();
    for order in 0..=max_order {
        let (b, scale) = beta_from_table(order, p, n, &alphas);
        if verdict == SeriesVerdict::AllNonpositive && !nonpositive(b, scale) {
            verdict = SeriesVerdict::ViolationAt(order);
        }
        let ev = pairing_at(order, p, n, &alphas);
        pairing.fired += ev.fired;
        pairing.compensated += ev.compensated;
        betas.push(b);
    }
    let tail_bounds = CERTIFICATE_TAIL_POINTS
        .iter()
        .map(|&x| TailBound {
            x,
            bound: tail_bound(n, a, x, max_order),
        })
        .collect();
    SeriesCertificate {
        n,
        a,
        p,
        max_order,
        betas,
        verdict,
        pairing,
        tail_bounds,
    }
}
