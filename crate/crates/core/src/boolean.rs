//! Classical Boolean layer: EXACT / THRESHOLD, the bit-partition recursion
//! for THRESHOLD, and the randomized EXACT_1 gadget with its repetition and
//! derandomization machinery.
//!
//! Indices are 0-based. `THRESHOLD_k(x) = 1` iff `|x| ≤ k`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Fixed-length bit vector of at most 64 bits. Bit `i` is input `x_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BitString {
    bits: u64,
    len: usize,
}

impl BitString {
    pub fn new(bits: u64, len: usize) -> Result<Self> {
        if len > 64 || (len < 64 && bits >> len != 0) {
            return Err(Error::DimensionError(format!(
                "bits {bits:#b} do not fit in length {len}"
            )));
        }
        Ok(BitString { bits, len })
    }

    pub fn zeros(len: usize) -> Self {
        BitString { bits: 0, len }
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn len(self) -> usize {
        self.len
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    pub fn get(self, i: usize) -> bool {
        self.bits >> i & 1 == 1
    }

    pub fn weight(self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Every bit string of length `n`, in increasing integer order.
    pub fn all(n: usize) -> impl Iterator<Item = BitString> {
        assert!(n < 64, "enumeration needs n < 64");
        (0..1u64 << n).map(move |bits| BitString { bits, len: n })
    }
}

/// Characters left to right are `x_0, x_1, …`.
impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = 0u64;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' if i < 64 => bits |= 1 << i,
                _ => return Err(Error::Parse(format!("bad bit string `{s}`"))),
            }
        }
        BitString::new(bits, s.chars().count())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        (0..self.len).try_for_each(|i| f.write_str(if self.get(i) { "1" } else { "0" }))
    }
}

pub fn exact_k(x: BitString, k: usize) -> bool {
    x.weight() == k
}

pub fn threshold_k(x: BitString, k: usize) -> bool {
    x.weight() <= k
}

/// `⌈log₂ n⌉`, with 0 for `n ≤ 1`.
pub fn log_width(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// `[S_{i,0}, S_{i,1}]` for each bit position `i < ⌈log₂ n⌉`, where
/// `S_{i,b} = { j < n : bit i of j is b }`. For `n < 2` a single trivial
/// level `[[0..n], []]` is returned.
pub fn partition_sets(n: usize) -> Vec<[Vec<usize>; 2]> {
    if n < 2 {
        return vec![[(0..n).collect(), Vec::new()]];
    }
    (0..log_width(n))
        .map(|i| {
            let (one, zero): (Vec<usize>, Vec<usize>) = (0..n).partition(|j| j >> i & 1 == 1);
            [zero, one]
        })
        .collect()
}

/// Splits `set` by bit `i` of each member index.
pub(crate) fn split_by_bit(set: &[usize], i: usize) -> [Vec<usize>; 2] {
    let (one, zero): (Vec<usize>, Vec<usize>) = set.iter().partition(|j| *j >> i & 1 == 1);
    [zero, one]
}

/// Evaluates `TH_k(x)` through the bit-partition recursion.
pub fn threshold_recursion_eval(x: BitString, k: usize) -> bool {
    let all: Vec<usize> = (0..x.len()).collect();
    let levels = log_width(x.len());
    let mut memo = HashMap::new();
    th_rec(x, &all, k, levels, &mut memo)
}

fn th_rec(
    x: BitString,
    set: &[usize],
    k: usize,
    levels: usize,
    memo: &mut HashMap<(Vec<usize>, usize), bool>,
) -> bool {
    if k >= set.len() {
        return true;
    }
    if k == 0 {
        return set.iter().all(|&j| !x.get(j));
    }
    if let Some(&v) = memo.get(&(set.to_vec(), k)) {
        return v;
    }
    let value = (0..levels).all(|i| {
        let [s0, s1] = split_by_bit(set, i);
        th_rec(x, &s0, 0, levels, memo)
            || th_rec(x, &s1, 0, levels, memo)
            || (1..k)
                .any(|kp| th_rec(x, &s0, kp, levels, memo) && th_rec(x, &s1, k - kp, levels, memo))
    });
    memo.insert((set.to_vec(), k), value);
    value
}

/// `(⋀_{i∈S} ¬x_i) ∧ (⋁_{j∉S} x_j)`.
pub fn gadget_eval(subset: &[usize], x: BitString) -> bool {
    gadget_mask(subset_mask(subset), x)
}

pub(crate) fn subset_mask(subset: &[usize]) -> u64 {
    subset.iter().fold(0, |m, &i| m | (1u64 << i))
}

fn gadget_mask(mask: u64, x: BitString) -> bool {
    x.bits & mask == 0 && x.bits & !mask != 0
}

/// Number of subsets `S ⊆ [n]` on which the gadget accepts `x`.
pub fn gadget_acceptance_count(x: BitString) -> u64 {
    assert!(x.len() <= 24, "exhaustive subset enumeration needs n ≤ 24");
    (0..1u64 << x.len()).filter(|&s| gadget_mask(s, x)).count() as u64
}

/// Smallest multiple of 8 that is at least `⌈64·ln(1/ε)⌉`.
///
/// `64·ln(1/ε)` is snapped to the nearest integer when within `1e-9`, so that
/// `ε = 1/e` gives exactly 64.
pub fn choose_t(epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::ConfigMismatch(format!(
            "epsilon must lie in (0,1), got {epsilon}"
        )));
    }
    let raw = 64.0 * (1.0 / epsilon).ln();
    let base = if (raw - raw.round()).abs() < 1e-9 {
        raw.round()
    } else {
        raw.ceil()
    } as usize;
    Ok(base.div_ceil(8).max(1) * 8)
}

/// `t` random subsets of `[n]`, the gadget repetitions of the EXACT_1
/// approximation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetFamily {
    pub n: usize,
    pub t: usize,
    pub seed: u64,
    pub subsets: Vec<Vec<usize>>,
}

impl SubsetFamily {
    /// Each subset includes every index independently with probability 1/2.
    pub fn sample<R: Rng>(n: usize, t: usize, seed: u64, rng: &mut R) -> Self {
        let subsets = (0..t)
            .map(|_| (0..n).filter(|_| rng.gen::<bool>()).collect())
            .collect();
        SubsetFamily {
            n,
            t,
            seed,
            subsets,
        }
    }

    pub fn from_seed(n: usize, t: usize, seed: u64) -> Self {
        Self::sample(n, t, seed, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn validate(&self) -> Result<()> {
        if self.t == 0 || self.subsets.len() != self.t {
            return Err(Error::ConfigMismatch(format!(
                "family declares t = {} but holds {} subsets",
                self.t,
                self.subsets.len()
            )));
        }
        if self.n > 64 {
            return Err(Error::Unsupported(format!("n = {} exceeds 64", self.n)));
        }
        for s in &self.subsets {
            if s.iter().any(|&i| i >= self.n) || s.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::ConfigMismatch(format!(
                    "subset {s:?} is not a sorted subset of [0, {})",
                    self.n
                )));
            }
        }
        Ok(())
    }

    pub fn masks(&self) -> Vec<u64> {
        self.subsets.iter().map(|s| subset_mask(s)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: SubsetFamily = serde_json::from_str(s)?;
        f.validate()?;
        Ok(f)
    }
}

/// Number of gadgets that must accept: the decision is `count > 3t/8`.
pub fn decision_count(t: usize) -> usize {
    3 * t / 8 + 1
}

/// 1 iff more than `3t/8` gadgets of the family accept `x`.
pub fn repeated_gadget_decision(family: &SubsetFamily, x: BitString) -> bool {
    let count = family.subsets.iter().filter(|s| gadget_eval(s, x)).count();
    8 * count > 3 * family.t
}

fn decision_masks(masks: &[u64], x: BitString) -> bool {
    8 * masks.iter().filter(|&&m| gadget_mask(m, x)).count() > 3 * masks.len()
}

/// `|β_x(θ)|² = s^{|x|}(1−s)^{n−|x|}` with `s = sin²θ`.
pub fn product_weight(n: usize, weight: usize, theta: f64) -> f64 {
    let s = theta.sin().powi(2);
    s.powi(weight as i32) * (1.0 - s).powi((n - weight) as i32)
}

/// Per-input error indicators of a family against EXACT_1, weighted by the
/// product-state distribution at angle `theta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GadgetErrorProfile {
    pub n: usize,
    pub theta: f64,
    /// `errors[x]` for `x` read as an integer.
    pub errors: Vec<bool>,
    pub weighted_error: f64,
}

pub fn gadget_error_profile(family: &SubsetFamily, theta: f64) -> Result<GadgetErrorProfile> {
    family.validate()?;
    if family.n > 20 {
        return Err(Error::Unsupported(format!(
            "exhaustive enumeration over 2^{} inputs",
            family.n
        )));
    }
    let masks = family.masks();
    let weights: Vec<f64> = (0..=family.n)
        .map(|w| product_weight(family.n, w, theta))
        .collect();
    let mut weighted_error = 0.0;
    let errors = BitString::all(family.n)
        .map(|x| {
            let err = decision_masks(&masks, x) != exact_k(x, 1);
            if err {
                weighted_error += weights[x.weight()];
            }
            err
        })
        .collect();
    Ok(GadgetErrorProfile {
        n: family.n,
        theta,
        errors,
        weighted_error,
    })
}

/// Result of a derandomization search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Derandomized {
    pub family: SubsetFamily,
    pub weighted_error: f64,
    pub mean_weighted_error: f64,
    pub trials: usize,
    pub best_trial: usize,
}

/// Samples `trials` families from one seeded stream and keeps the one with
/// the smallest weighted error.
pub fn derandomize_family(
    n: usize,
    t: usize,
    theta: f64,
    trials: usize,
    seed: u64,
) -> Result<Derandomized> {
    if trials == 0 || t == 0 {
        return Err(Error::ConfigMismatch(
            "trials and t must be positive".into(),
        ));
    }
    if n > 20 {
        return Err(Error::Unsupported(format!(
            "derandomization enumerates 2^n inputs; n = {n} exceeds 20"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(usize, SubsetFamily, f64)> = None;
    let mut total = 0.0;
    for trial in 0..trials {
        let family = SubsetFamily::sample(n, t, seed, &mut rng);
        let err = gadget_error_profile(&family, theta)?.weighted_error;
        total += err;
        if best.as_ref().is_none_or(|(_, _, b)| err < *b) {
            best = Some((trial, family, err));
        }
    }
    let (best_trial, family, weighted_error) = best.expect("trials ≥ 1");
    Ok(Derandomized {
        family,
        weighted_error,
        mean_weighted_error: total / trials as f64,
        trials,
        best_trial,
    })
}
