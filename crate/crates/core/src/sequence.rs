//! (alpha, k)-sequences and the online-center order-complexity measure.
//!
//! An (alpha, k)-sequence is an ordered point list where each point's
//! distance to all predecessors strictly exceeds alpha times the best
//! (k-1)-partition diameter of the prefix. The order complexity of a dataset
//! is the length of the longest such sequence at alpha = 2; it is computed
//! exactly by memoized search on small inputs and bracketed by a greedy
//! lower bound and an aspect-ratio upper bound otherwise.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diameter::{min_max_diameter_partition, DiamMode};
use crate::error::{Error, Result};
use crate::metric::{aspect_ratio, dist};
use crate::point::Point;
use crate::tol::{ceil_snapped, floor_snapped, strictly_greater};

/// Alpha value fixed by the order-complexity definition.
pub const OC_ALPHA: f64 = 2.0;
/// Largest instance the exhaustive order-complexity search accepts.
pub const OC_EXACT_MAX_N: usize = 15;

fn serialize_margins<S: serde::Serializer>(
    v: &[f64],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for m in v {
        if m.is_finite() {
            seq.serialize_element(&Some(*m))?;
        } else {
            seq.serialize_element(&None::<f64>)?;
        }
    }
    seq.end()
}

fn deserialize_margins<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<Vec<f64>, D::Error> {
    let raw = Vec::<Option<f64>>::deserialize(d)?;
    Ok(raw
        .into_iter()
        .map(|m| m.unwrap_or(f64::INFINITY))
        .collect())
}

/// A verified (alpha, k)-sequence witness. `indices` are 0-based positions
/// into the point list the certificate was checked against; `margins[j]` is
/// the slack `min_dist - alpha * diam` at position j (infinite at the first
/// position, which carries no constraint).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceCertificate {
    pub indices: Vec<usize>,
    pub alpha: f64,
    pub k: usize,
    #[serde(
        serialize_with = "serialize_margins",
        deserialize_with = "deserialize_margins"
    )]
    pub margins: Vec<f64>,
    /// All prefix diameters were computed exactly. When false the acceptance
    /// is still sound (approximate diameters only over-reject), but margins
    /// are conservative.
    pub diam_exact: bool,
}

impl SequenceCertificate {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Why a sequence check failed, reported at the first failing position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRejection {
    /// 0-based position within the candidate order.
    pub position: usize,
    pub min_dist: f64,
    pub threshold: f64,
    /// The failing comparison used an exact diameter; approximate rejections
    /// may be spurious.
    pub definitive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VerifyOutcome {
    Accepted(SequenceCertificate),
    Rejected(SequenceRejection),
}

impl VerifyOutcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, VerifyOutcome::Accepted(_))
    }

    pub fn accepted(self) -> Option<SequenceCertificate> {
        match self {
            VerifyOutcome::Accepted(c) => Some(c),
            VerifyOutcome::Rejected(_) => None,
        }
    }
}

/// Best-(k-1)-diameter of a prefix, with a flag for whether it is exact.
fn prefix_diam(prefix: &[Point], k: usize, mode: DiamMode) -> Result<(f64, bool)> {
    let ell = k - 1;
    if prefix.len() <= ell {
        return Ok((0.0, true));
    }
    let part = min_max_diameter_partition(prefix, ell, mode)?;
    Ok((part.value, part.exact))
}

/// Check whether `order` (indices into `points`) forms an (alpha, k)-sequence:
/// every point's min distance to its predecessors must strictly exceed
/// alpha times the best (k-1)-partition diameter of the predecessor set.
/// Acceptance with approximate diameters is sound; rejection is flagged
/// definitive only when the failing diameter was exact.
pub fn verify_alpha_k_sequence(
    points: &[Point],
    order: &[usize],
    alpha: f64,
    k: usize,
    mode: DiamMode,
) -> Result<VerifyOutcome> {
    if !alpha.is_finite() || alpha <= 1.0 {
        return Err(Error::invalid("alpha must exceed 1"));
    }
    if k < 2 {
        return Err(Error::invalid("k must be >= 2"));
    }
    if order.is_empty() {
        return Err(Error::invalid("sequence must contain at least one point"));
    }
    if order.iter().any(|&i| i >= points.len()) {
        return Err(Error::invalid("sequence index out of range"));
    }

    let mut prefix: Vec<Point> = vec![points[order[0]].clone()];
    let mut margins = vec![f64::INFINITY];
    let mut all_exact = true;
    for (pos, &idx) in order.iter().enumerate().skip(1) {
        let x = &points[idx];
        let mut min_dist = f64::INFINITY;
        for p in &prefix {
            min_dist = min_dist.min(dist(p, x)?);
        }
        let (diam, exact) = prefix_diam(&prefix, k, mode)?;
        all_exact &= exact;
        let threshold = alpha * diam;
        if !strictly_greater(min_dist, threshold) {
            return Ok(VerifyOutcome::Rejected(SequenceRejection {
                position: pos,
                min_dist,
                threshold,
                definitive: exact,
            }));
        }
        margins.push(min_dist - threshold);
        prefix.push(x.clone());
    }
    Ok(VerifyOutcome::Accepted(SequenceCertificate {
        indices: order.to_vec(),
        alpha,
        k,
        margins,
        diam_exact: all_exact,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OcMethod {
    Exhaustive,
    GreedyRestart,
    AspectBound,
}

/// Order-complexity bracket `lower <= OC <= upper` with provenance. Exact
/// estimates have `lower == upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcEstimate {
    pub lower: usize,
    pub upper: usize,
    pub exact: bool,
    pub method: OcMethod,
    pub witness: Option<SequenceCertificate>,
}

/// Distinct points of `xs` (first occurrence kept; duplicates can never
/// extend a sequence past length one).
pub(crate) fn dedup_points(xs: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::new();
    for x in xs {
        if !out.iter().any(|p| p == x) {
            out.push(x.clone());
        }
    }
    out
}

struct OcSearch<'a> {
    points: &'a [Point],
    k: usize,
    dist: Vec<Vec<f64>>,
    diam_memo: HashMap<u32, f64>,
    len_memo: HashMap<u32, u8>,
}

impl OcSearch<'_> {
    fn diam_of_mask(&mut self, mask: u32) -> f64 {
        if let Some(&d) = self.diam_memo.get(&mask) {
            return d;
        }
        let members: Vec<usize> = (0..self.points.len())
            .filter(|&i| mask & (1 << i) != 0)
            .collect();
        let ell = self.k - 1;
        let value = if members.len() <= ell {
            0.0
        } else if ell == 1 {
            let mut best = 0.0f64;
            for (a, &i) in members.iter().enumerate() {
                for &j in &members[a + 1..] {
                    best = best.max(self.dist[i][j]);
                }
            }
            best
        } else {
            let pts: Vec<Point> = members.iter().map(|&i| self.points[i].clone()).collect();
            min_max_diameter_partition(&pts, ell, DiamMode::Exact)
                .expect("exact diameter is feasible for n <= 15")
                .value
        };
        self.diam_memo.insert(mask, value);
        value
    }

    fn appendable(&mut self, mask: u32, i: usize) -> bool {
        let threshold = OC_ALPHA * self.diam_of_mask(mask);
        let mut min_dist = f64::INFINITY;
        for j in 0..self.points.len() {
            if mask & (1 << j) != 0 {
                min_dist = min_dist.min(self.dist[j][i]);
            }
        }
        strictly_greater(min_dist, threshold)
    }

    /// Longest extension reachable from the chosen set `mask`. The predicate
    /// for appending depends only on the prefix as a set, so memoizing on the
    /// mask is sound.
    fn extend(&mut self, mask: u32) -> u8 {
        if let Some(&l) = self.len_memo.get(&mask) {
            return l;
        }
        let mut best = 0u8;
        for i in 0..self.points.len() {
            if mask & (1 << i) == 0 && self.appendable(mask, i) {
                best = best.max(1 + self.extend(mask | (1 << i)));
            }
        }
        self.len_memo.insert(mask, best);
        best
    }
}

/// Exact order complexity by depth-first search over ordered subsets with
/// prefix-set memoization. Limited to n <= 15.
pub fn oc_exact(points: &[Point], k: usize) -> Result<OcEstimate> {
    if points.is_empty() {
        return Err(Error::invalid("order complexity of an empty set"));
    }
    if k < 2 {
        return Err(Error::invalid("k must be >= 2"));
    }
    let n = points.len();
    if n > OC_EXACT_MAX_N {
        return Err(Error::unsupported(format!(
            "exhaustive order-complexity search limited to n <= {OC_EXACT_MAX_N}, got {n}"
        )));
    }
    let mut d = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = dist(&points[i], &points[j])?;
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    let mut search = OcSearch {
        points,
        k,
        dist: d,
        diam_memo: HashMap::new(),
        len_memo: HashMap::new(),
    };

    let mut best_len = 0usize;
    let mut best_start = 0usize;
    for i in 0..n {
        let total = 1 + search.extend(1 << i) as usize;
        if total > best_len {
            best_len = total;
            best_start = i;
        }
    }

    // Reconstruct a witness by walking the memoized lengths.
    let mut order = vec![best_start];
    let mut mask = 1u32 << best_start;
    let mut remaining = (best_len - 1) as u8;
    while remaining > 0 {
        let mut stepped = false;
        for i in 0..n {
            if mask & (1 << i) == 0
                && search.appendable(mask, i)
                && search.extend(mask | (1 << i)) == remaining - 1
            {
                order.push(i);
                mask |= 1 << i;
                remaining -= 1;
                stepped = true;
                break;
            }
        }
        debug_assert!(stepped, "witness reconstruction must follow the memo");
        if !stepped {
            break;
        }
    }

    let witness = verify_alpha_k_sequence(points, &order, OC_ALPHA, k, DiamMode::Exact)?
        .accepted()
        .ok_or_else(|| Error::invalid("reconstructed witness failed verification"))?;
    Ok(OcEstimate {
        lower: best_len,
        upper: best_len,
        exact: true,
        method: OcMethod::Exhaustive,
        witness: Some(witness),
    })
}

/// Combined trivial/aspect upper bound used by the inexact estimators.
fn oc_upper(points: &[Point], k: usize) -> Result<usize> {
    let distinct = dedup_points(points).len();
    Ok(oc_upper_bound_aspect(points, k)?.min(distinct.max(1)))
}

/// Aspect-ratio upper bound on the order complexity:
/// `k * (floor(log2 asp) + 1) + 1` over the deduplicated set. Inside any
/// (2, k)-sequence the prefix min-distances contain a geometric chain with
/// ratio > 2 that steps back at most k-1 positions at a time, so the chain
/// has at most floor(log2 asp) hops and the sequence length is bounded.
pub fn oc_upper_bound_aspect(points: &[Point], k: usize) -> Result<usize> {
    if points.is_empty() {
        return Err(Error::invalid("aspect bound of an empty set"));
    }
    if k < 2 {
        return Err(Error::invalid("k must be >= 2"));
    }
    let dedup = dedup_points(points);
    if dedup.len() < 2 {
        return Ok(1);
    }
    let asp = aspect_ratio(&dedup)?;
    let hops = floor_snapped(asp.log2()).max(0.0) as usize;
    Ok(k * (hops + 1) + 1)
}

/// Incremental greedy extension state: chosen indices, per-candidate min
/// distance to the chosen set, and the current appendability threshold
/// (recomputed only when a point is appended).
struct GreedyState<'a> {
    points: &'a [Point],
    k: usize,
    chosen: Vec<usize>,
    chosen_pts: Vec<Point>,
    taken: Vec<bool>,
    min_dist: Vec<f64>,
    diam_k1: f64,
}

impl<'a> GreedyState<'a> {
    fn start(points: &'a [Point], k: usize, first: usize) -> Result<Self> {
        let min_dist = points
            .iter()
            .map(|p| dist(p, &points[first]))
            .collect::<Result<Vec<_>>>()?;
        let mut taken = vec![false; points.len()];
        taken[first] = true;
        Ok(GreedyState {
            points,
            k,
            chosen: vec![first],
            chosen_pts: vec![points[first].clone()],
            taken,
            min_dist,
            diam_k1: 0.0,
        })
    }

    fn appendable(&self, i: usize) -> bool {
        !self.taken[i] && strictly_greater(self.min_dist[i], OC_ALPHA * self.diam_k1)
    }

    fn append(&mut self, i: usize) -> Result<()> {
        self.chosen.push(i);
        self.chosen_pts.push(self.points[i].clone());
        self.taken[i] = true;
        for (j, slot) in self.min_dist.iter_mut().enumerate() {
            let d = dist(&self.points[j], &self.points[i])?;
            if d < *slot {
                *slot = d;
            }
        }
        let (diam, _) = prefix_diam(&self.chosen_pts, self.k, DiamMode::Auto)?;
        self.diam_k1 = diam;
        Ok(())
    }
}

/// Greedy lower bound on the order complexity: deterministic forward and
/// reverse arrival sweeps plus `restarts` seeded random extensions, each
/// witness re-verified before it counts.
pub fn oc_greedy_lower(
    points: &[Point],
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<OcEstimate> {
    if points.is_empty() {
        return Err(Error::invalid("order complexity of an empty set"));
    }
    if k < 2 {
        return Err(Error::invalid("k must be >= 2"));
    }
    let n = points.len();

    let sweep = |order: &[usize]| -> Result<Vec<usize>> {
        let mut state = GreedyState::start(points, k, order[0])?;
        for &i in &order[1..] {
            if state.appendable(i) {
                state.append(i)?;
            }
        }
        Ok(state.chosen)
    };

    let mut candidates: Vec<Vec<usize>> = Vec::new();
    let forward: Vec<usize> = (0..n).collect();
    candidates.push(sweep(&forward)?);
    let reverse: Vec<usize> = (0..n).rev().collect();
    candidates.push(sweep(&reverse)?);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..restarts {
        let start = rng.random_range(0..n);
        let mut state = GreedyState::start(points, k, start)?;
        loop {
            let options: Vec<usize> = (0..n).filter(|&i| state.appendable(i)).collect();
            if options.is_empty() {
                break;
            }
            let pick = options[rng.random_range(0..options.len())];
            state.append(pick)?;
        }
        candidates.push(state.chosen);
    }

    let mut best: Option<SequenceCertificate> = None;
    for mut cand in candidates {
        // Trim to the verified prefix; greedy and verification share the
        // same diameter route, so trimming is rarely needed.
        loop {
            match verify_alpha_k_sequence(points, &cand, OC_ALPHA, k, DiamMode::Auto)? {
                VerifyOutcome::Accepted(cert) => {
                    if best.as_ref().is_none_or(|b| cert.len() > b.len()) {
                        best = Some(cert);
                    }
                    break;
                }
                VerifyOutcome::Rejected(rej) => {
                    cand.truncate(rej.position);
                    if cand.is_empty() {
                        break;
                    }
                }
            }
        }
    }
    let witness = best.ok_or_else(|| Error::invalid("greedy found no verifiable sequence"))?;
    let upper = oc_upper(points, k)?;
    Ok(OcEstimate {
        lower: witness.len(),
        upper: upper.max(witness.len()),
        exact: false,
        method: OcMethod::GreedyRestart,
        witness: Some(witness),
    })
}

/// Proof-form and statement-form lower bounds on the length of the
/// (beta, k)-subsequence extracted from an (alpha, k)-sequence of length `n`.
pub fn conversion_length_bounds(n: usize, k: usize, alpha: f64, beta: f64) -> (usize, f64) {
    let ratio = beta.ln() / alpha.ln();
    let s = (ceil_snapped(ratio).max(1.0)) as usize;
    let proof = n / (k * s);
    let statement = (n as f64 / (2.0 * k as f64 * ratio)).floor();
    (proof, statement)
}

/// Convert an (alpha, k)-sequence into a (beta, k)-sequence for beta >= alpha
/// by building the geometric chain of prefix min-distances (each hop steps
/// back at most k-1 positions and multiplies the distance by more than
/// alpha), then keeping every s-th chain element with s = ceil(log_alpha
/// beta). The output re-verifies at (beta, k) and has length at least
/// floor(n / (k * s)); when that floor is zero the chain head alone is
/// emitted.
pub fn extract_beta_subsequence(
    points: &[Point],
    cert: &SequenceCertificate,
    beta: f64,
) -> Result<SequenceCertificate> {
    if beta < cert.alpha {
        return Err(Error::invalid(
            "beta must be at least the certificate alpha",
        ));
    }
    let recheck =
        verify_alpha_k_sequence(points, &cert.indices, cert.alpha, cert.k, DiamMode::Auto)?;
    if !recheck.is_accepted() {
        return Err(Error::invalid("input certificate does not verify"));
    }
    let k = cert.k;
    let m = cert.indices.len();
    let seq: Vec<&Point> = cert.indices.iter().map(|&i| &points[i]).collect();

    // Prefix min-distances within the sequence; position 0 is unconstrained.
    let mut d = vec![f64::INFINITY; m];
    for j in 1..m {
        for i in 0..j {
            d[j] = d[j].min(dist(seq[i], seq[j])?);
        }
    }

    // Chain built backwards from the last element.
    let mut chain = vec![m - 1];
    let mut cur = m - 1;
    while cur + 1 > k {
        let mut next = None;
        for back in 1..k.min(cur + 1) {
            let cand = cur - back;
            if cand >= 1 && strictly_greater(d[cur], cert.alpha * d[cand]) {
                next = Some(cand);
                break;
            }
        }
        match next {
            Some(c) => {
                chain.push(c);
                cur = c;
            }
            None => break,
        }
    }
    chain.reverse();

    let ratio = beta.ln() / cert.alpha.ln();
    let s = (ceil_snapped(ratio).max(1.0)) as usize;
    let r = chain.len();
    let count = r / s;
    let positions: Vec<usize> = if count == 0 {
        vec![chain[r - 1]]
    } else {
        (1..=count).map(|j| chain[j * s - 1]).collect()
    };
    let order: Vec<usize> = positions.iter().map(|&p| cert.indices[p]).collect();

    verify_alpha_k_sequence(points, &order, beta, k, DiamMode::Auto)?
        .accepted()
        .ok_or_else(|| Error::invalid("extracted subsequence failed verification"))
}

/// Minimum expected number of centers any alpha-approximation must take on
/// a dataset with the given order complexity:
/// `0.9 * floor(oc / (k * ceil(log2(sqrt(n * alpha) / 2))))`.
pub fn lower_bound_centers(oc: usize, k: usize, n: usize, alpha: f64) -> Result<f64> {
    if k == 0 || n == 0 {
        return Err(Error::invalid("k and n must be positive"));
    }
    if alpha < 1.0 {
        return Err(Error::invalid("alpha must be >= 1"));
    }
    let target = 0.5 * (n as f64 * alpha).sqrt();
    if !strictly_greater(target, 1.0) {
        return Err(Error::invalid(
            "sqrt(n * alpha) / 2 must exceed 1 for the sequence conversion to apply",
        ));
    }
    let s = ceil_snapped(target.log2()).max(1.0) as usize;
    Ok(0.9 * (oc / (k * s)) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(values: &[f64]) -> Vec<Point> {
        values.iter().map(|&v| Point::scalar(v).unwrap()).collect()
    }

    fn geometric(base: f64, n: usize) -> Vec<Point> {
        (1..=n)
            .map(|t| Point::scalar(base.powi(t as i32)).unwrap())
            .collect()
    }

    #[test]
    fn verify_accepts_two_distinct_points() {
        let p = pts(&[0.0, 5.0]);
        let out = verify_alpha_k_sequence(&p, &[0, 1], 2.0, 2, DiamMode::Exact).unwrap();
        assert!(out.is_accepted());
    }

    #[test]
    fn verify_rejects_close_third_point() {
        let p = pts(&[0.0, 1.0, 1.5]);
        let out = verify_alpha_k_sequence(&p, &[0, 1, 2], 2.0, 2, DiamMode::Exact).unwrap();
        match out {
            VerifyOutcome::Rejected(rej) => {
                assert_eq!(rej.position, 2);
                assert!((rej.min_dist - 0.5).abs() < 1e-12);
                assert!((rej.threshold - 2.0).abs() < 1e-12);
                assert!(rej.definitive);
            }
            VerifyOutcome::Accepted(_) => panic!("must reject"),
        }
    }

    #[test]
    fn verify_accepts_full_exponential_series() {
        // (2*alpha)^t with alpha = 2: the adversarial series verifies whole.
        let p = geometric(4.0, 12);
        let order: Vec<usize> = (0..12).collect();
        let cert = verify_alpha_k_sequence(&p, &order, 2.0, 2, DiamMode::Exact)
            .unwrap()
            .accepted()
            .unwrap();
        assert_eq!(cert.len(), 12);
        assert!(cert.diam_exact);
        assert!(cert.margins[1..].iter().all(|&m| m > 0.0));
    }

    #[test]
    fn verify_rejects_duplicate_points() {
        let p = pts(&[1.0, 1.0]);
        let out = verify_alpha_k_sequence(&p, &[0, 1], 2.0, 2, DiamMode::Exact).unwrap();
        assert!(!out.is_accepted());
    }

    #[test]
    fn oc_exact_identical_points() {
        let p = pts(&[3.0, 3.0, 3.0]);
        let est = oc_exact(&p, 2).unwrap();
        assert_eq!(est.lower, 1);
        assert_eq!(est.upper, 1);
        assert!(est.exact);
    }

    #[test]
    fn oc_exact_at_least_k_minus_one_distinct() {
        let p = pts(&[0.0, 1.0, 2.0, 3.0]);
        for k in 2..=4 {
            let est = oc_exact(&p, k).unwrap();
            assert!(est.lower >= (k - 1).min(4), "k={k} est={est:?}");
        }
    }

    #[test]
    fn oc_exact_exponential_series_is_full_length() {
        let p = geometric(4.0, 10);
        let est = oc_exact(&p, 2).unwrap();
        assert_eq!(est.lower, 10);
        let witness = est.witness.unwrap();
        assert_eq!(witness.len(), 10);
    }

    #[test]
    fn oc_exact_rejects_large_inputs() {
        let p = pts(&(0..16).map(|i| i as f64).collect::<Vec<_>>());
        assert!(matches!(
            oc_exact(&p, 2).unwrap_err(),
            Error::UnsupportedInstance(_)
        ));
    }

    #[test]
    fn oc_greedy_matches_exact_on_series_and_degenerates() {
        let p = geometric(4.0, 10);
        let est = oc_greedy_lower(&p, 2, 4, 9).unwrap();
        assert_eq!(est.lower, 10);

        let same = pts(&[2.0, 2.0, 2.0]);
        let est = oc_greedy_lower(&same, 2, 4, 9).unwrap();
        assert_eq!(est.lower, 1);
    }

    #[test]
    fn greedy_never_exceeds_exact() {
        let cases: Vec<Vec<f64>> = vec![
            vec![0.0, 0.4, 3.0, 9.0, 27.5, 28.0],
            vec![1.0, 2.0, 4.0, 8.0, 16.0],
            vec![-5.0, -4.0, 0.0, 0.1, 7.0],
        ];
        for values in cases {
            let p = pts(&values);
            for k in 2..=3 {
                let exact = oc_exact(&p, k).unwrap();
                let greedy = oc_greedy_lower(&p, k, 8, 5).unwrap();
                assert!(greedy.lower <= exact.lower);
                assert!(exact.lower <= oc_upper_bound_aspect(&p, k).unwrap());
            }
        }
    }

    #[test]
    fn aspect_bound_examples() {
        let two = pts(&[0.0, 1.0]);
        assert_eq!(oc_upper_bound_aspect(&two, 2).unwrap(), 3);

        let series = geometric(4.0, 8);
        // asp = (4^8 - 4) / (4^2 - 4) = 5461, floor(log2) = 12, bound = 27.
        let bound = oc_upper_bound_aspect(&series, 2).unwrap();
        assert_eq!(bound, 27);
        let est = oc_greedy_lower(&series, 2, 2, 1).unwrap();
        assert_eq!(est.lower, 8);
        assert!(bound >= est.lower);

        let same = pts(&[5.0, 5.0]);
        assert_eq!(oc_upper_bound_aspect(&same, 2).unwrap(), 1);
    }

    #[test]
    fn extract_with_beta_equal_alpha_keeps_chain() {
        let p = geometric(4.0, 12);
        let order: Vec<usize> = (0..12).collect();
        let cert = verify_alpha_k_sequence(&p, &order, 2.0, 2, DiamMode::Exact)
            .unwrap()
            .accepted()
            .unwrap();
        let out = extract_beta_subsequence(&p, &cert, 2.0).unwrap();
        assert!(out.len() >= 12 / 2);
        assert_eq!(out.alpha, 2.0);
    }

    #[test]
    fn extract_to_beta_eight() {
        let p = geometric(4.0, 12);
        let order: Vec<usize> = (0..12).collect();
        let cert = verify_alpha_k_sequence(&p, &order, 2.0, 2, DiamMode::Exact)
            .unwrap()
            .accepted()
            .unwrap();
        let out = extract_beta_subsequence(&p, &cert, 8.0).unwrap();
        let (proof_bound, _) = conversion_length_bounds(12, 2, 2.0, 8.0);
        assert_eq!(proof_bound, 2);
        assert!(out.len() >= proof_bound);
        assert_eq!(out.alpha, 8.0);
    }

    #[test]
    fn extract_degenerate_floor_zero_emits_head() {
        let p = geometric(4.0, 3);
        let order: Vec<usize> = (0..3).collect();
        let cert = verify_alpha_k_sequence(&p, &order, 2.0, 2, DiamMode::Exact)
            .unwrap()
            .accepted()
            .unwrap();
        // s = ceil(log_2 256) = 8 > chain length.
        let out = extract_beta_subsequence(&p, &cert, 256.0).unwrap();
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn lower_bound_centers_examples() {
        assert_eq!(lower_bound_centers(0, 2, 1024, 1.0).unwrap(), 0.0);
        let v = lower_bound_centers(1024, 2, 1024, 1.0).unwrap();
        assert!((v - 115.2).abs() < 1e-9);
        // oc equal to one block gives exactly 0.9.
        let v = lower_bound_centers(8, 2, 1024, 1.0).unwrap();
        assert!((v - 0.9).abs() < 1e-12);
        assert!(lower_bound_centers(5, 2, 2, 1.0).is_err());
    }

    #[test]
    fn certificate_json_round_trips_infinite_margin() {
        let p = pts(&[0.0, 5.0]);
        let cert = verify_alpha_k_sequence(&p, &[0, 1], 2.0, 2, DiamMode::Exact)
            .unwrap()
            .accepted()
            .unwrap();
        let json = serde_json::to_string(&cert).unwrap();
        let back: SequenceCertificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cert);
        assert!(back.margins[0].is_infinite());
    }
}
