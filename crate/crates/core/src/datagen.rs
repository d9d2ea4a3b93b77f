//! Synthetic data: mixture distributions with ground-truth labels, the
//! adversarial exponential series, certified hard sequences, and arrival
//! order policies.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::diameter::DiamMode;
use crate::error::{Error, Result};
use crate::point::{Dataset, Point};
use crate::sequence::{verify_alpha_k_sequence, SequenceCertificate};
use crate::tol::strictly_greater;

/// Largest coordinate magnitude any generator is allowed to emit.
pub const MAX_COORD: f64 = 1e300;
/// Hard sequences additionally keep squared distances finite, since the
/// online algorithm compares costs on them.
pub const MAX_HARD_COORD: f64 = 1e150;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComponentKind {
    Gaussian,
    UniformBox,
    Exponential,
}

/// One mixture component: a location and a single positive scale parameter
/// (standard deviation, box half-width, or exponential mean respectively),
/// applied coordinate-wise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub kind: ComponentKind,
    pub location: Point,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub components: Vec<ComponentSpec>,
    pub weights: Vec<f64>,
    pub dim: usize,
    pub seed: u64,
}

impl MixtureSpec {
    /// Equal-weight mixture from component specs.
    pub fn uniform_weights(components: Vec<ComponentSpec>, dim: usize, seed: u64) -> Self {
        let k = components.len().max(1);
        MixtureSpec {
            components,
            weights: vec![1.0 / k as f64; k],
            dim,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::invalid("mixture needs at least one component"));
        }
        if self.weights.len() != self.components.len() {
            return Err(Error::invalid("one weight per component required"));
        }
        if self.dim == 0 {
            return Err(Error::invalid("dimension must be >= 1"));
        }
        if self.weights.iter().any(|&w| !(0.0..=1.0).contains(&w)) {
            return Err(Error::invalid("weights must lie in [0, 1]"));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "weights must sum to 1, got {total}"
            )));
        }
        for c in &self.components {
            if c.location.dim() != self.dim {
                return Err(Error::invalid("component location dimension mismatch"));
            }
            if !(c.scale > 0.0 && c.scale.is_finite()) {
                return Err(Error::invalid(
                    "component scale must be positive and finite",
                ));
            }
        }
        Ok(())
    }
}

/// Draw `n` i.i.d. points from the mixture. Labels record the component of
/// each point. Deterministic given the seed.
pub fn sample_mixture(spec: &MixtureSpec, n: usize, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::invalid("need n >= 1 samples"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random();
        let mut cum = 0.0;
        let mut comp = spec.components.len() - 1;
        for (c, &w) in spec.weights.iter().enumerate() {
            cum += w;
            if u < cum {
                comp = c;
                break;
            }
        }
        let c = &spec.components[comp];
        let mut coords = Vec::with_capacity(spec.dim);
        for d in 0..spec.dim {
            let loc = c.location.coords()[d];
            let value = match c.kind {
                ComponentKind::Gaussian => {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    loc + c.scale * z
                }
                ComponentKind::UniformBox => loc + rng.random_range(-c.scale..c.scale),
                ComponentKind::Exponential => {
                    let e = Exp::new(1.0 / c.scale)
                        .map_err(|e| Error::invalid(format!("exponential rate: {e}")))?;
                    loc + e.sample(&mut rng)
                }
            };
            coords.push(value);
        }
        points.push(Point::new(coords)?);
        labels.push(comp);
    }
    Dataset::new(points, Some(labels), Some(seed))
}

/// The adversarial series (2*alpha)^t for t = 1..=n, arriving in ascending
/// order. Every point is far from everything before it, so any approximation
/// guarantee forces selecting essentially all of it.
pub fn exponential_adversary(n: usize, alpha: f64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::invalid("need n >= 1"));
    }
    if alpha < 1.0 {
        return Err(Error::invalid("alpha must be >= 1"));
    }
    let base = 2.0 * alpha;
    let largest = base.powi(n as i32);
    if !largest.is_finite() || largest > MAX_COORD {
        return Err(Error::invalid(format!(
            "(2*alpha)^n = {largest:e} exceeds the coordinate cap; reduce n"
        )));
    }
    let points = (1..=n)
        .map(|t| Point::scalar(base.powi(t as i32)))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(points, None, None)
}

/// A certified (sqrt(n*alpha)/2, k)-sequence: the geometric series with
/// ratio sqrt(n*alpha), centered so that squared distances stay inside f64
/// range. Each new point's gap to the prefix exceeds the factor times the
/// whole prefix spread, and the attached certificate is re-verified rather
/// than assumed.
pub fn make_hard_sequence(
    n: usize,
    alpha: f64,
    k: usize,
) -> Result<(Dataset, SequenceCertificate)> {
    if n == 0 {
        return Err(Error::invalid("need n >= 1"));
    }
    if alpha < 1.0 {
        return Err(Error::invalid("alpha must be >= 1"));
    }
    if k < 2 {
        return Err(Error::invalid("k must be >= 2"));
    }
    let factor = 0.5 * (n as f64 * alpha).sqrt();
    if !strictly_greater(factor, 1.0) {
        return Err(Error::invalid(
            "sqrt(n*alpha)/2 must exceed 1; increase n or alpha",
        ));
    }
    let ratio = 2.0 * factor;
    let half_span = (n as f64 - 1.0) / 2.0;
    let largest = ratio.powf(half_span);
    if !largest.is_finite() || largest > MAX_HARD_COORD {
        return Err(Error::invalid(format!(
            "hard-sequence extreme {largest:e} would overflow squared distances; reduce n or alpha"
        )));
    }
    let points = (0..n)
        .map(|t| Point::scalar(ratio.powf(t as f64 - half_span)))
        .collect::<Result<Vec<_>>>()?;
    let ds = Dataset::new(points, None, None)?;
    let order: Vec<usize> = (0..n).collect();
    let cert = verify_alpha_k_sequence(ds.points(), &order, factor, k, DiamMode::Exact)?
        .accepted()
        .ok_or_else(|| Error::invalid("hard sequence failed its own certificate"))?;
    Ok((ds, cert))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderingPolicy {
    AsGenerated,
    UniformRandomPermutation,
    SortedByNorm,
    ReverseSorted,
    InterleaveComponents,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderingSpec {
    pub policy: OrderingPolicy,
    pub seed: u64,
}

/// Permute a dataset's arrival order (labels move with their points).
pub fn apply_ordering(ds: &Dataset, spec: &OrderingSpec) -> Result<Dataset> {
    let n = ds.len();
    let perm: Vec<usize> = match spec.policy {
        OrderingPolicy::AsGenerated => (0..n).collect(),
        OrderingPolicy::UniformRandomPermutation => {
            let mut perm: Vec<usize> = (0..n).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            for i in (1..n).rev() {
                let j = rng.random_range(0..=i);
                perm.swap(i, j);
            }
            perm
        }
        OrderingPolicy::SortedByNorm => {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.sort_by(|&a, &b| {
                ds.points()[a]
                    .norm()
                    .partial_cmp(&ds.points()[b].norm())
                    .unwrap()
                    .then(a.cmp(&b))
            });
            perm
        }
        OrderingPolicy::ReverseSorted => {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.sort_by(|&a, &b| {
                ds.points()[b]
                    .norm()
                    .partial_cmp(&ds.points()[a].norm())
                    .unwrap()
                    .then(a.cmp(&b))
            });
            perm
        }
        OrderingPolicy::InterleaveComponents => {
            // Round-robin over label groups; without labels this is the
            // identity (one group).
            let labels = ds.labels().map(<[usize]>::to_vec).unwrap_or(vec![0; n]);
            let max_label = labels.iter().copied().max().unwrap_or(0);
            let mut groups: Vec<Vec<usize>> = vec![Vec::new(); max_label + 1];
            for (i, &l) in labels.iter().enumerate() {
                groups[l].push(i);
            }
            let mut perm = Vec::with_capacity(n);
            let longest = groups.iter().map(Vec::len).max().unwrap_or(0);
            for round in 0..longest {
                for g in &groups {
                    if round < g.len() {
                        perm.push(g[round]);
                    }
                }
            }
            perm
        }
    };
    let points: Vec<Point> = perm.iter().map(|&i| ds.points()[i].clone()).collect();
    let labels = ds
        .labels()
        .map(|ls| perm.iter().map(|&i| ls[i]).collect::<Vec<_>>());
    Dataset::new(points, labels, ds.seed())
}
