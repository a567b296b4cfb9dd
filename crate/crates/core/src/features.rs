//! Per-particle neighborhood statistics used as the learned model's input.
//!
//! For fluid neighbors the vector holds the count, the mean relative
//! position and velocity, the population variance of relative distances and
//! speeds, and skewness/kurtosis of their binned distributions. Proxy
//! neighbors contribute the same position statistics only (the wall does not
//! move). The particle's current acceleration leads the vector.
//!
//! Neighbor records are sorted by relative position before any summation,
//! so every component is bitwise independent of the enumeration order.

use std::cmp::Ordering;

use crate::grid::NeighborLists;
use crate::state::FluidState;
use crate::{Error, Result, Vec3};

pub const FEATURE_LEN: usize = 23;

/// Component layout.
pub mod index {
    pub const ACCEL: usize = 0;
    pub const FLUID_COUNT: usize = 3;
    pub const FLUID_DIS_MEAN: usize = 4;
    pub const FLUID_RV_MEAN: usize = 7;
    pub const FLUID_DIS_VAR: usize = 10;
    pub const FLUID_RV_VAR: usize = 11;
    pub const FLUID_DIS_SKEW: usize = 12;
    pub const FLUID_RV_SKEW: usize = 13;
    pub const FLUID_DIS_KURT: usize = 14;
    pub const FLUID_RV_KURT: usize = 15;
    pub const PROXY_COUNT: usize = 16;
    pub const PROXY_DIS_MEAN: usize = 17;
    pub const PROXY_DIS_VAR: usize = 20;
    pub const PROXY_DIS_SKEW: usize = 21;
    pub const PROXY_DIS_KURT: usize = 22;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureVector(pub [f64; FEATURE_LEN]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        FEATURE_LEN
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_f32(&self) -> [f32; FEATURE_LEN] {
        self.0.map(|v| v as f32)
    }

    pub fn from_f32(v: &[f32; FEATURE_LEN]) -> Self {
        FeatureVector(v.map(|x| x as f64))
    }
}

/// Equal-width binning of a range into `bins` partitions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinningSpec {
    bins: usize,
    distance_range: f64,
    speed_cap: f64,
}

impl BinningSpec {
    pub fn new(bins: usize, distance_range: f64, speed_cap: f64) -> Result<Self> {
        if bins < 2 {
            return Err(Error::invalid(format!("binning needs at least 2 bins, got {bins}")));
        }
        if !(distance_range > 0.0 && distance_range.is_finite()) {
            return Err(Error::invalid("distance range must be positive"));
        }
        if !(speed_cap > 0.0 && speed_cap.is_finite()) {
            return Err(Error::invalid(format!("speed cap must be positive, got {speed_cap}")));
        }
        Ok(Self {
            bins,
            distance_range,
            speed_cap,
        })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn distance_range(&self) -> f64 {
        self.distance_range
    }

    pub fn speed_cap(&self) -> f64 {
        self.speed_cap
    }
}

/// Component-wise means of relative positions and (optionally) velocities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CentralTendency {
    pub displacement: Vec3,
    pub velocity: Option<Vec3>,
}

pub fn central_tendency(displacements: &[Vec3], velocities: Option<&[Vec3]>) -> CentralTendency {
    let n = displacements.len();
    if n == 0 {
        return CentralTendency {
            displacement: Vec3::zeros(),
            velocity: velocities.map(|_| Vec3::zeros()),
        };
    }
    let mean = |xs: &[Vec3]| xs.iter().fold(Vec3::zeros(), |acc, x| acc + x) / xs.len() as f64;
    CentralTendency {
        displacement: mean(displacements),
        velocity: velocities.map(mean),
    }
}

/// Population variance. Zero for fewer than two values.
pub fn dispersion(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Bin counts over `[0, range]`; values beyond the range land in the last
/// bin.
pub fn bin_counts(values: &[f64], range: f64, bins: usize) -> Vec<usize> {
    let width = range / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in values {
        let b = ((v / width).floor().max(0.0) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
}

/// Skewness and kurtosis of a binned distribution, moments taken about the
/// frequency-weighted mean of the bin representatives `l_i = i * range / n`
/// (i = 1..n). A distribution occupying a single bin yields `(0, 0)`.
pub fn moments_from_counts(counts: &[usize], range: f64) -> (f64, f64) {
    let n_bins = counts.len();
    let total: usize = counts.iter().sum();
    if total == 0 || counts.iter().filter(|&&c| c > 0).count() < 2 {
        return (0.0, 0.0);
    }
    let n = total as f64;
    let level = |b: usize| (b + 1) as f64 * range / n_bins as f64;
    let mean = counts
        .iter()
        .enumerate()
        .map(|(b, &c)| level(b) * c as f64)
        .sum::<f64>()
        / n;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for (b, &c) in counts.iter().enumerate() {
        let d = level(b) - mean;
        let f = c as f64;
        m2 += d * d * f;
        m3 += d * d * d * f;
        m4 += d * d * d * d * f;
    }
    let sigma = (m2 / n).sqrt();
    (m3 / (sigma.powi(3) * n), m4 / (sigma.powi(4) * n))
}

/// Skewness and kurtosis of `values` binned into `bins` partitions of
/// `[0, range]`.
pub fn shape_coefficients(values: &[f64], range: f64, bins: usize) -> (f64, f64) {
    moments_from_counts(&bin_counts(values, range, bins), range)
}

#[derive(Clone, Copy)]
struct Record {
    dis: Vec3,
    rv: Vec3,
}

fn canonical(a: &Record, b: &Record) -> Ordering {
    let key = |r: &Record| [r.dis.x, r.dis.y, r.dis.z, r.rv.x, r.rv.y, r.rv.z];
    let (ka, kb) = (key(a), key(b));
    for (x, y) in ka.iter().zip(kb.iter()) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// Reusable buffers for [`FeatureExtractor`].
#[derive(Default)]
pub struct FeatureScratch {
    records: Vec<Record>,
    dis: Vec<Vec3>,
    rv: Vec<Vec3>,
    lengths: Vec<f64>,
    speeds: Vec<f64>,
}

/// Builds feature vectors for one frame.
#[derive(Clone, Copy, Debug)]
pub struct FeatureExtractor<'a> {
    pub state: &'a FluidState,
    pub proxy_positions: &'a [Vec3],
    pub spec: BinningSpec,
}

impl FeatureExtractor<'_> {
    /// Feature vector of fluid particle `i` given its neighbor lists.
    pub fn extract(&self, i: usize, fluid: &[u32], proxy: &[u32], scratch: &mut FeatureScratch) -> FeatureVector {
        let mut out = [0.0; FEATURE_LEN];
        let a = self.state.acceleration[i];
        out[index::ACCEL..index::ACCEL + 3].copy_from_slice(a.as_slice());

        let xi = self.state.position[i];
        let vi = self.state.velocity[i];
        let range = self.spec.distance_range;
        let bins = self.spec.bins;

        scratch.records.clear();
        scratch.records.extend(fluid.iter().map(|&j| Record {
            dis: self.state.position[j as usize] - xi,
            rv: self.state.velocity[j as usize] - vi,
        }));
        scratch.records.sort_unstable_by(canonical);
        scratch.dis.clear();
        scratch.rv.clear();
        scratch.lengths.clear();
        scratch.speeds.clear();
        for r in &scratch.records {
            scratch.dis.push(r.dis);
            scratch.rv.push(r.rv);
            scratch.lengths.push(r.dis.norm());
            scratch.speeds.push(r.rv.norm());
        }
        let ct = central_tendency(&scratch.dis, Some(&scratch.rv));
        let (skew_d, kurt_d) = shape_coefficients(&scratch.lengths, range, bins);
        let (skew_v, kurt_v) = shape_coefficients(&scratch.speeds, self.spec.speed_cap, bins);
        out[index::FLUID_COUNT] = fluid.len() as f64;
        out[index::FLUID_DIS_MEAN..index::FLUID_DIS_MEAN + 3].copy_from_slice(ct.displacement.as_slice());
        out[index::FLUID_RV_MEAN..index::FLUID_RV_MEAN + 3].copy_from_slice(ct.velocity.unwrap_or_default().as_slice());
        out[index::FLUID_DIS_VAR] = dispersion(&scratch.lengths);
        out[index::FLUID_RV_VAR] = dispersion(&scratch.speeds);
        out[index::FLUID_DIS_SKEW] = skew_d;
        out[index::FLUID_RV_SKEW] = skew_v;
        out[index::FLUID_DIS_KURT] = kurt_d;
        out[index::FLUID_RV_KURT] = kurt_v;

        scratch.records.clear();
        scratch.records.extend(proxy.iter().map(|&k| Record {
            dis: self.proxy_positions[k as usize] - xi,
            rv: Vec3::zeros(),
        }));
        scratch.records.sort_unstable_by(canonical);
        scratch.dis.clear();
        scratch.lengths.clear();
        for r in &scratch.records {
            scratch.dis.push(r.dis);
            scratch.lengths.push(r.dis.norm());
        }
        let ct = central_tendency(&scratch.dis, None);
        let (skew_p, kurt_p) = shape_coefficients(&scratch.lengths, range, bins);
        out[index::PROXY_COUNT] = proxy.len() as f64;
        out[index::PROXY_DIS_MEAN..index::PROXY_DIS_MEAN + 3].copy_from_slice(ct.displacement.as_slice());
        out[index::PROXY_DIS_VAR] = dispersion(&scratch.lengths);
        out[index::PROXY_DIS_SKEW] = skew_p;
        out[index::PROXY_DIS_KURT] = kurt_p;
        FeatureVector(out)
    }

    /// Feature vectors of every particle.
    pub fn extract_all(&self, lists: &NeighborLists) -> Vec<FeatureVector> {
        let mut scratch = FeatureScratch::default();
        (0..self.state.len())
            .map(|i| self.extract(i, lists.fluid(i), lists.proxy(i), &mut scratch))
            .collect()
    }
}

/// Feature vector of particle `i` (single-particle convenience).
pub fn extract_feature_vector(
    i: usize,
    state: &FluidState,
    proxy_positions: &[Vec3],
    fluid: &[u32],
    proxy: &[u32],
    spec: &BinningSpec,
) -> FeatureVector {
    let ex = FeatureExtractor {
        state,
        proxy_positions,
        spec: *spec,
    };
    ex.extract(i, fluid, proxy, &mut FeatureScratch::default())
}
