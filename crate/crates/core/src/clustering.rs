//! Palette extraction: flat-kernel MeanShift with an adaptively growing bandwidth,
//! plus primary-cluster selection and target-palette construction.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::colorspace::Lab;
use crate::error::{Error, Result};
use crate::pixels::Pixels;
use crate::scalar::Scalar;

/// A converged mode and the number of points assigned to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster<T> {
    pub centre: Lab<T>,
    pub size: usize,
}

/// Predominant colours of an image with normalised weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Palette<T> {
    pub centres: Vec<Lab<T>>,
    pub weights: Vec<T>,
    pub primary_index: usize,
}

impl<T: Scalar> Palette<T> {
    pub fn len(&self) -> usize {
        self.centres.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centres.is_empty()
    }

    pub fn primary(&self) -> Lab<T> {
        self.centres[self.primary_index]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteringParams<T> {
    pub initial_bandwidth: T,
    pub growth: T,
    pub max_clusters: usize,
    pub max_iterations: usize,
    /// Minimum a\*b\* chroma for a cluster to be eligible as the primary colour.
    pub chroma_floor: T,
}

impl<T: Scalar> Default for ClusteringParams<T> {
    fn default() -> Self {
        Self {
            initial_bandwidth: T::lit(0.1),
            growth: T::lit(1.5),
            max_clusters: 5,
            max_iterations: 50,
            chroma_floor: T::lit(10.0),
        }
    }
}

impl<T: Scalar> ClusteringParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_bandwidth > T::zero()) || !self.initial_bandwidth.is_finite() {
            return Err(Error::InvalidParams("initial bandwidth must be positive".into()));
        }
        if !(self.growth > T::one()) || !self.growth.is_finite() {
            return Err(Error::InvalidParams("bandwidth growth must exceed 1".into()));
        }
        if self.max_clusters == 0 {
            return Err(Error::InvalidParams("max_clusters must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParams("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

const MODE_SEEK_ITERATIONS: usize = 300;

#[inline]
fn dist2<T: Scalar>(p: &[T; 3], q: &[T; 3]) -> T {
    let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
}

fn lex_cmp<T: Scalar>(p: &[T; 3], q: &[T; 3]) -> Ordering {
    for c in 0..3 {
        match p[c].partial_cmp(&q[c]).unwrap_or(Ordering::Equal) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Shifts `start` to the mean of all points within `bandwidth` until it stops
/// moving. Returns the mode and the number of points in its final window.
fn seek_mode<T: Scalar>(points: &[[T; 3]], start: [T; 3], bandwidth: T) -> Option<([T; 3], usize)> {
    let radius2 = bandwidth * bandwidth;
    let tol2 = (bandwidth * T::lit(1e-9)).powi(2);
    let mut x = start;
    let mut count = 0;
    for _ in 0..MODE_SEEK_ITERATIONS {
        let mut sum = [T::zero(); 3];
        count = 0;
        for p in points {
            if dist2(p, &x) <= radius2 {
                sum[0] += p[0];
                sum[1] += p[1];
                sum[2] += p[2];
                count += 1;
            }
        }
        if count == 0 {
            return None;
        }
        let n = T::from_usize(count).unwrap();
        let next = sum.map(|s| s / n);
        let moved = dist2(&next, &x);
        x = next;
        if moved <= tol2 {
            break;
        }
    }
    Some((x, count))
}

/// Flat-kernel MeanShift in raw L\*a\*b\* units.
///
/// Seeds are the occupied cells of a grid with spacing `bandwidth`, each of which
/// lies within `bandwidth` of at least one point. Converged modes closer than
/// `bandwidth / 2` to a better-supported mode are merged, every point is then
/// assigned to its nearest mode, and the clusters are returned largest first with
/// ties ordered lexicographically by centre.
pub fn meanshift<T: Scalar>(points: &[Lab<T>], bandwidth: T) -> Result<Vec<Cluster<T>>> {
    if points.is_empty() {
        return Err(Error::NoPixels);
    }
    if !(bandwidth > T::zero()) || !bandwidth.is_finite() {
        return Err(Error::InvalidParams("bandwidth must be positive".into()));
    }

    // Canonical order makes every floating point sum independent of input order.
    let mut pts: Vec<[T; 3]> = points.iter().map(|p| p.to_array()).collect();
    pts.sort_by(lex_cmp);

    let seeds: BTreeSet<[i64; 3]> = pts
        .iter()
        .map(|p| p.map(|v| (v / bandwidth).round().to_i64().unwrap_or(0)))
        .collect();

    let mut modes: Vec<([T; 3], usize)> = seeds
        .into_iter()
        .filter_map(|cell| {
            let start = cell.map(|k| T::from_i64(k).unwrap() * bandwidth);
            seek_mode(&pts, start, bandwidth)
        })
        .collect();
    modes.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| lex_cmp(&a.0, &b.0)));

    let merge2 = (bandwidth / T::lit(2.0)).powi(2);
    let mut centres: Vec<[T; 3]> = Vec::new();
    for (mode, _) in modes {
        if centres.iter().all(|c| dist2(c, &mode) >= merge2) {
            centres.push(mode);
        }
    }

    let mut sizes = vec![0usize; centres.len()];
    for p in &pts {
        let mut best = 0;
        let mut best_d = dist2(p, &centres[0]);
        for (i, c) in centres.iter().enumerate().skip(1) {
            let d = dist2(p, c);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        sizes[best] += 1;
    }

    let mut clusters: Vec<Cluster<T>> = centres
        .into_iter()
        .zip(sizes)
        .filter(|&(_, size)| size > 0)
        .map(|(c, size)| Cluster {
            centre: Lab::from_array(c),
            size,
        })
        .collect();
    clusters.sort_by(|a, b| {
        b.size
            .cmp(&a.size)
            .then_with(|| lex_cmp(&a.centre.to_array(), &b.centre.to_array()))
    });
    Ok(clusters)
}

/// Result of the adaptive bandwidth search.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveOutcome<T> {
    pub palette: Palette<T>,
    /// Bandwidth of the accepted MeanShift run.
    pub bandwidth: T,
    /// Number of MeanShift runs performed.
    pub iterations: usize,
}

/// Grows the bandwidth geometrically until MeanShift yields at most
/// `max_clusters` modes, and returns that palette with normalised weights.
pub fn adaptive_meanshift<T: Scalar>(img_lab: &Pixels<T>, params: &ClusteringParams<T>) -> Result<Palette<T>> {
    adaptive_meanshift_traced(img_lab, params).map(|o| o.palette)
}

pub fn adaptive_meanshift_traced<T: Scalar>(
    img_lab: &Pixels<T>,
    params: &ClusteringParams<T>,
) -> Result<AdaptiveOutcome<T>> {
    params.validate()?;
    let points: Vec<Lab<T>> = img_lab.rows().iter().map(|&p| Lab::from_array(p)).collect();
    let mut bandwidth = params.initial_bandwidth;
    for iteration in 1..=params.max_iterations {
        let clusters = meanshift(&points, bandwidth)?;
        if clusters.len() <= params.max_clusters {
            log::debug!(
                "meanshift settled on {} clusters at bandwidth {} after {} runs",
                clusters.len(),
                bandwidth,
                iteration
            );
            let total = T::from_usize(points.len()).unwrap();
            let centres: Vec<Lab<T>> = clusters.iter().map(|c| c.centre).collect();
            let weights: Vec<T> = clusters
                .iter()
                .map(|c| T::from_usize(c.size).unwrap() / total)
                .collect();
            let primary_index = select_primary(&centres, &weights, params.chroma_floor);
            return Ok(AdaptiveOutcome {
                palette: Palette {
                    centres,
                    weights,
                    primary_index,
                },
                bandwidth,
                iterations: iteration,
            });
        }
        bandwidth *= params.growth;
    }
    Err(Error::NotConverged {
        iterations: params.max_iterations,
    })
}

/// Largest-weight cluster among those with chroma at least `chroma_floor`; when
/// none qualifies, the largest-weight cluster overall. Ties go to the lower index.
pub fn select_primary<T: Scalar>(centres: &[Lab<T>], weights: &[T], chroma_floor: T) -> usize {
    let pick = |eligible: &dyn Fn(usize) -> bool| {
        let mut best: Option<usize> = None;
        for i in (0..centres.len().min(weights.len())).filter(|&i| eligible(i)) {
            if best.is_none_or(|b| weights[i] > weights[b]) {
                best = Some(i);
            }
        }
        best
    };
    pick(&|i| centres[i].chroma() >= chroma_floor)
        .or_else(|| pick(&|_| true))
        .unwrap_or(0)
}

/// Copy of `palette` with the primary centre replaced by `target`.
pub fn build_target_palette<T: Scalar>(palette: &Palette<T>, target: Lab<T>) -> Palette<T> {
    let mut out = palette.clone();
    out.centres[palette.primary_index] = target;
    out
}
