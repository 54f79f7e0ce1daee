//! Suppression of colour changes unrelated to the primary colour.
//!
//! The corrected image `B` is alpha-blended back towards the original `A` with a
//! per-pixel weight that grows with the a\*b\* distance from the target colour.
//! The cap `ΔE_max` of that weight is picked on a fixed grid by minimising the
//! entropy of the a\*/b\* edge-map discrepancy between the blend and `A`.

use serde::{Deserialize, Serialize};

use crate::colorspace::{image_to_lab, rgb_to_lab, Lab, Rgb};
use crate::error::{Error, Result};
use crate::pixels::{Grid, Pixels};
use crate::scalar::Scalar;

/// Candidate caps searched for `ΔE_max`: 10, 30, ..., 210.
pub const DELTA_E_GRID: [f64; 11] = [10.0, 30.0, 50.0, 70.0, 90.0, 110.0, 130.0, 150.0, 170.0, 190.0, 210.0];

/// Per-pixel blend weights in [0, 1]; 1 keeps the original pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct BlendMask<T>(Vec<T>);

impl<T: Scalar> BlendMask<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !(*v >= T::zero() && *v <= T::one())) {
            return Err(Error::InvalidParams(format!("mask value at {i} outside [0, 1]")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Binary edge map, one byte (0 or 1) per pixel.
pub type EdgeMap = Grid<u8>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeParams<T> {
    /// Edges are pixels whose Sobel magnitude exceeds this multiple of the
    /// channel's mean magnitude.
    pub threshold_factor: T,
}

impl<T: Scalar> Default for EdgeParams<T> {
    fn default() -> Self {
        Self {
            threshold_factor: T::lit(4.0),
        }
    }
}

/// Euclidean distance in the a\*b\* plane; lightness is ignored.
#[inline]
pub fn chroma_distance<T: Scalar>(x: Lab<T>, target: Lab<T>) -> T {
    (x.a - target.a).hypot(x.b - target.b)
}

/// `min(1, ΔE / ΔE_max)`.
#[inline]
pub fn normalise_distance<T: Scalar>(delta_e: T, delta_e_max: T) -> T {
    (delta_e / delta_e_max).min(T::one())
}

/// a\*b\* distance of every pixel of an RGB image to `target`. Pixels are clamped
/// to [0, 1] for the conversion only.
pub fn chroma_distances<T: Scalar>(img: &Pixels<T>, target: Lab<T>) -> Vec<T> {
    img.rows()
        .iter()
        .map(|p| {
            let lab = rgb_to_lab(Rgb::from_array(*p).clamped());
            chroma_distance(lab, target)
        })
        .collect()
}

fn mask_from_distances<T: Scalar>(distances: &[T], delta_e_max: T) -> BlendMask<T> {
    BlendMask(distances.iter().map(|&d| normalise_distance(d, delta_e_max)).collect())
}

/// Blend mask for the corrected RGB image `corrected`.
pub fn build_mask<T: Scalar>(corrected: &Pixels<T>, target: Lab<T>, delta_e_max: T) -> BlendMask<T> {
    mask_from_distances(&chroma_distances(corrected, target), delta_e_max)
}

/// `B' = (1 - diag(d)) B + diag(d) A`.
pub fn blend<T: Scalar>(original: &Pixels<T>, corrected: &Pixels<T>, mask: &BlendMask<T>) -> Result<Pixels<T>> {
    original.ensure_same_dims(corrected)?;
    if mask.len() != original.len() {
        return Err(Error::DimensionMismatch {
            left: original.dims(),
            right: (mask.len(), 1),
        });
    }
    let rows = original
        .rows()
        .iter()
        .zip(corrected.rows())
        .zip(mask.values())
        .map(|((a, b), &d)| {
            let keep = T::one() - d;
            [0, 1, 2].map(|c| keep * b[c] + d * a[c])
        })
        .collect();
    Pixels::new(original.width(), original.height(), rows)
}

/// Sobel gradient magnitude with replicate padding.
pub fn sobel_magnitude<T: Scalar>(channel: &Grid<T>) -> Grid<T> {
    let two = T::lit(2.0);
    Grid::from_fn(channel.width, channel.height, |x, y| {
        let (x, y) = (x as isize, y as isize);
        let p = |dx: isize, dy: isize| channel.at_clamped(x + dx, y + dy);
        let gx = (p(1, -1) + two * p(1, 0) + p(1, 1)) - (p(-1, -1) + two * p(-1, 0) + p(-1, 1));
        let gy = (p(-1, 1) + two * p(0, 1) + p(1, 1)) - (p(-1, -1) + two * p(0, -1) + p(1, -1));
        (gx * gx + gy * gy).sqrt()
    })
}

/// Binary Sobel edge detector without thinning.
pub fn sobel_edges<T: Scalar>(channel: &Grid<T>, params: &EdgeParams<T>) -> EdgeMap {
    let magnitude = sobel_magnitude(channel);
    let n = T::from_usize(magnitude.data.len().max(1)).unwrap();
    let mean = magnitude.data.iter().copied().sum::<T>() / n;
    let threshold = params.threshold_factor * mean;
    Grid {
        width: magnitude.width,
        height: magnitude.height,
        data: magnitude.data.iter().map(|&m| u8::from(m > threshold)).collect(),
    }
}

/// Shannon entropy (natural log) of `p` after normalising it to unit sum.
/// An all-zero vector has entropy 0.
pub fn entropy<T: Scalar>(p: &[T]) -> Result<T> {
    if let Some(index) = p.iter().position(|v| !(*v >= T::zero()) || !v.is_finite()) {
        return Err(Error::InvalidDistribution { index });
    }
    let total: T = p.iter().copied().sum();
    if total == T::zero() {
        return Ok(T::zero());
    }
    let h = p
        .iter()
        .filter(|&&v| v > T::zero())
        .map(|&v| {
            let q = v / total;
            -q * q.ln()
        })
        .sum::<T>();
    Ok(h.max(T::zero()))
}

/// Entropy of a binary map's values, which reduces to `ln(number of ones)`.
fn binary_entropy_of_difference<T: Scalar>(a: &EdgeMap, b: &EdgeMap) -> T {
    let ones = a.data.iter().zip(&b.data).filter(|(x, y)| x != y).count();
    if ones == 0 {
        T::zero()
    } else {
        T::from_usize(ones).unwrap().ln()
    }
}

/// Sum over the a\* and b\* channels of the entropy of `|edge(B') - edge(A)|`.
pub fn edge_entropy_objective<T: Scalar>(
    original_lab: &Pixels<T>,
    blended_lab: &Pixels<T>,
    params: &EdgeParams<T>,
) -> Result<T> {
    original_lab.ensure_same_dims(blended_lab)?;
    let mut total = T::zero();
    for c in 1..3 {
        let a = sobel_edges(&original_lab.channel(c), params);
        let b = sobel_edges(&blended_lab.channel(c), params);
        total += binary_entropy_of_difference::<T>(&a, &b);
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSearch<T> {
    pub delta_e_max: T,
    pub mask: BlendMask<T>,
    /// `(candidate, objective)` for every grid value, in grid order.
    pub objectives: Vec<(T, T)>,
}

/// Exhaustive search of [`DELTA_E_GRID`] for the cap minimising
/// [`edge_entropy_objective`]. Ties resolve to the smallest candidate.
///
/// `original` and `corrected` are RGB images, usually thumbnails.
pub fn search_delta_e_max<T: Scalar>(
    original: &Pixels<T>,
    corrected: &Pixels<T>,
    target: Lab<T>,
    params: &EdgeParams<T>,
) -> Result<DeltaSearch<T>> {
    original.ensure_same_dims(corrected)?;
    let original_lab = image_to_lab(original);
    let original_edges: Vec<EdgeMap> = (1..3).map(|c| sobel_edges(&original_lab.channel(c), params)).collect();
    let distances = chroma_distances(corrected, target);

    let mut best: Option<(T, T, BlendMask<T>)> = None;
    let mut objectives = Vec::with_capacity(DELTA_E_GRID.len());
    for candidate in DELTA_E_GRID.map(T::lit) {
        let mask = mask_from_distances(&distances, candidate);
        let blended_lab = image_to_lab(&blend(original, corrected, &mask)?);
        let objective = (1..3)
            .zip(&original_edges)
            .map(|(c, a)| binary_entropy_of_difference::<T>(a, &sobel_edges(&blended_lab.channel(c), params)))
            .sum::<T>();
        objectives.push((candidate, objective));
        if best.as_ref().is_none_or(|(_, o, _)| objective < *o) {
            best = Some((candidate, objective, mask));
        }
    }
    let (delta_e_max, _, mask) = best.expect("grid is non-empty");
    Ok(DeltaSearch {
        delta_e_max,
        mask,
        objectives,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorspace::lab_to_rgb;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn chroma_distance_ignores_lightness() {
        let t = Lab::new(50.0, 10.0, 10.0);
        assert_eq!(chroma_distance(t, t), 0.0);
        assert_eq!(chroma_distance(Lab::new(90.0, 13.0, 14.0), t), 5.0);
        assert_eq!(chroma_distance(Lab::new(0.0, 7.0, 14.0), t), 5.0);
    }

    #[test]
    fn normalisation_caps_at_one() {
        assert_eq!(normalise_distance(60.0, 30.0), 1.0);
        assert_eq!(normalise_distance(0.0, 30.0), 0.0);
        assert_eq!(normalise_distance(15.0, 30.0), 0.5);
        assert_eq!(normalise_distance(30.0, 30.0), 1.0);
    }

    #[test]
    fn mask_on_target_coloured_image_is_zero() {
        let rgb = Rgb::new(0.2, 0.4, 0.8);
        let target = rgb_to_lab(rgb);
        let img = Pixels::filled(5, 4, rgb.to_array()).unwrap();
        assert!(build_mask(&img, target, 30.0).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mask_on_two_region_image() {
        // Regions chosen by their Lab values, then mapped to RGB.
        let target = Lab::new(50.0f64, 0.0, 0.0);
        let near = lab_to_rgb(Lab::new(60.0, 6.0, 8.0)).rgb;
        let far = lab_to_rgb(Lab::new(60.0, -30.0, 40.0)).rgb;
        let img = Pixels::from_fn(6, 2, |x, _| if x < 3 { near.to_array() } else { far.to_array() }).unwrap();
        let mask = build_mask(&img, target, 20.0);
        for (i, &v) in mask.values().iter().enumerate() {
            let expected = if i % 6 < 3 { 10.0 / 20.0 } else { 1.0 };
            assert!((v - expected).abs() < 1e-6, "pixel {i}: {v}");
        }
    }

    #[test]
    fn blend_extremes_and_midpoint() {
        let a = Pixels::from_fn(3, 2, |x, y| [x as f64 * 0.3, y as f64 * 0.5, 0.1]).unwrap();
        let b = Pixels::from_fn(3, 2, |x, y| [0.9 - x as f64 * 0.1, 0.2, y as f64]).unwrap();
        let n = a.len();
        assert_eq!(blend(&a, &b, &BlendMask::new(vec![0.0; n]).unwrap()).unwrap(), b);
        assert_eq!(blend(&a, &b, &BlendMask::new(vec![1.0; n]).unwrap()).unwrap(), a);
        let mid = blend(&a, &b, &BlendMask::new(vec![0.5; n]).unwrap()).unwrap();
        for i in 0..n {
            for c in 0..3 {
                let m = (a.rows()[i][c] + b.rows()[i][c]) / 2.0;
                assert!((mid.rows()[i][c] - m).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn blend_rejects_mismatched_inputs() {
        let a = Pixels::filled(3, 2, [0.0; 3]).unwrap();
        let b = Pixels::filled(2, 3, [0.0; 3]).unwrap();
        assert!(blend(&a, &b, &BlendMask::new(vec![0.0; 6]).unwrap()).is_err());
        assert!(blend(&a, &a, &BlendMask::new(vec![0.0; 5]).unwrap()).is_err());
        assert!(BlendMask::new(vec![1.5]).is_err());
    }

    #[test]
    fn constant_channel_has_no_edges() {
        let g = Grid::from_fn(10, 10, |_, _| 3.5);
        assert!(sobel_edges(&g, &EdgeParams::default()).data.iter().all(|&e| e == 0));
    }

    #[test]
    fn vertical_step_marks_both_step_columns() {
        // Step between columns 5 and 6 of a 12-wide image. Hand evaluation: |gx| = 4
        // on columns 5 and 6, 0 elsewhere, so the mean is 8 / 12 and τ = 8 / 3 < 4.
        let g = Grid::from_fn(12, 7, |x, _| if x <= 5 { 0.0 } else { 1.0 });
        let mag = sobel_magnitude(&g);
        for y in 0..7 {
            for x in 0..12 {
                let expected = if x == 5 || x == 6 { 4.0 } else { 0.0 };
                assert_eq!(mag.at(x, y), expected);
            }
        }
        let edges = sobel_edges(&g, &EdgeParams::default());
        for y in 0..7 {
            for x in 0..12 {
                assert_eq!(edges.at(x, y), u8::from(x == 5 || x == 6));
            }
        }
    }

    #[test]
    fn transposed_image_gives_transposed_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = Grid::from_fn(13, 9, |_, _| rng.gen_range(0..8) as f64);
        let p = EdgeParams::default();
        assert_eq!(sobel_edges(&g.transpose(), &p), sobel_edges(&g, &p).transpose());
    }

    #[test]
    fn entropy_reference_values() {
        for n in [1usize, 2, 7, 100] {
            let h = entropy(&vec![1.0; n]).unwrap();
            assert!((h - (n as f64).ln()).abs() < 1e-12);
        }
        assert_eq!(entropy(&[0.0, 0.0, 3.0, 0.0]).unwrap(), 0.0);
        assert!((entropy(&[0.5, 0.5]).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert_eq!(entropy(&[0.0; 9]).unwrap(), 0.0);
        assert!(matches!(entropy(&[0.5, -0.1]), Err(Error::InvalidDistribution { index: 1 })));
    }

    #[test]
    fn objective_of_identical_images_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let img = Pixels::from_fn(16, 16, |_, _| [rng.gen::<f64>(), rng.gen(), rng.gen()]).unwrap();
        let lab = image_to_lab(&img);
        assert_eq!(edge_entropy_objective(&lab, &lab, &EdgeParams::default()).unwrap(), 0.0);
    }

    /// Edge-map differences are built by hand by planting isolated pixels in a
    /// flat a* channel of `B'`.
    #[test]
    fn objective_counts_spurious_edges() {
        let flat = Pixels::filled(16, 16, [50.0, 0.0, 0.0]).unwrap();
        let params = EdgeParams::default();
        let mut one = flat.clone();
        one.rows_mut()[8 * 16 + 8][1] = 40.0;
        // A lone spike produces a 3×3 block of above-threshold responses except the centre.
        let spike_edges = sobel_edges(&one.channel(1), &params).data.iter().filter(|&&e| e == 1).count();
        let h = edge_entropy_objective(&flat, &one, &params).unwrap();
        assert!((h - (spike_edges as f64).ln()).abs() < 1e-12);

        // Two far-apart identical spikes double the number of differing pixels.
        let mut two = one.clone();
        two.rows_mut()[3 * 16 + 3][1] = 40.0;
        let h2 = edge_entropy_objective(&flat, &two, &params).unwrap();
        assert!((h2 - h - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn hand_built_edge_differences() {
        let base = Grid::from_fn(8, 8, |_, _| 0u8);
        let mut one = base.clone();
        one.data[10] = 1;
        assert_eq!(binary_entropy_of_difference::<f64>(&base, &base), 0.0);
        assert_eq!(binary_entropy_of_difference::<f64>(&base, &one), 0.0);
        let mut two = one.clone();
        two.data[40] = 1;
        assert!((binary_entropy_of_difference::<f64>(&base, &two) - 2f64.ln()).abs() < 1e-15);
        // Same value through the generic entropy of the flattened |difference|.
        let diff: Vec<f64> = base.data.iter().zip(&two.data).map(|(a, b)| (*a as f64 - *b as f64).abs()).collect();
        assert!((entropy(&diff).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    fn brute_force_objective(a_lab: &Pixels<f64>, b_lab: &Pixels<f64>) -> f64 {
        let mut total = 0.0;
        for c in 1..3 {
            let ea = sobel_edges(&a_lab.channel(c), &EdgeParams::default());
            let eb = sobel_edges(&b_lab.channel(c), &EdgeParams::default());
            let diff: Vec<f64> = ea.data.iter().zip(&eb.data).map(|(x, y)| (*x as f64 - *y as f64).abs()).collect();
            let s: f64 = diff.iter().sum();
            if s > 0.0 {
                total -= diff.iter().filter(|&&v| v > 0.0).map(|v| (v / s) * (v / s).ln()).sum::<f64>();
            }
        }
        total
    }

    #[test]
    fn objective_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let a = Pixels::from_fn(20, 14, |_, _| [rng.gen::<f64>(), rng.gen(), rng.gen()]).unwrap();
            let b = Pixels::from_fn(20, 14, |_, _| [rng.gen::<f64>(), rng.gen(), rng.gen()]).unwrap();
            let (al, bl) = (image_to_lab(&a), image_to_lab(&b));
            let got = edge_entropy_objective(&al, &bl, &EdgeParams::default()).unwrap();
            assert!((got - brute_force_objective(&al, &bl)).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_edit_selects_smallest_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = Pixels::from_fn(32, 32, |_, _| [rng.gen::<f64>(), rng.gen(), rng.gen()]).unwrap();
        let s = search_delta_e_max(&a, &a, Lab::new(50.0, 40.0, 30.0), &EdgeParams::default()).unwrap();
        assert_eq!(s.delta_e_max, 10.0);
        assert!(s.objectives.iter().all(|&(_, o)| o == 0.0));
        assert_eq!(s.objectives.len(), 11);
    }

    #[test]
    fn search_is_reproducible_from_its_result() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = Pixels::from_fn(32, 32, |x, y| {
            if (x / 8 + y / 8) % 2 == 0 {
                [0.9, 0.5, 0.1]
            } else {
                [rng.gen_range(0.0..1.0), 0.8, 0.8]
            }
        })
        .unwrap();
        let b = a.map(|p| [p[2], p[1], p[0]]);
        let target = rgb_to_lab(Rgb::new(0.1, 0.5, 0.9));
        let s = search_delta_e_max(&a, &b, target, &EdgeParams::default()).unwrap();
        assert!(DELTA_E_GRID.contains(&s.delta_e_max));
        assert_eq!(build_mask(&b, target, s.delta_e_max), s.mask);
        let min = s.objectives.iter().map(|o| o.1).fold(f64::INFINITY, f64::min);
        let first = s.objectives.iter().find(|o| o.1 == min).unwrap().0;
        assert_eq!(first, s.delta_e_max);
    }

    proptest! {
        #[test]
        fn entropy_is_permutation_and_scale_invariant(
            p in prop::collection::vec(0.0f64..10.0, 1..40),
            scale in 0.01f64..100.0,
            rot in 0usize..40,
        ) {
            let h = entropy(&p).unwrap();
            let mut q: Vec<f64> = p.iter().map(|v| v * scale).collect();
            let k = rot % q.len();
            q.rotate_left(k);
            prop_assert!((entropy(&q).unwrap() - h).abs() < 1e-9);
        }

        #[test]
        fn normalised_distance_non_increasing_in_cap(de in 0.001f64..300.0, lo in 1.0f64..200.0, extra in 0.0f64..100.0) {
            prop_assert!(normalise_distance(de, lo + extra) <= normalise_distance(de, lo));
        }

        #[test]
        fn blend_stays_between_inputs(
            a in prop::collection::vec(prop::array::uniform3(-0.5f64..1.5), 6),
            b in prop::collection::vec(prop::array::uniform3(-0.5f64..1.5), 6),
            d in prop::collection::vec(0.0f64..=1.0, 6),
        ) {
            let pa = Pixels::new(3, 2, a).unwrap();
            let pb = Pixels::new(3, 2, b).unwrap();
            let out = blend(&pa, &pb, &BlendMask::new(d.clone()).unwrap()).unwrap();
            for i in 0..6 {
                for c in 0..3 {
                    let (x, y) = (pa.rows()[i][c], pb.rows()[i][c]);
                    let v = out.rows()[i][c];
                    prop_assert!(v >= x.min(y) - 1e-12 && v <= x.max(y) + 1e-12);
                }
            }
        }

        #[test]
        fn far_pixels_are_restored_exactly(
            a in prop::collection::vec(prop::array::uniform3(0.0f64..1.0), 12),
            b in prop::collection::vec(prop::array::uniform3(0.0f64..1.0), 12),
            cap_index in 0usize..11,
        ) {
            let pa = Pixels::new(4, 3, a).unwrap();
            let pb = Pixels::new(4, 3, b).unwrap();
            let target = Lab::new(50.0, 20.0, -20.0);
            let cap = DELTA_E_GRID[cap_index];
            let mask = build_mask(&pb, target, cap);
            let out = blend(&pa, &pb, &mask).unwrap();
            prop_assert!(mask.values().iter().all(|v| (0.0..=1.0).contains(v)));
            for (i, dist) in chroma_distances(&pb, target).into_iter().enumerate() {
                if dist >= cap {
                    prop_assert_eq!(out.rows()[i], pa.rows()[i]);
                }
            }
        }
    }
}
