//! End-to-end primary-colour edit: parameters are estimated on a small
//! thumbnail and then applied to the full-resolution image.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::blending::{blend, build_mask, search_delta_e_max, EdgeParams};
use crate::clustering::{adaptive_meanshift_traced, build_target_palette, ClusteringParams, Palette};
use crate::colorspace::{image_to_lab, lab_to_rgb, rgb_to_lab, Lab, Rgb};
use crate::correction::{apply_matrix, estimate_matrix, CorrectionModel, DEFAULT_REGULARISATION};
use crate::error::{Error, Result};
use crate::pixels::Pixels;
use crate::regrain::{regrain, RegrainParams};
use crate::scalar::Scalar;

/// Area-averaging (box filter) resample to `size × size`, ignoring aspect ratio.
pub fn make_thumbnail<T: Scalar>(img: &Pixels<T>, size: usize) -> Result<Pixels<T>> {
    if size == 0 {
        return Err(Error::InvalidParams("thumbnail size must be positive".into()));
    }
    let (w, h) = img.dims();
    if w == size && h == size {
        return Ok(img.clone());
    }
    let xw = box_weights::<T>(w, size);
    let yw = box_weights::<T>(h, size);

    let mut horizontal = vec![[T::zero(); 3]; size * h];
    for y in 0..h {
        for (ox, taps) in xw.iter().enumerate() {
            let mut acc = [T::zero(); 3];
            for &(x, wt) in taps {
                let p = img.get(x, y);
                for c in 0..3 {
                    acc[c] += wt * p[c];
                }
            }
            horizontal[y * size + ox] = acc;
        }
    }
    let mut out = Vec::with_capacity(size * size);
    for taps in &yw {
        for ox in 0..size {
            let mut acc = [T::zero(); 3];
            for &(y, wt) in taps {
                let p = horizontal[y * size + ox];
                for c in 0..3 {
                    acc[c] += wt * p[c];
                }
            }
            out.push(acc);
        }
    }
    Pixels::new(size, size, out)
}

/// For each of `dst` output cells, the source indices it overlaps and the
/// overlap as a fraction of the cell. Positions are scaled by `src * dst` so all
/// interval ends are integers.
fn box_weights<T: Scalar>(src: usize, dst: usize) -> Vec<Vec<(usize, T)>> {
    (0..dst)
        .map(|i| {
            let (lo, hi) = (i * src, (i + 1) * src);
            let first = lo / dst;
            let last = (hi - 1) / dst;
            (first..=last)
                .filter_map(|j| {
                    let overlap = hi.min((j + 1) * dst).saturating_sub(lo.max(j * dst));
                    (overlap > 0).then(|| (j, T::from_usize(overlap).unwrap() / T::from_usize(src).unwrap()))
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EditRequest<T> {
    pub target: Rgb<T>,
    pub enable_regrain: bool,
    pub max_clusters: usize,
    pub thumbnail_size: usize,
    pub chroma_floor: T,
    /// Ridge term `k` of the matrix fit.
    pub regularisation: T,
    pub edges: EdgeParams<T>,
    pub regrain: RegrainParams<T>,
}

impl<T: Scalar> EditRequest<T> {
    pub fn new(target: Rgb<T>) -> Self {
        Self {
            target,
            enable_regrain: false,
            max_clusters: 5,
            thumbnail_size: 32,
            chroma_floor: T::lit(10.0),
            regularisation: T::lit(DEFAULT_REGULARISATION),
            edges: EdgeParams::default(),
            regrain: RegrainParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.thumbnail_size < 8 {
            return Err(Error::InvalidParams("thumbnail size must be at least 8".into()));
        }
        if self.max_clusters == 0 {
            return Err(Error::InvalidParams("max_clusters must be at least 1".into()));
        }
        if !self.target.to_array().iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParams("target colour must be finite".into()));
        }
        if self.enable_regrain {
            self.regrain.validate()?;
        }
        Ok(())
    }

    fn clustering(&self) -> ClusteringParams<T> {
        ClusteringParams {
            max_clusters: self.max_clusters,
            chroma_floor: self.chroma_floor,
            ..ClusteringParams::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore<T> {
    pub delta_e_max: T,
    pub objective: T,
}

/// Wall-clock time per stage, in milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub thumbnail_ms: f64,
    pub clustering_ms: f64,
    pub fit_ms: f64,
    pub search_ms: f64,
    pub apply_ms: f64,
    pub regrain_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GamutFlags {
    /// Some palette centre (source or target) fell outside sRGB and was clipped.
    pub palette_clamped: bool,
    /// Output pixels with at least one channel clipped to [0, 1].
    pub clamped_pixels: usize,
}

/// Audit trail of one edit. Re-applying `model` (and `regrain` when present)
/// with [`apply_model`] reproduces the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditReport<T> {
    pub width: usize,
    pub height: usize,
    pub target_hex: String,
    pub target_rgb: Rgb<T>,
    pub palette: Palette<T>,
    pub palette_rgb: Vec<Rgb<T>>,
    pub target_palette: Palette<T>,
    pub target_palette_rgb: Vec<Rgb<T>>,
    pub primary_index: usize,
    pub bandwidth: T,
    pub model: CorrectionModel<T>,
    pub objectives: Vec<CandidateScore<T>>,
    pub regrain: Option<RegrainParams<T>>,
    pub timings: StageTimings,
    pub gamut: GamutFlags,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Applies a fitted model at any resolution: `B = AM`, blend towards `A` with the
/// mask rebuilt from `B`, then clamp to [0, 1]. Returns the image and the number
/// of pixels that needed clamping.
pub fn apply_correction<T: Scalar>(img: &Pixels<T>, model: &CorrectionModel<T>) -> Result<(Pixels<T>, usize)> {
    let corrected = apply_matrix(img, &model.matrix);
    let mask = build_mask(&corrected, model.target, model.delta_e_max);
    let blended = blend(img, &corrected, &mask)?;
    let clamped = blended
        .rows()
        .iter()
        .filter(|p| p.iter().any(|&v| !(v >= T::zero() && v <= T::one())))
        .count();
    Ok((blended.clamp_unit(), clamped))
}

/// [`apply_correction`] followed by the optional regrain step.
pub fn apply_model<T: Scalar>(
    img: &Pixels<T>,
    model: &CorrectionModel<T>,
    regrain_params: Option<&RegrainParams<T>>,
) -> Result<Pixels<T>> {
    let (out, _) = apply_correction(img, model)?;
    match regrain_params {
        Some(p) => regrain(img, &out, p),
        None => Ok(out),
    }
}

pub fn edit_primary_colour<T: Scalar>(img: &Pixels<T>, req: &EditRequest<T>) -> Result<(Pixels<T>, EditReport<T>)> {
    req.validate()?;
    let start = Instant::now();
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let thumb = make_thumbnail(img, req.thumbnail_size)?;
    timings.thumbnail_ms = ms(t);

    let t = Instant::now();
    let clustering = adaptive_meanshift_traced(&image_to_lab(&thumb), &req.clustering())?;
    let palette = clustering.palette;
    let target_lab: Lab<T> = rgb_to_lab(req.target.clamped());
    let target_palette = build_target_palette(&palette, target_lab);
    timings.clustering_ms = ms(t);

    let t = Instant::now();
    let source = palette.centres.iter().map(|&c| lab_to_rgb(c)).collect::<Vec<_>>();
    let dest = target_palette.centres.iter().map(|&c| lab_to_rgb(c)).collect::<Vec<_>>();
    let palette_clamped = source.iter().chain(&dest).any(|m| m.clamped);
    let palette_rgb: Vec<Rgb<T>> = source.iter().map(|m| m.rgb).collect();
    let target_palette_rgb: Vec<Rgb<T>> = dest.iter().map(|m| m.rgb).collect();
    let matrix = estimate_matrix(
        &palette_rgb.iter().map(|c| c.to_array()).collect::<Vec<_>>(),
        &target_palette_rgb.iter().map(|c| c.to_array()).collect::<Vec<_>>(),
        &palette.weights,
        req.regularisation,
    )?;
    timings.fit_ms = ms(t);

    let t = Instant::now();
    let search = search_delta_e_max(&thumb, &apply_matrix(&thumb, &matrix), target_lab, &req.edges)?;
    timings.search_ms = ms(t);

    let model = CorrectionModel {
        matrix,
        delta_e_max: search.delta_e_max,
        target: target_lab,
        regularisation: req.regularisation,
    };

    let t = Instant::now();
    let (mut output, clamped_pixels) = apply_correction(img, &model)?;
    timings.apply_ms = ms(t);

    if req.enable_regrain {
        let t = Instant::now();
        output = regrain(img, &output, &req.regrain)?;
        timings.regrain_ms = ms(t);
    }
    timings.total_ms = ms(start);
    log::debug!("edit timings: {timings:?}");

    let report = EditReport {
        width: img.width(),
        height: img.height(),
        target_hex: req.target.to_hex(),
        target_rgb: req.target,
        primary_index: palette.primary_index,
        palette,
        palette_rgb,
        target_palette,
        target_palette_rgb,
        bandwidth: clustering.bandwidth,
        model,
        objectives: search
            .objectives
            .iter()
            .map(|&(delta_e_max, objective)| CandidateScore { delta_e_max, objective })
            .collect(),
        regrain: req.enable_regrain.then_some(req.regrain),
        timings,
        gamut: GamutFlags {
            palette_clamped,
            clamped_pixels,
        },
    };
    Ok((output, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blending::{chroma_distance, DELTA_E_GRID};

    #[test]
    fn thumbnail_of_thumbnail_size_is_identity() {
        let img = Pixels::from_fn(32, 32, |x, y| [x as f64 / 31.0, y as f64 / 31.0, 0.5]).unwrap();
        assert_eq!(make_thumbnail(&img, 32).unwrap(), img);
    }

    #[test]
    fn thumbnail_of_constant_is_constant() {
        let img = Pixels::filled(64, 64, [0.25, 0.5, 0.75]).unwrap();
        let t = make_thumbnail(&img, 32).unwrap();
        assert_eq!(t.dims(), (32, 32));
        assert!(t.rows().iter().all(|p| *p == [0.25, 0.5, 0.75]));
    }

    #[test]
    fn thumbnail_conserves_the_mean() {
        let img = Pixels::<f64>::from_fn(64, 64, |x, _| if x < 32 { [0.0; 3] } else { [1.0; 3] }).unwrap();
        let t = make_thumbnail(&img, 32).unwrap();
        for c in 0..3 {
            assert!((t.mean()[c] - img.mean()[c]).abs() < 1e-6);
        }
        // Non-integer ratios, including upsampling.
        for (w, h) in [(100, 37), (13, 9), (45, 200)] {
            let img = Pixels::from_fn(w, h, |x, y| [((x * 7 + y * 3) % 11) as f64 / 10.0, 0.3, (y % 2) as f64]).unwrap();
            let t = make_thumbnail(&img, 32).unwrap();
            for c in 0..3 {
                assert!((t.mean()[c] - img.mean()[c]).abs() < 1e-6, "{w}x{h}");
            }
        }
    }

    #[test]
    fn request_validation() {
        let mut req = EditRequest::new(Rgb::new(0.1, 0.2, 0.3));
        assert!(req.validate().is_ok());
        req.thumbnail_size = 7;
        assert!(req.validate().is_err());
        req.thumbnail_size = 32;
        req.max_clusters = 0;
        assert!(req.validate().is_err());
    }

    #[test]
    fn solid_image_takes_the_target_colour() {
        let orange = Rgb::new(0.95, 0.55, 0.1);
        let blue = Rgb::new(0.1, 0.3, 0.85);
        let img = Pixels::filled(40, 30, orange.to_array()).unwrap();
        let mut req = EditRequest::new(blue);
        req.max_clusters = 1;
        let (out, report) = edit_primary_colour(&img, &req).unwrap();
        assert_eq!(report.palette.len(), 1);
        let target = rgb_to_lab(blue);
        for p in out.rows() {
            let lab = rgb_to_lab(Rgb::from_array(*p));
            assert!(chroma_distance(lab, target) <= 2.0);
        }
        assert!(DELTA_E_GRID.contains(&report.model.delta_e_max));
    }

    #[test]
    fn report_model_reproduces_output() {
        let img = Pixels::from_fn(50, 40, |x, y| {
            if (x as isize - 25).pow(2) + (y as isize - 20).pow(2) < 150 {
                [0.95, 0.5, 0.1]
            } else if y > 34 {
                [0.2, 0.6, 0.3]
            } else {
                [0.96, 0.96, 0.95]
            }
        })
        .unwrap();
        let mut req = EditRequest::new(Rgb::new(0.2, 0.3, 0.9));
        let (out, report) = edit_primary_colour(&img, &req).unwrap();
        assert_eq!(apply_model(&img, &report.model, report.regrain.as_ref()).unwrap(), out);

        req.enable_regrain = true;
        let (out, report) = edit_primary_colour(&img, &req).unwrap();
        assert!(report.regrain.is_some());
        assert_eq!(apply_model(&img, &report.model, report.regrain.as_ref()).unwrap(), out);
    }
}
