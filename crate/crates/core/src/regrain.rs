//! Gradient-preserving clean-up of a recoloured image.
//!
//! Per channel, the output `O` minimises
//!
//! ```text
//! Σ_x λ w(x) (O(x) − T(x))²  +  Σ_(x,y) adjacent ((O(x) − O(y)) − (I(x) − I(y)))²
//! ```
//!
//! where `I` is the original image, `T` the recoloured one and
//! `w(x) = 1 / (1 + ‖∇I(x)‖)`. The quadratic is solved coarse-to-fine with
//! projected Gauss–Seidel sweeps, each of which minimises the energy exactly in
//! one pixel over [0, 1], so the energy never increases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pixels::{Grid, Pixels};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegrainParams<T> {
    /// Weight λ of the colour-fidelity term.
    pub fidelity: T,
    /// Pyramid depth. `None` halves the image while the smaller side stays at
    /// least `min_size`.
    pub levels: Option<usize>,
    pub min_size: usize,
    /// Gauss–Seidel sweeps per pyramid level.
    pub iterations: usize,
}

impl<T: Scalar> Default for RegrainParams<T> {
    fn default() -> Self {
        Self {
            fidelity: T::one(),
            levels: None,
            min_size: 32,
            iterations: 30,
        }
    }
}

impl<T: Scalar> RegrainParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.fidelity > T::zero()) || !self.fidelity.is_finite() {
            return Err(Error::InvalidParams("regrain fidelity must be positive".into()));
        }
        if self.levels == Some(0) || self.iterations == 0 || self.min_size == 0 {
            return Err(Error::InvalidParams("regrain levels, iterations and min_size must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn regrain<T: Scalar>(original: &Pixels<T>, recoloured: &Pixels<T>, params: &RegrainParams<T>) -> Result<Pixels<T>> {
    regrain_traced(original, recoloured, params).map(|(out, _)| out)
}

/// Like [`regrain`], also returning the energy at the finest level before the
/// first sweep and after each sweep.
pub fn regrain_traced<T: Scalar>(
    original: &Pixels<T>,
    recoloured: &Pixels<T>,
    params: &RegrainParams<T>,
) -> Result<(Pixels<T>, Vec<T>)> {
    original.ensure_same_dims(recoloured)?;
    params.validate()?;

    let mut originals = vec![original.clone()];
    let mut targets = vec![recoloured.clone()];
    loop {
        let last = originals.last().unwrap();
        let (w, h) = last.dims();
        let depth_ok = params.levels.is_none_or(|n| originals.len() < n);
        if !depth_ok || w.min(h) / 2 < params.min_size {
            break;
        }
        let next_i = downsample(last);
        let next_t = downsample(targets.last().unwrap());
        originals.push(next_i);
        targets.push(next_t);
    }

    let (width, height) = original.dims();
    let mut channels: Vec<Grid<T>> = Vec::with_capacity(3);
    let mut trace = vec![T::zero(); params.iterations + 1];
    for c in 0..3 {
        let mut solution: Option<(Grid<T>, Grid<T>)> = None; // (output, target) at the previous level
        for level in (0..originals.len()).rev() {
            let orig = originals[level].channel(c);
            let target = targets[level].channel(c);
            let weight = fidelity_weights(&originals[level]);
            let mut out = match solution.take() {
                None => target.clone(),
                Some((coarse_out, coarse_target)) => {
                    let offset = Grid {
                        width: coarse_out.width,
                        height: coarse_out.height,
                        data: coarse_out.data.iter().zip(&coarse_target.data).map(|(o, t)| *o - *t).collect(),
                    };
                    let up = upsample(&offset, target.width, target.height);
                    Grid {
                        width: target.width,
                        height: target.height,
                        data: target
                            .data
                            .iter()
                            .zip(&up.data)
                            .map(|(t, d)| clamp_unit(*t + *d))
                            .collect(),
                    }
                }
            };
            let finest = level == 0;
            if finest {
                trace[0] += energy(&out, &orig, &target, &weight, params.fidelity);
            }
            for sweep in 0..params.iterations {
                gauss_seidel_sweep(&mut out, &orig, &target, &weight, params.fidelity);
                if finest {
                    trace[sweep + 1] += energy(&out, &orig, &target, &weight, params.fidelity);
                }
            }
            solution = Some((out, target));
        }
        channels.push(solution.unwrap().0);
    }

    let rows = (0..width * height)
        .map(|i| [channels[0].data[i], channels[1].data[i], channels[2].data[i]])
        .collect();
    Ok((Pixels::new(width, height, rows)?, trace))
}

/// Total regrain energy of `output`, summed over channels.
pub fn regrain_energy<T: Scalar>(
    original: &Pixels<T>,
    recoloured: &Pixels<T>,
    output: &Pixels<T>,
    fidelity: T,
) -> Result<T> {
    original.ensure_same_dims(recoloured)?;
    original.ensure_same_dims(output)?;
    let weight = fidelity_weights(original);
    Ok((0..3)
        .map(|c| energy(&output.channel(c), &original.channel(c), &recoloured.channel(c), &weight, fidelity))
        .sum())
}

/// Sum over channels of the squared difference between forward-difference
/// gradient fields of `a` and `b`, square-rooted.
pub fn gradient_distance<T: Scalar>(a: &Pixels<T>, b: &Pixels<T>) -> Result<T> {
    a.ensure_same_dims(b)?;
    let (w, h) = a.dims();
    let mut acc = T::zero();
    for c in 0..3 {
        let (ga, gb) = (a.channel(c), b.channel(c));
        for y in 0..h {
            for x in 0..w {
                if x + 1 < w {
                    let d = (ga.at(x + 1, y) - ga.at(x, y)) - (gb.at(x + 1, y) - gb.at(x, y));
                    acc += d * d;
                }
                if y + 1 < h {
                    let d = (ga.at(x, y + 1) - ga.at(x, y)) - (gb.at(x, y + 1) - gb.at(x, y));
                    acc += d * d;
                }
            }
        }
    }
    Ok(acc.sqrt())
}

#[inline]
fn clamp_unit<T: Scalar>(v: T) -> T {
    v.max(T::zero()).min(T::one())
}

/// `1 / (1 + ‖∇I‖)` from central differences over all three channels.
fn fidelity_weights<T: Scalar>(img: &Pixels<T>) -> Grid<T> {
    let (w, h) = img.dims();
    let half = T::lit(0.5);
    Grid::from_fn(w, h, |x, y| {
        let at = |xx: usize, yy: usize| img.get(xx, yy);
        let (l, r) = (at(x.saturating_sub(1), y), at((x + 1).min(w - 1), y));
        let (u, d) = (at(x, y.saturating_sub(1)), at(x, (y + 1).min(h - 1)));
        let mut g2 = T::zero();
        for c in 0..3 {
            let gx = (r[c] - l[c]) * half;
            let gy = (d[c] - u[c]) * half;
            g2 += gx * gx + gy * gy;
        }
        T::one() / (T::one() + g2.sqrt())
    })
}

fn energy<T: Scalar>(out: &Grid<T>, orig: &Grid<T>, target: &Grid<T>, weight: &Grid<T>, fidelity: T) -> T {
    let (w, h) = (out.width, out.height);
    let mut e = T::zero();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let f = out.data[i] - target.data[i];
            e += fidelity * weight.data[i] * f * f;
            if x + 1 < w {
                let d = (out.data[i + 1] - out.data[i]) - (orig.data[i + 1] - orig.data[i]);
                e += d * d;
            }
            if y + 1 < h {
                let d = (out.data[i + w] - out.data[i]) - (orig.data[i + w] - orig.data[i]);
                e += d * d;
            }
        }
    }
    e
}

fn gauss_seidel_sweep<T: Scalar>(out: &mut Grid<T>, orig: &Grid<T>, target: &Grid<T>, weight: &Grid<T>, fidelity: T) {
    let (w, h) = (out.width, out.height);
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let lw = fidelity * weight.data[i];
            let mut num = lw * target.data[i];
            let mut den = lw;
            let mut neighbour = |j: usize| {
                num += out.data[j] + orig.data[i] - orig.data[j];
                den += T::one();
            };
            if x > 0 {
                neighbour(i - 1);
            }
            if x + 1 < w {
                neighbour(i + 1);
            }
            if y > 0 {
                neighbour(i - w);
            }
            if y + 1 < h {
                neighbour(i + w);
            }
            out.data[i] = clamp_unit(num / den);
        }
    }
}

/// 2× box downsample; odd trailing rows/columns average what is available.
fn downsample<T: Scalar>(img: &Pixels<T>) -> Pixels<T> {
    let (w, h) = img.dims();
    let (nw, nh) = (w.div_ceil(2), h.div_ceil(2));
    Pixels::from_fn(nw, nh, |x, y| {
        let mut acc = [T::zero(); 3];
        let mut n = 0;
        for yy in 2 * y..(2 * y + 2).min(h) {
            for xx in 2 * x..(2 * x + 2).min(w) {
                let p = img.get(xx, yy);
                for c in 0..3 {
                    acc[c] += p[c];
                }
                n += 1;
            }
        }
        let n = T::from_usize(n).unwrap();
        acc.map(|v| v / n)
    })
    .expect("non-empty")
}

/// Nearest-neighbour upsample to `width × height`.
fn upsample<T: Scalar>(g: &Grid<T>, width: usize, height: usize) -> Grid<T> {
    Grid::from_fn(width, height, |x, y| g.at((x / 2).min(g.width - 1), (y / 2).min(g.height - 1)))
}
