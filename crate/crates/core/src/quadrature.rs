//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector-valued
//! integrands on a finite interval with caller-supplied breakpoints.
//!
//! All components share the same panel partition. A panel is bisected while
//! any component's accumulated error exceeds `max(abs_tol, rel_tol·|I_k|)`,
//! which lets one pass integrate a spectrum against many Fourier kernels.

// Nodes and weights keep their published digits.
#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the odd-indexed Kronrod nodes (XGK[1], XGK[3], ..., XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    /// Initial panels are split until `width · max_frequency ≤ 1`.
    pub max_frequency: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_panels: 200_000,
            max_frequency: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureResult {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub panels: usize,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: Vec<f64>,
    score: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.score == other.score
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score.total_cmp(&other.score)
    }
}

/// Applies the 15-point Kronrod rule and its embedded 7-point Gauss rule on
/// `[a, b]`, returning the Kronrod estimate and `|K − G|` per component.
fn gauss_kronrod<F>(
    f: &mut F,
    a: f64,
    b: f64,
    dim: usize,
    buf: &mut [Vec<f64>; 2],
) -> (Vec<f64>, Vec<f64>)
where
    F: FnMut(f64, &mut [f64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];

    f(center, &mut buf[0]);
    for k in 0..dim {
        kronrod[k] = WGK[7] * buf[0][k];
        gauss[k] = WG[3] * buf[0][k];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let [lo, hi] = buf;
        f(center - dx, lo);
        f(center + dx, hi);
        for k in 0..dim {
            let pair = lo[k] + hi[k];
            kronrod[k] += WGK[j] * pair;
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * pair;
            }
        }
    }
    let mut error = vec![0.0; dim];
    for k in 0..dim {
        kronrod[k] *= half;
        gauss[k] *= half;
        error[k] = (kronrod[k] - gauss[k]).abs();
    }
    (kronrod, error)
}

fn score(error: &[f64], tol: &[f64]) -> f64 {
    error
        .iter()
        .zip(tol)
        .map(|(e, t)| e / t)
        .fold(0.0, f64::max)
}

/// Integrates `f` over `[points[0], points[last]]` with the interior points
/// as forced panel boundaries. `f(x, out)` writes `dim` components.
pub fn integrate<F>(
    mut f: F,
    dim: usize,
    points: &[f64],
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult>
where
    F: FnMut(f64, &mut [f64]),
{
    if points.len() < 2 || points.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain(
            "quadrature breakpoints must be strictly increasing with at least two entries".into(),
        ));
    }
    let mut buf = [vec![0.0; dim], vec![0.0; dim]];

    let mut initial = Vec::new();
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let pieces = if cfg.max_frequency > 0.0 {
            ((b - a) * cfg.max_frequency).ceil().max(1.0) as usize
        } else {
            1
        };
        let step = (b - a) / pieces as f64;
        for i in 0..pieces {
            let lo = a + step * i as f64;
            let hi = if i + 1 == pieces { b } else { lo + step };
            initial.push((lo, hi));
        }
    }

    let mut evaluations = 0;
    let mut total = vec![0.0; dim];
    let mut total_err = vec![0.0; dim];
    let mut raw = Vec::with_capacity(initial.len());
    for (a, b) in initial {
        let (value, error) = gauss_kronrod(&mut f, a, b, dim, &mut buf);
        evaluations += 15;
        for k in 0..dim {
            total[k] += value[k];
            total_err[k] += error[k];
        }
        raw.push((a, b, value, error));
    }

    let tolerances = |total: &[f64]| -> Vec<f64> {
        total
            .iter()
            .map(|v| {
                cfg.abs_tol
                    .max(cfg.rel_tol * v.abs())
                    .max(f64::MIN_POSITIVE)
            })
            .collect()
    };
    let mut tol = tolerances(&total);
    let mut heap: BinaryHeap<Panel> = raw
        .into_iter()
        .map(|(a, b, value, error)| {
            let s = score(&error, &tol);
            Panel {
                a,
                b,
                value,
                error,
                score: s,
            }
        })
        .collect();

    loop {
        let converged = total_err.iter().zip(&tol).all(|(e, t)| e <= t);
        if converged {
            break;
        }
        if heap.len() >= cfg.max_panels {
            let (k, worst) = total_err
                .iter()
                .zip(&tol)
                .enumerate()
                .map(|(k, (e, t))| (k, e / t))
                .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            return Err(Error::Integration {
                error: total_err[k],
                target: total_err[k] / worst,
                panels: heap.len(),
            });
        }
        let Some(panel) = heap.pop() else { break };
        let mid = 0.5 * (panel.a + panel.b);
        if !(mid > panel.a && mid < panel.b) {
            // Interval exhausted at machine precision; accept what we have.
            let (k, _) =
                total_err
                    .iter()
                    .zip(&tol)
                    .enumerate()
                    .fold(
                        (0, 0.0),
                        |acc, (k, (e, t))| if e / t > acc.1 { (k, e / t) } else { acc },
                    );
            return Err(Error::Integration {
                error: total_err[k],
                target: tol[k],
                panels: heap.len() + 1,
            });
        }
        let (lv, le) = gauss_kronrod(&mut f, panel.a, mid, dim, &mut buf);
        let (rv, re) = gauss_kronrod(&mut f, mid, panel.b, dim, &mut buf);
        evaluations += 30;
        for k in 0..dim {
            total[k] += lv[k] + rv[k] - panel.value[k];
            total_err[k] += le[k] + re[k] - panel.error[k];
        }
        tol = tolerances(&total);
        heap.push(Panel {
            a: panel.a,
            b: mid,
            score: score(&le, &tol),
            value: lv,
            error: le,
        });
        heap.push(Panel {
            a: mid,
            b: panel.b,
            score: score(&re, &tol),
            value: rv,
            error: re,
        });
        // Running sums drift; resynchronize occasionally.
        if heap.len().is_multiple_of(4096) {
            total.iter_mut().for_each(|v| *v = 0.0);
            total_err.iter_mut().for_each(|v| *v = 0.0);
            for p in heap.iter() {
                for k in 0..dim {
                    total[k] += p.value[k];
                    total_err[k] += p.error[k];
                }
            }
        }
    }

    // Exact final sums in a fixed (position) order for reproducibility.
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    for p in &panels {
        for k in 0..dim {
            values[k] += p.value[k];
            errors[k] += p.error[k];
        }
    }
    Ok(QuadratureResult {
        values,
        errors,
        panels: panels.len(),
        evaluations,
    })
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F>(mut f: F, points: &[f64], cfg: &QuadratureConfig) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate(|x, out| out[0] = f(x), 1, points, cfg)?;
    Ok((r.values[0], r.errors[0]))
}
