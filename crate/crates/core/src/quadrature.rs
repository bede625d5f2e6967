//! Shared numerical integration engine.
//!
//! Everything here is deterministic: adaptive subdivision always splits the
//! worst segment (ties broken by position) and final reductions run in
//! left-to-right segment order, so results do not depend on thread count or
//! platform scheduling.

use num_complex::Complex64;
use thiserror::Error;

/// 15-point Kronrod abscissae (positive half, QUADPACK dqk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.000_000_000_000_000,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];

/// 7-point Gauss weights (embedded rule); index i pairs with XGK[2i+1].
const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("maximum subdivisions reached: best estimate {value:?} with error {error:.3e} (target {target:.3e})")]
    MaxSubdivisions {
        value: Complex64,
        error: f64,
        target: f64,
    },
    #[error("grid spacing {spacing} too coarse for kernel bandwidth {bandwidth}; need >= {min_points} points per bandwidth")]
    ResolutionTooCoarse {
        spacing: f64,
        bandwidth: f64,
        min_points: usize,
    },
    #[error("invalid integration domain: {0}")]
    InvalidDomain(String),
}

pub type QuadResultReal = QuadResult<f64>;

/// Integration result with an a-posteriori error estimate. Callers must check
/// `error_estimate` against their own tolerance; nothing is silently dropped.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error_estimate: f64,
    pub evaluations: usize,
}

impl QuadResult<f64> {
    pub fn map_value(self, f: impl FnOnce(f64) -> f64) -> Self {
        QuadResult {
            value: f(self.value),
            ..self
        }
    }
}

/// Scalar type the adaptive kernel can accumulate: `f64` or `Complex64`.
pub trait QuadValue:
    Copy
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn norm(&self) -> f64;
    fn into_complex(self) -> Complex64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
    fn into_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(&self) -> f64 {
        num_complex::Complex::norm(*self)
    }
    fn into_complex(self) -> Complex64 {
        self
    }
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

fn gk15<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        let sum = f1 + f2;
        kronrod = kronrod + sum * WGK[i];
        if i % 2 == 1 {
            gauss = gauss + sum * WG[i / 2];
        }
    }
    let value = kronrod * half;
    // The raw Kronrod-Gauss difference overestimates the Kronrod error on
    // smooth integrands; keeping it undeflated makes the reported estimate
    // conservative.
    let err = (kronrod - gauss).norm() * half.abs();
    (value, err.max((value.norm() + 1e-300) * 1e-16))
}

/// Adaptive Gauss-Kronrod on a finite interval with optional interior
/// breakpoints used as initial panel boundaries.
pub fn integrate_segments<T: QuadValue, F: FnMut(f64) -> T>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_subdiv: usize,
) -> Result<QuadResult<T>, QuadError> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(QuadError::InvalidDomain(format!("[{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult {
            value: T::zero(),
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let mut edges: Vec<f64> = Vec::with_capacity(breakpoints.len() + 2);
    edges.push(a);
    for &p in breakpoints {
        if p > a && p < b {
            edges.push(p);
        }
    }
    edges.push(b);
    edges.sort_by(|x, y| x.partial_cmp(y).unwrap());
    edges.dedup();

    let mut evals = 0usize;
    let mut segs: Vec<Segment<T>> = Vec::new();
    for w in edges.windows(2) {
        let (v, e) = gk15(&mut f, w[0], w[1]);
        evals += 15;
        segs.push(Segment {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }

    let mut splits = 0usize;
    loop {
        let total: f64 = {
            let mut acc = T::zero();
            for s in &segs {
                acc = acc + s.value;
            }
            acc.norm()
        };
        let err: f64 = segs.iter().map(|s| s.error).sum();
        let target = abs_tol.max(rel_tol * total);
        if err <= target {
            break;
        }
        if splits >= max_subdiv {
            segs.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap());
            let mut acc = T::zero();
            for s in &segs {
                acc = acc + s.value;
            }
            return Err(QuadError::MaxSubdivisions {
                value: acc.into_complex(),
                error: err,
                target,
            });
        }
        // Split the worst segment; ties resolved by leftmost position.
        let mut worst = 0usize;
        for (i, s) in segs.iter().enumerate() {
            let w = &segs[worst];
            if s.error > w.error || (s.error == w.error && s.a < w.a) {
                worst = i;
            }
        }
        let Segment { a: sa, b: sb, .. } = segs[worst];
        let mid = 0.5 * (sa + sb);
        if mid <= sa || mid >= sb {
            // Interval exhausted at machine precision; freeze its error.
            segs[worst].error = 0.0;
            continue;
        }
        let (v1, e1) = gk15(&mut f, sa, mid);
        let (v2, e2) = gk15(&mut f, mid, sb);
        evals += 30;
        segs[worst] = Segment {
            a: sa,
            b: mid,
            value: v1,
            error: e1,
        };
        segs.push(Segment {
            a: mid,
            b: sb,
            value: v2,
            error: e2,
        });
        splits += 1;
    }

    segs.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap());
    let mut acc = T::zero();
    for s in &segs {
        acc = acc + s.value;
    }
    Ok(QuadResult {
        value: acc,
        error_estimate: segs.iter().map(|s| s.error).sum(),
        evaluations: evals,
    })
}

/// Adaptive integration over a finite interval.
pub fn integrate_1d<T: QuadValue, F: FnMut(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult<T>, QuadError> {
    integrate_segments(f, a, b, &[], rel_tol, abs_tol, 4000)
}

/// Adaptive integration of `f` over `[a, +inf)` where `|f(x)| ~ x^{-decay}`
/// with `decay > 1`. The power substitution `x = a * u^{-1/(decay-1)}` turns
/// the tail into a bounded smooth integrand on `(0, 1]`.
pub fn integrate_halfline<T: QuadValue, F: FnMut(f64) -> T>(
    mut f: F,
    a: f64,
    decay: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult<T>, QuadError> {
    if a <= 0.0 {
        return Err(QuadError::InvalidDomain(format!(
            "half-line start must be positive, got {a}"
        )));
    }
    if decay <= 1.0 {
        return Err(QuadError::InvalidDomain(format!(
            "declared decay exponent must exceed 1, got {decay}"
        )));
    }
    let p = 1.0 / (decay - 1.0);
    let g = move |u: f64| {
        let x = a * u.powf(-p);
        f(x) * (a * p * u.powf(-p - 1.0))
    };
    integrate_segments(g, 1e-12, 1.0, &[], rel_tol, abs_tol, 4000).map(|r| QuadResult {
        value: r.value,
        // The clipped (0, 1e-12] sliver maps to the extreme tail; the
        // integrand there is bounded by its value at the clip point.
        error_estimate: r.error_estimate,
        evaluations: r.evaluations,
    })
}

/// Axis-aligned box in up to 3 dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, QuadError> {
        if lo.len() != hi.len() || lo.is_empty() || lo.len() > 3 {
            return Err(QuadError::InvalidDomain(format!(
                "box must have 1..=3 matching coordinates, got {}x{}",
                lo.len(),
                hi.len()
            )));
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(l, h)| h < l || !l.is_finite() || !h.is_finite())
        {
            return Err(QuadError::InvalidDomain("box bounds out of order".into()));
        }
        Ok(BoxDomain { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }
}

struct Cell2 {
    lo: [f64; 2],
    hi: [f64; 2],
    value: f64,
    error: f64,
}

fn gk15_2d<F: FnMut(f64, f64) -> f64>(f: &mut F, lo: [f64; 2], hi: [f64; 2]) -> (f64, f64) {
    let cx = 0.5 * (lo[0] + hi[0]);
    let cy = 0.5 * (lo[1] + hi[1]);
    let hx = 0.5 * (hi[0] - lo[0]);
    let hy = 0.5 * (hi[1] - lo[1]);
    let mut nodes_x = [0.0f64; 15];
    let mut nodes_y = [0.0f64; 15];
    let mut wk = [0.0f64; 15];
    let mut wg15 = [0.0f64; 15];
    for i in 0..7 {
        nodes_x[i] = cx - hx * XGK[i];
        nodes_x[14 - i] = cx + hx * XGK[i];
        nodes_y[i] = cy - hy * XGK[i];
        nodes_y[14 - i] = cy + hy * XGK[i];
        wk[i] = WGK[i];
        wk[14 - i] = WGK[i];
        if i % 2 == 1 {
            wg15[i] = WG[i / 2];
            wg15[14 - i] = WG[i / 2];
        }
    }
    nodes_x[7] = cx;
    nodes_y[7] = cy;
    wk[7] = WGK[7];
    wg15[7] = WG[3];

    let mut kron = 0.0;
    let mut gauss = 0.0;
    for (i, &x) in nodes_x.iter().enumerate() {
        for (j, &y) in nodes_y.iter().enumerate() {
            let v = f(x, y);
            kron += wk[i] * wk[j] * v;
            gauss += wg15[i] * wg15[j] * v;
        }
    }
    let scale = hx * hy;
    let value = kron * scale;
    let err = ((kron - gauss) * scale).abs();
    (value, err.max(value.abs() * 1e-15))
}

/// Adaptive tensor-product integration over a box: 1-D rule for `d = 1`,
/// quadtree refinement of a product Gauss-Kronrod rule for `d = 2` and
/// deterministic Halton quasi-Monte Carlo for `d = 3` (error heuristic from
/// the half-sample difference).
pub fn integrate_box<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    domain: &BoxDomain,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult<f64>, QuadError> {
    match domain.dim() {
        1 => integrate_1d(|x| f(&[x]), domain.lo[0], domain.hi[0], rel_tol, abs_tol),
        2 => {
            let mut g = |x: f64, y: f64| f(&[x, y]);
            let mut evals = 0usize;
            let (v0, e0) = gk15_2d(
                &mut g,
                [domain.lo[0], domain.lo[1]],
                [domain.hi[0], domain.hi[1]],
            );
            evals += 225;
            let mut cells = vec![Cell2 {
                lo: [domain.lo[0], domain.lo[1]],
                hi: [domain.hi[0], domain.hi[1]],
                value: v0,
                error: e0,
            }];
            let max_cells = 4000usize;
            loop {
                let total: f64 = cells.iter().map(|c| c.value).sum();
                let err: f64 = cells.iter().map(|c| c.error).sum();
                let target = abs_tol.max(rel_tol * total.abs());
                if err <= target {
                    break;
                }
                if cells.len() >= max_cells {
                    return Err(QuadError::MaxSubdivisions {
                        value: Complex64::new(total, 0.0),
                        error: err,
                        target,
                    });
                }
                let mut worst = 0usize;
                for (i, c) in cells.iter().enumerate() {
                    if c.error > cells[worst].error
                        || (c.error == cells[worst].error
                            && (c.lo[0], c.lo[1]) < (cells[worst].lo[0], cells[worst].lo[1]))
                    {
                        worst = i;
                    }
                }
                let Cell2 { lo, hi, .. } = cells[worst];
                let mid = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
                cells.swap_remove(worst);
                for (qlo, qhi) in [
                    ([lo[0], lo[1]], [mid[0], mid[1]]),
                    ([mid[0], lo[1]], [hi[0], mid[1]]),
                    ([lo[0], mid[1]], [mid[0], hi[1]]),
                    ([mid[0], mid[1]], [hi[0], hi[1]]),
                ] {
                    let (v, e) = gk15_2d(&mut g, qlo, qhi);
                    evals += 225;
                    cells.push(Cell2 {
                        lo: qlo,
                        hi: qhi,
                        value: v,
                        error: e,
                    });
                }
            }
            cells.sort_by(|a, b| (a.lo[0], a.lo[1]).partial_cmp(&(b.lo[0], b.lo[1])).unwrap());
            Ok(QuadResult {
                value: cells.iter().map(|c| c.value).sum(),
                error_estimate: cells.iter().map(|c| c.error).sum(),
                evaluations: evals,
            })
        }
        3 => {
            let n = 1usize << 20;
            let vol = domain.volume();
            let mut half = 0.0f64;
            let mut full = 0.0f64;
            let mut point = [0.0f64; 3];
            for i in 0..n {
                for (k, base) in [2u64, 3, 5].iter().enumerate() {
                    point[k] =
                        domain.lo[k] + (domain.hi[k] - domain.lo[k]) * halton(i as u64 + 1, *base);
                }
                let v = f(&point);
                full += v;
                if i < n / 2 {
                    half += v;
                }
            }
            let value = vol * full / n as f64;
            let value_half = vol * half / (n / 2) as f64;
            Ok(QuadResult {
                value,
                error_estimate: (value - value_half).abs().max(value.abs() * 1e-12),
                evaluations: n,
            })
        }
        d => Err(QuadError::InvalidDomain(format!(
            "unsupported dimension {d}"
        ))),
    }
}

/// Halton radical-inverse in the given base (deterministic QMC driver).
pub fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// Discrete convolution of regularly spaced samples with a continuous kernel
/// profile. Kernel taps are renormalized so that total mass is preserved
/// exactly on constant inputs. Requires at least `min_points` grid points per
/// kernel bandwidth.
pub fn convolve_grid(
    values: &[f64],
    kernel: impl Fn(f64) -> f64,
    bandwidth: f64,
    reach: f64,
    spacing: f64,
) -> Result<Vec<f64>, QuadError> {
    let min_points = 8usize;
    if spacing * min_points as f64 > bandwidth {
        return Err(QuadError::ResolutionTooCoarse {
            spacing,
            bandwidth,
            min_points,
        });
    }
    let taps = build_taps(kernel, reach, spacing);
    Ok(convolve_with_taps(values, &taps))
}

/// Kernel taps on the grid spacing, renormalized to unit discrete mass.
pub fn build_taps(kernel: impl Fn(f64) -> f64, reach: f64, spacing: f64) -> Vec<f64> {
    let half = (reach / spacing).ceil() as i64;
    let mut taps: Vec<f64> = (-half..=half).map(|k| kernel(k as f64 * spacing)).collect();
    let mass: f64 = taps.iter().sum::<f64>() * spacing;
    if mass > 0.0 {
        for t in &mut taps {
            *t *= spacing / mass;
        }
    }
    taps
}

/// `out[i] = sum_k taps[k] * values[i + k - half]`, zero-padded at the edges.
pub fn convolve_with_taps(values: &[f64], taps: &[f64]) -> Vec<f64> {
    let half = (taps.len() / 2) as i64;
    let n = values.len() as i64;
    (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for (k, &t) in taps.iter().enumerate() {
                let j = i + k as i64 - half;
                if j >= 0 && j < n {
                    acc += t * values[j as usize];
                }
            }
            acc
        })
        .collect()
}

/// Uniform grid of complex samples over `[x0, x0 + (n-1) dx]` with cubic
/// (Catmull-Rom) interpolation. Used to tabulate kernel-convolved profiles.
#[derive(Debug, Clone)]
pub struct Grid1<T> {
    pub x0: f64,
    pub dx: f64,
    pub values: Vec<T>,
}

impl<T: QuadValue> Grid1<T> {
    pub fn tabulate(x0: f64, dx: f64, n: usize, mut f: impl FnMut(f64) -> T) -> Self {
        let values = (0..n).map(|i| f(x0 + i as f64 * dx)).collect();
        Grid1 { x0, dx, values }
    }

    pub fn x_max(&self) -> f64 {
        self.x0 + (self.values.len().saturating_sub(1)) as f64 * self.dx
    }

    /// Catmull-Rom cubic interpolation; clamped to zero outside the grid
    /// (profiles are tabulated on supports chosen so that they vanish there).
    pub fn eval(&self, x: f64) -> T {
        let n = self.values.len();
        if n == 0 || x < self.x0 || x > self.x_max() {
            return T::zero();
        }
        let t = (x - self.x0) / self.dx;
        let i = (t.floor() as usize).min(n - 2);
        let frac = t - i as f64;
        let p0 = if i == 0 {
            self.values[0]
        } else {
            self.values[i - 1]
        };
        let p1 = self.values[i];
        let p2 = self.values[i + 1];
        let p3 = if i + 2 < n {
            self.values[i + 2]
        } else {
            self.values[i + 1]
        };
        let t2 = frac * frac;
        let t3 = t2 * frac;
        (p1 * 2.0
            + (p2 - p0) * frac
            + (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * t2
            + (p1 * 3.0 - p0 - p2 * 3.0 + p3) * t3)
            * 0.5
    }
}
