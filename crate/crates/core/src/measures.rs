//! Finite signed test measures with exact closed-form ball masses.
//!
//! Only piecewise-constant densities are representable: intervals in d=1,
//! axis-aligned boxes and disks in d=2, and signed weighted sums of those.
//! Exactness of `ball_mass` keeps the whole Monte Carlo error budget
//! attributable to sampling and quadrature. Point masses are not a supported
//! form: their alpha-power ball-mass profile is exactly `v_d r^d`, which
//! breaks the `r^p ^ r^q` envelope (`q > beta`) every admissibility argument
//! rests on, so nothing here can represent them.

use crate::quadrature::{integrate_box, integrate_segments, BoxDomain, QuadError, QuadResult};
use crate::sign;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("unsupported measure: {0}")]
    Unsupported(String),
    #[error("invalid measure: {0}")]
    Invalid(String),
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] QuadError),
}

/// One weighted component of a test measure.
#[derive(Debug, Clone, PartialEq)]
pub enum Component {
    /// `[a, b]` on the line.
    Interval { a: f64, b: f64 },
    /// Axis-aligned rectangle in the plane.
    Rect { lo: [f64; 2], hi: [f64; 2] },
    /// Disk in the plane.
    Disk { center: [f64; 2], radius: f64 },
}

impl Component {
    fn dimension(&self) -> usize {
        match self {
            Component::Interval { .. } => 1,
            Component::Rect { .. } | Component::Disk { .. } => 2,
        }
    }

    fn volume(&self) -> f64 {
        match self {
            Component::Interval { a, b } => b - a,
            Component::Rect { lo, hi } => (hi[0] - lo[0]) * (hi[1] - lo[1]),
            Component::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
        }
    }

    fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            Component::Interval { a, b } => ([*a, 0.0], [*b, 0.0]),
            Component::Rect { lo, hi } => (*lo, *hi),
            Component::Disk { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
        }
    }

    /// Lebesgue measure of the component intersected with `B(x, r)`, exact.
    fn ball_overlap(&self, x: &[f64], r: f64) -> f64 {
        match self {
            Component::Interval { a, b } => interval_overlap(x[0] - r, x[0] + r, *a, *b),
            Component::Rect { lo, hi } => circle_rect_area(x[0], x[1], r, lo, hi),
            Component::Disk { center, radius } => {
                let d = ((x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2)).sqrt();
                lens_area(*radius, r, d)
            }
        }
    }

    fn contains(&self, x: &[f64]) -> bool {
        match self {
            Component::Interval { a, b } => x[0] >= *a && x[0] <= *b,
            Component::Rect { lo, hi } => {
                x[0] >= lo[0] && x[0] <= hi[0] && x[1] >= lo[1] && x[1] <= hi[1]
            }
            Component::Disk { center, radius } => {
                (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2) <= radius * radius
            }
        }
    }
}

fn interval_overlap(lo1: f64, hi1: f64, lo2: f64, hi2: f64) -> f64 {
    (hi1.min(hi2) - lo1.max(lo2)).max(0.0)
}

/// Intersection area of the disk `B((cx, cy), r)` with the rectangle
/// `[lo, hi]`, via closed-form integration of the clipped chord length.
fn circle_rect_area(cx: f64, cy: f64, r: f64, lo: &[f64; 2], hi: &[f64; 2]) -> f64 {
    // Work in disk-centered coordinates.
    let x1 = lo[0] - cx;
    let x2 = hi[0] - cx;
    let y1 = lo[1] - cy;
    let y2 = hi[1] - cy;
    let u_lo = x1.max(-r);
    let u_hi = x2.min(r);
    if u_hi <= u_lo {
        return 0.0;
    }
    // Chord half-length g(u) = sqrt(r^2 - u^2); the clipped strip length
    // changes regime where g crosses |y1| or |y2|.
    let mut cuts = vec![u_lo, u_hi];
    for y in [y1.abs(), y2.abs()] {
        if y < r {
            let u = (r * r - y * y).sqrt();
            for c in [-u, u] {
                if c > u_lo && c < u_hi {
                    cuts.push(c);
                }
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    // Antiderivative of g: H(u) = (u g(u) + r^2 asin(u/r)) / 2.
    let h = |u: f64| {
        let c = (u / r).clamp(-1.0, 1.0);
        0.5 * (u * (r * r - u * u).max(0.0).sqrt() + r * r * c.asin())
    };
    let mut area = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let g_mid = (r * r - mid * mid).max(0.0).sqrt();
        let top_is_g = y2 > g_mid;
        let bot_is_g = y1 < -g_mid;
        let top_c = if top_is_g { 0.0 } else { y2 };
        let bot_c = if bot_is_g { 0.0 } else { y1 };
        let len_mid = (if top_is_g { g_mid } else { y2 }) - (if bot_is_g { -g_mid } else { y1 });
        if len_mid <= 0.0 {
            continue;
        }
        let const_part = top_c - bot_c;
        let g_coeff = (if top_is_g { 1.0 } else { 0.0 }) + (if bot_is_g { 1.0 } else { 0.0 });
        area += const_part * (b - a) + g_coeff * (h(b) - h(a));
    }
    area.max(0.0)
}

/// Intersection area of two disks with radii `r1`, `r2`, centers `d` apart.
fn lens_area(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    let rmin = r1.min(r2);
    if d <= (r1 - r2).abs() {
        return std::f64::consts::PI * rmin * rmin;
    }
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0);
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0);
    let k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    r1 * r1 * a1.acos() + r2 * r2 * a2.acos() - 0.5 * k.max(0.0).sqrt()
}

/// A finite signed measure with piecewise-constant density, closed-form ball
/// masses and a bounded support box. Immutable and shareable.
#[derive(Debug, Clone, PartialEq)]
pub struct TestMeasure {
    dimension: usize,
    components: Vec<(f64, Component)>,
    support_lo: [f64; 2],
    support_hi: [f64; 2],
    total_mass: f64,
    total_variation: f64,
    sup_density: f64,
}

impl TestMeasure {
    /// Indicator of `[a, b]` on the line.
    pub fn interval(a: f64, b: f64) -> Result<Self, MeasureError> {
        Self::weighted(vec![(1.0, Component::Interval { a, b })])
    }

    /// Indicator of a planar disk.
    pub fn disk(center: [f64; 2], radius: f64) -> Result<Self, MeasureError> {
        Self::weighted(vec![(1.0, Component::Disk { center, radius })])
    }

    /// Indicator of a planar axis-aligned rectangle.
    pub fn rect(lo: [f64; 2], hi: [f64; 2]) -> Result<Self, MeasureError> {
        Self::weighted(vec![(1.0, Component::Rect { lo, hi })])
    }

    /// Signed weighted sum of components (all of one dimension; planar
    /// components must have pairwise disjoint supports so that the total
    /// variation stays a closed form).
    pub fn weighted(components: Vec<(f64, Component)>) -> Result<Self, MeasureError> {
        if components.is_empty() {
            return Err(MeasureError::Invalid(
                "measure needs at least one component".into(),
            ));
        }
        let dimension = components[0].1.dimension();
        for (w, c) in &components {
            if c.dimension() != dimension {
                return Err(MeasureError::Invalid("mixed component dimensions".into()));
            }
            if !w.is_finite() {
                return Err(MeasureError::Invalid("non-finite weight".into()));
            }
            match c {
                Component::Interval { a, b } if b < a => {
                    return Err(MeasureError::Invalid(format!(
                        "interval [{a}, {b}] out of order"
                    )));
                }
                Component::Rect { lo, hi } if hi[0] < lo[0] || hi[1] < lo[1] => {
                    return Err(MeasureError::Invalid(
                        "rectangle bounds out of order".into(),
                    ));
                }
                Component::Disk { radius, .. } if *radius <= 0.0 => {
                    return Err(MeasureError::Invalid("disk radius must be positive".into()));
                }
                _ => {}
            }
        }
        if dimension == 2 {
            for i in 0..components.len() {
                for j in (i + 1)..components.len() {
                    if planar_overlap(&components[i].1, &components[j].1) {
                        return Err(MeasureError::Unsupported(
                            "planar components must have disjoint supports".into(),
                        ));
                    }
                }
            }
        }
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for (_, c) in &components {
            let (clo, chi) = c.bounds();
            for k in 0..2 {
                lo[k] = lo[k].min(clo[k]);
                hi[k] = hi[k].max(chi[k]);
            }
        }
        if dimension == 1 {
            lo[1] = 0.0;
            hi[1] = 0.0;
        }
        let total_mass = components.iter().map(|(w, c)| w * c.volume()).sum();
        let (total_variation, sup_density) = if dimension == 1 {
            line_variation(&components)
        } else {
            (
                components.iter().map(|(w, c)| w.abs() * c.volume()).sum(),
                components
                    .iter()
                    .map(|(w, _)| w.abs())
                    .fold(0.0f64, f64::max),
            )
        };
        Ok(TestMeasure {
            dimension,
            components,
            support_lo: lo,
            support_hi: hi,
            total_mass,
            total_variation,
            sup_density,
        })
    }

    /// Scale every weight by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let comps = self
            .components
            .iter()
            .map(|(w, comp)| (c * w, comp.clone()))
            .collect();
        TestMeasure::weighted(comps).expect("scaling preserves validity")
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Signed total mass `mu(R^d)`.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Total variation norm.
    pub fn total_variation(&self) -> f64 {
        self.total_variation
    }

    /// Essential sup of the density modulus.
    pub fn sup_density(&self) -> f64 {
        self.sup_density
    }

    /// Bounding box of the support, as (lo, hi) per coordinate.
    pub fn support_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dimension;
        (self.support_lo[..d].to_vec(), self.support_hi[..d].to_vec())
    }

    /// Euclidean distance from `x` to the support box.
    pub fn dist_to_support_box(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.dimension {
            let d = (self.support_lo[k] - x[k])
                .max(x[k] - self.support_hi[k])
                .max(0.0);
            acc += d * d;
        }
        acc.sqrt()
    }

    /// `mu(B(x, r))`, exact and linear in the weights.
    pub fn ball_mass(&self, x: &[f64], r: f64) -> f64 {
        debug_assert_eq!(x.len(), self.dimension);
        self.components
            .iter()
            .map(|(w, c)| w * c.ball_overlap(x, r))
            .sum()
    }

    /// Density value at `x` (piecewise constant).
    pub fn density(&self, x: &[f64]) -> f64 {
        self.components
            .iter()
            .filter(|(_, c)| c.contains(x))
            .map(|(w, _)| w)
            .sum()
    }

    /// Distinct density values with the Lebesgue measure of each level set,
    /// excluding zero. Exact for the supported piecewise-constant forms.
    pub fn density_levels(&self) -> Vec<(f64, f64)> {
        if self.dimension == 1 {
            let pieces = line_pieces(&self.components);
            let mut out: Vec<(f64, f64)> = Vec::new();
            for (value, len) in pieces {
                if value != 0.0 && len > 0.0 {
                    push_level(&mut out, value, len);
                }
            }
            out
        } else {
            let mut out = Vec::new();
            for (w, c) in &self.components {
                if *w != 0.0 {
                    push_level(&mut out, *w, c.volume());
                }
            }
            out
        }
    }

    /// Elementary constant pieces `(density value, a, b)` of a 1-d measure,
    /// skipping zero stretches.
    pub fn line_elementary_pieces(&self) -> Vec<(f64, f64, f64)> {
        assert_eq!(self.dimension, 1);
        let pts = self.line_breakpoints();
        let mut out = Vec::new();
        for w in pts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let v = self.density(&[mid]);
            if v != 0.0 {
                out.push((v, w[0], w[1]));
            }
        }
        out
    }

    /// Breakpoints of the line density (1-d measures only).
    pub fn line_breakpoints(&self) -> Vec<f64> {
        assert_eq!(self.dimension, 1);
        let mut pts: Vec<f64> = self
            .components
            .iter()
            .flat_map(|(_, c)| match c {
                Component::Interval { a, b } => vec![*a, *b],
                _ => unreachable!(),
            })
            .collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        pts
    }

    /// `int |mu(B(x, r))|^alpha dx` over the inflated support, by adaptive
    /// quadrature with panel hints at the geometric breakpoints.
    pub fn alpha_norm_profile(&self, alpha: f64, r: f64) -> Result<QuadResult<f64>, MeasureError> {
        self.alpha_profile_pair(alpha, r).map(|(a, _)| a)
    }

    /// `(int |mu(B)|^alpha dx, int |mu(B)|^alpha eps(mu(B)) dx)` at radius r.
    pub fn alpha_profile_pair(
        &self,
        alpha: f64,
        r: f64,
    ) -> Result<(QuadResult<f64>, QuadResult<f64>), MeasureError> {
        if r <= 0.0 {
            let zero = QuadResult {
                value: 0.0,
                error_estimate: 0.0,
                evaluations: 0,
            };
            return Ok((zero, zero));
        }
        match self.dimension {
            1 => {
                let lo = self.support_lo[0] - r;
                let hi = self.support_hi[0] + r;
                let mut breaks: Vec<f64> = Vec::new();
                for p in self.line_breakpoints() {
                    breaks.push(p - r);
                    breaks.push(p + r);
                    breaks.push(p);
                }
                let abs = integrate_segments(
                    |x| self.ball_mass(&[x], r).abs().powf(alpha),
                    lo,
                    hi,
                    &breaks,
                    1e-9,
                    1e-12,
                    8000,
                )?;
                let signed = integrate_segments(
                    |x| {
                        let m = self.ball_mass(&[x], r);
                        sign(m) * m.abs().powf(alpha)
                    },
                    lo,
                    hi,
                    &breaks,
                    1e-9,
                    1e-12,
                    8000,
                )?;
                Ok((abs, signed))
            }
            2 => {
                let dom = BoxDomain::new(
                    vec![self.support_lo[0] - r, self.support_lo[1] - r],
                    vec![self.support_hi[0] + r, self.support_hi[1] + r],
                )?;
                let abs =
                    integrate_box(|p| self.ball_mass(p, r).abs().powf(alpha), &dom, 1e-6, 1e-9)?;
                let signed = integrate_box(
                    |p| {
                        let m = self.ball_mass(p, r);
                        sign(m) * m.abs().powf(alpha)
                    },
                    &dom,
                    1e-6,
                    1e-9,
                )?;
                Ok((abs, signed))
            }
            d => Err(MeasureError::Unsupported(format!(
                "alpha-norm profile for dimension {d}"
            ))),
        }
    }

    /// `int int |mu(B(x, r))|^alpha r^{-beta-1} dx dr` over `r in (0, inf)`.
    /// Finite exactly when `d < beta < alpha d` for density measures.
    pub fn mab_integral(&self, alpha: f64, beta: f64) -> Result<QuadResult<f64>, MeasureError> {
        let d = self.dimension as f64;
        if !(beta > d && beta < alpha * d) {
            return Err(MeasureError::Invalid(format!(
                "beta={beta} outside ({d}, {})",
                alpha * d
            )));
        }
        let (a, _) = self.alpha_r_integrals(alpha, beta)?;
        Ok(a)
    }

    /// The pair `(A0, B0)` with
    /// `A0 = int int |mu(B)|^alpha r^{-beta-1} dx dr` and
    /// `B0` its eps-signed counterpart (no tail constant applied).
    pub fn alpha_r_integrals(
        &self,
        alpha: f64,
        beta: f64,
    ) -> Result<(QuadResult<f64>, QuadResult<f64>), MeasureError> {
        let d = self.dimension as f64;
        if !(beta > d && beta < alpha * d) {
            return Err(MeasureError::Invalid(format!(
                "beta={beta} outside ({d}, {})",
                alpha * d
            )));
        }
        if self.total_variation == 0.0 {
            let zero = QuadResult {
                value: 0.0,
                error_estimate: 0.0,
                evaluations: 0,
            };
            return Ok((zero, zero));
        }
        match self.dimension {
            1 => self.alpha_r_integrals_1d(alpha, beta),
            2 => self.alpha_r_integrals_2d(alpha, beta),
            d => Err(MeasureError::Unsupported(format!("dimension {d}"))),
        }
    }

    fn alpha_r_integrals_1d(
        &self,
        alpha: f64,
        beta: f64,
    ) -> Result<(QuadResult<f64>, QuadResult<f64>), MeasureError> {
        let pts = self.line_breakpoints();
        let width = pts[pts.len() - 1] - pts[0];
        let min_gap = pts
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|g| *g > 0.0)
            .fold(f64::INFINITY, f64::min);
        // Small radii: exact piecewise form of the profile.
        // Interior of each constant piece contributes |phi|^alpha (2r)^alpha
        // (len - 2r); each breakpoint contributes (2r)^{alpha+1} g_j with
        // g_j = int_0^1 |(1-t) phi_l + t phi_r|^alpha dt.
        let r_a = (0.45 * min_gap).min(0.45 * width).max(1e-12);
        let pieces = line_pieces(&self.components);
        let mut interior_abs = 0.0;
        let mut interior_signed = 0.0;
        for (v, len) in &pieces {
            interior_abs += v.abs().powf(alpha) * len;
            interior_signed += sign(*v) * v.abs().powf(alpha) * len;
        }
        let mut strip_abs = 0.0;
        let mut strip_signed = 0.0;
        let mut edge_abs = 0.0;
        let mut edge_signed = 0.0;
        let values = line_values_at_breakpoints(&self.components, &pts);
        for (l, r) in &values {
            strip_abs += l.abs().powf(alpha) + r.abs().powf(alpha);
            strip_signed += sign(*l) * l.abs().powf(alpha) + sign(*r) * r.abs().powf(alpha);
            let (ga, gs) = edge_blend_integral(*l, *r, alpha);
            edge_abs += ga;
            edge_signed += gs;
        }
        // int_0^{r_a} of each power of r against r^{-beta-1}:
        let pow = |e: f64| r_a.powf(e) / e; // int_0^{r_a} r^{e-1} dr
        let e1 = alpha - beta; // from (2r)^alpha * len
        let e2 = alpha + 1.0 - beta; // from (2r)^alpha * r and (2r)^{alpha+1}
        let two_a = 2.0f64.powf(alpha);
        let small_abs = two_a * interior_abs * pow(e1) - two_a * strip_abs * pow(e2)
            + 2.0 * two_a * edge_abs * pow(e2);
        let small_signed = two_a * interior_signed * pow(e1) - two_a * strip_signed * pow(e2)
            + 2.0 * two_a * edge_signed * pow(e2);

        // Large radii: for r >= width the profile is affine in r:
        // |mu_tot|^alpha (2r - width) plus two constant edge integrals.
        let r_b = width.max(r_a * 2.0);
        let tot = self.total_mass;
        let tot_abs = tot.abs().powf(alpha);
        let tot_signed = sign(tot) * tot.abs().powf(alpha);
        let p_lo = pts[0];
        let (edge_l_abs, edge_l_signed) = self.edge_integral(alpha, p_lo, 1.0, width)?;
        let p_hi = pts[pts.len() - 1];
        let (edge_r_abs, edge_r_signed) = self.edge_integral(alpha, p_hi, -1.0, width)?;
        // int_{r_b}^inf (c1 (2r - width) + c0) r^{-beta-1} dr
        let tail = |c1: f64, c0: f64| {
            2.0 * c1 * r_b.powf(1.0 - beta) / (beta - 1.0)
                + (c0 - c1 * width) * r_b.powf(-beta) / beta
        };
        let tail_abs = tail(tot_abs, edge_l_abs.value + edge_r_abs.value);
        let tail_signed = tail(tot_signed, edge_l_signed.value + edge_r_signed.value);

        // Mid range by nested adaptive quadrature.
        let geo: Vec<f64> = std::iter::successors(Some(r_a * 2.0), |r| Some(r * 2.0))
            .take_while(|r| *r < r_b)
            .collect();
        let mut mid_err = 0.0f64;
        let mid_abs = integrate_segments(
            |r| {
                let (a, _) = self.alpha_profile_pair(alpha, r).expect("profile");
                a.value * r.powf(-beta - 1.0)
            },
            r_a,
            r_b,
            &geo,
            1e-7,
            1e-10,
            600,
        )?;
        let mid_signed = integrate_segments(
            |r| {
                let (_, b) = self.alpha_profile_pair(alpha, r).expect("profile");
                mid_err = mid_err.max(b.error_estimate);
                b.value * r.powf(-beta - 1.0)
            },
            r_a,
            r_b,
            &geo,
            1e-7,
            1e-10,
            600,
        )?;
        let a = QuadResult {
            value: small_abs + mid_abs.value + tail_abs,
            error_estimate: mid_abs.error_estimate
                + edge_l_abs.error_estimate
                + edge_r_abs.error_estimate
                + mid_err,
            evaluations: mid_abs.evaluations,
        };
        let b = QuadResult {
            value: small_signed + mid_signed.value + tail_signed,
            error_estimate: mid_signed.error_estimate
                + edge_l_signed.error_estimate
                + edge_r_signed.error_estimate
                + mid_err,
            evaluations: mid_signed.evaluations,
        };
        Ok((a, b))
    }

    /// Constant edge integrals of the large-radius profile: with `s` running
    /// over `[0, width]`, the left edge sees `mu([p_lo, p_lo + s])` and the
    /// right edge `mu([p_hi - s, p_hi])`.
    fn edge_integral(
        &self,
        alpha: f64,
        anchor: f64,
        dir: f64,
        width: f64,
    ) -> Result<(QuadResult<f64>, QuadResult<f64>), MeasureError> {
        let cum = |s: f64| -> f64 {
            if dir > 0.0 {
                self.components
                    .iter()
                    .map(|(w, c)| match c {
                        Component::Interval { a, b } => {
                            w * interval_overlap(anchor, anchor + s, *a, *b)
                        }
                        _ => unreachable!(),
                    })
                    .sum()
            } else {
                self.components
                    .iter()
                    .map(|(w, c)| match c {
                        Component::Interval { a, b } => {
                            w * interval_overlap(anchor - s, anchor, *a, *b)
                        }
                        _ => unreachable!(),
                    })
                    .sum()
            }
        };
        let breaks: Vec<f64> = self
            .line_breakpoints()
            .iter()
            .map(|p| (p - anchor) * dir)
            .filter(|s| *s > 0.0 && *s < width)
            .collect();
        let abs = integrate_segments(
            |s| cum(s).abs().powf(alpha),
            0.0,
            width,
            &breaks,
            1e-10,
            1e-13,
            4000,
        )?;
        let signed = integrate_segments(
            |s| {
                let v = cum(s);
                sign(v) * v.abs().powf(alpha)
            },
            0.0,
            width,
            &breaks,
            1e-10,
            1e-13,
            4000,
        )?;
        Ok((abs, signed))
    }

    fn alpha_r_integrals_2d(
        &self,
        alpha: f64,
        beta: f64,
    ) -> Result<(QuadResult<f64>, QuadResult<f64>), MeasureError> {
        // Leading small-r and large-r behaviour handled analytically, the
        // middle by nested quadrature; coarser tolerances than d=1.
        let width = ((self.support_hi[0] - self.support_lo[0]).powi(2)
            + (self.support_hi[1] - self.support_lo[1]).powi(2))
        .sqrt();
        let r_a = 1e-3 * width;
        // Small r: profile ~ (v_2 r^2)^alpha int |phi|^alpha with a boundary
        // correction O(r^{2 alpha + 1 - beta}) folded into the error.
        let phi_alpha_abs: f64 = self
            .density_levels()
            .iter()
            .map(|(v, m)| v.abs().powf(alpha) * m)
            .sum();
        let phi_alpha_signed: f64 = self
            .density_levels()
            .iter()
            .map(|(v, m)| sign(*v) * v.abs().powf(alpha) * m)
            .sum();
        let v2 = std::f64::consts::PI;
        let e = 2.0 * alpha - beta;
        let small_abs = v2.powf(alpha) * phi_alpha_abs * r_a.powf(e) / e;
        let small_signed = v2.powf(alpha) * phi_alpha_signed * r_a.powf(e) / e;
        let small_err =
            v2.powf(alpha) * self.sup_density.powf(alpha) * 8.0 * width * r_a.powf(e + 1.0)
                / (e + 1.0);
        let r_b = 4.0 * width.max(1.0);
        let geo: Vec<f64> = std::iter::successors(Some(r_a * 2.0), |r| Some(r * 2.0))
            .take_while(|r| *r < r_b)
            .collect();
        let mid_abs = integrate_segments(
            |r| self.alpha_profile_pair(alpha, r).expect("profile").0.value * r.powf(-beta - 1.0),
            r_a,
            r_b,
            &geo,
            1e-5,
            1e-8,
            200,
        )?;
        let mid_signed = integrate_segments(
            |r| self.alpha_profile_pair(alpha, r).expect("profile").1.value * r.powf(-beta - 1.0),
            r_a,
            r_b,
            &geo,
            1e-5,
            1e-8,
            200,
        )?;
        // Tail: profile(r) = |mu_tot|^alpha area(S + B_r) + O(r); the leading
        // pi r^2 term integrates in closed form, the linear-in-r remainder is
        // bounded into the error estimate.
        let tot = self.total_mass;
        let tail_abs = tot.abs().powf(alpha) * v2 * r_b.powf(2.0 - beta) / (beta - 2.0);
        let tail_signed =
            sign(tot) * tot.abs().powf(alpha) * v2 * r_b.powf(2.0 - beta) / (beta - 2.0);
        let tail_err =
            (self.total_variation.powf(alpha) + 1.0) * 16.0 * width.max(1.0) * r_b.powf(1.0 - beta)
                / (beta - 1.0);
        Ok((
            QuadResult {
                value: small_abs + mid_abs.value + tail_abs,
                error_estimate: small_err + mid_abs.error_estimate + tail_err,
                evaluations: mid_abs.evaluations,
            },
            QuadResult {
                value: small_signed + mid_signed.value + tail_signed,
                error_estimate: small_err + mid_signed.error_estimate + tail_err,
                evaluations: mid_signed.evaluations,
            },
        ))
    }
}

/// `(A, B)` of the stable-limit exponent: `A = int int |mu(B)|^alpha dx
/// C_beta r^{-beta-1} dr` and `B` its eps-signed counterpart. `A >= |B|`,
/// with equality for measures of constant sign.
pub fn signed_alpha_integrals(
    mu: &TestMeasure,
    alpha: f64,
    radius: &crate::laws::RadiusLaw,
) -> Result<(f64, f64), MeasureError> {
    let (a, b) = mu.alpha_r_integrals(alpha, radius.beta)?;
    let c = radius.c_beta();
    Ok((c * a.value, c * b.value))
}

fn push_level(levels: &mut Vec<(f64, f64)>, value: f64, mass: f64) {
    for (v, m) in levels.iter_mut() {
        if (*v - value).abs() <= 1e-12 * (1.0 + value.abs()) {
            *m += mass;
            return;
        }
    }
    levels.push((value, mass));
}

/// Elementary constant pieces `(density value, length)` of a 1-d measure.
fn line_pieces(components: &[(f64, Component)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<f64> = components
        .iter()
        .flat_map(|(_, c)| match c {
            Component::Interval { a, b } => vec![*a, *b],
            _ => unreachable!(),
        })
        .collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let mut out = Vec::new();
    for w in pts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let v: f64 = components
            .iter()
            .map(|(wt, c)| match c {
                Component::Interval { a, b } => {
                    if mid >= *a && mid <= *b {
                        *wt
                    } else {
                        0.0
                    }
                }
                _ => unreachable!(),
            })
            .sum();
        out.push((v, w[1] - w[0]));
    }
    out
}

fn line_variation(components: &[(f64, Component)]) -> (f64, f64) {
    let pieces = line_pieces(components);
    let tv = pieces.iter().map(|(v, l)| v.abs() * l).sum();
    let sup = pieces.iter().map(|(v, _)| v.abs()).fold(0.0f64, f64::max);
    (tv, sup)
}

/// Density values just left and right of each breakpoint.
fn line_values_at_breakpoints(components: &[(f64, Component)], pts: &[f64]) -> Vec<(f64, f64)> {
    let eval = |x: f64| -> f64 {
        components
            .iter()
            .map(|(w, c)| match c {
                Component::Interval { a, b } => {
                    if x >= *a && x <= *b {
                        *w
                    } else {
                        0.0
                    }
                }
                _ => unreachable!(),
            })
            .sum()
    };
    let eps = pts
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|g| *g > 0.0)
        .fold(1.0f64, f64::min)
        * 1e-3;
    pts.iter().map(|p| (eval(p - eps), eval(p + eps))).collect()
}

/// `(int_0^1 |l(t)|^alpha dt, int_0^1 eps(l) |l|^alpha dt)` for the linear
/// blend `l(t) = (1-t) a + t b`, in closed form.
fn edge_blend_integral(a: f64, b: f64, alpha: f64) -> (f64, f64) {
    let seg = |a: f64, b: f64| -> (f64, f64) {
        // a, b of the same sign (or one endpoint zero).
        if a == b {
            return (a.abs().powf(alpha), sign(a) * a.abs().powf(alpha));
        }
        let s = sign(0.5 * (a + b));
        let num = (b.abs().powf(alpha + 1.0) - a.abs().powf(alpha + 1.0)).abs();
        let den = (alpha + 1.0) * (b - a).abs();
        (num / den, s * num / den)
    };
    if a == 0.0 && b == 0.0 {
        (0.0, 0.0)
    } else if a * b >= 0.0 {
        seg(a, b)
    } else {
        // sign change at t* = a / (a - b); split and rescale each part.
        let t = a / (a - b);
        let (l_abs, l_sig) = seg(a, 0.0);
        let (r_abs, r_sig) = seg(0.0, b);
        (t * l_abs + (1.0 - t) * r_abs, t * l_sig + (1.0 - t) * r_sig)
    }
}

fn planar_overlap(a: &Component, b: &Component) -> bool {
    match (a, b) {
        (Component::Rect { lo: l1, hi: h1 }, Component::Rect { lo: l2, hi: h2 }) => {
            interval_overlap(l1[0], h1[0], l2[0], h2[0]) > 0.0
                && interval_overlap(l1[1], h1[1], l2[1], h2[1]) > 0.0
        }
        (
            Component::Disk {
                center: c1,
                radius: r1,
            },
            Component::Disk {
                center: c2,
                radius: r2,
            },
        ) => {
            let d2 = (c1[0] - c2[0]).powi(2) + (c1[1] - c2[1]).powi(2);
            d2 < (r1 + r2) * (r1 + r2)
        }
        (Component::Rect { lo, hi }, Component::Disk { center, radius })
        | (Component::Disk { center, radius }, Component::Rect { lo, hi }) => {
            let dx = (lo[0] - center[0]).max(center[0] - hi[0]).max(0.0);
            let dy = (lo[1] - center[1]).max(center[1] - hi[1]).max(0.0);
            dx * dx + dy * dy < radius * radius
        }
        _ => false,
    }
}
