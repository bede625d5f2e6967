//! Sampling of Poisson and shot-noise Cox ball configurations at scale rho.
//!
//! Balls only matter to the field when they can touch the target's support
//! box, so the sampler materializes exactly the configuration restricted to
//! that event. Two schemes are available:
//!
//! * `Banded` (default for centered mark laws): cluster centers near the
//!   target are sampled in full; farther centers can only contribute through
//!   increasingly large radii, so distance annuli are paired with conditional
//!   radius bands and only clusters that actually produce a contributing ball
//!   are materialized. This keeps the cost logarithmic in the radius cap,
//!   which the heavy radius tail makes indispensable.
//! * `Plain`: the single-window scheme (every cluster within reach of the
//!   inflated support box is sampled in full). Required when the conditional
//!   centering is nonzero, because the centering sums a kernel integral over
//!   every materialized center.
//!
//! Both schemes are exact for the model truncated at the radius cap `r_cap`;
//! the mass beyond the cap is bounded by `truncation_bias_bound`.

use crate::laws::{Kernel, LawError, MarkLaw, RadiusLaw};
use crate::measures::TestMeasure;
use crate::rng::Stream;
use crate::unit_ball_volume;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error(transparent)]
    Law(#[from] LawError),
}

/// Power-law scaling of the cluster intensity `kappa(rho) = c_kappa rho^-u`
/// and the per-cluster ball intensity `lambda(rho) = c_lambda rho^-v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    /// Cluster count stays constant (`u = 0`, `c_kappa = 1`); only the
    /// clusters grow (`v > 0`).
    Local,
    /// Cluster count diverges (`u > 0`).
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingLaw {
    pub scenario: Scenario,
    pub u: f64,
    pub v: f64,
    pub c_kappa: f64,
    pub c_lambda: f64,
}

impl ScalingLaw {
    pub fn local(v: f64, c_lambda: f64) -> Result<Self, ModelError> {
        if !(v > 0.0) {
            return Err(ModelError::Invalid(format!(
                "local scenario needs a growing cluster (v > 0), got v = {v}"
            )));
        }
        if !(c_lambda > 0.0) {
            return Err(ModelError::Invalid("c_lambda must be positive".into()));
        }
        Ok(ScalingLaw {
            scenario: Scenario::Local,
            u: 0.0,
            v,
            c_kappa: 1.0,
            c_lambda,
        })
    }

    pub fn global(u: f64, v: f64, c_kappa: f64, c_lambda: f64) -> Result<Self, ModelError> {
        if !(u > 0.0) {
            return Err(ModelError::Invalid(format!(
                "global scenario needs a diverging cluster count (u > 0), got u = {u}"
            )));
        }
        if !(c_kappa > 0.0 && c_lambda > 0.0) {
            return Err(ModelError::Invalid(
                "scaling coefficients must be positive".into(),
            ));
        }
        Ok(ScalingLaw {
            scenario: Scenario::Global,
            u,
            v,
            c_kappa,
            c_lambda,
        })
    }

    pub fn kappa(&self, rho: f64) -> f64 {
        self.c_kappa * rho.powf(-self.u)
    }

    pub fn lambda(&self, rho: f64) -> f64 {
        self.c_lambda * rho.powf(-self.v)
    }
}

/// Full description of one Cox random-ball model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kernel: Kernel,
    pub radius: RadiusLaw,
    pub marks: MarkLaw,
    pub scaling: ScalingLaw,
}

impl ModelSpec {
    pub fn new(
        kernel: Kernel,
        radius: RadiusLaw,
        marks: MarkLaw,
        scaling: ScalingLaw,
    ) -> Result<Self, ModelError> {
        let d = kernel.dimension as f64;
        let alpha = marks.attractor.alpha;
        if !(radius.beta > d && radius.beta < alpha * d) {
            return Err(ModelError::Invalid(format!(
                "radius tail exponent must satisfy d < beta < alpha d: d = {d}, beta = {}, alpha = {alpha}",
                radius.beta
            )));
        }
        Ok(ModelSpec {
            kernel,
            radius,
            marks,
            scaling,
        })
    }

    pub fn dimension(&self) -> usize {
        self.kernel.dimension
    }
}

/// Axis-aligned target region the field is restricted to (the support box of
/// a test measure, or a degenerate box for point targets).
#[derive(Debug, Clone, PartialEq)]
pub struct TargetBox {
    pub dim: usize,
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl TargetBox {
    pub fn from_measure(mu: &TestMeasure) -> Self {
        let (lo, hi) = mu.support_box();
        let mut l = [0.0; 3];
        let mut h = [0.0; 3];
        l[..lo.len()].copy_from_slice(&lo);
        h[..hi.len()].copy_from_slice(&hi);
        TargetBox {
            dim: mu.dimension(),
            lo: l,
            hi: h,
        }
    }

    pub fn point(p: &[f64]) -> Self {
        let mut l = [0.0; 3];
        l[..p.len()].copy_from_slice(p);
        TargetBox {
            dim: p.len(),
            lo: l,
            hi: l,
        }
    }

    pub fn dist(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.dim {
            let d = (self.lo[k] - x[k]).max(x[k] - self.hi[k]).max(0.0);
            acc += d * d;
        }
        acc.sqrt()
    }

    /// Volume of the Minkowski inflation `T + B(0, u)` (Steiner formula for
    /// boxes, d <= 3).
    pub fn inflated_volume(&self, u: f64) -> f64 {
        let e: Vec<f64> = (0..self.dim).map(|k| self.hi[k] - self.lo[k]).collect();
        match self.dim {
            1 => e[0] + 2.0 * u,
            2 => e[0] * e[1] + 2.0 * (e[0] + e[1]) * u + std::f64::consts::PI * u * u,
            3 => {
                e[0] * e[1] * e[2]
                    + 2.0 * (e[0] * e[1] + e[1] * e[2] + e[0] * e[2]) * u
                    + std::f64::consts::PI * u * u * (e[0] + e[1] + e[2])
                    + 4.0 / 3.0 * std::f64::consts::PI * u.powi(3)
            }
            _ => unreachable!(),
        }
    }
}

/// Homogeneous Poisson sample on a box: count ~ Poisson(intensity * vol),
/// locations i.i.d. uniform.
pub fn sample_poisson(
    lo: &[f64],
    hi: &[f64],
    intensity: f64,
    rng: &mut Stream,
) -> Result<Vec<Vec<f64>>, ModelError> {
    if lo.len() != hi.len() || lo.is_empty() {
        return Err(ModelError::Invalid("window bounds mismatch".into()));
    }
    let vol: f64 = lo.iter().zip(hi).map(|(l, h)| h - l).product();
    if !(vol.is_finite() && vol >= 0.0 && intensity >= 0.0) {
        return Err(ModelError::Invalid(format!(
            "window volume {vol} / intensity {intensity} invalid"
        )));
    }
    let mean = intensity * vol;
    let n = poisson_count(mean, rng);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(
            lo.iter()
                .zip(hi)
                .map(|(l, h)| rng.gen_range(*l..=*h))
                .collect(),
        );
    }
    Ok(out)
}

/// One Poisson count draw (exposed for the truncated limit-object sampler).
pub fn poisson_count(mean: f64, rng: &mut Stream) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let p = Poisson::new(mean).expect("positive mean");
    p.sample(rng) as usize
}

/// Zero-truncated Poisson by inversion; `mean` may be arbitrarily small.
fn sample_zt_poisson(mean: f64, rng: &mut Stream) -> usize {
    if mean > 30.0 {
        // P(0) < 1e-13: plain Poisson is indistinguishable.
        return poisson_count(mean, rng).max(1);
    }
    let u: f64 = rng.gen();
    let denom = mean.exp_m1();
    let mut term = mean; // mean^k / k! at k=1
    let mut cum = term / denom;
    let mut k = 1usize;
    while u > cum && k < 400 {
        k += 1;
        term *= mean / k as f64;
        cum += term / denom;
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    /// Fully sampled cluster in the core window.
    Core,
    /// Cluster from a distance annulus, materialized because it produced at
    /// least one ball in its conditional radius band.
    Shell(usize),
}

#[derive(Debug, Clone)]
pub struct ClusterRecord {
    pub center: [f64; 3],
    pub tier: Tier,
    /// Balls sampled for this cluster (before keep/discard).
    pub ball_count: u32,
}

#[derive(Debug, Clone)]
pub struct Ball {
    pub cluster: u32,
    pub center: [f64; 3],
    pub radius: f64,
    pub mark: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingScheme {
    Banded,
    Plain,
}

/// Radius cap and window policy for one sampling run.
#[derive(Debug, Clone, Copy)]
pub struct Truncation {
    pub r_cap: f64,
    pub eps_kernel: f64,
}

impl Truncation {
    /// Default cap: the smallest cap whose truncation bias bound is below
    /// `10^-3` of the untruncated mean-absolute-field bound, i.e.
    /// `r_cap = rho r0 (1000 / rho^d)^{1/(beta-d)}`.
    pub fn auto(model: &ModelSpec, rho: f64) -> Self {
        let d = model.dimension() as f64;
        let beta = model.radius.beta;
        let r_cap = rho * model.radius.r0 * (1e3 / rho.powf(d)).powf(1.0 / (beta - d));
        Truncation {
            r_cap: r_cap.min(1e9),
            eps_kernel: 1e-6,
        }
    }

    pub fn with_cap(r_cap: f64) -> Self {
        Truncation {
            r_cap,
            eps_kernel: 1e-6,
        }
    }
}

/// One sampled configuration restricted to balls that can touch the target.
#[derive(Debug, Clone)]
pub struct Realization {
    pub rho: f64,
    pub dimension: usize,
    pub clusters: Vec<ClusterRecord>,
    pub balls: Vec<Ball>,
    /// Balls sampled whose ball can provably not touch the target box.
    pub discarded: u64,
    /// Balls dropped by the radius cap (plain scheme only; the banded scheme
    /// never materializes them).
    pub capped: u64,
    pub r_cap: f64,
    /// Probability mass of the scaled radius law beyond the cap.
    pub tail_mass: f64,
    pub scheme: SamplingScheme,
    /// Core window inflation radius (distance-to-box threshold).
    pub core_radius: f64,
    /// Outer edges of the distance annuli (banded scheme).
    pub shell_edges: Vec<f64>,
}

/// Upper bound on the mean absolute field mass lost to the radius cap:
/// `kappa lambda v_d |mu|_TV m1 int_{r_cap/rho}^inf r^d f(r) dr`
/// (closed form for the Pareto family).
pub fn truncation_bias_bound(model: &ModelSpec, rho: f64, mu: &TestMeasure, r_cap: f64) -> f64 {
    let d = model.dimension() as f64;
    let kappa = model.scaling.kappa(rho);
    let lambda = model.scaling.lambda(rho);
    kappa
        * lambda
        * unit_ball_volume(model.dimension())
        * mu.total_variation()
        * model.marks.abs_mean
        * model.radius.tail_moment(d, r_cap / rho)
}

/// Number of kept balls with radius above one covering the origin.
pub fn count_large_balls(real: &Realization) -> usize {
    real.balls
        .iter()
        .filter(|b| {
            b.radius > 1.0 && {
                let d2: f64 = b.center[..real.dimension].iter().map(|c| c * c).sum();
                d2.sqrt() <= b.radius
            }
        })
        .count()
}

/// Expected number of large balls. Exact for the Pareto family when
/// `rho r0 <= 1`; otherwise the asymptotic value, flagged.
pub fn expected_large_balls(model: &ModelSpec, rho: f64) -> (f64, bool) {
    let d = model.dimension() as f64;
    let c = model.radius.c_beta() * unit_ball_volume(model.dimension()) / (model.radius.beta - d);
    let value =
        c * model.scaling.kappa(rho) * model.scaling.lambda(rho) * rho.powf(model.radius.beta);
    (value, rho * model.radius.r0 <= 1.0)
}

/// Draw one full cluster at `center`: Poisson(lambda) balls, kernel offsets,
/// scaled Pareto radii. Returns the sampled count; kept balls are appended.
#[allow(clippy::too_many_arguments)]
pub(crate) fn sample_core_cluster(
    model: &ModelSpec,
    rho: f64,
    target: &TargetBox,
    trunc: &Truncation,
    cluster_idx: u32,
    center: &[f64; 3],
    lambda: f64,
    rng: &mut Stream,
    balls: &mut Vec<Ball>,
    discarded: &mut u64,
    capped: &mut u64,
) -> u32 {
    let d = model.dimension();
    let n = poisson_count(lambda, rng);
    let mut offset = [0.0f64; 3];
    for _ in 0..n {
        model.kernel.sample_offset(rng, &mut offset[..d]);
        let mut x = [0.0f64; 3];
        for k in 0..d {
            x[k] = center[k] + offset[k];
        }
        let r = model.radius.sample(rho, rng);
        let mark = model.marks.sample(rng);
        if r > trunc.r_cap {
            *capped += 1;
            continue;
        }
        if target.dist(&x[..d]) <= r {
            balls.push(Ball {
                cluster: cluster_idx,
                center: x,
                radius: r,
                mark,
            });
        } else {
            *discarded += 1;
        }
    }
    n as u32
}

/// Uniform point on the annulus `{ u_lo < dist(y, target) <= u_hi }` by
/// rejection from the bounding box of the outer inflation.
fn sample_annulus_point(
    target: &TargetBox,
    u_lo: f64,
    u_hi: f64,
    d: usize,
    rng: &mut Stream,
) -> [f64; 3] {
    let mut y = [0.0f64; 3];
    loop {
        for k in 0..d {
            y[k] = rng.gen_range(target.lo[k] - u_hi..=target.hi[k] + u_hi);
        }
        let dist = target.dist(&y[..d]);
        if dist > u_lo && dist <= u_hi {
            return y;
        }
    }
}

/// Sample one configuration of the rescaled model restricted to the target.
pub fn sample_realization(
    model: &ModelSpec,
    rho: f64,
    target: &TargetBox,
    trunc: &Truncation,
    scheme: SamplingScheme,
    rng: &mut Stream,
) -> Result<Realization, ModelError> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(ModelError::Invalid(format!(
            "rho must lie in (0, 1), got {rho}"
        )));
    }
    if target.dim != model.dimension() {
        return Err(ModelError::Invalid("target dimension mismatch".into()));
    }
    if trunc.r_cap <= rho * model.radius.r0 {
        return Err(ModelError::Invalid(format!(
            "radius cap {} below the scaled lower endpoint {}",
            trunc.r_cap,
            rho * model.radius.r0
        )));
    }
    let d = model.dimension();
    let kappa = model.scaling.kappa(rho);
    let lambda = model.scaling.lambda(rho);
    let reach = model.kernel.reach(trunc.eps_kernel);
    let tail_mass = model.radius.survival(trunc.r_cap / rho);

    let mut clusters: Vec<ClusterRecord> = Vec::new();
    let mut balls: Vec<Ball> = Vec::new();
    let mut discarded = 0u64;
    let mut capped = 0u64;

    let (core_t, shell_edges) = match scheme {
        SamplingScheme::Plain => (trunc.r_cap, Vec::new()),
        SamplingScheme::Banded => {
            let t1 = (4.0 * rho * model.radius.r0).max(0.5).min(trunc.r_cap);
            let mut edges = vec![];
            let mut t = t1;
            while t < trunc.r_cap {
                t = (t * 4.0).min(trunc.r_cap);
                edges.push(t);
            }
            (t1, edges)
        }
    };

    // Core window: all clusters within distance core_t + reach of the target.
    let u1 = core_t + reach;
    let core_vol = target.inflated_volume(u1);
    let n_core = poisson_count(kappa * core_vol, rng);
    for _ in 0..n_core {
        let y = sample_annulus_point(target, -1.0, u1, d, rng);
        let idx = clusters.len() as u32;
        let n = sample_core_cluster(
            model,
            rho,
            target,
            trunc,
            idx,
            &y,
            lambda,
            rng,
            &mut balls,
            &mut discarded,
            &mut capped,
        );
        clusters.push(ClusterRecord {
            center: y,
            tier: Tier::Core,
            ball_count: n,
        });
    }

    // Distance annuli: a cluster at distance between t_j + reach and
    // t_{j+1} + reach only contributes through balls with radius above t_j,
    // so only the conditional band (t_j, r_cap] is sampled, and only for the
    // clusters that produce at least one such ball.
    let mut t_lo = core_t;
    for (j, &t_hi) in shell_edges.iter().enumerate() {
        let p_band = model.radius.survival(t_lo / rho) - tail_mass;
        if p_band > 0.0 {
            let u_lo = t_lo + reach;
            let u_hi = t_hi + reach;
            let shell_vol = target.inflated_volume(u_hi) - target.inflated_volume(u_lo);
            let active_intensity = kappa * (-(-lambda * p_band).exp_m1());
            let n_active = poisson_count(active_intensity * shell_vol, rng);
            let mut offset = [0.0f64; 3];
            for _ in 0..n_active {
                let y = sample_annulus_point(target, u_lo, u_hi, d, rng);
                let idx = clusters.len() as u32;
                let count = sample_zt_poisson(lambda * p_band, rng);
                for _ in 0..count {
                    model.kernel.sample_offset(rng, &mut offset[..d]);
                    let mut x = [0.0f64; 3];
                    for k in 0..d {
                        x[k] = y[k] + offset[k];
                    }
                    let r = model.radius.sample_conditional(rho, t_lo, trunc.r_cap, rng);
                    let mark = model.marks.sample(rng);
                    if target.dist(&x[..d]) <= r {
                        balls.push(Ball {
                            cluster: idx,
                            center: x,
                            radius: r,
                            mark,
                        });
                    } else {
                        discarded += 1;
                    }
                }
                clusters.push(ClusterRecord {
                    center: y,
                    tier: Tier::Shell(j),
                    ball_count: count as u32,
                });
            }
        }
        t_lo = t_hi;
    }

    Ok(Realization {
        rho,
        dimension: d,
        clusters,
        balls,
        discarded,
        capped,
        r_cap: trunc.r_cap,
        tail_mass,
        scheme,
        core_radius: u1,
        shell_edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::{Kernel, KernelFamily, MarkLaw, RadiusLaw};
    use crate::rng::MasterSeed;
    use approx::assert_abs_diff_eq;

    fn reference_model(v: f64) -> ModelSpec {
        ModelSpec::new(
            Kernel::new(KernelFamily::Gaussian, 1.0, 1).unwrap(),
            RadiusLaw::new(1.5, 1.0).unwrap(),
            MarkLaw::rademacher(),
            ScalingLaw::local(v, 1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn poisson_window_mean() {
        let seed = MasterSeed(100);
        let mut total = 0usize;
        let reps = 10_000;
        for i in 0..reps {
            let mut rng = seed.stream(i);
            total += sample_poisson(&[0.0], &[2.0], 3.0, &mut rng).unwrap().len();
        }
        let mean = total as f64 / reps as f64;
        let se = (6.0f64 / reps as f64).sqrt();
        assert!((mean - 6.0).abs() <= 3.0 * se, "mean {mean}");
        let mut rng = seed.stream(0);
        assert!(sample_poisson(&[0.0], &[2.0], 0.0, &mut rng)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn truncation_bound_closed_form() {
        let model = reference_model(2.0);
        let mu = TestMeasure::interval(0.0, 1.0).unwrap();
        let rho = 0.1;
        // tail integral for beta=1.5, d=1, r0=1: 3 (R/rho)^{-1/2}
        let r = 100.0;
        let bound = truncation_bias_bound(&model, rho, &mu, r);
        let kappa_lambda = 1.0 * rho.powf(-2.0);
        let expected = kappa_lambda * 2.0 * 1.0 * 1.0 * 3.0 * (r / rho).powf(-0.5);
        assert_abs_diff_eq!(bound, expected, epsilon = 1e-9 * expected);
        // doubling the cap divides the bound by 2^{beta-d}
        let halved = truncation_bias_bound(&model, rho, &mu, 2.0 * r);
        assert_abs_diff_eq!(halved, bound / 2.0f64.powf(0.5), epsilon = 1e-9 * bound);
        assert_eq!(truncation_bias_bound(&model, rho, &mu, f64::INFINITY), 0.0);
    }

    #[test]
    fn degenerate_config_rejected() {
        assert!(ScalingLaw::local(0.0, 1.0).is_err());
        assert!(ScalingLaw::global(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(ScalingLaw::global(1.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn expected_large_balls_reference() {
        let model = reference_model(2.0);
        let (e, exact) = expected_large_balls(&model, 0.1);
        assert!(exact);
        assert_abs_diff_eq!(e, 6.0 * 100.0 * 0.1f64.powf(1.5), epsilon = 1e-9);
        assert_abs_diff_eq!(e, 18.9737, epsilon = 1e-4);
    }

    #[test]
    fn per_cluster_counts_are_poisson() {
        // Index of dispersion of the sampled per-cluster totals -> 1.
        let model = reference_model(1.0);
        let seed = MasterSeed(17);
        let mut counts: Vec<f64> = Vec::new();
        let target = TargetBox::point(&[0.0]);
        for i in 0..400 {
            let mut rng = seed.stream(i);
            let real = sample_realization(
                &model,
                0.2,
                &target,
                &Truncation::with_cap(50.0),
                SamplingScheme::Banded,
                &mut rng,
            )
            .unwrap();
            counts.extend(
                real.clusters
                    .iter()
                    .filter(|c| c.tier == Tier::Core)
                    .map(|c| c.ball_count as f64),
            );
        }
        let n = counts.len() as f64;
        let mean = counts.iter().sum::<f64>() / n;
        let var = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (n - 1.0);
        let dispersion = var / mean;
        // SE of the dispersion index is ~ sqrt(2/n).
        let se = (2.0 / n).sqrt();
        assert!(
            (dispersion - 1.0).abs() <= 4.0 * se,
            "dispersion {dispersion}, n {n}"
        );
        assert!((mean - 5.0).abs() <= 4.0 * (5.0 / n).sqrt(), "mean {mean}");
    }

    #[test]
    fn total_sampled_ball_count_matches_compound_mean() {
        // Before keep/discard, the core tier draws kappa * vol(W) clusters
        // with Poisson(lambda) balls each.
        let model = reference_model(1.0);
        let mu = TestMeasure::interval(0.0, 1.0).unwrap();
        let target = TargetBox::from_measure(&mu);
        let rho = 0.2;
        let trunc = Truncation::with_cap(20.0);
        let seed = MasterSeed(88);
        let reps = 1000u64;
        let mut total = 0u64;
        let mut vol = 0.0;
        for i in 0..reps {
            let mut rng = seed.stream(i);
            let real = sample_realization(
                &model,
                rho,
                &target,
                &trunc,
                SamplingScheme::Banded,
                &mut rng,
            )
            .unwrap();
            total += real
                .clusters
                .iter()
                .filter(|c| c.tier == Tier::Core)
                .map(|c| c.ball_count as u64)
                .sum::<u64>();
            vol = target.inflated_volume(real.core_radius);
        }
        let mean = total as f64 / reps as f64;
        let lambda = model.scaling.lambda(rho);
        let expected = 1.0 * vol * lambda;
        // compound Poisson: Var = kappa vol lambda (1 + lambda)
        let se = (expected * (1.0 + lambda) / reps as f64).sqrt();
        assert!(
            (mean - expected).abs() <= 3.0 * se,
            "{mean} vs {expected} (se {se})"
        );
    }

    #[test]
    fn expected_large_balls_vanishes_with_total_intensity() {
        // kappa lambda rho^beta -> 0 drives the expectation to zero.
        let model = reference_model(1.0); // lambda = rho^-1: lambda rho^1.5 = rho^0.5
        let mut prev = f64::INFINITY;
        for &rho in &[0.2, 0.1, 0.05, 0.01] {
            let (e, _) = expected_large_balls(&model, rho);
            assert!(e < prev);
            prev = e;
        }
        assert!(prev < 0.7);
    }

    #[test]
    fn discarded_balls_have_zero_mass() {
        let model = reference_model(1.5);
        let mu = TestMeasure::interval(0.0, 1.0).unwrap();
        let target = TargetBox::from_measure(&mu);
        let mut rng = MasterSeed(23).stream(5);
        let real = sample_realization(
            &model,
            0.15,
            &target,
            &Truncation::auto(&model, 0.15),
            SamplingScheme::Banded,
            &mut rng,
        )
        .unwrap();
        // Kept balls are exactly those that can touch the support box; any
        // ball at distance > r has exactly zero mass.
        for b in &real.balls {
            assert!(target.dist(&b.center[..1]) <= b.radius);
        }
    }

    #[test]
    fn large_ball_mean_matches_closed_form() {
        let model = reference_model(2.0);
        let rho = 0.1;
        let (expected, exact) = expected_large_balls(&model, rho);
        assert!(exact);
        let target = TargetBox::point(&[0.0]);
        let seed = MasterSeed(31);
        let reps = 600u64;
        let mut total = 0usize;
        for i in 0..reps {
            let mut rng = seed.stream(i);
            let real = sample_realization(
                &model,
                rho,
                &target,
                &Truncation::with_cap(1e6),
                SamplingScheme::Banded,
                &mut rng,
            )
            .unwrap();
            total += count_large_balls(&real);
        }
        let mean = total as f64 / reps as f64;
        // The count is conditionally Poisson with random intensity; its
        // variance exceeds the mean, so allow a dispersion margin of 3.
        let se = (3.0 * expected / reps as f64).sqrt();
        assert!(
            (mean - expected).abs() <= 3.0 * se,
            "mean {mean} vs {expected}"
        );
    }

    #[test]
    fn banded_and_plain_schemes_agree_statistically() {
        // On a model where the plain window is feasible, both schemes must
        // produce the same kept-ball count distribution (within MC error).
        let model = reference_model(1.0);
        let mu = TestMeasure::interval(0.0, 1.0).unwrap();
        let target = TargetBox::from_measure(&mu);
        let trunc = Truncation::with_cap(30.0);
        let seed = MasterSeed(77);
        let reps = 500u64;
        let mut kept = [0f64, 0f64];
        let mut kept2 = [0f64, 0f64];
        for (s, scheme) in [SamplingScheme::Banded, SamplingScheme::Plain]
            .iter()
            .enumerate()
        {
            for i in 0..reps {
                let mut rng = seed.substream(s as u64 + 1, i);
                let real =
                    sample_realization(&model, 0.2, &target, &trunc, *scheme, &mut rng).unwrap();
                kept[s] += real.balls.len() as f64;
                kept2[s] += (real.balls.len() as f64).powi(2);
            }
        }
        let m0 = kept[0] / reps as f64;
        let m1 = kept[1] / reps as f64;
        let v0 = kept2[0] / reps as f64 - m0 * m0;
        let v1 = kept2[1] / reps as f64 - m1 * m1;
        let se = ((v0 + v1) / reps as f64).sqrt();
        assert!(
            (m0 - m1).abs() <= 4.0 * se,
            "banded {m0} vs plain {m1} (se {se})"
        );
    }

    #[test]
    fn deterministic_replay() {
        let model = reference_model(2.0);
        let mu = TestMeasure::interval(0.0, 1.0).unwrap();
        let target = TargetBox::from_measure(&mu);
        let seed = MasterSeed(3);
        let run = || {
            let mut rng = seed.stream(11);
            sample_realization(
                &model,
                0.1,
                &target,
                &Truncation::auto(&model, 0.1),
                SamplingScheme::Banded,
                &mut rng,
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.balls.len(), b.balls.len());
        for (x, y) in a.balls.iter().zip(&b.balls) {
            assert_eq!(x.center, y.center);
            assert_eq!(x.radius, y.radius);
            assert_eq!(x.mark, y.mark);
        }
    }
}
