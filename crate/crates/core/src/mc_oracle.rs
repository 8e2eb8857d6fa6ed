//! Monte Carlo estimators of the mutual information, used to check the
//! quadrature engine.
//!
//! Randomness comes from ChaCha20 (`rand_chacha`) with a 64-bit seed.
//! Samples are split into fixed chunks of [`CHUNK`] draws; chunk `j` of
//! stratum `k` reads stream `(k << 32) | j` of the seeded generator. Chunk
//! results are merged in index order, so an estimate depends only on
//! `(inputs, samples, seed)` and never on the number of worker threads.

use std::f64::consts::{LN_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::quad::integrate_adaptive;
use crate::radial::{marginal_radial_pdf, ChannelParams, RadialLaw, RadialMixture, SphereSet};
use crate::specfun::log_gamma;

pub const CHUNK: usize = 4096;
pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    /// Bits per N-D channel use.
    pub estimate: f64,
    /// Standard error of the estimate, bits.
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

/// A point uniformly distributed on the sphere of radius `radius` in
/// `dims` dimensions.
pub fn sample_on_sphere<R: Rng + ?Sized>(
    radius: f64,
    dims: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !radius.is_finite() || radius <= 0.0 {
        return domain(format!("radius must be finite and > 0, got {radius}"));
    }
    if dims == 0 {
        return domain("dims must be >= 1");
    }
    let mut v = vec![0.0; dims];
    fill_on_sphere(radius, &mut v, rng);
    Ok(v)
}

fn fill_on_sphere<R: Rng + ?Sized>(radius: f64, out: &mut [f64], rng: &mut R) {
    loop {
        let mut norm2 = 0.0;
        for c in out.iter_mut() {
            *c = rng.sample(StandardNormal);
            norm2 += *c * *c;
        }
        if norm2 > 0.0 {
            let scale = radius / norm2.sqrt();
            out.iter_mut().for_each(|c| *c *= scale);
            return;
        }
    }
}

fn fill_normal<R: Rng + ?Sized>(sigma: f64, out: &mut [f64], rng: &mut R) {
    for c in out.iter_mut() {
        *c = sigma * rng.sample::<f64, _>(StandardNormal);
    }
}

fn chunk_rng(seed: u64, stratum: usize, chunk: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(((stratum as u64) << 32) | chunk as u64);
    rng
}

/// Per-stratum sample counts: two each, the rest by largest remainder in
/// proportion to `weights`.
fn allocate(weights: &[f64], samples: usize) -> Vec<usize> {
    let k = weights.len();
    let spare = samples - 2 * k;
    let ideal: Vec<f64> = weights.iter().map(|w| w * spare as f64).collect();
    let mut counts: Vec<usize> = ideal.iter().map(|v| v.floor() as usize).collect();
    let mut left = spare - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        let ra = ideal[a] - ideal[a].floor();
        let rb = ideal[b] - ideal[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts.iter().map(|c| c + 2).collect()
}

/// Running moments of a sample `x` and a zero-mean control `c`.
#[derive(Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
    mean_c: f64,
    m2_c: f64,
    co: f64,
}

impl Moments {
    fn push(&mut self, x: f64, c: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        let dc = c - self.mean_c;
        self.mean += d / self.n;
        self.mean_c += dc / self.n;
        self.m2 += d * (x - self.mean);
        self.m2_c += dc * (c - self.mean_c);
        self.co += d * (c - self.mean_c);
    }

    fn merge(self, other: Self) -> Self {
        if self.n == 0.0 {
            return other;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let dc = other.mean_c - self.mean_c;
        let w = self.n * other.n / n;
        Self {
            n,
            mean: self.mean + d * other.n / n,
            m2: self.m2 + other.m2 + d * d * w,
            mean_c: self.mean_c + dc * other.n / n,
            m2_c: self.m2_c + other.m2_c + dc * dc * w,
            co: self.co + other.co + d * dc * w,
        }
    }

    /// Control-variate corrected mean and its variance. Without a control
    /// this is the plain sample mean.
    fn adjusted(&self) -> (f64, f64) {
        if self.m2_c > 0.0 && self.n > 2.0 {
            let beta = self.co / self.m2_c;
            let resid = (self.m2 - beta * self.co).max(0.0);
            (
                self.mean - beta * self.mean_c,
                resid / (self.n - 2.0) / self.n,
            )
        } else {
            (self.mean, self.m2 / (self.n - 1.0) / self.n)
        }
    }
}

/// Stratified estimator of `sum_k w_k E_k[g]`. `draw(rng, k, scratch)`
/// returns one sample of `g` (in nats) from stratum `k` together with a
/// control variate of known zero mean (0 if none); the control is
/// regressed out per stratum.
fn stratified<F>(
    weights: &[f64],
    samples: usize,
    seed: u64,
    dims: usize,
    draw: F,
) -> Result<McEstimate>
where
    F: Fn(&mut ChaCha20Rng, usize, &mut Scratch) -> (f64, f64) + Sync,
{
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    if samples < 2 * weights.len() {
        return Err(Error::InvalidArgument(
            "fewer samples than two per stratum".into(),
        ));
    }
    let counts = allocate(weights, samples);
    let jobs: Vec<(usize, usize, usize)> = counts
        .iter()
        .enumerate()
        .flat_map(|(k, &n)| (0..n.div_ceil(CHUNK)).map(move |j| (k, j, CHUNK.min(n - j * CHUNK))))
        .collect();
    let partials: Vec<(usize, Moments)> = jobs
        .par_iter()
        .map(|&(k, j, len)| {
            let mut rng = chunk_rng(seed, k, j);
            let mut scratch = Scratch::new(dims);
            let mut m = Moments::default();
            for _ in 0..len {
                let (x, c) = draw(&mut rng, k, &mut scratch);
                m.push(x, c);
            }
            (k, m)
        })
        .collect();

    let mut per_stratum = vec![Moments::default(); weights.len()];
    for (k, m) in partials {
        per_stratum[k] = per_stratum[k].merge(m);
    }
    let mut estimate = 0.0;
    let mut variance = 0.0;
    for (w, m) in weights.iter().zip(&per_stratum) {
        let (mean, var) = m.adjusted();
        estimate += w * mean;
        variance += w * w * var;
    }
    Ok(McEstimate {
        estimate: estimate / LN_2,
        stderr: variance.sqrt() / LN_2,
        samples,
        seed,
    })
}

struct Scratch {
    x: Vec<f64>,
    noise: Vec<f64>,
}

impl Scratch {
    fn new(dims: usize) -> Self {
        Self {
            x: vec![0.0; dims],
            noise: vec![0.0; dims],
        }
    }
}

/// ln S_{N-1}(r) = ln(2 pi^{N/2} r^{N-1} / Gamma(N/2)) without the r term.
fn log_area_constant(dims: usize) -> f64 {
    let n = dims as f64;
    LN_2 + 0.5 * n * PI.ln() - log_gamma(0.5 * n).expect("dims >= 1")
}

/// `E[log2 f(Y|X) - log2 f_Y(Y)]` with the output density obtained from
/// the radial mixture through `f_Y(y) = f_R(||y||) / S_{N-1}(||y||)`.
pub fn mc_mi_vector(
    set: &SphereSet,
    params: &ChannelParams,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    vector_estimator(set, params, samples, seed, |_: &mut [f64]| {})
}

/// [`mc_mi_vector`] with the orthogonal matrix `rotation` (row-major,
/// `N x N`) applied to every signal and noise draw.
pub fn mc_mi_vector_rotated(
    set: &SphereSet,
    params: &ChannelParams,
    samples: usize,
    seed: u64,
    rotation: &[f64],
) -> Result<McEstimate> {
    let n = params.dims();
    if rotation.len() != n * n {
        return Err(Error::InvalidArgument(format!("rotation must be {n}x{n}")));
    }
    for i in 0..n {
        for j in 0..n {
            let dot: f64 = (0..n)
                .map(|k| rotation[i * n + k] * rotation[j * n + k])
                .sum();
            let target = if i == j { 1.0 } else { 0.0 };
            if (dot - target).abs() > 1e-12 {
                return domain("rotation matrix is not orthogonal");
            }
        }
    }
    vector_estimator(set, params, samples, seed, |v: &mut [f64]| {
        let src = v.to_vec();
        for (i, out) in v.iter_mut().enumerate() {
            *out = (0..n).map(|k| rotation[i * n + k] * src[k]).sum();
        }
    })
}

fn vector_estimator<T>(
    set: &SphereSet,
    params: &ChannelParams,
    samples: usize,
    seed: u64,
    transform: T,
) -> Result<McEstimate>
where
    T: Fn(&mut [f64]) + Sync,
{
    let dims = params.dims();
    let n = dims as f64;
    let sigma = params.sigma();
    let var = sigma * sigma;
    let mixture = RadialMixture::new(set, params);
    let log_area = log_area_constant(dims);
    let log_noise_norm = 0.5 * n * (2.0 * PI * var).ln();
    let radii = set.radii();
    stratified(set.probs(), samples, seed, dims, |rng, k, s| {
        fill_on_sphere(radii[k], &mut s.x, rng);
        fill_normal(sigma, &mut s.noise, rng);
        // the noise norm is rotation invariant; take it before the transform
        let noise2: f64 = s.noise.iter().map(|z| z * z).sum();
        transform(&mut s.x);
        transform(&mut s.noise);
        let y2: f64 =
            s.x.iter()
                .zip(&s.noise)
                .map(|(x, z)| (x + z) * (x + z))
                .sum();
        let y = y2.sqrt();
        let log_cond = -noise2 / (2.0 * var) - log_noise_norm;
        let log_out = mixture.log_density(y / sigma) - sigma.ln() - (log_area + (n - 1.0) * y.ln());
        // |N|^2 / (2 sigma^2) is Gamma(N/2, 1): mean N/2 exactly
        (log_cond - log_out, noise2 / (2.0 * var) - 0.5 * n)
    })
}

/// `-E[log2(f(R~) / R~^{N-1})]` plus the closed-form constants, with
/// `R~ = ||X + N|| / sigma` simulated directly.
pub fn mc_mi_radial(
    set: &SphereSet,
    params: &ChannelParams,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    let dims = params.dims();
    let n = dims as f64;
    let sigma = params.sigma();
    let mixture = RadialMixture::new(set, params);
    let constant = LN_2 - log_gamma(0.5 * n)? - 0.5 * n * (2.0 * std::f64::consts::E).ln();
    let radii = set.radii();
    stratified(set.probs(), samples, seed, dims, |rng, k, s| {
        fill_on_sphere(radii[k], &mut s.x, rng);
        fill_normal(sigma, &mut s.noise, rng);
        let y2: f64 =
            s.x.iter()
                .zip(&s.noise)
                .map(|(x, z)| (x + z) * (x + z))
                .sum();
        let r = y2.sqrt() / sigma;
        (
            -(mixture.log_density(r) - (n - 1.0) * r.ln()) + constant,
            0.0,
        )
    })
}

/// Piecewise-linear inverse CDF of a radial law on `cells` equal cells
/// (plus the law's breakpoints). Exact for laws that are constant on each
/// cell.
struct RadiusSampler {
    edges: Vec<f64>,
    cdf: Vec<f64>,
}

impl RadiusSampler {
    fn new(law: &RadialLaw, cells: usize) -> Result<Self> {
        let upper = law.support_upper();
        let mut edges: Vec<f64> = (0..=cells)
            .map(|i| upper * i as f64 / cells as f64)
            .collect();
        edges.extend_from_slice(law.breakpoints());
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        let mut cdf = Vec::with_capacity(edges.len());
        cdf.push(0.0);
        let mut acc = 0.0;
        for w in edges.windows(2) {
            acc +=
                integrate_adaptive(|s| law.density(s), w[0], w[1], &[], 1e-12, 1e-16, 200)?.value;
            cdf.push(acc);
        }
        if acc.is_nan() || acc <= 0.0 {
            return domain("radial law has no mass");
        }
        cdf.iter_mut().for_each(|c| *c /= acc);
        Ok(Self { edges, cdf })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let i = self
            .cdf
            .partition_point(|&c| c <= u)
            .clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.edges[i - 1] + t * (self.edges[i] - self.edges[i - 1])
    }
}

/// Vector estimator for a general radial law. The output density comes
/// from [`marginal_radial_pdf`] at every sample, so this is slow (a nested
/// quadrature per draw) but independent of the MI quadrature grid.
pub fn mc_mi_vector_law(
    law: &RadialLaw,
    params: &ChannelParams,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    let dims = params.dims();
    let n = dims as f64;
    let sigma = params.sigma();
    let var = sigma * sigma;
    let sampler = RadiusSampler::new(law, 4096)?;
    let log_area = log_area_constant(dims);
    let log_noise_norm = 0.5 * n * (2.0 * PI * var).ln();
    let est = stratified(&[1.0], samples, seed, dims, |rng, _, s| {
        let radius = sampler.sample(rng);
        if radius > 0.0 {
            fill_on_sphere(radius, &mut s.x, rng);
        } else {
            s.x.iter_mut().for_each(|c| *c = 0.0);
        }
        fill_normal(sigma, &mut s.noise, rng);
        let mut noise2 = 0.0;
        let mut y2 = 0.0;
        for (x, z) in s.x.iter().zip(&s.noise) {
            noise2 += z * z;
            y2 += (x + z) * (x + z);
        }
        let y = y2.sqrt();
        let Ok(f) = marginal_radial_pdf(law, params, y / sigma) else {
            return (f64::NAN, 0.0);
        };
        let log_cond = -noise2 / (2.0 * var) - log_noise_norm;
        let log_out = f.ln() - sigma.ln() - (log_area + (n - 1.0) * y.ln());
        (log_cond - log_out, noise2 / (2.0 * var) - 0.5 * n)
    })?;
    if !est.estimate.is_finite() {
        return Err(Error::Quadrature(
            "marginal density failed at a sampled point".into(),
        ));
    }
    Ok(est)
}

/// Gaussian-input estimator: `X ~ N(0, (2 sigma^2 A / N) I)`. Its mean is
/// the AWGN capacity.
pub fn mc_mi_gaussian_input(
    params: &ChannelParams,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    let dims = params.dims();
    let n = dims as f64;
    let sigma = params.sigma();
    let var = sigma * sigma;
    let signal_var = params.signal_power() / n;
    let out_var = var + signal_var;
    let signal_sd = signal_var.sqrt();
    let norm_diff = 0.5 * n * (out_var / var).ln();
    stratified(&[1.0], samples, seed, dims, |rng, _, s| {
        fill_normal(signal_sd, &mut s.x, rng);
        fill_normal(sigma, &mut s.noise, rng);
        let mut noise2 = 0.0;
        let mut y2 = 0.0;
        for (x, z) in s.x.iter().zip(&s.noise) {
            noise2 += z * z;
            y2 += (x + z) * (x + z);
        }
        (
            -noise2 / (2.0 * var) + y2 / (2.0 * out_var) + norm_diff,
            0.0,
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::uniform_sphere_set;

    #[test]
    fn sphere_samples_have_the_right_norm() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..100 {
            let v = sample_on_sphere(3.0, 4, &mut rng).unwrap();
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            assert!((norm / 3.0 - 1.0).abs() < 1e-12);
        }
        assert!(sample_on_sphere(0.0, 2, &mut rng).is_err());
        assert!(sample_on_sphere(1.0, 0, &mut rng).is_err());
    }

    #[test]
    fn one_dimensional_sphere_is_two_points() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let mut plus = 0;
        let n = 10_000;
        for _ in 0..n {
            let v = sample_on_sphere(2.5, 1, &mut rng).unwrap();
            assert!((v[0].abs() - 2.5).abs() < 1e-15);
            plus += usize::from(v[0] > 0.0);
        }
        // binomial(n, 1/2): 3 sigma = 150
        assert!((plus as f64 - 5000.0).abs() < 150.0, "{plus}");
    }

    #[test]
    fn sphere_samples_are_centred() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let n = 100_000;
        let radius = 2.0;
        let mut sum = [0.0; 2];
        for _ in 0..n {
            let v = sample_on_sphere(radius, 2, &mut rng).unwrap();
            sum[0] += v[0];
            sum[1] += v[1];
        }
        let bound = 3.0 * radius / (2.0 * n as f64).sqrt();
        for s in sum {
            assert!((s / n as f64).abs() < bound);
        }
    }

    #[test]
    fn allocation_is_exact_and_proportional() {
        let c = allocate(&[0.5, 0.25, 0.25], 1000);
        assert_eq!(c.iter().sum::<usize>(), 1000);
        assert_eq!(c, vec![499, 251, 250]);
        let c = allocate(&[1.0 / 3.0; 3], 1001);
        assert_eq!(c.iter().sum::<usize>(), 1001);
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let cs: Vec<f64> = (0..100).map(|i| (i as f64 * 0.11).cos()).collect();
        let mut all = Moments::default();
        xs.iter().zip(&cs).for_each(|(&x, &c)| all.push(x, c));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..37]
            .iter()
            .zip(&cs[..37])
            .for_each(|(&x, &c)| a.push(x, c));
        xs[37..]
            .iter()
            .zip(&cs[37..])
            .for_each(|(&x, &c)| b.push(x, c));
        let m = a.merge(b);
        assert!((m.mean - all.mean).abs() < 1e-14 && (m.m2 - all.m2).abs() < 1e-12);
        assert!((m.m2_c - all.m2_c).abs() < 1e-12 && (m.co - all.co).abs() < 1e-12);
        let (ma, va) = m.adjusted();
        let (mb, vb) = all.adjusted();
        assert!((ma - mb).abs() < 1e-13 && (va - vb).abs() < 1e-15);
    }

    #[test]
    fn perfect_control_removes_all_variance() {
        let mut m = Moments::default();
        for i in 0..50 {
            let c = (i as f64 * 0.7).sin();
            m.push(3.0 + 2.0 * c, c);
        }
        let (mean, var) = m.adjusted();
        assert!((mean - 3.0).abs() < 1e-12 && var < 1e-25);
    }

    #[test]
    fn estimates_are_reproducible() {
        let p = ChannelParams::new(2, 1.0, 10.0).unwrap();
        let set = uniform_sphere_set(2, &p).unwrap();
        let a = mc_mi_vector(&set, &p, 5000, 7).unwrap();
        let b = mc_mi_vector(&set, &p, 5000, 7).unwrap();
        assert_eq!(a, b);
        let c = mc_mi_vector(&set, &p, 5000, 8).unwrap();
        assert_ne!(a.estimate, c.estimate);
    }

    #[test]
    fn rejects_small_sample_counts() {
        let p = ChannelParams::new(2, 1.0, 10.0).unwrap();
        let set = uniform_sphere_set(2, &p).unwrap();
        assert!(mc_mi_vector(&set, &p, 999, 1).is_err());
        assert!(mc_mi_radial(&set, &p, 10, 1).is_err());
    }

    #[test]
    fn zero_snr_limit() {
        for dims in [2, 4] {
            let p = ChannelParams::new(dims, 1.0, 1e-6).unwrap();
            let set = uniform_sphere_set(2, &p).unwrap();
            let e = mc_mi_vector(&set, &p, 20_000, 3).unwrap();
            assert!(e.estimate.abs() <= 3.0 * e.stderr + 1e-9, "{e:?}");
        }
    }

    #[test]
    fn gaussian_input_reaches_capacity() {
        let p = ChannelParams::new(4, 1.0, 5.0).unwrap();
        let e = mc_mi_gaussian_input(&p, 200_000, 11).unwrap();
        let c = crate::mi::awgn_capacity(4, 5.0).unwrap();
        assert!((e.estimate - c).abs() <= 3.0 * e.stderr, "{e:?} vs {c}");
    }

    #[test]
    fn rotation_must_be_orthogonal() {
        let p = ChannelParams::new(2, 1.0, 3.0).unwrap();
        let set = uniform_sphere_set(1, &p).unwrap();
        assert!(mc_mi_vector_rotated(&set, &p, 2000, 1, &[1.0, 0.1, 0.0, 1.0]).is_err());
        assert!(mc_mi_vector_rotated(&set, &p, 2000, 1, &[1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn signed_permutation_rotation_leaves_estimate_unchanged() {
        let p = ChannelParams::new(4, 1.0, 20.0).unwrap();
        let set = uniform_sphere_set(3, &p).unwrap();
        #[rustfmt::skip]
        let perm = [
            0.0, -1.0, 0.0, 0.0,
            1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
            0.0, 0.0, -1.0, 0.0,
        ];
        let a = mc_mi_vector(&set, &p, 8000, 5).unwrap();
        let b = mc_mi_vector_rotated(&set, &p, 8000, 5, &perm).unwrap();
        // exact transform; only the summation order of |y|^2 differs
        assert!(
            (a.estimate - b.estimate).abs() <= 1e-13 * a.estimate,
            "{a:?} {b:?}"
        );
        assert!(
            (a.stderr - b.stderr).abs() <= 1e-10 * a.stderr,
            "{a:?} {b:?}"
        );
    }

    #[test]
    fn radius_sampler_inverts_a_uniform_law_exactly() {
        let law = RadialLaw::uniform(0.0, 3.0).unwrap();
        let sampler = RadiusSampler::new(&law, 64).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let n = 100_000;
        let v: Vec<f64> = (0..n).map(|_| sampler.sample(&mut rng)).collect();
        assert!(v.iter().all(|&s| (0.0..=3.0).contains(&s)));
        let mean = v.iter().sum::<f64>() / n as f64;
        // sd of U(0, 3) is 3 / sqrt(12)
        assert!(
            (mean - 1.5).abs() < 3.0 * 3.0 / (12.0 * n as f64).sqrt(),
            "{mean}"
        );
    }

    #[test]
    fn law_estimator_matches_sphere_estimator_for_a_narrow_bump() {
        let p = ChannelParams::new(2, 1.0, 10.0).unwrap();
        let set = uniform_sphere_set(1, &p).unwrap();
        let law = RadialLaw::bump(set.radii()[0], 1e-3).unwrap();
        let a = mc_mi_vector(&set, &p, 5000, 8).unwrap();
        let b = mc_mi_vector_law(&law, &p, 5000, 9).unwrap();
        assert!(
            (a.estimate - b.estimate).abs() <= 3.0 * a.stderr.hypot(b.stderr),
            "{a:?} {b:?}"
        );
    }

    #[test]
    fn general_rotation_changes_estimate_only_by_rounding() {
        let p = ChannelParams::new(2, 1.0, 50.0).unwrap();
        let set = uniform_sphere_set(4, &p).unwrap();
        let (c, sn) = (0.3_f64.cos(), 0.3_f64.sin());
        let a = mc_mi_vector(&set, &p, 8000, 12).unwrap();
        let b = mc_mi_vector_rotated(&set, &p, 8000, 12, &[c, -sn, sn, c]).unwrap();
        assert!(
            (a.estimate - b.estimate).abs() <= 1e-10 * a.estimate,
            "{a:?} {b:?}"
        );
    }
}
