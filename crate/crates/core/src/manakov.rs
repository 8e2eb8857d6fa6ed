//! Split-step propagation of the stochastic Manakov equations and a
//! statistical test of their invariance under Jones (2x2 unitary) rotations.
//!
//! Conventions: the field is periodic in `t`; the spectrum uses the
//! unnormalized forward FFT with angular frequencies
//! `omega_m = 2 pi m' / (M dt)`, `m' = m` for `m < M/2` and `m - M`
//! otherwise. A dispersion step of length `h` multiplies bin `m` by
//! `exp(i beta2/2 omega_m^2 h)`; a Kerr step multiplies both polarizations by
//! `exp(i gamma 8/9 (|Ex|^2 + |Ey|^2) h)`. Noise is added once per segment as
//! `i (n_r + i n_i)` with `n_r, n_i ~ N(0, noise_psd h / dt)` independently
//! per sample and polarization.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{domain, Error, Result};

pub const MANAKOV_KERR_FACTOR: f64 = 8.0 / 9.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberParams {
    /// Group-velocity dispersion, s^2/m.
    pub beta2: f64,
    /// Kerr coefficient, 1/(W m).
    pub gamma: f64,
    /// Fiber length, m.
    pub length: f64,
    pub steps: usize,
    /// White-noise spectral density per polarization and quadrature.
    pub noise_psd: f64,
}

impl FiberParams {
    pub fn new(beta2: f64, gamma: f64, length: f64, steps: usize, noise_psd: f64) -> Result<Self> {
        let p = Self {
            beta2,
            gamma,
            length,
            steps,
            noise_psd,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.beta2.is_finite() || !self.gamma.is_finite() {
            return domain("beta2 and gamma must be finite");
        }
        if !self.length.is_finite() || self.length <= 0.0 {
            return domain(format!("fiber length must be > 0, got {}", self.length));
        }
        if self.steps == 0 {
            return domain("steps must be >= 1");
        }
        if !self.noise_psd.is_finite() || self.noise_psd < 0.0 {
            return domain(format!("noise_psd must be >= 0, got {}", self.noise_psd));
        }
        Ok(())
    }

    pub fn noiseless(&self) -> Self {
        Self {
            noise_psd: 0.0,
            ..*self
        }
    }
}

/// Sampled dual-polarization field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    ex: Vec<Complex64>,
    ey: Vec<Complex64>,
    dt: f64,
}

impl FieldGrid {
    pub fn new(ex: Vec<Complex64>, ey: Vec<Complex64>, dt: f64) -> Result<Self> {
        if ex.len() != ey.len() {
            return Err(Error::InvalidArgument(format!(
                "polarizations differ in length: {} vs {}",
                ex.len(),
                ey.len()
            )));
        }
        if ex.len() < 8 {
            return Err(Error::InvalidArgument(format!(
                "need at least 8 samples, got {}",
                ex.len()
            )));
        }
        if !dt.is_finite() || dt <= 0.0 {
            return domain(format!("dt must be finite and > 0, got {dt}"));
        }
        Ok(Self { ex, ey, dt })
    }

    pub fn ex(&self) -> &[Complex64] {
        &self.ex
    }

    pub fn ey(&self) -> &[Complex64] {
        &self.ey
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.ex.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ex.is_empty()
    }

    /// `sum (|Ex|^2 + |Ey|^2) dt`.
    pub fn energy(&self) -> f64 {
        self.ex
            .iter()
            .zip(&self.ey)
            .map(|(x, y)| x.norm_sqr() + y.norm_sqr())
            .sum::<f64>()
            * self.dt
    }

    /// Pointwise 4-D norm `||E(t)||`.
    pub fn amplitudes(&self) -> impl Iterator<Item = f64> + '_ {
        self.ex
            .iter()
            .zip(&self.ey)
            .map(|(x, y)| (x.norm_sqr() + y.norm_sqr()).sqrt())
    }

    /// Euclidean distance between two fields of equal shape.
    pub fn distance(&self, other: &Self) -> f64 {
        let d: f64 = self
            .ex
            .iter()
            .zip(&other.ex)
            .chain(self.ey.iter().zip(&other.ey))
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        d.sqrt()
    }

    /// Euclidean norm over both polarizations.
    pub fn norm(&self) -> f64 {
        self.ex
            .iter()
            .chain(&self.ey)
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    fn check_finite(&self) -> Result<()> {
        if self
            .ex
            .iter()
            .chain(&self.ey)
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return domain("field contains non-finite samples");
        }
        Ok(())
    }
}

/// A 2x2 complex unitary acting on `(Ex, Ey)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesUnitary {
    u: [[Complex64; 2]; 2],
}

impl JonesUnitary {
    pub fn new(u: [[Complex64; 2]; 2]) -> Result<Self> {
        let j = Self { u };
        let defect = j.unitarity_defect();
        if defect.is_nan() || defect > 1e-12 {
            return domain(format!("matrix is not unitary (defect {defect:.3e})"));
        }
        Ok(j)
    }

    pub fn identity() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Self {
            u: [[o, z], [z, o]],
        }
    }

    /// Exchanges the two polarizations.
    pub fn swap() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Self {
            u: [[z, o], [o, z]],
        }
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        self.u
    }

    /// Conjugate transpose.
    pub fn inverse(&self) -> Self {
        let u = &self.u;
        Self {
            u: [
                [u[0][0].conj(), u[1][0].conj()],
                [u[0][1].conj(), u[1][1].conj()],
            ],
        }
    }

    /// Largest entry of `|u^H u - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let u = &self.u;
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let g = u[0][i].conj() * u[0][j] + u[1][i].conj() * u[1][j];
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }

    fn apply(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        let u = &self.u;
        (u[0][0] * x + u[0][1] * y, u[1][0] * x + u[1][1] * y)
    }
}

/// Applies `u` to every time sample.
pub fn apply_jones_unitary(field: &FieldGrid, u: &JonesUnitary) -> FieldGrid {
    let (ex, ey) = field
        .ex
        .iter()
        .zip(&field.ey)
        .map(|(&x, &y)| u.apply(x, y))
        .unzip();
    FieldGrid {
        ex,
        ey,
        dt: field.dt,
    }
}

/// Haar-distributed 2x2 unitary: QR of a complex Gaussian matrix with the
/// diagonal of R made real and positive.
pub fn random_haar_unitary(seed: u64) -> JonesUnitary {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut draw = || Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    let a = [draw(), draw()];
    let b = [draw(), draw()];
    let norm = |v: &[Complex64; 2]| (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let na = norm(&a);
    let q1 = [a[0] / na, a[1] / na];
    let proj = q1[0].conj() * b[0] + q1[1].conj() * b[1];
    let mut q2 = [b[0] - proj * q1[0], b[1] - proj * q1[1]];
    // second Gram-Schmidt pass
    let proj = q1[0].conj() * q2[0] + q1[1].conj() * q2[1];
    q2 = [q2[0] - proj * q1[0], q2[1] - proj * q1[1]];
    let nb = norm(&q2);
    let q2 = [q2[0] / nb, q2[1] / nb];
    JonesUnitary {
        u: [[q1[0], q2[0]], [q1[1], q2[1]]],
    }
}

/// Symmetric split-step integrator with precomputed FFT plans.
pub struct Propagator {
    fiber: FiberParams,
    dt: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    half_dispersion: Vec<Complex64>,
}

impl Propagator {
    pub fn new(samples: usize, dt: f64, fiber: FiberParams) -> Result<Self> {
        fiber.validate()?;
        if !samples.is_power_of_two() || samples < 8 {
            return Err(Error::InvalidArgument(format!(
                "grid length must be a power of two >= 8, got {samples}"
            )));
        }
        if !dt.is_finite() || dt <= 0.0 {
            return domain(format!("dt must be finite and > 0, got {dt}"));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(samples);
        let inverse = planner.plan_fft_inverse(samples);
        let h = fiber.length / fiber.steps as f64;
        let scale = 1.0 / samples as f64;
        let half_dispersion = (0..samples)
            .map(|m| {
                let k = if m < samples / 2 {
                    m as f64
                } else {
                    m as f64 - samples as f64
                };
                let omega = 2.0 * PI * k / (samples as f64 * dt);
                // fold the inverse-FFT normalization into the phase factor
                Complex64::from_polar(1.0, 0.5 * fiber.beta2 * omega * omega * 0.5 * h) * scale
            })
            .collect();
        Ok(Self {
            fiber,
            dt,
            forward,
            inverse,
            half_dispersion,
        })
    }

    fn disperse(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, scratch);
        for (z, p) in buf.iter_mut().zip(&self.half_dispersion) {
            *z *= p;
        }
        self.inverse.process_with_scratch(buf, scratch);
    }

    pub fn propagate(&self, field: &FieldGrid, seed: u64) -> Result<FieldGrid> {
        if field.len() != self.half_dispersion.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} samples, propagator expects {}",
                field.len(),
                self.half_dispersion.len()
            )));
        }
        if (field.dt - self.dt).abs() > 1e-12 * self.dt {
            return Err(Error::InvalidArgument(
                "field dt does not match propagator".into(),
            ));
        }
        field.check_finite()?;
        let mut ex = field.ex.clone();
        let mut ey = field.ey.clone();
        let mut scratch = vec![
            Complex64::default();
            self.forward
                .get_inplace_scratch_len()
                .max(self.inverse.get_inplace_scratch_len())
        ];
        let h = self.fiber.length / self.fiber.steps as f64;
        let kerr = self.fiber.gamma * MANAKOV_KERR_FACTOR * h;
        let noise_sd = (self.fiber.noise_psd * h / self.dt).sqrt();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let linear = self.fiber.beta2 != 0.0;
        for _ in 0..self.fiber.steps {
            if linear {
                self.disperse(&mut ex, &mut scratch);
                self.disperse(&mut ey, &mut scratch);
            }
            if kerr != 0.0 {
                for (x, y) in ex.iter_mut().zip(ey.iter_mut()) {
                    let rot = Complex64::from_polar(1.0, kerr * (x.norm_sqr() + y.norm_sqr()));
                    *x *= rot;
                    *y *= rot;
                }
            }
            if linear {
                self.disperse(&mut ex, &mut scratch);
                self.disperse(&mut ey, &mut scratch);
            }
            if noise_sd > 0.0 {
                for z in ex.iter_mut().chain(ey.iter_mut()) {
                    let nr: f64 = rng.sample(StandardNormal);
                    let ni: f64 = rng.sample(StandardNormal);
                    // i * (nr + i ni)
                    *z += Complex64::new(-ni, nr) * noise_sd;
                }
            }
        }
        Ok(FieldGrid {
            ex,
            ey,
            dt: self.dt,
        })
    }
}

/// One-shot split-step propagation over `fiber`.
pub fn split_step_propagate(
    field: &FieldGrid,
    fiber: &FiberParams,
    seed: u64,
) -> Result<FieldGrid> {
    Propagator::new(field.len(), field.dt, *fiber)?.propagate(field, seed)
}

/// Field whose every time sample is a point drawn uniformly on one of
/// `radii.len()` equiprobable 4-D spheres (radii in sqrt(W)).
pub fn random_multisphere_field(
    samples: usize,
    dt: f64,
    radii: &[f64],
    seed: u64,
) -> Result<FieldGrid> {
    if radii.is_empty() || radii.iter().any(|r| !r.is_finite() || *r <= 0.0) {
        return domain("radii must be non-empty, finite and > 0");
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut ex = Vec::with_capacity(samples);
    let mut ey = Vec::with_capacity(samples);
    let mut v = [0.0f64; 4];
    for _ in 0..samples {
        let r = radii[rng.random_range(0..radii.len())];
        loop {
            v.iter_mut().for_each(|c| *c = rng.sample(StandardNormal));
            let n2: f64 = v.iter().map(|c| c * c).sum();
            if n2 > 0.0 {
                let s = r / n2.sqrt();
                ex.push(Complex64::new(v[0] * s, v[1] * s));
                ey.push(Complex64::new(v[2] * s, v[3] * s));
                break;
            }
        }
    }
    FieldGrid::new(ex, ey, dt)
}

/// Per-trial scalar observables of an output field.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Observables {
    energy: f64,
    moments: [f64; 4],
    power_x: f64,
    power_y: f64,
}

impl Observables {
    fn of(field: &FieldGrid) -> Self {
        let m = field.len() as f64;
        let mut moments = [0.0; 4];
        for a in field.amplitudes() {
            let mut p = 1.0;
            for mo in moments.iter_mut() {
                p *= a;
                *mo += p;
            }
        }
        moments.iter_mut().for_each(|v| *v /= m);
        Self {
            energy: field.energy(),
            moments,
            power_x: field.ex.iter().map(|z| z.norm_sqr()).sum::<f64>() / m,
            power_y: field.ey.iter().map(|z| z.norm_sqr()).sum::<f64>() / m,
        }
    }

    fn invariant(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("energy", self.energy),
            ("amplitude_moment_1", self.moments[0]),
            ("amplitude_moment_2", self.moments[1]),
            ("amplitude_moment_3", self.moments[2]),
            ("amplitude_moment_4", self.moments[3]),
        ]
    }

    fn with_polarization(&self) -> Vec<(&'static str, f64)> {
        let mut v = self.invariant();
        v.push(("power_x", self.power_x));
        v.push(("power_y", self.power_y));
        v
    }
}

/// One statistic compared between two output ensembles.
#[derive(Debug, Clone, PartialEq)]
pub struct StatComparison {
    /// `"rotated"` (propagate(u e) vs propagate(e)) or `"rotated_back"`
    /// (u^-1 propagate(u e) vs propagate(e)).
    pub ensemble: &'static str,
    pub statistic: &'static str,
    pub mean_reference: f64,
    pub mean_test: f64,
    /// Difference of means in units of the combined standard error.
    pub delta_sigma: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub trials: usize,
    pub threshold_sigma: f64,
    pub comparisons: Vec<StatComparison>,
    /// `||propagate(u e) - u propagate(e)|| / ||e||` without noise.
    pub equivariance_residual: f64,
    /// Relative energy change of a noiseless propagation.
    pub energy_residual: f64,
}

impl InvarianceReport {
    pub fn passed(&self) -> bool {
        self.comparisons.iter().all(|c| c.pass)
    }
}

pub const INVARIANCE_THRESHOLD_SIGMA: f64 = 3.0;
pub const MIN_TRIALS: usize = 100;

fn trial_seed(seed: u64, trial: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed.wrapping_add((trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn compare(
    ensemble: &'static str,
    reference: &[Vec<(&'static str, f64)>],
    test: &[Vec<(&'static str, f64)>],
) -> Vec<StatComparison> {
    let stats = reference[0].len();
    (0..stats)
        .map(|i| {
            let a: Vec<f64> = reference.iter().map(|r| r[i].1).collect();
            let b: Vec<f64> = test.iter().map(|r| r[i].1).collect();
            let (ma, sa) = mean_and_stderr(&a);
            let (mb, sb) = mean_and_stderr(&b);
            let combined = (sa * sa + sb * sb).sqrt();
            let diff = mb - ma;
            let delta_sigma = if diff == 0.0 { 0.0 } else { diff / combined };
            StatComparison {
                ensemble,
                statistic: reference[0][i].0,
                mean_reference: ma,
                mean_test: mb,
                delta_sigma,
                pass: delta_sigma.abs() <= INVARIANCE_THRESHOLD_SIGMA,
            }
        })
        .collect()
}

/// Propagates every input `e` (cycled over `trials`) and its rotation `u e`
/// with the same per-trial noise seed, then compares rotation-invariant
/// observables of `propagate(e)` and `propagate(u e)`, and polarization
/// resolved observables of `propagate(e)` and `u^-1 propagate(u e)`.
pub fn invariance_test(
    inputs: &[FieldGrid],
    fiber: &FiberParams,
    u: &JonesUnitary,
    trials: usize,
    seed: u64,
) -> Result<InvarianceReport> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    let first = inputs
        .first()
        .ok_or_else(|| Error::InvalidArgument("input ensemble is empty".into()))?;
    if inputs
        .iter()
        .any(|f| f.len() != first.len() || f.dt != first.dt)
    {
        return Err(Error::InvalidArgument(
            "ensemble fields must share length and dt".into(),
        ));
    }
    let noisy = Propagator::new(first.len(), first.dt, *fiber)?;
    let quiet = Propagator::new(first.len(), first.dt, fiber.noiseless())?;
    let u_inv = u.inverse();

    let plain = quiet.propagate(first, 0)?;
    let rotated = quiet.propagate(&apply_jones_unitary(first, u), 0)?;
    let equivariance_residual = rotated.distance(&apply_jones_unitary(&plain, u)) / first.norm();
    let energy_residual = (plain.energy() / first.energy() - 1.0).abs();

    let outcomes: Vec<(Observables, Observables, Observables)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let e = &inputs[t % inputs.len()];
            let s = trial_seed(seed, t);
            let a = noisy.propagate(e, s)?;
            let b = noisy.propagate(&apply_jones_unitary(e, u), s)?;
            let c = apply_jones_unitary(&b, &u_inv);
            Ok((
                Observables::of(&a),
                Observables::of(&b),
                Observables::of(&c),
            ))
        })
        .collect::<Result<_>>()?;

    let reference: Vec<_> = outcomes.iter().map(|o| o.0.invariant()).collect();
    let rotated: Vec<_> = outcomes.iter().map(|o| o.1.invariant()).collect();
    let reference_pol: Vec<_> = outcomes.iter().map(|o| o.0.with_polarization()).collect();
    let back: Vec<_> = outcomes.iter().map(|o| o.2.with_polarization()).collect();
    let mut comparisons = compare("rotated", &reference, &rotated);
    comparisons.extend(compare("rotated_back", &reference_pol, &back));

    Ok(InvarianceReport {
        trials,
        threshold_sigma: INVARIANCE_THRESHOLD_SIGMA,
        comparisons,
        equivariance_residual,
        energy_residual,
    })
}
