//! Radial laws of the channel input and output.
//!
//! Radii on the output side are normalized by the noise standard
//! deviation: `r_tilde = ||Y|| / sigma`. Densities are exchanged as natural
//! logarithms.

use std::f64::consts::LN_2;
use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::quad::integrate_adaptive;
use crate::specfun::{log_bessel_i_scaled_unchecked, log_gamma, log_sum_exp};

/// Below this normalized input radius the chi kernel switches to the
/// central chi form.
pub const CENTRAL_SEAM: f64 = 1e-12;

/// AWGN channel `Y = X + N` in `dims` real dimensions.
///
/// `sigma` is the noise standard deviation per real dimension
/// (`sigma^2 = N0 / 2`) and `snr` is `A = E[||X||^2] / N0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    dims: usize,
    sigma: f64,
    snr: f64,
}

impl ChannelParams {
    pub fn new(dims: usize, sigma: f64, snr: f64) -> Result<Self> {
        if dims < 2 {
            return domain(format!("dims must be >= 2, got {dims}"));
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return domain(format!("sigma must be finite and > 0, got {sigma}"));
        }
        if !snr.is_finite() || snr < 0.0 {
            return domain(format!("snr must be finite and >= 0, got {snr}"));
        }
        Ok(Self { dims, sigma, snr })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    /// `E[||X||^2] = 2 sigma^2 A`.
    pub fn signal_power(&self) -> f64 {
        2.0 * self.sigma * self.sigma * self.snr
    }
}

/// The discrete radial law of a multisphere input: sphere `k` has radius
/// `radii[k]` and probability `probs[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereSet {
    radii: Vec<f64>,
    probs: Vec<f64>,
}

impl SphereSet {
    pub fn new(radii: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::InvalidArgument(
                "a sphere set needs at least one sphere".into(),
            ));
        }
        if radii.len() != probs.len() {
            return Err(Error::InvalidArgument(format!(
                "{} radii but {} probabilities",
                radii.len(),
                probs.len()
            )));
        }
        if radii.iter().any(|r| !r.is_finite() || *r <= 0.0) {
            return domain("radii must be finite and > 0");
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return domain("radii must be strictly increasing");
        }
        if probs.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return domain("probabilities must be finite and > 0");
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return domain(format!("probabilities sum to {total}, expected 1"));
        }
        Ok(Self { radii, probs })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn outer_radius(&self) -> f64 {
        *self.radii.last().expect("sphere sets are non-empty")
    }

    /// Scales every radius by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.radii.iter().map(|r| r * factor).collect(),
            self.probs.clone(),
        )
    }

    /// Rescales the radii so that the average power equals the signal power
    /// of `params`.
    pub fn scaled_to(&self, params: &ChannelParams) -> Result<Self> {
        if params.snr() == 0.0 {
            return domain("cannot scale a sphere set to zero signal power");
        }
        self.scaled((params.signal_power() / average_power(self)).sqrt())
    }
}

/// `K` equiprobable spheres at radii `k sigma Delta`, with the spacing chosen
/// so that `E[||X||^2] = 2 sigma^2 A`.
pub fn uniform_sphere_set(rings: usize, params: &ChannelParams) -> Result<SphereSet> {
    if rings == 0 {
        return Err(Error::InvalidArgument("need at least one sphere".into()));
    }
    if params.snr() == 0.0 {
        return domain("uniform sphere set at zero SNR would collapse to the origin");
    }
    let spacing = uniform_spacing(rings, params.snr());
    let k = rings as f64;
    let radii = (1..=rings)
        .map(|i| i as f64 * params.sigma() * spacing)
        .collect();
    SphereSet::new(radii, vec![1.0 / k; rings])
}

/// `Delta = sqrt(12 A / (2K^2 + 3K + 1))`.
pub fn uniform_spacing(rings: usize, snr: f64) -> f64 {
    let k = rings as f64;
    (12.0 * snr / (2.0 * k * k + 3.0 * k + 1.0)).sqrt()
}

/// `E[||X||^2] = sum_k p_k s_k^2`.
pub fn average_power(set: &SphereSet) -> f64 {
    set.radii
        .iter()
        .zip(&set.probs)
        .map(|(s, p)| p * s * s)
        .sum()
}

fn check_radius(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return domain(format!("{name} must be finite and >= 0, got {v}"));
    }
    Ok(())
}

/// ln of the N-dimensional noncentral chi kernel
/// `chi(r, s) = r^{N/2} s^{1-N/2} exp(-(r^2+s^2)/2) I_{N/2-1}(r s)`.
pub fn log_chi_kernel(r_tilde: f64, s_tilde: f64, dims: usize) -> Result<f64> {
    check_radius("r_tilde", r_tilde)?;
    check_radius("s_tilde", s_tilde)?;
    if dims < 2 {
        return domain(format!("dims must be >= 2, got {dims}"));
    }
    Ok(log_chi_kernel_unchecked(r_tilde, s_tilde, dims))
}

pub(crate) fn log_chi_kernel_unchecked(r: f64, s: f64, dims: usize) -> f64 {
    if r == 0.0 {
        return f64::NEG_INFINITY;
    }
    let n = dims as f64;
    if s < CENTRAL_SEAM {
        return log_central_chi(r, dims);
    }
    let nu = 0.5 * n - 1.0;
    let d = r - s;
    0.5 * n * r.ln() - nu * s.ln() - 0.5 * d * d + log_bessel_i_scaled_unchecked(nu, r * s)
}

/// ln of the central chi density with `dims` degrees of freedom.
pub(crate) fn log_central_chi(r: f64, dims: usize) -> f64 {
    let n = dims as f64;
    (n - 1.0) * r.ln() - 0.5 * r * r + (1.0 - 0.5 * n) * LN_2 - log_gamma(0.5 * n).unwrap_or(0.0)
}

/// ln f_{Q | ||X||}(q | s) for `Q = ||Y||^2`: noncentral chi-square with
/// `N` degrees of freedom and noise variance `sigma^2` per dimension.
pub fn log_noncentral_chi_square_pdf(q: f64, s: f64, params: &ChannelParams) -> Result<f64> {
    check_radius("q", q)?;
    check_radius("s", s)?;
    let n = params.dims() as f64;
    let var = params.sigma() * params.sigma();
    let log_two_var = (2.0 * var).ln();
    if q == 0.0 {
        // only N = 2 keeps mass density at the origin
        return Ok(if params.dims() == 2 {
            -log_two_var - s * s / (2.0 * var)
        } else {
            f64::NEG_INFINITY
        });
    }
    if s / params.sigma() < CENTRAL_SEAM {
        return Ok((0.5 * n - 1.0) * q.ln()
            - q / (2.0 * var)
            - 0.5 * n * log_two_var
            - log_gamma(0.5 * n)?);
    }
    let root = q.sqrt();
    let nu = 0.5 * n - 1.0;
    let d = root - s;
    Ok(
        -log_two_var + (0.25 * n - 0.5) * (q.ln() - 2.0 * s.ln()) - d * d / (2.0 * var)
            + log_bessel_i_scaled_unchecked(nu, s * root / var),
    )
}

/// Output radial density of a multisphere input, with the per-sphere
/// constants precomputed.
#[derive(Debug, Clone)]
pub struct RadialMixture {
    dims: usize,
    log_probs: Vec<f64>,
    centers: Vec<f64>,
}

impl RadialMixture {
    pub fn new(set: &SphereSet, params: &ChannelParams) -> Self {
        Self {
            dims: params.dims(),
            log_probs: set.probs.iter().map(|p| p.ln()).collect(),
            centers: set.radii.iter().map(|s| s / params.sigma()).collect(),
        }
    }

    /// Normalized sphere radii `s_k / sigma`.
    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// ln f_R~(r) via a max-shifted log-sum-exp over the spheres.
    pub fn log_density(&self, r_tilde: f64) -> f64 {
        let terms = self
            .log_probs
            .iter()
            .zip(&self.centers)
            .map(|(lp, &c)| lp + log_chi_kernel_unchecked(r_tilde, c, self.dims));
        let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + terms.map(|t| (t - max).exp()).sum::<f64>().ln()
    }
}

/// ln f_R~(r_tilde) = ln sum_k p_k chi(r_tilde, s_k / sigma).
pub fn log_radial_mixture(r_tilde: f64, set: &SphereSet, params: &ChannelParams) -> Result<f64> {
    check_radius("r_tilde", r_tilde)?;
    let terms: Vec<f64> = set
        .radii
        .iter()
        .zip(&set.probs)
        .map(|(s, p)| p.ln() + log_chi_kernel_unchecked(r_tilde, s / params.sigma(), params.dims()))
        .collect();
    Ok(log_sum_exp(terms.iter().copied()))
}

type DensityFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A general radial density `s -> f(s)` on `[0, support_upper]`.
///
/// The law declares its own truncation radius; nothing beyond it is
/// integrated. Optional breakpoints mark kinks or narrow features the
/// quadrature should not step over.
#[derive(Clone)]
pub struct RadialLaw {
    density: Arc<DensityFn>,
    support_upper: f64,
    breakpoints: Vec<f64>,
}

impl fmt::Debug for RadialLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialLaw")
            .field("support_upper", &self.support_upper)
            .field("breakpoints", &self.breakpoints)
            .finish_non_exhaustive()
    }
}

impl RadialLaw {
    /// Wraps `density`, checking non-negativity on a probe grid and unit
    /// mass to 1e-6.
    pub fn new(
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support_upper: f64,
        breakpoints: Vec<f64>,
    ) -> Result<Self> {
        let law = Self::unchecked(density, support_upper, breakpoints)?;
        let probes = 1000;
        for i in 0..=probes {
            let s = law.support_upper * i as f64 / probes as f64;
            let v = (law.density)(s);
            if !v.is_finite() || v < 0.0 {
                return domain(format!("radial density is {v} at s = {s}"));
            }
        }
        let mass = law.mass()?;
        if (mass - 1.0).abs() > 1e-6 {
            return domain(format!("radial density integrates to {mass}, expected 1"));
        }
        Ok(law)
    }

    pub(crate) fn unchecked(
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support_upper: f64,
        mut breakpoints: Vec<f64>,
    ) -> Result<Self> {
        if !support_upper.is_finite() || support_upper <= 0.0 {
            return domain(format!(
                "support_upper must be finite and > 0, got {support_upper}"
            ));
        }
        breakpoints.retain(|b| b.is_finite() && *b > 0.0 && *b < support_upper);
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        Ok(Self {
            density: Arc::new(density),
            support_upper,
            breakpoints,
        })
    }

    /// Radius law of an isotropic Gaussian input with per-dimension
    /// standard deviation `sigma_x`: chi with `dims` degrees of freedom.
    pub fn gaussian_input(dims: usize, sigma_x: f64) -> Result<Self> {
        if dims < 1 {
            return domain("dims must be >= 1");
        }
        if !sigma_x.is_finite() || sigma_x <= 0.0 {
            return domain(format!("sigma_x must be finite and > 0, got {sigma_x}"));
        }
        let log_norm = (1.0 - 0.5 * dims as f64) * LN_2 - log_gamma(0.5 * dims as f64)?;
        let n = dims as f64;
        let upper = sigma_x * ((n - 1.0).sqrt() + 13.0);
        Self::new(
            move |s| {
                if s <= 0.0 {
                    return if dims == 1 {
                        (log_norm - sigma_x.ln()).exp()
                    } else {
                        0.0
                    };
                }
                let r = s / sigma_x;
                ((n - 1.0) * r.ln() - 0.5 * r * r + log_norm - sigma_x.ln()).exp()
            },
            upper,
            vec![sigma_x * (n - 1.0).sqrt()],
        )
    }

    /// Uniform density on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return domain(format!("uniform law needs 0 <= lo < hi, got [{lo}, {hi}]"));
        }
        let h = 1.0 / (hi - lo);
        Self::new(
            move |s| if s >= lo && s <= hi { h } else { 0.0 },
            hi,
            vec![lo],
        )
    }

    /// Raised-cosine bump of half-width `width` centred at `center`; tends to
    /// a point mass as `width -> 0`.
    pub fn bump(center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && center >= width && center.is_finite()) {
            return domain(format!(
                "bump needs 0 < width <= center, got center {center}, width {width}"
            ));
        }
        let upper = center + width;
        Self::new(
            move |s| {
                let u = (s - center) / width;
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    (1.0 + (std::f64::consts::PI * u).cos()) / (2.0 * width)
                }
            },
            upper * (1.0 + 1e-9),
            vec![center - width, center, upper],
        )
    }

    pub fn density(&self, s: f64) -> f64 {
        if s < 0.0 || s > self.support_upper {
            0.0
        } else {
            (self.density)(s)
        }
    }

    pub fn support_upper(&self) -> f64 {
        self.support_upper
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn mass(&self) -> Result<f64> {
        self.moment(0)
    }

    /// `E[S^k]` over the declared support.
    pub fn moment(&self, k: i32) -> Result<f64> {
        let f = &self.density;
        Ok(integrate_adaptive(
            |s| if k == 0 { f(s) } else { s.powi(k) * f(s) },
            0.0,
            self.support_upper,
            &self.breakpoints,
            1e-10,
            1e-14,
            20_000,
        )?
        .value)
    }
}

/// `f_R~(r_tilde) = int f_{||X||}(s) chi(r_tilde, s / sigma) ds`, integrated to
/// relative tolerance 1e-8.
pub fn marginal_radial_pdf(law: &RadialLaw, params: &ChannelParams, r_tilde: f64) -> Result<f64> {
    check_radius("r_tilde", r_tilde)?;
    if r_tilde == 0.0 {
        return Ok(0.0);
    }
    let sigma = params.sigma();
    let dims = params.dims();
    // the kernel in s is concentrated within a few sigma of sigma * r_tilde
    let mut cuts = law.breakpoints.clone();
    cuts.extend(
        [-8.0, -3.0, 0.0, 3.0, 8.0]
            .iter()
            .map(|d| sigma * (r_tilde + d)),
    );
    let est = integrate_adaptive(
        |s| {
            let f = law.density(s);
            if f == 0.0 {
                0.0
            } else {
                f * log_chi_kernel_unchecked(r_tilde, s / sigma, dims).exp()
            }
        },
        0.0,
        law.support_upper,
        &cuts,
        1e-8,
        1e-15,
        20_000,
    )?;
    Ok(est.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_adaptive;
    use crate::specfun::log_gamma;

    fn unit(dims: usize, snr: f64) -> ChannelParams {
        ChannelParams::new(dims, 1.0, snr).unwrap()
    }

    #[test]
    fn channel_params_validation() {
        assert!(ChannelParams::new(1, 1.0, 1.0).is_err());
        assert!(ChannelParams::new(2, 0.0, 1.0).is_err());
        assert!(ChannelParams::new(2, 1.0, -1.0).is_err());
        assert!(ChannelParams::new(2, f64::NAN, 1.0).is_err());
        let p = ChannelParams::new(4, 0.7, 3.0).unwrap();
        assert_eq!(p.signal_power(), 2.0 * 0.7 * 0.7 * 3.0);
    }

    #[test]
    fn sphere_set_validation() {
        assert!(SphereSet::new(vec![], vec![]).is_err());
        assert!(SphereSet::new(vec![1.0], vec![0.5, 0.5]).is_err());
        assert!(SphereSet::new(vec![2.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(SphereSet::new(vec![1.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(SphereSet::new(vec![1.0, 2.0], vec![0.5, 0.6]).is_err());
        assert!(SphereSet::new(vec![0.0, 2.0], vec![0.5, 0.5]).is_err());
        assert!(SphereSet::new(vec![1.0, 2.0], vec![1.0, 0.0]).is_err());
        assert!(SphereSet::new(vec![1.0, 2.0], vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn uniform_sets_from_closed_form() {
        let s = uniform_sphere_set(1, &unit(2, 2.0)).unwrap();
        assert!((s.radii()[0] - 2.0).abs() < 1e-15);
        assert_eq!(s.probs(), &[1.0]);

        let s = uniform_sphere_set(2, &unit(2, 5.0)).unwrap();
        assert!((s.radii()[0] - 2.0).abs() < 1e-15 && (s.radii()[1] - 4.0).abs() < 1e-15);
        assert_eq!(s.probs(), &[0.5, 0.5]);

        let a = 10f64.powf(2.5);
        let s = uniform_sphere_set(8, &unit(2, a)).unwrap();
        let delta = (12.0 * a / 153.0).sqrt();
        for (k, r) in s.radii().iter().enumerate() {
            assert!((r - (k + 1) as f64 * delta).abs() < 1e-12);
        }
        assert!((average_power(&s) - 2.0 * a).abs() < 1e-12 * 2.0 * a);
    }

    #[test]
    fn uniform_set_rejects_zero_snr() {
        assert!(matches!(
            uniform_sphere_set(1, &unit(2, 0.0)),
            Err(Error::Domain(_))
        ));
        assert!(uniform_sphere_set(0, &unit(2, 1.0)).is_err());
    }

    #[test]
    fn average_power_examples() {
        assert_eq!(
            average_power(&SphereSet::new(vec![2.0], vec![1.0]).unwrap()),
            4.0
        );
        assert_eq!(
            average_power(&SphereSet::new(vec![2.0, 4.0], vec![0.5, 0.5]).unwrap()),
            10.0
        );
        let s = uniform_sphere_set(4, &unit(2, 7.0)).unwrap();
        assert!((average_power(&s) - 14.0).abs() < 1e-12);
    }

    #[test]
    fn chi_kernel_examples() {
        assert!((log_chi_kernel(1.0, 0.0, 2).unwrap() + 0.5).abs() < 1e-15);
        let v = log_chi_kernel(1.0, 0.0, 4).unwrap();
        assert!((v - ((-0.5f64).exp() / 2.0).ln()).abs() < 1e-14);
        assert!((v + 1.193_147_180_559_945).abs() < 1e-12);
        // e^{-1} I0(1), value from the mpmath oracle
        let v = log_chi_kernel(1.0, 1.0, 2).unwrap();
        assert!((v - 0.465_759_607_593_640_4_f64.ln()).abs() < 1e-14);
        assert_eq!(log_chi_kernel(0.0, 2.0, 2).unwrap(), f64::NEG_INFINITY);
        assert_eq!(log_chi_kernel(0.0, 0.0, 4).unwrap(), f64::NEG_INFINITY);
        assert!(log_chi_kernel(-1.0, 1.0, 2).is_err());
        assert!(log_chi_kernel(1.0, f64::NAN, 2).is_err());
    }

    #[test]
    fn chi_kernel_continuous_at_seam() {
        for dims in [2, 4] {
            for r in [0.5, 1.0, 2.0] {
                let a = log_chi_kernel(r, 1e-8, dims).unwrap();
                let b = log_chi_kernel(r, 0.0, dims).unwrap();
                assert!((a - b).abs() <= 1e-6, "dims={dims} r={r}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn chi_kernel_survives_large_arguments() {
        let v = log_chi_kernel(1e6, 1e6, 4).unwrap();
        assert!(v.is_finite());
        // near the peak the density is O(1)
        assert!(v > -2.0 && v < 0.0, "{v}");
    }

    #[test]
    fn chi_square_examples() {
        let p = unit(2, 1.0);
        let v = log_noncentral_chi_square_pdf(2.0, 0.0, &p).unwrap();
        assert!((v - ((-1.0f64).exp() / 2.0).ln()).abs() < 1e-14);
        let v = log_noncentral_chi_square_pdf(1.0, 1.0, &p).unwrap();
        let expected = (0.5 * 0.465_759_607_593_640_4_f64).ln();
        assert!((v - expected).abs() < 1e-14);
    }

    #[test]
    fn chi_square_change_of_variables() {
        let p = ChannelParams::new(4, 0.9, 1.0).unwrap();
        let (r, s) = (1.3, 0.7);
        let lhs = log_chi_kernel(r, s / p.sigma(), 4).unwrap().exp();
        let rhs = 2.0
            * 0.81
            * r
            * log_noncentral_chi_square_pdf(0.81 * r * r, s, &p)
                .unwrap()
                .exp();
        assert!((lhs / rhs - 1.0).abs() < 1e-13);
    }

    #[test]
    fn chi_square_at_origin() {
        let p2 = unit(2, 1.0);
        let v = log_noncentral_chi_square_pdf(0.0, 1.0, &p2).unwrap();
        assert!((v - (-LN_2 - 0.5)).abs() < 1e-15);
        assert_eq!(
            log_noncentral_chi_square_pdf(0.0, 1.0, &unit(4, 1.0)).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn mixture_reduces_to_single_kernel() {
        let p = ChannelParams::new(4, 0.5, 1.0).unwrap();
        let set = SphereSet::new(vec![1.7], vec![1.0]).unwrap();
        for r in [0.1, 1.0, 3.4, 9.0] {
            let a = log_radial_mixture(r, &set, &p).unwrap();
            let b = log_chi_kernel(r, 1.7 / 0.5, 4).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn two_ring_mixture_is_direct_sum() {
        let p = unit(2, 1.0);
        let set = SphereSet::new(vec![1.0, 3.0], vec![0.5, 0.5]).unwrap();
        let direct = 0.5 * log_chi_kernel(2.0, 1.0, 2).unwrap().exp()
            + 0.5 * log_chi_kernel(2.0, 3.0, 2).unwrap().exp();
        let v = log_radial_mixture(2.0, &set, &p).unwrap();
        assert!((v - direct.ln()).abs() < 1e-14);
        let cached = RadialMixture::new(&set, &p).log_density(2.0);
        assert!((cached - v).abs() < 1e-14);
    }

    #[test]
    fn mixture_normalizes() {
        let p = unit(4, 10.0);
        let set = uniform_sphere_set(4, &p).unwrap();
        let mix = RadialMixture::new(&set, &p);
        let upper = mix.centers().last().unwrap() + 15.0;
        let est = integrate_adaptive(
            |r| mix.log_density(r).exp(),
            0.0,
            upper,
            mix.centers(),
            1e-12,
            0.0,
            10_000,
        )
        .unwrap();
        assert!((est.value - 1.0).abs() < 1e-8, "{}", est.value);
    }

    #[test]
    fn kernel_normalization_and_second_moment() {
        for dims in [2, 3, 4] {
            for s in [0.0, 1.0, 10.0, 100.0] {
                let lo = (s - 15.0f64).max(0.0);
                let hi = s + 15.0;
                let cuts = [s];
                let mass = integrate_adaptive(
                    |r| log_chi_kernel(r, s, dims).unwrap().exp(),
                    lo,
                    hi,
                    &cuts,
                    1e-12,
                    0.0,
                    10_000,
                )
                .unwrap();
                let m2 = integrate_adaptive(
                    |r| r * r * log_chi_kernel(r, s, dims).unwrap().exp(),
                    lo,
                    hi,
                    &cuts,
                    1e-12,
                    0.0,
                    10_000,
                )
                .unwrap();
                assert!(
                    (mass.value - 1.0).abs() < 1e-8,
                    "dims={dims} s={s}: {}",
                    mass.value
                );
                let expect = dims as f64 + s * s;
                assert!(
                    (m2.value - expect).abs() < 1e-6 * expect.max(1.0),
                    "dims={dims} s={s}: {}",
                    m2.value
                );
            }
        }
    }

    #[test]
    fn laws_are_normalized() {
        for law in [
            RadialLaw::gaussian_input(3, 1.5).unwrap(),
            RadialLaw::uniform(0.0, 4.0).unwrap(),
            RadialLaw::bump(5.0, 0.01).unwrap(),
        ] {
            assert!((law.mass().unwrap() - 1.0).abs() < 1e-9);
        }
        assert!(RadialLaw::new(|_| 2.0, 1.0, vec![]).is_err());
        assert!(RadialLaw::new(|s| if s < 0.5 { -1.0 } else { 3.0 }, 1.0, vec![]).is_err());
    }

    #[test]
    fn marginal_of_point_mass_is_kernel() {
        let p = ChannelParams::new(2, 0.8, 1.0).unwrap();
        let s0 = 3.0;
        let law = RadialLaw::bump(s0, 1e-4).unwrap();
        for r in [1.0, 3.75, 5.0] {
            let v = marginal_radial_pdf(&law, &p, r).unwrap();
            let k = log_chi_kernel(r, s0 / 0.8, 2).unwrap().exp();
            assert!((v / k - 1.0).abs() < 1e-6, "r={r}: {v} vs {k}");
        }
    }

    #[test]
    fn marginal_of_gaussian_input_is_chi() {
        // X ~ N(0, sx^2 I_3): ||Y|| / sigma is chi with scale sqrt(sigma^2 + sx^2) / sigma
        let (sigma, sx) = (0.7, 1.3);
        let p = ChannelParams::new(3, sigma, 1.0).unwrap();
        let law = RadialLaw::gaussian_input(3, sx).unwrap();
        let c = (sigma * sigma + sx * sx).sqrt() / sigma;
        let ln_g = log_gamma(1.5).unwrap();
        for r in [0.3_f64, 1.0, 2.5, 4.0, 7.0] {
            let exact =
                (2.0 * r.ln() - r * r / (2.0 * c * c) - 3.0 * c.ln() - 0.5 * LN_2 - ln_g).exp();
            let v = marginal_radial_pdf(&law, &p, r).unwrap();
            assert!((v / exact - 1.0).abs() < 1e-7, "r={r}: {v} vs {exact}");
        }
    }

    #[test]
    fn marginal_of_zero_law_vanishes() {
        let p = unit(2, 1.0);
        let law = RadialLaw::unchecked(|_| 0.0, 5.0, vec![]).unwrap();
        for r in [0.0, 1.0, 4.0] {
            assert_eq!(marginal_radial_pdf(&law, &p, r).unwrap(), 0.0);
        }
    }
}
