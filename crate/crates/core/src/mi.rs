//! Mutual information of rotationally invariant inputs over the AWGN
//! channel, in bits per N-dimensional channel use.
//!
//! With `R~ = ||Y|| / sigma` the information reduces to a one-dimensional
//! integral,
//!
//! ```text
//! I = -int f(r) log2(f(r) / r^{N-1}) dr + log2(2 / Gamma(N/2)) - (N/2) log2(2e)
//! ```
//!
//! whose integrand is sharply peaked around every normalized sphere radius
//! at high SNR. The integral is evaluated with composite Gauss-Legendre
//! panels that are dense inside a window around each peak, and the panel
//! grid is halved until two successive estimates agree.

use std::f64::consts::{E, LN_2, PI};

use crate::error::{domain, Error, Result};
use crate::quad::{integrate_adaptive, GaussLegendre};
use crate::radial::{marginal_radial_pdf, ChannelParams, RadialLaw, RadialMixture, SphereSet};
use crate::specfun::log_gamma;

/// Gauss-Legendre points per panel.
const PANEL_ORDER: usize = 10;
/// Densities below `exp(-700)` contribute nothing to the integrand.
const LOG_DENSITY_FLOOR: f64 = -700.0;
/// Minimum distance, in normalized radius units, kept beyond the outermost
/// sphere.
const TAIL_SAFETY: f64 = 12.0;
/// Outer tolerance floor for the nested integral of `mi_rotinv`.
const ROTINV_OUTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    /// Absolute floor, in bits.
    pub abs_tol: f64,
    /// Half-width of the dense window around each peak, in `r~` units.
    pub peak_halfwidth: f64,
    /// Number of coarse panels spread over the whole range.
    pub base_panels: usize,
    pub max_refinements: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            peak_halfwidth: 8.0,
            base_panels: 64,
            max_refinements: 30,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.rel_tol) || !positive(self.abs_tol) || !positive(self.peak_halfwidth) {
            return Err(Error::InvalidArgument(format!(
                "quadrature tolerances and peak half-width must be positive: {self:?}"
            )));
        }
        if self.base_panels == 0 || self.max_refinements == 0 {
            return Err(Error::InvalidArgument(
                "base_panels and max_refinements must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiResult {
    pub bits_per_nd_use: f64,
    /// Disagreement between the last two refinement levels, in bits.
    pub error_estimate: f64,
    /// Number of integrand evaluations.
    pub evaluations: usize,
}

/// `C = (N/2) log2(1 + 2A/N)` bits per N-D use.
pub fn awgn_capacity(dims: usize, snr: f64) -> Result<f64> {
    if dims == 0 {
        return domain("dims must be >= 1");
    }
    if !snr.is_finite() || snr < 0.0 {
        return domain(format!("snr must be finite and >= 0, got {snr}"));
    }
    let n = dims as f64;
    Ok(0.5 * n * (2.0 * snr / n).ln_1p() / LN_2)
}

/// `h(Y|X) = h(N) = (N/2) log2(2 pi e sigma^2)` in bits.
pub fn conditional_entropy(params: &ChannelParams) -> f64 {
    let n = params.dims() as f64;
    0.5 * n * (2.0 * PI * E * params.sigma() * params.sigma()).ln() / LN_2
}

/// Ordered panel edges in normalized radius.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    edges: Vec<f64>,
}

impl Grid {
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn panels(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn upper(&self) -> f64 {
        *self.edges.last().expect("grids have at least two edges")
    }

    /// Splits every panel in two.
    pub fn refined(&self) -> Self {
        let mut edges = Vec::with_capacity(2 * self.edges.len() - 1);
        for w in self.edges.windows(2) {
            edges.push(w[0]);
            edges.push(0.5 * (w[0] + w[1]));
        }
        edges.push(self.upper());
        Self { edges }
    }

    /// Grid over `[0, upper]` that is dense (panel width at most
    /// `halfwidth / 16`) inside `[c - halfwidth, c + halfwidth]` for every
    /// centre `c`, with overlapping windows merged.
    fn around_peaks(centers: &[f64], upper: f64, cfg: &QuadratureConfig) -> Self {
        let hw = cfg.peak_halfwidth;
        let dense_width = hw / 16.0;
        let mut windows: Vec<(f64, f64)> = centers
            .iter()
            .map(|&c| ((c - hw).max(0.0), (c + hw).min(upper)))
            .filter(|(a, b)| b > a)
            .collect();
        windows.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (a, b) in windows {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }

        let coarse_width = upper / cfg.base_panels as f64;
        let mut edges = vec![0.0];
        let push_span = |edges: &mut Vec<f64>, a: f64, b: f64, width: f64| {
            if b <= a {
                return;
            }
            let n = ((b - a) / width).ceil().max(1.0) as usize;
            for i in 1..=n {
                edges.push(if i == n {
                    b
                } else {
                    a + (b - a) * i as f64 / n as f64
                });
            }
        };
        let mut cursor = 0.0;
        for (a, b) in merged {
            push_span(&mut edges, cursor, a, coarse_width);
            push_span(&mut edges, a.max(cursor), b, dense_width);
            cursor = cursor.max(b);
        }
        push_span(&mut edges, cursor, upper, coarse_width);
        Self { edges }
    }
}

/// Upper integration limit: outermost centre plus `max(halfwidth, 12)`,
/// never below the bulk of the central chi law.
fn truncation_point(outer_center: f64, dims: usize, cfg: &QuadratureConfig) -> f64 {
    let central_mode = ((dims as f64) - 1.0).sqrt();
    outer_center.max(central_mode) + cfg.peak_halfwidth.max(TAIL_SAFETY)
}

/// Quadrature grid for a multisphere output density.
pub fn build_grid(set: &SphereSet, params: &ChannelParams, cfg: &QuadratureConfig) -> Grid {
    let centers: Vec<f64> = set.radii().iter().map(|s| s / params.sigma()).collect();
    let upper = truncation_point(*centers.last().expect("non-empty set"), params.dims(), cfg);
    Grid::around_peaks(&centers, upper, cfg)
}

struct Integrated {
    value: f64,
    error: f64,
    evaluations: usize,
    refinements: usize,
    converged: bool,
}

fn integrate_grid(
    grid: &Grid,
    rule: &GaussLegendre,
    integrand: &mut impl FnMut(f64) -> Result<f64>,
) -> Result<f64> {
    let mut total = 0.0;
    let mut failure = None;
    for w in grid.edges.windows(2) {
        total += rule.integrate(w[0], w[1], |r| match integrand(r) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        });
        if let Some(e) = failure.take() {
            return Err(e);
        }
    }
    Ok(total)
}

/// Halves the grid until successive estimates of `value + offset` agree to
/// `max(rel_tol * |value + offset|, abs_tol)` (all in nats).
fn refine_until_converged(
    mut grid: Grid,
    offset: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_refinements: usize,
    mut integrand: impl FnMut(f64) -> Result<f64>,
) -> Result<Integrated> {
    let rule = GaussLegendre::new(PANEL_ORDER);
    let mut evaluations = grid.panels() * PANEL_ORDER;
    let mut previous = integrate_grid(&grid, &rule, &mut integrand)?;
    let mut error = f64::INFINITY;
    for level in 1..=max_refinements {
        grid = grid.refined();
        evaluations += grid.panels() * PANEL_ORDER;
        let current = integrate_grid(&grid, &rule, &mut integrand)?;
        error = (current - previous).abs();
        previous = current;
        if error <= abs_tol.max(rel_tol * (current + offset).abs()) {
            return Ok(Integrated {
                value: current,
                error,
                evaluations,
                refinements: level,
                converged: true,
            });
        }
    }
    Ok(Integrated {
        value: previous,
        error,
        evaluations,
        refinements: max_refinements,
        converged: false,
    })
}

/// `ln(2 / Gamma(N/2)) - (N/2) ln(2e)`.
fn mi_constant(dims: usize) -> f64 {
    let n = dims as f64;
    LN_2 - log_gamma(0.5 * n).expect("dims >= 1") - 0.5 * n * (2.0 * E).ln()
}

/// `-f ln(f / r^{N-1})` given `ln f`, with `0 ln 0 := 0`.
fn entropy_integrand(log_f: f64, r: f64, dims: usize) -> f64 {
    if log_f < LOG_DENSITY_FLOOR || r <= 0.0 {
        return 0.0;
    }
    -log_f.exp() * (log_f - (dims as f64 - 1.0) * r.ln())
}

fn assemble(result: Integrated, dims: usize) -> Result<MiResult> {
    let nats = result.value + mi_constant(dims);
    let mi = MiResult {
        bits_per_nd_use: (nats / LN_2).max(0.0),
        error_estimate: result.error / LN_2,
        evaluations: result.evaluations,
    };
    if result.converged {
        Ok(mi)
    } else {
        Err(Error::NonConvergence {
            refinements: result.refinements,
            best: mi,
        })
    }
}

/// Mutual information of a multisphere input.
pub fn mi_multisphere(
    set: &SphereSet,
    params: &ChannelParams,
    cfg: &QuadratureConfig,
) -> Result<MiResult> {
    cfg.validate()?;
    let mixture = RadialMixture::new(set, params);
    let dims = params.dims();
    let grid = build_grid(set, params, cfg);
    let result = refine_until_converged(
        grid,
        mi_constant(dims),
        cfg.rel_tol,
        cfg.abs_tol * LN_2,
        cfg.max_refinements,
        |r| Ok(entropy_integrand(mixture.log_density(r), r, dims)),
    )?;
    assemble(result, dims)
}

/// Mutual information of a general rotationally invariant input described
/// by the radial law of `||X||`. The output radial density is itself a
/// numerical integral, so the outer tolerance is at least 1e-6.
pub fn mi_rotinv(
    law: &RadialLaw,
    params: &ChannelParams,
    cfg: &QuadratureConfig,
) -> Result<MiResult> {
    cfg.validate()?;
    let dims = params.dims();
    let sigma = params.sigma();
    let mut centers: Vec<f64> = law.breakpoints().iter().map(|b| b / sigma).collect();
    let outer = law.support_upper() / sigma;
    centers.push(outer);
    let upper = truncation_point(outer, dims, cfg);
    let grid = Grid::around_peaks(&centers, upper, cfg);
    let result = refine_until_converged(
        grid,
        mi_constant(dims),
        cfg.rel_tol.max(ROTINV_OUTER_TOL),
        cfg.abs_tol * LN_2,
        cfg.max_refinements,
        |r| {
            let f = marginal_radial_pdf(law, params, r)?;
            Ok(if f > 0.0 {
                entropy_integrand(f.ln(), r, dims)
            } else {
                0.0
            })
        },
    )?;
    assemble(result, dims)
}

/// The two radial expressions of `h(Y)` for a rotationally invariant `Y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyForms {
    /// `h(R) + (N-1) E[log2 R] + log2(2 pi^{N/2} / Gamma(N/2))`
    pub via_radius: f64,
    /// `h(R^N) + log2(pi^{N/2} / Gamma(N/2 + 1))`
    pub via_power: f64,
}

/// Evaluates `h(Y)` in bits from the radial law of `R = ||Y||` in two ways:
/// once integrating over `r`, once over `t = r^N` with its own quadrature.
pub fn entropy_radial_forms(law: &RadialLaw, dims: usize) -> Result<EntropyForms> {
    if dims == 0 {
        return domain("dims must be >= 1");
    }
    let n = dims as f64;
    let upper = law.support_upper();
    let (rel, abs, panels) = (1e-11, 1e-13, 50_000);

    let xlogx = |f: f64| if f > 0.0 { f * f.ln() } else { 0.0 };
    let h_r = -integrate_adaptive(
        |r| xlogx(law.density(r)),
        0.0,
        upper,
        law.breakpoints(),
        rel,
        abs,
        panels,
    )?
    .value;
    let mean_log_r = integrate_adaptive(
        |r| {
            let f = law.density(r);
            if f > 0.0 && r > 0.0 {
                f * r.ln()
            } else {
                0.0
            }
        },
        0.0,
        upper,
        law.breakpoints(),
        rel,
        abs,
        panels,
    )?
    .value;
    let ln_pi = PI.ln();
    let area = LN_2 + 0.5 * n * ln_pi - log_gamma(0.5 * n)?;
    let via_radius = h_r + (n - 1.0) * mean_log_r + area;

    // T = R^N has density f_R(t^{1/N}) / (N t^{(N-1)/N})
    let f_t = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let r = t.powf(1.0 / n);
        let f = law.density(r);
        if f == 0.0 {
            0.0
        } else {
            f / (n * t / r)
        }
    };
    let t_cuts: Vec<f64> = law.breakpoints().iter().map(|b| b.powf(n)).collect();
    let h_t = -integrate_adaptive(
        |t| xlogx(f_t(t)),
        0.0,
        upper.powf(n),
        &t_cuts,
        rel,
        abs,
        panels,
    )?
    .value;
    let ball = 0.5 * n * ln_pi - log_gamma(0.5 * n + 1.0)?;
    let via_power = h_t + ball;

    Ok(EntropyForms {
        via_radius: via_radius / LN_2,
        via_power: via_power / LN_2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::uniform_sphere_set;

    #[test]
    fn capacity_examples() {
        assert!((awgn_capacity(2, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((awgn_capacity(4, 2.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(awgn_capacity(3, 0.0).unwrap(), 0.0);
        assert!(awgn_capacity(2, -1.0).is_err());
    }

    #[test]
    fn conditional_entropy_examples() {
        let p = ChannelParams::new(2, (1.0 / (2.0 * PI * E)).sqrt(), 1.0).unwrap();
        assert!(conditional_entropy(&p).abs() < 1e-14);
        let p = ChannelParams::new(2, 1.0, 1.0).unwrap();
        assert!((conditional_entropy(&p) - 4.094_191_170_361_282).abs() < 1e-12);
        let p4 = ChannelParams::new(4, 1.0, 1.0).unwrap();
        assert!((conditional_entropy(&p4) - 2.0 * conditional_entropy(&p)).abs() < 1e-14);
    }

    #[test]
    fn grid_single_sphere() {
        let p = ChannelParams::new(2, 1.0, 1.0).unwrap();
        let set = SphereSet::new(vec![10.0], vec![1.0]).unwrap();
        let cfg = QuadratureConfig::default();
        let g = build_grid(&set, &p, &cfg);
        assert!(g.upper() >= 18.0 + 4.0);
        let dense = cfg.peak_halfwidth / 16.0;
        for w in g.edges().windows(2) {
            assert!(w[1] > w[0]);
            if w[0] >= 2.0 - 1e-12 && w[1] <= 18.0 + 1e-12 {
                assert!(w[1] - w[0] <= dense + 1e-12);
            }
        }
        assert!(g.edges().iter().any(|&e| (e - 2.0).abs() < 1e-12));
        assert!(g.edges().iter().any(|&e| (e - 18.0).abs() < 1e-12));
    }

    #[test]
    fn grid_merges_overlapping_windows() {
        let p = ChannelParams::new(2, 1.0, 1.0).unwrap();
        let set = SphereSet::new(vec![10.0, 14.0], vec![0.5, 0.5]).unwrap();
        let cfg = QuadratureConfig::default();
        let g = build_grid(&set, &p, &cfg);
        let dense = cfg.peak_halfwidth / 16.0;
        // one dense region covering [2, 22]
        let inside: Vec<_> = g
            .edges()
            .windows(2)
            .filter(|w| w[0] >= 2.0 - 1e-12 && w[1] <= 22.0 + 1e-12)
            .collect();
        assert!(inside.iter().all(|w| w[1] - w[0] <= dense + 1e-12));
        let covered: f64 = inside.iter().map(|w| w[1] - w[0]).sum();
        assert!((covered - 20.0).abs() < 1e-9);
    }

    #[test]
    fn grid_refinement_halves_panels() {
        let p = ChannelParams::new(4, 1.0, 100.0).unwrap();
        let set = uniform_sphere_set(4, &p).unwrap();
        let g = build_grid(&set, &p, &QuadratureConfig::default());
        let r = g.refined();
        assert_eq!(r.panels(), 2 * g.panels());
        assert_eq!(r.upper(), g.upper());
    }

    #[test]
    fn tail_mass_beyond_truncation_is_negligible() {
        let p = ChannelParams::new(4, 1.0, 1000.0).unwrap();
        let set = uniform_sphere_set(8, &p).unwrap();
        let g = build_grid(&set, &p, &QuadratureConfig::default());
        let mix = RadialMixture::new(&set, &p);
        // density at the cut-off is far below any representable contribution
        assert!(mix.log_density(g.upper()) < -60.0);
    }

    #[test]
    fn vanishing_snr() {
        let p = ChannelParams::new(2, 1.0, 1e-6).unwrap();
        let set = uniform_sphere_set(1, &p).unwrap();
        let mi = mi_multisphere(&set, &p, &QuadratureConfig::default()).unwrap();
        assert!(mi.bits_per_nd_use <= 1e-5, "{mi:?}");
    }

    #[test]
    fn below_capacity() {
        let cfg = QuadratureConfig::default();
        for dims in [2, 3, 4] {
            for db in [0.0, 10.0, 20.0] {
                let snr = 10f64.powf(db / 10.0);
                let p = ChannelParams::new(dims, 1.0, snr).unwrap();
                let set = uniform_sphere_set(4, &p).unwrap();
                let mi = mi_multisphere(&set, &p, &cfg).unwrap();
                let c = awgn_capacity(dims, snr).unwrap();
                assert!(
                    mi.bits_per_nd_use <= c + mi.error_estimate,
                    "dims={dims} db={db}"
                );
                assert!(mi.bits_per_nd_use > 0.0);
            }
        }
    }

    #[test]
    fn invariant_to_noise_scale() {
        let cfg = QuadratureConfig::default();
        let a = ChannelParams::new(4, 1.0, 30.0).unwrap();
        let b = ChannelParams::new(4, 0.25, 30.0).unwrap();
        let ma = mi_multisphere(&uniform_sphere_set(3, &a).unwrap(), &a, &cfg).unwrap();
        let mb = mi_multisphere(&uniform_sphere_set(3, &b).unwrap(), &b, &cfg).unwrap();
        assert!((ma.bits_per_nd_use - mb.bits_per_nd_use).abs() < 1e-9);
    }

    #[test]
    fn non_convergence_is_reported_with_best_estimate() {
        let cfg = QuadratureConfig {
            rel_tol: 1e-300,
            abs_tol: 1e-300,
            peak_halfwidth: 0.01,
            base_panels: 1,
            max_refinements: 1,
        };
        let p = ChannelParams::new(2, 1.0, 1000.0).unwrap();
        let set = uniform_sphere_set(8, &p).unwrap();
        match mi_multisphere(&set, &p, &cfg) {
            Err(Error::NonConvergence { best, refinements }) => {
                assert_eq!(refinements, 1);
                assert!(best.bits_per_nd_use > 0.5);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_config() {
        let p = ChannelParams::new(2, 1.0, 10.0).unwrap();
        let set = uniform_sphere_set(2, &p).unwrap();
        let cfg = QuadratureConfig {
            peak_halfwidth: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            mi_multisphere(&set, &p, &cfg),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn rotinv_point_mass_matches_multisphere() {
        let cfg = QuadratureConfig::default();
        let p = ChannelParams::new(2, 1.0, 4.5).unwrap();
        let s0 = 3.0;
        let law = RadialLaw::bump(s0, 1e-3).unwrap();
        let a = mi_rotinv(&law, &p, &cfg).unwrap();
        let set = SphereSet::new(vec![s0], vec![1.0]).unwrap();
        let b = mi_multisphere(&set, &p, &cfg).unwrap();
        assert!(
            (a.bits_per_nd_use - b.bits_per_nd_use).abs() < 1e-3,
            "{a:?} vs {b:?}"
        );
    }

    #[test]
    fn entropy_forms_one_dimension() {
        // half-normal radius of a standard normal scalar
        let law = RadialLaw::gaussian_input(1, 1.0).unwrap();
        let forms = entropy_radial_forms(&law, 1).unwrap();
        let expected = 0.5 * (2.0 * PI * E).log2();
        assert!((forms.via_radius - expected).abs() < 1e-8, "{forms:?}");
        assert!((forms.via_power - expected).abs() < 1e-8, "{forms:?}");
    }

    #[test]
    fn entropy_forms_gaussian_two_dims() {
        let law = RadialLaw::gaussian_input(2, 1.0).unwrap();
        let forms = entropy_radial_forms(&law, 2).unwrap();
        let expected = (2.0 * PI * E).log2();
        assert!((forms.via_radius - expected).abs() < 1e-6);
        assert!((forms.via_power - expected).abs() < 1e-6);
    }
}
