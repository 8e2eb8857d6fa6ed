//! Drivers behind the `rotinv` command-line tool: SNR sweeps, capacity
//! tables, oracle cross-checks, the 2-D/4-D crossover comparison and the
//! Manakov invariance run. Everything here returns data or text; the binary
//! only parses arguments and maps outcomes to exit codes.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::manakov::{
    invariance_test, random_haar_unitary, random_multisphere_field, FiberParams, InvarianceReport,
    JonesUnitary,
};
use crate::mc_oracle::{mc_mi_radial, mc_mi_vector, McEstimate};
use crate::mi::{awgn_capacity, mi_multisphere, MiResult, QuadratureConfig};
use crate::radial::{uniform_sphere_set, ChannelParams, SphereSet};

/// Linear SNR from decibels, `A = 10^(dB/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(a: f64) -> f64 {
    10.0 * a.log10()
}

/// Formats `x` with 12 significant digits, `%g` style: fixed notation for
/// decimal exponents in [-5, 12), scientific otherwise, trailing zeros
/// removed.
pub fn format_sig(x: f64) -> String {
    const DIGITS: usize = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", DIGITS - 1, x);
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..DIGITS as i32).contains(&exp) {
        let decimals = (DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Parses `start:stop:step` (dB).
pub fn parse_snr_range(text: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidArgument(format!("bad number '{s}' in SNR range '{text}'")))
    };
    match parts.as_slice() {
        [single] => {
            let v = num(single)?;
            Ok((v, v, 1.0))
        }
        [a, b] => Ok((num(a)?, num(b)?, 1.0)),
        [a, b, c] => Ok((num(a)?, num(b)?, num(c)?)),
        _ => Err(Error::InvalidArgument(format!(
            "SNR range must be start:stop:step, got '{text}'"
        ))),
    }
}

fn snr_points(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| start + step * i as f64).collect()
}

/// Which input distribution a sweep evaluates.
#[derive(Debug, Clone, PartialEq)]
pub enum InputShape {
    /// Equiprobable, uniformly spaced spheres; one run per ring count.
    Uniform { rings_list: Vec<usize> },
    /// A fixed set, rescaled to the SNR of every row.
    Custom(SphereSet),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub dims_list: Vec<usize>,
    pub shape: InputShape,
    pub snr_db_start: f64,
    pub snr_db_stop: f64,
    pub snr_db_step: f64,
    /// Report rates per 4-D use against 4-D SNR (both scaled by 4/N).
    pub normalize_4d: bool,
    /// Monte Carlo samples per row; 0 skips the oracle.
    pub oracle_samples: usize,
    pub seed: u64,
}

impl SweepSpec {
    pub fn uniform(dims_list: Vec<usize>, rings_list: Vec<usize>, snr_db: (f64, f64, f64)) -> Self {
        Self {
            dims_list,
            shape: InputShape::Uniform { rings_list },
            snr_db_start: snr_db.0,
            snr_db_stop: snr_db.1,
            snr_db_step: snr_db.2,
            normalize_4d: false,
            oracle_samples: 0,
            seed: 42,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.dims_list.is_empty() || self.dims_list.iter().any(|&n| n < 2) {
            return bad(format!(
                "dims must be a non-empty list of integers >= 2, got {:?}",
                self.dims_list
            ));
        }
        if let InputShape::Uniform { rings_list } = &self.shape {
            if rings_list.is_empty() || rings_list.contains(&0) {
                return bad(format!(
                    "rings must be a non-empty list of positive integers, got {rings_list:?}"
                ));
            }
        }
        if !self.snr_db_step.is_finite() || self.snr_db_step <= 0.0 {
            return bad(format!("SNR step must be > 0, got {}", self.snr_db_step));
        }
        if !self.snr_db_start.is_finite()
            || !self.snr_db_stop.is_finite()
            || self.snr_db_stop < self.snr_db_start
        {
            return bad(format!(
                "SNR stop {} is below start {}",
                self.snr_db_stop, self.snr_db_start
            ));
        }
        if self.normalize_4d && self.dims_list.iter().any(|n| n % 2 != 0) {
            return bad("4-D normalization requires even dimensions".into());
        }
        if self.oracle_samples > 0 && self.oracle_samples < crate::mc_oracle::MIN_SAMPLES {
            return bad(format!(
                "oracle needs at least {} samples",
                crate::mc_oracle::MIN_SAMPLES
            ));
        }
        Ok(())
    }

    pub fn snr_points_db(&self) -> Vec<f64> {
        snr_points(self.snr_db_start, self.snr_db_stop, self.snr_db_step)
    }

    /// Grid points in output order: dims, then rings, then SNR.
    fn points(&self) -> Vec<(usize, usize, f64)> {
        let rings: Vec<usize> = match &self.shape {
            InputShape::Uniform { rings_list } => rings_list.clone(),
            InputShape::Custom(set) => vec![set.len()],
        };
        let snrs = self.snr_points_db();
        let mut out = Vec::new();
        for &n in &self.dims_list {
            for &k in &rings {
                for &db in &snrs {
                    out.push((n, k, db));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    NonConverged,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::NonConverged => "nonconverged",
        }
    }
}

/// One sweep row, already in the requested normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// `10 log10(A)`, or of `4A/N` when normalized.
    pub snr_db: f64,
    pub dims: usize,
    pub rings: usize,
    pub rate: f64,
    pub capacity: f64,
    pub quad_error: f64,
    pub oracle: Option<McEstimate>,
    pub status: RowStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub csv: String,
}

impl SweepOutcome {
    pub fn any_nonconverged(&self) -> bool {
        self.rows
            .iter()
            .any(|r| r.status == RowStatus::NonConverged)
    }
}

/// Sphere set and channel for one (N, K, A) point with `sigma = 1`.
pub fn point_input(
    dims: usize,
    rings: usize,
    snr: f64,
    shape: &InputShape,
) -> Result<(SphereSet, ChannelParams)> {
    let params = ChannelParams::new(dims, 1.0, snr)?;
    let set = match shape {
        InputShape::Uniform { .. } => uniform_sphere_set(rings, &params)?,
        InputShape::Custom(set) => set.scaled_to(&params)?,
    };
    Ok((set, params))
}

fn mi_or_best(
    set: &SphereSet,
    params: &ChannelParams,
    cfg: &QuadratureConfig,
) -> Result<(MiResult, RowStatus)> {
    match mi_multisphere(set, params, cfg) {
        Ok(r) => Ok((r, RowStatus::Ok)),
        Err(Error::NonConvergence { best, .. }) => Ok((best, RowStatus::NonConverged)),
        Err(e) => Err(e),
    }
}

/// Evaluates every grid point (concurrently) and renders the CSV in
/// deterministic (N, K, A) order.
pub fn run_sweep(spec: &SweepSpec, cfg: &QuadratureConfig) -> Result<SweepOutcome> {
    spec.validate()?;
    cfg.validate()?;
    let points = spec.points();
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(i, &(dims, rings, db))| {
            let snr = db_to_linear(db);
            let (set, params) = point_input(dims, rings, snr, &spec.shape)?;
            let (mi, status) = mi_or_best(&set, &params, cfg)?;
            let capacity = awgn_capacity(dims, snr)?;
            let oracle = if spec.oracle_samples > 0 {
                Some(mc_mi_vector(
                    &set,
                    &params,
                    spec.oracle_samples,
                    spec.seed.wrapping_add(i as u64),
                )?)
            } else {
                None
            };
            let scale = if spec.normalize_4d {
                4.0 / dims as f64
            } else {
                1.0
            };
            Ok(SweepRow {
                snr_db: if spec.normalize_4d {
                    linear_to_db(snr * scale)
                } else {
                    db
                },
                dims,
                rings,
                rate: mi.bits_per_nd_use * scale,
                capacity: capacity * scale,
                quad_error: mi.error_estimate * scale,
                oracle: oracle.map(|o| McEstimate {
                    estimate: o.estimate * scale,
                    stderr: o.stderr * scale,
                    ..o
                }),
                status,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let csv = sweep_csv(spec.normalize_4d, &rows);
    Ok(SweepOutcome { rows, csv })
}

pub const SWEEP_HEADER: &str =
    "snr_db,dims,rings,mi_bits_per_nd_use,capacity_bits_per_nd_use,quad_error_bits,oracle_mi,oracle_stderr,status";
pub const SWEEP_HEADER_4D: &str =
    "snr4d_db,dims,rings,rate_bits_per_4d_use,capacity_bits_per_4d_use,quad_error_bits,oracle_mi,oracle_stderr,status";

/// CSV rendering of sweep rows. Oracle columns stay empty when no oracle
/// was run.
pub fn sweep_csv(normalized: bool, rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str(if normalized {
        SWEEP_HEADER_4D
    } else {
        SWEEP_HEADER
    });
    out.push('\n');
    for r in rows {
        let (om, os) = match &r.oracle {
            Some(o) => (format_sig(o.estimate), format_sig(o.stderr)),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            format_sig(r.snr_db),
            r.dims,
            r.rings,
            format_sig(r.rate),
            format_sig(r.capacity),
            format_sig(r.quad_error),
            om,
            os,
            r.status.as_str()
        );
    }
    out
}

/// Gnuplot script plotting rate and capacity against SNR for every
/// (N, K) series of a sweep CSV.
pub fn plot_script(csv_path: &str, spec: &SweepSpec) -> String {
    let (xlabel, ylabel) = if spec.normalize_4d {
        ("4-D SNR [dB]", "rate [bits per 4-D channel use]")
    } else {
        ("SNR A [dB]", "rate [bits per channel use]")
    };
    let rings: Vec<usize> = match &spec.shape {
        InputShape::Uniform { rings_list } => rings_list.clone(),
        InputShape::Custom(set) => vec![set.len()],
    };
    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot script for {csv_path}");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key left top");
    let _ = writeln!(s, "set grid");
    let _ = writeln!(s, "set xlabel '{xlabel}'");
    let _ = writeln!(s, "set ylabel '{ylabel}'");
    let mut series = Vec::new();
    for &n in &spec.dims_list {
        series.push(format!(
            "'{csv_path}' using (($2=={n} && $3=={k0}) ? $1 : 1/0):5 with lines dashtype 2 title 'capacity N={n}'",
            k0 = rings[0]
        ));
        for &k in &rings {
            series.push(format!(
                "'{csv_path}' using (($2=={n} && $3=={k}) ? $1 : 1/0):4 with linespoints title 'N={n} K={k}'"
            ));
        }
    }
    let _ = writeln!(s, "plot {}", series.join(", \\\n     "));
    s
}

/// CSV table of the AWGN capacity for every dimension and SNR.
pub fn capacity_table(dims_list: &[usize], snr_db: (f64, f64, f64)) -> Result<String> {
    if !snr_db.2.is_finite() || snr_db.2 <= 0.0 || snr_db.1.is_nan() || snr_db.1 < snr_db.0 {
        return Err(Error::InvalidArgument(
            "SNR range needs step > 0 and stop >= start".into(),
        ));
    }
    let mut out = String::from("snr_db,dims,capacity_bits_per_nd_use\n");
    for &n in dims_list {
        for db in snr_points(snr_db.0, snr_db.1, snr_db.2) {
            let c = awgn_capacity(n, db_to_linear(db))?;
            let _ = writeln!(out, "{},{},{}", format_sig(db), n, format_sig(c));
        }
    }
    Ok(out)
}

/// Quadrature and both Monte Carlo estimates at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub dims: usize,
    pub rings: usize,
    pub snr_db: f64,
    pub quadrature: MiResult,
    pub vector: McEstimate,
    pub radial: McEstimate,
}

impl OracleReport {
    /// `max(3 stderr, 5e-3)` bits.
    pub fn tolerance(est: &McEstimate) -> f64 {
        (3.0 * est.stderr).max(5e-3)
    }

    pub fn vector_agrees(&self) -> bool {
        (self.quadrature.bits_per_nd_use - self.vector.estimate).abs()
            <= Self::tolerance(&self.vector)
    }

    pub fn radial_agrees(&self) -> bool {
        (self.quadrature.bits_per_nd_use - self.radial.estimate).abs()
            <= Self::tolerance(&self.radial)
    }

    /// The two estimators within 3 combined standard errors.
    pub fn oracles_agree(&self) -> bool {
        let combined = self.vector.stderr.hypot(self.radial.stderr);
        (self.vector.estimate - self.radial.estimate).abs() <= 3.0 * combined
    }

    pub fn passed(&self) -> bool {
        self.vector_agrees() && self.radial_agrees() && self.oracles_agree()
    }

    pub fn render(&self) -> String {
        let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
        let mut s = String::new();
        let _ = writeln!(
            s,
            "point: N={} K={} snr_db={}",
            self.dims,
            self.rings,
            format_sig(self.snr_db)
        );
        let _ = writeln!(
            s,
            "quadrature: {} bits (error {})",
            format_sig(self.quadrature.bits_per_nd_use),
            format_sig(self.quadrature.error_estimate)
        );
        let _ = writeln!(
            s,
            "mc_vector: {} +- {} bits [{}]",
            format_sig(self.vector.estimate),
            format_sig(self.vector.stderr),
            verdict(self.vector_agrees())
        );
        let _ = writeln!(
            s,
            "mc_radial: {} +- {} bits [{}]",
            format_sig(self.radial.estimate),
            format_sig(self.radial.stderr),
            verdict(self.radial_agrees())
        );
        let _ = writeln!(s, "oracle consistency: [{}]", verdict(self.oracles_agree()));
        s
    }
}

/// Runs the quadrature and both oracles at one point. The radial oracle
/// uses `seed + 1` so the two estimates are independent.
pub fn run_oracle_point(
    dims: usize,
    rings: usize,
    snr_db: f64,
    shape: &InputShape,
    samples: usize,
    seed: u64,
    cfg: &QuadratureConfig,
) -> Result<OracleReport> {
    let (set, params) = point_input(dims, rings, db_to_linear(snr_db), shape)?;
    let quadrature = mi_multisphere(&set, &params, cfg)?;
    let vector = mc_mi_vector(&set, &params, samples, seed)?;
    let radial = mc_mi_radial(&set, &params, samples, seed.wrapping_add(1))?;
    Ok(OracleReport {
        dims,
        rings: set.len(),
        snr_db,
        quadrature,
        vector,
        radial,
    })
}

/// Two 2-D multirings with half the energy each against one 4-D
/// multisphere, at the same 4-D SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossoverReport {
    pub snr4d_db: f64,
    pub rings: usize,
    /// `2 MI(N=2, K, A/2)`, bits per 4-D use.
    pub two_2d: MiResult,
    /// `MI(N=4, K, A)`, bits per 4-D use.
    pub one_4d: MiResult,
}

impl CrossoverReport {
    pub fn r2(&self) -> f64 {
        self.two_2d.bits_per_nd_use
    }

    pub fn r4(&self) -> f64 {
        self.one_4d.bits_per_nd_use
    }

    pub fn two_2d_better(&self) -> bool {
        self.r2() > self.r4()
    }

    pub fn render(&self) -> String {
        format!(
            "snr4d_db={} rings={}\nR2 (two 2-D multirings) = {} bits/4-D use\nR4 (one 4-D multisphere) = {} bits/4-D use\nR2 - R4 = {}\nbetter: {}\n",
            format_sig(self.snr4d_db),
            self.rings,
            format_sig(self.r2()),
            format_sig(self.r4()),
            format_sig(self.r2() - self.r4()),
            if self.two_2d_better() { "two 2-D multirings" } else { "one 4-D multisphere" }
        )
    }
}

pub fn run_crossover_check(
    snr4d_db: f64,
    rings: usize,
    cfg: &QuadratureConfig,
) -> Result<CrossoverReport> {
    let a4 = db_to_linear(snr4d_db);
    let p2 = ChannelParams::new(2, 1.0, a4 / 2.0)?;
    let p4 = ChannelParams::new(4, 1.0, a4)?;
    let m2 = mi_multisphere(&uniform_sphere_set(rings, &p2)?, &p2, cfg)?;
    let m4 = mi_multisphere(&uniform_sphere_set(rings, &p4)?, &p4, cfg)?;
    let two_2d = MiResult {
        bits_per_nd_use: 2.0 * m2.bits_per_nd_use,
        error_estimate: 2.0 * m2.error_estimate,
        evaluations: m2.evaluations,
    };
    Ok(CrossoverReport {
        snr4d_db,
        rings,
        two_2d,
        one_4d: m4,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitaryChoice {
    Haar,
    Identity,
    Swap,
}

/// Parameters of a desk-scale invariance run.
#[derive(Debug, Clone, PartialEq)]
pub struct ManakovConfig {
    pub fiber: FiberParams,
    pub samples: usize,
    pub dt: f64,
    pub trials: usize,
    pub seed: u64,
    /// Mean launch power `E[|Ex|^2 + |Ey|^2]`, W.
    pub power: f64,
    /// Number of 4-D spheres in the launched constellation.
    pub rings: usize,
    pub unitary: UnitaryChoice,
}

impl Default for ManakovConfig {
    fn default() -> Self {
        Self {
            fiber: FiberParams {
                beta2: -2.17e-26,
                gamma: 1.3e-3,
                length: 8e4,
                steps: 20,
                noise_psd: 5e-21,
            },
            samples: 1024,
            dt: 1e-11,
            trials: 1000,
            seed: 1,
            power: 1e-2,
            rings: 4,
            unitary: UnitaryChoice::Haar,
        }
    }
}

/// Parses `key = value` lines (`#` starts a comment). Keys not given keep
/// their defaults.
pub fn parse_manakov_params(text: &str) -> Result<ManakovConfig> {
    let mut cfg = ManakovConfig::default();
    let mut seen = std::collections::HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
        let key = key.trim();
        let value = value.trim();
        if !seen.insert(key.to_string()) {
            return Err(err(format!("duplicate key '{key}'")));
        }
        let real = || {
            value
                .parse::<f64>()
                .map_err(|_| err(format!("'{key}' expects a number, got '{value}'")))
        };
        let int = || {
            value.parse::<u64>().map_err(|_| {
                err(format!(
                    "'{key}' expects a non-negative integer, got '{value}'"
                ))
            })
        };
        match key {
            "beta2" => cfg.fiber.beta2 = real()?,
            "gamma" => cfg.fiber.gamma = real()?,
            "length" => cfg.fiber.length = real()?,
            "steps" => cfg.fiber.steps = int()? as usize,
            "noise_psd" => cfg.fiber.noise_psd = real()?,
            "samples" => cfg.samples = int()? as usize,
            "dt" => cfg.dt = real()?,
            "trials" => cfg.trials = int()? as usize,
            "seed" => cfg.seed = int()?,
            "power" => cfg.power = real()?,
            "rings" => cfg.rings = int()? as usize,
            "unitary" => {
                cfg.unitary = match value {
                    "haar" => UnitaryChoice::Haar,
                    "identity" => UnitaryChoice::Identity,
                    "swap" => UnitaryChoice::Swap,
                    other => {
                        return Err(err(format!(
                            "unitary must be haar, identity or swap, got '{other}'"
                        )))
                    }
                }
            }
            other => return Err(err(format!("unknown key '{other}'"))),
        }
    }
    Ok(cfg)
}

/// Builds the input ensemble (one multisphere field per trial) and runs
/// the invariance test.
pub fn run_manakov_check(cfg: &ManakovConfig) -> Result<InvarianceReport> {
    cfg.fiber.validate()?;
    if cfg.rings == 0 || cfg.power.is_nan() || cfg.power <= 0.0 {
        return Err(Error::InvalidArgument(
            "rings must be >= 1 and power > 0".into(),
        ));
    }
    let k = cfg.rings as f64;
    // uniformly spaced 4-D spheres with mean squared radius = power
    let spacing = (6.0 * cfg.power / ((k + 1.0) * (2.0 * k + 1.0))).sqrt();
    let radii: Vec<f64> = (1..=cfg.rings).map(|i| i as f64 * spacing).collect();
    let inputs = (0..cfg.trials)
        .map(|t| {
            random_multisphere_field(
                cfg.samples,
                cfg.dt,
                &radii,
                cfg.seed.wrapping_mul(1_000_003).wrapping_add(t as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let u = match cfg.unitary {
        UnitaryChoice::Haar => random_haar_unitary(cfg.seed),
        UnitaryChoice::Identity => JonesUnitary::identity(),
        UnitaryChoice::Swap => JonesUnitary::swap(),
    };
    invariance_test(&inputs, &cfg.fiber, &u, cfg.trials, cfg.seed)
}

pub fn render_invariance_report(report: &InvarianceReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "trials: {}", report.trials);
    let _ = writeln!(
        s,
        "noiseless equivariance residual: {:.3e}",
        report.equivariance_residual
    );
    let _ = writeln!(
        s,
        "noiseless energy residual: {:.3e}",
        report.energy_residual
    );
    for c in &report.comparisons {
        let _ = writeln!(
            s,
            "{:<12} {:<20} reference={} test={} delta={:+.3} sigma [{}]",
            c.ensemble,
            c.statistic,
            format_sig(c.mean_reference),
            format_sig(c.mean_test),
            c.delta_sigma,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    let _ = writeln!(
        s,
        "overall: {} at {} sigma",
        if report.passed() { "PASS" } else { "FAIL" },
        report.threshold_sigma
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(-2.5), "-2.5");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig(12345.678901234567), "12345.6789012");
        assert_eq!(format_sig(1.5e-7), "1.5e-7");
        assert_eq!(format_sig(6.02214076e23), "6.02214076e23");
        assert_eq!(format_sig(0.0001), "0.0001");
    }

    #[test]
    fn snr_ranges() {
        assert_eq!(parse_snr_range("0:40:1").unwrap(), (0.0, 40.0, 1.0));
        assert_eq!(parse_snr_range("25").unwrap(), (25.0, 25.0, 1.0));
        assert!(parse_snr_range("a:b").is_err());
        assert!(parse_snr_range("1:2:3:4").is_err());
        assert_eq!(snr_points(0.0, 30.0, 5.0).len(), 7);
        assert_eq!(snr_points(0.0, 1.0, 0.1).len(), 11);
    }

    #[test]
    fn spec_validation() {
        let mut s = SweepSpec::uniform(vec![2, 4], vec![1, 2], (0.0, 10.0, 5.0));
        assert!(s.validate().is_ok());
        s.snr_db_step = 0.0;
        assert!(s.validate().is_err());
        let mut s = SweepSpec::uniform(vec![3], vec![1], (0.0, 10.0, 5.0));
        assert!(s.validate().is_ok());
        s.normalize_4d = true;
        assert!(s.validate().is_err());
        let s = SweepSpec::uniform(vec![2], vec![1], (10.0, 0.0, 5.0));
        assert!(s.validate().is_err());
        let s = SweepSpec::uniform(vec![2], vec![0], (0.0, 0.0, 1.0));
        assert!(s.validate().is_err());
    }

    #[test]
    fn capacity_row_at_zero_db() {
        let spec = SweepSpec::uniform(vec![2], vec![1], (0.0, 0.0, 1.0));
        let out = run_sweep(&spec, &QuadratureConfig::default()).unwrap();
        assert_eq!(out.rows.len(), 1);
        assert_eq!(out.rows[0].capacity, 1.0);
        let line = out.csv.lines().nth(1).unwrap();
        assert!(line.starts_with("0,2,1,"));
        assert!(line.ends_with(",1,0.0") || line.contains(",1,"));
        assert!(line.ends_with(",,,ok"));
    }

    #[test]
    fn normalization_is_identity_for_four_dims() {
        let mut spec = SweepSpec::uniform(vec![4], vec![1, 4], (0.0, 20.0, 10.0));
        let plain = run_sweep(&spec, &QuadratureConfig::default()).unwrap();
        spec.normalize_4d = true;
        let norm = run_sweep(&spec, &QuadratureConfig::default()).unwrap();
        assert_eq!(plain.rows, norm.rows);
        assert_eq!(
            plain.csv.lines().skip(1).collect::<Vec<_>>(),
            norm.csv.lines().skip(1).collect::<Vec<_>>()
        );
        assert!(norm.csv.starts_with(SWEEP_HEADER_4D));
    }

    #[test]
    fn normalization_doubles_two_dim_rows() {
        let mut spec = SweepSpec::uniform(vec![2], vec![2], (10.0, 10.0, 1.0));
        let plain = run_sweep(&spec, &QuadratureConfig::default()).unwrap();
        spec.normalize_4d = true;
        let norm = run_sweep(&spec, &QuadratureConfig::default()).unwrap();
        assert!((norm.rows[0].rate - 2.0 * plain.rows[0].rate).abs() < 1e-15);
        assert!((norm.rows[0].snr_db - (10.0 + linear_to_db(2.0))).abs() < 1e-12);
    }

    #[test]
    fn custom_set_is_rescaled_per_row() {
        let set = SphereSet::new(vec![1.0, 2.0, 3.0], vec![0.2, 0.3, 0.5]).unwrap();
        let (scaled, p) = point_input(2, 3, 10.0, &InputShape::Custom(set)).unwrap();
        assert!((crate::radial::average_power(&scaled) - p.signal_power()).abs() < 1e-12);
        assert_eq!(scaled.probs(), &[0.2, 0.3, 0.5]);
    }

    #[test]
    fn crossover_vanishes_at_low_snr() {
        let r = run_crossover_check(-40.0, 8, &QuadratureConfig::default()).unwrap();
        assert!(r.r2() < 1e-3 && r.r4() < 1e-3);
    }

    #[test]
    fn manakov_params_parse() {
        let text = "# desk run\nbeta2 = -2e-26\ngamma=1e-3 # inline\n\nsteps = 10\ntrials = 200\nunitary = identity\n";
        let cfg = parse_manakov_params(text).unwrap();
        assert_eq!(cfg.fiber.beta2, -2e-26);
        assert_eq!(cfg.fiber.gamma, 1e-3);
        assert_eq!(cfg.fiber.steps, 10);
        assert_eq!(cfg.trials, 200);
        assert_eq!(cfg.unitary, UnitaryChoice::Identity);
        assert_eq!(cfg.samples, 1024);
    }

    #[test]
    fn manakov_params_errors_carry_line_numbers() {
        let cases = [
            ("beta2 = 1\nbogus = 2\n", 2),
            ("\n\nsteps = ten\n", 3),
            ("gamma 1e-3\n", 1),
            ("seed = 1\nseed = 2\n", 2),
            ("unitary = rotate\n", 1),
        ];
        for (text, line) in cases {
            match parse_manakov_params(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn identity_manakov_run_is_exact() {
        let cfg = ManakovConfig {
            samples: 64,
            trials: 100,
            unitary: UnitaryChoice::Identity,
            ..ManakovConfig::default()
        };
        let report = run_manakov_check(&cfg).unwrap();
        assert!(report.passed());
        assert!(report.comparisons.iter().all(|c| c.delta_sigma == 0.0));
        assert!(render_invariance_report(&report).contains("overall: PASS"));
    }
}
