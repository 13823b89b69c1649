//! The three reconstruction engines: the efficiency fit of the marginal,
//! the pattern-function density-matrix estimator with Wigner synthesis, and
//! the direct Abel inversion, plus a maximum-likelihood alternative and
//! section-comparison metrics.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid;
use crate::ingest::Histogram;
use crate::state::{fock_wavefunctions, DensityMatrix};

/// Highest density-matrix order reconstructed by the estimators.
pub const MAX_PATTERN_ORDER: usize = 10;

/// Largest density matrix accepted by the Wigner synthesis.
pub const MAX_WIGNER_DIM: usize = 16;

const PI: f64 = core::f64::consts::PI;

/// Tabulated diagonal pattern kernel pi * f_nn on the shared grid.
///
/// Averaging `lookup` over quadrature samples estimates rho_{n,n} directly.
#[derive(Debug, Clone)]
pub struct PatternFunctionTable {
    pub order: usize,
    /// pi * f_nn at each grid node of [-6, 6], step 1e-3.
    pub values: Vec<f64>,
}

impl PatternFunctionTable {
    pub fn grid_x(&self, i: usize) -> f64 {
        grid::grid_x(i)
    }

    /// Linear interpolation, clamped at the grid ends.
    pub fn lookup(&self, x: f64) -> f64 {
        grid::interp(&self.values, x)
    }
}

/// Build pi * f_nn = d/dx [psi_n(x) phi_n(x)].
///
/// phi_n is the irregular second solution of psi'' = (4x^2 - 4n - 2) psi
/// with parity opposite to psi_n, normalized by the Wronskian
/// psi_n phi_n' - psi_n' phi_n = 2. It is integrated outward from the
/// origin by RK4 (outward integration follows the growing solution, so the
/// admixture of the decaying regular solution stays negligible), and the
/// derivative is assembled by the product rule from the ladder identity
/// psi_n' = sqrt(n) psi_{n-1} - sqrt(n+1) psi_{n+1}.
pub fn pattern_function(n: usize) -> Result<PatternFunctionTable> {
    if n > MAX_PATTERN_ORDER {
        return Err(Error::UnsupportedOrder { order: n, max: MAX_PATTERN_ORDER });
    }
    let energy = 4.0 * n as f64 + 2.0;
    let half = grid::GRID_LEN / 2; // node index of x = 0
    let h = grid::GRID_STEP;

    // Initial conditions at x = 0 from the Wronskian and parity.
    let psi0 = fock_wavefunctions(n + 1, 0.0)?;
    let dpsi0 = dpsi(n, &psi0);
    let (mut phi, mut dphi) = if n % 2 == 0 {
        (0.0, 2.0 / psi0[n])
    } else {
        (-2.0 / dpsi0, 0.0)
    };

    let mut gpos = Vec::with_capacity(half + 1);
    let mut x = 0.0;
    let psi = fock_wavefunctions(n + 1, x)?;
    gpos.push(dpsi(n, &psi) * phi + psi[n] * dphi);
    let accel = |x: f64, p: f64| (4.0 * x * x - energy) * p;
    for _ in 0..half {
        // RK4 step for [phi, phi']
        let k1p = dphi;
        let k1d = accel(x, phi);
        let k2p = dphi + 0.5 * h * k1d;
        let k2d = accel(x + 0.5 * h, phi + 0.5 * h * k1p);
        let k3p = dphi + 0.5 * h * k2d;
        let k3d = accel(x + 0.5 * h, phi + 0.5 * h * k2p);
        let k4p = dphi + h * k3d;
        let k4d = accel(x + h, phi + h * k3p);
        phi += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        dphi += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        x += h;
        let psi = fock_wavefunctions(n + 1, x)?;
        gpos.push(dpsi(n, &psi) * phi + psi[n] * dphi);
    }

    // psi_n phi_n is odd, so the kernel is even in x.
    let mut values = Vec::with_capacity(grid::GRID_LEN);
    for i in (1..=half).rev() {
        values.push(gpos[i]);
    }
    values.extend(gpos.iter().copied());
    debug_assert_eq!(values.len(), grid::GRID_LEN);
    Ok(PatternFunctionTable { order: n, values })
}

fn dpsi(n: usize, psi: &[f64]) -> f64 {
    let lower = if n >= 1 { libm::sqrt(n as f64) * psi[n - 1] } else { 0.0 };
    lower - libm::sqrt(n as f64 + 1.0) * psi[n + 1]
}

/// Weighted least-squares fit of a calibrated histogram to the one-parameter
/// lossy single-photon marginal; returns (eta, standard error).
///
/// Bin weights are Poisson, iteratively refreshed from the model densities.
pub fn fit_efficiency(hist: &Histogram) -> Result<(f64, f64)> {
    if hist.total < 10_000 {
        return Err(Error::Domain { what: "histogram total", value: hist.total as f64 });
    }
    let nd = hist.total as f64 * hist.bin_width;
    let sqrt_2_over_pi = libm::sqrt(2.0 / PI);
    let mut eta = 0.5;
    let mut converged = false;
    let mut denom = 0.0;
    const MAX_ITERS: usize = 200;
    for _ in 0..MAX_ITERS {
        let mut num_acc = 0.0;
        let mut den_acc = 0.0;
        for k in 0..hist.len() {
            let x = hist.center(k);
            let gauss = sqrt_2_over_pi * libm::exp(-2.0 * x * x);
            let vac = gauss;
            let basis = gauss * (4.0 * x * x - 1.0);
            let model = vac + eta * basis;
            // Poisson variance of a bin density, floored at half an
            // expected count to keep empty far-tail bins finite.
            let var = (model * nd).max(0.5) / (nd * nd);
            let w = 1.0 / var;
            let d = hist.density(k);
            num_acc += w * basis * (d - vac);
            den_acc += w * basis * basis;
        }
        let next = num_acc / den_acc;
        denom = den_acc;
        if libm::fabs(next - eta) < 1e-12 {
            eta = next;
            converged = true;
            break;
        }
        eta = next;
    }
    if !converged {
        return Err(Error::FitDiverged { iterations: MAX_ITERS });
    }
    if !(-0.05..=1.05).contains(&eta) {
        return Err(Error::ModelMismatch { eta });
    }
    Ok((eta, libm::sqrt(1.0 / denom)))
}

/// Sample-mean pattern-function estimates of the first `max_n + 1` diagonal
/// density-matrix elements; returns (estimates, standard errors).
///
/// Raw linear estimator: no positivity or trace enforcement.
pub fn dm_diagonal(xs: &[f64], max_n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if xs.len() < 10_000 {
        return Err(Error::Domain { what: "sample count", value: xs.len() as f64 });
    }
    let mut estimates = Vec::with_capacity(max_n + 1);
    let mut stderrs = Vec::with_capacity(max_n + 1);
    for n in 0..=max_n {
        let table = pattern_function(n)?;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for &x in xs {
            let g = table.lookup(x);
            sum += g;
            sumsq += g * g;
        }
        let n_samples = xs.len() as f64;
        let mean = sum / n_samples;
        let var = (sumsq / n_samples - mean * mean).max(0.0);
        estimates.push(mean);
        stderrs.push(libm::sqrt(var / n_samples));
    }
    Ok((estimates, stderrs))
}

/// Deterministic quadrature variant of `dm_diagonal`: integrates the
/// pattern kernels against an exact density instead of averaging samples.
pub fn dm_diagonal_from_density(
    pdf: impl Fn(f64) -> f64,
    max_n: usize,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(max_n + 1);
    for n in 0..=max_n {
        let table = pattern_function(n)?;
        let values: Vec<f64> = (0..grid::GRID_LEN)
            .map(|i| pdf(grid::grid_x(i)) * table.values[i])
            .collect();
        out.push(grid::simpson(&values));
    }
    Ok(out)
}

/// A section of the Wigner function on a one-dimensional grid of radii or
/// x-values.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerSection {
    pub coords: Vec<f64>,
    pub values: Vec<f64>,
}

/// W(x, y) synthesized from a truncated density matrix:
///
/// W = Re sum_d e^{i d atan2(y, x)} sum_n Lambda(n, d, x, y) rho_{n,n+d},
/// Lambda = (2 (-1)^n / pi) (2 - delta_{d0}) |2(x+iy)|^d sqrt(n!/(n+d)!)
///          e^{-2(x^2+y^2)} L_n^d(4(x^2+y^2)).
pub fn wigner_point(rho: &DensityMatrix, x: f64, y: f64) -> Result<f64> {
    let dim = rho.dim();
    if dim > MAX_WIGNER_DIM {
        return Err(Error::UnsupportedOrder { order: dim - 1, max: MAX_WIGNER_DIM - 1 });
    }
    let r2 = x * x + y * y;
    let z = 4.0 * r2;
    let envelope = libm::exp(-2.0 * r2);
    let amp = 2.0 * libm::sqrt(r2); // |2(x+iy)|
    let angle = libm::atan2(y, x);
    let mut total = 0.0;
    for d in 0..dim {
        let deg = if d == 0 { 1.0 } else { 2.0 };
        let phase_re = libm::cos(d as f64 * angle);
        let amp_d = libm::pow(amp, d as f64);
        if amp_d == 0.0 && d > 0 {
            continue;
        }
        // sqrt(n!/(n+d)!) built multiplicatively alongside the Laguerre
        // recurrence (k+1) L_{k+1}^d = (2k+d+1-z) L_k^d - (k+d) L_{k-1}^d.
        let mut fact_ratio = 1.0;
        for j in 1..=d {
            fact_ratio /= libm::sqrt(j as f64);
        }
        let mut lag_prev = 0.0;
        let mut lag = 1.0;
        for n in 0..(dim - d) {
            if n > 0 {
                let k = (n - 1) as f64;
                let next =
                    ((2.0 * k + d as f64 + 1.0 - z) * lag - (k + d as f64) * lag_prev) / (k + 1.0);
                lag_prev = lag;
                lag = next;
                fact_ratio *= libm::sqrt(n as f64 / (n + d) as f64);
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let lambda = (2.0 * sign / PI) * deg * amp_d * fact_ratio * envelope * lag;
            let coeff = rho.get(n, n + d);
            total += phase_re * lambda * coeff.re
                - libm::sin(d as f64 * angle) * lambda * coeff.im;
        }
    }
    Ok(total)
}

/// Section W(x, y0) along a line of fixed y.
pub fn wigner_section(rho: &DensityMatrix, xs: &[f64], y: f64) -> Result<WignerSection> {
    let mut values = Vec::with_capacity(xs.len());
    for &x in xs {
        values.push(wigner_point(rho, x, y)?);
    }
    Ok(WignerSection { coords: xs.to_vec(), values })
}

/// Direct Abel inversion of a symmetrized quadrature histogram
/// (Nestor-Olsen discretization: the density is taken linear in x^2 on
/// each ring, making every kernel integral elementary). No smoothing.
pub fn abel_invert(hist: &Histogram) -> Result<WignerSection> {
    let delta = hist.bin_width;
    let xmax = libm::fabs(hist.center(0)).max(libm::fabs(hist.center(hist.len() - 1)));
    let m = (libm::floor(xmax / delta) as usize) + 1;
    if m < 8 {
        return Err(Error::InsufficientResolution { bins: m, required: 8 });
    }
    // symmetrize: p(x) <- (p(x) + p(-x)) / 2 on the radial grid r_k = k delta
    let mut dens: Vec<f64> = (0..m)
        .map(|k| {
            let x = k as f64 * delta;
            0.5 * (hist.density_at(x) + hist.density_at(-x))
        })
        .collect();
    dens.push(0.0); // taper to zero one step beyond the data

    let xs: Vec<f64> = (0..=m).map(|k| k as f64 * delta).collect();
    let mut values = Vec::with_capacity(m);
    for k in 0..m {
        let r2 = xs[k] * xs[k];
        let mut acc = 0.0;
        for j in k..m {
            let b = (dens[j + 1] - dens[j]) / (xs[j + 1] * xs[j + 1] - xs[j] * xs[j]);
            let lo = (xs[j] * xs[j]).max(r2);
            acc += b * (libm::sqrt(xs[j + 1] * xs[j + 1] - r2) - libm::sqrt(lo - r2));
        }
        values.push(-2.0 * acc / PI);
    }
    Ok(WignerSection { coords: xs[..m].to_vec(), values })
}

/// Diagonal-restricted maximum-likelihood reconstruction by the iterated
/// R rho R map with trace renormalization.
pub fn mle_reconstruct(
    xs: &[f64],
    max_n: usize,
    max_iters: usize,
    tol: f64,
) -> Result<DensityMatrix> {
    Ok(mle_reconstruct_traced(xs, max_n, max_iters, tol)?.0)
}

/// As `mle_reconstruct`, additionally returning the log-likelihood of every
/// iterate (used to verify the ascent property).
pub fn mle_reconstruct_traced(
    xs: &[f64],
    max_n: usize,
    max_iters: usize,
    tol: f64,
) -> Result<(DensityMatrix, Vec<f64>)> {
    if xs.len() < 10_000 {
        return Err(Error::Domain { what: "sample count", value: xs.len() as f64 });
    }
    if max_n > MAX_PATTERN_ORDER {
        return Err(Error::UnsupportedOrder { order: max_n, max: MAX_PATTERN_ORDER });
    }
    let dim = max_n + 1;
    // Phase-averaged POVM elements are diagonal: Pi(x)_nn = psi_n(x)^2.
    let mut proj = Vec::with_capacity(xs.len() * dim);
    for &x in xs {
        if !grid::in_range(x) {
            return Err(Error::DataRange { value: x });
        }
        let psi = fock_wavefunctions(max_n, x)?;
        proj.extend(psi.iter().map(|p| p * p));
    }
    let n_samples = xs.len() as f64;
    let mut rho = alloc::vec![1.0 / dim as f64; dim];
    let mut loglik = Vec::new();
    for _ in 0..max_iters {
        let mut ll = 0.0;
        let mut r = alloc::vec![0.0f64; dim];
        for row in proj.chunks_exact(dim) {
            let p: f64 = row.iter().zip(&rho).map(|(t, q)| t * q).sum();
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::DataRange { value: p });
            }
            ll += libm::log(p);
            for (acc, t) in r.iter_mut().zip(row) {
                *acc += t / p;
            }
        }
        let done = loglik.last().map_or(false, |prev| ll - prev < tol);
        loglik.push(ll);
        if done {
            break;
        }
        let mut norm = 0.0;
        for (q, rn) in rho.iter_mut().zip(&r) {
            let scaled = rn / n_samples;
            *q *= scaled * scaled;
            norm += *q;
        }
        for q in rho.iter_mut() {
            *q /= norm;
        }
    }
    Ok((DensityMatrix::from_diagonal(&rho), loglik))
}

/// Root-mean-square deviation of two sections from a reference on the same
/// grid; returns (rms_a, rms_b).
pub fn compare_sections(
    a: &WignerSection,
    b: &WignerSection,
    truth: &WignerSection,
) -> Result<(f64, f64)> {
    if a.coords != truth.coords || b.coords != truth.coords {
        return Err(Error::GridMismatch);
    }
    let rms = |s: &WignerSection| {
        let acc: f64 =
            s.values.iter().zip(&truth.values).map(|(v, t)| (v - t) * (v - t)).sum();
        libm::sqrt(acc / s.values.len() as f64)
    };
    Ok((rms(a), rms(b)))
}
