//! Fock-basis states, oscillator wavefunctions, quadrature marginals, and
//! the photon-loss channel.
//!
//! Quadratures are scaled so the vacuum has variance 1/4; in this convention
//! the vacuum marginal is exactly sqrt(2/pi) * exp(-2 x^2) and the marginal
//! of the vacuum/single-photon mixture with efficiency eta is
//! sqrt(2/pi) * [1 - eta (1 - 4 x^2)] * exp(-2 x^2).

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Variance of the vacuum quadrature in this crate's convention.
pub const VACUUM_VARIANCE: f64 = 0.25;

/// Highest wavefunction order evaluated by the recurrence.
pub const MAX_FOCK_ORDER: usize = 60;

const TWO_OVER_PI: f64 = 2.0 / core::f64::consts::PI;

/// LO phase, wrapped into [0, 2pi) on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseAngle(f64);

impl PhaseAngle {
    pub fn new(theta: f64) -> Self {
        let tau = core::f64::consts::TAU;
        let mut t = theta - tau * libm::floor(theta / tau);
        if t >= tau {
            t -= tau;
        }
        PhaseAngle(t)
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

/// Truncated Fock-basis density matrix, row-major, indexed from 0.
///
/// Hermiticity is enforced structurally on every mutation path. Unit trace
/// and positivity hold for constructed physical states; matrices assembled
/// from reconstructed estimates may relax both.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    elements: Vec<Complex64>,
}

impl DensityMatrix {
    /// Zero matrix of dimension `dim` (truncation M+1).
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "density matrix dimension must be positive");
        DensityMatrix { dim, elements: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    /// The vacuum state |0><0|.
    pub fn vacuum(dim: usize) -> Self {
        Self::fock(0, dim)
    }

    /// The Fock state |n><n| embedded in dimension `dim`.
    pub fn fock(n: usize, dim: usize) -> Self {
        assert!(n < dim, "Fock order {n} does not fit in dimension {dim}");
        let mut rho = Self::zeros(dim);
        rho.set(n, n, Complex64::new(1.0, 0.0));
        rho
    }

    /// Diagonal mixture from real populations. The populations are stored
    /// as given; no trace normalization is applied, so this also accepts
    /// raw reconstructed estimates.
    pub fn from_diagonal(populations: &[f64]) -> Self {
        let mut rho = Self::zeros(populations.len());
        for (n, &p) in populations.iter().enumerate() {
            rho.set(n, n, Complex64::new(p, 0.0));
        }
        rho
    }

    /// Pure state from a complex amplitude vector (the caller normalizes).
    pub fn from_pure(amplitudes: &[Complex64]) -> Self {
        let dim = amplitudes.len();
        let mut rho = Self::zeros(dim);
        for n in 0..dim {
            for m in 0..dim {
                rho.elements[n * dim + m] = amplitudes[n] * amplitudes[m].conj();
            }
        }
        rho
    }

    /// Build from raw row-major elements, Hermitizing by (A + A^dagger)/2.
    pub fn from_elements(dim: usize, elements: Vec<Complex64>) -> Result<Self> {
        if elements.len() != dim * dim {
            return Err(Error::Domain { what: "element count", value: elements.len() as f64 });
        }
        let mut rho = DensityMatrix { dim, elements };
        for n in 0..dim {
            rho.elements[n * dim + n] = Complex64::new(rho.elements[n * dim + n].re, 0.0);
            for m in (n + 1)..dim {
                let avg = 0.5 * (rho.elements[n * dim + m] + rho.elements[m * dim + n].conj());
                rho.elements[n * dim + m] = avg;
                rho.elements[m * dim + n] = avg.conj();
            }
        }
        Ok(rho)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.elements[n * self.dim + m]
    }

    /// Set rho_{n,m}; the mirror element is kept conjugate and diagonal
    /// entries are forced real.
    pub fn set(&mut self, n: usize, m: usize, value: Complex64) {
        if n == m {
            self.elements[n * self.dim + m] = Complex64::new(value.re, 0.0);
        } else {
            self.elements[n * self.dim + m] = value;
            self.elements[m * self.dim + n] = value.conj();
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|n| self.get(n, n).re).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|n| self.get(n, n).re).collect()
    }

    /// Smallest eigenvalue, via Jacobi sweeps on the real symmetric
    /// embedding [[Re, -Im], [Im, Re]] (each eigenvalue appears twice).
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim;
        let m = 2 * d;
        let mut a = vec![0.0f64; m * m];
        for i in 0..d {
            for j in 0..d {
                let z = self.get(i, j);
                a[i * m + j] = z.re;
                a[(i + d) * m + (j + d)] = z.re;
                a[i * m + (j + d)] = -z.im;
                a[(i + d) * m + j] = z.im;
            }
        }
        jacobi_min_eigenvalue(&mut a, m)
    }

    /// Check the physical-state invariants at the given tolerances.
    pub fn validate(&self, trace_tol: f64, eigen_tol: f64) -> Result<()> {
        let tr = self.trace();
        if libm::fabs(tr - 1.0) > trace_tol {
            return Err(Error::Domain { what: "trace", value: tr });
        }
        let min = self.min_eigenvalue();
        if min < -eigen_tol {
            return Err(Error::Domain { what: "minimum eigenvalue", value: min });
        }
        Ok(())
    }
}

fn jacobi_min_eigenvalue(a: &mut [f64], n: usize) -> f64 {
    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if libm::fabs(apq) < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + libm::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut min = f64::INFINITY;
    for k in 0..n {
        min = min.min(a[k * n + k]);
    }
    min
}

/// Oscillator eigenfunctions psi_0..psi_nmax at `x`, by the stable ladder
/// recurrence psi_{n+1} = (2x/sqrt(n+1)) psi_n - sqrt(n/(n+1)) psi_{n-1}.
pub fn fock_wavefunctions(nmax: usize, x: f64) -> Result<Vec<f64>> {
    if nmax > MAX_FOCK_ORDER {
        return Err(Error::UnsupportedOrder { order: nmax, max: MAX_FOCK_ORDER });
    }
    let mut out = Vec::with_capacity(nmax + 1);
    let psi0 = libm::pow(TWO_OVER_PI, 0.25) * libm::exp(-x * x);
    out.push(psi0);
    if nmax >= 1 {
        out.push(2.0 * x * psi0);
    }
    for n in 1..nmax {
        let nf = n as f64;
        let next =
            (2.0 * x / libm::sqrt(nf + 1.0)) * out[n] - libm::sqrt(nf / (nf + 1.0)) * out[n - 1];
        out.push(next);
    }
    Ok(out)
}

/// psi_n(x) in the vacuum-variance-1/4 convention.
pub fn fock_wavefunction(n: usize, x: f64) -> Result<f64> {
    Ok(*fock_wavefunctions(n, x)?.last().expect("non-empty"))
}

/// Quadrature distribution p(x, theta) of a state:
/// sum_{n,m} Re[rho_{n,m} e^{i(n-m)theta}] psi_n(x) psi_m(x).
pub fn marginal_pdf(state: &DensityMatrix, x: f64, theta: PhaseAngle) -> Result<f64> {
    let d = state.dim();
    let psi = fock_wavefunctions(d - 1, x)?;
    let t = theta.radians();
    let mut p = 0.0;
    for n in 0..d {
        p += state.get(n, n).re * psi[n] * psi[n];
        for m in (n + 1)..d {
            let arg = (n as f64 - m as f64) * t;
            let phase = Complex64::new(libm::cos(arg), libm::sin(arg));
            p += 2.0 * (state.get(n, m) * phase).re * psi[n] * psi[m];
        }
    }
    Ok(p)
}

/// Phase-averaged marginal; only the populations contribute.
pub fn phase_averaged_pdf(state: &DensityMatrix, x: f64) -> Result<f64> {
    let d = state.dim();
    let psi = fock_wavefunctions(d - 1, x)?;
    Ok((0..d).map(|n| state.get(n, n).re * psi[n] * psi[n]).sum())
}

/// Marginal of the single-photon state detected with efficiency `eta`:
/// sqrt(2/pi) [1 - eta (1 - 4x^2)] e^{-2x^2}.
pub fn lossy_marginal(x: f64, eta: f64) -> Result<f64> {
    check_efficiency(eta)?;
    Ok(libm::sqrt(TWO_OVER_PI) * (1.0 - eta * (1.0 - 4.0 * x * x)) * libm::exp(-2.0 * x * x))
}

/// CDF of `lossy_marginal`, used by samplers and test oracles.
///
/// The density is [(1-eta) + 4 eta x^2] N(0, 1/4)(x); both pieces integrate
/// in closed form through erf.
pub fn lossy_marginal_cdf(x: f64, eta: f64) -> Result<f64> {
    check_efficiency(eta)?;
    let phi = 0.5 * (1.0 + libm::erf(x * core::f64::consts::SQRT_2));
    let gauss = libm::sqrt(TWO_OVER_PI) * libm::exp(-2.0 * x * x);
    Ok((1.0 - eta) * phi + eta * (phi - x * gauss))
}

fn check_efficiency(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) || eta.is_nan() {
        return Err(Error::Domain { what: "efficiency", value: eta });
    }
    Ok(())
}

/// Binomial photon-loss channel of transmissivity `eta`.
///
/// rho'_{m,m'} = sum_k sqrt(C(m+k,k) C(m'+k,k)) eta^{(m+m')/2} (1-eta)^k
///               rho_{m+k,m'+k}.
pub fn apply_loss(state: &DensityMatrix, eta: f64) -> Result<DensityMatrix> {
    check_efficiency(eta)?;
    let d = state.dim();
    let mut out = DensityMatrix::zeros(d);
    let loss = 1.0 - eta;
    for m in 0..d {
        for mp in m..d {
            let mut acc = Complex64::new(0.0, 0.0);
            let eta_pow = pow_half_integer(eta, m + mp);
            let mut loss_pow = 1.0;
            let mut k = 0usize;
            while m + k < d && mp + k < d {
                let w = libm::sqrt(binomial(m + k, k) * binomial(mp + k, k));
                acc += state.get(m + k, mp + k) * (w * eta_pow * loss_pow);
                loss_pow *= loss;
                k += 1;
            }
            out.set(m, mp, acc);
        }
    }
    Ok(out)
}

// 0^0 = 1 keeps the eta = 0 vacuum projection exact.
fn pow_half_integer(base: f64, twice_exp: usize) -> f64 {
    if twice_exp == 0 {
        return 1.0;
    }
    libm::pow(base, twice_exp as f64 / 2.0)
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        assert!(n % 2 == 0);
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn wavefunction_odd_parity_vanishes_at_origin() {
        assert_eq!(fock_wavefunction(1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn vacuum_wavefunction_at_origin() {
        // direct evaluation of (2/pi)^(1/4)
        let expected = 0.8932438417380023;
        assert!((fock_wavefunction(0, 0.0).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn wavefunctions_are_normalized() {
        for n in 0..=20 {
            let norm = simpson(|x| fock_wavefunction(n, x).unwrap().powi(2), -8.0, 8.0, 4000);
            assert!((norm - 1.0).abs() < 1e-10, "n={n}: {norm}");
        }
    }

    #[test]
    fn order_above_cap_is_rejected() {
        assert!(matches!(
            fock_wavefunction(61, 0.3),
            Err(Error::UnsupportedOrder { order: 61, max: 60 })
        ));
    }

    #[test]
    fn phase_angle_wraps() {
        let t = PhaseAngle::new(-1.0);
        assert!((t.radians() - (core::f64::consts::TAU - 1.0)).abs() < 1e-12);
        assert_eq!(PhaseAngle::new(0.0).radians(), 0.0);
    }

    #[test]
    fn diagonal_states_are_phase_invariant() {
        let rho = DensityMatrix::from_diagonal(&[0.3, 0.5, 0.2]);
        for x in [-1.3, 0.0, 0.4, 2.2] {
            let a = marginal_pdf(&rho, x, PhaseAngle::new(0.0)).unwrap();
            let b = marginal_pdf(&rho, x, PhaseAngle::new(1.9)).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn lossy_state_marginal_at_origin() {
        let rho = DensityMatrix::from_diagonal(&[1.0 - 0.574, 0.574]);
        let p = marginal_pdf(&rho, 0.0, PhaseAngle::new(0.7)).unwrap();
        let expected = libm::sqrt(2.0 / core::f64::consts::PI) * (1.0 - 0.574);
        assert!((p - expected).abs() < 1e-12);
        assert!((p - 0.33990).abs() < 5e-6);
    }

    #[test]
    fn superposition_mean_quadrature() {
        // (|0> + |1>)/sqrt(2) has <x> = 1/2 in this convention.
        let amp = 1.0 / libm::sqrt(2.0);
        let rho = DensityMatrix::from_pure(&[Complex64::new(amp, 0.0), Complex64::new(amp, 0.0)]);
        let mean = simpson(
            |x| x * marginal_pdf(&rho, x, PhaseAngle::new(0.0)).unwrap(),
            -8.0,
            8.0,
            4000,
        );
        assert!((mean - 0.5).abs() < 1e-8, "mean {mean}");
    }

    #[test]
    fn marginal_integrates_to_one() {
        let states = [
            DensityMatrix::fock(1, 4),
            DensityMatrix::from_diagonal(&[0.426, 0.574]),
            DensityMatrix::fock(5, 8),
        ];
        for rho in &states {
            for theta in [0.0, 1.1] {
                let total = simpson(
                    |x| marginal_pdf(rho, x, PhaseAngle::new(theta)).unwrap(),
                    -8.0,
                    8.0,
                    4000,
                );
                assert!((total - 1.0).abs() < 1e-8, "total {total}");
            }
        }
    }

    #[test]
    fn lossy_marginal_limits() {
        for x in [-0.7, 0.0, 1.4] {
            let v = lossy_marginal(x, 0.0).unwrap();
            let vac = libm::sqrt(2.0 / core::f64::consts::PI) * libm::exp(-2.0 * x * x);
            assert!((v - vac).abs() < 1e-15);
        }
        assert!((lossy_marginal(0.0, 0.574).unwrap() - 0.33990).abs() < 5e-6);
        assert!(lossy_marginal(0.0, -0.1).is_err());
        assert!(lossy_marginal(0.0, 1.1).is_err());
    }

    #[test]
    fn lossy_marginal_peak_at_unit_efficiency() {
        // stationary points of 4x^2 e^{-2x^2} sit at +-1/sqrt(2)
        let peak = 1.0 / libm::sqrt(2.0);
        let p = lossy_marginal(peak, 1.0).unwrap();
        for dx in [-1e-4, 1e-4] {
            assert!(lossy_marginal(peak + dx, 1.0).unwrap() < p);
        }
    }

    #[test]
    fn lossy_marginal_cdf_consistency() {
        for eta in [0.0, 0.574, 1.0] {
            assert!(lossy_marginal_cdf(-8.0, eta).unwrap().abs() < 1e-12);
            assert!((lossy_marginal_cdf(8.0, eta).unwrap() - 1.0).abs() < 1e-12);
            let num = simpson(|x| lossy_marginal(x, eta).unwrap(), -8.0, 1.3, 4000);
            assert!((num - lossy_marginal_cdf(1.3, eta).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn lossy_marginal_matches_state_model_everywhere() {
        let eta = 0.574;
        let rho = apply_loss(&DensityMatrix::fock(1, 2), eta).unwrap();
        for i in 0..=200 {
            let x = -4.0 + i as f64 * 0.04;
            let a = marginal_pdf(&rho, x, PhaseAngle::new(0.3)).unwrap();
            let b = lossy_marginal(x, eta).unwrap();
            assert!((a - b).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn loss_on_single_photon() {
        for eta in [0.0, 0.3, 0.574, 1.0] {
            let rho = apply_loss(&DensityMatrix::fock(1, 2), eta).unwrap();
            let d = rho.diagonal();
            assert!((d[0] - (1.0 - eta)).abs() < 1e-15);
            assert!((d[1] - eta).abs() < 1e-15);
        }
    }

    #[test]
    fn loss_fixes_the_vacuum() {
        for eta in [0.0, 0.41, 1.0] {
            let rho = apply_loss(&DensityMatrix::vacuum(3), eta).unwrap();
            assert_eq!(rho.get(0, 0).re, 1.0);
            assert_eq!(rho.get(1, 1).re, 0.0);
        }
    }

    #[test]
    fn loss_on_two_photon_state() {
        let rho = apply_loss(&DensityMatrix::fock(2, 3), 0.5).unwrap();
        let d = rho.diagonal();
        assert!((d[0] - 0.25).abs() < 1e-15);
        assert!((d[1] - 0.5).abs() < 1e-15);
        assert!((d[2] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn loss_preserves_trace_and_positivity() {
        let rho = DensityMatrix::from_diagonal(&[0.1, 0.2, 0.3, 0.4]);
        let out = apply_loss(&rho, 0.37).unwrap();
        assert!((out.trace() - 1.0).abs() < 1e-12);
        out.validate(1e-12, 1e-10).unwrap();
    }

    #[test]
    fn loss_rejects_bad_efficiency() {
        let rho = DensityMatrix::vacuum(2);
        assert!(matches!(apply_loss(&rho, 1.5), Err(Error::Domain { .. })));
        assert!(matches!(apply_loss(&rho, -0.01), Err(Error::Domain { .. })));
    }

    #[test]
    fn min_eigenvalue_of_known_matrices() {
        let rho = DensityMatrix::from_diagonal(&[0.6, 0.4]);
        assert!((rho.min_eigenvalue() - 0.4).abs() < 1e-10);
        let amp = 1.0 / libm::sqrt(2.0);
        let pure = DensityMatrix::from_pure(&[Complex64::new(amp, 0.0), Complex64::new(0.0, amp)]);
        assert!(pure.min_eigenvalue().abs() < 1e-10);
    }
}
