//! Property suites for the state model and the ingestion arithmetic.

use focktomo_core::ingest::{build_histogram, calibrate_quadratures};
use focktomo_core::state::{
    apply_loss, fock_wavefunctions, lossy_marginal, marginal_pdf, DensityMatrix, PhaseAngle,
};
use num_complex::Complex64;
use proptest::prelude::*;

/// Random diagonal state of dimension 2..=8 with unit trace.
fn diagonal_state() -> impl Strategy<Value = DensityMatrix> {
    prop::collection::vec(0.01f64..1.0, 2..=8).prop_map(|raw| {
        let total: f64 = raw.iter().sum();
        let normalized: Vec<f64> = raw.iter().map(|p| p / total).collect();
        DensityMatrix::from_diagonal(&normalized)
    })
}

/// Random mixed state with off-diagonal structure: a convex mixture of two
/// random pure states.
fn mixed_state() -> impl Strategy<Value = DensityMatrix> {
    (
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..=6),
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..=6),
        0.0f64..1.0,
    )
        .prop_map(|(a, b, weight)| {
            let dim = a.len().min(b.len());
            let normalize = |v: &[(f64, f64)]| -> Vec<Complex64> {
                let norm: f64 = v.iter().take(dim).map(|(re, im)| re * re + im * im).sum();
                let norm = norm.sqrt().max(1e-6);
                v.iter().take(dim).map(|&(re, im)| Complex64::new(re / norm, im / norm)).collect()
            };
            let pa = DensityMatrix::from_pure(&normalize(&a));
            let pb = DensityMatrix::from_pure(&normalize(&b));
            let mut rho = DensityMatrix::zeros(dim);
            for n in 0..dim {
                for m in n..dim {
                    rho.set(n, m, pa.get(n, m) * weight + pb.get(n, m) * (1.0 - weight));
                }
            }
            rho
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diagonal_marginals_are_even(rho in diagonal_state(), x in 0.0f64..4.0) {
        let theta = PhaseAngle::new(0.0);
        let plus = marginal_pdf(&rho, x, theta).unwrap();
        let minus = marginal_pdf(&rho, -x, theta).unwrap();
        prop_assert!((plus - minus).abs() <= 1e-12);
    }

    #[test]
    fn marginals_are_nonnegative_and_normalized(
        rho in mixed_state(),
        theta in 0.0f64..core::f64::consts::TAU,
    ) {
        let theta = PhaseAngle::new(theta);
        // adaptive-step Simpson over [-8, 8]
        let n = 3200;
        let h = 16.0 / n as f64;
        let mut total = marginal_pdf(&rho, -8.0, theta).unwrap()
            + marginal_pdf(&rho, 8.0, theta).unwrap();
        for i in 1..n {
            let x = -8.0 + i as f64 * h;
            let p = marginal_pdf(&rho, x, theta).unwrap();
            prop_assert!(p >= -1e-12, "negative density {p} at {x}");
            total += if i % 2 == 1 { 4.0 * p } else { 2.0 * p };
        }
        total *= h / 3.0;
        prop_assert!((total - 1.0).abs() <= 1e-8, "integral {total}");
    }

    #[test]
    fn loss_channel_is_a_semigroup(
        rho in mixed_state(),
        eta1 in 0.0f64..=1.0,
        eta2 in 0.0f64..=1.0,
    ) {
        let chained = apply_loss(&apply_loss(&rho, eta1).unwrap(), eta2).unwrap();
        let direct = apply_loss(&rho, eta1 * eta2).unwrap();
        for n in 0..rho.dim() {
            for m in 0..rho.dim() {
                let d = chained.get(n, m) - direct.get(n, m);
                prop_assert!(d.norm_sqr().sqrt() <= 1e-10, "element ({n},{m}) differs by {}", d.norm_sqr().sqrt());
            }
        }
    }

    #[test]
    fn loss_output_is_hermitian_unit_trace(rho in mixed_state(), eta in 0.0f64..=1.0) {
        let out = apply_loss(&rho, eta).unwrap();
        prop_assert!((out.trace() - 1.0).abs() <= 1e-12);
        for n in 0..out.dim() {
            for m in 0..out.dim() {
                let d = out.get(n, m) - out.get(m, n).conj();
                prop_assert!(d.norm_sqr() == 0.0);
            }
        }
    }

    #[test]
    fn lossy_marginal_agrees_with_the_loss_channel(eta in 0.0f64..=1.0, x in -4.0f64..4.0) {
        let rho = apply_loss(&DensityMatrix::fock(1, 2), eta).unwrap();
        let a = marginal_pdf(&rho, x, PhaseAngle::new(1.1)).unwrap();
        let b = lossy_marginal(x, eta).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn wavefunction_recurrence_satisfies_the_oscillator_equation(
        n in 0usize..=20,
        x in -5.0f64..5.0,
    ) {
        // second derivative by the ladder identity applied twice must match
        // (4x^2 - 4n - 2) psi
        let psi = fock_wavefunctions(n + 2, x).unwrap();
        let dpsi_n = |k: usize| -> f64 {
            let lower = if k >= 1 { (k as f64).sqrt() * psi[k - 1] } else { 0.0 };
            lower - ((k + 1) as f64).sqrt() * psi[k + 1]
        };
        let h = 1e-5;
        let psi_p = fock_wavefunctions(n, x + h).unwrap()[n];
        let psi_m = fock_wavefunctions(n, x - h).unwrap()[n];
        let second = (psi_p - 2.0 * psi[n] + psi_m) / (h * h);
        let expect = (4.0 * x * x - 4.0 * n as f64 - 2.0) * psi[n];
        prop_assert!((second - expect).abs() <= 1e-3 * (1.0 + expect.abs()));
        // and the first-derivative ladder identity agrees with differences
        let first = (psi_p - psi_m) / (2.0 * h);
        prop_assert!((first - dpsi_n(n)).abs() <= 1e-6 * (1.0 + first.abs()));
    }

    #[test]
    fn histogram_conserves_every_sample(xs in prop::collection::vec(-5.0f64..5.0, 1..400)) {
        let h = build_histogram(&xs, 0.05).unwrap();
        prop_assert_eq!(h.counts.iter().sum::<u64>(), xs.len() as u64);
        prop_assert_eq!(h.total, xs.len() as u64);
    }

    #[test]
    fn calibration_is_invariant_under_gain(
        gain in 0.1f64..100.0,
        shift in -10.0f64..10.0,
    ) {
        // a fixed synthetic dark set with nonzero variance
        let darks: Vec<f64> = (0..2000).map(|i| ((i % 7) as f64 - 3.0) * 0.21 + shift).collect();
        let signal: Vec<f64> = (0..50).map(|i| i as f64 * 0.13 - 3.0 + shift).collect();
        let (a, s1) = calibrate_quadratures(&signal, &darks).unwrap();
        let darks_g: Vec<f64> = darks.iter().map(|d| d * gain).collect();
        let signal_g: Vec<f64> = signal.iter().map(|x| x * gain).collect();
        let (b, s2) = calibrate_quadratures(&signal_g, &darks_g).unwrap();
        prop_assert!((s2 / s1 - gain).abs() <= 1e-9 * gain);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }
}
