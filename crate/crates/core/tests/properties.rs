//! Property tests for the invariants of each module.

use chiraldyn::chirality::{circular_field, coupling_kind, BeamConfig, CouplingKind, Direction, Handedness};
use chiraldyn::dynamics::{
    build_model, centered_grid, drift_diffusion, fwhm, output_covariance, steady_state_cov, ModelParams, Selector,
};
use chiraldyn::eit::{
    doppler_averaged_chi, eit_spectrum, lambda_chi, transmission, BaselineWindow, EitParams, Geometry,
};
use chiraldyn::floquet::{bessel_fit, bessel_j, bessel_j_table, multicolor_spectrum, BesselOrder, FloquetDrive};
use chiraldyn::gaussian::{self, sampling, symplectic_eigenvalues, DetInvariants};
use chiraldyn::metrics::discord::{second_radicand, second_radicand_factored};
use chiraldyn::metrics::{entropy_h, gaussian_discord, q_from_cov, MeasuredMode};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TAU: f64 = std::f64::consts::TAU;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn handedness() -> impl Strategy<Value = Handedness> {
    prop_oneof![Just(Handedness::Rhcp), Just(Handedness::Lhcp)]
}

fn direction() -> impl Strategy<Value = Direction> {
    prop_oneof![Just(Direction::PlusZ), Just(Direction::MinusZ)]
}

fn params(c: f64, ratio: f64, gamma_hz: f64, kappa_hz: f64) -> ModelParams {
    let gamma = TAU * gamma_hz;
    let kappa = TAU * kappa_hz;
    // cooperativity 4 g1 g2 / (γκ) = c with g2 = ratio · g1
    let g1 = (c * gamma * kappa / (4.0 * ratio)).sqrt();
    ModelParams {
        g1,
        g2: ratio * g1,
        gamma_spin: gamma,
        kappa1: kappa,
        kappa2: kappa,
        delta_spin: 0.0,
        carrier_hz: 298_800.0,
    }
}

fn epr_variances(cov: &DMatrix<f64>) -> (f64, f64) {
    let x = Selector::parse("X1-X2").unwrap().weights;
    let p = Selector::parse("P1+P2").unwrap().weights;
    let q = |w: [f64; 4]| {
        let v = DVector::from_column_slice(&w);
        (v.transpose() * cov * &v)[(0, 0)]
    };
    (q(x), q(p))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn det_invariants_survive_local_symplectics(seed in any::<u64>()) {
        let mut r = rng(seed);
        let cov = sampling::random_physical_cov(&mut r);
        let l = sampling::random_local(&mut r, 0.5);
        let a = gaussian::det_invariants(&cov).unwrap();
        let b = gaussian::det_invariants(&(&l * &cov * l.transpose())).unwrap();
        let scale = 1.0 + a.i1.abs() + a.i2.abs() + a.i3.abs() + a.i4.abs();
        prop_assert!((a.i1 - b.i1).abs() < 1e-9 * scale);
        prop_assert!((a.i2 - b.i2).abs() < 1e-9 * scale);
        prop_assert!((a.i3 - b.i3).abs() < 1e-9 * scale);
        prop_assert!((a.i4 - b.i4).abs() < 1e-9 * scale);
    }

    #[test]
    fn product_state_spectrum_is_marginal_spectrum(seed in any::<u64>(), n1 in 1.0..6.0f64, n2 in 1.0..6.0f64) {
        let mut r = rng(seed);
        let a = sampling::random_single_mode(&mut r, 0.6);
        let b = sampling::random_single_mode(&mut r, 0.6);
        let sa = a * a.transpose() * n1;
        let sb = b * b.transpose() * n2;
        let mut cov = DMatrix::zeros(4, 4);
        cov.view_mut((0, 0), (2, 2)).copy_from(&sa);
        cov.view_mut((2, 2), (2, 2)).copy_from(&sb);
        let nu = symplectic_eigenvalues(&cov).unwrap();
        let mut want = [sa.determinant().sqrt(), sb.determinant().sqrt()];
        want.sort_by(|x, y| y.total_cmp(x));
        prop_assert!((nu[0] - want[0]).abs() < 1e-9 * want[0]);
        prop_assert!((nu[1] - want[1]).abs() < 1e-9 * want[1]);
    }

    #[test]
    fn pure_two_mode_states_have_unit_i4(seed in any::<u64>()) {
        let s = sampling::random_two_mode(&mut rng(seed));
        let cov = &s * s.transpose();
        let inv = gaussian::det_invariants(&cov).unwrap();
        prop_assert!((inv.i4 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn coupling_kind_is_symmetric(h1 in handedness(), d1 in direction(), h2 in handedness(), d2 in direction()) {
        let a = BeamConfig::new(h1, d1);
        let b = BeamConfig::new(h2, d2);
        prop_assert_eq!(coupling_kind(&a, &b), coupling_kind(&b, &a));
        let toggled = BeamConfig::new(h1.flipped(), d1);
        prop_assert_ne!(coupling_kind(&toggled, &b), coupling_kind(&a, &b));
        let both = BeamConfig::new(h1.flipped(), d1.flipped());
        prop_assert_eq!(coupling_kind(&both, &b), coupling_kind(&a, &b));
        let same_trace = (0..64).all(|i| {
            let z = 795e-9 * f64::from(i) / 64.0;
            circular_field(&a, z) == circular_field(&b, z)
        });
        prop_assert_eq!(same_trace, coupling_kind(&a, &b) == CouplingKind::Dbs);
    }

    #[test]
    fn dbs_preserves_vacuum(c in 0.0..5.0f64, ratio in 0.2..5.0f64, gamma_hz in 20.0..500.0f64, kappa_hz in 200.0..5000.0f64) {
        let m = build_model(CouplingKind::Dbs, params(c, ratio, gamma_hz, kappa_hz)).unwrap();
        let dd = drift_diffusion(&m);
        let cov = steady_state_cov(&dd).unwrap();
        let dev = (&cov - DMatrix::identity(6, 6)).abs().max();
        prop_assert!(dev < 1e-10, "deviation {dev}");
        let out = output_covariance(&dd, m.params.carrier_hz + 37.0).unwrap();
        prop_assert!(q_from_cov(&out).unwrap().abs() < 1e-10);
    }

    #[test]
    fn nhpa_below_threshold_is_physical_and_correlated(c in 0.01..0.95f64, ratio in 0.2..0.95f64) {
        let m = build_model(CouplingKind::Nhpa, params(c, ratio, 100.0, 1000.0)).unwrap();
        let dd = drift_diffusion(&m);
        let cov = steady_state_cov(&dd).unwrap();
        prop_assert!(gaussian::min_symplectic_eigenvalue(&cov).unwrap() >= 1.0 - 1e-9);
        let out = output_covariance(&dd, m.params.carrier_hz).unwrap();
        prop_assert!(gaussian::min_symplectic_eigenvalue(&out).unwrap() >= 1.0 - 1e-9);
        prop_assert!(q_from_cov(&out).unwrap() > 0.0);
        // g₂ < g₁ squeezes both EPR combinations below shot noise.
        let (vx, vp) = epr_variances(&out);
        prop_assert!(vx < 1.0 && vp < 1.0, "{vx} {vp}");
    }

    #[test]
    fn symmetric_nhpa_epr_combinations_sit_at_shot_noise(c in 0.01..0.95f64, df in -300.0..300.0f64) {
        let m = build_model(CouplingKind::Nhpa, params(c, 1.0, 100.0, 1000.0)).unwrap();
        let out = output_covariance(&drift_diffusion(&m), m.params.carrier_hz + df).unwrap();
        let (vx, vp) = epr_variances(&out);
        prop_assert!((vx - 1.0).abs() < 1e-12 && (vp - 1.0).abs() < 1e-12);
        prop_assert!(q_from_cov(&out).unwrap() > 0.0);
    }

    #[test]
    fn q_vanishes_without_cross_block(seed in any::<u64>(), n1 in 1.0..4.0f64, n2 in 1.0..4.0f64) {
        let l = sampling::random_local(&mut rng(seed), 0.5);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![n1, n1, n2, n2]));
        let cov = &l * d * l.transpose();
        let cov = (&cov + cov.transpose()) * 0.5;
        prop_assert_eq!(q_from_cov(&cov).unwrap(), 0.0);
        for m in [MeasuredMode::A, MeasuredMode::B] {
            prop_assert!(gaussian_discord(&cov, m).unwrap().discord <= 1e-10);
        }
    }

    #[test]
    fn radicand_forms_agree(i1 in 1.0..20.0f64, i2 in 1.0..20.0f64, i3 in -10.0..10.0f64, i4 in 1.0..200.0f64) {
        let inv = DetInvariants { i1, i2, i3, i4 };
        let a = second_radicand(&inv);
        let b = second_radicand_factored(&inv);
        let scale = (i1 * i2 + i4 + i3 * i3).powi(2);
        prop_assert!((a - b).abs() <= 1e-12 * scale);
    }

    #[test]
    fn entropy_is_increasing_and_concave(x in 1.0..50.0f64, dx in 1e-3..5.0f64) {
        let h0 = entropy_h(x).unwrap();
        let h1 = entropy_h(x + dx).unwrap();
        let h2 = entropy_h(x + 2.0 * dx).unwrap();
        prop_assert!(h1 > h0);
        prop_assert!(h1 - h0 >= h2 - h1 - 1e-12);
    }

    #[test]
    fn bessel_sum_rule(x in 0.0..20.0f64) {
        let t = bessel_j_table(45, x);
        let s = t[0] * t[0] + 2.0 * t[1..].iter().map(|v| v * v).sum::<f64>();
        prop_assert!((s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sideband_strength_is_conserved(x in 0.0..8.0f64, g in 1.0..1e3f64) {
        let total: f64 = (-30..=30).map(|n| (g * bessel_j(n, x)).powi(2)).sum();
        prop_assert!((total / (g * g) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bessel_fit_scale_consistency(c in 0.05..50.0f64, k in 3000.0..15000.0f64) {
        let nu: Vec<f64> = (0..15).map(|i| 1000.0 + 700.0 * f64::from(i)).collect();
        let y: Vec<f64> = nu.iter().enumerate()
            .map(|(i, v)| bessel_j(0, k / v) * (1.0 + 0.01 * ((i * 7919) % 13) as f64 / 13.0))
            .collect();
        let ys: Vec<f64> = y.iter().map(|v| c * v).collect();
        let a = bessel_fit(&nu, &y, BesselOrder::Zero).unwrap();
        let b = bessel_fit(&nu, &ys, BesselOrder::Zero).unwrap();
        prop_assert!((b.k_u / a.k_u - 1.0).abs() < 1e-9, "{} vs {}", a.k_u, b.k_u);
        prop_assert!((b.amplitude / (c * a.amplitude) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn susceptibility_is_passive(dp in -2e8..2e8f64, v in -600.0..600.0f64, rabi_mhz in 0.01..5.0f64, counter in any::<bool>()) {
        let p = EitParams {
            rabi_c: TAU * rabi_mhz * 1e6,
            ..EitParams::default()
        };
        let g = if counter { Geometry::CounterPropagating } else { Geometry::CoPropagating };
        prop_assert!(lambda_chi(dp, v, g, &p).im >= 0.0);
        prop_assert!(doppler_averaged_chi(dp, g, &p).im >= 0.0);
    }

    #[test]
    fn susceptibility_mirror_symmetry(dp in 0.0..1e8f64, counter in any::<bool>()) {
        let p = EitParams::default();
        let g = if counter { Geometry::CounterPropagating } else { Geometry::CoPropagating };
        let a = doppler_averaged_chi(dp, g, &p);
        let b = doppler_averaged_chi(-dp, g, &p);
        let scale = a.norm().max(1e-300);
        prop_assert!((a.re + b.re).abs() <= 1e-9 * scale);
        prop_assert!((a.im - b.im).abs() <= 1e-9 * scale);
    }
}

fn closed_form_oracle_cases() -> Vec<DMatrix<f64>> {
    let mut r = rng(20_240);
    (0..1000)
        .map(|i| {
            if i % 2 == 0 {
                sampling::random_physical_cov(&mut r)
            } else {
                sampling::random_classical_like_cov(&mut r)
            }
        })
        .collect()
}

#[test]
fn discord_is_nonnegative_on_random_states() {
    for cov in closed_form_oracle_cases() {
        for m in [MeasuredMode::A, MeasuredMode::B] {
            let d = gaussian_discord(&cov, m).unwrap();
            assert!(d.discord >= 0.0);
        }
    }
}

#[test]
fn zero_index_multicolor_converges_to_single_color() {
    let m = build_model(CouplingKind::Nhpa, params(0.35, 1.0, 100.0, 1000.0)).unwrap();
    let sel = Selector::standard();
    let grid = centered_grid(m.params.carrier_hz, 8000.0, 801);
    let single = chiraldyn::dynamics::output_noise_spectrum(&drift_diffusion(&m), &sel, &grid, 0.0).unwrap();
    for x in [1e-3, 1e-5, 0.0] {
        let mc = multicolor_spectrum(&m, &FloquetDrive::with_index(3000.0, x, 2), &sel, &grid, 0.0).unwrap();
        let sup = mc
            .spectrum
            .series
            .iter()
            .zip(&single.series)
            .flat_map(|((_, a), (_, b))| a.iter().zip(b).map(|(u, v)| (u - v).abs()))
            .fold(0.0, f64::max);
        if x <= 1e-5 {
            assert!(sup <= 1e-8, "index {x}: {sup}");
        }
    }
}

#[test]
fn coupling_swap_toggles_every_sideband() {
    let grid = centered_grid(298_800.0, 12_000.0, 2401);
    for n_max in 0..=3u32 {
        let drive = FloquetDrive::with_index(3000.0, 1.8, n_max);
        for kind in [CouplingKind::Nhpa, CouplingKind::Dbs] {
            let m = build_model(kind, params(0.35, 1.0, 100.0, 1000.0)).unwrap();
            let sp = multicolor_spectrum(&m, &drive, &Selector::standard(), &grid, 0.0)
                .unwrap()
                .spectrum
                .with_q()
                .unwrap();
            let q = sp.get("Q").unwrap();
            for n in -(n_max as i32)..=(n_max as i32) {
                let f = 298_800.0 + 3000.0 * f64::from(n);
                let i = grid.iter().position(|g| (g - f).abs() < 1e-6).unwrap();
                match kind {
                    CouplingKind::Nhpa => assert!(q[i] > 1e-3, "n={n} Q={}", q[i]),
                    CouplingKind::Dbs => assert!(q[i].abs() < 1e-10),
                }
            }
        }
    }
}

fn co_dip_width_hz(rabi_hz: f64) -> f64 {
    let p = EitParams {
        rabi_c: TAU * rabi_hz,
        ..EitParams::default()
    };
    let half = 60.0 * (rabi_hz * rabi_hz / 5.75e6 + 1000.0);
    let grid = centered_grid(0.0, half, 4001);
    let rad: Vec<f64> = grid.iter().map(|f| TAU * f).collect();
    let t = transmission(&rad, Geometry::CoPropagating, &p).unwrap();
    let base = 0.5 * (t[0] + t[t.len() - 1]);
    let excess: Vec<f64> = t.iter().map(|v| v - base).collect();
    fwhm(&grid, &excess).unwrap()
}

#[test]
fn co_propagating_window_narrows_to_ground_decoherence() {
    let widths: Vec<f64> = [0.5e6, 0.2e6, 0.05e6].iter().map(|&r| co_dip_width_hz(r)).collect();
    assert!(widths[0] > widths[1] && widths[1] > widths[2], "{widths:?}");
    // γ₁₂/2π = 500 Hz sets the floor of the two-photon linewidth.
    let floor = 2.0 * 500.0;
    assert!(widths[2] >= 0.5 * floor && widths[2] < 4.0 * floor, "{widths:?}");
}

fn resonant_enhancement(u: f64, g: Geometry) -> f64 {
    let p = EitParams {
        u_thermal: u,
        ..EitParams::default()
    };
    let dark = EitParams { rabi_c: 1e-3, ..p };
    let t = transmission(&[0.0], g, &p).unwrap()[0];
    let t0 = transmission(&[0.0], g, &dark).unwrap()[0];
    t / t0 - 1.0
}

// The edge-baseline contrast is already clamped to 0 at u = 10 m/s for the
// counter geometry, so the trend is read from the on-resonance enhancement
// over the control-off medium.
#[test]
fn counter_contrast_falls_with_temperature() {
    let e: Vec<f64> = [10.0, 50.0, 160.0]
        .iter()
        .map(|&u| resonant_enhancement(u, Geometry::CounterPropagating))
        .collect();
    assert!(e[0] > e[1] && e[1] > e[2] && e[2] >= 0.0, "{e:?}");
    let c: Vec<f64> = [10.0, 50.0, 160.0]
        .iter()
        .map(|&u| {
            let p = EitParams {
                u_thermal: u,
                ..EitParams::default()
            };
            let grid = centered_grid(0.0, 50e3, 2001);
            eit_spectrum(
                &grid,
                Geometry::CounterPropagating,
                &p,
                BaselineWindow { edge_points: 200 },
            )
            .unwrap()
            .contrast
        })
        .collect();
    assert!(c[0] >= c[1] && c[1] >= c[2], "{c:?}");
}
