mod common;

use std::sync::OnceLock;

use cavdyn::config::parse_config;
use cavdyn::observables::{channel_populations, dominant_period};
use cavdyn::units::{convert, Unit};
use cavdyn::{envelope_field, HamiltonianModel, SimulationConfig};
use common::*;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

const UNITS: [Unit; 8] = [
    Unit::Hartree,
    Unit::ElectronVolt,
    Unit::AuTime,
    Unit::Femtosecond,
    Unit::Bohr,
    Unit::Angstrom,
    Unit::ElectronMass,
    Unit::Amu,
];

fn small_config() -> &'static SimulationConfig {
    static CFG: OnceLock<SimulationConfig> = OnceLock::new();
    CFG.get_or_init(|| coarse(default_config(), 32))
}

fn amplitudes(dim: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim).prop_map(|v| v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unit_conversion_round_trips(v in -1e6..1e6f64, i in 0usize..8, j in 0usize..8) {
        let (a, b) = (UNITS[i], UNITS[j]);
        match convert(v, a, b) {
            Ok(w) => {
                let back = convert(w, b, a).unwrap();
                prop_assert!((back - v).abs() <= 1e-14 * v.abs().max(1e-300));
                prop_assert_eq!(a.dimension(), b.dimension());
            }
            Err(_) => prop_assert_ne!(a.dimension(), b.dimension()),
        }
        prop_assert_eq!(a.to_string().parse::<Unit>().unwrap(), a);
    }

    #[test]
    fn populations_partition_the_norm(psi in amplitudes(4 * 3 * 32)) {
        let model = HamiltonianModel::from_config(small_config()).unwrap();
        let dr = model.grid.spacing();
        let p = channel_populations(&psi, &model.basis, dr);
        let norm = dr * psi.iter().map(C64::norm_sqr).sum::<f64>();
        prop_assert!((p.norm - norm).abs() < 1e-12 * norm);
        prop_assert!((p.channels.iter().sum::<f64>() - norm).abs() < 1e-12 * norm);
        prop_assert!(p.photon_state <= p.channels[1]);
        prop_assert!(p.n_expect >= 0.0 && p.n_expect <= model.basis.n_max as f64 * norm * (1.0 + 1e-12));
        // rescaled to unit norm the populations sum to one
        let scaled: Vec<C64> = psi.iter().map(|a| a / norm.sqrt()).collect();
        let q = channel_populations(&scaled, &model.basis, dr);
        prop_assert!((q.channels.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lossless_hamiltonian_is_hermitian(
        a in amplitudes(4 * 3 * 32),
        b in amplitudes(4 * 3 * 32),
        g_scale in 0.0..10.0f64,
        t_frac in 0.0..1.2f64,
    ) {
        let mut cfg = small_config().clone();
        cfg.cavity.g *= g_scale;
        let model = HamiltonianModel::from_config(&cfg).unwrap();
        let t = t_frac * model.pulse_end();
        let mut ws = model.workspace();
        let (mut ha, mut hb) = (vec![C64::new(0.0, 0.0); a.len()], vec![C64::new(0.0, 0.0); a.len()]);
        model.apply(&mut ws, t, &a, &mut ha, None);
        model.apply(&mut ws, t, &b, &mut hb, None);
        let (x, y) = (dot(&a, &hb), dot(&ha, &b));
        prop_assert!((x - y).norm() < 1e-12 * (1.0 + x.norm()), "{} vs {}", x, y);
    }

    #[test]
    fn norm_loss_rate_is_kappa_times_photon_number(psi in amplitudes(4 * 3 * 32), kappa in 0.0..1e-2f64) {
        let mut cfg = small_config().clone();
        cfg.cavity.kappa = kappa;
        let model = HamiltonianModel::from_config(&cfg).unwrap();
        let dr = model.grid.spacing();
        let mut h = vec![C64::new(0.0, 0.0); psi.len()];
        model.apply(&mut model.workspace(), 0.3 * model.pulse_end(), &psi, &mut h, None);
        // d‖ψ‖²/dt = 2 Im⟨ψ|Hψ⟩
        let rate = 2.0 * dr * dot(&psi, &h).im;
        let n = channel_populations(&psi, &model.basis, dr).n_expect;
        prop_assert!((rate + kappa * n).abs() < 1e-12 * (1.0 + n), "{} vs {}", rate, -kappa * n);
    }

    #[test]
    fn canonical_echo_reparses_to_the_same_config(g_rel in 1e-4..2e-2f64, kappa in 0.0..1e-3f64, n_max in 1usize..5) {
        let mut cfg = default_config();
        cfg.cavity.g = g_rel * cfg.cavity.omega_c;
        cfg.cavity.kappa = kappa;
        cfg.cavity.n_max = n_max;
        let again = parse_config(&cfg.canonical_echo(), None).unwrap();
        prop_assert_eq!(again, cfg);
    }

    #[test]
    fn field_vanishes_outside_the_pulse(t in -1e4..3e4f64) {
        let laser = small_config().laser;
        let e = envelope_field(t, &laser);
        prop_assert!(e.abs() <= laser.e0);
        if t <= laser.t_start || t >= laser.t_end() {
            prop_assert_eq!(e, 0.0);
        }
    }

    #[test]
    fn dominant_period_of_a_sinusoid(period in 50.0..800.0f64, phase in 0.0..6.28f64, offset in 0.0..1.0f64) {
        let t: Vec<f64> = (0..4000).map(|i| i as f64).collect();
        let y: Vec<f64> = t.iter().map(|x| offset + 0.1 * (2.0 * std::f64::consts::PI * x / period + phase).sin()).collect();
        let got = dominant_period(&t, &y).unwrap();
        prop_assert!((got / period - 1.0).abs() < 0.01, "{} vs {}", got, period);
    }
}
