mod common;

use cavdyn::config::DipoleSpec;
use cavdyn::propagator::{field_free_propagate, FieldFreeEvolver, Propagator};
use cavdyn::units::fs_to_au;
use cavdyn::vibrational::CurveTag;
use cavdyn::{initial_state, propagate, step, HamiltonianModel, WavefunctionState};
use common::*;
use num_complex::Complex64 as C64;

fn quiet(points: usize) -> HamiltonianModel {
    let mut cfg = coarse(default_config(), points);
    cfg.laser.e0 = 0.0;
    cfg.cavity.g = 0.0;
    HamiltonianModel::from_config(&cfg).unwrap()
}

#[test]
fn stationary_state_picks_up_exact_phase() {
    let model = quiet(64);
    let ladder = model.ladder(CurveTag::Ground, 1).unwrap();
    let e = ladder.energies[0];
    let psi0 = initial_state(&model).unwrap();
    let mut psi = psi0.clone();
    let dt = 0.5;
    for _ in 0..2000 {
        psi = step(&psi, dt, &model);
    }
    let t = psi.t;
    assert!((t - 1000.0).abs() < 1e-9);
    let phase = C64::from_polar(1.0, -e * t);
    let want: Vec<C64> = psi0.amplitudes.iter().map(|a| a * phase).collect();
    let err = max_amp_diff(&psi.amplitudes, &want);
    assert!(err < 1e-9, "{err:e}");
}

#[test]
fn lossy_photon_block_decays_exponentially() {
    let mut cfg = coarse(default_config(), 64);
    cfg.laser.e0 = 0.0;
    cfg.cavity.g = 0.0;
    cfg.cavity.kappa = 1e-3;
    let model = HamiltonianModel::from_config(&cfg).unwrap();
    let ladder = model.ladder(CurveTag::Ground, 1).unwrap();
    let mut psi = WavefunctionState::zeros(&model.basis);
    psi.set_block(&model.basis, 1, 1, &ladder.states[0]);
    let mut prop = Propagator::new(&model);
    for k in 1..=4 {
        for _ in 0..40 {
            psi = prop.step(&psi, 12.5);
        }
        let want = (-1e-3 * 500.0 * k as f64).exp();
        let got = psi.norm_sqr(&model.grid);
        assert!((got / want - 1.0).abs() < 1e-10, "{got} vs {want}");
    }
}

#[test]
fn rk4_converges_at_fourth_order() {
    let mut cfg = uniform(with_pulse(coarse(default_config(), 64), 2.0, 2.0));
    cfg.cavity.g *= 4.0;
    let model = HamiltonianModel::from_config(&cfg).unwrap();
    let t1 = model.pulse_end();
    let run = |dt: f64| {
        let mut psi = initial_state(&model).unwrap().amplitudes;
        Propagator::new(&model).advance(&mut psi, 0.0, t1, dt);
        psi
    };
    let (a, b, c) = (run(0.2), run(0.1), run(0.05));
    let e1 = model.grid.norm_sqr(&a.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<_>>()).sqrt();
    let e2 = model.grid.norm_sqr(&b.iter().zip(&c).map(|(x, y)| x - y).collect::<Vec<_>>()).sqrt();
    let order = (e1 / e2).log2();
    assert!((3.7..=4.3).contains(&order), "order {order}, {e1:e} {e2:e}");
}

#[test]
fn backward_propagation_retraces() {
    let cfg = uniform(with_pulse(coarse(default_config(), 64), 20.0, 10.0));
    let model = HamiltonianModel::from_config(&cfg).unwrap();
    let psi0 = initial_state(&model).unwrap();
    let mut prop = Propagator::new(&model);
    let mut psi = psi0.amplitudes.clone();
    let t = fs_to_au(10.0);
    prop.advance(&mut psi, 0.0, t, 0.05);
    let moved = max_amp_diff(&psi, &psi0.amplitudes);
    prop.advance(&mut psi, t, 0.0, 0.05);
    let err = max_amp_diff(&psi, &psi0.amplitudes);
    assert!(moved > 1e-3, "pulse did nothing: {moved:e}");
    assert!(err < 1e-7, "{err:e}");
}

fn field_free_vs_stepping(kappa: f64) {
    let mut cfg = with_pulse(coarse(default_config(), 64), 10.0, 10.0);
    cfg.cavity.kappa = kappa;
    cfg.cavity.g *= 2.0;
    let model = HamiltonianModel::from_config(&cfg).unwrap();
    let t0 = model.pulse_end();
    let mut psi = initial_state(&model).unwrap().amplitudes;
    let mut prop = Propagator::new(&model);
    prop.advance(&mut psi, 0.0, t0, 0.05);

    let ev = FieldFreeEvolver::new(&model).unwrap();
    let taus: Vec<f64> = (1..=5).map(|k| fs_to_au(10.0 * k as f64)).collect();
    let mut eigen = Vec::new();
    ev.evolve_many(&psi, &taus, |_, s| {
        eigen.push(s.to_vec());
        Ok(())
    })
    .unwrap();
    let mut t = t0;
    for (tau, want) in taus.iter().zip(&eigen) {
        prop.advance(&mut psi, t, t0 + tau, 0.05);
        t = t0 + tau;
        let err = max_amp_diff(&psi, want);
        assert!(err < 1e-8, "kappa {kappa}: {err:e} at tau {tau}");
    }
}

#[test]
fn field_free_eigen_matches_stepping_lossless() {
    field_free_vs_stepping(0.0);
}

#[test]
fn field_free_eigen_matches_stepping_lossy() {
    field_free_vs_stepping(4e-4);
}

#[test]
fn field_free_refuses_to_run_inside_pulse() {
    let model = HamiltonianModel::from_config(&coarse(default_config(), 64)).unwrap();
    let psi = initial_state(&model).unwrap();
    assert!(field_free_propagate(&psi, 10.0, &model).is_err());
}

#[test]
fn decoupled_atom_follows_two_level_oracle() {
    let mut cfg = uniform(with_pulse(coarse(default_config(), 64), 100.0, 100.0));
    cfg.cavity.g = 0.0;
    cfg.atom.as_mut().unwrap().d23 = 0.0;
    cfg.molecule.dipole = DipoleSpec::Constant(0.0);
    let rec = propagate(&cfg).unwrap();
    let atom = cfg.atom.unwrap();
    let laser = cfg.laser;
    let oracle = two_level_magnus(
        atom.levels[0],
        atom.levels[2],
        atom.d13,
        |t| cavdyn::envelope_field(t, &laser),
        cfg.schedule.t_end,
        cfg.schedule.output_interval,
        200,
    );
    assert_eq!(oracle.len(), rec.snapshots.len());
    let mut worst: f64 = 0.0;
    for (s, o) in rec.snapshots.iter().zip(&oracle) {
        worst = worst.max((s.populations.channels[0] - o[0]).abs());
        worst = worst.max((s.populations.channels[2] - o[1]).abs());
        assert_eq!(s.populations.channels[1], 0.0);
        assert_eq!(s.populations.channels[3], 0.0);
    }
    let transferred = oracle.last().unwrap()[1];
    assert!(transferred > 0.05, "{transferred}");
    assert!(worst < 1e-6, "{worst:e}");
}
