mod common;

use common::Scenario;
use memevo::kernel::check_decay_conditions;
use memevo::stability::{fit_decay_rate, stability_constants, verify_inequalities};
use memevo::state::StateOptions;

#[test]
fn inequalities_hold_and_violations_shrink() {
    let sc = Scenario::new(21);
    let c = stability_constants(&sc.k, &sc.op, sc.k.default_beta(), 1.0).unwrap();
    let mut worst = Vec::new();
    for dt in [2e-3, 1e-3] {
        let run = sc.state(20.0, dt, &StateOptions::default());
        let rep = verify_inequalities(&run.diag, dt, &c).unwrap();
        for m in &rep.margins {
            eprintln!("dt {dt} {}: ok {:.5} tol {:.3e} worst {:.3e}", m.name, m.fraction_ok(), m.tol, m.worst_violation());
            assert!(m.fraction_ok() >= 0.99, "{} holds at {:.4} of steps", m.name, m.fraction_ok());
        }
        worst.push(rep.margins.iter().map(|m| m.worst_violation()).collect::<Vec<_>>());
    }
    for (a, b) in worst[0].iter().zip(&worst[1]) {
        assert!(b.abs() <= a.abs(), "violation grew from {a} to {b}");
    }
}

#[test]
fn energy_decays_exponentially() {
    let sc = Scenario::new(8);
    let (t_end, dt) = (40.0, 1e-3);
    let c = stability_constants(&sc.k, &sc.op, sc.k.default_beta(), 1.0).unwrap();
    let run = sc.state(t_end, dt, &StateOptions::default());
    let fit = fit_decay_rate(&run.traj.times, &run.diag.energy).unwrap();
    eprintln!("{fit:?} omega_proof {}", c.omega_proof);
    assert!(fit.decaying && fit.omega_fit > 0.0);
    assert!(fit.r_squared >= 0.99, "R² = {}", fit.r_squared);
    assert!(fit.omega_fit >= c.omega_proof);
    assert!(fit.k_fit >= 1.0);
    let dc =
        check_decay_conditions(&sc.k, 1.0, 1.0, &memevo::kernel::sample_grid(&sc.k, 200), &memevo::kernel::sample_grid(&sc.k, 50)).unwrap();
    assert!(dc.suf_holds && dc.mu_holds);
}
