//! Measure integrator phase error, norm drift and step counts on the mode
//! Schrödinger equation across quench times.

use kzfcs::dynamics::{evolve_mode, excitation_probability_lz, SolverConfig};
use kzfcs::ising::{instantaneous_eigensystem, ChainParams, QuenchProtocol};
use kzfcs::ode::{integrate_adaptive, OdeOptions};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::time::Instant;

fn main() {
    // Pure rotation: phase error and norm drift over a long span.
    let opts = OdeOptions {
        abs_tol: 1e-10,
        rel_tol: 1e-10,
        max_step: None,
        initial_step: None,
    };
    for span in [50.0, 400.0, 2000.0, 20000.0] {
        let omega = 3.0;
        let y0 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
        let n_evals = std::cell::Cell::new(0u64);
        let rhs = |_: f64, y: &[Complex64; 2]| {
            n_evals.set(n_evals.get() + 1);
            [
                -Complex64::i() * omega * y[0],
                -Complex64::i() * omega * y[1],
            ]
        };
        let t0 = Instant::now();
        let y = integrate_adaptive(rhs, 0.0, span, y0, &opts).unwrap();
        let exact = Complex64::from_polar(1.0, -omega * span);
        println!(
            "rotation span={span:8.0}: phase_err={:.3e} norm_drift(|psi|^2)={:.3e} evals={} time={:?}",
            (y[0] - exact).norm(),
            (y[0].norm_sqr() + y[1].norm_sqr() - 2.0).abs(),
            n_evals.get(),
            t0.elapsed()
        );
    }

    // The actual mode problem at the smallest momentum of N=100/400.
    for (n, tau) in [
        (100usize, 0.1),
        (100, 10.0),
        (100, 1000.0),
        (400, 100.0),
        (400, 10000.0),
    ] {
        let params = ChainParams::with_spins(n).unwrap();
        let protocol = QuenchProtocol::new(tau).unwrap();
        let k = PI / n as f64;
        let t0 = Instant::now();
        let ev = evolve_mode(k, &params, &protocol, &SolverConfig::default()).unwrap();
        let excited = instantaneous_eigensystem(k, 0.0).unwrap().excited;
        let amp = excited[0] * ev.state[0] + excited[1] * ev.state[1];
        println!(
            "mode N={n:4} tau={tau:8.1}: norm_defect={:.3e} p_ode={:.12e} p_lz={:.12e} time={:?}",
            ev.norm_defect,
            amp.norm_sqr(),
            excitation_probability_lz(k, &params, tau),
            t0.elapsed()
        );
    }
}
