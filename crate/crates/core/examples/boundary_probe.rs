//! Check that the large-k excitation floor is finite-window physics:
//! it should scale as 1/τ_Q² (end-of-ramp term), be nearly independent of
//! the start factor a, and be insensitive to the solver tolerance.

use kzfcs::dynamics::{excitation_probability_numeric, SolverConfig};
use kzfcs::ising::{ChainParams, QuenchProtocol};
use std::f64::consts::PI;

fn main() {
    let params = ChainParams::with_spins(400).unwrap();
    let k = 399.0 * PI / 400.0;
    let solver = SolverConfig::default();
    let tight = SolverConfig {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        ..SolverConfig::default()
    };

    for tau in [5.0, 10.0, 20.0, 40.0] {
        let proto = QuenchProtocol::new(tau).unwrap();
        let (p, _) = excitation_probability_numeric(k, &params, &proto, &solver).unwrap();
        let (p_tight, _) = excitation_probability_numeric(k, &params, &proto, &tight).unwrap();
        let proto2 = QuenchProtocol::with_start_factor(tau, 2.0).unwrap();
        let (p_a2, _) = excitation_probability_numeric(k, &params, &proto2, &solver).unwrap();
        let floor = (k.sin() / (4.0 * tau)).powi(2) / 4.0; // sin²k/(16τ²·E²·...) with E=2
        println!(
            "tau={tau:5.1}: p={p:.6e} p_tight={p_tight:.6e} p(a=2)={p_a2:.6e} sin2k/(64tau2)={floor:.3e} p*tau^2={:.4e}",
            p * tau * tau
        );
    }
}
