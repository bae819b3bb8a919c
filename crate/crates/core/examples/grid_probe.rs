//! How the fitted exponents depend on the quench-time sampling and the ramp
//! start factor.

use kzfcs::counting::{
    cumulants_exact, cumulants_from_moments, kink_distribution, moments_from_distribution, Pairing,
};
use kzfcs::dynamics::{mode_probabilities, Method, SolverConfig};
use kzfcs::ising::{ChainParams, QuenchProtocol};
use kzfcs::scaling::{fit_power_law, log_spaced, sweep, SweepRow, SweepTable};
use kzfcs::theory::{kzm_density, scaling_cumulant_ratio};

fn fits(table: &SweepTable, label: &str) {
    for q in 1..=3 {
        let fit = fit_power_law(table, q, None).unwrap();
        print!("  q={q}: alpha={:.4} r2={:.5}   ", fit.alpha, fit.r_squared);
    }
    println!("<- {label}");
}

fn main() {
    let params = ChainParams::with_spins(400).unwrap();
    let solver = SolverConfig::default();

    // Per-tau ratio of kappa_3 to its scaling prediction.
    println!("tau      kappa3_ode    kappa3_lz     scaling      ode/scaling");
    for tau in [2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 200.0] {
        let protocol = QuenchProtocol::new(tau).unwrap();
        let ode = mode_probabilities(&params, &protocol, Method::Ode, &solver).unwrap();
        let lz = mode_probabilities(&params, &protocol, Method::Lz, &solver).unwrap();
        let k3_ode = cumulants_exact(&ode, Pairing::Independent, 3)
            .unwrap()
            .kappa(3);
        let k3_lz = cumulants_exact(&lz, Pairing::Independent, 3)
            .unwrap()
            .kappa(3);
        let scaling = scaling_cumulant_ratio(3).unwrap() * 400.0 * kzm_density(&params, tau);
        println!(
            "{tau:7.1}  {k3_ode:.6e}  {k3_lz:.6e}  {scaling:.6e}  {:.4}",
            k3_ode / scaling
        );
    }

    // Cross-check the recursion against distribution moments at tau=2 (ODE).
    {
        let protocol = QuenchProtocol::new(2.0).unwrap();
        let ode = mode_probabilities(&params, &protocol, Method::Ode, &solver).unwrap();
        let rec = cumulants_exact(&ode, Pairing::Independent, 3).unwrap();
        let dist = kink_distribution(&ode, Pairing::Independent).unwrap();
        let mom = cumulants_from_moments(&moments_from_distribution(&dist, 3).unwrap());
        println!(
            "tau=2 cross-check: recursion k3={:.9}, moments k3={:.9}",
            rec.kappa(3),
            mom.kappa(3)
        );
    }

    // Grids.
    let grids: Vec<(String, Vec<f64>)> = vec![
        ("log 25 [2,200]".into(), log_spaced(2.0, 200.0, 25).unwrap()),
        (
            "log 25 [10,200]".into(),
            log_spaced(10.0, 200.0, 25).unwrap(),
        ),
        (
            "linear 25 [2,200]".into(),
            (0..25).map(|i| 2.0 + i as f64 * 198.0 / 24.0).collect(),
        ),
    ];
    for (label, taus) in grids {
        let outcome = sweep(&params, &taus, Method::Ode, 3, &solver).unwrap();
        fits(&outcome.table, &label);
    }

    // Start factor a=2 on the log grid.
    {
        let taus = log_spaced(2.0, 200.0, 25).unwrap();
        let mut table = SweepTable::new(3);
        for &tau in &taus {
            let protocol = QuenchProtocol::with_start_factor(tau, 2.0).unwrap();
            let probs = mode_probabilities(&params, &protocol, Method::Ode, &solver).unwrap();
            let report = cumulants_exact(&probs, Pairing::Independent, 3).unwrap();
            table
                .insert(SweepRow {
                    n: 400,
                    tau_q: tau,
                    method: Method::Ode,
                    kappa: report.kappas().to_vec(),
                    wall_time: 0.0,
                    max_norm_defect: probs.max_norm_defect(),
                })
                .unwrap();
        }
        fits(&table, "log 25 [2,200], a=2");
    }

    // Landau-Zener method on the log grid for contrast.
    {
        let taus = log_spaced(2.0, 200.0, 25).unwrap();
        let outcome = sweep(&params, &taus, Method::Lz, 3, &solver).unwrap();
        fits(&outcome.table, "log 25 [2,200], LZ");
    }
}
