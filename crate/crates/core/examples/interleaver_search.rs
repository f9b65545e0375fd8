//! Interleaver search for a dispersive channel, compared with the identity
//! and with the ideal-interleaver bound.

use eppm::channel::{build_taps, PhotonModel, PropagationMode, TapGeometry};
use eppm::codes::shipped;
use eppm::interleaver::{distance_metric, optimize_permutation, BinaryProgram, SearchBudget};
use eppm::Permutation;

fn main() -> eppm::Result<()> {
    let cb = shipped(11, 5, 2)?;
    let t_b = 5e-9;
    let geom = TapGeometry {
        sigma: 0.02 * t_b,
        tau: 0.5 * t_b,
        e_los: 1.0,
        e_nlos: 1.0,
    };
    let taps = build_taps(geom, 3.0 * t_b / 11.0, 11, PropagationMode::Cyclic)?;
    let h = taps.cyclic_taps(11);
    println!("folded taps {:?}", h.iter().map(|x| (x * 1e3).round() / 1e3).collect::<Vec<_>>());

    let identity = distance_metric(&cb, &Permutation::identity(11), &h);
    println!("identity: d_min {:.4} (x{})", identity.d_min, identity.m_dmin);

    let photon = PhotonModel::new(1400.0, 300.0);
    let (perm, report) = optimize_permutation(&cb, &h, &SearchBudget::default(), Some(&photon));
    println!("optimized {:?}", perm.forward());
    println!(
        "  d_min {:.4} (x{}), ideal {:.4}, proven optimal: {}, nodes {}",
        report.d_min, report.m_dmin, report.ideal_d, report.proven_optimal, report.nodes
    );

    let program = BinaryProgram::build(&cb, &h);
    let check = program.check(&perm);
    println!("binary program: {} pair variables, feasible at t = {:.4}: {}", program.num_pairs(), check.t, check.feasible);
    Ok(())
}
