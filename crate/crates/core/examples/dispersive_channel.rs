//! LOS + Gaussian NLOS taps at the chip rate, with and without the LOS path.

use eppm::channel::{build_taps, PropagationMode, TapGeometry};

fn main() -> eppm::Result<()> {
    let t_b = 5e-9;
    let chip = 3.0 * t_b / 11.0;
    for (label, e_los) in [("LOS + NLOS", 1.0), ("NLOS only", 0.0)] {
        for sigma in [0.02, 0.2, 1.0] {
            let geom = TapGeometry {
                sigma: sigma * t_b,
                tau: t_b,
                e_los,
                e_nlos: 1.0,
            };
            let taps = build_taps(geom, chip, 11, PropagationMode::Cyclic)?;
            let shown: Vec<String> = taps.iter_offsets().map(|(l, h)| format!("{l}:{h:.3}")).collect();
            println!("{label:10} sigma/Tb={sigma:<4} {}", shown.join(" "));
            println!("{:10} folded {:?}", "", taps.cyclic_taps(11).iter().map(|h| (h * 1e3).round() / 1e3).collect::<Vec<_>>());
        }
    }
    Ok(())
}
