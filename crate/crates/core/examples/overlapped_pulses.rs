//! Overlapped EPPM with a band-limited LED: bit rate against overlap and
//! the shaped transmit frame.

use std::sync::Arc;

use eppm::channel::led_response_taps;
use eppm::codes::shipped;
use eppm::harness::rate_table;
use eppm::ModulationScheme;

fn main() -> eppm::Result<()> {
    let t_led = 20e-9;
    for row in rate_table(&[35], &[1, 3], &[1, 35, 121, 153], t_led) {
        println!(
            "N={} v={:3}  OEPPM {:6.1} Mb/s  OMEPPM-I {:6.3}  OMEPPM-II {:6.3} (R_b T_led)",
            row.levels,
            row.overlap,
            row.oeppm_bit_rate / 1e6,
            row.omeppm_i,
            row.omeppm_ii
        );
    }

    let v = 4;
    let scheme = ModulationScheme::oeppm(Arc::new(shipped(7, 3, 1)?), v)?;
    let pulse = led_response_taps(t_led, t_led / v as f64, 6);
    let frame = scheme.encode_oeppm_shaped(&[false, true], &pulse)?;
    println!("\n(7,3,1), v = {v}: {} chips", frame.len());
    println!("{:?}", frame.amplitudes().iter().map(|a| (a * 100.0).round() / 100.0).collect::<Vec<_>>());
    Ok(())
}
