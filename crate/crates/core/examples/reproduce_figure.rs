//! Runs a figure preset at reduced effort and writes its CSVs.
//!
//! `cargo run --release --example reproduce_figure -- fig8 0.1 out/`

use std::path::PathBuf;

use eppm::harness::{reproduce_figure, FigureOptions};

fn main() -> eppm::Result<()> {
    let mut args = std::env::args().skip(1);
    let figure = args.next().unwrap_or_else(|| "fig8".into());
    let effort = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "results".into()));

    let out = reproduce_figure(
        &figure,
        &FigureOptions {
            effort,
            ..FigureOptions::default()
        },
    )?;
    for c in &out.curves {
        let bers: Vec<String> = c.points.iter().map(|p| format!("{:.1e}", p.ber)).collect();
        println!("{:18} {}", c.name, bers.join(" "));
    }
    for p in out.write(&dir)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
