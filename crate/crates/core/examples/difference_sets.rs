//! Search cyclic difference sets and inspect the resulting codebooks.

use eppm::codes::{find_difference_set, Catalog, Codebook, DesignParams};

fn main() -> eppm::Result<()> {
    for params in [DesignParams::new(7, 3, 1), DesignParams::new(13, 4, 1), DesignParams::new(19, 9, 4)] {
        let base = find_difference_set(params)?;
        let cb = Codebook::build(params, &base)?;
        let comp = cb.complement().params();
        println!(
            "{params}: base {:?}, PAPR {}, gamma {}, complement {comp}",
            cb.base_set(),
            cb.papr(),
            params.gamma()
        );
    }

    let shipped = Catalog::shipped();
    println!("\nshipped catalog:");
    for cb in shipped.codebooks() {
        println!("  {} PAPR {:.3}", cb.params(), *cb.papr().numer() as f64 / *cb.papr().denom() as f64);
    }
    for p in shipped.missing() {
        println!("  {p} (no base set known)");
    }
    Ok(())
}
