//! Multilevel EPPM: symbols are sums of codewords with counts adding to N.

use std::sync::Arc;

use eppm::codes::shipped;
use eppm::modem::MeppmType;
use eppm::receiver::{decode_meppm, DecoderConfig};
use eppm::channel::PhotonModel;
use eppm::ModulationScheme;

fn main() -> eppm::Result<()> {
    let cb = Arc::new(shipped(7, 3, 1)?);
    for kind in [MeppmType::I, MeppmType::II] {
        let scheme = ModulationScheme::meppm(cb.clone(), 3, kind)?;
        println!("{kind:?}: {} bits per symbol, alphabet {}", scheme.bits_per_symbol(), scheme.alphabet_size());
        let rank = 17;
        let counts = scheme.meppm_counts(rank);
        let bits = eppm::math::index_to_bits(rank, scheme.bits_per_symbol());
        let frame = scheme.encode_meppm(&bits)?;
        println!("  rank {rank} -> counts {counts:?} -> chips {:?}", frame.amplitudes());

        let photon = PhotonModel::new(60.0, 1.0);
        let r: Vec<f64> = frame.amplitudes().iter().map(|a| photon.lambda0 * a + photon.lambda_b).collect();
        let decoded = decode_meppm(&r, &DecoderConfig::new(cb.clone()), 3, kind, &photon)?;
        println!("  noiseless decode {decoded:?} -> rank {}", scheme.meppm_rank(&decoded));
    }
    Ok(())
}
