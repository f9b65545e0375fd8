//! One EPPM symbol end to end: bits, chips, Poisson counts, decision.

use std::sync::Arc;

use eppm::channel::{sample_counts, ChannelTaps, PhotonModel, PropagationMode};
use eppm::codes::shipped;
use eppm::receiver::{correlate, decide_correlation, decide_ml_poisson, DecoderConfig};
use eppm::ModulationScheme;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> eppm::Result<()> {
    let cb = Arc::new(shipped(11, 5, 2)?);
    let scheme = ModulationScheme::eppm(cb.clone());
    let bits = [true, false, true];
    let (m, frame) = scheme.encode_eppm(&bits)?;
    println!("bits {bits:?} -> codeword {m}: {:?}", frame.amplitudes());

    let photon = PhotonModel::new(40.0, 2.0);
    let channel = ChannelTaps::ideal(1e-9, PropagationMode::Cyclic, cb.q());
    let means = channel.propagate(frame.amplitudes(), photon.lambda0, photon.lambda_b)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let counts = sample_counts(&means, &mut rng);
    println!("counts {counts:?}");

    let cfg = DecoderConfig::new(cb);
    let z = correlate(&counts, &cfg)?;
    println!("correlator {:?}", z.iter().map(|v| v.round()).collect::<Vec<_>>());
    println!(
        "correlation picks {}, Poisson ML picks {}",
        decide_correlation(&z),
        decide_ml_poisson(&counts, &cfg, &photon)?
    );
    Ok(())
}
