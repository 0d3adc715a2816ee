//! Times exact symbolwise MAP on random inputs.
//!
//! usage: smap_timing [n] [t] [delta] [reps]

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tracerec::channel::transmit;
use tracerec::multi::smap_exact;
use tracerec::BitSeq;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, d: &str| args.get(i).cloned().unwrap_or_else(|| d.to_string());
    let n: usize = arg(0, "100").parse().unwrap();
    let t: usize = arg(1, "2").parse().unwrap();
    let delta: f64 = arg(2, "0.1").parse().unwrap();
    let reps: usize = arg(3, "5").parse().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut total = 0.0;
    for _ in 0..reps {
        let x = BitSeq::from_symbols((0..n).map(|_| rng.gen_range(0..2)).collect());
        let traces: Vec<BitSeq> = (0..t).map(|_| transmit(&x, delta, &mut rng)).collect();
        let start = Instant::now();
        let (_, est) = smap_exact(n, &traces).unwrap();
        let secs = start.elapsed().as_secs_f64();
        total += secs;
        let errs = x.symbols().iter().zip(est.symbols()).filter(|(a, b)| a != b).count();
        let b = tracerec::bma::bma(n, &traces);
        let berrs = x.symbols().iter().zip(b.symbols()).filter(|(a, b)| a != b).count();
        println!("{secs:.3}s  hamming errors {errs} (bma {berrs})");
    }
    println!("mean {:.3}s", total / reps as f64);
}
