use amolab::cfrac::Frequency;
use amolab::detkernel::{ModelParams, ThetaKind};
use amolab::spectral::{eigen_solve, SpectralBox};
use amolab::mp;
use std::sync::Arc;

fn main() {
    let freq = Arc::new(Frequency::golden(40));
    let p = ModelParams::new(3.0, ThetaKind::HalfAlpha, freq, mp::mpf(128, 0.0), 128).unwrap();
    let bx = SpectralBox::new(&p, 50).unwrap();
    let pairs = eigen_solve(&p, 50, (-1.0, 1.0), 9).unwrap();
    for (i, pair) in pairs.iter().enumerate().take(5) {
        let re = bx.residual_of(&pair.vector, &pair.energy);
        println!("pair {i}: E={:+.10} stored_resid={:.2e} recomputed={:.2e} peak={}",
            pair.energy.to_f64(), pair.residual, re, pair.peak_site());
    }
}
