// Unit-norm data: the Gaussian mechanism's error grows linearly in `d`, the
// eigendecomposition-based estimator's much more slowly.

use dpcov::linalg::{covariance, frobenius_dist};
use dpcov::mechanisms::{gauss_cov, separate_cov};
use dpcov::datagen::{synth, SynthSpec};
use dpcov::RandomStream;

pub fn run() -> dpcov::Result<()> {
    let (n, rho, reps) = (1000, 0.1, 5);
    let mut s = RandomStream::new(1);
    println!("{:>6} {:>12} {:>12}", "d", "gauss", "separate");
    for d in [16, 64, 256] {
        let x = synth(&SynthSpec::new(n, d, 1).with_seed(d as u64))?;
        let sigma = covariance(&x)?;
        let (mut g, mut sep) = (0.0, 0.0);
        for _ in 0..reps {
            g += frobenius_dist(&gauss_cov(&x, rho, &mut s)?.estimate, &sigma)? / reps as f64;
            sep += frobenius_dist(&separate_cov(&x, rho, &mut s)?.estimate, &sigma)? / reps as f64;
        }
        println!("{d:>6} {g:>12.5} {sep:>12.5}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> dpcov::Result<()> {
    run()
}
