// Shrinking the trace (more norm bins) lowers the error of the
// eigendecomposition-based estimator; the Gaussian mechanism does not notice.

use dpcov::datagen::{synth, SynthSpec};
use dpcov::linalg::{covariance, frobenius_dist, trace_stat};
use dpcov::mechanisms::{gauss_cov, separate_cov, zero_cov};
use dpcov::RandomStream;

pub fn run() -> dpcov::Result<()> {
    let (n, d, rho) = (5000, 64, 0.1);
    let mut s = RandomStream::new(2);
    println!("{:>3} {:>10} {:>10} {:>10} {:>10}", "N", "tr", "gauss", "separate", "zero");
    for bins in [1, 2, 4, 8] {
        let x = synth(&SynthSpec::new(n, d, bins).with_seed(7))?;
        let sigma = covariance(&x)?;
        let g = frobenius_dist(&gauss_cov(&x, rho, &mut s)?.estimate, &sigma)?;
        let sep = frobenius_dist(&separate_cov(&x, rho, &mut s)?.estimate, &sigma)?;
        let z = frobenius_dist(&zero_cov(&x)?.estimate, &sigma)?;
        println!("{bins:>3} {:>10.4} {g:>10.5} {sep:>10.5} {z:>10.5}", trace_stat(&x));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> dpcov::Result<()> {
    run()
}
