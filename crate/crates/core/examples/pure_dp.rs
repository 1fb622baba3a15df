// The same estimators under pure differential privacy.

use dpcov::adaptive::adaptive_cov_pure;
use dpcov::datagen::{synth, SynthSpec};
use dpcov::linalg::{covariance, frobenius_dist};
use dpcov::mechanisms::{lap_cov, separate_cov_pure, zero_cov};
use dpcov::RandomStream;

pub fn run() -> dpcov::Result<()> {
    let x = synth(&SynthSpec::new(20_000, 32, 4).with_seed(5))?;
    let sigma = covariance(&x)?;
    let mut s = RandomStream::new(6);
    let eps = 1.0;
    let rows = [
        ("lap", lap_cov(&x, eps, &mut s)?),
        ("separate-pure", separate_cov_pure(&x, eps, &mut s)?),
        ("adaptive-pure", adaptive_cov_pure(&x, eps, 0.05, &mut s)?),
        ("zero", zero_cov(&x)?),
    ];
    for (name, r) in rows {
        let spent = r.budget_spent.map(|b| b.value).unwrap_or(0.0);
        println!("{name:<14} eps spent {spent:<4} error {:.5}", frobenius_dist(&r.estimate, &sigma)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> dpcov::Result<()> {
    run()
}
