// A handful of unit vectors among many short ones. The adaptive estimator
// finds a clipping threshold privately and reports how it spent the budget.

use dpcov::adaptive::adaptive_cov;
use dpcov::linalg::{covariance, frobenius_dist};
use dpcov::mechanisms::separate_cov;
use dpcov::{Dataset, RandomStream};

fn skewed(n: usize, d: usize, seed: u64) -> dpcov::Result<Dataset> {
    let mut s = RandomStream::new(seed);
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let v: Vec<f64> = (0..d).map(|_| s.normal()).collect();
            let r = if i < 4 { 1.0 } else { 0.1 };
            let l = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| x / l * r).collect()
        })
        .collect();
    Dataset::from_columns(&cols)
}

pub fn run() -> dpcov::Result<()> {
    let x = skewed(3000, 48, 3)?;
    let sigma = covariance(&x)?;
    let mut s = RandomStream::new(4);
    let report = adaptive_cov(&x, 0.5, 0.05, &mut s)?;
    let det = report.adaptive.as_ref().expect("adaptive details");
    println!("radius 2^{}  trace bound {:.4}  threshold 2^{}  branch {}", det.radius_exponent, det.trace_ub, det.tau_exponent, det.branch);
    for (step, b) in &det.ledger.entries {
        println!("  {step:<7} rho = {}", b.value);
    }
    println!("adaptive error {:.5}", frobenius_dist(&report.estimate, &sigma)?);
    println!("unclipped      {:.5}", frobenius_dist(&separate_cov(&x, 0.5, &mut s)?.estimate, &sigma)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> dpcov::Result<()> {
    run()
}
