// Loading points from CSV: the data is rescaled so its radius lies in
// (1/2, 1] before any mechanism sees it.

use dpcov::datagen::{parse_csv, rescale_radius};
use dpcov::linalg::{covariance, frobenius_dist, radius};
use dpcov::mechanisms::separate_cov;
use dpcov::RandomStream;

pub fn run() -> dpcov::Result<()> {
    let mut text = String::from("height,weight,age\n");
    let mut s = RandomStream::new(10);
    for _ in 0..500 {
        let h = 170.0 + 10.0 * s.normal();
        text.push_str(&format!("{h},{},{}\n", 0.9 * h - 85.0 + 5.0 * s.normal(), 40.0 + 12.0 * s.normal()));
    }
    let raw = parse_csv(text.as_bytes())?;
    let x = rescale_radius(&raw)?;
    println!("{} points in {} dimensions, radius {:.1} -> {:.4}", x.len(), x.dim(), radius(&raw)?, radius(&x)?);
    let sigma = covariance(&x)?;
    let est = separate_cov(&x, 1.0, &mut s)?.estimate;
    println!("error {:.2e} against ||Sigma||_F = {:.2e}", frobenius_dist(&est, &sigma)?, sigma.frobenius_norm());
    Ok(())
}

#[allow(dead_code)]
fn main() -> dpcov::Result<()> {
    run()
}
