// Empirical quantiles of noise norms next to the closed-form bounds used to
// pick clipping thresholds.

use dpcov::bounds::{eta, lap_vec_bound, omega, slw_frob_bound, slw_op_bound, upsilon, BoundConstants};
use dpcov::linalg::l2_norm;
use dpcov::rng::{gaussian_vector, laplace_vector, sgw_matrix, slw_matrix};
use dpcov::RandomStream;

fn quantile(mut v: Vec<f64>, q: f64) -> f64 {
    v.sort_by(f64::total_cmp);
    v[((v.len() - 1) as f64 * q).round() as usize]
}

pub fn run() -> dpcov::Result<()> {
    let (d, beta, trials) = (32, 0.05, 500);
    let c = BoundConstants::default();
    let mut s = RandomStream::new(8);
    let mut cols: [Vec<f64>; 6] = Default::default();
    for _ in 0..trials {
        cols[0].push(l2_norm(&gaussian_vector(&mut s, d)));
        let w = sgw_matrix(&mut s, d);
        cols[1].push(w.operator_norm()?);
        cols[2].push(w.frobenius_norm());
        cols[3].push(l2_norm(&laplace_vector(&mut s, d)));
        let l = slw_matrix(&mut s, d);
        cols[4].push(l.operator_norm()?);
        cols[5].push(l.frobenius_norm());
    }
    let bounds = [
        ("gaussian vector", eta(d, beta)?),
        ("wigner operator", upsilon(d, beta)?),
        ("wigner frobenius", omega(d, beta)?),
        ("laplace vector", lap_vec_bound(d, beta, &c)?),
        ("laplace wigner op", slw_op_bound(d, beta, &c)?),
        ("laplace wigner frob", slw_frob_bound(d, beta, &c)?),
    ];
    println!("d = {d}, 95% quantile vs bound at beta = {beta}");
    for ((name, bound), samples) in bounds.into_iter().zip(cols) {
        println!("{name:<20} {:>9.3} {:>9.3}", quantile(samples, 1.0 - beta), bound);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> dpcov::Result<()> {
    run()
}
