// The sparse vector technique on a rising query sequence, and the private
// radius search built on it.

use dpcov::adaptive::{priv_radius, svt};
use dpcov::{Dataset, RandomStream};

pub fn run() -> dpcov::Result<()> {
    let mut s = RandomStream::new(9);
    let queries: Vec<f64> = (0..100).map(|i| i as f64).collect();
    for eps in [0.1, 1.0, 10.0] {
        let hits: Vec<usize> = (0..5).map(|_| svt(queries.iter().copied(), 1.0, 50.0, eps, &mut s)).collect::<dpcov::Result<_>>()?;
        println!("threshold 50, eps {eps:>4}: stopped at {hits:?}");
    }

    // every norm is 2^-6 but a few are near 2^-3
    let cols: Vec<Vec<f64>> = (0..2000).map(|i| vec![if i < 3 { 0.12 } else { 1.0 / 64.0 }, 0.0]).collect();
    let x = Dataset::from_columns(&cols)?;
    for eps in [0.1, 1.0] {
        println!("private radius at eps {eps}: {}", priv_radius(&x, eps, 0.05, 1e-9, &mut s)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> dpcov::Result<()> {
    run()
}
