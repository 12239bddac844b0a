//! Seeded Rician channel and task generation.
//!
//! ```bash
//! cargo run --release --example channel_generation
//! ```

use wpmec::model::ChannelKind;
use wpmec::scenario::{gen_channels, gen_tasks, GeometryConfig, RngSpec};

fn main() -> wpmec::Result<()> {
    let n = 100_000;
    println!("d [m]  E[h] analytic  sample      E[g] analytic  sample");
    for d in [1.0, 3.0, 5.0, 9.0] {
        let geom = GeometryConfig {
            user_distance: d,
            ..GeometryConfig::default()
        };
        let mut rng = RngSpec { seed: 1, stream: 0 }.rng();
        let ch = gen_channels(&geom, n, ChannelKind::TimeVarying, &mut rng)?;
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        println!(
            "{d:>5}  {:.4e}     {:.4e}  {:.4e}     {:.4e}",
            geom.mean_wpt_gain(),
            mean(&ch.wpt_gain),
            geom.mean_offl_gain(),
            mean(&ch.offl_gain)
        );
    }

    // Streams are independent and reproducible.
    let draw = |stream| {
        let mut rng = RngSpec { seed: 1, stream }.rng();
        gen_tasks(5e5, 4, &mut rng).map(|t| t.arrivals)
    };
    println!("\nstream 1: {:?}", draw(1)?);
    println!("stream 1: {:?}", draw(1)?);
    println!("stream 3: {:?}", draw(3)?);
    Ok(())
}
