// Poisson counting noise on the g²(0) estimate shrinks with integration time.

use qncal::measurement::{observe, CountConfig, Noise};
use qncal::optics::{blended_probabilities, ScenarioParams};
use qncal::seed::stream;

fn main() -> qncal::Result<()> {
    let p = blended_probabilities(&ScenarioParams::default())?;
    let exact = p.g2()?;
    println!("exact g2 = {exact:.4}");
    for t in [0.1, 1.0, 10.0] {
        let noise = Noise::Poisson(CountConfig { integration_time: t, window_rate: Some(1e6), ..Default::default() });
        let mut rng = stream(11, 0);
        let ys: Vec<f64> = (0..200).map(|_| observe(&p, &noise, &mut rng)).collect::<qncal::Result<_>>()?;
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        let sd = (ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (ys.len() - 1) as f64).sqrt();
        println!("T = {t:5.1} s: mean {mean:.4}, sd {sd:.4}");
    }
    Ok(())
}
