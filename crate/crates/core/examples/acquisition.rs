// Score candidates with PI, EI and LCB and pick the next query point.

use nalgebra::DMatrix;
use qncal::acquisition::{acquisition_value, propose_next, AcquisitionConfig, AcquisitionKind};
use qncal::gp::{fit, Dataset, KernelConfig, KernelFamily, PriorMean};

fn main() -> qncal::Result<()> {
    let f = |x: f64| (x - 0.3).powi(2);
    let xs: Vec<Vec<f64>> = [0.0, 0.2, 0.5, 0.9].iter().map(|&x| vec![x]).collect();
    let ys: Vec<f64> = xs.iter().map(|x| f(x[0])).collect();
    let post = fit(&Dataset::from_rows(&xs, &ys)?, &KernelConfig::new(KernelFamily::Matern52).with_length_scale(0.3), PriorMean::Zero)?;
    let candidates = DMatrix::from_fn(101, 1, |i, _| i as f64 / 100.0);

    for kind in AcquisitionKind::ALL {
        let cfg = AcquisitionConfig { kind, ..Default::default() };
        let p = propose_next(&post, &cfg, &candidates)?;
        println!("{:>3}: next x = {:.2} (mean {:.4}, sd {:.4}, utility {:.4})", kind.name(), p.point[0], p.mean, p.std, p.utility);
    }

    // zero uncertainty collapses every rule to a deterministic value
    println!("EI at sd 0, mean 0.5, best 1.0: {}", acquisition_value(AcquisitionKind::Ei, 0.5, 0.0, 1.0, 2.0)?);
    println!("PI at sd 0, mean 1.5, best 1.0: {}", acquisition_value(AcquisitionKind::Pi, 1.5, 0.0, 1.0, 2.0)?);
    Ok(())
}
