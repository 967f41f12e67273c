// The interference dip: scan the temporal overlap for each input and
// print g²(0), coincidence visibility and the g² dip ratio.

use qncal::optics::{g2_dip_ratio, g2_objective, visibility, InputKind, ScenarioParams};

fn main() -> qncal::Result<()> {
    for kind in [InputKind::Sv, InputKind::Tmsv, InputKind::Thermal] {
        let base = ScenarioParams { input_kind: kind, squeezing: 0.1, ..Default::default() };
        println!("{kind}: visibility {:.4}, g2 ratio {:.4}", visibility(&base)?, g2_dip_ratio(&base)?);
        for zeta in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let p = ScenarioParams { overlap: zeta, ..base };
            println!("  overlap {zeta:.2}: g2 = {:.4}", g2_objective(&p)?);
        }
    }

    // filter detuning blends in the distinguishable case
    let p = ScenarioParams { detuning: Some(0.0), ..Default::default() };
    for dnu in [0.0, 3.0, 6.0, 12.0] {
        let q = ScenarioParams { detuning: Some(dnu), ..p };
        println!("detuning {dnu:4.1} GHz: weight {:.3}, g2 = {:.3}", q.spectral_weight(), g2_objective(&q)?);
    }
    Ok(())
}
