// Build Gaussian states, mix them on a beam splitter and read off no-click
// probabilities of threshold detectors.

use qncal::optics::{make_state, GaussianState, StateKind};

fn main() -> qncal::Result<()> {
    let sv = make_state(StateKind::Squeezed(0.3))?;
    let th = make_state(StateKind::Thermal(0.1))?;
    println!("squeezed vacuum P(no click) = {:.6}", sv.no_click_probability(&[0])?);
    println!("thermal         P(no click) = {:.6}  (1/(1+n) = {:.6})", th.no_click_probability(&[0])?, 1.0 / 1.1);

    // two single-mode squeezers on a balanced splitter
    let mut two = sv.direct_sum(&sv);
    two.apply_beam_splitter(0, 1, 0.5)?;
    let p0 = two.no_click_probability(&[0])?;
    let p01 = two.no_click_probability(&[0, 1])?;
    let coinc = 1.0 - 2.0 * p0 + p01;
    println!("after 50:50: P(no click in 0) = {p0:.6}, coincidence = {coinc:.3e}");

    let tmsv = make_state(StateKind::Tmsv(0.2))?;
    let mut lossy: GaussianState = tmsv.direct_sum(&GaussianState::vacuum(1));
    lossy.apply_beam_splitter(0, 2, 0.6)?;
    println!("TMSV with 60% transmission physical: {}", lossy.is_physical(1e-9));
    Ok(())
}
