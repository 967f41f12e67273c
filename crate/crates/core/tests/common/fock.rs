//! Number-basis reference for the interference pipeline.
//!
//! Only the two arm modes carry light, so every vacuum-projection probability
//! reduces to `Tr[ρ :exp(-a†Ma):]` on those two modes, where `M = U_Sᴴ U_S`
//! collects the output rows of detector `S`. The normally ordered operator
//! acts on number states as the substitution `a†_j → Σ_i T_ij a†_i` with
//! `T = I - M`, evaluated here on truncated Fock expansions.

use nalgebra::DMatrix;
use num_complex::Complex64 as C;

pub const MODES: usize = 8;
const D1: [usize; 3] = [0, 4, 5];
const D2: [usize; 3] = [1, 6, 7];
const CUTOFF: usize = 40;

#[derive(Clone, Copy, Debug)]
pub enum Input {
    /// Squeezed vacuum in the upper mode, split by the first beam splitter.
    Sv(f64),
    /// Two-mode squeezed vacuum across the arms.
    Tmsv(f64),
    /// Independent thermal states with the given mean photon numbers.
    Thermal(f64, f64),
}

fn bs(u: &mut DMatrix<C>, i: usize, j: usize, eta: f64) {
    let (t, r) = (eta.sqrt(), (1.0 - eta).sqrt());
    for c in 0..MODES {
        let (a, b) = (u[(i, c)], u[(j, c)]);
        u[(i, c)] = a * t + b * r;
        u[(j, c)] = -a * r + b * t;
    }
}

fn ps(u: &mut DMatrix<C>, i: usize, phi: f64) {
    let e = C::from_polar(1.0, phi);
    for c in 0..MODES {
        u[(i, c)] *= e;
    }
}

/// Mode transformation `b = U a` of the whole pipeline at one phase.
pub fn pipeline_unitary(input: Input, eta_u: f64, eta_d: f64, zeta: f64, phase: f64) -> DMatrix<C> {
    let mut u = DMatrix::<C>::identity(MODES, MODES);
    if let Input::Sv(_) = input {
        bs(&mut u, 0, 1, 0.5);
    }
    bs(&mut u, 0, 2, eta_u);
    bs(&mut u, 1, 3, eta_d);
    ps(&mut u, 1, phase);
    bs(&mut u, 0, 4, zeta);
    bs(&mut u, 1, 5, zeta);
    bs(&mut u, 0, 1, 0.5);
    bs(&mut u, 4, 6, 0.5);
    bs(&mut u, 5, 7, 0.5);
    u
}

fn ln_fact(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Coefficients of `(α x + β y)^n`, indexed by the power of `x`.
fn linear_powers(alpha: C, beta: C, max: usize) -> Vec<Vec<C>> {
    let mut out = vec![vec![C::new(1.0, 0.0)]];
    for n in 1..=max {
        let prev = &out[n - 1];
        let mut next = vec![C::new(0.0, 0.0); n + 1];
        for (a, &c) in prev.iter().enumerate() {
            next[a + 1] += c * alpha;
            next[a] += c * beta;
        }
        out.push(next);
    }
    out
}

/// `⟨m', n'| Γ(T) |m, n⟩` with `m' + n' = m + n`.
fn gamma_element(p1: &[Vec<C>], p2: &[Vec<C>], m: usize, n: usize, mp: usize, np: usize) -> C {
    debug_assert_eq!(m + n, mp + np);
    let (a1, a2) = (&p1[m], &p2[n]);
    let mut coeff = C::new(0.0, 0.0);
    // x-power a from the first factor, mp - a from the second
    for (a, &c1) in a1.iter().enumerate() {
        if a > mp || mp - a > n {
            continue;
        }
        coeff += c1 * a2[mp - a];
    }
    let norm = 0.5 * (ln_fact(mp) + ln_fact(np) - ln_fact(m) - ln_fact(n));
    coeff * norm.exp()
}

/// Probability of no photon in any of `modes` for the given input.
pub fn vacuum_probability(input: Input, u: &DMatrix<C>, modes: &[usize]) -> f64 {
    let mut m = [[C::new(0.0, 0.0); 2]; 2];
    for &k in modes {
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += u[(k, i)].conj() * u[(k, j)];
            }
        }
    }
    let one = C::new(1.0, 0.0);
    let t = [[one - m[0][0], -m[0][1]], [-m[1][0], one - m[1][1]]];
    // a†_0 → T00 a†_0 + T10 a†_1, a†_1 → T01 a†_0 + T11 a†_1
    let p1 = linear_powers(t[0][0], t[1][0], 2 * CUTOFF);
    let p2 = linear_powers(t[0][1], t[1][1], 2 * CUTOFF);
    let v = match input {
        Input::Sv(r) => {
            // amplitudes of |2k, 0⟩
            let amp = |k: usize| {
                let ln = -0.5 * r.cosh().ln() + k as f64 * r.tanh().ln() + 0.5 * ln_fact(2 * k)
                    - k as f64 * 2f64.ln()
                    - ln_fact(k);
                let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
                if r == 0.0 && k > 0 { 0.0 } else if r == 0.0 { 1.0 } else { sign * ln.exp() }
            };
            (0..=CUTOFF).map(|k| gamma_element(&p1, &p2, 2 * k, 0, 2 * k, 0) * amp(k) * amp(k)).sum::<C>()
        }
        Input::Tmsv(r) => {
            let amp = |k: usize| if k == 0 { 1.0 / r.cosh() } else { r.tanh().powi(k as i32) / r.cosh() };
            (0..=CUTOFF).map(|k| gamma_element(&p1, &p2, k, k, k, k) * amp(k) * amp(k)).sum::<C>()
        }
        Input::Thermal(mu, mu2) => {
            let p = |mu: f64, k: usize| mu.powi(k as i32) / (1.0 + mu).powi(k as i32 + 1);
            let mut s = C::new(0.0, 0.0);
            for a in 0..=CUTOFF {
                for b in 0..=CUTOFF {
                    s += gamma_element(&p1, &p2, a, b, a, b) * p(mu, a) * p(mu2, b);
                }
            }
            s
        }
    };
    v.re
}

/// Phase-averaged `(P(D1), P(D2), P(D1 D2))` over `n_phase` equally spaced phases.
pub fn click_probabilities(input: Input, eta_u: f64, eta_d: f64, zeta: f64, n_phase: usize) -> (f64, f64, f64) {
    let both: Vec<usize> = D1.iter().chain(&D2).copied().collect();
    let (mut p1, mut p2, mut pc) = (0.0, 0.0, 0.0);
    for k in 0..n_phase {
        let u = pipeline_unitary(input, eta_u, eta_d, zeta, 2.0 * std::f64::consts::PI * k as f64 / n_phase as f64);
        let v1 = vacuum_probability(input, &u, &D1);
        let v2 = vacuum_probability(input, &u, &D2);
        let v12 = vacuum_probability(input, &u, &both);
        p1 += 1.0 - v1;
        p2 += 1.0 - v2;
        pc += 1.0 - v1 - v2 + v12;
    }
    let n = n_phase as f64;
    (p1 / n, p2 / n, pc / n)
}
