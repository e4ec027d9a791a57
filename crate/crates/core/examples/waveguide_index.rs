//! Regenerates `data/tfln_waveguide_index.csv`.
//!
//! The effective index is built from a group-index profile in normalized
//! frequency `u = λ0/λ` (λ0 = 1559 nm):
//!
//! `n_g(u) = G + c3·(u − 1)³ + c4·(u − 1)⁴`
//!
//! Integrating `n_g = d(u·n)/du` with `n(1) = N0` gives
//! `n(u) = [G·u + c3·(u − 1)⁴/4 + c4·(u − 1)⁵/5 + N0 − G] / u`.
//!
//! * `dn_g/du = 0` at `u = 1`: zero GVD at 1559 nm.
//! * `c3` sets fourth-order dispersion and hence the degenerate SPDC
//!   bandwidth (≈589 nm FWHM for a 6 mm grating). The `c4` term is odd about
//!   degeneracy and cancels in the SPDC mismatch.
//! * `c3 + c4` is the pump/fundamental group-index mismatch, chosen for a
//!   3.85 nm SHG FWHM at 6 mm.
//! * `G` places the first-order QPM period for 779.5 nm → 2 × 1559 nm at 4.13 µm.
//!
//! Usage: `cargo run -p epsim-core --example waveguide_index > crates/core/data/tfln_waveguide_index.csv`

const LAMBDA0_NM: f64 = 1559.0;
const N0: f64 = 1.86;
const C3: f64 = 0.207;
const C4: f64 = -0.1604;
const PERIOD_UM: f64 = 4.13;
const PUMP_NM: f64 = 779.5;

fn main() {
    let pump_index = PUMP_NM * 1e-3 * (1.0 / PERIOD_UM + 2.0 * N0 / (LAMBDA0_NM * 1e-3));
    let g = 2.0 * pump_index - N0 - C3 / 4.0 - C4 / 5.0;
    let index = |lambda: f64| {
        let u = LAMBDA0_NM / lambda;
        let d = u - 1.0;
        (g * u + C3 * d.powi(4) / 4.0 + C4 * d.powi(5) / 5.0 + N0 - g) / u
    };

    println!("# synthetic thin-film LN waveguide effective index (TE00)");
    println!("# G = {g:.9}, N0 = {N0}, c3 = {C3}, c4 = {C4}, lambda0 = {LAMBDA0_NM} nm");
    println!("wavelength_nm,index");
    for k in 0..=950 {
        let lambda = 700.0 + 2.0 * k as f64;
        println!("{lambda:.1},{:.12}", index(lambda));
    }
}
