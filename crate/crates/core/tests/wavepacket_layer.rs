use polariton_core::exact2p::{solve_spectrum, Band};
use polariton_core::params::{derive_params, PhysicalConfig};
use polariton_core::wavepacket::{approx_a0, coupled_residuals, from_ab_coordinates, reconstruct_a0, to_ab_coordinates};

#[test]
fn single_mu_estimate_tracks_reconstruction_in_magnitude() {
    let p = derive_params(&PhysicalConfig::rb_d2().with_lattice_constant(5.3e-6).with_detuning_hz(0.0)).unwrap();
    let s = solve_spectrum(&p).unwrap();
    let half = p.n / 2;
    for rho in (3 * half / 4 + 1)..=half {
        let st = s.state(Band::LL, rho).unwrap();
        let full = reconstruct_a0(st, &p).unwrap();
        let single = approx_a0(st, &p).unwrap();
        let ratio = single / full;
        assert!((0.2..=5.0).contains(&ratio.abs()), "rho {rho}: ratio {ratio}");
    }
}

#[test]
fn basis_change_round_trips_with_hopping() {
    let p = derive_params(&PhysicalConfig::rb_d2().with_n(24).with_detuning_hz(-1e9).with_hopping_hz(3e7)).unwrap();
    let s = solve_spectrum(&p).unwrap();
    for st in &s.states {
        let coords = to_ab_coordinates(&st.a_k, &st.b_k, &st.c_n, &p);
        let (a, b, c) = from_ab_coordinates(&coords, &p);
        for (x, y) in a.iter().chain(&b).chain(&c).zip(st.a_k.iter().chain(&st.b_k).chain(&st.c_n)) {
            assert!((x - y).abs() < 1e-10);
        }
        let (l1, l2) = coupled_residuals(st, &p);
        assert!(l1 < 1e-8 && l2 < 1e-8, "rho {} {:?}: {l1:e} {l2:e}", st.rho, st.band);
    }
}
