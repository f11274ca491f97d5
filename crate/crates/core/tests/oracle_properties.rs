use polariton_core::exact2p::solve_spectrum;
use polariton_core::oracle::{build_hamiltonian, diagonalize, diagonalize_dense, extract_amplitudes, merit_vs_k};
use polariton_core::params::{derive_params, ModelParams, PhysicalConfig};
use polariton_core::C64;

fn params(n: usize, g_hz: f64, delta_hz: f64, t_hz: f64) -> ModelParams {
    derive_params(&PhysicalConfig::rb_d2().with_n(n).with_coupling_hz(g_hz).with_detuning_hz(delta_hz).with_hopping_hz(t_hz)).unwrap()
}

#[test]
fn every_eigenpair_has_small_variational_residual() {
    let p = params(8, 2e9, 7e8, 2e7);
    let h = build_hamiltonian(&p).unwrap();
    let r = diagonalize(&h);
    let norm = h.max_norm();
    for (e, v) in r.offsets.iter().zip(&r.vectors) {
        let hv = h.apply(v);
        let res = hv.iter().zip(v).map(|(a, b)| (a - b * e).norm_sqr()).sum::<f64>().sqrt();
        assert!(res < 1e-9 * norm, "residual {res:e}");
    }
}

#[test]
fn eigenvectors_are_orthonormal() {
    let p = params(6, 5e9, -3e9, 0.0);
    let r = diagonalize(&build_hamiltonian(&p).unwrap());
    for i in 0..r.vectors.len() {
        for j in i..r.vectors.len() {
            let dot: C64 = r.vectors[i].iter().zip(&r.vectors[j]).map(|(a, b)| a.conj() * b).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((dot - want).norm() < 1e-10, "({i},{j}) {dot}");
        }
    }
}

#[test]
fn blocked_and_dense_solves_agree() {
    let p = params(8, 1e9, 1e9, 1e7);
    let h = build_hamiltonian(&p).unwrap();
    let a = diagonalize(&h);
    let b = diagonalize_dense(&h);
    assert!(b.unresolved().is_empty());
    for (x, y) in a.offsets.iter().zip(&b.offsets) {
        assert!((x - y).abs() < 1e-11 * a.h_norm);
    }
    for k in -3..=4 {
        assert_eq!(a.sector(k).len(), b.sector(k).len());
    }
}

#[test]
fn extracted_symmetric_states_are_normalized() {
    let p = params(12, 3e9, 0.0, 0.0);
    let h = build_hamiltonian(&p).unwrap();
    let r = diagonalize(&h);
    let exact = solve_spectrum(&p).unwrap();
    let sector = r.sector(0);
    let mut matched = 0;
    for st in &exact.states {
        let idx = sector
            .iter()
            .copied()
            .min_by(|&i, &j| (r.offsets[i] - st.offset).abs().total_cmp(&(r.offsets[j] - st.offset).abs()))
            .unwrap();
        let amp = extract_amplitudes(&h, &r, idx).unwrap();
        let norm: f64 = amp.a_k.iter().chain(&amp.b_k).chain(&amp.c_k).map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-10, "norm {norm}");
        let zero = h.grid.zero_index();
        if amp.a_k[zero].norm() > 1e-6 {
            assert!(amp.a_k[zero].im.abs() < 1e-12 && amp.a_k[zero].re > 0.0);
        }
        matched += 1;
    }
    assert_eq!(matched, 3 * 12 / 2 + 2);
}

#[test]
fn extraction_rejects_other_sectors() {
    let p = params(6, 3e9, 0.0, 0.0);
    let h = build_hamiltonian(&p).unwrap();
    let r = diagonalize(&h);
    let idx = r.sector(1)[0];
    assert!(extract_amplitudes(&h, &r, idx).is_err());
}

#[test]
fn merit_versus_k_is_even_and_matches_k0() {
    let p = derive_params(&PhysicalConfig::rb_d2().with_n(16).with_detuning_hz(0.0)).unwrap();
    let r = diagonalize(&build_hamiltonian(&p).unwrap());
    let exact = solve_spectrum(&p).unwrap();
    for rho in 1..=4 {
        let pts = merit_vs_k(&r, rho);
        assert_eq!(pts.len(), 16);
        for pt in &pts {
            if let Some(m) = pts.iter().find(|q| q.nu_k == -pt.nu_k) {
                assert!((pt.delta_a - m.delta_a).abs() < 1e-8, "rho {rho} K {}", pt.nu_k);
            }
        }
        let k0 = pts.iter().find(|q| q.nu_k == 0).unwrap();
        assert!((k0.delta_a - exact.states[rho - 1].delta_a).abs() < 1e-7);
    }
}
