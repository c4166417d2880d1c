use super::*;
use crate::clusters::CoinMode;
use crate::lattice::{critical_coupling, Bc, BondConfig, Couplings, Domain, GraphTag, SpinConfig};
use proptest::prelude::*;

fn jc() -> f64 {
    critical_coupling()
}

/// Straightforward triple loop over (sigma, tilde sigma, eta), used as an oracle.
fn brute_force_omega(d: &Domain, j: f64, u: f64) -> FiniteLaw<BondConfig> {
    let g = d.graph();
    let (n, m) = (g.n_vertices(), g.n_edges());
    let p = 1.0 - (-4.0 * j).exp();
    let mut items = Vec::new();
    for a in 0u64..1 << n {
        for b in 0u64..1 << n {
            let sa = SpinConfig::from_mask(n, a);
            let sb = SpinConfig::from_mask(n, b);
            if (0..n).any(|v| g.is_plus(v) && (sa.get(v) < 0 || sb.get(v) < 0)) {
                continue;
            }
            let mut energy = 0.0;
            for e in 0..m {
                let (x, y) = g.edge(e);
                let (s1, s2) = ((sa.get(x) * sa.get(y)) as f64, (sb.get(x) * sb.get(y)) as f64);
                energy += j * (s1 + s2) + u * s1 * s2;
            }
            for eta in 0u64..1 << m {
                let mut w = energy.exp();
                let mut omega = BondConfig::empty(GraphTag::Primal, m);
                for e in 0..m {
                    let open = eta >> e & 1 == 1;
                    let pe = if g.is_wired(e) { 1.0 } else { p };
                    w *= if open { pe } else { 1.0 - pe };
                    let (x, y) = g.edge(e);
                    if open && sa.get(x) == sa.get(y) && sb.get(x) == sb.get(y) {
                        omega.set(e, true);
                    }
                }
                items.push((omega, w));
            }
        }
    }
    FiniteLaw::from_weights(items).unwrap()
}

#[test]
fn single_edge_ising() {
    let d = Domain::rect(2, 1, Bc::Free).unwrap();
    let j = 0.7;
    let law = ising_law(d.graph(), &Couplings::uniform(1, j).unwrap()).unwrap();
    let same = law.probability(|s| s.get(0) == s.get(1));
    assert!((same - j.exp() / (j.exp() + (-j).exp())).abs() < 1e-14);
    assert_eq!(law.len(), 4);
}

#[test]
fn plus_pins_small_boxes() {
    let d = Domain::rect(1, 2, Bc::Plus).unwrap();
    let k = Couplings::uniform(1, 0.3).unwrap();
    let law = ising_law(d.graph(), &k).unwrap();
    assert_eq!(law.len(), 1);
    let om = omega_law(d.graph(), &k).unwrap();
    assert_eq!(om.law.len(), 1);
    assert_eq!(om.law.support()[0].count_open(), 1);
}

#[test]
fn omega_matches_brute_force() {
    for (w, h, bc) in [(2, 2, Bc::Free), (3, 2, Bc::Free), (3, 3, Bc::Plus), (2, 2, Bc::Plus)] {
        let d = Domain::rect(w, h, bc).unwrap();
        for (j, u) in [(0.3, 0.0), (jc(), 0.0), (0.5, -0.1), (0.4, 0.2)] {
            let k = Couplings::uniform_at(d.n_edges(), j, u).unwrap();
            let fast = omega_law(d.graph(), &k).unwrap().law;
            let slow = brute_force_omega(&d, j, u);
            assert!(fast.total_variation(&slow) < 1e-12, "{w}x{h} {bc} J={j} U={u}");
        }
    }
}

#[test]
fn degenerate_couplings() {
    let d = Domain::rect(3, 3, Bc::Free).unwrap();
    let law = omega_law(d.graph(), &Couplings::uniform(12, 0.0).unwrap()).unwrap().law;
    assert_eq!(law.len(), 1);
    assert_eq!(law.support()[0].count_open(), 0);
    let d = Domain::rect(3, 3, Bc::Plus).unwrap();
    let law = omega_law(d.graph(), &Couplings::uniform(12, 0.0).unwrap()).unwrap().law;
    assert_eq!(law.len(), 1);
    assert_eq!(law.support()[0].count_open(), 8);
    let law = omega_law(d.graph(), &Couplings::uniform(12, 20.0).unwrap()).unwrap().law;
    assert!(law.probability(|c| c.count_open() == 12) > 1.0 - 1e-9);
}

#[test]
fn edwards_sokal_on_boxes() {
    for (w, h) in [(1, 2), (2, 2), (3, 2), (3, 3)] {
        for bc in [Bc::Plus, Bc::Free] {
            let d = Domain::rect(w, h, bc).unwrap();
            for (j, u) in default_couplings() {
                let k = Couplings::uniform_at(d.n_edges(), j, u).unwrap();
                let r = verify_edwards_sokal(d.graph(), &k, "box").unwrap();
                assert!(r.pass, "{r:?}");
                let r = verify_correlation_identity(d.graph(), &k, "box").unwrap();
                assert!(r.pass, "{r:?}");
            }
        }
    }
}

#[test]
fn pushforward_of_point_masses() {
    let d = Domain::rect(3, 1, Bc::Free).unwrap();
    let law = FiniteLaw::point_mass(BondConfig::empty(GraphTag::Primal, 2));
    let spins = coin_toss_pushforward(&law, d.graph(), CoinMode::Free).unwrap();
    assert_eq!(spins.len(), 8);
    assert!(spins.probs().iter().all(|&p| (p - 0.125).abs() < 1e-15));
    let law = FiniteLaw::point_mass(BondConfig::full(GraphTag::Primal, 2));
    let spins = coin_toss_pushforward(&law, d.graph(), CoinMode::Free).unwrap();
    assert_eq!(spins.len(), 2);
}

#[test]
fn duality_on_small_boxes() {
    for (w, h) in [(1, 2), (2, 2), (3, 2), (2, 3), (3, 3)] {
        for bc in [Bc::Plus, Bc::Free] {
            let d = Domain::rect(w, h, bc).unwrap();
            for j in [0.2, jc(), 0.8] {
                let k = Couplings::uniform(d.n_edges(), j).unwrap();
                let r = verify_duality(&d, &k, "box").unwrap();
                assert!(r.pass, "{w}x{h} {bc} J={j}: {r:?}");
            }
        }
    }
}

#[test]
fn duality_fails_if_chords_are_forced() {
    // forcing every edge between plus vertices (including the middle rung of the 3x2 box)
    // breaks the duality, which pins down which edges must be forced
    let d = Domain::rect(3, 2, Bc::Plus).unwrap();
    let g = d.graph().clone().with_boundary(vec![true; 6], vec![true; 7]).unwrap();
    let k = Couplings::uniform(7, jc()).unwrap();
    let all_forced = omega_law(&g, &k).unwrap().law;
    assert_eq!(all_forced.len(), 1);
    let omega = omega_law(d.graph(), &k).unwrap().law;
    let rung_open = omega.probability(|c| c.get(5));
    let jd = crate::lattice::kramers_wannier(jc()).unwrap();
    // the weak dual is a single edge carrying a double current at J*
    let dual_zero = 1.0 / (jd.cosh() * jd.cosh());
    assert!((rung_open - dual_zero).abs() < 1e-12);
    assert!(rung_open < 1.0 - 1e-3);
}

#[test]
fn traces_and_constructions() {
    for (w, h) in [(2, 2), (3, 2), (3, 3)] {
        for bc in [Bc::Plus, Bc::Free] {
            let d = Domain::rect(w, h, bc).unwrap();
            for j in [0.2, jc(), 0.8] {
                let k = Couplings::uniform(d.n_edges(), j).unwrap();
                let r = verify_trace_identity(d.graph(), &k, "box").unwrap();
                assert!(r.pass, "{r:?}");
                let r = verify_current_construction(d.graph(), &k, "box").unwrap();
                assert!(r.pass, "{w}x{h} {bc} J={j}: {r:?}");
            }
        }
    }
}

#[test]
fn single_current_on_one_edge() {
    let d = Domain::rect(2, 1, Bc::Free).unwrap();
    let j = 0.9;
    let law = current_trace_law(d.graph(), &Couplings::uniform(1, j).unwrap()).unwrap();
    assert_eq!(law.len(), 2);
    let even = law.probability(|t| t.even.get(0));
    assert!((even - (j.cosh() - 1.0) / j.cosh()).abs() < 1e-14);
    let d = Domain::rect(2, 1, Bc::Plus).unwrap();
    let law = current_trace_law(d.graph(), &Couplings::uniform(1, j).unwrap()).unwrap();
    let odd = law.probability(|t| t.odd.get(0));
    assert!((odd - j.sinh() / j.exp()).abs() < 1e-14);
}

#[test]
fn drc_is_the_sum_of_two_currents() {
    let d = Domain::rect(3, 2, Bc::Free).unwrap();
    let k = Couplings::uniform(7, 0.6).unwrap();
    let single = current_trace_law(d.graph(), &k).unwrap();
    let mut items = Vec::new();
    for (a, p) in single.iter() {
        for (b, q) in single.iter() {
            items.push((a.add(b), p * q));
        }
    }
    let conv = FiniteLaw::from_weights(items).unwrap();
    let drc = drc_trace_law(d.graph(), &k).unwrap();
    assert!(conv.total_variation(&drc) < 1e-12);
}

#[test]
fn switching_counts() {
    let d = Domain::rect(3, 1, Bc::Free).unwrap();
    let r = verify_switching_count(d.graph(), &[2, 2], "path").unwrap();
    assert!(r.pass);
    assert_eq!(r.params["multiplicity"], 4.0);
    let d = Domain::square(2, Bc::Free).unwrap();
    let r = verify_switching_count(d.graph(), &[1, 3, 2, 1], "square").unwrap();
    assert!(r.pass);
    assert_eq!(r.params["multiplicity"], 8.0);
    assert!(verify_switching_count(d.graph(), &[9, 9, 9, 9], "square").is_err());
}

#[test]
fn fk4_at_the_four_state_point() {
    for bc in [Bc::Free, Bc::Plus] {
        let d = Domain::rect(3, 2, bc).unwrap();
        let r = verify_fk4_point(d.graph(), "box").unwrap();
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn fkg_checks() {
    let d = Domain::square(2, Bc::Free).unwrap();
    for (j, u) in [(jc(), 0.0), (0.3, 0.1), (crate::lattice::at_critical_coupling(0.2), 0.2)] {
        let k = Couplings::uniform_at(4, j, u).unwrap();
        assert!(verify_fkg_lattice(d.graph(), &k, "box").unwrap().pass);
        assert!(verify_tau_marginal_formula(d.graph(), &k, "box").unwrap().pass);
        assert!(verify_fkg_conditional(d.graph(), &k, None, "box").unwrap().pass);
    }
    let d = Domain::rect(3, 3, Bc::Plus).unwrap();
    let k = Couplings::uniform_at(12, 0.5, -0.1).unwrap();
    assert!(verify_tau_marginal_formula(d.graph(), &k, "box").unwrap().pass);
    // far outside the regime the report carries a warning
    let d = Domain::rect(3, 2, Bc::Free).unwrap();
    let k = Couplings::uniform_at(7, 0.1, -1.0).unwrap();
    let r = verify_fkg_lattice(d.graph(), &k, "box").unwrap();
    assert!(!r.warnings.is_empty());
}

#[test]
fn anticorrelation_and_domination() {
    let d = Domain::rect(2, 3, Bc::Free).unwrap();
    let pairs = anticorrelation_events(&d);
    for j in [0.2, jc(), 0.8] {
        let k = Couplings::uniform(d.n_edges(), j).unwrap();
        let r = verify_anticorrelation(d.graph(), &k, &pairs, "box").unwrap();
        assert!(r.pass, "{r:?}");
        let r = verify_stochastic_domination(d.graph(), &k, "box").unwrap();
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn resource_limits() {
    let d = Domain::square(5, Bc::Free).unwrap();
    let k = Couplings::uniform(d.n_edges(), 0.3).unwrap();
    assert!(matches!(omega_law(d.graph(), &k), Err(crate::Error::ResourceLimit(_))));
}

#[test]
fn corpus_is_deduplicated() {
    let c = grid_subgraph_corpus(10, Bc::Free);
    // one single-edge class per orientation
    assert_eq!(c.iter().filter(|(_, d)| d.n_edges() == 1).count(), 2);
    assert!(c.iter().all(|(_, d)| d.n_edges() <= 10));
    assert!(c.len() > 100);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn edwards_sokal_on_random_subgraphs(idx in 0usize..10_000, j in 0.05f64..1.2, plus in any::<bool>()) {
        let bc = if plus { Bc::Plus } else { Bc::Free };
        let corpus = grid_subgraph_corpus(8, bc);
        let (label, d) = &corpus[idx % corpus.len()];
        let k = Couplings::uniform(d.n_edges(), j).unwrap();
        let r = verify_edwards_sokal(d.graph(), &k, label).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }

    #[test]
    fn laws_are_normalised(j in 0.0f64..1.5, u in -0.2f64..0.3) {
        let d = Domain::rect(3, 2, Bc::Free).unwrap();
        let k = Couplings::uniform_at(7, j, u).unwrap();
        let law = omega_law(d.graph(), &k).unwrap().law;
        prop_assert!((law.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let s = ising_law(d.graph(), &k).unwrap();
        prop_assert!((s.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn joint_density_has_the_omega_marginal() {
    for (w, h) in [(2, 2), (3, 2)] {
        for bc in [Bc::Plus, Bc::Free] {
            let d = Domain::rect(w, h, bc).unwrap();
            for (j, u) in default_couplings() {
                let k = Couplings::uniform_at(d.n_edges(), j, u).unwrap();
                let joint = enumerate::tau_omega_masks(d.graph(), &k).unwrap();
                let omega = enumerate::omega_law_masks(d.graph(), &k).unwrap();
                let tv = joint.map(|&(_, w)| w).total_variation(&omega);
                assert!(tv < 1e-10, "{w}x{h} {bc:?} J={j} U={u}: {tv}");
            }
        }
    }
}

#[test]
fn omega_fkg_is_reported_as_data() {
    let d = Domain::square(2, Bc::Free).unwrap();
    let k = Couplings::uniform(d.n_edges(), critical_coupling()).unwrap();
    let r = omega_fkg_data(d.graph(), &k, "box 2x2 free").unwrap();
    assert!(r.pass);
    // the lattice condition fails on the free 2x2 box, which leaves positive association open
    assert!(r.metric < -1e-4, "{}", r.metric);
    assert_eq!(r.warnings.len(), 1);
    let d = Domain::rect(3, 2, Bc::Plus).unwrap();
    let k = Couplings::uniform(d.n_edges(), 0.8).unwrap();
    let r = omega_fkg_data(d.graph(), &k, "box 3x2 plus").unwrap();
    assert!(r.pass && r.warnings.is_empty());
}
