use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::error::Error;
use crate::lattice::{Bc, BondConfig, Domain, GraphTag, SpinConfig};
use crate::sampler::{Construction, HeightField, MasterSample, SamplerContext};

fn stub(d: &Domain, omega: BondConfig) -> MasterSample {
    let n = d.n_vertices();
    MasterSample {
        sigma: SpinConfig::all_plus(n),
        sigma_tilde: SpinConfig::all_plus(n),
        tau: SpinConfig::all_plus(n),
        eta: None,
        omega,
        trace: None,
        tau_dagger: None,
        omega_dagger: None,
        sigma_dagger: None,
        height: None,
    }
}

fn fixed(d: &Domain, omega: BondConfig, count: usize) -> Vec<(FixedSource, usize)> {
    vec![(FixedSource::new(d.clone(), stub(d, omega)), count)]
}

fn full(d: &Domain) -> BondConfig {
    BondConfig::full(GraphTag::Primal, d.n_edges())
}

fn empty(d: &Domain) -> BondConfig {
    BondConfig::empty(GraphTag::Primal, d.n_edges())
}

fn small(samples: usize) -> McParams {
    McParams {
        seed: 3,
        chains: 2,
        samples,
        burn_in: 20,
        thinning: 2,
    }
}

fn jc() -> f64 {
    crate::lattice::critical_coupling()
}

#[test]
fn series_batch_means_error() {
    let s = ScalarSeries::from_chains(vec![(0..64).map(|i| (i % 2) as f64).collect()]);
    let e = s.estimate();
    assert_eq!(e.mean, 0.5);
    assert_eq!(e.n_samples, 64);
    // every batch of two holds one 0 and one 1
    assert_eq!(e.stderr, 0.0);
    let mut a = ScalarSeries::new();
    a.push(1.0);
    a.merge(ScalarSeries::from_chains(vec![vec![3.0]]));
    assert_eq!(a.mean(), 2.0);
    assert!(a.estimate().stderr.is_finite());
}

#[test]
fn ratio_of_proportional_series_is_exact() {
    let b = ScalarSeries::from_chains(vec![(1..=40).map(f64::from).collect()]);
    let a = ScalarSeries::from_chains(vec![(1..=40).map(|i| 3.0 * f64::from(i)).collect()]);
    let r = ratio_estimate(&a, &b);
    assert!((r.mean - 3.0).abs() < 1e-12);
    assert!(r.stderr.abs() < 1e-12);
}

#[test]
fn exponent_fit_recovers_power_law() {
    let pts: Vec<(f64, f64)> = [4.0, 8.0, 16.0, 32.0].iter().map(|&x: &f64| (x, 2.5 * x.powf(-0.25))).collect();
    let fit = ExponentFit::fit(&pts).unwrap();
    assert!((fit.slope + 0.25).abs() < 1e-12);
    assert!((fit.intercept - 2.5f64.ln()).abs() < 1e-12);
    assert!(fit.stderr < 1e-12);
    assert!(fit.within(-0.25, 1e-9));
    assert_eq!(fit.table().rows.len(), 4);
    assert!(matches!(ExponentFit::fit(&pts[..3]), Err(Error::InvalidArgument(_))));
    let zero = [(1.0, 1.0), (2.0, 0.5), (3.0, 0.0), (4.0, 0.1)];
    assert!(matches!(ExponentFit::fit(&zero), Err(Error::Degenerate(_))));
}

#[test]
fn geometric_mean_error_propagation() {
    let a = Estimate {
        mean: 4.0,
        stderr: 0.4,
        n_samples: 10,
    };
    let b = Estimate {
        mean: 1.0,
        stderr: 0.0,
        n_samples: 5,
    };
    let g = geometric_mean(&a, &b);
    assert_eq!(g.mean, 2.0);
    assert!((g.stderr - 0.1).abs() < 1e-12);
    assert_eq!(g.n_samples, 15);
}

#[test]
fn sub_seeds_differ() {
    let s: Vec<u64> = (0..8).map(|k| sub_seed(42, k)).collect();
    for i in 0..8 {
        for j in 0..i {
            assert_ne!(s[i], s[j]);
        }
    }
    assert_eq!(sub_seed(42, 3), s[3]);
}

#[test]
fn one_point_needs_four_sizes() {
    assert!(matches!(one_point_scaling(&[16], jc(), &small(10)), Err(Error::InvalidArgument(_))));
}

#[test]
fn one_point_at_zero_coupling_is_degenerate() {
    let r = one_point_scaling(&[5, 7, 9, 11], 0.0, &small(20));
    assert!(matches!(r, Err(Error::Degenerate(_))), "{r:?}");
}

#[test]
fn one_point_report_table() {
    let r = one_point_scaling(&[5, 7, 9, 11], 1.5, &small(40)).unwrap();
    assert_eq!(r.rows.len(), 4);
    let t = r.table();
    assert_eq!(t.header[..4], ["L", "estimate", "stderr", "n_samples"]);
    // far below the critical temperature the centre is almost surely wired
    assert!(r.rows.iter().all(|row| row.connection.mean > 0.9));
}

#[test]
fn two_point_at_zero_separation_is_one() {
    let e = two_point_function(16, &[0, 4], Bc::Free, jc(), &small(20)).unwrap();
    assert_eq!(e[0].mean, 1.0);
    assert!(e[1].mean > 0.0 && e[1].mean < 1.0);
}

#[test]
fn two_point_vanishes_at_zero_coupling() {
    for bc in [Bc::Free, Bc::Plus] {
        let e = two_point_function(16, &[2, 4], bc, 0.0, &small(20)).unwrap();
        assert!(e.iter().all(|x| x.mean == 0.0), "{bc:?}: {e:?}");
    }
}

#[test]
fn two_point_rejects_bad_separations() {
    assert!(two_point_scaling(16, &[1, 2, 4], jc(), &small(10)).is_err());
    assert!(two_point_scaling(16, &[0, 1, 2, 4], jc(), &small(10)).is_err());
    assert!(two_point_function(8, &[12], Bc::Free, jc(), &small(10)).is_err());
}

#[test]
fn pairs_are_at_the_requested_distance() {
    let d = Domain::square(33, Bc::Free).unwrap();
    let ps = bulk_pairs(&d, 8).unwrap();
    assert_eq!(ps.len(), 18);
    for (a, b) in ps {
        let ((ax, ay), (bx, by)) = (d.coords(a), d.coords(b));
        assert_eq!((ax - bx).abs() + (ay - by).abs(), 8);
        assert!(ax == bx || ay == by);
    }
}

#[test]
fn full_configuration_always_has_circuits() {
    let d = Domain::centered_box(16, Bc::Free).unwrap();
    let ns = [1, 2, 4, 16];
    let est = no_circuit_probabilities(&mut fixed(&d, full(&d), 3), CircuitSource::Omega, 16, &ns).unwrap();
    assert_eq!(est.iter().map(|e| e.mean).collect::<Vec<_>>(), [0.0, 0.0, 0.0, 1.0]);
    let c = circuit_probability_from(&mut fixed(&d, full(&d), 3), CircuitSource::OmegaPlus, 2, 4).unwrap();
    assert_eq!(c.mean, 1.0);
    let m = circuit_probability_from(&mut fixed(&d, full(&d), 3), CircuitSource::OmegaMinus, 2, 4).unwrap();
    assert_eq!(m.mean, 0.0);
}

#[test]
fn empty_configuration_has_no_circuit() {
    let d = Domain::centered_box(16, Bc::Free).unwrap();
    let c = circuit_probability_from(&mut fixed(&d, empty(&d), 5), CircuitSource::Omega, 4, 8).unwrap();
    assert_eq!(c.mean, 0.0);
    assert_eq!(c.n_samples, 5);
    let est = no_circuit_probabilities(&mut fixed(&d, empty(&d), 2), CircuitSource::Omega, 16, &[1, 8]).unwrap();
    assert!(est.iter().all(|e| e.mean == 1.0));
}

#[test]
fn circuits_outside_the_domain_are_rejected() {
    let d = Domain::centered_box(8, Bc::Free).unwrap();
    assert!(circuit_probability_from(&mut fixed(&d, full(&d), 1), CircuitSource::Omega, 4, 9).is_err());
    assert!(circuit_probability(CircuitSource::OmegaPlus, 4, 2, 1, jc(), &small(4)).is_err());
}

#[test]
fn circuits_at_low_temperature() {
    let r = circuit_probability(CircuitSource::Omega, 3, 2, 3, 3.0, &small(40)).unwrap();
    assert!(r.estimate.mean >= 0.99, "{r:?}");
    assert_eq!(circuit_table(&[r]).rows.len(), 1);
}

#[test]
fn arm_ladder_validation() {
    let p = small(4);
    for ns in [&[4, 8, 16][..], &[4, 8, 8, 16], &[4, 8, 16, 64], &[0, 2, 4, 8]] {
        assert!(arm_exponent(CircuitSource::Omega, 64, ns, Bc::Free, 0, jc(), &p).is_err(), "{ns:?}");
    }
    assert!(drc_one_arm(64, &[2, 4, 8], 0, jc(), &p).is_err());
}

#[test]
fn drc_report_on_small_ladder() {
    let r = drc_one_arm(16, &[1, 2, 3, 4], 4, jc(), &small(60)).unwrap();
    assert_eq!(r.rows.len(), 4);
    for row in &r.rows {
        assert!(row.combined.mean > 0.0 && row.combined.mean <= 1.0);
        assert!((row.combined.mean - (row.plus.mean * row.free.mean).sqrt()).abs() < 1e-12);
    }
    assert_eq!(r.table().rows.len(), 4);
}

#[test]
fn beta_with_the_full_box() {
    let d = Domain::centered_box(6, Bc::Plus).unwrap();
    let b = beta_from(&mut fixed(&d, full(&d), 4), 6, 6).unwrap();
    let expected = 6f64.powf(1.0 / 8.0 - 2.0) * 121.0;
    assert!((b.estimate.mean - expected).abs() < 1e-12);
    assert_eq!(b.acceptance_rate, 1.0);
    let inner = beta_from(&mut fixed(&d, full(&d), 4), 2, 6).unwrap();
    assert!((inner.estimate.mean - 2f64.powf(1.0 / 8.0 - 2.0) * 9.0).abs() < 1e-12);
}

#[test]
fn beta_without_acceptance_fails() {
    let d = Domain::centered_box(6, Bc::Free).unwrap();
    let r = beta_from(&mut fixed(&d, empty(&d), 4), 2, 6);
    assert!(matches!(r, Err(Error::InsufficientData(_))));
    assert!(matches!(beta_from(&mut fixed(&d, empty(&d), 1), 7, 6), Err(Error::InvalidArgument(_))));
}

#[test]
fn beta_trivial_conditioning_matches_plain_mean() {
    let d = Domain::centered_box(5, Bc::Plus).unwrap();
    let ctx = SamplerContext::new(d, jc(), Construction::Direct).unwrap();
    let p = small(200);
    let b = beta_from(&mut chain_sources(&ctx, &p).unwrap(), 5, 5).unwrap();
    assert_eq!(b.acceptance_rate, 1.0);
    let plain = gather_chains(&ctx, &p, |s, d| Ok(beta_observation(s, d, 5)[1])).unwrap();
    let mean = ScalarSeries::from_chains(plain).mean();
    assert!((b.estimate.mean - mean).abs() < 1e-12);
}

#[test]
fn area_measures_of_the_full_box() {
    let d = Domain::square(16, Bc::Free).unwrap();
    let m = area_measures(&full(&d), &d, 3, &[0.5, 0.25]).unwrap();
    assert_eq!(m.len(), 2);
    assert!((m[0].total_mass - 16f64.powf(0.125)).abs() < 1e-12);
    assert_eq!(m[0].box_masses.len(), 4);
    assert_eq!(m[1].box_masses.len(), 16);
    let quarter = m[0].total_mass / 4.0;
    assert!(m[0].box_masses.values().all(|x| (x - quarter).abs() < 1e-12));
}

#[test]
fn area_measures_of_the_empty_configuration() {
    let d = Domain::square(8, Bc::Free).unwrap();
    let m = area_measures(&empty(&d), &d, 100, &[0.5]).unwrap();
    let unit = (1.0f64 / 8.0).powf(AREA_EXPONENT);
    // the 28 boundary singletons form C_0, the 36 interior singletons follow
    assert_eq!(m.len(), 37);
    assert!((m[0].total_mass - 28.0 * unit).abs() < 1e-12);
    assert!(m[1..].iter().all(|a| (a.total_mass - unit).abs() < 1e-15));
    let forced = crate::lattice::forced_config(Domain::square(8, Bc::Plus).unwrap().graph());
    let m = area_measures(&forced, &Domain::square(8, Bc::Plus).unwrap(), 0, &[0.5]).unwrap();
    assert!((m[0].total_mass - 28.0 * unit).abs() < 1e-12);
}

#[test]
fn dyadic_levels() {
    assert_eq!(dyadic_level(1.0).unwrap(), 0);
    assert_eq!(dyadic_level(0.125).unwrap(), 3);
    assert!(dyadic_level(0.3).is_err());
    assert!(dyadic_level(2.0).is_err());
}

#[test]
fn test_function_parsing() {
    for s in ["const", "const:2", "bump", "bump:0.25,0.5,0.1", "box", "box:0.125"] {
        let f: TestFunction = s.parse().unwrap();
        assert_eq!(f.to_string().parse::<TestFunction>().unwrap(), f);
    }
    for s in ["", "wave", "bump:1", "box:-1", "const:x"] {
        assert!(s.parse::<TestFunction>().is_err(), "{s}");
    }
    let bump: TestFunction = "bump".parse().unwrap();
    assert_eq!(bump.eval((0.5, 0.5)), 1.0);
    assert_eq!(bump.eval((0.8, 0.5)), 0.0);
    let b: TestFunction = "box".parse().unwrap();
    assert_eq!(b.eval((0.7, 0.3)), 1.0);
    assert_eq!(b.eval((0.8, 0.3)), 0.0);
}

#[test]
fn discrepancy_needs_beta() {
    let d = Domain::square(8, Bc::Plus).unwrap();
    let r = l2_discrepancy(&mut fixed(&d, full(&d), 2), 0, TestFunction::Constant(1.0), &[0.5], None);
    assert!(matches!(r, Err(Error::InvalidArgument(_))));
}

#[test]
fn discrepancy_of_zero_function_is_zero() {
    let d = Domain::square(16, Bc::Plus).unwrap();
    let ctx = SamplerContext::new(d, jc(), Construction::Direct).unwrap();
    let mut src = chain_sources(&ctx, &small(30)).unwrap();
    let r = l2_discrepancy(&mut src, 0, TestFunction::Constant(0.0), &[0.5, 0.25, 0.125], Some(0.7)).unwrap();
    assert!(r.rows.iter().all(|row| row.estimate.mean == 0.0));
    assert_eq!(r.table().rows.len(), 3);
}

#[test]
fn discrepancy_of_the_full_box_with_matched_beta_is_zero() {
    let l = 32usize;
    let d = Domain::square(l, Bc::Plus).unwrap();
    let delta = 1.0 / l as f64;
    for eps in [0.5f64, 0.25, 0.125] {
        let beta = delta.powf(AREA_EXPONENT) * (l * l) as f64 / (eps.powf(AREA_EXPONENT) * eps.powi(-2));
        let r = l2_discrepancy(&mut fixed(&d, full(&d), 3), 0, TestFunction::Constant(1.0), &[eps], Some(beta)).unwrap();
        assert!(r.rows[0].estimate.mean < 1e-24, "{eps}: {:?}", r.rows[0]);
    }
}

#[test]
fn box_beta_rescales_half_width_to_side() {
    assert!((box_beta(1.0) * 2f64.powf(AREA_EXPONENT) - 1.0).abs() < 1e-15);
}

#[test]
fn magnetisation_field_of_all_plus() {
    let d = Domain::square(10, Bc::Free).unwrap();
    let s = stub(&d, empty(&d));
    let fv = TestFunction::Constant(1.0).on(&d);
    let phi = magnetisation_field(&s.sigma, &s.omega, &d, &fv).unwrap();
    assert!((phi - 0.1f64.powf(AREA_EXPONENT) * 100.0).abs() < 1e-12);
}

#[test]
fn magnetisation_field_paths_agree_on_samples() {
    for bc in [Bc::Free, Bc::Plus] {
        let ctx = SamplerContext::new(Domain::square(12, bc).unwrap(), jc(), Construction::Direct).unwrap();
        let fv = TestFunction::Bump {
            center: (0.4, 0.6),
            radius: 0.5,
        }
        .on(ctx.domain());
        gather_chains(&ctx, &small(200), |s, d| magnetisation_field(&s.sigma, &s.omega, d, &fv)).unwrap();
    }
}

#[test]
fn magnetisation_field_rejects_split_clusters() {
    let d = Domain::square(4, Bc::Free).unwrap();
    let mut s = stub(&d, full(&d));
    s.sigma.set(5, -1);
    let fv = vec![1.0; d.n_vertices()];
    assert!(matches!(
        magnetisation_field(&s.sigma, &s.omega, &d, &fv),
        Err(Error::InvariantViolation(_))
    ));
}

#[test]
fn second_moment_rows() {
    let rows = magnetisation_second_moment(&[8, 12], TestFunction::Constant(1.0), Bc::Free, jc(), &small(40)).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.estimate.mean > 0.0));
    assert_eq!(second_moment_table(&rows).rows.len(), 2);
}

fn harmonic_defect(g: &GreenFunction, d: &Domain, x: usize, y: usize) -> f64 {
    let adj = d.graph().adjacency();
    let mean: f64 = adj[x].iter().map(|&(z, _)| g.value(z, y)).sum::<f64>() / 4.0;
    g.value(x, y) - mean - if x == y { 1.0 } else { 0.0 }
}

#[test]
fn green_function_invariants() {
    let d = Domain::rect(14, 11, Bc::Free).unwrap();
    let g = GreenFunction::new(&d).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = d.n_vertices();
    let mut checked = 0;
    while checked < 100 {
        let (x, y) = (rng.gen_range(0..n), rng.gen_range(0..n));
        assert!((g.value(x, y) - g.value(y, x)).abs() < 1e-10);
        if !g.is_interior(x) {
            assert_eq!(g.value(x, y), 0.0);
            continue;
        }
        assert!(harmonic_defect(&g, &d, x, y).abs() < 1e-8);
        checked += 1;
    }
    let b = d.vertex_at(d.origin().0, d.origin().1 + 3).unwrap();
    assert!(g.column(b).iter().all(|&v| v == 0.0));
}

#[test]
fn green_spectral_and_iterative_agree() {
    let d = Domain::rect(9, 12, Bc::Plus).unwrap();
    let a = GreenFunction::new(&d).unwrap();
    let b = GreenFunction::iterative(&d).unwrap();
    let f = TestFunction::Bump {
        center: (0.5, 0.4),
        radius: 0.4,
    }
    .on(&d);
    let (ga, gb) = (a.apply(&f), b.apply(&f));
    for v in 0..d.n_vertices() {
        assert!((ga[v] - gb[v]).abs() < 1e-9, "{v}");
    }
    let x = d.vertex_at(3, 4).unwrap();
    let y = d.vertex_at(5, 7).unwrap();
    assert!((a.value(x, y) - b.value(x, y)).abs() < 1e-9);
    assert!((a.column(x)[y] - a.value(x, y)).abs() < 1e-10);
}

#[test]
fn green_on_a_non_box_domain() {
    let mut coords = Vec::new();
    for y in 0..8i32 {
        for x in 0..8i32 {
            if x < 4 || y < 4 {
                coords.push((x, y));
            }
        }
    }
    let mut edges = Vec::new();
    for (i, &(x, y)) in coords.iter().enumerate() {
        for (j, &(u, v)) in coords.iter().enumerate() {
            if j > i && (x - u).abs() + (y - v).abs() == 1 {
                edges.push([i as u32, j as u32]);
            }
        }
    }
    let d = Domain::from_edges(coords, edges, Bc::Free).unwrap();
    let g = GreenFunction::new(&d).unwrap();
    for x in 0..d.n_vertices() {
        for y in 0..d.n_vertices() {
            assert!((g.value(x, y) - g.value(y, x)).abs() < 1e-9);
            if g.is_interior(x) {
                assert!(harmonic_defect(&g, &d, x, y).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn green_of_the_three_by_three_box() {
    let d = Domain::square(3, Bc::Free).unwrap();
    let g = GreenFunction::new(&d).unwrap();
    let c = d.vertex_at(d.center().0, d.center().1).unwrap();
    assert!((g.value(c, c) - 1.0).abs() < 1e-12);
    assert_eq!(g.n_interior(), 1);
}

#[test]
fn green_matches_random_walk_visits() {
    // oracle: simulated walks on the 5 x 5 box, counted until the boundary is hit
    let d = Domain::square(5, Bc::Free).unwrap();
    let g = GreenFunction::new(&d).unwrap();
    let (cx, cy) = d.center();
    let start = d.vertex_at(cx, cy).unwrap();
    let target = d.vertex_at(cx + 1, cy).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let walks = 200_000;
    let (mut s0, mut s0sq, mut s1, mut s1sq) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..walks {
        let (mut x, mut y) = (cx, cy);
        let (mut v0, mut v1) = (0.0, 0.0);
        while !d.is_boundary(d.vertex_at(x, y).unwrap()) {
            let v = d.vertex_at(x, y).unwrap();
            v0 += f64::from(u8::from(v == start));
            v1 += f64::from(u8::from(v == target));
            match rng.gen_range(0..4) {
                0 => x += 1,
                1 => x -= 1,
                2 => y += 1,
                _ => y -= 1,
            }
        }
        s0 += v0;
        s0sq += v0 * v0;
        s1 += v1;
        s1sq += v1 * v1;
    }
    let n = walks as f64;
    for (s, sq, exact) in [(s0, s0sq, g.value(start, start)), (s1, s1sq, g.value(start, target))] {
        let mean = s / n;
        let se = ((sq / n - mean * mean) / n).sqrt();
        assert!((mean - exact).abs() < 3.0 * se, "{mean} vs {exact} (se {se})");
    }
}

#[test]
fn dense_green_is_guarded() {
    let big = Domain::square(70, Bc::Free).unwrap();
    assert!(matches!(GreenFunction::new(&big).unwrap().dense(), Err(Error::ResourceLimit(_))));
    let d = Domain::square(6, Bc::Free).unwrap();
    let m = GreenFunction::new(&d).unwrap().dense().unwrap();
    assert_eq!(m.len(), 36);
}

fn height_stub(d: &Domain, k: i32) -> MasterSample {
    let mut s = stub(d, full(d));
    s.height = Some(HeightField {
        twice_primal: (0..d.n_vertices() as i32).map(|v| 2 * k * (v % 3)).collect(),
        twice_dual: Vec::new(),
    });
    s
}

#[test]
fn zero_height_has_zero_covariance() {
    let d = Domain::square(12, Bc::Plus).unwrap();
    let g = GreenFunction::new(&d).unwrap();
    let f: TestFunction = "bump".parse().unwrap();
    let mut src = vec![(FixedSource::new(d.clone(), height_stub(&d, 0)), 100)];
    let r = height_covariance(&mut src, &g, f, f).unwrap();
    assert_eq!(r.covariance.mean, 0.0);
    assert_eq!(r.variance_f.mean, 0.0);
    assert!(r.target > 0.0);
    assert_eq!(r.ratio.mean, 0.0);
    assert_eq!(r.table().rows.len(), 1);
}

#[test]
fn covariance_needs_samples_with_heights() {
    let d = Domain::square(12, Bc::Plus).unwrap();
    let g = GreenFunction::new(&d).unwrap();
    let f = TestFunction::Constant(1.0);
    let mut few = vec![(FixedSource::new(d.clone(), height_stub(&d, 1)), 10)];
    assert!(matches!(height_covariance(&mut few, &g, f, f), Err(Error::InsufficientData(_))));
    let mut none = fixed(&d, full(&d), 100);
    assert!(matches!(height_covariance(&mut none, &g, f, f), Err(Error::InvalidArgument(_))));
}

#[test]
fn height_covariance_on_a_small_box() {
    let f = TestFunction::Bump {
        center: (0.5, 0.5),
        radius: 0.35,
    };
    let r = height_covariance_check(12, f, f, jc(), &small(400)).unwrap();
    assert!(r.variance_f.mean > 0.0);
    assert!((r.covariance.mean - r.variance_f.mean).abs() < 1e-15);
    assert!((r.correlation - 1.0).abs() < 1e-12);
    assert!(r.ratio.mean > 0.3 && r.ratio.mean < 3.0, "{r:?}");
}

#[test]
fn mc_params_split_samples() {
    let p = McParams {
        samples: 10,
        chains: 3,
        ..McParams::default()
    };
    assert_eq!((0..3).map(|c| p.samples_of_chain(c)).collect::<Vec<_>>(), [4, 3, 3]);
    assert!(McParams { chains: 0, ..p.clone() }.validate().is_err());
    assert_eq!(p.reseeded(9).seed, 9);
}

#[test]
fn chain_sources_are_reproducible() {
    let ctx = SamplerContext::new(Domain::square(8, Bc::Plus).unwrap(), jc(), Construction::Current).unwrap();
    let run = || gather_chains(&ctx, &small(6), |s, _| Ok(s.omega.to_hex())).unwrap();
    assert_eq!(run(), run());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn box_masses_partition_total(w in 2usize..12, h in 2usize..12, seed in any::<u64>(), k in 0usize..4) {
        let d = Domain::rect(w, h, Bc::Free).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bools: Vec<bool> = (0..d.n_edges()).map(|_| rng.gen_bool(0.5)).collect();
        let c = BondConfig::from_bools(GraphTag::Primal, &bools);
        for m in area_measures(&c, &d, k, &[1.0, 0.5, 0.25, 0.125]).unwrap() {
            let sum: f64 = m.box_masses.values().sum();
            prop_assert!((sum - m.total_mass).abs() < 1e-9);
        }
        let total: f64 = area_measures(&c, &d, usize::MAX - 1, &[1.0]).unwrap().iter().map(|m| m.total_mass).sum();
        prop_assert!((total - d.n_vertices() as f64 * mesh(&d).powf(AREA_EXPONENT)).abs() < 1e-9);
    }

    #[test]
    fn fit_recovers_any_exponent(slope in -2.0f64..2.0, c in 0.1f64..10.0) {
        let pts: Vec<(f64, f64)> = (1..6).map(|i| { let x = f64::from(1u32 << i); (x, c * x.powf(slope)) }).collect();
        let fit = ExponentFit::fit(&pts).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-9);
    }

    #[test]
    fn green_is_positive_and_symmetric(w in 3usize..9, h in 3usize..9, a in any::<u16>(), b in any::<u16>()) {
        let d = Domain::rect(w, h, Bc::Free).unwrap();
        let g = GreenFunction::new(&d).unwrap();
        let (x, y) = (a as usize % d.n_vertices(), b as usize % d.n_vertices());
        prop_assert!((g.value(x, y) - g.value(y, x)).abs() < 1e-10);
        if g.is_interior(x) && g.is_interior(y) {
            prop_assert!(g.value(x, y) > 0.0);
            prop_assert!(g.value(x, x) >= g.value(x, y) - 1e-12);
        }
    }
}
