use bihermitian_core::curvature::{ac_report, ricci_closed_form};
use bihermitian_core::families::{cp2_family, genus_family, FamilySpec};
use bihermitian_core::ode::{half_length, synthesize_profile, ProfileGrid};
use bihermitian_core::oracle::{closed_form_quad, relative_mismatch, ricci_fd, ChartKind, ChartPoint, Geometry, TrigProfile, TrigSeries, DEFAULT_STEP};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn families() -> Vec<FamilySpec> {
    let mut out: Vec<FamilySpec> = [(1, 1, 0.3), (2, 1, 0.5), (2, 3, 0.8)]
        .iter()
        .map(|&(g, k, x)| genus_family(g, k, x).unwrap())
        .collect();
    out.extend([(0.0, 1), (0.5, 1), (0.9, 1), (1.5, -1), (3.0, -1)].iter().map(|&(x, l)| cp2_family(x, l).unwrap()));
    out
}

fn max_fd_error(grid: &ProfileGrid, of: &[f64], against: &[f64]) -> f64 {
    let dt = grid.spacing();
    (1..grid.len() - 1)
        .map(|i| ((of[i + 1] - of[i - 1]) / (2.0 * dt) - against[i]).abs())
        .fold(0.0, f64::max)
}

#[test]
fn grid_derivatives_converge_at_second_order() {
    for spec in families() {
        let coarse = synthesize_profile(&spec, 512).unwrap();
        let fine = synthesize_profile(&spec, 1024).unwrap();
        for (name, pick) in [("H/F", 0usize), ("F/dF", 1)] {
            let err = |g: &ProfileGrid| match pick {
                0 => max_fd_error(g, &g.h, &g.f),
                _ => max_fd_error(g, &g.f, &g.df),
            };
            let (ec, ef) = (err(&coarse), err(&fine));
            let ratio = ec / ef;
            assert!(ef < 1e-3, "{name} for x = {}: {ef:e}", spec.x);
            assert!(ratio > 3.5 && ratio < 4.5, "{name} for x = {}: ratio {ratio}", spec.x);
        }
    }
}

#[test]
fn genus_profiles_are_symmetric_and_nondegenerate() {
    for spec in families().into_iter().filter(|s| s.genus > 0) {
        let g = synthesize_profile(&spec, 256).unwrap();
        let n = g.len();
        for i in 0..n {
            let j = n - 1 - i;
            assert!((g.h[i] + g.h[j]).abs() < 1e-9);
            assert!((g.g[i] - g.g[j]).abs() < 1e-9);
            assert!(g.g[i] > 0.0);
        }
    }
}

#[test]
fn cp2_base_radius_vanishes_only_at_the_nut() {
    for spec in families().into_iter().filter(|s| s.genus == 0) {
        let g = synthesize_profile(&spec, 256).unwrap();
        let n = g.len();
        let nut = if spec.cp2_label() == 1 { n - 1 } else { 0 };
        for i in 0..n {
            if i == nut {
                assert!(g.g[i].abs() < 1e-7, "G at nut = {}", g.g[i]);
            } else {
                assert!(g.g[i] > 0.0);
            }
        }
    }
}

#[test]
fn half_length_converges_under_refinement() {
    for spec in families() {
        let l = half_length(&spec).unwrap();
        let (a, b) = (synthesize_profile(&spec, 1024).unwrap(), synthesize_profile(&spec, 2048).unwrap());
        let (la, lb) = (0.5 * (a.b - a.a), 0.5 * (b.b - b.a));
        assert!((la - lb).abs() < 1e-10 && (la - l).abs() < 1e-10, "{la} {lb} {l}");
    }
}

#[test]
fn tau_varies_on_every_family() {
    for spec in families() {
        let rep = ac_report(&synthesize_profile(&spec, 1024).unwrap(), 1e-6);
        assert!(rep.tau_nonconstant, "x = {}: {:?}", spec.x, rep.tau_range);
    }
}

fn random_profile(seed: u64) -> TrigProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TrigProfile { f: TrigSeries::random(&mut rng, 3), g: TrigSeries::random(&mut rng, 3) }
}

proptest! {
    #[test]
    fn homothety_divides_spectrum(seed in any::<u64>(), t in -1.0f64..1.0, s in 0.0f64..2.0, k in prop::sample::select(vec![-4.0, 0.0, 4.0]), c in 0.3f64..3.0) {
        let p = random_profile(seed);
        let [f, df, ddf] = p.f.jet(t);
        let [g, dg, ddg] = p.g.jet(t);
        let base = ricci_closed_form(f, df, ddf, g, dg, ddg, s, k).unwrap();
        let scaled = ricci_closed_form(c * f, df, ddf / c, c * g, dg, ddg / c, s, k).unwrap();
        for (a, b) in [(base.lambda0, scaled.lambda0), (base.lambda1, scaled.lambda1), (base.lambda2, scaled.lambda2), (base.tau, scaled.tau)] {
            prop_assert!((a / (c * c) - b).abs() < 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn oracle_matches_closed_form(seed in any::<u64>(), t in -1.0f64..1.0, s in prop::sample::select(vec![0.0, 1.0, 2.0]),
                                  k in prop::sample::select(vec![-4.0, 0.0, 4.0]), u in 0.1f64..0.8, v in 0.1f64..0.8, w in -1.0f64..1.0) {
        let p = random_profile(seed);
        for r in [p.f.jet(t)[0], p.g.jet(t)[0]] {
            prop_assert!((0.5..=2.0).contains(&r), "radius {}", r);
        }
        let chart = ChartKind::for_curvature(k).unwrap();
        let geom = Geometry { s, curvature: k };
        let point = ChartPoint { t, u, v, w, chart };
        let fd = ricci_fd(geom, &p, &point, DEFAULT_STEP).unwrap();
        prop_assert!(fd.asymmetry < 1e-8, "asymmetry {}", fd.asymmetry);
        let closed = closed_form_quad(geom, &p, t).unwrap();
        let err = relative_mismatch(&fd.eigenvalues, &closed);
        prop_assert!(err < 1e-5, "{:?} vs {:?}", fd.eigenvalues, closed);
    }
}
