//! Closed forms against quadrature, finite differences and straight-line
//! re-evaluations of the bound formulas.

use std::f64::consts::PI;

use gaussreg_core::bounds::PatternConstants;
use gaussreg_core::{
    atom_inner_product, correlation_bound, delta_t, gaussian_bound, generic_bound,
    pattern_distance, random_pattern, trial_rng, uncorrelated_bound, Atom, Atom32, DistanceProfile,
    NoiseSpec, Pattern, Pattern32, RandomPatternSpec, Translation, Vec2,
};
use gaussreg_oracles::{central_difference, integrate_2d, second_difference, QuadOptions};

fn unit_at(x: f64, y: f64) -> Atom {
    Atom::isotropic(1.0, Vec2::new(x, y), 1.0).unwrap()
}

fn random(seed: u64, n_atoms: usize) -> Pattern {
    let spec = RandomPatternSpec {
        n_atoms,
        ..RandomPatternSpec::default()
    };
    random_pattern(&spec, &mut trial_rng(seed, 0)).unwrap()
}

/// Box outside of which every atom of `p` is below `e^{-49}`.
fn support(p: &Pattern) -> ((f64, f64), (f64, f64)) {
    let mut x = (f64::INFINITY, f64::NEG_INFINITY);
    let mut y = x;
    for a in p.atoms() {
        let r = 7.0 * a.sigma().x.max(a.sigma().y);
        x = (x.0.min(a.tau.x - r), x.1.max(a.tau.x + r));
        y = (y.0.min(a.tau.y - r), y.1.max(a.tau.y + r));
    }
    (x, y)
}

fn opts(rel_tol: f64) -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-14,
        rel_tol,
        initial_panels: 32,
        max_panels: 8000,
    }
}

#[test]
fn offset_unit_atoms_match_quadrature() {
    let (a, b) = (unit_at(0.0, 0.0), unit_at(2.0, 0.0));
    let q = integrate_2d(
        |x, y| a.value_at(Vec2::new(x, y)) * b.value_at(Vec2::new(x, y)),
        (-10.0, 10.0),
        (-10.0, 10.0),
        opts(1e-12),
    );
    let closed = atom_inner_product(&a, &b);
    assert!((closed - q).abs() <= 1e-10 * q);
    assert!((closed - PI / 2.0 * (-2.0f64).exp()).abs() < 1e-15);
}

#[test]
fn random_pattern_inner_products_match_quadrature() {
    for seed in 0..3 {
        let (p, q) = (random(seed, 5), random(100 + seed, 5));
        let (px, py) = support(&p);
        let (qx, qy) = support(&q);
        let x = (px.0.max(qx.0), px.1.min(qx.1));
        let y = (py.0.max(qy.0), py.1.min(qy.1));
        let oracle = integrate_2d(
            |x, y| p.value_at(Vec2::new(x, y)) * q.value_at(Vec2::new(x, y)),
            x,
            y,
            opts(1e-11),
        );
        let scale = p.norm() * q.norm();
        assert!(
            (p.inner_product(&q) - oracle).abs() <= 1e-8 * oracle.abs().max(1e-3 * scale),
            "seed {seed}"
        );
    }
}

#[test]
fn random_pattern_norm_matches_quadrature() {
    let p = random(7, 20);
    let (x, y) = support(&p);
    let oracle = integrate_2d(|x, y| p.value_at(Vec2::new(x, y)).powi(2), x, y, opts(1e-9));
    assert!((p.norm().powi(2) - oracle).abs() <= 1e-6 * oracle);
}

#[test]
fn derivatives_match_finite_differences_of_the_distance() {
    for seed in 0..5 {
        let p = random(seed, 20);
        let mut rng = trial_rng(seed, 1);
        let dir = Vec2::from_angle(rand::Rng::gen_range(&mut rng, 0.0..2.0 * PI));
        let t = rand::Rng::gen_range(&mut rng, 0.3..3.0);
        let f = |s: f64| pattern_distance(&p, &p, Translation::new(s, dir).unwrap());
        let prof = DistanceProfile::new(&p, dir).unwrap();
        let d1 = central_difference(f, t, 1e-5);
        assert!(
            (prof.derivative(t) - d1).abs() <= 1e-5 * d1.abs(),
            "seed {seed}"
        );
        let d2 = second_difference(f, t, 1e-3);
        assert!(
            (prof.second_derivative(t) - d2).abs() <= 1e-4 * d2.abs(),
            "seed {seed}"
        );
    }
}

#[test]
fn distance_saturates_at_twice_the_energy() {
    let p = random(3, 20);
    let far = 50.0 * 6.0;
    let f = pattern_distance(
        &p,
        &p,
        Translation::new(far, Vec2::from_angle(0.4)).unwrap(),
    );
    let e = p.inner_product(&p);
    assert!((f - 2.0 * e).abs() <= 1e-6 * 2.0 * e);
}

#[test]
fn single_precision_tracks_double() {
    let p = random(11, 10);
    let p32 = Pattern32::new(
        p.atoms()
            .iter()
            .map(|a| {
                let s = a.sigma();
                Atom32::new(
                    a.coeff as f32,
                    a.psi() as f32,
                    Vec2::new(a.tau.x as f32, a.tau.y as f32),
                    Vec2::new(s.x as f32, s.y as f32),
                )
                .unwrap()
            })
            .collect(),
    )
    .unwrap();
    let e64 = p.inner_product(&p);
    let e32 = p32.inner_product(&p32) as f64;
    assert!((e64 - e32).abs() <= 1e-4 * e64);
    let dir = Vec2::new(0.6, 0.8);
    let d64 = delta_t(&p, dir).unwrap();
    let d32 = delta_t(&p32, Vec2::new(0.6f32, 0.8)).unwrap() as f64;
    assert!((d64 - d32).abs() <= 1e-3 * d64);
}

#[test]
fn gaussian_bound_matches_the_formulas() {
    let p = Pattern::new(vec![unit_at(0.0, 0.0)]).unwrap();
    let (s, eta) = (2.0, 1e-3);
    let spec = NoiseSpec::gaussian(750, 0.1, eta, 4.0).unwrap();
    let r = gaussian_bound(&p, &spec, s, false).unwrap();
    let (t2, r0) = (r.tbar0 * r.tbar0, r.r0_lb);
    let (c_dh, c_h2) = (r.c_var_dh.sqrt(), r.c_var_h2.sqrt());
    let eta0 = t2 * r0 / (2.0 * s * c_dh + t2 * s * c_h2);
    assert!((r.eta0 - eta0).abs() <= 1e-12 * eta0);
    let rt0 = (2.0 * s * eta * c_dh / (r0 - s * eta * c_h2)).sqrt();
    assert!((r.rt0.unwrap() - rt0).abs() <= 1e-12 * rt0);
    assert!((r.mu_h - PI / 2.0 * 750.0 * eta * eta * 0.01).abs() < 1e-15);

    let two = gaussian_bound(&p, &spec, s, true).unwrap();
    assert!((two.eta0 - eta0 / 2f64.sqrt()).abs() <= 1e-12 * eta0);
    let rt0_two = (2.0 * 2f64.sqrt() * s * eta * c_dh / (r0 - 2f64.sqrt() * s * eta * c_h2)).sqrt();
    assert!((two.rt0.unwrap() - rt0_two).abs() <= 1e-12 * rt0_two);

    let zero = gaussian_bound(&p, &spec.with_eta(0.0), s, false).unwrap();
    assert_eq!(zero.rt0, Some(0.0));
    let above = gaussian_bound(&p, &spec.with_eta(2.0 * eta0), s, false).unwrap();
    assert!(above.rt0.is_none());
}

#[test]
fn generic_bounds_match_the_formulas() {
    let p = random(5, 20);
    let c = PatternConstants::new(&p).unwrap();
    let (t2, r0) = (c.tbar0 * c.tbar0, c.second.r0);
    let nu0 = t2 * r0 / (8.0 * c.rp + 2.0 * c.rp2 * t2);
    let one = generic_bound(&p, 0.5 * nu0, false).unwrap();
    assert!((one.nu0 - nu0).abs() <= 1e-12 * nu0);
    let nu = 0.5 * nu0;
    let ru0 = (8.0 * c.rp * nu / (r0 - 2.0 * c.rp2 * nu)).sqrt();
    assert!((one.ru0.unwrap() - ru0).abs() <= 1e-12 * ru0);
    let two = generic_bound(&p, nu, true).unwrap();
    assert!((two.nu0 - nu0 / 2.0).abs() <= 1e-12 * nu0);
    let ru0_two = (16.0 * c.rp * nu / (r0 - 4.0 * c.rp2 * nu)).sqrt();
    assert!((two.ru0.unwrap() - ru0_two).abs() <= 1e-12 * ru0_two);
    assert_eq!(generic_bound(&p, 0.0, false).unwrap().ru0, Some(0.0));

    let u = c.uncorrelated(0.0, nu).unwrap();
    assert_eq!(u.qu0, Some(0.0));
    assert!((u.nu0 - r0 / (2.0 * c.rp2)).abs() <= 1e-12 * u.nu0);
}

#[test]
fn correlation_bound_of_a_unit_atom_matches_a_dense_grid() {
    let p = Pattern::new(vec![unit_at(0.0, 0.0)]).unwrap();
    let z = Pattern::new(vec![Atom::new(
        -0.6,
        0.4,
        Vec2::new(1.5, -0.5),
        Vec2::new(0.5, 1.2),
    )
    .unwrap()])
    .unwrap();
    let bound = correlation_bound(&p, &z, 4.0).unwrap();
    let mut best: f64 = 0.0;
    for i in -200..=200 {
        for j in -200..=200 {
            let u = Vec2::new(i as f64 * 0.02, j as f64 * 0.02);
            if u.norm() <= 4.0 {
                best = best.max(p.translate(-u).inner_product(&z).abs());
            }
        }
    }
    assert!(bound >= best && bound <= 1.021 * best, "{bound} vs {best}");

    let self_bound = correlation_bound(&p, &p, 4.0).unwrap();
    assert!(self_bound >= p.inner_product(&p));

    let far = Pattern::new(vec![
        Atom::isotropic(1.0, Vec2::new(30.0, 0.0), 1.0).unwrap()
    ])
    .unwrap();
    assert!(correlation_bound(&p, &far, 4.0).unwrap() < 1e-6 * p.norm() * far.norm());
    assert_eq!(correlation_bound(&p, &far.scaled(0.0), 4.0).unwrap(), 0.0);
}

#[test]
fn uncorrelated_noise_loosens_the_admissible_level() {
    let p = random(21, 20);
    let z = gaussreg_core::make_generic_noise(
        &p,
        gaussreg_core::GenericNoiseMode::RandomAtoms,
        10,
        1e-3,
        3,
    )
    .unwrap();
    let generic = generic_bound(&p, 1e-3, false).unwrap();
    let unc = uncorrelated_bound(&p, &z, 1e-3).unwrap();
    assert!(unc.nu0 > generic.nu0);
    assert!(unc.qu0.unwrap() <= generic.ru0.unwrap());
}
