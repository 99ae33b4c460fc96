use std::f64::consts::TAU;

use zerohopf::averaging::{eig2, predict_cycle_seed};
use zerohopf::dynamics::{symmetry_image, Integrator, Mode, State, SystemParams};
use zerohopf::limitcycle::{
    cycle_orbit, floquet, poincare_return, refine_cycle, CycleResult, Verdict, SHOOTING_TOL,
};

fn desk(eps: f64) -> SystemParams {
    SystemParams::perturbed(2.5, 9.0, eps, 2.0)
}

fn seed_point(p: &SystemParams) -> [f64; 2] {
    let s = predict_cycle_seed(p).unwrap().state;
    [s.x, s.z]
}

fn refine(p: &SystemParams) -> CycleResult {
    refine_cycle(seed_point(p), p, SHOOTING_TOL).unwrap()
}

fn gap(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[test]
fn seed_lies_on_the_section_moving_down() {
    let p = desk(1e-3);
    let s = predict_cycle_seed(&p).unwrap().state;
    assert!(s.x > 0.0);
    assert_eq!(s.y, 0.0);
    let dy = zerohopf::dynamics::rhs(&s, &p, Mode::Full)[1];
    assert!((dy + 2.5 * s.x).abs() < 1e-15);
}

#[test]
fn desk_scale_cycle() {
    let p = desk(1e-3);
    let c = refine(&p);
    assert!(c.converged);
    assert!(c.residual <= 1e-10 * c.section_point[0].hypot(c.section_point[1]).max(1.0));
    let ret = poincare_return(c.section_point, &p, SHOOTING_TOL).unwrap();
    assert!(gap(ret.point, c.section_point) <= 1e-9);
    let predicted = 1e-3 * 4.0 * 2.0 * 2.5f64.sqrt() / std::f64::consts::PI;
    assert!((c.section_point[0] - predicted).abs() <= 0.05 * predicted);
    let period = TAU / 2.5f64.sqrt();
    assert!((c.period - period).abs() <= 0.01 * period);
}

#[test]
fn period_tracks_the_linear_center() {
    let period = TAU / 2.5f64.sqrt();
    for eps in [5e-4, 1e-3, 2e-3, 4e-3] {
        let c = refine(&desk(eps));
        assert!((c.period - period).abs() <= 10.0 * eps, "eps {eps}: {}", c.period);
    }
}

#[test]
fn seed_defect_shrinks_at_least_quadratically() {
    let defect = |eps: f64| {
        let p = desk(eps);
        let q = seed_point(&p);
        gap(poincare_return(q, &p, SHOOTING_TOL).unwrap().point, q)
    };
    let mut prev = defect(4e-3);
    for eps in [2e-3, 1e-3, 5e-4] {
        let d = defect(eps);
        let ratio = prev / d;
        assert!(ratio >= 4.0, "eps {eps}: ratio {ratio}");
        prev = d;
    }
}

#[test]
fn multipliers_near_one_and_conjugate() {
    let eps = 1e-3;
    let p = desk(eps);
    let c = refine(&p);
    assert_eq!(c.multipliers, eig2(&c.jacobian));
    assert_eq!(c.multipliers[0], c.multipliers[1].conj());
    for m in c.multipliers {
        assert!((m - 1.0).norm() <= 10.0 * eps, "{m}");
    }
    let report = floquet(&c, &p).unwrap();
    assert_eq!(report.claimed, "unstable");
    assert_eq!(report.agrees_with_claim, report.verdict == Verdict::Unstable);
    assert_eq!(report.tol_f, 10.0 * eps * eps);
}

#[test]
fn symmetric_data_refines_to_the_same_orbit() {
    let p = desk(1e-3);
    let c = refine(&p);
    // follow the cycle to its crossing with x < 0 and mirror it onto the section
    let start = State::new(c.section_point[0], 0.0, c.section_point[1]);
    let mut integ = Integrator::new(&start, &p, Mode::Full, SHOOTING_TOL).unwrap();
    let opposite = loop {
        let step = integ.step(c.period).unwrap();
        if let Some(x) = step.crossing.filter(|x| x.direction > 0) {
            break x.state;
        }
    };
    assert!(opposite.x < 0.0);
    let mirrored = symmetry_image(&opposite);
    let d = refine_cycle([mirrored.x, mirrored.z], &p, SHOOTING_TOL).unwrap();
    assert!(gap(c.section_point, d.section_point) <= 1e-9);
    assert!((c.period - d.period).abs() <= 1e-8);
}

#[test]
fn exported_orbit_closes() {
    let p = desk(1e-3);
    let c = refine(&p);
    let orbit = cycle_orbit(&c, &p, SHOOTING_TOL).unwrap();
    let first = orbit.samples[0];
    let last = orbit.last();
    assert!((last.t - c.period).abs() < 1e-12);
    assert!((last.x - first.x).hypot(last.z - first.z) <= 1e-9);
    assert!(last.y.abs() <= 1e-9);
    let mut csv = Vec::new();
    orbit.write_csv(&mut csv).unwrap();
    assert!(String::from_utf8(csv).unwrap().starts_with("t,x,y,z\n"));
}
