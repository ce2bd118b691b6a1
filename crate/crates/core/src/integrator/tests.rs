use nalgebra::{dmatrix, dvector, DMatrix, DVector};
use proptest::prelude::*;

use super::*;
use crate::profile::StepTable;
use crate::system::{DelayTerm, ImpulseSchedule};

fn ctl(dt: f64) -> StepControl {
    StepControl::new(dt).unwrap()
}

fn scalar(spec: &Trajectory, t: f64) -> f64 {
    spec.evaluate(t).unwrap()[0]
}

#[test]
fn rejects_bad_step() {
    assert!(matches!(StepControl::new(0.0), Err(Error::StepSize(_))));
    assert!(matches!(
        StepControl::new(f64::NAN),
        Err(Error::StepSize(_))
    ));
}

#[test]
fn pure_ode_matches_exponential() {
    let spec = SystemSpec::new(1, 1.0)
        .with_term(DelayTerm::scalar_lag(1.0, 0.0))
        .with_x0(dvector![1.0]);
    let traj = solve(&spec, &ctl(1e-3)).unwrap();
    assert!((scalar(&traj, 1.0) - (-1.0f64).exp()).abs() < 1e-8);
    assert!((scalar(&traj, 0.3337) - (-0.3337f64).exp()).abs() < 1e-8);
}

#[test]
fn frozen_feedback_cancels_current_term() {
    // x' + x(t) - x(0) = 0 with x(0) = 1 keeps x = 1
    let spec = SystemSpec::new(1, 10.0)
        .with_term(DelayTerm::scalar_lag(1.0, 0.0))
        .with_term(DelayTerm::scalar_frozen(-1.0, 0.0))
        .with_x0(dvector![1.0]);
    let traj = solve(&spec, &ctl(1e-3)).unwrap();
    for k in 0..=100 {
        let t = 0.1 * k as f64;
        assert!((scalar(&traj, t) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn delayed_growth_with_sign_flips() {
    // x' = a x(t-1), x = 0 before 0, x(0) = 1, x(j) = -x(j-0).
    // [0,1): x = 1; [1,2): x = -(1 + a) + ... worked out piecewise below.
    let a = 0.7;
    let spec = SystemSpec::new(1, 3.0)
        .with_term(DelayTerm::scalar_lag(-a, 1.0))
        .with_impulses(ImpulseSchedule::periodic(1.0, dmatrix![-1.0]));
    let spec = spec.with_x0(dvector![1.0]);
    let traj = solve(&spec, &ctl(1e-3)).unwrap();
    // on [0,1) the delayed term reads zero history
    assert!((scalar(&traj, 0.5) - 1.0).abs() < 1e-12);
    // at 1: left value 1, right value -1; on [1,2): x = -1 + a (t - 1)
    assert!((traj.left_limit(1.0).unwrap()[0] - 1.0).abs() < 1e-12);
    assert!((scalar(&traj, 1.0) + 1.0).abs() < 1e-12);
    for &t in &[1.25, 1.5, 1.99] {
        assert!((scalar(&traj, t) - (-1.0 + a * (t - 1.0))).abs() < 1e-10);
    }
    // at 2: right value = 1 - a; on [2,3): x' = a(-1 + a(t-2))
    let left2 = -1.0 + a;
    assert!((traj.left_limit(2.0).unwrap()[0] - left2).abs() < 1e-10);
    for &t in &[2.0, 2.4, 2.9] {
        let u = t - 2.0;
        let exact = -left2 - a * u + 0.5 * a * a * u * u;
        assert!((scalar(&traj, t) - exact).abs() < 1e-10, "t = {t}");
    }
    assert_eq!(traj.breakpoints(), vec![1.0, 2.0, 3.0]);
}

#[test]
fn negative_times_read_initial_function() {
    let phi = Profile::Table(
        StepTable::new(vec![-2.0, -1.0], vec![dvector![3.0], dvector![4.0]]).unwrap(),
    );
    let spec = SystemSpec::new(1, 2.0)
        .with_term(DelayTerm::scalar_lag(1.0, 2.0))
        .with_phi(phi)
        .with_x0(dvector![1.0]);
    let traj = solve(&spec, &ctl(1e-2)).unwrap();
    assert_eq!(evaluate(&traj, &spec, -1.5).unwrap()[0], 3.0);
    assert_eq!(evaluate(&traj, &spec, -0.5).unwrap()[0], 4.0);
    assert_eq!(evaluate(&traj, &spec, 0.0).unwrap()[0], 1.0);
    // x' = -phi(t-2): -3 on [0,1), -4 on [1,2)
    assert!((scalar(&traj, 1.0) - (1.0 - 3.0)).abs() < 1e-12);
    assert!((scalar(&traj, 2.0) - (1.0 - 3.0 - 4.0)).abs() < 1e-12);
    assert!(matches!(traj.evaluate(2.5), Err(Error::Domain(_))));
}

#[test]
fn singular_jump_restarts_from_offset() {
    let spec = SystemSpec::new(2, 2.0)
        .with_term(DelayTerm::lag(dmatrix![0.5, 0.1; 0.0, 1.0], 0.0))
        .with_impulses(ImpulseSchedule::Explicit(vec![crate::system::Impulse {
            time: 1.0,
            matrix: DMatrix::zeros(2, 2),
            offset: dvector![2.0, -1.0],
        }]))
        .with_x0(dvector![1.0, 1.0]);
    let traj = solve(&spec, &ctl(1e-3)).unwrap();
    let jumps = traj.jumps();
    assert_eq!(jumps.len(), 1);
    assert_eq!(jumps[0].right, dvector![2.0, -1.0]);
    assert!(jumps[0].left.norm() > 0.0);
    let restarted = SystemSpec::new(2, 1.0)
        .with_term(DelayTerm::lag(dmatrix![0.5, 0.1; 0.0, 1.0], 0.0))
        .with_x0(dvector![2.0, -1.0]);
    let rest = solve(&restarted, &ctl(1e-3)).unwrap();
    for &u in &[0.1, 0.5, 1.0] {
        let d = traj.evaluate(1.0 + u).unwrap() - rest.evaluate(u).unwrap();
        assert!(d.amax() < 1e-8);
    }
}

#[test]
fn fundamental_of_ode_is_exponential() {
    let a = 0.8;
    let spec = SystemSpec::new(1, 4.0).with_term(DelayTerm::scalar_lag(a, 0.0));
    let x = fundamental_matrix(&spec, 1.5, &ctl(1e-3)).unwrap();
    assert_eq!(x.at(1.0).unwrap()[(0, 0)], 0.0);
    assert_eq!(x.at(1.5).unwrap()[(0, 0)], 1.0);
    for &t in &[2.0, 3.3, 4.0] {
        assert!((x.at(t).unwrap()[(0, 0)] - (-a * (t - 1.5)).exp()).abs() < 1e-9);
    }
}

#[test]
fn fundamental_picks_up_jumps() {
    // X(2, 0) = 0.5 e^{-2} for x' = -x with a halving at 1
    let spec = SystemSpec::new(1, 3.0)
        .with_term(DelayTerm::scalar_lag(1.0, 0.0))
        .with_impulses(ImpulseSchedule::explicit(&[1.0], vec![dmatrix![0.5]]));
    let x = fundamental_matrix(&spec, 0.0, &ctl(1e-3)).unwrap();
    let v = x.at(2.0).unwrap()[(0, 0)];
    assert!((v - 0.5 * (-2.0f64).exp()).abs() < 1e-8);
    assert!((v - 0.067_667_641_618_306_3).abs() < 1e-8);
    let left = x.left_limit(1.0).unwrap()[(0, 0)];
    assert!((left - (-1.0f64).exp()).abs() < 1e-9);
}

#[test]
fn fundamental_is_curtailed() {
    // With s > 0 the delayed term reads zero before s, so on [s, s+1) X = 1.
    let spec = SystemSpec::new(1, 4.0).with_term(DelayTerm::scalar_lag(1.0, 1.0));
    let x = fundamental_matrix(&spec, 1.0, &ctl(1e-3)).unwrap();
    assert!((x.at(1.7).unwrap()[(0, 0)] - 1.0).abs() < 1e-14);
    // on [2, 3): X = 1 - (t - 2)
    assert!((x.at(2.5).unwrap()[(0, 0)] - 0.5).abs() < 1e-12);
}

#[test]
fn grid_fills_trivial_entries() {
    let spec = SystemSpec::new(2, 3.0).with_term(DelayTerm::lag(DMatrix::identity(2, 2), 0.0));
    let grid = fundamental_grid(&spec, &[0.0, 1.0, 3.0], &[0.5, 1.0, 2.0], &ctl(1e-2)).unwrap();
    assert_eq!(grid.get(0, 1), &DMatrix::<f64>::zeros(2, 2));
    assert_eq!(grid.get(1, 1), &DMatrix::<f64>::identity(2, 2));
    assert_eq!(grid.get(2, 2), &DMatrix::<f64>::zeros(2, 2));
    assert!((grid.get(2, 0)[(0, 0)] - (-2.0f64).exp()).abs() < 1e-9);
    let csv = grid.to_csv();
    assert!(csv.starts_with("t,s,X11,X12,X21,X22\n"));
    assert_eq!(csv.lines().count(), 1 + 9);
    assert!(fundamental_grid(&spec, &[1.0, 0.5], &[1.0], &ctl(1e-2)).is_err());
}

#[test]
fn csv_has_jump_pairs() {
    let spec = SystemSpec::new(1, 2.0)
        .with_impulses(ImpulseSchedule::periodic(1.0, dmatrix![2.0]))
        .with_x0(dvector![1.0]);
    let csv = solve(&spec, &ctl(0.5)).unwrap().to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,x1,is_jump,side");
    assert!(lines.contains(&"1.000000000000e+00,1.000000000000e+00,1,left"));
    assert!(lines.contains(&"1.000000000000e+00,2.000000000000e+00,1,right"));
    assert!(lines.contains(&"2.000000000000e+00,4.000000000000e+00,1,right"));
}

fn test_system() -> SystemSpec {
    SystemSpec::new(2, 3.0)
        .with_term(DelayTerm::lag(dmatrix![0.4, -0.3; 0.2, 0.1], 0.7))
        .with_term(DelayTerm::lag(dmatrix![0.5, 0.0; 0.1, 0.6], 0.0))
        .with_impulses(ImpulseSchedule::periodic(
            0.9,
            dmatrix![0.8, 0.1; -0.2, 0.9],
        ))
        .with_forcing(Profile::Constant(dvector![0.3, -0.1]))
        .with_phi(Profile::Constant(dvector![0.5, 1.0]))
        .with_x0(dvector![1.0, -0.5])
}

#[test]
fn method_is_fourth_order() {
    let spec = test_system();
    let at = |dt: f64| solve(&spec, &ctl(dt)).unwrap().evaluate(3.0).unwrap();
    let reference = at(1e-3);
    let errs: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&dt| (at(dt) - &reference).amax())
        .collect();
    for w in errs.windows(2) {
        assert!(w[0] / w[1] >= 8.0, "errors {errs:?}");
    }
}

#[test]
fn ode_semigroup() {
    // without delays X(t, s) = X(t, u) X(u, s)
    let spec = SystemSpec::new(2, 3.0)
        .with_term(DelayTerm::lag(dmatrix![0.3, -1.0; 1.0, 0.2], 0.0))
        .with_impulses(ImpulseSchedule::explicit(
            &[1.2],
            vec![dmatrix![0.0, 1.0; 2.0, 0.5]],
        ));
    let c = ctl(1e-3);
    let x_ts = fundamental_matrix(&spec, 0.5, &c).unwrap().at(2.5).unwrap();
    let x_us = fundamental_matrix(&spec, 0.5, &c).unwrap().at(1.5).unwrap();
    let x_tu = fundamental_matrix(&spec, 1.5, &c).unwrap().at(2.5).unwrap();
    assert!((x_ts - x_tu * x_us).amax() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn solution_is_linear_in_data(
        c1 in -2.0f64..2.0, c2 in -2.0f64..2.0,
        x0 in proptest::array::uniform2(-1.0f64..1.0),
        f in proptest::array::uniform2(-1.0f64..1.0),
    ) {
        let base = test_system();
        let other = base
            .clone()
            .with_x0(DVector::from_row_slice(&x0))
            .with_forcing(Profile::Constant(DVector::from_row_slice(&f)))
            .with_phi(Profile::Constant(dvector![-0.2, 0.3]));
        let mut combo = base.clone();
        combo.x0 = &base.x0 * c1 + &other.x0 * c2;
        combo.forcing = Profile::Constant(base.forcing.at(0.0) * c1 + other.forcing.at(0.0) * c2);
        combo.phi = Profile::Constant(base.phi.at(-1.0) * c1 + other.phi.at(-1.0) * c2);
        let c = ctl(0.01);
        let y1 = solve(&base, &c).unwrap();
        let y2 = solve(&other, &c).unwrap();
        let y = solve(&combo, &c).unwrap();
        for &t in &[0.4, 1.3, 2.2, 3.0] {
            let expect = y1.evaluate(t).unwrap() * c1 + y2.evaluate(t).unwrap() * c2;
            prop_assert!((y.evaluate(t).unwrap() - expect).amax() < 1e-10);
        }
    }

    #[test]
    fn every_impulse_is_a_node(period in 0.13f64..0.9, dt in 0.01f64..0.2) {
        let spec = test_system().with_impulses(ImpulseSchedule::periodic(period, DMatrix::identity(2, 2) * 0.5));
        let traj = solve(&spec, &ctl(dt)).unwrap();
        let times = spec.impulses.times(spec.horizon);
        prop_assert_eq!(traj.breakpoints().len(), times.len());
        for (b, t) in traj.breakpoints().iter().zip(&times) {
            prop_assert!((b - t).abs() <= snap_tol(*t));
        }
        let nodes = traj.nodes();
        prop_assert!(nodes.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] <= dt.min(0.7) * (1.0 + 1e-9)));
    }
}
