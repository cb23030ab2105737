use mfe::mapping::{
    force_to_current, palm_setpoint, pressure_duty, Mapper, MappingConfig, MappingError,
    SensorFrame, PALM_SENSORS,
};
use mfe::plants::{PidController, PidGains};
use proptest::prelude::*;

fn cfg() -> MappingConfig {
    MappingConfig::default()
}

#[test]
fn calibration_points() {
    let c = cfg();
    assert_eq!(force_to_current(6000.0, &c).unwrap(), 1750.0);
    assert_eq!(force_to_current(1.47, &c).unwrap(), 0.0);
    assert_eq!(pressure_duty(1.47, &c).unwrap(), 0.0);
    assert_eq!(pressure_duty(2.47, &c).unwrap(), 1.0);
    assert!((pressure_duty(1.97, &c).unwrap() - 0.5).abs() < 1e-12);
    assert!(matches!(
        force_to_current(-0.1, &c),
        Err(MappingError::NegativeForce(_))
    ));
}

#[test]
fn nan_palm_sensor_is_a_fault() {
    let mut frame = SensorFrame::uniform([0.0; 5], 30.0, 0.0);
    frame.palm_temps[13] = f64::NAN;
    assert!(matches!(
        palm_setpoint(&frame, &cfg()),
        Err(MappingError::SensorFault { index: 13, .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn current_matches_piecewise_oracle(f in 0.0f64..10_000.0) {
        let c = cfg();
        let expected = if f <= 1.47 { 0.0 } else { (f * 1750.0 / 6000.0).min(1750.0) };
        let got = force_to_current(f, &c).unwrap();
        prop_assert!((got - expected).abs() <= 1e-9 * expected.max(1.0));
        prop_assert!((0.0..=c.current_limit).contains(&got));
    }

    #[test]
    fn current_and_duty_are_monotone(a in 0.0f64..50.0, b in 0.0f64..50.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let c = cfg();
        prop_assert!(force_to_current(lo, &c).unwrap() <= force_to_current(hi, &c).unwrap());
        prop_assert!(pressure_duty(lo, &c).unwrap() <= pressure_duty(hi, &c).unwrap());
    }

    #[test]
    fn duty_dead_zone_and_clip(f in 0.0f64..100.0, k in 1.0f64..5000.0) {
        let c = MappingConfig { pressure_gain: k, ..cfg() };
        let d = pressure_duty(f, &c).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        if f <= c.force_threshold {
            prop_assert_eq!(d, 0.0);
        }
    }

    #[test]
    fn setpoint_is_clamped_mean_of_centre(temps in prop::collection::vec(-40.0f64..120.0, PALM_SENSORS)) {
        let c = cfg();
        let mut frame = SensorFrame::uniform([0.0; 5], 0.0, 0.0);
        frame.palm_temps.copy_from_slice(&temps);
        let centre = [3, 4, 5, 12, 13, 14, 21, 22, 23];
        let mean = centre.iter().map(|&i| temps[i]).sum::<f64>() / 9.0;
        let got = palm_setpoint(&frame, &c).unwrap();
        prop_assert!((got - mean.clamp(10.0, 55.0)).abs() < 1e-9);
        prop_assert!((10.0..=55.0).contains(&got));
    }

    #[test]
    fn mapper_sequence_increments(n in 1usize..50) {
        let mut m = Mapper::new(cfg()).unwrap();
        let frame = SensorFrame::uniform([2.0; 5], 30.0, 0.0);
        for i in 1..=n {
            prop_assert_eq!(m.compute_command(&frame).unwrap().sequence, i as u32);
        }
    }

    #[test]
    fn pid_output_never_leaves_limit(
        errors in prop::collection::vec(-200.0f64..200.0, 1..500),
        dt in 1e-4f64..0.1,
    ) {
        let mut pid = PidController::new(PidGains { kp: 1.0, ki: 0.2, kd: 0.0 }, 5.0, 50.0);
        for e in errors {
            let u = pid.step(e, 0.0, dt);
            prop_assert!(u.abs() <= 5.0 + 1e-12);
            prop_assert!(pid.integral().abs() <= 50.0 + 1e-12);
        }
    }
}
