use mfe::env::{CompliantCube, ContactLaw, CupParams, GranularCup};
use mfe::mapping::{pressure_duty, MappingConfig};
use proptest::prelude::*;

proptest! {
    #[test]
    fn stiffer_cube_renders_more_duty(
        k_soft in 50.0f64..5000.0,
        fs in 1.471f64..2.46,
        frac in 0.01f64..1.0,
    ) {
        let cfg = MappingConfig::default();
        // Choose a penetration putting both forces inside the unclipped band.
        let fk = fs + frac * (2.469 - fs);
        let p = fs / k_soft;
        let soft = CompliantCube { stiffness: k_soft, thickness: 1.0 };
        let stiff = CompliantCube { stiffness: k_soft * fk / fs, ..soft };
        prop_assert!(stiff.stiffness > soft.stiffness);
        let (fs, fk) = (soft.contact_force(p), stiff.contact_force(p));
        prop_assert!(pressure_duty(fk, &cfg).unwrap() > pressure_duty(fs, &cfg).unwrap());
        prop_assert!(pressure_duty(fk, &cfg).unwrap() < 1.0);
    }

    #[test]
    fn cube_force_is_monotone(k in 1.0f64..1e5, a in 0.0f64..0.1, b in 0.0f64..0.1) {
        let cube = CompliantCube { stiffness: k, thickness: 0.06 };
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(cube.contact_force(lo) <= cube.contact_force(hi));
    }

    #[test]
    fn spill_only_grows_and_drop_latches(
        grips in prop::collection::vec((0.0f64..10.0, 0.0f64..15.0), 1..400),
    ) {
        let mut cup = GranularCup::lifted(CupParams::default());
        let mut last = 0.0;
        let mut was_dropped = false;
        for (grip, tilt) in grips {
            cup.cup_step(grip, tilt, 1e-3);
            prop_assert!(cup.spilled() >= last);
            prop_assert!(cup.spilled() <= cup.params.fill_mass);
            prop_assert!(!was_dropped || cup.dropped());
            last = cup.spilled();
            was_dropped = cup.dropped();
        }
    }
}
