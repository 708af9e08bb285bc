use locomanip::scenario_io::{parse_scenario, Scenario};
use locomanip::units::parse_angle;
use proptest::prelude::*;

fn scenario_text(
    hx: f64,
    hy: f64,
    gx: f64,
    gy: f64,
    gyaw_deg: f64,
    obstacles: &[(f64, f64, f64)],
) -> String {
    let mut t = format!(
        r#"name = "generated"

[object]
half_extents = [{hx}, {hy}]
grasp = {{ kind = "fixed", offset = [-0.3, 0.0, 0.0], height = 0.9 }}

[robot]
half_extents = [0.15, 0.25]
candidates = [[-0.75, 0.0, 0.0]]

[start]
object = [0.0, 0.0, 0.0]
left_foot = [-0.75, 0.1, 0.0]
right_foot = [-0.75, -0.1, 0.0]

[goal]
object = [{gx}, {gy}, "{gyaw_deg}deg"]
"#
    );
    for (x, y, h) in obstacles {
        t.push_str(&format!(
            "\n[[obstacles]]\ncenter = [{x}, {y}, 0.0]\nhalf_extents = [{h}, {h}]\n"
        ));
    }
    t
}

proptest! {
    #[test]
    fn degree_and_radian_forms_agree(deg in -720.0..720.0f64) {
        let rad = deg.to_radians();
        let a = parse_angle(&format!("{deg}deg")).unwrap();
        prop_assert!((a - rad).abs() <= 1e-12 * rad.abs().max(1.0));
        prop_assert_eq!(parse_angle(&format!("{rad} rad")).unwrap(), rad);
        prop_assert_eq!(parse_angle(&format!("{rad}")).unwrap(), rad);
    }

    #[test]
    fn generated_scenarios_parse_and_round_trip(
        hx in 0.05..2.0f64, hy in 0.05..2.0f64,
        gx in -10.0..10.0f64, gy in -10.0..10.0f64, gyaw in -180.0..180.0f64,
        obstacles in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64, 0.05..1.0f64), 0..4),
    ) {
        let s = parse_scenario(&scenario_text(hx, hy, gx, gy, gyaw, &obstacles)).unwrap();
        prop_assert_eq!(s.object.shape.half_extents, (hx, hy));
        prop_assert_eq!((s.goal.x, s.goal.y), (gx, gy));
        prop_assert!((s.goal.yaw - locomanip::se2::normalize_angle(gyaw.to_radians())).abs() < 1e-9);
        prop_assert_eq!(s.obstacles.len(), obstacles.len());
        let back: Scenario = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn nonpositive_extents_rejected(hx in -2.0..=0.0f64) {
        prop_assert!(parse_scenario(&scenario_text(hx, 0.2, 1.0, 0.0, 0.0, &[])).is_err());
    }

    #[test]
    fn arbitrary_text_never_panics(text in "\\PC{0,200}") {
        let _ = parse_scenario(&text);
    }
}
