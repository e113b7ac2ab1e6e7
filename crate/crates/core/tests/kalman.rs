use gosc::channel::Measurement;
use gosc::estimator::{entropy, Estimate};
use gosc::{Mat2, Vec2};
use proptest::prelude::*;

fn spd() -> impl Strategy<Value = Mat2> {
    (1e-4f64..10.0, 1e-4f64..10.0, 0.0f64..std::f64::consts::PI).prop_map(|(a, b, t)| {
        let (s, c) = t.sin_cos();
        let r = Mat2::new(c, -s, s, c);
        let m = r * Mat2::from_diagonal(&Vec2::new(a, b)) * r.transpose();
        (m + m.transpose()) * 0.5
    })
}

fn meas(position: Vec2, cov: Mat2) -> Measurement {
    Measurement { range: 0.0, angle: 0.0, range_var: 0.0, angle_var: 0.0, position, cov }
}

fn vec2() -> impl Strategy<Value = Vec2> {
    (-50.0f64..50.0, -50.0f64..50.0).prop_map(|(x, y)| Vec2::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn fuse_never_raises_det(prior in spd(), r in spd(), m in vec2(), z in vec2()) {
        let e = Estimate { mean: m, cov: prior, velocity: Vec2::zeros() };
        let f = e.fuse(&meas(z, r)).unwrap();
        prop_assert!(f.cov.determinant() <= prior.determinant() + 1e-12);
    }

    #[test]
    fn fuse_keeps_spd(prior in spd(), r in spd(), m in vec2(), z in vec2()) {
        let e = Estimate { mean: m, cov: prior, velocity: Vec2::zeros() };
        let c = e.fuse(&meas(z, r)).unwrap().cov;
        prop_assert_eq!(c[(0, 1)], c[(1, 0)]);
        let eig = c.symmetric_eigenvalues();
        prop_assert!(eig.min() > 0.0, "eigenvalues {:?}", eig);
    }

    #[test]
    fn fused_entropy_drops(prior in spd(), r in spd()) {
        let e = Estimate { mean: Vec2::zeros(), cov: prior, velocity: Vec2::zeros() };
        let f = e.fuse(&meas(Vec2::zeros(), r)).unwrap();
        prop_assert!(entropy(&f.cov) <= entropy(&prior) + 1e-12);
    }

    #[test]
    fn predict_is_additive(k in 1usize..50, var in 0.0f64..0.1, vx in -4.0f64..4.0, vy in -4.0f64..4.0) {
        let mut e = Estimate::known(Vec2::zeros());
        e.velocity = Vec2::new(vx, vy);
        for _ in 0..k {
            e = e.predict(0.005, var);
        }
        let mut total = 0.0;
        for _ in 0..k {
            total += var;
        }
        prop_assert_eq!(e.cov, Mat2::identity() * total);
    }

    #[test]
    fn two_predicts_match_one_double_step(vx in -4.0f64..4.0, vy in -4.0f64..4.0, dt in 1e-4f64..0.1) {
        let mut e = Estimate::known(Vec2::zeros());
        e.velocity = Vec2::new(vx, vy);
        let twice = e.predict(dt, 0.0).predict(dt, 0.0);
        let once = e.predict(2.0 * dt, 0.0);
        prop_assert!((twice.mean - once.mean).norm() <= 1e-12);
    }
}

#[test]
fn velocity_persists_until_commit() {
    let mut e = Estimate::known(Vec2::zeros());
    e.commit(&gosc::world::Command::new(2.0, 0.0));
    let e = e.predict(0.005, 0.0).predict(0.005, 0.0);
    assert!((e.mean.x - 0.02).abs() < 1e-15);
    assert_eq!(e.velocity, Vec2::new(2.0, 0.0));
}
