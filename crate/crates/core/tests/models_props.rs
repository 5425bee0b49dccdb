use proptest::prelude::*;
use season_bifurc::models::{check_admissibility, lv_fields, rhs_seasonal};
use season_bifurc::{LVMalthusParams, LogisticMalthus, LogisticMalthusParams, LotkaVolterraMalthus, SeasonSchedule, SeasonalModel};

#[test]
fn reference_parameters() {
    let p = LVMalthusParams::reference();
    assert_eq!(p.alpha, [2.0, 1.0]);
    assert_eq!(p.beta, [[1.0, 0.0], [0.25, 1.0]]);
    assert_eq!(p.mu, [1.0, 1.0]);
    assert_eq!(p.carrying_capacity(), [2.0, 1.0]);
    assert_eq!(LotkaVolterraMalthus::reference().half_coexistence(), [1.0, 0.25]);
}

#[test]
fn inadmissible_parameters_rejected() {
    assert!(LVMalthusParams::new([2.0, 1.0], [[1.0, 2.0], [2.0, 1.0]], [1.0, 1.0]).is_err());
    assert!(LVMalthusParams::new([0.0, 1.0], [[1.0, 0.0], [0.25, 1.0]], [1.0, 1.0]).is_err());
    assert!(LVMalthusParams::new([2.0, 1.0], [[1.0, 0.0], [0.25, 1.0]], [1.0, -1.0]).is_err());
    assert!(LVMalthusParams::reference().with_beta12(1.0).is_ok());
    assert!(LVMalthusParams::reference().with_beta12(2.5).is_err());
}

#[test]
fn admissibility_of_reference_models() {
    let m = LotkaVolterraMalthus::reference();
    assert!(check_admissibility(&m, 200).unwrap().passed());
    let l = LogisticMalthus::new(LogisticMalthusParams::from_rate(2.0, 1.0).unwrap());
    assert!(check_admissibility(&l, 200).unwrap().passed());
}

#[test]
fn seasonal_rhs_switches_fields() {
    let m = LotkaVolterraMalthus::reference();
    let s = SeasonSchedule::sharp(0.5).unwrap();
    let u = [1.0, 0.5];
    let (fg, fd) = lv_fields(m.params(), u);
    assert_eq!(rhs_seasonal(&m, &s, 0.25, &u), fg.to_vec());
    assert_eq!(rhs_seasonal(&m, &s, 0.75, &u), fd.to_vec());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobians_match_finite_differences(u1 in 0.0f64..3.0, u2 in 0.0f64..2.0, b12 in 0.0f64..1.5) {
        let m = LotkaVolterraMalthus::new(LVMalthusParams::reference().with_beta12(b12).unwrap());
        let u = [u1, u2];
        let jg = m.growth_jacobian(&u);
        let jd = m.decline_jacobian(&u);
        let h = 1e-6;
        for j in 0..2 {
            let mut up = u;
            let mut dn = u;
            up[j] += h;
            dn[j] -= h;
            let (gp, dp) = lv_fields(m.params(), up);
            let (gm, dm) = lv_fields(m.params(), dn);
            for i in 0..2 {
                prop_assert!((jg[(i, j)] - (gp[i] - gm[i]) / (2.0 * h)).abs() < 1e-7);
                prop_assert!((jd[(i, j)] - (dp[i] - dm[i]) / (2.0 * h)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn origin_is_an_equilibrium_of_both_fields(b12 in 0.0f64..1.5) {
        let p = LVMalthusParams::reference().with_beta12(b12).unwrap();
        let (fg, fd) = lv_fields(&p, [0.0, 0.0]);
        prop_assert_eq!(fg, [0.0, 0.0]);
        prop_assert_eq!(fd, [0.0, 0.0]);
    }
}
