use proptest::prelude::*;
use qarch::kernels::{ema_weights, lm_arch_components, lm_arch_weights, rma_weights, LmArchParams};
use qarch::KernelSpec;

fn assert_normalized(w: &[f64]) {
    assert!(w.iter().all(|x| *x >= 0.0 && x.is_finite()));
    assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
}

proptest! {
    #[test]
    fn rma_is_uniform(n in 1usize..2000) {
        let k = rma_weights(n).unwrap();
        assert_normalized(k.weights());
        prop_assert_eq!(k.len(), n);
        prop_assert!(k.weights().iter().all(|w| *w == k.weights()[0]));
    }

    #[test]
    fn ema_ratios_are_mu(mu in 0.01f64..0.999, l_max in 0usize..1500) {
        let k = ema_weights(mu, l_max).unwrap();
        assert_normalized(k.weights());
        // skip the tail once the weights leave the normal range
        for pair in k.weights().windows(2).filter(|p| p[1] > 1e-290) {
            prop_assert!((pair[1] / pair[0] - mu).abs() <= 1e-12);
        }
    }

    #[test]
    fn lm_arch_is_a_decreasing_mixture(
        tau1 in 1.0f64..10.0,
        rho in 1.1f64..2.0,
        components in 1usize..12,
        l_max in 16usize..1200,
    ) {
        let params = LmArchParams { tau1, rho, components, tau0: 1e5, l_max };
        let k = lm_arch_weights(&params).unwrap();
        assert_normalized(k.weights());
        prop_assert!(k.weights().windows(2).all(|p| p[1] < p[0]));
        let mut mixed = vec![0.0; l_max + 1];
        let parts = lm_arch_components(&params).unwrap();
        prop_assert!((parts.iter().map(|(a, _)| a).sum::<f64>() - 1.0).abs() <= 1e-12);
        for (a, ema) in parts {
            for (m, w) in mixed.iter_mut().zip(ema.weights()) {
                *m += a * w;
            }
        }
        for (m, w) in mixed.iter().zip(k.weights()) {
            prop_assert!((m - w).abs() <= 1e-14);
        }
    }
}

#[test]
fn spec_strings_build_the_same_kernels() {
    let cases = [
        ("rma:500", rma_weights(500).unwrap()),
        ("ema:0.94", ema_weights(0.94, 512).unwrap()),
        ("ema:0.9:100", ema_weights(0.9, 100).unwrap()),
        ("lmarch", lm_arch_weights(&LmArchParams::default()).unwrap()),
    ];
    for (s, expected) in cases {
        let spec: KernelSpec = s.parse().unwrap();
        assert_eq!(spec.build().unwrap(), expected, "{s}");
        let again: KernelSpec = spec.to_string().parse().unwrap();
        assert_eq!(again, spec);
    }
    for bad in ["rma:0", "ema:1.5", "ema:abc", "garch", "lmarch:4,1,15,1560,512"] {
        assert!(bad.parse::<KernelSpec>().and_then(|k| k.build()).is_err(), "{bad}");
    }
}
