use cubicvar::exact_cov::{fbm_cov, s_n_exact};
use cubicvar::mc_sim::{
    fgn_autocov, gen_fbm, gen_fbm_with, increment_autocov, mc_corr, sim_xrho, w_path, FgnMethod, McEstimate,
};
use cubicvar::rho_limit::RhoFunction;

const SEED: u64 = 0xC0FFEE;

fn column(paths: &[Vec<f64>], i: usize, j: usize) -> McEstimate {
    McEstimate::from_samples(&paths.iter().map(|p| p[i] * p[j]).collect::<Vec<_>>())
}

#[test]
fn endpoint_variance_is_one() {
    let ens = gen_fbm(64, 1.0, 20_000, SEED).unwrap();
    let est = column(&ens.paths, 64, 64);
    assert!(est.within(1.0, 4.0), "{est:?}");
}

#[test]
fn covariance_across_unit_times() {
    let ens = gen_fbm(32, 2.0, 20_000, SEED).unwrap();
    let est = column(&ens.paths, 32, 64);
    assert!(est.within(fbm_cov(1.0, 2.0), 4.0), "{est:?}");
}

#[test]
fn increments_have_fgn_autocovariance() {
    let n = 128u64;
    let ens = gen_fbm(n, 1.0, 5_000, SEED).unwrap();
    let scale = (n as f64).powf(-1.0 / 3.0);
    for (h, est) in increment_autocov(&ens, 3).iter().enumerate() {
        assert!(est.within(scale * fgn_autocov(h), 4.0), "lag {h}: {est:?}");
    }
}

#[test]
fn dense_generator_agrees() {
    let n = 64u64;
    let ens = gen_fbm_with(n, 1.0, 5_000, SEED, FgnMethod::Dense).unwrap();
    assert!(ens.provenance.contains("dense"));
    let scale = (n as f64).powf(-1.0 / 3.0);
    for (h, est) in increment_autocov(&ens, 2).iter().enumerate() {
        assert!(est.within(scale * fgn_autocov(h), 4.0), "lag {h}: {est:?}");
    }
}

#[test]
fn cubic_variation_moments() {
    let ens = gen_fbm(64, 1.0, 20_000, SEED).unwrap();
    let w = w_path(&ens, 64, 1.0).unwrap();
    let mean = McEstimate::from_samples(&w);
    assert!(mean.within(0.0, 4.0), "{mean:?}");
    let var = McEstimate::from_samples(&w.iter().map(|x| x * x).collect::<Vec<_>>());
    let exact = s_n_exact(64, 64, 1.0, None).unwrap().s;
    assert!(var.within(exact, 4.0), "{var:?} vs {exact}");
}

#[test]
fn single_increment_sixth_moment() {
    // One increment of variance 1/N: E[ΔB⁶] = 15 / N.
    let n = 64u64;
    let ens = gen_fbm(n, 1.0, 40_000, SEED).unwrap();
    let w = w_path(&ens, n, 1.0 / n as f64).unwrap();
    let est = McEstimate::from_samples(&w.iter().map(|x| x * x).collect::<Vec<_>>());
    assert!(est.within(15.0 / n as f64, 4.0), "{est:?}");
}

#[test]
fn coarse_sublattice_is_consistent() {
    let ens = gen_fbm(128, 1.0, 10_000, SEED).unwrap();
    let w = w_path(&ens, 32, 1.0).unwrap();
    let var = McEstimate::from_samples(&w.iter().map(|x| x * x).collect::<Vec<_>>());
    let exact = s_n_exact(32, 32, 1.0, None).unwrap().s;
    assert!(var.within(exact, 4.0), "{var:?} vs {exact}");
}

#[test]
fn neighbouring_indices_loose_check() {
    let exact = s_n_exact(128, 129, 0.8, None).unwrap().corr;
    let mc = mc_corr(128, 129, 0.8, 2_000, SEED).unwrap();
    assert!(mc.within(exact, 4.0), "{mc:?} vs {exact}");
}

#[test]
fn seeds_reproduce_and_differ() {
    let a = mc_corr(8, 12, 1.0, 200, 1).unwrap();
    let b = mc_corr(8, 12, 1.0, 200, 1).unwrap();
    let c = mc_corr(8, 12, 1.0, 200, 2).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.mean, c.mean);
}

#[test]
fn limit_process_variance_grows_linearly() {
    let rho = RhoFunction::rational(2, 1, 0.0, 1e-8).unwrap();
    let ens = sim_xrho(&rho, 2.0, 64, 8_000, SEED).unwrap();
    let est = column(
        &ens.paths.iter().map(|p| p.iter().map(|x| x[0]).collect()).collect::<Vec<_>>(),
        32,
        32,
    );
    assert!(est.within(rho.kappa2(), 4.0), "{est:?}");
}
