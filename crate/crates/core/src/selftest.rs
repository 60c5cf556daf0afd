//! Quick runtime checks behind the `selftest` subcommand. Each check builds
//! small random instances and compares the solvers against direct dense
//! computations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::{run_chain, run_chain_observed, ChainParams, CompressionStrategy};
use crate::compression::{scnm, wsinm, InterferenceContext};
use crate::linalg::{c, complex_normal, complex_normal_vec, hermitize, scaled_identity, CMat, CVec};
use crate::metrics::sinr_chain;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

const INSTANCES: usize = 20;

fn rand_mat(rng: &mut ChaCha8Rng, r: usize, k: usize) -> CMat {
    CMat::from_fn(r, k, |_, _| complex_normal(rng, 1.0))
}

fn random_pd(rng: &mut ChaCha8Rng, k: usize) -> CMat {
    let b = rand_mat(rng, k, k);
    hermitize(&(&b * b.adjoint() + scaled_identity(k, 0.05)))
}

fn verdict(name: &'static str, worst: f64, tol: f64, what: &str) -> Check {
    Check { name, passed: worst <= tol, detail: format!("worst {what} {worst:.3e} (limit {tol:.0e})") }
}

fn failed(name: &'static str, err: impl std::fmt::Display) -> Check {
    Check { name, passed: false, detail: err.to_string() }
}

/// Runs every check with instances drawn from `seed`.
pub fn run(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        centralized_equivalence(&mut rng),
        reconstruction(&mut rng),
        scnm_rate_equality(&mut rng),
        wsinm_monotone(&mut rng),
        sinr_monotone_in_compression(&mut rng),
    ]
}

fn centralized_equivalence(rng: &mut ChaCha8Rng) -> Check {
    const NAME: &str = "centralized-equivalence";
    let (p, sigma2) = (1.0, 0.1);
    let mut worst: f64 = 0.0;
    for _ in 0..INSTANCES {
        let (k, n, l) = (rng.random_range(1..=4), rng.random_range(1..=3), rng.random_range(2..=4));
        let hs: Vec<CMat> = (0..l).map(|_| rand_mat(rng, n, k)).collect();
        let s = complex_normal_vec(rng, k, p);
        let ys: Vec<CVec> = hs.iter().map(|h| h * &s + complex_normal_vec(rng, n, sigma2)).collect();
        let params = ChainParams::new(p, sigma2);
        let rates = vec![f64::INFINITY; l];
        let st = match run_chain_observed(params, &hs, &ys, CompressionStrategy::Infinite, &rates, rng) {
            Ok(st) => st,
            Err(e) => return failed(NAME, e),
        };
        let sinr = match st.sinr() {
            Ok(x) => x,
            Err(e) => return failed(NAME, e),
        };

        let m = n * l;
        let mut h = CMat::zeros(m, k);
        let mut y = CVec::zeros(m);
        for (i, (hi, yi)) in hs.iter().zip(&ys).enumerate() {
            h.view_mut((i * n, 0), (n, k)).copy_from(hi);
            y.rows_mut(i * n, n).copy_from(yi);
        }
        let cov = &h * h.adjoint() * c(p) + scaled_identity(m, sigma2);
        let lu = cov.lu();
        let Some(x) = lu.solve(&y) else { return failed(NAME, "singular oracle covariance") };
        let est = h.adjoint() * x * c(p);
        worst = worst.max((&est - &st.s_tilde).norm() / est.norm());
        for (kk, &got) in sinr.iter().enumerate() {
            let mut b = scaled_identity(m, sigma2);
            for j in (0..k).filter(|&j| j != kk) {
                b += h.column(j) * h.column(j).adjoint() * c(p);
            }
            let Some(z) = b.lu().solve(&h.column(kk).into_owned()) else {
                return failed(NAME, "singular oracle covariance");
            };
            let want = p * h.column(kk).dotc(&z).re;
            worst = worst.max((got - want).abs() / want);
        }
    }
    verdict(NAME, worst, 1e-8, "relative error")
}

fn reconstruction(rng: &mut ChaCha8Rng) -> Check {
    const NAME: &str = "reconstruction";
    let mut worst: f64 = 0.0;
    for _ in 0..INSTANCES {
        let (k, n, l) = (rng.random_range(1..=4), rng.random_range(1..=3), rng.random_range(2..=5));
        let hs: Vec<CMat> = (0..l).map(|_| rand_mat(rng, n, k)).collect();
        let s = complex_normal_vec(rng, k, 1.0);
        let ys: Vec<CVec> = hs.iter().map(|h| h * &s + complex_normal_vec(rng, n, 0.1)).collect();
        let rates: Vec<f64> = (0..l).map(|_| rng.random_range(0.5..8.0)).collect();
        let res = run_chain_observed(ChainParams::new(1.0, 0.1), &hs, &ys, CompressionStrategy::Scnm, &rates, rng)
            .and_then(|st| Ok((st.expansion(&ys)?, st.s_tilde)));
        match res {
            Ok((e, s_tilde)) => worst = worst.max((&e - &s_tilde).norm() / s_tilde.norm()),
            Err(e) => return failed(NAME, e),
        }
    }
    verdict(NAME, worst, 1e-9, "relative gap")
}

fn scnm_rate_equality(rng: &mut ChaCha8Rng) -> Check {
    const NAME: &str = "scnm-rate-equality";
    let mut worst: f64 = 0.0;
    for _ in 0..INSTANCES {
        let k = rng.random_range(1..=5);
        let p = random_pd(rng, k);
        let rate = rng.random_range(0.1..20.0);
        let out = match scnm(&p, rate) {
            Ok(o) => o,
            Err(e) => return failed(NAME, e),
        };
        // log2 det(P Q⁻¹ + I) = log2 det(P + Q) − log2 det(Q)
        let got = ((&p + &out.q).determinant().re / out.q.determinant().re).log2();
        worst = worst.max((got - rate).abs());
    }
    verdict(NAME, worst, 1e-6, "rate gap in bits")
}

fn wsinm_monotone(rng: &mut ChaCha8Rng) -> Check {
    const NAME: &str = "wsinm-monotone";
    let mut worst: f64 = 0.0;
    for _ in 0..INSTANCES {
        let k = rng.random_range(1..=5);
        let p = random_pd(rng, k);
        let ctx = InterferenceContext { base: (0..k).map(|_| rng.random_range(0.01..2.0)).collect() };
        let out = match wsinm(&p, rng.random_range(0.5..15.0), &ctx) {
            Ok(o) => o,
            Err(e) => return failed(NAME, e),
        };
        for pair in out.objective_trace.windows(2) {
            let rise = (pair[1] - pair[0]) / pair[0].abs().max(1.0);
            worst = worst.max(rise);
        }
    }
    verdict(NAME, worst, 1e-9, "relative objective increase")
}

fn sinr_monotone_in_compression(rng: &mut ChaCha8Rng) -> Check {
    const NAME: &str = "sinr-monotone-in-compression";
    let (p, sigma2) = (1.0, 0.1);
    let mut worst: f64 = 0.0;
    for _ in 0..INSTANCES {
        let (k, n, l) = (rng.random_range(1..=4), rng.random_range(1..=3), rng.random_range(2..=4));
        let hs: Vec<CMat> = (0..l).map(|_| rand_mat(rng, n, k)).collect();
        let st = match run_chain(ChainParams::new(p, sigma2), &hs, CompressionStrategy::Scnm, &vec![4.0; l]) {
            Ok(st) => st,
            Err(e) => return failed(NAME, e),
        };
        let base = st.sinr().unwrap_or_default();
        let mut q = st.q.clone();
        let i = rng.random_range(0..l);
        let b = rand_mat(rng, k, k);
        q[i] += &b * b.adjoint() * c(0.1);
        match sinr_chain(&st.h, &st.v, &st.a, &q[..l - 1], &q[l - 1], p, sigma2) {
            Ok(bumped) => {
                for (after, before) in bumped.iter().zip(&base) {
                    worst = worst.max((after - before) / before.max(f64::MIN_POSITIVE));
                }
            }
            Err(e) => return failed(NAME, e),
        }
    }
    verdict(NAME, worst, 1e-12, "relative SINR increase")
}
