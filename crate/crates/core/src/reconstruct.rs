//! Recovering a channel from the output of a faithful probe state.
//!
//! With `J(rho)` the `B -> A` transfer matrix of a state, applying a channel
//! on `A` gives `J(E_A(rho)) = T(E) J(rho)`. A faithful probe has `J` of full
//! row rank `|A|^2`, so `T(E) = J(out) J(probe)^+`.

use rayon::prelude::*;

use crate::channel::{apply_on, Channel};
use crate::error::{Error, Result};
use crate::jamiolkowski::{state_to_map, Direction};
use crate::linalg::{
    c, hermitian_eigen, hermitian_part, identity, min_eigenvalue, pseudo_inverse, rank_and_nullspace, ComplexMatrix,
    RandomSeed, Subsystem,
};
use crate::state::BipartiteState;

#[derive(Debug, Clone)]
pub struct ReconstructionReport {
    /// Recovered map in transfer form, acting on the probed side.
    pub channel: Channel,
    /// Frobenius distance of the Choi matrices, when the true channel is known.
    pub choi_error: Option<f64>,
    /// `max(0, -lambda_min)` of the Hermitian part of the recovered Choi matrix.
    pub cp_deviation: f64,
    /// `||E†(1) - 1||_F` of the recovered map.
    pub tp_deviation: f64,
    /// `sigma_max / sigma_min` of the probe's `B -> A` transfer matrix.
    pub condition: f64,
}

fn check_pair(probe: &BipartiteState, output: &BipartiteState) -> Result<()> {
    if probe.dims() != output.dims() {
        return Err(Error::DimensionMismatch(format!(
            "probe dims {:?} differ from output dims {:?}",
            probe.dims(),
            output.dims()
        )));
    }
    Ok(())
}

/// Recovers the channel applied on `side` that maps `probe` to `output`.
/// Refuses probes that are not faithful on `side`.
pub fn reconstruct_channel(
    probe: &BipartiteState,
    output: &BipartiteState,
    side: Subsystem,
    tol: f64,
) -> Result<ReconstructionReport> {
    check_pair(probe, output)?;
    let probe = probe.oriented(side);
    let output = output.oriented(side);
    let d = probe.dims().dim_a;
    let j_in = state_to_map(&probe, Direction::BToA).matrix;
    let j_out = state_to_map(&output, Direction::BToA).matrix;
    let r = rank_and_nullspace(&j_in.adjoint(), tol);
    let required = d * d;
    if r.rank != required {
        return Err(Error::NotFaithful { rank: r.rank, required });
    }
    let transfer = &j_out * pseudo_inverse(&j_in, r.tol);
    let condition = r.singular_values[0] / r.singular_values[required - 1];
    let channel = Channel::from_transfer(transfer, d, d)?;
    Ok(report_for(channel, condition))
}

fn report_for(channel: Channel, condition: f64) -> ReconstructionReport {
    let choi = hermitian_part(&channel.choi());
    let cp_deviation = (-min_eigenvalue(&choi)).max(0.0);
    let d = channel.dim_in();
    let tp_deviation = (channel.dual_identity() - identity(d)).norm();
    ReconstructionReport { channel, choi_error: None, cp_deviation, tp_deviation, condition }
}

/// Adds the Choi distance to a known channel.
pub fn with_truth(mut report: ReconstructionReport, truth: &Channel) -> ReconstructionReport {
    report.choi_error = Some((report.channel.choi() - truth.choi()).norm());
    report
}

/// Random traceless Hermitian perturbation of Frobenius norm `noise`,
/// followed by eigenvalue clamping and renormalization.
pub fn perturb_state(state: &BipartiteState, noise: f64, seed: RandomSeed) -> BipartiteState {
    if noise == 0.0 {
        return state.clone();
    }
    let n = state.dims().total();
    let g = crate::linalg::complex_gaussian(&mut seed.rng(), n, n);
    let mut h = hermitian_part(&g);
    h -= identity(n) * (h.trace() / c(n as f64, 0.0));
    let norm = h.norm();
    if norm > 0.0 {
        h *= c(noise / norm, 0.0);
    }
    let noisy = state.matrix() + h;
    let (values, vectors) = hermitian_eigen(&noisy);
    let mut clamped = ComplexMatrix::zeros(n, n);
    for (k, &lam) in values.iter().enumerate() {
        if lam > 0.0 {
            let v = vectors.column(k);
            clamped += (v * v.adjoint()) * c(lam, 0.0);
        }
    }
    let tr = clamped.trace();
    clamped /= tr;
    BipartiteState::from_parts_unchecked(hermitian_part(&clamped), state.dims())
}

/// Reconstructs `truth` from noisy outputs of `probe`, one report per trial
/// in trial order. Each trial uses its own seed derived from `seed`.
pub fn noise_stress(
    probe: &BipartiteState,
    truth: &Channel,
    side: Subsystem,
    noise: f64,
    trials: usize,
    seed: RandomSeed,
) -> Result<Vec<ReconstructionReport>> {
    if noise.is_nan() || noise < 0.0 {
        return Err(Error::InvalidArgument(format!("noise must be nonnegative, got {noise}")));
    }
    let exact = apply_on(truth, probe, side)?;
    (0..trials)
        .into_par_iter()
        .map(|k| {
            let output = perturb_state(&exact, noise, seed.derive(k as u64));
            reconstruct_channel(probe, &output, side, 0.0).map(|r| with_truth(r, truth))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::random_cptp;
    use crate::sensitivity::make_prop4_state;
    use crate::state::{max_entangled, random_mixed};

    #[test]
    fn identity_output_recovers_identity_channel() {
        let probe = max_entangled(2).unwrap();
        let r = with_truth(reconstruct_channel(&probe, &probe, Subsystem::A, 0.0).unwrap(), &Channel::identity(2));
        assert!(r.choi_error.unwrap() <= 1e-10);
        assert!((r.condition - 1.0).abs() < 1e-12);
        assert!(r.tp_deviation <= 1e-12);
    }

    #[test]
    fn random_channels_are_recovered() {
        for s in 0..30 {
            let d = 2 + (s as usize % 2);
            let truth = random_cptp(d, 1 + (s as usize % 4), RandomSeed(s)).unwrap();
            for probe in [max_entangled(d).unwrap(), random_mixed(d, d, d * d, RandomSeed(s + 1000)).unwrap()] {
                let out = apply_on(&truth, &probe, Subsystem::A).unwrap();
                let r = with_truth(reconstruct_channel(&probe, &out, Subsystem::A, 0.0).unwrap(), &truth);
                assert!(r.choi_error.unwrap() <= 1e-8, "{:?}", r.choi_error);
                assert!(r.condition >= 1.0);
            }
        }
    }

    #[test]
    fn side_b_reconstruction() {
        let probe = random_mixed(3, 2, 6, RandomSeed(4)).unwrap();
        let truth = random_cptp(2, 2, RandomSeed(5)).unwrap();
        let out = apply_on(&truth, &probe, Subsystem::B).unwrap();
        let r = with_truth(reconstruct_channel(&probe, &out, Subsystem::B, 0.0).unwrap(), &truth);
        assert!(r.choi_error.unwrap() <= 1e-8);
        assert!(matches!(reconstruct_channel(&probe, &out, Subsystem::A, 0.0), Err(Error::NotFaithful { .. })));
    }

    #[test]
    fn non_faithful_probe_is_refused() {
        let probe = make_prop4_state(&[0.5, 0.3, 0.2]).unwrap();
        let err = reconstruct_channel(&probe, &probe, Subsystem::A, 0.0).unwrap_err();
        assert!(matches!(err, Error::NotFaithful { rank: 2, required: 9 }));
    }

    #[test]
    fn mixtures_reconstruct_linearly() {
        let probe = random_mixed(2, 2, 4, RandomSeed(7)).unwrap();
        let e = random_cptp(2, 2, RandomSeed(8)).unwrap();
        let f = random_cptp(2, 3, RandomSeed(9)).unwrap();
        let mix = e.mix(&f, 0.3).unwrap();
        let out = apply_on(&mix, &probe, Subsystem::A).unwrap();
        let r = reconstruct_channel(&probe, &out, Subsystem::A, 0.0).unwrap();
        let expected = e.transfer() * c(0.3, 0.0) + f.transfer() * c(0.7, 0.0);
        assert!((r.channel.transfer() - expected).norm() <= 1e-9);
    }

    #[test]
    fn zero_noise_is_exact_and_reports_are_ordered() {
        let probe = max_entangled(2).unwrap();
        let truth = random_cptp(2, 2, RandomSeed(1)).unwrap();
        let reports = noise_stress(&probe, &truth, Subsystem::A, 0.0, 5, RandomSeed(3)).unwrap();
        assert_eq!(reports.len(), 5);
        assert!(reports.iter().all(|r| r.choi_error.unwrap() <= 1e-8));
        let a = noise_stress(&probe, &truth, Subsystem::A, 1e-3, 4, RandomSeed(3)).unwrap();
        let b = noise_stress(&probe, &truth, Subsystem::A, 1e-3, 4, RandomSeed(3)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.choi_error, y.choi_error);
        }
    }

    #[test]
    fn error_grows_with_noise() {
        let probe = max_entangled(2).unwrap();
        let truth = random_cptp(2, 2, RandomSeed(11)).unwrap();
        let mut last = -1.0;
        for noise in [0.0, 1e-6, 1e-4, 1e-2] {
            let reports = noise_stress(&probe, &truth, Subsystem::A, noise, 50, RandomSeed(12)).unwrap();
            let mean = reports.iter().map(|r| r.choi_error.unwrap()).sum::<f64>() / 50.0;
            assert!(mean >= last, "mean {mean} dropped below {last} at noise {noise}");
            last = mean;
            for r in &reports {
                assert!(r.cp_deviation >= 0.0 && r.tp_deviation >= 0.0);
                assert!(r.cp_deviation.is_finite());
            }
        }
    }

    #[test]
    fn perturbation_keeps_a_valid_state() {
        let st = random_mixed(2, 2, 2, RandomSeed(1)).unwrap();
        let p = perturb_state(&st, 1e-2, RandomSeed(2));
        BipartiteState::new(p.matrix().clone(), p.dims()).unwrap();
        assert_eq!(perturb_state(&st, 0.0, RandomSeed(2)), st);
    }
}
