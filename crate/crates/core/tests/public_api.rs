use algdiv_core::diagnostics::diagnostics_record;
use algdiv_core::estimators::{fast_path_abelian, group_avg_covariance, reynolds_project};
use algdiv_core::groups::{make_group, GroupSpec, Representation};
use algdiv_core::matching::{natural_basis, pipeline, sequential_gevp, PipelineConfig, Termination};
use algdiv_core::signals::{build_covariance, sample_snapshots, CovModel, Graph};

#[test]
fn estimate_then_diagnose() {
    let model = CovModel::ar1(16, 0.8);
    let snaps = sample_snapshots(&model, 4, None, 3).unwrap();
    let rep = Representation::permutation(make_group(&GroupSpec::Cyclic(16)).unwrap());
    let naive = group_avg_covariance(&rep, &snaps).unwrap();
    let fast = fast_path_abelian(&[16], &snaps).unwrap();
    let diff = naive.r_hat.as_matrix().sub(fast.r_hat.as_matrix()).unwrap().frobenius_norm();
    assert!(diff <= 1e-12 * naive.r_hat.frobenius_norm());
    assert!(naive.is_psd().unwrap());
    let d = diagnostics_record(&naive.r_hat).unwrap();
    assert!(d.alpha > 0.0 && d.alpha < 1.0);
    assert!(d.psi > 1.0 / 16.0 && d.psi <= 1.0);
}

#[test]
fn averaged_estimate_lies_in_the_commutant() {
    let snaps = sample_snapshots(&CovModel::white(8, 1.0), 2, None, 9).unwrap();
    let rep = Representation::permutation(make_group(&GroupSpec::Dihedral(8)).unwrap());
    let r = group_avg_covariance(&rep, &snaps).unwrap().r_hat;
    let again = reynolds_project(&rep, &r).unwrap();
    let diff = again.as_matrix().sub(r.as_matrix()).unwrap().frobenius_norm();
    assert!(diff <= 1e-12 * r.frobenius_norm());
}

#[test]
fn graph_symmetry_from_population_and_samples() {
    let r = build_covariance(&CovModel::graph_diffusion(Graph::petersen())).unwrap();
    let t = sequential_gevp(&r, &natural_basis(10).unwrap(), 1e-8, 5040).unwrap();
    assert!(t.iterations.iter().filter(|i| i.accepted).all(|i| i.residual <= 1e-10));
    assert!(matches!(t.termination, Termination::Rejection | Termination::BasisExhausted | Termination::Cap));

    let snaps = sample_snapshots(&CovModel::white(8, 1.0), 4000, None, 1).unwrap();
    // Sample α is about √(M/L), so L = 4000 sits well under the 0.1 gate.
    let rep = pipeline(&snaps, &PipelineConfig::default()).unwrap();
    assert_eq!(rep.selected, "trivial");
}
