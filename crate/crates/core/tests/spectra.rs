use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use whlab::spaces::{SpaceSpec, Weight};
use whlab::spectra::{build_cutoff, certificate_batch, polar_lattice, AnnulusBounds, CertificateKind, CutoffRequest, WindowLadder};

#[test]
fn power_weight_spectrum_is_the_unit_circle() {
    // Polynomial weights have both radii equal to 1.
    let w = Weight::power(1.0);
    let bounds = AnnulusBounds::from_weight(&w, 2.0);
    assert!((bounds.inner() - 1.0).abs() < 0.05 && (bounds.outer() - 1.0).abs() < 0.05, "{bounds:?}");
    let certs = certificate_batch(&polar_lattice(&[0.5, 1.0, 2.0], 4), &SpaceSpec::l2(w), &bounds, &WindowLadder::default()).unwrap();
    for c in &certs {
        let inside = matches!(c.kind, CertificateKind::Inside { .. });
        assert_eq!(inside, (c.modulus - 1.0).abs() < 1e-12, "|λ| = {}: {}", c.modulus, c.status());
    }
}

#[test]
fn cutoff_meets_its_bounds() {
    for (eps, c0, eta0, delta) in [(0.2, 1.0, 0.0, 2.0), (0.05, 3.0, -4.0, 1.0)] {
        let c = build_cutoff(&CutoffRequest::new(eps, eta0, delta, c0)).unwrap();
        assert!(c.pass, "{:?}", c.bounds);
        assert!(c.bounds.outside_mass <= eps / c0);
        assert!(c.bounds.total_mass <= 2.0 * (2.0 * PI).sqrt() + 1e-6);
        let k = c.f.grid().nearest_index(c.t0);
        assert!((c.f.values()[k].norm() - 1.0).abs() < 1e-9);
        assert!(c.f.values()[0] == C64::new(0.0, 0.0));
    }
}
