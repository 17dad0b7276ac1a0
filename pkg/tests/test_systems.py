import numpy as np
import pytest
from scipy.special import expit

from sasvfusion.calibration import AffineCalibration, backend_llrs
from sasvfusion.decision import Priors
from sasvfusion.errors import DomainError, FitError, MetricError
from sasvfusion.fusion import SYSTEMS, fuse_nonlinear, fuse_sum
from sasvfusion.simulation import default_spec, sample_trials, scale_mismatched_spec
from sasvfusion.systems import FittedModels, evaluate_system, fit_system_models, fuse_system, system_streams
from sasvfusion.trials import Trials


@pytest.fixture(scope="module")
def world():
    spec = scale_mismatched_spec(default_spec(seed=101))
    dev = sample_trials(spec.replace(n_trials=6000))
    ev = sample_trials(spec.replace(n_trials=6000, seed=102))
    return dev, ev


@pytest.fixture(scope="module")
def fitted(world):
    dev, _ = world
    return {name: fit_system_models(name, dev) for name in SYSTEMS}


class TestStreams:
    def test_unknown_system(self):
        with pytest.raises(DomainError):
            fuse_system("b9", FittedModels(), [0.0], [0.0])

    def test_missing_models(self):
        with pytest.raises(DomainError):
            fuse_system("l2", FittedModels(), [0.0], [0.0])
        with pytest.raises(DomainError):
            fuse_system("b1c", FittedModels(), [0.0], [0.0])

    def test_missing_rho(self, fitted):
        m = fitted["l3"]
        with pytest.raises(DomainError):
            fuse_system("l3", FittedModels(backend=m.backend), [0.0], [0.0])

    def test_b1_is_raw_sum(self, world):
        _, ev = world
        np.testing.assert_array_equal(fuse_system("b1", FittedModels(), ev.s_asv, ev.s_cm), fuse_sum(ev.s_asv, ev.s_cm))

    def test_b1c_applies_both_maps(self):
        m = FittedModels(AffineCalibration(2.0, 1.0), AffineCalibration(0.5, -1.0))
        got = fuse_system("b1c", m, np.array([1.0]), np.array([4.0]))
        np.testing.assert_allclose(got, [(3.0 + 1.0) / np.sqrt(6)])

    def test_l3_uses_backend_llrs(self, world, fitted):
        _, ev = world
        m = fitted["l3"]
        la, lc = backend_llrs(m.backend, ev.s_asv, ev.s_cm)
        np.testing.assert_array_equal(fuse_system("l3", m, ev.s_asv, ev.s_cm), fuse_nonlinear(la, lc, m.rho))

    def test_reference_systems(self, world):
        _, ev = world
        np.testing.assert_allclose(fuse_system("b1v2", FittedModels(), ev.s_asv, ev.s_cm), ev.s_asv + expit(ev.s_cm))
        np.testing.assert_allclose(fuse_system("post", FittedModels(), ev.s_asv, ev.s_cm), expit(ev.s_asv) * expit(ev.s_cm))

    def test_case_insensitive(self, world):
        _, ev = world
        np.testing.assert_array_equal(fuse_system("B1", FittedModels(), ev.s_asv, ev.s_cm), fuse_system("b1", FittedModels(), ev.s_asv, ev.s_cm))


class TestFit:
    def test_models_present_as_needed(self, fitted):
        for name, spec in SYSTEMS.items():
            m = fitted[name]
            assert (m.backend is not None) == spec.uses_backend
            assert (m.affine_asv is not None) == spec.calibrated
            assert (m.rho is not None) == (name in ("l3", "l3c"))

    def test_fixed_rho(self, world):
        dev, _ = world
        assert fit_system_models("l3", dev, rho=0.25).rho == 0.25

    def test_unlabeled(self, world):
        dev, _ = world
        unlabeled = Trials(dev.trial_id, dev.s_asv, dev.s_cm, np.full(len(dev), -1))
        with pytest.raises(FitError):
            fit_system_models("l2", unlabeled)

    def test_deterministic(self, world, fitted):
        dev, _ = world
        again = fit_system_models("l3c", dev)
        assert again.affine_asv == fitted["l3c"].affine_asv
        assert again.rho == fitted["l3c"].rho
        np.testing.assert_array_equal(again.backend.covs, fitted["l3c"].backend.covs)


class TestEvaluate:
    def test_report_invariants(self, world, fitted):
        _, ev = world
        for name in SYSTEMS:
            r = evaluate_system(ev, name, fitted[name])
            assert r.cllr_min <= r.cllr
            assert 0 <= r.sasv_eer <= 1 and 0 <= r.t_eer <= 1

    def test_b1c_beats_b1(self, world, fitted):
        _, ev = world
        assert evaluate_system(ev, "b1c", fitted["b1c"]).sasv_eer < evaluate_system(ev, "b1", fitted["b1"]).sasv_eer

    def test_shared_t_eer(self, world, fitted):
        _, ev = world
        raw = {evaluate_system(ev, n, fitted[n]).t_eer for n in ("b1", "b1c", "b1v2", "post")}
        llr = {evaluate_system(ev, n, fitted[n]).t_eer for n in ("l2", "l2c", "l3", "l3c")}
        assert len(raw) == 1 and len(llr) == 1

    def test_rho_from_priors(self, world, fitted):
        _, ev = world
        m = fitted["l3"]
        no_rho = FittedModels(m.affine_asv, m.affine_cm, m.backend, None)
        priors = Priors([0.2, 0.6, 0.2])
        r = evaluate_system(ev, "l3", no_rho, priors)
        fixed = evaluate_system(ev, "l3", FittedModels(backend=m.backend, rho=0.25))
        assert r == fixed

    def test_empty(self):
        with pytest.raises(DomainError):
            evaluate_system(Trials([], [], [], []), "b1", FittedModels())

    def test_single_class(self):
        t = Trials(["a", "b"], [0.0, 1.0], [0.0, 1.0], [2, 2])
        with pytest.raises(MetricError):
            evaluate_system(t, "b1", FittedModels())

    def test_streams_are_calibrated_llrs(self, world, fitted):
        _, ev = world
        m = fitted["l2c"]
        a, c = system_streams("l2c", m, ev.s_asv, ev.s_cm)
        la, lc = backend_llrs(m.backend, ev.s_asv, ev.s_cm)
        np.testing.assert_array_equal(a, m.affine_asv(la))
        np.testing.assert_array_equal(c, m.affine_cm(lc))
