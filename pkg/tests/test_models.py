"""Null/alternative graph models: parameters, samplers, expected matrices, fitting."""

import numpy as np
import pytest

from homotest.errors import ValidationError
from homotest.graph import CommunityAssignment, Graph
from homotest.models import (
    ChungLuParams,
    DcsbmParams,
    ErParams,
    LsmHomParams,
    LsmParams,
    SbmParams,
    expected_matrix,
    fit_chung_lu,
    fit_er,
    fit_lsm,
    fit_null,
    params_from_dict,
    planted_assignment,
    planted_for,
    sample_chung_lu,
    sample_dcsbm,
    sample_er,
    sample_lsm,
    sample_lsmhom,
    sample_sbm,
    sampler_for,
)
from homotest.rng import substream


class TestParams:
    def test_er_validation(self):
        ErParams(n=5, p=0.5)
        with pytest.raises(ValidationError):
            ErParams(n=1, p=0.5)
        with pytest.raises(ValidationError):
            ErParams(n=5, p=1.5)
        with pytest.raises(ValidationError):
            ErParams(n=5, p=-0.1)

    def test_sbm_validation(self):
        SbmParams(sizes=(3, 3), omega=((0.5, 0.1), (0.1, 0.5)))
        with pytest.raises(ValidationError):
            SbmParams(sizes=(3, 0), omega=((0.5, 0.1), (0.1, 0.5)))
        with pytest.raises(ValidationError):
            SbmParams(sizes=(3, 3), omega=((0.5, 0.1), (0.2, 0.5)))  # asymmetric
        with pytest.raises(ValidationError):
            SbmParams(sizes=(3, 3), omega=((0.5, 1.2), (1.2, 0.5)))

    def test_chung_lu_clamped_pair_count(self):
        params = ChungLuParams(theta=[1.5, 1.5, 0.1])
        assert params.clamped_pair_count() == 1  # only the 1.5 * 1.5 pair
        assert ChungLuParams(theta=[0.5, 0.5]).clamped_pair_count() == 0
        with pytest.raises(ValidationError):
            ChungLuParams(theta=[-0.5, 0.5])

    def test_lsm_validation(self):
        LsmParams(n=10, beta=0.0, sigma2=1.0)
        with pytest.raises(ValidationError):
            LsmParams(n=10, beta=0.0, sigma2=-1.0)

    def test_lsmhom_validation(self):
        LsmHomParams(sizes=(5, 5), beta_in=1.0, beta_out=-1.0, sigma2=1.0)
        with pytest.raises(ValidationError):
            LsmHomParams(sizes=(5, 0), beta_in=1.0, beta_out=-1.0, sigma2=1.0)
        with pytest.raises(ValidationError):
            LsmHomParams(sizes=(5, 5), beta_in=1.0, beta_out=-1.0, sigma2=-0.5)

    def test_planted_assignment(self):
        c = planted_assignment((2, 3))
        assert c == CommunityAssignment([1, 1, 2, 2, 2])

    def test_planted_for(self):
        assert planted_for(ErParams(n=5, p=0.2)) is None
        assert planted_for(ChungLuParams(theta=[0.5, 0.5])) is None
        sbm = SbmParams(sizes=(2, 2), omega=((0.5, 0.1), (0.1, 0.5)))
        assert planted_for(sbm) == CommunityAssignment([1, 1, 2, 2])


class TestSamplers:
    def test_er_determinism_and_validity(self):
        params = ErParams(n=30, p=0.3)
        g1 = sample_er(params, rng=substream(0, 0))
        g2 = sample_er(params, rng=substream(0, 0))
        g3 = sample_er(params, rng=substream(0, 1))
        assert g1 == g2
        assert g1 != g3
        assert g1.n == 30

    def test_er_density_concentrates(self):
        params = ErParams(n=400, p=0.25)
        g = sample_er(params, rng=substream(1, 0))
        assert g.density() == pytest.approx(0.25, abs=0.02)

    def test_er_extremes(self):
        assert sample_er(ErParams(n=10, p=0.0), rng=substream(0, 0)).m == 0
        assert sample_er(ErParams(n=10, p=1.0), rng=substream(0, 0)).m == 45

    def test_sbm_returns_planted(self):
        params = SbmParams(sizes=(40, 40), omega=((0.5, 0.05), (0.05, 0.5)))
        g, planted = sample_sbm(params, rng=substream(2, 0))
        assert planted == planted_assignment((40, 40))
        assert g.n == 80
        labels = planted.labels
        dense = g.to_dense().astype(float)
        within = labels[:, None] == labels[None, :]
        np.fill_diagonal(within, False)
        between = labels[:, None] != labels[None, :]
        assert dense[within].mean() == pytest.approx(0.5, abs=0.05)
        assert dense[between].mean() == pytest.approx(0.05, abs=0.03)

    def test_chung_lu_degrees_track_theta(self):
        theta = np.concatenate([np.full(50, 0.2), np.full(50, 0.9)])
        g = sample_chung_lu(ChungLuParams(theta=theta), rng=substream(3, 0))
        degs = g.degrees()
        assert degs[50:].mean() > degs[:50].mean() * 2

    def test_dcsbm_returns_planted(self):
        params = DcsbmParams(
            sizes=(20, 20),
            omega=((0.6, 0.1), (0.1, 0.6)),
            theta=np.ones(40),
        )
        g, planted = sample_dcsbm(params, rng=substream(4, 0))
        assert g.n == 40
        assert planted == planted_assignment((20, 20))

    def test_lsm_homophilous_variant(self):
        params = LsmHomParams(sizes=(25, 25), beta_in=2.0, beta_out=-2.0, sigma2=0.5)
        g, planted = sample_lsmhom(params, rng=substream(5, 0))
        assert g.n == 50
        labels = planted.labels
        same = labels[g.edges[:, 0]] == labels[g.edges[:, 1]]
        # strongly homophilous parameters: most edges within blocks
        assert same.mean() > 0.7

    def test_lsm_sampler_runs(self):
        g = sample_lsm(LsmParams(n=30, beta=0.0, sigma2=1.0), rng=substream(6, 0))
        assert isinstance(g, Graph)
        assert g.n == 30

    def test_sampler_for_matches_direct_calls(self):
        # closures return graphs only, with planted labels stripped
        er = ErParams(n=20, p=0.4)
        assert sampler_for(er)(substream(7, 0)) == sample_er(er, rng=substream(7, 0))
        sbm = SbmParams(sizes=(10, 10), omega=((0.5, 0.1), (0.1, 0.5)))
        g_a = sampler_for(sbm)(substream(7, 1))
        g_b, _ = sample_sbm(sbm, rng=substream(7, 1))
        assert g_a == g_b

    def test_sampler_for_unknown_type(self):
        with pytest.raises(ValidationError):
            sampler_for(object())


class TestExpectedMatrix:
    def test_er_constant(self):
        pm = expected_matrix(ErParams(n=4, p=0.3))
        off = pm.values[~np.eye(4, dtype=bool)]
        assert np.all(off == 0.3)
        assert np.all(np.diag(pm.values) == 0)

    def test_sbm_blocks(self):
        pm = expected_matrix(SbmParams(sizes=(2, 2), omega=((0.5, 0.1), (0.1, 0.5))))
        expected = np.array(
            [
                [0.0, 0.5, 0.1, 0.1],
                [0.5, 0.0, 0.1, 0.1],
                [0.1, 0.1, 0.0, 0.5],
                [0.1, 0.1, 0.5, 0.0],
            ]
        )
        assert np.allclose(pm.values, expected)

    def test_chung_lu_products_clamped(self):
        pm = expected_matrix(ChungLuParams(theta=[1.5, 1.5, 0.2]))
        assert pm.values[0, 1] == 1.0  # 1.5 * 1.5 clamped
        assert pm.values[0, 2] == pytest.approx(0.3)

    def test_dcsbm_closed_form(self):
        params = DcsbmParams(
            sizes=(1, 1), omega=((0.8, 0.2), (0.2, 0.8)), theta=[1.0, 2.0]
        )
        pm = expected_matrix(params)
        assert pm.values[0, 1] == pytest.approx(min(1.0 * 2.0 * 0.2, 1.0))

    def test_lsm_monte_carlo_properties(self):
        params = LsmParams(n=6, beta=0.5, sigma2=1.0)
        pm1 = expected_matrix(params, rng=substream(8, 0))
        pm2 = expected_matrix(params, rng=substream(8, 0))
        assert np.array_equal(pm1.values, pm2.values)  # rng-deterministic
        assert np.allclose(pm1.values, pm1.values.T)
        assert np.all(pm1.values >= 0) and np.all(pm1.values <= 1)
        # all-node symmetry of the model: off-diagonal entries concentrate
        off = pm1.values[~np.eye(6, dtype=bool)]
        assert off.std() < 0.05

    def test_lsmhom_block_structure(self):
        params = LsmHomParams(sizes=(3, 3), beta_in=2.0, beta_out=-2.0, sigma2=0.1)
        pm = expected_matrix(params, rng=substream(9, 0))
        assert pm.values[0, 1] > pm.values[0, 3]  # within > between


class TestFitting:
    def test_fit_er_recovers_density(self, karate):
        fitted = fit_er(karate)
        assert fitted.kind == "er"
        assert fitted.params.p == pytest.approx(karate.density())
        assert fitted.n == karate.n and fitted.m == karate.m

    def test_fit_chung_lu_path_oracle(self):
        # path on 4 nodes: degrees (1,2,2,1), m=3 => theta = d / sqrt(6)
        g = Graph(4, [[0, 1], [1, 2], [2, 3]])
        fitted = fit_chung_lu(g)
        assert np.allclose(fitted.params.theta, np.array([1, 2, 2, 1]) / np.sqrt(6))
        assert fitted.flags == {"clamped_pairs": 0}

    def test_fit_chung_lu_reports_clamping(self):
        # two hubs joined to all leaves: theta_hub = sqrt(2), product 2 > 1
        edges = [[0, i] for i in range(2, 10)] + [[1, i] for i in range(2, 10)]
        fitted = fit_chung_lu(Graph(10, edges))
        assert fitted.flags == {"clamped_pairs": 1}

    def test_fit_chung_lu_preserves_expected_edge_count(self, karate):
        fitted = fit_chung_lu(karate)
        pm = expected_matrix(fitted.params)
        # with no clamping, expected edges reproduce m exactly
        if fitted.flags["clamped_pairs"] == 0:
            assert pm.values.sum() / 2 == pytest.approx(karate.m)

    def test_fit_lsm_recovers_parameters(self):
        truth = LsmParams(n=100, beta=1.0, sigma2=1.0)
        betas, sigmas = [], []
        for i in range(10):
            g = sample_lsm(truth, rng=substream(50, i))
            fitted = fit_lsm(g, rng=substream(51, i))
            assert fitted.kind == "lsm"
            assert "converged" in fitted.flags and "iterations" in fitted.flags
            betas.append(fitted.params.beta)
            sigmas.append(fitted.params.sigma2)
        assert abs(float(np.median(betas)) - truth.beta) < 0.5
        assert abs(float(np.median(sigmas)) - truth.sigma2) < 0.3

    def test_fit_lsm_deterministic(self):
        g = sample_lsm(LsmParams(n=40, beta=0.5, sigma2=1.0), rng=substream(52, 0))
        f1 = fit_lsm(g, rng=substream(53, 0))
        f2 = fit_lsm(g, rng=substream(53, 0))
        assert f1.params.beta == f2.params.beta
        assert f1.params.sigma2 == f2.params.sigma2
        assert f1.flags == f2.flags

    def test_fit_null_dispatch(self, karate):
        assert fit_null(karate, "er").params.p == fit_er(karate).params.p
        with pytest.raises(ValidationError):
            fit_null(karate, "configuration")


class TestParamsFromDict:
    def test_er(self):
        params = params_from_dict({"kind": "er", "n": 5, "p": 0.2})
        assert params == ErParams(n=5, p=0.2)

    def test_sbm_explicit_sizes_and_omega(self):
        spec = {
            "kind": "sbm",
            "sizes": [3, 3],
            "omega": [[0.5, 0.1], [0.1, 0.5]],
        }
        params = params_from_dict(spec)
        assert list(params.sizes) == [3, 3]
        assert params.omega[0][0] == 0.5

    def test_sbm_n_k_shorthand_puts_remainder_first(self):
        params = params_from_dict(
            {"kind": "sbm", "n": 7, "k": 3, "p_in": 0.3, "p_out": 0.1}
        )
        assert list(params.sizes) == [3, 2, 2]
        omega = np.asarray(params.omega)
        assert np.all(np.diag(omega) == 0.3)
        assert np.all(omega[~np.eye(3, dtype=bool)] == 0.1)

    def test_chung_lu_theta_uniform_uses_rng(self):
        spec = {"kind": "chung_lu", "n": 6, "theta_uniform": {"low": 0.5, "high": 0.9}}
        a = params_from_dict(spec, rng=substream(1, 0))
        b = params_from_dict(spec, rng=substream(1, 0))
        c = params_from_dict(spec, rng=substream(1, 1))
        assert np.array_equal(a.theta, b.theta)
        assert not np.array_equal(a.theta, c.theta)
        assert np.all((a.theta >= 0.5) & (a.theta <= 0.9))

    def test_chung_lu_explicit_theta(self):
        params = params_from_dict({"kind": "chung_lu", "theta": [0.5, 0.6, 0.7]})
        assert np.allclose(params.theta, [0.5, 0.6, 0.7])

    def test_lsm_and_lsmhom(self):
        lsm = params_from_dict({"kind": "lsm", "n": 10, "beta": 0.5, "sigma2": 1.0})
        assert lsm == LsmParams(n=10, beta=0.5, sigma2=1.0)
        hom = params_from_dict(
            {
                "kind": "lsmhom",
                "sizes": [5, 5],
                "beta_in": 1.0,
                "beta_out": -1.0,
                "sigma2": 0.5,
            }
        )
        assert hom.beta_in == 1.0

    def test_missing_field(self):
        with pytest.raises(ValidationError, match="missing"):
            params_from_dict({"kind": "er", "n": 5})

    def test_unknown_kind(self):
        with pytest.raises(ValidationError):
            params_from_dict({"kind": "barabasi", "n": 5})
