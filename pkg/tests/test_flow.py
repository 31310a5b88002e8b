import json

import numpy as np
import pytest

from hymkit import flow, monads as mo
from hymkit.ansatz import ansatz_monad


@pytest.fixture(scope="module")
def domain():
    return flow.build_domain(resolution=7)


class TestBuildDomain:
    def test_default_box_node_count(self, domain):
        assert domain.n_nodes == 7**6 == 117_649

    def test_resolution_nine_count(self):
        dom = flow.build_domain(resolution=9, n_barrier_nodes=4)
        assert dom.n_nodes == 9**6 == 531_441

    def test_chart_violation_rejected(self):
        bad = ((0.0, 1.0),) + flow.default_box()[1:]
        with pytest.raises(ValueError, match="Re\\(x\\)"):
            flow.build_domain(bad)

    def test_coarse_resolution_rejected(self):
        with pytest.raises(ValueError):
            flow.build_domain(resolution=4)

    def test_h0_positive_definite_everywhere(self, domain):
        h = domain.h0
        tr = np.real(h[..., 0, 0] + h[..., 1, 1])
        det = np.real(h[..., 0, 0] * h[..., 1, 1]
                      - h[..., 0, 1] * h[..., 1, 0])
        assert tr.min() > 0
        assert det.min() > 0

    def test_h0_matches_monad_gram(self, domain):
        from hymkit.ansatz import chart_frame
        spec = ansatz_monad()
        pts = domain.grid_points()
        node = (2, 4, 1, 5, 3, 0)
        g = mo.induced_metric(spec, pts[node], chart_frame("x")(pts[node]))
        np.testing.assert_allclose(domain.h0[node], g, atol=1e-12)


class TestMeanCurvatureField:
    def test_constant_metric_is_flat(self, domain):
        state = flow.initial_state(domain)
        state.h = np.broadcast_to(np.diag([2.0, 1.0]).astype(complex),
                                  domain.shape + (2, 2)).copy()
        chi, sup = flow.mean_curvature_field(state)
        assert sup == 0.0

    def test_abelian_bump_matches_half_laplacian(self, domain):
        # H = e^u I with u quadratic: i Lambda F = -Lap u / 2 + O(|grad u|^2)
        pts = domain.grid_points()
        u = 0.01 * (pts[..., 0].real - 1.5) ** 2 - 0.01 * pts[..., 0].imag ** 2
        state = flow.initial_state(domain)
        state.h = np.exp(u)[..., None, None] * np.eye(2, dtype=complex)
        chi, sup = flow.mean_curvature_field(state)
        # Lap u = 0.02 - 0.02 = 0 (discretely exact for quadratics), so the
        # residual is the nonlinear |grad u|^2 term, bounded by its sup
        grad_sq = (0.02 * 0.5) ** 2 + (0.02 * 0.5) ** 2
        assert sup <= 1.1 * grad_sq + 1e-12

    def test_matches_engine_on_h0(self, domain):
        spec = ansatz_monad()
        state = flow.initial_state(domain)
        chi, _ = flow.mean_curvature_field(state)
        pts = domain.grid_points()
        h2 = float(domain.spacings.min()) ** 2
        for node in [(3, 3, 3, 3, 3, 3), (2, 4, 3, 1, 5, 2), (1, 1, 1, 1, 1, 1)]:
            rep = mo.curvature(spec, pts[node])
            c = chi[tuple(i - 1 for i in node)]
            tr = np.real(np.trace(c))
            det = np.real(np.linalg.det(c))
            disc = np.sqrt(max(tr * tr - 4 * det, 0.0))
            grid_norm = max(abs(0.5 * (tr + disc)), abs(0.5 * (tr - disc)))
            assert abs(grid_norm - rep.norm_mean) <= 5.0 * h2

    def test_refinement_second_order(self):
        # discrepancy against the engine shrinks like the squared spacing
        spec = ansatz_monad()
        errs = []
        for res in (5, 7, 9):
            dom = flow.build_domain(resolution=res, n_barrier_nodes=4)
            state = flow.initial_state(dom)
            chi, _ = flow.mean_curvature_field(state)
            pts = dom.grid_points()
            node = (res // 2,) * 6
            rep = mo.curvature(spec, pts[node])
            c = chi[tuple(i - 1 for i in node)]
            tr = np.real(np.trace(c))
            det = np.real(np.linalg.det(c))
            disc = np.sqrt(max(tr * tr - 4 * det, 0.0))
            grid_norm = max(abs(0.5 * (tr + disc)), abs(0.5 * (tr - disc)))
            errs.append(abs(grid_norm - rep.norm_mean))
        hs = [1.0 / (res - 1) for res in (5, 7, 9)]
        slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        assert slope == pytest.approx(2.0, abs=0.4)


class TestStep:
    def test_boundary_untouched_single_step(self, domain):
        state = flow.initial_state(domain)
        flow.step(state)
        mask = np.ones(domain.shape, dtype=bool)
        mask[domain.interior] = False
        assert np.array_equal(state.h[mask], domain.h0[mask])

    def test_cfl_rejection(self, domain):
        state = flow.initial_state(domain)
        with pytest.raises(ValueError, match="CFL"):
            flow.step(state, dt=0.2 * float(domain.spacings.min()) ** 2)

    def test_abelian_decay_and_diagonality(self):
        dom = flow.build_domain(resolution=7, n_barrier_nodes=4)
        dom.h0 = np.broadcast_to(np.eye(2, dtype=complex),
                                 dom.shape + (2, 2)).copy()
        state = flow.initial_state(dom)
        u = np.zeros(dom.shape)
        u[(slice(2, 5),) * 6] = 0.05
        state.h = np.exp(u)[..., None, None] * np.eye(2, dtype=complex)
        sups = [np.abs(np.log(state.h[..., 0, 0].real)).max()]
        for _ in range(30):
            flow.step(state)
            sups.append(np.abs(np.log(state.h[..., 0, 0].real)).max())
        assert all(np.diff(sups) <= 1e-14)
        assert sups[-1] < sups[0]
        assert np.abs(state.h[..., 0, 1]).max() == 0.0
        assert np.abs(state.h[..., 0, 0] - state.h[..., 1, 1]).max() <= 1e-12

    def test_abelian_matches_scalar_reference(self):
        # same grid, same discrete operators, scalar solver
        dom = flow.build_domain(resolution=7, n_barrier_nodes=4)
        dom.h0 = np.broadcast_to(np.eye(2, dtype=complex),
                                 dom.shape + (2, 2)).copy()
        state = flow.initial_state(dom)
        u = np.zeros(dom.shape)
        u[(slice(2, 5),) * 6] = 0.05
        state.h = np.exp(u)[..., None, None] * np.eye(2, dtype=complex)
        hs = np.exp(u)
        dt = dom.cfl_bound()
        inner = (slice(1, -1),) * 6
        for _ in range(20):
            flow.step(state, dt)
            hc = hs[inner]
            lap = np.zeros_like(hc)
            nl = np.zeros_like(hc)
            for ax in range(6):
                slp, slm = [slice(1, -1)] * 6, [slice(1, -1)] * 6
                slp[ax] = slice(2, None)
                slm[ax] = slice(0, -2)
                hp, hm = hs[tuple(slp)], hs[tuple(slm)]
                sp = dom.spacings[ax]
                lap += (hp + hm - 2 * hc) / sp**2
                nl += ((hp - hm) / (2 * sp)) ** 2
            out = hs.copy()
            out[inner] = hc + dt * (lap - nl / hc)
            hs = out
            assert np.abs(state.h[..., 0, 0].real - hs).max() <= 1e-8


@pytest.fixture(scope="module")
def run_result():
    dom = flow.build_domain(resolution=5, n_barrier_nodes=4)
    return flow.run(dom, 400, monitor_cadence=10)


class TestRun:
    @pytest.fixture
    def result(self, run_result):
        return run_result

    def test_decay_monotone_after_transient(self, result):
        sups = [row[2] for row in result.history]
        floor = 1e-12 * sups[0]
        assert all(b <= a + floor for a, b in zip(sups[1:], sups[2:]))

    def test_strong_decay(self, result):
        sups = [row[2] for row in result.history]
        assert sups[-1] <= 0.1 * sups[0]

    def test_exponential_fit(self, result):
        sups = np.array([row[2] for row in result.history])
        steps = np.array([row[0] for row in result.history])
        mask = (sups > 1e-13 * sups[0]) & (steps >= 10)
        slope, intercept = np.polyfit(steps[mask], np.log(sups[mask]), 1)
        fit = slope * steps[mask] + intercept
        ss_res = np.sum((np.log(sups[mask]) - fit) ** 2)
        ss_tot = np.sum((np.log(sups[mask]) - np.log(sups[mask]).mean()) ** 2)
        assert slope < 0
        assert 1.0 - ss_res / ss_tot >= 0.9

    def test_energy_finite_and_stable(self, result):
        energies = [row[3] for row in result.history]
        assert all(np.isfinite(e) for e in energies)
        assert abs(energies[-1] / energies[0] - 1.0) <= 0.10

    def test_positivity_along_flow(self, result):
        h = result.h
        tr = np.real(h[..., 0, 0] + h[..., 1, 1])
        det = np.real(h[..., 0, 0] * h[..., 1, 1] - h[..., 0, 1] * h[..., 1, 0])
        assert tr.min() > 0 and det.min() > 0


class TestEnergy:
    def test_constant_field_zero(self, domain):
        state = flow.initial_state(domain)
        state.h = np.broadcast_to(np.diag([1.5, 0.5]).astype(complex),
                                  domain.shape + (2, 2)).copy()
        assert flow.energy(state) == 0.0

    def test_h0_energy_locked(self, domain):
        state = flow.initial_state(domain)
        e = flow.energy(state)
        assert e == pytest.approx(0.01193, rel=0.05)


class TestBarrier:
    def test_zero_constant_with_h0_passes(self, domain):
        state = flow.initial_state(domain)
        res = flow.barrier_check(state, 0.0, g_values=np.zeros(len(domain.barrier_nodes)))
        assert res["pass"]
        assert res["worst_margin"] == pytest.approx(0.0, abs=1e-10)

    def test_doubled_metric_fails_tight_band(self, domain):
        state = flow.initial_state(domain)
        state.h = 2.0 * state.h
        g = np.full(len(domain.barrier_nodes), 0.1)
        res = flow.barrier_check(state, 1.0, g_values=g)  # band e^{+-0.1} < 2
        assert not res["pass"]
        failing = [r for r in res["nodes"] if not r["pass"]]
        assert failing

    def test_missing_potentials_raise(self, domain):
        state = flow.initial_state(domain)
        with pytest.raises(ValueError, match="barrier"):
            flow.barrier_check(state, 1.0)


class TestIO:
    def test_checkpoint_roundtrip(self, tmp_path, domain):
        state = flow.initial_state(domain)
        flow.step(state)
        path = tmp_path / "state.bin"
        flow.save_checkpoint(state, path)
        h, sidecar = flow.load_checkpoint(path)
        np.testing.assert_allclose(h, state.h, atol=1e-15)
        assert sidecar["shape"] == list(domain.shape)
        assert sidecar["step"] == 1
        raw = np.fromfile(path, dtype="<f8")
        assert raw.size == domain.n_nodes * 8

    def test_history_csv_format(self, tmp_path):
        dom = flow.build_domain(resolution=5, n_barrier_nodes=4)
        state = flow.run(dom, 20, monitor_cadence=5, with_energy=False)
        path = tmp_path / "history.csv"
        flow.write_history_csv(state, path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "step,time,sup_mean_curvature,energy"
        assert len(lines) == len(state.history) + 1

    def test_config_parsing(self, tmp_path):
        cfg_path = tmp_path / "flow.json"
        cfg_path.write_text(json.dumps({"resolution": 5, "steps": 10}))
        cfg = flow.FlowConfig.from_json(cfg_path)
        assert cfg.resolution == 5
        assert cfg.steps == 10
        cfg_path.write_text(json.dumps({"resolutoin": 5}))
        with pytest.raises(ValueError, match="unknown"):
            flow.FlowConfig.from_json(cfg_path)
