"""Scenario propagation, conditional cells, Monte-Carlo containment,
filter runs."""

import numpy as np
import pytest

from polymix.errors import BlowUpError, ConfigError, DomainError
from polymix.reach import (
    FilterScenario,
    InitComponent,
    Scenario,
    cell_hull,
    mc_check,
    mc_check_cell,
    mc_check_filter,
    run,
    run_filter,
    scenario_from_config,
)
from polymix.symbols import SymbolType


def vdp_scenario(**kw):
    base = dict(name="vdp", dynamics="vanderpol", h=0.005, N=40, q=50,
                init=(InitComponent(1.40, 0.17), InitComponent(2.40, 0.06)))
    base.update(kw)
    return Scenario(**base)


def lotka_scenario(**kw):
    base = dict(name="lotka", dynamics="lotka", h=0.15, N=5, q=50,
                init=(InitComponent(15.0, 1.0, level=3),
                      InitComponent(15.0, 1.0, level=3)))
    base.update(kw)
    return Scenario(**base)


class TestRun:
    def test_trace_shape_and_initial_box(self, isolated_provider):
        tr = run(lotka_scenario(), isolated_provider)
        assert len(tr.states) == 6 and len(tr.records) == 6
        r0 = tr.records[0]
        assert r0.lo.tolist() == [14.0, 14.0]
        assert r0.hi.tolist() == [16.0, 16.0]
        assert [len(ids) for ids in tr.discrete_ids] == [3, 3]

    def test_zero_step_count(self, isolated_provider):
        tr = run(lotka_scenario(N=0), isolated_provider)
        assert len(tr.states) == 1

    def test_budget_respected(self, isolated_provider):
        tr = run(vdp_scenario(N=30), isolated_provider)
        assert all(r.monomial_count <= 50 for r in tr.records)

    def test_blow_up_aborts_with_step_index(self, isolated_provider):
        # a huge step size makes the quadratic terms explode fast
        with pytest.raises(BlowUpError) as err:
            run(vdp_scenario(h=50.0, N=100), isolated_provider)
        assert 0 < err.value.step <= 100

    def test_invalid_scenarios_rejected(self):
        with pytest.raises(ConfigError):
            vdp_scenario(h=0.0)
        with pytest.raises(ConfigError):
            vdp_scenario(q=1)
        with pytest.raises(ConfigError):
            vdp_scenario(dynamics="nope")


class TestCellHull:
    def test_empty_assignment_is_global_hull(self, isolated_provider):
        tr = run(lotka_scenario(N=0), isolated_provider)
        cell = cell_hull(tr.states[0], {})
        assert cell.box.lo.tolist() == [14.0, 14.0]

    def test_red_cell_is_dyadic_subbox(self, isolated_provider):
        tr = run(lotka_scenario(N=0), isolated_provider)
        i_ids, j_ids = tr.discrete_ids
        assignment = dict(zip(i_ids, (1.0, -1.0, 1.0)))
        assignment.update(zip(j_ids, (-1.0, -1.0, 1.0)))
        cell = cell_hull(tr.states[0], assignment)
        assert np.allclose(cell.box.width, 0.25)
        assert cell.box.lo.tolist() == [15.25, 14.25]
        assert cell.box.hi.tolist() == [15.5, 14.5]

    def test_partial_assignment_covers_completions(self, isolated_provider):
        tr = run(lotka_scenario(N=2), isolated_provider)
        i_ids, j_ids = tr.discrete_ids
        partial = {i_ids[0]: -1.0, j_ids[0]: 1.0, j_ids[1]: -1.0}
        x_final = tr.states[-1]
        union = cell_hull(x_final, partial)
        for b2 in (-1.0, 1.0):
            for b3 in (-1.0, 1.0):
                full = dict(partial)
                full[i_ids[1]], full[i_ids[2]] = b2, b3
                sub = cell_hull(x_final, full)
                assert np.all(sub.box.lo >= union.box.lo - 1e-12)
                assert np.all(sub.box.hi <= union.box.hi + 1e-12)
        glob = cell_hull(x_final, {})
        assert np.all(union.box.lo >= glob.box.lo - 1e-12)
        assert np.all(union.box.hi <= glob.box.hi + 1e-12)

    def test_cells_tile_initial_box(self, isolated_provider):
        tr = run(lotka_scenario(N=0), isolated_provider)
        i_ids, _ = tr.discrete_ids
        los = []
        for bits in np.ndindex(2, 2, 2):
            assignment = {i: 2.0 * b - 1.0 for i, b in zip(i_ids, bits)}
            box = cell_hull(tr.states[0], assignment).box
            los.append((box.lo[0], box.hi[0]))
        los.sort()
        assert los[0][0] == 14.0 and los[-1][1] == 16.0
        for (_, hi), (lo, _) in zip(los, los[1:]):
            assert hi == lo

    def test_non_signed_assignment_rejected(self, isolated_provider):
        tr = run(lotka_scenario(N=0), isolated_provider)
        interval_id = next(int(i) for i in tr.states[0].I
                           if i % 4 == SymbolType.INTERVAL)
        with pytest.raises(DomainError):
            cell_hull(tr.states[0], {interval_id: 1.0})
        with pytest.raises(DomainError):
            cell_hull(tr.states[0], {tr.discrete_ids[0][0]: 0.5})


class TestMcCheck:
    def test_punctual_start_is_contained_exactly(self, isolated_provider):
        s = lotka_scenario(init=(InitComponent(15.0, 0.0),
                                 InitComponent(14.0, 0.0)), N=8)
        rep = mc_check(s, samples=5, seed=0)
        assert rep.ok

    def test_vdp_short_horizon(self, isolated_provider):
        rep = mc_check(vdp_scenario(N=40), samples=400, seed=3)
        assert rep.ok and rep.worst_defect <= 1e-9

    def test_traffic_with_persistent_parameter(self, isolated_provider):
        s = Scenario("traffic", "traffic", h=1.0, N=10, q=20,
                     init=(InitComponent(175, 25), InitComponent(240, 60),
                           InitComponent(160, 60)))
        rep = mc_check(s, samples=500, seed=4)
        assert rep.ok

    def test_red_cell_containment(self, isolated_provider):
        s = lotka_scenario()
        rep = mc_check_cell(
            s, [(1.0, -1.0, 1.0), (-1.0, -1.0, 1.0)], samples=100, seed=5
        )
        assert rep.ok

    def test_determinism(self, isolated_provider):
        s = vdp_scenario(N=10)
        a = mc_check(s, samples=50, seed=9)
        b = mc_check(s, samples=50, seed=9)
        assert a.worst_defect == b.worst_defect and a.violations == b.violations


class TestFilter:
    def make_fs(self, **kw):
        base = dict(name="lf", h=0.04, N=60, q=50, level=2,
                    init=((15.0, 10.0), (15.0, 10.0)),
                    input={"kind": "pulse", "value": 2.0, "on": 250,
                           "off": 500})
        base.update(kw)
        return FilterScenario(**base)

    def test_run_shapes(self, isolated_provider):
        ft = run_filter(self.make_fs(), isolated_provider)
        assert len(ft.states) == 61 and ft.truth.shape == (61, 2)
        assert ft.measurements.shape == (60,)
        # the stored state may exceed q transiently (noise and remainder
        # columns join after the in-step reduction) but stays bounded
        assert all(r.monomial_count <= 50 + 30 for r in ft.records)

    def test_truth_stays_inside_boxes(self, isolated_provider):
        ft = run_filter(self.make_fs(N=120), isolated_provider)
        for k, rec in enumerate(ft.records):
            assert np.all(ft.truth[k] >= rec.lo - 1e-9)
            assert np.all(ft.truth[k] <= rec.hi + 1e-9)

    def test_input_schedule(self):
        fs = self.make_fs()
        assert fs.input_at(0) == 0.0
        assert fs.input_at(250) == 2.0
        assert fs.input_at(499) == 2.0
        assert fs.input_at(500) == 0.0

    def test_mixed_level_keeps_degree_low(self, isolated_provider):
        ft = run_filter(self.make_fs(N=150, level=2), isolated_provider)
        assert ft.max_degree_overall <= 4

    def test_mc_closed_loop_containment(self, isolated_provider):
        rep = mc_check_filter(self.make_fs(N=40), samples=6, seed=11,
                              prov=isolated_provider)
        assert rep.ok
        assert rep.worst_defect <= 1e-9

    def test_mc_determinism(self, isolated_provider):
        fs = self.make_fs(N=15)
        a = mc_check_filter(fs, samples=4, seed=2, prov=isolated_provider)
        b = mc_check_filter(fs, samples=4, seed=2, prov=isolated_provider)
        assert (a.violations, a.worst_defect) == (b.violations, b.worst_defect)


class TestConfigParsing:
    def test_reach_round_trip(self):
        cfg = {
            "kind": "reach", "name": "vdp", "dynamics": "vanderpol",
            "h": 0.005, "N": 10, "q": 50,
            "init": [
                {"encode": {"center": 1.4, "radius": 0.17}},
                {"encode": {"center": 2.4, "radius": 0.06, "level": 1,
                            "flavor": "signed"}},
            ],
        }
        s = scenario_from_config(cfg)
        assert s.dynamics == "vanderpol" and s.init[1].level == 1

    def test_unknown_keys_fail_fast(self):
        with pytest.raises(ConfigError):
            scenario_from_config({"kind": "reach", "name": "x",
                                  "dynamics": "lotka", "h": 1, "N": 1,
                                  "q": 5, "init": [], "bogus": 1})
        with pytest.raises(ConfigError):
            scenario_from_config({
                "kind": "reach", "name": "x", "dynamics": "lotka",
                "h": 1, "N": 1, "q": 5,
                "init": [{"encode": {"center": 0, "radius": 1, "oops": 2}}],
            })

    def test_overrides(self):
        cfg = {
            "kind": "filter", "name": "lf", "h": 0.04, "N": 750, "q": 50,
            "level": 0, "init": [{"center": 15, "radius": 10},
                                 {"center": 15, "radius": 10}],
        }
        fs = scenario_from_config(cfg, overrides={"N": 10, "q": 100,
                                                  "level": 2})
        assert (fs.N, fs.q, fs.level) == (10, 100, 2)

    def test_missing_keys(self):
        with pytest.raises(ConfigError):
            scenario_from_config({"kind": "filter", "name": "lf"})


class TestZeroDynamics:
    def test_constant_sequence(self, isolated_provider):
        s = Scenario("still", "zero", h=1.0, N=5, q=10,
                     init=(InitComponent(1.0, 0.5),))
        tr = run(s, isolated_provider)
        assert len(tr.states) == 6
        assert all(x == tr.states[0] for x in tr.states[1:])
        assert mc_check(s, samples=50, seed=1, trace=tr).ok
