"""Tests for the identity suites on the quick grids."""

import pytest


@pytest.fixture(autouse=True)
def _load_suites():
    from modtrace.suites import ensure_loaded
    ensure_loaded()


@pytest.fixture
def run(quick_experiment):
    """Run one suite on the quick grids and return its rows."""
    from modtrace.harness.executor import run_suite

    def go(name, **params):
        return run_suite(quick_experiment([{"name": name, "params": params}]))
    return go


def _failures(rows):
    return [(r.identity_name, r.params, r.rel_err, r.tol, r.note) for r in rows if not r.passed]


class TestRegistry:
    def test_all_modules_load(self):
        from modtrace.suites import suite_load_errors
        assert suite_load_errors() == {}

    def test_names(self):
        from modtrace.suites import registry
        names = {s.name for s in registry.list_suites()}
        assert {"matrix_substrate", "modular_analytic", "majorization", "standard_form_positivity",
                "boundary_catalogue", "residue_contour", "hilbert_algebra_axioms", "section_algebra",
                "spectral_unitarity", "haagerup_trace", "haagerup_x_form", "trace_formula",
                "grid_convergence", "correspondence", "averaging_lemma", "inner_lemma"} <= names

    def test_categories_filter(self):
        from modtrace.suites import registry
        assert {s.name for s in registry.list_suites("convergence")} == {"grid_convergence"}
        assert "trace" in registry.categories()

    def test_unknown_parameter(self):
        from modtrace.suites import registry
        with pytest.raises(ValueError, match="Unknown parameter"):
            registry.get_suite("majorization").run(None, pear=3)

    def test_param_helpers(self):
        from modtrace.suites import as_complex, as_list
        assert as_list(None) == []
        assert as_list(0.5) == [0.5]
        assert as_list((1, 2)) == [1, 2]
        assert as_complex([0.5, -1]) == complex(0.5, -1)
        assert as_complex(2) == 2 + 0j

    def test_defaults_come_from_signature(self):
        from modtrace.suites import registry
        suite = registry.get_suite("haagerup_trace")
        assert suite.defaults()["divergent"] == -1.5
        assert not suite.slow
        assert registry.get_suite("grid_convergence").slow

    def test_registration_checks(self):
        from modtrace.suites import SuiteRegistry, registry
        with pytest.raises(ValueError, match="twice"):
            registry.register("majorization", "again", "modular")(lambda ctx: [])
        fresh = SuiteRegistry()
        with pytest.raises(TypeError, match="samples"):
            fresh.register("bad", "no such param", "test", {"samples": "n"})(lambda ctx, pairs=1: [])
        assert fresh.list_suites() == []

    def test_table(self):
        from modtrace.suites import registry
        assert registry.list_suites_table().row_count == len(registry.list_suites())


class TestQuickRuns:
    def test_matrix_substrate(self, run):
        assert _failures(run("matrix_substrate", samples=5)) == []

    def test_matrix_substrate_rank_deficient(self, run):
        assert _failures(run("matrix_substrate", samples=5, sizes=[3, 4], rank=2)) == []

    def test_modular_analytic(self, run):
        rows = run("modular_analytic", samples=20)
        assert len(rows) == 4
        assert _failures(rows) == []

    def test_majorization(self, run):
        assert _failures(run("majorization", pairs=20)) == []

    def test_standard_form_positivity(self, run):
        assert _failures(run("standard_form_positivity", samples=5, blocks=[2, 1])) == []

    def test_boundary_catalogue(self, run):
        assert _failures(run("boundary_catalogue")) == []

    def test_residue_contour(self, run):
        assert _failures(run("residue_contour", samples=2)) == []

    def test_residue_contour_wider_strip(self, run):
        assert _failures(run("residue_contour", beta=[-0.6, -0.45], strip=[0.1, 0.9], samples=1)) == []

    def test_hilbert_algebra_axioms(self, run):
        assert _failures(run("hilbert_algebra_axioms", samples=2, sizes=[2])) == []

    def test_section_algebra(self, run):
        assert _failures(run("section_algebra", samples=1)) == []

    def test_spectral_unitarity(self, run):
        assert _failures(run("spectral_unitarity")) == []

    def test_haagerup_trace(self, run):
        rows = run("haagerup_trace", mu=[0, 0.5, 1, 2, [0.5, 1.0]])
        assert len(rows) == 11
        assert _failures(rows) == []

    def test_haagerup_trace_on_a_weight(self, run):
        assert _failures(run("haagerup_trace", mu=[0.5], weight=True)) == []

    def test_haagerup_x_form(self, run):
        assert _failures(run("haagerup_x_form")) == []

    def test_trace_formula(self, run):
        rows = run("trace_formula")
        assert {r.identity_name for r in rows} >= {"trace_formula.spectral", "trace_formula.pole_free"}
        assert _failures(rows) == []

    def test_trace_formula_mass_mismatch(self, run):
        (row,) = run("trace_formula", beta=[-0.3, -0.25], mass=[1.0, 2.0, 3.0])
        assert row.status == "error"

    def test_correspondence(self, run):
        assert _failures(run("correspondence", vectors=3)) == []

    def test_averaging_lemma(self, run):
        assert _failures(run("averaging_lemma", samples=1)) == []

    def test_inner_lemma(self, run):
        assert _failures(run("inner_lemma", samples=1)) == []


class TestToleranceOverrides:
    def test_support_cutoff_changes_reported_ranks(self, quick_experiment):
        from modtrace.harness.executor import run_suite
        experiments = [{"name": "matrix_substrate", "params": {"samples": 5}}]
        coarse = quick_experiment(experiments, tolerances={"haagerup": 1e-4, "support_cutoff": 0.9})
        default = {r.identity_name: r for r in run_suite(quick_experiment(experiments))}
        overridden = {r.identity_name: r for r in run_suite(coarse)}
        assert default["matrix_substrate.support_rank"].passed
        assert not overridden["matrix_substrate.support_rank"].passed
        assert overridden["matrix_substrate.support_rank"].lhs.real > 0

    def test_hermitian_tolerance_from_environment(self, quick_experiment, isolated_config,
                                                  monkeypatch):
        from modtrace.errors import ConfigInvalid
        from modtrace.harness.executor import run_suite
        skewed = {"omega": {"density": [[[[0.75, 0], [1e-9, 0]], [[0, 0], [0.25, 0]]]]}}
        experiments = [{"name": "haagerup_trace", "params": {"mu": [0.5], "divergent": None}}]
        with pytest.raises(ConfigInvalid, match="not Hermitian"):
            quick_experiment(experiments, states=skewed)

        monkeypatch.setenv("MODTRACE_TOL_HERMITIAN", "1e-8")
        rows = run_suite(quick_experiment(experiments, states=skewed))
        assert len(rows) == 2
        assert _failures(rows) == []

    def test_majorization_edge_row(self, run):
        rows = {r.identity_name: r for r in run("majorization", pairs=10, edge=1e-4)}
        assert rows["majorization.edge"].passed
        assert rows["majorization.edge"].params["edge"] == 1e-4



def test_split_weight_recovers_state():
    from modtrace.calculus.algebra import FiniteAlgebra
    from modtrace.calculus.sampling import make_rng, random_functional
    from modtrace.suites.trace import split_weight
    phi = random_functional(make_rng(9), FiniteAlgebra((3, 1)))
    weight = split_weight(phi)
    assert len(weight.summands) == 4
    assert weight.as_functional().same_as(phi)


@pytest.mark.slow
def test_grid_convergence(run):
    assert _failures(run("grid_convergence", mu=[0.5, 2.0])) == []


@pytest.mark.slow
def test_acceptance_config_passes():
    from pathlib import Path

    from modtrace.harness.config import Config
    from modtrace.harness.executor import run_suite
    from modtrace.harness.experiment import load_experiment_config
    path = Path(__file__).resolve().parent.parent / "configs" / "acceptance.json"
    rows = run_suite(load_experiment_config(path, Config()), jobs=2)
    assert rows
    assert _failures(rows) == []
