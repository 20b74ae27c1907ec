import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdcontext import atlas
from pdcontext.atlas import (
    ATTRACTORS,
    CALIBRATION,
    REGION_SAMPLES,
    REGIONS,
    RegionLabel,
    adjacent_sign_change,
    atlas_sweep,
    boundary_values,
    classify_region,
    params_for,
    portrait,
    simplex_seeds,
    stability_signature,
)
from pdcontext.equilibrium import Stability, fixed_points_3, flatten_reports, closed_form_eigenpairs_3
from pdcontext.errors import UnknownSignature, ValidationError
from pdcontext.game_model import GameParams
from pdcontext.replicator import IntegrationConfig

viewport = st.tuples(st.floats(0.02, 0.98), st.floats(0.05, 4.0))


@pytest.fixture(scope="module")
def sweep():
    return atlas_sweep(resolution=200)


class TestBoundaryValues:
    def test_region_vi_point(self):
        bv = boundary_values(0.75, 2.5)
        assert bv.b3 == pytest.approx(0.875, abs=1e-15)
        assert bv.b4 == pytest.approx(-0.125, abs=1e-15)
        assert bv.b5 == pytest.approx(0.359375, abs=1e-14)

    def test_on_curve(self):
        bv = boundary_values(0.5, 2.0)
        assert bv.b3 == 0.0
        assert bv.near() == ("B3",)

    def test_region_vii_point(self):
        assert boundary_values(0.9, 2.5).b4 == pytest.approx(0.25, abs=1e-15)

    @given(viewport)
    def test_b5_is_mixture_eigenvalue_numerator(self, pt):
        beta, z = pt
        d = 1 + 2 * beta * z - 5 * beta
        if d <= 1e-6:
            return
        lam2 = closed_form_eigenpairs_3(GameParams(z=z, beta=beta))["polymorphic"][1][0]
        b5 = boundary_values(beta, z).b5
        # the numerator of lambda2 * gamma * d equals -B5
        assert abs(lam2 * (1 - beta) * d + b5) < 1e-10 * max(1.0, abs(b5))

    def test_b5_identity_on_random_draws(self, rng):
        checked = 0
        for beta, z in zip(rng.uniform(0.01, 0.99, 1000), rng.uniform(0.0, 4.5, 1000)):
            d = 1 + 2 * beta * z - 5 * beta
            if d <= 1e-9:
                continue
            lam2 = closed_form_eigenpairs_3(GameParams(z=z, beta=beta))["polymorphic"][1][0]
            b5 = boundary_values(beta, z).b5
            assert abs(lam2 * (1 - beta) * d + b5) < 1e-10 * max(1.0, abs(b5))
            if abs(b5) > 1e-9:
                assert np.sign(b5) == -np.sign(lam2)
            checked += 1
        assert checked > 500


class TestClassify:
    @pytest.mark.parametrize("beta, z, name", [(0.75, 2.5, "VI"), (0.9, 2.5, "VII"), (0.1, 3.5, "I")])
    def test_examples(self, beta, z, name):
        assert classify_region(beta, z) == RegionLabel(name)

    def test_region_i_has_only_origin_attracting(self):
        reps = fixed_points_3(GameParams(z=3.5, beta=0.1))
        by = {r.point.name: r for r in reps}
        assert max(v.real for v in by["{1,0}"].eigenvalues) > 0
        assert max(v.real for v in by["{0,1}"].eigenvalues) > 0
        assert not any(r.stability is Stability.STABLE for r in reps)

    @pytest.mark.parametrize("name", REGIONS)
    def test_samples_are_in_their_region(self, name):
        assert classify_region(*REGION_SAMPLES[name]).name == name

    def test_boundary_label(self):
        lab = classify_region(0.5, 2.0)
        assert lab.is_boundary and str(lab) == "Boundary(B3)"

    def test_boundary_tolerance(self):
        assert classify_region(0.5, 2.0 + 1e-8).name == "V"
        assert classify_region(0.5, 2.0 + 1e-10).is_boundary

    @pytest.mark.parametrize("beta", [0.0, 1.0, -0.2])
    def test_beta_range(self, beta):
        with pytest.raises(ValidationError):
            classify_region(beta, 2.0)

    def test_unknown_signature(self, monkeypatch):
        table = dict(CALIBRATION)
        del table[stability_signature(0.75, 2.5).key()]
        monkeypatch.setattr(atlas, "CALIBRATION", table)
        with pytest.raises(UnknownSignature):
            classify_region(0.75, 2.5)

    def test_calibration_is_a_bijection(self):
        assert sorted(CALIBRATION.values(), key=REGIONS.index) == list(REGIONS)

    @given(viewport)
    def test_full_viewport_coverage(self, pt):
        lab = classify_region(*pt)
        assert lab.is_boundary or lab.name in REGIONS

    def test_label_is_determined_by_sign_vector(self, rng):
        seen = {}
        for beta, z in zip(rng.uniform(0.02, 0.98, 4000), rng.uniform(0.05, 4.0, 4000)):
            lab = classify_region(beta, z)
            if lab.is_boundary:
                continue
            seen.setdefault(boundary_values(beta, z).signs(), set()).add(lab.name)
        assert all(len(v) == 1 for v in seen.values())
        assert len(seen) == 10

    @pytest.mark.parametrize("name", REGIONS)
    def test_ten_points_per_component_agree(self, name, rng):
        beta0, z0 = REGION_SAMPLES[name]
        signs = boundary_values(beta0, z0).signs()
        hits = 0
        while hits < 10:
            beta = float(np.clip(beta0 + rng.normal(0, 0.05), 0.01, 0.99))
            z = float(np.clip(z0 + rng.normal(0, 0.1), 0.01, 4.5))
            if boundary_values(beta, z).signs() != signs:
                continue
            assert classify_region(beta, z).name == name
            hits += 1


class TestSweep:
    def test_ten_labels(self, sweep):
        assert sweep.distinct() == set(REGIONS)

    def test_small_beta_large_z_is_region_i(self):
        grid = atlas_sweep((0.01, 0.2), (3.05, 4.0), resolution=20)
        assert grid.distinct(include_boundary=True) == {"I"}

    def test_label_changes_across_beta_z_one(self):
        for z in (1.5, 2.0, 2.5):
            below, above = classify_region(0.98 / z, z), classify_region(1.02 / z, z)
            assert below != above
            assert adjacent_sign_change((0.98 / z, z), (1.02 / z, z)) == ("B3",)

    def test_adjacent_cells_differ_only_across_curves(self, sweep):
        labels = np.array([[str(x) for x in row] for row in sweep.labels])
        n = len(sweep.zs)
        for i in range(n):
            for j in range(n):
                for di, dj in ((0, 1), (1, 0)):
                    if i + di >= n or j + dj >= n:
                        continue
                    if labels[i, j] != labels[i + di, j + dj]:
                        a = (sweep.betas[j], sweep.zs[i])
                        b = (sweep.betas[j + dj], sweep.zs[i + di])
                        assert adjacent_sign_change(a, b)

    def test_csv(self):
        grid = atlas_sweep(resolution=4)
        lines = grid.to_csv().splitlines()
        assert lines[0] == "beta,z,region"
        assert len(lines) == 17
        assert lines[1] == "0.125,0.5,III"

    def test_workers_agree(self):
        one = atlas_sweep(resolution=24)
        two = atlas_sweep(resolution=24, workers=2)
        assert one.to_csv() == two.to_csv()

    def test_bad_resolution(self):
        with pytest.raises(ValidationError):
            atlas_sweep(resolution=0)


class TestSeeds:
    def test_count_and_margin(self):
        seeds = simplex_seeds(3, 4)
        assert len(seeds) == 15
        for s in seeds:
            full = np.append(s, 1 - s.sum())
            assert full.min() >= 0.02 - 1e-15 and abs(full.sum() - 1) < 1e-15

    def test_four_strategy(self):
        seeds = simplex_seeds(4, 3)
        assert len(seeds) == 20 and all(len(s) == 3 for s in seeds)

    def test_density_floor(self):
        with pytest.raises(ValidationError):
            simplex_seeds(3, 1)


class TestPortrait:
    def test_region_vii_three_strategy(self):
        pt = portrait("VII", grid_density=4)
        assert pt.region == RegionLabel("VII")
        assert np.abs(pt.endpoints() - [1.0, 0.0]).max() < 1e-6

    def test_region_vi_four_strategy(self):
        pt = portrait("VI", grid_density=3, n_strategies=4)
        assert np.abs(pt.endpoints() - [0.875, 0.125, 0.0]).max() < 1e-6

    def test_region_vii_four_strategy_line(self):
        pt = portrait("VII", grid_density=3, n_strategies=4)
        ends = pt.endpoints()
        assert ends[:, 1].max() < 1e-5  # no defectors left
        assert np.abs(ends.sum(axis=1) - 1).max() < 1e-5  # no loners left

    def test_stable_points_are_marked(self):
        pt = portrait("VI", grid_density=2, cfg=IntegrationConfig(max_time=10))
        stable = [r.point.name for r in flatten_reports(pt.fixed_points) if r.stability is Stability.STABLE]
        assert stable == ["polymorphic"]
        d = pt.to_dict()
        assert d["region"] == "VI" and len(d["trajectories"]) == 6

    def test_params_for(self):
        assert params_for("VI") == GameParams(z=2.5, beta=0.75)
        with pytest.raises(ValidationError):
            params_for("XI")

    def test_bad_strategy_count(self):
        with pytest.raises(ValidationError):
            portrait("VI", n_strategies=5)


ATTRACTOR_POINTS = {"{0,0}": (0.0, 0.0), "{1,0}": (1.0, 0.0), "{0,1}": (0.0, 1.0)}


@pytest.mark.slow
@pytest.mark.parametrize("name", REGIONS)
def test_dynamics_match_attractors(name):
    pt = portrait(name, grid_density=4)
    p = pt.params
    targets = []
    for key in ATTRACTORS[name]:
        if key == "polymorphic":
            d = 1 + 2 * p.beta * p.z - 5 * p.beta
            targets.append(((p.beta * p.z - 1) / d, (p.beta * p.z + 2 - 5 * p.beta) / d))
        else:
            targets.append(ATTRACTOR_POINTS[key])
    # orbits into the non-hyperbolic origin approach it only algebraically
    tol = 2e-3 if "{0,0}" in ATTRACTORS[name] else 1e-6
    for end in pt.endpoints():
        dist = min(np.abs(end - t).max() for t in targets)
        assert dist < tol, (name, end)
