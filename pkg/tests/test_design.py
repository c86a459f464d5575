"""Design-matrix assembly checked against a brute-force enumeration."""

from datetime import date

import numpy as np
import pytest

from chartflow import (
    ALL_HISTORY,
    OWN_HISTORY,
    ColMeta,
    LagConfig,
    PlantSpec,
    build_design,
    build_velocities,
    default_boundary,
    fit_ols,
    generate_planted,
    predict,
    temporal_split,
)
from chartflow.design import design_csv_text
from chartflow.errors import (
    DegenerateSplitError,
    InsufficientDataError,
    UnknownCityError,
)

from conftest import make_series, week


def single_city_fixture():
    """10 consecutive weeks, 5 artists always charted, easy to enumerate."""
    counts = np.array(
        [
            [12, 7, 30, 4, 9],
            [14, 7, 28, 5, 9],
            [13, 9, 25, 5, 11],
            [15, 9, 22, 6, 11],
            [15, 10, 22, 8, 12],
            [17, 10, 20, 8, 14],
            [16, 12, 19, 9, 14],
            [18, 12, 17, 9, 15],
            [18, 13, 17, 11, 15],
            [20, 13, 15, 11, 16],
        ],
        dtype=float,
    )
    artists = ["a", "b", "c", "d", "e"]
    rows = [
        (k, "m", artists[j], int(counts[k, j]))
        for k in range(10)
        for j in range(5)
    ]
    return make_series(rows), counts, artists


class TestSingleCityFixture:
    def test_enumerated_design(self):
        series, counts, artists = single_city_fixture()
        velocities = build_velocities(series)
        assert velocities.n_weeks == 9
        design = build_design(
            velocities, "m", LagConfig(8, ALL_HISTORY, ("m",))
        )
        # Independent oracle: plain numpy normalization and differencing.
        norm = counts / np.linalg.norm(counts, axis=1, keepdims=True)
        vel = norm[1:] - norm[:-1]  # vel[i] is the change into chart week i+1

        assert design.x.shape == (5, 8)
        assert design.col_meta == tuple(ColMeta("m", lag) for lag in range(1, 9))
        assert [m.artist for m in design.row_meta] == artists
        assert all(m.week == week(9) for m in design.row_meta)
        assert design.y == pytest.approx(vel[8], abs=1e-15)
        for lag in range(1, 9):
            assert design.x[:, lag - 1] == pytest.approx(
                vel[8 - lag], abs=1e-15
            ), f"lag {lag}"

    def test_own_scope_matches(self):
        series, _, _ = single_city_fixture()
        velocities = build_velocities(series)
        own = build_design(velocities, "m", LagConfig(8, OWN_HISTORY))
        alls = build_design(velocities, "m", LagConfig(8, ALL_HISTORY, ("m",)))
        assert np.array_equal(own.x, alls.x)
        assert own.col_meta == alls.col_meta


class TestColumnCounts:
    def test_twenty_cities_gives_160_and_8(self):
        spec = PlantSpec(
            cities=tuple((f"c{i:02d}", "unlabeled") for i in range(20)),
            weeks=30,
            artists=10,
            noise_sigma=0.05,
            seed=4,
        )
        velocities = build_velocities(generate_planted(spec))
        alls = build_design(
            velocities, "c00", LagConfig(8, ALL_HISTORY, velocities.cities)
        )
        own = build_design(velocities, "c00", LagConfig(8, OWN_HISTORY))
        assert alls.x.shape[1] == 160
        assert len(alls.col_meta) == 160
        assert own.x.shape[1] == 8
        assert own.row_meta == alls.row_meta


class TestNestedColumns:
    def test_own_columns_embedded_in_all(self, small_velocities):
        target = "echo"
        own = build_design(small_velocities, target, LagConfig(8, OWN_HISTORY))
        alls = build_design(
            small_velocities,
            target,
            LagConfig(8, ALL_HISTORY, small_velocities.cities),
        )
        positions = [
            alls.col_meta.index(ColMeta(target, lag)) for lag in range(1, 9)
        ]
        assert np.array_equal(own.x, alls.x[:, positions])
        assert own.y == pytest.approx(alls.y, abs=0)


class TestEligibilityAndFill:
    def test_gap_blocks_eligibility(self):
        # Weeks 0..10 with week 5 missing: no target week has 8 defined lags.
        rows = [
            (k, "m", "a", 10 + k)
            for k in range(11)
            if k != 5
        ] + [(k, "m", "b", 20 - k) for k in range(11) if k != 5]
        velocities = build_velocities(make_series(rows))
        design = build_design(velocities, "m", LagConfig(8, OWN_HISTORY))
        assert design.n_rows == 0

    def test_other_city_undefined_lags_fill_zero(self):
        rows = []
        for k in range(10):
            rows += [(k, "m", "a", 10 + k), (k, "m", "b", 25 - k)]
            if k != 5:  # n skips week 5
                rows += [(k, "n", "a", 7 + k), (k, "n", "b", 9)]
        velocities = build_velocities(make_series(rows))
        design = build_design(
            velocities, "m", LagConfig(8, ALL_HISTORY, ("m", "n"))
        )
        assert design.n_rows == 2  # target week 9, artists a and b
        col = {meta: i for i, meta in enumerate(design.col_meta)}
        # n's velocity is undefined at weeks 5 and 6 (absent endpoint).
        assert np.all(design.x[:, col[ColMeta("n", 3)]] == 0.0)
        assert np.all(design.x[:, col[ColMeta("n", 4)]] == 0.0)
        assert np.any(design.x[:, col[ColMeta("n", 1)]] != 0.0)

    def test_active_rules(self):
        rows = []
        for k in range(10):
            rows += [(k, "m", "x", 10 + k), (k, "m", "y", 30 - k)]
            rows += [(k, "n", "x", 5), (k, "n", "z", 8 + k)]
        velocities = build_velocities(make_series(rows))
        config = LagConfig(8, ALL_HISTORY, ("m", "n"))
        target_rule = build_design(velocities, "m", config, active_rule="target")
        union_rule = build_design(velocities, "m", config, active_rule="union")
        assert sorted({m.artist for m in target_rule.row_meta}) == ["x", "y"]
        assert sorted({m.artist for m in union_rule.row_meta}) == ["x", "y", "z"]
        # z never charts in m, so its response is exactly no-change.
        z_rows = [i for i, m in enumerate(union_rule.row_meta) if m.artist == "z"]
        assert np.all(union_rule.y[z_rows] == 0.0)

    def test_no_leakage_lags_positive(self, small_velocities):
        design = build_design(
            small_velocities,
            "echo",
            LagConfig(8, ALL_HISTORY, small_velocities.cities),
        )
        assert min(c.lag for c in design.col_meta) >= 1


class TestDeterminismAndEquivariance:
    def test_bit_identical_rebuild(self, small_velocities):
        config = LagConfig(8, ALL_HISTORY, small_velocities.cities)
        a = build_design(small_velocities, "echo", config)
        b = build_design(small_velocities, "echo", config)
        assert a.x.tobytes() == b.x.tobytes()
        assert a.y.tobytes() == b.y.tobytes()
        assert a.row_meta == b.row_meta and a.col_meta == b.col_meta

    def test_city_permutation(self, small_velocities):
        cities = small_velocities.cities
        permuted = tuple(reversed(cities))
        d1 = build_design(
            small_velocities, "echo", LagConfig(4, ALL_HISTORY, cities)
        )
        d2 = build_design(
            small_velocities, "echo", LagConfig(4, ALL_HISTORY, permuted)
        )
        mapping = [d2.col_meta.index(meta) for meta in d1.col_meta]
        assert np.array_equal(d1.x, d2.x[:, mapping])
        boundary = default_boundary(small_velocities.weeks)
        s1, s2 = temporal_split(d1, boundary), temporal_split(d2, boundary)
        p1 = predict(s1.test.x, fit_ols(s1.train.x, s1.train.y))
        p2 = predict(s2.test.x, fit_ols(s2.train.x, s2.train.y))
        assert p1 == pytest.approx(p2, abs=1e-10)


class TestErrors:
    def test_unknown_target(self, small_velocities):
        with pytest.raises(UnknownCityError):
            build_design(small_velocities, "atlantis", LagConfig(8, OWN_HISTORY))

    def test_unknown_included_city(self, small_velocities):
        config = LagConfig(8, ALL_HISTORY, ("echo", "atlantis"))
        with pytest.raises(UnknownCityError):
            build_design(small_velocities, "echo", config)

    def test_too_few_weeks(self):
        rows = [(k, "m", "a", 5 + k) for k in range(5)] + [
            (k, "m", "b", 9) for k in range(5)
        ]
        velocities = build_velocities(make_series(rows))
        with pytest.raises(InsufficientDataError):
            build_design(velocities, "m", LagConfig(8, OWN_HISTORY))

    def test_bad_active_rule(self, small_velocities):
        with pytest.raises(ValueError):
            build_design(
                small_velocities, "echo", LagConfig(8, OWN_HISTORY), "both"
            )

    def test_bad_config(self):
        with pytest.raises(ValueError):
            LagConfig(0, OWN_HISTORY)
        with pytest.raises(ValueError):
            LagConfig(8, "some_history")
        with pytest.raises(ValueError):
            LagConfig(8, ALL_HISTORY, ())


class TestTemporalSplit:
    def test_partition_and_order(self, small_velocities):
        design = build_design(
            small_velocities,
            "echo",
            LagConfig(8, ALL_HISTORY, small_velocities.cities),
        )
        boundary = default_boundary(small_velocities.weeks)
        split = temporal_split(design, boundary)
        assert split.train.n_rows + split.test.n_rows == design.n_rows
        assert all(m.week < boundary for m in split.train.row_meta)
        assert all(m.week >= boundary for m in split.test.row_meta)
        rejoined = split.train.row_meta + split.test.row_meta
        assert rejoined == design.row_meta  # order preserved within parts
        assert split.train.col_meta == split.test.col_meta == design.col_meta
        stacked = np.vstack([split.train.x, split.test.x])
        assert np.array_equal(stacked, design.x)

    def test_boundary_before_everything(self, small_velocities):
        design = build_design(small_velocities, "echo", LagConfig(8, OWN_HISTORY))
        with pytest.raises(DegenerateSplitError):
            temporal_split(design, date(2000, 1, 1))

    def test_boundary_after_everything(self, small_velocities):
        design = build_design(small_velocities, "echo", LagConfig(8, OWN_HISTORY))
        with pytest.raises(DegenerateSplitError):
            temporal_split(design, date(2030, 1, 1))

    def test_two_thirds_default(self):
        weeks = [week(k) for k in range(156)]
        assert default_boundary(weeks) == week(104)


def test_design_csv_dump():
    series, _, _ = single_city_fixture()
    velocities = build_velocities(series)
    design = build_design(velocities, "m", LagConfig(2, OWN_HISTORY))
    text = design_csv_text(design)
    header = text.splitlines()[0]
    assert header == "artist,week,y,m@lag1,m@lag2"
    assert len(text.splitlines()) == design.n_rows + 1
