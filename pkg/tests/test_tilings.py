import xml.etree.ElementTree as ET
from fractions import Fraction

import pytest

from tasep_rewind.core import InterlacingArray, Partition, RngStream, packed_array
from tasep_rewind.markov_maps import SpectralParams, letter_plan, longest_word, swap_level
from tasep_rewind.tilings import (
    HexTiling,
    enumerate_tilings,
    hexagon_top_row,
    packed_hex_array,
    plane_partition,
    qvol_distribution,
    render_svg,
    sample_vol_mcmc,
    verify_measure_swap,
    vol,
)


class TestVol:
    def test_all_zero_array(self):
        assert sum(r.size for r in packed_array(4).rows[:-1]) == 0

    def test_unit_hexagon_volumes(self):
        tilings = enumerate_tilings(1, 1, 1)
        assert sorted(vol(t) for t in tilings) == [0, 1]

    def test_maximal_tiling_unique_maximum(self):
        tilings = enumerate_tilings(2, 2, 2)
        vols = [vol(t) for t in tilings]
        top = max(vols)
        assert vols.count(top) == 1
        best = tilings[vols.index(top)]
        # every row maximal under interlacing: row j equals min(row above, length j)
        for j in range(1, best.array.depth):
            expected = tuple(
                min(int(best.array.entry(j + 1, k)), 99) for k in range(1, j + 1)
            )
            assert best.array.row(j).parts == tuple(v for v in expected if v)

    def test_volume_matches_plane_partition(self):
        a, b, c = 2, 2, 2
        for t in enumerate_tilings(a, b, c):
            pi_sum = sum(sum(row) for row in plane_partition(t))
            assert vol(t) == pi_sum + b * a * (a - 1) // 2


class TestEnumerate:
    def test_unit_count(self):
        assert len(enumerate_tilings(1, 1, 1)) == 2

    def test_two_cube_count(self):
        assert len(enumerate_tilings(2, 2, 2)) == 20

    def test_macmahon_box_counts(self):
        def macmahon(a, b, c):
            out = 1.0
            for i in range(1, a + 1):
                for j in range(1, b + 1):
                    for k in range(1, c + 1):
                        out *= (i + j + k - 1) / (i + j + k - 2)
            return round(out)

        for dims in [(1, 2, 2), (2, 1, 3), (3, 2, 2)]:
            assert len(enumerate_tilings(*dims)) == macmahon(*dims)

    def test_q_one_uniform(self):
        tilings = enumerate_tilings(2, 2, 2)
        dist = qvol_distribution(tilings, Fraction(1), sign=1)
        assert all(w == Fraction(1, 20) for w in dist.weights)

    def test_cap(self):
        with pytest.raises(ValueError):
            enumerate_tilings(2, 2, 2, cap=5)


class TestMeasureSwap:
    def test_exact_swap_and_t2(self):
        report = verify_measure_swap(2, 2, 2, Fraction(4, 5))
        assert report["count"] == 20
        assert report["tv_swap"] == 0
        assert report["tv_t2"] == 0

    def test_per_letter_left_moves(self):
        # geometric parameters: every letter resolves to L and rows move left
        a, b, c = 2, 2, 2
        q = 0.8
        n = a + c
        params = SpectralParams.geometric(n, q)
        plan, _ = letter_plan(params.c, longest_word(n))
        assert all(direction == "L" for _, direction, _ in plan)
        for i in range(40):
            arr = enumerate_tilings(a, b, c)[i % 20].array
            rng = RngStream(99, i)
            for row_j, direction, alpha in plan:
                before = arr.row(row_j)
                arr = swap_level(arr, row_j, alpha, direction, rng)
                after = arr.row(row_j)
                assert all(after.part(k) <= before.part(k) for k in range(1, row_j + 1))

    def test_mcmc_sampler_reaches_exact_vol_law(self):
        from collections import Counter

        from tasep_rewind.stats import chi_square_fit

        tilings = enumerate_tilings(2, 2, 2)
        exact = qvol_distribution(tilings, Fraction(4, 5), sign=-1)
        probs = {}
        for t, w in zip(tilings, exact.weights):
            probs[vol(t)] = probs.get(vol(t), 0.0) + float(w)
        vols = sample_vol_mcmc(2, 2, 2, 0.8, 20_000, 24, seed=1234)
        rep = chi_square_fit(Counter(int(v) for v in vols), probs)
        assert rep.p_value > 1e-3


class TestHexTiling:
    def test_top_row_enforced(self):
        with pytest.raises(ValueError):
            HexTiling(1, 1, 1, InterlacingArray.from_lists([[0], [0, 0]]))

    def test_packed_is_valid(self):
        t = HexTiling(2, 3, 2, packed_hex_array(2, 3, 2))
        assert vol(t) == 3  # frozen wall rows contribute b * a(a-1)/2

    def test_top_row_shape(self):
        assert hexagon_top_row(2, 3, 4) == Partition((3, 3))


class TestRenderSvg:
    def test_unit_tiling_has_three_lozenges(self):
        t = enumerate_tilings(1, 1, 1)[0]
        svg = render_svg(t)
        assert svg.count("<polygon") == 3

    def test_parses_as_xml_with_classes(self):
        t = enumerate_tilings(2, 2, 2)[7]
        svg = render_svg(t)
        root = ET.fromstring(svg)
        assert root.tag.endswith("svg")
        classes = {poly.get("class") for poly in root.iter() if poly.tag.endswith("polygon")}
        assert classes == {"top", "side-a", "side-b"}
        assert svg.count("<polygon") == 2 * 2 + 2 * 2 + 2 * 2

    def test_deterministic_output(self):
        t = enumerate_tilings(2, 2, 2)[3]
        assert render_svg(t) == render_svg(t)

    def test_profile_rendering(self):
        svg = render_svg([(-1.0, 1.0), (0.0, 0.5), (1.0, 1.0)])
        assert "<polyline" in svg
        ET.fromstring(svg)
