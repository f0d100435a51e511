import re
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given
from hypothesis import strategies as st

from eager.errors import InputError
from eager.evaluation.cddiagram import cd_diagram, render_cd_svg

NS = "{http://www.w3.org/2000/svg}"


def bars(svg):
    return [e for e in ET.fromstring(svg).iter(f"{NS}line") if e.get("class") == "group"]


def labels(svg):
    return [e.text for e in ET.fromstring(svg).iter(f"{NS}text") if e.get("class") == "method"]


def test_all_equal_ranks_single_bar():
    svg = render_cd_svg([2.0, 2.0, 2.0], ["a", "b", "c"], 0.5)
    assert len(bars(svg)) == 1


def test_gap_above_cd_no_bar():
    assert bars(render_cd_svg([1.0, 2.0], ["a", "b"], 0.5)) == []


def test_labels_escaped_and_ordered_by_rank():
    svg = render_cd_svg([2.5, 1.0, 2.5], ["x<y", "best", "z"], 1.0)
    out = labels(svg)
    assert out[0].startswith("best") and any(s.startswith("x<y") for s in out)
    assert "x&lt;y" in svg


def test_rank_out_of_range_rejected():
    with pytest.raises(InputError):
        render_cd_svg([0.5, 2.0], ["a", "b"], 1.0)
    with pytest.raises(InputError):
        render_cd_svg([1.0], ["a"], 1.0)


@given(st.lists(st.integers(4, 20).map(lambda v: v / 4), min_size=2, max_size=5).filter(lambda r: max(r) <= len(r)), st.floats(0.1, 3))
def test_rendering_is_deterministic_well_formed_svg(ranks, cd):
    names = [f"m{i}" for i in range(len(ranks))]
    a = render_cd_svg(ranks, names, cd)
    assert a == render_cd_svg(ranks, names, cd)
    root = ET.fromstring(a)
    assert root.tag == f"{NS}svg"
    assert len(labels(a)) == len(ranks)


def test_file_written_byte_identical(tmp_path):
    p1 = cd_diagram([1.2, 2.0, 2.8], ["a", "b", "c"], 1.0, tmp_path / "a.svg")
    p2 = cd_diagram([1.2, 2.0, 2.8], ["a", "b", "c"], 1.0, tmp_path / "b.svg")
    assert p1.read_bytes() == p2.read_bytes()
    assert re.search(r"CD = 1\.000", p1.read_text(encoding="utf-8"))
