import pytest

from fallgcn.layouts import (
    JointLayout,
    LayoutError,
    builtin_layout,
    format_layout,
    load_layout,
    parse_layout,
    save_layout,
)


def test_builtin_layouts_load_and_validate():
    coco = builtin_layout("coco18")
    assert coco.joint_count == 18
    assert coco.root_joint == 1
    kinect = builtin_layout("kinect20")
    assert kinect.joint_count == 20
    assert len(kinect.edges) == 19  # tree
    stick = builtin_layout("stick9")
    assert stick.joint_count == 9


def test_unknown_builtin_lists_available():
    with pytest.raises(LayoutError, match="coco18"):
        builtin_layout("nope")


def test_roundtrip_through_file(tmp_path):
    layout = builtin_layout("coco18")
    path = tmp_path / "copy.layout"
    save_layout(layout, path)
    again = load_layout(path)
    assert again == layout


def test_parse_rejects_bad_directives():
    with pytest.raises(LayoutError, match=":2"):
        parse_layout("name x\nbogus 1 2\n")
    with pytest.raises(LayoutError, match="missing"):
        parse_layout("name x\njoints 3\n")


def test_invariants_enforced():
    with pytest.raises(LayoutError, match="self-edge"):
        JointLayout(name="x", joint_count=3, edges=((0, 0),), root_joint=0)
    with pytest.raises(LayoutError, match="duplicate"):
        JointLayout(name="x", joint_count=3, edges=((0, 1), (1, 0), (1, 2)), root_joint=0)
    with pytest.raises(LayoutError, match="exceeds"):
        JointLayout(name="x", joint_count=3, edges=((0, 5),), root_joint=0)
    with pytest.raises(LayoutError, match="not connected"):
        JointLayout(name="x", joint_count=4, edges=((0, 1), (2, 3)), root_joint=0)
    with pytest.raises(LayoutError, match="root"):
        JointLayout(name="x", joint_count=2, edges=((0, 1),), root_joint=5)


def test_edges_canonicalized_smaller_first():
    layout = JointLayout(name="x", joint_count=3, edges=((2, 1), (1, 0)), root_joint=0)
    assert layout.edges == ((1, 2), (0, 1))


def test_format_is_parseable():
    layout = builtin_layout("stick9")
    assert parse_layout(format_layout(layout)) == layout
