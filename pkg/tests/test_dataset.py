"""The reference bundle generator is deterministic and matches the checked-in data."""

from pathlib import Path

from modalmesh.dataset import build_reference_manifest, design_rows


def _file_map(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


def test_two_builds_are_byte_identical(tmp_path):
    first = build_reference_manifest(tmp_path / "a")
    second = build_reference_manifest(tmp_path / "b")
    assert _file_map(first.parent) == _file_map(second.parent)


def test_build_matches_checked_in_bundle(tmp_path, bundle_dir):
    fresh = build_reference_manifest(tmp_path / "fresh")
    rebuilt = _file_map(fresh.parent)
    checked_in = _file_map(bundle_dir)
    assert sorted(rebuilt) == sorted(checked_in)
    differing = [name for name in checked_in if rebuilt[name] != checked_in[name]]
    assert differing == []


def test_design_rows_cover_every_task():
    rows = design_rows()
    assert len(rows) == 50
    assert len({row["id"] for row in rows}) == 50
