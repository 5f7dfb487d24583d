from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def write_kb_dir(path, surfaces="", sameas="", propcounts="", types="", subclass="", roots=""):
    """Create a KB directory from raw TSV bodies (header comment added)."""
    path.mkdir(parents=True, exist_ok=True)
    for name, body in [("surfaces", surfaces), ("sameas", sameas), ("propcounts", propcounts),
                       ("types", types), ("subclass", subclass), ("roots", roots)]:
        (path / f"{name}.tsv").write_text(f"# {name}\n" + body, encoding="utf-8")
    return path
