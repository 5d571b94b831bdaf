import sys
from pathlib import Path

import pytest

# Allow `import oracles` from any test module.
sys.path.insert(0, str(Path(__file__).parent))

from idrisk.graph import build_graph


@pytest.fixture
def three_case_graph():
    from oracles import three_case_records

    return build_graph(three_case_records())
