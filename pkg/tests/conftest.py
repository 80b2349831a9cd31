import numpy as np
import pytest

from ptpolar.codec import Codec
from ptpolar.construction import CodeSpec

# Filled by the acceptance tests, printed once at the end of the session.
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_codec(n, K, K_crc=0, flavor="polar", pt_seed=None, density=0.5, **kw):
    pt = None if pt_seed is None else {"kind": "random", "seed": pt_seed, "density": density}
    return Codec.from_spec(CodeSpec(n=n, K=K, K_crc=K_crc, flavor=flavor, pretransform=pt, **kw))
