import os
import sys

import pytest

# Heavy Monte Carlo matrices are cached inside the repo so repeated test runs
# do not recompute them; the directory is gitignored.
_REPO_CACHE = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                           ".fracidx-cache")
os.environ.setdefault("FRACIDX_CACHE_DIR", _REPO_CACHE)


def pytest_addoption(parser):
    parser.addoption(
        "--skip-slow", action="store_true", default=False,
        help="skip the long-running Monte Carlo tests (acceptance suite still "
             "requires a full run)",
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running Monte Carlo test")


def pytest_collection_modifyitems(config, items):
    if not config.getoption("--skip-slow"):
        return
    marker = pytest.mark.skip(reason="--skip-slow given")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(marker)
