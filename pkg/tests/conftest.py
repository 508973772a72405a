import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from epiportrait.config import AppConfig
from epiportrait.ingest import generate_fixture


@pytest.fixture(scope="session")
def snap10():
    return generate_fixture(42, 10, 140)


@pytest.fixture(scope="session")
def snap128():
    return generate_fixture(7, 128, 742)


def config_for(snapshot, granularity="weekly") -> AppConfig:
    return AppConfig(window_start=snapshot.window[0],
                     window_end=snapshot.window[1], granularity=granularity)


@pytest.fixture(scope="session")
def bundle10(snap10):
    from epiportrait.service import SnapshotBundle
    return SnapshotBundle(snap10, config_for(snap10))


@pytest.fixture(scope="session")
def bundle128(snap128):
    from epiportrait.service import SnapshotBundle
    return SnapshotBundle(snap128, config_for(snap128))
