import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from synth import detailed_image  # noqa: E402
from trainedfilter.frame_io import write_pgm  # noqa: E402

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    number, title = marker
    passed, _ = _criteria.get(number, (True, title))
    if report.failed or (report.when == "call" and report.skipped):
        passed = False
    _criteria[number] = (passed, title)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        report.criterion = m.args


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        passed, title = _criteria[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {title}")


@pytest.fixture(scope="session")
def corpus_dirs(tmp_path_factory):
    """Ten 512x512 training images and five held-out test images, as PGM."""
    root = tmp_path_factory.mktemp("corpus")
    train, test = root / "train", root / "test"
    train.mkdir()
    test.mkdir()
    for seed in range(10):
        write_pgm(detailed_image(seed), train / f"train{seed:02d}.pgm")
    for seed in range(5):
        write_pgm(detailed_image(100 + seed), test / f"test{seed}.pgm")
    return train, test
