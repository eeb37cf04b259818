"""Shared pytest options for the seasolr test suite.

Monte-Carlo reproduction runs are marked ``slow`` and only execute with
``--run-slow``.

Output tables and fitted models are compared with pysnaptest snapshots under
``tests/snapshots/``. Unless ``INSTA_UPDATE`` or one of pysnaptest's
``--snapshot-update``/``--snapshot-new`` flags says otherwise, missing
snapshots are recorded and changed ones fail with a ``.snap.new`` file to
review.
"""

from __future__ import annotations

import os

import pytest


def pytest_addoption(parser: "pytest.Parser") -> None:
    """Register seasolr's command-line options."""

    group = parser.getgroup("seasolr", "seasolr test options")
    group.addoption(
        "--run-slow",
        action="store_true",
        default=False,
        help="Run the Monte-Carlo reproduction tests (minutes).",
    )


def pytest_configure(config: "pytest.Config") -> None:
    config.addinivalue_line("markers", "slow: Monte-Carlo reproduction runs")
    if os.environ.get("INSTA_UPDATE"):
        return
    if config.getoption("--snapshot-update", default=False) or config.getoption("--snapshot-new", default=False):
        return
    os.environ["INSTA_UPDATE"] = "unseen"


def pytest_collection_modifyitems(config: "pytest.Config", items) -> None:
    if config.getoption("--run-slow"):
        return
    skip = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)
