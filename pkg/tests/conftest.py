import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import constrained_lq.bench  # noqa: F401  (loaded so it is skipped below, not patched later)
import constrained_lq.cli  # noqa: F401
import constrained_lq.controller as _controller
from constrained_lq.verification import projection_defects

settings.register_profile("default", max_examples=50, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("fast", max_examples=10, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES = []

# Worst projection defects over every schedule synthesized anywhere in the
# session. Timing code keeps the unwrapped function so benchmarks are unaffected.
PROJECTION_RECORD = {"schedules": 0, "hard_steps": 0, "ann": 0.0, "off": 0.0, "idem": 0.0}
_backward_pass = _controller.backward_pass


def _recording_backward_pass(scenario):
    gs = _backward_pass(scenario)
    ann, off, idem = projection_defects(gs)
    rec = PROJECTION_RECORD
    rec["schedules"] += 1
    rec["hard_steps"] += sum(m.is_hard for m in gs.modes)
    rec["ann"], rec["off"], rec["idem"] = max(rec["ann"], ann), max(rec["off"], off), max(rec["idem"], idem)
    return gs


for _name, _mod in list(sys.modules.items()):
    if _name.startswith("constrained_lq") and _name != "constrained_lq.bench" \
            and getattr(_mod, "backward_pass", None) is _backward_pass:
        _mod.backward_pass = _recording_backward_pass


def pytest_collection_modifyitems(items):
    # the suite-wide projection check must see every other test's schedules
    last = [i for i in items if i.name == "test_criterion_4_projection_algebra"]
    items[:] = [i for i in items if i not in last] + last


@pytest.fixture
def record_criterion():
    """Append a one-line pass/fail verdict shown in the terminal summary."""

    def record(number, title, passed, detail):
        ACCEPTANCE_LINES.append(
            f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} -- {detail}"
        )
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
