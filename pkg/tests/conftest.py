"""Shared fixtures and the acceptance-line terminal report."""

import numpy as np
import pytest

from d2dpower.netgen import NetworkInstance


def toy_net(gain, noise=1.0) -> NetworkInstance:
    """Instance from a bare gain matrix; positions are placeholders."""
    gain = np.asarray(gain, dtype=float)
    k = gain.shape[0]
    return NetworkInstance(
        k_links=k,
        tx_pos=np.zeros((k, 2)),
        rx_pos=np.ones((k, 2)),
        gain=gain,
        noise_power=float(noise),
        seed=None,
    )


@pytest.fixture
def record_criterion(request):
    """Collect one [PASS]/[FAIL] line per acceptance criterion; the lines
    are replayed as a terminal section after the run."""
    lines = getattr(request.config, "_acceptance_lines", None)
    if lines is None:
        lines = []
        request.config._acceptance_lines = lines

    def record(name: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
