"""Kernel backend contract: both implementations, one behaviour.

The compiled extension and the numpy fallback must agree bit-for-bit
on nothing less than 1e-12, be individually deterministic, and respond
to the SERKIT_KERNELS override. Parity tests are skipped (loudly) when
the extension was not built in this install.
"""

import os
import subprocess
import sys

import numpy as np
import pytest

from serkit.nn import _kernels_py
from serkit.nn._backend import available_backends, backend_name, kernels

HAS_COMPILED = "compiled" in available_backends()
needs_compiled = pytest.mark.skipif(not HAS_COMPILED, reason="compiled extension not built")


def lstm_inputs(seed, t_steps=6, batch=3, hidden=4):
    rng = np.random.default_rng(seed)
    xp = rng.standard_normal((t_steps, batch, 4 * hidden))
    wh = 0.4 * rng.standard_normal((hidden, 4 * hidden))
    h0 = rng.standard_normal((batch, hidden))
    c0 = rng.standard_normal((batch, hidden))
    return xp, wh, h0, c0


def conv_inputs(seed, batch=2, t_steps=11, c_in=3, c_out=5, k=4):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((batch, t_steps, c_in))
    w = rng.standard_normal((k, c_in, c_out))
    b = rng.standard_normal(c_out)
    return x, w, b


class TestActiveBackend:
    def test_name_is_declared(self):
        assert backend_name() in ("python", "compiled")
        assert kernels.NAME == backend_name()

    def test_python_fallback_is_always_available(self):
        assert "python" in available_backends()
        assert available_backends()["python"] is _kernels_py


@needs_compiled
class TestParity:
    """Same arithmetic from both backends on identical inputs."""

    def backends(self):
        both = available_backends()
        return both["python"], both["compiled"]

    def test_lstm_forward_parity(self):
        py, cy = self.backends()
        xp, wh, h0, c0 = lstm_inputs(90)
        h_a, c_a, g_a = py.lstm_loop_forward(xp, wh, h0, c0)
        h_b, c_b, g_b = cy.lstm_loop_forward(xp, wh, h0, c0)
        assert np.allclose(h_a, h_b, atol=1e-12, rtol=0.0)
        assert np.allclose(c_a, c_b, atol=1e-12, rtol=0.0)
        assert np.allclose(g_a, g_b, atol=1e-12, rtol=0.0)

    def test_lstm_backward_parity(self):
        py, cy = self.backends()
        xp, wh, h0, c0 = lstm_inputs(91)
        h, c, gates = py.lstm_loop_forward(xp, wh, h0, c0)
        dh = np.random.default_rng(92).standard_normal(h.shape)
        out_a = py.lstm_loop_backward(dh, h, c, gates, wh, h0, c0)
        out_b = cy.lstm_loop_backward(dh, h, c, gates, wh, h0, c0)
        for a, b in zip(out_a, out_b):
            assert np.allclose(a, b, atol=1e-12, rtol=0.0)

    def test_conv1d_parity(self):
        py, cy = self.backends()
        x, w, b = conv_inputs(93)
        for stride in (1, 2, 3):
            y_a = py.conv1d_forward(x, w, b, stride)
            y_b = cy.conv1d_forward(x, w, b, stride)
            assert np.allclose(y_a, y_b, atol=1e-12, rtol=0.0)
            dy = np.random.default_rng(94).standard_normal(y_a.shape)
            for a, b2 in zip(py.conv1d_backward(x, w, stride, dy),
                             cy.conv1d_backward(x, w, stride, dy)):
                assert np.allclose(a, b2, atol=1e-12, rtol=0.0)

    def test_maxpool1d_parity(self):
        py, cy = self.backends()
        x, _, _ = conv_inputs(95)
        for pool, stride in [(2, 2), (3, 1)]:
            y_a, arg_a = py.maxpool1d_forward(x, pool, stride)
            y_b, arg_b = cy.maxpool1d_forward(x, pool, stride)
            assert np.allclose(y_a, y_b, atol=0.0, rtol=0.0)
            assert np.array_equal(np.asarray(arg_a), np.asarray(arg_b))
            dy = np.random.default_rng(96).standard_normal(y_a.shape)
            dx_a = py.maxpool1d_backward(dy, arg_a, x.shape[1])
            dx_b = cy.maxpool1d_backward(dy, arg_b, x.shape[1])
            assert np.allclose(dx_a, dx_b, atol=0.0, rtol=0.0)


class TestDeterminism:
    def test_lstm_repeat_runs_are_bit_identical(self):
        xp, wh, h0, c0 = lstm_inputs(97)
        h1, c1, g1 = kernels.lstm_loop_forward(xp, wh, h0, c0)
        h2, c2, g2 = kernels.lstm_loop_forward(xp, wh, h0, c0)
        assert np.array_equal(h1, h2)
        assert np.array_equal(c1, c2)
        assert np.array_equal(g1, g2)

    def test_conv_repeat_runs_are_bit_identical(self):
        x, w, b = conv_inputs(98)
        y1 = kernels.conv1d_forward(x, w, b, 2)
        y2 = kernels.conv1d_forward(x, w, b, 2)
        assert np.array_equal(y1, y2)


class TestEnvOverride:
    """SERKIT_KERNELS decides the backend at import time, so each case
    gets a fresh interpreter."""

    def run_probe(self, env_value):
        env = dict(os.environ)
        if env_value is None:
            env.pop("SERKIT_KERNELS", None)
        else:
            env["SERKIT_KERNELS"] = env_value
        probe = ("from serkit.nn._backend import backend_name;"
                 "print(backend_name())")
        return subprocess.run([sys.executable, "-c", probe], env=env,
                              capture_output=True, text=True)

    def test_force_python(self):
        result = self.run_probe("python")
        assert result.returncode == 0, result.stderr
        assert result.stdout.strip() == "python"

    @needs_compiled
    def test_force_compiled(self):
        result = self.run_probe("compiled")
        assert result.returncode == 0, result.stderr
        assert result.stdout.strip() == "compiled"

    @needs_compiled
    def test_default_prefers_compiled(self):
        result = self.run_probe(None)
        assert result.returncode == 0, result.stderr
        assert result.stdout.strip() == "compiled"
