# tests/test_tbc_maps.py
from __future__ import annotations
import math
import unittest

import numpy as np

from apps.schrotbc.convquad import cq_weights
from apps.schrotbc.errors import ContractViolation
from apps.schrotbc.models import DomainSpec, Method, RobinData, SchemeSpec, Stagger, TimeGrid
from apps.schrotbc.ratapprox import np_robin_constants, pade_sqrt_table
from apps.schrotbc.specfun import TensorGrid, lgl_grid
from apps.schrotbc.tbc_maps import (AuxBankCP, AuxBankCQ, AuxBankNP, BoundaryContext, CpBoundary,
                                    CqBoundary, HfBoundary, NpBoundary, TraceHistory,
                                    alpha_coefficient, cp_boundary_step, cp_commit,
                                    cp_robin_constants, cq_boundary_step, cq_commit,
                                    hf_boundary_step, hf_commit, make_boundary,
                                    np_boundary_step, np_commit)
from tests.conftest import SEED


def context(method: Method, rho: float, s) -> BoundaryContext:
    return BoundaryContext(method=method, rho=rho, alpha1=alpha_coefficient(rho, 1.0),
                           s=np.asarray(s, dtype=complex))


def random_traces(rng, steps: int, nmodes: int) -> np.ndarray:
    shape = (steps, 2, nmodes)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class AlphaTests(unittest.TestCase):
    def test_elliptic(self):
        a = alpha_coefficient(4.0, 1.0)
        self.assertAlmostEqual(a, 2 * np.exp(-0.25j * np.pi), places=14)
        self.assertAlmostEqual(a ** -2, 0.25j, places=14)

    def test_hyperbolic_branch(self):
        a = alpha_coefficient(4.0, -1.0)
        self.assertAlmostEqual(a ** -2, -0.25j, places=14)
        self.assertGreater(a.real, 0.0)

    def test_context_from_run(self):
        domain = DomainSpec(-10.0, 10.0, (math.pi,))
        timegrid = TimeGrid(1.0, 11, Method.BDF1)
        grid = TensorGrid(lgl_grid(4), (8,))
        ctx = BoundaryContext.from_run(domain, timegrid, grid)
        self.assertAlmostEqual(ctx.rho, 10.0, places=12)
        m = grid.mode_numbers()[0]
        np.testing.assert_allclose(ctx.s, 1j * m ** 2 / 10.0, atol=1e-14)
        self.assertAlmostEqual(ctx.alpha1, math.sqrt(1000.0) * np.exp(-0.25j * np.pi), places=10)
        self.assertIs(ctx.stagger, Stagger.WHOLE_STEP)
        self.assertIs(context(Method.TR, 1.0, [0]).stagger, Stagger.STAGGERED)


class CqMapTests(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(SEED)

    def test_zero_trace(self):
        ctx = context(Method.BDF1, 4.0, [0, 0.2j, 0.8j])
        bank = AuxBankCQ.create(8, np.zeros((2, 3)))
        weights = cq_weights(Method.BDF1, 0.5, 8)
        for j in range(6):
            r = cq_boundary_step(ctx, bank, weights, j)
            np.testing.assert_array_equal(r.history, 0)
            np.testing.assert_allclose(r.kappa, ctx.alpha1)
            cq_commit(bank, np.zeros((2, 3)))
        self.assertEqual(bank.step, 6)
        self.assertEqual(bank.live.shape[0], 7)

    def test_mode_zero_is_plain_cq_sum(self):
        ctx = context(Method.BDF1, 2.0, [0])
        u = random_traces(self.rng, 6, 1)
        w = cq_weights(Method.BDF1, 0.5, 6).weights
        bank = AuxBankCQ.create(6, u[0])
        for j in range(5):
            r = cq_boundary_step(ctx, bank, cq_weights(Method.BDF1, 0.5, 6), j)
            expect = sum(w[k] * u[j + 1 - k] for k in range(1, j + 2))
            np.testing.assert_allclose(r.history, expect, atol=1e-13)
            cq_commit(bank, u[j + 1])

    def _brute_force(self, method: Method):
        s = np.array([0.3j, -0.2 + 0.1j])
        ctx = context(method, 3.0, s)
        D = 1 + s
        mult = 1 / D if method is Method.BDF1 else (1 - s) / D
        u = random_traces(self.rng, 4, 2)
        weights = cq_weights(method, 0.5, 4)
        w = weights.weights
        bank = AuxBankCQ.create(4, u[0])
        fresh_prev = np.zeros((2, 2), dtype=complex)
        for j in range(3):
            r = cq_boundary_step(ctx, bank, weights, j)
            # re-propagate every diagonal seed u^{j+1−k} through k steps
            fresh = sum(w[k] * mult ** k * u[j + 1 - k] for k in range(1, j + 2))
            expect = fresh if method is Method.BDF1 else 0.5 * (fresh + fresh_prev)
            np.testing.assert_allclose(r.history, expect, atol=1e-13)
            fresh_prev = fresh
            cq_commit(bank, u[j + 1])

    def test_brute_force_bdf1(self):
        self._brute_force(Method.BDF1)

    def test_brute_force_tr(self):
        self._brute_force(Method.TR)

    def test_out_of_step(self):
        ctx = context(Method.BDF1, 1.0, [0])
        bank = AuxBankCQ.create(4, np.zeros((2, 1)))
        with self.assertRaises(ContractViolation):
            cq_boundary_step(ctx, bank, cq_weights(Method.BDF1, 0.5, 4), 2)

    def test_capacity(self):
        bank = AuxBankCQ.create(2, np.zeros((2, 1)))
        cq_commit(bank, np.zeros((2, 1)))
        with self.assertRaises(ContractViolation):
            cq_commit(bank, np.zeros((2, 1)))


class NpMapTests(unittest.TestCase):
    def test_zero_state(self):
        for method in Method:
            ctx = context(method, 5.0, [0, 0.4j])
            constants = np_robin_constants(pade_sqrt_table(20), 5.0)
            bank = AuxBankNP.create(20, 2)
            r = np_boundary_step(ctx, bank, constants, 0, np.zeros((2, 2)))
            np.testing.assert_array_equal(r.history, 0)
            np.testing.assert_allclose(r.kappa, ctx.alpha1 * constants.varpi)

    def test_order_one_history(self):
        ctx = context(Method.BDF1, 1.0, [0])
        constants = np_robin_constants(pade_sqrt_table(1), 1.0)
        bank = AuxBankNP.create(1, 1)
        bank.phi[:, 0, 0] = 1.0
        r = np_boundary_step(ctx, bank, constants, 0)
        np.testing.assert_allclose(r.history, [[-2.0], [-2.0]], atol=1e-13)

    def test_tr_needs_previous_trace(self):
        ctx = context(Method.TR, 1.0, [0])
        constants = np_robin_constants(pade_sqrt_table(2), 1.0)
        with self.assertRaises(ContractViolation):
            np_boundary_step(ctx, AuxBankNP.create(2, 1), constants, 0)

    def test_rho_mismatch(self):
        ctx = context(Method.BDF1, 2.0, [0])
        constants = np_robin_constants(pade_sqrt_table(2), 1.0)
        with self.assertRaises(ContractViolation):
            np_boundary_step(ctx, AuxBankNP.create(2, 1), constants, 0)


class PadeAgainstCqTests(unittest.TestCase):
    """
    On a geometric stream u^j = λ^j the causal responses of both maps settle
    to their symbols at x = 1/λ, which coincide up to the Padé error.
    """
    LAMBDA = 1.5
    STEPS = 64

    def _stream(self, s):
        rng = np.random.default_rng(SEED)
        c = rng.standard_normal((2, len(s))) + 1j * rng.standard_normal((2, len(s)))
        return np.array([c * self.LAMBDA ** j for j in range(self.STEPS + 1)])

    def _compare(self, method: Method, s):
        u = self._stream(s)
        ctx = context(method, 1.0, s)
        weights = cq_weights(method, 0.5, self.STEPS + 1)
        cq_bank = AuxBankCQ.create(self.STEPS + 1, u[0])
        constants = np_robin_constants(pade_sqrt_table(50), 1.0)
        np_bank = AuxBankNP.create(50, len(s))
        for j in range(self.STEPS):
            new = u[j + 1] if method is Method.BDF1 else 0.5 * (u[j + 1] + u[j])
            r_cq = cq_boundary_step(ctx, cq_bank, weights, j)
            r_np = np_boundary_step(ctx, np_bank, constants, j, u[j])
            cq_commit(cq_bank, u[j + 1])
            np_commit(ctx, np_bank, constants, new, u[j])
        total_cq = r_cq.kappa * new + ctx.alpha1 * r_cq.history
        total_np = r_np.kappa * new + ctx.alpha1 * r_np.history
        np.testing.assert_allclose(total_np, total_cq, rtol=1e-8)

    def test_bdf1_single_mode(self):
        self._compare(Method.BDF1, [0])

    def test_bdf1_transverse_modes(self):
        self._compare(Method.BDF1, [0, 0.3j, 0.5j])

    def test_tr_single_mode(self):
        self._compare(Method.TR, [0])

    def test_tr_transverse_modes(self):
        self._compare(Method.TR, [0, 0.3j, 0.5j])


class CpMapTests(unittest.TestCase):
    def test_mode_zero_matches_np(self):
        ctx = context(Method.BDF1, 3.0, [0, 0.1j])
        table = pade_sqrt_table(20)
        cp = cp_robin_constants(table, ctx)
        npc = np_robin_constants(table, 3.0)
        np.testing.assert_allclose(cp.Gamma[:, 0], npc.Gamma, rtol=1e-14)
        self.assertAlmostEqual(cp.varpi[0], npc.varpi, places=13)

    def test_zero_state(self):
        ctx = context(Method.TR, 3.0, [0, 0.1j])
        cp = cp_robin_constants(pade_sqrt_table(5), ctx)
        r = cp_boundary_step(ctx, AuxBankCP.create(5, 2), cp, 0)
        np.testing.assert_array_equal(r.history, 0)

    def test_scalar_replay(self):
        rng = np.random.default_rng(SEED)
        s, rho = 0.2j, 2.0
        table = pade_sqrt_table(2)
        eta_sq = table.eta ** 2 / rho
        b_bar = table.b / math.sqrt(rho)
        gamma = -b_bar / (1 + s + eta_sq)
        for method in Method:
            ctx = context(method, rho, [s])
            cp = cp_robin_constants(table, ctx)
            bank = AuxBankCP.create(2, 1)
            phi = np.zeros((2, 2), dtype=complex)        # (wall, k)
            walls = random_traces(rng, 3, 1)
            for j in range(3):
                r = cp_boundary_step(ctx, bank, cp, j)
                np.testing.assert_allclose(r.history[:, 0], phi @ gamma, atol=1e-13)
                w = walls[j][:, 0][:, None]
                if method is Method.BDF1:
                    phi = (phi + w / rho) / (1 + s + eta_sq)
                else:
                    phi = ((1 - s - eta_sq) * phi + 2 * w / rho) / (1 + s + eta_sq)
                cp_commit(ctx, bank, cp, walls[j])


class HfMapTests(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(SEED)

    def _run(self, method: Method, s, steps: int):
        ctx = context(method, 2.0, s)
        half = cq_weights(method, 0.5, steps + 1)
        minus = cq_weights(method, -0.5, steps + 1)
        traces = random_traces(self.rng, steps + 1, len(s))
        history = TraceHistory.create(steps + 1, traces[0])
        out = []
        for j in range(steps):
            out.append(hf_boundary_step(ctx, history, half, minus, j))
            hf_commit(history, traces[j + 1])
        return ctx, half.weights, minus.weights, traces, out

    def test_mode_zero_is_cq(self):
        ctx, wh, _, traces, out = self._run(Method.BDF1, [0], 5)
        for j, r in enumerate(out):
            np.testing.assert_allclose(r.kappa, ctx.alpha1)
            expect = sum(wh[k] * traces[j + 1 - k] for k in range(1, j + 2))
            np.testing.assert_allclose(r.history, expect, atol=1e-13)

    def test_double_sum_oracle(self):
        for method in Method:
            s = 1j * 4 / 2.0                            # m = 2, rho = 2
            ctx, wh, wm, traces, out = self._run(method, [s], 8)
            for j, r in enumerate(out):
                b_half = sum(wh[k] * traces[j + 1 - k] for k in range(1, j + 2))
                b_minus = sum(wm[k] * traces[j + 1 - k] for k in range(1, j + 2))
                np.testing.assert_allclose(r.history, b_half + 0.5 * s * b_minus, atol=1e-13)
                np.testing.assert_allclose(r.kappa, ctx.alpha1 * (1 + 0.5 * s))

    def test_zero_history(self):
        ctx = context(Method.TR, 2.0, [0, 1j])
        history = TraceHistory.create(4, np.zeros((2, 2)))
        r = hf_boundary_step(ctx, history, cq_weights(Method.TR, 0.5, 4),
                             cq_weights(Method.TR, -0.5, 4), 0)
        np.testing.assert_array_equal(r.history, 0)


class DispatchTests(unittest.TestCase):
    def test_families(self):
        expected = {"CQ": CqBoundary, "NP20": NpBoundary, "CP50": CpBoundary, "HF": HfBoundary}
        for name, cls in expected.items():
            for method in Method:
                ctx = context(method, 4.0, [0, 0.25j])
                b = make_boundary(SchemeSpec.parse(name, method), ctx, 6, np.zeros((2, 2)))
                self.assertIsInstance(b, cls)
                self.assertEqual(b.kappa.shape, (2,))
                self.assertTrue(np.all(b.kappa != 0))

    def test_homogeneous_input_stays_zero(self):
        for name in ("CQ", "NP50", "CP20", "HF"):
            for method in Method:
                ctx = context(method, 4.0, [0, 0.25j, 1j])
                zero = np.zeros((2, 3), dtype=complex)
                b = make_boundary(SchemeSpec.parse(name, method), ctx, 6, zero)
                for j in range(5):
                    r = b.emit(zero)
                    self.assertIsInstance(r, RobinData)
                    np.testing.assert_array_equal(r.history, 0)
                    b.commit(zero, zero)
                self.assertEqual(b.step, 5)

    def test_cq_tr_commit_stores_whole_step_trace(self):
        ctx = context(Method.TR, 4.0, [0])
        u0 = np.array([[1.0], [2.0]], dtype=complex)
        b = make_boundary(SchemeSpec.parse("CQ", Method.TR), ctx, 4, u0)
        b.emit(u0)
        v1 = np.array([[0.75], [1.5]], dtype=complex)
        b.commit(v1, u0)
        np.testing.assert_allclose(b.bank.live[1], 2 * v1 - u0)

    def test_hf_tr_starts_from_zero_trace(self):
        ctx = context(Method.TR, 4.0, [0])
        u0 = np.ones((2, 1), dtype=complex)
        b = make_boundary(SchemeSpec.parse("HF", Method.TR), ctx, 4, u0)
        np.testing.assert_array_equal(b.history.live[0], 0)
        b = make_boundary(SchemeSpec.parse("HF", Method.BDF1), context(Method.BDF1, 4.0, [0]), 4, u0)
        np.testing.assert_array_equal(b.history.live[0], u0)

    def test_method_mismatch(self):
        with self.assertRaises(ContractViolation):
            make_boundary(SchemeSpec.parse("NP50", Method.TR), context(Method.BDF1, 1.0, [0]),
                          4, np.zeros((2, 1)))


def drive(name: str, method: Method, s, u: np.ndarray) -> list[np.ndarray]:
    """Feed the wall stream u^0..u^n through one map; collect every emitted history."""
    ctx = context(method, 4.0, s)
    b = make_boundary(SchemeSpec.parse(name, method), ctx, u.shape[0], u[0])
    out = []
    for j in range(u.shape[0] - 1):
        out.append(b.emit(u[j]).history)
        new = u[j + 1] if method is Method.BDF1 else 0.5 * (u[j + 1] + u[j])
        b.commit(new, u[j])
    return out


# ───────────────────────────── structure ─────────────────────────────
class LinearityTests(unittest.TestCase):
    """Every map is linear in the wall traces it has been fed."""
    SCHEMES = ("CQ", "NP20", "CP20", "HF")

    def test_superposition(self):
        rng = np.random.default_rng(SEED)
        s = [0, 0.25j, 1j]
        u, w = random_traces(rng, 7, 3), random_traces(rng, 7, 3)
        a, c = 0.7 - 1.3j, -2.1 + 0.4j
        for name in self.SCHEMES:
            for method in Method:
                with self.subTest(scheme=name, method=method.name):
                    hu, hw = drive(name, method, s, u), drive(name, method, s, w)
                    mixed = drive(name, method, s, a * u + c * w)
                    for j, h in enumerate(mixed):
                        np.testing.assert_allclose(h, a * hu[j] + c * hw[j], atol=1e-11)


class ModeByModeTests(unittest.TestCase):
    """A bank carrying several transverse modes matches one bank per mode."""

    def test_vectorised_banks(self):
        rng = np.random.default_rng(SEED)
        s = [0, 0.3j, 0.5j, 2j]
        u = random_traces(rng, 9, len(s))
        for name in ("CQ", "NP50", "CP20", "HF"):
            for method in Method:
                with self.subTest(scheme=name, method=method.name):
                    joint = drive(name, method, s, u)
                    for m, s_m in enumerate(s):
                        alone = drive(name, method, [s_m], u[:, :, m:m + 1])
                        for j, h in enumerate(alone):
                            np.testing.assert_allclose(joint[j][:, m:m + 1], h, rtol=1e-12, atol=1e-13)


class RobinDataTests(unittest.TestCase):
    def test_validation(self):
        with self.assertRaises(ContractViolation):
            RobinData(kappa=np.zeros(2, dtype=complex), history=np.zeros((2, 2)), stagger=Stagger.WHOLE_STEP)
        with self.assertRaises(ContractViolation):
            RobinData(kappa=np.ones(3, dtype=complex), history=np.zeros((2, 2)), stagger=Stagger.WHOLE_STEP)
        r = RobinData(kappa=np.ones(2, dtype=complex), history=np.arange(4.0).reshape(2, 2),
                      stagger=Stagger.STAGGERED)
        self.assertEqual(r.nmodes, 2)


if __name__ == "__main__":
    unittest.main(verbosity=2)
