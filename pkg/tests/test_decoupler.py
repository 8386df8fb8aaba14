import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gucsynth.decoupler as dec
from gucsynth.decoupler import (
    MATCH_SIGN,
    build_L2,
    build_T,
    cross_block_residual,
    decouple_many,
    decouple_one,
    local_match,
    second_layer_vectors,
)
from gucsynth.errors import InvalidArgument, NonGenericIntermediate, NonGenericPair
from gucsynth.symplectic import (
    OMEGA_1,
    RngSpec,
    embed_local,
    embed_on_modes,
    is_symplectic,
    random_symplectic,
    symplectic_form,
)

from conftest import generic


def _sign_residuals(L, u, v):
    n = u.size // 2
    Lu = embed_local(L) @ u
    om_v = symplectic_form(n) @ v
    return np.max(np.abs(Lu - om_v)), np.max(np.abs(Lu + om_v))


def _t_pattern(T, mode):
    """Deviation of row and column 2*mode from (0, +1, 0...) and (0, -1, 0...)."""
    i = 2 * mode
    row = T[i].copy()
    col = T[:, i].copy()
    dev = max(abs(row[i + 1] - MATCH_SIGN), abs(col[i + 1] + MATCH_SIGN))
    row[i + 1] = col[i + 1] = 0
    return max(dev, np.abs(row).max(), np.abs(col).max())


# local_match


def test_local_match_hand_value():
    # u = v = (1, 0): the closed form gives omega, and omega @ (1, 0) = (0, -1).
    L = local_match([1.0, 0.0], [1.0, 0.0])
    assert np.array_equal(L[0], MATCH_SIGN * OMEGA_1)
    assert np.array_equal(L[0] @ [1.0, 0.0], MATCH_SIGN * OMEGA_1 @ [1.0, 0.0])


def test_local_match_sign_oracle():
    # Both signs s in L u = s * omega v are solvable; only MATCH_SIGN may hold.
    gen = np.random.default_rng(11)
    for _ in range(20):
        u, v = gen.normal(size=2), gen.normal(size=2)
        L = local_match(u, v)[0]
        plus, minus = _sign_residuals(L[None], u, v)
        assert (plus if MATCH_SIGN == 1 else minus) <= 1e-12
        assert (minus if MATCH_SIGN == 1 else plus) > 1e-3
        # every solution sends the basis (u, omega u) to (target, y) with
        # det(target, y) = det(u, omega u); check both conditions directly
        basis = np.column_stack([u, OMEGA_1 @ u])
        image = L @ basis
        assert np.allclose(image[:, 0], MATCH_SIGN * OMEGA_1 @ v, atol=1e-12)
        assert np.linalg.det(image) == pytest.approx(np.linalg.det(basis), rel=1e-12)
        assert np.linalg.det(L) == pytest.approx(1.0, abs=1e-12)


def test_local_match_zero_pairs():
    L = local_match([1.0, 2.0, 0.0, 0.0], [0.5, -1.0, 0.0, 0.0])
    assert np.array_equal(L[1], np.eye(2))
    with pytest.raises(NonGenericPair) as info:
        local_match([1.0, 2.0, 0.0, 0.0], [0.5, -1.0, 1.0, 0.0])
    assert info.value.mode == 1


def test_local_match_skip():
    L = local_match([1.0, 2.0, 0.0, 0.0], [0.5, -1.0, 1.0, 0.0], skip=[1])
    assert np.array_equal(L[1], np.eye(2))


@settings(max_examples=100)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_local_match_contract(n, seed):
    gen = np.random.default_rng(seed)
    u, v = gen.normal(size=2 * n), gen.normal(size=2 * n) * gen.uniform(0.1, 10)
    L = local_match(u, v)
    scale = max(1.0, np.abs(u).max(), np.abs(v).max())
    assert _sign_residuals(L, u, v)[0 if MATCH_SIGN == 1 else 1] <= 1e-10 * scale
    assert np.all(np.abs(np.linalg.det(L) - 1) <= 1e-10)


# build_T


def test_build_T_on_omega():
    om = symplectic_form(1)
    T = build_T(om, om, 0)
    # column 0 of omega is (0, -1) and row 0 is (0, 1)
    assert np.allclose(T.inner_layer[0] @ [0.0, -1.0], MATCH_SIGN * OMEGA_1 @ [0.0, 1.0])
    assert _t_pattern(T.matrix, 0) <= 1e-15
    assert is_symplectic(T.matrix, 1e-15)


@pytest.mark.parametrize("n", range(2, 7))
def test_build_T_structure(n):
    for seed in range(10):
        gen = np.random.default_rng(seed)
        S_a, S_b = random_symplectic(n, gen), random_symplectic(n, gen)
        for mode in range(n):
            T = build_T(S_a, S_b, mode)
            assert T.structure_residual <= 1e-9 * T.scale
            assert _t_pattern(T.matrix, mode) <= 1e-9 * T.scale
            i = 2 * mode
            assert T.matrix[i, i + 1] * T.matrix[i + 1, i] == pytest.approx(-1, abs=1e-9 * T.scale)


# build_L2


def test_second_layer_C_two_ways():
    gen = np.random.default_rng(3)
    T1 = build_T(random_symplectic(4, gen), random_symplectic(4, gen), 2)
    T2 = build_T(random_symplectic(4, gen), random_symplectic(4, gen), 2)
    _, _, C = second_layer_vectors(T1.matrix, T2.matrix, 2)
    i = 4
    manual = sum(T2.matrix[i, k] * T2.matrix[i + 1, k] for k in range(8)) - sum(
        T1.matrix[k, i] * T1.matrix[k, i + 1] for k in range(8)
    )
    assert C == pytest.approx(manual, abs=1e-12 * max(1, abs(C)))


def test_build_L2_identity_remainder():
    S = embed_on_modes(random_symplectic(1, RngSpec(2)), [0], 3)
    T = build_T(S, S, 0)
    L2 = build_L2(T, T)
    assert np.array_equal(L2[1:], np.stack([np.eye(2)] * 2))
    assert np.array_equal(L2[0], -MATCH_SIGN * OMEGA_1)


# decouple_one


def _seven_factor(S_list, layers):
    M = S_list[0]
    for L, S in zip(layers, S_list[1:]):
        M = S @ embed_local(L) @ M
    return M


def test_decouple_one_example():
    gen = np.random.default_rng(21)
    S_list = [random_symplectic(3, gen) for _ in range(4)]
    R = decouple_one(S_list, 1)
    assert R.cross_residual <= 1e-8
    assert cross_block_residual(R.matrix, [1]) <= 1e-8 * np.abs(R.matrix).max()
    assert np.max(np.abs(_seven_factor(S_list, R.layers) - R.matrix)) <= 1e-10 * R.scale
    block = R.single_mode_block
    assert block[0, 0] == pytest.approx(0, abs=1e-9 * R.scale)
    assert block[0, 1] == pytest.approx(MATCH_SIGN, abs=1e-9 * R.scale)
    assert block[1, 0] == pytest.approx(-MATCH_SIGN, abs=1e-9 * R.scale)
    assert is_symplectic(R.matrix)
    assert is_symplectic(R.remainder)


def test_decouple_one_already_decoupled():
    S = embed_on_modes(random_symplectic(2, RngSpec(8)), [1, 2], 3) @ embed_on_modes(
        random_symplectic(1, RngSpec(9)), [0], 3
    )
    R = decouple_one([S] * 4, 0)
    assert R.cross_residual <= 1e-12 * R.scale


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1), st.data())
def test_decouple_one_property(n, seed, data):
    mode = data.draw(st.integers(0, n - 1))
    gen = np.random.default_rng(seed)
    S_list = [random_symplectic(n, gen) for _ in range(4)]
    R = decouple_one(S_list, mode)
    assert R.cross_residual <= 1e-8 * np.abs(R.matrix).max()
    assert np.max(np.abs(_seven_factor(S_list, R.layers) - R.matrix)) <= 1e-10 * R.scale
    for L in R.layers:
        assert np.all(np.abs(np.linalg.det(L) - 1) <= 1e-10)


def test_decouple_one_retry_bookkeeping(monkeypatch):
    real = dec._decouple_one
    calls = {"n": 0}

    def flaky(*args):
        calls["n"] += 1
        if calls["n"] <= 2:
            raise NonGenericPair(0, "source", "forced")
        return real(*args)

    monkeypatch.setattr(dec, "_decouple_one", flaky)
    gen = np.random.default_rng(5)
    S_list = [random_symplectic(3, gen) for _ in range(4)]
    R = decouple_one(S_list, 2, rng=np.random.default_rng(0))
    assert R.retries == 2
    assert R.cross_residual <= 1e-8 * R.scale
    assert np.max(np.abs(_seven_factor(S_list, R.layers) - R.matrix)) <= 1e-10 * R.scale


def test_decouple_one_unfixable_pair():
    # a mode-swapping factor leaves zero pairs that no local wrapping can repair
    swap = np.zeros((4, 4))
    swap[0:2, 2:4] = swap[2:4, 0:2] = np.eye(2)
    S_list = [generic(2, 1), swap, generic(2, 2), generic(2, 3)]
    with pytest.raises(NonGenericPair):
        decouple_one(S_list, 0)
    with pytest.raises(NonGenericIntermediate):
        decouple_one(S_list, 0, rng=np.random.default_rng(0), max_retries=2)


def test_decouple_one_argument_checks():
    S = generic(2, 0)
    with pytest.raises(InvalidArgument):
        decouple_one([S] * 3, 0)
    with pytest.raises(InvalidArgument):
        decouple_one([S] * 4, 2)


# decouple_many


def test_decouple_many_level_one_matches_decouple_one():
    gen = np.random.default_rng(4)
    S_list = [random_symplectic(3, gen) for _ in range(4)]
    one = decouple_one(S_list, 1)
    many = decouple_many(S_list, [1])
    assert np.array_equal(one.matrix, many.matrix)
    assert len(many.layers) == 3


def test_decouple_many_two_modes():
    gen = np.random.default_rng(30)
    S_list = [random_symplectic(3, gen) for _ in range(16)]
    out = decouple_many(S_list, [0, 2])
    assert len(out.layers) == 15
    assert out.cross_residual <= 1e-7 * out.scale
    assert cross_block_residual(out.matrix, [0]) <= 1e-7 * out.scale
    assert cross_block_residual(out.matrix, [2]) <= 1e-7 * out.scale
    M = S_list[0]
    for L, S in zip(out.layers, S_list[1:]):
        M = S @ embed_local(L) @ M
    assert np.max(np.abs(M - out.matrix)) <= 1e-10 * out.scale
    assert out.per_mode_blocks.shape == (2, 2, 2)


def test_decouple_many_argument_checks():
    S = generic(2, 0)
    with pytest.raises(InvalidArgument):
        decouple_many([S] * 4, [0, 1])
    with pytest.raises(InvalidArgument):
        decouple_many([S] * 16, [1, 1])
    with pytest.raises(InvalidArgument):
        decouple_many([S] * 4, [])


def test_growth_triggers_retry():
    # seed 28 gives a decoupling that grows ~600x over its inputs
    gen = np.random.default_rng(28)
    S_list = [random_symplectic(3, gen) for _ in range(4)]
    plain = decouple_one(S_list, 1)
    assert plain.scale > dec.GROWTH_LIMIT * max(np.abs(S).max() for S in S_list)
    retried = decouple_one(S_list, 1, rng=np.random.default_rng(0))
    assert retried.retries >= 1
    assert retried.scale < plain.scale
    assert retried.cross_residual <= 1e-8 * retried.scale
    assert np.max(np.abs(_seven_factor(S_list, retried.layers) - retried.matrix)) <= 1e-10 * retried.scale
