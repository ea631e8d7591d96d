"""Operator model tests"""
import json

import numpy as np
import pytest

from scvlab.errors import (
    DimensionError,
    ParameterError,
    PreconditionError,
    RangeError,
    SubspaceError,
)
from scvlab.operators import (
    adjoint,
    basic_estimate_equivalence,
    complement_operator,
    estimate_constant,
    extremal_vector,
    graph_perp_check,
    LinearOpModel,
    random_instance,
    random_system,
    range_perp_check,
    solve_adjoint,
    solve_with_bound,
    system_constant,
    WeightedSpace,
)


def test_weights_positive():
    """Weighted spaces need positive weights"""
    with pytest.raises(ParameterError):
        WeightedSpace([1.0, 0.0])


def test_shape_mismatch():
    """The matrix must map source to target"""
    with pytest.raises(DimensionError):
        LinearOpModel(WeightedSpace.unit(2), WeightedSpace.unit(3), np.eye(2))


def test_adjoint_unit_weights():
    """With unit weights the adjoint is the conjugate transpose"""
    matrix = np.array([[1 + 2j, 3], [0, -1j], [2, 1]])
    op = LinearOpModel.from_matrix(matrix)
    assert np.allclose(adjoint(op).matrix, matrix.conj().T)


def test_adjoint_weighted_scalar():
    """w_src = 2, w_tgt = 3: T* = (3/2) conj(t)"""
    op = LinearOpModel.from_matrix([[1 + 1j]], [2.0], [3.0])
    assert adjoint(op).matrix[0, 0] == pytest.approx(1.5 * (1 - 1j))


def test_adjoint_identity():
    """<T x, y> = <x, T* y> and T** = T"""
    op = random_instance(3, 4, seed=5)
    rng = np.random.default_rng(1)
    x = rng.normal(size=4) + 1j * rng.normal(size=4)
    y = rng.normal(size=3) + 1j * rng.normal(size=3)
    star = adjoint(op)
    assert op.target.inner(op(x), y) == pytest.approx(
        op.source.inner(x, star(y)))
    assert np.allclose(adjoint(star).matrix, op.matrix, atol=1e-12)


def test_graph_perp_random():
    """The graph perp of a random operator is the graph of its adjoint"""
    assert graph_perp_check(random_instance(3, 4, seed=2)).passed


def test_graph_perp_identity_and_zero():
    """Identity and zero operators"""
    assert graph_perp_check(LinearOpModel.from_matrix(np.eye(3))).passed
    zero = LinearOpModel.from_matrix(np.zeros((2, 3)), [1, 2, 3], [0.5, 4])
    assert graph_perp_check(zero).passed


def test_range_perp_many():
    """null(T*) = range(T)^perp on seeded random instances"""
    for seed in range(100):
        rows, cols = 1 + seed % 4, 1 + (seed // 4) % 4
        rank = min(rows, cols) - (seed % 2) if min(rows, cols) > 1 else None
        op = random_instance(rows, cols, seed=seed, rank=rank)
        assert range_perp_check(op).passed


def test_estimate_constant_examples():
    """Constants of identity and diagonal operators"""
    assert estimate_constant(LinearOpModel.from_matrix(np.eye(3))) == (
        pytest.approx(1.0))
    diag = LinearOpModel.from_matrix(np.diag([2.0, 1.0]))
    assert estimate_constant(diag, np.eye(2)) == pytest.approx(1.0)
    degenerate = LinearOpModel.from_matrix(np.diag([1.0, 0.0]))
    assert estimate_constant(degenerate, [1, 0]) == pytest.approx(1.0)


def test_estimate_constant_range_not_contained():
    """F must contain range(T)"""
    op = LinearOpModel.from_matrix(np.diag([1.0, 1.0]))
    with pytest.raises(RangeError):
        estimate_constant(op, [1, 0])


def test_estimate_constant_larger_subspace():
    """F strictly larger than the range gives no finite constant"""
    op = LinearOpModel.from_matrix(np.diag([1.0, 0.0]))
    assert estimate_constant(op, np.eye(2)) == np.inf


def test_estimate_constant_achieved():
    """The extremal vector attains the constant"""
    op = random_instance(4, 3, seed=11)
    constant = estimate_constant(op)
    y = extremal_vector(op)
    ratio = op.target.norm(y) / op.source.norm(adjoint(op)(y))
    assert ratio == pytest.approx(constant, rel=1e-8)


def test_solve_with_bound_examples():
    """Minimal-norm solutions"""
    identity = LinearOpModel.from_matrix(np.eye(2))
    assert np.allclose(solve_with_bound(identity, [1, 2j], 1.0), [1, 2j])
    diag = LinearOpModel.from_matrix(np.diag([2.0, 1.0]))
    assert np.allclose(solve_with_bound(diag, [2, 0], 1.0), [1, 0])
    row = LinearOpModel.from_matrix([[1.0, 1.0]])
    assert np.allclose(solve_with_bound(row, [2]), [1, 1])


def test_solve_with_bound_minimal():
    """Other solutions differ by null(T) and are longer"""
    op = random_instance(2, 4, seed=3)
    z = np.array([1 - 1j, 2])
    x = solve_with_bound(op, z, estimate_constant(op))
    assert np.allclose(op(x), z)
    null = np.linalg.svd(op.matrix)[2][-1].conj()
    other = x + 0.3 * null
    assert np.allclose(op(other), z)
    assert op.source.norm(other) > op.source.norm(x)


def test_solve_with_bound_outside_range():
    """z outside the range is rejected"""
    op = LinearOpModel.from_matrix(np.diag([1.0, 0.0]))
    with pytest.raises(RangeError):
        solve_with_bound(op, [0, 1])


def test_solve_with_bound_small_constant():
    """A constant below the estimate constant is caught"""
    op = LinearOpModel.from_matrix(np.diag([2.0, 1.0]))
    with pytest.raises(PreconditionError):
        solve_with_bound(op, [0, 1], 0.5)


def test_solve_adjoint_examples():
    """T* f = v with v perpendicular to null(T)"""
    identity = LinearOpModel.from_matrix(np.eye(2))
    assert np.allclose(solve_adjoint(identity, [1j, 2]), [1j, 2])
    diag = LinearOpModel.from_matrix(np.diag([1.0, 0.0]))
    assert np.allclose(solve_adjoint(diag, [1, 0], 1.0), [1, 0])
    with pytest.raises(SubspaceError):
        solve_adjoint(diag, [0, 1])


def test_complement_operator():
    """S T = 0 for the complement operator"""
    op = random_instance(3, 2, seed=4)
    s_op = complement_operator(op)
    assert s_op.matrix.shape == (1, 3)
    assert np.allclose(s_op.matrix @ op.matrix, 0, atol=1e-12)


def test_basic_estimate_random_system():
    """The basic estimate holds with the system constant"""
    t_op, s_op = random_system(3, 2, seed=8)
    constant = system_constant(t_op, s_op)
    cert = basic_estimate_equivalence(t_op, s_op, constant, seed=8)
    assert cert.passed
    assert cert.parameters['seed'] == 8


def test_basic_estimate_surjective():
    """With S = 0 and T onto, C = 1 / sigma_min"""
    t_op = random_instance(2, 3, seed=6)
    s_op = LinearOpModel(
        t_op.target, WeightedSpace.unit(1), np.zeros((1, 2)),
    )
    constant = estimate_constant(t_op)
    assert system_constant(t_op, s_op) == pytest.approx(constant)
    assert basic_estimate_equivalence(t_op, s_op, constant).passed


def test_basic_estimate_halved_constant():
    """Half the constant is witnessed to fail"""
    t_op, s_op = random_system(3, 2, seed=8)
    constant = system_constant(t_op, s_op)
    cert = basic_estimate_equivalence(t_op, s_op, constant / 2, samples=10)
    assert not cert.passed
    assert cert.witness['f']


def test_basic_estimate_needs_system():
    """S T must vanish"""
    t_op = LinearOpModel.from_matrix(np.eye(2))
    s_op = LinearOpModel.from_matrix([[1.0, 0.0]])
    with pytest.raises(PreconditionError):
        basic_estimate_equivalence(t_op, s_op, 1.0)


def test_instance_json_round_trip():
    """Instances survive JSON with [re, im] entries"""
    op = random_instance(2, 3, seed=9)
    data = json.loads(json.dumps(op.asdict()))
    assert isinstance(data['matrix'][0][0], list)
    back = LinearOpModel.fromdict(data)
    assert np.array_equal(back.matrix, op.matrix)
    assert np.array_equal(back.source.weights, op.source.weights)
