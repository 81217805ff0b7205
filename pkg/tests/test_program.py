import numpy as np
import pytest
import scipy.sparse as sp

from rerm.cones import Cone
from rerm.program import ConicProgram, ProgramBuilder


def _small_program():
    pb = ProgramBuilder()
    x = pb.add_var("x", 2)
    t = pb.add_var("t", 1)
    pb.add_objective(t[0], 1.0)
    pb.add_block(
        Cone.soc(3),
        [
            ([(t[0], 1.0)], 0.0),
            ([(x[0], 1.0)], -0.5),
            ([(x[1], 1.0)], 0.25),
        ],
    )
    pb.add_block(Cone.nonneg(1), [([(x[0], 1.0), (x[1], -2.0)], 1.5)])
    return pb.finalize()


def test_builder_shapes_and_names():
    prog = _small_program()
    assert prog.num_vars == 3
    assert prog.num_rows == 4
    assert prog.names == {"x": (0, 2), "t": (2, 3)}
    assert prog.var_slice("t") == slice(2, 3)
    np.testing.assert_allclose(prog.q, [0.0, 0.0, 1.0])
    np.testing.assert_allclose(prog.b, [0.0, -0.5, 0.25, 1.5])


def test_builder_sums_duplicate_triplets():
    pb = ProgramBuilder()
    x = pb.add_var("x", 1)
    pb.add_block(Cone.nonneg(1), [([(x[0], 1.0), (x[0], 2.0)], 0.0)])
    prog = pb.finalize()
    assert prog.A.toarray().tolist() == [[3.0]]


def test_builder_rejects_duplicate_names_and_bad_blocks():
    pb = ProgramBuilder()
    pb.add_var("x", 2)
    with pytest.raises(ValueError):
        pb.add_var("x", 1)
    with pytest.raises(ValueError):
        pb.add_block(Cone.nonneg(2), [([], 0.0)])  # one row for a dim-2 cone


def test_program_validates_partition():
    A = sp.csc_matrix(np.zeros((1, 2)))
    with pytest.raises(ValueError):
        ConicProgram(
            q=np.zeros(2), A=A, b=np.zeros(1),
            cones=(Cone.nonneg(1),), names={"x": (0, 1)},  # column 1 uncovered
        )
    with pytest.raises(ValueError):
        ConicProgram(
            q=np.zeros(2), A=A, b=np.zeros(2),  # wrong offset length
            cones=(Cone.nonneg(1),), names={"x": (0, 2)},
        )


def test_json_round_trip_exact():
    prog = _small_program()
    text = prog.to_json()
    back = ConicProgram.from_json(text)
    assert back.to_json() == text
    np.testing.assert_array_equal(back.q, prog.q)
    np.testing.assert_array_equal(back.b, prog.b)
    assert (back.A != prog.A).nnz == 0
    assert back.cones == prog.cones
    assert back.names == prog.names


def test_json_rejects_unknown_version():
    prog = _small_program()
    text = prog.to_json().replace('"version": 1', '"version": 99')
    with pytest.raises(ValueError):
        ConicProgram.from_json(text)
