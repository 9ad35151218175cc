import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import rotations
from singleprobe.control_ir import (
    ANY,
    BoolFunc,
    Conditional,
    ControlWord,
    Program,
    SpectrumError,
    SpectrumSpec,
    Unconditional,
    all_functions,
    bloch_trajectory,
    concat,
    conjugate_program,
    eval_program,
    eval_word,
    inverse_program,
    measures,
    realizes,
    step_count,
)
from singleprobe.rotations import (
    IDENTITY,
    Rx,
    Ry,
    Rz,
    aligning_rotation,
    distance,
    is_identity,
    is_order_two,
)
from singleprobe.synthesis import IndicatorSpec, f32, synth_f32_d8, synth_indicator

TOL = 1e-9
SPEC8 = SpectrumSpec.dyadic(3)


def parity_program(spec=SPEC8):
    return Program(spec, (Conditional(Rx(math.pi)),))


def test_spectrum_from_couplings():
    assert SpectrumSpec.dyadic(3).eigenvalues == tuple(range(8))
    hamming = SpectrumSpec.from_couplings([1, 1, 1])
    assert hamming.distinct == (0, 1, 2, 3)
    assert [hamming.eigenvalues.count(j) for j in range(4)] == [1, 3, 3, 1]


def test_spectrum_rejects_non_integer_couplings():
    with pytest.raises(SpectrumError):
        SpectrumSpec.from_couplings([1, 0.5])


def test_spectrum_json_round_trip():
    s = SpectrumSpec.from_couplings([1, 3])
    assert SpectrumSpec.from_json(json.loads(json.dumps(s.to_json()))) == s


def test_eval_word_examples():
    assert is_identity(eval_word(Conditional(Rz(math.pi / 4)), 8))
    assert distance(eval_word(Conditional(Rx(math.pi)), 3), Rx(math.pi)) < TOL
    g = Ry(0.4)
    for j in range(5):
        assert eval_word(Unconditional(g), j) == g


def test_eval_program_examples():
    assert is_identity(eval_program(Program(SPEC8, ()), 5))
    assert distance(eval_program(parity_program(), 3), Rx(math.pi)) < TOL
    assert is_identity(eval_program(synth_f32_d8(SPEC8), 4))


def test_eval_program_order_is_execution_order():
    p = Program(SPEC8, (Unconditional(Rz(math.pi / 2)), Unconditional(Rx(math.pi / 2))))
    # Rz first: x -> y, then Rx: y -> z
    np.testing.assert_allclose(eval_program(p, 0).apply((1, 0, 0)), (0, 0, 1), atol=TOL)


def test_eval_program_rejects_unknown_eigenvalue():
    with pytest.raises(SpectrumError):
        eval_program(parity_program(), 8)


def test_concat_examples():
    p = synth_f32_d8(SPEC8)
    empty = Program(SPEC8, ())
    for j in SPEC8.distinct:
        assert distance(eval_program(concat(p, empty), j), eval_program(p, j)) < TOL
        assert is_identity(eval_program(concat(parity_program(), parity_program()), j))


def test_concat_of_aligned_indicators_realizes_xor():
    spec = SpectrumSpec.dyadic(2)
    a = synth_indicator(spec, IndicatorSpec(1, 1))
    b = synth_indicator(spec, IndicatorSpec(2, 2))
    f = BoolFunc.indicator(spec, 1, 1) ^ BoolFunc.indicator(spec, 2, 2)
    # the two levels use witnesses about different axes; align b's onto a's first
    t = aligning_rotation(b.witness.axis(), a.witness.axis())
    w = realizes(concat(a.program, conjugate_program(b.program, t)), f)
    assert w is not None and distance(w, a.witness) < TOL


def test_conjugation_moves_witness():
    w = realizes(conjugate_program(parity_program(), Rz(math.pi / 2)), BoolFunc.parity(SPEC8))
    assert w is not None and distance(w, Ry(math.pi)) < TOL
    assert conjugate_program(parity_program(), IDENTITY).words[0].base == Rx(math.pi)


@given(rotations())
def test_double_conjugation_is_identity(t):
    p = synth_f32_d8(SPEC8)
    back = conjugate_program(conjugate_program(p, t), t.inverse())
    for j in SPEC8.distinct:
        assert distance(eval_program(back, j), eval_program(p, j)) < 1e-8


def test_realizes_examples():
    w = realizes(parity_program(), BoolFunc.parity(SPEC8))
    assert w is not None and distance(w, Rx(math.pi)) < TOL
    # the D8 procedure only separates states, j=1 ends on a nontrivial half turn
    assert realizes(synth_f32_d8(SPEC8), f32(SPEC8)) is None
    assert is_order_two(eval_program(synth_f32_d8(SPEC8), 1))
    assert realizes(Program(SPEC8, ()), BoolFunc.constant(SPEC8, 0)) is ANY


def test_realizes_rejects_wrong_function():
    assert realizes(parity_program(), BoolFunc.indicator(SPEC8, 3, 2)) is None
    assert realizes(parity_program(), BoolFunc.constant(SPEC8, 0)) is None


def test_measures_examples():
    a = measures(parity_program(), BoolFunc.parity(SPEC8), (0, 1, 0))
    np.testing.assert_allclose(a, (0, 1, 0), atol=TOL)
    a = measures(synth_f32_d8(SPEC8), f32(SPEC8), (1, 0, 0))
    np.testing.assert_allclose(a, (1, 0, 0), atol=TOL)
    a = measures(Program(SPEC8, (Conditional(Rz(0.3)),)), BoolFunc.constant(SPEC8, 0), (0, 0, 1))
    np.testing.assert_allclose(a, (0, 0, 1), atol=TOL)


def test_measures_fails_with_probe_on_witness_axis():
    assert measures(parity_program(), BoolFunc.parity(SPEC8), (1, 0, 0)) is None


def test_step_count_examples():
    assert step_count(parity_program()) == (1, 0)
    assert step_count(synth_f32_d8(SPEC8)) == (3, 0)
    assert step_count(Program(SPEC8, ())) == (0, 0)


def test_bloch_trajectory_rows():
    rows = bloch_trajectory(synth_f32_d8(SPEC8), (1, 0, 0))
    assert len(rows) == 8 * 4
    j1 = [np.degrees(math.atan2(v[1], v[0])) for j, _, v in rows if j == 1]
    np.testing.assert_allclose(j1, [0, 45, 45, 0], atol=1e-7)


def test_program_json_round_trip():
    p = synth_f32_d8(SPEC8)
    q = Program.from_json(json.loads(json.dumps(p.to_json())))
    for j in SPEC8.distinct:
        assert distance(eval_program(p, j), eval_program(q, j)) < TOL


def test_control_word_json():
    w = ControlWord.from_json(Conditional(Rz(math.pi / 4)).to_json())
    assert distance(w.base, Rz(math.pi / 4)) < TOL


def test_all_functions_count():
    assert len(list(all_functions(SPEC8))) == 256


def test_boolfunc_algebra():
    par = BoolFunc.parity(SPEC8)
    ind = BoolFunc.indicator(SPEC8, 3, 2)
    assert (par & ind) == ind
    assert (par ^ par).is_constant()
    assert par.complement().ones() == (0, 2, 4, 6)


@given(st.lists(st.sampled_from(["x", "y", "z"]), max_size=6),
       st.lists(st.floats(-3, 3, allow_nan=False), min_size=6, max_size=6),
       st.lists(st.booleans(), min_size=6, max_size=6))
def test_inverse_program_undoes_program(axes, angles, cond):
    gen = {"x": Rx, "y": Ry, "z": Rz}
    words = tuple((Conditional if c else Unconditional)(gen[a](t)) for a, t, c in zip(axes, angles, cond))
    p = Program(SPEC8, words)
    for j in SPEC8.distinct:
        assert is_identity(eval_program(concat(p, inverse_program(p)), j), 1e-8)


@given(rotations())
def test_witness_transforms_under_conjugation(t):
    w = realizes(parity_program(), BoolFunc.parity(SPEC8))
    w2 = realizes(conjugate_program(parity_program(), t), BoolFunc.parity(SPEC8))
    assert w2 is not None and distance(w2, t @ w @ t.inverse()) < 1e-8


@given(st.integers(0, 255))
def test_identity_program_realizes_only_constant_zero(bits):
    f = BoolFunc(tuple((j, (bits >> j) & 1) for j in SPEC8.distinct))
    p = Program(SPEC8, (Unconditional(IDENTITY),))
    assert realizes(p, f) is (ANY if bits == 0 else None)
