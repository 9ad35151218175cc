import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from singleprobe.control_ir import (
    ANY,
    BoolFunc,
    Program,
    SpectrumError,
    SpectrumSpec,
    bloch_trajectory,
    eval_program,
    measures,
    realizes,
    step_count,
)
from singleprobe.rotations import Rotation, Rx, compose_all, distance, is_order_two
from singleprobe.synthesis import (
    IndicatorSpec,
    SynthesisError,
    and_pair,
    detect_structure,
    f32,
    indicator_steps,
    point_resolution,
    synth_and,
    synth_auto,
    synth_constant,
    synth_f32_d8,
    synth_function,
    synth_indicator,
    synth_parity,
    synth_xor,
)

TOL = 1e-9
SPEC4 = SpectrumSpec.dyadic(2)
SPEC8 = SpectrumSpec.dyadic(3)
SPEC16 = SpectrumSpec.dyadic(4)


def table(spec, bits):
    return BoolFunc(tuple((j, (bits >> n) & 1) for n, j in enumerate(spec.distinct)))


@pytest.mark.parametrize("N", [2, 4, 8, 16, 32])
def test_parity_is_one_step(N):
    spec = SpectrumSpec.consecutive(N)
    rep = synth_parity(spec)
    assert step_count(rep.program) == (1, 0)
    assert distance(rep.witness, Rx(math.pi)) < TOL


def test_parity_on_equal_couplings_is_hamming_parity():
    spec = SpectrumSpec.from_couplings([1, 1, 1])
    rep = synth_parity(spec)
    for j in spec.distinct:
        # eigenvalue j is the Hamming weight here
        assert (distance(eval_program(rep.program, j), rep.witness) < TOL) == (j % 2 == 1)


def test_parity_on_dyadic_couplings_reads_weakest_spin():
    rep = synth_parity(SPEC8)
    for b in range(8):
        flipped = distance(eval_program(rep.program, b), rep.witness) < TOL
        assert flipped == bool(b & 1)  # qubit 0 carries coupling 1


def test_indicator_example():
    rep = synth_indicator(SPEC8, IndicatorSpec(3, 2))
    assert realizes(rep.program, BoolFunc.from_mapping({j: int(j in (3, 7)) for j in range(8)}))
    assert is_order_two(rep.witness)


def test_indicator_even_odd_split():
    rep = synth_indicator(SPEC8, IndicatorSpec(0, 1))
    assert distance(eval_program(rep.program, 4), rep.witness) < TOL
    assert distance(eval_program(rep.program, 3), Rotation.identity()) < TOL


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_indicator_steps_follow_recurrence(k):
    counts = {synth_indicator(SPEC16, IndicatorSpec(i, k)).conditional_steps for i in range(2**k)}
    assert counts == {indicator_steps(k)}
    if k > 1:
        assert indicator_steps(k) == 2 * indicator_steps(k - 1) + 2
    assert indicator_steps(1) == 1


def test_indicator_spec_validation():
    with pytest.raises(ValueError):
        IndicatorSpec(4, 2)
    with pytest.raises(ValueError):
        IndicatorSpec(0, 0)
    with pytest.raises(ValueError):
        IndicatorSpec(0, 21)


def test_xor_examples():
    a = synth_indicator(SPEC4, IndicatorSpec(1, 1))
    assert synth_xor(a, a).target.is_constant()
    assert realizes(synth_xor(a, a).program, BoolFunc.constant(SPEC4, 0)) is ANY
    b = synth_xor(synth_indicator(SPEC4, IndicatorSpec(1, 2)), synth_indicator(SPEC4, IndicatorSpec(3, 2)))
    assert b.target == BoolFunc.parity(SPEC4)
    zero = synth_constant(SPEC4, 0)
    assert synth_xor(a, zero).program == a.program


def test_xor_rejects_mixed_spectra():
    with pytest.raises(SpectrumError):
        synth_xor(synth_parity(SPEC4), synth_parity(SPEC8))


def test_and_pair_square_is_half_turn():
    u, v = Rx(math.pi), Rotation.about((1, 1, 0), math.pi)
    w = compose_all(u, v, u, v)
    assert is_order_two(w)
    assert abs(abs(w.axis()[2]) - 1) < TOL
    u, v, w = and_pair()
    assert is_order_two(u) and is_order_two(v) and is_order_two(w)
    assert distance(compose_all(u, v, u, v), w) < TOL


def test_and_of_bit_tests_is_f32():
    low = synth_indicator(SPEC4, IndicatorSpec(1, 1))  # bit 0 set
    high = synth_function(SPEC4, BoolFunc.from_mapping({0: 0, 1: 0, 2: 1, 3: 1}))  # bit 1 set
    rep = synth_and(low, high)
    assert rep.target == BoolFunc.indicator(SPEC4, 3, 2)
    assert is_order_two(rep.witness)


def test_and_with_constant_one_keeps_function():
    f = synth_indicator(SPEC8, IndicatorSpec(2, 2))
    rep = synth_and(f, synth_constant(SPEC8, 1))
    assert rep.target == f.target
    assert realizes(rep.program, f.target) is not None


def test_synth_function_examples():
    assert synth_function(SPEC8, BoolFunc.constant(SPEC8, 0)).program.words == ()
    delta5 = BoolFunc.from_mapping({j: int(j == 5) for j in range(8)})
    assert realizes(synth_function(SPEC8, delta5).program, delta5) is not None
    par = synth_function(SPEC8, BoolFunc.parity(SPEC8))
    assert realizes(par.program, BoolFunc.parity(SPEC8)) is not None


def test_point_resolution():
    assert point_resolution(SPEC8) == 3
    assert point_resolution(SpectrumSpec.from_couplings([1, 1, 1])) == 2
    assert point_resolution(SpectrumSpec.dyadic(1)) == 1


def test_step_bound_is_respected():
    for bits in range(0, 256, 17):
        rep = synth_function(SPEC8, table(SPEC8, bits))
        assert rep.conditional_steps <= rep.step_bound


def test_f32_d8_example():
    prog = synth_f32_d8(SPEC8)
    assert step_count(prog) == (3, 0)
    final = {j: v for j, step, v in bloch_trajectory(prog, (1, 0, 0)) if step == 3}
    for j, v in final.items():
        expect = (-1, 0, 0) if j in (3, 7) else (1, 0, 0)
        np.testing.assert_allclose(v, expect, atol=TOL)
    j1 = [v for j, step, v in bloch_trajectory(prog, (1, 0, 0)) if j == 1]
    angles = [math.degrees(math.atan2(v[1], v[0])) for v in j1[1:]]
    np.testing.assert_allclose(angles, [45, 45, 0], atol=1e-7)
    assert measures(prog, f32(SPEC8), (1, 0, 0)) is not None


def test_detect_structure():
    assert detect_structure(SPEC8, BoolFunc.parity(SPEC8)) == ("parity", ())
    assert detect_structure(SPEC8, BoolFunc.indicator(SPEC8, 3, 2)) == ("indicator", (3, 2))
    assert detect_structure(SPEC8, BoolFunc.constant(SPEC8, 1)) == ("constant", (1,))
    assert detect_structure(SPEC8, table(SPEC8, 0b00100110))[0] == "generic"


def test_synth_auto_picks_cheapest_route():
    assert synth_auto(SPEC8, BoolFunc.parity(SPEC8)).conditional_steps == 1
    assert synth_auto(SPEC8, f32(SPEC8)).conditional_steps == indicator_steps(2)


def test_synth_function_rejects_foreign_domain():
    with pytest.raises(SpectrumError):
        synth_function(SPEC8, BoolFunc.parity(SPEC4))


def test_synthesis_error_is_runtime_error():
    assert issubclass(SynthesisError, RuntimeError)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 255))
def test_every_function_on_eight_eigenvalues(bits):
    f = table(SPEC8, bits)
    for rep in (synth_function(SPEC8, f), synth_auto(SPEC8, f)):
        w = realizes(rep.program, f)
        assert w is not None
        assert (w is ANY) == (bits == 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 255), st.integers(1, 255))
def test_and_realizes_conjunction(a, b):
    f, g = table(SPEC8, a), table(SPEC8, b)
    rep = synth_and(synth_function(SPEC8, f), synth_function(SPEC8, g))
    assert realizes(rep.program, f & g) is not None


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 15), st.integers(0, 15))
def test_xor_realizes_symmetric_difference(a, b):
    f, g = table(SPEC4, a), table(SPEC4, b)
    rep = synth_xor(synth_function(SPEC4, f), synth_function(SPEC4, g))
    assert rep.target == f ^ g
    assert realizes(rep.program, f ^ g) is not None


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([[1, 3], [2, 3, 5], [1, 1, 2], [3, 5]]), st.data())
def test_non_dyadic_spectra(couplings, data):
    spec = SpectrumSpec.from_couplings(couplings)
    bits = data.draw(st.integers(0, 2 ** len(spec.distinct) - 1))
    f = table(spec, bits)
    assert realizes(synth_function(spec, f).program, f) is not None


def test_constant_program_words():
    assert synth_constant(SPEC8, 0).program == Program(SPEC8, ())
    assert synth_constant(SPEC8, 1).conditional_steps == 0
