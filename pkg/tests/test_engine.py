"""Fixed-point LSTM/GRU execution"""

import numpy as np
import pytest
from hypothesis import given, settings, HealthCheck, strategies as st

from src.models import LayerKind, RnnMode, Dataset, ScoredDataset, RecurrentWeights
from src.core.fxp import (
    FxpFormat, FxpValue, QuantPolicy, Rounding, Overflow, quantize, quantize_array, to_real
)
from src.core.activation import ActivationFunction, ActivationMode, LutConfig, Sampling, lut_eval
from src.core.engine import (
    EngineConfig, CellState, InferenceEngine, hadamard, lstm_step, gru_step, run_sequence,
    run_batch, run_float
)
from src.core.metrics import one_vs_rest_auc
from src.core.fixtures import make_synthetic_dataset, make_surrogate, surrogate_dataset
from src.core.errors import DimensionError, DatasetError

import oracles
from factories import random_network, zero_network, recurrent_weights

FMT = FxpFormat.fixed(16, 6)


def left_edge_config(fmt=FMT, **kwargs):
    """Tables with an entry exactly at 0, so sigmoid(0) and tanh(0) are exact"""
    table = LutConfig(entry_format=fmt, sampling=Sampling.LEFT_EDGE)
    return EngineConfig(precision=fmt, lut_overrides={"sigmoid": table, "tanh": table}, **kwargs)


def raws(values, fmt=FMT):
    return quantize_array(values, fmt)


class TestHadamard:
    def test_truncated_product(self):
        fmt = FxpFormat.fixed(8, 5)
        a = [quantize(0.5, fmt), quantize(-0.5, fmt)]
        b = [quantize(0.5, fmt), quantize(0.5, fmt)]
        assert [float(v) for v in hadamard(a, b)] == [0.25, -0.25]

    def test_identities(self, rng):
        a = [quantize(v, FMT) for v in rng.uniform(-10, 10, 8)]
        ones = [quantize(1, FMT)] * 8
        zeros = [quantize(0, FMT)] * 8
        assert hadamard(a, ones) == a
        assert all(v.raw == 0 for v in hadamard(a, zeros))

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            hadamard([quantize(1, FMT)], [])


class TestSteps:
    def test_lstm_zero_weights_zero_state(self):
        n = 4
        w = RecurrentWeights(np.zeros((3, 4 * n)), np.zeros((n, 4 * n)), np.zeros(4 * n))
        state = lstm_step([0.3, -1.2, 2.0], CellState.zeros(n, FMT), w, left_edge_config())
        assert np.all(state.h == 0) and np.all(state.c == 0)

    def test_lstm_zero_weights_keeps_half_cell(self):
        n = 3
        cfg = left_edge_config()
        w = RecurrentWeights(np.zeros((2, 4 * n)), np.zeros((n, 4 * n)), np.zeros(4 * n))
        c_prev = raws([1.0, -2.0, 0.5])
        state = lstm_step([0.7, 0.1], CellState(np.zeros(n, dtype=np.int64), c_prev, FMT), w, cfg)
        assert list(to_real(state.c, FMT)) == [0.5, -1.0, 0.25]
        table = cfg.lut(ActivationFunction.TANH)
        expected = [lut_eval("tanh", FxpValue(int(c), FMT), table).raw >> 1 for c in state.c]
        assert list(state.h) == expected

    def test_gru_zero_weights_halves_state(self):
        n = 3
        w = RecurrentWeights(np.zeros((2, 3 * n)), np.zeros((n, 3 * n)), np.zeros(6 * n))
        h_prev = raws([1.0, -2.0, 0.5])
        state = gru_step([0.4, -0.9], CellState(h_prev, None, FMT), w, left_edge_config())
        assert state.c is None
        assert list(to_real(state.h, FMT)) == [0.5, -1.0, 0.25]

    def test_gru_reset_gate_inert_on_zero_state(self, rng):
        n = 4
        w = recurrent_weights(rng, LayerKind.GRU, 3, n)
        w.bias[3 * n + 2 * n:] = 0.0  # recurrent candidate bias
        other = RecurrentWeights(w.kernel.copy(), w.recurrent_kernel.copy(), w.bias.copy())
        other.kernel[:, n:2 * n] = rng.uniform(-3, 3, (3, n))
        other.bias[n:2 * n] = rng.uniform(-3, 3, n)
        x = rng.uniform(-1, 1, 3)
        a = gru_step(x, CellState.zeros(n, FMT, with_cell=False), w)
        b = gru_step(x, CellState.zeros(n, FMT, with_cell=False), other)
        assert a == b

    def test_step_accepts_fxp_values(self, rng):
        w = recurrent_weights(rng, LayerKind.LSTM, 2, 3)
        x_real = [0.25, -0.5]
        x_fxp = [quantize(v, FxpFormat.fixed(8, 4)) for v in x_real]
        state = CellState.zeros(3, FMT)
        assert lstm_step(x_real, state, w) == lstm_step(x_fxp, state, w)

    def test_dimension_errors(self, rng):
        w = recurrent_weights(rng, LayerKind.LSTM, 2, 3)
        with pytest.raises(DimensionError):
            lstm_step([0.1, 0.2, 0.3], CellState.zeros(3, FMT), w)
        with pytest.raises(DimensionError):
            lstm_step([0.1, 0.2], CellState.zeros(4, FMT), w)
        with pytest.raises(DimensionError):
            gru_step([0.1, 0.2], CellState.zeros(3, FMT, with_cell=False), w)


@st.composite
def engine_cases(draw):
    kind = draw(st.sampled_from([LayerKind.LSTM, LayerKind.GRU]))
    input_dim = draw(st.integers(1, 3))
    units = draw(st.integers(1, 4))
    seq_len = draw(st.integers(1, 6))
    head = tuple(draw(st.lists(st.integers(1, 4), max_size=2)))
    output_dim = draw(st.integers(1, 3))
    reset_after = draw(st.booleans())
    total = draw(st.integers(4, 24))
    integer = draw(st.integers(1, total))
    policy = QuantPolicy(draw(st.sampled_from(list(Rounding))), draw(st.sampled_from(list(Overflow))))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    rng = np.random.default_rng(seed)
    activation = LayerKind.SIGMOID if output_dim == 1 else LayerKind.SOFTMAX
    model = random_network(rng, kind, input_dim, units, seq_len, head, output_dim, activation,
                           reset_after=reset_after, scale=2.0)
    x = rng.normal(0, 2, (3, seq_len, input_dim))
    return model, x, EngineConfig(precision=FxpFormat.fixed(total, integer), policy=policy)


class TestSchedules:
    @settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(case=engine_cases())
    def test_static_equals_non_static(self, case):
        model, x, cfg = case
        static = InferenceEngine(model, cfg.with_mode(RnnMode.STATIC)).run_raw(x)
        non_static = InferenceEngine(model, cfg.with_mode(RnnMode.NON_STATIC)).run_raw(x)
        assert np.array_equal(static, non_static)

    def test_one_block_per_timestep(self, rng):
        model = random_network(rng, seq_len=7)
        engine = InferenceEngine(model, EngineConfig(mode=RnnMode.NON_STATIC))
        assert [block.t for block in engine.blocks] == list(range(7))

    def test_zero_model_outputs_head_of_zero(self):
        for kind in (LayerKind.LSTM, LayerKind.GRU):
            model = zero_network(kind, 2, 3, 4)
            out = run_sequence(model, np.zeros((4, 2)))
            assert [float(v) for v in out] == [0.75]

    def test_deterministic(self, rng):
        model = random_network(rng, head=(5,), output_dim=3, output_activation=LayerKind.SOFTMAX)
        x = rng.normal(size=(6, 5, 3))
        engine = InferenceEngine(model)
        assert np.array_equal(engine.run_raw(x), engine.run_raw(x))
        assert np.array_equal(engine.run_raw(x), InferenceEngine(model).run_raw(x))


class TestBatch:
    def test_empty(self, rng):
        model = random_network(rng, output_dim=2, output_activation=LayerKind.SOFTMAX)
        scores = run_batch(model, np.zeros((0, 5, 3)))
        assert scores.shape == (0, 2)
        assert run_batch(model, []).shape == (0, 2)
        assert InferenceEngine(model).run_float(np.zeros((0, 5, 3))).shape == (0, 2)

    def test_single_row_matches_sequence(self, rng):
        model = random_network(rng)
        seq = rng.normal(size=(5, 3))
        scores = run_batch(model, [seq])
        assert list(scores[0]) == [float(v) for v in run_sequence(model, seq)]

    def test_identical_rows(self, rng):
        model = random_network(rng, head=(4,))
        seq = rng.normal(size=(5, 3))
        scores = run_batch(model, np.stack([seq] * 6))
        assert np.all(scores == scores[0])

    def test_workers_preserve_order(self, rng):
        model = random_network(rng, kind=LayerKind.GRU, head=(6,))
        data = rng.normal(size=(25, 5, 3))
        assert np.array_equal(run_batch(model, data, workers=1), run_batch(model, data, workers=4))

    def test_accepts_dataset_and_flat_rows(self, rng):
        model = random_network(rng)
        data = rng.normal(size=(4, 5, 3))
        expected = run_batch(model, data)
        assert np.array_equal(run_batch(model, Dataset(data, np.zeros(4, dtype=int))), expected)
        assert np.array_equal(run_batch(model, [row.ravel() for row in data]), expected)

    def test_row_errors_carry_index(self, rng):
        model = random_network(rng)
        rows = [rng.normal(size=(5, 3)) for _ in range(4)]
        rows[2] = rng.normal(size=(4, 3))
        with pytest.raises(DatasetError) as info:
            run_batch(model, rows)
        assert info.value.row == 2
        data = rng.normal(size=(3, 5, 3))
        data[1, 2, 0] = np.nan
        with pytest.raises(DatasetError) as info:
            run_batch(model, data)
        assert info.value.row == 1

    def test_sequence_shape(self, rng):
        model = random_network(rng)
        with pytest.raises(DimensionError):
            run_sequence(model, np.zeros((4, 3)))
        with pytest.raises(DimensionError):
            run_sequence(model, np.zeros(15))


class TestNumericFidelity:
    WIDE = EngineConfig(precision=FxpFormat.fixed(32, 8),
                        policy=QuantPolicy(Rounding.NEAREST_EVEN),
                        activation_mode=ActivationMode.DIRECT)

    def test_matches_double_precision_oracle(self):
        rng = np.random.default_rng(99)
        tolerance = 10 * 2.0 ** -24
        for case in range(100):
            kind = LayerKind.LSTM if case % 2 == 0 else LayerKind.GRU
            output_dim = 1 if case % 3 else 3
            activation = LayerKind.SIGMOID if output_dim == 1 else LayerKind.SOFTMAX
            model = random_network(rng, kind, input_dim=2, units=3, seq_len=4,
                                   head=(3,) if case % 4 == 0 else (), output_dim=output_dim,
                                   output_activation=activation, reset_after=case % 5 != 0,
                                   scale=0.25)
            seqs = rng.uniform(-0.5, 0.5, (2, 4, 2))
            got = InferenceEngine(model, self.WIDE).run_batch(seqs)
            for row, seq in zip(got, seqs):
                assert np.max(np.abs(row - np.array(oracles.forward(model, seq)))) <= tolerance

    def test_float_pass_matches_oracle(self, rng):
        model = random_network(rng, LayerKind.GRU, head=(4,), output_dim=3,
                               output_activation=LayerKind.SOFTMAX, reset_after=False)
        seqs = rng.normal(size=(3, 5, 3))
        ours = run_float(model, seqs)
        for row, seq in zip(ours, seqs):
            assert np.allclose(row, oracles.forward(model, seq), rtol=0, atol=1e-12)

    def test_auc_ratio_is_one(self):
        rng = np.random.default_rng(5)
        model = random_network(rng, LayerKind.LSTM, input_dim=6, units=4, seq_len=20, scale=0.5)
        data = make_synthetic_dataset("binary_seq", 600, seed=3)
        engine = InferenceEngine(model, self.WIDE)
        quantized = one_vs_rest_auc(ScoredDataset(engine.run_batch(data), data.labels))
        reference = one_vs_rest_auc(ScoredDataset(engine.run_float(data), data.labels))
        assert round(float(quantized[0] / reference[0]), 4) == 1.0

    @pytest.mark.parametrize("cell", ["lstm", "gru"])
    def test_converges_with_fractional_bits(self, cell):
        model = make_surrogate("top_tagging", cell)
        data = surrogate_dataset("top_tagging", 40, seed=8)
        reference = run_float(model, data.x)
        base = EngineConfig(policy=QuantPolicy(Rounding.NEAREST_EVEN),
                            activation_mode=ActivationMode.DIRECT)
        for integer in (6, 8, 10, 12):
            errors = []
            for frac in (4, 8, 12, 16):
                cfg = base.with_precision(FxpFormat.fixed(integer + frac, integer))
                scores = InferenceEngine(model, cfg).run_batch(data)
                errors.append(float(np.max(np.abs(scores - reference))))
            assert errors == sorted(errors, reverse=True)
            assert errors[-1] < 1e-3
