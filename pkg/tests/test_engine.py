import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtm_iw.datagen import Dataset, DatasetSpec, Normalizer, generate, target_of
from rtm_iw.engine import (
    FeedbackType,
    RtmModel,
    Variant,
    WeightVector,
    clause_activation,
    feedback_type,
    fit,
    predict,
    predict_batch,
    predict_raw,
    select_type_ia,
    select_type_ib,
    select_type_ii,
    train_epoch,
    train_step,
    update_weights_integer,
    update_weights_real,
)
from rtm_iw.tsetlin import InvalidInputError, TAStateMatrix, augment_literals, clause_outputs

N = 100


def single_literal_model(weights, variant="rtm-iw", T=7):
    """Three clauses x1, x2, x3 with the given integer weights."""
    states = np.full((3, 6), N)
    for j in range(3):
        states[j, j] = 2 * N
    return RtmModel(TAStateMatrix(states, N), WeightVector("integer", weights), T, 2.0,
                    variant, Normalizer.for_bits(3))


class TestPrediction:
    def test_weighted_vote_sum(self):
        model = single_literal_model([4, 2, 1])
        assert predict_raw(model, augment_literals([1, 0, 1])) == 5

    def test_empty_clauses_unity(self):
        model = RtmModel.create("rtm", 7, 3, T=7)
        assert predict_raw(model, augment_literals([0, 1, 0])) == 7

    def test_zero_weights(self):
        model = RtmModel.create("rtm-iw", 5, 3, T=7)
        for x in itertools.product((0, 1), repeat=3):
            assert predict_raw(model, augment_literals(x)) == 0

    def test_denormalized_output(self):
        model = single_literal_model([4, 2, 1])
        assert predict(model, [1, 0, 1]) == pytest.approx(500.0, abs=1e-9)
        assert predict(model, [0, 0, 0]) == 0.0

    def test_clamped_at_maximum(self):
        model = single_literal_model([40, 20, 10])
        assert predict(model, [1, 1, 1]) == 700.0
        assert predict(model, [0, 1, 0]) == 700.0

    def test_batch_matches_single(self):
        model = single_literal_model([4, 2, 1])
        X = np.array(list(itertools.product((0, 1), repeat=3)))
        batch = predict_batch(model, X)
        assert batch.tolist() == [predict(model, x) for x in X]
        assert batch.tolist() == [target_of(x) for x in X]

    def test_width_mismatch(self):
        model = single_literal_model([4, 2, 1])
        with pytest.raises(InvalidInputError, match="3 inputs"):
            predict(model, [1, 0])

    def test_empty_clause_inference_policy(self):
        model = RtmModel.create("rtm", 7, 3, T=7, empty_clause_output=0)
        assert predict_raw(model, augment_literals([1, 1, 1])) == 0
        assert predict_raw(model, augment_literals([1, 1, 1]), training=True) == 7

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_unity_weights_count_firing_clauses(self, seed):
        rng = np.random.default_rng(seed)
        ta = TAStateMatrix(rng.integers(N - 2, N + 3, size=(12, 6)), N)
        model = RtmModel(ta, WeightVector("unity"), 12, 2.0, "rtm", Normalizer.for_bits(3))
        for x in itertools.product((0, 1), repeat=3):
            L = augment_literals(x)
            firing = sum(all(L[k] for k in range(6) if ta.states[j, k] > N) for j in range(12))
            assert predict_raw(model, L) == firing

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_zero_weight_clause_contributes_nothing(self, seed):
        rng = np.random.default_rng(seed)
        ta = TAStateMatrix(rng.integers(N - 2, N + 3, size=(8, 6)), N)
        w = rng.integers(0, 50, size=8)
        model = RtmModel(ta, WeightVector("integer", w), 1000, 2.0, "rtm-iw", Normalizer.for_bits(3))
        off = rng.integers(0, 8)
        w_off = w.copy()
        w_off[off] = 0
        reduced = RtmModel(ta, WeightVector("integer", w_off), 1000, 2.0, "rtm-iw", Normalizer.for_bits(3))
        for x in itertools.product((0, 1), repeat=3):
            L = augment_literals(x)
            c_off = clause_outputs(ta.include_mask(), L)[off]
            assert predict_raw(model, L) - predict_raw(reduced, L) == w[off] * c_off
        # switching a clause off entirely equals deleting it
        ta_del = TAStateMatrix(np.delete(ta.states, off, axis=0), N)
        deleted = RtmModel(ta_del, WeightVector("integer", np.delete(w, off)), 1000, 2.0, "rtm-iw",
                           Normalizer.for_bits(3))
        for x in itertools.product((0, 1), repeat=3):
            L = augment_literals(x)
            assert predict_raw(reduced, L) == predict_raw(deleted, L)


class TestFeedback:
    def test_type_i(self):
        assert feedback_type(0.2, 0.8) is FeedbackType.TYPE_I

    def test_type_ii(self):
        assert feedback_type(0.8, 0.2) is FeedbackType.TYPE_II

    def test_equal(self):
        assert feedback_type(0.5, 0.5) is None

    def test_activation_extremes(self):
        rng = np.random.default_rng(0)
        assert not clause_activation(0.3, 0.3, 1000, rng).any()
        assert clause_activation(0.0, 1.0, 1000, rng).all()

    def test_activation_rate_monte_carlo(self):
        # closed form: each clause independently active with probability |y - target|
        P = clause_activation(0.25, 0.75, 10**6, np.random.default_rng(7))
        assert abs(P.mean() - 0.5) <= 0.002

    def test_no_activation_empty_sets(self):
        c = np.array([1, 0, 1])
        P = np.zeros(3)
        L = np.array([1, 0, 0, 1])
        rng = np.random.default_rng(0)
        assert not select_type_ia(c, P, L).any()
        assert not select_type_ib(c, P, L, 2.0, rng).any()
        assert not select_type_ii(c, P, L).any()

    def test_all_ones_input(self):
        c = np.array([1, 1])
        P = np.array([1, 1])
        L = np.ones(4)
        assert select_type_ia(c, P, L).all()
        assert not select_type_ii(c, P, L).any()

    def test_s_one_takes_every_candidate(self):
        c = np.array([1, 0, 1])
        P = np.array([1, 1, 0])
        L = np.array([1, 0, 0, 1])
        ib = select_type_ib(c, P, L, 1.0, np.random.default_rng(3))
        expected = (~L.astype(bool)[None, :] | ~c.astype(bool)[:, None]) & P.astype(bool)[:, None]
        assert (ib == expected).all()

    def test_type_ib_rate(self):
        c = np.zeros(2000)
        P = np.ones(2000)
        L = np.array([1, 0, 1, 0, 1, 0])
        ib = select_type_ib(c, P, L, 4.0, np.random.default_rng(11))
        assert ib.mean() == pytest.approx(0.25, abs=0.01)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.floats(1.0, 10.0))
    def test_ia_and_ib_disjoint(self, seed, s):
        rng = np.random.default_rng(seed)
        c = rng.integers(0, 2, 10)
        P = rng.integers(0, 2, 10)
        L = augment_literals(rng.integers(0, 2, 4))
        ia = select_type_ia(c, P, L)
        ib = select_type_ib(c, P, L, s, rng)
        ii = select_type_ii(c, P, L)
        assert not (ia & ib).any()
        assert not (ia & ii).any()


class TestWeightUpdates:
    def test_integer_guard_at_zero(self):
        assert update_weights_integer([0], 0.8, 0.2, [1], [1]).tolist() == [0]

    def test_integer_increment(self):
        assert update_weights_integer([3], 0.2, 0.8, [1], [1]).tolist() == [4]

    def test_integer_no_change_on_equality(self):
        assert update_weights_integer([5], 0.5, 0.5, [1], [1]).tolist() == [5]

    def test_integer_increment_needs_firing_clause(self):
        assert update_weights_integer([3], 0.2, 0.8, [0], [1]).tolist() == [3]

    def test_integer_decrement_literal_and_flagged(self):
        # literal rule decrements an activated clause even if it did not fire
        assert update_weights_integer([3], 0.8, 0.2, [0], [1]).tolist() == [2]
        assert update_weights_integer([3], 0.8, 0.2, [0], [1], requires_fire=True).tolist() == [3]
        assert update_weights_integer([3], 0.8, 0.2, [1], [1], requires_fire=True).tolist() == [2]

    def test_real_multiplicative(self):
        assert update_weights_real([1.0], 0.2, 0.8, [1], [1], 0.01)[0] == pytest.approx(1.01)
        assert update_weights_real([1.0], 0.8, 0.2, [1], [1], 0.01)[0] == pytest.approx(0.99)

    def test_real_additive(self):
        assert update_weights_real([1.0], 0.2, 0.8, [1], [1], 0.01, "additive")[0] == pytest.approx(1.01)
        assert update_weights_real([0.005], 0.8, 0.2, [1], [1], 0.01, "additive")[0] == 0.0

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.booleans())
    def test_integer_weights_never_negative(self, seed, requires_fire):
        rng = np.random.default_rng(seed)
        w = rng.integers(0, 3, 20)
        for _ in range(300):
            y, t = rng.random(2)
            w = update_weights_integer(w, y, t, rng.integers(0, 2, 20), rng.integers(0, 2, 20), requires_fire)
            assert (w >= 0).all()

    def test_weight_vector_kinds(self):
        assert WeightVector.initial("integer", 3).w.tolist() == [0, 0, 0]
        assert WeightVector.initial("real", 2).w.tolist() == [1.0, 1.0]
        assert WeightVector.initial("unity", 4).values(4).tolist() == [1, 1, 1, 1]
        with pytest.raises(InvalidInputError):
            WeightVector("integer", [1, -1])


class TestModel:
    def test_parameter_validation(self):
        with pytest.raises(InvalidInputError):
            RtmModel.create("rtm", 3, 2, T=0)
        with pytest.raises(InvalidInputError):
            RtmModel.create("rtm", 3, 2, T=3, s=0.5)
        with pytest.raises(InvalidInputError):
            RtmModel.create("rtm-rw", 3, 2, T=3, alpha=0.0)

    def test_variant_weight_kinds(self):
        assert RtmModel.create("rtm", 2, 2, 2).weights.kind == "unity"
        assert RtmModel.create("rtm-iw", 2, 2, 2).weights.kind == "integer"
        assert RtmModel.create("rtm-rw", 2, 2, 2).weights.kind == "real"
        assert Variant("rtm-iw") is Variant.RTM_IW


class TestTrainStep:
    def test_no_feedback_at_target(self):
        model = single_literal_model([4, 2, 1])
        before = model.copy()
        trace = train_step(model, [1, 0, 1], 5 / 7, np.random.default_rng(0))
        assert trace.feedback is None
        assert not trace.P.any()
        assert (model.ta.states == before.ta.states).all()
        assert model.weights.w.tolist() == [4, 2, 1]

    def test_zero_weights_below_target(self):
        model = RtmModel.create("rtm-iw", 20, 3, T=7)
        before = model.ta.states.copy()
        L = augment_literals([1, 0, 1])
        trace = train_step(model, [1, 0, 1], 5 / 7, np.random.default_rng(1))
        assert trace.feedback is FeedbackType.TYPE_I
        assert trace.raw == 0
        assert (model.weights.w == trace.P).all()  # every clause fires, activated ones get +1
        delta = model.ta.states - before
        assert (delta[:, L == 1] >= 0).all()  # Type Ia only raises literals equal to 1
        assert (delta[:, L == 0] <= 0).all()  # Type Ib only lowers the rest
        assert not delta[trace.P == 0].any()

    def test_same_trace_same_update(self):
        a = RtmModel.create("rtm-iw", 30, 3, T=70, ta_init="random", rng=np.random.default_rng(5))
        b = a.copy()
        rng_a, rng_b = np.random.default_rng(9), np.random.default_rng(9)
        for x, t in [([1, 0, 1], 0.7), ([0, 1, 1], 0.4), ([1, 1, 1], 1.0)] * 5:
            ta = train_step(a, x, t, rng_a)
            tb = train_step(b, x, t, rng_b)
            assert (ta.P == tb.P).all() and ta.feedback == tb.feedback
        assert (a.ta.states == b.ta.states).all()
        assert (a.weights.w == b.weights.w).all()


@pytest.fixture(scope="module")
def data_iii():
    return generate(DatasetSpec.named("III", seed=1))


class TestCompiledKernel:
    """The compiled epoch loop and the step-by-step reference agree exactly."""

    @pytest.mark.parametrize("variant, T, options", [
        ("rtm", 12, {}),
        ("rtm-iw", 70, {}),
        ("rtm-iw", 70, {"decrement_requires_fire": True}),
        ("rtm-rw", 70, {}),
        ("rtm-rw", 70, {"rw_rule": "additive", "alpha": 0.5}),
    ])
    def test_matches_reference(self, variant, T, options):
        train, _ = generate(DatasetSpec.named("IV", n_train=300, n_test=10, seed=4))
        ref = RtmModel.create(variant, 12, 3, T, s=1.7, ta_init="random",
                              rng=np.random.default_rng(2), **options)
        fast = ref.copy()
        literals = train.literals()
        targets = ref.normalizer.normalize(train.y)
        rng_ref, rng_fast = np.random.default_rng(3), np.random.default_rng(3)
        for _ in range(3):
            order = rng_ref.permutation(len(train))
            assert (order == rng_fast.permutation(len(train))).all()
            train_epoch(ref, literals, targets, order, rng_ref, engine="python")
            train_epoch(fast, literals, targets, order, rng_fast)
        assert (ref.ta.states == fast.ta.states).all()
        if ref.weights.kind == "real":
            np.testing.assert_allclose(ref.weights.w, fast.weights.w, rtol=1e-12)
        elif ref.weights.kind == "integer":
            assert ref.weights.w.tolist() == fast.weights.w.tolist()
        assert rng_ref.random() == rng_fast.random()


class TestFit:
    def test_empty_training_set(self):
        model = RtmModel.create("rtm-iw", 3, 2, 300)
        empty = Dataset(np.zeros((0, 2)), np.zeros(0))
        with pytest.raises(InvalidInputError):
            fit(model, empty, None, 1, np.random.default_rng(0))

    def test_width_mismatch(self, data_iii):
        model = RtmModel.create("rtm-iw", 3, 2, 300)
        with pytest.raises(InvalidInputError, match="mismatch"):
            fit(model, *data_iii, 1, np.random.default_rng(0))

    def test_zero_epochs(self, data_iii):
        model = RtmModel.create("rtm-iw", 3, 3, 7)
        report = fit(model, *data_iii, 0, np.random.default_rng(0))
        assert report.epochs == 0
        train, test = data_iii
        assert report.final_train_mae == report.initial_train_mae == pytest.approx(train.y.mean())
        assert report.final_test_mae == pytest.approx(test.y.mean())

    def test_report_length_and_determinism(self, data_iii):
        reports = []
        for _ in range(2):
            model = RtmModel.create("rtm-iw", 10, 3, 70)
            reports.append(fit(model, *data_iii, 3, np.random.default_rng(12)))
        assert reports[0].epochs == 3 and len(reports[0].test_mae) == 3
        assert reports[0].train_mae == reports[1].train_mae
        assert (reports[0].weights == reports[1].weights).all()
        assert all(v >= 0 for v in reports[0].train_mae + reports[0].test_mae)

    def test_one_epoch_lowers_error(self, data_iii):
        # m = 70, T = 100000 learning-curve setting; seeded regression check
        model = RtmModel.create("rtm-iw", 70, 3, 100000)
        report = fit(model, *data_iii, 1, np.random.default_rng(0))
        assert report.initial_train_mae == pytest.approx(350.0, abs=10)
        assert report.train_mae[0] < report.initial_train_mae
        assert report.train_mae[0] == pytest.approx(197.364941, rel=1e-6)

    def test_three_bit_rtm_iw_exact(self, data_iii):
        model = RtmModel.create("rtm-iw", 3, 3, T=7, s=2.0)
        report = fit(model, *data_iii, 200, np.random.default_rng(0))
        assert report.final_train_mae == 0.0 and report.final_test_mae == 0.0
        pairs = {tuple(inc): int(w) for inc, w in zip(report.include_sets, report.weights)}
        assert pairs == {(0,): 4, (1,): 2, (2,): 1}

    def test_dataset_i_exhaustive_oracle(self):
        train, test = generate(DatasetSpec.named("I", seed=3))
        model = RtmModel.create("rtm-iw", 3, 2, T=300, s=2.0)
        fit(model, train, test, 100, np.random.default_rng(0))
        for x in itertools.product((0, 1), repeat=2):
            assert predict(model, x) == target_of(x)
