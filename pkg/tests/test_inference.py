"""Belief-update mechanisms and their sidecar files."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decreach.errors import GameFormatError
from decreach.inference import (
    CLOSURE,
    InferenceMechanism,
    UNION,
    dumps_inference,
    infer_history,
    infer_step,
    loads_inference,
)

A1 = frozenset({0, 1, 2, 3})


def union_mech():
    return InferenceMechanism.union(A1)


class TestInferStep:
    def test_union_adds_unknown_action(self):
        # a2 is id 1, a1 is id 0 in the running example's alphabet
        assert infer_step(union_mech(), {1}, 0) == {0, 1}

    def test_union_known_action_is_noop(self):
        assert infer_step(union_mech(), {1}, 1) == {1}

    def test_closure_pulls_implied_actions(self):
        mech = InferenceMechanism.closure(A1, {0: [0, 1, 2]})
        assert infer_step(mech, frozenset(), 0) == {0, 1, 2}

    def test_rejects_foreign_action(self):
        with pytest.raises(ValueError):
            infer_step(union_mech(), {1}, 9)

    def test_rejects_foreign_belief(self):
        with pytest.raises(ValueError):
            infer_step(union_mech(), {9}, 1)

    def test_closure_must_stay_inside_alphabet(self):
        with pytest.raises(ValueError):
            InferenceMechanism.closure(A1, {0: [7]})
        with pytest.raises(ValueError):
            InferenceMechanism.closure(A1, {9: [0]})

    def test_closure_includes_the_observation_itself(self):
        mech = InferenceMechanism.closure(A1, {0: [1]})
        assert 0 in mech.closure_map[0]


class TestInferHistory:
    def test_fold_over_observations(self):
        assert infer_history(union_mech(), {1}, [1, 1, 0]) == {0, 1}

    def test_empty_history_is_identity(self):
        mech = InferenceMechanism.closure(A1, {2: [2, 3]})
        assert infer_history(mech, {0}, []) == {0}

    def test_repeated_observation_is_single_step(self):
        mech = InferenceMechanism.closure(A1, {0: [0, 1, 2]})
        once = infer_step(mech, frozenset(), 0)
        assert infer_history(mech, frozenset(), [0, 0]) == once


observations = st.lists(st.sampled_from(sorted(A1)), max_size=8)
beliefs = st.sets(st.sampled_from(sorted(A1))).map(frozenset)
closure_maps = st.dictionaries(
    st.sampled_from(sorted(A1)),
    st.sets(st.sampled_from(sorted(A1))),
    max_size=4,
)
mechanisms = st.one_of(
    st.just(InferenceMechanism.union(A1)),
    closure_maps.map(lambda m: InferenceMechanism.closure(A1, m)),
)


class TestProperties:
    @settings(max_examples=120, deadline=None)
    @given(mechanisms, beliefs, st.sampled_from(sorted(A1)))
    def test_belief_never_shrinks(self, mech, x, a):
        updated = infer_step(mech, x, a)
        assert x <= updated
        assert a in updated

    @settings(max_examples=120, deadline=None)
    @given(mechanisms, beliefs, observations)
    def test_every_observed_action_is_learned(self, mech, x0, alpha):
        result = infer_history(mech, x0, alpha)
        assert set(alpha) <= result

    @settings(max_examples=120, deadline=None)
    @given(mechanisms, beliefs, st.sampled_from(sorted(A1)))
    def test_idempotent(self, mech, x, a):
        once = infer_step(mech, x, a)
        assert infer_step(mech, once, a) == once

    @settings(max_examples=80, deadline=None)
    @given(beliefs, observations, st.randoms())
    def test_union_order_insensitive(self, x0, alpha, rng):
        mech = union_mech()
        shuffled = list(alpha)
        rng.shuffle(shuffled)
        assert infer_history(mech, x0, alpha) == infer_history(mech, x0, shuffled)


class TestSidecar:
    def test_union_round_trip(self, fig1):
        mech = InferenceMechanism.union(fig1.a1)
        text = dumps_inference(mech, [1], fig1)
        mech2, x0 = loads_inference(text, fig1)
        assert mech2.kind == UNION
        assert x0 == {1}

    def test_closure_round_trip(self, fig1):
        mech = InferenceMechanism.closure(fig1.a1, {0: [0, 1]})
        text = dumps_inference(mech, [], fig1)
        mech2, x0 = loads_inference(text, fig1)
        assert mech2.kind == CLOSURE
        assert mech2.closure_map == mech.closure_map
        assert x0 == frozenset()

    def test_resolves_labels_and_ids(self, fig1):
        text = '{"kind": "union", "x0": ["a2", 0]}'
        _, x0 = loads_inference(text, fig1)
        assert x0 == {0, 1}

    def test_unknown_action_label(self, fig1):
        with pytest.raises(GameFormatError, match="zz"):
            loads_inference('{"kind": "union", "x0": ["zz"]}', fig1)

    def test_p2_label_is_not_a_p1_action(self, fig1):
        with pytest.raises(GameFormatError):
            loads_inference('{"kind": "union", "x0": ["b1"]}', fig1)

    def test_missing_fields(self, fig1):
        with pytest.raises(GameFormatError, match="x0"):
            loads_inference('{"kind": "union"}', fig1)
        with pytest.raises(GameFormatError, match="kind"):
            loads_inference('{"x0": []}', fig1)
        with pytest.raises(GameFormatError, match="map"):
            loads_inference('{"kind": "closure", "x0": []}', fig1)

    def test_unlabeled_actions_round_trip_by_id(self):
        from decreach.game import Action, GameGraph, P1, P2

        bare = GameGraph(
            owners=[P1, P2],
            final=[1],
            actions=[Action(0, P1), Action(1, P1), Action(2, P2)],
            transitions=[(0, 0, 1), (1, 2, 0)],
        )
        mech = InferenceMechanism.closure(bare.a1, {0: [0, 1]})
        text = dumps_inference(mech, [1], bare)
        mech2, x0 = loads_inference(text, bare)
        assert x0 == {1}
        assert mech2.closure_map == mech.closure_map
