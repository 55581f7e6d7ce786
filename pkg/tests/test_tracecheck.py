import pytest
from hypothesis import given, settings, strategies as st

from autoft.diagnostics import SpaceTooLargeError, UnknownSignalError
from autoft.properties import GeneratedProperty
from autoft.tracecheck import (
    HOLDS,
    PENDING,
    VACUOUS,
    VIOLATED,
    Trace,
    enumerate_traces,
    eval_property,
    eval_property as evaluate,
    trace_space_size,
)

import differential


def prop(kind, terms, directive="assert", bounded=None, payload=()):
    return GeneratedProperty(
        name=f"t_{kind}", kind=kind, directive=directive, ltl_text="",
        terms=terms, bounded=bounded, payload=payload,
    )


LIVENESS = prop("liveness", {"p_hsk": "p_hsk", "q_val": "q_val"})
RESPONSE = prop("response_had_request", {"p_hsk": "p_hsk", "q_hsk": "q_hsk", "q_val": "q_val", "counter": "cnt"})


class TestTrace:
    def test_columns_must_align(self):
        with pytest.raises(ValueError):
            Trace({"a": [1, 0], "b": [1]})

    def test_width_masking(self):
        t = Trace({"a": [5, 8, 3]}, widths={"a": 2})
        assert t.columns["a"] == [1, 0, 3]

    def test_csv_roundtrip_with_unknowns(self):
        t = Trace({"val": [1, 0, None], "data": [3, 2, 1]})
        again = Trace.from_csv(t.to_csv())
        assert again == t

    def test_csv_format_is_decimal_rows(self):
        t = Trace({"a": [1, 0], "b": [2, 3]})
        assert t.to_csv() == "a,b\n1,2\n0,3\n"

    def test_extended_overrides(self):
        t = Trace({"a": [0, 1]})
        t2 = t.extended({"b": [1, 1]})
        assert t2.columns == {"a": [0, 1], "b": [1, 1]}
        assert t.columns == {"a": [0, 1]}  # original untouched


class TestEvalExamples:
    def test_liveness_discharged(self):
        # Request handshake at cycle 0, response valid at cycle 3, length 5.
        t = Trace({"p_hsk": [1, 0, 0, 0, 0], "q_val": [0, 0, 0, 1, 0]})
        assert evaluate(LIVENESS, t).outcome == HOLDS

    def test_liveness_open_obligation_is_pending(self):
        t = Trace({"p_hsk": [1, 0, 0], "q_val": [0, 0, 0]})
        assert evaluate(LIVENESS, t).outcome == PENDING

    def test_liveness_never_fired_is_vacuous(self):
        t = Trace({"p_hsk": [0, 0], "q_val": [1, 0]})
        assert evaluate(LIVENESS, t).outcome == VACUOUS

    def test_bounded_liveness_violated_at_window_close(self):
        p = prop("liveness", {"p_hsk": "p_hsk", "q_val": "q_val"}, bounded=2)
        t = Trace({"p_hsk": [1, 0, 0, 0, 0], "q_val": [0, 0, 0, 1, 0]})
        v = evaluate(p, t)
        assert (v.outcome, v.cycle) == (VIOLATED, 2)

    def test_response_without_request_violated_at_zero(self):
        # Response at cycle 0, no prior handshake, counter forced to 0.
        t = Trace({
            "p_hsk": [0, 0], "q_hsk": [1, 0], "q_val": [1, 0], "cnt": [0, 0],
        })
        v = evaluate(RESPONSE, t)
        assert (v.outcome, v.cycle) == (VIOLATED, 0)

    def test_counter_column_can_be_injected(self):
        # Same trace, but a bogus injected counter hides the violation: the
        # explicit column must win over the derivation.
        t = Trace({
            "p_hsk": [0, 0], "q_hsk": [1, 0], "q_val": [1, 0], "cnt": [7, 7],
        })
        assert evaluate(RESPONSE, t).outcome == HOLDS

    def test_counter_derived_when_absent(self):
        t = Trace({"p_hsk": [1, 1, 0, 0], "q_hsk": [0, 0, 1, 1], "q_val": [0, 0, 1, 1]})
        assert evaluate(RESPONSE, t).outcome == HOLDS

    def test_transid_integrity_matching_flow(self):
        terms = {
            "p_hsk": "p_hsk", "q_hsk": "q_hsk", "p_transid": "p_id",
            "q_transid": "q_id", "symb": "symb", "inflight": "infl",
        }
        base = {
            "p_hsk": [0, 1, 0, 0, 0, 0], "p_id": [0, 2, 0, 0, 0, 0],
            "q_hsk": [0, 0, 0, 0, 1, 0], "symb": [2] * 6,
        }
        ok = Trace({**base, "q_id": [0, 0, 0, 0, 2, 0]})
        assert evaluate(prop("transid_integrity", terms), ok).outcome == HOLDS
        # Response with an id that never had a matching request.
        bad = Trace({
            "p_hsk": [0, 1, 0, 0, 0, 0], "p_id": [0, 3, 0, 0, 0, 0],
            "q_hsk": [0, 0, 0, 0, 1, 0], "q_id": [0, 0, 0, 0, 2, 0], "symb": [2] * 6,
        })
        v = evaluate(prop("transid_integrity", terms), bad)
        assert (v.outcome, v.cycle) == (VIOLATED, 4)

    def test_unknown_signal_raises(self):
        t = Trace({"p_hsk": [1]})
        with pytest.raises(UnknownSignalError):
            evaluate(LIVENESS, t)

    def test_empty_trace_is_vacuous(self):
        assert evaluate(LIVENESS, Trace({}, length=0)).outcome == VACUOUS

    def test_unknowns_read_as_zero_outside_xprop(self):
        t = Trace({"p_hsk": [None, 1, 0], "q_val": [0, None, 1]})
        # None handshake does not fire an obligation; None q_val does not
        # discharge one; the cycle-2 response discharges cycle 1.
        assert evaluate(LIVENESS, t).outcome == HOLDS

    def test_xprop_three_valued(self):
        p = prop("xprop", {"val": "v", "others": ("o",)})
        clean = Trace({"v": [1, 1], "o": [0, 1]})
        assert evaluate(p, clean).outcome == HOLDS
        dirty = Trace({"v": [0, 1], "o": [None, None]})
        v = evaluate(p, dirty)
        assert (v.outcome, v.cycle) == (VIOLATED, 1)


class TestEnumeration:
    def test_one_bit_two_cycles(self):
        traces = list(enumerate_traces({"a": 1}, 2))
        assert len(traces) == 6  # 2 of length 1 + 4 of length 2

    def test_two_signals_one_cycle(self):
        traces = list(enumerate_traces({"a": 1, "b": 1}, 1))
        assert len(traces) == 4

    def test_space_too_large(self):
        with pytest.raises(SpaceTooLargeError):
            list(enumerate_traces({f"s{i}": 1 for i in range(8)}, 10))

    def test_deterministic_order(self):
        a = [t.columns for t in enumerate_traces({"a": 1, "b": 1}, 2)]
        b = [t.columns for t in enumerate_traces({"a": 1, "b": 1}, 2)]
        assert a == b

    def test_space_size_formula(self):
        assert trace_space_size([2], 2) == 6
        assert trace_space_size([2, 2], 1) == 4
        assert trace_space_size([3, 3], 5) == sum(9**k for k in range(1, 6))

    def test_custom_domains(self):
        traces = list(enumerate_traces({"a": 1}, 1, domains={"a": (0, 1, None)}))
        assert [t.columns["a"] for t in traces] == [[0], [1], [None]]


class TestDifferentialSpotChecks:
    """Fast subset of the exhaustive agreement run (the full run is in the
    acceptance suite)."""

    @pytest.mark.parametrize("case", differential.CASES, ids=[c.name for c in differential.CASES])
    def test_short_lengths_agree(self, case):
        import dataclasses

        small = dataclasses.replace(case, max_len=min(case.max_len, 3))
        count, mismatches = small.run()
        assert mismatches == [], mismatches[:1]
        assert count > 0


class TestCsvRegressionFixtures:
    """Checked-in CSV traces evaluated against the generated FIFO properties."""

    def _verdicts(self, csv_name):
        from pathlib import Path

        from conftest import gen_fixture

        bundle = gen_fixture("fifo")
        trace = Trace.from_csv((Path(__file__).parent / "data" / csv_name).read_text())
        return {p.name: eval_property(p, trace) for p in bundle.properties}

    def test_well_formed_trace(self):
        verdicts = self._verdicts("fifo_ok.csv")
        assert {v.outcome for v in verdicts.values()} <= {HOLDS, VACUOUS}
        assert verdicts["fifo_liveness"].outcome == HOLDS
        assert verdicts["fifo_ack_eventually"].outcome == HOLDS  # cover hit

    def test_response_without_request_trace(self):
        verdicts = self._verdicts("fifo_bad.csv")
        v = verdicts["fifo_response_had_request"]
        assert (v.outcome, v.cycle) == (VIOLATED, 0)
        u = verdicts["fifo_counter_no_underflow"]
        assert (u.outcome, u.cycle) == (VIOLATED, 0)

    def test_unknown_payload_trips_xprop_only(self):
        verdicts = self._verdicts("xprop_unknown.csv")
        v = verdicts["fifo_xprop_p"]
        assert (v.outcome, v.cycle) == (VIOLATED, 0)
        assert verdicts["fifo_response_had_request"].outcome == VACUOUS


def _safety_cases():
    return [
        differential.CASES[3],  # response_had_request
        differential.CASES[5],  # counter_no_underflow
        differential.CASES[10],  # stability_hold_val
        differential.CASES[13],  # active_covered
        differential.CASES[15],  # transid_integrity
    ]


class TestInvariants:
    @settings(max_examples=200, deadline=None)
    @given(
        data=st.data(),
        case_idx=st.integers(min_value=0, max_value=len(_safety_cases()) - 1),
    )
    def test_monotone_safety_under_extension(self, data, case_idx):
        case = _safety_cases()[case_idx]
        length = data.draw(st.integers(min_value=1, max_value=5))
        extension = data.draw(st.integers(min_value=1, max_value=3))
        cols = {}
        for name, domain in case.signals.items():
            cols[name] = data.draw(
                st.lists(st.sampled_from(domain), min_size=length + extension,
                         max_size=length + extension)
            )
        full_cols = dict(cols)
        for name, make in case.extra.items():
            full_cols[name] = make(length + extension)
        short = Trace({k: v[:length] for k, v in full_cols.items()})
        long = Trace(full_cols)
        p = case.prop()
        before = eval_property(p, short)
        after = eval_property(p, long)
        if before.outcome == VIOLATED:
            assert after.outcome == VIOLATED
            assert after.cycle == before.cycle

    @settings(max_examples=200, deadline=None)
    @given(
        inc=st.lists(st.integers(min_value=0, max_value=1), min_size=1, max_size=12),
        dec=st.lists(st.integers(min_value=0, max_value=1), min_size=1, max_size=12),
    )
    def test_counter_conservation(self, inc, dec):
        from autoft.tracecheck import counter_trace

        n = min(len(inc), len(dec))
        inc, dec = inc[:n], dec[:n]
        run = counter_trace(inc, dec)
        for i in range(n):
            assert run[i] == sum(inc[:i]) - sum(dec[:i])

    @settings(max_examples=150, deadline=None)
    @given(
        cols=st.lists(
            st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=10
        )
    )
    def test_verdicts_independent_of_evaluation_order(self, cols):
        t = Trace({"p_hsk": [a for a, _ in cols], "q_val": [b for _, b in cols]})
        first = eval_property(LIVENESS, t)
        second = eval_property(LIVENESS, t)
        assert first == second
