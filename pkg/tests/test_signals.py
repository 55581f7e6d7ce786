from autoft.options import GenOptions
from autoft.parser import parse_module
from autoft.signals import (
    KIND_COUNTER,
    KIND_HANDSHAKE,
    KIND_INFLIGHT,
    KIND_SAMPLED,
    KIND_SYMBOLIC,
    synth_handshakes,
    synth_module_aux,
    synth_tracking,
)
from autoft.tracecheck import counter_trace, inflight_trace, sampled_trace
from autoft.transactions import build_transactions

from conftest import load_fixture

import naive_checkers as naive


def transactions_of(source: str):
    pm = parse_module(source)
    txns, diags = build_transactions(pm)
    assert not [d for d in diags if d.is_error], diags
    return pm, txns


def module(ports: str, annotations: str) -> str:
    return f"{annotations}\nmodule m (\n{ports}\n);\nendmodule\n"


class TestHandshakes:
    def test_val_and_ack_conjunction(self):
        _, txns = transactions_of(load_fixture("fifo"))
        hsk = synth_handshakes(txns[0])
        assert [(s.name, s.refs) for s in hsk] == [
            ("in_hsk", {"val": "in_val", "ack": "in_ack"}),
            ("out_hsk", {"val": "out_val", "ack": "out_ack"}),
        ]

    def test_val_only_side(self):
        _, txns = transactions_of(
            module("input wire p_val,\noutput wire q_val", "// AUTOSVA t: p -in> q")
        )
        hsk = synth_handshakes(txns[0])
        assert hsk[0].refs == {"val": "p_val"}
        assert hsk[1].refs == {"val": "q_val"}

    def test_expression_ack_used_via_wire(self):
        _, txns = transactions_of(
            module(
                "input wire p_val,\noutput wire busy,\noutput wire q_val",
                "// AUTOSVA t: p -in> q\n// AUTOSVA p_ack = !busy",
            )
        )
        hsk = synth_handshakes(txns[0])
        # The expression becomes a named wire and the handshake uses that name.
        assert hsk[0].refs == {"val": "p_val", "ack": "p_ack"}


class TestTracking:
    def test_untracked_gets_counter_only(self):
        _, txns = transactions_of(load_fixture("fifo"))
        aux = synth_tracking(txns[0])
        assert [s.kind for s in aux] == [KIND_COUNTER]
        assert aux[0].name == "fifo_outstanding"

    def test_tracked_gets_symbolic_inflight_and_sample(self):
        _, txns = transactions_of(load_fixture("noc_buffer"))
        aux = synth_tracking(txns[0])
        assert [s.kind for s in aux] == [KIND_COUNTER, KIND_SYMBOLIC, KIND_INFLIGHT, KIND_SAMPLED]
        symb = aux[1]
        assert symb.name == "symb_buf_transid"
        assert symb.width_expr == "[1:0]"
        assert symb.update_expr == ""  # free variable, no update rule

    def test_counter_update_rule(self):
        # Requests at cycles 0 and 1, response at cycle 3. In the registered
        # view the counter reads 0,1,2,2,1 at cycles 0..4; the sequence after
        # each cycle's handshakes (the post-update view) is 1,2,2,1.
        inc = [1, 1, 0, 0, 0]
        dec = [0, 0, 0, 1, 0]
        cnt = counter_trace(inc, dec)
        assert cnt == [0, 1, 2, 2, 1]
        post = [naive.outstanding_at(inc, dec, i + 1) for i in range(4)]
        assert post == [1, 2, 2, 1]

    def test_counter_same_cycle_pair_is_neutral(self):
        cnt = counter_trace([1, 1, 0], [0, 1, 0])
        assert cnt == [0, 1, 1]

    def test_inflight_sets_cycle_after_matching_request(self):
        # symbolic id 5: request with id 5 at cycle 2 raises the bit at 3.
        n = 5
        symb = [5] * n
        p_hsk = [0, 0, 1, 0, 0]
        p_id = [0, 0, 5, 0, 0]
        q_hsk = [0] * n
        q_id = [0] * n
        infl = inflight_trace(p_hsk, p_id, q_hsk, q_id, symb)
        assert infl == [0, 0, 0, 1, 1]

    def test_inflight_clears_on_matching_response(self):
        n = 6
        symb = [2] * n
        p_hsk = [1, 0, 0, 0, 0, 0]
        p_id = [2, 0, 0, 0, 0, 0]
        q_hsk = [0, 0, 0, 1, 0, 0]
        q_id = [0, 0, 0, 2, 0, 0]
        infl = inflight_trace(p_hsk, p_id, q_hsk, q_id, symb)
        assert infl == [0, 1, 1, 1, 0, 0]

    def test_sampled_data_holds_request_payload(self):
        n = 5
        symb = [1] * n
        hsk = [0, 1, 0, 1, 0]
        idc = [0, 1, 0, 0, 0]  # only cycle 1 matches the symbolic id
        data = [9, 7, 3, 4, 2]
        samp = sampled_trace(hsk, idc, symb, data)
        assert samp == [0, 0, 7, 7, 7]

    def test_derivations_match_naive_closed_forms(self):
        import itertools

        for p in itertools.product([0, 1], repeat=4):
            for q in itertools.product([0, 1], repeat=4):
                inc, dec = list(p), list(q)
                run = counter_trace(inc, dec)
                closed = [naive.outstanding_at(inc, dec, i) for i in range(4)]
                assert run == closed


class TestNaming:
    def test_collision_with_port_renamed(self):
        pm, txns = transactions_of(
            module(
                "input wire p_val,\ninput wire p_ack,\noutput wire q_val,\n"
                "input wire p_hsk",  # port steals the natural handshake name
                "// AUTOSVA t: p -in> q",
            )
        )
        aux, diags = synth_module_aux(txns, pm, GenOptions())
        names = {s.role: s.name for s in aux[0].signals if s.kind == KIND_HANDSHAKE}
        assert names["p_hsk"] == "p_hsk_1"
        assert "name-collision-renamed" in [d.code for d in diags]
        port_names = pm.port_names()
        for s in aux[0].signals:
            assert s.name not in port_names

    def test_shared_interface_wires_deduplicated(self):
        pm, txns = transactions_of(
            module(
                "input wire a_val,\ninput wire a_ack,\noutput wire b_val,\noutput wire c_val",
                "// AUTOSVA t1: a -in> b\n// AUTOSVA t2: a -in> c",
            )
        )
        aux, _ = synth_module_aux(txns, pm, GenOptions())
        all_names = [s.name for s in aux[0].signals + aux[1].signals]
        assert len(all_names) == len(set(all_names))
        # Both transactions refer to the same a_hsk wire.
        assert aux[0].roles["p_hsk"] == aux[1].roles["p_hsk"] == "a_hsk"

    def test_counter_width_parameters_per_transaction(self):
        pm, txns = transactions_of(load_fixture("mmu_stub"))
        aux, _ = synth_module_aux(txns, pm, GenOptions())
        counters = [s for group in aux for s in group.signals if s.kind == KIND_COUNTER]
        assert [c.refs["limit_param"] for c in counters] == [
            "MMU_MAX_OUTSTANDING", "PTW_MAX_OUTSTANDING",
        ]
        assert counters[0].width_expr == "[MMU_CNT_WIDTH-1:0]"
