"""Bounded explicit-trace semantics for every generated property kind.

This is the desk-scale oracle: it evaluates a generated property against a
concrete cycle-by-cycle trace, using the property's structured terms rather
than parsing its rendered text. Registers the property module would build
(outstanding counter, in-flight bit, sampled data) are derived from the trace
with the same update rules, seen in the registered view: the value during
cycle i reflects handshakes strictly before i. A trace column with the
register's own name overrides the derivation, which lets tests inject
counterexample states directly.

Finite-trace readings:

* safety kinds are violated at the earliest cycle whose check fails;
* liveness obligations still open when the trace ends report `pending`,
  never `holds`, because only an unbounded proof could close them;
* a property whose antecedent never fires reports `vacuous`;
* unknown values (None, written `x` in CSV files) exist only for the xprop
  kind; everywhere else they read as 0, the same arbitrary two-valued
  assignment a proof tool would pick.
"""
from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .diagnostics import SpaceTooLargeError, UnknownSignalError
from .properties import COVER, GeneratedProperty

DEFAULT_TRACE_BOUND = 2**20

HOLDS = "holds"
VIOLATED = "violated"
VACUOUS = "vacuous"
PENDING = "pending"


class Trace:
    """A fixed-length assignment of integer values to named signals.

    Values are plain ints, or None for unknown (X). When widths are given,
    values are masked to fit them.
    """

    def __init__(
        self,
        columns: Mapping[str, Sequence[int | None]],
        widths: Mapping[str, int] | None = None,
        length: int | None = None,
    ):
        self.columns: dict[str, list[int | None]] = {}
        lengths = {len(v) for v in columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"columns differ in length: {sorted(lengths)}")
        col_len = lengths.pop() if lengths else None
        if length is None:
            self.length = col_len if col_len is not None else 0
        else:
            if col_len is not None and col_len != length:
                raise ValueError("explicit length disagrees with column length")
            self.length = length
        self.widths = dict(widths) if widths else {}
        for name, values in columns.items():
            w = self.widths.get(name)
            if w:
                mask = (1 << w) - 1
                self.columns[name] = [None if v is None else v & mask for v in values]
            else:
                self.columns[name] = list(values)

    def __eq__(self, other) -> bool:
        return isinstance(other, Trace) and self.length == other.length and self.columns == other.columns

    def __repr__(self) -> str:
        return f"Trace(length={self.length}, signals={sorted(self.columns)})"

    def extended(self, extra: Mapping[str, Sequence[int | None]]) -> "Trace":
        merged = dict(self.columns)
        merged.update({k: list(v) for k, v in extra.items()})
        return Trace(merged, self.widths, self.length)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        names = list(self.columns)
        writer.writerow(names)
        for i in range(self.length):
            writer.writerow(["x" if self.columns[n][i] is None else self.columns[n][i] for n in names])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, widths: Mapping[str, int] | None = None) -> "Trace":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty trace file")
        names = [n.strip() for n in rows[0]]
        columns: dict[str, list[int | None]] = {n: [] for n in names}
        for row in rows[1:]:
            if not row or all(not cell.strip() for cell in row):
                continue
            for name, cell in zip(names, row):
                cell = cell.strip()
                columns[name].append(None if cell.lower() == "x" else int(cell))
        return cls(columns, widths)


@dataclass(frozen=True)
class Verdict:
    property_name: str
    outcome: str  # holds | violated | vacuous | pending
    cycle: int | None = None  # earliest violating cycle when violated

    def __str__(self) -> str:
        at = f" at cycle {self.cycle}" if self.cycle is not None else ""
        return f"{self.property_name}: {self.outcome}{at}"


def _as_bit(v: int | None) -> int:
    return 1 if v not in (None, 0) else 0


def counter_trace(inc: Sequence[int | None], dec: Sequence[int | None]) -> list[int]:
    """Registered outstanding count: requests minus responses strictly before i."""
    out = []
    c = 0
    for i in range(len(inc)):
        out.append(c)
        c += _as_bit(inc[i]) - _as_bit(dec[i])
    return out


def inflight_trace(
    set_hsk: Sequence, set_id: Sequence, clr_hsk: Sequence, clr_id: Sequence, symb: Sequence
) -> list[int]:
    """Registered in-flight bit for the symbolic id; set wins over clear."""
    out = []
    f = 0
    for i in range(len(set_hsk)):
        out.append(f)
        if _as_bit(set_hsk[i]) and set_id[i] == symb[i]:
            f = 1
        elif _as_bit(clr_hsk[i]) and clr_id[i] == symb[i]:
            f = 0
    return out


def sampled_trace(hsk: Sequence, idc: Sequence, symb: Sequence, data: Sequence) -> list[int]:
    """Registered capture of the request data for the symbolic id."""
    out = []
    s = 0
    for i in range(len(hsk)):
        out.append(s)
        if _as_bit(hsk[i]) and idc[i] == symb[i]:
            s = 0 if data[i] is None else data[i]
    return out


class _Resolver:
    """Column lookup with on-demand derivation of generated registers."""

    def __init__(self, p: GeneratedProperty, trace: Trace):
        self.terms = p.terms
        self.trace = trace
        self.cache: dict[str, list] = {}

    def col(self, role: str) -> list:
        if role in self.cache:
            return self.cache[role]
        name = self.terms.get(role)
        if name is not None and name in self.trace.columns:
            out = self.trace.columns[name]
        elif role in ("p_hsk", "q_hsk"):
            side = role[0]
            val = self.require(f"{side}_val")
            ack_name = self.terms.get(f"{side}_ack")
            if ack_name is None:
                out = [_as_bit(v) for v in val]
            else:
                ack = self.require(f"{side}_ack")
                out = [_as_bit(v) & _as_bit(a) for v, a in zip(val, ack)]
        elif role == "counter":
            out = counter_trace(self.col("p_hsk"), self.col("q_hsk"))
        elif role == "inflight":
            out = inflight_trace(
                self.col("p_hsk"), self.require("p_transid"),
                self.col("q_hsk"), self.require("q_transid"), self.require("symb"),
            )
        elif role == "sampled":
            out = sampled_trace(
                self.col("p_hsk"), self.require("p_transid"),
                self.require("symb"), self.require("p_data"),
            )
        elif name is not None:
            raise UnknownSignalError(name)
        else:
            raise KeyError(f"property does not define role '{role}'")
        self.cache[role] = out
        return out

    def require(self, role: str) -> list:
        name = self.terms.get(role)
        if name is None:
            raise KeyError(f"property does not define role '{role}'")
        if name not in self.trace.columns:
            raise UnknownSignalError(name)
        return self.trace.columns[name]


def _safety_verdict(name: str, fires: list[int], fails: list[int]) -> Verdict:
    if fails:
        return Verdict(name, VIOLATED, min(fails))
    if not fires:
        return Verdict(name, VACUOUS)
    return Verdict(name, HOLDS)


def _eventuality_verdict(
    name: str, ant: list[int], con: list[int], bounded: int | None, lo: int
) -> Verdict:
    """Shared engine for liveness and ack obligations.

    Each cycle i with ant[i] opens an obligation discharged by con at some
    j >= i (unbounded) or j in [i+lo, i+bounded] (bounded). A bounded window
    that closes inside the trace without a discharge is a violation at the
    cycle the window closed; a window still open at the end is pending.
    """
    n = len(ant)
    fires = [i for i in range(n) if ant[i]]
    if not fires:
        return Verdict(name, VACUOUS)
    violated_at: list[int] = []
    pending = False
    # Scan once from the right for the unbounded case.
    if bounded is None:
        next_con = [-1] * (n + 1)
        nearest = -1
        for j in range(n - 1, -1, -1):
            if con[j]:
                nearest = j
            next_con[j] = nearest
        for i in fires:
            if next_con[i] == -1:
                pending = True
    else:
        for i in fires:
            window = range(i + lo, min(i + bounded, n - 1) + 1)
            if any(con[j] for j in window):
                continue
            if i + bounded <= n - 1:
                violated_at.append(i + bounded)
            else:
                pending = True
    if violated_at:
        return Verdict(name, VIOLATED, min(violated_at))
    if pending:
        return Verdict(name, PENDING)
    return Verdict(name, HOLDS)


def _eval_liveness(p: GeneratedProperty, r: _Resolver, n: int) -> Verdict:
    hsk = r.col("p_hsk")
    q_val = r.require("q_val")
    if "symb" in p.terms:
        symb = r.require("symb")
        p_id, q_id = r.require("p_transid"), r.require("q_transid")
        ant = [_as_bit(hsk[i]) and p_id[i] == symb[i] for i in range(n)]
        con = [_as_bit(q_val[i]) and q_id[i] == symb[i] for i in range(n)]
    else:
        ant = [_as_bit(v) for v in hsk]
        con = [_as_bit(v) for v in q_val]
    return _eventuality_verdict(p.name, ant, con, p.bounded, lo=1)


def _eval_response_had_request(p: GeneratedProperty, r: _Resolver, n: int) -> Verdict:
    q_val, counter, p_hsk = r.require("q_val"), r.col("counter"), r.col("p_hsk")
    fires = [i for i in range(n) if _as_bit(q_val[i])]
    fails = [i for i in fires if not (counter[i] > 0 or _as_bit(p_hsk[i]))]
    return _safety_verdict(p.name, fires, fails)


def _eval_counter_no_underflow(p: GeneratedProperty, r: _Resolver, n: int) -> Verdict:
    q_hsk, p_hsk, counter = r.col("q_hsk"), r.col("p_hsk"), r.col("counter")
    fires = [i for i in range(n) if _as_bit(q_hsk[i]) and not _as_bit(p_hsk[i])]
    fails = [i for i in fires if not counter[i] > 0]
    return _safety_verdict(p.name, fires, fails)


def _eval_ack_eventually(p: GeneratedProperty, r: _Resolver, n: int) -> Verdict:
    val = [_as_bit(v) for v in r.require("p_val")]
    ack = [_as_bit(v) for v in r.require("p_ack")]
    if p.directive == COVER:
        limit = p.bounded
        for i in range(n):
            if not val[i]:
                continue
            hi = n - 1 if limit is None else min(i + limit, n - 1)
            if any(ack[j] for j in range(i, hi + 1)):
                return Verdict(p.name, HOLDS)
        return Verdict(p.name, PENDING)
    return _eventuality_verdict(p.name, val, ack, p.bounded, lo=0)


def _eval_stability(p: GeneratedProperty, r: _Resolver, n: int) -> Verdict:
    val = [_as_bit(v) for v in r.require("p_val")]
    ack = [_as_bit(v) for v in r.require("p_ack")]
    fires, fails = [], []
    if "stable_sig" in p.terms:
        sig = r.require("stable_sig")
        for i in range(n - 1):
            if val[i] and not ack[i]:
                fires.append(i)
                if not _as_bit(sig[i + 1]):
                    fails.append(i + 1)
    else:
        for name in p.payload:
            if name not in r.trace.columns:
                raise UnknownSignalError(name)
        payload = [r.trace.columns[name] for name in p.payload]
        for i in range(n - 1):
            if val[i] and not ack[i]:
                fires.append(i)
                ok = val[i + 1] and all(col[i + 1] == col[i] for col in payload)
                if not ok:
                    fails.append(i + 1)
    return _safety_verdict(p.name, fires, fails)


def _eval_active_covered(p: GeneratedProperty, r: _Resolver, n: int) -> Verdict:
    active = [_as_bit(v) for v in r.require("active")]
    counter = r.col("counter")
    p_hsk, q_val = r.col("p_hsk"), r.require("q_val")
    fires, fails = [], []
    for i in range(n):
        ongoing = counter[i] > 0
        if ongoing or active[i]:
            fires.append(i)
        if ongoing and not active[i]:
            fails.append(i)
        elif active[i] and not (ongoing or _as_bit(p_hsk[i]) or _as_bit(q_val[i])):
            fails.append(i)
    return _safety_verdict(p.name, fires, fails)


def _matched(hsk: Sequence, ids: Sequence, symb: Sequence, n: int) -> list[int]:
    return [1 if _as_bit(hsk[i]) and ids[i] == symb[i] else 0 for i in range(n)]


def _eval_transid_integrity(p: GeneratedProperty, r: _Resolver, n: int) -> Verdict:
    ant = _matched(r.col("q_hsk"), r.require("q_transid"), r.require("symb"), n)
    inflight = r.col("inflight")
    fires = [i for i in range(n) if ant[i]]
    fails = [i for i in fires if not _as_bit(inflight[i])]
    return _safety_verdict(p.name, fires, fails)


def _eval_uniqueness(p: GeneratedProperty, r: _Resolver, n: int) -> Verdict:
    ant = _matched(r.col("p_hsk"), r.require("p_transid"), r.require("symb"), n)
    inflight = r.col("inflight")
    fires = [i for i in range(n) if ant[i]]
    fails = [i for i in fires if _as_bit(inflight[i])]
    return _safety_verdict(p.name, fires, fails)


def _eval_data_integrity(p: GeneratedProperty, r: _Resolver, n: int) -> Verdict:
    ant = _matched(r.col("q_hsk"), r.require("q_transid"), r.require("symb"), n)
    q_data = r.require("q_data")
    sampled = r.col("sampled")
    fires = [i for i in range(n) if ant[i]]
    fails = [i for i in fires if (0 if q_data[i] is None else q_data[i]) != sampled[i]]
    return _safety_verdict(p.name, fires, fails)


def _eval_xprop(p: GeneratedProperty, r: _Resolver, n: int) -> Verdict:
    val = r.require("val")
    others = p.terms.get("others", ())
    if not others:
        fires = list(range(n))
        fails = [i for i in fires if val[i] is None]
        return _safety_verdict(p.name, fires, fails)
    cols = []
    for name in others:
        if name not in r.trace.columns:
            raise UnknownSignalError(name)
        cols.append(r.trace.columns[name])
    fires = [i for i in range(n) if val[i] not in (None, 0)]
    fails = [i for i in fires if any(col[i] is None for col in cols)]
    return _safety_verdict(p.name, fires, fails)


_EVALUATORS = {
    "liveness": _eval_liveness,
    "response_had_request": _eval_response_had_request,
    "counter_no_underflow": _eval_counter_no_underflow,
    "ack_eventually": _eval_ack_eventually,
    "stability": _eval_stability,
    "active_covered": _eval_active_covered,
    "transid_integrity": _eval_transid_integrity,
    "uniqueness": _eval_uniqueness,
    "data_integrity": _eval_data_integrity,
    "xprop": _eval_xprop,
}


def eval_property(p: GeneratedProperty, trace: Trace) -> Verdict:
    """Evaluate one generated property against one trace."""
    if trace.length == 0:
        return Verdict(p.name, VACUOUS)
    evaluator = _EVALUATORS.get(p.kind)
    if evaluator is None:
        raise ValueError(f"no trace semantics for property kind '{p.kind}'")
    return evaluator(p, _Resolver(p, trace), trace.length)


def trace_space_size(domain_sizes: Iterable[int], max_len: int) -> int:
    per_cycle = 1
    for size in domain_sizes:
        per_cycle *= size
    return sum(per_cycle**length for length in range(1, max_len + 1))


def enumerate_traces(
    signals: Mapping[str, int],
    max_len: int,
    bound: int = DEFAULT_TRACE_BOUND,
    domains: Mapping[str, Sequence[int | None]] | None = None,
) -> Iterator[Trace]:
    """Yield every trace of lengths 1..max_len over the given signals.

    `signals` maps names to bit widths; `domains` can replace a signal's value
    set (e.g. to include None for unknown). Order is deterministic: lengths
    ascending, then lexicographic in cycle-major order. Raises
    SpaceTooLargeError when the total count exceeds `bound`.
    """
    names = list(signals)
    value_sets: list[Sequence[int | None]] = []
    for name in names:
        if domains and name in domains:
            value_sets.append(tuple(domains[name]))
        else:
            value_sets.append(tuple(range(1 << signals[name])))
    total = trace_space_size((len(v) for v in value_sets), max_len)
    if total > bound:
        raise SpaceTooLargeError(f"{total} traces exceed the bound of {bound}")
    states = list(itertools.product(*value_sets))
    for length in range(1, max_len + 1):
        for assignment in itertools.product(states, repeat=length):
            columns = {
                name: [assignment[cycle][k] for cycle in range(length)]
                for k, name in enumerate(names)
            }
            yield Trace(columns, length=length)
