"""Live editing sessions: debounce, cancellation, view state.

A session owns one model text. Edits are accepted synchronously (parse
and typecheck are cheap and give immediate diagnostics), while the
expensive work, rebuilding the four category views and refreshing focus
entries, runs on a worker after a debounce window. Every background task
is tagged with the generation it was started for; solvers poll a token
that fires as soon as a newer generation exists, and results are
committed only while their generation is still current. A stale solve
can therefore neither linger nor overwrite fresher state.
"""
from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass
from typing import Callable, Optional

from .. import ast
from ..complete import AFTER_DOT, AFTER_UNARY, SuggestResult, suggest
from ..diagnostics import Diagnostic, has_errors
from ..errors import (
    Cancelled,
    NoPrefixContext,
    ScopeTooLarge,
    SessionNotFound,
    StructuralMismatch,
)
from ..evaluate import check_instance, eval_formula
from ..finder import (
    DEFAULT_BUDGET_BITS,
    CategoryStreams,
    Scope,
    categorize,
    check_budget,
    is_representative,
    universe_for,
)
from ..instance import Instance, to_json, to_text, universe_to_json
from ..lexer import EOF, KEYWORD, NAME, SYMBOL, tokenize
from ..parser import parse, parse_expression, resolve_expr_in_context
from ..proximity import breakdown as make_breakdown, closest as find_closest
from ..typecheck import RelType, TypedModel, _Checker, typecheck

CATEGORIES = CategoryStreams.KEYS

DEFAULT_DEBOUNCE_S = 0.3


@dataclass
class SessionConfig:
    scope: Scope = Scope()
    debounce_s: float = DEFAULT_DEBOUNCE_S
    solve_delay_s: float = 0.0  # artificial slow-down, for liveness testing
    budget_bits: int = DEFAULT_BUDGET_BITS

    @staticmethod
    def from_wire(data: dict) -> "SessionConfig":
        scope_data = data.get("scope") or {}
        scope = Scope(
            default_bound=int(scope_data.get("default", 3)),
            per_sig={k: int(v) for k, v in (scope_data.get("perSig") or {}).items()},
        )
        return SessionConfig(
            scope=scope,
            debounce_s=float(data.get("debounceMs", DEFAULT_DEBOUNCE_S * 1000)) / 1000,
            solve_delay_s=float(data.get("solveDelayMs", 0)) / 1000,
            budget_bits=int(data.get("budgetBits", DEFAULT_BUDGET_BITS)),
        )


class _GenToken:
    """Cancellation by obsolescence: fires once a newer generation exists."""

    def __init__(self, session: "Session", generation: int):
        self._session = session
        self._generation = generation

    @property
    def cancelled(self) -> bool:
        return (
            self._session.generation != self._generation or self._session._closed
        )

    def raise_if_cancelled(self):
        if self.cancelled:
            raise Cancelled()


@dataclass
class _CategoryState:
    instance: Optional[Instance] = None
    representative: bool = True
    exhausted: bool = False
    position: int = 0
    fresh_for: int = -1  # semantic generation the content belongs to


@dataclass(eq=False)
class FocusEntry:
    target: Instance
    expected: str  # "valid" | "invalid"
    current_status: Optional[str] = None
    closest: Optional[Instance] = None
    breakdown: Optional[object] = None
    error: Optional[str] = None
    fresh_for: int = -1


class Session:
    def __init__(self, text: str, config: Optional[SessionConfig] = None):
        self.id = uuid.uuid4().hex[:12]
        self.config = config or SessionConfig()
        self.model_text = text
        self.generation = 0
        self.semantic_generation = -1
        self.diagnostics: list[Diagnostic] = []
        self.last_good: Optional[TypedModel] = None
        self.previous_goal: Optional[tuple[ast.Formula, ...]] = None
        self.stale = False
        self.last_error: Optional[str] = None
        self.category: dict[str, _CategoryState] = {
            k: _CategoryState() for k in CATEGORIES
        }
        self.visible: set[str] = set(CATEGORIES)
        self.focus: list[FocusEntry] = []
        self.streams: Optional[CategoryStreams] = None
        self.events: list[dict] = []
        self.listeners: list[Callable[[dict], None]] = []

        self._closed = False
        self._lock = threading.RLock()
        self._solve_lock = threading.Lock()
        self._idle = threading.Condition(self._lock)
        self._workers = 0  # scheduled debounce timers plus running recomputes
        self._pending_tm: Optional[TypedModel] = None
        self._compiled_structure = None

        self._accept(text, initial=True)

    # -- edit path ---------------------------------------------------------

    def apply_edit(self, text: str) -> tuple[int, list[Diagnostic]]:
        return self._accept(text, initial=False)

    def _accept(self, text: str, initial: bool) -> tuple[int, list[Diagnostic]]:
        with self._lock:
            in_flight = self._workers > 0
            if not initial:
                self.generation += 1  # obsoletes every older computation
            g = self.generation
            self.model_text = text
            if in_flight:
                self._log("cancelRequested", g)

            tm, diags = _compile(text)
            self.diagnostics = diags
            ok = tm is not None
            self._log("editAccepted", g, ok=ok)
            if not ok:
                if self.last_good is not None:
                    self.stale = True
                self._log("compileFailed", g)
                self._idle.notify_all()
                return g, diags

            structure = ast.structure(tm.model)
            unchanged = (
                not in_flight
                and not self.stale
                and self.semantic_generation >= 0
                and structure == self._compiled_structure
            )
            if unchanged:
                # same model modulo layout: keep every view, just retag
                self.last_good = tm
                self._pending_tm = tm
                self.semantic_generation = g
                for st in self.category.values():
                    if st.fresh_for >= 0:
                        st.fresh_for = g
                for entry in self.focus:
                    if entry.fresh_for >= 0:
                        entry.fresh_for = g
                self._log("shortCircuit", g)
                self._idle.notify_all()
                return g, diags

            self._pending_tm = tm
            self._compiled_structure = structure
            self._log("recomputeScheduled", g)
            self._workers += 1
            # stale timers fire anyway and discard themselves on the
            # generation check, which keeps the worker count exact
            timer = threading.Timer(
                0.0 if initial else self.config.debounce_s,
                self._recompute,
                args=(g,),
            )
            timer.daemon = True
            timer.start()
            return g, diags

    # -- background recompute ----------------------------------------------

    def _recompute(self, g: int):
        token = _GenToken(self, g)
        try:
            with self._lock:
                if g != self.generation or self._closed:
                    self._log("resultDiscarded", g, task="recompute")
                    return
                tm = self._pending_tm
                goal = _goal_of(tm)
                old_goal = (
                    self.previous_goal if self.previous_goal is not None else goal
                )
                previous = {k: self.category[k].instance for k in CATEGORIES}
                visible = set(self.visible)
                focus_snapshot = list(self.focus)
                self._log("solveStarted", g, task="categories")

            universe = universe_for(tm, self.config.scope)
            check_budget(tm, universe, self.config.budget_bits)
            streams = categorize(
                tm,
                old_goal,
                goal,
                cancel=token,
                universe=universe,
                budget_bits=self.config.budget_bits,
            )
            _interruptible_delay(self.config.solve_delay_s, token)

            seeded: dict[str, _CategoryState] = {}
            with self._solve_lock:
                for key in CATEGORIES:
                    if key not in visible:
                        continue
                    prev = previous[key]
                    try:
                        keep = prev is not None and is_representative(
                            tm, prev, streams, key
                        )
                    except StructuralMismatch:
                        # The edit renamed things out from under the pane.
                        keep = False
                    if keep:
                        seeded[key] = _CategoryState(prev, True, False, 0, g)
                        continue
                    inst = streams.cursor(key).next()
                    seeded[key] = _CategoryState(
                        inst, inst is not None, inst is None, 1 if inst else 0, g
                    )

            with self._lock:
                if g != self.generation:
                    self._log("resultDiscarded", g, task="categories")
                    return
                self.last_good = tm
                self.previous_goal = goal
                self.streams = streams
                self.semantic_generation = g
                self.stale = False
                self.last_error = None
                self.category.update(seeded)
                self._log("resultCommitted", g, task="categories")

            for i, entry in enumerate(focus_snapshot):
                refreshed = self._evaluate_focus(tm, goal, entry, token)
                with self._lock:
                    idx = next(
                        (j for j, e in enumerate(self.focus) if e is entry), None
                    )
                    if g != self.generation or idx is None:
                        self._log("resultDiscarded", g, task=f"focus{i}")
                        continue
                    refreshed.fresh_for = g
                    self.focus[idx] = refreshed
                    self._log("resultCommitted", g, task=f"focus{i}")
        except Cancelled:
            with self._lock:
                self._log("solveCancelled", g, task="categories")
        except ScopeTooLarge as exc:
            with self._lock:
                if g == self.generation:
                    self.last_error = str(exc)
                    self.stale = True
                self._log("scopeError", g, message=str(exc))
        finally:
            with self._lock:
                self._workers -= 1
                self._log("recomputeDone", g)
                self._idle.notify_all()

    def _evaluate_focus(
        self, tm: TypedModel, goal, entry: FocusEntry, token: _GenToken
    ) -> FocusEntry:
        try:
            overall, _ = check_instance(tm, entry.target)
            status_ok = overall and all(
                eval_formula(entry.target, {}, f) for f in goal
            )
            status = "valid" if status_ok else "invalid"
            close = None
            report = None
            if status != entry.expected:
                close = find_closest(
                    tm,
                    entry.target,
                    entry.expected,
                    goal=goal,
                    cancel=token,
                    budget_bits=self.config.budget_bits,
                )
                if close is not None:
                    report = make_breakdown(tm, goal, entry.target, close)
            return FocusEntry(entry.target, entry.expected, status, close, report)
        except StructuralMismatch as exc:
            return FocusEntry(
                entry.target, entry.expected, None, None, None, error=str(exc)
            )

    # -- category views ----------------------------------------------------

    def get_category_view(self, key: str) -> dict:
        if key not in CATEGORIES:
            raise KeyError(key)
        with self._lock:
            self.visible.add(key)
            fresh = (
                not self.stale
                and self.semantic_generation == self.generation
                and self.streams is not None
            )
            st = self.category[key]
            if not fresh or st.fresh_for == self.semantic_generation:
                return self._view_wire(key)
            g = self.generation
            tm = self.last_good
            streams = self.streams
            prev = st.instance

        # lazily seed a pane that was hidden during the last recompute
        try:
            with self._solve_lock:
                if prev is not None and is_representative(tm, prev, streams, key):
                    seeded = _CategoryState(prev, True, False, 0, g)
                else:
                    inst = streams.cursor(key).next()
                    seeded = _CategoryState(
                        inst, inst is not None, inst is None, 1 if inst else 0, g
                    )
        except Cancelled:
            with self._lock:
                self._log("solveCancelled", g, task=key)
                return self._view_wire(key)
        with self._lock:
            if g == self.generation:
                self.category[key] = seeded
                self._log("resultCommitted", g, task=key)
            else:
                self._log("resultDiscarded", g, task=key)
            return self._view_wire(key)

    def advance_category(self, key: str) -> dict:
        if key not in CATEGORIES:
            raise KeyError(key)
        self.get_category_view(key)  # ensures seeding and visibility
        with self._lock:
            fresh = (
                not self.stale
                and self.semantic_generation == self.generation
                and self.streams is not None
            )
            if not fresh or self.category[key].exhausted:
                return self._view_wire(key)
            g = self.generation
            streams = self.streams
        try:
            with self._solve_lock:
                inst = streams.cursor(key).next()
        except Cancelled:
            with self._lock:
                self._log("solveCancelled", g, task=key)
                return self._view_wire(key)
        with self._lock:
            if g == self.generation:
                st = self.category[key]
                if inst is None:
                    st.exhausted = True
                else:
                    st.instance = inst
                    st.representative = True
                    st.position += 1
                st.fresh_for = g
                self._log("resultCommitted", g, task=f"{key}/advance")
            else:
                self._log("resultDiscarded", g, task=f"{key}/advance")
            return self._view_wire(key)

    def set_visible(self, keys: list[str]):
        with self._lock:
            self.visible = {k for k in keys if k in CATEGORIES}

    def _view_wire(self, key: str) -> dict:
        st = self.category[key]
        stale = (
            self.stale
            or self.semantic_generation != self.generation
            or st.fresh_for != self.semantic_generation
        )
        tm = self.last_good
        wire = {
            "category": key,
            "instance": None,
            "instanceText": None,
            "stale": stale,
            "representative": st.representative,
            "exhausted": st.exhausted,
            "position": st.position,
            "generation": st.fresh_for,
        }
        if st.instance is not None and tm is not None:
            wire["instance"] = to_json(tm, st.instance)
            wire["instanceText"] = to_text(tm, st.instance)
        if self.last_error:
            wire["error"] = self.last_error
        return wire

    # -- focus --------------------------------------------------------------

    def pin_focus(self, inst: Instance, expected: str) -> list[dict]:
        if expected not in ("valid", "invalid"):
            raise ValueError("expected must be 'valid' or 'invalid'")
        with self._lock:
            entry = FocusEntry(inst, expected)
            self.focus.append(entry)
            fresh = (
                not self.stale
                and self.semantic_generation == self.generation
                and self.last_good is not None
            )
            if not fresh:
                return self.get_focus()
            g = self.generation
            tm = self.last_good
            goal = self.previous_goal or ()
        token = _GenToken(self, g)
        try:
            refreshed = self._evaluate_focus(tm, goal, entry, token)
        except Cancelled:
            with self._lock:
                self._log("solveCancelled", g, task="focus")
                return self.get_focus()
        with self._lock:
            idx = next((j for j, e in enumerate(self.focus) if e is entry), None)
            if g == self.generation and idx is not None:
                refreshed.fresh_for = g
                self.focus[idx] = refreshed
                self._log("resultCommitted", g, task="focus")
            return self.get_focus()

    def unpin_focus(self, index: int):
        with self._lock:
            if not 0 <= index < len(self.focus):
                raise IndexError(index)
            del self.focus[index]

    def get_focus(self) -> list[dict]:
        with self._lock:
            tm = self.last_good
            out = []
            for i, entry in enumerate(self.focus):
                stale = (
                    self.stale
                    or self.semantic_generation != self.generation
                    or entry.fresh_for != self.semantic_generation
                )
                wire = {
                    "index": i,
                    "expected": entry.expected,
                    "currentStatus": entry.current_status,
                    "instance": to_json(tm, entry.target) if tm else None,
                    "instanceText": to_text(tm, entry.target) if tm else None,
                    "closest": None,
                    "closestText": None,
                    "breakdown": None,
                    "stale": stale,
                    "generation": entry.fresh_for,
                }
                if entry.closest is not None and tm is not None:
                    wire["closest"] = to_json(tm, entry.closest)
                    wire["closestText"] = to_text(tm, entry.closest)
                if entry.breakdown is not None:
                    wire["breakdown"] = entry.breakdown.to_wire()
                if entry.error:
                    wire["error"] = entry.error
                out.append(wire)
            return out

    # -- completion ---------------------------------------------------------

    def get_suggestions(
        self, offset: int, source: Optional[str] = None
    ) -> SuggestResult:
        with self._lock:
            text = self.model_text
            tm = self.last_good
            if tm is None:
                raise NoPrefixContext("the model has not compiled yet")
            inst = self._annotation_instance(source)
        prefix_text, mode, op = _expression_prefix(text, offset)
        env_types = _var_context(tm, text, offset)
        prefix = None
        if prefix_text is not None:
            expr, _ = parse_expression(prefix_text)
            if expr is None:
                raise NoPrefixContext("no well-formed expression before the cursor")
            expr, diags = resolve_expr_in_context(
                expr, set(tm.sigs), set(tm.fields), set(env_types)
            )
            if has_errors(diags):
                raise NoPrefixContext("no well-formed expression before the cursor")
            prefix = expr
        return suggest(
            tm, prefix, cursor=mode, inst=inst, env_types=env_types, unary_op=op
        )

    def _annotation_instance(self, source: Optional[str]) -> Optional[Instance]:
        if source:
            kind, _, arg = source.partition(":")
            if kind == "focus":
                idx = int(arg or 0)
                if 0 <= idx < len(self.focus):
                    return self.focus[idx].target
                return None
            if kind == "category":
                st = self.category.get(arg)
                return st.instance if st else None
        for key in CATEGORIES:
            st = self.category[key]
            if st.instance is not None and st.fresh_for == self.semantic_generation:
                return st.instance
        return None

    # -- plumbing -----------------------------------------------------------

    def wait_idle(self, timeout: float = 30.0) -> bool:
        deadline = time.monotonic() + timeout
        with self._lock:
            while self._workers > 0:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    return False
                self._idle.wait(remaining)
            return True

    def universe(self):
        with self._lock:
            if self.last_good is None:
                return None
            return universe_for(self.last_good, self.config.scope)

    def to_wire(self) -> dict:
        with self._lock:
            wire = {
                "id": self.id,
                "generation": self.generation,
                "semanticGeneration": self.semantic_generation,
                "stale": self.stale,
                "diagnostics": [d.to_wire() for d in self.diagnostics],
                "modelText": self.model_text,
            }
            u = None
            if self.last_good is not None:
                u = universe_for(self.last_good, self.config.scope)
            wire["universe"] = universe_to_json(u) if u is not None else None
            if self.last_error:
                wire["error"] = self.last_error
            return wire

    def close(self):
        with self._lock:
            self._closed = True
            self._idle.notify_all()

    def _log(self, kind: str, generation: int, **extra):
        event = {"t": time.monotonic(), "type": kind, "generation": generation}
        event.update(extra)
        self.events.append(event)
        for listener in list(self.listeners):
            try:
                listener(event)
            except Exception:
                pass


class Workbench:
    """Registry of independent sessions."""

    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def open(self, text: str, config: Optional[SessionConfig] = None) -> Session:
        session = Session(text, config)
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, sid: str) -> Session:
        with self._lock:
            if sid not in self._sessions:
                raise SessionNotFound(f"no session '{sid}'")
            return self._sessions[sid]

    def close(self, sid: str):
        with self._lock:
            session = self._sessions.pop(sid, None)
        if session is None:
            raise SessionNotFound(f"no session '{sid}'")
        session.close()

    def ids(self) -> list[str]:
        with self._lock:
            return sorted(self._sessions)


# --------------------------------------------------------------------------
# Helpers


def _compile(text: str):
    pr = parse(text)
    if pr.model is None:
        return None, pr.diagnostics
    tr = typecheck(pr.model)
    if tr.typed is None:
        return None, pr.diagnostics + tr.diagnostics
    return tr.typed, pr.diagnostics + tr.diagnostics


def _goal_of(tm: TypedModel) -> tuple[ast.Formula, ...]:
    for cmd in tm.model.commands:
        if cmd.pred is not None:
            return tuple(tm.preds[cmd.pred].formulas)
        if cmd.inline is not None:
            return tuple(cmd.inline)
        return ()
    return ()


def _interruptible_delay(seconds: float, token: Optional[_GenToken]):
    if seconds <= 0:
        return
    deadline = time.monotonic() + seconds
    while True:
        if token is not None:
            token.raise_if_cancelled()
        now = time.monotonic()
        if now >= deadline:
            return
        time.sleep(min(0.005, deadline - now))


_NAME_CHARS = set(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_"
)


def _expression_prefix(text: str, offset: int):
    """Split the text before the cursor into (prefix, mode, unary op).

    Returns (prefix text or None, cursor mode, operator). Raises
    NoPrefixContext when the cursor is in a comment or not right after a
    dot or unary operator.
    """
    if offset < 1 or offset > len(text):
        raise NoPrefixContext("cursor is not after a dot or unary operator")
    if _in_comment(text, offset):
        raise NoPrefixContext("cursor is inside a comment")
    ch = text[offset - 1]
    if ch == ".":
        end = offset - 1
        start = _scan_prefix_start(text, end)
        if start == end:
            raise NoPrefixContext("no expression before the dot")
        return text[start:end], AFTER_DOT, ast.CLOSURE
    if ch in "^*~":
        end = offset - 1
        if end >= 1 and text[end - 1] == ".":
            start = _scan_prefix_start(text, end - 1)
            if start == end - 1:
                raise NoPrefixContext("no expression before the dot")
            return text[start : end - 1], AFTER_UNARY, ch
        return None, AFTER_UNARY, ch
    raise NoPrefixContext("cursor is not after a dot or unary operator")


def _scan_prefix_start(text: str, end: int) -> int:
    """Walk left over a name/dot/unary-operator chain; parens included."""
    i = end
    depth = 0
    while i > 0:
        c = text[i - 1]
        if c == ")":
            depth += 1
        elif c == "(":
            if depth == 0:
                break
            depth -= 1
        elif depth == 0 and c not in _NAME_CHARS and c not in ".^*~":
            break
        i -= 1
    while i < end and text[i] == ".":
        i += 1
    return i


def _in_comment(text: str, offset: int) -> bool:
    res = tokenize(text)
    for span in res.comments:
        if span[0] < offset <= span[1]:
            return True
    return False


def _var_context(tm: TypedModel, text: str, offset: int) -> dict[str, RelType]:
    """Quantified variables lexically in scope at the cursor, typed.

    The current text is usually mid-edit and does not parse as a whole,
    so scoping is approximated from tokens: variables bound by a
    quantifier stay in scope until the brace block containing it closes.
    """
    res = tokenize(text)
    tokens = [t for t in res.tokens if t.kind != EOF]
    env: dict[str, RelType] = {}
    scopes: list[list[str]] = [[]]
    checker = _Checker(tm)
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.span[0] >= offset:
            break
        if tok.kind == SYMBOL and tok.text == "{":
            scopes.append([])
        elif tok.kind == SYMBOL and tok.text == "}":
            if len(scopes) > 1:
                for name in scopes.pop():
                    env.pop(name, None)
        elif tok.kind == KEYWORD and tok.text in ast.QUANTIFIERS:
            groups, end = _quant_decls(tokens, i + 1)
            if groups is not None:
                for names, dspan in groups:
                    dtype = _domain_type(checker, tm, text, dspan, env)
                    for name in names:
                        env[name] = dtype
                        scopes[-1].append(name)
                i = end + 1
                continue
        i += 1
    return env


def _quant_decls(tokens, i):
    """Parse `x, y: dom, z: dom | ...` declarations from a token stream.

    Returns (groups, index of '|') or (None, i) when the shape does not
    match a quantifier declaration list.
    """
    groups = []
    while True:
        names = []
        while i < len(tokens) and tokens[i].kind == NAME:
            names.append(tokens[i].text)
            i += 1
            if i < len(tokens) and tokens[i].kind == SYMBOL and tokens[i].text == ",":
                i += 1
                continue
            break
        if not names or i >= len(tokens) or not (
            tokens[i].kind == SYMBOL and tokens[i].text == ":"
        ):
            return None, i
        i += 1
        start = None
        last = None
        depth = 0
        closing = None
        while i < len(tokens):
            tok = tokens[i]
            if tok.kind == SYMBOL and tok.text == "(":
                depth += 1
            elif tok.kind == SYMBOL and tok.text == ")":
                depth -= 1
            elif depth == 0 and tok.kind == SYMBOL and tok.text in ("|", ","):
                closing = tok.text
                break
            elif depth == 0 and tok.kind == SYMBOL and tok.text in ("{", "}"):
                return None, i
            if start is None:
                start = tok.span[0]
            last = tok.span[1]
            i += 1
        if closing is None or start is None:
            return None, i
        groups.append((names, (start, last)))
        if closing == "|":
            return groups, i
        i += 1  # past the comma, on to the next group


def _domain_type(checker, tm, text, span, env) -> RelType:
    expr, _ = parse_expression(text[span[0] : span[1]])
    if expr is None:
        return RelType(1, frozenset())
    expr, diags = resolve_expr_in_context(
        expr, set(tm.sigs), set(tm.fields), set(env)
    )
    if has_errors(diags):
        return RelType(1, frozenset())
    try:
        t = checker.check_expr(expr, env)
    except KeyError:
        return RelType(1, frozenset())
    if t is None or t.arity != 1:
        return RelType(1, frozenset())
    return t
