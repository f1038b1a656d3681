"""Bottom-up evaluation of non-recursive Datalog with negation.

IDBs are computed in dependency order; each rule joins its positive atoms
left to right and applies negated atoms and built-ins as soon as their
variables are bound.
"""

from __future__ import annotations

from typing import Callable

from ..ast.common import Const
from ..ast.datalog import Atom, Builtin, NegatedAtom, Program, Rule, Var
from ..catalog import Schema, sort_of
from ..errors import FragmentError, SchemaError, SortError
from .common import OPERATOR_FN, Instance, ResultRelation, check_sorts


def dependency_order(p: Program) -> list[str]:
    """IDBs ordered so that every IDB follows the IDBs its rules reference."""
    idbs = p.idbs
    deps = {n: [a.predicate for r in p.rules_for(n) for a in _atoms(r) if a.predicate in idbs] for n in idbs}
    out: list[str] = []
    state: dict[str, int] = {}

    def visit(n: str) -> None:
        if state.get(n) == 2:
            return
        if state.get(n) == 1:
            raise FragmentError(f"recursive dependency through {n}")
        state[n] = 1
        for m in deps[n]:
            visit(m)
        state[n] = 2
        out.append(n)

    for n in idbs:
        visit(n)
    return out


def _atoms(r: Rule):
    for b in r.body:
        if isinstance(b, Atom):
            yield b
        elif isinstance(b, NegatedAtom):
            yield b.atom


class _RuleProgram:
    def __init__(self, rule: Rule, sorts_of: Callable[[str], tuple], idbs: set[str]):
        self.head = rule.head
        slots: dict[str, int] = {}
        var_sort: dict[str, str] = {}

        def note(v: Var, sort: str, where: str) -> None:
            if v.name in var_sort and var_sort[v.name] != sort:
                raise SortError(f"variable {v.name} used with sorts {var_sort[v.name]} and {sort} in {where}")
            var_sort[v.name] = sort

        steps = []  # (kind, payload)
        positives = rule.positive()
        for a in positives:
            sorts = sorts_of(a.predicate)
            if len(sorts) != len(a.terms):
                raise SchemaError(f"arity mismatch for {a.predicate}")
            tests, binds, same = [], [], []
            first: dict[str, int] = {}
            for i, (t, s) in enumerate(zip(a.terms, sorts)):
                if isinstance(t, Const):
                    check_sorts(sort_of(t.value), s, f"atom {a.predicate}")
                    tests.append((i, None, t.value))
                else:
                    note(t, s, f"atom {a.predicate}")
                    if t.name in first:
                        # repeated inside this atom: compare positions of the same tuple
                        same.append((i, first[t.name]))
                    elif t.name in slots:
                        tests.append((i, slots[t.name], None))
                    else:
                        slots[t.name] = len(slots)
                        first[t.name] = i
                        binds.append((i, slots[t.name]))
            steps.append([a.predicate, tests, binds, [], same])
        bound_after = []
        seen: set[str] = set()
        for a in positives:
            seen |= {t.name for t in a.terms if isinstance(t, Var)}
            bound_after.append(set(seen))

        pre: list = []

        def level_for(names: set[str]) -> int:
            if not names:
                return -1
            for i, b in enumerate(bound_after):
                if names <= b:
                    return i
            raise FragmentError(f"unsafe rule for {rule.head.predicate}: variables {sorted(names - seen)} unbound")

        for b in rule.body:
            if isinstance(b, NegatedAtom):
                a = b.atom
                sorts = sorts_of(a.predicate)
                if len(sorts) != len(a.terms):
                    raise SchemaError(f"arity mismatch for {a.predicate}")
                names = {t.name for t in a.terms if isinstance(t, Var)}
                for t, s in zip(a.terms, sorts):
                    if isinstance(t, Var):
                        note(t, s, f"negated atom {a.predicate}")
                    else:
                        check_sorts(sort_of(t.value), s, f"negated atom {a.predicate}")
                probe = [(None, t.value) if isinstance(t, Const) else (slots.get(t.name), None) for t in a.terms]
                if any(s is None and v is None for s, v in probe):
                    raise FragmentError(f"unsafe variable in negated atom {a.predicate}")
                level = level_for(names)
                (pre if level < 0 else steps[level][3]).append(_negation(a.predicate, probe))
            elif isinstance(b, Builtin):
                names = {t.name for t in (b.left, b.right) if isinstance(t, Var)}
                sides = []
                for t in (b.left, b.right):
                    if isinstance(t, Const):
                        sides.append((None, t.value, sort_of(t.value)))
                    else:
                        if t.name not in slots:
                            raise FragmentError(f"unsafe variable {t.name} in built-in")
                        sides.append((slots[t.name], None, var_sort[t.name]))
                check_sorts(sides[0][2], sides[1][2], "built-in")
                level = level_for(names)
                (pre if level < 0 else steps[level][3]).append(_builtin(b.op, sides))
        head = []
        self.head_sorts = []
        for t in rule.head.terms:
            if isinstance(t, Const):
                head.append((None, t.value))
                self.head_sorts.append(sort_of(t.value))
            else:
                if t.name not in slots:
                    raise FragmentError(f"unsafe head variable {t.name} in {rule.head.predicate}")
                head.append((slots[t.name], None))
                self.head_sorts.append(var_sort[t.name])
        self.head_getters = head
        self.steps = steps
        self.pre = pre
        self.size = len(slots)
        self.idbs = idbs

    def run(self, db: Instance, derived: dict) -> set:
        env = [None] * self.size
        out: set = set()
        steps = self.steps
        head = self.head_getters
        sources = [derived[s[0]] if s[0] in self.idbs else db[s[0]] for s in steps]
        if not all(c(env, db, derived) for c in self.pre):
            return out

        def go(i: int) -> None:
            if i == len(steps):
                out.add(tuple(env[s] if s is not None else v for s, v in head))
                return
            _, tests, binds, checks, same = steps[i]
            for t in sources[i]:
                if any(t[p] != t[q] for p, q in same):
                    continue
                ok = True
                for pos, slot, value in tests:
                    if t[pos] != (env[slot] if slot is not None else value):
                        ok = False
                        break
                if not ok:
                    continue
                for pos, slot in binds:
                    env[slot] = t[pos]
                if all(c(env, db, derived) for c in checks):
                    go(i + 1)

        go(0)
        return out


def _negation(pred: str, probe: list):
    def check(env, db, derived) -> bool:
        rows = derived[pred] if pred in derived else db[pred]
        return tuple(env[s] if s is not None else v for s, v in probe) not in rows

    return check


def _builtin(op: str, sides: list):
    fn = OPERATOR_FN[op]
    (ls, lv, _), (rs, rv, _) = sides

    def check(env, db, derived) -> bool:
        left = env[ls] if ls is not None else lv
        right = env[rs] if rs is not None else rv
        return fn(left, right)

    return check


def compile_datalog(p: Program, schema: Schema) -> Callable[[Instance], ResultRelation]:
    """Type-check ``p`` against ``schema`` and return an evaluator over instances."""
    order = dependency_order(p)
    idbs = set(order)
    for name in idbs:
        if name in schema:
            raise SchemaError(f"IDB {name} clashes with a base relation")
    idb_sorts: dict[str, tuple] = {}

    def sorts_of(pred: str) -> tuple:
        if pred in idb_sorts:
            return idb_sorts[pred]
        return schema.relation(pred).sorts

    programs: list[tuple[str, _RuleProgram]] = []
    for name in order:
        for r in p.rules_for(name):
            prog = _RuleProgram(r, sorts_of, idbs)
            sorts = tuple(prog.head_sorts)
            if name in idb_sorts and idb_sorts[name] != sorts:
                raise SortError(f"rules for {name} disagree on head sorts")
            idb_sorts[name] = sorts
            programs.append((name, prog))
    answer = p.answer_predicate()
    head = p.rules_for(answer)[0].head
    attrs = tuple(t.name if isinstance(t, Var) and not t.anonymous else f"col{i + 1}" for i, t in enumerate(head.terms))
    if len(set(attrs)) != len(attrs):
        attrs = tuple(f"col{i + 1}" for i in range(len(attrs)))

    def run(db: Instance) -> ResultRelation:
        derived: dict[str, set] = {name: set() for name in order}
        for name, prog in programs:
            derived[name] |= prog.run(db, derived)
        return ResultRelation(attrs, frozenset(derived[answer]))

    return run
