"""One-step query rewriting across a mapping interface.

The pipeline for pushing a query q from peer i toward peer j is

    rew = unfold_j . subst . minicon_i . split_builtins

1. split_builtins separates comparison constraints from the relational
   reduct;
2. minicon searches for a view expression over i's mapped views whose
   unfolding is equivalent to the reduct (not merely contained in it);
3. subst renames each view to its paired view on j;
4. unfold expands j's view definitions, producing a base-level query
   over j's schema, and the constraints are re-attached.

Absence of a rewriting is a value, not an error: minicon and rew return
None for it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import QueryError, UnknownViewError, ValidationError
from .network import LEVEL_BASE, MappingPair, Network, ViewDefinition
from .queries import (
    Atom,
    BuiltinAtom,
    ConjunctiveQuery,
    Substitution,
    apply,
    atom_key,
    canonicalize,
    equivalent,
    freshen,
    match_args,
)

__all__ = ["ViewExpression", "split_builtins", "minicon", "subst", "unfold", "rew"]


@dataclass(frozen=True, slots=True)
class ViewExpression:
    """A conjunctive query whose body predicates are view names of the
    owning peer."""

    query: ConjunctiveQuery
    owner: str

    def __str__(self) -> str:
        return f"{self.query}  [views of {self.owner}]"


def split_builtins(q: ConjunctiveQuery) -> tuple[ConjunctiveQuery, tuple[BuiltinAtom, ...]]:
    """Split q into its relational reduct and its constraint list.  The
    reduct keeps name, head, and body."""
    reduct = ConjunctiveQuery(q.name, q.head_vars, q.body, ())
    for b in q.builtins:
        for v in b.variables():
            if v not in reduct.body_var_set():
                raise QueryError(f"unsafe constraint {b}: variable {v} not bound in body")
    return reduct, q.builtins


def _definition_homs(defn: ConjunctiveQuery, target_body: tuple[Atom, ...]) -> list[dict]:
    """All maps of the definition's variables into the target's terms
    such that every definition atom lands in the target body."""
    by_pred: dict[tuple[str, int], list[Atom]] = {}
    for a in target_body:
        by_pred.setdefault((a.predicate, len(a.args)), []).append(a)
    results: list[dict] = []

    def rec(i: int, env: dict):
        if i == len(defn.body):
            results.append(env)
            return
        a = defn.body[i]
        for cand in by_pred.get((a.predicate, len(a.args)), ()):
            env2 = match_args(a.args, cand.args, env)
            if env2 is not None:
                rec(i + 1, env2)

    rec(0, {})
    return results


def minicon(q: ConjunctiveQuery, views: Sequence[ViewDefinition], owner: str) -> Optional[ViewExpression]:
    """Search for a view expression over `views` equivalent to q.

    q must be constraint-free.  Candidate view atoms are produced by
    folding each view definition into q's body; an equivalent rewriting,
    if one exists at all, always exists among conjunctions of such atoms
    using no more atoms than q's body has.  Candidates are tried in
    ascending size and lexicographic atom order and the first equivalent
    one is returned, so the choice is deterministic; None means no
    equivalent rewriting exists within the bound.
    """
    if q.builtins:
        raise QueryError(f"minicon expects a constraint-free query, got {q.name!r}")

    candidates: list[Atom] = []
    seen = set()
    for view in views:
        for theta in _definition_homs(view.definition, q.body):
            atom = Atom(view.name, tuple(theta[v] for v in view.definition.head_vars))
            if atom not in seen:
                seen.add(atom)
                candidates.append(atom)
    candidates.sort(key=atom_key)

    head_set = set(q.head_vars)
    views = tuple(views)
    for size in range(1, min(len(q.body), len(candidates)) + 1):
        for combo in itertools.combinations(candidates, size):
            covered = {t for a in combo for t in a.variables()}
            if not head_set <= covered:
                continue
            psi = ViewExpression(ConjunctiveQuery(q.name, q.head_vars, combo, ()), owner)
            if equivalent(unfold(psi, views), q):
                return psi
    return None


def subst(psi: ViewExpression, group: Sequence[MappingPair], owner: str) -> Optional[ViewExpression]:
    """Rename each view in psi to its paired view on `owner`.  When a
    view appears in several pairs of the group, the first declared pair
    wins.  None when some view of psi is not paired at all."""
    table: dict[str, str] = {}
    for pair in group:
        table.setdefault(pair.from_view, pair.to_view)
    body = []
    for a in psi.query.body:
        if a.predicate not in table:
            return None
        body.append(Atom(table[a.predicate], a.args))
    q = psi.query
    return ViewExpression(
        ConjunctiveQuery(q.name, q.head_vars, tuple(body), q.builtins), owner
    )


def unfold(phi: ViewExpression, views: Sequence[ViewDefinition]) -> ConjunctiveQuery:
    """Expand every view atom of phi with its definition.

    Definition head variables are unified with the atom's arguments;
    each instance gets fresh existential variables, pairwise distinct
    across instances.  Raises UnknownViewError for an undefined view
    name and "malformed mapping" when an atom's arity disagrees with the
    definition.
    """
    defs = {v.name: v for v in views}
    used = {v.name for v in phi.query.variables()}
    body: list[Atom] = []
    for a in phi.query.body:
        view = defs.get(a.predicate)
        if view is None:
            raise UnknownViewError(f"unknown view {a.predicate!r}")
        defn = view.definition
        if len(defn.head_vars) != len(a.args):
            raise ValidationError(
                f"malformed mapping: view {a.predicate!r} used with arity "
                f"{len(a.args)}, defined with {len(defn.head_vars)}"
            )
        inst = freshen(defn, used)
        used.update(v.name for v in inst.variables())
        unifier = Substitution(dict(zip(inst.head_vars, a.args)))
        body.extend(apply(unifier, atom) for atom in inst.body)
    q = phi.query
    return ConjunctiveQuery(q.name, q.head_vars, tuple(body), q.builtins)


def rew(q: ConjunctiveQuery, net: Network, i: str, j: str) -> Optional[ConjunctiveQuery]:
    """One-step rewriting of q from peer i toward peer j, canonicalized;
    None when no equivalent rewriting crosses the interface.

    q must be base-level over i's schema and (i, j) must be a declared
    interface direction.
    """
    peer_i = net.peer(i)
    peer_j = net.peer(j)
    group = net.interfaces.get((i, j))
    if group is None:
        raise ValidationError(f"no declared interface from {i!r} to {j!r}")
    if peer_i.query_level(q) != LEVEL_BASE:
        raise QueryError(f"query/schema mismatch: {q.name!r} is not base-level on {i!r}")

    reduct, constraints = split_builtins(q)
    from_names = {pair.from_view for pair in group}
    mapped_views = tuple(v for v in peer_i.views if v.name in from_names)

    psi = minicon(reduct, mapped_views, owner=i)
    if psi is None:
        return None
    phi = subst(psi, group, owner=j)
    if phi is None:
        return None
    try:
        base = unfold(phi, peer_j.views)
    except UnknownViewError:
        return None

    # constraints ride through unchanged; if a constrained variable did
    # not survive the rewriting there is nothing to attach them to
    body_vars = base.body_var_set()
    for c in constraints:
        if any(v not in body_vars for v in c.variables()):
            return None
    result = ConjunctiveQuery(q.name, base.head_vars, base.body, constraints)
    return canonicalize(result)
