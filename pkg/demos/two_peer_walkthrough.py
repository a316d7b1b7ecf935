"""Walkthrough: how one query travels a two-peer network.

Run from the repository root:

    python3 demos/two_peer_walkthrough.py
"""

from pathlib import Path

from p2pq import (
    answer,
    check_theorem,
    contains,
    evaluate,
    load_network,
    parse_query,
    rew,
    trace,
)

NET_FILE = Path(__file__).resolve().parent / "networks" / "two_peer.json"


def main():
    net = load_network(NET_FILE.read_text())
    print("network:", ", ".join(p.id for p in net.peers))
    for p in net.peers:
        print(f"  {p.id}: relations {sorted(p.relations())}, "
              f"views {[v.name for v in p.views]}, {len(p.facts)} facts")

    q = parse_query("q(x) :- A(x, y), B(y)")
    print(f"\nquery posed at Pi: {q}")
    print(f"local rows only:   {sorted(evaluate(q, net.peer('Pi')).rows)}")

    # One hop: express q through Pi's mapped views, translate the view
    # names across the interface, unfold the Pj definitions.
    q_j = rew(q, net, "Pi", "Pj")
    print(f"\nrewritten for Pj:  {q_j}")

    # The trip back lands strictly inside the original: u2 folds an
    # extra membership test into the return path.
    q_back = rew(q_j, net, "Pj", "Pi")
    print(f"rewritten back:    {q_back}")
    print(f"narrowing:         contains(q, back)={contains(q, q_back)}, "
          f"contains(back, q)={contains(q_back, q)}")

    # E is not exposed through the forward interface, so the narrowed
    # query cannot make another hop.
    third = rew(q_back, net, "Pi", "Pj")
    print(f"third hop:         {'EMPTY (no equivalent rewriting)' if third is None else third}")

    result, steps = trace(net, "Pi", q)
    print(f"\nagent fixpoint in {len(steps)} elaborations:")
    for pid, queries in result.per_peer_queries.items():
        for derived in sorted(queries, key=str):
            print(f"  {pid}: {derived}")

    report = check_theorem(net, "Pi", q)
    print(f"\noracle: {report}")

    full = answer(net, "Pi", q)
    print("\nanswers:")
    for pid, (queries, rows) in full.per_peer.items():
        print(f"  {pid}: {sorted(rows.rows)}")
    print(f"  union: {sorted(full.union.rows)}")
    print("\nPj contributed (5,): the network knew more than Pi alone.")


if __name__ == "__main__":
    main()
