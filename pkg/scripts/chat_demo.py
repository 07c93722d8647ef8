"""Interactive console session with the consultation chatbot.

Trains the statement graph from the shipped corpus (or loads a saved
store) and starts a read-eval loop. The bot walks through the risk
questions once a consultation trigger appears; "bye" ends the session
and prints the goal status.

Usage:
    python3 scripts/chat_demo.py
    python3 scripts/chat_demo.py --store runs/store.jsonl
"""

import argparse
from pathlib import Path

from prediag.dialogue import DialogueManager
from prediag.store import KnowledgeGraph, load_store

REPO_ROOT = Path(__file__).resolve().parent.parent


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--store", type=Path, default=None,
                        help="saved store; default trains from data/corpus")
    parser.add_argument("--threshold", type=float, default=0.90)
    args = parser.parse_args()

    if args.store:
        graph = load_store(args.store)
    else:
        graph = KnowledgeGraph()
        graph.train_from_files(sorted((REPO_ROOT / "data" / "corpus").glob("*.txt")))
    manager = DialogueManager(graph, threshold=args.threshold)
    session = manager.create_session()
    print(f"{len(graph)} statements loaded; say 'bye' to finish.\n")

    while not session.ended:
        try:
            text = input("you> ").strip()
        except (EOFError, KeyboardInterrupt):
            print()
            break
        if not text:
            continue
        reply = manager.handle_turn(session, text)
        suffix = ""
        if session.last_match_similarity is not None:
            suffix = f"  [match {session.last_match_similarity:.2f}]"
        print(f"bot> {reply}{suffix}")

    manager.finish_session(session)
    print(f"\ngoal: {session.goal_status}, risk: {session.risk_profile.risk_level}")


if __name__ == "__main__":
    main()
