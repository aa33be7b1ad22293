"""Deterministic stand-in labeler for offline runs.

Reads a bundle file on stdin and answers in the label line format, naming each
community after its most frequent title words. Useful for demos and tests;
real labels come from whatever external labeler the user plugs in.
"""

import re
import sys
from collections import Counter, defaultdict

from .topics import SEPARATOR

STOPWORDS = frozenset("""
a an and are as at by for from in into is of on or the to with via its their
towards toward using based study analysis approach new case review
""".split())


def label_bundle(text: str, n_words: int = 3) -> str:
    words = defaultdict(Counter)
    for line in text.splitlines():
        parts = line.split(SEPARATOR)
        if len(parts) != 3 or not parts[2].strip().isdigit():
            continue
        cid = int(parts[2])
        if re.match(r"10\.\d+/", parts[0]):
            continue  # reference outside the corpus, title unknown
        for w in re.findall(r"[a-z][a-z0-9\-]+", parts[0].lower()):
            if w not in STOPWORDS:
                words[cid][w] += 1
    out = []
    for cid in sorted(words):
        top = sorted(words[cid].items(), key=lambda kv: (-kv[1], kv[0]))[:n_words]
        out.append(f"Community number: {cid} --- Description: {' '.join(w for w, _ in top).title()},")
    return "\n".join(out) + "\n"


def main() -> int:
    sys.stdout.write(label_bundle(sys.stdin.read()))
    return 0


if __name__ == "__main__":
    sys.exit(main())
