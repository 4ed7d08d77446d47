"""Probabilistic prefix automaton over pronunciations.

Every distinct prefix of a drawn pronunciation becomes a node; the root is
the empty prefix and doubles as the silence state. A node's outgoing mass is
the corpus mass of the pronunciations passing through it: each child edge
carries the mass continuing through that phoneme, and word-end nodes carry
the mass of the occurrences that stop there, which is the probability of
returning to the root (emitting silence) instead of continuing.
"""

import zlib
from dataclasses import dataclass, field

from .errors import AutomatonError, ChecksumError, FormatError, VersionError
from .phonemes import SIL, PhonemeInventory

FORMAT_VERSION = 1


@dataclass
class LmNode:
    id: int
    prefix: tuple
    # phoneme -> (child node id, transition probability)
    children: dict = field(default_factory=dict)
    # (word, count) sorted by descending count, ties lexicographic
    homophones: list = field(default_factory=list)
    word_total: int = 0
    continuation_total: int = 0

    @property
    def total_mass(self):
        return self.word_total + self.continuation_total

    @property
    def completion_prob(self):
        return self.word_total / self.total_mass if self.word_total else 0.0

    def emitted(self):
        """Phoneme this node emits while dwelling; the root emits SIL."""
        return self.prefix[-1] if self.prefix else SIL


class PrefixAutomaton:
    def __init__(self, nodes, inventory, word_probs, word_total, provenance=None):
        self.nodes = nodes
        self.root_id = 0
        self.inventory = inventory
        self.word_probs = word_probs
        self.word_total = word_total
        self.provenance = provenance or {}
        self._check()

    def _check(self):
        if not self.nodes or self.nodes[0].prefix != ():
            raise AutomatonError("node 0 must be the empty-prefix root")
        for i, node in enumerate(self.nodes):
            if node.id != i:
                raise AutomatonError("node ids must be dense and ordered")
            total = node.total_mass
            if total <= 0:
                raise AutomatonError(f"node {i} has no outgoing mass")
            s = node.completion_prob + sum(p for _, p in node.children.values())
            if abs(s - 1.0) > 1e-12:
                raise AutomatonError(f"node {i} outgoing mass sums to {s!r}")
        if self.nodes[0].homophones:
            raise AutomatonError("the root cannot complete a word")

    def __len__(self):
        return len(self.nodes)

    def __eq__(self, other):
        if not isinstance(other, PrefixAutomaton):
            return NotImplemented
        return (
            self.inventory == other.inventory
            and self.word_total == other.word_total
            and self.word_probs == other.word_probs
            and [_node_dict(n) for n in self.nodes] == [_node_dict(n) for n in other.nodes]
        )

    def node(self, node_id) -> LmNode:
        return self.nodes[node_id]

    def transition_distribution(self, node_id):
        """Outgoing edges as (successor id, emitted phoneme, probability).

        The word-completion edge (back to the root, emitting SIL) comes
        first when present, then child edges in phoneme order. Probabilities
        sum to 1.
        """
        node = self.nodes[node_id]
        out = []
        if node.word_total:
            out.append((self.root_id, SIL, node.completion_prob))
        for ph in sorted(node.children):
            child_id, p = node.children[ph]
            out.append((child_id, ph, p))
        return out

    def best_homophone(self, node_id):
        """Most frequent word ending at this node; ties go alphabetically."""
        node = self.nodes[node_id]
        if not node.homophones:
            raise AutomatonError(f"node {node_id} completes no word")
        return node.homophones[0][0]


def build_automaton(lex, stats, inventory=None):
    """Build the automaton from a lexicon and corpus statistics.

    Multi-pronunciation words contribute their count split according to the
    pronunciation draws recorded in `stats`, so total path mass equals
    total_words exactly.
    """
    if stats.total_words <= 0 or not stats.word_counts:
        raise AutomatonError("empty corpus statistics")
    weighted = []  # (pronunciation, word, draw count)
    for (word, k), n in stats.pronunciation_counts.items():
        if word not in lex:
            raise AutomatonError(f"counted word {word!r} has no pronunciation")
        prons = lex[word]
        if k >= len(prons):
            raise AutomatonError(f"draw index {k} out of range for {word!r}")
        if n > 0:
            weighted.append((prons[k], word, n))
    if not weighted:
        raise AutomatonError("no pronunciation mass to build from")

    mass = {(): 0}           # prefix -> total mass through it
    ends = {}                # prefix -> {word: draws ending here}
    children = {(): set()}   # prefix -> child phonemes
    for pron, word, n in weighted:
        mass[()] += n
        for i in range(1, len(pron) + 1):
            prefix = pron[:i]
            mass[prefix] = mass.get(prefix, 0) + n
            children.setdefault(prefix, set())
            children[pron[:i - 1]].add(pron[i - 1])
        ends.setdefault(pron, {})
        ends[pron][word] = ends[pron].get(word, 0) + n

    # breadth-first over prefixes, children in phoneme order
    order = [()]
    ids = {(): 0}
    head = 0
    while head < len(order):
        prefix = order[head]
        head += 1
        for ph in sorted(children[prefix]):
            child = prefix + (ph,)
            ids[child] = len(order)
            order.append(child)

    nodes = []
    for prefix in order:
        word_draws = ends.get(prefix, {})
        word_total = sum(word_draws.values())
        total = mass[prefix]
        node = LmNode(
            id=ids[prefix],
            prefix=prefix,
            children={
                ph: (ids[prefix + (ph,)], mass[prefix + (ph,)] / total)
                for ph in sorted(children[prefix])
            },
            homophones=sorted(word_draws.items(), key=lambda kv: (-kv[1], kv[0])),
            word_total=word_total,
            continuation_total=total - word_total,
        )
        nodes.append(node)

    if inventory is None:
        symbols = sorted({ph for prefix in order for ph in prefix})
        inventory = PhonemeInventory(symbols)
    else:
        missing = {ph for prefix in order for ph in prefix} - set(inventory.non_sil())
        if missing:
            raise AutomatonError(f"pronunciations use phonemes outside the inventory: {sorted(missing)}")

    word_probs = {w: c / stats.total_words for w, c in stats.word_counts.items()}
    return PrefixAutomaton(nodes, inventory, word_probs, stats.total_words)


# --- canonical serialization -------------------------------------------------
#
# json.dumps cannot emit fixed-width floats, and the on-disk form must
# round-trip byte-exactly, so the canonical encoder is hand-rolled: sorted
# keys, no whitespace, floats at 17 significant digits.


def _canon(value, out):
    if isinstance(value, dict):
        out.append("{")
        for i, key in enumerate(sorted(value)):
            if i:
                out.append(",")
            if not isinstance(key, str):
                raise FormatError("object keys must be strings")
            out.append(_canon_str(key))
            out.append(":")
            _canon(value[key], out)
        out.append("}")
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _canon(item, out)
        out.append("]")
    elif isinstance(value, bool):
        out.append("true" if value else "false")
    elif isinstance(value, int):
        out.append(repr(value))
    elif isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise FormatError("non-finite float in serialization")
        text = format(value, ".17g")
        if "." not in text and "e" not in text and "E" not in text:
            text += ".0"
        out.append(text)
    elif isinstance(value, str):
        out.append(_canon_str(value))
    elif value is None:
        out.append("null")
    else:
        raise FormatError(f"unserializable value of type {type(value).__name__}")


def _canon_str(s):
    import json

    return json.dumps(s, ensure_ascii=True)


def canonical_json(value) -> bytes:
    out = []
    _canon(value, out)
    return "".join(out).encode("ascii")


def _node_dict(node):
    return {
        "id": node.id,
        "prefix": list(node.prefix),
        "children": [
            {"phoneme": ph, "id": node.children[ph][0], "p": float(node.children[ph][1])}
            for ph in sorted(node.children)
        ],
        "homophones": [{"word": w, "count": c} for w, c in node.homophones],
    }


def serialize(pa: PrefixAutomaton) -> bytes:
    body = {
        "format_version": FORMAT_VERSION,
        "inventory": list(pa.inventory.symbols),
        "word_total": pa.word_total,
        "nodes": [_node_dict(n) for n in pa.nodes],
    }
    if pa.provenance:
        body["provenance"] = pa.provenance
    payload = canonical_json(body)
    wrapper = {"crc32": format(zlib.crc32(payload), "08x"), "lm": body}
    return canonical_json(wrapper) + b"\n"


def deserialize(data: bytes) -> PrefixAutomaton:
    import json

    try:
        wrapper = json.loads(data)
    except ValueError as exc:
        raise FormatError(f"not valid JSON: {exc}") from None
    if not isinstance(wrapper, dict) or "lm" not in wrapper or "crc32" not in wrapper:
        raise FormatError("missing lm/crc32 wrapper")
    body = wrapper["lm"]
    payload = canonical_json(body)
    crc = format(zlib.crc32(payload), "08x")
    if crc != wrapper["crc32"]:
        raise ChecksumError(f"checksum mismatch: stored {wrapper['crc32']}, computed {crc}")
    if body.get("format_version") != FORMAT_VERSION:
        raise VersionError(f"unsupported format_version {body.get('format_version')!r}")

    inventory = PhonemeInventory(body["inventory"])
    word_total = body["word_total"]
    nodes = []
    for nd in body["nodes"]:
        node = LmNode(
            id=nd["id"],
            prefix=tuple(nd["prefix"]),
            children={c["phoneme"]: (c["id"], float(c["p"])) for c in nd["children"]},
            homophones=[(h["word"], h["count"]) for h in nd["homophones"]],
        )
        nodes.append(node)
    # recover integer totals from homophone counts and subtree sums
    word_counts = {}
    for node in nodes:
        node.word_total = sum(c for _, c in node.homophones)
        for w, c in node.homophones:
            word_counts[w] = word_counts.get(w, 0) + c
    for node in reversed(nodes):
        node.continuation_total = sum(
            nodes[cid].total_mass for cid, _ in node.children.values()
        )
    word_probs = {w: c / word_total for w, c in word_counts.items()}
    return PrefixAutomaton(nodes, inventory, word_probs, word_total, body.get("provenance"))


def save(pa, path):
    with open(path, "wb") as fh:
        fh.write(serialize(pa))


def load(path) -> PrefixAutomaton:
    with open(path, "rb") as fh:
        return deserialize(fh.read())
