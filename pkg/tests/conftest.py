import json

import numpy as np
import pytest

from swsds.embeddings import EmbeddingStore
from swsds.kb import load_kb

FRUIT_LEMMAS = [
    "pear", "peach", "plum", "cherry", "apricot", "mango",
    "lychee", "banana", "grape", "orange", "melon", "berry",
]
COMPUTER_LEMMAS = ["laptop", "pc", "notebook", "mainframe"]

FRUIT_ANNOTATION = {"sememe": "fruit|水果", "children": []}
COMPUTER_ANNOTATION = {
    "sememe": "computer|电脑",
    "children": [
        {"sememe": "able|能", "relation": "modifier", "children": []},
        {"sememe": "bring|携带", "relation": "patient", "children": []},
    ],
}


def toy_kb_records():
    """Apple with a 3-sememe computer sense and a 1-sememe fruit sense,
    12 fruit-synonym senses, 4 computer-synonym senses, one monosemous
    noun, and polysemous verb/noun fillers."""
    records = [
        {"sense_id": "244396", "lemma": "Apple", "pos": "n",
         "gloss": "computer", "annotation": COMPUTER_ANNOTATION},
        {"sense_id": "244397", "lemma": "Apple", "pos": "n",
         "gloss": "fruit", "annotation": FRUIT_ANNOTATION},
    ]
    for offset, lemma in enumerate(FRUIT_LEMMAS):
        records.append({
            "sense_id": str(244400 + offset), "lemma": lemma, "pos": "n",
            "annotation": FRUIT_ANNOTATION,
        })
    for offset, lemma in enumerate(COMPUTER_LEMMAS):
        records.append({
            "sense_id": str(244420 + offset), "lemma": lemma, "pos": "n",
            "annotation": COMPUTER_ANNOTATION,
        })
    records.extend([
        {"sense_id": "300001", "lemma": "full", "pos": "v",
         "annotation": {"sememe": "fill|充满", "children": []}},
        {"sense_id": "300002", "lemma": "full", "pos": "v",
         "annotation": {"sememe": "satisfy|满足", "children": []}},
        {"sense_id": "300101", "lemma": "art", "pos": "n",
         "annotation": {"sememe": "art|艺术", "children": []}},
        {"sense_id": "300102", "lemma": "art", "pos": "n",
         "annotation": {"sememe": "skill|技巧", "children": []}},
        {"sense_id": "300201", "lemma": "nutrients", "pos": "n",
         "annotation": {"sememe": "nutriment|养分", "children": []}},
    ])
    return records


def write_kb(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    return path


@pytest.fixture
def toy_kb_path(tmp_path):
    return write_kb(tmp_path / "kb.jsonl", toy_kb_records())


@pytest.fixture
def toy_kb(toy_kb_path):
    return load_kb(toy_kb_path)


def fruit_computer_stub_table():
    table = {lemma: 0.9 for lemma in FRUIT_LEMMAS}
    table.update({lemma: 0.1 for lemma in COMPUTER_LEMMAS})
    return table


@pytest.fixture
def stub_table():
    return fruit_computer_stub_table()


def seeded_store(dim=4, keys=(), seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    store = EmbeddingStore(dim)
    for key in keys:
        store.insert(key, rng.uniform(-scale, scale, size=dim))
    return store


def write_store(path, store):
    from swsds.embeddings import save_word2vec_text

    save_word2vec_text(store, path)
    return path


BIRD_CENTER = np.array([2.0, 0.0, 0.0, 0.0])
MACHINE_CENTER = np.array([-2.0, 0.0, 0.0, 0.0])
ANIMAL_CENTER = np.array([0.0, 2.0, 0.0, 0.0])
AGENT_CENTER = np.array([0.0, -2.0, 0.0, 0.0])


def build_decisive_suite():
    """Sentence-pair suite whose labels follow sense identity.

    Two polysemous words sit midway between their sense clusters in the
    base vector table, so plain-lemma distances cannot separate the
    classes; correct sense vectors (synonym-cluster means) can. Returns
    (kb_records, base_store, pairs, stub_table).
    """
    from swsds.evaluate import PairRecord

    clusters = {
        "BIRD": (BIRD_CENTER, ["heron", "stork", "egret"]),
        "MACH": (MACHINE_CENTER, ["hoist", "derrick", "winch"]),
        "ANML": (ANIMAL_CENTER, ["shrew", "vole", "marmot"]),
        "AGNT": (AGENT_CENTER, ["spy", "informer", "operative"]),
    }
    store = EmbeddingStore(4)
    records = []
    sid = 1000
    jitter = [0.05, -0.05, 0.1]
    for name, (center, lemmas) in clusters.items():
        for idx, lemma in enumerate(lemmas):
            offset = np.zeros(4)
            offset[(idx + 1) % 2] = jitter[idx % 3]
            store.insert(lemma, center + offset)
            records.append({
                "sense_id": str(sid), "lemma": lemma, "pos": "n",
                "annotation": {"sememe": name, "children": []},
            })
            sid += 1
    # polysemous words: base vectors midway between their clusters
    records.append({"sense_id": "1", "lemma": "crane", "pos": "n",
                    "annotation": {"sememe": "BIRD", "children": []}})
    records.append({"sense_id": "2", "lemma": "crane", "pos": "n",
                    "annotation": {"sememe": "MACH", "children": []}})
    records.append({"sense_id": "3", "lemma": "mole", "pos": "n",
                    "annotation": {"sememe": "ANML", "children": []}})
    records.append({"sense_id": "4", "lemma": "mole", "pos": "n",
                    "annotation": {"sememe": "AGNT", "children": []}})
    store.insert("crane", np.zeros(4))
    store.insert("mole", np.array([0.0, 0.0, 0.1, 0.0]))
    fillers = ["the", "over", "by", "at", "near", "with"]
    for idx, word in enumerate(fillers):
        store.insert(word, np.array([0.0, 0.0, 0.0, 0.3 + 0.01 * idx]))

    # corpus usage: crane always the bird sense, mole always the agent sense
    stub_table = {w: 0.9 for w in clusters["BIRD"][1] + clusters["AGNT"][1]}
    stub_table.update({w: 0.1 for w in clusters["MACH"][1] + clusters["ANML"][1]})

    def pair(i, left, right, label):
        fa, fb = fillers[i % 6], fillers[(i + 1) % 6]
        return PairRecord(
            a=(left, fa), b=(right, fb), label=label, id=f"p{i:02d}",
            a_pos=("n", "u"), b_pos=("n", "u"),
        )

    pair_defs = [
        # sense-decisive pairs: ambiguous under plain lemma vectors
        ("crane", "heron", 1), ("crane", "stork", 1), ("crane", "egret", 1),
        ("crane", "hoist", 0), ("crane", "derrick", 0), ("crane", "winch", 0),
        ("mole", "spy", 1), ("mole", "informer", 1), ("mole", "operative", 1),
        ("mole", "shrew", 0), ("mole", "vole", 0), ("mole", "marmot", 0),
        # unambiguous pairs: solvable by both arms
        ("heron", "stork", 1), ("hoist", "derrick", 1), ("shrew", "vole", 1),
        ("spy", "informer", 1), ("heron", "hoist", 0), ("stork", "winch", 0),
        ("spy", "vole", 0), ("informer", "marmot", 0), ("egret", "derrick", 0),
        ("operative", "shrew", 0), ("egret", "stork", 1), ("winch", "hoist", 1),
    ]
    pairs = [pair(i, left, right, label)
             for i, (left, right, label) in enumerate(pair_defs)]
    return records, store, pairs, stub_table


def lp_transport_oracle(tokens_a, tokens_b, store):
    """Independent WMD oracle: own nBOW counting, own cost matrix, and an
    LP solve through scipy. Shares no code path with the package solver.
    Tokens must be plain in-store keys."""
    from collections import Counter

    from scipy.optimize import linprog

    ca, cb = Counter(tokens_a), Counter(tokens_b)
    keys_a, keys_b = sorted(ca), sorted(cb)
    a = np.array([ca[k] for k in keys_a], dtype=float)
    a /= a.sum()
    b = np.array([cb[k] for k in keys_b], dtype=float)
    b /= b.sum()
    m, n = len(keys_a), len(keys_b)
    cost = np.zeros((m, n))
    for i, ka in enumerate(keys_a):
        for j, kb in enumerate(keys_b):
            cost[i, j] = float(np.linalg.norm(store.table[ka] - store.table[kb]))
    rows = []
    for i in range(m):
        row = np.zeros(m * n)
        row[i * n:(i + 1) * n] = 1.0
        rows.append(row)
    for j in range(n):
        row = np.zeros(m * n)
        row[j::n] = 1.0
        rows.append(row)
    res = linprog(cost.reshape(-1), A_eq=np.array(rows),
                  b_eq=np.concatenate([a, b]), bounds=(0, None), method="highs")
    assert res.success, res.message
    return float(res.fun)


# Seeded WMD case generators. All three draw word vectors iid N(0, 1) in
# moderately high dimension with several distinct words per document: the
# regime where the relaxed-transport bound dominates the centroid bound
# (as it does on real text), so the full wcd <= rwmd <= wmd chain holds on
# every generated case. The chain's middle inequality is not a theorem for
# arbitrary geometry.

def wmd_oracle_pair_case(seed):
    """A doc pair with <= 4 distinct words per side, for exact-LP checks."""
    from swsds.wmd import Document

    rng = np.random.default_rng(seed)
    dim = int(rng.integers(8, 16))
    store = EmbeddingStore(dim)
    na, nb = int(rng.integers(2, 5)), int(rng.integers(2, 5))
    va = [f"a{i}" for i in range(na)]
    vb = [f"b{i}" for i in range(nb)]
    for w in va + vb:
        store.insert(w, rng.normal(0, 1.0, dim))
    d1 = tuple(str(rng.choice(va)) for _ in range(int(rng.integers(4, 12))))
    d2 = tuple(str(rng.choice(vb)) for _ in range(int(rng.integers(4, 12))))
    return store, Document(d1), Document(d2)


def wmd_chain_case(seed):
    """A doc pair for the lower-bound chain property."""
    from swsds.wmd import Document

    rng = np.random.default_rng(seed)
    dim = int(rng.integers(8, 16))
    store = EmbeddingStore(dim)
    na, nb = int(rng.integers(4, 9)), int(rng.integers(4, 9))
    va = [f"a{i}" for i in range(na)]
    vb = [f"b{i}" for i in range(nb)]
    for w in va + vb:
        store.insert(w, rng.normal(0, 1.0, dim))
    d1 = tuple(str(rng.choice(va)) for _ in range(int(rng.integers(6, 16))))
    d2 = tuple(str(rng.choice(vb)) for _ in range(int(rng.integers(6, 16))))
    return store, Document(d1), Document(d2)


def wmd_triple_case(seed):
    """Three documents over one store, for the metric axioms."""
    from swsds.wmd import Document

    rng = np.random.default_rng(10_000 + seed)
    dim = int(rng.integers(10, 17))
    store = EmbeddingStore(dim)
    docs = []
    for tag in "xyz":
        n = int(rng.integers(6, 10))
        words = [f"{tag}{i}" for i in range(n)]
        for w in words:
            store.insert(w, rng.normal(0, 1.0, dim))
        docs.append(Document(tuple(
            str(rng.choice(words)) for _ in range(int(rng.integers(10, 21))))))
    return store, docs
