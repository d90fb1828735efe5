"""Generators for the committed synthetic data sets.

The corpus ships the generated data inline in the model sources; the tests
regenerate it from the seeds here and compare.
"""

from ..rng import Stream

LDA_SEED = 20240501
LDA_THETA = (0.95, 0.05, 0.5)     # probability of topic 0 in each document
LDA_PHI = (0.99, 0.01)            # probability of word 0 under each topic
LDA_WORDS_PER_DOC = 10

CRBD_SEED = 6
CRBD_LEAVES = 6
CRBD_ROOT_AGE = 5.0


def lda_documents(seed=LDA_SEED):
    rng = Stream.from_path(seed)
    docs = []
    for theta in LDA_THETA:
        words = []
        for _ in range(LDA_WORDS_PER_DOC):
            z = 0 if rng.random() < theta else 1
            words.append(0 if rng.random() < LDA_PHI[z] else 1)
        docs.append(words)
    return docs


def crbd_tree(seed=CRBD_SEED, leaves=CRBD_LEAVES, root_age=CRBD_ROOT_AGE):
    """A random ranked binary tree with `leaves` tips, root at `root_age`.

    Internal node ages below the root are uniform on (0, root_age), rounded
    to two decimals; each one splits a lineage chosen uniformly at random.
    Returns nested tuples: ("leaf",) or ("node", age, left, right).
    """
    rng = Stream.from_path(seed)
    ages = sorted((round(root_age * rng.random(), 2) for _ in range(leaves - 2)),
                  reverse=True)
    root = ["node", root_age, None, None]
    open_slots = [(root, 2), (root, 3)]
    for age in ages:
        parent, side = open_slots.pop(rng.randbelow(len(open_slots)))
        node = ["node", age, None, None]
        parent[side] = node
        open_slots += [(node, 2), (node, 3)]
    for parent, side in open_slots:
        parent[side] = ["leaf"]

    def freeze(n):
        if n[0] == "leaf":
            return ("leaf",)
        return ("node", n[1], freeze(n[2]), freeze(n[3]))
    return freeze(root)


def tree_source(t, indent="  "):
    """The tree as an expression of the modelling language."""
    if t[0] == "leaf":
        return "#Leaf {age = 0.0}"
    _, age, l, r = t
    inner = indent + "  "
    return (f"#Node {{age = {age!r},\n{inner}left = {tree_source(l, inner)},\n"
            f"{inner}right = {tree_source(r, inner)}}}")


def lda_source(docs):
    return "[" + ", ".join("[" + ", ".join(str(w) for w in d) + "]" for d in docs) + "]"
