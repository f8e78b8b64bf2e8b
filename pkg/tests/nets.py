"""Hand-built pairs of nets related by a reduction system.

Each fixture is ``(name, net1_text, net2_text, equations_text)``. The pairs
are small enough for explicit enumeration and are checked for equivalence
in the tests before anything is transferred between them.
"""


def chain(k):
    # tokens move from p to q; reduced to one place holding them all
    return (f"chain{k}", f"pl p ({k})\ntr t p -> q\n", f"pl a ({k})\n", "# A |- a = p + q\n")


def cycle(k):
    return (
        f"cycle{k}",
        f"pl p ({k})\ntr t1 p -> q\ntr t2 q -> p\n",
        f"pl a ({k})\n",
        "# A |- a = p + q\n",
    )


def copy_place(k):
    # c and d mirror p and q
    return (
        f"copy{k}",
        f"pl p ({k})\npl c ({k})\ntr t p c -> q d\n",
        f"pl p ({k})\ntr t p -> q\n",
        "# R |- c = p\n# R |- d = q\n",
    )


def offset(k):
    # x always holds two more tokens than p
    return (
        f"offset{k}",
        f"pl p ({k})\npl x ({k + 2})\ntr t p x -> q\n",
        f"pl p ({k})\ntr t p -> q\n",
        "# R |- x = p + 2\n",
    )


def two_level(k):
    return (
        f"two_level{k}",
        f"pl p ({k})\ntr t1 p -> q\ntr t2 q -> r\n",
        f"pl a2 ({k})\n",
        "# A |- a1 = p + q\n# A |- a2 = a1 + r\n",
    )


def mirrored_chain(k):
    # redundancy s = p together with an agglomeration of p and q
    return (
        f"mirrored{k}",
        f"pl p ({k})\npl s ({k})\ntr t p s -> q\n",
        f"pl a ({k})\n",
        "# R |- s = p\n# A |- a = p + q\n",
    )


def parallel(k1, k2):
    return (
        f"parallel{k1}_{k2}",
        f"pl p ({k1})\npl u ({k2})\ntr t1 p -> q\ntr t2 u -> v\n",
        f"pl a ({k1})\npl b ({k2})\n",
        "# A |- a = p + q\n# A |- b = u + v\n",
    )


def budget(k):
    # the agglomerated place keeps feeding a transition that survives reduction
    return (
        f"budget{k}",
        f"pl p ({k})\ntr t1 p -> q\ntr t2 q -> r\n",
        f"pl a ({k})\ntr t a -> r\n",
        "# A |- a = p + q\n",
    )


def weighted(k):
    # NOT a valid reduction: p only ever loses tokens in pairs, so markings
    # with p odd that the reduced net implies are unreachable
    return (
        f"weighted{k}",
        f"pl p ({2 * k})\ntr t p*2 -> q*2\ntr u q -> r\n",
        f"pl a ({2 * k})\ntr u a -> r\n",
        "# A |- a = p + q\n",
    )


FIXTURES = (
    [chain(k) for k in range(1, 5)]
    + [cycle(k) for k in range(1, 4)]
    + [copy_place(k) for k in range(1, 4)]
    + [offset(k) for k in range(1, 4)]
    + [two_level(k) for k in range(1, 4)]
    + [mirrored_chain(k) for k in (1, 2)]
    + [parallel(1, 2), parallel(2, 2)]
    + [budget(k) for k in range(1, 4)]
)

NEGATIVE = [weighted(1), weighted(2)]
