"""Exhaustive lasso words for automaton language checks."""
import itertools

from submc.harness.oracles import lasso_mask


def letters(atoms):
    return [frozenset(c) for r in range(len(atoms) + 1)
            for c in itertools.combinations(atoms, r)]


def lasso_words(atoms, max_len):
    """``(prefix, cycle)`` pairs with a non-empty cycle and total length
    at most ``max_len``."""
    alpha = letters(atoms)
    for total in range(1, max_len + 1):
        for word in itertools.product(alpha, repeat=total):
            for split in range(total):
                yield list(word[:split]), list(word[split:])


def satisfies(psi, prefix, cycle) -> bool:
    word = prefix + cycle
    holds = {}
    for i, lab in enumerate(word):
        for p in lab:
            holds.setdefault(p, set()).add(i)
    return bool(lasso_mask(psi, list(range(len(word))), len(prefix), holds) & 1)


def nba_accepts(nba, prefix, cycle) -> bool:
    """Büchi acceptance of ``prefix cycle^omega`` by plain graph search on
    the product with the word's positions."""
    word = prefix + cycle
    loop = len(prefix)

    def succ(node):
        i, q = node
        j = i + 1 if i + 1 < len(word) else loop
        return [(j, r) for r in nba.step(q, word[i])]

    # node (i, q): about to read position i in state q
    start = (0, nba.initial)
    seen, todo = {start}, [start]
    while todo:
        for nxt in succ(todo.pop()):
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    for node in seen:
        if not nba.is_accepting(node[1]):
            continue
        stack, visited = list(succ(node)), set()
        while stack:
            x = stack.pop()
            if x == node:
                return True
            if x not in visited:
                visited.add(x)
                stack.extend(succ(x))
    return False
