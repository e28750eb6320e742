"""
Ranked alphabets, F-terms and finite prefix trees.

A ranked alphabet fixes the transition type F of a system: a state steps to
an F-term (a, x_0, ..., x_{n-1}) where a has arity n. Prefix trees are the
depth-k truncations of the infinite trees such systems generate; each one
stands for the cylinder of all infinite trees extending it.
"""
from dataclasses import dataclass
from itertools import product
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from errors import DepthMismatch, DuplicateSymbol, EmptyAlphabet, InvalidArity, UnknownSymbol


@dataclass(frozen=True)
class RankedAlphabet:
    # (symbol, arity) pairs in canonical order: arity first, then name.
    entries: Tuple[Tuple[str, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "_arity", dict(self.entries))
        object.__setattr__(self, "_rank", {sym: i for i, (sym, _) in enumerate(self.entries)})

    @property
    def symbols(self) -> Tuple[str, ...]:
        return tuple(sym for sym, _ in self.entries)

    @property
    def word_mode(self) -> bool:
        """True iff every arity is at most 1 (words rather than trees)."""
        return all(arity <= 1 for _, arity in self.entries)

    def arity(self, symbol: str) -> int:
        try:
            return self._arity[symbol]
        except KeyError:
            raise UnknownSymbol(symbol) from None

    def rank(self, symbol: str) -> int:
        return self._rank[symbol]

    def __contains__(self, symbol) -> bool:
        return symbol in self._arity


def validate_alphabet(entries: Union[Mapping[str, int], Iterable[Tuple[str, int]]]) -> RankedAlphabet:
    """
    Build a RankedAlphabet from a symbol->arity map or from (symbol, arity) pairs.
    Pairs are how the document format lists symbols, so duplicates are only
    detectable in that form.
    """
    pairs = list(entries.items()) if isinstance(entries, Mapping) else list(entries)
    if not pairs:
        raise EmptyAlphabet("alphabet has no symbols")

    seen = set()
    for symbol, arity in pairs:
        if symbol in seen:
            raise DuplicateSymbol(symbol)
        seen.add(symbol)
        if isinstance(arity, bool) or not isinstance(arity, int) or arity < 0:
            raise InvalidArity(symbol, arity)

    ordered = sorted(pairs, key=lambda pair: (pair[1], pair[0]))
    return RankedAlphabet(tuple((sym, arity) for sym, arity in ordered))


@dataclass(frozen=True)
class FTerm:
    """An element (a, x_0, ..., x_{n-1}) of F_Sigma X."""
    symbol: str
    args: Tuple = ()

    def __str__(self):
        return render_fterm(self)


def render_fterm(term: FTerm) -> str:
    if not term.args:
        return term.symbol
    inner = ",".join(str(arg) for arg in term.args)
    return f"({term.symbol},{inner})"


def enumerate_fterms(alphabet: RankedAlphabet, states: Sequence) -> List[FTerm]:
    """All F-terms over `states`, symbol first, then argument tuples in state order."""
    terms = []
    for symbol, arity in alphabet.entries:
        for args in product(states, repeat=arity):
            terms.append(FTerm(symbol, tuple(args)))
    return terms


# --- Prefix trees ---

@dataclass(frozen=True)
class Node:
    """
    A labeled tree node. A node with a positive-arity symbol and no children
    is a frontier node: the tree was cut there.
    """
    symbol: str
    children: Tuple["Node", ...] = ()


@dataclass(frozen=True)
class PrefixTree:
    depth: int
    root: Optional[Node] = None

    def __post_init__(self):
        if self.depth < 0:
            raise DepthMismatch(f"negative depth {self.depth}")
        if (self.depth == 0) != (self.root is None):
            raise DepthMismatch("depth 0 trees are exactly the empty tree")

    @property
    def is_empty(self) -> bool:
        return self.root is None


EMPTY = PrefixTree(0, None)


def _nodes_of_depth(alphabet: RankedAlphabet, k: int) -> List[Node]:
    # k >= 1: every node tree whose deepest internal level fits in k.
    nodes = []
    below = None
    for symbol, arity in alphabet.entries:
        if arity == 0 or k == 1:
            nodes.append(Node(symbol))
            continue
        if below is None:
            below = _nodes_of_depth(alphabet, k - 1)
        for children in product(below, repeat=arity):
            nodes.append(Node(symbol, tuple(children)))
    return nodes


def prefix_trees_upto(alphabet: RankedAlphabet, k: int) -> List[PrefixTree]:
    """Every k-prefix tree over the alphabet, in canonical order."""
    if k < 0:
        raise DepthMismatch(f"negative depth {k}")
    if k == 0:
        return [EMPTY]
    return [PrefixTree(k, node) for node in _nodes_of_depth(alphabet, k)]


def _node_is_prefix(t: Node, s: Node) -> bool:
    if t.symbol != s.symbol:
        return False
    if not t.children:
        return True
    if len(t.children) != len(s.children):
        return False
    return all(_node_is_prefix(tc, sc) for tc, sc in zip(t.children, s.children))


def is_prefix(t: PrefixTree, s: PrefixTree) -> bool:
    if t.depth > s.depth:
        raise DepthMismatch(f"prefix candidate has depth {t.depth} > {s.depth}")
    if t.is_empty:
        return True
    if s.is_empty:
        return False
    return _node_is_prefix(t.root, s.root)


def _truncate_node(node: Node, k: int) -> Node:
    if k == 1 or not node.children:
        return Node(node.symbol)
    return Node(node.symbol, tuple(_truncate_node(child, k - 1) for child in node.children))


def truncate(s: PrefixTree, k: int) -> PrefixTree:
    if k > s.depth or k < 0:
        raise DepthMismatch(f"cannot truncate depth {s.depth} tree to depth {k}")
    if k == 0:
        return EMPTY
    return PrefixTree(k, _truncate_node(s.root, k))


def node_key(node: Optional[Node], alphabet: RankedAlphabet) -> tuple:
    if node is None:
        return ()
    return (alphabet.rank(node.symbol), tuple(node_key(child, alphabet) for child in node.children))


def tree_key(t: PrefixTree, alphabet: RankedAlphabet) -> tuple:
    """Sort key realizing the canonical tree order (depth, then labels)."""
    return (t.depth, node_key(t.root, alphabet))


def _word_of(node: Node) -> Optional[List[str]]:
    word = []
    while True:
        word.append(node.symbol)
        if not node.children:
            return word
        if len(node.children) != 1:
            return None
        node = node.children[0]


def _render_node(node: Node) -> str:
    if not node.children:
        return node.symbol
    return f"{node.symbol}({','.join(_render_node(child) for child in node.children)})"


def render_tree(t: PrefixTree, alphabet: Optional[RankedAlphabet] = None) -> str:
    """Word-mode chains print as words ("abb"), other trees as terms ("f(a,✓)")."""
    if t.is_empty:
        return "Empty"
    if alphabet is not None and alphabet.word_mode:
        return "".join(_word_of(t.root))
    return _render_node(t.root)


def chain(word: Sequence[str], alphabet: RankedAlphabet) -> PrefixTree:
    """The depth-len(word) tree spelling a word over a word-mode alphabet."""
    if not word:
        return EMPTY
    node = None
    for symbol in reversed(word):
        alphabet.arity(symbol)
        node = Node(symbol) if node is None else Node(symbol, (node,))
    return PrefixTree(len(word), node)
