import hashlib
import typing as t

from rich.tree import Tree

from ieae.exceptions import InvalidArgument

Quantizer = t.Literal['floor', 'round', 'ceil']
QUANTIZERS: t.Tuple[str, ...] = t.get_args(Quantizer)


def quantize(numerator: int, denominator: int, quantizer: Quantizer = 'floor') -> int:
    """Quantize the rational ``numerator / denominator`` to an integer, exactly.

    ``round`` breaks ties to even.

    :param numerator: Numerator of the rational.
    :param denominator: Positive denominator of the rational.
    :param quantizer: One of ``floor``, ``round``, ``ceil``.
    """
    if denominator <= 0:
        raise InvalidArgument(f'Denominator must be positive, got {denominator}')
    q, remainder = divmod(numerator, denominator)
    if quantizer == 'floor':
        return q
    if quantizer == 'ceil':
        return q + (remainder > 0)
    if quantizer == 'round':
        twice = 2 * remainder
        if twice > denominator or (twice == denominator and q % 2):
            return q + 1
        return q
    raise InvalidArgument(f'Unknown quantizer {quantizer!r}; expected one of {QUANTIZERS}')


def hash_item(item: t.Any) -> str:
    """Hash an item.

    :param item: The item to hash.
    """
    if item is None:
        return hashlib.sha256(('<NoneType>' + str(item)).encode()).hexdigest()
    if isinstance(item, str):
        return hashlib.sha256(item.encode()).hexdigest()
    if isinstance(item, bool):
        return hashlib.sha256(('<bool>' + str(item)).encode()).hexdigest()
    if isinstance(item, float):
        return hashlib.sha256(('<float>' + item.hex()).encode()).hexdigest()
    if isinstance(item, int):
        return hashlib.sha256(('<int>' + str(item)).encode()).hexdigest()
    if isinstance(item, (list, tuple)):
        hashes = ''.join(hash_item(i) for i in item)
        return hashlib.sha256(hashes.encode()).hexdigest()
    if isinstance(item, dict):
        hashes = [(hash_item(k), hash_item(item[k])) for k in sorted(item)]
        return hashlib.sha256(str(hashes).encode()).hexdigest()
    return hashlib.sha256(str(item).encode()).hexdigest()


def dict_to_tree(dictionary: t.Dict, root: str = 'root', tree: Tree | None = None) -> Tree:
    """
    Convert a dictionary to a `rich.Tree`.

    :param dictionary: Input dict
    :param root: Name of root
    :param tree: Ignore
    """
    if tree is None:
        tree = Tree(root)

    for key, value in dictionary.items():
        if isinstance(value, dict):
            subtree = tree.add(f"[bold yellow]{key}")
            dict_to_tree(value, root=root, tree=subtree)
        elif value is None:
            tree.add(f"[bold cyan]{key}: [dim]unset")
        else:
            tree.add(f"[bold cyan]{key}: [green]{value}")

    return tree
