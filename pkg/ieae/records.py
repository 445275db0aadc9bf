"""Flat ``key=value`` records: cipher sidecar metadata and key files."""
import dataclasses as dc
import logging
import os
import typing as t
from pathlib import Path

from rich.console import Console

from ieae.cipher import BlockLayout, PublicParams, SecretKey
from ieae.constants import DEFAULT_EMBED_M, DEFAULT_EPSILON_FRACTION, INDEX_LIMIT, LENGTH_FINGERPRINT
from ieae.exceptions import FormatError, InvalidArgument
from ieae.files import read_series
from ieae.lyapunov import EmbeddingConfig, wolf_lle
from ieae.misc import dict_to_tree, hash_item

logger = logging.getLogger(__name__)

R = t.TypeVar('R', bound='Record')


def _coerce(raw: str, hint: t.Any, where: str):
    args = [a for a in t.get_args(hint) if a is not type(None)]
    if args:
        hint = args[0]
    try:
        if hint is int:
            return int(raw)
        if hint is float:
            return float(raw)
    except ValueError as e:
        raise FormatError(f'{where}: expected {hint.__name__}, got {raw!r}') from e
    return raw


def _render(value: t.Any) -> str:
    return repr(value) if isinstance(value, float) else str(value)


@dc.dataclass(frozen=True)
class Record:
    """Base class of flat text records.

    Field ``f`` is written as ``f=value``, or under the file key mapped to it
    in `aliases`. Unset optional fields are omitted. Blank lines and lines
    starting with ``#`` are ignored when reading.
    """

    aliases: t.ClassVar[t.Dict[str, str]] = {}

    @classmethod
    def _file_key(cls, field: str) -> str:
        return {v: k for k, v in cls.aliases.items()}.get(field, field)

    def dict(self) -> t.Dict[str, t.Any]:
        """Field values keyed by their file keys, unset fields included."""
        return {self._file_key(f.name): getattr(self, f.name) for f in dc.fields(self)}

    def encode(self) -> str:
        return ''.join(f'{k}={_render(v)}\n' for k, v in self.dict().items() if v is not None)

    @classmethod
    def decode(cls: t.Type[R], text: str, source: str = '<string>') -> R:
        """Parse a record, reporting problems with their line number.

        :param text: File contents.
        :param source: Name used in diagnostics.
        """
        hints = t.get_type_hints(cls)
        fields = {f.name: f for f in dc.fields(cls)}
        values: t.Dict[str, t.Any] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            where = f'{source}:{lineno}'
            key, sep, raw = line.partition('=')
            key, raw = key.strip(), raw.strip()
            if not sep:
                raise FormatError(f'{where}: expected key=value, got {line!r}')
            name = cls.aliases.get(key, key)
            if name not in fields:
                raise FormatError(f'{where}: unknown key {key!r}')
            if name in values:
                raise FormatError(f'{where}: duplicate key {key!r}')
            values[name] = _coerce(raw, hints[name], where)

        missing = [
            cls._file_key(name) for name, f in fields.items()
            if name not in values and f.default is dc.MISSING and f.default_factory is dc.MISSING
        ]
        if missing:
            raise FormatError(f'{source}: missing key(s) {", ".join(missing)}')
        return cls(**values)

    def save(self, path: str | os.PathLike):
        with open(path, 'w') as f:
            f.write(self.encode())

    @classmethod
    def load(cls: t.Type[R], path: str | os.PathLike) -> R:
        """Read a record from a file.

        :param path: File to read.
        """
        try:
            with open(path) as f:
                text = f.read()
        except OSError as e:
            raise FormatError(f'{os.fspath(path)}: {e.strerror or e}') from e
        return cls.decode(text, source=os.fspath(path))

    @property
    def fingerprint(self) -> str:
        """Short digest identifying the record without revealing it."""
        return hash_item(self.dict())[:LENGTH_FINGERPRINT]

    def show(self, console: Console | None = None, redact: bool = False):
        """Print the record as a tree.

        :param console: Target console, stderr by default.
        :param redact: Print only the fingerprint.
        """
        console = console or Console(stderr=True)
        root = f'{self.__class__.__name__} {self.fingerprint}'
        if redact:
            console.print(root)
            return
        console.print(dict_to_tree(self.dict(), root=root))


@dc.dataclass(frozen=True)
class SidecarMetadata(Record):
    """What a decryptor needs besides the key: mu3, padding and the block layout.

    :param mu3: mu3 of the plain image, in [1, 256].
    :param orig_m: Rows before padding.
    :param orig_n: Columns before padding.
    :param r_rounds: Number of rounds.
    :param p1: Block rows.
    :param p2: Block columns.
    """

    mu3: int
    orig_m: int
    orig_n: int
    r_rounds: int
    p1: int
    p2: int

    def __post_init__(self):
        if not 1 <= self.mu3 <= INDEX_LIMIT:
            raise FormatError(f'mu3={self.mu3} outside [1, {INDEX_LIMIT}]')
        for name in ('orig_m', 'orig_n', 'r_rounds', 'p1', 'p2'):
            if getattr(self, name) < 1:
                raise FormatError(f'{name} must be >= 1, got {getattr(self, name)}')

    @classmethod
    def for_layout(cls, layout: BlockLayout, R: int, mu3: int) -> 'SidecarMetadata':
        return cls(mu3=mu3, orig_m=layout.orig_M, orig_n=layout.orig_N, r_rounds=R, p1=layout.p1, p2=layout.p2)

    @property
    def layout(self) -> BlockLayout:
        return BlockLayout.for_shape(self.orig_m, self.orig_n, self.p1, self.p2)


@dc.dataclass(frozen=True)
class KeyFile(Record):
    """Secret key, round count and the source of the Lyapunov exponent.

    Exactly one of ``lambda`` and ``ecg_path`` must be given. A relative
    ``ecg_path`` is resolved against the key file's directory.
    """

    aliases: t.ClassVar[t.Dict[str, str]] = {'lambda': 'lam'}

    omega1: int
    omega2: int
    mu1: int
    mu2: int
    mu: float
    a: int
    b: int
    r_rounds: int
    lam: t.Optional[float] = None
    ecg_path: t.Optional[str] = None
    embed_m: t.Optional[int] = None
    epsilon: t.Optional[float] = None

    def __post_init__(self):
        if (self.lam is None) == (self.ecg_path is None):
            raise FormatError('Key file needs exactly one of lambda and ecg_path')

    @classmethod
    def build_example(cls) -> 'KeyFile':
        key = SecretKey.build_example()
        return cls(
            omega1=key.omega1, omega2=key.omega2, mu1=key.mu1, mu2=key.mu2,
            mu=key.mu, a=key.a, b=key.b, r_rounds=PublicParams.build_example().R,
            lam=0.6378,
        )

    def secret_key(self) -> SecretKey:
        return SecretKey(
            omega1=self.omega1, omega2=self.omega2, mu1=self.mu1, mu2=self.mu2,
            mu=self.mu, a=self.a, b=self.b,
        )

    def public_params(self) -> PublicParams:
        return PublicParams(R=self.r_rounds)

    def resolve_lambda(
        self,
        base_dir: str | os.PathLike | None = None,
        embed_m: int = DEFAULT_EMBED_M,
        epsilon_fraction: float = DEFAULT_EPSILON_FRACTION,
    ) -> float:
        """Return the exponent, estimating it from the ECG series if needed.

        :param base_dir: Directory relative ``ecg_path`` values are resolved against.
        :param embed_m: Embedding dimension when the file gives none.
        :param epsilon_fraction: Fraction of the data range used when the file gives no epsilon.
        """
        if self.lam is not None:
            return self.lam
        path = Path(self.ecg_path)
        if not path.is_absolute() and base_dir is not None:
            path = Path(base_dir) / path
        series = read_series(path)
        m = self.embed_m if self.embed_m is not None else embed_m
        if self.epsilon is not None:
            cfg = EmbeddingConfig(m=m, epsilon=self.epsilon)
        else:
            if not 0 < epsilon_fraction:
                raise InvalidArgument(f'epsilon fraction must be positive, got {epsilon_fraction}')
            cfg = EmbeddingConfig.for_series(series, m=m, fraction=epsilon_fraction)
        lam, log = wolf_lle(series, cfg)
        logger.info('Estimated lambda from %s: q=%d, t_final=%d', path, log.q, log.t_final)
        return lam
