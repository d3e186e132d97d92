"""
Graph snapshot format.

    AKG-SNAPSHOT<TAB>1
    #corpus_hash<TAB><hex or ->
    #pipeline_version<TAB><text>
    #schema_version<TAB><text>
    #entities<TAB><n>
    #triples<TAB><n>
    #next_id<TAB><n>
    #checksum<TAB><sha256 of the body>
    E<TAB>id<TAB>kind<TAB>surface[<TAB>corpus_id...]
    T<TAB>subject_id<TAB>relation<TAB>object_id

Entities precede triples, each sorted by id; fields escape backslash, tab,
CR and LF. The body is every line after the checksum line.
"""

from dataclasses import dataclass
from pathlib import Path

from app.core.exceptions import (
    CorruptSnapshotError,
    KnowledgeGraphError,
    SnapshotIOError,
    SnapshotVersionError,
)
from app.graph.models import GraphStats
from app.graph.store import GraphStore
from app.ontology import EntityKind, RelationKind
from app.ontology.signatures import SCHEMA_VERSION
from app.utils import atomic_write_text, get_logger, sha256_hex

logger = get_logger(__name__)

MAGIC = "AKG-SNAPSHOT"
FORMAT_VERSION = 1
_HEADER_KEYS = (
    "corpus_hash",
    "pipeline_version",
    "schema_version",
    "entities",
    "triples",
    "next_id",
    "checksum",
)
_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESCAPES = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}


@dataclass
class GraphSnapshot:
    store: GraphStore
    stats: GraphStats
    corpus_hash: str | None
    pipeline_version: str | None
    checksum: str
    path: Path | None = None

    def header(self) -> dict[str, object]:
        return {
            "format_version": FORMAT_VERSION,
            "corpus_hash": self.corpus_hash,
            "pipeline_version": self.pipeline_version,
            "checksum": self.checksum,
            "entities": self.stats.total_entities,
            "triples": self.stats.total_triples,
        }


def escape_field(value: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in value)


def unescape_field(value: str) -> str:
    out: list[str] = []
    chars = iter(value)
    for ch in chars:
        if ch != "\\":
            out.append(ch)
            continue
        nxt = next(chars, None)
        if nxt is None or nxt not in _UNESCAPES:
            raise CorruptSnapshotError(f"Invalid escape sequence in field {value!r}")
        out.append(_UNESCAPES[nxt])
    return "".join(out)


def _body_lines(store: GraphStore) -> list[str]:
    lines = []
    for record in store.iter_entities():
        fields = ["E", str(record.entity_id), record.kind.value, escape_field(record.surface)]
        fields += [escape_field(corpus_id) for corpus_id in sorted(record.provenance)]
        lines.append("\t".join(fields))
    for triple in store.iter_triples():
        lines.append(f"T\t{triple.subject_id}\t{triple.relation.value}\t{triple.object_id}")
    return lines


def serialize_snapshot(store: GraphStore) -> str:
    body = "".join(line + "\n" for line in _body_lines(store))
    header = {
        "corpus_hash": store.corpus_hash or "-",
        "pipeline_version": escape_field(store.pipeline_version or "-"),
        "schema_version": SCHEMA_VERSION,
        "entities": str(len(store)),
        "triples": str(store.triple_count),
        "next_id": str(store.next_id),
        "checksum": sha256_hex(body),
    }
    head = f"{MAGIC}\t{FORMAT_VERSION}\n" + "".join(
        f"#{key}\t{header[key]}\n" for key in _HEADER_KEYS
    )
    return head + body


def save_snapshot(store: GraphStore, path: str | Path) -> GraphSnapshot:
    """
    Atomically write a snapshot.

    Raises:
        SnapshotIOError: If the file cannot be written
    """
    text = serialize_snapshot(store)
    try:
        atomic_write_text(path, text)
    except OSError as e:
        raise SnapshotIOError(
            f"Cannot write snapshot {path}: {e}", details={"path": str(path)}
        ) from e
    checksum = text.split("#checksum\t", 1)[1].split("\n", 1)[0]
    logger.info(
        "snapshot_saved",
        path=str(path),
        entities=len(store),
        triples=store.triple_count,
        checksum=checksum[:12],
    )
    return GraphSnapshot(
        store, store.stats(), store.corpus_hash, store.pipeline_version, checksum, Path(path)
    )


def parse_snapshot(text: str, frozen: bool = True) -> GraphSnapshot:
    """
    Parse snapshot text.

    Raises:
        SnapshotVersionError: Unsupported format version
        CorruptSnapshotError: Bad structure, counts or checksum
    """
    lines = text.split("\n")
    first = lines[0].split("\t")
    if len(first) != 2 or first[0] != MAGIC:
        raise CorruptSnapshotError("Not a graph snapshot (missing magic line)")
    if first[1] != str(FORMAT_VERSION):
        raise SnapshotVersionError(
            f"Unsupported snapshot version {first[1]}",
            details={"found": first[1], "supported": FORMAT_VERSION},
        )
    if len(lines) < len(_HEADER_KEYS) + 2:
        raise CorruptSnapshotError("Snapshot header is truncated")

    header: dict[str, str] = {}
    for offset, key in enumerate(_HEADER_KEYS, start=1):
        parts = lines[offset].split("\t")
        if len(parts) != 2 or parts[0] != f"#{key}":
            raise CorruptSnapshotError(f"Snapshot header line {offset + 1} should be #{key}")
        header[key] = parts[1]

    body_lines = lines[len(_HEADER_KEYS) + 1 :]
    if body_lines and body_lines[-1] == "":
        body_lines = body_lines[:-1]
    body = "".join(line + "\n" for line in body_lines)
    if sha256_hex(body) != header["checksum"]:
        raise CorruptSnapshotError(
            "Snapshot checksum mismatch", details={"expected": header["checksum"]}
        )

    corpus_hash = None if header["corpus_hash"] == "-" else header["corpus_hash"]
    pipeline = unescape_field(header["pipeline_version"])
    store = GraphStore(corpus_hash, None if pipeline == "-" else pipeline)
    try:
        for number, line in enumerate(body_lines, start=len(_HEADER_KEYS) + 2):
            parts = line.split("\t")
            if parts[0] == "E" and len(parts) >= 4:
                store.restore_entity(
                    int(parts[1]),
                    EntityKind(parts[2]),
                    unescape_field(parts[3]),
                    [unescape_field(p) for p in parts[4:]],
                )
            elif parts[0] == "T" and len(parts) == 4:
                store.insert_triple(int(parts[1]), RelationKind(parts[2]), int(parts[3]))
            else:
                raise CorruptSnapshotError(f"Malformed snapshot line {number}")
        store.set_next_id(int(header["next_id"]))
    except CorruptSnapshotError:
        raise
    except (KnowledgeGraphError, ValueError) as e:
        raise CorruptSnapshotError(f"Invalid snapshot content: {e}") from e

    if len(store) != int(header["entities"]) or store.triple_count != int(header["triples"]):
        raise CorruptSnapshotError("Snapshot counts do not match its contents")
    if frozen:
        store.freeze()
    return GraphSnapshot(
        store, store.stats(), corpus_hash, store.pipeline_version, header["checksum"]
    )


def load_snapshot(path: str | Path, frozen: bool = True) -> GraphSnapshot:
    """
    Load a snapshot written by save_snapshot.

    Args:
        path: Snapshot file
        frozen: Return a read-only store (the query service always does)

    Raises:
        SnapshotIOError, CorruptSnapshotError, SnapshotVersionError
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise SnapshotIOError(
            f"Cannot read snapshot {path}: {e}", details={"path": str(path)}
        ) from e
    snapshot = parse_snapshot(text, frozen=frozen)
    snapshot.path = Path(path)
    logger.info(
        "snapshot_loaded",
        path=str(path),
        entities=snapshot.stats.total_entities,
        triples=snapshot.stats.total_triples,
    )
    return snapshot
