"""Fixed-length sequence packing for tokenized records.

Whole tokenized records are appended greedily to a block until the next one
would overflow; the remainder is padded. Records are never split, and every
record starts with the tokenizer's marker id, which is what makes unpacking
unambiguous.

Block file layout: 16-byte header (magic, version, block length, block count,
all little-endian u32 apart from the 4-byte magic) followed by the blocks as
little-endian u32 ids.
"""

from __future__ import annotations

import struct
from typing import BinaryIO, Iterable, Iterator

from .errors import RecordTooLong
from .tokenizer import DEFAULT_VOCAB, Vocab

MAGIC = b"SMPK"
PACK_VERSION = 1
_HEADER = struct.Struct("<4sIII")


def pack_sequences(
    lines: Iterable[str],
    block_length: int,
    out: BinaryIO,
    vocab: Vocab = DEFAULT_VOCAB,
) -> int:
    """Pack records into fixed blocks; returns the number of blocks written."""
    if block_length < 2:
        raise ValueError("block length must be at least 2")
    out.write(_HEADER.pack(MAGIC, PACK_VERSION, block_length, 0))

    pad = vocab.pad_id
    block: list[int] = []
    count = 0

    def flush():
        nonlocal block, count
        if not block:
            return
        block.extend([pad] * (block_length - len(block)))
        out.write(struct.pack(f"<{block_length}I", *block))
        block = []
        count += 1

    for line_no, line in enumerate(lines, start=1):
        ids = vocab.encode(line)
        if len(ids) > block_length:
            raise RecordTooLong(line_no, len(ids), block_length)
        if len(block) + len(ids) > block_length:
            flush()
        block.extend(ids)
    flush()

    out.seek(0)
    out.write(_HEADER.pack(MAGIC, PACK_VERSION, block_length, count))
    out.seek(0, 2)
    return count


def iter_blocks(f: BinaryIO) -> Iterator[list[int]]:
    header = f.read(_HEADER.size)
    magic, version, block_length, count = _HEADER.unpack(header)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != PACK_VERSION:
        raise ValueError(f"unsupported pack version {version}")
    for _ in range(count):
        raw = f.read(4 * block_length)
        yield list(struct.unpack(f"<{block_length}I", raw))


def unpack_sequences(f: BinaryIO, vocab: Vocab = DEFAULT_VOCAB) -> Iterator[str]:
    """Recover the original record stream from a packed block file."""
    marker, pad = vocab.marker_id, vocab.pad_id
    for block in iter_blocks(f):
        record: list[int] = []
        started = False
        for tid in block:
            if tid == pad:
                break
            if tid == marker:
                if started:
                    yield vocab.decode(record)
                record = []
                started = True
                continue
            record.append(tid)
        if started:
            yield vocab.decode(record)
