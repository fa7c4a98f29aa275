"""Architectural state: register file, segmented sparse memory, pc, heap break.

MachineState is immutable; mutating operations return a new state that shares
unchanged memory pages with the old one.  That makes per-cycle history
checkpoints O(pages touched) and exactly restorable, which the reversible
debugger relies on.

Memory is three declared segments (text, static data, dynamic data) plus an
implicitly mapped stack region.  Misaligned and out-of-segment accesses fault;
the text segment is read-only after load.  Unwritten bytes read as zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .isa import REG_COUNT, ABI_NAMES, decode, format_instruction, sign_extend, to_u64

PAGE_SIZE = 4096
_ZERO_PAGE = bytes(PAGE_SIZE)

WINDOW_LIMIT = 4096

SEGMENT_NAMES = ("text", "static", "dynamic", "stack")


@dataclass(frozen=True)
class SegmentLayout:
    """Where the segments live.  Defaults follow the common classroom map."""

    text_base: int = 0x0040_0000
    static_base: int = 0x1001_0000
    heap_base: int = 0x1004_0000
    sp_init: int = 0x7FFF_FFF0
    stack_size: int = 1 << 20

    @property
    def stack_floor(self) -> int:
        return self.sp_init - self.stack_size


class MemAccessFault(Exception):
    """Raised for misaligned, out-of-segment, or text-write accesses."""

    _TEMPLATES = {
        "misaligned": "misaligned {width}-byte access at {addr:#x}",
        "out_of_segment": "address {addr:#x} is outside every mapped segment",
        "write_to_text": "write to read-only text segment at {addr:#x}",
    }

    def __init__(self, kind: str, addr: int, width: int, pc: int | None = None):
        self.kind = kind
        self.addr = addr
        self.width = width
        self.pc = pc
        super().__init__(self._TEMPLATES[kind].format(addr=addr, width=width))


@dataclass(frozen=True)
class MemoryWindow:
    segment: str
    start: int
    rows: tuple[tuple[int, int], ...]  # (addr, byte value)
    text_rows: tuple[tuple[int, int, str, int | None], ...] | None = None


@dataclass(frozen=True)
class MachineState:
    layout: SegmentLayout
    text_end: int
    regs: tuple[int, ...] = field(default=(0,) * REG_COUNT)
    pc: int = 0
    pages: dict = field(default_factory=dict)  # page base -> bytes; copy-on-write
    heap_break: int = 0

    # -- construction -------------------------------------------------------

    @classmethod
    def from_image(cls, image) -> "MachineState":
        """Initial state for an assembled program: zero regs except sp."""
        layout: SegmentLayout = image.layout
        pages: dict[int, bytes] = {}

        def poke(addr: int, data: bytes) -> None:
            for i, b in enumerate(data):
                a = addr + i
                base, off = a & ~(PAGE_SIZE - 1), a & (PAGE_SIZE - 1)
                page = bytearray(pages.get(base, _ZERO_PAGE))
                page[off] = b
                pages[base] = bytes(page)

        for tw in image.text:
            poke(tw.addr, tw.word.to_bytes(4, "little"))
        for addr, b in image.static_data.items():
            poke(addr, bytes([b]))

        regs = [0] * REG_COUNT
        regs[2] = layout.sp_init
        text_end = layout.text_base + 4 * len(image.text)
        return cls(layout=layout, text_end=text_end, regs=tuple(regs),
                   pc=image.entry, pages=pages, heap_break=layout.heap_base)

    # -- registers ----------------------------------------------------------

    def read_reg(self, idx: int) -> int:
        return self.regs[idx]

    def write_reg(self, idx: int, value: int) -> "MachineState":
        if idx == 0:
            return self  # x0 is architecturally a sink
        regs = list(self.regs)
        regs[idx] = to_u64(value)
        return replace(self, regs=tuple(regs))

    def with_pc(self, pc: int) -> "MachineState":
        return replace(self, pc=to_u64(pc))

    def register_dump(self) -> list[dict]:
        return [
            {"index": i, "name": f"x{i}", "abi": ABI_NAMES[i], "value": self.regs[i]}
            for i in range(REG_COUNT)
        ]

    # -- segments -----------------------------------------------------------

    def segment_of(self, addr: int) -> str | None:
        lay = self.layout
        if lay.text_base <= addr < self.text_end:
            return "text"
        if lay.static_base <= addr < lay.heap_base:
            return "static"
        if lay.heap_base <= addr < self.heap_break:
            return "dynamic"
        if lay.stack_floor <= addr <= lay.sp_init:
            return "stack"
        return None

    def segment_extent(self, segment: str) -> tuple[int, int]:
        """Half-open [lo, hi) byte range of a segment as currently mapped."""
        lay = self.layout
        if segment == "text":
            return lay.text_base, self.text_end
        if segment == "static":
            return lay.static_base, lay.heap_base
        if segment == "dynamic":
            return lay.heap_base, self.heap_break
        if segment == "stack":
            return lay.stack_floor, lay.sp_init + 1
        raise ValueError(f"unknown segment {segment!r}")

    def _check_access(self, addr: int, width: int, pc: int | None, write: bool) -> None:
        if width not in (1, 2, 4, 8):
            raise ValueError(f"bad access width {width}")
        if addr % width:
            raise MemAccessFault("misaligned", addr, width, pc)
        seg = self.segment_of(addr)
        if seg is None or self.segment_of(addr + width - 1) != seg:
            raise MemAccessFault("out_of_segment", addr, width, pc)
        if write and seg == "text":
            raise MemAccessFault("write_to_text", addr, width, pc)

    # -- memory -------------------------------------------------------------

    def _read_bytes(self, addr: int, n: int) -> bytes:
        out = bytearray(n)
        i = 0
        while i < n:
            a = addr + i
            base, off = a & ~(PAGE_SIZE - 1), a & (PAGE_SIZE - 1)
            take = min(n - i, PAGE_SIZE - off)
            page = self.pages.get(base)
            if page is not None:
                out[i:i + take] = page[off:off + take]
            i += take
        return bytes(out)

    def load(self, addr: int, width: int, signed: bool = False, pc: int | None = None) -> int:
        """Little-endian read; unmapped bytes inside a segment read as zero."""
        self._check_access(addr, width, pc, write=False)
        raw = int.from_bytes(self._read_bytes(addr, width), "little")
        if signed:
            return to_u64(sign_extend(raw, width * 8))
        return raw

    def store(self, addr: int, width: int, value: int, pc: int | None = None) -> "MachineState":
        self._check_access(addr, width, pc, write=True)
        data = (value & ((1 << (width * 8)) - 1)).to_bytes(width, "little")
        base, off = addr & ~(PAGE_SIZE - 1), addr & (PAGE_SIZE - 1)
        # aligned accesses with width dividing the page size never straddle pages
        page = bytearray(self.pages.get(base, _ZERO_PAGE))
        page[off:off + width] = data
        pages = dict(self.pages)
        pages[base] = bytes(page)
        return replace(self, pages=pages)

    def load_byte_raw(self, addr: int) -> int:
        """Unchecked byte peek used by window rendering and string reads."""
        return self._read_bytes(addr, 1)[0]

    # -- heap ---------------------------------------------------------------

    def sbrk(self, nbytes: int, pc: int | None = None) -> tuple["MachineState", int]:
        """Grow the dynamic segment; returns (new state, old break)."""
        if nbytes < 0:
            raise MemAccessFault("out_of_segment", to_u64(self.heap_break + nbytes), 1, pc)
        granted = (nbytes + 7) & ~7
        new_break = self.heap_break + granted
        if new_break > self.layout.stack_floor:
            raise MemAccessFault("out_of_segment", new_break, 1, pc)
        old = self.heap_break
        return replace(self, heap_break=new_break), old

    # -- inspection ---------------------------------------------------------

    def memory_window(self, segment: str, addr: int, length: int, image=None) -> MemoryWindow:
        """Byte rows for a segment slice; text windows also get disassembly."""
        if length < 0 or length > WINDOW_LIMIT:
            raise ValueError(f"window length must be in [0, {WINDOW_LIMIT}]")
        if length == 0:
            return MemoryWindow(segment, addr, ())
        lo, hi = self.segment_extent(segment)
        if not (lo <= addr and addr + length <= hi):
            raise ValueError(
                f"window [{addr:#x}, {addr + length:#x}) is outside the {segment} segment")
        data = self._read_bytes(addr, length)
        rows = tuple((addr + i, data[i]) for i in range(length))
        text_rows = None
        if segment == "text":
            source_of = {}
            if image is not None:
                source_of = {tw.addr: tw.source_line for tw in image.text}
            words = []
            first = addr - (addr % 4)
            a = first
            while a < addr + length:
                if lo <= a and a + 4 <= hi:
                    word = int.from_bytes(self._read_bytes(a, 4), "little")
                    words.append((a, word, format_instruction(decode(word, a)),
                                  source_of.get(a)))
                a += 4
            text_rows = tuple(words)
        return MemoryWindow(segment, addr, rows, text_rows)

    def written_bytes(self, baseline: "MachineState") -> dict[int, int]:
        """Bytes that differ from a baseline state; used by equivalence tests."""
        diff: dict[int, int] = {}
        bases = set(self.pages) | set(baseline.pages)
        for base in bases:
            mine = self.pages.get(base, _ZERO_PAGE)
            theirs = baseline.pages.get(base, _ZERO_PAGE)
            if mine == theirs:
                continue
            for i, (a, b) in enumerate(zip(mine, theirs)):
                if a != b:
                    diff[base + i] = a
        return diff
