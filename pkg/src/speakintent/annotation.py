"""Interval annotation ingestion: an EAF subset plus a plain line format.

The EAF reader handles the elements needed for time-aligned tiers only:
TIME_ORDER/TIME_SLOT, TIER, ALIGNABLE_ANNOTATION and ANNOTATION_VALUE.
Times are integer milliseconds resolved through TIME_SLOT references and
exposed in seconds.

The line format is equivalent and round-trip safe:

    # participant=<id>
    tier,start_ms,end_ms,label
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataFormatError
from .vad import CaseLabel, CaseWindow

TIER_NAMES = {
    CaseLabel.INTS_START: "INTS_start",
    CaseLabel.INTS_CONTINUE: "INTS_continue",
}
CUE_TIER = "cues"
CANONICAL_CUES = (
    "posture change",
    "audible smack/tongue click",
    "filler",
    "first word of utterance",
    "audible deep breath",
)


@dataclass(frozen=True)
class AnnotationTier:
    """Sorted labelled intervals ((start_s, end_s, label), ...) for one tier."""

    tier_name: str
    intervals: tuple[tuple[float, float, str], ...]

    def __post_init__(self):
        for start, end, _ in self.intervals:
            if not start < end:
                raise ValueError(f"tier {self.tier_name!r}: empty interval [{start}, {end})")
        object.__setattr__(self, "intervals", tuple(sorted(self.intervals)))

    def __len__(self) -> int:
        return len(self.intervals)


@dataclass(frozen=True)
class AnnotationDocument:
    """All tiers for one participant, times in seconds (ms resolution)."""

    participant_id: str
    tiers: dict[str, AnnotationTier] = field(default_factory=dict)

    def tier(self, name: str) -> AnnotationTier:
        if name not in self.tiers:
            raise DataFormatError(f"unknown tier name {name!r} (have {sorted(self.tiers)})")
        return self.tiers[name]


def parse_eaf(path) -> AnnotationDocument:
    """Parse the supported EAF subset into an AnnotationDocument."""
    path = Path(path)
    try:
        root = ET.parse(path).getroot()
    except ET.ParseError as exc:
        raise DataFormatError(f"{path}: malformed XML ({exc})") from None

    slots: dict[str, int] = {}
    time_order = root.find("TIME_ORDER")
    if time_order is not None:
        for slot in time_order.findall("TIME_SLOT"):
            slot_id = slot.get("TIME_SLOT_ID")
            value = slot.get("TIME_VALUE")
            if slot_id is None:
                raise DataFormatError(f"{path}: TIME_SLOT without TIME_SLOT_ID")
            if value is None:
                raise DataFormatError(f"{path}: time slot {slot_id!r} has no TIME_VALUE")
            slots[slot_id] = int(value)

    participant = None
    tiers: dict[str, AnnotationTier] = {}
    for tier_el in root.findall("TIER"):
        tier_name = tier_el.get("TIER_ID") or ""
        participant = participant or tier_el.get("PARTICIPANT")
        intervals = []
        for ann in tier_el.iter("ALIGNABLE_ANNOTATION"):
            ann_id = ann.get("ANNOTATION_ID", "?")
            times = []
            for ref_attr in ("TIME_SLOT_REF1", "TIME_SLOT_REF2"):
                ref = ann.get(ref_attr)
                if ref is None or ref not in slots:
                    raise DataFormatError(
                        f"{path}: annotation {ann_id!r} in tier {tier_name!r}: "
                        f"unresolved time slot {ref!r}"
                    )
                times.append(slots[ref])
            value_el = ann.find("ANNOTATION_VALUE")
            label = (value_el.text or "") if value_el is not None else ""
            intervals.append((times[0] / 1000.0, times[1] / 1000.0, label))
        tiers[tier_name] = AnnotationTier(tier_name, tuple(intervals))

    return AnnotationDocument(participant_id=participant or path.stem, tiers=tiers)


def parse_lines(path) -> AnnotationDocument:
    """Parse the plain line format (see module docstring)."""
    path = Path(path)
    participant = path.stem
    raw: dict[str, list[tuple[float, float, str]]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                for tok in text[1:].split():
                    if tok.startswith("participant="):
                        participant = tok.split("=", 1)[1]
                continue
            parts = text.split(",", 3)
            if len(parts) < 3:
                raise DataFormatError(f"{path}:{lineno}: expected tier,start_ms,end_ms[,label]")
            tier_name = parts[0]
            try:
                start_ms, end_ms = int(parts[1]), int(parts[2])
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: times must be integer milliseconds")
            label = parts[3] if len(parts) == 4 else ""
            raw.setdefault(tier_name, []).append((start_ms / 1000.0, end_ms / 1000.0, label))
    tiers = {name: AnnotationTier(name, tuple(ivals)) for name, ivals in raw.items()}
    return AnnotationDocument(participant_id=participant, tiers=tiers)


def load_annotations(path) -> AnnotationDocument:
    """Dispatch on file content: EAF XML or the line format."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        head = fh.read(64).lstrip()
    if head.startswith("<"):
        return parse_eaf(path)
    return parse_lines(path)


def write_lines(doc: AnnotationDocument, path) -> None:
    """Serialize to the line format (times rounded to whole milliseconds)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# participant={doc.participant_id}\n")
        for name in sorted(doc.tiers):
            for start, end, label in doc.tiers[name].intervals:
                fh.write(f"{name},{round(start * 1000)},{round(end * 1000)},{label}\n")


def write_eaf(doc: AnnotationDocument, path) -> None:
    """Serialize to EAF.  Output is deterministic (no dates, stable ids)."""
    root = ET.Element("ANNOTATION_DOCUMENT", {"AUTHOR": "speakintent", "FORMAT": "3.0", "VERSION": "3.0"})
    ET.SubElement(ET.SubElement(root, "HEADER"), "PROPERTY", {"NAME": "participant"}).text = doc.participant_id
    time_order = ET.SubElement(root, "TIME_ORDER")
    slot_ids: dict[int, str] = {}

    def slot_for(ms: int) -> str:
        if ms not in slot_ids:
            slot_ids[ms] = f"ts{len(slot_ids) + 1}"
            ET.SubElement(time_order, "TIME_SLOT", {"TIME_SLOT_ID": slot_ids[ms], "TIME_VALUE": str(ms)})
        return slot_ids[ms]

    ann_counter = 0
    for name in sorted(doc.tiers):
        tier_el = ET.SubElement(root, "TIER", {"TIER_ID": name, "PARTICIPANT": doc.participant_id})
        for start, end, label in doc.tiers[name].intervals:
            ann_counter += 1
            ann = ET.SubElement(tier_el, "ANNOTATION")
            aligned = ET.SubElement(
                ann,
                "ALIGNABLE_ANNOTATION",
                {
                    "ANNOTATION_ID": f"a{ann_counter}",
                    "TIME_SLOT_REF1": slot_for(round(start * 1000)),
                    "TIME_SLOT_REF2": slot_for(round(end * 1000)),
                },
            )
            ET.SubElement(aligned, "ANNOTATION_VALUE").text = label
    ET.indent(root)
    ET.ElementTree(root).write(path, encoding="utf-8", xml_declaration=True)


def intention_windows(doc: AnnotationDocument, label: CaseLabel, window_s: float) -> list[CaseWindow]:
    """[end - window_s, end) per annotated interval of the requested kind.

    Windows that would start before the recording (time 0) are dropped.
    """
    if label not in TIER_NAMES:
        raise ValueError(f"label must be one of {sorted(TIER_NAMES)}, got {label!r}")
    if window_s <= 0:
        raise ValueError("window_s must be positive")
    tier = doc.tier(TIER_NAMES[label])
    out = []
    for _, end, _ in tier.intervals:
        start = end - window_s
        if start < 0:
            continue
        out.append(CaseWindow(doc.participant_id, float(start), float(end), label))
    return out


def cue_summary(doc: AnnotationDocument) -> dict[str, int]:
    """Counts per canonical cue label in the cue tier; others under 'other'."""
    tier = doc.tiers.get(CUE_TIER)
    if tier is None:
        return {}
    counts: dict[str, int] = {}
    for _, _, label in tier.intervals:
        key = label if label in CANONICAL_CUES else "other"
        counts[key] = counts.get(key, 0) + 1
    return counts


def cue_presence(docs, cue_label: str) -> int:
    """Number of documents with at least one cue of the given label."""
    return sum(1 for doc in docs if cue_summary(doc).get(cue_label, 0) > 0)
