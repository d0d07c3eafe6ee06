"""Dataset ingestion: the PH2 directory layout and plain CSV manifests."""
from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass
from pathlib import Path

log = logging.getLogger(__name__)

SOURCES = ("ph2", "dermis", "dermquest", "custom")
MELANOMA = "melanoma"
NON_MELANOMA = "non-melanoma"
IMAGE_SUFFIXES = (".bmp", ".png", ".jpg", ".jpeg", ".tif", ".tiff")

_LABEL_ALIASES = {
    "melanoma": MELANOMA, "malignant": MELANOMA, "1": MELANOMA,
    "non-melanoma": NON_MELANOMA, "nonmelanoma": NON_MELANOMA,
    "benign": NON_MELANOMA, "0": NON_MELANOMA,
}


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetRecord:
    id: str
    image_path: Path
    truth_mask_path: Path | None = None
    label: str | None = None
    source: str = "custom"

    @property
    def is_melanoma(self) -> bool | None:
        return None if self.label is None else self.label == MELANOMA


def parse_label(text: str | None) -> str | None:
    if text is None or not text.strip():
        return None
    key = text.strip().lower()
    if key not in _LABEL_ALIASES:
        raise DatasetError(f"unknown label {text!r}")
    return _LABEL_ALIASES[key]


def read_manifest(path, source: str = "custom") -> list[DatasetRecord]:
    """Read a CSV with columns id,image[,mask][,label]; paths are relative
    to the manifest's directory."""
    path = Path(path)
    base = path.parent
    try:
        text = path.read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise DatasetError(f"{path}: cannot read manifest: {exc}") from None
    reader = csv.reader(text.splitlines())
    try:
        header = [h.strip().lower() for h in next(reader)]
    except StopIteration:
        raise DatasetError(f"{path}: manifest is empty") from None
    except csv.Error as exc:
        raise DatasetError(f"{path}:1: {exc}") from None
    if "id" not in header or "image" not in header:
        raise DatasetError(f"{path}:1: header must contain 'id' and 'image'")
    col = {name: header.index(name) for name in header}
    records: list[DatasetRecord] = []
    seen: set[str] = set()
    line = 1
    while True:
        try:
            row = next(reader)
        except StopIteration:
            break
        except csv.Error as exc:
            raise DatasetError(f"{path}:{line + 1}: {exc}") from None
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DatasetError(f"{path}:{line}: expected {len(header)} fields, got {len(row)}")

        def cell(name):
            return row[col[name]].strip() if name in col else ""

        rid = cell("id")
        if not rid:
            raise DatasetError(f"{path}:{line}: empty id")
        if rid in seen:
            raise DatasetError(f"{path}:{line}: duplicate id {rid!r}")
        seen.add(rid)
        image = base / cell("image")
        if not cell("image") or not image.is_file():
            raise DatasetError(f"{path}:{line}: row {rid!r} image not found: {image}")
        mask = None
        if cell("mask"):
            mask = base / cell("mask")
            if not mask.is_file():
                raise DatasetError(f"{path}:{line}: row {rid!r} mask not found: {mask}")
        try:
            label = parse_label(cell("label"))
        except DatasetError as exc:
            raise DatasetError(f"{path}:{line}: row {rid!r}: {exc}") from None
        records.append(DatasetRecord(rid, image, mask, label, source))
    return records


def _ph2_diagnoses(index: Path) -> dict[str, str]:
    """Parse the '||'-delimited PH2 table; Clinical Diagnosis 0/1 (common or
    atypical nevus) is non-melanoma, 2 is melanoma."""
    out: dict[str, str] = {}
    diag_col = None
    for lineno, raw in enumerate(index.read_text(errors="replace").splitlines(), 1):
        if "||" not in raw:
            continue
        cells = [c.strip() for c in raw.strip().strip("|").split("||")]
        if diag_col is None:
            low = [c.lower() for c in cells]
            for i, c in enumerate(low):
                if "clinical diagnosis" in c:
                    diag_col = i
            continue
        if not cells or not re.fullmatch(r"IMD\d+", cells[0]):
            continue
        try:
            code = int(cells[diag_col])
        except (ValueError, IndexError):
            raise DatasetError(f"{index}:{lineno}: bad diagnosis for {cells[0]}") from None
        if code not in (0, 1, 2):
            raise DatasetError(f"{index}:{lineno}: bad diagnosis code {code}")
        out[cells[0]] = MELANOMA if code == 2 else NON_MELANOMA
    if diag_col is None:
        raise DatasetError(f"{index}: no 'Clinical Diagnosis' column")
    return out


def _first_image(folder: Path) -> Path | None:
    if not folder.is_dir():
        return None
    hits = sorted(p for p in folder.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    return hits[0] if hits else None


def ingest_ph2(root) -> list[DatasetRecord]:
    root = Path(root)
    indexes = sorted(root.rglob("PH2_dataset.txt"))
    labels = _ph2_diagnoses(indexes[0]) if indexes else {}
    if not indexes:
        log.warning("%s: no PH2_dataset.txt found; records carry no labels", root)
    records = []
    for case in sorted(p for p in root.rglob("IMD*") if p.is_dir() and re.fullmatch(r"IMD\d+", p.name)):
        image = _first_image(case / f"{case.name}_Dermoscopic_Image")
        if image is None:
            log.warning("%s: no dermoscopic image, skipped", case)
            continue
        mask = _first_image(case / f"{case.name}_lesion")
        records.append(DatasetRecord(case.name, image, mask, labels.get(case.name), "ph2"))
    return records


def ingest(root, source: str = "custom") -> list[DatasetRecord]:
    """Collect records from a PH2 tree or a manifest (file, or a directory
    holding ``manifest.csv``)."""
    if source not in SOURCES:
        raise DatasetError(f"unknown source {source!r}")
    root = Path(root)
    if source == "ph2":
        if not root.is_dir():
            raise DatasetError(f"{root}: not a readable directory")
        records = ingest_ph2(root)
    else:
        manifest = root / "manifest.csv" if root.is_dir() else root
        if not manifest.is_file():
            raise DatasetError(f"{manifest}: manifest not found")
        for extra in sorted(manifest.parent.iterdir()) if root.is_dir() else ():
            if extra.is_file() and extra.suffix.lower() not in IMAGE_SUFFIXES + (".csv",):
                log.warning("%s: unrecognised file skipped", extra)
        records = read_manifest(manifest, source)
    if not records:
        raise DatasetError(f"{root}: no records found")
    return records
