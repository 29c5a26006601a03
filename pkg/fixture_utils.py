import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from sympy import Matrix

from errors import UnknownFixture, ValidationFailed
from lattice import Lattice
from lattice_validation import validate_gram
from log import hash_file
from serialization import loads, parse_matrix, read_json

logger = logging.getLogger(__name__)

CATALOG_PATH = Path(__file__).resolve().parent / "lattice_fixtures.json"
ORACLE_DIR = Path(__file__).resolve().parent / "oracles"


def _is_file(reference: str) -> bool:
    try:
        return Path(reference).is_file()
    except (OSError, ValueError):
        return False


class LatticeSource(ABC):
    """Abstract base class for places lattices are read from"""

    @abstractmethod
    def list_names(self) -> List[str]:
        """Names this source can load"""
        pass

    @abstractmethod
    def load(self, name: str) -> Lattice:
        """Parse and validate one lattice"""
        pass

    @abstractmethod
    def fingerprint(self, name: str) -> Dict[str, str]:
        """sha256 of every file the lattice was read from"""
        pass


def _lattice_from_entry(entry, name: str, path: str) -> Lattice:
    if not isinstance(entry, dict):
        raise ValidationFailed(f"Fixture {name} must be a JSON object", {"path": path})
    if "blocks" in entry:
        lat = Lattice.from_blocks(entry["blocks"], entry.get("name", name))
        return validate_gram(lat.rows, lat.name, bb="bb" in entry.get("tags", ()), path=path)
    gram = entry.get("gram")
    if not isinstance(gram, list):
        raise ValidationFailed(f"Fixture {name} needs 'gram' or 'blocks'", {"path": f"{path}.gram"})
    lat = validate_gram(gram, entry.get("name", name), bb="bb" in entry.get("tags", ()), path=path)
    labels = tuple(entry.get("labels", ()))
    return Lattice(lat.name, lat.gram, labels) if labels else lat


class CatalogSource(LatticeSource):
    """Named fixtures bundled in lattice_fixtures.json"""

    def __init__(self, path: Optional[Path] = None):
        self.path = Path(path or CATALOG_PATH)
        self._entries = None

    @property
    def entries(self) -> Dict:
        if self._entries is None:
            data = read_json(self.path)
            if not isinstance(data, dict):
                raise ValidationFailed("Fixture catalog must be a JSON object", {"path": "$"})
            self._entries = data
        return self._entries

    def list_names(self) -> List[str]:
        return list(self.entries)

    def tagged(self, tag: str) -> List[str]:
        return [name for name, entry in self.entries.items() if tag in entry.get("tags", ())]

    def describe(self) -> List[Dict]:
        return [
            {"name": name, "description": entry.get("description", ""), "tags": entry.get("tags", [])}
            for name, entry in self.entries.items()
        ]

    def load(self, name: str) -> Lattice:
        if name not in self.entries:
            raise UnknownFixture(f"No fixture named {name!r}", {"name": name, "known": self.list_names()})
        logger.debug(f"Loading fixture {name} from {self.path}")
        return _lattice_from_entry(self.entries[name], name, f"$[{name!r}]")

    def fingerprint(self, name: str) -> Dict[str, str]:
        return {str(self.path): hash_file(self.path)}


class FileSource(LatticeSource):
    """A lattice JSON file: {"name", "gram"} or {"name", "blocks"}"""

    def __init__(self, path):
        self.path = Path(path)

    def list_names(self) -> List[str]:
        return [self.path.stem]

    def load(self, name: Optional[str] = None) -> Lattice:
        data = read_json(self.path)
        if isinstance(data, dict) and "name" not in data:
            data = {**data, "name": self.path.stem}
        name = data.get("name", self.path.stem) if isinstance(data, dict) else self.path.stem
        return _lattice_from_entry(data, name, "$")

    def fingerprint(self, name: Optional[str] = None) -> Dict[str, str]:
        return {str(self.path): hash_file(self.path)}


def get_lattice_source(reference: str) -> Tuple[LatticeSource, str]:
    """A file path wins over a catalog name of the same spelling."""
    if _is_file(reference):
        return FileSource(reference), Path(reference).stem
    return CatalogSource(), reference


def load_fixture(name: str) -> Lattice:
    return CatalogSource().load(name)


def resolve_lattice(reference: str) -> Tuple[Lattice, Dict[str, str]]:
    source, name = get_lattice_source(reference)
    return source.load(name), source.fingerprint(name)


def corpus(tag: str = "corpus") -> List[Lattice]:
    catalog = CatalogSource()
    return [catalog.load(name) for name in catalog.tagged(tag)]


def oracle_path(reference: str) -> Path:
    """Oracle file by path, or by bundled name ("k3", "k3n2", "k3n3")."""
    if _is_file(reference):
        return Path(reference)
    bundled = ORACLE_DIR / f"{reference}.json"
    if bundled.is_file():
        return bundled
    raise UnknownFixture(f"No oracle file or bundled oracle named {reference!r}", {"name": reference})


def matrix_from_reference(reference: str, path: str = "$") -> Matrix:
    """Matrix JSON given inline or as a file path."""
    data = read_json(reference) if _is_file(reference) else loads(reference, path)
    return parse_matrix(data, path)
