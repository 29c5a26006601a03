"""hk: command-line front end for the certificate library.

Every command produces a JSON report with a run manifest. Exit codes:
0 certificate or answer produced, 2 bounded search came back empty,
1 error or failed certificate.
"""

import argparse
import datetime
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from sympy import Matrix, eye

import app_config
from errors import HKError, MalformedInput, SearchExhausted, UnknownCommand, UnknownFixture
from fixture_utils import CatalogSource, _is_file, matrix_from_reference, oracle_path, resolve_lattice
from hodge import (
    hodge_decomposition,
    is_period_point,
    is_type_11,
    limit_mhs_summary,
    polarized_slice_member,
)
from isotropy import (
    NONEXISTENCE,
    NOT_FOUND,
    cusp_orbit_partition,
    find_isotropic,
    find_polarization,
    find_second_isotropic,
)
from lattice import Lattice, primitive_sublattice, signature
from lattice_validation import GramValidator
from linalg_utils import rank_sequence
from log import CertificateLogger, RunManifest, hash_file, load_manifest
from monodromy import (
    check_isometry,
    eichler_transvection,
    jordan_type,
    large_radius_certificate,
    primitive_invariant_cycle,
    recheck_large_radius_certificate,
    unipotency_index,
    weight_filtration_order2,
)
from report_utils import render_text
from rrh import IntersectionOracle, euler_characteristic, vanishing_relation_check
from serialization import (
    loads,
    matrix_to_json,
    parse_complex_vector,
    parse_int_vector,
    parse_matrix,
    rational_to_str,
    read_json,
)
from settings_utils import RunSettings, load_config, save_config
from sympow import sym_power_operator, verbitsky_power_vanishing, verify_mon1

logger = logging.getLogger(__name__)

OK = "ok"
FAILED = "failed"
EXIT_CODES = {OK: 0, NONEXISTENCE: 0, NOT_FOUND: 2, FAILED: 1}


class ArgumentParser(argparse.ArgumentParser):
    """Raises MalformedInput instead of exiting so run() can report it."""

    def error(self, message):
        raise MalformedInput(f"{self.prog}: {message}", {"path": "argv"})


class Context:
    def __init__(self, args: argparse.Namespace, settings: RunSettings):
        self.args = args
        self.settings = settings
        self.fixture_hashes: Dict[str, str] = {}

    def lattice(self, required: bool = True):
        if self.args.lattice is None:
            if required:
                raise MalformedInput("--lattice is required for this command", {"path": "argv.--lattice"})
            return None
        lat, hashes = resolve_lattice(self.args.lattice)
        self.fixture_hashes.update(hashes)
        return lat

    def matrix(self, flag: str = "matrix") -> Matrix:
        value = getattr(self.args, flag, None)
        if value is None:
            raise MalformedInput(f"--{flag} is required for this command", {"path": f"argv.--{flag}"})
        self._hash_if_file(value)
        return matrix_from_reference(value, f"--{flag}")

    def vector(self, flag: str, required: bool = True):
        value = getattr(self.args, flag, None)
        if value is None:
            if required:
                raise MalformedInput(f"--{flag} is required for this command", {"path": f"argv.--{flag}"})
            return None
        return parse_int_vector(self._json_arg(value, flag), f"--{flag}")

    def complex_vector(self, flag: str = "tau"):
        value = getattr(self.args, flag, None)
        if value is None:
            raise MalformedInput(f"--{flag} is required for this command", {"path": f"argv.--{flag}"})
        return parse_complex_vector(self._json_arg(value, flag), f"--{flag}")

    def json_file(self, flag: str):
        value = getattr(self.args, flag, None)
        if value is None:
            raise MalformedInput(f"--{flag} is required for this command", {"path": f"argv.--{flag}"})
        self._hash_if_file(value)
        return read_json(value)

    def _json_arg(self, value: str, flag: str):
        if _is_file(value):
            self._hash_if_file(value)
            return read_json(value)
        return value

    def _hash_if_file(self, value: str) -> None:
        if _is_file(value):
            self.fixture_hashes[str(value)] = hash_file(value)


def _search_outcome(result) -> str:
    return OK if result.found else result.status


def _certificate_outcome(cert) -> str:
    return OK if cert.valid else FAILED


# commands


def cmd_sig(ctx: Context) -> Tuple[Dict, str]:
    lat = ctx.lattice()
    sig = signature(lat)
    return {"signature": list(sig), "rank": lat.rank, "determinant": lat.determinant(), "even": lat.is_even()}, OK


def cmd_isotropic(ctx: Context) -> Tuple[Dict, str]:
    lat = ctx.lattice()
    result = find_isotropic(lat, ctx.settings.height, workers=ctx.settings.workers, seed=ctx.settings.seed)
    return result.to_dict(), _search_outcome(result)


def cmd_second(ctx: Context) -> Tuple[Dict, str]:
    lat = ctx.lattice()
    result = find_second_isotropic(lat, ctx.vector("delta"), ctx.settings.height, workers=ctx.settings.workers)
    return result.to_dict(), _search_outcome(result)


def cmd_polarize(ctx: Context) -> Tuple[Dict, str]:
    lat = ctx.lattice()
    result = find_polarization(lat, ctx.vector("delta"), ctx.settings.height, workers=ctx.settings.workers)
    payload = result.to_dict()
    if result.found and signature(lat) == (3, lat.rank - 3):
        _, sub_sig = primitive_sublattice(lat, result.vector)
        payload["L_perp_signature"] = list(sub_sig)
    return payload, _search_outcome(result)


def cmd_transvect(ctx: Context) -> Tuple[Dict, str]:
    lat = ctx.lattice()
    delta, v = ctx.vector("delta"), ctx.vector("v")
    T = eichler_transvection(lat, delta, v)
    N = T.nilpotent_part()
    return {
        "matrix": matrix_to_json(Matrix(T.matrix)),
        "index": unipotency_index(T),
        "rank_sequence": rank_sequence(N),
        "jordan_type": jordan_type(N).to_list(),
        "fixes_delta": T.apply(delta) == delta,
    }, OK


def cmd_jordan(ctx: Context) -> Tuple[Dict, str]:
    M = ctx.matrix()
    N = M if ctx.args.nilpotent else M - eye(M.rows)
    jt = jordan_type(N)
    return {"jordan_type": jt.to_list(), "rank_sequence": rank_sequence(N), "index": len(rank_sequence(N)) - 1}, OK


def cmd_wfilt(ctx: Context) -> Tuple[Dict, str]:
    T = check_isometry(ctx.lattice(), ctx.matrix())
    filtration, parity = weight_filtration_order2(T)
    return {"filtration": filtration.to_dict(), "parity": parity.to_dict()}, OK


def cmd_sympow(ctx: Context) -> Tuple[Dict, str]:
    M = ctx.matrix()
    S = sym_power_operator(M, ctx.settings.n)
    N = S - eye(S.rows)
    payload = {"n": ctx.settings.n, "dimension": S.rows, "rank_sequence": rank_sequence(N)}
    if ctx.args.show_matrix:
        payload["matrix"] = matrix_to_json(S)
    if unipotency_index(S) is not None:
        payload["index"] = unipotency_index(S)
        payload["jordan_type"] = jordan_type(N).to_list()
    return payload, OK


def cmd_mon1(ctx: Context) -> Tuple[Dict, str]:
    cert = verify_mon1(ctx.matrix(), ctx.settings.n, all_degrees=ctx.args.all_degrees)
    return {"certificate": cert.to_dict()}, _certificate_outcome(cert)


def cmd_powvanish(ctx: Context) -> Tuple[Dict, str]:
    lat = ctx.lattice()
    l = ctx.vector("l", required=False)
    payload = {}
    if l is None:
        result = find_isotropic(lat, ctx.settings.height, workers=ctx.settings.workers)
        payload["search"] = result.to_dict()
        if not result.found:
            payload["result"] = result.status
            return payload, NOT_FOUND
        l = result.vector
    cert = verbitsky_power_vanishing(lat, l, ctx.settings.n, ctx.vector("x", required=False), ctx.settings.budget)
    payload["certificate"] = cert.to_dict()
    return payload, _certificate_outcome(cert)


def cmd_lrl_cert(ctx: Context) -> Tuple[Dict, str]:
    lat = ctx.lattice()
    try:
        cert = large_radius_certificate(lat, ctx.settings.n, ctx.settings.height, workers=ctx.settings.workers)
    except SearchExhausted as e:
        return {"result": e.outcome, "message": e.message, "details": e.details}, NOT_FOUND
    return {"certificate": cert.to_dict()}, _certificate_outcome(cert)


def cmd_recheck(ctx: Context) -> Tuple[Dict, str]:
    data = ctx.json_file("certificate")
    if not isinstance(data, dict):
        raise MalformedInput("Certificate file must hold a JSON object", {"path": "$"})
    cert = recheck_large_radius_certificate(data.get("certificate", data))
    return {"recheck": cert.to_dict()}, _certificate_outcome(cert)


def cmd_invcycle(ctx: Context) -> Tuple[Dict, str]:
    T = check_isometry(ctx.lattice(), ctx.matrix())
    cert = primitive_invariant_cycle(T)
    return {"certificate": cert.to_dict()}, _certificate_outcome(cert)


def cmd_period(ctx: Context) -> Tuple[Dict, str]:
    return is_period_point(ctx.lattice(), ctx.complex_vector()).to_dict(), OK


def cmd_hodge(ctx: Context) -> Tuple[Dict, str]:
    return hodge_decomposition(ctx.lattice(), ctx.complex_vector()).to_dict(), OK


def cmd_type11(ctx: Context) -> Tuple[Dict, str]:
    lat = ctx.lattice()
    return {"type_11": is_type_11(ctx.vector("alpha"), lat, ctx.complex_vector())}, OK


def cmd_slice(ctx: Context) -> Tuple[Dict, str]:
    lat = ctx.lattice()
    return {"in_slice": polarized_slice_member(lat, ctx.complex_vector(), ctx.vector("L"))}, OK


def cmd_mhs(ctx: Context) -> Tuple[Dict, str]:
    T = check_isometry(ctx.lattice(), ctx.matrix())
    return limit_mhs_summary(T).to_dict(), OK


def cmd_rrh(ctx: Context) -> Tuple[Dict, str]:
    path = oracle_path(ctx.args.oracle) if ctx.args.oracle else None
    if path is None:
        raise MalformedInput("--oracle is required for rrh", {"path": "argv.--oracle"})
    ctx.fixture_hashes[str(path)] = hash_file(path)
    oracle = IntersectionOracle.from_dict(read_json(path))
    n = ctx.args.n if ctx.args.n is not None else oracle.n
    chi, transcript = euler_characteristic(oracle, n)
    payload = {
        "n": n,
        "chi": rational_to_str(chi),
        "expected_chi": n + 1,
        "consistent_with_n_plus_1": chi == n + 1,
        "transcript": transcript.to_dict("records"),
    }
    passed = chi == n + 1
    if ctx.args.check_vanishing:
        check = vanishing_relation_check(oracle, n)
        payload.update(relations=check["relations"], all_passed=check["all_passed"], todd_integral=check["todd_integral"])
        passed = passed and check["all_passed"]
    return payload, OK if passed else FAILED


def cmd_cusps(ctx: Context) -> Tuple[Dict, str]:
    lat = ctx.lattice()
    L = ctx.vector("L", required=False)
    generators = []
    if ctx.args.gens is not None:
        data = ctx._json_arg(ctx.args.gens, "gens")
        data = loads(data, "--gens") if isinstance(data, str) else data
        if not isinstance(data, list):
            raise MalformedInput("--gens must be a JSON list of matrices", {"path": "--gens"})
        generators = [
            check_isometry(lat, parse_matrix(g, f"--gens[{i}]", integral=True)).matrix for i, g in enumerate(data)
        ]
    classes = cusp_orbit_partition(lat, L, generators, ctx.settings.height, ctx.settings.depth)
    return {
        "classes": [c.to_dict() for c in classes],
        "lines": sum(len(c.members) for c in classes),
        "depth": ctx.settings.depth,
        "height": ctx.settings.height,
    }, OK


def cmd_validate(ctx: Context) -> Tuple[Dict, str]:
    reference = ctx.args.lattice
    if reference is None:
        raise MalformedInput("--lattice is required for validate", {"path": "argv.--lattice"})
    if _is_file(reference):
        ctx._hash_if_file(reference)
        data = read_json(reference)
        name = Path(reference).stem
    else:
        catalog = CatalogSource()
        if reference not in catalog.entries:
            raise UnknownFixture(f"No fixture named {reference!r}", {"name": reference})
        data, name = catalog.entries[reference], reference
        ctx.fixture_hashes.update(catalog.fingerprint(reference))
    if isinstance(data, dict) and "blocks" in data:
        gram = Lattice.from_blocks(data["blocks"], name).rows
    else:
        gram = data.get("gram", []) if isinstance(data, dict) else data
    validator = GramValidator(gram if isinstance(gram, list) else [], name)
    results = validator.validate_all(bb=ctx.args.bb)
    checks = {
        k: {"status": r["status"], "message": r["message"], "affected": r["affected_rows"].to_dict("records")}
        for k, r in results.items()
    }
    return {"lattice": name, "passed": validator.validation_passed(), "checks": checks}, OK if validator.validation_passed() else FAILED


def cmd_fixtures(ctx: Context) -> Tuple[Dict, str]:
    catalog = CatalogSource()
    ctx.fixture_hashes.update(catalog.fingerprint(""))
    return {"fixtures": catalog.describe()}, OK


def cmd_settings(ctx: Context) -> Tuple[Dict, str]:
    if ctx.args.save:
        save_config(ctx.settings.to_dict(), ctx.args.settings_file)
    return {"settings": ctx.settings.to_dict(), "saved": bool(ctx.args.save)}, OK


def cmd_history(ctx: Context) -> Tuple[Dict, str]:
    history = CertificateLogger()
    removed = 0
    if ctx.args.clear_days is not None:
        removed = history.clear_old_logs(days_to_keep=ctx.args.clear_days)
    payload = history.get_run_history(page=ctx.args.page, per_page=ctx.args.per_page)
    payload["cleared"] = removed
    return payload, OK


def cmd_replay(ctx: Context) -> Tuple[Dict, str]:
    manifest = load_manifest(ctx.args.manifest)
    argv = manifest.arguments.get("argv")
    if manifest.command == "replay" or not isinstance(argv, list):
        raise MalformedInput("Manifest cannot be replayed", {"path": "$.arguments.argv"})
    _, report = run(argv, record=False)
    fresh = report.get("manifest", {})
    payload = {k: v for k, v in report.items() if k != "manifest"}
    differences = sorted(
        k for k in set(payload) | set(manifest.payload) if payload.get(k) != manifest.payload.get(k)
    )
    identical = not differences
    return {
        "replayed": manifest.command,
        "identical": identical,
        "differences": differences,
        "fixture_hashes_match": fresh.get("fixture_hashes") == manifest.fixture_hashes,
        "library_version_match": manifest.library_version == app_config.__version__,
    }, OK if identical else FAILED


COMMANDS: Dict[str, Tuple[Callable[[Context], Tuple[Dict, str]], str]] = {
    "sig": (cmd_sig, "signature of the Gram form"),
    "isotropic": (cmd_isotropic, "first primitive isotropic vector within --height"),
    "second": (cmd_second, "isotropic vector not proportional to --delta"),
    "polarize": (cmd_polarize, "positive vector orthogonal to --delta"),
    "transvect": (cmd_transvect, "Eichler transvection for --delta, --v"),
    "jordan": (cmd_jordan, "Jordan type of a unipotent (or --nilpotent) --matrix"),
    "wfilt": (cmd_wfilt, "weight filtration of an index-2 isometry"),
    "sympow": (cmd_sympow, "symmetric power of --matrix"),
    "mon1": (cmd_mon1, "unique maximal block of S^n(T1)"),
    "powvanish": (cmd_powvanish, "l^n != 0 and l^(n+1) = 0 in the truncated ring"),
    "lrl-cert": (cmd_lrl_cert, "large radius limit certificate"),
    "recheck": (cmd_recheck, "independent re-check of an lrl certificate"),
    "invcycle": (cmd_invcycle, "primitive invariant cycle of an index-3 isometry"),
    "period": (cmd_period, "period point test for --tau"),
    "hodge": (cmd_hodge, "Hodge decomposition for --tau"),
    "type11": (cmd_type11, "is --alpha of type (1,1)"),
    "slice": (cmd_slice, "is --tau in the slice polarized by --L"),
    "mhs": (cmd_mhs, "limiting filtration summary of --matrix"),
    "rrh": (cmd_rrh, "Euler characteristic from an intersection --oracle"),
    "cusps": (cmd_cusps, "isotropic lines merged by --generators words"),
    "validate": (cmd_validate, "validate a Gram matrix"),
    "fixtures": (cmd_fixtures, "list the fixture catalog"),
    "replay": (cmd_replay, "re-run a stored manifest and compare payloads"),
    "settings": (cmd_settings, "show or --save default settings"),
    "history": (cmd_history, "stored run logs, newest first"),
}


def _parse_args(argv: List[str]) -> argparse.Namespace:
    common = ArgumentParser(add_help=False)
    common.add_argument("--lattice", help="lattice JSON path or fixture name")
    common.add_argument("--height", type=int)
    common.add_argument("--depth", type=int)
    common.add_argument("--n", type=int)
    common.add_argument("--budget", type=int)
    common.add_argument("--format", choices=["json", "text"])
    common.add_argument("--workers", type=int)
    common.add_argument("--seed", type=int, help="reorders parallel work only")
    common.add_argument("--oracle")
    common.add_argument("--settings-file", dest="settings_file")
    common.add_argument("--save-manifest", dest="save_manifest")
    common.add_argument("--record", action="store_true", help="store the run log under HK_LOG_DIR")

    parser = ArgumentParser(prog="hk", description="Hyper-Kahler lattice certificates")
    sub = parser.add_subparsers(dest="command")
    parsers = {name: sub.add_parser(name, parents=[common], help=text) for name, (_, text) in COMMANDS.items()}
    for name in ("second", "polarize", "transvect"):
        parsers[name].add_argument("--delta")
    parsers["transvect"].add_argument("--v")
    for name in ("jordan", "wfilt", "sympow", "mon1", "invcycle", "mhs"):
        parsers[name].add_argument("--matrix")
    parsers["jordan"].add_argument("--nilpotent", action="store_true")
    parsers["sympow"].add_argument("--show-matrix", dest="show_matrix", action="store_true")
    parsers["mon1"].add_argument("--all-degrees", dest="all_degrees", action="store_true")
    parsers["powvanish"].add_argument("--l")
    parsers["powvanish"].add_argument("--x")
    parsers["recheck"].add_argument("--certificate")
    for name in ("period", "hodge", "type11", "slice"):
        parsers[name].add_argument("--tau")
    parsers["type11"].add_argument("--alpha")
    for name in ("slice", "cusps"):
        parsers[name].add_argument("--polarization", "--L", dest="L")
    parsers["cusps"].add_argument("--gens", "--generators", dest="gens", help="JSON list of isometry matrices")
    parsers["rrh"].add_argument("--check-vanishing", dest="check_vanishing", action="store_true")
    parsers["validate"].add_argument("--bb", action="store_true", help="also require signature (3, rank-3)")
    parsers["replay"].add_argument("--manifest")
    parsers["settings"].add_argument("--save", action="store_true")
    parsers["history"].add_argument("--page", type=int, default=1)
    parsers["history"].add_argument("--per-page", dest="per_page", type=int, default=10)
    parsers["history"].add_argument("--clear-days", dest="clear_days", type=int, help="first delete logs older than this many days")
    return parser.parse_args(argv)


def _jsonable(value: Any) -> Any:
    return json.loads(json.dumps(value, default=str))


def _load_settings(args: argparse.Namespace) -> RunSettings:
    """Built-in defaults, then the saved settings file, then explicit flags."""
    overrides = {k: getattr(args, k) for k in ("height", "depth", "n", "budget", "format", "workers", "seed")}
    try:
        return RunSettings.from_dict(load_config(args.settings_file)).merged(overrides)
    except (TypeError, ValueError) as e:
        raise MalformedInput(f"Invalid settings: {e}", {"path": "settings"})


def run(argv: Optional[List[str]] = None, record: Optional[bool] = None) -> Tuple[int, Dict]:
    """Execute one command; returns (exit code, report)."""
    argv = list(sys.argv[1:] if argv is None else argv)
    start_time = datetime.datetime.now()
    command = argv[0] if argv else ""
    manifest = RunManifest(command=command, arguments={"argv": argv})
    args = None
    error_message = None
    try:
        if command not in COMMANDS:
            raise UnknownCommand(f"Unknown command {command!r}", {"known": sorted(COMMANDS)})
        args = _parse_args(argv)
        settings = _load_settings(args)
        manifest.arguments["settings"] = settings.to_dict()
        ctx = Context(args, settings)
        payload, outcome = COMMANDS[command][0](ctx)
        manifest.fixture_hashes = dict(sorted(ctx.fixture_hashes.items()))
        manifest.outcome = outcome
        manifest.exit_code = EXIT_CODES[outcome]
        manifest.payload = _jsonable(payload)
    except HKError as e:
        logger.error(f"{e.code}: {e.message}")
        manifest.outcome = "error"
        manifest.exit_code = 1
        manifest.payload = _jsonable(e.to_dict())
        error_message = e.message

    report = dict(manifest.payload)
    report["manifest"] = {k: v for k, v in manifest.to_dict().items() if k != "payload"}

    if args is not None and args.save_manifest:
        with open(args.save_manifest, "w") as f:
            json.dump(manifest.to_dict(), f, indent=4)
    if record is None:
        record = app_config.HK_RECORD_RUNS or (args is not None and args.record)
    if record:
        CertificateLogger().create_run_log(manifest, start_time, datetime.datetime.now(), manifest.outcome, error_message)
    return manifest.exit_code, report


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=getattr(logging, app_config.HK_LOG_LEVEL, logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler(sys.stderr)],
    )
    code, report = run(argv)
    fmt = report["manifest"]["arguments"].get("settings", {}).get("format", "json")
    if fmt == "text":
        print(render_text(report))
    else:
        print(json.dumps(report, indent=2, default=str))
    return code


if __name__ == "__main__":
    sys.exit(main())
