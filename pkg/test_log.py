import json
from datetime import datetime, timedelta

import pytest

from errors import MalformedInput
from log import CertificateLogger, RunManifest, hash_file, hash_files, load_manifest


@pytest.fixture
def logger(tmp_path):
    """Create a logger instance with temporary directory"""
    return CertificateLogger(log_dir=tmp_path)


@pytest.fixture
def sample_manifest():
    return RunManifest(
        command="isotropic",
        arguments={"argv": ["isotropic", "--lattice", "rank5-a"], "settings": {"height": 3}},
        fixture_hashes={"lattice_fixtures.json": "abc123"},
        payload={"result": "found", "vector": [1, 0, 0, 1, 0]},
    )


@pytest.fixture
def sample_log_entry(sample_manifest):
    return {
        "run_timestamp": "2024-01-01T12:00:00",
        "manifest": sample_manifest.to_dict(),
        "execution_details": {
            "start_time": "2024-01-01T12:00:00",
            "end_time": "2024-01-01T12:01:00",
            "duration_seconds": 60,
            "status": "ok",
        },
    }


def write_log(directory, entry, suffix="000000"):
    timestamp = datetime.fromisoformat(entry["run_timestamp"])
    path = directory / f"run_log_{timestamp.strftime('%Y%m%d_%H%M%S')}_{suffix}.json"
    path.write_text(json.dumps(entry))
    return path


class TestRunManifest:
    def test_round_trip(self, sample_manifest):
        again = RunManifest.from_dict(json.loads(json.dumps(sample_manifest.to_dict())))
        assert again == sample_manifest

    def test_defaults(self):
        manifest = RunManifest(command="sig", arguments={})
        assert manifest.outcome == "ok"
        assert manifest.exit_code == 0
        assert manifest.fixture_hashes == {}

    def test_load_bare_manifest(self, tmp_path, sample_manifest):
        path = tmp_path / "m.json"
        path.write_text(json.dumps(sample_manifest.to_dict()))
        assert load_manifest(path) == sample_manifest

    def test_load_from_run_log(self, tmp_path, sample_log_entry, sample_manifest):
        path = write_log(tmp_path, sample_log_entry)
        assert load_manifest(path) == sample_manifest

    def test_not_a_manifest(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"payload": {}}))
        with pytest.raises(MalformedInput):
            load_manifest(path)


class TestHashes:
    def test_hash_changes_with_content(self, tmp_path):
        path = tmp_path / "a.json"
        path.write_text("[1]")
        first = hash_file(path)
        path.write_text("[2]")
        assert hash_file(path) != first
        assert len(first) == 64

    def test_hash_files(self, tmp_path):
        paths = [tmp_path / "a", tmp_path / "b"]
        for p in paths:
            p.write_text("x")
        hashes = hash_files(paths)
        assert set(hashes) == {str(p) for p in paths}
        assert len(set(hashes.values())) == 1


class TestCertificateLogger:
    """Test CertificateLogger class"""

    def test_init(self, tmp_path):
        """Test logger initialization"""
        log_dir = tmp_path / "nested" / "runs"
        logger = CertificateLogger(log_dir=log_dir)
        assert logger.log_dir == log_dir
        assert logger.log_dir.exists()
        assert logger.run_history == []

    def test_create_run_log(self, logger, sample_manifest):
        """Test creating a run log entry"""
        start_time = datetime(2024, 1, 1, 12, 0)
        end_time = start_time + timedelta(minutes=1)

        log_entry = logger.create_run_log(sample_manifest, start_time, end_time, "ok")

        assert log_entry["run_timestamp"] == start_time.isoformat()
        assert log_entry["execution_details"]["duration_seconds"] == 60
        assert log_entry["execution_details"]["status"] == "ok"
        assert log_entry["manifest"]["payload"]["vector"] == [1, 0, 0, 1, 0]
        assert "error_message" not in log_entry

    def test_error_handling(self, logger, sample_manifest):
        """Test error handling in log creation"""
        start_time = datetime.now()
        end_time = start_time + timedelta(seconds=10)

        log_entry = logger.create_run_log(sample_manifest, start_time, end_time, "error", "NotIsotropic: pair = 1")

        assert log_entry["execution_details"]["status"] == "error"
        assert log_entry["error_message"] == "NotIsotropic: pair = 1"

    def test_add_log_entry(self, logger, sample_log_entry):
        """Test adding a log entry"""
        path = logger.add_log_entry(sample_log_entry)

        assert len(logger.run_history) == 1
        assert path.name == "run_log_20240101_120000_000000.json"
        with open(path, "r") as f:
            assert json.load(f) == sample_log_entry

    def test_load_history_newest_first(self, tmp_path, sample_log_entry):
        """Test loading history from files"""
        later = dict(sample_log_entry, run_timestamp="2024-01-02T08:00:00")
        write_log(tmp_path, sample_log_entry)
        write_log(tmp_path, later)

        logger = CertificateLogger(log_dir=tmp_path)
        assert [e["run_timestamp"] for e in logger.run_history] == ["2024-01-02T08:00:00", "2024-01-01T12:00:00"]

    def test_corrupt_file_skipped(self, tmp_path, sample_log_entry):
        write_log(tmp_path, sample_log_entry)
        (tmp_path / "run_log_20240103_000000_000000.json").write_text("{not json")
        logger = CertificateLogger(log_dir=tmp_path)
        assert len(logger.run_history) == 1

    def test_get_run_history(self, logger, sample_log_entry):
        empty = logger.get_run_history()
        assert empty["runs"] == []
        assert empty["pages"] == 1

        for i in range(5):
            entry = dict(sample_log_entry, run_timestamp=f"2024-01-01T{12 + i}:00:00")
            logger.add_log_entry(entry)

        history = logger.get_run_history()
        assert len(history["runs"]) == 5
        assert history["runs"][0]["duration"] == "1m 0s"

        history = logger.get_run_history(page=2, per_page=3)
        assert len(history["runs"]) == 2
        assert history["pages"] == 2
        assert history["total"] == 5
        assert not history["has_next"]

    def test_get_run_history_rejects_bad_page(self, logger):
        with pytest.raises(MalformedInput):
            logger.get_run_history(page=0)

    def test_summarize_checks_recorded_inputs(self, logger, sample_log_entry, tmp_path):
        fixture = tmp_path / "lat.json"
        fixture.write_text("[[0, 1], [1, 0]]")
        manifest = dict(sample_log_entry["manifest"], fixture_hashes=hash_files([fixture]))
        entry = dict(sample_log_entry, manifest=manifest)
        row = logger.summarize(entry)
        assert row["command"] == "isotropic"
        assert row["outcome"] == "ok"
        assert row["inputs_unchanged"]

        fixture.write_text("[[2]]")
        assert not logger.summarize(entry)["inputs_unchanged"]

    def test_summarize_missing_input(self, logger, sample_log_entry):
        assert not logger.summarize(sample_log_entry)["inputs_unchanged"]

    @pytest.mark.parametrize(
        "seconds, expected",
        [
            (30, "30.0 seconds"),
            (90, "1m 30s"),
            (3600, "1h 0m 0s"),
            (3661, "1h 1m 1s"),
            (0, "0.0 seconds"),
        ],
    )
    def test_format_duration(self, logger, seconds, expected):
        assert logger.format_duration(seconds) == expected

    def test_clear_old_logs(self, tmp_path, sample_log_entry):
        write_log(tmp_path, dict(sample_log_entry, run_timestamp="2020-01-01T00:00:00"))
        recent = datetime.now().replace(microsecond=0).isoformat()
        write_log(tmp_path, dict(sample_log_entry, run_timestamp=recent))
        (tmp_path / "run_log_garbage.json").write_text("{}")

        logger = CertificateLogger(log_dir=tmp_path)
        assert logger.clear_old_logs(days_to_keep=30) == 1
        remaining = sorted(p.name for p in tmp_path.glob("run_log_*.json"))
        assert len(remaining) == 2
        assert "run_log_garbage.json" in remaining
