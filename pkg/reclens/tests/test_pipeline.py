import time

import pytest

from reclens.attribution import attribute
from reclens.events import dump_log, load_log
from reclens.generator import GeneratorConfig, generate
from reclens.metrics import bucket_all, compute_all


@pytest.fixture(scope="module")
def large_log(tmp_path_factory):
    log, _ = generate(GeneratorConfig(seed=1, customers=10_000, days=11), n_jobs=-1)
    path = tmp_path_factory.mktemp("pipeline") / "large.jsonl"
    with path.open("w") as handle:
        dump_log(log, handle)
    return path, log.size


@pytest.mark.slow
def test_single_threaded_pipeline_throughput(large_log):
    path, size = large_log
    started = time.perf_counter()
    log = load_log(path)
    attr = attribute(log, n_jobs=1)
    compute_all(attr)
    bucket_all(attr, log)
    elapsed = time.perf_counter() - started

    assert log.size == size
    seconds_per_million = elapsed * 1_000_000 / size
    assert seconds_per_million < 10, f"{seconds_per_million:.1f}s per million events"
