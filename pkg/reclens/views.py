from pathlib import Path

from django.conf import settings
from django.core.cache import cache
from django.http import JsonResponse
from django.views.decorators.http import require_GET

from .attribution import attribute
from .events import load_log
from .exceptions import ReclensError
from .forms import FilterConfigForm, WindowConfigForm, bind
from .metrics import MetricKind, bucket_all, compute_all
from .report import build_report

FILTER_KEYS = ("clicked_today", "atc_window_days", "atc_filter_enabled")


def resolve_log(name):
    """
    Maps a log name from the query string to a file inside RECLENS_LOG_DIR.
    Returns None for anything that would leave that directory.
    """
    if not name or "\x00" in name:
        return None
    base = Path(settings.RECLENS_LOG_DIR).resolve()
    candidate = (base / name).resolve()
    if candidate == base or not candidate.is_relative_to(base):
        return None
    return candidate


def _cache_key(prefix, path, params):
    stamp = path.stat().st_mtime_ns if path.exists() else 0
    query = "&".join(f"{k}={v}" for k, v in sorted(params.lists()))
    return f"{prefix}:{path}:{stamp}:{query}"


def _pairs(values):
    pairs = []
    for value in values:
        first, _, second = value.partition(",")
        pairs.append((MetricKind.parse(first), MetricKind.parse(second)))
    return pairs


def _cached(request, prefix, compute):
    """
    Shared body of the JSON views: resolve the log, serve from cache when
    possible, and turn domain errors into an error payload.
    """
    path = resolve_log(request.GET.get("log", "").strip())
    if path is None:
        # Invalid or missing log name; error JSON with status 200
        return JsonResponse({"error": "Missing or invalid log name"}, status=200)

    cache_key = _cache_key(prefix, path, request.GET)
    cached_data = cache.get(cache_key)
    if cached_data:
        return JsonResponse(cached_data)

    try:
        data = compute(path, request.GET)
    except ValueError as exc:
        return JsonResponse({"error": str(exc)}, status=200)
    except ReclensError as exc:
        return JsonResponse({"error": str(exc)}, status=200)

    cache.set(cache_key, data, timeout=settings.RECLENS_REPORT_CACHE_SECONDS)
    return JsonResponse(data)


def _report(path, params):
    windows = bind(WindowConfigForm, params).to_config()
    filter_cfg = None
    if params.get("filters") or any(key in params for key in FILTER_KEYS):
        filter_cfg = bind(FilterConfigForm, params).to_config()
    log = load_log(path)
    report = build_report(
        log, windows, pairs=_pairs(params.getlist("pair")), filter_cfg=filter_cfg,
        n_jobs=settings.RECLENS_THREADS or -1,
    )
    return report.to_dict()


def _metrics(path, params):
    windows = bind(WindowConfigForm, params).to_config()
    log = load_log(path)
    attr = attribute(log, windows, n_jobs=settings.RECLENS_THREADS or -1)
    daily = bucket_all(attr, log, windows.tz_offset)
    return {
        "source_name": log.source_name,
        "metrics": [value.to_dict() for value in compute_all(attr)],
        "daily": {
            kind.value: [
                {"date": day.isoformat(), "successes": v.successes, "trials": v.trials}
                for day, v in series.days
            ]
            for kind, series in daily.items()
        },
        "unattributed_actions": {
            kind.value: count for kind, count in attr.unattributed_actions.items()
        },
    }


@require_GET
def report_view(request):
    """
    Full evaluation report for one log.

    Expects 'log' (a file name under RECLENS_LOG_DIR); accepts the window
    flags, repeated 'pair=A,B', and 'filters=1' or any filter flag to add
    the filter simulation. Errors come back as {"error": ...} with HTTP 200.
    """
    return _cached(request, "reclens_report", _report)


@require_GET
def metrics_view(request):
    """Whole-log metrics, daily counts and unattributed action counts for one log."""
    return _cached(request, "reclens_metrics", _metrics)
