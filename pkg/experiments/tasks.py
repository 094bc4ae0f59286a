# experiments/tasks.py
import logging
from dataclasses import asdict

from celery import group, shared_task

from bounds.lambertw import DEFAULT_W_CONFIG, WConfig

from .protocols import DEFAULT_MAX_REJECTIONS, run_heterogeneous_trial
from .serializers import ExperimentRecordSerializer

logger = logging.getLogger(__name__)


@shared_task
def heterogeneous_trial_task(n, z, seed, instance_id, w_cfg, max_rejections):
    """Draw and bound one random instance; returns the serialized record."""
    record = run_heterogeneous_trial(n, z, seed, instance_id, WConfig(**w_cfg), max_rejections)
    return dict(ExperimentRecordSerializer(record).data)


def parallel_heterogeneous_trials(designs, seed, w_cfg=DEFAULT_W_CONFIG, max_rejections=DEFAULT_MAX_REJECTIONS):
    """
    Run ``(n, z, instance_id)`` designs as a Celery group.

    Records come back in the order of ``designs``; the drawn instances
    themselves are not shipped back, only the emitted columns.
    """
    designs = list(designs)
    if not designs:
        return []
    job = group(
        heterogeneous_trial_task.s(n, z, seed, instance_id, asdict(w_cfg), max_rejections)
        for n, z, instance_id in designs
    )
    logger.info(f"Dispatching {len(designs)} heterogeneous trials")
    rows = [result.get() for result in job.apply_async().results]
    serializer = ExperimentRecordSerializer(data=rows, many=True)
    serializer.is_valid(raise_exception=True)
    return serializer.save()
